from typing import Literal, Optional

from pydantic import BaseModel, Field, ValidationError, model_validator

from core.configs import generator_config, homology_config
from models.optimization.program_specs import SlicingStrategy, WeightMode
from models.reports.cycle_stats import ReportModelException

GeneratorKind = Literal["normal", "gamma", "logistic", "exponential", "erdos-renyi"]
ProgramKind = Literal["edge-persistent", "edge-filtered", "triangle"]


class GeneratorSpec(BaseModel):
    kind: GeneratorKind = Field(..., description="分布类型")
    n: int = Field(..., ge=2, description="点数或矩阵阶数")
    dim: int = Field(default=2, ge=1, description="点云维数，erdos-renyi 忽略")
    seed: int = Field(default_factory=lambda: generator_config["default_seed"], ge=0, lt=2 ** 64,
                      description="64 位随机种子")

    @property
    def yields_distances(self) -> bool:
        return self.kind == "erdos-renyi"


class RunConfig(BaseModel):
    """一次运行的全部参数。

    输入源只能有一个：距离矩阵文件、点云文件、生成器，或 HTTP 请求体中的数据。
    """
    distances_path: Optional[str] = Field(default=None, description="距离矩阵 CSV")
    points_path: Optional[str] = Field(default=None, description="点云 CSV，每行一个点")
    generator: Optional[GeneratorSpec] = Field(default=None, description="随机生成器")
    inline_input: Optional[Literal["distances", "points"]] = Field(default=None, description="请求体中直接给出的输入")
    max_eps: Optional[float] = Field(default=None, description="过滤阈值，None 表示不截断")
    program: ProgramKind = Field(default="edge-persistent", description="优化程序")
    weight_mode: WeightMode = Field(default=WeightMode.UNIFORM, description="权重模式")
    integral: bool = Field(default=False, description="是否求整数解")
    slicing_strategy: SlicingStrategy = Field(
        default_factory=lambda: SlicingStrategy(homology_config["default_strategy"]), description="切片方式")
    out: Optional[str] = Field(default=None, description="输出路径")
    format: Literal["json", "csv"] = Field(default="json", description="输出格式")
    dedupe: bool = Field(default=False, description="是否去除重复点")
    float_distances: bool = Field(default=False, description="点云先转成 binary64 欧氏距离矩阵再构造，不用精确平方距离")
    compare_mip: bool = Field(default=False, description="是否同时求解 LP 与 MIP 并比较")
    replace: bool = Field(default=True, description="持续基优化是否逐个替换")

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        sources = [s for s in (self.distances_path, self.points_path, self.generator, self.inline_input) if s is not None]
        if len(sources) != 1:
            raise ValueError("必须且只能指定一个输入源")
        if self.float_distances and not (self.points_path is not None or
                                         (self.generator is not None and not self.generator.yields_distances)):
            raise ValueError("float_distances 只适用于点云文件或点云生成器")
        if self.weight_mode == WeightMode.AREA:
            if self.program != "triangle":
                raise ValueError("area 权重只适用于 triangle 程序")
            if not self.is_euclidean:
                raise ValueError("area 权重需要欧氏点云输入")
        if self.weight_mode == WeightMode.LENGTH and self.program == "triangle":
            raise ValueError("triangle 程序不支持 length 权重")
        if self.max_eps is not None and self.max_eps < 0:
            raise ValueError("max_eps 不能为负")
        return self

    @property
    def is_euclidean(self) -> bool:
        if self.float_distances:
            return False
        if self.points_path is not None or self.inline_input == "points":
            return True
        return self.generator is not None and not self.generator.yields_distances

    @classmethod
    def parse(cls, **values) -> "RunConfig":
        """构造并把 pydantic 校验错误转换为 ReportModelException(400)。"""
        try:
            return cls(**values)
        except ValidationError as e:
            error = e.errors()[0]
            location = ".".join(str(part) for part in error.get("loc", ()))
            message = error["msg"].removeprefix("Value error, ")
            raise ReportModelException(code=400, message=f"运行参数无效{f' ({location})' if location else ''}: {message}")

"""
精确有理数工具
所有链系数、过滤值与线性规划运算都使用 fractions.Fraction（始终为既约形式）
"""

import math
from fractions import Fraction
from typing import Tuple, Union

Number = Union[int, float, Fraction]


class RationalException(Exception):
    """有理数核心异常类"""
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


def rat_from_float(x: float) -> Fraction:
    """将二进制双精度浮点数精确地转换为有理数。

    每个有限的 binary64 值都是有理数，Fraction(float) 按其尾数与指数精确展开，
    因此 float(rat_from_float(x)) == x 按位成立。

    Args:
        x (float): 有限的浮点数

    Returns:
        Fraction: 与 x 完全相等的有理数

    Raises:
        RationalException: x 为 NaN 或无穷时抛出
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    try:
        value = float(x)
    except (TypeError, ValueError):
        raise RationalException(code=400, message=f"无法转换为有理数: {x!r}")
    if not math.isfinite(value):
        raise RationalException(code=400, message=f"非有限数值不能转换为有理数: {x!r}")
    return Fraction(value)


def as_fraction(value: Number) -> Fraction:
    """把整数、浮点数或字符串形式的分数统一为 Fraction。"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise RationalException(code=400, message=f"无效的分数字符串: {value!r}")
    return rat_from_float(value)


def fraction_pair(value: Fraction) -> Tuple[int, int]:
    return value.numerator, value.denominator


def format_fraction(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def is_integral(value: Fraction) -> bool:
    return value.denominator == 1

import os
import logging

from dotenv import load_dotenv

load_dotenv()


def _env_flag(name: str, default: str = "") -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


DEBUG_MODE = _env_flag("DEBUG_MODE")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
LOG_FORMAT = os.getenv("LOG_FORMAT", "%(asctime)s %(levelname)s %(name)s: %(message)s")

# 持续同调与优化求解配置
homology_config = {
    "default_strategy": os.getenv("HOMOLOGY_SLICING_STRATEGY", "build-part"),
    "mip_node_limit": int(os.getenv("HOMOLOGY_MIP_NODE_LIMIT", "10000")),
    "max_workers": int(os.getenv("HOMOLOGY_MAX_WORKERS", "1")),
    "triangle_inequality_tolerance": float(os.getenv("HOMOLOGY_TRIANGLE_TOLERANCE", "1e-12")),
    "verify_decomposition": _env_flag("HOMOLOGY_VERIFY_DECOMPOSITION"),
}

# 随机数据生成配置
generator_config = {
    "gamma_shape": float(os.getenv("GENERATOR_GAMMA_SHAPE", "2.0")),
    "gamma_scale": float(os.getenv("GENERATOR_GAMMA_SCALE", "1.0")),
    "default_seed": int(os.getenv("GENERATOR_DEFAULT_SEED", "0")),
}

server_config = {
    "host": os.getenv("SERVER_HOST", "0.0.0.0"),
    "port": int(os.getenv("SERVER_PORT", "5000")),
}

_logging_ready = False


def setup_logging(level: str = None) -> None:
    """按 LOG_LEVEL 配置根日志记录器，重复调用只生效一次。"""
    global _logging_ready
    if _logging_ready:
        return
    logging.basicConfig(level=(level or LOG_LEVEL), format=LOG_FORMAT)
    _logging_ready = True

# 运行配置
import logging
import math
import os
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Optional

from shared.protocol import NumericConfig, OracleConfig
from shared.utils import load_json_config
from simsched.core import Tolerance
from simsched.errors import ConfigError
from simsched.oracle import EnumerationBudget

logger = logging.getLogger(__name__)

OUTPUT_FORMATS = ("json", "text")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class SimschedConfig:
    # 随机性
    seed: int = 0

    # 枚举
    budget: int = OracleConfig.MAX_STATES
    workers: int = 1

    # 数值容差
    abs_eps: float = NumericConfig.ABS_EPS
    rel_eps: float = NumericConfig.REL_EPS

    # 采样
    samples: int = 1000  # 每个实例的可中断调度样本数
    fractional_samples: int = 100_000

    # 输出与日志
    output_format: str = "json"
    log_level: str = "INFO"
    log_file: Optional[str] = None

    def __post_init__(self):
        problems = []
        if self.seed < 0:
            problems.append(f"seed must be >= 0, got {self.seed}")
        if self.budget < 1:
            problems.append(f"budget must be > 0, got {self.budget}")
        if self.workers < 1:
            problems.append(f"workers must be >= 1, got {self.workers}")
        for name in ("abs_eps", "rel_eps"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                problems.append(f"{name} must be finite and >= 0, got {value}")
        if self.samples < 0 or self.fractional_samples < 1:
            problems.append("sample counts must be positive")
        if self.output_format not in OUTPUT_FORMATS:
            problems.append(f"output_format must be one of {OUTPUT_FORMATS}, got {self.output_format}")
        self.log_level = str(self.log_level).upper()
        if self.log_level not in LOG_LEVELS:
            problems.append(f"unknown log level {self.log_level}")
        if problems:
            raise ConfigError("; ".join(problems))

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base: Optional['SimschedConfig'] = None) -> 'SimschedConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            logger.warning(f"忽略未知配置项: {unknown}")
        try:
            return replace(base or cls(), **{k: v for k, v in data.items() if k in known})
        except TypeError as e:
            raise ConfigError(str(e)) from e

    @classmethod
    def from_file(cls, config_file: str, base: Optional['SimschedConfig'] = None) -> 'SimschedConfig':
        """从JSON配置文件加载"""
        if not os.path.exists(config_file):
            raise ConfigError(f"config file not found: {config_file}")
        data = load_json_config(config_file)
        if not isinstance(data, dict):
            raise ConfigError(f"config file must hold a JSON object: {config_file}")
        return cls.from_dict(data, base)

    @classmethod
    def from_env(cls, base: Optional['SimschedConfig'] = None,
                 environ: Optional[Dict[str, str]] = None) -> 'SimschedConfig':
        """环境变量覆盖: SIMSCHED_BUDGET, SIMSCHED_LOG_LEVEL, SIMSCHED_WORKERS"""
        environ = os.environ if environ is None else environ
        overrides: Dict[str, Any] = {}
        try:
            if environ.get(OracleConfig.BUDGET_ENV):
                overrides["budget"] = int(environ[OracleConfig.BUDGET_ENV])
            if environ.get("SIMSCHED_WORKERS"):
                overrides["workers"] = int(environ["SIMSCHED_WORKERS"])
        except ValueError as e:
            raise ConfigError(f"invalid environment override: {e}") from e
        if environ.get("SIMSCHED_LOG_LEVEL"):
            overrides["log_level"] = environ["SIMSCHED_LOG_LEVEL"]
        return replace(base or cls(), **overrides)

    def tolerance(self) -> Tolerance:
        return Tolerance(self.abs_eps, self.rel_eps)

    def enumeration_budget(self) -> EnumerationBudget:
        return EnumerationBudget(max_states=self.budget, workers=self.workers)

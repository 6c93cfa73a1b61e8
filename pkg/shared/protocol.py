# 数据交换格式定义
from enum import Enum, IntEnum
from dataclasses import dataclass, field
from typing import Optional, Dict, Any
import json

from jsonschema import Draft7Validator

from shared.utils import canonical, parse_float


class MachineKind(Enum):
    IDENTICAL = "identical"
    RELATED = "related"
    UNRELATED = "unrelated"


class Mode(Enum):
    NP = "NP"  # 不可中断
    PP = "PP"  # 可中断
    FP = "FP"  # 可分割


class Provenance(Enum):
    EXACT_ENUMERATION = "exact-enumeration"
    CLOSED_FORM = "closed-form"
    SAMPLED = "sampled-lower-confidence"


class Verdict(Enum):
    PASS = "pass"
    FAIL = "fail"


class ExitCode(IntEnum):
    OK = 0
    CLAIM_FAILED = 1
    BAD_INPUT = 2
    UNSUPPORTED = 3
    BUDGET = 4


# 数值配置
class NumericConfig:
    ABS_EPS = 1e-12
    REL_EPS = 1e-9
    INTEGRALITY_EPS = 1e-12  # t+Δ 取整容差
    SAMPLED_MATCH_EPS = 1e-6  # 采样oracle与闭式的允许差


# 枚举配置
class OracleConfig:
    MAX_STATES = 10_000_000
    CHUNK_SIZE = 1 << 16
    BUDGET_ENV = "SIMSCHED_BUDGET"


_NUMBER = {"type": "number"}

INSTANCE_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["env", "mode"],
    "properties": {
        "label": {"type": "string"},
        "env": {"enum": [k.value for k in MachineKind]},
        "m": {"type": "integer", "minimum": 1},
        "speeds": {"type": "array", "items": _NUMBER, "minItems": 1},
        "times": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "items": _NUMBER},
        },
        "mode": {"enum": [k.value for k in Mode]},
        "jobs": {"type": "array", "items": _NUMBER},
    },
    "allOf": [
        {"if": {"properties": {"env": {"const": "identical"}}},
         "then": {"required": ["m", "jobs"]}},
        {"if": {"properties": {"env": {"const": "related"}}},
         "then": {"required": ["speeds", "jobs"]}},
        {"if": {"properties": {"env": {"const": "unrelated"}}},
         "then": {"required": ["times"]}},
    ],
}

_SEGMENT = {
    "type": "object",
    "required": ["job", "start", "end"],
    "properties": {
        "job": {"type": "integer", "minimum": 0},
        "start": _NUMBER,
        "end": _NUMBER,
    },
}

SCHEDULE_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "oneOf": [
        {"required": ["assignment"],
         "properties": {"assignment": {"type": "array", "items": {"type": "integer", "minimum": 0}}}},
        {"required": ["segments"],
         "properties": {"segments": {"type": "array", "items": {"type": "array", "items": _SEGMENT}}}},
        {"required": ["split"],
         "properties": {"split": {"type": "array", "items": {"type": "array", "items": _NUMBER}}}},
    ],
}

BOUND_REPORT_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["claim", "params", "measured", "bound", "verdict", "seconds"],
    "properties": {
        "claim": {"type": "string"},
        "params": {"type": "object"},
        "measured": {},
        "bound": {},
        "verdict": {"enum": [v.value for v in Verdict]},
        "seconds": _NUMBER,
        "details": {"type": "object"},
    },
}


@dataclass
class BoundReport:
    """单条界验证结果"""
    claim: str
    params: Dict[str, Any]
    measured: Any
    bound: Any
    verdict: Verdict
    seconds: float = 0.0
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def to_dict(self, with_timing: bool = True) -> Dict[str, Any]:
        data = {
            'claim': self.claim,
            'params': self.params,
            'measured': self.measured,
            'bound': self.bound,
            'verdict': self.verdict.value,
            'seconds': self.seconds if with_timing else 0.0,
        }
        if self.details:
            data['details'] = self.details
        return canonical(data)

    def to_json(self, with_timing: bool = True) -> str:
        return json.dumps(self.to_dict(with_timing), ensure_ascii=False, allow_nan=False)

    @classmethod
    def from_json(cls, json_str: str) -> 'BoundReport':
        data = json.loads(json_str)
        Draft7Validator(BOUND_REPORT_SCHEMA).validate(data)
        return cls(
            claim=data['claim'],
            params=data['params'],
            measured=_decode_number(data['measured']),
            bound=_decode_number(data['bound']),
            verdict=Verdict(data['verdict']),
            seconds=float(data['seconds']),
            details=data.get('details', {}),
        )


def _decode_number(value: Any) -> Any:
    if isinstance(value, str) and value in ("inf", "-inf", "nan"):
        return parse_float(value)
    return value

# 异常定义
from typing import List, Optional


class SimschedError(Exception):
    """所有库异常的基类"""


class ValidationError(SimschedError, ValueError):
    """实例或文档不合法, problems 列出全部违例"""

    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DimensionError(SimschedError, ValueError):
    pass


class InfeasibleError(SimschedError, ValueError):
    pass


class UnsupportedError(SimschedError):
    pass


class BudgetExceededError(SimschedError):
    def __init__(self, required: int, max_states: int, message: Optional[str] = None):
        self.required = required
        self.max_states = max_states
        super().__init__(message or f"enumeration needs {required} states, budget is {max_states}")


class UnknownClaimError(SimschedError, KeyError):
    def __init__(self, claim: str):
        self.claim = claim
        super().__init__(claim)

    def __str__(self) -> str:
        return f"unknown claim: {self.claim}"


class ConfigError(SimschedError, ValueError):
    pass

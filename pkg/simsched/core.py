# 负载向量运算: 排序, 前缀和, 两种支配序与逼近比
import math
from dataclasses import dataclass
from itertools import accumulate
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from shared.protocol import NumericConfig
from simsched.errors import DimensionError, InfeasibleError, ValidationError

INF = math.inf


@dataclass(frozen=True)
class Tolerance:
    """比较容差: a ≤ b 当 a ≤ b + max(abs_eps, rel_eps·max(|a|,|b|))"""
    abs_eps: float = NumericConfig.ABS_EPS
    rel_eps: float = NumericConfig.REL_EPS

    def __post_init__(self):
        for name in ("abs_eps", "rel_eps"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValidationError([f"{name} must be finite and >= 0, got {value}"])

    @classmethod
    def exact(cls) -> 'Tolerance':
        return cls(0.0, 0.0)

    def slack(self, a: float, b: float) -> float:
        return max(self.abs_eps, self.rel_eps * max(abs(a), abs(b)))

    def le(self, a: float, b: float) -> bool:
        return a <= b + self.slack(a, b)

    def eq(self, a: float, b: float) -> bool:
        return abs(a - b) <= self.slack(a, b)


DEFAULT_TOLERANCE = Tolerance()


@dataclass(frozen=True)
class LoadVector:
    """每台机器的完工负载 L(S)"""
    loads: Tuple[float, ...]

    def __init__(self, loads: Iterable[float]):
        values = tuple(float(v) for v in loads)
        if not values:
            raise ValidationError(["load vector must have at least one machine"])
        bad = [v for v in values if not 0 <= v < INF]
        if bad:
            raise ValidationError([f"load vector entries must be >= 0, got {bad[0]}"])
        object.__setattr__(self, "loads", values)

    def __len__(self) -> int:
        return len(self.loads)

    def __iter__(self):
        return iter(self.loads)

    def __getitem__(self, index: int) -> float:
        return self.loads[index]

    @property
    def m(self) -> int:
        return len(self.loads)

    @property
    def total(self) -> float:
        return math.fsum(self.loads)

    @property
    def makespan(self) -> float:
        return max(self.loads)

    @property
    def cover(self) -> float:
        return min(self.loads)


@dataclass(frozen=True)
class RatioReport:
    value: float
    witness_index: int
    witness_vector: Optional[LoadVector] = None

    def to_dict(self) -> dict:
        data = {"value": self.value, "witness_index": self.witness_index}
        if self.witness_vector is not None:
            data["witness_vector"] = list(self.witness_vector.loads)
        return data


VectorLike = Union[LoadVector, Sequence[float]]


def _as_vector(x: VectorLike) -> LoadVector:
    return x if isinstance(x, LoadVector) else LoadVector(x)


def _check_lengths(x: LoadVector, y: LoadVector):
    if len(x) != len(y):
        raise DimensionError(f"length mismatch: {len(x)} vs {len(y)}")


def sorted_desc(x: VectorLike) -> LoadVector:
    """←X: 非增排序"""
    return LoadVector(sorted(_as_vector(x).loads, reverse=True))


def prefix_sums(x: VectorLike) -> List[float]:
    """σ(X): 第i个坐标为前i个坐标之和"""
    return list(accumulate(_as_vector(x).loads))


def sorted_prefix_sums(x: VectorLike) -> List[float]:
    return prefix_sums(sorted_desc(x))


def ratio(p: float, q: float) -> float:
    """ratio(0,0)=0, ratio(p>0,0)=+∞"""
    if q == 0:
        return 0.0 if p == 0 else INF
    return p / q


def coord_dominates(x: VectorLike, y: VectorLike, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    """←x ⪯_c ←y"""
    x, y = _as_vector(x), _as_vector(y)
    _check_lengths(x, y)
    return all(tol.le(a, b) for a, b in zip(sorted_desc(x), sorted_desc(y)))


def prefix_dominates(x: VectorLike, y: VectorLike, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    """x ⪯_s y, 即 σ(←x) ⪯_c σ(←y)"""
    x, y = _as_vector(x), _as_vector(y)
    _check_lengths(x, y)
    return all(tol.le(a, b) for a, b in zip(sorted_prefix_sums(x), sorted_prefix_sums(y)))


def _max_ratio(numerators: Sequence[float], denominators: Sequence[float]) -> Tuple[float, int]:
    # 并列(容差内)取最小下标, 下标从1开始
    ratios = [ratio(p, q) for p, q in zip(numerators, denominators)]
    best = max(ratios)
    if math.isinf(best):
        return best, ratios.index(best) + 1
    for i, r in enumerate(ratios):
        if DEFAULT_TOLERANCE.eq(r, best):
            return best, i + 1
    return best, ratios.index(best) + 1


def ratio_c_pair(x: VectorLike, y: VectorLike) -> float:
    """使 ←x ⪯_c α←y 成立的最小 α"""
    x, y = _as_vector(x), _as_vector(y)
    _check_lengths(x, y)
    value, _ = _max_ratio(sorted_desc(x).loads, sorted_desc(y).loads)
    return value


def ratio_s_pair(x: VectorLike, y: VectorLike) -> float:
    """使 x ⪯_s αy 成立的最小 α"""
    x, y = _as_vector(x), _as_vector(y)
    _check_lengths(x, y)
    value, _ = _max_ratio(sorted_prefix_sums(x), sorted_prefix_sums(y))
    return value


def ratio_s_envelope(x: VectorLike, f) -> RatioReport:
    """s(x) = max_i σ(←x)_i / f(i); f 为 PrefixEnvelope 或数值序列"""
    x = _as_vector(x)
    envelope = list(getattr(f, "f", f))
    if len(envelope) != len(x):
        raise DimensionError(f"envelope has {len(envelope)} entries, vector has {len(x)}")
    if any(not v > 0 for v in envelope):
        raise InfeasibleError("prefix envelope entries must be strictly positive")
    value, index = _max_ratio(sorted_prefix_sums(x), envelope)
    return RatioReport(value, index)


def c_of(x: VectorLike, floor: Sequence[float]) -> RatioReport:
    """c(x): floor(i) 为所有可行向量排序后第i个坐标的最小值"""
    x = _as_vector(x)
    floor = list(getattr(floor, "f", floor))
    if len(floor) != len(x):
        raise DimensionError(f"floor has {len(floor)} entries, vector has {len(x)}")
    value, index = _max_ratio(sorted_desc(x).loads, floor)
    return RatioReport(value, index)


def concat(x: VectorLike, y: VectorLike) -> LoadVector:
    """拼接; 允许其中一个为空序列"""
    left = x.loads if isinstance(x, LoadVector) else tuple(x)
    right = y.loads if isinstance(y, LoadVector) else tuple(y)
    return LoadVector(left + right)


def is_regular(x: VectorLike, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    """负载随机器编号非增"""
    loads = _as_vector(x).loads
    return all(tol.le(b, a) for a, b in zip(loads, loads[1:]))


def dot(x: Sequence[float], y: Sequence[float]) -> float:
    return math.fsum(a * b for a, b in zip(x, y))

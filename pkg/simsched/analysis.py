# 闭式量: r_m, 相关机器可分割情形的前缀包络与最优比, SAR 取值
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from shared.protocol import MachineKind, NumericConfig
from simsched.core import INF
from simsched.errors import DimensionError, ValidationError


def r_m(m: int) -> float:
    """下界实例中大作业的附加量 r_m, 按原式计算"""
    if m < 3:
        raise ValidationError([f"r_m is defined for m >= 3, got {m}"])
    b = m ** 3 - m ** 2 - m - 2
    value = (math.sqrt(b * b + 4 * m * (m - 1) * (m - 2)) - b) / 2
    if not 0 < value < m - 2:
        raise ArithmeticError(f"r_{m} = {value} outside (0, {m - 2})")
    return value


def rm_branch_bounds(m: int) -> Dict[str, float]:
    """下界论证的两个分支: 大作业独占一台机器 / 与其他作业同机"""
    r = r_m(m)
    base = m * (m - 1) ** 2
    alone = base / (base - (m - 2 - r))
    shared = 1 + r / (m * (m - 1))
    return {"r_m": r, "big_alone": alone, "big_shared": shared, "min": min(alone, shared)}


@dataclass(frozen=True)
class SpeedProfile:
    """s_1 ≥ … ≥ s_m > 0, Σs/s_1 = t + Δ, 约定 s_{m+1} = 0"""
    speeds: Tuple[float, ...]

    def __post_init__(self):
        speeds = tuple(float(s) for s in self.speeds)
        if not speeds:
            raise ValidationError(["speed profile needs at least one speed"])
        if any(not (s > 0 and math.isfinite(s)) for s in speeds):
            raise ValidationError(["speeds must be finite and > 0"])
        object.__setattr__(self, "speeds", tuple(sorted(speeds, reverse=True)))

    @property
    def m(self) -> int:
        return len(self.speeds)

    @property
    def total(self) -> float:
        return math.fsum(self.speeds)

    @property
    def ratio(self) -> float:
        return self.total / self.speeds[0]

    @property
    def t_delta(self) -> Tuple[int, float]:
        q = self.ratio
        t = math.floor(q)
        delta = q - t
        eps = NumericConfig.INTEGRALITY_EPS * max(1.0, q)
        if delta <= eps:
            delta = 0.0
        elif 1.0 - delta <= eps:
            t, delta = t + 1, 0.0
        return min(max(t, 1), self.m), delta

    @property
    def t(self) -> int:
        return self.t_delta[0]

    @property
    def delta(self) -> float:
        return self.t_delta[1]

    def speed(self, i: int) -> float:
        """1-based, s_{m+1} = 0"""
        return self.speeds[i - 1] if i <= self.m else 0.0


def as_profile(speeds) -> SpeedProfile:
    return speeds if isinstance(speeds, SpeedProfile) else SpeedProfile(tuple(speeds))


def closed_f(profile, i: int) -> float:
    """单位作业的前缀包络 f(i): i ≤ Σs/s_1 时为 i/Σs, 否则 1/s_1"""
    profile = as_profile(profile)
    if not 1 <= i <= profile.m:
        raise DimensionError(f"prefix index {i} outside [1, {profile.m}]")
    q = profile.ratio
    if i <= q + NumericConfig.INTEGRALITY_EPS * max(1.0, q):
        return i / profile.total
    return 1.0 / profile.speeds[0]


def closed_envelope(profile, total_work: float = 1.0) -> List[float]:
    profile = as_profile(profile)
    return [total_work * closed_f(profile, i) for i in range(1, profile.m + 1)]


def war_q_fp(profile) -> float:
    """固定速度下 Qm(FP) 的最优前缀比"""
    profile = as_profile(profile)
    t, delta = profile.t_delta
    head = math.fsum(profile.speeds[:t])
    return profile.total / (head + delta * profile.speed(t + 1))


def war_q_fp_sup(m: int) -> float:
    """速度可变时的上确界 (√m+1)/2"""
    if m < 1:
        raise ValidationError([f"m must be >= 1, got {m}"])
    return (math.sqrt(m) + 1) / 2


def sar_value(env) -> float:
    kind = env.kind
    if kind is MachineKind.IDENTICAL:
        return float(env.m)
    if kind is MachineKind.RELATED:
        return math.fsum(env.speeds) / max(env.speeds)
    return INF


def p3_bound_curve(t: float) -> float:
    """(√(1+4t²) − 1)/t, 在 [2/3, 1] 上不超过 √5 − 1"""
    return (math.sqrt(1 + 4 * t * t) - 1) / t


def p3_certificate(makespan_loads: Sequence[float], cover_loads: Sequence[float]) -> Dict[str, float]:
    """三台机器: 由最小完工时间调度S与最大覆盖调度T的负载给出 s* 的上界参数"""
    s = sorted(makespan_loads, reverse=True)
    t_loads = sorted(cover_loads, reverse=True)
    total = math.fsum(s)
    if len(s) != 3 or len(t_loads) != 3 or total <= 0:
        raise DimensionError("certificate needs two 3-machine load vectors with positive total")
    t = 1 - s[2] / total
    x = 1 - 2 * t_loads[2] / total
    bound = min(2 * t / (1 + x), 2 * x / t)
    return {"t": t, "x": x, "bound": bound, "curve": p3_bound_curve(t)}


def tight_curve(x: float, s: float, m: int) -> float:
    """紧实例上以 x = s·L_1 参数化的 s(S) 下界"""
    return max(x * (s + m - 1) / s, x + s * (1 - x))


def tight_minimizer(s: float, m: int) -> Tuple[float, float]:
    """两支曲线交点 x* = s²/(s²+m−1), 值 (s²+sm−s)/(s²+m−1)"""
    denominator = s * s + m - 1
    return s * s / denominator, (s * s + s * m - s) / denominator


def unrelated_branch(makespan: float, min_work_total: float, m: int) -> str:
    """√m 上界论证中适用的分支"""
    if makespan <= min_work_total / math.sqrt(m):
        return "makespan-min"
    return "min-work"

# 小规模真值: 穷举不可中断调度, 精确前缀包络, s*/c*, 以及可中断/可分割调度的随机采样
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from shared.protocol import Mode, OracleConfig, Provenance
from simsched.analysis import SpeedProfile, closed_envelope
from simsched.core import DEFAULT_TOLERANCE, LoadVector, RatioReport, Tolerance
from simsched.errors import BudgetExceededError, DimensionError, UnsupportedError, ValidationError
from simsched.instances import Identical, Instance, Related, machine_times
from simsched.schedulers import (
    NonPreemptiveSchedule, PreemptiveSchedule, Segment, _wrap_around, load_vector,
    makespan_lower_bound, mcr,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrefixEnvelope:
    """f(i): 所有可行调度排序负载前i项和的下确界"""
    f: Tuple[float, ...]
    provenance: Provenance

    def __post_init__(self):
        values = tuple(float(v) for v in self.f)
        if not values:
            raise ValidationError(["envelope must have at least one entry"])
        if any(b < a - DEFAULT_TOLERANCE.slack(a, b) for a, b in zip(values, values[1:])):
            raise ValidationError([f"envelope must be non-decreasing: {list(values)}"])
        object.__setattr__(self, "f", values)

    def __len__(self) -> int:
        return len(self.f)

    def to_dict(self) -> dict:
        return {"f": list(self.f), "provenance": self.provenance.value}


@dataclass(frozen=True)
class EnumerationBudget:
    max_states: int = OracleConfig.MAX_STATES
    workers: int = 1
    chunk_size: int = OracleConfig.CHUNK_SIZE

    def __post_init__(self):
        if self.max_states < 1 or self.workers < 1 or self.chunk_size < 1:
            raise ValidationError(["budget, workers and chunk size must be positive"])


DEFAULT_BUDGET = EnumerationBudget()


@dataclass(frozen=True)
class OracleResult:
    """穷举得到的最优值和字典序最小的见证调度"""
    value: float
    schedule: NonPreemptiveSchedule
    loads: LoadVector
    witness_index: int = 1

    @property
    def report(self) -> RatioReport:
        return RatioReport(self.value, self.witness_index, self.loads)


# ---- 枚举 ----

def state_count(inst: Instance) -> int:
    return inst.m ** inst.n


def require_budget(inst: Instance, budget: EnumerationBudget = DEFAULT_BUDGET) -> int:
    if inst.mode is not Mode.NP:
        raise UnsupportedError(f"exhaustive enumeration covers non-preemptive instances, got {inst.mode.value}")
    required = state_count(inst)
    if required > budget.max_states:
        raise BudgetExceededError(required, budget.max_states)
    return required


def enumerate_assignments(inst: Instance, budget: EnumerationBudget = DEFAULT_BUDGET,
                          visitor: Optional[Callable[[Tuple[int, ...], LoadVector], None]] = None) -> int:
    """按字典序逐个访问全部 m^n 个分配"""
    require_budget(inst, budget)
    times = machine_times(inst)
    count = 0
    for assignment in itertools.product(range(inst.m), repeat=inst.n):
        if visitor is not None:
            per_machine = [[] for _ in range(inst.m)]
            for j, i in enumerate(assignment):
                per_machine[i].append(times[i][j])
            visitor(assignment, LoadVector(math.fsum(ps) for ps in per_machine))
        count += 1
    return count


def decode_assignment(index: int, m: int, n: int) -> Tuple[int, ...]:
    """字典序编号 -> 分配 (作业0为最高位)"""
    digits = []
    for _ in range(n):
        index, d = divmod(index, m)
        digits.append(d)
    return tuple(reversed(digits))


def _iter_loads(times: np.ndarray, start: int, stop: int, chunk_size: int) -> Iterator[Tuple[int, np.ndarray]]:
    m, n = times.shape
    powers = m ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for lo in range(start, stop, chunk_size):
        idx = np.arange(lo, min(lo + chunk_size, stop), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % m
        loads = np.empty((len(idx), m))
        for i in range(m):
            loads[:, i] = np.where(digits == i, times[i], 0.0).sum(axis=1)
        yield lo, loads


def _sorted_desc(loads: np.ndarray) -> np.ndarray:
    return -np.sort(-loads, axis=1)


def _partitions(inst: Instance) -> List[Tuple[int, int]]:
    """按第一个作业所在机器切分编号区间"""
    block = inst.m ** (inst.n - 1)
    return [(k * block, (k + 1) * block) for k in range(inst.m)]


def _map_partitions(inst: Instance, budget: EnumerationBudget, work: Callable[[np.ndarray, int, int], object]) -> list:
    require_budget(inst, budget)
    times = np.asarray(machine_times(inst), dtype=float)
    parts = _partitions(inst)
    if budget.workers > 1 and len(parts) > 1:
        logger.debug(f"枚举 {state_count(inst)} 个状态, {len(parts)} 个分区, {budget.workers} 个线程")
        with ThreadPoolExecutor(max_workers=budget.workers) as pool:
            return list(pool.map(lambda part: work(times, part[0], part[1]), parts))
    return [work(times, lo, hi) for lo, hi in parts]


def _column_min(inst: Instance, budget: EnumerationBudget, transform: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    def work(times, start, stop):
        best = np.full(inst.m, np.inf)
        for _, loads in _iter_loads(times, start, stop, budget.chunk_size):
            best = np.minimum(best, transform(loads).min(axis=0))
        return best

    return np.minimum.reduce(_map_partitions(inst, budget, work))


def _argmin(inst: Instance, budget: EnumerationBudget, score: Callable[[np.ndarray], np.ndarray]) -> Tuple[float, int]:
    """最小得分及字典序最小的编号; 分区归约与顺序无关"""
    def work(times, start, stop):
        best = (math.inf, stop)
        for lo, loads in _iter_loads(times, start, stop, budget.chunk_size):
            values = score(loads)
            k = int(np.argmin(values))
            candidate = (float(values[k]), lo + k)
            if candidate < best:
                best = candidate
        return best

    return min(_map_partitions(inst, budget, work))


def _result(inst: Instance, value: float, index: int, witness_index: int = 1) -> OracleResult:
    schedule = NonPreemptiveSchedule(decode_assignment(index, inst.m, inst.n))
    return OracleResult(value, schedule, load_vector(schedule, inst), witness_index)


def brute_prefix_envelope(inst: Instance, budget: EnumerationBudget = DEFAULT_BUDGET) -> PrefixEnvelope:
    """f(i) = 全部分配中排序负载前i项和的最小值"""
    best = _column_min(inst, budget, lambda loads: np.cumsum(_sorted_desc(loads), axis=1))
    return PrefixEnvelope(tuple(best.tolist()), Provenance.EXACT_ENUMERATION)


def brute_coordinate_floor(inst: Instance, budget: EnumerationBudget = DEFAULT_BUDGET) -> Tuple[float, ...]:
    """排序负载第i个坐标在全部分配上的最小值"""
    return tuple(_column_min(inst, budget, _sorted_desc).tolist())


def _s_scores(envelope: Sequence[float]) -> Callable[[np.ndarray], np.ndarray]:
    f = np.asarray(envelope, dtype=float)
    return lambda loads: (np.cumsum(_sorted_desc(loads), axis=1) / f).max(axis=1)


def _c_scores(floor: Sequence[float]) -> Callable[[np.ndarray], np.ndarray]:
    g = np.asarray(floor, dtype=float)
    safe = np.where(g > 0, g, 1.0)

    def score(loads):
        x = _sorted_desc(loads)
        ratios = np.where(g > 0, x / safe, np.where(x > 0, np.inf, 0.0))
        return ratios.max(axis=1)

    return score


def _witness(values: Sequence[float], best: float) -> int:
    for i, v in enumerate(values):
        if DEFAULT_TOLERANCE.eq(v, best) or v == best:
            return i + 1
    return 1


def brute_s_star(inst: Instance, budget: EnumerationBudget = DEFAULT_BUDGET,
                 envelope: Optional[PrefixEnvelope] = None) -> OracleResult:
    """s* = min over 分配 of max_i σ(←L)_i / f(i)"""
    envelope = envelope or brute_prefix_envelope(inst, budget)
    value, index = _argmin(inst, budget, _s_scores(envelope.f))
    result = _result(inst, value, index)
    prefixes = np.cumsum(sorted(result.loads, reverse=True))
    ratios = (prefixes / np.asarray(envelope.f)).tolist()
    return OracleResult(value, result.schedule, result.loads, _witness(ratios, value))


def brute_c_star(inst: Instance, budget: EnumerationBudget = DEFAULT_BUDGET,
                 floor: Optional[Sequence[float]] = None) -> OracleResult:
    """c* = min over X of max over Y of ratio_c_pair(X, Y)

    对固定坐标i, max_Y ←X_i/←Y_i 在 ←Y_i 最小处取到, 所以只需坐标下界 floor.
    """
    floor = floor if floor is not None else brute_coordinate_floor(inst, budget)
    value, index = _argmin(inst, budget, _c_scores(floor))
    result = _result(inst, value, index)
    x = np.asarray(sorted(result.loads, reverse=True))
    g = np.asarray(floor, dtype=float)
    per_coordinate = np.where(g > 0, x / np.where(g > 0, g, 1.0), np.where(x > 0, np.inf, 0.0))
    return OracleResult(value, result.schedule, result.loads, _witness(per_coordinate.tolist(), value))


def brute_makespan_min(inst: Instance, budget: EnumerationBudget = DEFAULT_BUDGET) -> OracleResult:
    value, index = _argmin(inst, budget, lambda loads: loads.max(axis=1))
    return _result(inst, value, index)


def brute_cover_max(inst: Instance, budget: EnumerationBudget = DEFAULT_BUDGET) -> OracleResult:
    value, index = _argmin(inst, budget, lambda loads: -loads.min(axis=1))
    return _result(inst, -value, index)


def max_s_over_makespan_min(inst: Instance, budget: EnumerationBudget = DEFAULT_BUDGET,
                            envelope: Optional[PrefixEnvelope] = None) -> float:
    """所有最小完工时间分配中 s 的最大值"""
    envelope = envelope or brute_prefix_envelope(inst, budget)
    best_makespan = envelope.f[0]
    s_score = _s_scores(envelope.f)

    def score(loads):
        optimal = loads.max(axis=1) <= best_makespan
        return np.where(optimal, -s_score(loads), np.inf)

    value, _ = _argmin(inst, budget, score)
    return -value


def find_load_vector(inst: Instance, target: Sequence[float], budget: EnumerationBudget = DEFAULT_BUDGET,
                     tol: float = 1e-9) -> Optional[NonPreemptiveSchedule]:
    """找一个排序负载与 target 逐坐标相差不超过 tol 的分配"""
    goal = np.asarray(sorted(target, reverse=True), dtype=float)
    if len(goal) != inst.m:
        raise DimensionError(f"target has {len(goal)} loads, instance has {inst.m} machines")
    value, index = _argmin(inst, budget, lambda loads: np.abs(_sorted_desc(loads) - goal).max(axis=1))
    if value > tol:
        return None
    return NonPreemptiveSchedule(decode_assignment(index, inst.m, inst.n))


# ---- 闭式包络 ----

def closed_form_envelope(inst: Instance) -> PrefixEnvelope:
    """FP 同型/相关机器用闭式; PP 同型机器用 MCR 的前缀和 (同时达到全部最小值)"""
    if inst.mode is Mode.FP and isinstance(inst.env, (Identical, Related)):
        profile = SpeedProfile(inst.env.speeds)
        return PrefixEnvelope(tuple(closed_envelope(profile, inst.total_work)), Provenance.CLOSED_FORM)
    if inst.mode is Mode.PP and isinstance(inst.env, Identical):
        loads = sorted(load_vector(mcr(inst), inst), reverse=True)
        return PrefixEnvelope(tuple(np.cumsum(loads).tolist()), Provenance.CLOSED_FORM)
    raise UnsupportedError(f"no prefix envelope method for {inst.kind.value} {inst.mode.value}")


def closed_form_floor(inst: Instance) -> Tuple[float, ...]:
    """第1坐标为最小完工时间; 其余坐标可为0 (全部放在一台机器上)"""
    if inst.mode is Mode.FP and isinstance(inst.env, (Identical, Related)):
        first = inst.total_work / math.fsum(inst.env.speeds)
    elif inst.mode is Mode.PP and isinstance(inst.env, Identical):
        first = makespan_lower_bound(inst.jobs, inst.m)
    else:
        raise UnsupportedError(f"no coordinate floor method for {inst.kind.value} {inst.mode.value}")
    return (first,) + (0.0,) * (inst.m - 1)


def envelope_for(inst: Instance, budget: EnumerationBudget = DEFAULT_BUDGET) -> PrefixEnvelope:
    if inst.mode is Mode.NP:
        return brute_prefix_envelope(inst, budget)
    return closed_form_envelope(inst)


def floor_for(inst: Instance, budget: EnumerationBudget = DEFAULT_BUDGET) -> Tuple[float, ...]:
    if inst.mode is Mode.NP:
        return brute_coordinate_floor(inst, budget)
    return closed_form_floor(inst)


# ---- 可中断调度采样 ----

def sample_preemptive_schedules(inst: Instance, seed: int = 0, count: int = 1000) -> Iterator[PreemptiveSchedule]:
    """随机分组 + 不相交的机器子集 + 组内任意可行截止时间的McNaughton"""
    if not isinstance(inst.env, Identical):
        raise UnsupportedError("preemptive sampling is defined for identical machines only")
    rng = np.random.default_rng(seed)
    m, n = inst.m, inst.n
    for _ in range(count):
        groups = int(rng.integers(1, min(m, n) + 1))
        order = rng.permutation(n)
        label = np.empty(n, dtype=int)
        label[order[:groups]] = np.arange(groups)
        label[order[groups:]] = rng.integers(0, groups, size=n - groups)

        used = int(rng.integers(groups, m + 1))
        machines = rng.permutation(m)[:used]
        cuts = np.sort(rng.choice(np.arange(1, used), size=groups - 1, replace=False)) if groups > 1 else []
        subsets = np.split(machines, cuts)

        rows: List[List[Segment]] = [[] for _ in range(m)]
        for g, subset in enumerate(subsets):
            job_ids = [int(j) for j in np.flatnonzero(label == g)]
            sizes = [inst.jobs[j] for j in job_ids]
            lower = makespan_lower_bound(sizes, len(subset))
            deadline = lower if rng.random() < 0.5 else lower * (1.0 + rng.random())
            local = _wrap_around(sizes, job_ids, len(subset), deadline)
            for k, row in enumerate(local):
                rows[int(subset[k])].extend(row)
        yield PreemptiveSchedule(tuple(tuple(row) for row in rows))


def sample_preemptive_loads(inst: Instance, seed: int = 0, count: int = 1000) -> List[LoadVector]:
    return [load_vector(s, inst) for s in sample_preemptive_schedules(inst, seed, count)]


# ---- 可分割正则调度 ----

def _profile_arrays(speeds) -> Tuple[np.ndarray, np.ndarray]:
    profile = speeds if isinstance(speeds, SpeedProfile) else SpeedProfile(tuple(speeds))
    s = np.asarray(profile.speeds, dtype=float)
    return s, np.cumsum(s)


def sample_regular_loads(speeds, count: int, seed: int = 0) -> np.ndarray:
    """单纯形上随机工作份额 -> 负载, 排序后按 Σ s_k L_k = 1 重新缩放"""
    s, _ = _profile_arrays(speeds)
    rng = np.random.default_rng(seed)
    shares = rng.dirichlet(np.ones(len(s)), size=count)
    loads = -np.sort(-(shares / s), axis=1)
    return loads / (loads @ s)[:, None]


def regular_s_values(loads: np.ndarray, envelope: Sequence[float]) -> np.ndarray:
    return (np.cumsum(loads, axis=1) / np.asarray(envelope, dtype=float)).max(axis=1)


def _step_weights(loads: np.ndarray, cumulative: np.ndarray) -> np.ndarray:
    """正则负载 = Σ_j a_j·(前j台为1的阶梯), w_j = a_j·S_j 之和为1"""
    steps = loads - np.append(loads[1:], 0.0)
    return np.clip(steps, 0.0, None) * cumulative


def _pairwise_descent(weights: np.ndarray, cost: np.ndarray) -> np.ndarray:
    """线性目标在单纯形上的坐标下降: 成对转移权重直到无改进"""
    w = weights.copy()
    improved = True
    while improved:
        improved = False
        for j in range(len(w)):
            if w[j] <= 0:
                continue
            k = int(np.argmin(cost))
            if cost[k] < cost[j]:
                w[k] += w[j]
                w[j] = 0.0
                improved = True
    return w


def numeric_fractional_envelope(speeds, i: int, seed: int = 0) -> float:
    """数值求 f(i): 从一个随机正则负载出发做坐标下降; 返回值是 f(i) 的上界

    目标对阶梯权重是线性的, 下降的终点与起点无关, seed 只决定起点。
    """
    s, cumulative = _profile_arrays(speeds)
    m = len(s)
    if not 1 <= i <= m:
        raise DimensionError(f"prefix index {i} outside [1, {m}]")
    start = sample_regular_loads(speeds, 1, seed)[0]
    cost = np.minimum(np.arange(1, m + 1), i) / cumulative
    weights = _step_weights(start, cumulative)
    weights /= weights.sum()
    return float(_pairwise_descent(weights, cost) @ cost)


def lp_min_regular_s(speeds, envelope: Sequence[float]) -> Tuple[float, np.ndarray]:
    """正则调度上 s 的最小值 (线性规划), 返回值和对应负载"""
    s, cumulative = _profile_arrays(speeds)
    m = len(s)
    f = np.asarray(envelope, dtype=float)
    # 变量: w_1..w_m (阶梯权重), z
    coverage = np.minimum.outer(np.arange(1, m + 1), np.arange(1, m + 1)) / cumulative[None, :]
    a_ub = np.hstack([coverage / f[:, None], -np.ones((m, 1))])
    a_eq = np.append(np.ones(m), 0.0)[None, :]
    result = linprog(
        c=np.append(np.zeros(m), 1.0),
        A_ub=a_ub, b_ub=np.zeros(m),
        A_eq=a_eq, b_eq=[1.0],
        bounds=[(0, None)] * m + [(None, None)],
        method="highs",
    )
    if not result.success:
        raise ArithmeticError(f"linear program failed: {result.message}")
    weights = result.x[:m]
    step = weights / cumulative
    loads = np.cumsum(step[::-1])[::-1]
    return float(result.x[m]), loads

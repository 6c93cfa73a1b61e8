# 调度构造算法: LS/LPT, McNaughton, MCR, 可分割构造, 最小工作量分配, 离散化
import json
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from jsonschema import Draft7Validator

from shared.protocol import SCHEDULE_SCHEMA, Mode, NumericConfig
from shared.utils import dumps_canonical
from simsched.analysis import SpeedProfile
from simsched.core import DEFAULT_TOLERANCE, LoadVector, Tolerance, dot
from simsched.errors import DimensionError, InfeasibleError, UnsupportedError, ValidationError
from simsched.instances import Identical, Instance, Related, Unrelated, machine_times, make_instance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NonPreemptiveSchedule:
    assignment: Tuple[int, ...]  # 作业j -> 机器下标(从0开始)


@dataclass(frozen=True)
class Segment:
    job: int
    start: float
    end: float

    @property
    def length(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class PreemptiveSchedule:
    segments: Tuple[Tuple[Segment, ...], ...]  # 每台机器按时间排列

    @property
    def m(self) -> int:
        return len(self.segments)


@dataclass(frozen=True)
class FractionalSchedule:
    split: Tuple[Tuple[float, ...], ...]  # m×n, 每列和为1


Schedule = Union[NonPreemptiveSchedule, PreemptiveSchedule, FractionalSchedule]


def load_vector(sched: Schedule, inst: Instance, tol: Tolerance = DEFAULT_TOLERANCE) -> LoadVector:
    """调度的负载向量"""
    m, n = inst.m, inst.n
    if isinstance(sched, NonPreemptiveSchedule):
        if len(sched.assignment) != n:
            raise DimensionError(f"assignment has {len(sched.assignment)} jobs, instance has {n}")
        times = machine_times(inst)
        per_machine: List[List[float]] = [[] for _ in range(m)]
        for j, i in enumerate(sched.assignment):
            if not 0 <= i < m:
                raise DimensionError(f"job {j} assigned to machine {i}, instance has {m}")
            per_machine[i].append(times[i][j])
        return LoadVector(math.fsum(ps) for ps in per_machine)

    if isinstance(sched, PreemptiveSchedule):
        if sched.m != m:
            raise DimensionError(f"schedule has {sched.m} machines, instance has {m}")
        return LoadVector(max((seg.end for seg in row), default=0.0) for row in sched.segments)

    if isinstance(sched, FractionalSchedule):
        if len(sched.split) != m or any(len(row) != n for row in sched.split):
            raise DimensionError(f"split matrix must be {m}x{n}")
        for i, row in enumerate(sched.split):
            for j, x in enumerate(row):
                if not (tol.le(0.0, x) and tol.le(x, 1.0)):
                    raise InfeasibleError(f"fraction of job {j} on machine {i} is {x}, outside [0, 1]")
        for j in range(n):
            column = math.fsum(row[j] for row in sched.split)
            if not tol.eq(column, 1.0):
                raise InfeasibleError(f"fractions of job {j} sum to {column}, expected 1")
        times = machine_times(inst)
        return LoadVector(max(0.0, dot(sched.split[i], times[i])) for i in range(m))

    raise ValidationError([f"unknown schedule type {type(sched).__name__}"])


def check_preemptive(sched: PreemptiveSchedule, inst: Instance,
                     tol: Tolerance = DEFAULT_TOLERANCE) -> List[str]:
    """可中断调度的可行性: 机器内不重叠, 作业跨机器不同时, 总长等于加工时间"""
    problems: List[str] = []
    by_job: List[List[Tuple[float, float, int]]] = [[] for _ in range(inst.n)]
    for i, row in enumerate(sched.segments):
        previous_end = 0.0
        for seg in row:
            if not seg.start < seg.end:
                problems.append(f"machine {i}: empty segment for job {seg.job}")
            if not tol.le(previous_end, seg.start):
                problems.append(f"machine {i}: segment of job {seg.job} overlaps the previous one")
            previous_end = seg.end
            if not 0 <= seg.job < inst.n:
                problems.append(f"machine {i}: unknown job {seg.job}")
                continue
            by_job[seg.job].append((seg.start, seg.end, i))

    for j, parts in enumerate(by_job):
        parts.sort()
        for (s0, e0, i0), (s1, e1, i1) in zip(parts, parts[1:]):
            if not tol.le(e0, s1):
                problems.append(f"job {j} runs on machines {i0} and {i1} at the same time")
        if isinstance(inst.env, Identical):
            done = math.fsum(e - s for s, e, _ in parts)
            if not tol.eq(done, inst.jobs[j]):
                problems.append(f"job {j} processed for {done}, needs {inst.jobs[j]}")
    return problems


# ---- 列表调度 ----

def list_schedule(inst: Instance, order: Sequence[int]) -> NonPreemptiveSchedule:
    """按给定顺序把作业放到最早完成它的机器上, 并列取最小机器下标"""
    if isinstance(inst.env, Unrelated):
        raise UnsupportedError("list scheduling is defined for identical and related machines only")
    if sorted(order) != list(range(inst.n)):
        raise DimensionError("order must be a permutation of the job indices")
    speeds = inst.env.speeds
    loads = [0.0] * inst.m
    assignment = [0] * inst.n
    for j in order:
        p = inst.jobs[j]
        best = min(range(inst.m), key=lambda i: (loads[i] + p / speeds[i], i))
        assignment[j] = best
        loads[best] += p / speeds[best]
    return NonPreemptiveSchedule(tuple(assignment))


def lpt_order(jobs: Sequence[float]) -> List[int]:
    return sorted(range(len(jobs)), key=lambda j: (-jobs[j], j))


def lpt(inst: Instance) -> NonPreemptiveSchedule:
    """LPT: 作业按加工时间非增排列后做列表调度"""
    return list_schedule(inst, lpt_order(inst.jobs))


# ---- 可中断 ----

def makespan_lower_bound(jobs: Sequence[float], m: int) -> float:
    return max(max(jobs), math.fsum(jobs) / m)


def _wrap_around(jobs: Sequence[float], job_ids: Sequence[int], m: int,
                 deadline: float) -> List[List[Segment]]:
    rows: List[List[Segment]] = [[] for _ in range(m)]
    # 只吸收浮点舍入, 任何正长度的作业都要排上
    snap = NumericConfig.ABS_EPS * max(1.0, deadline)
    machine, t = 0, 0.0
    for p, job in zip(jobs, job_ids):
        remaining = p
        while remaining > 0:
            if machine >= m:
                raise InfeasibleError(f"deadline {deadline} too small for total work")
            space = deadline - t
            if remaining <= space + snap:
                end = t + remaining
                if abs(end - deadline) <= snap:
                    end = deadline
                rows[machine].append(Segment(job, t, end))
                t, remaining = end, 0.0
            else:
                rows[machine].append(Segment(job, t, deadline))
                remaining -= space
                t = deadline
            if t >= deadline - snap:
                machine, t = machine + 1, 0.0
    return rows


def mcnaughton(jobs: Sequence[float], machines: int, deadline: float,
               tol: Tolerance = DEFAULT_TOLERANCE) -> PreemptiveSchedule:
    """McNaughton回绕: 依次装满机器1至截止时间D, 溢出部分从下一台机器的0时刻继续"""
    if machines < 1 or not jobs:
        raise DimensionError("need at least one machine and one job")
    lower = makespan_lower_bound(jobs, machines)
    if not tol.le(lower, deadline):
        raise InfeasibleError(f"deadline {deadline} below lower bound {lower}")
    rows = _wrap_around(jobs, range(len(jobs)), machines, max(deadline, lower))
    return PreemptiveSchedule(tuple(tuple(row) for row in rows))


def mcr_threshold(jobs: Sequence[float], m: int) -> int:
    """i0: MCR 单独占用一台机器的最长作业个数"""
    ordered = sorted(jobs, reverse=True)
    i0 = 0
    for k, p in enumerate(ordered):
        machines_left = m - k
        if machines_left < 1 or p <= math.fsum(ordered[k:]) / machines_left:
            break
        i0 += 1
    return i0


def mcr(inst: Instance) -> PreemptiveSchedule:
    """MCR: 最长作业超过平均负载时独占一台机器, 否则对剩余作业均匀地做McNaughton"""
    if not isinstance(inst.env, Identical):
        raise UnsupportedError("MCR is defined for identical machines only")
    machines = list(range(inst.m))
    pending = list(range(inst.n))
    rows: List[List[Segment]] = [[] for _ in range(inst.m)]
    while pending:
        h = min(pending, key=lambda j: (-inst.jobs[j], j))
        total = math.fsum(inst.jobs[j] for j in pending)
        average = total / len(machines)
        if inst.jobs[h] <= average:
            sub = _wrap_around([inst.jobs[j] for j in pending], pending, len(machines), average)
            for local, row in enumerate(sub):
                rows[machines[local]].extend(row)
            break
        # 独占: 取剩余机器中下标最小者
        rows[machines.pop(0)].append(Segment(h, 0.0, inst.jobs[h]))
        pending.remove(h)
    logger.debug(f"MCR 完成: {inst.m} 台机器, {inst.n} 个作业")
    return PreemptiveSchedule(tuple(tuple(row) for row in rows))


# ---- 可分割 ----

def uniform_fractional(inst: Instance) -> FractionalSchedule:
    """每个作业在所有机器上平均加工"""
    if not isinstance(inst.env, Identical):
        raise UnsupportedError("uniform fractional schedule is defined for identical machines only")
    share = 1.0 / inst.m
    return FractionalSchedule(tuple((share,) * inst.n for _ in range(inst.m)))


def _normal_form_speeds(speeds: Sequence[float]) -> SpeedProfile:
    speeds = tuple(float(s) for s in speeds)
    if not speeds:
        raise ValidationError(["speeds must not be empty"])
    if any(a < b for a, b in zip(speeds, speeds[1:])):
        raise ValidationError(["speeds must be in normal form (non-increasing)"])
    return SpeedProfile(speeds)


def optimal_regular_loads(speeds: Sequence[float]) -> List[float]:
    """单位作业的最优正则负载: 前t台相等, 第t+1台为Δ倍, 其余为0"""
    profile = _normal_form_speeds(speeds)
    t, delta = profile.t_delta
    denominator = math.fsum(profile.speeds[:t]) + delta * profile.speed(t + 1)
    level = 1.0 / denominator
    loads = [level] * t + [0.0] * (profile.m - t)
    if t < profile.m:
        loads[t] = delta * level
    return loads


def optimal_regular_fractional(speeds: Sequence[float]) -> FractionalSchedule:
    loads = optimal_regular_loads(speeds)
    shares = [s * load for s, load in zip(speeds, loads)]
    total = math.fsum(shares)
    # 把舍入误差并入第一台机器, 保证列和为1
    shares[0] += 1.0 - total
    return FractionalSchedule(tuple((x,) for x in shares))


def regularize_fractional(speeds: Sequence[float], target_loads: Sequence[float],
                          tol: Tolerance = DEFAULT_TOLERANCE) -> FractionalSchedule:
    """把任意可分割调度的负载正则化: 结果负载非增且坐标不超过排序后的目标"""
    profile = _normal_form_speeds(speeds)
    target = sorted((float(v) for v in target_loads), reverse=True)
    if len(target) != profile.m:
        raise DimensionError(f"target has {len(target)} loads, expected {profile.m}")

    cumulative = 0.0
    shares = [0.0] * profile.m
    for i, (s, load) in enumerate(zip(profile.speeds, target)):
        work = s * load
        if tol.le(1.0, cumulative + work):
            shares[i] = max(0.0, 1.0 - cumulative)
            return FractionalSchedule(tuple((x,) for x in shares))
        shares[i] = work
        cumulative += work
    raise InfeasibleError(f"target loads process only {cumulative} of the unit job")


# ---- 非相关机器 ----

def min_work_assignment(inst: Instance) -> NonPreemptiveSchedule:
    """每个作业放到加工时间最短的机器上, 并列取最小下标"""
    times = machine_times(inst)
    assignment = tuple(
        min(range(inst.m), key=lambda i: (times[i][j], i)) for j in range(inst.n)
    )
    return NonPreemptiveSchedule(assignment)


# ---- 离散化 ----

def discretize(speeds: Sequence[float], epsilon: float) -> Instance:
    """总量为1的作业切成 ⌈1/ε⌉ 个等长小作业"""
    if not epsilon > 0:
        raise ValidationError([f"epsilon must be > 0, got {epsilon}"])
    count = max(1, math.ceil(1.0 / epsilon - 1e-12))
    size = 1.0 / count
    return make_instance(Related(tuple(speeds)), Mode.NP, [size] * count,
                         label=f"discretized eps={epsilon} jobs={count}")


def fill_to_targets(inst: Instance, targets: Sequence[float],
                    tol: Tolerance = DEFAULT_TOLERANCE) -> NonPreemptiveSchedule:
    """依次向机器1,2,…放作业, 直到该机器负载达到目标值"""
    if isinstance(inst.env, Unrelated):
        raise UnsupportedError("target filling is defined for identical and related machines only")
    if len(targets) != inst.m:
        raise DimensionError(f"need {inst.m} targets, got {len(targets)}")
    speeds = inst.env.speeds
    loads = [0.0] * inst.m
    machine = 0
    assignment = []
    for p in inst.jobs:
        while machine < inst.m - 1 and tol.le(targets[machine], loads[machine]):
            machine += 1
        assignment.append(machine)
        loads[machine] += p / speeds[machine]
    return NonPreemptiveSchedule(tuple(assignment))


# ---- JSON ----

def schedule_to_dict(sched: Schedule) -> dict:
    if isinstance(sched, NonPreemptiveSchedule):
        return {"assignment": list(sched.assignment)}
    if isinstance(sched, PreemptiveSchedule):
        return {"segments": [
            [{"job": seg.job, "start": seg.start, "end": seg.end} for seg in row]
            for row in sched.segments
        ]}
    return {"split": [list(row) for row in sched.split]}


def serialize_schedule(sched: Schedule, indent: Optional[int] = None) -> str:
    return dumps_canonical(schedule_to_dict(sched), indent=indent)


def parse_schedule(text: str) -> Schedule:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError([f"$: invalid JSON: {e}"]) from e
    errors = list(Draft7Validator(SCHEDULE_SCHEMA).iter_errors(document))
    if errors:
        raise ValidationError([f"$: {e.message}" for e in errors])
    if "assignment" in document:
        return NonPreemptiveSchedule(tuple(int(i) for i in document["assignment"]))
    if "segments" in document:
        return PreemptiveSchedule(tuple(
            tuple(Segment(int(s["job"]), float(s["start"]), float(s["end"])) for s in row)
            for row in document["segments"]
        ))
    return FractionalSchedule(tuple(tuple(float(x) for x in row) for row in document["split"]))

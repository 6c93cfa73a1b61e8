# 实例数据模型, 校验, JSON序列化和实例生成器
import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from jsonschema import Draft7Validator

from shared.protocol import INSTANCE_SCHEMA, MachineKind, Mode
from shared.utils import dumps_canonical
from simsched.analysis import r_m
from simsched.errors import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Identical:
    m: int

    @property
    def kind(self) -> MachineKind:
        return MachineKind.IDENTICAL

    @property
    def speeds(self) -> Tuple[float, ...]:
        return (1.0,) * self.m


@dataclass(frozen=True)
class Related:
    speeds: Tuple[float, ...]

    @property
    def kind(self) -> MachineKind:
        return MachineKind.RELATED

    @property
    def m(self) -> int:
        return len(self.speeds)


@dataclass(frozen=True)
class Unrelated:
    times: Tuple[Tuple[float, ...], ...]  # times[machine][job]

    @property
    def kind(self) -> MachineKind:
        return MachineKind.UNRELATED

    @property
    def m(self) -> int:
        return len(self.times)

    @property
    def n(self) -> int:
        return len(self.times[0]) if self.times else 0


MachineEnv = Union[Identical, Related, Unrelated]


@dataclass(frozen=True)
class Instance:
    env: MachineEnv
    mode: Mode
    jobs: Tuple[float, ...] = ()
    label: str = ""
    # 相关机器规范化时记录: 规范后第k台机器 = 原第 machine_order[k] 台
    machine_order: Optional[Tuple[int, ...]] = None
    # 可分割合并后保留的原始作业
    merged_from: Tuple[float, ...] = field(default=(), compare=False)

    @property
    def m(self) -> int:
        return self.env.m

    @property
    def n(self) -> int:
        if isinstance(self.env, Unrelated):
            return self.env.n
        return len(self.jobs)

    @property
    def kind(self) -> MachineKind:
        return self.env.kind

    @property
    def total_work(self) -> float:
        """标准加工时间之和; 非相关机器取每列最小值之和"""
        if isinstance(self.env, Unrelated):
            return math.fsum(min(col) for col in zip(*self.env.times))
        return math.fsum(self.jobs)


def _positive_finite(value: float) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value) and value > 0


def check(inst: Instance) -> List[str]:
    """列出全部违例, 空列表表示合法"""
    problems: List[str] = []
    env = inst.env
    if isinstance(env, Identical):
        if not isinstance(env.m, int) or env.m < 1:
            problems.append(f"identical machine count must be an integer >= 1, got {env.m}")
    elif isinstance(env, Related):
        if not env.speeds:
            problems.append("related environment needs at least one speed")
        for i, s in enumerate(env.speeds):
            if not _positive_finite(s):
                problems.append(f"non-positive speed at speeds[{i}]: {s}")
    elif isinstance(env, Unrelated):
        if not env.times:
            problems.append("unrelated environment needs at least one machine row")
        else:
            n = len(env.times[0])
            if n < 1:
                problems.append("unrelated matrix needs at least one job column")
            for i, row in enumerate(env.times):
                if len(row) != n:
                    problems.append(f"times[{i}] has {len(row)} columns, expected {n}")
                for j, p in enumerate(row):
                    if not _positive_finite(p):
                        problems.append(f"non-positive processing time at times[{i}][{j}]: {p}")
        if inst.jobs:
            problems.append("unrelated instances carry processing times in the matrix; jobs must be empty")
        return problems
    else:
        problems.append(f"unknown machine environment {type(env).__name__}")
        return problems

    if not inst.jobs:
        problems.append("instance needs at least one job")
    for j, p in enumerate(inst.jobs):
        if not _positive_finite(p):
            problems.append(f"non-positive processing time at jobs[{j}]: {p}")
    return problems


def normalize(inst: Instance) -> Instance:
    """相关机器速度排成非增 (规范形), 幂等"""
    env = inst.env
    if not isinstance(env, Related):
        return inst
    order = sorted(range(env.m), key=lambda i: (-env.speeds[i], i))
    if order == list(range(env.m)):
        if inst.machine_order is None:
            return replace(inst, machine_order=tuple(order))
        return inst
    logger.warning(f"速度未按非增排列, 已规范化: {list(env.speeds)} -> {[env.speeds[i] for i in order]}")
    base = inst.machine_order or tuple(range(env.m))
    return replace(
        inst,
        env=Related(tuple(env.speeds[i] for i in order)),
        machine_order=tuple(base[i] for i in order),
    )


def validate(inst: Instance) -> Instance:
    """校验并返回规范形实例; 不合法时抛出 ValidationError"""
    problems = check(inst)
    if problems:
        raise ValidationError(problems)
    return normalize(inst)


def make_instance(env: MachineEnv, mode: Mode, jobs: Sequence[float] = (), label: str = "") -> Instance:
    return validate(Instance(env=env, mode=mode, jobs=tuple(float(p) for p in jobs), label=label))


def parse_instance(text: str) -> Instance:
    """从JSON文档构造实例"""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError([f"$: invalid JSON: {e}"]) from e

    validator = Draft7Validator(INSTANCE_SCHEMA)
    errors = sorted(validator.iter_errors(document), key=lambda e: list(e.absolute_path))
    if errors:
        raise ValidationError([f"{_json_path(e.absolute_path)}: {e.message}" for e in errors])

    kind = MachineKind(document["env"])
    if kind is MachineKind.IDENTICAL:
        env: MachineEnv = Identical(int(document["m"]))
    elif kind is MachineKind.RELATED:
        env = Related(tuple(float(s) for s in document["speeds"]))
    else:
        env = Unrelated(tuple(tuple(float(p) for p in row) for row in document["times"]))
    return validate(Instance(
        env=env,
        mode=Mode(document["mode"]),
        jobs=tuple(float(p) for p in document.get("jobs", [])),
        label=document.get("label", ""),
    ))


def _json_path(path) -> str:
    out = "$"
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    return out


def instance_to_dict(inst: Instance) -> dict:
    data: dict = {}
    if inst.label:
        data["label"] = inst.label
    data["env"] = inst.kind.value
    if isinstance(inst.env, Identical):
        data["m"] = inst.env.m
    elif isinstance(inst.env, Related):
        data["speeds"] = list(inst.env.speeds)
    else:
        data["times"] = [list(row) for row in inst.env.times]
    data["mode"] = inst.mode.value
    data["jobs"] = list(inst.jobs)
    return data


def serialize_instance(inst: Instance, indent: Optional[int] = None) -> str:
    return dumps_canonical(instance_to_dict(inst), indent=indent)


def machine_times(inst: Instance) -> List[List[float]]:
    """m×n 加工时间矩阵 p_ij"""
    env = inst.env
    if isinstance(env, Unrelated):
        return [list(row) for row in env.times]
    return [[p / s for p in inst.jobs] for s in env.speeds]


def merge_fractional(inst: Instance) -> Instance:
    """可分割模式下所有作业可合并为一个总长作业"""
    if inst.mode is not Mode.FP or isinstance(inst.env, Unrelated):
        raise ValidationError(["only fractional identical/related instances can be merged"])
    env = inst.env if isinstance(inst.env, Related) else Related(inst.env.speeds)
    return replace(inst, env=env, jobs=(inst.total_work,), merged_from=inst.jobs)


# ---- 生成器 ----

def rm_jobs(m: int) -> List[float]:
    if m < 3:
        raise ValidationError([f"lower-bound construction needs m >= 3, got {m}"])
    big = (m - 1) ** 2 + r_m(m)
    return [float(m - 1)] * m + [float(m)] * ((m - 1) * (m - 2)) + [big]


def gen_rm_instance(m: int) -> Instance:
    """m个(m−1), (m−1)(m−2)个m, 以及一个(m−1)²+r_m的大作业"""
    return make_instance(Identical(m), Mode.NP, rm_jobs(m), label=f"rm-lower-bound m={m}")


def rm_reference_schedules(m: int) -> Tuple[List[int], List[int]]:
    """下界构造中的两个参照调度 S 和 T (机器下标从0开始)"""
    rm_jobs(m)
    n_small, n_mid = m, (m - 1) * (m - 2)
    big = n_small + n_mid

    schedule_s = [0] * (n_small + n_mid + 1)
    for k in range(n_mid):
        schedule_s[n_small + k] = 2 + k // (m - 1)
    schedule_s[big] = 1

    schedule_t = list(range(n_small)) + [0] * (n_mid + 1)
    for k in range(n_mid):
        schedule_t[n_small + k] = 1 + k // (m - 2)
    schedule_t[big] = 0
    return schedule_s, schedule_t


def gen_tight_related(m: int) -> Instance:
    """s_1 = √m+1, 其余速度为1, 单位作业"""
    if m < 2:
        raise ValidationError([f"tight related instance needs m >= 2, got {m}"])
    speeds = (math.sqrt(m) + 1.0,) + (1.0,) * (m - 1)
    return make_instance(Related(speeds), Mode.FP, [1.0], label=f"tight-related m={m}")


def gen_sar_unrelated(K: float) -> Instance:
    """2×2 非相关实例 [[1,K],[K,1]], c* = K+1"""
    if not K > 1:
        raise ValidationError([f"K must be > 1, got {K}"])
    times = ((1.0, float(K)), (float(K), 1.0))
    return make_instance(Unrelated(times), Mode.NP, label=f"sar-unrelated K={K}")


DISTRIBUTIONS = ("uniform-int", "uniform-real", "exponential")


def _draw(rng: np.random.Generator, dist: str, size) -> np.ndarray:
    if dist == "uniform-int":
        return rng.integers(1, 21, size=size).astype(float)
    if dist == "uniform-real":
        return 1.0 - rng.random(size=size)  # (0,1]
    if dist == "exponential":
        return np.maximum(rng.exponential(1.0, size=size), np.finfo(float).tiny)
    raise ValidationError([f"unsupported distribution: {dist}"])


def gen_random(env_kind: Union[MachineKind, str], mode: Union[Mode, str], m: int, n: int,
               seed: int = 0, dist: str = "uniform-int") -> Instance:
    """固定种子下确定性的随机实例"""
    env_kind = MachineKind(env_kind)
    mode = Mode(mode)
    if m < 1 or n < 1:
        raise ValidationError([f"m and n must be >= 1, got m={m}, n={n}"])
    if dist not in DISTRIBUTIONS:
        raise ValidationError([f"unsupported distribution: {dist}"])

    rng = np.random.default_rng(seed)
    label = f"random {env_kind.value} {mode.value} m={m} n={n} seed={seed} {dist}"
    if env_kind is MachineKind.IDENTICAL:
        return make_instance(Identical(m), mode, _draw(rng, dist, n).tolist(), label)
    if env_kind is MachineKind.RELATED:
        speeds = tuple(_draw(rng, dist, m).tolist())
        jobs = _draw(rng, dist, n).tolist()
        return make_instance(Related(speeds), mode, jobs, label)
    times = _draw(rng, dist, (m, n))
    return make_instance(Unrelated(tuple(tuple(row) for row in times.tolist())), mode, label=label)

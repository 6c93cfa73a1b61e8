# 界验证: 每个声明是一组构造 + oracle 实验, 结果为 BoundReport; 以及表1的区间报告
import asyncio
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from shared.protocol import BoundReport, Mode, Verdict
from shared.utils import format_duration, get_system_info
from simsched import analysis, oracle
from simsched.analysis import SpeedProfile
from simsched.core import (
    DEFAULT_TOLERANCE, Tolerance, concat, coord_dominates, dot, prefix_dominates,
    ratio_c_pair, ratio_s_envelope, ratio_s_pair, sorted_prefix_sums,
)
from simsched.errors import BudgetExceededError, UnknownClaimError, ValidationError
from simsched.instances import (
    Identical, Related, gen_random, gen_rm_instance, gen_sar_unrelated, gen_tight_related,
    make_instance, rm_reference_schedules,
)
from simsched.oracle import DEFAULT_BUDGET, EnumerationBudget
from simsched.schedulers import (
    NonPreemptiveSchedule, check_preemptive, discretize, fill_to_targets, load_vector, lpt, mcr,
    mcr_threshold, min_work_assignment, optimal_regular_loads, uniform_fractional,
)

logger = logging.getLogger(__name__)

MATCH_EPS = 1e-9
EXACT = Tolerance.exact()

# 正则调度采样用的固定速度组
FIXED_PROFILES: Tuple[Tuple[float, ...], ...] = (
    (3.0, 1.0),
    (3.0, 1.0, 1.0, 1.0),
    (1.0, 1.0),
    (2.0, 1.0),
    (5.0, 1.0, 1.0),
    (1.0, 1.0, 1.0),
    (4.0, 2.0, 1.0),
    (4.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
    (2.5, 2.0, 0.5),
    (10.0, 3.0, 2.0, 1.0),
)


@dataclass
class ClaimOutcome:
    measured: Any
    bound: Any
    passed: bool
    params: Dict[str, Any]
    details: Dict[str, Any] = field(default_factory=dict)


ClaimRunner = Callable[[Dict[str, Any], int, EnumerationBudget, Tolerance], ClaimOutcome]


@dataclass(frozen=True)
class ClaimSpec:
    name: str
    run: ClaimRunner
    accepts_m: Callable[[int], bool]
    summary: str


CLAIMS: Dict[str, ClaimSpec] = {}


def claim(name: str, summary: str, accepts_m: Callable[[int], bool] = lambda m: False):
    def register(fn: ClaimRunner) -> ClaimRunner:
        CLAIMS[name] = ClaimSpec(name, fn, accepts_m, summary)
        return fn
    return register


def claim_params(name: str, m: Optional[int] = None, strict: bool = True) -> Dict[str, Any]:
    """--m 只传给接受它的声明; 单独请求时不接受则报错"""
    spec = _spec(name)
    if m is None:
        return {}
    if spec.accepts_m(m):
        return {"m": m}
    if strict:
        raise ValidationError([f"claim {name} does not accept m={m}"])
    logger.warning(f"{name} 不接受 m={m}, 使用默认机器数")
    return {}


def _spec(name: str) -> ClaimSpec:
    try:
        return CLAIMS[name]
    except KeyError:
        raise UnknownClaimError(name) from None


def verify_claim(name: str, params: Optional[Dict[str, Any]] = None, seed: int = 0,
                 budget: Optional[EnumerationBudget] = None,
                 tol: Optional[Tolerance] = None) -> BoundReport:
    """运行一个声明的实验; 固定种子下结果确定.

    tol 用于结构性比较 (恒等式, 可行性); 比值与界的比较另用 MATCH_EPS.
    报告参数里记下实际用到的机器数 ms 和容差.
    """
    spec = _spec(name)
    budget = budget or DEFAULT_BUDGET
    tol = tol or DEFAULT_TOLERANCE
    logger.info(f"开始验证 {name} 参数={params or {}} seed={seed}")
    start = time.perf_counter()
    outcome = spec.run(dict(params or {}), seed, budget, tol)
    elapsed = time.perf_counter() - start
    verdict = Verdict.PASS if outcome.passed else Verdict.FAIL
    logger.info(f"{name}: {verdict.value} ({format_duration(elapsed)})")
    return BoundReport(
        claim=name,
        params={**outcome.params, "seed": seed, "abs_eps": tol.abs_eps, "rel_eps": tol.rel_eps},
        measured=outcome.measured,
        bound=outcome.bound,
        verdict=verdict,
        seconds=elapsed,
        details=outcome.details,
    )


async def run_claims(names: Sequence[str], params: Optional[Dict[str, Dict[str, Any]]] = None,
                     seed: int = 0, budget: Optional[EnumerationBudget] = None,
                     tol: Optional[Tolerance] = None) -> List[BoundReport]:
    """并发运行多个声明, 结果按请求顺序返回"""
    for name in names:
        _spec(name)
    params = params or {}
    tasks = [asyncio.to_thread(verify_claim, name, params.get(name), seed, budget, tol) for name in names]
    return list(await asyncio.gather(*tasks))


# ---- 公共工具 ----

def _seeds(seed: int, count: int) -> List[int]:
    return [int(s) for s in np.random.default_rng(seed).integers(0, 2 ** 31 - 1, size=count)]


def _max_jobs(m: int, limit: int) -> int:
    """满足 m^n ≤ limit 的最大 n"""
    n = 1
    while m ** (n + 1) <= limit:
        n += 1
    return n


def _random_speeds(rng: np.random.Generator, m: int, integral: bool) -> Tuple[float, ...]:
    if integral:
        speeds = rng.integers(1, 11, size=m).astype(float)
    else:
        speeds = 1.0 - rng.random(size=m)
    return tuple(sorted(speeds.tolist(), reverse=True))


def _s(inst, sched, envelope) -> float:
    return ratio_s_envelope(load_vector(sched, inst), envelope).value


def _count(**flags: int) -> Dict[str, int]:
    return {k: int(v) for k, v in flags.items()}


# ---- Pm(NP) ----

@claim("pm_np_lower", "s* of the lower-bound instance exceeds 1", accepts_m=lambda m: m >= 3)
def _pm_np_lower(params, seed, budget, tol):
    m = int(params.get("m", 3))
    inst = gen_rm_instance(m)
    envelope = oracle.brute_prefix_envelope(inst, budget)
    best = oracle.brute_s_star(inst, budget, envelope)
    branches = analysis.rm_branch_bounds(m)

    schedule_s, schedule_t = rm_reference_schedules(m)
    loads_s = load_vector(NonPreemptiveSchedule(tuple(schedule_s)), inst)
    loads_t = load_vector(NonPreemptiveSchedule(tuple(schedule_t)), inst)
    expected_prefix = m * (m - 1) ** 2 - (m - 2 - branches["r_m"])
    checks = {
        "s_enumerated": oracle.find_load_vector(inst, loads_s.loads, budget) is not None,
        "t_enumerated": oracle.find_load_vector(inst, loads_t.loads, budget) is not None,
        "s_makespan": abs(loads_s.makespan - m * (m - 1)) <= MATCH_EPS,
        "t_prefix": abs(sorted_prefix_sums(loads_t)[m - 2] - expected_prefix) <= MATCH_EPS,
    }
    passed = best.value > 1 + 1e-6 and best.value >= branches["min"] - MATCH_EPS and all(checks.values())
    details = {
        "envelope": list(envelope.f),
        "witness": list(best.schedule.assignment),
        "witness_loads": list(best.loads.loads),
        "branches": branches,
        "checks": checks,
    }
    return ClaimOutcome(best.value, branches["min"], passed, {"m": m, "ms": [m]}, details)


@claim("p2_np_one", "every makespan-minimal schedule on two machines has s = 1")
def _p2_np_one(params, seed, budget, tol):
    count = int(params.get("count", 200))
    max_n = int(params.get("max_n", 10))
    worst, violations = 1.0, 0
    for s in _seeds(seed, count):
        inst = gen_random("identical", Mode.NP, 2, 1 + s % max_n, seed=s)
        value = oracle.max_s_over_makespan_min(inst, budget)
        worst = max(worst, value)
        if value != 1.0:
            violations += 1
    return ClaimOutcome(worst, 1.0, violations == 0, {"ms": [2], "count": count, "max_n": max_n},
                        _count(violations=violations))


@claim("p3_np_upper", "min(s(makespan-min), s(cover-max)) <= sqrt(5)-1 on three machines")
def _p3_np_upper(params, seed, budget, tol):
    count = int(params.get("count", 200))
    max_n = int(params.get("max_n", 7))
    bound = math.sqrt(5) - 1
    worst, worst_certificate = 0.0, 0.0
    identity_failures = certificate_failures = 0
    for s in _seeds(seed, count):
        inst = gen_random("identical", Mode.NP, 3, 1 + s % max_n, seed=s)
        envelope = oracle.brute_prefix_envelope(inst, budget)
        makespan_min = oracle.brute_makespan_min(inst, budget)
        cover_max = oracle.brute_cover_max(inst, budget)
        value = min(ratio_s_envelope(makespan_min.loads, envelope).value,
                    ratio_s_envelope(cover_max.loads, envelope).value)
        worst = max(worst, value)
        if not tol.eq(envelope.f[1], inst.total_work - cover_max.value):
            identity_failures += 1
        # 链: 实测值 <= min(2t/(1+x), 2x/t) <= 曲线(t) <= √5−1, 且 t ∈ [2/3, 1]
        cert = analysis.p3_certificate(makespan_min.loads, cover_max.loads)
        worst_certificate = max(worst_certificate, cert["bound"])
        chain = (value <= cert["bound"] + MATCH_EPS
                 and cert["bound"] <= cert["curve"] + MATCH_EPS
                 and cert["curve"] <= bound + MATCH_EPS
                 and 2 / 3 - MATCH_EPS <= cert["t"] <= 1 + MATCH_EPS)
        if not chain:
            certificate_failures += 1
    passed = worst <= bound + MATCH_EPS and identity_failures == 0 and certificate_failures == 0
    details = _count(envelope_identity_failures=identity_failures, certificate_failures=certificate_failures)
    details["worst_certificate"] = worst_certificate
    return ClaimOutcome(worst, bound, passed, {"ms": [3], "count": count, "max_n": max_n}, details)


_LPT_CASES = ((4, 9, 200), (5, 8, 100))


@claim("pm_np_lpt", "s(LPT) <= 3/2 for m >= 4", accepts_m=lambda m: m >= 4)
def _pm_np_lpt(params, seed, budget, tol):
    if "m" in params:
        m = int(params["m"])
        defaults = {case[0]: case for case in _LPT_CASES}
        cases = [defaults.get(m, (m, _max_jobs(m, 500_000), 200))]
    else:
        cases = list(_LPT_CASES)
    if "count" in params:
        cases = [(m, n, int(params["count"])) for m, n, _ in cases]

    worst, per_m = 0.0, {}
    for m, max_n, count in cases:
        local = 0.0
        for s in _seeds(seed + m, count):
            inst = gen_random("identical", Mode.NP, m, 1 + s % max_n, seed=s)
            envelope = oracle.brute_prefix_envelope(inst, budget)
            local = max(local, _s(inst, lpt(inst), envelope))
        per_m[str(m)] = local
        worst = max(worst, local)
    used = {"ms": [case[0] for case in cases], "cases": [list(case) for case in cases]}
    return ClaimOutcome(worst, 1.5, worst <= 1.5 + MATCH_EPS, used, {"max_by_m": per_m})


# ---- Pm(PP) ----

def _mcr_expected(jobs: Sequence[float], m: int) -> List[float]:
    ordered = sorted(jobs, reverse=True)
    i0 = mcr_threshold(jobs, m)
    rest = math.fsum(ordered[i0:]) / (m - i0) if i0 < m else 0.0
    return ordered[:i0] + [rest] * (m - i0)


@claim("pm_pp_one", "MCR prefix sums are dominated by every sampled preemptive schedule",
       accepts_m=lambda m: m >= 2)
def _pm_pp_one(params, seed, budget, tol):
    ms = [int(params["m"])] if "m" in params else [2, 3, 4, 5]
    count = int(params.get("count", 50))
    samples = int(params.get("samples", 1000))
    max_n = int(params.get("max_n", 10))

    excess = -math.inf
    flags = dict(characterization=0, head_prefix=0, infeasible_samples=0, lower_bound=0, dominance=0)
    for m in ms:
        for s in _seeds(seed + m, count):
            inst = gen_random("identical", Mode.PP, m, 1 + s % max_n, seed=s)
            loads = sorted(load_vector(mcr(inst), inst), reverse=True)
            expected = _mcr_expected(inst.jobs, m)
            if not all(tol.eq(a, b) for a, b in zip(loads, expected)):
                flags["characterization"] += 1

            ordered = sorted(inst.jobs, reverse=True)
            job_prefix = np.cumsum((ordered + [0.0] * m)[:m])
            mcr_prefix = np.cumsum(loads)
            i0 = mcr_threshold(inst.jobs, m)
            if not all(tol.eq(mcr_prefix[k], job_prefix[k]) for k in range(i0)):
                flags["head_prefix"] += 1

            for sample in oracle.sample_preemptive_schedules(inst, seed=s, count=samples):
                if check_preemptive(sample, inst):
                    flags["infeasible_samples"] += 1
                sample_prefix = np.cumsum(sorted(load_vector(sample, inst), reverse=True))
                if (sample_prefix < job_prefix - MATCH_EPS).any():
                    flags["lower_bound"] += 1
                gap = float((mcr_prefix - sample_prefix).max())
                excess = max(excess, gap)
                if gap > MATCH_EPS:
                    flags["dominance"] += 1

    passed = not any(flags.values())
    used = {"ms": ms, "count": count, "samples": samples, "max_n": max_n}
    return ClaimOutcome(excess, 0.0, passed, used, _count(**flags))


# ---- Qm(FP) ----

@claim("q_fp_envelope", "closed-form prefix envelope matches the numeric oracle", accepts_m=lambda m: m >= 1)
def _q_fp_envelope(params, seed, budget, tol):
    count = int(params.get("count", 100))
    max_m = int(params.get("m", params.get("max_m", 4)))
    rng = np.random.default_rng(seed)
    worst, below = 0.0, 0
    for k in range(count):
        m = int(rng.integers(1, max_m + 1))
        profile = SpeedProfile(_random_speeds(rng, m, integral=k % 2 == 0))
        for i in range(1, m + 1):
            numeric = oracle.numeric_fractional_envelope(profile, i, seed=seed + k)
            closed = analysis.closed_f(profile, i)
            worst = max(worst, abs(numeric - closed))
            if numeric < closed - MATCH_EPS:
                below += 1
    passed = worst <= 1e-6 and below == 0
    used = {"ms": list(range(1, max_m + 1)), "count": count, "max_m": max_m}
    return ClaimOutcome(worst, 1e-6, passed, used, _count(numeric_below_closed=below))


@claim("q_fp_formula", "optimal regular schedule attains the closed-form ratio")
def _q_fp_formula(params, seed, budget, tol):
    count = int(params.get("count", 100))
    samples = int(params.get("samples", 100_000))
    profiles = int(params.get("profiles", len(FIXED_PROFILES)))
    rng = np.random.default_rng(seed)

    formula_gap, ms = 0.0, set()
    for k in range(count):
        profile = SpeedProfile(_random_speeds(rng, int(rng.integers(1, 9)), integral=k % 2 == 0))
        ms.add(profile.m)
        loads = optimal_regular_loads(profile.speeds)
        value = ratio_s_envelope(loads, analysis.closed_envelope(profile)).value
        formula_gap = max(formula_gap, abs(value - analysis.war_q_fp(profile)))

    sampled_slack, lp_gap = math.inf, 0.0
    for k, speeds in enumerate(FIXED_PROFILES[:profiles]):
        profile = SpeedProfile(speeds)
        ms.add(profile.m)
        war = analysis.war_q_fp(profile)
        envelope = analysis.closed_envelope(profile)
        regular = oracle.sample_regular_loads(profile, samples, seed=seed + k)
        sampled_slack = min(sampled_slack, float(oracle.regular_s_values(regular, envelope).min()) - war)
        lp_value, _ = oracle.lp_min_regular_s(profile, envelope)
        lp_gap = max(lp_gap, abs(lp_value - war))

    passed = formula_gap <= MATCH_EPS and sampled_slack >= -MATCH_EPS and lp_gap <= 1e-6
    details = {"sampled_min_minus_formula": sampled_slack, "lp_gap": lp_gap}
    used = {"ms": sorted(ms), "count": count, "profiles": profiles, "samples": samples}
    return ClaimOutcome(formula_gap, MATCH_EPS, passed, used, details)


@claim("q_fp_sup", "the fixed-speed ratio never exceeds (sqrt(m)+1)/2", accepts_m=lambda m: m >= 1)
def _q_fp_sup(params, seed, budget, tol):
    ms = [int(params["m"])] if "m" in params else [4, 9, 16]
    trials = int(params.get("trials", 10_000))
    rng = np.random.default_rng(seed)
    worst, per_m = -math.inf, {}
    for m in ms:
        sup = analysis.war_q_fp_sup(m)
        largest = 0.0
        for k in range(trials):
            largest = max(largest, analysis.war_q_fp(_random_speeds(rng, m, integral=k % 2 == 0)))
        per_m[str(m)] = largest
        worst = max(worst, largest - sup)
    return ClaimOutcome(worst, 0.0, worst <= 1e-12, {"ms": ms, "trials": trials}, {"max_by_m": per_m})


@claim("q_fp_tight", "the tight related instance attains (sqrt(m)+1)/2", accepts_m=lambda m: m >= 2)
def _q_fp_tight(params, seed, budget, tol):
    ms = [int(params["m"])] if "m" in params else [4, 9, 16]
    worst, values = 0.0, {}
    for m in ms:
        inst = gen_tight_related(m)
        sup = analysis.war_q_fp_sup(m)
        war = analysis.war_q_fp(inst.env.speeds)
        s_1 = inst.env.speeds[0]
        x_star, minimum = analysis.tight_minimizer(s_1, m)
        curve = analysis.tight_curve(x_star, s_1, m)
        values[str(m)] = war
        worst = max(worst, abs(war - sup), abs(minimum - sup), abs(curve - minimum))
    return ClaimOutcome(worst, 1e-12, worst <= 1e-12, {"ms": ms}, {"war_by_m": values})


# ---- Rm ----

@claim("r_sqrt_m", "min(s(makespan-min), s(min-work)) <= sqrt(m) on unrelated machines",
       accepts_m=lambda m: m >= 2)
def _r_sqrt_m(params, seed, budget, tol):
    ms = [int(params["m"])] if "m" in params else [2, 3]
    count = int(params.get("count", 200))
    worst_ratio, branch_failures = 0.0, 0
    branches = {"makespan-min": 0, "min-work": 0}
    for m in ms:
        max_n = min(int(params.get("max_n", 6)), _max_jobs(m, budget.max_states))
        bound = math.sqrt(m)
        for s in _seeds(seed + m, count):
            inst = gen_random("unrelated", Mode.NP, m, 1 + s % max_n, seed=s)
            envelope = oracle.brute_prefix_envelope(inst, budget)
            makespan_min = oracle.brute_makespan_min(inst, budget)
            s_makespan = ratio_s_envelope(makespan_min.loads, envelope).value
            s_min_work = _s(inst, min_work_assignment(inst), envelope)
            worst_ratio = max(worst_ratio, min(s_makespan, s_min_work) / bound)

            branch = analysis.unrelated_branch(makespan_min.value, inst.total_work, m)
            branches[branch] += 1
            chosen = s_makespan if branch == "makespan-min" else s_min_work
            if chosen > bound + MATCH_EPS:
                branch_failures += 1
    passed = worst_ratio <= 1 + MATCH_EPS and branch_failures == 0
    details = {"branches": branches, "branch_failures": branch_failures}
    return ClaimOutcome(worst_ratio, 1.0, passed, {"ms": ms, "count": count}, details)


# ---- SAR ----

@claim("sar_values", "brute-force c* matches the simultaneous ratio of each environment",
       accepts_m=lambda m: 2 <= m <= 6)
def _sar_values(params, seed, budget, tol):
    ms = [int(params["m"])] if "m" in params else [2, 3]
    ks = [float(k) for k in params.get("ks", (2, 10, 100))]
    cases, passed = [], True

    for m in ms:
        inst = make_instance(Identical(m), Mode.NP, [1.0] * m, label=f"unit jobs m={m}")
        value = oracle.brute_c_star(inst, budget).value
        ok = value == float(m)
        passed &= ok
        cases.append({"case": f"identical m={m}", "c_star": value, "expected": float(m), "ok": ok})

    related = make_instance(Related((3.0, 1.0)), Mode.NP, [0.25] * 4, label="quarter jobs speeds (3,1)")
    value = oracle.brute_c_star(related, budget).value
    expected = analysis.sar_value(related.env)
    ok = abs(value - expected) <= 0.1 * expected
    passed &= ok
    cases.append({"case": "related (3,1) quarter jobs", "c_star": value, "expected": expected, "ok": ok})

    for k in ks:
        value = oracle.brute_c_star(gen_sar_unrelated(k), budget).value
        ok = value == k + 1
        passed &= ok
        cases.append({"case": f"unrelated K={k:g}", "c_star": value, "expected": k + 1, "ok": ok})

    deviation = max(abs(c["c_star"] - c["expected"]) / c["expected"] for c in cases)
    return ClaimOutcome(deviation, 0.1, passed, {"ms": ms, "ks": ks}, {"cases": cases})


# ---- 性质 ----

def _dominated(rng: np.random.Generator, y: np.ndarray) -> np.ndarray:
    """由 y 做若干次均衡转移再减小, 得到 x ⪯_s y (整数)"""
    x = np.sort(y)[::-1].copy()
    for _ in range(int(rng.integers(0, 3))):
        i, j = int(np.argmax(x)), int(np.argmin(x))
        moved = int(rng.integers(0, (x[i] - x[j]) // 2 + 1))
        x[i] -= moved
        x[j] += moved
    x = x - rng.integers(0, x + 1) * (rng.random(len(x)) < 0.3)
    return rng.permutation(x)


def _ints(rng: np.random.Generator, low: int, high: int) -> np.ndarray:
    return rng.integers(0, 21, size=int(rng.integers(low, high + 1)))


def _merge_trial(rng, tol) -> bool:
    y, y2 = _ints(rng, 1, 5), rng.integers(0, 21, size=2)
    x, x2 = _dominated(rng, y), _dominated(rng, y2)
    if not (prefix_dominates(x, y, EXACT) and prefix_dominates(x2, y2, EXACT)):
        return False
    return prefix_dominates(concat(x.tolist(), x2.tolist()), concat(y.tolist(), y2.tolist()), EXACT)


def _rearrangement_trial(rng, tol) -> bool:
    size = int(rng.integers(1, 7))
    x = np.sort(rng.integers(0, 21, size=size))[::-1]
    y = np.sort(rng.integers(0, 21, size=size))[::-1]
    shuffled = rng.permutation(y)
    return dot(x.tolist(), shuffled.tolist()) <= dot(x.tolist(), y.tolist())


def _coord_implies_prefix_trial(rng, tol) -> bool:
    y = _ints(rng, 1, 6)
    x = rng.permutation(y - rng.integers(0, y + 1))
    if not coord_dominates(x, y, EXACT):
        return False
    z = _ints(rng, len(y), len(y))
    if coord_dominates(z, y, EXACT) and not prefix_dominates(z, y, EXACT):
        return False
    if not tol.le(ratio_s_pair(z, y), ratio_c_pair(z, y)):
        return False
    return prefix_dominates(x, y, EXACT)


def _transitivity_trial(rng, tol) -> bool:
    z = _ints(rng, 1, 6)
    y = _dominated(rng, z)
    x = _dominated(rng, y)
    if not (prefix_dominates(x, y, EXACT) and prefix_dominates(y, z, EXACT)):
        return False
    return prefix_dominates(x, z, EXACT) and prefix_dominates(x, x, EXACT)


PROPERTY_TRIALS: Dict[str, Callable[[np.random.Generator, Tolerance], bool]] = {
    "merge": _merge_trial,
    "rearrangement": _rearrangement_trial,
    "coord_implies_prefix": _coord_implies_prefix_trial,
    "prefix_transitive": _transitivity_trial,
}


@claim("properties", "dominance properties hold on random integer vectors")
def _properties(params, seed, budget, tol):
    trials = int(params.get("trials", 10_000))
    violations = {}
    for k, (name, trial) in enumerate(PROPERTY_TRIALS.items()):
        rng = np.random.default_rng(seed + k)
        violations[name] = sum(1 for _ in range(trials) if not trial(rng, tol))
    total = sum(violations.values())
    return ClaimOutcome(total, 0, total == 0, {"trials": trials}, {"violations": violations})


# ---- 离散化演示 (只报告) ----

@claim("q_np_discretize", "discretized tight instance stays near the fractional ratio (report only)",
       accepts_m=lambda m: m >= 2)
def _q_np_discretize(params, seed, budget, tol):
    m = int(params.get("m", 4))
    epsilons = [float(e) for e in params.get("epsilons", (0.1, 0.01))]
    speeds = gen_tight_related(m).env.speeds
    profile = SpeedProfile(speeds)
    war = analysis.war_q_fp(profile)
    fractional = analysis.closed_envelope(profile)
    targets = optimal_regular_loads(speeds)

    rows = []
    for eps in epsilons:
        inst = discretize(speeds, eps)
        try:
            value = oracle.brute_s_star(inst, budget).value
            method = "exact-enumeration"
        except BudgetExceededError:
            # 可分割包络不超过不可中断包络, 所以这是 s* 的上界
            value = _s(inst, lpt(inst), fractional)
            method = "lpt-upper-bound"
        filled = sorted_prefix_sums(load_vector(fill_to_targets(inst, targets), inst))
        fill_ok = all(p <= f + (i + 1) * eps + MATCH_EPS for i, (p, f) in enumerate(zip(filled, fractional)))
        rows.append({
            "epsilon": eps,
            "jobs": inst.n,
            "value": value,
            "method": method,
            "in_band": war - 10 * eps <= value <= math.sqrt(m),
            "fill_within_eps": fill_ok,
        })
    logger.info(f"离散化演示: {[(r['epsilon'], r['value'], r['method']) for r in rows]}")
    return ClaimOutcome(rows[-1]["value"] if rows else war, war, True,
                        {"m": m, "ms": [m], "epsilons": epsilons}, {"rows": rows})


# ---- 表1 ----

@dataclass
class TableCell:
    cell: str
    lower: float
    upper: float
    lower_strict: bool = False
    lower_evidence: Optional[float] = None
    upper_evidence: Optional[float] = None
    lower_slack: float = 0.0  # 下界证据允许的离散化误差
    status: str = "not measured"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cell": self.cell,
            "lower": self.lower,
            "upper": self.upper,
            "lower_strict": self.lower_strict,
            "lower_evidence": self.lower_evidence,
            "upper_evidence": self.upper_evidence,
            "lower_slack": self.lower_slack,
            "status": self.status,
        }


def _interval(machine: str, mode: Mode, m: int) -> Tuple[float, float, bool]:
    if m == 1:
        return 1.0, 1.0, False
    low, high = analysis.war_q_fp_sup(m), math.sqrt(m)
    if machine == "P":
        if mode is not Mode.NP or m == 2:
            return 1.0, 1.0, False
        return 1.0, (math.sqrt(5) - 1 if m == 3 else 1.5), True
    if machine == "Q" and mode is Mode.FP:
        return low, low, False
    return low, high, False


def _judge(cell: TableCell) -> str:
    ok = True
    if cell.lower_evidence is not None:
        if cell.lower_strict:
            ok &= cell.lower_evidence > cell.lower
        else:
            ok &= cell.lower_evidence >= cell.lower - cell.lower_slack - MATCH_EPS
    if cell.upper_evidence is not None:
        ok &= cell.upper_evidence <= cell.upper + MATCH_EPS
    return Verdict.PASS.value if ok else Verdict.FAIL.value


def _guarded(cell: TableCell, measure: Callable[[], None]) -> TableCell:
    try:
        measure()
    except BudgetExceededError as e:
        logger.warning(f"{cell.cell} 超出枚举预算: {e}")
        cell.status = "skipped: budget"
        return cell
    if cell.lower_evidence is None and cell.upper_evidence is None:
        return cell
    cell.status = _judge(cell)
    return cell


def table1_report(m: int, seed: int = 0, budget: Optional[EnumerationBudget] = None,
                  instances: int = 20, samples: int = 200) -> Dict[str, Any]:
    """表1的9个格子: 理论区间 + 小规模实测证据"""
    if m < 1:
        raise ValidationError([f"m must be >= 1, got {m}"])
    budget = budget or DEFAULT_BUDGET
    seeds = _seeds(seed, instances)
    n_max = min(8, _max_jobs(m, min(budget.max_states, 200_000))) if m > 1 else 8
    cells: List[TableCell] = []

    def cell(machine: str, mode: Mode) -> TableCell:
        low, high, strict = _interval(machine, mode, m)
        return TableCell(f"{machine}m({mode.value})", low, high, strict)

    if m == 1:
        for machine in ("P", "Q", "R"):
            for mode in Mode:
                c = cell(machine, mode)
                c.lower_evidence = c.upper_evidence = 1.0
                c.status = _judge(c)
                cells.append(c)
        return {"m": m, "seed": seed, "cells": [c.to_dict() for c in cells]}

    # Pm(NP)
    c = cell("P", Mode.NP)

    def p_np():
        worst = 0.0
        for s in seeds:
            inst = gen_random("identical", Mode.NP, m, 1 + s % n_max, seed=s)
            envelope = oracle.brute_prefix_envelope(inst, budget)
            best_makespan = oracle.brute_makespan_min(inst, budget)
            best_cover = oracle.brute_cover_max(inst, budget)
            worst = max(worst, min(_s(inst, lpt(inst), envelope),
                                   ratio_s_envelope(best_makespan.loads, envelope).value,
                                   ratio_s_envelope(best_cover.loads, envelope).value))
        c.upper_evidence = worst
        if m >= 3:
            c.lower_evidence = oracle.brute_s_star(gen_rm_instance(m), budget).value
    cells.append(_guarded(c, p_np))

    # Pm(PP)
    c = cell("P", Mode.PP)

    def p_pp():
        worst = 0.0
        for s in seeds:
            inst = gen_random("identical", Mode.PP, m, 1 + s % n_max, seed=s)
            sampled = np.min([sorted_prefix_sums(v) for v in oracle.sample_preemptive_loads(inst, s, samples)],
                             axis=0)
            worst = max(worst, ratio_s_envelope(load_vector(mcr(inst), inst), sampled).value)
        c.upper_evidence = worst
    cells.append(_guarded(c, p_pp))

    # Pm(FP)
    c = cell("P", Mode.FP)

    def p_fp():
        worst = 0.0
        for s in seeds:
            inst = gen_random("identical", Mode.FP, m, 1 + s % n_max, seed=s)
            worst = max(worst, _s(inst, uniform_fractional(inst), oracle.closed_form_envelope(inst)))
        c.upper_evidence = worst
    cells.append(_guarded(c, p_fp))

    # Qm(NP): 离散化紧实例给下界, 随机实例给上界
    c = cell("Q", Mode.NP)

    def q_np():
        # s* >= war − 10ε, ε 取预算内能精确枚举的最小值
        jobs = _max_jobs(m, min(budget.max_states, 200_000))
        tight = discretize(gen_tight_related(m).env.speeds, 1.0 / jobs)
        c.lower_evidence = oracle.brute_s_star(tight, budget).value
        c.lower_slack = 10.0 / jobs
        worst = 0.0
        for s in seeds:
            inst = gen_random("related", Mode.NP, m, 1 + s % n_max, seed=s)
            envelope = oracle.brute_prefix_envelope(inst, budget)
            best_makespan = oracle.brute_makespan_min(inst, budget)
            worst = max(worst, min(ratio_s_envelope(best_makespan.loads, envelope).value,
                                   _s(inst, min_work_assignment(inst), envelope)))
        c.upper_evidence = worst
    cells.append(_guarded(c, q_np))

    cells.append(cell("Q", Mode.PP))

    # Qm(FP)
    c = cell("Q", Mode.FP)

    def q_fp():
        c.lower_evidence = analysis.war_q_fp(gen_tight_related(m).env.speeds)
        rng = np.random.default_rng(seed)
        c.upper_evidence = max(analysis.war_q_fp(_random_speeds(rng, m, integral=k % 2 == 0))
                               for k in range(instances))
        c.upper_evidence = max(c.upper_evidence, c.lower_evidence)
    cells.append(_guarded(c, q_fp))

    # Rm(NP)
    c = cell("R", Mode.NP)

    def r_np():
        worst = 0.0
        for s in seeds:
            inst = gen_random("unrelated", Mode.NP, m, 1 + s % n_max, seed=s)
            envelope = oracle.brute_prefix_envelope(inst, budget)
            best_makespan = oracle.brute_makespan_min(inst, budget)
            worst = max(worst, min(ratio_s_envelope(best_makespan.loads, envelope).value,
                                   _s(inst, min_work_assignment(inst), envelope)))
        c.upper_evidence = worst
    cells.append(_guarded(c, r_np))

    cells.append(cell("R", Mode.PP))
    cells.append(cell("R", Mode.FP))
    return {"m": m, "seed": seed, "cells": [c.to_dict() for c in cells]}


def render_report_text(report: Dict[str, Any], with_system: bool = True) -> str:
    """表1的文本形式 (给人看, 格式不保证稳定)"""
    lines = []
    if with_system:
        info = get_system_info()
        if info:
            lines.append(f"# {info.get('platform', '')} python {info.get('python_version', '')} "
                         f"cpus={info.get('cpu_count', '')} at {info.get('generated_at', '')}")
    lines.append(f"m={report['m']} seed={report['seed']}")
    lines.append(f"{'cell':<8} {'interval':<22} {'lower ev.':>12} {'upper ev.':>12}  status")
    for c in report["cells"]:
        if c["lower"] == c["upper"]:
            interval = f"= {c['lower']:.6g}"
        else:
            left = "(" if c["lower_strict"] else "["
            interval = f"{left}{c['lower']:.6g}, {c['upper']:.6g}]"
        lines.append(f"{c['cell']:<8} {interval:<22} {_fmt(c['lower_evidence']):>12} "
                     f"{_fmt(c['upper_evidence']):>12}  {c['status']}")
    return "\n".join(lines)


def render_reports_text(reports: Sequence[BoundReport]) -> str:
    lines = []
    for r in reports:
        lines.append(f"{r.verdict.value.upper():<4} {r.claim:<16} measured={_fmt(r.measured)} "
                     f"bound={_fmt(r.bound)} ({format_duration(r.seconds)})")
    return "\n".join(lines)


def _fmt(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)

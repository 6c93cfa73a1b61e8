import json
import math

import jsonschema
import pytest

from shared.protocol import BoundReport, Verdict
from shared.utils import format_float, parse_float
from simsched.analysis import rm_branch_bounds
from simsched.core import Tolerance
from simsched.errors import UnknownClaimError, ValidationError
from simsched.verification import (
    CLAIMS, ClaimOutcome, ClaimSpec, claim_params, render_report_text, render_reports_text, run_claims,
    table1_report, verify_claim,
)

CLAIM_NAMES = {
    "pm_np_lower", "p2_np_one", "p3_np_upper", "pm_np_lpt", "pm_pp_one", "q_fp_envelope",
    "q_fp_formula", "q_fp_sup", "q_fp_tight", "r_sqrt_m", "sar_values", "properties", "q_np_discretize",
}

# 每个声明缩小规模的参数, 单次运行在秒级
SMALL_PARAMS = {
    "pm_np_lower": {"m": 3},
    "p2_np_one": {"count": 20, "max_n": 6},
    "p3_np_upper": {"count": 10, "max_n": 5},
    "pm_np_lpt": {"m": 4, "count": 3},
    "pm_pp_one": {"m": 3, "count": 5, "samples": 40},
    "q_fp_envelope": {"count": 5, "max_m": 3},
    "q_fp_formula": {"count": 10, "samples": 1000, "profiles": 3},
    "q_fp_sup": {"trials": 200},
    "q_fp_tight": {},
    "r_sqrt_m": {"m": 2, "count": 20, "max_n": 5},
    "sar_values": {"m": 2, "ks": [2, 10]},
    "properties": {"trials": 200},
    "q_np_discretize": {"m": 4, "epsilons": [0.25]},
}


def test_registry_is_complete():
    assert set(CLAIMS) == CLAIM_NAMES
    assert all(spec.summary for spec in CLAIMS.values())


@pytest.mark.parametrize("name", sorted(CLAIM_NAMES))
def test_claim_passes_at_small_scale(name, budget):
    report = verify_claim(name, SMALL_PARAMS[name], seed=0, budget=budget)
    assert report.claim == name
    assert report.params["seed"] == 0
    if name != "properties":
        assert report.params["ms"]
    assert report.verdict is Verdict.PASS, report.details


def test_lower_bound_instance(budget):
    report = verify_claim("pm_np_lower", {"m": 3}, budget=budget)
    assert report.measured == pytest.approx(rm_branch_bounds(3)["min"], abs=1e-9)
    assert report.measured > 1.04
    assert all(report.details["checks"].values())
    assert report.params == {"m": 3, "ms": [3], "seed": 0, "abs_eps": 1e-12, "rel_eps": 1e-9}


def test_sar_cases(budget):
    report = verify_claim("sar_values", {"m": 2, "ks": [10]}, budget=budget)
    cases = {c["case"]: c for c in report.details["cases"]}
    assert cases["identical m=2"]["c_star"] == 2.0
    assert cases["unrelated K=10"]["c_star"] == 11.0
    assert cases["related (3,1) quarter jobs"]["c_star"] == pytest.approx(4 / 3)


def test_three_machine_certificate(budget):
    report = verify_claim("p3_np_upper", {"count": 10, "max_n": 5}, budget=budget)
    assert report.details["certificate_failures"] == 0
    assert report.measured <= report.details["worst_certificate"] + 1e-9
    assert report.details["worst_certificate"] <= math.sqrt(5) - 1 + 1e-9


def test_discretize_is_report_only(budget):
    report = verify_claim("q_np_discretize", {"m": 4, "epsilons": [0.25]}, budget=budget)
    row = report.details["rows"][0]
    assert row["jobs"] == 4
    assert row["method"] == "exact-enumeration"
    assert report.passed


def test_deterministic_for_fixed_seed(budget):
    a = verify_claim("p3_np_upper", {"count": 5, "max_n": 5}, seed=11, budget=budget)
    b = verify_claim("p3_np_upper", {"count": 5, "max_n": 5}, seed=11, budget=budget)
    assert a.to_json(with_timing=False) == b.to_json(with_timing=False)


def test_unknown_claim():
    with pytest.raises(UnknownClaimError):
        verify_claim("no_such_claim")


class TestClaimParams:
    def test_accepted(self):
        assert claim_params("pm_np_lower", 4) == {"m": 4}
        assert claim_params("pm_np_lower", None) == {}

    def test_rejected_when_strict(self):
        with pytest.raises(ValidationError):
            claim_params("pm_np_lpt", 3)
        with pytest.raises(ValidationError):
            claim_params("p2_np_one", 2)

    def test_dropped_when_lenient(self, caplog):
        with caplog.at_level("WARNING", logger="simsched.verification"):
            assert claim_params("pm_np_lpt", 3, strict=False) == {}
        assert "m=3" in caplog.text


def test_fixed_machine_count_recorded(budget):
    assert verify_claim("p2_np_one", {"count": 3, "max_n": 4}, budget=budget).params["ms"] == [2]
    assert verify_claim("p3_np_upper", {"count": 3, "max_n": 4}, budget=budget).params["ms"] == [3]
    report = verify_claim("q_fp_formula", {"count": 0, "samples": 100, "profiles": 2}, budget=budget)
    assert report.params["ms"] == [2, 4]


def test_tolerance_reaches_claim_runner(monkeypatch):
    seen = []

    def runner(params, seed, budget, tol):
        seen.append(tol)
        return ClaimOutcome(0.0, 0.0, True, {"ms": [1]})

    monkeypatch.setitem(CLAIMS, "echo_tol", ClaimSpec("echo_tol", runner, lambda m: False, "echo"))
    tol = Tolerance(1e-6, 1e-3)
    report = verify_claim("echo_tol", tol=tol)
    assert seen == [tol]
    assert report.params["abs_eps"] == 1e-6
    assert report.params["rel_eps"] == 1e-3


@pytest.mark.asyncio
async def test_run_claims_keeps_order(budget):
    names = ["q_fp_tight", "q_fp_sup"]
    reports = await run_claims(names, {"q_fp_sup": {"trials": 50}}, seed=1, budget=budget)
    assert [r.claim for r in reports] == names
    assert all(r.passed for r in reports)


@pytest.mark.asyncio
async def test_run_claims_rejects_unknown_before_running(budget):
    with pytest.raises(UnknownClaimError):
        await run_claims(["q_fp_tight", "nope"], budget=budget)


class TestBoundReport:
    def test_json_line(self):
        report = BoundReport("x", {"m": 2}, math.inf, 1.0, Verdict.FAIL, seconds=2.5)
        data = json.loads(report.to_json(with_timing=False))
        assert data["measured"] == "inf"
        assert data["seconds"] == 0.0
        assert "details" not in data

    def test_from_json(self):
        report = BoundReport("x", {"m": 2}, math.inf, 1.0, Verdict.FAIL, details={"k": 1})
        parsed = BoundReport.from_json(report.to_json())
        assert parsed.measured == math.inf
        assert parsed.verdict is Verdict.FAIL
        assert parsed.details == {"k": 1}
        assert not parsed.passed

    @pytest.mark.parametrize("document", [
        {"claim": "x", "params": {}, "measured": 1.0, "bound": 1.0, "verdict": "maybe", "seconds": 0.0},
        {"claim": "x", "params": {}, "measured": 1.0, "verdict": "pass", "seconds": 0.0},
    ])
    def test_from_json_rejects_bad_document(self, document):
        with pytest.raises(jsonschema.ValidationError):
            BoundReport.from_json(json.dumps(document))

    def test_floats_read_back_exactly(self):
        value = 0.1 + 0.2
        report = BoundReport("x", {}, value, 1 / 3, Verdict.PASS)
        parsed = BoundReport.from_json(report.to_json())
        assert parsed.measured == value and parsed.bound == 1 / 3

    @pytest.mark.parametrize("value", [math.inf, -math.inf, 0.1 + 0.2, 3])
    def test_float_format_inverts(self, value):
        assert parse_float(format_float(value)) == value


class TestTableReport:
    def test_single_machine(self, budget):
        report = table1_report(1, budget=budget)
        assert len(report["cells"]) == 9
        for cell in report["cells"]:
            assert cell["lower"] == cell["upper"] == 1.0
            assert cell["status"] == "pass"

    def test_three_machines(self, budget):
        report = table1_report(3, seed=2, budget=budget, instances=3, samples=20)
        cells = {c["cell"]: c for c in report["cells"]}
        assert set(cells) == {f"{k}m({mode})" for k in "PQR" for mode in ("NP", "PP", "FP")}

        p_np = cells["Pm(NP)"]
        assert p_np["lower_strict"]
        assert p_np["upper"] == pytest.approx(math.sqrt(5) - 1)
        assert p_np["lower_evidence"] > 1
        for name in ("Pm(NP)", "Pm(PP)", "Pm(FP)", "Qm(NP)", "Qm(FP)", "Rm(NP)"):
            assert cells[name]["status"] == "pass", cells[name]
        assert cells["Qm(FP)"]["lower"] == pytest.approx((math.sqrt(3) + 1) / 2)
        assert cells["Rm(FP)"]["upper"] == pytest.approx(math.sqrt(3))
        assert cells["Rm(PP)"]["status"] == "not measured"

        q_np = cells["Qm(NP)"]
        assert q_np["lower_evidence"] >= q_np["lower"] - q_np["lower_slack"]
        assert q_np["lower_slack"] == pytest.approx(10 / 11)

    def test_large_m_skips_on_budget(self, budget):
        report = table1_report(40, budget=budget, instances=2, samples=5)
        cells = {c["cell"]: c for c in report["cells"]}
        assert cells["Pm(NP)"]["status"] == "skipped: budget"
        assert cells["Qm(FP)"]["status"] == "pass"

    def test_text_rendering(self, budget):
        text = render_report_text(table1_report(1, budget=budget), with_system=False)
        assert "Pm(NP)" in text
        assert text.splitlines()[0] == "m=1 seed=0"

    def test_rejects_bad_m(self):
        with pytest.raises(ValidationError):
            table1_report(0)


def test_render_reports_text():
    report = BoundReport("q_fp_tight", {}, 0.0, 1e-12, Verdict.PASS, seconds=0.01)
    assert render_reports_text([report]).startswith("PASS q_fp_tight")


@pytest.mark.slow
@pytest.mark.parametrize("name, params", [
    ("pm_np_lower", {"m": 4}),
    ("q_fp_sup", {}),
    ("sar_values", {}),
    ("pm_pp_one", {}),
])
def test_default_scale(name, params):
    assert verify_claim(name, params, seed=0).passed

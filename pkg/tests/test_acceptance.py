"""Acceptance suite: the eight package-level criteria, one test each,
with a printed pass/fail line per criterion.

The default-grid sweep (criterion 4) is computed once and shared with the
residual/flux/tail criterion (7).  Tolerances are pinned here and nowhere
else; run with `pytest tests/test_acceptance.py -v -s` to see the lines.
"""

import json

import pytest

from conftest import ACCEPTANCE_LINES
from logemden import SweepConfig, run_sweep
from logemden.verify import (
    check_closed_forms,
    check_equilibrium_regression,
    check_frame_equivalence,
    check_growth_inversion,
    check_lambert,
    check_profile_residual,
    check_separatrix_rates,
)

JOBS = 2


def _report(name: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)  # echoed in the terminal summary


@pytest.fixture(scope="module")
def default_sweep():
    """Criterion-4 workload: full default grid, 100 random states per cell."""
    return run_sweep(SweepConfig(jobs=JOBS))


def test_criterion_1_closed_form_suite():
    """1000 random triples: root identities and stationarity of A at 1e-12."""
    res = check_closed_forms(n_samples=1000)
    _report("criterion 1 (closed-form suite)", res.passed, res.detail)
    assert res.passed


def test_criterion_2_lambert_suite():
    """Residual <= 1e-13 max(s,1) and sandwich bounds on s in [e, 1e30]."""
    res = check_lambert(n_samples=500)
    inv = check_growth_inversion()
    _report("criterion 2 (Lambert suite)", res.passed and inv.passed,
            f"{res.detail}; inversion {inv.detail}")
    assert res.passed and inv.passed


def test_criterion_3_exact_solution_regression():
    """beta=0, n=5, alpha=2: equilibrium held to 1e-8 over 100 units and
    the closed-form profile solves the radial equation to 1e-8."""
    eq = check_equilibrium_regression()
    prof = check_profile_residual()
    _report("criterion 3 (exact-solution regression)", eq.passed and prof.passed,
            f"equilibrium {eq.detail}; profile {prof.detail}")
    assert eq.passed and prof.passed


def test_criterion_4_dichotomy_reproduction(default_sweep):
    """Default grid, >= 100 states/cell: zero undetermined at T = t0+300;
    converging tails within 1e-3 (beta=0) / 5e-2 with trend (beta!=0)."""
    rep = default_sweep
    cells = [c for c in rep.cells if c["error"] is None]
    n_traj = rep.summary["n_trajectories"]
    undet = rep.summary["total_undetermined"]
    worst_b0 = max((c["worst_conv_dev"] for c in cells if c["beta"] == 0.0), default=0.0)
    worst_bn = max((c["worst_conv_dev"] for c in cells if c["beta"] != 0.0), default=0.0)
    ok = (
        rep.summary["n_failed_cells"] == 0
        and len(cells) == 60
        and n_traj == 6000
        and undet == 0
        and worst_b0 <= 1e-3
        and worst_bn <= 5e-2
        and all(c["checks"]["dichotomy"] and c["checks"]["conv_dev"] for c in cells)
    )
    _report(
        "criterion 4 (dichotomy reproduction)",
        ok,
        f"{len(cells)} cells, {n_traj} trajectories, {undet} undetermined; "
        f"worst |psi(T)-A|/A: beta=0 {worst_b0:.2e} (tol 1e-3), "
        f"beta!=0 {worst_bn:.2e} (tol 5e-2)",
    )
    assert ok


def test_criterion_5_removable_branch_rate():
    """Separatrix trajectories decay at -2/(alpha-1) within 2% on every
    beta=0 grid cell."""
    res = check_separatrix_rates(full=True)
    _report("criterion 5 (removable-branch rate)", res.passed, res.detail)
    assert res.passed


def test_criterion_6_frame_equivalence():
    """Physical and log-radius integrations agree within 50 rel_tol for
    20 random cases."""
    res = check_frame_equivalence(n_cases=20)
    _report("criterion 6 (frame equivalence)", res.passed, res.detail)
    assert res.passed


def test_criterion_7_residuals_and_tails(default_sweep):
    """Flux defect <= 1e-6 and equation residual <= 1e-5 on all sweep
    trajectories; derivative tails <= 1e-4 on converged trajectories."""
    rep = default_sweep
    flux = rep.summary["max_flux_defect"]
    resid = rep.summary["max_residual"]
    tails = max(rep.summary["max_tail_psi_t"], rep.summary["max_tail_psi_tt"])
    n_checked = sum(c["n_deriv_checked"] for c in rep.cells if c["error"] is None)
    ok = flux <= 1e-6 and resid <= 1e-5 and tails <= 1e-4 and n_checked > 0
    _report(
        "criterion 7 (residuals and tails)",
        ok,
        f"flux {flux:.2e} (tol 1e-6); residual {resid:.2e} (tol 1e-5); "
        f"derivative tails {tails:.2e} (tol 1e-4) over {n_checked} converged trajectories",
    )
    assert ok


def test_criterion_8_sweep_determinism():
    """Identical configs give bit-identical reports regardless of --jobs."""
    kw = dict(
        ns=(4, 5),
        alpha_quantiles=(0.5,),
        betas=(0.0, 1.0),
        n_states=10,
        horizon=100.0,
    )
    j1 = run_sweep(SweepConfig(jobs=1, **kw))
    j2 = run_sweep(SweepConfig(jobs=2, **kw))
    rerun = run_sweep(SweepConfig(jobs=1, **kw))
    d1 = json.loads(j1.to_json())
    d2 = json.loads(j2.to_json())
    d1["config"].pop("jobs")
    d2["config"].pop("jobs")
    same_jobs = json.dumps(d1, sort_keys=True) == json.dumps(d2, sort_keys=True)
    same_rerun = rerun.to_json() == j1.to_json()
    ok = same_jobs and same_rerun
    _report(
        "criterion 8 (determinism)",
        ok,
        f"jobs=1 vs jobs=2 {'identical' if same_jobs else 'DIFFER'}; "
        f"rerun {'identical' if same_rerun else 'DIFFERS'}",
    )
    assert ok

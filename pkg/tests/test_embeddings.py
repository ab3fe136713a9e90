import numpy as np
import pytest

from dbspace import hb
from dbspace.acceptance import case1_plan, case2_plan, riesz_ladder
from dbspace.embeddings import (PSI_LOWER, PSI_UPPER, PlanError, build_psi, build_psi1,
                                build_psi_case2, certify_case2_bounds, certify_psi1_bounds,
                                certify_psi_bounds, combined_demo, equivalent_norm_subspace,
                                mu_coeffs, probe_points, psi1_ratio_series,
                                psi_ratio_series, ray_plan, riesz_extract)
from dbspace.sequences import SparsePointPlan
from dbspace.space import norm_h

PW = hb.builtin_fixture("pw")


@pytest.fixture(scope="module")
def pw_plan():
    return ray_plan(PW)


# -- Riesz extraction --------------------------------------------------------------

def _pw_ladder_offdiag(y):
    # normalized sinc-kernel Gram entries on the imaginary axis,
    # sinh(a+b)/(a+b) / sqrt(sinh(2a)/(2a) sinh(2b)/(2b)), with the
    # exponentials cancelled by hand
    s = 0.0
    for a in y:
        for b in y:
            if a == b:
                continue
            lg = (np.log1p(-np.exp(-2 * (a + b)))
                  - 0.5 * (np.log1p(-np.exp(-4 * a)) + np.log1p(-np.exp(-4 * b)))
                  + 0.5 * np.log(4 * a * b) - np.log(a + b))
            s += np.exp(2 * lg)
    return s


def test_riesz_single():
    sel = riesz_extract(PW, [2j])
    assert len(sel) == 1 and sel.off_diag_sq == 0.0
    assert sel.frame_bounds == pytest.approx((1.0, 1.0))


def test_riesz_ladder():
    sel = riesz_extract(PW, riesz_ladder(12), target=0.5)
    assert len(sel) >= 8
    assert sel.off_diag_sq <= 0.5
    # independent closed-form Gram on the selected heights
    assert sel.off_diag_sq == pytest.approx(_pw_ladder_offdiag(sel.points.imag), rel=1e-10)
    r = np.sqrt(sel.off_diag_sq)
    lam = np.linalg.eigvalsh(sel.gram.entries)
    assert lam[0] >= 1 - r - 1e-9 and lam[-1] <= 1 + r + 1e-9


def test_riesz_rejects_crowded_candidates():
    sel = riesz_extract(PW, [1j, 1.01j, 1.02j, 5j])
    assert 1 in sel.rejected and 2 in sel.rejected
    assert sel.off_diag_sq <= 0.5


# -- Psi on the ray -------------------------------------------------------------------

def test_psi_zero(pw_plan):
    F = build_psi(PW, pw_plan, np.zeros(3))
    assert norm_h(F) == 0.0


def test_psi_single_term():
    v1 = 2j
    plan = SparsePointPlan("R7", np.array([v1]))
    F = build_psi(PW, plan, [1.0])
    z = np.array([2j * v1])
    one = (1 - np.conj(PW.theta(np.array([v1]))) * PW.theta(z)) / (np.conj(v1) - z)
    assert F.ratio_to_E(z)[0] == pytest.approx(one[0], rel=1e-13)
    assert F.coeffs[0] == pytest.approx(mu_coeffs(PW, np.array([v1]))[0])


def test_psi_linear_and_series(pw_plan, rng):
    d1 = rng.normal(size=3) + 1j * rng.normal(size=3)
    d2 = rng.normal(size=3)
    a = build_psi(PW, pw_plan, d1 + d2).coeffs
    b = build_psi(PW, pw_plan, d1).coeffs + build_psi(PW, pw_plan, d2).coeffs
    assert np.allclose(a, b, rtol=1e-13)
    z = 1j * np.geomspace(1, 1e5, 30) + 0.5
    F = build_psi(PW, pw_plan, d1)
    ser = psi_ratio_series(PW, pw_plan, d1, z)
    assert np.allclose(F.ratio_to_E(z), ser, rtol=1e-10, atol=1e-14)


def test_psi_bounds(pw_plan, rng):
    probes = [rng.choice([-1.0, 1.0], 3) for _ in range(10)]
    probes += [rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3) for _ in range(10)]
    rep = certify_psi_bounds(PW, pw_plan, probes)
    assert rep.measured_upper <= PSI_UPPER
    assert rep.measured_lower >= PSI_LOWER - 1e-9
    assert rep.per_probe_ok and rep.ok


def test_psi_unit_probes(pw_plan):
    L = pw_plan.blocks
    pk = probe_points(pw_plan, L)
    for k in range(L):
        e = np.zeros(L)
        e[k] = 1.0
        F = build_psi(PW, pw_plan, e)
        val = abs(pk[k]) * abs(F.ratio_to_E(pk[k:k + 1])[0])
        assert val >= 0.5


def test_psi_rejects_bad_plan(pw_plan):
    pts = np.array(pw_plan.points)
    pts[3] = pts[2] * 1.01
    bad = SparsePointPlan("R7", pts, pw_plan.params)
    with pytest.raises(PlanError) as exc:
        build_psi(PW, bad, [1.0])
    assert exc.value.violation is not None
    with pytest.raises(PlanError):
        build_psi(PW, SparsePointPlan("R21case1", pts), [1.0])


# -- real-line embeddings ---------------------------------------------------------------

def test_psi1_case1(rng):
    E = hb.builtin_fixture("case1")
    plan = case1_plan(E)
    assert norm_h(build_psi1(E, plan, np.zeros(len(plan)))) == 0.0
    c = rng.normal(size=len(plan))
    x = np.linspace(5, 100, 40) + 0j
    F = build_psi1(E, plan, c)
    assert np.allclose(F.ratio_to_E(x), psi1_ratio_series(E, plan, c, x), rtol=1e-10, atol=1e-14)
    rep = certify_psi1_bounds(E, plan, seed=3)
    assert rep.bound_upper == pytest.approx(4 / 24 + 2 + 1 + 1 / 24)
    assert rep.measured_upper <= rep.bound_upper
    assert rep.measured_lower >= 0.25
    assert rep.ok


def test_case2_default():
    E = hb.builtin_fixture("case2")
    plan = case2_plan(E)
    assert norm_h(build_psi_case2(E, plan, [0.0])) == 0.0
    rep = certify_case2_bounds(E, plan, seed=1)
    assert rep.bound_upper == pytest.approx(1.25 + 2 / np.sin(np.pi / 4))
    assert rep.ok and rep.measured_lower >= 0.75


def test_case2_vertical_budget():
    y = 100.0 * 4096.0 ** np.arange(8)
    E = hb.StructureFunction(0.0, -1j * y, 1.0, "vertical")
    plan = case2_plan(E, np.pi / 2)
    assert len(plan) == 8
    rep = certify_case2_bounds(E, plan)
    assert rep.bound_upper == pytest.approx(3.25)
    assert rep.measured_upper <= 3.25
    assert rep.measured_lower >= 0.75 and rep.per_probe_ok


# -- equivalent-norm subspace ----------------------------------------------------------------

def test_equivalent_norm_rejections():
    n = np.arange(1, 30)
    rep = equivalent_norm_subspace(PW, n + 1j / n ** 2)
    assert not rep.accepted and "approaches 1" in rep.diagnostic
    rep = equivalent_norm_subspace(PW, n + 0.3j)
    assert not rep.accepted and "liminf" in rep.diagnostic
    assert not equivalent_norm_subspace(PW, [1j, 2j]).accepted


def test_equivalent_norm_mixed():
    E = hb.builtin_fixture("mixed")
    zs = E.theta_zeros
    rep = equivalent_norm_subspace(E, zs[np.argsort(np.abs(zs))])
    assert rep.accepted and rep.ok
    assert np.all(np.isfinite(rep.bounds))
    assert np.all(rep.measured <= rep.bounds)


def test_combined_demo():
    out = combined_demo(hb.builtin_fixture("mixed"))
    assert out["ok"]
    assert out["equivalentNorm"]["accepted"]

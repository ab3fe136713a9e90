import math

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from dbspace import hb
from dbspace.acceptance import riesz_ladder
from dbspace.embeddings import ray_plan
from dbspace.sequences import (LAMBDA_CONST, SparsePointPlan, TruncatedSequence,
                               block_edges, lambda_map, lambda_norms, norms,
                               plan_from_dict, select_sparse_points, validate_plan)

PW = hb.builtin_fixture("pw")

reals = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
seqs = st.lists(reals, min_size=1, max_size=12)


def test_lambda_constant():
    assert LAMBDA_CONST == pytest.approx(2.48862, abs=5e-6)


def test_lambda_examples():
    lam = lambda_map(TruncatedSequence([1.0, 1.0, 1.0], zero_tail=False)).values
    assert lam[0] == 1 and np.all(lam[1:] == 0)
    lam = lambda_map(TruncatedSequence([0.0, 7.0], zero_tail=False)).values
    assert lam[0] == 0
    assert np.allclose(lam[1:8], 1.0)
    assert np.sum(lam[:8]) == pytest.approx(7.0)


def test_partial_sums_random(rng):
    d = rng.normal(size=5) + 1j * rng.normal(size=5)
    ps = np.cumsum(lambda_map(d).values)
    assert np.allclose(ps[block_edges(5)[1:] - 1], d, atol=1e-12)


def test_norm_examples():
    assert norms(np.array([1, -1, 1, -1, 0.0])) == (2.0, 1.0, 1.0)
    assert norms(np.array([1.0, 0, 0])) == (1.0, 1.0, 1.0)
    assert norms(np.zeros(4)) == (0.0, 0.0, 0.0)
    assert norms(TruncatedSequence([])) == (0.0, 0.0, 0.0)


@settings(max_examples=200, deadline=None)
@given(seqs, seqs, reals, reals)
def test_lambda_linear(a, b, s, t):
    n = min(len(a), len(b))
    a, b = np.array(a[:n]), np.array(b[:n])
    lhs = lambda_map(s * a + t * b).values
    rhs = s * lambda_map(a).values + t * lambda_map(b).values
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * (1 + abs(s) + abs(t)) * 1e3)


@settings(max_examples=200, deadline=None)
@given(seqs)
@example([2.154605905943816e-158])  # squares would underflow without scaling
@example([1e200, -1e200])
def test_lambda_bounds(d):
    d = np.array(d)
    dinf = np.max(np.abs(d))
    l2, linf, u = lambda_norms(d)
    assert l2 <= LAMBDA_CONST * dinf * (1 + 1e-12)
    assert linf <= dinf * (1 + 1e-12)
    assert u <= dinf * (1 + 1e-12)
    # blockwise norms equal the materialised ones
    m = norms(lambda_map(d))
    assert np.allclose((l2, linf, u), m, rtol=1e-11, atol=1e-300)


@settings(max_examples=100, deadline=None)
@given(seqs)
def test_partial_sum_identity(d):
    d = np.array(d)
    ps = np.cumsum(lambda_map(d).values)
    e = block_edges(len(d))[1:] - 1
    assert np.allclose(ps[e], d, rtol=0, atol=1e-12 * (1 + np.max(np.abs(d))))


def test_lambda_out_len():
    with pytest.raises(ValueError):
        lambda_map([1.0, 2.0], out_len=100)
    assert len(lambda_map([1.0, 2.0], out_len=5)) == 5


# -- sparse plans ---------------------------------------------------------------

def _direct_growth(r):
    """Conditions (iv) and (v) by plain summation; returns failing 1-based indices."""
    iv, v = [], []
    for n in range(len(r) - 1):
        if sum(r[: n + 1]) > math.sqrt(r[n] * r[n + 1]) / 8 * (1 + 1e-12):
            iv.append(n + 1)
        if sum(1 / x for x in r[n + 1:]) >= 1 / (8 * math.sqrt(r[n] * r[n + 1])):
            v.append(n + 1)
    return iv, v


def test_pw_ladder_growth_conditions():
    pts = riesz_ladder(6)
    r = [abs(p) for p in pts]
    rep = validate_plan(SparsePointPlan("R7", pts), PW)
    iv, v = _direct_growth(r)
    assert [i for k, i in rep.violations if k == "iv"] == iv
    assert [i for k, i in rep.violations if k == "v"] == v
    # the Theta sum is far below 1/4
    assert sum(math.exp(-2 * x) for x in r) <= 0.25
    assert rep.margins["iii"][0] > 0


def test_empty_and_single():
    assert len(select_sparse_points([], "R7", PW)) == 0
    one = SparsePointPlan("R7", np.array([2j]))
    assert validate_plan(one, PW).ok


def test_precondition_rejections():
    plan = select_sparse_points(np.array([0.5j, 0.9j, 1j, 2 + 0.2j]), "R7", PW)
    rejected = [i for i, why in plan.rejected if why == "precondition"]
    assert rejected == [0, 1, 3]


def test_selected_plan_validates():
    plan = ray_plan(PW)
    assert len(plan) == 27
    assert validate_plan(plan, PW).ok
    again = plan_from_dict(plan.to_dict())
    assert validate_plan(again, PW).ok


def test_perturbed_plan_reports_index():
    plan = ray_plan(PW)
    pts = np.array(plan.points)
    k = 5
    # pull v_{k+1} down so that sum_{m<=k} |v_m| > |v_k v_{k+1}|^(1/2) / 8
    s = np.sum(np.abs(pts[:k]))
    pts[k] = 1j * (0.9 * (8 * s) ** 2 / abs(pts[k - 1]))
    bad = SparsePointPlan("R7", pts, plan.params)
    rep = validate_plan(bad, PW)
    iv = [i for key, i in rep.violations if key == "iv"]
    assert iv and iv[0] == k
    assert _direct_growth([abs(p) for p in pts])[0][0] == k


def test_unknown_mode():
    with pytest.raises(ValueError):
        select_sparse_points([1j], "nope")
    with pytest.raises(ValueError):
        plan_from_dict({"mode": "nope", "points": []})

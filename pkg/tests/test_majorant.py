import json

import numpy as np
import pytest

from dbspace import hb
from dbspace.majorant import (OPT_TOL, DomainSpec, Majorant, compare_preorder,
                              minimal_check, mflat, norm_m)
from dbspace.space import KernelSpan, random_span

LIN = hb.builtin_fixture("linear")
RAY = DomainSpec("imaginaryRay", 1.0)
LINE = DomainSpec("realLine", 0.0)


def const(v=1.0, dom=RAY, E=LIN):
    return Majorant(dom, "const", E, {"value": v})


def test_domain_validation():
    for bad in (dict(kind="disk"), dict(ratio=1.0), dict(y0=2.0, ymax=1.0)):
        with pytest.raises(ValueError):
            DomainSpec(**bad)
    with pytest.raises(ValueError):
        DomainSpec("customSampled", points=(1 - 1j,))
    d = DomainSpec("customSampled", points=(1j, 2 + 1j))
    assert DomainSpec.from_dict(d.to_dict()).points == d.points


def test_norm_example():
    F = KernelSpan.from_kernel_coeffs(LIN, [1j], [1.0])
    cert = norm_m(F, const())
    assert cert.h_norm == pytest.approx(1 / np.sqrt(np.pi), rel=1e-12)
    assert cert.sup_ratio == pytest.approx(1 / np.pi, rel=1e-12)
    assert cert.m_norm == pytest.approx(1 / np.sqrt(np.pi), rel=1e-12)
    assert cert.member()


def test_norm_zero_and_homogeneity(rng):
    assert norm_m(KernelSpan.zero(LIN), const()).m_norm == 0.0
    pw = hb.builtin_fixture("pw")
    m = Majorant(RAY, "mE", pw)
    F = random_span(pw, 4, rng)
    a = norm_m(F, m).m_norm
    b = norm_m((2 + 1j) * F, m).m_norm
    assert b == pytest.approx(abs(2 + 1j) * a, rel=1e-6)


def test_divisor_membership():
    m = Majorant(RAY, "const", LIN, {"value": 1.0}, divisor=[(2j, 1)])
    F = KernelSpan.from_kernel_coeffs(LIN, [1j], [1.0])
    cert = norm_m(F, m)
    assert not cert.divisor_ok and not np.isfinite(cert.m_norm)


def test_mflat_one_dimensional():
    ev = np.array([1j, 3j, 1 + 2j, 50j])
    r = mflat(const(), [1j], ev)
    assert np.allclose(r.values, 1 / np.sqrt(np.pi), rtol=1e-6)
    assert r.rank == 1


def test_mflat_properties(fixture_E):
    m = Majorant(RAY, "mE", fixture_E)
    basis = np.array([0.5 + 1j, -1 + 2j, 3j])
    ev = np.array([1j, 4j, 30j])
    f = mflat(m, basis, ev)
    assert np.max(f.grid_log_values - m.log_eval(f.grid_points)) <= 1e-9
    ff = mflat(f.as_majorant(), basis, ev, tabulate=False)
    assert np.max(np.abs(np.expm1(ff.log_values - f.log_values))) <= 2 * OPT_TOL
    big = mflat(m, np.concatenate([basis, [2 + 1j, 5j]]), ev, tabulate=False)
    assert np.min(big.log_values - f.log_values) >= -2 * OPT_TOL
    # the sharp majorant never exceeds the subspace kernel diagonal
    assert np.all(f.log_values <= f.log_subspace_nabla + 1e-9)


def test_majorant_json_round_trip(fixture_E):
    m = Majorant(RAY, "power", fixture_E, {"alpha": 1.5, "beta": 0.0, "gamma": 1.0, "scale": 2.0},
                 divisor=[(3j, 2)])
    m2 = Majorant.from_dict(json.loads(json.dumps(m.to_dict())), fixture_E)
    z = np.array([1j, 2 + 5j])
    assert np.allclose(m.log_eval(z), m2.log_eval(z), rtol=1e-14)
    f = mflat(Majorant(RAY, "mE", fixture_E), [1j], [2j])
    t = f.as_majorant()
    t2 = Majorant.from_dict(json.loads(json.dumps(t.to_dict())), fixture_E)
    assert np.allclose(t.log_eval(t.domain.samples()), t2.log_eval(t.domain.samples()))


def test_preorder_examples():
    m = const()
    assert compare_preorder(m, m).relation == "equivalent"
    assert compare_preorder(const(2.0), m).relation == "equivalent"
    n = 2.0
    p1 = Majorant(LINE, "power", LIN, {"alpha": n})
    p2 = Majorant(LINE, "power", LIN, {"alpha": n + 0.5})
    assert compare_preorder(p1, p2).relation == "less"
    assert compare_preorder(p2, p1).relation == "greater"


def test_preorder_domains():
    wide = DomainSpec("imaginaryRay", 1.0)
    narrow = DomainSpec("imaginaryRay", 5.0)
    rep = compare_preorder(const(1.0, wide), const(1.0, narrow))
    assert rep.relation == "less"
    assert rep.backward == "excluded"


def test_minimality_examples():
    F0 = KernelSpan.from_kernel_coeffs(LIN, [1j], [np.pi])
    assert minimal_check(const(), F0).minimal_compatible
    decay = Majorant(RAY, "power", LIN, {"alpha": -1.0})
    assert not minimal_check(decay, F0).minimal_compatible
    own = Majorant(RAY, "span", LIN, witness=F0)
    assert minimal_check(own, F0).minimal_compatible
    with pytest.raises(ValueError):
        minimal_check(const(), KernelSpan.zero(LIN))

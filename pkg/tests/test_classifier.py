import json

import numpy as np
import pytest

from dbspace import hb
from dbspace.classifier import (classify, mean_type, norm_equivalence_probe,
                                psi_growth_probe, theta_liminf_scan, defect_growth_check,
                                stolz_scan, trend, zero_scale)

LIN = hb.builtin_fixture("linear")
PW = hb.builtin_fixture("pw")

EXPECTED = {"linear": "R17-regime", "pw": "R7-regime", "poly3": "R17-regime",
            "mixed": "R7-regime", "case1": "R17-regime", "case2": "R17-regime"}


def test_trend_rules():
    t = np.geomspace(1, 1e6, 200)
    assert trend(t, 2 * t / (t + 1)) == "bounded"
    assert trend(t, t) == "divergent"
    assert trend(t, np.sqrt(np.sqrt(t))) == "unstable"


def test_mean_type_examples():
    mt = mean_type(PW)
    assert mt.closed_form == -2.0
    assert mt.numeric == pytest.approx(-2.0, abs=1e-3)
    lin = mean_type(LIN)
    assert lin.closed_form == 0.0 and abs(lin.numeric) < 1e-3


def test_mean_type_single_height_slope():
    # plain finite difference at y = 40 as an oracle for the fit
    y = 40.0
    f = lambda t: PW.log_theta(np.array([1j * t])).real[0]
    fd = (f(y + 1e-3) - f(y - 1e-3)) / 2e-3
    assert fd == pytest.approx(mean_type(PW).numeric, abs=1e-3)


def test_defect_growth_examples():
    r = defect_growth_check(LIN)
    assert r.bounded and r.model_bounded
    assert r.sup_estimate == pytest.approx(2.0, abs=1e-6)
    assert not defect_growth_check(PW).bounded


def test_defect_growth_poly3_height_sum():
    E = hb.builtin_fixture("poly3")
    assert np.sum(E.theta_zeros.imag) == pytest.approx(3.0)
    r = defect_growth_check(E)
    assert r.bounded and r.agrees
    assert r.sup_estimate == pytest.approx(6.0, rel=1e-6)


@pytest.mark.parametrize("name", ["linear", "poly3", "case1", "case2"])
def test_defect_growth_matches_model_criterion(name):
    r = defect_growth_check(hb.builtin_fixture(name))
    assert r.agrees


def test_stolz_examples():
    s = stolz_scan(LIN)
    assert s.trend == "bounded"
    assert s.sup == pytest.approx(2.0, abs=1e-6)
    assert stolz_scan(PW).trend == "divergent"
    again = stolz_scan(LIN, phi=s.phi)
    assert again.trend == s.trend and again.sup == s.sup
    with pytest.raises(ValueError):
        stolz_scan(LIN, alpha=2.0)


def test_liminf_examples():
    pw = theta_liminf_scan(PW, delta=1.0)
    assert pw.liminf_estimate < 1e-8
    # |Theta| = exp(-2 Im z) is smallest at the top of each annulus
    w = pw.witnesses[np.isfinite(pw.witnesses)]
    assert np.allclose(w.real, 0.0, atol=1e-6 * np.abs(w))
    lin = theta_liminf_scan(LIN, delta=2.0)
    # the annulus minimum sits at i r with |Theta(ir)| = (r - 1)/(r + 1)
    lo = lin.radii[lin.radii >= lin.radii[-1] / 1e3][0]
    assert lin.liminf_estimate == pytest.approx((lo - 1) / (lo + 1), rel=1e-12)
    assert lin.liminf_estimate > 1 - 1e-4
    assert np.all(np.diff(lin.minima) > 0)


def test_liminf_hits_zero_at_zeros():
    E = hb.StructureFunction(0.0, [-3j, -10j], 1.0, "two")
    sc = theta_liminf_scan(E, delta=1.0, r_max=1e3)
    assert np.sum(sc.minima == 0.0) == 2


def test_zero_scale():
    assert zero_scale(PW) == 1.0
    assert zero_scale(hb.builtin_fixture("poly3")) == pytest.approx(np.sqrt(2))


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_verdicts(name):
    rep = classify(hb.builtin_fixture(name), run_probes=False)
    assert rep.verdict == EXPECTED[name]


def test_classify_linear_probe():
    rep = classify(LIN, n_spans=5)
    assert rep.probe["bounded"]
    assert rep.probe["maxRatio"][0] <= rep.probe["constant"]


def test_classify_pw_embedding_and_report():
    rep = classify(PW)
    assert rep.embedding["ok"]
    assert rep.probe["grows"] and rep.probe["aboveFloor"]
    d = json.loads(rep.to_json())
    assert d["verdict"] == "R7-regime"
    assert d["meanTypeTheta"]["closedForm"] == -2.0
    lines = rep.scan_csv().splitlines()
    assert lines[0].startswith("re,im") and len(lines) > 10


def test_indeterminate_gap():
    # one zero far above any fixed window: the scans start past zero_scale, so
    # the bounded verdict is expected, but a gap verdict is also coherent
    E = hb.StructureFunction(0.0, [-1j * 1e9], 1.0, "far")
    rep = classify(E, run_probes=False)
    assert rep.verdict in ("R17-regime", "indeterminate-gap")


def test_norm_probe_sizes():
    p = norm_equivalence_probe(hb.builtin_fixture("poly3"), sizes=(4, 8, 16), n_spans=4)
    assert p["bounded"] and len(p["maxRatio"]) == 3


def test_psi_growth_pw():
    p = psi_growth_probe(PW)
    assert p["grows"] and p["aboveFloor"]
    assert p["ratios"][-1] > 1e6 * p["ratios"][0]

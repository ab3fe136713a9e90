import json

import numpy as np
import pytest

from dbspace import hb
from dbspace.hb import HBViolation, StructureFunction

from oracle import s_mp

LIN = hb.builtin_fixture("linear")
PW = hb.builtin_fixture("pw")


def test_evaluation_examples():
    assert PW(np.array([1j]))[0] == pytest.approx(np.e, rel=1e-15)
    assert LIN.sharp(np.array([2.0 + 0j]))[0] == pytest.approx(2 - 1j)


def test_involution(fixture_E, rng):
    z = rng.normal(size=20) * 3 + 1j * rng.normal(size=20) * 3
    lhs = fixture_E(z)
    rhs = np.conj(fixture_E.sharp(np.conj(z)))
    assert np.allclose(lhs, rhs, rtol=1e-13, atol=0)


def test_A_B_decomposition(fixture_E, rng):
    z = rng.normal(size=10) + 1j * rng.normal(size=10)
    E = fixture_E
    assert np.allclose(E.A(z) - 1j * E.B(z), E(z), rtol=1e-12)


@pytest.mark.parametrize("data", [
    {"expCoeff": -1.0, "zeros": []},
    {"expCoeff": 0.0, "zeros": [[0.0, 1.0]]},
    {"expCoeff": 0.0, "zeros": [[2.0, 0.0]]},
    {"expCoeff": 0.0, "zeros": []},
    {"expCoeff": 1.0, "zeros": [], "scale": [0.0, 0.0]},
])
def test_not_hermite_biehler(data):
    with pytest.raises(HBViolation):
        StructureFunction.from_dict(data)


def test_malformed_fixture():
    with pytest.raises(ValueError):
        StructureFunction.from_dict({"zeros": []})


def test_fixture_round_trip(fixture_E, tmp_path):
    p = tmp_path / "f.json"
    p.write_text(json.dumps(fixture_E.to_dict()))
    E2 = hb.load_fixture(p)
    assert E2.exp_coeff == fixture_E.exp_coeff
    assert np.array_equal(E2.zeros, fixture_E.zeros)
    assert E2.scale == fixture_E.scale


def test_hb_inequality(fixture_E, rng):
    z = rng.normal(size=50) * 4 + 1j * rng.uniform(0.01, 5, 50)
    assert fixture_E.hb_check(z) < 0


def test_theta_examples(each_backend):
    assert abs(LIN.theta(np.array([1j]))[0]) == 0.0
    assert PW.theta(np.array([1j]))[0] == pytest.approx(np.exp(-2), rel=1e-14)
    x = np.array([0.0, 1.0, 10.0]) + 0j
    assert np.allclose(np.abs(PW.theta(x)), 1.0, rtol=0, atol=1e-15)


def test_theta_inner(fixture_E, rng, each_backend):
    x = rng.normal(size=30) * 10 + 0j
    assert np.allclose(np.abs(fixture_E.theta(x)), 1.0, atol=1e-12)
    z = rng.normal(size=30) * 3 + 1j * rng.uniform(0.01, 3, 30)
    assert np.all(np.abs(fixture_E.theta(z)) < 1.0)


def test_theta_zeros_are_conjugate_zeros(fixture_E):
    zs = fixture_E.theta_zeros
    if zs.size:
        assert np.max(np.abs(fixture_E.theta(zs))) == 0.0


def test_eval_theta_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        hb.eval_theta(LIN, [1.0 - 0.5j])


def test_theta_phase_of_scale():
    E = StructureFunction(0.0, [-1j], 2j)
    z = np.array([0.3 + 2j])
    direct = E.sharp(z) / E(z)
    assert np.allclose(E.theta(z), direct, rtol=1e-14)


# -- kernels ------------------------------------------------------------------

def test_linear_kernel_constant(rng):
    for _ in range(10):
        w, z = rng.normal(size=2) + 1j * rng.normal(size=2)
        assert hb.kernel(LIN, w, z).value == pytest.approx(1 / np.pi, rel=1e-13)


def test_pw_kernel_sinc(rng):
    assert hb.kernel(PW, 0, 0).value == pytest.approx(1 / np.pi, rel=1e-14)
    for _ in range(10):
        w, z = rng.normal(size=2) + 1j * rng.normal(size=2)
        u = z - np.conj(w)
        assert hb.kernel(PW, w, z).value == pytest.approx(np.sin(u) / (np.pi * u), rel=1e-12)


def test_kernel_hermitian_and_conjugation(fixture_E, rng):
    for _ in range(20):
        w, z = rng.normal(size=2) * 2 + 1j * rng.normal(size=2) * 2
        k = hb.kernel(fixture_E, w, z).value
        assert abs(k - np.conj(hb.kernel(fixture_E, z, w).value)) <= 1e-12 * (1 + abs(k))
        c1 = np.conj(hb.kernel(fixture_E, w, np.conj(z)).value)
        c2 = hb.kernel(fixture_E, np.conj(w), z).value
        assert abs(c1 - c2) <= 1e-12 * (1 + abs(c1))


@pytest.mark.parametrize("dist", [1e-2, 1e-4, 2e-6, 5e-7, 1e-9])
def test_kernel_near_diagonal(fixture_E, dist):
    # the two-term formula cancels like eps |E(z) E(w)| / |w* - z|; the
    # ratio route does not, so it serves as the reference
    E = fixture_E
    w = 0.4 + 1.3j
    z = np.conj(w) + dist
    kv = hb.kernel(E, w, z)
    ref = complex(E(np.array([z]))[0]) * kv.ratio_to_E
    pair = (abs(E(np.array([z]))[0] * E(np.array([w]))[0])
            + abs(E(np.array([np.conj(w)]))[0] * E.sharp(np.array([z]))[0]))
    bound = 50 * np.finfo(float).eps * (1 + pair / (2 * np.pi * dist * abs(ref)))
    assert abs(kv.value - ref) <= bound * abs(ref)


def test_kernel_diagonal_matches_closed_form(fixture_E):
    w = np.array([0.3 + 0.7j, -1 + 2j, 2.5 + 0.1j])
    K = np.array([hb.kernel(fixture_E, x, x).value for x in w])
    closed = (np.abs(fixture_E(w)) ** 2 - np.abs(fixture_E(np.conj(w))) ** 2) / (4 * np.pi * w.imag)
    assert np.allclose(K, closed, rtol=1e-10)


def _oracle_points(E, rng):
    w = rng.uniform(-3, 3, 5) + 1j * rng.uniform(0.05, 3, 5)
    w = np.concatenate([w, np.conj(w[:3])])
    z = list(rng.uniform(-4, 4, 6) + 1j * rng.uniform(-2, 4, 6))
    z += [np.conj(w[0]) + 1e-9, np.conj(w[0]) + 1e-5j, w[6] + 1e-7, 30j, 300j, 5 + 1e3j]
    return w, np.array(z)


def test_reduced_kernel_against_mpmath(fixture_E, each_backend):
    w, z = _oracle_points(fixture_E, np.random.default_rng(1))
    S = fixture_E.s(w, z)
    for i, zi in enumerate(z):
        for j, wj in enumerate(w):
            ref = s_mp(fixture_E, wj, zi)
            assert abs(S[i, j] - ref) <= 1e-12 * abs(ref), (wj, zi)


def test_reduced_kernel_special_points(each_backend):
    E = hb.builtin_fixture("mixed")
    zs = E.theta_zeros
    w = np.array([0.5 + 1j, np.conj(zs[0]), 0.2 - 0.8j])
    z = np.array([zs[0], zs[1], 0.5 - 1j, 1.0 + 2j])
    S = E.s(w, z)
    for i, zi in enumerate(z):
        for j, wj in enumerate(w):
            if np.conj(wj) == zi:
                continue
            ref = s_mp(E, wj, zi)
            assert abs(S[i, j] - ref) <= 1e-12 * max(abs(ref), 1e-300), (wj, zi)


def test_backends_agree(fixture_E, rng):
    from dbspace import backend
    if "compiled" not in backend.available():
        pytest.skip("compiled kernels not built")
    w = rng.uniform(-3, 3, 12) + 1j * rng.uniform(-3, 3, 12)
    z = rng.uniform(-5, 5, 200) + 1j * rng.uniform(-2, 8, 200)
    prev = backend.use("python")
    try:
        a = fixture_E.s(w, z)
        lt = fixture_E.log_theta(z)
        backend.use("compiled")
        b = fixture_E.s(w, z)
        lt2 = fixture_E.log_theta(z)
    finally:
        backend.use(prev)
    assert np.allclose(a, b, rtol=1e-11, atol=0)
    assert np.allclose(np.exp(lt), np.exp(lt2), rtol=1e-13, atol=0)


# -- diagonal quantities ------------------------------------------------------

def test_nabla_examples():
    z = np.array([1j, 2 + 3j, -1 + 0.1j])
    assert np.allclose(hb.nabla(LIN, z), 1 / np.sqrt(np.pi), rtol=1e-13)
    assert hb.nabla(PW, np.array([1j]))[0] == pytest.approx(np.sqrt(np.sinh(2) / (2 * np.pi)), rel=1e-13)
    # sinh(2)/(2 pi) = 0.5772328..., so nabla(i) = 0.7597584...
    assert hb.nabla(PW, np.array([1j]))[0] == pytest.approx(0.7597584, abs=1e-7)


def test_nabla_nonnegative(fixture_E, rng):
    z = rng.normal(size=40) + 1j * rng.uniform(1e-3, 10, 40)
    assert np.all(hb.nabla(fixture_E, z) >= 0)


def test_m_E_examples():
    y = np.array([0.0, 1.0, 5.0, 100.0])
    assert np.allclose(hb.m_E(LIN, 1j * y), 1.0, rtol=1e-15)
    assert hb.m_E(PW, np.array([1j]))[0] == pytest.approx(np.e / 2, rel=1e-14)
    x = np.array([-3.0, 0.0, 2.0]) + 0j
    assert np.allclose(hb.m_E(PW, x), 1 / np.abs(x + 1j), rtol=1e-14)
    with pytest.raises(ValueError):
        hb.m_E(LIN, np.array([-1j]))


def test_identity_examples():
    chk = hb.ratio_identity(PW, np.array([1j]))
    assert chk.rel_error[0] <= 1e-10
    rhs = 2 * np.sqrt(1 - np.exp(-4)) / (2 * np.sqrt(np.pi))
    assert chk.rhs[0] == pytest.approx(rhs, rel=1e-13)
    lin = hb.ratio_identity(LIN, np.array([1j]))
    assert lin.lhs[0] == pytest.approx(1 / np.sqrt(np.pi), rel=1e-13)
    assert lin.rhs[0] == pytest.approx(1 / np.sqrt(np.pi), rel=1e-13)


def test_identity_random(fixture_E, rng, each_backend):
    z = rng.uniform(-5, 5, 200) + 1j * rng.uniform(0.1, 5, 200)
    assert np.max(hb.ratio_identity(fixture_E, z).rel_error) <= 1e-10


def test_identity_log_grid(fixture_E, each_backend):
    y = np.geomspace(1e-2, 50, 200)
    z = 0.3 * y * np.cos(np.arange(200)) + 1j * y
    assert np.max(hb.ratio_identity(fixture_E, z).rel_error) <= 1e-10


def test_identity_near_axis(fixture_E, rng):
    # the direct side subtracts |E(conj z)|^2 from |E(z)|^2, losing
    # a factor 1/(1 - |Theta|^2) in relative accuracy
    z = rng.uniform(-5, 5, 200) + 1j * rng.uniform(1e-3, 0.1, 200)
    chk = hb.ratio_identity(fixture_E, z)
    cond = 1.0 / fixture_E.one_minus_abs_theta(z)
    assert np.all(chk.rel_error <= 1e-13 * cond + 1e-12)

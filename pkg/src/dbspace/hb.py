"""Hermite-Biehler structure functions of finite order and their kernels.

A structure function here is

    E(z) = kappa * exp(-i a z) * prod_k (z - z_k),   a >= 0,  Im z_k < 0,

which is Hermite-Biehler: ``|E(conj z)| < |E(z)|`` for ``Im z > 0``. All
quantities that can overflow (``E`` itself, the kernel, the diagonal) are
offered in log or ratio form as well.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import backend

__all__ = ["HBViolation", "StructureFunction", "KernelValue", "kernel",
           "nabla", "log_nabla", "diag_factor", "m_E", "log_m_E",
           "ratio_identity", "node_gauges", "eval_theta", "load_fixture", "builtin_fixture",
           "FIXTURE_NAMES", "EPS_SWITCH"]

EPS_SWITCH = 1e-6
FIXTURE_NAMES = ("linear", "pw", "poly3", "mixed", "case1", "case2")
_DATA = Path(__file__).with_name("data")


class HBViolation(ValueError):
    """Raised when data do not define a Hermite-Biehler function."""


@dataclass(frozen=True, eq=False)
class StructureFunction:
    """Finite-order structure function ``kappa exp(-iaz) prod(z - z_k)``.

    Parameters
    ----------
    exp_coeff : float
        Exponential type ``a >= 0``.
    zeros : array_like of complex
        Zeros of ``E``, all strictly in the lower half-plane.
    scale : complex
        Nonzero constant ``kappa``.
    name : str, optional
        Fixture label carried through serialisation.
    """

    exp_coeff: float
    zeros: np.ndarray
    scale: complex = 1.0
    name: str = "custom"
    _log_scale: float = field(init=False, repr=False)
    _arg_scale: float = field(init=False, repr=False)
    _phase0: float = field(init=False, repr=False)

    def __post_init__(self):
        a = float(self.exp_coeff)
        zs = np.ascontiguousarray(np.asarray(self.zeros, dtype=complex).ravel())
        kappa = complex(self.scale)
        if not np.isfinite(a) or a < 0:
            raise HBViolation("exponential coefficient must be finite and >= 0")
        if kappa == 0 or not np.isfinite(kappa):
            raise HBViolation("scale must be a finite nonzero number")
        if zs.size and not np.all(zs.imag < 0):
            raise HBViolation("zeros must lie strictly in the lower half-plane")
        if not np.all(np.isfinite(zs)):
            raise HBViolation("zeros must be finite")
        if a == 0 and zs.size == 0:
            raise HBViolation("a constant function is not Hermite-Biehler")
        zs.setflags(write=False)
        object.__setattr__(self, "exp_coeff", a)
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "scale", kappa)
        object.__setattr__(self, "_log_scale", float(np.log(abs(kappa))))
        object.__setattr__(self, "_arg_scale", float(np.angle(kappa)))
        # Theta = E#/E carries the constant phase conj(kappa)/kappa
        object.__setattr__(self, "_phase0", float(-2.0 * np.angle(kappa)))

    # -- serialisation ---------------------------------------------------
    @classmethod
    def from_dict(cls, data):
        try:
            a = data["expCoeff"]
            zeros = [complex(re, im) for re, im in data.get("zeros", [])]
            sc = data.get("scale", [1.0, 0.0])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed structure function data: {exc}") from exc
        if isinstance(sc, (list, tuple)):
            sc = complex(sc[0], sc[1])
        return cls(a, zeros, sc, data.get("name", "custom"))

    def to_dict(self):
        return {"name": self.name, "expCoeff": self.exp_coeff,
                "zeros": [[z.real, z.imag] for z in self.zeros],
                "scale": [self.scale.real, self.scale.imag]}

    @property
    def order(self):
        """Number of zeros (the polynomial degree)."""
        return int(self.zeros.size)

    @property
    def theta_zeros(self):
        """Zeros of ``Theta = E#/E`` in the upper half-plane."""
        return np.conj(self.zeros)

    # -- evaluation -------------------------------------------------------
    def log_abs(self, z):
        """``log|E(z)|``."""
        return backend.log_abs_e(z, self.exp_coeff, self.zeros, self._log_scale)

    def arg(self, z):
        """``arg E(z)`` reduced to ``(-pi, pi]``."""
        return backend.arg_e(z, self.exp_coeff, self.zeros, self._arg_scale)

    def phase(self, z):
        """Unimodular ``E(z)/|E(z)|``."""
        return np.exp(1j * self.arg(z))

    def __call__(self, z):
        """Direct evaluation of ``E(z)``; may overflow for large ``Im z``."""
        z = np.asarray(z, dtype=complex)
        out = self.scale * np.exp(-1j * self.exp_coeff * z) * np.ones(z.shape)
        for zk in self.zeros:
            out = out * (z - zk)
        return out

    def sharp(self, z):
        """``E#(z) = conj(E(conj z))`` by direct evaluation."""
        z = np.asarray(z, dtype=complex)
        return np.conj(self(np.conj(z)))

    def A(self, z):
        """``A = (E + E#) / 2``, real on the real axis."""
        return 0.5 * (self(z) + self.sharp(z))

    def B(self, z):
        """``B = i (E - E#) / 2``, real on the real axis."""
        return 0.5j * (self(z) - self.sharp(z))

    def log_theta(self, z):
        """``log Theta(z)`` with imaginary part in ``(-pi, pi]``."""
        return backend.log_theta(z, self.exp_coeff, self.zeros, self._phase0)

    def theta(self, z):
        """``Theta(z) = E#(z)/E(z)``."""
        # exp(-inf + i phi) = 0 at zeros; numpy flags it as invalid
        with np.errstate(invalid="ignore"):
            return np.exp(self.log_theta(z))

    def one_minus_abs_theta(self, z):
        """``1 - |Theta(z)|`` without cancellation."""
        return -np.expm1(self.log_theta(z).real)

    def s(self, w, z):
        """Reduced kernel factor, shape ``(len(z), len(w))``."""
        return backend.s_matrix(w, z, self.exp_coeff, self.zeros, self._phase0)

    def hb_check(self, points):
        """Verify ``|E(conj z)| < |E(z)|`` directly at the given points.

        Returns the largest ``log|E(conj z)| - log|E(z)|`` over points with
        ``Im z > 0``; raises :class:`HBViolation` when it is not negative.
        """
        pts = np.asarray(points, dtype=complex).ravel()
        pts = pts[pts.imag > 0]
        if pts.size == 0:
            return -np.inf
        gap = np.max(self.log_abs(np.conj(pts)) - self.log_abs(pts))
        if not gap < 0:
            raise HBViolation(f"Hermite-Biehler inequality fails (gap {gap})")
        return float(gap)


def load_fixture(path):
    """Load a structure function from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    E = StructureFunction.from_dict(data)
    if E.name == "custom":
        object.__setattr__(E, "name", Path(path).stem)
    return E


def builtin_fixture(name):
    """Return one of the shipped fixtures by name."""
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {FIXTURE_NAMES}")
    return load_fixture(_DATA / f"{name}.json")


# -- diagonal and gauges ---------------------------------------------------

def diag_factor(E, w):
    """``q(w) = K(w, w) / |E(w)|^2``, positive, symmetric under conjugation.

    Off the axis ``q = (1 - |Theta|^2) / (4 pi |Im w|)``; on the real axis the
    limit ``(a + sum |Im z_k| / |x - z_k|^2) / pi`` is used.
    """
    w = np.asarray(w, dtype=complex)
    wu = np.where(w.imag < 0, np.conj(w), w)
    y = wu.imag
    real = y == 0
    lt = E.log_theta(np.where(real, wu + 1j, wu)).real
    with np.errstate(divide="ignore", invalid="ignore"):
        q = -np.expm1(2.0 * lt) / (4.0 * np.pi * y)
    if np.any(real):
        x = wu.real[real]
        acc = np.full(x.shape, E.exp_coeff)
        for zk in E.zeros:
            acc = acc + (-zk.imag) / np.abs(x - zk) ** 2
        q = np.array(q, dtype=float)
        q[real] = acc / np.pi
    if np.any(q < 0):
        raise HBViolation("negative kernel diagonal")
    return q


def _upper(w):
    w = np.asarray(w, dtype=complex)
    return np.where(w.imag < 0, np.conj(w), w)


def log_nabla(E, z):
    """``log nabla_H(z) = 0.5 log K(z, z)``; symmetric under conjugation."""
    zu = _upper(z)
    return E.log_abs(zu) + 0.5 * np.log(diag_factor(E, zu))


def nabla(E, z):
    """``nabla_H(z) = ||K(z, .)||``."""
    return np.exp(log_nabla(E, z))


def node_gauges(E, w):
    """Gauge factors of unit-norm kernels at nodes ``w``.

    Returns ``(omega, eta)`` with

    * ``Ktilde_w(z) / E(z) = omega(w) * s(w, z)`` for ``Ktilde_w = K_w / nabla(w)``,
    * ``E(u) / nabla(u) = eta(u)``,

    so that ``(Ktilde_v, Ktilde_u) = eta(u) * omega(v) * s(v, u)``.
    """
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    lower = w.imag < 0
    wu = np.where(lower, np.conj(w), w)
    rq = np.sqrt(diag_factor(E, wu))
    ph = E.phase(wu)
    omega = np.where(lower, ph, np.conj(ph)) / (2j * np.pi * rq)
    lt = E.log_theta(wu)
    th_bar = np.exp(np.conj(lt))
    eta = np.where(lower, th_bar * np.conj(ph), ph) / rq
    return omega, eta


@dataclass(frozen=True)
class KernelValue:
    """Reproducing kernel ``K(w, z)`` in absolute and ``E(z)``-relative form."""

    w: complex
    z: complex
    value: complex
    ratio_to_E: complex


def _kernel_pre(E, w):
    # K(w, z) / E(z) = pre(w) * s(w, z) / (2 pi i)
    w = complex(w)
    if w.imag < 0:
        return complex(E(np.conj(w)))
    return complex(np.conj(E(w)))


def kernel(E, w, z, eps_switch=EPS_SWITCH):
    """Evaluate ``K(w, z)`` both directly and relative to ``E(z)``.

    The closed two-term formula is used while ``|conj(w) - z|`` exceeds
    ``eps_switch * (1 + |w|)``; closer to the diagonal the value is rebuilt
    from the cancellation-free ratio form.
    """
    w = complex(w)
    z = complex(z)
    s = complex(E.s(np.array([w]), np.array([z]))[0, 0])
    ratio = _kernel_pre(E, w) * s / (2j * np.pi)
    d = np.conj(w) - z
    if abs(d) >= eps_switch * (1.0 + abs(w)):
        ew = complex(E(w))
        ewb = complex(E(np.conj(w)))
        ez = complex(E(z))
        esz = complex(E.sharp(z))
        value = (ez * np.conj(ew) - ewb * esz) / (2j * np.pi * d)
    else:
        value = complex(E(z)) * ratio
    return KernelValue(w, z, value, ratio)


def eval_theta(E, z):
    """``Theta(z)`` on the closed upper half-plane.

    Raises
    ------
    ValueError
        If some ``Im z < 0``, where poles of ``Theta`` may sit.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag < 0):
        raise ValueError("Theta is evaluated on Im z >= 0 only")
    return E.theta(z)


def m_E(E, z):
    """Majorant ``m_E(z) = |E(z)| / |z + i|``."""
    return np.exp(log_m_E(E, z))


def log_m_E(E, z):
    z = np.asarray(z, dtype=complex)
    if np.any(z == -1j):
        raise ValueError("m_E is undefined at z = -i")
    return E.log_abs(z) - np.log(np.abs(z + 1j))


@dataclass(frozen=True)
class IdentityCheck:
    """Both sides of ``nabla/m_E = |z+i| sqrt(1-|Theta|^2) / (2 sqrt(pi y))``."""

    z: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def rel_error(self):
        return np.abs(self.lhs - self.rhs) / np.abs(self.rhs)


def ratio_identity(E, z):
    """Check the diagonal identity at upper half-plane points.

    The left side uses the closed form ``(|E(z)|^2 - |E(conj z)|^2)/(4 pi y)``
    with direct evaluations of ``E``; the right side uses the stable ``Theta``
    route. Agreement is an independent consistency check of both paths.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z.imag <= 0):
        raise ValueError("identity is stated for Im z > 0")
    y = z.imag
    la, lb = E.log_abs(z), E.log_abs(np.conj(z))
    # (|E|^2 - |E#|^2) with common factor |E|^2 pulled out exactly
    raw = -np.expm1(2.0 * (lb - la)) / (4.0 * np.pi * y)
    lhs = np.sqrt(raw) * np.abs(z + 1j)
    one_m = -np.expm1(2.0 * E.log_theta(z).real)
    rhs = np.abs(z + 1j) * np.sqrt(one_m) / (2.0 * np.sqrt(np.pi * y))
    return IdentityCheck(z, lhs, rhs)

"""Finite kernel spans in a de Branges space, their Gram algebra and a
quadrature oracle for the boundary integral norm.

Elements are stored in the unit-norm kernel basis
``F = sum_j b_j Ktilde(w_j, .)`` with ``Ktilde_w = K_w / nabla(w)``. This keeps
coefficients of modest size even when ``|E(w)|`` is astronomically large; the
plain kernel coefficients ``c_j = b_j / nabla(w_j)`` are available on demand.
"""

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .hb import (StructureFunction, builtin_fixture, load_fixture,
                 log_nabla, node_gauges)

__all__ = ["KernelSpan", "GramMatrix", "gram_matrix", "inner_product",
           "norm_h", "sharp_of", "quadrature_norm", "QuadratureResult",
           "random_span"]


def _merge(nodes, coeffs):
    order = {}
    for w, b in zip(nodes, coeffs):
        key = complex(w)
        order[key] = order.get(key, 0j) + complex(b)
    return (np.array(list(order.keys()), dtype=complex),
            np.array(list(order.values()), dtype=complex))


class KernelSpan:
    """``F = sum_j b_j Ktilde(w_j, .)`` over a structure function ``E``.

    Parameters
    ----------
    E : StructureFunction
        Parent structure function.
    nodes : array_like of complex
        Kernel nodes; repeated nodes are merged by summing coefficients.
    coeffs : array_like of complex
        Coefficients in the unit-norm kernel basis.
    """

    def __init__(self, E, nodes, coeffs):
        nodes = np.atleast_1d(np.asarray(nodes, dtype=complex)).ravel()
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex)).ravel()
        if nodes.shape != coeffs.shape:
            raise ValueError("nodes and coeffs must have equal length")
        if not np.all(np.isfinite(nodes)) or not np.all(np.isfinite(coeffs)):
            raise ValueError("nodes and coeffs must be finite")
        self.E = E
        self.nodes, self.coeffs = _merge(nodes, coeffs)
        self._gauge = None

    @classmethod
    def from_kernel_coeffs(cls, E, nodes, c):
        """Build from coefficients of the plain kernels ``K(w_j, .)``."""
        nodes = np.atleast_1d(np.asarray(nodes, dtype=complex))
        c = np.atleast_1d(np.asarray(c, dtype=complex))
        return cls(E, nodes, c * np.exp(log_nabla(E, nodes)))

    @classmethod
    def zero(cls, E):
        return cls(E, [], [])

    @property
    def kernel_coeffs(self):
        """Coefficients ``c_j`` with ``F = sum c_j K(w_j, .)``."""
        return self.coeffs * np.exp(-log_nabla(self.E, self.nodes))

    def __len__(self):
        return self.nodes.size

    def gauges(self):
        if self._gauge is None:
            self._gauge = node_gauges(self.E, self.nodes)
        return self._gauge

    # -- evaluation -------------------------------------------------------
    def ratio_to_E(self, z):
        """``F(z) / E(z)``, overflow-free."""
        z = np.asarray(z, dtype=complex)
        if self.nodes.size == 0:
            return np.zeros(z.shape, dtype=complex)
        omega, _ = self.gauges()
        s = self.E.s(self.nodes, z.ravel())
        return (s @ (omega * self.coeffs)).reshape(z.shape)

    def sharp_ratio_to_E(self, z):
        """``F#(z) / E(z)``, overflow-free."""
        return self.sharp().ratio_to_E(z)

    def log_abs(self, z):
        """``log|F(z)|``."""
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.ratio_to_E(z))) + self.E.log_abs(z)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self.ratio_to_E(z) * self.E(z)

    # -- algebra ------------------------------------------------------------
    def _check(self, other):
        if other.E is not self.E:
            raise ValueError("elements belong to different spaces")

    def __add__(self, other):
        self._check(other)
        return KernelSpan(self.E, np.concatenate([self.nodes, other.nodes]),
                          np.concatenate([self.coeffs, other.coeffs]))

    def __neg__(self):
        return KernelSpan(self.E, self.nodes, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, lam):
        return KernelSpan(self.E, self.nodes, complex(lam) * self.coeffs)

    __rmul__ = __mul__

    def sharp(self):
        """The reflected element ``F#(z) = conj(F(conj z))``."""
        return sharp_of(self)

    def norm(self):
        return norm_h(self)

    # -- serialisation ------------------------------------------------------
    def to_dict(self, basis="kernel"):
        if basis == "kernel":
            cf = self.kernel_coeffs
        elif basis == "normalized":
            cf = self.coeffs
        else:
            raise ValueError("basis must be 'kernel' or 'normalized'")
        return {"fixture": self.E.name,
                "nodes": [[w.real, w.imag] for w in self.nodes],
                "coeffs": [[c.real, c.imag] for c in cf],
                "basis": basis}

    @classmethod
    def from_dict(cls, data, E=None):
        """Inverse of :meth:`to_dict`; ``E`` defaults to the named fixture."""
        if E is None:
            fx = data["fixture"]
            E = builtin_fixture(fx) if not str(fx).endswith(".json") else load_fixture(fx)
        nodes = [complex(a, b) for a, b in data.get("nodes", [])]
        cf = [complex(a, b) for a, b in data.get("coeffs", [])]
        if data.get("basis", "kernel") == "normalized":
            return cls(E, nodes, cf)
        return cls.from_kernel_coeffs(E, nodes, cf)

    def to_json(self, basis="kernel"):
        return json.dumps(self.to_dict(basis), sort_keys=True)


def sharp_of(F):
    """Return ``F#``: nodes conjugated, coefficients conjugated.

    ``K(w, .)# = K(conj w, .)`` and ``nabla`` is conjugation symmetric, so the
    unit-norm kernel basis maps the same way.
    """
    return KernelSpan(F.E, np.conj(F.nodes), np.conj(F.coeffs))


@dataclass(frozen=True)
class GramMatrix:
    """Gram matrix ``G[j, k] = (K_k, K_j)`` of a node set."""

    nodes: np.ndarray
    entries: np.ndarray
    normalized: bool

    def eigenvalues(self):
        return np.linalg.eigvalsh(0.5 * (self.entries + self.entries.conj().T))

    def off_diag_sq(self):
        G = self.entries
        return float(np.sum(np.abs(G) ** 2) - np.sum(np.abs(np.diag(G)) ** 2))


def _cross(E, u, v):
    # C[j, k] = (Ktilde_{v_k}, Ktilde_{u_j}); rows with Im u < 0 use
    # Ktilde_v(u) = conj(Ktilde_{conj v}(conj u)), which avoids zeros of E
    u = np.atleast_1d(u)
    v = np.atleast_1d(v)
    out = np.empty((u.size, v.size), dtype=complex)
    low = u.imag < 0
    for rows, uu, vv, flip in ((~low, u, v, False), (low, np.conj(u), np.conj(v), True)):
        if not np.any(rows):
            continue
        omega_v, _ = node_gauges(E, vv)
        _, eta_u = node_gauges(E, uu[rows])
        blk = eta_u[:, None] * E.s(vv, uu[rows]) * omega_v[None, :]
        out[rows] = np.conj(blk) if flip else blk
    return out


def gram_matrix(E, nodes, normalized=True):
    """Gram matrix of kernels at ``nodes``.

    With ``normalized=True`` the unit-norm kernels are used (unit diagonal);
    otherwise entries are ``K(w_k, w_j)``, which may overflow.
    """
    nodes = np.atleast_1d(np.asarray(nodes, dtype=complex))
    G = _cross(E, nodes, nodes)
    if not normalized:
        ln = log_nabla(E, nodes)
        G = G * np.exp(ln[:, None] + ln[None, :])
    return GramMatrix(nodes, G, normalized)


def inner_product(F, G):
    """``(F, G)`` in ``H(E)``, linear in ``F``."""
    if F.E is not G.E:
        raise ValueError("elements belong to different spaces")
    if len(F) == 0 or len(G) == 0:
        return 0j
    C = _cross(F.E, G.nodes, F.nodes)
    return complex(np.conj(G.coeffs) @ C @ F.coeffs)


def norm_h(F, tol=1e-10):
    """Hilbert-space norm from the Gram quadratic form."""
    if len(F) == 0:
        return 0.0
    G = gram_matrix(F.E, F.nodes).entries
    q = float(np.real(np.conj(F.coeffs) @ G @ F.coeffs))
    scale = float(np.sum(np.abs(F.coeffs)) ** 2)
    if q < -tol * max(scale, 1e-300):
        raise ArithmeticError(f"negative Gram quadratic form {q}")
    return float(np.sqrt(max(q, 0.0)))


# -- quadrature oracle ------------------------------------------------------

@dataclass(frozen=True)
class QuadratureResult:
    """Boundary integral ``int |F/E|^2 dt`` with its error estimate."""

    norm_sq: float
    abserr: float
    converged: bool

    @property
    def norm(self):
        return float(np.sqrt(max(self.norm_sq, 0.0)))


def _pole_form(F):
    # F/E = P + Theta R on R, P and R sums of simple poles in the upper half-plane
    E = F.E
    omega, _ = F.gauges()
    beta = omega * F.coeffs
    c = np.conj(F.nodes)
    lower = F.nodes.imag < 0
    theta_w = np.zeros(c.shape, dtype=complex)
    up = ~lower
    if np.any(up):
        theta_w[up] = E.theta(F.nodes[up])
    p = np.where(lower, 0j, beta)
    r = np.where(lower, 0j, -beta * np.conj(theta_w))
    if np.any(lower):
        th_c = E.theta(c[lower])
        p[lower] = beta[lower] * th_c
        r[lower] = -beta[lower]
    return c, p, r


def quadrature_norm(F, epsabs=1e-10, limit=2000):
    """Independent oracle for ``||F||^2 = int_R |F(t)/E(t)|^2 dt``.

    A window ``[-L, L]`` around all nodes and zeros is integrated adaptively
    with breakpoints at their real parts. On the tails ``F/E = P + Theta R``
    with rational ``P, R``; the oscillating cross term ``Re(exp(2iat) h(t))``
    is handled by a Fourier-weighted rule, the rest by plain quadrature.

    Returns
    -------
    QuadratureResult
        ``converged`` is ``False`` when any sub-integral warned.
    """
    if len(F) == 0:
        return QuadratureResult(0.0, 0.0, True)
    E = F.E
    zr, zi = E.zeros.real, np.abs(E.zeros.imag)
    feats = np.concatenate([[0.0], F.nodes.real, zr, zr - zi, zr + zi])
    L = 2.0 * float(np.max(np.abs(feats))) + 10.0
    edges = np.unique(np.concatenate([[-L, L], feats]))

    def dens(t):
        return float(np.abs(F.ratio_to_E(np.array([t + 0j]))[0]) ** 2)

    total, err, ok = 0.0, 0.0, True
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)

        def run(*args, **kw):
            nonlocal ok
            try:
                return integrate.quad(*args, **kw)[:2]
            except integrate.IntegrationWarning:
                ok = False
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                out = integrate.quad(*args, **kw)[:2]
                warnings.simplefilter("error", integrate.IntegrationWarning)
                return out

        # inner window; long one-signed segments are integrated in log t
        tol = epsabs / len(edges)
        for lo, hi in zip(edges[:-1], edges[1:]):
            if lo >= 1.0 and hi > 4.0 * lo:
                v, e = run(lambda u: dens(np.exp(u)) * np.exp(u), np.log(lo),
                           np.log(hi), epsabs=tol, epsrel=1e-12, limit=limit)
            elif hi <= -1.0 and lo < 4.0 * hi:
                v, e = run(lambda u: dens(-np.exp(u)) * np.exp(u), np.log(-hi),
                           np.log(-lo), epsabs=tol, epsrel=1e-12, limit=limit)
            else:
                v, e = run(dens, lo, hi, epsabs=tol, epsrel=1e-12, limit=limit)
            total += v
            err += e
        a = E.exp_coeff
        if a == 0:
            for sgn in (1.0, -1.0):
                v, e = run(lambda t: dens(sgn * t), L, np.inf, epsabs=epsabs,
                           epsrel=1e-12, limit=limit)
                total += v
                err += e
        else:
            c, p, r = _pole_form(F)

            def PR(t):
                P = np.sum(p / (c - t))
                R = np.sum(r / (c - t))
                return P, R

            def smooth(t):
                P, R = PR(t)
                return abs(P) ** 2 + abs(R) ** 2

            def cross(t):
                # h(t) with |F/E|^2 = |P|^2 + |R|^2 + 2 Re(exp(2iat) h(t))
                P, R = PR(t)
                tb = E.theta(np.array([t + 0j]))[0] * np.exp(-2j * a * t)
                return tb * np.conj(P) * R

            for sgn in (1.0, -1.0):
                v, e = run(lambda t: smooth(sgn * t), L, np.inf, epsabs=epsabs,
                           epsrel=1e-12, limit=limit)
                total += v
                err += e
                # exp(2ia sgn t) h(sgn t) for t >= L
                vc, ec = run(lambda t: cross(sgn * t).real, L, np.inf,
                             weight="cos", wvar=2 * a, limlst=200)
                vs, es = run(lambda t: cross(sgn * t).imag, L, np.inf,
                             weight="sin", wvar=2 * a, limlst=200)
                # Re(e^{i s 2a t}(hr + i hi)) = hr cos - s hi sin
                total += 2.0 * (vc - sgn * vs)
                err += 2.0 * (ec + es)
    return QuadratureResult(float(total), float(err), ok)


def random_span(E, n, rng, box=3.0, lower=False):
    """Random span with ``n`` nodes in ``[-box, box] x (0, box]``.

    With ``lower=True`` a third of the nodes are reflected into the lower
    half-plane, exercising the reflected-node path.
    """
    x = rng.uniform(-box, box, n)
    y = rng.uniform(0.05, box, n)
    w = x + 1j * y
    if lower:
        flip = rng.random(n) < 1 / 3
        w = np.where(flip, np.conj(w), w)
    b = rng.normal(size=n) + 1j * rng.normal(size=n)
    return KernelSpan(E, w, b)

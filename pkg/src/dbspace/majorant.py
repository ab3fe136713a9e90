"""Majorants on domains, the induced Banach norm, the sharp majorant as a
second-order cone program, and the majorization preorder.

A majorant ``m`` on ``D`` defines ``||F||_m = max(||F||_H, sup_D max(|F|, |F#|)/m)``.
All ratios are formed relative to ``E`` so that ``|E|`` itself never has to be
represented.
"""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import hb
from .space import KernelSpan, gram_matrix, norm_h

__all__ = ["DomainSpec", "Majorant", "BallCertificate", "norm_m",
           "log_sup_ratio", "FlatResult", "mflat", "PreorderReport",
           "compare_preorder", "MinimalityReport", "minimal_check",
           "OPT_TOL", "RELATIONS"]

OPT_TOL = 1e-6
RELATIONS = ("less", "equivalent", "greater", "incomparable")
KINDS = ("imaginaryRay", "realLine", "customSampled")


@dataclass(frozen=True)
class DomainSpec:
    """Sampled domain ``D``.

    Parameters
    ----------
    kind : {"imaginaryRay", "realLine", "customSampled"}
    y0 : float
        Ray start ``i[y0, inf)``; for the real line the excluded radius,
        i.e. ``D = {|x| >= y0}`` (``0`` for all of ``R``).
    ymax : float
        End of the base sample grid; the tail policy extends past it.
    ratio : float
        Geometric grid ratio.
    points : tuple of complex
        Sample points for ``customSampled``.
    tail : {"extend", "none"}
        ``extend`` continues sup estimates by decades until stable.
    """

    kind: str = "imaginaryRay"
    y0: float = 1.0
    ymax: float = 1e6
    ratio: float = 1.25
    points: tuple = ()
    tail: str = "extend"
    tail_decades: int = 40

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.ratio <= 1 or self.ymax <= 0 or self.y0 < 0:
            raise ValueError("grid parameters must satisfy ratio > 1, ymax > 0, y0 >= 0")
        if self.kind == "imaginaryRay" and not (0 < self.y0 < self.ymax):
            raise ValueError("ray needs 0 < y0 < ymax")
        if self.kind == "customSampled":
            pts = tuple(complex(p) for p in self.points)
            if not pts or any(p.imag < 0 for p in pts):
                raise ValueError("custom samples must be nonempty and in the closed upper half-plane")
            object.__setattr__(self, "points", pts)
            object.__setattr__(self, "tail", "none")

    # parameter t <-> point
    def point(self, t):
        t = np.asarray(t, dtype=float)
        return 1j * t if self.kind == "imaginaryRay" else t + 0j

    def parameter(self, z):
        z = np.asarray(z, dtype=complex)
        return z.imag if self.kind == "imaginaryRay" else z.real

    def _geom(self, lo, hi):
        n = int(np.ceil(np.log(hi / lo) / np.log(self.ratio)))
        return np.geomspace(lo, hi, max(n, 1) + 1)

    def base_parameters(self):
        """Strictly increasing base grid in the ray / line parameter."""
        if self.kind == "imaginaryRay":
            return self._geom(self.y0, self.ymax)
        if self.kind == "realLine":
            lo = max(self.y0, 1.0)
            pos = self._geom(lo, self.ymax)
            t = [pos, -pos]
            if self.y0 < 1.0:
                t.append(np.linspace(-1.0, 1.0, 33))
                if self.y0 > 0:
                    core = t[-1]
                    t[-1] = core[np.abs(core) >= self.y0]
            return np.unique(np.concatenate(t))
        return None

    def samples(self):
        if self.kind == "customSampled":
            return np.array(self.points, dtype=complex)
        return self.point(self.base_parameters())

    def decade(self, j):
        """Parameters of the ``j``-th decade past ``ymax`` (``j >= 1``)."""
        lo, hi = self.ymax * 10.0 ** (j - 1), self.ymax * 10.0 ** j
        g = self._geom(lo, hi)[1:]
        return g if self.kind == "imaginaryRay" else np.concatenate([g, -g])

    def contains_param(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "imaginaryRay":
            return t >= self.y0
        return np.abs(t) >= self.y0

    def contains(self, other):
        """Set inclusion ``self ⊇ other``."""
        if self.kind == "customSampled":
            if other.kind != "customSampled":
                return False
            return set(other.points) <= set(self.points)
        if other.kind == "customSampled":
            pts = np.array(other.points)
            onset = np.abs(pts.real) < 1e-300 if self.kind == "imaginaryRay" else pts.imag == 0
            return bool(np.all(onset) and np.all(self.contains_param(self.parameter(pts))))
        if other.kind != self.kind:
            return False
        return self.y0 <= other.y0

    def to_dict(self):
        d = {"kind": self.kind, "y0": self.y0, "ymax": self.ymax,
             "ratio": self.ratio, "tail": self.tail}
        if self.kind == "customSampled":
            d["samples"] = [[p.real, p.imag] for p in self.points]
        return d

    @classmethod
    def from_dict(cls, d):
        kw = {k: d[k] for k in ("y0", "ymax", "ratio", "tail") if k in d}
        kind = d.get("kind", "imaginaryRay")
        if kind == "customSampled":
            kw["points"] = tuple(complex(a, b) for a, b in d.get("samples", []))
        return cls(kind, **kw)


_FORMS = ("mE", "mtilde", "nabla", "const", "power", "span", "table")


class Majorant:
    """Positive weight on a domain, optionally with a zero divisor.

    Parameters
    ----------
    domain : DomainSpec
    form : str
        One of ``mE`` (``|E|/|z+i|``), ``mtilde`` (``|E|/|z|``), ``nabla``
        (``sqrt K(z,z)``), ``const``, ``power``
        (``scale (1+|z|)^alpha exp(beta |z|^gamma)``), ``span``
        (``|F0|/||F0||`` for a witness ``F0``) and ``table``.
    E : StructureFunction, optional
        Required by the ``E``-relative forms and for any ratio with a span.
    params : dict, optional
        Form parameters: ``value`` (const); ``alpha``, ``beta``, ``gamma``,
        ``scale`` (power); ``points`` and ``values`` (table).
    divisor : sequence of (complex, int)
        Prescribed zeros; multiplies by ``prod (|z-p|/(1+|z-p|))^n``.
    witness : KernelSpan, optional
        The function ``F0`` of the ``span`` form.
    """

    def __init__(self, domain, form, E=None, params=None, divisor=(), witness=None):
        if form not in _FORMS:
            raise ValueError(f"unknown majorant form {form!r}")
        self.domain = domain
        self.form = form
        self.params = dict(params or {})
        self.divisor = tuple((complex(p), int(n)) for p, n in divisor)
        if any(n < 0 for _, n in self.divisor):
            raise ValueError("divisor orders must be nonnegative")
        self.witness = witness
        if witness is not None:
            E = witness.E if E is None else E
        self.E = E
        if form in ("mE", "mtilde", "nabla") and E is None:
            raise ValueError(f"form {form!r} needs a structure function")
        if form == "span":
            if witness is None:
                raise ValueError("span form needs a witness element")
            nrm = norm_h(witness)
            if nrm == 0:
                raise ValueError("zero witness")
            self._wnorm = nrm
        if form == "table":
            pts = np.asarray(self.params["points"], dtype=complex)
            if "log_values" in self.params:
                lv = np.asarray(self.params["log_values"], dtype=float)
            else:
                with np.errstate(divide="ignore"):
                    lv = np.log(np.asarray(self.params["values"], dtype=float))
            if pts.shape != lv.shape:
                raise ValueError("table points and values differ in length")
            self._tab = (pts, lv)

    # -- evaluation -------------------------------------------------------
    def _log_divisor(self, z):
        out = np.zeros(np.shape(z))
        for p, n in self.divisor:
            if n:
                r = np.abs(z - p)
                with np.errstate(divide="ignore"):
                    out = out + n * (np.log(r) - np.log1p(r))
        return out

    def _log_table(self, z):
        pts, lv = self._tab
        z = np.asarray(z, dtype=complex)
        if self.domain.kind == "customSampled":
            idx = np.argmin(np.abs(z.ravel()[:, None] - pts[None, :]), axis=1)
            return lv[idx].reshape(z.shape)
        tp = self.domain.parameter(pts)
        order = np.argsort(tp)
        tp, lv = tp[order], lv[order]
        t = self.domain.parameter(z)
        return np.interp(t, tp, lv)

    def _log_own(self, z):
        # log m(z) for forms that do not refer to E
        z = np.asarray(z, dtype=complex)
        if self.form == "const":
            return np.full(z.shape, np.log(self.params.get("value", 1.0)))
        if self.form == "power":
            p = self.params
            r = np.abs(z)
            return (np.log(p.get("scale", 1.0)) + p.get("alpha", 0.0) * np.log1p(r)
                    + p.get("beta", 0.0) * r ** p.get("gamma", 1.0))
        if self.form == "table":
            return self._log_table(z)
        return None

    def log_over_E(self, z):
        """``log(m(z)/|E(z)|)``, computed without forming ``|E|``."""
        z = np.asarray(z, dtype=complex)
        E = self.E
        if self.form == "mE":
            base = -np.log(np.abs(z + 1j))
        elif self.form == "mtilde":
            with np.errstate(divide="ignore"):
                base = -np.log(np.abs(z))
        elif self.form == "nabla":
            base = 0.5 * np.log(hb.diag_factor(E, z))
        elif self.form == "span":
            with np.errstate(divide="ignore"):
                base = (np.log(np.abs(self.witness.ratio_to_E(z)))
                        - np.log(self._wnorm))
        else:
            if E is None:
                raise ValueError("majorant has no structure function")
            base = self._log_own(z) - E.log_abs(z)
        return base + self._log_divisor(z)

    def log_eval(self, z):
        """``log m(z)``."""
        z = np.asarray(z, dtype=complex)
        own = self._log_own(z)
        if own is None:
            return self.log_over_E(z) + self.E.log_abs(z)
        return own + self._log_divisor(z)

    def __call__(self, z):
        return np.exp(self.log_eval(z))

    @property
    def relative(self):
        return self.form in ("mE", "mtilde", "nabla", "span")

    def scaled(self, c):
        """The majorant ``c * m``."""
        if self.form == "const":
            p = dict(self.params, value=self.params.get("value", 1.0) * c)
            return Majorant(self.domain, "const", self.E, p, self.divisor)
        if self.form == "power":
            p = dict(self.params, scale=self.params.get("scale", 1.0) * c)
            return Majorant(self.domain, "power", self.E, p, self.divisor)
        pts = self.domain.samples()
        return Majorant(self.domain, "table", self.E,
                        {"points": pts, "log_values": np.log(c) + self.log_eval(pts)},
                        self.divisor)

    # -- serialisation --------------------------------------------------------
    def to_dict(self):
        d = {"domain": self.domain.to_dict(),
             "divisor": [[[p.real, p.imag], n] for p, n in self.divisor]}
        if self.form == "table":
            pts, lv = self._tab
            d["form"] = {"logTable": [[p.real, p.imag, float(v)] for p, v in zip(pts, lv)]}
        elif self.form == "span":
            d["form"] = {"id": "span", "witness": self.witness.to_dict()}
        elif self.params:
            d["form"] = {"id": self.form, **self.params}
        else:
            d["form"] = self.form
        return d

    @classmethod
    def from_dict(cls, d, E=None):
        dom = DomainSpec.from_dict(d.get("domain", {}))
        div = [(complex(p[0], p[1]), n) for p, n in d.get("divisor", [])]
        form = d.get("form", "mE")
        if isinstance(form, str):
            return cls(dom, form, E, None, div)
        for key, name in (("table", "values"), ("logTable", "log_values")):
            if key in form:
                rows = np.asarray(form[key], dtype=float)
                return cls(dom, "table", E, {"points": rows[:, 0] + 1j * rows[:, 1],
                                             name: rows[:, 2]}, div)
        form = dict(form)
        fid = form.pop("id")
        if fid == "span":
            w = KernelSpan.from_dict(form["witness"], E)
            return cls(dom, "span", E, None, div, witness=w)
        return cls(dom, fid, E, form, div)


# -- Banach norm -------------------------------------------------------------

def _log_abs_pair(F, z):
    with np.errstate(divide="ignore"):
        a = np.log(np.abs(F.ratio_to_E(z)))
        b = np.log(np.abs(F.sharp().ratio_to_E(z)))
    return np.maximum(a, b)


def log_sup_ratio(F, m, z):
    """``log(max(|F|, |F#|)/m)`` at points ``z`` (``nan`` where ``0/0``)."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(invalid="ignore"):
        return _log_abs_pair(F, z) - m.log_over_E(z)


@dataclass(frozen=True)
class BallCertificate:
    """Outcome of a Banach-norm evaluation."""

    h_norm: float
    sup_ratio: float
    m_norm: float
    witness: complex = 0j
    tail_converged: bool = True
    divisor_ok: bool = True
    element: object = field(default=None, repr=False, compare=False)

    def member(self, tol=1e-9):
        """Membership in the unit ball ``B_m``."""
        return self.m_norm <= 1.0 + tol

    def to_dict(self):
        return {"hNorm": self.h_norm, "supRatio": self.sup_ratio,
                "mNorm": self.m_norm, "witness": [self.witness.real, self.witness.imag],
                "tailConverged": self.tail_converged, "divisorOk": self.divisor_ok}


def _divisor_ok(F, m):
    # |F(p + eps)| / eps^n must stay bounded as eps -> 0
    direction = 1j if m.domain.kind == "imaginaryRay" else 1.0
    eps = np.array([1e-3, 1e-4, 1e-5])
    for p, n in m.divisor:
        if n == 0:
            continue
        z = p + direction * eps
        with np.errstate(divide="ignore"):
            r = np.log(np.abs(F.ratio_to_E(z))) + F.E.log_abs(z) - n * np.log(eps)
            rs = np.log(np.abs(F.sharp().ratio_to_E(z))) + F.E.log_abs(z) - n * np.log(eps)
        for row in (r, rs):
            if np.isfinite(row[0]) and (row[-1] - row[0]) > np.log(10.0):
                return False
    return True


def _mid(a, b):
    same = (a * b > 0) & (np.minimum(np.abs(a), np.abs(b)) >= 1.0)
    with np.errstate(invalid="ignore"):
        g = np.sign(a) * np.sqrt(np.abs(a * b))
    return np.where(same, g, 0.5 * (a + b))


def _feature_params(F, m):
    dom = m.domain
    w = np.concatenate([F.nodes, np.conj(F.E.zeros)])
    if dom.kind == "imaginaryRay":
        t = np.abs(w)
    else:
        t = np.concatenate([w.real, w.real + np.abs(w.imag), w.real - np.abs(w.imag)])
    t = t[np.isfinite(t)]
    t = t[dom.contains_param(t) & (np.abs(t) <= dom.ymax)]
    return t


def _sup_on_params(F, m, t):
    z = m.domain.point(t)
    v = log_sup_ratio(F, m, z)
    v = np.where(np.isnan(v), -np.inf, v)
    return v


def norm_m(F, m, rtol=1e-6, max_levels=30):
    """Banach norm ``max(||F||_H, sup_D max(|F|, |F#|)/m)``.

    The base grid is refined around its largest values until the sup
    changes by less than ``rtol``, polished by a bounded scalar search, and
    extended by decades past ``ymax`` while the tail still grows.

    Returns
    -------
    BallCertificate
    """
    if m.E is not None and m.E is not F.E:
        raise ValueError("element and majorant live over different structure functions")
    h = norm_h(F)
    if len(F) == 0 or not np.any(F.coeffs != 0):
        return BallCertificate(h, 0.0, h, element=F)
    if not _divisor_ok(F, m):
        return BallCertificate(h, np.inf, np.inf, divisor_ok=False, element=F)
    dom = m.domain
    if dom.kind == "customSampled":
        v = log_sup_ratio(F, m, dom.samples())
        v = np.where(np.isnan(v), -np.inf, v)
        i = int(np.argmax(v))
        sup = float(np.exp(v[i]))
        return BallCertificate(h, sup, max(h, sup), dom.samples()[i], element=F)
    t = np.unique(np.concatenate([dom.base_parameters(), _feature_params(F, m)]))
    v = _sup_on_params(F, m, t)
    # one full doubling, then local refinement
    tm = _mid(t[:-1], t[1:])
    t = np.concatenate([t, tm])
    v = np.concatenate([v, _sup_on_params(F, m, tm)])
    order = np.argsort(t)
    t, v = t[order], v[order]
    best = np.max(v)
    for _ in range(max_levels):
        top = np.argsort(v)[-6:]
        nb = []
        for i in top:
            if i > 0:
                nb.append(_mid(t[i - 1], t[i]))
            if i < t.size - 1:
                nb.append(_mid(t[i], t[i + 1]))
        nb = np.setdiff1d(np.array(nb), t)
        if nb.size == 0:
            break
        t = np.concatenate([t, nb])
        v = np.concatenate([v, _sup_on_params(F, m, nb)])
        order = np.argsort(t)
        t, v = t[order], v[order]
        new = np.max(v)
        if np.isfinite(best) and abs(new - best) <= rtol:
            best = new
            break
        best = new
    # polish around the maximiser
    i = int(np.argmax(v))
    lo, hi = t[max(i - 1, 0)], t[min(i + 1, t.size - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda s: -_sup_on_params(F, m, np.array([s]))[0],
            bounds=(lo, hi), method="bounded", options={"xatol": 1e-10 * (1 + abs(t[i]))})
        if -res.fun > v[i]:
            t = np.append(t, res.x)
            v = np.append(v, -res.fun)
    i = int(np.argmax(v))
    best, arg = float(v[i]), float(t[i])
    tail_ok = True
    if dom.tail == "extend":
        prev = -np.inf
        tail_ok = False
        for j in range(1, dom.tail_decades + 1):
            td = dom.decade(j)
            vd = _sup_on_params(F, m, td)
            k = int(np.argmax(vd))
            dmax = float(vd[k])
            if dmax > best:
                best, arg = dmax, float(td[k])
            if j > 1 and dmax - prev <= rtol and dmax <= best + rtol:
                tail_ok = True
                break
            prev = dmax
        if not tail_ok:
            best = np.inf
    sup = float(np.exp(best))
    return BallCertificate(h, sup, max(h, sup), complex(dom.point(arg)),
                           tail_ok, True, F)


# -- sharp majorant ------------------------------------------------------------

@dataclass
class FlatResult:
    """Tabulated sharp majorant.

    Values are kept as logarithms because ``|E|`` may exceed the floating
    point range on the constraint grid; ``values`` exponentiates.
    """

    points: np.ndarray
    log_values: np.ndarray
    status: list
    grid_points: np.ndarray
    grid_log_values: np.ndarray
    nodes: np.ndarray
    rank: int
    log_subspace_nabla: np.ndarray
    domain: DomainSpec = None
    E: object = None

    @property
    def values(self):
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)

    @property
    def subspace_nabla(self):
        with np.errstate(over="ignore"):
            return np.exp(self.log_subspace_nabla)

    def as_majorant(self):
        """The tabulated values on the constraint grid as a majorant."""
        return Majorant(self.domain, "table", self.E,
                        {"points": self.grid_points, "log_values": self.grid_log_values})

    def to_csv(self):
        rows = ["re,im,value,status"]
        for z, v, s in zip(self.points, self.values, self.status):
            rows.append(f"{z.real:.17g},{z.imag:.17g},{v:.17g},{s}")
        return "\n".join(rows) + "\n"


def _ortho_basis(E, nodes, rel=1e-11):
    G = gram_matrix(E, nodes).entries
    G = 0.5 * (G + G.conj().T)
    lam, U = np.linalg.eigh(G)
    keep = lam > rel * lam[-1]
    return U[:, keep] / np.sqrt(lam[keep])


class _FlatProblem:
    def __init__(self, m, nodes, grid):
        import cvxpy as cp
        E = m.E
        self.E = E
        self.nodes = nodes
        self.T = _ortho_basis(E, nodes)
        omega = hb.node_gauges(E, nodes)[0]
        self.omega = omega
        r = self.T.shape[1]
        lw = m.log_over_E(grid)
        zero = ~np.isfinite(lw)
        S = E.s(nodes, grid) * omega[None, :] @ self.T
        nb = np.conj(nodes)
        om_b = hb.node_gauges(E, nb)[0]
        Ssh = np.conj(E.s(nb, grid) * om_b[None, :]) @ self.T
        w = np.exp(-np.where(zero, 0.0, lw))
        u = cp.Variable(r, complex=True)
        self.o = cp.Parameter(r, complex=True)
        cons = [cp.norm(u, 2) <= 1]
        pos = ~zero
        if np.any(pos):
            A = np.vstack([S[pos] * w[pos, None], Ssh[pos] * w[pos, None]])
            cons.append(cp.abs(A @ u) <= 1)
            self.A = A
        else:
            self.A = np.zeros((0, r), dtype=complex)
        if np.any(zero):
            Z = np.vstack([S[zero], Ssh[zero]])
            cons.append(Z @ u == 0)
            self.Z = Z
        else:
            self.Z = np.zeros((0, r), dtype=complex)
        self.u = u
        self.prob = cp.Problem(cp.Maximize(cp.real(self.o @ u)), cons)

    def row(self, z):
        return (self.E.s(self.nodes, np.array([z])) * self.omega[None, :] @ self.T)[0]

    def solve(self, z):
        o = self.row(z)
        nab = float(np.linalg.norm(o))
        if nab == 0:
            return 0.0, nab, "ok"
        # unit objective keeps the solver's absolute gap relative to nabla
        self.o.value = o / nab
        import cvxpy as cp
        try:
            # warm starts reuse cached solver data, which can reject updates;
            # an inaccurate solve is reported through the status tag instead
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                self.prob.solve(solver="CLARABEL", warm_start=False)
        except cp.error.SolverError:
            return 0.0, nab, "failed"
        status = self.prob.status
        if self.u.value is None:
            return 0.0, nab, "failed"
        u = np.asarray(self.u.value)
        kap = max(1.0, float(np.linalg.norm(u)),
                  float(np.max(np.abs(self.A @ u))) if self.A.size else 0.0)
        u = u / kap
        val = float(abs(o @ u))
        tag = "ok" if status == "optimal" else ("inaccurate" if "inaccurate" in status else "failed")
        if self.Z.size and np.max(np.abs(self.Z @ u)) > 1e-7:
            tag = "inaccurate"
        return val, nab, tag


def mflat(m, basis, eval_points, grid=None, tabulate=True):
    """Sharp majorant of ``m`` restricted to a finite-dimensional subspace.

    The subspace is spanned by kernels at ``basis`` and their conjugates, so
    it is closed under ``F -> F#``. For each evaluation point ``z`` this solves

        max Re(F(z))  s.t.  ||F||_H <= 1,  |F|, |F#| <= m on the grid,

    which equals ``sup |F(z)|`` because the feasible set is invariant under
    unimodular scaling. The solver output is scaled to strict feasibility,
    so every reported value is attained by a feasible element.

    Parameters
    ----------
    m : Majorant
    basis : array_like of complex
    eval_points : array_like of complex
    grid : array_like of complex, optional
        Constraint points; defaults to the domain samples.
    tabulate : bool
        Also evaluate on the constraint grid (needed for iterating).

    Returns
    -------
    FlatResult
    """
    E = m.E
    basis = np.atleast_1d(np.asarray(basis, dtype=complex))
    nodes = np.unique(np.concatenate([basis, np.conj(basis)]))
    grid = m.domain.samples() if grid is None else np.asarray(grid, dtype=complex)
    prob = _FlatProblem(m, nodes, grid)
    ev = np.atleast_1d(np.asarray(eval_points, dtype=complex))

    def run(points):
        vals, nabs, st = [], [], []
        la = E.log_abs(points)
        with np.errstate(divide="ignore"):
            for z, l in zip(points, la):
                v, nb, tag = prob.solve(z)
                vals.append(np.log(v) + l)
                nabs.append(np.log(nb) + l)
                st.append(tag)
        return np.array(vals), np.array(nabs), st

    vals, nabs, st = run(ev)
    if tabulate:
        gv, _, _ = run(grid)
    else:
        gv = np.full(grid.shape, np.nan)
    return FlatResult(ev, vals, st, grid, gv, nodes, prob.T.shape[1], nabs,
                      m.domain, E)


# -- preorder -------------------------------------------------------------------

@dataclass(frozen=True)
class PreorderReport:
    """Grid-based semi-decision of the majorization preorder."""

    relation: str
    forward: str
    backward: str
    forward_sup: float
    backward_sup: float
    diagnostics: tuple = ()
    semi_decision: bool = True

    def to_dict(self):
        return {"relation": self.relation, "forward": self.forward,
                "backward": self.backward, "forwardSup": self.forward_sup,
                "backwardSup": self.backward_sup,
                "diagnostics": list(self.diagnostics), "semiDecision": True}


def _log_diff(m1, m2, z):
    if m1.E is not None and m1.E is m2.E:
        return m1.log_over_E(z) - m2.log_over_E(z)
    return m1.log_eval(z) - m2.log_eval(z)


def _bounded(m1, m2, cap, window=3, flat=0.05, steep=0.5):
    """Is ``m1 <~ m2`` on the domain of ``m2``? Returns (verdict, sup, note)."""
    dom = m2.domain
    if dom.kind == "customSampled":
        v = _log_diff(m1, m2, dom.samples())
        return ("bounded" if np.all(np.isfinite(v)) else "unbounded"), float(np.max(v)), ""
    t = dom.base_parameters()
    dmax = []
    v = _log_diff(m1, m2, dom.point(t))
    fine = _log_diff(m1, m2, dom.point(_mid(t[:-1], t[1:])))
    refine = float(np.max(fine) - np.max(v))
    sup = float(max(np.max(v), np.max(fine)))
    j = 1
    while dom.ymax * 10.0 ** j <= cap:
        dv = float(np.max(_log_diff(m1, m2, dom.point(dom.decade(j)))))
        dmax.append(dv)
        sup = max(sup, dv)
        j += 1
    if not np.isfinite(sup):
        return "unbounded", sup, "infinite ratio at a sample"
    inc = np.diff(dmax)[-window:] if len(dmax) > window else np.diff(dmax)
    if inc.size == 0 or np.all(inc < flat):
        note = "" if refine < 1e-3 else f"refinement moved sup by {refine:.3g}"
        return "bounded", sup, note
    if np.all(inc > steep):
        return "unbounded", sup, ""
    return "unstable", sup, f"tail increments {np.round(inc, 4).tolist()}"


def compare_preorder(m1, m2, cap=1e12):
    """Relation of ``m1`` to ``m2`` in the majorization preorder.

    ``m1 <= m2`` means ``D1 ⊇ D2`` and ``m1 <~ m2`` on ``D2``. Boundedness is
    judged from decade-wise maxima of ``log(m1/m2)`` up to ``cap``; the
    verdict is a semi-decision and is labelled as such.

    Returns
    -------
    PreorderReport
        ``relation`` is one of ``less``, ``equivalent``, ``greater``,
        ``incomparable``.
    """
    diags = []
    fwd, fsup = "excluded", np.nan
    bwd, bsup = "excluded", np.nan
    if m1.domain.contains(m2.domain):
        fwd, fsup, note = _bounded(m1, m2, cap)
        if note:
            diags.append(f"forward: {note}")
    else:
        diags.append("forward: domain of m1 does not contain domain of m2")
    if m2.domain.contains(m1.domain):
        bwd, bsup, note = _bounded(m2, m1, cap)
        if note:
            diags.append(f"backward: {note}")
    else:
        diags.append("backward: domain of m2 does not contain domain of m1")
    f, b = fwd == "bounded", bwd == "bounded"
    rel = ("equivalent" if f and b else "less" if f else "greater" if b
           else "incomparable")
    return PreorderReport(rel, fwd, bwd, float(fsup), float(bsup), tuple(diags))


@dataclass(frozen=True)
class MinimalityReport:
    relation: str
    minimal_compatible: bool
    report: PreorderReport

    def to_dict(self):
        return {"relation": self.relation, "minimalCompatible": self.minimal_compatible,
                "preorder": self.report.to_dict()}


def minimal_check(m, witness):
    """Compare ``m`` with the norming function of ``span{F0}`` on ``D``.

    For a one-dimensional represented subspace, being equivalent to
    ``|F0|/||F0||`` is the signature of a minimal majorant.
    """
    if len(witness) == 0 or norm_h(witness) == 0:
        raise ValueError("zero witness")
    nab = Majorant(m.domain, "span", witness.E, witness=witness)
    rep = compare_preorder(m, nab)
    return MinimalityReport(rep.relation, rep.relation == "equivalent", rep)

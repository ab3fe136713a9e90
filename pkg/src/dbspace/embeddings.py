"""Explicit embeddings of sequence spaces into majorized kernel spans.

Three maps are built from a sparse point plan ``(v_n)``:

* ``Psi(d) = sum mu_n Lambda(d)_n Ktilde(v_n, .)`` on the imaginary ray,
* ``Psi1(c) = sum mu_n gamma_n c_n Ktilde(v_n, .)`` on the real line when the
  points are ``Theta``-zeros creeping towards the axis,
* the same ``Psi`` on the real line for ``Theta``-zeros inside a sector.

Each map is certified by measuring the weighted sup ``|z| |F(z)/E(z)|`` on a
grid (upper constant) and at the probe points (lower constant). A Riesz
extraction over normalized kernels and an equivalent-norm subspace built from
zeros close to the real axis complete the module.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import hb
from .majorant import DomainSpec, Majorant, norm_m
from .sequences import (SparsePointPlan, TruncatedSequence, block_edges,
                        lambda_map, norms, select_sparse_points, validate_plan)
from .space import KernelSpan, gram_matrix

__all__ = ["RieszSelection", "riesz_extract", "mu_coeffs", "gamma_coeffs",
           "probe_points", "build_psi", "psi_ratio_series", "build_psi1",
           "psi1_ratio_series", "build_psi_case2", "EmbeddingReport",
           "PlanError", "certify_psi_bounds", "certify_psi1_bounds",
           "certify_case2_bounds", "NormEquivalenceReport",
           "equivalent_norm_subspace", "combined_demo", "ray_plan"]

PSI_UPPER = 3.5
PSI_LOWER = 0.5
PSI1_UPPER = 4.0 / 24.0 + 2.0 + 1.0 + 1.0 / 24.0
PSI1_LOWER = 0.25
CASE2_LOWER = 0.75
LOWER_TOL = 1e-9


class PlanError(ValueError):
    """A plan failed validation; ``violation`` is ``(condition, index)``."""

    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation


# -- Riesz extraction -----------------------------------------------------------

@dataclass(frozen=True)
class RieszSelection:
    """Normalized kernels selected to keep the off-diagonal Gram mass small."""

    points: np.ndarray
    gram: object
    off_diag_sq: float
    frame_bounds: tuple
    rejected: tuple = ()
    diagnostic: str = ""

    def __len__(self):
        return int(self.points.size)

    def spectral_slack(self):
        """Distance of the Gram spectrum inside ``[1 - sqrt s, 1 + sqrt s]``.

        Nonnegative when the containment holds.
        """
        r = np.sqrt(self.off_diag_sq)
        lo, hi = self.frame_bounds
        return float(min(lo - (1.0 - r), (1.0 + r) - hi))

    def to_dict(self):
        return {"points": [[p.real, p.imag] for p in self.points],
                "offDiagSq": self.off_diag_sq,
                "frameBounds": list(self.frame_bounds),
                "spectralSlack": self.spectral_slack(),
                "rejected": list(self.rejected), "diagnostic": self.diagnostic}


def _selection(E, pts, rejected=(), diagnostic=""):
    pts = np.asarray(pts, dtype=complex)
    if pts.size == 0:
        return RieszSelection(pts, None, 0.0, (1.0, 1.0), tuple(rejected), diagnostic)
    G = gram_matrix(E, pts)
    lam = G.eigenvalues()
    return RieszSelection(pts, G, G.off_diag_sq(), (float(lam[0]), float(lam[-1])),
                          tuple(rejected), diagnostic)


def riesz_extract(E, candidates, target=0.5, max_points=None):
    """Greedy extraction of a Riesz sequence of normalized kernels.

    A candidate is kept iff the off-diagonal square sum of the normalized
    Gram matrix of the kept points stays at most ``target``.

    Parameters
    ----------
    E : StructureFunction
    candidates : array_like of complex
    target : float
        Bound on ``sum_{n != m} |(Ktilde_n, Ktilde_m)|^2``; below 1 this
        certifies a Riesz sequence.
    max_points : int, optional
        Requested size; a shortfall is reported in ``diagnostic``.

    Returns
    -------
    RieszSelection
    """
    cand = np.atleast_1d(np.asarray(candidates, dtype=complex))
    kept, rejected = [], []
    for idx, w in enumerate(cand):
        if max_points is not None and len(kept) >= max_points:
            break
        trial = np.array(kept + [w])
        if trial.size < 2 or gram_matrix(E, trial).off_diag_sq() <= target:
            kept.append(w)
        else:
            rejected.append(idx)
    diag = ""
    if max_points is not None and len(kept) < max_points:
        diag = f"only {len(kept)} of {max_points} points selected"
    return _selection(E, kept, rejected, diag)


# -- coefficient maps ------------------------------------------------------------

def mu_coeffs(E, points):
    """``mu_n = i (pi (1 - |Theta(v_n)|^2) / Im v_n)^(1/2) E(v_n)/|E(v_n)|``."""
    v = np.asarray(points, dtype=complex)
    one_m = -np.expm1(2.0 * E.log_theta(v).real)
    return 1j * np.sqrt(np.pi * one_m / v.imag) * E.phase(v)


def gamma_coeffs(points):
    """``gamma_n = Im v_n / |v_n + i|``."""
    v = np.asarray(points, dtype=complex)
    return v.imag / np.abs(v + 1j)


def _plan_lambda(d, n_points):
    """``Lambda(d)`` fitted to a finite plan of ``n_points`` points.

    A zero tail is used when its extra block still fits in the plan;
    otherwise ``d`` is continued by its last value, so ``Lambda(d)`` ends
    with the last complete block.
    """
    d = d if isinstance(d, TruncatedSequence) else TruncatedSequence(d)
    L = len(d)
    edges = block_edges(L + 1)
    if edges[L] > n_points:
        raise ValueError(f"sequence of length {L} needs {edges[L]} points, "
                         f"plan has {n_points}")
    zt = edges[L + 1] <= n_points
    lam = lambda_map(TruncatedSequence(d.values, zero_tail=zt)).values
    out = np.zeros(n_points, dtype=complex)
    out[:lam.size] = lam
    return out


def _require(plan, E, mode):
    if plan.mode != mode:
        raise PlanError(f"plan mode {plan.mode!r}, expected {mode!r}")
    rep = validate_plan(plan, E, mode)
    if not rep.ok:
        key, idx = rep.first_violation
        raise PlanError(f"plan violates condition {key} at index {idx}", (key, idx))
    return rep


def build_psi(E, plan, d, check=True):
    """``Psi(d)`` for an imaginary-ray plan as a kernel span.

    Parameters
    ----------
    E : StructureFunction
    plan : SparsePointPlan
        Mode ``"R7"``.
    d : TruncatedSequence or array_like
        At most ``plan.blocks`` entries.
    check : bool
        Validate the plan first.

    Returns
    -------
    KernelSpan
    """
    if check:
        _require(plan, E, "R7")
    v = np.asarray(plan.points, dtype=complex)
    lam = _plan_lambda(d, v.size)
    return KernelSpan(E, v, mu_coeffs(E, v) * lam)


def psi_ratio_series(E, plan, d, z):
    """Direct series for ``Psi(d)(z)/E(z)``.

    ``sum Lambda(d)_n (1 - conj(Theta(v_n)) Theta(z)) / (conj(v_n) - z)``,
    evaluated without reference to the kernel basis.
    """
    v = np.asarray(plan.points, dtype=complex)
    lam = _plan_lambda(d, v.size)
    return _series(E, v, lam, z)


def _series(E, v, weights, z):
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    th_v = np.conj(E.theta(v))
    th_z = E.theta(z)
    terms = (1.0 - th_v[None, :] * th_z[:, None]) / (np.conj(v)[None, :] - z[:, None])
    return terms @ weights


def build_psi1(E, plan, c, check=True):
    """``Psi1(c) = sum mu_n gamma_n c_n Ktilde(v_n, .)`` for a case-1 plan."""
    if check:
        _require(plan, E, "R21case1")
    v = np.asarray(plan.points, dtype=complex)
    w = _pad(c, v.size)
    return KernelSpan(E, v, mu_coeffs(E, v) * gamma_coeffs(v) * w)


def psi1_ratio_series(E, plan, c, z):
    """Direct series ``sum c_n gamma_n (1 - conj(Theta(v_n)) Theta(z)) / (conj(v_n) - z)``."""
    v = np.asarray(plan.points, dtype=complex)
    return _series(E, v, gamma_coeffs(v) * _pad(c, v.size), z)


def _pad(c, n):
    c = c.values if isinstance(c, TruncatedSequence) else np.atleast_1d(np.asarray(c, dtype=complex))
    if c.size > n:
        raise ValueError(f"sequence longer than the plan ({c.size} > {n})")
    out = np.zeros(n, dtype=complex)
    out[:c.size] = c
    return out


def build_psi_case2(E, plan, d, check=True):
    """``Psi(d)`` for a sector plan (real-line majorization)."""
    if check:
        _require(plan, E, "R21case2")
    v = np.asarray(plan.points, dtype=complex)
    return KernelSpan(E, v, mu_coeffs(E, v) * _plan_lambda(d, v.size))


def probe_points(plan, length):
    """Probe locations ``(p_1, .., p_length)`` for the lower bound.

    Ray plans use ``i |v_{n_k} v_{n_k+1}|^(1/2)``, sector plans
    ``(Im v_{n_k} Im v_{n_k+1})^(1/2)`` and case-1 plans ``Re v_k``. When the
    successor of a block end lies past the plan, the growth inequality is
    closed with the smallest admissible virtual successor.
    """
    v = np.asarray(plan.points, dtype=complex)
    if plan.mode == "R21case1":
        return v.real[:length].astype(complex)
    edges = block_edges(length)
    out = []
    for k in range(1, length + 1):
        n = int(edges[k])
        if plan.mode == "R7":
            if n < v.size:
                out.append(1j * np.sqrt(abs(v[n - 1]) * abs(v[n])))
            else:
                out.append(1j * 8.0 * np.sum(np.abs(v)))
        else:
            sa = np.sin(plan.params.get("alpha", np.pi / 4))
            if n < v.size:
                out.append(complex(np.sqrt(v[n - 1].imag * v[n].imag)))
            else:
                out.append(complex(8.0 * np.sum(np.abs(v)) / sa))
    return np.array(out, dtype=complex)


# -- certification ---------------------------------------------------------------

@dataclass
class EmbeddingReport:
    """Measured constants of an embedding against the proof's constants."""

    kind: str
    plan: SparsePointPlan
    mu: np.ndarray
    measured_upper: float
    measured_lower: float
    bound_upper: float
    bound_lower: float
    upper_witness: complex
    lower_witness: int
    per_probe_ok: bool
    probes: int
    domain_equivalence: tuple
    trace: np.ndarray = field(default=None, repr=False)

    @property
    def upper_margin(self):
        return 1.0 - self.measured_upper / self.bound_upper

    @property
    def lower_margin(self):
        return self.measured_lower - self.bound_lower

    @property
    def ok(self):
        return (self.measured_upper <= self.bound_upper * (1.0 + 1e-12)
                and self.measured_lower >= self.bound_lower - LOWER_TOL
                and self.per_probe_ok)

    def to_dict(self):
        return {"kind": self.kind, "ok": bool(self.ok), "probes": self.probes,
                "plan": self.plan.to_dict(),
                "mu": [[m.real, m.imag] for m in self.mu],
                "measuredUpper": self.measured_upper,
                "measuredLower": self.measured_lower,
                "boundUpper": self.bound_upper, "boundLower": self.bound_lower,
                "upperMargin": self.upper_margin, "lowerMargin": self.lower_margin,
                "upperWitness": [self.upper_witness.real, self.upper_witness.imag],
                "lowerWitnessProbe": self.lower_witness,
                "perProbeOk": bool(self.per_probe_ok),
                "normEquivalenceToME": list(self.domain_equivalence)}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self):
        rows = ["t,weighted_ratio"]
        for t, r in self.trace:
            rows.append(f"{t:.17g},{r:.17g}")
        return "\n".join(rows) + "\n"


def _geom(lo, hi, ratio=1.1):
    n = int(np.ceil(np.log(hi / lo) / np.log(ratio))) + 1
    return lo * ratio ** np.arange(n)


def _certify(kind, E, plan, probes, build, series_len, lower_k, bound_u,
             bound_l, lower_slack, grid, to_t):
    v = np.asarray(plan.points, dtype=complex)
    up, lo = 0.0, np.inf
    up_w, lo_w, per_ok = 0j, 0, True
    trace = None
    for d in probes:
        d = d if isinstance(d, TruncatedSequence) else TruncatedSequence(d)
        _, dinf, _ = norms(d)
        if dinf == 0:
            continue
        F = build(d)
        vals = np.abs(grid) * np.abs(F.ratio_to_E(grid)) / dinf
        i = int(np.argmax(vals))
        if vals[i] > up:
            up, up_w = float(vals[i]), complex(grid[i])
            trace = np.column_stack([to_t(grid), vals])
        pts = lower_k(len(d))
        pv = np.abs(pts) * np.abs(F.ratio_to_E(pts))
        need = np.abs(d.values[:pts.size]) * lower_slack[0] - lower_slack[1] * dinf
        if np.any(pv < need - LOWER_TOL * dinf):
            per_ok = False
        j = int(np.argmax(pv))
        if pv[j] / dinf < lo:
            lo, lo_w = float(pv[j] / dinf), j + 1
    return up, lo, up_w, lo_w, per_ok, trace


def _default_probes(n, blocks, rng):
    out = [np.eye(n)[k] for k in range(n)]
    for _ in range(20):
        out.append(rng.choice([-1.0, 1.0], size=n) * rng.uniform(0.2, 1.0, size=n)
                   + 1j * rng.uniform(-1.0, 1.0, size=n))
    return out


def certify_psi_bounds(E, plan, probes=None, seed=0):
    """Measure the two constants of ``Psi`` on the imaginary ray.

    Upper: ``max y |Psi(d)(iy)/E(iy)| / ||d||_inf`` over a geometric grid of
    ratio 1.1 from ``|v_1|`` to ten times the last probe height, refined with
    the node heights and probes. Lower: ``max_k y_k |Psi(d)(iy_k)/E(iy_k)|``
    over probe heights, with each probe also checked against
    ``|d_k| - ||d||_inf / 2``.

    Parameters
    ----------
    E : StructureFunction
    plan : SparsePointPlan
        A valid ``"R7"`` plan.
    probes : list of sequences, optional
        Defaults to the unit vectors of length ``plan.blocks`` plus 20 random
        sequences drawn from ``seed``.

    Returns
    -------
    EmbeddingReport
    """
    _require(plan, E, "R7")
    L = plan.blocks
    if L < 1:
        raise PlanError("plan holds no complete block")
    v = np.asarray(plan.points, dtype=complex)
    if probes is None:
        probes = _default_probes(L, L, np.random.default_rng(seed))
    pk = probe_points(plan, L)
    y1 = abs(v[0])
    ys = np.unique(np.concatenate([_geom(y1, 10.0 * np.max(np.abs(pk))),
                                   np.abs(v), np.abs(pk)]))
    grid = 1j * ys
    res = _certify("psi", E, plan, probes,
                   lambda d: build_psi(E, plan, d, check=False), L,
                   lambda n: probe_points(plan, n), PSI_UPPER, PSI_LOWER,
                   (1.0, 0.5), grid, lambda g: g.imag)
    equiv = (y1 / (y1 + 1.0), 1.0)
    return EmbeddingReport("psi", plan, mu_coeffs(E, v), res[0], res[1],
                           PSI_UPPER, PSI_LOWER, res[2], res[3], res[4],
                           len(probes), equiv, res[5])


def _real_grid(lo, hi, v):
    pos = _geom(lo, hi)
    extra = []
    for p in v:
        # resolve the narrow peaks near Re v_n
        extra.append(p.real + p.imag * np.linspace(-8.0, 8.0, 33))
        extra.append(p.real * np.array([0.5, 0.9, 1.1, 2.0]))
    ex = np.concatenate(extra) if extra else np.array([])
    pos = np.unique(np.concatenate([pos, ex[(ex >= lo)]]))
    return np.concatenate([-pos[::-1], pos]).astype(complex)


def certify_psi1_bounds(E, plan, probes=None, seed=0):
    """Measure the constants of ``Psi1`` on the real line.

    Upper: ``max |x| |Psi1(c)(x)/E(x)| / ||c||_inf`` for ``|x| >= Re v_1``,
    against the budget ``4/24 + 2 + 1 + 1/24``. Lower: at ``x_k = Re v_k`` the
    value must reach ``|c_k|/2 - ||c||_inf/4``; the best probe must reach
    ``1/4``.
    """
    _require(plan, E, "R21case1")
    v = np.asarray(plan.points, dtype=complex)
    n = v.size
    if probes is None:
        probes = _default_probes(n, n, np.random.default_rng(seed))
    x1 = v[0].real
    grid = _real_grid(x1, 10.0 * v[-1].real, v)
    res = _certify("psi1", E, plan, probes,
                   lambda c: build_psi1(E, plan, c, check=False), n,
                   lambda k: probe_points(plan, k), PSI1_UPPER, PSI1_LOWER,
                   (0.5, 0.25), grid, lambda g: g.real)
    equiv = (x1 / np.hypot(x1, 1.0), 1.0)
    return EmbeddingReport("psi1", plan, mu_coeffs(E, v), res[0], res[1],
                           PSI1_UPPER, PSI1_LOWER, res[2], res[3], res[4],
                           len(probes), equiv, res[5])


def certify_case2_bounds(E, plan, probes=None, seed=0):
    """Measure the constants of the sector embedding on the real line.

    Upper budget ``5/4 + 2/sin(alpha)`` for ``|x| >= Im v_1``; lower
    ``|d_k| - ||d||_inf/4`` at ``x_k = (Im v_{n_k} Im v_{n_k+1})^(1/2)`` and
    ``3/4`` after the supremum over probes.
    """
    _require(plan, E, "R21case2")
    v = np.asarray(plan.points, dtype=complex)
    L = plan.blocks
    if L < 1:
        raise PlanError("plan holds no complete block")
    alpha = plan.params.get("alpha", np.pi / 4)
    bound_u = 1.25 + 2.0 / np.sin(alpha)
    if probes is None:
        probes = _default_probes(L, L, np.random.default_rng(seed))
    pk = probe_points(plan, L)
    y1 = v[0].imag
    grid = _real_grid(y1, 10.0 * np.max(np.abs(pk)), v)
    grid = np.unique(np.concatenate([grid, pk, -pk]))
    res = _certify("case2", E, plan, probes,
                   lambda d: build_psi_case2(E, plan, d, check=False), L,
                   lambda k: probe_points(plan, k), bound_u, CASE2_LOWER,
                   (1.0, 0.25), grid, lambda g: g.real)
    equiv = (y1 / np.hypot(y1, 1.0), 1.0)
    return EmbeddingReport("case2", plan, mu_coeffs(E, v), res[0], res[1],
                           bound_u, CASE2_LOWER, res[2], res[3], res[4],
                           len(probes), equiv, res[5])


def ray_plan(E, max_points=27, start=1.0, ratio=2.0, count=400, delta=1.0):
    """Sparse ray plan from a dense geometric ladder ``i start ratio^k``."""
    from .sequences import geometric_candidates
    cand = geometric_candidates(start, ratio, count)
    return select_sparse_points(cand, "R7", E, {"delta": delta, "target": 0.5},
                                max_points=max_points)


# -- equivalent-norm subspace ----------------------------------------------------

@dataclass
class NormEquivalenceReport:
    """Subspace of kernels near the axis on which both norms are equivalent."""

    accepted: bool
    diagnostic: str
    points: np.ndarray
    delta: float
    bounds: np.ndarray
    measured: np.ndarray
    riesz: RieszSelection = None
    probe_ratio: np.ndarray = None
    probe_budget: np.ndarray = None
    im_sum: float = 0.0

    @property
    def ok(self):
        if not self.accepted:
            return False
        return bool(np.all(self.measured <= self.bounds * (1 + 1e-9))
                    and np.all(self.probe_ratio <= self.probe_budget * (1 + 1e-9)))

    def to_dict(self):
        d = {"accepted": self.accepted, "diagnostic": self.diagnostic,
             "points": [[p.real, p.imag] for p in self.points],
             "delta": self.delta, "imSum": self.im_sum,
             "bounds": [float(b) for b in self.bounds],
             "measured": [float(b) for b in self.measured]}
        if self.accepted:
            d["ok"] = self.ok
            d["riesz"] = self.riesz.to_dict()
            d["probeSupRatio"] = [float(x) for x in self.probe_ratio]
            d["probeBudget"] = [float(x) for x in self.probe_budget]
        return d


def _reject(msg, pts=()):
    e = np.array([])
    return NormEquivalenceReport(False, msg, np.asarray(pts, dtype=complex), np.nan, e, e)


def equivalent_norm_subspace(E, points, delta_cap=0.5, target=0.5, n_probes=20,
                             seed=0, y0=1.0):
    """Select kernels whose span carries equivalent Hilbert and majorant norms.

    The input sequence must have heights tending to zero and ``|Theta|``
    staying below ``delta_cap``; both tendencies are judged by comparing the
    leading and trailing halves. Points are then kept greedily when their
    height is at most half the previous kept height (so the heights are
    summable), ``|Theta| <= delta_cap`` and the Riesz criterion stays within
    ``target``.

    For each kept point the sup of ``|Ktilde(v_n, .)|/m_E`` over ``i[y0, inf)``
    must lie below ``4 sqrt(Im v_n) / (sqrt(pi) (1 - delta^2))``; random
    combinations ``sum a_n Ktilde_n`` must have sup ratio at most
    ``||a||_2`` times the l2 norm of those bounds.
    """
    w = np.atleast_1d(np.asarray(points, dtype=complex))
    if w.size < 4:
        return _reject("need at least four points to judge tendencies", w)
    if np.any(w.imag <= 0):
        return _reject("points must lie in the open upper half-plane", w)
    half = w.size // 2
    if np.min(w.imag[half:]) > 0.5 * np.min(w.imag[:half]):
        return _reject("heights do not tend to zero (liminf Im w_n > 0)", w)
    th = np.abs(E.theta(w))
    if np.max(th[half:]) > delta_cap:
        return _reject(f"|Theta(w_n)| approaches 1 (tail max {np.max(th[half:]):.6g} "
                       f"> {delta_cap})", w)
    kept = []
    for p, t in zip(w, th):
        if t > delta_cap:
            continue
        if kept and p.imag > 0.5 * kept[-1].imag:
            continue
        trial = np.array(kept + [p])
        if trial.size > 1 and gram_matrix(E, trial).off_diag_sq() > target:
            continue
        kept.append(p)
    v = np.array(kept, dtype=complex)
    im_sum = float(np.sum(v.imag))
    if not im_sum <= 2.0 * v[0].imag:
        return _reject("selected heights are not summable", v)
    delta = float(np.max(np.abs(E.theta(v))))
    bounds = 4.0 * np.sqrt(v.imag) / (np.sqrt(np.pi) * (1.0 - delta ** 2))
    m = Majorant(DomainSpec("imaginaryRay", y0), "mE", E)
    measured = np.array([norm_m(KernelSpan(E, [p], [1.0]), m).sup_ratio for p in v])
    rng = np.random.default_rng(seed)
    ratios, budget = [], []
    bl2 = float(np.linalg.norm(bounds))
    for _ in range(n_probes):
        a = rng.standard_normal(v.size) + 1j * rng.standard_normal(v.size)
        ratios.append(norm_m(KernelSpan(E, v, a), m).sup_ratio)
        budget.append(np.linalg.norm(a) * bl2)
    return NormEquivalenceReport(True, "", v, delta, bounds, measured,
                                 _selection(E, v), np.array(ratios),
                                 np.array(budget), im_sum)


def combined_demo(E, seed=0, max_points=27):
    """Both subspaces in one space: equivalent norms and an ``l^inf`` copy.

    Uses the ``Theta``-zeros of ``E`` (heights tending to zero) for the first
    and a sparse imaginary-ray plan for the second.
    """
    zs = E.theta_zeros
    zs = zs[np.argsort(np.abs(zs))]
    eq = equivalent_norm_subspace(E, zs, seed=seed)
    plan = ray_plan(E, max_points=max_points)
    emb = certify_psi_bounds(E, plan, seed=seed)
    return {"equivalentNorm": eq.to_dict(), "linfCopy": emb.to_dict(),
            "ok": bool(eq.ok and emb.ok)}

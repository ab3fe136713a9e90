"""Sequence-space tools: l2, l-infinity and partial-sum norms, the cubic block
difference map, and sparse point plans with machine-checked growth margins.

Sequences are 1-indexed mathematically and stored 0-indexed.
"""

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = ["TruncatedSequence", "norms", "block_edges", "lambda_map",
           "lambda_norms", "LAMBDA_CONST", "SparsePointPlan", "PlanReport",
           "select_sparse_points", "validate_plan", "plan_from_dict",
           "geometric_candidates", "MODES"]

LAMBDA_CONST = 2.0 * np.sqrt(1.0 + np.pi ** 2 / 18.0)
MODES = ("R7", "R21case1", "R21case2")


@dataclass(frozen=True)
class TruncatedSequence:
    """Finite prefix of a sequence, optionally continued by zeros."""

    values: np.ndarray
    zero_tail: bool = True

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=complex)).ravel()
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def norms(self):
        return norms(self)


def _l2(x, weights=None):
    # scale by the largest entry so the squares neither underflow nor overflow
    x = np.abs(x)
    s = float(np.max(x))
    if s == 0.0 or not np.isfinite(s):
        return s
    q = (x / s) ** 2
    if weights is not None:
        q = q / weights
    return s * float(np.sqrt(np.sum(q)))


def norms(a):
    """Return ``(l2, linf, u)`` of a zero-tailed sequence.

    ``u`` is the supremum of the absolute partial sums.
    """
    v = a.values if isinstance(a, TruncatedSequence) else np.asarray(a, dtype=complex)
    if v.size == 0:
        return 0.0, 0.0, 0.0
    return (_l2(v), float(np.max(np.abs(v))),
            float(np.max(np.abs(np.cumsum(v)))))


def block_edges(L):
    """Block ends ``n_l = l^3`` for ``l = 0..L``."""
    return np.arange(L + 1, dtype=np.int64) ** 3


def lambda_map(d, out_len=None):
    """Block difference map with cubic blocks.

    Entry ``k`` with ``n_{l-1} < k <= n_l`` equals
    ``(d_l - d_{l-1}) / (n_l - n_{l-1})`` where ``d_0 = 0``.

    Parameters
    ----------
    d : TruncatedSequence or array_like
        Input ``d_1..d_L``. With a zero tail the next block (``l = L + 1``)
        is also determined.
    out_len : int, optional
        Prefix length to materialise. Defaults to ``n_L``, or ``n_{L+1}``
        when ``d`` is zero-tailed.

    Returns
    -------
    TruncatedSequence
    """
    if isinstance(d, TruncatedSequence):
        vals, zt = d.values, d.zero_tail
    else:
        vals, zt = np.asarray(d, dtype=complex).ravel(), True
    L = vals.size
    blocks = L + 1 if zt else L
    dd = np.concatenate([[0j], vals, [0j] if zt else []])
    edges = block_edges(blocks)
    avail = int(edges[-1])
    if out_len is None:
        out_len = avail
    if out_len > avail:
        raise ValueError(f"out_len {out_len} exceeds available blocks ({avail})")
    lengths = np.diff(edges)
    per = np.diff(dd) / lengths
    out = np.repeat(per, lengths)[:out_len]
    return TruncatedSequence(out, zero_tail=zt)


def lambda_norms(d):
    """Exact ``(l2, linf, u)`` of ``Lambda(d)`` for zero-tailed ``d``.

    Works blockwise, so no prefix needs to be materialised.
    """
    vals = d.values if isinstance(d, TruncatedSequence) else np.asarray(d, dtype=complex)
    L = vals.size
    if L == 0:
        return 0.0, 0.0, 0.0
    dd = np.concatenate([[0j], vals, [0j]])
    lengths = np.diff(block_edges(L + 1)).astype(float)
    delta = np.diff(dd)
    l2 = _l2(delta, lengths)
    linf = float(np.max(np.abs(delta) / lengths))
    # partial sums move linearly between consecutive d_l inside a block
    u = float(np.max(np.abs(vals)))
    return l2, linf, u


# -- sparse point plans -----------------------------------------------------

@dataclass
class SparsePointPlan:
    """Validated point sequence with per-inequality margins.

    Margins are relative: ``1 - lhs/rhs`` for each inequality, so a
    nonnegative (or positive, for strict ones) value certifies it.
    """

    mode: str
    points: np.ndarray
    params: dict = field(default_factory=dict)
    margins: dict = field(default_factory=dict)
    rejected: list = field(default_factory=list)
    diagnostic: str = ""

    def __len__(self):
        return int(np.asarray(self.points).size)

    @property
    def blocks(self):
        """Number of complete cubic blocks covered by the points."""
        n = len(self)
        L = 0
        while (L + 1) ** 3 <= n:
            L += 1
        return L

    def to_dict(self):
        return {"mode": self.mode,
                "points": [[p.real, p.imag] for p in np.asarray(self.points)],
                "params": self.params,
                "margins": {k: [float(x) for x in v] for k, v in self.margins.items()}}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def plan_from_dict(data):
    if data.get("mode") not in MODES:
        raise ValueError(f"unknown plan mode {data.get('mode')!r}")
    pts = np.array([complex(a, b) for a, b in data.get("points", [])])
    return SparsePointPlan(data["mode"], pts, dict(data.get("params", {})))


@dataclass(frozen=True)
class PlanReport:
    """Result of re-deriving all plan inequalities."""

    ok: bool
    margins: dict
    violations: list

    @property
    def first_violation(self):
        return self.violations[0] if self.violations else None


def _rel(lhs, rhs):
    return 1.0 - np.asarray(lhs, dtype=float) / np.asarray(rhs, dtype=float)


def _offdiag_sum(E, pts):
    from .space import gram_matrix
    if len(pts) < 2:
        return 0.0
    return gram_matrix(E, pts).off_diag_sq()


def _ray_margins(pts, E, params):
    delta = params.get("delta", 1.0)
    target = params.get("target", 0.5)
    r = np.abs(pts)
    m = {}
    m["i_height"] = _rel(delta, pts.imag)
    m["i_modulus"] = _rel(1.0, r)
    m["i_increasing"] = _rel(r[:-1], r[1:]) if len(pts) > 1 else np.array([])
    s = _offdiag_sum(E, pts)
    m["ii"] = _rel([s], [target]) if s > 0 else np.array([1.0])
    th = float(np.sum(np.abs(E.theta(pts)))) if E is not None else 0.0
    m["iii"] = _rel([th], [0.25])
    cs = np.cumsum(r)
    m["iv"] = _rel(cs[:-1], 0.125 * np.sqrt(r[:-1] * r[1:]))
    if len(pts) > 1:
        tail = np.cumsum((1.0 / r)[::-1])[::-1]
        m["v"] = _rel(tail[1:], 0.125 / np.sqrt(r[:-1] * r[1:]))
    else:
        m["v"] = np.array([])
    return m, ("v",)


def _case1_margins(pts, E, params):
    m = {}
    m["positive"] = _rel(0.0, pts.real) if len(pts) else np.array([])
    m["i"] = _rel(np.abs(pts + 1j), 2.0 * pts.real)
    m["ii"] = _rel(2.0 * pts.real[:-1], pts.real[1:]) if len(pts) > 1 else np.array([])
    gam = pts.imag / np.abs(pts + 1j)
    m["iii"] = _rel([np.sum(gam)], [1.0 / 24.0])
    if E is not None and len(pts):
        th = np.abs(E.theta(pts))
        m["theta_zero"] = np.where(th <= 1e-12, 1.0, -1.0)
    return m, ("positive", "ii")


def _case2_margins(pts, E, params):
    alpha = params.get("alpha", np.pi / 4)
    sa = np.sin(alpha)
    y = pts.imag
    m = {}
    ang = np.angle(pts)
    m["sector"] = np.minimum(ang - alpha, np.pi - alpha - ang)
    m["i_height"] = _rel(1.0, y)
    m["i_increasing"] = _rel(y[:-1], y[1:]) if len(pts) > 1 else np.array([])
    m["ii"] = _rel([np.sum(y ** -0.5)], [1.0])
    cs = np.cumsum(np.abs(pts))
    m["iii"] = _rel(cs[:-1], sa / 8.0 * np.sqrt(y[:-1] * y[1:]))
    if len(pts) > 1:
        tail = np.cumsum((1.0 / y)[::-1])[::-1]
        m["iv"] = _rel(tail[1:], 0.125 / np.sqrt(y[:-1] * y[1:]))
    else:
        m["iv"] = np.array([])
    if E is not None and len(pts):
        th = np.abs(E.theta(pts))
        m["theta_zero"] = np.where(th <= 1e-12, 1.0, -1.0)
    return m, ("i_increasing", "iv")


_MARGINS = {"R7": _ray_margins, "R21case1": _case1_margins,
            "R21case2": _case2_margins}


def validate_plan(plan, E=None, mode=None, tol=1e-12):
    """Recompute every inequality of a plan from its points.

    Parameters
    ----------
    plan : SparsePointPlan
    E : StructureFunction, optional
        Needed for the Gram and ``Theta`` conditions.
    mode : str, optional
        Overrides ``plan.mode``.
    tol : float
        Slack for non-strict inequalities.

    Returns
    -------
    PlanReport
        ``violations`` lists ``(condition, index)`` pairs, index 1-based.
    """
    mode = mode or plan.mode
    if mode not in _MARGINS:
        raise ValueError(f"unknown mode {mode!r}")
    pts = np.atleast_1d(np.asarray(plan.points, dtype=complex))
    if pts.size == 0:
        return PlanReport(True, {}, [])
    margins, strict = _MARGINS[mode](pts, E, plan.params)
    bad = []
    for key, vals in margins.items():
        vals = np.atleast_1d(vals)
        for i, v in enumerate(vals):
            fail = (v <= 0) if key in strict else (v < -tol)
            if fail or not np.isfinite(v):
                bad.append((key, i + 1))
    return PlanReport(not bad, {k: np.atleast_1d(v) for k, v in margins.items()}, bad)


def geometric_candidates(start, ratio, count, direction=1j):
    """Candidates ``direction * start * ratio**k``."""
    return direction * start * ratio ** np.arange(count)


def _future_ok(mode, pts, E, params, n_target):
    """Whether the kept prefix still admits the remaining points.

    Each bounded-sum condition keeps a reserve for points not yet chosen:
    the Gram condition allots ``target/(n_target - 1)`` per point, the
    reciprocal tail sums keep ``1/(63 x)`` for the continuation that the
    growth rule forces (ratio at least 64).
    """
    k = len(pts)
    if mode == "R7":
        target = params.get("target", 0.5)
        if n_target > 1 and _offdiag_sum(E, pts) > target * (k - 1) / (n_target - 1):
            return False
        r = np.abs(pts)
        if k > 1:
            tail = np.cumsum((1.0 / r)[::-1])[::-1][1:] + 1.0 / (63.0 * r[-1])
            if np.any(tail >= 0.125 / np.sqrt(r[:-1] * r[1:])):
                return False
        return True
    if mode == "R21case2":
        y = pts.imag
        if np.sum(y ** -0.5) + y[-1] ** -0.5 / 7.0 > 1.0:
            return False
        if k > 1:
            tail = np.cumsum((1.0 / y)[::-1])[::-1][1:] + 1.0 / (63.0 * y[-1])
            if np.any(tail >= 0.125 / np.sqrt(y[:-1] * y[1:])):
                return False
        return True
    return True


def select_sparse_points(candidates, mode, E=None, params=None, max_points=None):
    """Greedy scan for a sparse plan.

    A candidate is kept iff, together with the points already kept, every
    condition of the mode holds and the bounded sums retain their reserve
    for later points. Candidates failing a pointwise precondition are listed
    in ``rejected``.

    Parameters
    ----------
    candidates : array_like of complex
        Ordered by increasing modulus (R7, case 2) or real part (case 1).
    mode : {"R7", "R21case1", "R21case2"}
    E : StructureFunction, optional
        Required for R7 (Gram and ``Theta`` sums) and to certify that
        case-1/2 points are zeros of ``Theta``.
    params : dict, optional
        ``delta`` and ``target`` (R7), ``alpha`` (case 2).
    max_points : int, optional
        Stop after this many points; also sets the Gram reserve in R7.

    Returns
    -------
    SparsePointPlan
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    params = dict(params or {})
    if mode == "R7":
        params.setdefault("delta", 1.0)
        params.setdefault("target", 0.5)
    if mode == "R21case2":
        params.setdefault("alpha", np.pi / 4)
    cand = np.atleast_1d(np.asarray(candidates, dtype=complex))
    n_target = max_points if max_points is not None else max(len(cand), 2)
    kept, rejected = [], []
    for idx, v in enumerate(cand):
        if max_points is not None and len(kept) >= max_points:
            break
        if mode == "R7" and (v.imag < params["delta"] or abs(v) < 1.0):
            rejected.append((idx, "precondition"))
            continue
        if mode == "R21case1" and v.real <= 0:
            rejected.append((idx, "precondition"))
            continue
        if mode == "R21case2":
            a = params["alpha"]
            if not (a <= np.angle(v) <= np.pi - a) or v.imag < 1.0:
                rejected.append((idx, "precondition"))
                continue
        trial = np.array(kept + [v])
        rep = validate_plan(SparsePointPlan(mode, trial, params), E)
        if rep.ok and _future_ok(mode, trial, E, params, n_target):
            kept.append(v)
        else:
            rejected.append((idx, rep.first_violation[0] if rep.violations else "reserve"))
    pts = np.array(kept, dtype=complex)
    rep = validate_plan(SparsePointPlan(mode, pts, params), E)
    diag = ""
    if max_points is not None and len(kept) < max_points:
        diag = f"only {len(kept)} of {max_points} points selectable"
    return SparsePointPlan(mode, pts, params, rep.margins, rejected, diag)

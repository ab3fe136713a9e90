"""Dichotomy indicators for model structure functions.

For ``Theta = E#/E = exp(2iaz) * B(z)`` with a finite Blaschke product ``B``
every indicator has an exact model-class answer. The numeric scans below are
computed independently from ``Theta`` evaluations and compared with it:

* mean type of ``Theta`` along ``iy``,
* ``y (1 - |Theta(iy)|)`` on ``y >= 1``,
* ``|z| |exp(i phi) - Theta(z)|`` along three rays of a sector,
* annulus minima of ``|Theta|`` in ``Im z >= delta``.

Asymptotic questions are decided from decade-wise maxima over a trailing
window; such verdicts are semi-decisions and are labelled as such.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .majorant import DomainSpec, Majorant, norm_m
from .space import random_span

__all__ = ["MeanType", "mean_type", "DefectGrowth", "defect_growth_check", "StolzScan",
           "stolz_scan", "LiminfScan", "theta_liminf_scan", "norm_equivalence_probe",
           "psi_growth_probe", "DichotomyReport", "classify", "VERDICTS",
           "trend", "zero_scale"]

VERDICTS = ("R17-regime", "R7-regime", "indeterminate-gap")


def trend(t, vals, window=3, flat=0.05, steep=0.5):
    """Classify the growth of ``vals`` over geometric parameters ``t``.

    Works on ``log10`` of decade maxima over the last ``window`` decades:
    all increments below ``flat`` give ``"bounded"``, all above ``steep``
    give ``"divergent"``, anything else ``"unstable"``.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(vals, dtype=float)
    with np.errstate(divide="ignore"):
        lv = np.log10(v)
    dec = np.floor(np.log10(t) + 1e-12)
    top = np.unique(dec)
    # only decades the grid covers completely
    top = top[(10.0 ** (top + 1) <= t.max() * 1.3) & (10.0 ** top >= t.min() / 1.3)]
    dmax = np.array([np.max(lv[dec == d]) for d in top])
    inc = np.diff(dmax)[-window:]
    if inc.size == 0 or np.all(inc < flat):
        return "bounded"
    if np.all(inc > steep):
        return "divergent"
    return "unstable"


# -- mean type ----------------------------------------------------------------

@dataclass(frozen=True)
class MeanType:
    closed_form: float
    numeric: float
    heights: tuple

    @property
    def discrepancy(self):
        return abs(self.numeric - self.closed_form)

    def to_dict(self):
        return {"closedForm": self.closed_form, "numeric": self.numeric,
                "heights": list(self.heights), "discrepancy": self.discrepancy}


def mean_type(E, heights=(10.0, 20.0, 40.0)):
    """Mean type of ``Theta`` along the imaginary axis.

    The closed form is ``-2a``. The numeric estimate fits
    ``log|Theta(iy)| = s y + b + c/y`` through the given heights, which
    absorbs the ``O(1/y)`` decay of the Blaschke part. Heights are
    multiplied by :func:`zero_scale` so they lie beyond all zeros.
    """
    y = np.asarray(heights, dtype=float) * zero_scale(E)
    f = E.log_theta(1j * y).real
    A = np.column_stack([y, np.ones_like(y), 1.0 / y])
    coef = np.linalg.lstsq(A, f, rcond=None)[0]
    return MeanType(-2.0 * E.exp_coeff, float(coef[0]), tuple(heights))


# -- y(1 - |Theta(iy)|) --------------------------------------------------------

@dataclass(frozen=True)
class DefectGrowth:
    heights: np.ndarray
    values: np.ndarray
    trend: str
    sup_estimate: float
    model_bounded: bool

    @property
    def bounded(self):
        return self.trend == "bounded"

    @property
    def agrees(self):
        return self.bounded == self.model_bounded

    def to_dict(self):
        return {"trend": self.trend, "supEstimate": self.sup_estimate,
                "bounded": self.bounded, "modelBounded": self.model_bounded,
                "agrees": self.agrees, "semiDecision": True}


def zero_scale(E):
    """``max(1, max |w_n|)``: scans start their asymptotic windows past it."""
    w = E.theta_zeros
    return float(max(1.0, np.max(np.abs(w)))) if w.size else 1.0


def _geom(lo, hi, ratio):
    n = int(np.ceil(np.log(hi / lo) / np.log(ratio))) + 1
    return lo * ratio ** np.arange(n)


def defect_growth_check(E, y_grid=None):
    """Tabulate ``y (1 - |Theta(iy)|)`` and judge boundedness.

    A bounded tail is extrapolated to its limit with a ``c/y`` correction
    through the two highest samples; the estimate is the larger of that
    limit and the sampled maximum. The model criterion is
    ``a = 0`` (the zero list is finite, so its height sum always is). The
    default grid runs from 1 to ``1e8`` times :func:`zero_scale`.
    """
    y = _geom(1.0, 1e8 * zero_scale(E), 1.25) if y_grid is None else np.asarray(y_grid, dtype=float)
    vals = y * E.one_minus_abs_theta(1j * y)
    tr = trend(y, vals)
    if tr == "bounded":
        y1, y2 = y[-2], y[-1]
        lim = (y2 * vals[-1] - y1 * vals[-2]) / (y2 - y1)
        sup = float(max(np.max(vals), lim))
    else:
        sup = np.inf
    return DefectGrowth(y, vals, tr, sup, E.exp_coeff == 0)


# -- sector scan ----------------------------------------------------------------

@dataclass(frozen=True)
class StolzScan:
    alpha: float
    phi: float
    radii: np.ndarray
    rays: tuple
    table: np.ndarray
    trend: str

    @property
    def sup(self):
        return float(np.max(self.table))

    def to_dict(self):
        return {"alpha": self.alpha, "phi": self.phi, "sup": self.sup,
                "trend": self.trend, "rays": list(self.rays),
                "rayMax": [float(x) for x in np.max(self.table, axis=1)],
                "semiDecision": True}


def stolz_scan(E, alpha=np.pi / 4, phi=None, radial_grid=None):
    """Tabulate ``|z| |exp(i phi) - Theta(z)|`` on three sector rays.

    Parameters
    ----------
    alpha : float
        Sector half-opening, ``0 < alpha < pi/2``; rays at ``alpha``,
        ``pi/2`` and ``pi - alpha``.
    phi : float, optional
        Boundary phase; by default ``arg Theta(iR)`` at the largest radius.
    radial_grid : array_like, optional
        Defaults to a ratio-1.25 grid on ``[1, 1e8 zero_scale(E)]``.
    """
    if not 0 < alpha < np.pi / 2:
        raise ValueError("alpha must lie in (0, pi/2)")
    r = _geom(1.0, 1e8 * zero_scale(E), 1.25) if radial_grid is None else np.asarray(radial_grid, dtype=float)
    if phi is None:
        phi = float(E.log_theta(np.array([1j * r[-1]])).imag[0])
    rays = (alpha, np.pi / 2, np.pi - alpha)
    table = np.array([r * np.abs(np.exp(1j * phi) - E.theta(r * np.exp(1j * th)))
                      for th in rays])
    tr = trend(r, np.max(table, axis=0))
    return StolzScan(alpha, phi, r, rays, table, tr)


# -- liminf of |Theta| away from the axis ----------------------------------------

@dataclass(frozen=True)
class LiminfScan:
    delta: float
    radii: np.ndarray
    minima: np.ndarray
    witnesses: np.ndarray
    liminf_estimate: float

    @property
    def record(self):
        """Running minimum from the outermost annulus inwards, reversed."""
        return np.minimum.accumulate(self.minima[::-1])[::-1]

    def to_dict(self):
        return {"delta": self.delta, "liminfEstimate": self.liminf_estimate,
                "minima": [float(x) for x in self.minima],
                "witnesses": [[w.real, w.imag] for w in self.witnesses],
                "semiDecision": True}


def theta_liminf_scan(E, delta=1.0, r_max=None, n_angles=64, n_radii=6, window=3):
    """Annulus minima of ``|Theta|`` over ``{Im z >= delta}``.

    Annuli are ``[2^j, 2^(j+1))``; each is sampled on a polar grid and at
    the zeros of ``Theta`` it contains. The estimate is the smallest annulus
    minimum in the last ``window`` decades of radius; ``r_max`` defaults to
    ``1e8`` times :func:`zero_scale`.
    """
    if r_max is None:
        r_max = 1e8 * zero_scale(E)
    R = _geom(max(1.0, delta), r_max, 2.0)
    mins, wits = [], []
    wz = E.theta_zeros
    for lo in R:
        rr = lo * 2.0 ** (np.arange(n_radii) / n_radii)
        th = np.linspace(0.0, np.pi, n_angles + 1)
        z = (rr[:, None] * np.exp(1j * th)[None, :]).ravel()
        z = z[z.imag >= delta]
        extra = wz[(np.abs(wz) >= lo) & (np.abs(wz) < 2 * lo) & (wz.imag >= delta)]
        edge = rr * np.exp(1j * np.arcsin(min(1.0, delta / lo)))
        z = np.concatenate([z, extra, edge[edge.imag >= delta * (1 - 1e-12)]])
        if z.size == 0:
            mins.append(np.nan)
            wits.append(np.nan)
            continue
        # log|Theta| keeps the minimiser meaningful where |Theta| underflows
        with np.errstate(divide="ignore"):
            a = E.log_theta(z).real
        k = int(np.argmin(a))
        mins.append(np.exp(a[k]))
        wits.append(z[k])
    mins = np.array(mins)
    tail = R >= R[-1] / 10.0 ** window
    est = float(np.nanmin(mins[tail]))
    return LiminfScan(delta, R, mins, np.array(wits, dtype=complex), est)


# -- norm probes ------------------------------------------------------------------

def _ray_majorant(E, y0=1.0, ymax=1e6):
    return Majorant(DomainSpec("imaginaryRay", y0, ymax=ymax), "mE", E)


def norm_equivalence_probe(E, sizes=(4, 8, 16), n_spans=20, seed=0, y0=1.0):
    """Ratios ``||F||_m / ||F||_H`` over random spans of growing size.

    The reference constant is ``max(1, sup_D nabla/m_E)``, computed from the
    closed form of ``nabla/m_E``; it bounds every ratio whenever it is
    finite.

    Returns
    -------
    dict
        ``maxRatio`` per size, ``constant``, and ``bounded``.
    """
    rng = np.random.default_rng(seed)
    m = _ray_majorant(E, y0)
    y = _geom(y0, 1e12, 1.05)
    z = 1j * y
    ratio = np.abs(z + 1j) * np.sqrt(-np.expm1(2.0 * E.log_theta(z).real)) / (
        2.0 * np.sqrt(np.pi * y))
    const = float(max(1.0, np.max(ratio)))
    out = []
    for n in sizes:
        best = 0.0
        for _ in range(n_spans):
            F = random_span(E, n, rng)
            h = F.norm()
            if h == 0:
                continue
            best = max(best, norm_m(F, m).m_norm / h)
        out.append(best)
    out = np.array(out)
    bounded = bool(np.all(out <= const * (1.0 + 1e-6)))
    return {"sizes": list(sizes), "maxRatio": [float(x) for x in out],
            "constant": const, "bounded": bounded,
            "growth": [float(b / a) for a, b in zip(out[:-1], out[1:])]}


def psi_growth_probe(E, plan=None, y0=1.0):
    """``||Psi(e_k)||_m / ||Psi(e_k)||_H`` along the unit vectors.

    The majorant is ``m_E`` on ``i[y0, 10 y_L]`` with ``y_L`` the last probe
    height. Each ratio is compared with ``0.5 y_k/(1+y_k) / ||Psi(e_k)||_H``,
    a floor that follows from the lower embedding constant.
    """
    from .embeddings import build_psi, probe_points, ray_plan
    if plan is None:
        plan = ray_plan(E)
    L = plan.blocks
    pk = np.abs(probe_points(plan, L))
    m = _ray_majorant(E, y0, ymax=10.0 * pk[-1])
    ratios, floors, hs = [], [], []
    for k in range(L):
        e = np.zeros(L)
        e[k] = 1.0
        F = build_psi(E, plan, e)
        h = F.norm()
        cert = norm_m(F, m)
        ratios.append(cert.m_norm / h)
        floors.append(0.5 * pk[k] / (1.0 + pk[k]) / h)
        hs.append(h)
    ratios = np.array(ratios)
    floors = np.array(floors)
    grows = bool(np.all(np.diff(ratios) > 0)) and ratios[-1] > 10.0 * ratios[0]
    return {"ratios": [float(r) for r in ratios], "floors": [float(f) for f in floors],
            "hNorms": [float(h) for h in hs], "probeHeights": [float(p) for p in pk],
            "aboveFloor": bool(np.all(ratios >= floors * (1 - 1e-9))),
            "grows": grows}


# -- report -----------------------------------------------------------------------

@dataclass
class DichotomyReport:
    """Assembled indicators and the resulting regime."""

    fixture: str
    mean_type: MeanType
    blaschke_im_sum: float
    growth: DefectGrowth
    stolz: StolzScan
    liminf: LiminfScan
    verdict: str
    evidence: list = field(default_factory=list)
    probe: dict = None
    embedding: dict = None
    scan: np.ndarray = field(default=None, repr=False)

    def to_dict(self):
        return {"fixture": self.fixture, "verdict": self.verdict,
                "meanTypeTheta": self.mean_type.to_dict(),
                "blaschkeImSum": self.blaschke_im_sum,
                "defectGrowth": self.growth.to_dict(), "stolz": self.stolz.to_dict(),
                "thetaLiminf": self.liminf.to_dict(), "evidence": list(self.evidence),
                "probe": self.probe, "embedding": self.embedding}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, default=float)

    def scan_csv(self):
        """``z, |Theta|, y(1-|Theta|), |z||e^{i phi} - Theta|`` on the imaginary ray."""
        rows = ["re,im,abs_theta,y_one_minus_abs,weighted_phase_gap"]
        for r in self.scan:
            rows.append(",".join(f"{x:.17g}" for x in r))
        return "\n".join(rows) + "\n"


def _scan_rows(E, radii, phi):
    z = 1j * np.asarray(radii)
    th = E.theta(z)
    return np.column_stack([z.real, z.imag, np.abs(th),
                            z.imag * E.one_minus_abs_theta(z),
                            np.abs(z) * np.abs(np.exp(1j * phi) - th)])


def classify(E, seed=0, n_spans=20, run_probes=True, mt_tol=1e-3):
    """Assign ``E`` to a regime of the dichotomy.

    ``R17-regime`` requires vanishing mean type (closed form and numeric),
    a finite height sum, a bounded ``y(1-|Theta(iy)|)`` tail and a bounded
    sector scan; its norm probe then checks ``||F||_m/||F||_H`` on random
    spans. ``R7-regime`` requires negative mean type or a vanishing liminf
    of ``|Theta|`` away from the axis; its probe builds a sparse plan and
    certifies the embedding. Disagreeing indicators give
    ``indeterminate-gap``.
    """
    mt = mean_type(E)
    ims = float(np.sum(E.theta_zeros.imag))
    growth = defect_growth_check(E)
    st = stolz_scan(E)
    lim = theta_liminf_scan(E)
    ev = []
    bounded_model = E.exp_coeff == 0
    bounded_num = abs(mt.numeric) < mt_tol and growth.bounded and st.trend == "bounded"
    decay_model = E.exp_coeff > 0
    decay_num = mt.numeric < -mt_tol or lim.liminf_estimate < 1e-8
    ev.append(f"mean type closed {mt.closed_form:.6g}, numeric {mt.numeric:.6g}")
    ev.append(f"y(1-|Theta|) tail {growth.trend}, model bounded {growth.model_bounded}")
    ev.append(f"sector scan tail {st.trend}")
    ev.append(f"liminf |Theta| estimate {lim.liminf_estimate:.3g}")
    if bounded_model and bounded_num and not decay_num:
        verdict = "R17-regime"
    elif decay_model and decay_num and not bounded_num:
        verdict = "R7-regime"
    else:
        verdict = "indeterminate-gap"
        ev.append("indicators disagree")
    rep = DichotomyReport(E.name, mt, ims, growth, st, lim, verdict, ev,
                          scan=_scan_rows(E, st.radii, st.phi))
    if run_probes and verdict == "R17-regime":
        rep.probe = norm_equivalence_probe(E, sizes=(4,), n_spans=n_spans, seed=seed)
    if run_probes and verdict == "R7-regime":
        from .embeddings import certify_psi_bounds, ray_plan
        plan = ray_plan(E)
        cert = certify_psi_bounds(E, plan, seed=seed)
        rep.embedding = {"points": len(plan), "ok": bool(cert.ok),
                         "measuredUpper": cert.measured_upper,
                         "measuredLower": cert.measured_lower}
        rep.probe = psi_growth_probe(E, plan)
    return rep

"""Command-line front end.

Every run is described by one JSON config document plus the flags
``--seed``, ``--out`` and ``--format``. Reports are plain JSON with sorted
keys (complex numbers as ``[re, im]``, non-finite floats as strings), so the
same config and seed give byte-identical output. The only environment
variable read is ``DBSPACE_OUT``, a default for ``--out``.

Exit codes: 0 success, 2 config error, 3 invalid structure function,
4 certification or validation failure.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import hb
from .hb import HBViolation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FIXTURE = 3
EXIT_CERT = 4

COMMANDS = ("kernel", "classify", "mflat", "embed", "riesz", "compare", "suite")
_KEYS = {"fixture", "domain", "grid", "tolerances", "points", "nodes", "basis",
         "majorant", "majorants", "embed", "riesz", "compare", "acceptance",
         "seed", "output"}


class ConfigError(ValueError):
    pass


class FixtureError(ValueError):
    pass


# -- config -------------------------------------------------------------------

def _complex_list(v, key):
    try:
        return np.array([complex(a, b) for a, b in v], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a list of [re, im] pairs") from exc


@dataclass
class RunConfig:
    """Validated contents of a config document."""

    raw: dict
    base: Path
    seed: int = 0
    grid: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data, base=Path("."), seed=None):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - _KEYS
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        s = data.get("seed", 0) if seed is None else seed
        if not isinstance(s, int) or isinstance(s, bool) or not 0 <= s < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        grid = {"y0": 1e-2, "ymax": 50.0, "count": 200, "x": 0.0}
        grid.update(data.get("grid", {}))
        try:
            y0, ymax, cnt = float(grid["y0"]), float(grid["ymax"]), int(grid["count"])
            float(grid["x"])
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"bad grid: {exc}") from exc
        if not (0 < y0 < ymax) or cnt < 1:
            raise ConfigError("grid needs 0 < y0 < ymax and count >= 1")
        tol = {"identity": 1e-10, "epsSwitch": hb.EPS_SWITCH, "lower": 1e-9}
        tol.update(data.get("tolerances", {}))
        for k, v in tol.items():
            if not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"tolerance {k!r} must be positive")
        return cls(data, Path(base), s, grid, tol)

    def get(self, key, default=None):
        return self.raw.get(key, default)

    def fixture(self):
        spec = self.raw.get("fixture")
        if spec is None:
            raise ConfigError("config needs a 'fixture'")
        try:
            if isinstance(spec, dict):
                E = hb.StructureFunction.from_dict(spec)
            elif spec in hb.FIXTURE_NAMES:
                E = hb.builtin_fixture(spec)
            else:
                p = Path(spec)
                p = p if p.is_absolute() else self.base / p
                if not p.exists():
                    raise ConfigError(f"fixture file {str(p)!r} not found")
                E = hb.load_fixture(p)
        except json.JSONDecodeError as exc:
            raise FixtureError(f"fixture is not valid JSON: {exc}") from exc
        except HBViolation as exc:
            raise FixtureError(str(exc)) from exc
        except (KeyError, TypeError) as exc:
            raise FixtureError(f"malformed fixture: {exc}") from exc
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise FixtureError(str(exc)) from exc
        return E

    def domain(self):
        from .majorant import DomainSpec
        try:
            return DomainSpec.from_dict(self.raw.get("domain", {}))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad domain: {exc}") from exc

    def grid_points(self):
        g = self.grid
        return float(g["x"]) + 1j * np.geomspace(float(g["y0"]), float(g["ymax"]),
                                                 int(g["count"]))

    def load_json(self, spec, what):
        """Inline object or path (relative to the config) to a JSON file."""
        if isinstance(spec, dict):
            return spec
        if not isinstance(spec, str):
            raise ConfigError(f"{what} must be an object or a file path")
        p = Path(spec)
        p = p if p.is_absolute() else self.base / p
        try:
            with open(p, "r", encoding="utf-8") as fh:
                return json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read {what} {str(p)!r}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{what} {str(p)!r} is not valid JSON: {exc}") from exc


# -- output -------------------------------------------------------------------

def plain(x):
    """Convert a report into JSON-native values."""
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [plain(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [plain(float(x.real)), plain(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def dumps(report):
    return json.dumps(plain(report), sort_keys=True, indent=2) + "\n"


def _csv(header, rows):
    def cell(v):
        return f"{v:.17g}" if isinstance(v, float) else str(v)
    return ",".join(header) + "\n" + "".join(",".join(cell(v) for v in r) + "\n" for r in rows)


# -- commands -------------------------------------------------------------------
# each returns (report dict, csv text or None, exit code)

def _kernel_nodes(cfg):
    if cfg.get("nodes") is not None:
        return _complex_list(cfg.get("nodes"), "nodes")
    return np.array([1j])


def cmd_kernel(cfg):
    E = cfg.fixture()
    w = _kernel_nodes(cfg)
    z = _complex_list(cfg.get("points"), "points") if cfg.get("points") else cfg.grid_points()
    eps = cfg.tolerances["epsSwitch"]
    rows, recs = [], []
    nab = hb.nabla(E, z[z.imag >= 0]) if np.any(z.imag >= 0) else np.array([])
    nab_full = np.full(z.shape, np.nan)
    nab_full[z.imag >= 0] = nab
    mE = np.full(z.shape, np.nan)
    ok_m = z != -1j
    mE[ok_m] = hb.m_E(E, z[ok_m])
    for wj in w:
        for zi, nz, mz in zip(z, nab_full, mE):
            kv = hb.kernel(E, wj, zi, eps_switch=eps)
            recs.append({"w": wj, "z": zi, "K": kv.value, "ratioToE": kv.ratio_to_E})
            rows.append([wj.real, wj.imag, zi.real, zi.imag, kv.value.real,
                         kv.value.imag, float(nz), float(mz)])
    up = z[z.imag > 0]
    ident = float(np.max(hb.ratio_identity(E, up).rel_error)) if up.size else 0.0
    ok = ident <= cfg.tolerances["identity"]
    rep = {"fixture": E.to_dict(), "kernel": recs,
           "nabla": [{"z": zi, "value": v} for zi, v in zip(z, nab_full)],
           "mE": [{"z": zi, "value": v} for zi, v in zip(z, mE)],
           "identityMaxRelError": ident, "identityTolerance": cfg.tolerances["identity"],
           "ok": ok}
    csv = _csv(["w_re", "w_im", "z_re", "z_im", "K_re", "K_im", "nabla_z", "mE_z"], rows)
    return rep, csv, EXIT_OK if ok else EXIT_CERT


def cmd_classify(cfg):
    from .classifier import classify
    E = cfg.fixture()
    rep = classify(E, seed=cfg.seed)
    d = rep.to_dict()
    ok = True
    if rep.verdict == "R17-regime" and rep.probe is not None:
        ok = bool(rep.probe["bounded"])
    if rep.verdict == "R7-regime":
        ok = bool(rep.embedding["ok"] and rep.probe["aboveFloor"])
    d["ok"] = ok
    return d, rep.scan_csv(), EXIT_OK if ok else EXIT_CERT


def _majorant(cfg, spec, E):
    from .majorant import Majorant
    try:
        if spec is None:
            return Majorant(cfg.domain(), "mE", E)
        return Majorant.from_dict(cfg.load_json(spec, "majorant"), E)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad majorant: {exc}") from exc


def cmd_mflat(cfg):
    from .majorant import mflat
    E = cfg.fixture()
    m = _majorant(cfg, cfg.get("majorant"), E)
    basis = _complex_list(cfg.get("basis", [[0.0, 1.0]]), "basis")
    pts = _complex_list(cfg.get("points"), "points") if cfg.get("points") else cfg.grid_points()
    if np.any(pts.imag < 0) or np.any(basis.imag == 0):
        raise ConfigError("mflat needs evaluation points with Im z >= 0 and off-axis basis nodes")
    res = mflat(m, basis, pts, tabulate=False)
    ok = "failed" not in res.status
    rep = {"fixture": E.to_dict(), "majorant": m.to_dict(),
           "basis": basis, "rank": res.rank,
           "points": res.points, "logValues": res.log_values,
           "values": res.values, "status": list(res.status),
           "logSubspaceNabla": res.log_subspace_nabla, "ok": ok}
    return rep, res.to_csv(), EXIT_OK if ok else EXIT_CERT


def _random_probes(n, rng, count):
    out = []
    for j in range(count):
        if j % 2 == 0:
            out.append(rng.choice([-1.0, 1.0], size=n))
        else:
            out.append(rng.uniform(-1, 1, size=n) + 1j * rng.uniform(-1, 1, size=n))
    return out


def cmd_embed(cfg):
    from .acceptance import case1_plan, case2_plan
    from .embeddings import (PlanError, certify_case2_bounds, certify_psi1_bounds,
                             certify_psi_bounds, ray_plan)
    from .sequences import plan_from_dict
    E = cfg.fixture()
    opts = dict(cfg.get("embed", {}))
    kind = opts.get("kind", "psi")
    if kind not in ("psi", "psi1", "case2"):
        raise ConfigError(f"embed kind must be psi, psi1 or case2, not {kind!r}")
    count = opts.get("probes", 20)
    if not isinstance(count, int) or count < 1:
        raise ConfigError("embed.probes must be a positive integer")
    if opts.get("plan") is not None:
        try:
            plan = plan_from_dict(cfg.load_json(opts["plan"], "plan"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed plan: {exc}") from exc
    elif kind == "psi":
        plan = ray_plan(E, max_points=int(opts.get("maxPoints", 27)))
    elif kind == "psi1":
        plan = case1_plan(E)
    else:
        plan = case2_plan(E, float(opts.get("alpha", np.pi / 4)))
    cert = {"psi": certify_psi_bounds, "psi1": certify_psi1_bounds,
            "case2": certify_case2_bounds}[kind]
    rng = np.random.default_rng(cfg.seed)
    n = len(plan) if kind == "psi1" else plan.blocks
    try:
        rep = cert(E, plan, _random_probes(max(n, 1), rng, count))
    except PlanError as exc:
        cond, idx = exc.violation if exc.violation else (None, None)
        d = {"fixture": E.to_dict(), "kind": kind, "ok": False, "error": str(exc),
             "violation": {"condition": cond, "index": idx}, "plan": plan.to_dict()}
        return d, None, EXIT_CERT
    d = rep.to_dict()
    d["fixture"] = E.to_dict()
    return d, rep.to_csv(), EXIT_OK if rep.ok else EXIT_CERT


def cmd_riesz(cfg):
    from .acceptance import riesz_ladder
    from .embeddings import riesz_extract
    E = cfg.fixture()
    opts = dict(cfg.get("riesz", {}))
    if "candidates" in opts:
        cand = _complex_list(opts["candidates"], "riesz.candidates")
    else:
        cand = riesz_ladder(int(opts.get("ladder", 12)))
    target = opts.get("target", 0.5)
    if not isinstance(target, (int, float)) or not 0 < target:
        raise ConfigError("riesz.target must be positive")
    mp = opts.get("maxPoints")
    sel = riesz_extract(E, cand, target=float(target),
                        max_points=None if mp is None else int(mp))
    d = sel.to_dict()
    d["candidates"] = cand
    d["fixture"] = E.to_dict()
    d["ok"] = bool(sel.spectral_slack() >= -cfg.tolerances["lower"])
    rows = [[p.real, p.imag] for p in sel.points]
    return d, _csv(["re", "im"], rows), EXIT_OK if d["ok"] else EXIT_CERT


def cmd_compare(cfg):
    from .majorant import compare_preorder
    specs = cfg.get("majorants")
    if not isinstance(specs, list) or len(specs) != 2:
        raise ConfigError("compare needs 'majorants': [first, second]")
    E = cfg.fixture() if cfg.get("fixture") is not None else None
    m1, m2 = (_majorant(cfg, s, E) for s in specs)
    cap = float(dict(cfg.get("compare", {})).get("cap", 1e12))
    rep = compare_preorder(m1, m2, cap=cap)
    d = rep.to_dict()
    d["majorants"] = [m1.to_dict(), m2.to_dict()]
    row = [rep.relation, rep.forward, rep.backward, rep.forward_sup, rep.backward_sup]
    return d, _csv(["relation", "forward", "backward", "forward_sup", "backward_sup"],
                   [row]), EXIT_OK


def cmd_suite(cfg):
    from .acceptance import run_suite
    only = dict(cfg.get("acceptance", {})).get("only")
    res = run_suite(seed=cfg.seed, only=only,
                    echo=lambda line: print(line, file=sys.stderr, flush=True))
    crit = []
    for r in res:
        # timings vary between runs, so the report keeps only the verdict
        crit.append({"number": r.number, "name": r.name, "ok": r.ok,
                     "withinTimeLimit": r.seconds < r.limit, "limit": r.limit,
                     "details": r.details})
    ok = all(r.ok for r in res)
    rows = [[c["number"], c["name"], c["ok"]] for c in crit]
    return ({"criteria": crit, "ok": ok, "seed": cfg.seed},
            _csv(["number", "name", "ok"], rows), EXIT_OK if ok else EXIT_CERT)


_RUN = {"kernel": cmd_kernel, "classify": cmd_classify, "mflat": cmd_mflat,
        "embed": cmd_embed, "riesz": cmd_riesz, "compare": cmd_compare,
        "suite": cmd_suite}


# -- entry point ----------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="dbspace",
                                description="De Branges space computations and certificates.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON config document")
    p.add_argument("--seed", type=int, default=None,
                   help="seed for randomized probes (overrides the config)")
    p.add_argument("--out", help="output directory (default: $DBSPACE_OUT or stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def _load_config(path, seed):
    if path is None:
        return RunConfig.from_dict({}, Path("."), seed)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return RunConfig.from_dict(data, Path(path).resolve().parent, seed)


def run(command, cfg):
    """Run one command; returns ``(report, csv, exit_code)``."""
    return _RUN[command](cfg)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config, args.seed)
        report, csv, code = run(args.command, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FixtureError as exc:
        print(f"invalid structure function: {exc}", file=sys.stderr)
        return EXIT_FIXTURE
    report = dict(report, command=args.command, seed=cfg.seed, exitCode=code)
    if args.format == "csv" and csv is None:
        args.format = "json"
    text = dumps(report) if args.format == "json" else csv
    out = args.out or os.environ.get("DBSPACE_OUT")
    name = dict(cfg.get("output", {}) or {}).get("name", args.command)
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        target = Path(out) / f"{name}.{args.format}"
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(str(target))
    else:
        sys.stdout.write(text)
    if code == EXIT_CERT and "violation" in report:
        v = report["violation"]
        print(f"plan violates condition {v['condition']} at index {v['index']}",
              file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())

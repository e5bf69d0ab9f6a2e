"""Command-line front end.

Every subcommand reads one JSON config, writes CSV/JSON outputs into
``--out`` and a ``manifest.json`` recording the config hash, tolerances and
package version.  Outputs never depend on ``--threads``.

Exit codes: 0 pass, 1 property failure, 2 config error, 3 insufficient data.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import warnings
from typing import Callable, Dict, List, Optional

import numpy as np

from . import __version__
from . import baake_moody as BM
from . import builtins as BI
from . import combs as CB
from . import diffraction as DF
from . import epsdual as ED
from . import groups as G
from . import pointset as PS
from . import scheme as S
from .config import DEFAULT
from .errors import (ArgumentError, CatalogError, ConfigError, CutProjectError, EnumerationBoundError,
                     InsufficientDataError, SpecMismatchError, WitnessUnavailableError)
from .geometry import Box, PointPatch, WeightedComb

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_DATA = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# config helpers


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path!r}: {e}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return cfg


def _need(cfg: dict, key: str, where: str = "config"):
    if key not in cfg:
        raise ConfigError(f"{where}: missing key {key!r}")
    return cfg[key]


def parse_box(obj, dim: Optional[int] = None) -> Box:
    try:
        b = Box.from_json(obj)
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"bad box {obj!r}: {e}") from None
    if dim is not None and b.dim != dim:
        raise ConfigError(f"box {obj!r} has dimension {b.dim}, expected {dim}")
    return b


def parse_scheme(obj) -> S.SchemeSpec:
    if isinstance(obj, str):
        return S.gallery(obj)
    if isinstance(obj, dict):
        try:
            return S.SchemeSpec.from_json(obj)
        except KeyError as e:
            raise ConfigError(f"scheme spec missing key {e}") from None
    raise ConfigError("scheme must be a gallery name or a scheme object")


def parse_window(obj, s: S.SchemeSpec):
    if not isinstance(obj, dict):
        raise ConfigError("window must be an object")
    if "interval" in obj:
        lo, hi = obj["interval"]
        return G.BoxWindow.interval(float(lo), float(hi))
    return G.window_from_json(obj, s.internal)


def parse_function(obj, s: S.SchemeSpec) -> S.InternalFunction:
    kind = _need(obj, "kind", "function")
    if kind == "tent":
        return S.tent(float(obj.get("radius", 1.0)), int(obj.get("dim", 1)))
    if kind == "indicator":
        return S.indicator(parse_window(_need(obj, "window", "function"), s), s.internal)
    if kind == "covariogram":
        a, b = _need(obj, "interval", "function")
        return S.covariogram(float(a), float(b))
    if kind == "samples":
        return S.samples(_need(obj, "h", "function"), _need(obj, "g", "function"), s.internal)
    raise ConfigError(f"unknown function kind {kind!r}")


def _region(obj: dict) -> Box:
    return parse_box(_need(obj, "region", "source"))


def parse_pointset(obj: dict, workers: int = 1):
    """(patch, scheme or None, window or None)."""
    if not isinstance(obj, dict):
        raise ConfigError("pointset must be an object")
    if "builtin" in obj:
        name = obj["builtin"]
        if name == "accumulating":
            return BI.accumulating(int(obj.get("nmax", 30))), None, None
        r = parse_box(obj.get("region", [0.0, 100.0]))
        lo, hi = float(r.lo[0]), float(r.hi[0])
        if name == "silver":
            c = float(obj.get("c", 1.0))
            return BI.silver_patch(lo, hi, c), S.silver_mean(), G.BoxWindow.interval(-c, c)
        return BI.pointset(name, lo, hi), None, None
    if "scheme" in obj:
        s = parse_scheme(obj["scheme"])
        w = parse_window(_need(obj, "window", "pointset"), s)
        return S.model_set(s, w, _region(obj), workers), s, w
    if "points" in obj:
        return PointPatch.from_points(obj["points"], _region(obj)), None, None
    raise ConfigError("pointset needs 'builtin', 'scheme' or 'points'")


def parse_comb(obj: dict, workers: int = 1):
    """(comb, scheme or None, function or None)."""
    if not isinstance(obj, dict):
        raise ConfigError("comb must be an object")
    if "builtin" in obj:
        name = obj["builtin"]
        r = parse_box(obj.get("region", [0.0, 100.0]))
        lo, hi = float(r.lo[0]), float(r.hi[0])
        if name == "silver_tent":
            rad = float(obj.get("radius", 1.0))
            return BI.silver_tent(lo, hi, rad), S.silver_mean(), S.tent(rad)
        return BI.comb(name, lo, hi), None, None
    if "scheme" in obj:
        s = parse_scheme(obj["scheme"])
        if "function" in obj:
            g = parse_function(obj["function"], s)
        else:
            g = S.indicator(parse_window(_need(obj, "window", "comb"), s), s.internal)
        return S.weighted_comb(s, g, _region(obj), float(obj.get("zero_tol", 0.0)), workers), s, g
    if "pointset" in obj:
        p, s, w = parse_pointset(obj["pointset"], workers)
        return p.as_comb(), s, (S.indicator(w, s.internal) if w is not None else None)
    raise ConfigError("comb needs 'builtin', 'scheme' or 'pointset'")


# ---------------------------------------------------------------------------
# output


def _clean(o):
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, np.ndarray):
        return _clean(o.tolist())
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, (float, np.floating)):
        f = float(o)
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        if math.isnan(f):
            return "nan"
        return f
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, Box):
        return o.to_json()
    return o


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


class Run:
    def __init__(self, command: str, cfg: dict, out: str, threads: int, seed: int, tol: Optional[float]):
        self.command, self.cfg, self.out = command, cfg, out
        self.threads, self.seed, self.tol = threads, seed, tol
        self.files: Dict[str, str] = {}
        self.notes: List[str] = []
        os.makedirs(out, exist_ok=True)

    def write(self, name: str, text: str) -> None:
        path = os.path.join(self.out, name)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.files[name] = hashlib.sha256(text.encode()).hexdigest()

    def manifest(self, status: str, extra: Optional[dict] = None) -> None:
        canon = json.dumps(self.cfg, sort_keys=True, separators=(",", ":"))
        tols = dict(DEFAULT.__dict__)
        if self.tol is not None:
            tols["command"] = self.tol
        m = {
            "command": self.command,
            "config_sha256": hashlib.sha256(canon.encode()).hexdigest(),
            "config": self.cfg,
            "seed": self.seed,
            "tolerances": tols,
            "versions": {"cutproject": __version__, "numpy": np.__version__},
            "files": dict(sorted(self.files.items())),
            "status": status,
            "notes": self.notes,
        }
        if extra:
            m.update(extra)
        path = os.path.join(self.out, "manifest.json")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps(m))


# ---------------------------------------------------------------------------
# commands


def cmd_generate(run: Run) -> int:
    cfg = run.cfg
    s = parse_scheme(_need(cfg, "scheme"))
    region = parse_box(_need(cfg, "region"), s.dim)
    if "function" in cfg:
        c = S.weighted_comb(s, parse_function(cfg["function"], s), region, float(cfg.get("zero_tol", 0.0)),
                            run.threads)
        run.write("comb.csv", c.to_csv())
        n = len(c)
    else:
        p = S.model_set(s, parse_window(_need(cfg, "window"), s), region, run.threads)
        run.write("points.csv", p.to_csv())
        n = len(p)
    if n == 0:
        msg = "empty output: the window selects no lattice point in the region"
        warnings.warn(msg, RuntimeWarning, stacklevel=1)
        run.notes.append(msg)
    run.manifest("pass", {"calibration": s.calibration, "count": n, "scheme": s.to_json()})
    return EXIT_PASS


def cmd_verify_meyer(run: Run) -> int:
    cfg = run.cfg
    p, _, _ = parse_pointset(_need(cfg, "pointset"), run.threads)
    k_box = parse_box(cfg["k_box"], p.dim) if "k_box" in cfg else None
    rep = PS.meyer_test(p, k_box, cfg.get("margin"), float(cfg.get("threshold", DEFAULT.discreteness)),
                        run.tol if run.tol is not None else 1e-7)
    run.write("meyer.json", dumps(rep.to_json()))
    run.write("meyer.txt", rep.table() + "\n")
    code = {"pass": EXIT_PASS, "fail": EXIT_FAIL}.get(rep.verdict, EXIT_DATA)
    run.manifest(rep.verdict)
    return code


def cmd_almost_periods(run: Run) -> int:
    cfg = run.cfg
    if "classify" in cfg:
        p, _, _ = parse_pointset(cfg["classify"], run.threads)
        sb = parse_box(cfg["search_region"], p.dim) if "search_region" in cfg else None
        cl = CB.classify_dirac_comb(p, float(_need(cfg, "eps")), sb, run.threads)
        run.write("classification.json", dumps(cl.to_json()))
        run.manifest(cl.kind)
        return EXIT_PASS
    c, _, _ = parse_comb(_need(cfg, "comb"), run.threads)
    norm = cfg.get("norm", "sup")
    kind = ("k", parse_box(norm["k"], c.dim)) if isinstance(norm, dict) else norm
    sr = parse_box(cfg["search_region"], c.dim) if "search_region" in cfg else None
    br = parse_box(cfg["base_region"], c.dim) if "base_region" in cfg else None
    ap = CB.almost_periods(c, float(_need(cfg, "eps")), kind, sr, br, workers=run.threads)
    run.write("almost_periods.csv", ap.to_csv())
    run.write("almost_periods.json", dumps(ap.metadata()))
    if ap.warning:
        run.notes.append(ap.warning)
    run.manifest("pass")
    return EXIT_PASS


def cmd_reconstruct(run: Run) -> int:
    cfg = run.cfg
    c, s, _ = parse_comb(_need(cfg, "comb"), run.threads)
    grid = [float(e) for e in _need(cfg, "eps_grid")]
    sr = parse_box(cfg["search_region"], c.dim) if "search_region" in cfg else None
    ref = s if cfg.get("reference", True) and s is not None and isinstance(s.internal, G.Euclidean) else None
    fam, rep = BM.reconstruct(c, grid, sr, ref, workers=run.threads)
    fam_dir = os.path.join(run.out, "family")
    fam.save(fam_dir)
    for name in sorted(os.listdir(fam_dir)):
        with open(os.path.join(fam_dir, name), encoding="utf-8") as fh:
            run.files[f"family/{name}"] = hashlib.sha256(fh.read().encode()).hexdigest()
    run.write("reconstruction.json", dumps(rep.to_json()))
    ok = rep.axioms.passed and (rep.reference is None or all(v.get("contained", True) for v in rep.reference.values()))
    run.manifest("pass" if ok else "fail")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_eps_dual(run: Run) -> int:
    cfg = run.cfg
    p, _, _ = parse_pointset(_need(cfg, "pointset"), run.threads)
    eps = float(_need(cfg, "eps"))
    fr = parse_box(_need(cfg, "freq_region"), p.dim)
    pitch = float(cfg.get("pitch", 1e-3))
    cs = ED.eps_dual(p, eps, fr, pitch, bool(cfg.get("refine", p.dim == 1)), run.threads)
    run.write("character_set.csv", cs.to_csv())
    run.write("character_set.json", dumps(cs.metadata()))
    code = EXIT_PASS
    if cfg.get("checks"):
        rep = ED.dual_inclusion_checks(p, eps, fr, pitch, workers=run.threads)
        run.write("inclusions.json", dumps(rep.to_json()))
        code = EXIT_PASS if rep.passed else EXIT_FAIL
    run.manifest("pass" if code == EXIT_PASS else "fail")
    return code


def _candidates(cfg: dict, c: WeightedComb, s: Optional[S.SchemeSpec]):
    cand = cfg.get("candidates", {"grid": {"region": [-3, 3], "pitch": 0.5}})
    coords = None
    if "dual" in cand:
        if s is None:
            raise ConfigError("dual candidates need a comb built from a scheme")
        d = cand["dual"]
        k, coords, _ = DF.dual_candidates(s, parse_box(_need(d, "freq_box", "dual"), c.dim), float(d.get("star_bound", 1.0)))
        source = "dual-scheme"
    elif "grid" in cand:
        d = cand["grid"]
        k = ED.frequency_grid(parse_box(_need(d, "region", "grid"), c.dim), float(_need(d, "pitch", "grid")))
        source = "grid"
    elif "list" in cand:
        k = np.asarray(cand["list"], dtype=float).reshape(-1, c.dim)
        source = "list"
    else:
        raise ConfigError("candidates need 'dual', 'grid' or 'list'")
    return k, coords, source


def cmd_diffract(run: Run) -> int:
    cfg = run.cfg
    c, s, g = parse_comb(_need(cfg, "comb"), run.threads)
    box = parse_box(cfg["box"], c.dim) if "box" in cfg else c.region
    k, coords, source = _candidates(cfg, c, s)
    t = DF.diffraction_table(c, k, box, coords, s if coords is not None else None, g, source, run.threads)
    run.write("diffraction.csv", t.to_csv())
    run.write("diffraction.dat", t.to_gnuplot())
    report = {"table": t.metadata()}
    if t.lookup(np.zeros((1, t.dim)))[0] >= 0:
        report["gamma0"] = t.gamma0()
    ok = True
    if "control" in cfg:
        ctl = np.asarray(cfg["control"], dtype=float).reshape(-1, c.dim)
        report["control_intensities"] = (np.abs(DF.fourier_bohr_many(c, ctl, box, run.threads)) ** 2).tolist()
    if cfg.get("krein"):
        kr = DF.krein_check(t, slack=run.tol if run.tol is not None else 0.02)
        report["krein"] = kr.to_json()
        ok &= kr.passed
    for a, b in cfg.get("inclusions", []):
        r = DF.bragg_inclusion_check(t, float(a), float(b))
        report.setdefault("inclusions", []).append(r.to_json())
        ok &= r.passed
    run.write("diffraction.json", dumps(report))
    run.manifest("pass" if ok else "fail")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_density(run: Run) -> int:
    cfg = run.cfg
    p, s, w = parse_pointset(_need(cfg, "pointset"), run.threads)
    bx = cfg.get("boxes", {})
    if "half_width" in bx:
        seq = DF.BoxSequence.up_to(float(bx["half_width"]), int(bx.get("n", 6)), p.dim)
    else:
        seq = DF.BoxSequence.centered_cubes(int(bx.get("n", 6)), p.dim, int(bx.get("start", 0)))
    rep = DF.density_bounds(p, seq, int(cfg.get("translations", 50)), run.seed,
                            run.tol if run.tol is not None else 0.01, s, w)
    run.write("density.json", dumps(rep.to_json()))
    ok = rep.sandwich is not False
    run.manifest("pass" if ok else "fail")
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_visible_points(run: Run) -> int:
    cfg = run.cfg
    limits = {int(k): int(v) for k, v in cfg.get("block_limits", {"2": 1000, "3": 1000}).items()}
    rep = DF.visible_points(int(cfg.get("N", 2000)), limits)
    run.write("visible_points.json", dumps(rep.to_json()))
    ok = rep.crt_verified
    run.manifest("pass" if ok else "fail")
    return EXIT_PASS if ok else EXIT_FAIL


COMMANDS: Dict[str, Callable[[Run], int]] = {
    "generate": cmd_generate,
    "verify-meyer": cmd_verify_meyer,
    "almost-periods": cmd_almost_periods,
    "reconstruct": cmd_reconstruct,
    "eps-dual": cmd_eps_dual,
    "diffract": cmd_diffract,
    "density": cmd_density,
    "visible-points": cmd_visible_points,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cutproject", description="cut-and-project schemes, model sets and diffraction")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON config file")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--threads", type=int, default=1, help="worker threads (outputs do not depend on it)")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled translations")
    common.add_argument("--tol", type=float, default=None, help="command tolerance override")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.tol is not None and not args.tol > 0:
            raise ConfigError("--tol must be positive")
        cfg = load_config(args.config)
        run = Run(args.command, cfg, args.out, args.threads, args.seed, args.tol)
        return COMMANDS[args.command](run)
    except (ConfigError, ArgumentError, CatalogError, SpecMismatchError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (InsufficientDataError, WitnessUnavailableError, EnumerationBoundError) as e:
        print(f"insufficient data: {e}", file=sys.stderr)
        return EXIT_DATA
    except CutProjectError as e:
        print(f"failure: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

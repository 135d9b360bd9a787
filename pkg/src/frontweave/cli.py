"""Command-line front end: ``frontweave run|converge|oracle|selftest``.

Exit codes: 0 success, 1 selftest failure, 2 usage error or unknown
example, 3 refine verdict from the sign test, 4 bad configuration.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .engine import EngineConfig
from .registry import NAMES, UnknownExampleError, get_example
from .weaving import RefineError

EXIT_USAGE = 2
EXIT_REFINE = 3
EXIT_CONFIG = 4

FAIL_HEADER = ["i", "j", "x", "y", "from_i", "from_j", "from_psi", "attempts"]
RUN_HEADER = ["i", "j", "x", "y", "psi", "nx", "ny", "nt", "orient", "source", "attempts"]


class ConfigError(ValueError):
    pass


def fmt(v) -> str:
    """Shortest round-trip text for floats (``inf`` for infinity)."""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _coerce(text: str):
    low = text.strip().lower()
    if low in ("none", ""):
        return None
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text.strip()


def parse_config(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    allowed = set(EngineConfig.field_names())
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in allowed:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = _coerce(value)
    return out


def gather_overrides(args) -> dict:
    """Config file values, then ``--set`` pairs, then dedicated flags."""
    kw = {}
    if getattr(args, "config", None):
        kw.update(parse_config(Path(args.config).read_text(encoding="utf-8")))
    for pair in getattr(args, "set", None) or []:
        kw.update(parse_config(pair))
    if getattr(args, "record_sideways", False):
        kw["record_sideways"] = True
    return kw


def _write_csv(path, header, rows) -> None:
    out = sys.stdout if path in (None, "-") else open(path, "w", encoding="utf-8", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    finally:
        if out is not sys.stdout:
            out.close()


def read_csv(path) -> tuple:
    """Header and rows with numeric fields parsed back to int/float."""
    with open(path, encoding="utf-8", newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[_parse_cell(c) for c in row] for row in r]
    return header, rows


def _parse_cell(c: str):
    try:
        return int(c)
    except ValueError:
        pass
    try:
        return float(c)
    except ValueError:
        return c


def point_row(p) -> list:
    n = p.normal3
    return [p.i, p.j, float(p.x), float(p.y), float(p.psi), float(n[0]), float(n[1]), float(n[2]),
            p.orient, p.source, p.attempts]


def _manifest(args, command: str, overrides: dict, outputs: list) -> None:
    if not outputs or outputs[0] in (None, "-"):
        return
    man = {
        "command": command,
        "example": args.example,
        "n": getattr(args, "n", None),
        "grids": getattr(args, "grids", None),
        "config": overrides,
        "outputs": outputs,
        "seed": getattr(args, "seed", None),
        "version": __version__,
    }
    Path(str(outputs[0]) + ".manifest.json").write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")


# -- commands -----------------------------------------------------------------
def cmd_run(args) -> int:
    from .engine import run

    ex = get_example(args.example)
    kw = gather_overrides(args)
    cfg = ex.config(args.n, **kw)
    pts, eng = run(ex.initial, ex.F, cfg, return_engine=True)
    _write_csv(args.out, RUN_HEADER, (point_row(p) for p in pts))
    if args.record_sideways and eng is not None and args.out not in (None, "-"):
        _write_csv(str(args.out) + ".sideways.csv", ["x", "y", "t", "rep"], eng.log.sideways_points)
    if eng is not None:
        g = cfg.grid
        fails = [[i, j, float(g.x(i)), float(g.y(j)), a, b, float(psi), 3] for i, j, a, b, psi in eng.log.failures]
        if args.out not in (None, "-"):
            # failed rescues leave no accepted point; they are listed here instead
            _write_csv(str(args.out) + ".failures.csv", FAIL_HEADER, fails)
        for f in eng.log.failures:
            logging.getLogger("frontweave").info("rescue failed at (%d, %d) from (%d, %d) psi=%r", *f)
        print(f"{len(pts)} points, {eng.log.rescues} rescues, {len(eng.log.failures)} failures", file=sys.stderr)
    _manifest(args, "run", kw, [args.out])
    return 0


def cmd_converge(args) -> int:
    from .reference import OracleCloud
    from .study import example_oracle, patch_sweep, sweep

    get_example(args.example)
    grids = [int(g) for g in args.grids.split(",")]
    kw = gather_overrides(args)
    if args.patch:
        rows = patch_sweep(args.example, grids)
        detail = {}
    else:
        cloud = None
        if args.method == 2:
            if args.oracle:
                _, data = read_csv(args.oracle)
                cloud = OracleCloud(data)
            else:
                cloud = example_oracle(args.example, 4 * max(grids))
        rows, detail = sweep(args.example, grids, args.method, args.region, cloud=cloud,
                             keep_points=bool(args.points), **kw)
    _write_csv(args.out, ["n", "h", "L1", "Linf", "slope"], ([r.n, r.h, r.L1, r.Linf, r.slope] for r in rows))
    if args.points and detail:
        _write_points(args, detail, cloud)
    _manifest(args, "converge", kw, [args.out])
    return 0


def _write_points(args, detail, cloud=None) -> None:
    """Per-point relative errors for shaded renderings."""
    from .exact import InvalidTimeError
    from .reference import NearestIndex, error_method1, error_method2, tag_region

    ex = get_example(args.example)
    turning = ex.notes.get("turning_time")
    index = NearestIndex(cloud.points) if cloud is not None else None
    rows = []
    for n, (errs, pts) in sorted(detail.items()):
        linf = errs[args.region].Linf if args.region in errs else math.nan
        for p in pts:
            reg = tag_region(p, turning)
            if args.region != "global" and reg != args.region:
                continue
            try:
                e = error_method1(p, ex.exact) if index is None else error_method2(p, index)
            except InvalidTimeError:
                continue
            if math.isnan(e):
                continue
            rows.append([n, float(p.x), float(p.y), float(p.psi), reg, e, e / linf if linf > 0 else 0.0])
    _write_csv(args.points, ["n", "x", "y", "psi", "region", "error", "relative"], rows)


def cmd_oracle(args) -> int:
    from .study import example_oracle

    get_example(args.example)
    cloud = example_oracle(args.example, args.n)
    _write_csv(args.out, ["x", "y", "t"], (map(float, row) for row in cloud.points))
    _manifest(args, "oracle", {}, [args.out])
    return 0


def cmd_selftest(args) -> int:
    import random

    from . import _pykernels, kernels
    from .engine import run
    from .reference import NearestIndex

    rng = random.Random(args.seed)
    checks = []
    ok = True
    for _ in range(200):
        pv, pu = rng.uniform(0, 1), rng.uniform(0, 1)
        tv, tu = rng.uniform(0.01, 1), rng.uniform(0.01, 1)
        a = kernels.quadrant_minimize(pv, pu, tv, tu)
        b = _pykernels.quadrant_minimize(pv, pu, tv, tu)
        ok &= a == b
    checks.append(("kernel backends agree", ok))

    ex = get_example("unit")
    cfg = ex.config(40)
    fast = run(ex.initial, ex.F, cfg)
    ref = run(ex.initial, ex.F, ex.config(40, classical=True))
    same = [(p.i, p.j, p.psi) for p in fast] == [(p.i, p.j, p.psi) for p in ref]
    checks.append(("unit speed matches classical marching", same))
    err = max(abs(math.hypot(p.x, p.y) - 0.25 - p.psi) for p in fast)
    checks.append((f"unit speed error {err:.4f} <= 2h", err <= 2 * cfg.grid.h))

    import numpy as np

    g = np.random.default_rng(args.seed)
    idx = NearestIndex(g.random((5000, 3)))
    qs = g.random((50, 3))
    checks.append(("nearest index equals scan", all(idx.query(q) == idx.brute(q) for q in qs)))

    for name, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'} {name}")
    return 0 if all(p for _, p in checks) else 1


# -- entry point ------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frontweave", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, need_n=True):
        p.add_argument("--example", required=True, help=f"one of {', '.join(NAMES)}")
        if need_n:
            p.add_argument("--n", type=int, required=True, help="grid intervals per axis")
        p.add_argument("--out", default="-", help="output CSV path (default stdout)")
        p.add_argument("--config", help="key = value file of engine settings")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="engine setting; beats --config")

    p = sub.add_parser("run", help="march an example and write the accepted cloud")
    common(p)
    p.add_argument("--record-sideways", action="store_true", help="also write every sideways sample")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("converge", help="error table over several grids")
    common(p, need_n=False)
    p.add_argument("--grids", required=True, help="comma-separated interval counts, e.g. 40,80,160")
    p.add_argument("--method", type=int, choices=(1, 2), default=1)
    p.add_argument("--region", choices=("bottom", "top", "sideways", "global"), default="global")
    p.add_argument("--oracle", help="oracle CSV for method 2 (generated when absent)")
    p.add_argument("--points", help="per-point relative error CSV")
    p.add_argument("--patch", action="store_true", help="stand-alone sideways patch sweep")
    p.add_argument("--record-sideways", action="store_true")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("oracle", help="fine level-set oracle cloud as x,y,t")
    common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("selftest", help="quick consistency checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest, example=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except UnknownExampleError as e:
        print(f"frontweave: {e.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    except RefineError as e:
        print(f"frontweave: refine the grid: {e}", file=sys.stderr)
        return EXIT_REFINE
    except (ConfigError, ValueError, TypeError) as e:
        print(f"frontweave: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``finsler {eval,distance,geodesic,curvature,verify}``.

Tables go to CSV (RFC 4180, 17 significant digits, metadata as leading
``#`` lines) or JSON.  Exit codes: 0 success, 1 verification failure,
2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import importlib
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, ad
from .bodies import ConvexBody, body_from_spec
from .curvature import Flag, riemann_curvature
from .errors import (BadSpec, BoundaryReached, FinslerError, NumericalFailure,
                     SpecError)
from .funk import (funk_distance, funk_geodesic, funk_metric, hilbert_distance,
                   hilbert_geodesic, hilbert_metric, klein_metric,
                   reverse_funk_distance, reverse_funk_metric,
                   spherical_metric, thread_count)
from .geodesics import integrate_geodesic, integrate_geodesic_span
from .metric import (FinslerMetric, euclidean, fundamental_tensor, minkowski,
                     randers, zermelo)
from .verification import SuiteConfig, run_suite

METRICS = ("funk", "reverse-funk", "hilbert", "klein", "spherical", "euclidean",
           "minkowski", "randers", "zermelo", "custom")


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, row: list):
        self.rows.append(row)

    @staticmethod
    def _fmt(v):
        if isinstance(v, (float, np.floating)):
            return format(float(v), ".17g")
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            return str(int(v))
        return "" if v is None else str(v)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k, v in self.metadata.items():
            buf.write(f"# {k}: {json.dumps(v, sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([self._fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        def clean(v):
            if isinstance(v, (float, np.floating)):
                return float(v) if math.isfinite(v) else None
            if isinstance(v, np.integer):
                return int(v)
            return v
        rows = [{c: clean(v) for c, v in zip(self.columns, r)} for r in self.rows]
        return json.dumps({"metadata": self.metadata, "columns": self.columns, "rows": rows},
                          indent=2, sort_keys=False) + "\n"


# ---- argument parsing helpers ---------------------------------------------

def _parse_vector(text: str, what: str) -> np.ndarray:
    try:
        vals = json.loads(text) if text.strip().startswith("[") else [float(t) for t in text.split(",")]
        arr = np.asarray(vals, float)
    except (ValueError, json.JSONDecodeError) as exc:
        raise BadSpec(f"cannot parse {what} {text!r}: {exc}") from exc
    if arr.ndim != 1 or arr.size == 0:
        raise BadSpec(f"{what} must be a flat list of numbers")
    return arr


def _parse_points(text: str) -> np.ndarray:
    src = text
    if not text.lstrip().startswith("["):
        try:
            with open(text) as fh:
                src = fh.read()
        except OSError as exc:
            raise BadSpec(f"cannot read points file {text!r}: {exc}") from exc
    try:
        pts = np.asarray(json.loads(src), float)
    except json.JSONDecodeError as exc:
        raise BadSpec(f"malformed JSON points: {exc.msg}", exc.lineno, exc.colno) from exc
    except ValueError as exc:
        raise BadSpec(f"points must be a list of equal-length numeric lists: {exc}") from exc
    if pts.ndim != 2:
        raise BadSpec("points must be a list of equal-length numeric lists")
    return pts


def _params(args) -> dict:
    if not args.metric_params:
        return {}
    try:
        p = json.loads(args.metric_params)
    except json.JSONDecodeError as exc:
        raise BadSpec(f"malformed --metric-params JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    if not isinstance(p, dict):
        raise BadSpec("--metric-params must be a JSON object")
    return p


def build_metric(args) -> tuple[FinslerMetric, ConvexBody | None]:
    body = body_from_spec(args.body) if args.body else None
    params = _params(args)
    n = body.dim if body is not None else args.dim
    kind = args.metric

    def need_body():
        if body is None:
            raise BadSpec(f"metric {kind!r} needs --body")
        return body

    if kind == "funk":
        return funk_metric(need_body()), body
    if kind == "reverse-funk":
        return reverse_funk_metric(need_body()), body
    if kind == "hilbert":
        return hilbert_metric(need_body()), body
    if kind == "klein":
        return klein_metric(n), body
    if kind == "spherical":
        return spherical_metric(n), body
    if kind == "euclidean":
        return euclidean(n), body
    if kind == "minkowski":
        return minkowski(need_body()), body
    if kind == "randers":
        quad = params.get("quad", np.eye(n).tolist())
        form = params.get("form")
        if form is None:
            raise BadSpec("randers needs metric-params {'form': [...]} (and optionally 'quad')")
        return randers(np.asarray(quad, float), np.asarray(form, float), n), body
    if kind == "zermelo":
        if "wind" in params:
            Z = np.asarray(params["wind"], float)
            wind = lambda x: Z
        elif "wind_scale" in params:
            c = float(params["wind_scale"])
            wind = lambda x: c * x
        else:
            raise BadSpec("zermelo needs metric-params {'wind': [...]} or {'wind_scale': c}")
        base = euclidean(n) if body is None else minkowski(body)
        return zermelo(base, wind), body
    if kind == "custom":
        target = params.get("factory")
        if not target or ":" not in target:
            raise BadSpec("custom metric needs metric-params {'factory': 'module:function'}")
        mod, func = target.split(":", 1)
        try:
            factory = getattr(importlib.import_module(mod), func)
        except (ImportError, AttributeError) as exc:
            raise BadSpec(f"cannot load custom metric factory {target!r}: {exc}") from exc
        kwargs = {k: v for k, v in params.items() if k != "factory"}
        return factory(body, **kwargs) if body is not None else factory(**kwargs), body
    raise BadSpec(f"unknown metric {kind!r}")


def _metadata(args, metric: FinslerMetric | None) -> dict:
    meta = {"command": args.command, "version": __version__, "seed": args.seed, "tol": args.tol}
    if metric is not None:
        meta["metric"] = metric.name
    for key in ("metric_params", "body", "points", "x", "xi", "samples"):
        val = getattr(args, key, None)
        if val is not None:
            meta[key] = val
    return meta


def _pmap(fn, items):
    with ThreadPoolExecutor(thread_count()) as pool:
        return list(pool.map(fn, items))


def _probes(args, metric, rng):
    """Base points and directions from --x/--xi or random sampling."""
    n = metric.dim
    if args.x is not None:
        x = _parse_vector(args.x, "--x")
        xi = _parse_vector(args.xi, "--xi") if args.xi else np.eye(n)[0]
        if x.size != n or xi.size != n:
            raise BadSpec(f"--x and --xi must have {n} entries")
        return [(x, xi)]
    dom = metric.domain
    if dom is not None and dom.bounded:
        xs = dom.sample_interior(rng, args.samples)
    else:
        xs = rng.uniform(-0.5, 0.5, size=(args.samples, n))
    return [(x, rng.normal(size=n)) for x in xs]


def _err(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


# ---- commands ------------------------------------------------------------

def cmd_eval(args) -> tuple[ResultTable, int]:
    metric, _ = build_metric(args)
    rng = np.random.default_rng(args.seed)
    n = metric.dim
    cols = [f"x{i}" for i in range(n)] + [f"xi{i}" for i in range(n)] + ["F"]
    cols += [f"g{i}{j}" for i in range(n) for j in range(n)] + ["strongly_convex", "error"]
    table = ResultTable(cols, metadata=_metadata(args, metric))

    def row(probe):
        x, xi = probe
        try:
            F = metric(x, xi)
        except FinslerError as exc:
            return [*x, *xi, math.nan] + [math.nan] * n * n + ["", _err(exc)]
        try:
            ft = fundamental_tensor(metric, x, xi)
            return [*x, *xi, F, *ft.g.ravel(), int(ft.strongly_convex), ""]
        except FinslerError as exc:
            return [*x, *xi, F] + [math.nan] * n * n + ["", _err(exc)]

    for r in _pmap(row, _probes(args, metric, rng)):
        table.add(r)
    return table, 0


def cmd_distance(args) -> tuple[ResultTable, int]:
    if not args.body:
        raise BadSpec("distance needs --body")
    body = body_from_spec(args.body)
    if args.points:
        pts = _parse_points(args.points)
    else:
        pts = body.sample_interior(np.random.default_rng(args.seed), args.samples)
    if pts.shape[1] != body.dim:
        raise BadSpec(f"points must have dimension {body.dim}")
    cols = ["i", "j", "funk", "reverse_funk", "hilbert", "hilbert_symmetry", "funk_minus_reverse_swapped", "error"]
    meta = _metadata(args, None)
    meta["metric"] = "funk/reverse-funk/hilbert"
    table = ResultTable(cols, metadata=meta)
    pairs = [(i, j) for i in range(len(pts)) for j in range(len(pts)) if i != j]

    def row(ij):
        i, j = ij
        p, q = pts[i], pts[j]
        try:
            f = funk_distance(body, p, q)
            r = reverse_funk_distance(body, p, q)
            rs = reverse_funk_distance(body, q, p)
            if body.bounded:
                h = hilbert_distance(body, p, q)
                hs = h - hilbert_distance(body, q, p)
            else:
                h = hs = math.nan
            return [i, j, f, r, h, hs, f - rs, ""]
        except FinslerError as exc:
            return [i, j, math.nan, math.nan, math.nan, math.nan, math.nan, _err(exc)]

    for r in _pmap(row, pairs):
        table.add(r)
    return table, 0


def _parse_range(text: str) -> tuple[float, float]:
    try:
        a, b = (float(t) for t in text.split(","))
    except ValueError as exc:
        raise BadSpec(f"--s-range must be 'a,b', got {text!r}") from exc
    if not a <= 0 <= b:
        raise BadSpec("--s-range must contain 0")
    return a, b


def cmd_geodesic(args) -> tuple[ResultTable, int]:
    metric, body = build_metric(args)
    n = metric.dim
    if args.x is None:
        raise BadSpec("geodesic needs --x (and --xi)")
    p = _parse_vector(args.x, "--x")
    xi = _parse_vector(args.xi, "--xi") if args.xi else np.eye(n)[0]
    if p.size != n or xi.size != n:
        raise BadSpec(f"--x and --xi must have {n} entries")
    if args.unit_speed:
        xi = xi / metric(p, xi)
    s_lo, s_hi = _parse_range(args.s_range)
    kind = metric.info.get("kind")
    oracle = None
    if kind == "hilbert":
        oracle = hilbert_geodesic(body, p, xi)
    elif kind == "funk" and s_lo == 0:
        oracle = funk_geodesic(body, p, xi)
    elif metric.x_independent:
        oracle = lambda s: p + s * xi
    tol = args.tol if args.tol is not None else 1e-9
    cols = ["s"] + [f"x{i}" for i in range(n)] + [f"y{i}" for i in range(n)] + ["F", "deviation", "error"]
    table = ResultTable(cols, metadata=_metadata(args, metric))
    status, note = 0, ""
    try:
        tr = integrate_geodesic_span(metric, p, xi, s_lo, s_hi, rtol=tol)
    except BoundaryReached as exc:
        tr, note = exc.trace, _err(exc)
    table.metadata["integrator"] = {"rtol": tol} | ({k: int(v) for k, v in tr.stats.items()} if tr else {})
    if tr is not None:
        for s, x, y, sp in zip(tr.s, tr.x, tr.y, tr.speed):
            dev = float(np.linalg.norm(x - oracle(s))) if oracle is not None else math.nan
            table.add([s, *x, *y, sp, dev, ""])
        table.metadata["speed_drift"] = tr.speed_drift
    if note:
        last = float(tr.s[-1]) if tr is not None and len(tr.s) else math.nan
        table.add([last] + [math.nan] * (2 * n + 2) + [note])
    return table, status


def cmd_curvature(args) -> tuple[ResultTable, int]:
    metric, _ = build_metric(args)
    rng = np.random.default_rng(args.seed)
    n = metric.dim
    probes = [(x, y, rng.normal(size=n)) for x, y in _probes(args, metric, rng)]
    cols = ([f"x{i}" for i in range(n)] + [f"y{i}" for i in range(n)] + [f"w{i}" for i in range(n)]
            + ["K", "ricci", "error"])
    table = ResultTable(cols, metadata=_metadata(args, metric))
    method = args.method

    def row(probe):
        x, y, w = probe
        try:
            Rc = riemann_curvature(metric, x, y, method=method)
            return [*x, *y, *w, Rc.flag(w), Rc.ricci(), ""]
        except NumericalFailure:
            raise
        except FinslerError as exc:
            return [*x, *y, *w, math.nan, math.nan, _err(exc)]

    rows = _pmap(row, probes)
    for r in rows:
        table.add(r)
    K = np.array([r[3 * n] for r in rows if not r[-1]])
    if K.size:
        table.metadata["summary"] = {"mean": float(K.mean()), "min": float(K.min()),
                                     "max": float(K.max()), "spread": float(K.max() - K.min())}
    return table, 0


def cmd_verify(args) -> tuple[dict, int]:
    only = None
    if args.only:
        only = {int(t) for t in args.only.split(",")}
    if args.seed is None:
        args.seed = SuiteConfig.seed
    cfg = SuiteConfig(seed=args.seed, quick=args.quick, inject_bug=args.inject_bug)
    results = run_suite(cfg, only=only, report=lambda r: print(r.line(), file=sys.stderr, flush=True))
    report = {"version": __version__, "seed": args.seed, "quick": args.quick,
              "inject_bug": args.inject_bug, "passed": all(r.passed for r in results),
              "criteria": [r.as_dict() for r in results]}
    return report, 0 if report["passed"] else 1


# ---- entry point ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="finsler", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--body", help="JSON body spec (inline or file path)")
    common.add_argument("--metric", choices=METRICS, default="funk")
    common.add_argument("--metric-params", help="JSON object with metric parameters")
    common.add_argument("--dim", type=int, default=2, help="dimension when no body is given")
    common.add_argument("--points", help="JSON list of points (inline or file path)")
    common.add_argument("--x", help="base point, e.g. 0.5,0")
    common.add_argument("--xi", help="direction, e.g. 1,0")
    common.add_argument("--samples", type=int, default=10)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default 0; verify: 20240607)")
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("eval", parents=[common], help="Lagrangian and fundamental tensor at probes")
    sub.add_parser("distance", parents=[common], help="pairwise Funk, reverse Funk and Hilbert distances")
    g = sub.add_parser("geodesic", parents=[common], help="integrate the geodesic equation")
    g.add_argument("--s-range", default="0,3",
                   help="parameter interval 'a,b' containing 0; write --s-range=-1,1 for negative a")
    g.add_argument("--unit-speed", action="store_true", help="rescale xi to unit speed first")
    c = sub.add_parser("curvature", parents=[common], help="flag and Ricci curvature at sampled flags")
    c.add_argument("--method", choices=("taylor", "fd"), default=None)
    v = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    v.add_argument("--quick", action="store_true", help="at most 10 samples per check")
    v.add_argument("--inject-bug", action="store_true",
                   help="flip the sign of one curvature term to self-test the suite")
    v.add_argument("--only", help="comma-separated criterion numbers")
    return ap


COMMANDS = {"eval": cmd_eval, "distance": cmd_distance, "geodesic": cmd_geodesic,
            "curvature": cmd_curvature, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        args.format = "json"
    elif args.seed is None:
        args.seed = 0
    try:
        result, code = COMMANDS[args.command](args)
    except SpecError as exc:
        print(f"finsler: invalid input: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"finsler: numerical failure: {_err(exc)}", file=sys.stderr)
        return 3
    except FinslerError as exc:
        print(f"finsler: {_err(exc)}", file=sys.stderr)
        return 2
    if isinstance(result, ResultTable):
        text = result.to_csv() if args.format == "csv" else result.to_json()
    else:
        text = json.dumps(result, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: tail, sample, gof, index, domvar, meander, demo.  Series go out
as CSV with a mandatory header row, paths as JSON lines, reports as single
JSON objects; every float is printed with 17 significant digits so reruns
with the same seed and flags are byte-identical.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from .cones import HalfLine1D, Wedge2D, meander_index, parse_cone
from .exact import MassMap, TailSeries, endpoint_law, exact_tail, sandwich_check
from .gof import boundary_occupation, endpoint_gof, rayleigh_check
from .meander import MeanderEndpointLaw
from .sampling import NormalizedPath, PathEnsemble, rejection_sample, splitting_sample
from .streams import child_rng
from .tails import dominated_variation_stat, estimate_index
from .walks import parse_walk, srw1d, srw2d, srw3d


def _fmt(x) -> str:
    """Render one value for CSV/JSON output; floats get 17 significant digits."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return json.dumps(x)


def _json_obj(pairs) -> str:
    """A flat JSON object with controlled float formatting."""
    parts = []
    for key, val in pairs:
        if isinstance(val, (list, tuple)):
            body = ", ".join(
                v if isinstance(v, str) and v.startswith("{") else _fmt(v)
                for v in val)
            parts.append(f"{json.dumps(key)}: [{body}]")
        elif val is None:
            parts.append(f"{json.dumps(key)}: null")
        else:
            parts.append(f"{json.dumps(key)}: {_fmt(val)}")
    return "{" + ", ".join(parts) + "}"


def _default_threads() -> int:
    env = os.environ.get("CONEWALK_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def _report_json(report) -> str:
    return _json_obj([
        ("name", report.name),
        ("statistic", report.statistic),
        ("threshold", report.threshold),
        ("sample_size", report.sample_size),
        ("passed", report.passed),
        ("level", report.level),
        ("note", report.note),
    ])


# -- tail ----------------------------------------------------------------------


def _write_tail_csv(fh, series: TailSeries):
    fh.write("n,p,err_lo,err_hi\n")
    gaps = series.rel_gap if series.rel_gap is not None else np.zeros(series.n_max + 1)
    for n in range(series.n_max + 1):
        p = series.value(n)
        fh.write(f"{n},{_fmt(p)},{_fmt(p)},{_fmt(p * (1.0 + gaps[n]))}\n")


def _write_endpoint_csv(fh, law: MassMap):
    dim = law.points.shape[1]
    cone_spec = law.cone.spec_string() if law.cone is not None else ""
    fh.write(f"# walk={law.walk} cone={cone_spec} n={law.n} "
             f"sigma={_fmt(law.sigma)} rel_gap={_fmt(law.rel_gap)}\n")
    cols = ["x", "y", "z"][:dim]
    fh.write(",".join(cols) + ",mass\n")
    for point, mass in zip(law.points, law.mass):
        coords = ",".join(str(int(c)) for c in point)
        fh.write(f"{coords},{_fmt(mass)}\n")


def _cmd_tail(args) -> int:
    walk = parse_walk(args.walk)
    cone = parse_cone(args.cone)
    series = exact_tail(walk, cone, args.nmax, truncation=args.trunc)
    fh, close = _open_out(args.out)
    try:
        _write_tail_csv(fh, series)
    finally:
        if close:
            fh.close()
    if args.endpoints:
        law = endpoint_law(walk, cone, args.nmax, truncation=args.trunc)
        with open(args.endpoints, "w", encoding="utf-8", newline="\n") as efh:
            _write_endpoint_csv(efh, law)
    return 0


def _read_tail_csv(path) -> TailSeries:
    ns, ps, uppers = [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        header = None
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
                if header[:2] != ["n", "p"]:
                    raise ValueError(f"{path!r} is not a tail CSV (header {header})")
                continue
            cells = line.split(",")
            ns.append(int(cells[0]))
            ps.append(float(cells[1]))
            uppers.append(float(cells[3]) if len(cells) > 3 else float(cells[1]))
    if not ns:
        raise ValueError(f"{path!r} holds no tail rows")
    if ns != list(range(len(ns))):
        raise ValueError(f"{path!r} must list n = 0, 1, 2, ... without gaps")
    ps_arr = np.asarray(ps)
    uppers_arr = np.asarray(uppers)
    with np.errstate(divide="ignore", invalid="ignore"):
        gap = np.where(ps_arr > 0.0, uppers_arr / ps_arr - 1.0, 0.0)
    provenance = "truncated" if np.any(gap > 0.0) else "exact"
    return TailSeries.from_values(ps_arr, provenance=provenance,
                                  rel_gap=np.maximum(gap, 0.0))


# -- sample --------------------------------------------------------------------


def _write_paths_jsonl(fh, ens: PathEnsemble):
    scale = ens.sigma * math.sqrt(ens.n)
    for path in ens.paths:
        pts = np.rint(path.values * scale).astype(np.int64)
        body = ", ".join("[" + ", ".join(str(int(c)) for c in row) + "]"
                         for row in pts)
        fh.write(f'{{"n": {ens.n}, "sigma": {_fmt(ens.sigma)}, '
                 f'"points": [{body}]}}\n')


def _cmd_sample(args) -> int:
    walk = parse_walk(args.walk)
    cone = parse_cone(args.cone)
    if args.method == "rejection":
        ens = rejection_sample(walk, cone, args.n, args.count,
                               seed=args.seed, threads=args.threads)
    else:
        ens = splitting_sample(walk, cone, args.n, population=args.count,
                               seed=args.seed, threads=args.threads)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        _write_paths_jsonl(fh, ens)
    levels = [_json_obj([("checkpoint", lv.checkpoint),
                         ("fraction", lv.fraction),
                         ("survivors", lv.survivors)]) for lv in ens.levels]
    print(_json_obj([
        ("method", ens.method),
        ("walk", args.walk),
        ("cone", cone.spec_string()),
        ("n", ens.n),
        ("count", len(ens.paths)),
        ("seed", ens.seed),
        ("tail_estimate", ens.tail_estimate),
        ("stderr", ens.tail_stderr),
        ("ess", ens.ess),
        ("attempts", ens.attempts),
        ("levels", levels),
        ("out", args.out),
    ]))
    return 0


# -- gof -----------------------------------------------------------------------


def _read_paths_jsonl(path, cone):
    paths = []
    n = sigma = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            n, sigma = int(rec["n"]), float(rec["sigma"])
            values = np.asarray(rec["points"], dtype=np.float64)
            values /= sigma * math.sqrt(n)
            paths.append(NormalizedPath(values, n=n, sigma=sigma))
    if not paths:
        raise ValueError(f"{path!r} holds no paths")
    return PathEnsemble(paths, "loaded", 0.0, 0.0, seed=0, n=n, sigma=sigma,
                        cone=cone, ess=float(len(paths)))


def _read_endpoint_csv(path, cone=None) -> MassMap:
    meta = {}
    points, masses = [], []
    with open(path, "r", encoding="utf-8") as fh:
        header = None
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if "=" in token:
                        key, _, val = token.partition("=")
                        meta[key] = val
                continue
            if header is None:
                header = line.split(",")
                continue
            cells = line.split(",")
            points.append([int(c) for c in cells[:-1]])
            masses.append(float(cells[-1]))
    if not points:
        raise ValueError(f"{path!r} holds no endpoint rows")
    if cone is None and meta.get("cone"):
        cone = parse_cone(meta["cone"])
    return MassMap(np.asarray(points, dtype=np.int64), np.asarray(masses),
                   n=int(meta["n"]), sigma=float(meta["sigma"]),
                   walk=meta.get("walk", ""), cone=cone,
                   rel_gap=float(meta.get("rel_gap", 0.0)))


def _cmd_gof(args) -> int:
    cone = parse_cone(args.cone) if args.cone else None
    if args.paths:
        obj = _read_paths_jsonl(args.paths, cone)
    else:
        obj = _read_endpoint_csv(args.exact, cone)
    cone = obj.cone
    if isinstance(obj, MassMap):
        dim = obj.points.shape[1]
    else:
        dim = obj.paths[0].dim
    reports = []
    if isinstance(cone, HalfLine1D) or (cone is None and dim == 1):
        if args.statistic is not None and isinstance(obj, MassMap):
            reports.append(rayleigh_check(obj, level=args.level,
                                          threshold=args.threshold,
                                          statistic=args.statistic))
        else:
            reports.append(rayleigh_check(obj, level=args.level,
                                          threshold=args.threshold))
    else:
        if not isinstance(cone, Wedge2D):
            raise ValueError("gof needs a planar wedge or half-line cone")
        alpha = args.alpha if args.alpha is not None else meander_index(cone)
        law = MeanderEndpointLaw(alpha)
        radial, angular = endpoint_gof(obj, law, level=args.level,
                                       threshold=args.threshold,
                                       statistic=args.statistic)
        reports.extend([radial, angular])
    lines = [_report_json(r) for r in reports]
    if args.eps is not None:
        if not isinstance(obj, PathEnsemble):
            raise ValueError("boundary occupation needs --paths input")
        rep = boundary_occupation(obj, args.eps)
        lines.append(_json_obj([
            ("name", "boundary_occupation"),
            ("mean_fraction", rep.mean_fraction),
            ("eps", rep.eps),
            ("per_path", list(rep.per_path)),
        ]))
    print("[" + ",\n ".join(lines) + "]")
    return 0


# -- index / domvar -------------------------------------------------------------


def _parse_window(text):
    if text is None:
        return None
    lo, _, hi = text.partition(",")
    return int(lo), int(hi)


def _cmd_index(args) -> int:
    series = _read_tail_csv(args.tail)
    method = {"loglog": "loglog_ls", "ratio": "ratio"}[args.method]
    est = estimate_index(series, window=_parse_window(args.window), method=method)
    print(_json_obj([
        ("alpha_hat", est.alpha_hat),
        ("stderr", est.stderr),
        ("window", list(est.window)),
        ("method", est.method),
    ]))
    return 0


def _cmd_domvar(args) -> int:
    series = _read_tail_csv(args.tail)
    window = _parse_window(args.window)
    stat = dominated_variation_stat(series, args.t, window=window)
    lo, hi = window if window else (max(1, series.n_max // 8), series.n_max)
    print(_json_obj([
        ("dominated_variation_stat", stat),
        ("t", args.t),
        ("window", [lo, hi]),
    ]))
    return 0


# -- meander ---------------------------------------------------------------------


def _cmd_meander(args) -> int:
    law = MeanderEndpointLaw(args.alpha)
    if args.cdf:
        if args.at is None:
            raise ValueError("--cdf needs --at X")
        fn = law.radial_cdf if args.cdf == "radial" else law.angular_cdf
        print(_fmt(float(fn(args.at))))
        return 0
    if args.sample:
        if args.seed is None:
            raise ValueError("--sample needs --seed")
        rng = child_rng(args.seed, 0)
        r, theta = law.sample(rng, args.sample)
        fh, close = _open_out(args.out)
        try:
            fh.write("r,theta\n")
            for a, b in zip(r, theta):
                fh.write(f"{_fmt(a)},{_fmt(b)}\n")
        finally:
            if close:
                fh.close()
        return 0
    raise ValueError("meander needs --cdf or --sample")


# -- demos -----------------------------------------------------------------------


def _demo_example1() -> int:
    from .cones import pinched_cone_3d
    walk, cone = srw3d(), pinched_cone_3d()
    series = exact_tail(walk, cone, 30)
    worst = max(abs(series.value(n) - 3.0 ** -n) / 3.0 ** -n for n in range(31))
    print("pinched three-dimensional cone 0 <= x/2 <= y <= 2x, srw3d")
    print("survival pins the walk to the z axis (x = y = 0), 2 moves of 6:")
    print("p(10) = 3^-10 (exact)")
    for n in (1, 5, 10, 20, 30):
        print(f"p({n}) = {_fmt(series.value(n))}  vs 3^-{n} = {_fmt(3.0 ** -n)}")
    print(f"max relative error over n <= 30: {_fmt(worst)}")
    return 0


def _demo_example2() -> int:
    from .cones import pinched_half_cone_3d
    walk, cone = srw3d(), pinched_half_cone_3d()
    series = exact_tail(walk, cone, 1000)
    worst = 0.0
    for n in range(21):
        exact = math.comb(n, n // 2) / 6.0 ** n
        worst = max(worst, abs(series.value(n) - exact) / exact)
    ns = np.arange(100, 1001)
    y = series.log_values[ns] + ns * math.log(3.0)
    slope = float(np.polyfit(np.log(ns), y, 1)[0])
    scaled = math.exp(series.log_values[1000] + 1000 * math.log(3.0))
    print("pinched cone with z >= 0 added: survival pins x = y = 0 and leaves")
    print("a nonnegative simple walk in z, so p(n) = C(n, floor(n/2)) / 6^n")
    print(f"max relative error vs closed form over n <= 20: {_fmt(worst)}")
    print(f"slope of log(3^n p(n)) vs log n over [100, 1000]: {_fmt(slope)}")
    print(f"3^n p(n) * sqrt(pi n) at n = 1000: {_fmt(scaled * math.sqrt(math.pi * 1000))}")
    return 0


def _demo_quarter_plane() -> int:
    from .cones import quarter_plane
    walk, cone = srw2d(), quarter_plane()
    series = exact_tail(walk, cone, 800)
    est = estimate_index(series, window=(100, 800))
    ratio = series.value(800) / series.value(400)
    print("simple walk in the quarter plane, exact sweep to n = 800")
    print(f"p(100) = {_fmt(series.value(100))}, p(800) = {_fmt(series.value(800))}")
    print(f"index estimate over [100, 800]: {_fmt(est.alpha_hat)} "
          f"+- {_fmt(est.stderr)} (limit exponent 1)")
    print(f"p(800) / p(400) = {_fmt(ratio)} (doubling limit 0.5)")
    law = endpoint_law(walk, cone, 400)
    radial, angular = endpoint_gof(law, MeanderEndpointLaw(1.0))
    print(f"endpoint law at n = 400 vs meander law (binned total variation): "
          f"radial {_fmt(radial.statistic)}, angular {_fmt(angular.statistic)}")
    return 0


def _demo_rayleigh() -> int:
    from .cones import half_line
    walk, cone = srw1d(), half_line()
    dists = {}
    for n in (100, 1000):
        law = endpoint_law(walk, cone, n)
        dists[n] = rayleigh_check(law).statistic
    print("positive simple walk endpoints against 1 - exp(-x^2 / 2)")
    print(f"binned distance at n = 100:  {_fmt(dists[100])}")
    print(f"binned distance at n = 1000: {_fmt(dists[1000])}")
    print(f"monotone improvement: {str(dists[1000] < dists[100]).lower()}")
    return 0


def _demo_octant() -> int:
    from .cones import octant
    walk, cone = srw2d(), octant()
    series = exact_tail(walk, cone, 600, truncation=1e-16)
    est = estimate_index(series)
    print("octant 0 <= y <= x, truncated sweep with certified brackets")
    print(f"p(600) in [{_fmt(series.value(600))}, {_fmt(series.upper(600))}]")
    print(f"index estimate over [{est.window[0]}, {est.window[1]}]: "
          f"{_fmt(est.alpha_hat)} +- {_fmt(est.stderr)} (limit exponent 2)")
    report = sandwich_check(cone, 100)
    print(f"sandwich at n = {report.n} (anchor {tuple(report.anchor)}, "
          f"k = {report.k}): {_fmt(report.lower)} <= {_fmt(report.tail_value)} "
          f"<= {_fmt(report.upper)}")
    print(f"lower holds: {str(report.lower_holds).lower()}, "
          f"upper holds: {str(report.upper_holds).lower()}")
    return 0


_DEMOS = {
    "quarter-plane": _demo_quarter_plane,
    "example1": _demo_example1,
    "example2": _demo_example2,
    "rayleigh": _demo_rayleigh,
    "octant": _demo_octant,
}


def _cmd_demo(args) -> int:
    return _DEMOS[args.name]()


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conewalk",
        description="Random walks conditioned to stay in convex cones: "
                    "exact tails, conditioned samplers, and diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_tail = sub.add_parser("tail", help="exact survival series as CSV")
    p_tail.add_argument("--walk", required=True)
    p_tail.add_argument("--cone", required=True)
    p_tail.add_argument("--nmax", type=int, required=True)
    p_tail.add_argument("--trunc", type=float, default=0.0,
                        help="drop conditional mass below this, with certified brackets")
    p_tail.add_argument("--out", default=None, help="CSV path (default stdout)")
    p_tail.add_argument("--endpoints", default=None,
                        help="also write the conditioned endpoint law at nmax to this CSV")
    p_tail.set_defaults(func=_cmd_tail)

    p_sample = sub.add_parser("sample", help="conditioned paths as JSON lines")
    p_sample.add_argument("--walk", required=True)
    p_sample.add_argument("--cone", required=True)
    p_sample.add_argument("--n", type=int, required=True)
    p_sample.add_argument("--count", type=int, required=True,
                          help="paths to keep (rejection) or population size (splitting)")
    p_sample.add_argument("--method", choices=["rejection", "splitting"],
                          default="rejection")
    p_sample.add_argument("--seed", type=int, required=True)
    p_sample.add_argument("--out", required=True)
    p_sample.add_argument("--threads", type=int, default=None)
    p_sample.set_defaults(func=_cmd_sample)

    p_gof = sub.add_parser("gof", help="endpoint goodness-of-fit reports as JSON")
    src = p_gof.add_mutually_exclusive_group(required=True)
    src.add_argument("--paths", help="JSON-lines file from the sample subcommand")
    src.add_argument("--exact", help="endpoint CSV from tail --endpoints")
    p_gof.add_argument("--cone", default=None)
    p_gof.add_argument("--alpha", type=float, default=None,
                       help="meander index (default: from the wedge angle)")
    p_gof.add_argument("--eps", type=float, default=None,
                       help="also report boundary occupation at this tolerance")
    p_gof.add_argument("--level", type=float, default=0.01)
    p_gof.add_argument("--threshold", type=float, default=0.05)
    p_gof.add_argument("--statistic", choices=("tv", "cdf_sup"), default=None,
                       help="binned statistic for exact laws (default tv)")
    p_gof.set_defaults(func=_cmd_gof)

    p_index = sub.add_parser("index", help="tail index estimate from a tail CSV")
    p_index.add_argument("--tail", required=True)
    p_index.add_argument("--window", default=None, help="LO,HI")
    p_index.add_argument("--method", choices=["loglog", "ratio"], default="loglog")
    p_index.set_defaults(func=_cmd_index)

    p_domvar = sub.add_parser("domvar", help="dominated-variation statistic")
    p_domvar.add_argument("--tail", required=True)
    p_domvar.add_argument("--t", type=float, required=True)
    p_domvar.add_argument("--window", default=None, help="LO,HI")
    p_domvar.set_defaults(func=_cmd_domvar)

    p_meander = sub.add_parser("meander", help="meander endpoint law: CDF values or samples")
    p_meander.add_argument("--alpha", type=float, required=True)
    p_meander.add_argument("--cdf", choices=["radial", "angular"], default=None)
    p_meander.add_argument("--at", type=float, default=None)
    p_meander.add_argument("--sample", type=int, default=None)
    p_meander.add_argument("--seed", type=int, default=None)
    p_meander.add_argument("--out", default=None, help="CSV path (default stdout)")
    p_meander.set_defaults(func=_cmd_meander)

    p_demo = sub.add_parser("demo", help="end-to-end worked scenarios")
    p_demo.add_argument("name", choices=sorted(_DEMOS))
    p_demo.set_defaults(func=_cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None) is None and hasattr(args, "threads"):
        args.threads = _default_threads()
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # runtime failures become structured JSON on stderr
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Every command writes its outputs plus a manifest (JSON, ``schema_version``
"1") that records the command and all of its parameters.  ``rerun`` replays
a manifest and reproduces the outputs byte for byte; ``--threads`` only
changes scheduling and is therefore not recorded.

All randomness derives from ``--seed`` through named sub-streams, so that
for example the jitter of a generated set and the probes of a Monte Carlo
weight estimate never share a stream.
"""

import argparse
import json
import math
import sys
import zlib

import numpy as np

from . import __version__
from .experiments import (
    critical_discrepancy,
    critical_rate_check,
    sweep_stable_rate,
    transference_check,
)
from .geometry import ConvexBody, InsufficientExtentError, SamplingSet
from .measures import (
    balayage_check,
    bessel_bound,
    concentration_polynomial,
    frame_bound_A,
    frame_bound_kappa,
    lower_bound_unweighted,
    lower_bound_weighted,
    measure_report,
    measure_V,
    measure_Vstar,
)
from .nugs import error_report, reconstruct, sample_function
from .sampling import gen_grid, gen_jittered, gen_radial, gen_spiral, load_points_csv, save_points_csv
from .spaces import HaarSpace, parse_space
from .weights import WeightedSamples, lattice_weights, voronoi_weights

SCHEMA_VERSION = "1"

__all__ = ["main", "run", "stream_seed"]


def stream_seed(seed, name):
    """Integer seed of the named sub-stream of ``seed``."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(name.encode())])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def _finite(x):
    # JSON has no inf or nan
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _finite(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_finite(v) for v in x]
    return x


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _report(doc, path):
    doc = dict(_finite(doc))
    doc["schema_version"] = SCHEMA_VERSION
    _write_text(path, _dump(doc))


# ---------------------------------------------------------------- commands


def cmd_gen(a):
    if a.kind == "grid":
        s = gen_grid(a.h, a.dim, a.extent)
    elif a.kind == "jittered":
        s = gen_jittered(a.h, a.tau, a.dim, a.extent, stream_seed(a.seed, "gen"))
    elif a.kind == "radial":
        s = gen_radial(a.n_lines, a.step, a.extent)
    else:
        s = gen_spiral(a.pitch, a.arc_step, a.extent)
    if a.out in (None, "-"):
        _write_points(sys.stdout, s.points)
    else:
        save_points_csv(a.out, s.points)
        with open(a.out + ".json", "w") as fh:
            fh.write(_dump({"extent_radius": s.extent_radius, "generator": s.generator,
                            "schema_version": SCHEMA_VERSION}))


def _write_points(fh, pts):
    fh.write(",".join(f"x{i + 1}" for i in range(pts.shape[1])) + "\n")
    for row in pts:
        fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _load_set(path, extent=None):
    pts = load_points_csv(path)
    meta = {}
    try:
        with open(path + ".json") as fh:
            meta = json.load(fh)
    except FileNotFoundError:
        pass
    R = extent if extent is not None else meta.get("extent_radius")
    if R is None:
        R = float(np.linalg.norm(pts, axis=1).max()) if len(pts) else 0.0
    return SamplingSet(pts, R, meta.get("generator", {}))


def cmd_weights(a):
    sset = _load_set(a.points, a.extent)
    body = ConvexBody.parse(a.body)
    if a.method == "lattice":
        ws = lattice_weights(sset, body, a.K)
    elif sset.dim == 1 and a.method == "auto":
        ws = voronoi_weights(sset, body, a.K)
    else:
        method = "grid" if a.method == "auto" else a.method
        ws = voronoi_weights(
            sset, body, a.K, force_nd=True, method=method,
            resolution_or_samples=a.resolution, seed=stream_seed(a.seed, "weights"),
            threads=a.threads,
        )
    ws.save(a.out)


def cmd_measure(a):
    ws = WeightedSamples.load(a.weights)
    space = parse_space(a.space)
    tail = a.tail_radius if a.tail_radius is not None else ws.weight_domain_radius
    rep = measure_report(space, ws, a.K, tail)
    _report({"report": rep.to_dict()}, a.out)


def cmd_bounds(a):
    body = ConvexBody.parse(a.body)
    doc = {"body": body.to_dict(), "delta": a.delta,
           "W_bound": bessel_bound(body, a.delta),
           "meas_D": body.volume, "meas_polar": body.polar_volume}
    if 0 < a.delta < 0.25:
        doc["A"] = frame_bound_A(body, a.delta)
        doc["kappa"] = frame_bound_kappa(a.delta, body.dim)
    else:
        doc["A"] = None
    if a.eps is not None:
        doc["eps"] = a.eps
        doc["lower_unweighted"] = lower_bound_unweighted(body, a.delta, a.eps)
        if a.eta is not None:
            doc["eta"] = a.eta
            doc["lower_weighted"] = lower_bound_weighted(body, a.delta, a.eps, a.eta)
    _report(doc, a.out)


def _read_complex_csv(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    cols = {name: i for i, name in enumerate(header)}
    vals = data[:, cols["re"]] + 1j * data[:, cols["im"]]
    xcols = [i for name, i in cols.items() if name.startswith("x")]
    return data[:, xcols], vals


def _write_complex_csv(path, values, points=None):
    lines = []
    d = 0 if points is None else points.shape[1]
    lines.append(",".join([f"x{i + 1}" for i in range(d)] + ["re", "im"]))
    for k, v in enumerate(values):
        xs = [] if points is None else [f"{x:.17g}" for x in points[k]]
        lines.append(",".join(xs + [f"{v.real:.17g}", f"{v.imag:.17g}"]))
    _write_text(path, "\n".join(lines) + "\n")


def cmd_sample(a):
    ws = WeightedSamples.load(a.weights)
    amb = parse_space(a.ambient)
    _, f = _read_complex_csv(a.coeffs)
    vals = sample_function(f, amb, ws.points)
    _write_complex_csv(a.out, vals, ws.points)


def cmd_reconstruct(a):
    ws = WeightedSamples.load(a.weights)
    space = parse_space(a.space)
    pts, vals = _read_complex_csv(a.samples)
    if pts.shape != ws.points.shape or np.max(np.abs(pts - ws.points), initial=0) > 1e-12:
        raise ValueError("sample points do not match the weighted points")
    res = reconstruct(vals, ws, space)
    _write_complex_csv(a.out, res.coefficients)
    doc = {"space": space.spec, "result": {k: v for k, v in res.to_dict().items() if k != "coefficients"}}
    if a.truth is not None:
        amb = parse_space(a.ambient)
        _, f = _read_complex_csv(a.truth)
        doc["error_report"] = error_report(f, res, space, amb)
    _report(doc, a.report)


def cmd_concentration(a):
    cp = concentration_polynomial(a.n, a.eps)
    _report({"concentration": cp.to_dict()}, a.out)


def _provider(cfg, seed, threads):
    s = cfg["set"]
    body = ConvexBody.from_dict(cfg["body"]) if "body" in cfg else None
    margin = float(s.get("margin", 4.0))

    def provider(p, T):
        b = body or _space_from(cfg, p).body
        R = T + margin
        if s["kind"] == "grid":
            sset = gen_grid(s["h"], b.dim, R)
        else:
            sset = gen_jittered(s["h"], s["tau"], b.dim, R, stream_seed(seed, f"set:{s.get('index', 0)}"))
        if b.dim == 1 or s["kind"] == "grid":
            return voronoi_weights(sset, b, T)
        return voronoi_weights(
            sset, b, T, method="grid",
            resolution_or_samples=int(math.ceil(cfg.get("probes_per_unit", 10) * 2 * (T + 1))),
            threads=threads,
        )

    return provider


def _space_from(cfg, p):
    if cfg["family"] == "legendre":
        return parse_space(f"legendre:{p}")
    return HaarSpace(p, cfg.get("dim", 1))


def _k_grid(cfg):
    g = cfg["K_grid"]
    per = int(g.get("per_octave", 16))

    def grid(p):
        base = p**2 if cfg["family"] == "legendre" else 2.0**p
        lo, hi = math.log2(g["start"] * base), math.log2(g["stop"] * base)
        return 2.0 ** (lo + np.arange(int(math.floor((hi - lo) * per)) + 1) / per)

    return grid


def cmd_sweep(a):
    with open(a.config) as fh:
        cfg = json.load(fh)
    res = sweep_stable_rate(
        lambda p: _space_from(cfg, p),
        _provider(cfg, a.seed, a.threads),
        cfg["theta"],
        cfg["params"],
        _k_grid(cfg),
        tail_factor=cfg.get("tail_factor", 8.0),
        scale="log" if cfg["family"] == "legendre" else "linear",
    )
    d = res.to_dict()
    lines = ["param,K,V,V_star,W_empirical,tail_radius,flagged"]
    for e in d["entries"]:
        lines.append(",".join(
            "" if e[k] is None else (f"{e[k]:.17g}" if isinstance(e[k], float) else str(e[k]))
            for k in ("param", "K", "V", "V_star", "W_empirical", "tail_radius", "flagged")
        ))
    _write_text(a.out, "\n".join(lines) + "\n")
    summary = {k: v for k, v in d.items() if k != "entries"}
    summary["config"] = cfg
    _report({"summary": summary}, a.summary or (a.out + ".json" if a.out not in (None, "-") else None))


def cmd_check(a):
    suite = a.suite
    if suite == "parseval":
        space = parse_space(a.space)
        d = space.body.dim
        T = a.tail_radius
        ws = lattice_weights(gen_grid(1.0, d, T + 1), space.body, T)
        V = measure_V(space, ws, a.K)
        vs, err = measure_Vstar(space, ws, a.K, T)
        defect = 1.0 - V - vs
        ok = -1e-10 <= defect <= err + 1e-10
        doc = {"V": V, "V_star": vs, "tail_error": err, "defect": defect}
    elif suite == "balayage":
        space = parse_space(a.space)
        d = space.body.dim
        sset = gen_jittered(a.h, a.tau, d, a.extent, stream_seed(a.seed, "set:0"))
        doc = balayage_check(space, sset, a.trials, a.grid_res, stream_seed(a.seed, "balayage"))
        ok = doc["min_ratio"] >= doc["bound"] - 0.02
    elif suite == "transference":
        space = parse_space(a.space)
        d = space.body.dim
        Ms = [a.M * 2**i for i in range(4)]
        rows = critical_discrepancy(space, a.K, Ms)
        ratios = [r0["discrepancy"] / r1["discrepancy"] if r1["discrepancy"] > 0 else math.inf
                  for r0, r1 in zip(rows, rows[1:])]
        ok = all(1.6 <= r <= 2.4 for r in ratios)
        doc = {"rows": rows, "ratios": ratios}
        if a.h is not None:
            doc["shifted"] = transference_check(
                lambda p: space, lambda p, T: voronoi_weights(gen_grid(a.h, d, T + 4), space.body, T),
                [0], lambda p: np.array([a.K]), a.M,
            )
    else:
        space = parse_space(a.space)
        f = np.zeros(space.dim, complex)
        f[0] = 1.0
        Rs = [2.0**k for k in range(5, 13)]
        doc = critical_rate_check(f, space, a.M or 16 * Rs[-1], Rs)
        first = doc["rows"][0]["scaled"]
        ok = doc["slope"] is not None and doc["slope"] <= -0.8 and doc["sup_scaled"] <= 1.1 * first
    doc = {"suite": suite, "passed": bool(ok), "details": doc}
    _report(doc, a.out)
    return 0 if ok else 1


# ---------------------------------------------------------------- parsing


def build_parser():
    p = argparse.ArgumentParser(prog="nufourier", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0, help="root seed of all random streams")
        sp.add_argument("--threads", type=int, default=1, help="worker cap; outputs do not depend on it")
        sp.add_argument("--manifest", help="manifest path (default: derived from the output path)")

    g = sub.add_parser("gen", help="generate a sampling set as CSV")
    g.add_argument("--kind", choices=["grid", "jittered", "radial", "spiral"], required=True)
    g.add_argument("--h", type=float, default=1.0)
    g.add_argument("--tau", type=float, default=0.0)
    g.add_argument("--dim", type=int, default=1)
    g.add_argument("--extent", type=float, required=True)
    g.add_argument("--n-lines", type=int, default=8)
    g.add_argument("--step", type=float, default=1.0)
    g.add_argument("--pitch", type=float, default=1.0)
    g.add_argument("--arc-step", type=float, default=0.5)
    g.add_argument("--out")
    common(g)

    w = sub.add_parser("weights", help="Voronoi weights of a point CSV")
    w.add_argument("--points", required=True)
    w.add_argument("--body", required=True, help="box:a:d or ball:r:d")
    w.add_argument("--K", type=float, required=True)
    w.add_argument("--extent", type=float)
    w.add_argument("--method", choices=["auto", "grid", "mc", "lattice"], default="auto")
    w.add_argument("--resolution", type=int, default=400)
    w.add_argument("--out", required=True)
    common(w)

    m = sub.add_parser("measure", help="V, V*, W and bounds as JSON")
    m.add_argument("--weights", required=True)
    m.add_argument("--space", required=True)
    m.add_argument("--K", type=float, required=True)
    m.add_argument("--tail-radius", type=float)
    m.add_argument("--out")
    common(m)

    b = sub.add_parser("bounds", help="explicit frame and Bessel bounds")
    b.add_argument("--body", required=True)
    b.add_argument("--delta", type=float, required=True)
    b.add_argument("--eps", type=float)
    b.add_argument("--eta", type=float)
    b.add_argument("--out")
    common(b)

    s = sub.add_parser("sample", help="Fourier samples of a coefficient vector at weighted points")
    s.add_argument("--coeffs", required=True, help="CSV with re,im columns")
    s.add_argument("--ambient", required=True)
    s.add_argument("--weights", required=True)
    s.add_argument("--out", required=True)
    common(s)

    r = sub.add_parser("reconstruct", help="weighted least-squares reconstruction")
    r.add_argument("--samples", required=True, help="CSV x1..xd,re,im")
    r.add_argument("--weights", required=True)
    r.add_argument("--space", required=True)
    r.add_argument("--out", required=True, help="coefficients CSV")
    r.add_argument("--report")
    r.add_argument("--truth", help="target coefficients CSV for an error report")
    r.add_argument("--ambient")
    common(r)

    c = sub.add_parser("concentration", help="concentration polynomial")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--out")
    common(c)

    sw = sub.add_parser("sweep", help="stable sampling rate sweep from a JSON config")
    sw.add_argument("--config", required=True)
    sw.add_argument("--out", required=True, help="entries CSV")
    sw.add_argument("--summary")
    common(sw)

    ch = sub.add_parser("check", help="invariant suites")
    ch.add_argument("--suite", choices=["parseval", "balayage", "transference", "critical-rate"],
                    required=True)
    ch.add_argument("--space", default="haar:3")
    ch.add_argument("--K", type=float)
    ch.add_argument("--tail-radius", type=float, default=4096.0)
    ch.add_argument("--h", type=float)
    ch.add_argument("--tau", type=float, default=0.2)
    ch.add_argument("--extent", type=float, default=20.0)
    ch.add_argument("--trials", type=int, default=50)
    ch.add_argument("--grid-res", type=float, default=0.01)
    ch.add_argument("--M", type=float)
    ch.add_argument("--out")
    common(ch)

    rr = sub.add_parser("rerun", help="replay a manifest")
    rr.add_argument("manifest")
    rr.add_argument("--threads", type=int, default=1)
    return p


_HANDLERS = {
    "gen": cmd_gen,
    "weights": cmd_weights,
    "measure": cmd_measure,
    "bounds": cmd_bounds,
    "sample": cmd_sample,
    "reconstruct": cmd_reconstruct,
    "concentration": cmd_concentration,
    "sweep": cmd_sweep,
    "check": cmd_check,
}

_NOT_RECORDED = {"threads", "manifest", "command"}


_CHECK_DEFAULTS = {
    "parseval": {"K": 64.0},
    "balayage": {"h": 0.3},
    "transference": {"K": 4096.0, "M": 64.0},
    "critical-rate": {},
}


def _check_defaults(args):
    for k, v in _CHECK_DEFAULTS[args.suite].items():
        if getattr(args, k) is None:
            setattr(args, k, v)


def _manifest_path(args):
    if args.manifest:
        return args.manifest
    out = getattr(args, "out", None)
    if out not in (None, "-"):
        return out + ".manifest.json"
    return f"nufourier-{args.command}.manifest.json"


def _execute(args):
    if args.command == "check":
        _check_defaults(args)
    params = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_RECORDED}
    code = _HANDLERS[args.command](args) or 0
    manifest = {"schema_version": SCHEMA_VERSION, "command": args.command,
                "params": params, "version": __version__}
    with open(_manifest_path(args), "w") as fh:
        fh.write(_dump(manifest))
    return code


def run(argv=None):
    """Parse ``argv`` and execute; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0
    try:
        if args.command == "rerun":
            with open(args.manifest) as fh:
                man = json.load(fh)
            if man.get("schema_version") != SCHEMA_VERSION:
                raise ValueError("unsupported manifest schema")
            ns = argparse.Namespace(**man["params"], command=man["command"],
                                    threads=args.threads, manifest=args.manifest)
            return _execute(ns)
        return _execute(args)
    except (ValueError, InsufficientExtentError, OSError, KeyError) as e:
        print(f"nufourier: error: {e}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())

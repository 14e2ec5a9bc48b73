"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 invalid input, 3 non-convergence.
Every document embeds a run manifest; JSON layout is described by
``docs/schema.json``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .fock import FockConfig, eigen_spectrum
from .heat_series import SeriesConfig, heat_kernel, partition_function
from .model import ModelParams
from .trotter import trotter_kernel
from .validation import SUITES, run_suite
from .zeta import ZetaConfig, ZetaQuery, zeta_dirichlet, zeta_hankel, zeta_mellin

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONCONV = 0, 1, 2, 3


class UsageError(Exception):
    pass


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:count`` -> ``linspace(start, stop, count)``."""
    try:
        start, stop, count = text.split(":")
        count = int(count)
        start, stop = float(start), float(stop)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must be start:stop:count, got {text!r}") from exc
    if count < 1:
        raise argparse.ArgumentTypeError("grid count must be >= 1")
    return np.linspace(start, stop, count)


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def thread_count(flag: int | None) -> int:
    env = os.environ.get("AQRM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise UsageError(f"AQRM_THREADS must be an integer, got {env!r}") from exc
    return max(1, flag or os.cpu_count() or 1)


def _pmap(fn, items, threads: int):
    """Ordered map over ``items`` on a thread pool."""
    if threads == 1 or len(items) <= 1:
        return [fn(v) for v in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ----------------------------------------------------------------------------
# output


def _jsonable(v):
    if isinstance(v, (complex, np.complexfloating)):
        return {"re": float(v.real), "im": float(v.imag)}
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()] if v.dtype.kind == "c" else v.tolist()
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def manifest(args, params: ModelParams | None, config: dict) -> dict:
    # SOURCE_DATE_EPOCH pins the timestamp so repeated runs are byte-identical
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    stamp = time.gmtime(int(epoch)) if epoch else time.gmtime()
    return {
        "command": args.command,
        "params": params.as_dict() if params else None,
        "config": _jsonable(config),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", stamp),
        "tool_version": __version__,
    }


def result(name, value, error, flags=(), x=None, **extra) -> dict:
    out = {"name": name, "value": _jsonable(value), "error": _jsonable(error), "flags": list(flags)}
    if x is not None:
        out["x"] = _jsonable(x)
    out.update({k: _jsonable(v) for k, v in extra.items()})
    return out


def _flat_rows(res: dict):
    val = res["value"]
    if isinstance(val, list):
        arr = np.asarray(val, dtype=object)
        for idx in np.ndindex(arr.shape):
            yield res["name"] + "[" + ",".join(map(str, idx)) + "]", arr[idx]
    else:
        yield res["name"], val


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(doc["manifest"], sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "x", "value", "value_im", "error", "flags"])
    for res in doc["results"]:
        for name, val in _flat_rows(res):
            if isinstance(val, dict) and set(val) == {"re", "im"}:
                re_, im_ = val["re"], val["im"]
            else:
                re_, im_ = val, ""
            x = res.get("x", "")
            if isinstance(x, dict):
                x = f"{x['re']!r}{x['im']:+}j"
            w.writerow([name, x, re_, im_, res["error"], ";".join(res["flags"])])
    return buf.getvalue()


def emit_plot_data(path: str, doc: dict):
    """Whitespace-separated columns: x followed by the real parts of each value."""
    with open(path, "w") as fh:
        for res in doc["results"]:
            if "x" not in res:
                continue
            vals = [v for _, v in _flat_rows(res)]
            vals = [v["re"] if isinstance(v, dict) else v for v in vals]
            fh.write(" ".join(repr(float(v)) for v in [res["x"], *vals]) + "\n")


# ----------------------------------------------------------------------------
# commands


def _params(args) -> ModelParams:
    try:
        return ModelParams(args.g, args.delta, args.eps)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _series_cfg(args) -> SeriesConfig:
    try:
        return SeriesConfig(lambda_max=args.lambda_max, tail_tol=args.tail_tol, tensor_order=args.quad_order)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _points(args, single: str):
    if args.grid is not None:
        return list(args.grid)
    value = getattr(args, single)
    if value is None:
        raise UsageError(f"give --{single} or --grid")
    return [value]


def cmd_kernel(args):
    p, cfg = _params(args), _series_cfg(args)
    ts = _points(args, "t")

    def one(t):
        r = heat_kernel(args.x, args.y, t, p, cfg)
        flags = ["converged"] if r.converged else ["not-converged"]
        return result("kernel", r.value, r.quad_error + r.tail_bound, flags, x=t,
                      lambda_used=r.lambda_used, quad_error=r.quad_error, tail_bound=r.tail_bound)

    results = _pmap(one, ts, args.threads_eff)
    conf = {"x": args.x, "y": args.y, "lambda_max": cfg.lambda_max, "tail_tol": cfg.tail_tol,
            "quad_order": args.quad_order}
    status = EXIT_OK if all("converged" in r["flags"] for r in results) else EXIT_NONCONV
    return p, conf, results, status


def cmd_partition(args):
    p, cfg = _params(args), _series_cfg(args)
    betas = _points(args, "beta")

    def one(beta):
        r = partition_function(beta, p, cfg)
        flags = ["converged"] if r.converged else ["not-converged"]
        return result("Z", float(r.value), r.quad_error + r.tail_bound, flags, x=beta, lambda_used=r.lambda_used)

    results = _pmap(one, betas, args.threads_eff)
    status = EXIT_OK if all("converged" in r["flags"] for r in results) else EXIT_NONCONV
    return p, {"lambda_max": cfg.lambda_max, "tail_tol": cfg.tail_tol}, results, status


def cmd_spectrum(args):
    p = _params(args)
    try:
        cfg = FockConfig(args.cutoff, args.count)
        ref = FockConfig(args.cutoff + args.cutoff // 4, cfg.trusted)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    spec = eigen_spectrum(p, cfg)
    # change under a 25% larger cutoff, as a truncation error estimate
    err = np.abs(spec.eigenvalues - eigen_spectrum(p, ref).eigenvalues)
    results = [result(f"lambda_{k + 1}", float(v), float(e), x=k + 1) for k, (v, e) in enumerate(zip(spec.eigenvalues, err))]
    return p, {"cutoff": cfg.cutoff, "trusted": cfg.trusted}, results, EXIT_OK


def cmd_zeta(args):
    p = _params(args)
    if args.grid is not None:
        svals = [complex(v) for v in args.grid]
    elif args.s is not None:
        try:
            svals = [complex(args.s.replace(" ", "").replace("i", "j"))]
        except ValueError as exc:
            raise UsageError(f"cannot parse --s {args.s!r}") from exc
    else:
        raise UsageError("give --s or --grid")
    try:
        zc = ZetaConfig(series=_series_cfg(args), delta=args.contour_delta, ray_length=args.ray_length)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    spec = eigen_spectrum(p, FockConfig(args.cutoff)) if args.method == "dirichlet" else None

    def one(s):
        q = ZetaQuery(s, args.tau, p, zc)
        xs = s.real if s.imag == 0 else s
        method = args.method or ("mellin" if s.real > 1 else "hankel")
        if method == "dirichlet":
            # the Weyl tail itself bounds the error of approximating it
            last = spec.eigenvalues[-1] + args.tau
            tail = abs(2.0 * complex(last) ** (1.0 - s) / (s - 1.0))
            return result("zeta", zeta_dirichlet(q, spec), tail, ("dirichlet", "weyl-tail"), x=xs)
        r = zeta_mellin(q) if method == "mellin" else zeta_hankel(q)
        return result("zeta", r.value, r.error, (method, *r.flags), x=xs, deflated=list(r.deflated))

    results = _pmap(one, svals, args.threads_eff)
    conf = {"tau": args.tau, "method": args.method, "delta": zc.delta, "ray_length": zc.ray_length,
            "cutoff": args.cutoff if args.method == "dirichlet" else None}
    return p, conf, results, EXIT_OK


def cmd_trotter(args):
    p = _params(args)
    if args.t is None:
        raise UsageError("give --t")
    ref = heat_kernel(args.x, args.y, args.t, p, _series_cfg(args))
    ns = args.n

    def one(n):
        K = trotter_kernel(n, args.x, args.y, args.t, p)
        return result("trotter", K, float(np.max(np.abs(K - ref.value))), ("error-vs-series",), x=n)

    results = _pmap(one, ns, args.threads_eff)
    results.append(result("series", ref.value, ref.quad_error + ref.tail_bound, ()))
    return p, {"x": args.x, "y": args.y, "t": args.t, "n": ns}, results, EXIT_OK


def cmd_validate(args):
    checks = run_suite(args.suite)
    results = [
        result(c.name, c.passed, None, ("pass" if c.passed else "fail",), criterion=c.id, detail=c.detail,
               metrics=c.metrics)
        for c in checks
    ]
    for c in checks:
        print(c.line(), file=sys.stderr)
    return None, {"suite": args.suite}, results, EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


COMMANDS = {
    "kernel": cmd_kernel,
    "partition": cmd_partition,
    "spectrum": cmd_spectrum,
    "zeta": cmd_zeta,
    "trotter": cmd_trotter,
    "validate": cmd_validate,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--g", type=float, default=0.5)
    common.add_argument("--delta", type=float, default=1.0)
    common.add_argument("--eps", type=float, default=0.0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--threads", type=int, default=None, help="worker threads (AQRM_THREADS overrides)")
    common.add_argument("--emit-plot-data", metavar="PATH", default=None)
    common.add_argument("--output", "-o", metavar="PATH", default=None, help="write here instead of stdout")

    series = _Parser(add_help=False)
    series.add_argument("--lambda-max", type=int, default=12)
    series.add_argument("--tail-tol", type=float, default=1e-8)
    series.add_argument("--quad-order", type=int, default=None, help="tensor rule order for dimensions <= 5")

    grid = _Parser(add_help=False)
    grid.add_argument("--grid", type=parse_grid, default=None, metavar="START:STOP:COUNT")

    parser = _Parser(prog="aqrm", description="Asymmetric quantum Rabi model: heat kernel, partition function, zeta.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    k = sub.add_parser("kernel", parents=[common, series, grid], help="heat kernel K(x, y, t)")
    k.add_argument("--t", type=float)
    k.add_argument("--x", type=float, default=0.0)
    k.add_argument("--y", type=float, default=0.0)

    z = sub.add_parser("partition", parents=[common, series, grid], help="partition function over beta")
    z.add_argument("--beta", type=float)

    s = sub.add_parser("spectrum", parents=[common], help="Fock-basis spectrum")
    s.add_argument("--cutoff", type=int, default=300)
    s.add_argument("--count", type=int, default=None)

    q = sub.add_parser("zeta", parents=[common, series, grid], help="spectral zeta function")
    q.add_argument("--s", type=str)
    q.add_argument("--tau", type=float, default=2.0)
    q.add_argument("--method", choices=("mellin", "hankel", "dirichlet"), default=None)
    q.add_argument("--contour-delta", type=float, default=0.5)
    q.add_argument("--ray-length", type=float, default=None)
    q.add_argument("--cutoff", type=int, default=600, help="Fock cutoff for --method dirichlet")

    t = sub.add_parser("trotter", parents=[common, series], help="Trotter convergence ladder")
    t.add_argument("--n", type=parse_int_list, default=[2, 4, 8, 16])
    t.add_argument("--t", type=float, default=1.0)
    t.add_argument("--x", type=float, default=0.0)
    t.add_argument("--y", type=float, default=0.0)

    v = sub.add_parser("validate", parents=[common], help="run acceptance suites")
    v.add_argument("--suite", choices=sorted(SUITES), default="all")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.threads_eff = thread_count(args.threads)
        params, conf, results, status = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"aqrm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"aqrm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    doc = {"manifest": manifest(args, params, conf), "results": results}
    text = render(doc, args.format)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.emit_plot_data:
        emit_plot_data(args.emit_plot_data, doc)
    return status


if __name__ == "__main__":
    sys.exit(main())

"""``wvqkd`` command line: scans, tolerances, discrimination curve, Monte Carlo checks.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 numerical or contract failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .discrimination import GaussianPair, threshold_curve, helstrom_error
from .keyrate import Regime
from .montecarlo import ResolutionError, SimConfig, report_json, validation_report
from .protocol import ProtocolParams
from .qmath import InvalidStateError, NumericalError
from .security_exact import joint_prob_exact, secret_fraction_exact, tolerance_search_exact, wma_vs_exact_report
from .security_wma import WMAArtifactWarning, joint_prob_wma, secret_fraction_wma, tolerance_search_wma
from .svgplot import line_chart

EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 2, 3, 4

DEFAULT_ALPHAS = "5,10,15,20,25,30,35"
SCHEMA_VERSION = 1

# per-command defaults that differ from the common ones
COMMAND_DEFAULTS = {
    "montecarlo": {"eta": "0.2", "gamma": "0.1", "alpha": "2", "bin_width": 0.2},
    "discriminate": {"alpha": "0:50:0.5"},
}


class UsageError(Exception):
    pass


def parse_range(text: str, lo_bound: float = 0.0, hi_bound: float = 0.5) -> list[float]:
    """``"lo:hi:step"`` (inclusive) or a single value, as a list of floats."""
    parts = str(text).split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}") from exc
    if len(vals) == 1:
        lo = hi = vals[0]
        step = 1.0
    elif len(vals) == 3:
        lo, hi, step = vals
    else:
        raise UsageError(f"range must be lo:hi:step, got {text!r}")
    if not (lo_bound <= lo <= hi <= hi_bound) or not step > 0.0:
        raise UsageError(f"range {text!r} must satisfy {lo_bound} <= lo <= hi <= {hi_bound}, step > 0")
    n = int(np.floor((hi - lo) / step + 1e-9))
    return [round(lo + k * step, 12) for k in range(n + 1)]


def parse_list(value) -> list[float]:
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    text = str(value)
    if ":" in text:
        return parse_range(text, 0.0, float("inf"))
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad number list {value!r}") from exc


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".10g")
    return str(v)


def table_to_csv(header: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row[h]) for h in header])
    return buf.getvalue()


def table_to_json(command: str, header: list[str], rows: list[dict], extra: dict | None = None) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "columns": header, "rows": rows}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False, default=float) + "\n"


def _regimes(name: str) -> list[Regime]:
    return [Regime.WMA, Regime.EXACT] if name == "both" else [Regime(name)]


def _params(args, gamma: float, alpha: float) -> ProtocolParams:
    try:
        return ProtocolParams(gamma, args.delta, alpha, args.bin_width)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _report(job):
    regime, eta, params = job
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WMAArtifactWarning)
        fn = secret_fraction_wma if regime == Regime.WMA else secret_fraction_exact
        return fn(eta, params).as_row()


def _tolerance(job):
    regime, params = job
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", WMAArtifactWarning)
        fn = tolerance_search_wma if regime == Regime.WMA else tolerance_search_exact
        res = fn(params)
    return {
        "regime": regime.value,
        "alpha": params.alpha,
        "gamma": params.gamma,
        "delta": params.delta,
        "eta_tol": res.eta_tol,
        "grid_step": res.grid_step,
        "bisection_iterations": res.bisection_iterations,
    }


def _map(fn, jobs, n_jobs: int):
    if n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(n_jobs) as ex:
            return list(ex.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * n_jobs))))
    return [fn(j) for j in jobs]


def cmd_scan(args) -> tuple[list[str], list[dict], dict | None]:
    etas = parse_range(args.eta)
    jobs = [
        (regime, eta, _params(args, g, a))
        for regime in _regimes(args.regime)
        for g in parse_list(args.gamma)
        for a in parse_list(args.alpha)
        for eta in etas
    ]
    rows = _map(_report, jobs, args.jobs)
    header = ["eta", "regime", "alpha", "gamma", "delta", "qber", "mi", "holevo", "f_sec"]
    series = {}
    for r in rows:
        key = f"{r['regime']} a={r['alpha']:g} g={r['gamma']:g}"
        xs, ys = series.setdefault(key, ([], []))
        xs.append(r["eta"])
        ys.append(r["f_sec"])
    return header, rows, {"plot": (series, "eta", "F_sec (bits)", "Secret fraction vs. channel noise")}


def cmd_tolerance(args):
    jobs = [
        (regime, _params(args, g, a))
        for regime in _regimes(args.regime)
        for g in parse_list(args.gamma)
        for a in parse_list(args.alpha)
    ]
    rows = _map(_tolerance, jobs, args.jobs)
    header = ["regime", "alpha", "gamma", "delta", "eta_tol", "grid_step", "bisection_iterations"]
    series = {}
    for r in rows:
        xs, ys = series.setdefault(f"{r['regime']} g={r['gamma']:g}", ([], []))
        xs.append(r["alpha"])
        ys.append(r["eta_tol"])
    return header, rows, {"plot": (series, "alpha", "eta_tol", "Noise tolerance vs. bin centre")}


def cmd_discriminate(args):
    eps = args.eps_over_delta_sq * args.delta**2
    helstrom = helstrom_error(GaussianPair(eps, args.delta))
    rows = [
        {"alpha": a, "p_err": p, "p_helstrom": helstrom}
        for a, p in threshold_curve(args.eps_over_delta_sq, parse_list(args.alpha))
    ]
    series = {
        "threshold": ([r["alpha"] for r in rows], [r["p_err"] for r in rows]),
        "Helstrom": ([r["alpha"] for r in rows], [helstrom] * len(rows)),
    }
    return ["alpha", "p_err", "p_helstrom"], rows, {"plot": (series, "alpha", "P_err", "Threshold discrimination error")}


def cmd_compare(args):
    rows = []
    for g in parse_list(args.gamma):
        for a in parse_list(args.alpha):
            params = _params(args, g, a)
            for r in wma_vs_exact_report(parse_range(args.eta), params):
                rows.append(
                    {
                        "eta": r.eta,
                        "alpha": a,
                        "gamma": g,
                        "delta": args.delta,
                        "f_sec_wma": r.f_sec_wma,
                        "f_sec_exact": r.f_sec_exact,
                        "gap": r.gap,
                    }
                )
    header = ["eta", "alpha", "gamma", "delta", "f_sec_wma", "f_sec_exact", "gap"]
    series = {}
    for r in rows:
        for col in ("f_sec_wma", "f_sec_exact"):
            xs, ys = series.setdefault(f"{col[6:]} a={r['alpha']:g} g={r['gamma']:g}", ([], []))
            xs.append(r["eta"])
            ys.append(r[col])
    return header, rows, {"plot": (series, "eta", "F_sec (bits)", "First-order vs. all-orders")}


def cmd_qber(args):
    rows = []
    for regime in _regimes(args.regime):
        fn = joint_prob_wma if regime == Regime.WMA else joint_prob_exact
        for g in parse_list(args.gamma):
            for a in parse_list(args.alpha):
                params = _params(args, g, a)
                for eta in parse_range(args.eta):
                    j = fn(eta, params)
                    rows.append(
                        {
                            "eta": eta,
                            "regime": regime.value,
                            "alpha": a,
                            "gamma": g,
                            "delta": args.delta,
                            "qber": float(j[0, 1] + j[1, 0]),
                            "p00": float(j[0, 0]),
                            "p01": float(j[0, 1]),
                            "p10": float(j[1, 0]),
                            "p11": float(j[1, 1]),
                        }
                    )
    header = ["eta", "regime", "alpha", "gamma", "delta", "qber", "p00", "p01", "p10", "p11"]
    series = {}
    for r in rows:
        xs, ys = series.setdefault(f"{r['regime']} a={r['alpha']:g} g={r['gamma']:g}", ([], []))
        xs.append(r["eta"])
        ys.append(r["qber"])
    return header, rows, {"plot": (series, "eta", "QBER", "Raw key error rate")}


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def run_montecarlo(args) -> int:
    eta = parse_range(args.eta)[0]
    gamma = parse_list(args.gamma)[0]
    alpha = parse_list(args.alpha)[0]
    try:
        cfg = SimConfig(
            eta,
            _params(args, gamma, alpha),
            rounds=args.rounds,
            seed=args.seed,
            grid_points=args.grid_points,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = validation_report(cfg)
    if args.format == "csv":
        rows = [{"check": c["name"], "value": c["value"], "passed": c["passed"], "gating": c["gating"]} for c in report["checks"]]
        text = table_to_csv(["check", "value", "passed", "gating"], rows)
    else:
        text = report_json(report)
    _write(args.out, text)
    return 0 if report["passed"] else EXIT_NUMERIC


COMMANDS = {
    "scan": cmd_scan,
    "tolerance": cmd_tolerance,
    "discriminate": cmd_discriminate,
    "compare": cmd_compare,
    "qber": cmd_qber,
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eta", default="0:0.5:0.005", help="noise range lo:hi:step or single value")
    p.add_argument("--gamma", default="0.1,0.2", help="interaction strength(s), comma separated")
    p.add_argument("--delta", type=float, default=1.0, help="pointer width")
    p.add_argument("--alpha", default=DEFAULT_ALPHAS, help="bin centre(s), comma list or lo:hi:step")
    p.add_argument("--bin-width", type=float, default=0.1, help="bin width w (default 0.1)")
    p.add_argument("--regime", choices=["wma", "exact", "both"], default="both")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--plot", action="store_true", help="also write an SVG next to --out")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--rounds", type=int, default=1_000_000)
    p.add_argument("--grid-points", type=int, default=4096)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("--config", default=None, help="JSON file of option defaults; flags override it")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="wvqkd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}
    for name in ["scan", "tolerance", "discriminate", "compare", "montecarlo", "qber"]:
        p = sub.add_parser(name)
        _add_common(p)
        if name == "discriminate":
            p.add_argument("--eps-over-delta-sq", type=float, default=0.1)
        p.set_defaults(**COMMAND_DEFAULTS.get(name, {}))
        subs[name] = p
    return parser, subs


def _load_config(argv: list[str]) -> dict:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return {}
    with open(known.config, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    out = {}
    for k, v in cfg.items():
        key = k.replace("-", "_")
        if key in ("gamma", "alpha") and isinstance(v, list):
            v = ",".join(str(x) for x in v)
        out[key] = v
    return out


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        config = _load_config(argv)
    except OSError as exc:
        print(f"wvqkd: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, json.JSONDecodeError) as exc:
        print(f"wvqkd: bad config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if config:
        for p in subs.values():
            p.set_defaults(**config)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.plot and args.out is None:
            raise UsageError("--plot needs --out")
        if args.command == "montecarlo":
            return run_montecarlo(args)
        header, rows, extra = COMMANDS[args.command](args)
        if args.format == "csv":
            text = table_to_csv(header, rows)
        else:
            text = table_to_json(args.command, header, rows)
        _write(args.out, text)
        if args.plot:
            series, xl, yl, title = extra["plot"]
            _write(str(Path(args.out).with_suffix(".svg")), line_chart(series, xl, yl, title))
        return 0
    except UsageError as exc:
        print(f"wvqkd {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"wvqkd {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, ResolutionError, InvalidStateError) as exc:
        print(f"wvqkd {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

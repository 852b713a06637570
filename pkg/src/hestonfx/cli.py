"""Command-line entry point: ``hestonfx <subcommand> [options]``.

Every command reads the flat JSON parameter document (``--params``), applies
flag overrides and echoes the merged configuration with its output. JSON
output carries it under ``"config"``; CSV output starts with one ``# config:``
comment line.

Exit status: 0 on success, 2 for usage or validation errors, 1 for
computation errors. Errors are written to stderr as a JSON object whose
``error`` field names the failing error class.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import analytic, calibration, fft, montecarlo, variance
from .errors import HestonError, InvalidParameters
from .model import VanillaOption, from_document, load_document, validate_all

PARAM_KEYS = ("kappa", "theta", "sigma", "rho", "v0", "lambda", "spot", "rd", "rf")
# which halves of the parameter document each command needs: (model, market)
NEEDS = {
    "price": (True, True), "greeks": (True, True), "density": (True, False), "fft": (True, True),
    "simulate": (True, True), "feller": (True, False), "forward-vol": (True, False),
    "calibrate": (False, True), "smile-sweep": (True, True),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _existing(path):
    if not os.path.isfile(path):
        raise argparse.ArgumentTypeError(f"file not found: {path}")
    return path


def _build_parser():
    ap = _Parser(prog="hestonfx", description="Heston FX pricing, simulation and calibration.")
    common = _Parser(add_help=False)
    common.add_argument("--params", type=_existing, help="JSON parameter document")
    for key in PARAM_KEYS:
        common.add_argument(f"--{key}", dest=f"p_{key}", type=float, help=f"override {key}")
    common.add_argument("--output", "-o", help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None)

    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def option_args(p):
        p.add_argument("--strike", type=_floats, required=True, help="strike or comma list")
        p.add_argument("--tau", type=float, required=True)
        p.add_argument("--type", choices=("call", "put"), default="call")
        p.add_argument("--formulation", choices=("transformed", "original"), default="transformed")

    p = sub.add_parser("price", parents=[common], help="analytic vanilla prices")
    option_args(p)
    p = sub.add_parser("greeks", parents=[common], help="analytic Greeks")
    option_args(p)

    p = sub.add_parser("density", parents=[common], help="marginal density of log-returns")
    p.add_argument("--time-lag", type=float, required=True)
    p.add_argument("--x-min", type=float, default=-0.5)
    p.add_argument("--x-max", type=float, default=0.5)
    p.add_argument("--n", type=int, default=101)

    p = sub.add_parser("fft", parents=[common], help="FFT call/put ladder")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--n-points", type=int, default=fft.FftGrid.n_points)
    p.add_argument("--eta", type=float, default=fft.FftGrid.eta)
    p.add_argument("--alpha", type=float, default=fft.FftGrid.alpha_damp)
    p.add_argument("--strike-min", type=float, default=None)
    p.add_argument("--strike-max", type=float, default=None)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo paths or summaries")
    p.add_argument("--scheme", choices=[s.value for s in montecarlo.Scheme], default="qe")
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--steps-total", action="store_true", help="--steps is a total count, not per year")
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-antithetic", action="store_true")
    p.add_argument("--mode", choices=("summary", "paths", "plot"), default="summary")
    p.add_argument("--max-paths", type=int, default=10, help="paths written in paths mode")
    p.add_argument("--strike", type=_floats, default=None, help="also price calls/puts at these strikes")

    sub.add_parser("feller", parents=[common], help="Feller and boundary diagnostics")

    p = sub.add_parser("forward-vol", parents=[common], help="forward vol-of-vol and correlation")
    p.add_argument("--t1", type=float, required=True)
    p.add_argument("--t2", type=float, required=True)
    p.add_argument("--sigma-t1", type=float, required=True)
    p.add_argument("--sigma-t2", type=float, required=True)
    p.add_argument("--rho-t1", type=float, default=None)
    p.add_argument("--rho-t2", type=float, default=None)

    p = sub.add_parser("calibrate", parents=[common], help="fit smile slices from a CSV file")
    p.add_argument("--input", type=_existing, required=True, help="CSV with tenor_years,delta,quote_vol")
    p.add_argument("--fixed-v0", type=float, default=None, help="fixed v0 (default ATM vol^2)")
    p.add_argument("--fixed-kappa", type=float, default=1.5)
    p.add_argument("--max-evals", type=int, default=2000)

    p = sub.add_parser("smile-sweep", parents=[common], help="model smiles while one parameter varies")
    p.add_argument("--param", choices=("kappa", "theta", "sigma", "rho", "v0"), required=True)
    p.add_argument("--values", type=_floats, required=True)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--deltas", type=_floats, default=list(calibration.DEFAULT_PILLARS))
    return ap


def _merged_document(args):
    doc = {}
    if args.params:
        doc.update(load_document(args.params))
    for key in PARAM_KEYS:
        val = getattr(args, f"p_{key}", None)
        if val is not None:
            doc[key] = val
    return doc


def _config(args, doc):
    cfg = {k: v for k, v in vars(args).items() if not k.startswith("p_") and k != "output"}
    cfg["parameters"] = doc
    return cfg


def _csv_text(config, header, rows):
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _json_text(config, payload):
    return json.dumps({"config": config, "result": payload}, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit(args, config, payload=None, header=None, rows=None, default="json"):
    fmt = args.format or default
    if fmt == "csv" and header is None:
        raise UsageError(f"{args.command} has no CSV form; use --format json")
    if fmt == "json" and payload is None:
        payload = [dict(zip(header, r)) for r in rows]
    text = _csv_text(config, header, rows) if fmt == "csv" else _json_text(config, payload)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_price(args, p, env, config):
    phi = 1 if args.type == "call" else -1
    for k in args.strike:
        validate_all(p, env, VanillaOption(k, args.tau, phi))
    prices = analytic.vanilla_prices(p, env, args.strike, args.tau, phi, form=args.formulation)
    rows = [(k, float(v)) for k, v in zip(args.strike, prices)]
    _emit(args, config, header=("strike", "price"), rows=rows)


def _cmd_greeks(args, p, env, config):
    phi = 1 if args.type == "call" else -1
    rows, names = [], None
    for k in args.strike:
        g = analytic.greeks(p, env, VanillaOption(k, args.tau, phi), form=args.formulation).as_dict()
        names = list(g)
        rows.append([k] + [g[n] for n in names])
    _emit(args, config, header=["strike"] + names, rows=rows)


def _cmd_density(args, p, env, config):
    if args.n < 2:
        raise InvalidParameters([("TooFewPoints", "--n must be >= 2")])
    x = np.linspace(args.x_min, args.x_max, args.n)
    dens = analytic.marginal_density(p, args.time_lag, x)
    _emit(args, config, header=("x", "density"), rows=list(zip(x, dens)), default="csv")


def _cmd_fft(args, p, env, config):
    grid = fft.FftGrid(args.n_points, args.eta, args.alpha)
    res = fft.fft_price_ladder(p, env, args.tau, grid)
    k = res.strikes
    keep = np.ones(k.shape, dtype=bool)
    if args.strike_min is not None:
        keep &= k >= args.strike_min
    if args.strike_max is not None:
        keep &= k <= args.strike_max
    config = dict(config, n_clamped=res.n_clamped)
    rows = list(zip(k[keep], res.call_prices[keep], res.put_prices[keep]))
    _emit(args, config, header=("strike", "call_price", "put_price"), rows=rows, default="csv")


def _cmd_simulate(args, p, env, config):
    keep = args.mode != "summary"
    cfg = montecarlo.SimConfig(
        scheme=args.scheme, n_paths=args.paths, n_steps=args.steps, steps_per_year=not args.steps_total,
        horizon=args.horizon, seed=args.seed, antithetic=not args.no_antithetic, keep_paths=keep,
    )
    paths = montecarlo.simulate(p, env, cfg)
    if args.mode == "plot":
        t = paths.time_grid
        rows = list(zip(t, paths.spot_paths[0], np.sqrt(paths.var_paths[0])))
        _emit(args, config, header=("t", "spot", "vol"), rows=rows, default="csv")
        return
    if args.mode == "paths":
        m = min(args.max_paths, paths.n_paths)
        header = ["t"] + [f"spot_{i}" for i in range(m)] + [f"var_{i}" for i in range(m)]
        rows = [[t] + list(paths.spot_paths[:m, j]) + list(paths.var_paths[:m, j])
                for j, t in enumerate(paths.time_grid)]
        _emit(args, config, header=header, rows=rows, default="csv")
        return
    st, vt = paths.terminal_spot, paths.terminal_var
    ms, ses = montecarlo.sample_mean(paths, st)
    mv, sev = montecarlo.sample_mean(paths, vt)
    summary = {
        "n_paths": paths.n_paths, "n_steps": paths.n_steps,
        "mean_terminal_spot": float(ms), "se_terminal_spot": float(ses),
        "mean_terminal_var": float(mv), "se_terminal_var": float(sev),
        "boundary": montecarlo.boundary_stats(paths).as_dict(),
    }
    if args.strike:
        out = []
        for k in args.strike:
            c, cse = montecarlo.mc_price(paths, VanillaOption(k, args.horizon, 1), env)
            q, qse = montecarlo.mc_price(paths, VanillaOption(k, args.horizon, -1), env)
            out.append({"strike": k, "call": c, "call_se": cse, "put": q, "put_se": qse})
        summary["prices"] = out
    if (args.format or "json") == "csv":
        rows = [(k, v) for k, v in summary.items() if not isinstance(v, (dict, list))]
        _emit(args, config, header=("statistic", "value"), rows=rows)
    else:
        _emit(args, config, payload=summary)


def _cmd_feller(args, p, env, config):
    rep = variance.feller_check(p)
    beta, alpha = variance.bessel_transform_check(p.kappa, p.sigma, p.theta)
    payload = dict(rep.as_dict(), bessel_beta=beta, bessel_alpha=alpha)
    _emit(args, config, payload=payload)


def _cmd_forward_vol(args, p, env, config):
    payload = {
        "forward_sigma": variance.forward_vol_of_vol(args.sigma_t1, args.sigma_t2, args.t1, args.t2,
                                                     p.kappa, p.theta, p.v0),
        "h_t1": float(variance.h_function(args.t1, p.kappa, p.theta, p.v0)),
        "h_t2": float(variance.h_function(args.t2, p.kappa, p.theta, p.v0)),
    }
    if args.rho_t1 is not None and args.rho_t2 is not None:
        payload["forward_rho"] = variance.forward_correlation(args.rho_t1, args.rho_t2, args.t1, args.t2)
    _emit(args, config, payload=payload)


def _cmd_calibrate(args, p, env, config):
    slices = calibration.read_smile_csv(args.input)
    surf = calibration.calibrate_surface(slices, env, args.fixed_v0, args.fixed_kappa, max_evals=args.max_evals)
    if (args.format or "json") == "csv":
        rows = [(r.tau, d, m, mv) for r in surf.results
                for d, m, mv in zip(r.deltas, r.market_vols, r.model_vols)]
        _emit(args, config, header=("tenor_years", "delta", "market_vol", "model_vol"), rows=rows)
    else:
        _emit(args, config, payload=surf.as_dict())
    for tenor, info in surf.errors.items():
        _report(info["error"], info["message"], {"tenor_years": float(tenor)})
    return 1 if surf.errors and not surf.results else 0


def _cmd_smile_sweep(args, p, env, config):
    rows = []
    for val in args.values:
        q = p.with_(**{args.param: val})
        sl = calibration.synthetic_slice(q, env, args.tau, args.deltas)
        strikes = calibration.strike_from_delta(env, args.tau, sl.deltas, sl.vols)
        rows.extend((val, d, k, v) for d, k, v in zip(sl.deltas, strikes, sl.vols))
    _emit(args, config, header=(args.param, "delta", "strike", "model_vol"), rows=rows, default="csv")


COMMANDS = {
    "price": _cmd_price,
    "greeks": _cmd_greeks,
    "density": _cmd_density,
    "fft": _cmd_fft,
    "simulate": _cmd_simulate,
    "feller": _cmd_feller,
    "forward-vol": _cmd_forward_vol,
    "calibrate": _cmd_calibrate,
    "smile-sweep": _cmd_smile_sweep,
}


def _report(name, message, extra=None):
    body = {"error": name, "message": message}
    if extra:
        body.update(extra)
    sys.stderr.write(json.dumps(body, sort_keys=True) + "\n")


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        doc = _merged_document(args)
        p, env = from_document(doc)
        need_p, need_env = NEEDS[args.command]
        missing = [k for k, need, have in (("model parameters", need_p, p), ("market data", need_env, env))
                   if need and have is None]
        if missing:
            raise InvalidParameters([("MissingKey", f"{args.command} needs {' and '.join(missing)}")])
        config = _config(args, doc)
        status = COMMANDS[args.command](args, p, env, config)
    except UsageError as exc:
        _report("UsageError", str(exc))
        return 2
    except InvalidParameters as exc:
        _report(exc.name, str(exc), exc.to_dict())
        return 2
    except HestonError as exc:
        _report(exc.name, str(exc))
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        _report(type(exc).__name__, str(exc))
        return 2
    return int(status or 0)


def main() -> None:
    sys.exit(run())

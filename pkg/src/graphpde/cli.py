"""Command-line front end.

Subcommands::

    graphpde presets [--dump NAME]
    graphpde eigen    [--config F] [--preset N] [--graph G] --p P [--seed S] [--out DIR]
    graphpde classify [common options]
    graphpde run      [common options] [--stride K]
    graphpde sweep    [common options] --param lambda --values 0.1,0.2 [--workers N]

Common options: ``--config``, ``--preset``, ``--graph``, ``--p``, ``--q``,
``--lambda``, ``--u0``, ``--horizon``, ``--seed``, ``--out``.  Flags
override config-file values, which override preset values.  ``--u0`` takes
``x1=2,x2=1`` or a comma list in vertex order.

Exit codes:

== ================================================
0  success
1  unexpected error
2  bad input (arguments, config or graph file)
3  eigen solver did not converge
4  integration step failure (last state is printed)
== ================================================

Numbers are printed with 17 significant digits.  ``GRAPHPDE_LOG`` sets the
log level (default ``WARNING``).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import logging
import os
import sys
from pathlib import Path

from .classify import Regime, classify
from .config import ConfigError, ExperimentConfig, build_config, load_config, serialize_config
from .dynamics import BLEW_UP, EXTINCT, RAN_TO_HORIZON, STEP_FAILURE, integrate, write_trajectory
from .eigen import EigenConvergenceError, EigenPair, first_eigenpair
from .network import GraphFormatError
from .presets import PRESETS

__all__ = ["EXIT_EIGEN", "EXIT_INPUT", "EXIT_OK", "EXIT_STEP", "main"]

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INPUT = 2
EXIT_EIGEN = 3
EXIT_STEP = 4

log = logging.getLogger("graphpde")



def _fmt(x) -> str:
    return "none" if x is None else f"{float(x):.17g}"


def agrees(regime: Regime, outcome_kind: str) -> bool:
    """Whether a predicted regime matches a simulated outcome."""
    if regime is Regime.BLOW_UP:
        return outcome_kind == BLEW_UP
    if regime is Regime.EXTINCTION:
        return outcome_kind == EXTINCT
    if regime in (Regime.GLOBAL_BOUNDED, Regime.GLOBAL_GROWING):
        return outcome_kind == RAN_TO_HORIZON
    return False


def _parse_u0(text: str) -> dict | list:
    parts = [s.strip() for s in text.split(",") if s.strip()]
    if all("=" in s for s in parts):
        out = {}
        for s in parts:
            k, v = s.split("=", 1)
            out[k.strip()] = float(v)
        return out
    if any("=" in s for s in parts):
        raise ConfigError("--u0: mix of 'label=value' and bare values")
    return [float(s) for s in parts]


def resolve_config(args) -> ExperimentConfig:
    """Config file, then preset, then command-line flags."""
    base = load_config(args.config) if args.config else None
    top: dict = {}
    if args.preset:
        top["preset"] = args.preset
    if args.graph:
        top["graph_path"] = args.graph
    for flag, key in (("p", "p"), ("q", "q"), ("lam", "lam")):
        val = getattr(args, flag, None)
        if val is not None:
            top[key] = val
    if args.out:
        top["outputs"] = args.out
    integ: dict = {}
    if getattr(args, "horizon", None) is not None:
        integ["t_horizon"] = args.horizon
    if getattr(args, "stride", None) is not None:
        integ["snapshot_stride"] = args.stride
    eig: dict = {}
    if args.seed is not None:
        eig["seed"] = args.seed
    u0: dict = {}
    if getattr(args, "u0", None):
        parsed = _parse_u0(args.u0)
        if isinstance(parsed, list):
            cfg0 = build_config(top, {}, {}, {}, base)
            labels = cfg0.network().labels
            if len(parsed) != len(labels):
                raise ConfigError(f"--u0 has {len(parsed)} values, graph has {len(labels)} vertices")
            parsed = dict(zip(labels, parsed))
        u0 = parsed
    return build_config(top, u0, integ, eig, base)


def _eigen(cfg: ExperimentConfig, net) -> EigenPair:
    return first_eigenpair(net, cfg.p, cfg.eigen)


def _needs_eigen(spec) -> bool:
    return not spec.net.sigma_vanishes


def _outdir(cfg: ExperimentConfig) -> Path | None:
    if cfg.outputs is None:
        return None
    d = Path(cfg.outputs)
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_presets(args) -> int:
    if args.dump:
        print(serialize_config(ExperimentConfig.from_preset(args.dump)), end="")
        return EXIT_OK
    for pr in PRESETS.values():
        bc = "neumann" if pr.neumann else "mixed"
        u0 = ",".join(f"{v:g}" for v in pr.u0)
        print(f"{pr.name:12s} p={pr.p:g} q={pr.q:g} lambda={pr.lam:g} boundary={bc} "
              f"u0=({u0}) horizon={pr.horizon:g} expected={pr.expected}")
    return EXIT_OK


def cmd_eigen(args) -> int:
    cfg = resolve_config(args)
    if cfg.p is None:
        raise ConfigError("missing parameter p")
    net = cfg.network()
    pair = _eigen(cfg, net)
    print(f"lambda_p0 = {_fmt(pair.lambda_p0)}")
    print(f"residual = {_fmt(pair.residual)}")
    out = _outdir(cfg)
    if out is not None:
        with (out / "eigenfunction.csv").open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["vertex", "phi0"])
            for v, x in zip(net.labels, pair.phi0):
                wr.writerow([v, _fmt(x)])
    return EXIT_OK


def _classify(cfg: ExperimentConfig):
    spec = cfg.problem()
    eig = _eigen(cfg, spec.net) if _needs_eigen(spec) else None
    return spec, classify(spec, eig)


def cmd_classify(args) -> int:
    cfg = resolve_config(args)
    _, report = _classify(cfg)
    print(report.to_json())
    out = _outdir(cfg)
    if out is not None:
        (out / "report.json").write_text(report.to_json() + "\n")
    return EXIT_OK


def _run(cfg: ExperimentConfig, quiet: bool = False) -> tuple[int, dict]:
    spec, report = _classify(cfg)
    traj = integrate(spec, cfg.integrator)
    kind = traj.outcome.kind
    summary = {
        "predicted": report.regime.value,
        "simulated": kind,
        "t_est": traj.outcome.t_est,
        "agree": agrees(report.regime, kind),
        "blowup_time_upper": report.blowup_time_upper,
        "extinction_time_upper": report.extinction_time_upper,
        "global_l2_bound": report.global_l2_bound,
    }
    out = _outdir(cfg)
    if out is not None:
        write_trajectory(traj, spec, out / "trajectory.csv", out / "trajectory.meta.json",
                         extra={"predicted": report.regime.value})
        (out / "report.json").write_text(report.to_json() + "\n")
        (out / "config.txt").write_text(serialize_config(cfg))
    if not quiet:
        print(f"predicted {report.regime.value} vs simulated {traj.outcome}"
              f" ({'agree' if summary['agree'] else 'disagree'})")
        print(f"theorems: {', '.join(report.theorems) or 'none'}")
        for key in ("blowup_time_upper", "extinction_time_upper", "global_l2_bound"):
            if summary[key] is not None:
                print(f"{key} = {_fmt(summary[key])}")
    if kind == STEP_FAILURE:
        last = dict(zip(spec.net.labels, traj.final))
        print(f"step failure: {traj.outcome.message}", file=sys.stderr)
        print("last state: " + " ".join(f"{k}={_fmt(v)}" for k, v in last.items()), file=sys.stderr)
        return EXIT_STEP, summary
    return EXIT_OK, summary


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    code, _ = _run(cfg)
    return code


def _sweep_one(cfg: ExperimentConfig) -> tuple[int, dict]:
    try:
        return _run(cfg, quiet=True)
    except EigenConvergenceError as exc:
        return EXIT_EIGEN, {"error": str(exc)}


def cmd_sweep(args) -> int:
    base = resolve_config(args)
    key = {"lambda": "lam", "p": "p", "q": "q", "horizon": "t_horizon"}.get(args.param)
    if key is None:
        raise ConfigError(f"cannot sweep {args.param!r}; choose lambda, p, q or horizon")
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values: not a number list: {args.values!r}") from None
    root = Path(base.outputs or "sweep")
    cfgs = []
    for v in values:
        out = str(root / f"{args.param}={v!r}")
        if key == "t_horizon":
            cfgs.append(build_config({"outputs": out}, {}, {"t_horizon": v}, {}, base))
        else:
            cfgs.append(build_config({key: v, "outputs": out}, {}, {}, {}, base))
    if args.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.workers) as ex:
            results = list(ex.map(_sweep_one, cfgs))
    else:
        results = [_sweep_one(c) for c in cfgs]
    root.mkdir(parents=True, exist_ok=True)
    worst = EXIT_OK
    with (root / "summary.csv").open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow([args.param, "exit", "predicted", "simulated", "t_est", "agree"])
        for v, (code, s) in zip(values, results):
            worst = max(worst, code)
            row = [_fmt(v), code, s.get("predicted", ""), s.get("simulated", ""),
                   _fmt(s.get("t_est")), s.get("agree", "")]
            wr.writerow(row)
            print(" ".join(str(x) for x in row))
    return worst


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="experiment config file")
    sp.add_argument("--preset", choices=sorted(PRESETS), help="built-in experiment")
    sp.add_argument("--graph", help="graph file")
    sp.add_argument("--p", type=float, dest="p")
    sp.add_argument("--q", type=float, dest="q")
    sp.add_argument("--lambda", type=float, dest="lam")
    sp.add_argument("--u0", help="initial data: 'x1=2,x2=1' or values in vertex order")
    sp.add_argument("--horizon", type=float, help="simulation end time")
    sp.add_argument("--seed", type=int, help="eigen solver seed")
    sp.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="graphpde", description="p-Laplacian reaction-diffusion on networks")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("presets", help="list built-in experiments")
    sp.add_argument("--dump", choices=sorted(PRESETS), help="print a preset as a config file")
    sp.set_defaults(func=cmd_presets)

    sp = sub.add_parser("eigen", help="first eigenpair")
    _add_common(sp)
    sp.set_defaults(func=cmd_eigen)

    sp = sub.add_parser("classify", help="predicted regime and time bounds")
    _add_common(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("run", help="classify, then integrate")
    _add_common(sp)
    sp.add_argument("--stride", type=int, help="keep every k-th step in the CSV")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="run over a list of parameter values")
    _add_common(sp)
    sp.add_argument("--param", required=True, help="lambda, p, q or horizon")
    sp.add_argument("--values", required=True, help="comma-separated values")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)
    return ap


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("GRAPHPDE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except (ConfigError, GraphFormatError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EigenConvergenceError as exc:
        print(f"eigen solver failed: {exc}", file=sys.stderr)
        print(f"best quotient = {_fmt(exc.value)}, residual = {_fmt(exc.residual)}", file=sys.stderr)
        return EXIT_EIGEN
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        log.exception("unexpected failure")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

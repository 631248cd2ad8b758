"""Command-line entry point ``fd-sim``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 I/O error.
"""

import argparse
import logging
import sys
import time
from typing import List, Optional

import numpy as np

from ..exceptions import ConfigError, SimulationError
from .config import ScenarioConfig, load_config, reference_preset
from .output import EmitError, dumps, emit, jsonable, to_csv, to_json
from .pipeline import draw_realization, realization_seeds
from .sweeps import PHASES, resolve_threads, sweep_power, sweep_rho
from .validate import run_checks

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("fdrecycle")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON scenario file (default: shipped preset)")
    common.add_argument("--seed", type=_u64, help="override the run seed")
    common.add_argument("--realizations", type=int, metavar="N", help="override the number of draws")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=_positive, metavar="N",
                        help="worker threads (default: $FD_SIM_THREADS or 1)")
    common.add_argument("--phase", choices=("forward", "backward", "both"), default="both")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="fd-sim", description="Energy-recycling full-duplex OFDMA simulator.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep-rho", parents=[common], help="gains against the splitting ratio")
    sub.add_parser("sweep-power", parents=[common], help="optimal splitting ratio against SN power")
    single = sub.add_parser("single", parents=[common], help="dump one realization")
    single.add_argument("--rho", type=float, action="append",
                        help="splitting ratio to evaluate (repeatable; default: the config grid)")
    sub.add_parser("validate", parents=[common], help="run the invariant checks")
    return parser


def _config(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else reference_preset()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.realizations is not None:
        changes["n_realizations"] = args.realizations
    return cfg.replace(**changes) if changes else cfg


def _phases(args):
    return PHASES if args.phase == "both" else (args.phase,)


def _write(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise EmitError(f"cannot write {out}: {exc.strerror or exc}") from exc


def _single(cfg: ScenarioConfig, args) -> str:
    seed = realization_seeds(cfg.seed, 1)[0]
    real, retries = draw_realization(cfg, seed)
    rhos = args.rho if args.rho else list(cfg.rho_grid)
    rows = []
    for phase in _phases(args):
        base = real.evaluate(phase, 1.0)
        for rho in rhos:
            rep = real.report(phase, float(rho), baseline=base, resamples=retries)
            for link, reports in rep.state.rates.items():
                for sn, rr in enumerate(reports, start=1):
                    rows.append({
                        "phase": phase, "rho": float(rho), "link": link, "sn": sn,
                        "regime": rr.regime.value, "rate": rr.rate,
                        "baseline_rate": rep.baseline.rates[link][sn - 1].rate,
                        "eta_r": rep.eta_r[link],
                        "eta_e": rep.state.energy[sn - 1].eta_e,
                        "energy_exact": rep.state.energy[sn - 1].exact,
                        "energy_approx": rep.state.energy[sn - 1].approx,
                    })
    if args.format == "json":
        return dumps(jsonable({"seed": cfg.seed, "resamples": retries, "config": cfg.to_dict(), "rows": rows}))
    cols = list(rows[0]) if rows else []
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join(("%.17g" % v) if isinstance(v, float) else str(v) for v in r.values()))
    return "\n".join(lines) + "\n"


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        threads = resolve_threads(args.threads)
    except (ConfigError, ValueError) as exc:
        print(f"fd-sim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "validate":
            checks = run_checks(cfg, n_draws=args.realizations or 20)
            text = "\n".join(c.line() for c in checks) + "\n"
            _write(text, args.out)
            return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERIC
        if args.command == "single":
            _write(_single(cfg, args), args.out)
            return EXIT_OK
        fn = sweep_rho if args.command == "sweep-rho" else sweep_power
        log.info("%s: %d draws, seed %d, %d threads", args.command, cfg.n_realizations, cfg.seed, threads)
        t0 = time.perf_counter()
        results = fn(cfg, _phases(args), threads=threads)
        log.info("%s finished in %.1f s", args.command, time.perf_counter() - t0)
        for r in results.values():
            if r.flagged:
                log.warning("%s: %d resampled draws exceed the accounting budget", r.phase, r.n_resampled)
        if args.out is None:
            _write(to_csv(results, cfg) if args.format == "csv" else to_json(results, cfg), None)
        else:
            emit(results, args.format, args.out, cfg)
        return EXIT_OK
    except OSError as exc:
        print(f"fd-sim: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SimulationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"fd-sim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

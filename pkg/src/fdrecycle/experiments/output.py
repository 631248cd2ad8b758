"""Writing sweep results to CSV or JSON."""

import csv
import io
import json
import math
import subprocess
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import numpy as np

from .. import __version__
from .config import ScenarioConfig
from .sweeps import SweepResult

__all__ = ["SCHEMA_VERSION", "emit", "dumps", "jsonable", "to_csv", "to_json", "code_version", "EmitError"]

SCHEMA_VERSION = 1

_COLUMN_DOC = {
    "eta_r_mean": "mean over draws of R(rho)/R(1)",
    "eta_r_se": "standard error of eta_r_mean",
    "rate_mean": "mean rate, bits per channel use",
    "rate_se": "standard error of rate_mean",
    "eta_fit_mean": "eta_r of the per-draw two-point fits",
    "rate_fit_mean": "rate of the per-draw two-point fits",
    "crossover_lower": "closed-form lower end of the rho interval beating rho=1",
    "crossover_upper": "upper end of that interval (p_th/p)",
    "eta_e_mean": "mean recycled energy over transmitted energy",
    "eta_e_se": "standard error of eta_e_mean",
    "eta_e_approx_mean": "eta_e from the leakage-only approximation",
    "rho_star": "rate-maximising splitting ratio",
}


class EmitError(OSError):
    """Raised when results cannot be written; carries the offending path."""


def code_version() -> str:
    """``git describe`` of the source tree, or the package version outside a checkout."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return __version__
    desc = out.stdout.strip()
    return desc if out.returncode == 0 and desc else __version__


def _as_list(results) -> list:
    if isinstance(results, SweepResult):
        return [results]
    if isinstance(results, dict):
        return list(results.values())
    return list(results)


def _merged_columns(results: Sequence[SweepResult]):
    if not results:
        return "rho", np.array([]), {}
    axis_name, axis = results[0].axis_name, results[0].axis
    cols: Dict[str, np.ndarray] = {}
    for r in results:
        if r.axis_name != axis_name or len(r.axis) != len(axis):
            raise ValueError("results written together must share their axis")
        if r.axis_name == "p_dbm" and r.phase != results[0].phase:
            cols[f"{r.phase}.p_dbm"] = r.axis
        cols.update(r.columns())
    return axis_name, axis, cols


def _fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return "%.17g" % x


def to_csv(results, config: Optional[ScenarioConfig] = None) -> str:
    """CSV text: comment header, one column-name row, one row per axis point."""
    results = _as_list(results)
    axis_name, axis, cols = _merged_columns(results)
    buf = io.StringIO()
    buf.write("# fdrecycle sweep results\n")
    if config is not None:
        buf.write(f"# seed={config.seed} realizations={config.n_realizations}\n")
    buf.write(f"# {axis_name}: sweep axis\n")
    for name in cols:
        key = name.rsplit(".", 1)[-1]
        buf.write(f"# {name}: {_COLUMN_DOC.get(key, 'SN power of this phase, dBm')}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([axis_name] + list(cols))
    for i in range(len(axis)):
        w.writerow([_fmt(axis[i])] + [_fmt(c[i]) for c in cols.values()])
    return buf.getvalue()


def jsonable(x):
    """JSON-safe copy: arrays to lists, non-finite floats to null."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def to_json(results, config: Optional[ScenarioConfig] = None) -> str:
    results = _as_list(results)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "code_version": code_version(),
        "seed": None if config is None else config.seed,
        "config": None if config is None else config.to_dict(),
        "results": [
            {
                "phase": r.phase,
                "axis_name": r.axis_name,
                "axis": r.axis,
                "series": r.columns(),
                "summary": r.summary(),
            }
            for r in results
        ],
    }
    return dumps(jsonable(doc))


def emit(results, fmt: str, path: Union[str, Path], config: Optional[ScenarioConfig] = None) -> Path:
    """Write ``results`` to ``path`` as ``csv`` or ``json``."""
    if fmt == "csv":
        text = to_csv(results, config)
    elif fmt == "json":
        text = to_json(results, config)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise EmitError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path

"""CSV and metadata files for sweep results."""

from __future__ import annotations

import csv
import datetime as _dt
import json
import platform
from importlib import metadata as _md
from pathlib import Path

import numpy as np
import scipy

from .sweep import ResultTable

__all__ = ["format_value", "emit_outputs", "read_csv", "versions"]

# header lines starting with '#' document the columns
_COLUMN_DOCS = {
    "delta_over_gamma": "detuning omega_1 - omega_2 (networks: of the second species), units of gamma",
    "v_over_gamma": "link strength, units of gamma",
    "v1_over_gamma": "indirect link strength A-C and B-C, units of gamma",
    "v2_over_gamma": "direct link strength A-B, units of gamma",
    "kerr_over_gamma": "Kerr nonlinearity K, units of gamma",
    "sigma": "Lorentzian width of gain and loss",
    "n_plus": "gain center of every site",
    "n2_plus": "gain center of the second oscillator",
    "delta_n": "n2_plus - n1_plus",
    "S": "synchronization measure 2 pi max P - 1",
    "S_over_V": "S divided by the link strength",
    "residual": "relative residual ||L rho|| / ||L||_F",
    "tail_population": "largest population in the two highest Fock levels of any site",
    "S_stderr": "batch-means standard error of S",
    "n_samples": "phase samples in the histogram",
    "n_unstable": "diverged trajectories (excluded)",
    "error": "empty on success, otherwise the failure reason",
}


def format_value(x) -> str:
    """Full-precision scientific notation; round-trips exactly through ``float``."""
    if isinstance(x, str):
        return x
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17e")


def versions() -> dict:
    try:
        own = _md.version("artifact")
    except _md.PackageNotFoundError:
        own = "unknown"
    return {"syncblockade": own, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__}


def _doc(col: str) -> str:
    if col.startswith("S_") and len(col) == 4:
        return f"synchronization measure between sites {col[2]} and {col[3]}"
    return _COLUMN_DOCS.get(col, "")


def emit_outputs(table: ResultTable, path, config: dict | None = None) -> tuple[Path, Path]:
    """
    Write ``<path>.csv`` and ``<path>.json``.

    The CSV starts with ``#`` comment lines describing each column and
    contains nothing run-dependent, so equal tables give identical bytes.
    The JSON sidecar holds the config, its hash, package versions and a
    timestamp.
    """
    base = Path(path)
    if base.suffix == ".csv":
        base = base.with_suffix("")
    csv_path, meta_path = base.with_suffix(".csv"), base.with_suffix(".json")
    try:
        base.parent.mkdir(parents=True, exist_ok=True)
        with open(csv_path, "w", newline="") as fh:
            for col in table.columns:
                fh.write(f"# {col}: {_doc(col)}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(table.columns)
            for row in table.rows:
                w.writerow([format_value(x) for x in row])
        meta = {
            **table.metadata,
            "columns": table.columns,
            "config": config,
            "versions": versions(),
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        }
        meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=float) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write sweep output at {base}: {exc}") from exc
    return csv_path, meta_path


def read_csv(path) -> ResultTable:
    """Parse a CSV written by :func:`emit_outputs`."""
    path = Path(path)
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    columns = next(reader)
    rows = [tuple(v if c == "error" else float(v) for c, v in zip(columns, r)) for r in reader]
    meta = {}
    meta_path = path.with_suffix(".json")
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
    return ResultTable(columns, rows, meta)

"""Evaluation of sweep points and assembly of result tables."""

from __future__ import annotations

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ..classical import NoiseParams, classical_phase_histogram, max_stable_dt, simulate
from ..liouvillian import build_network_liouvillian
from ..model import NetworkSpec, OscillatorParams, default_dimension
from ..perturbation import perturbative_sync
from ..steadystate import solve_steady_state, truncation_residual, uncoupled_fock_populations
from ..sync import pairwise_sync
from .config import AXES, ConfigError, SweepConfig

__all__ = [
    "THREADS_ENV",
    "ResultTable",
    "run_sweep",
    "evaluate_point",
    "build_network",
    "table_columns",
    "default_threads",
]

log = logging.getLogger(__name__)

THREADS_ENV = "SYNCBLOCKADE_THREADS"

_LABELS = "ABCD"


@dataclass
class ResultTable:
    """Rectangular sweep output; ``error`` is the only text column."""

    columns: list[str]
    rows: list[tuple]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row of length {len(r)} does not match {len(self.columns)} columns")

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        vals = [r[j] for r in self.rows]
        return np.array(vals, dtype=object if name == "error" else float)

    @property
    def n_failed(self) -> int:
        if "error" not in self.columns:
            return 0
        j = self.columns.index("error")
        return sum(1 for r in self.rows if r[j])


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return 1


def _pairs(n_sites: int) -> list[tuple[int, int]]:
    return list(combinations(range(n_sites), 2))


def table_columns(cfg: SweepConfig) -> list[str]:
    coords = ["delta_over_gamma"]
    if cfg.mode == "network3":
        coords += ["v1_over_gamma", "v2_over_gamma"]
    coords += [a.column for a in cfg.axes if a.column not in coords]
    if cfg.n_sites > 2:
        values = [f"S_{_LABELS[j]}{_LABELS[k]}" for j, k in _pairs(cfg.n_sites)]
    else:
        values = ["S", "S_over_V"]
    values += ["residual", "tail_population"]
    if cfg.mode == "classical-detuning":
        values += ["S_stderr", "n_samples", "n_unstable"]
    return coords + values + ["error"]


def _site_params(cfg: SweepConfig, j: int, point: dict) -> tuple[OscillatorParams, int | None]:
    vals = {**cfg.oscillator, **cfg.sites.get(j, {})}
    for name in ("kerr", "sigma", "n_plus"):
        if name in point:
            vals[name] = point[name]
            if name == "n_plus":
                vals.pop("n_minus", None)
    if j == 1 and cfg.n_sites == 2:
        base = {**cfg.oscillator, **cfg.sites.get(0, {})}
        if "n2_plus" in point:
            vals["n_plus"] = point["n2_plus"]
            vals.pop("n_minus", None)
        if "dn" in point:
            vals["n_plus"] = point.get("n_plus", base.get("n_plus", 1.0)) + point["dn"]
            vals.pop("n_minus", None)
    if "n_plus" not in vals:
        if cfg.mode == "minimal-3level":
            vals["n_plus"] = 1.0
        else:
            raise ConfigError("oscillator n_plus is required")
    gamma = vals.get("gamma", 1.0)
    sigma = vals.get("sigma", 0.2)
    n_plus = vals["n_plus"]
    kerr = vals.get("kerr", 0.0)
    if "kerr_times_sigma" in vals:
        if "kerr" in point:
            raise ConfigError("kerr cannot be swept together with kerr_times_sigma")
        kerr = vals["kerr_times_sigma"] / sigma
    p = OscillatorParams(
        omega=vals.get("omega", 0.0),
        kerr=kerr,
        gamma_plus=vals.get("gamma_plus", gamma),
        gamma_minus=vals.get("gamma_minus", gamma),
        n_plus=n_plus,
        n_minus=vals.get("n_minus", n_plus + 1.0),
        sigma_plus=vals.get("sigma_plus", sigma),
        sigma_minus=vals.get("sigma_minus", sigma),
    )
    dim = vals.get("dim")
    if dim is None and cfg.mode == "minimal-3level":
        dim = 3
    return p, (int(dim) if dim is not None else None)


def _detuned_sites(cfg: SweepConfig) -> tuple[int, ...]:
    # sites whose natural frequency is lowered by delta
    return {"network3": (2,), "network4": (1, 2)}.get(cfg.mode, (1,))


def _links(cfg: SweepConfig, point: dict) -> list[tuple[int, int, float]]:
    get = lambda k: point.get(k, cfg.coupling.get(k, 0.0))  # noqa: E731
    if cfg.mode == "network3":
        # A and B identical, both linked to the detuned C; direct A-B link v2
        return [(0, 2, get("v1")), (1, 2, get("v1")), (0, 1, get("v2"))]
    if cfg.mode == "network4":
        # ring A-B-D-C-A with A, D identical and B, C detuned
        v = get("v")
        return [(0, 1, v), (1, 3, v), (3, 2, v), (2, 0, v)]
    return [(0, 1, get("v"))]


def build_network(cfg: SweepConfig, point: dict) -> NetworkSpec:
    """Network for one sweep point; a link of strength v enters C as -v."""
    params, dims = [], []
    delta = point.get("delta", 0.0)
    for j in range(cfg.n_sites):
        p, d = _site_params(cfg, j, point)
        if j in _detuned_sites(cfg):
            p = p.with_(omega=p.omega - delta)
        params.append(p)
        dims.append(d if d is not None else default_dimension(p))
    if "matrix" in cfg.coupling:
        C = np.array(cfg.coupling["matrix"], dtype=float)
    else:
        C = np.zeros((cfg.n_sites, cfg.n_sites))
        for j, k, v in _links(cfg, point):
            C[j, k] = C[k, j] = -v
    return NetworkSpec(tuple(params), C, tuple(dims))


def _point_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _coords(cfg: SweepConfig, point: dict) -> dict:
    out = {"delta_over_gamma": point.get("delta", 0.0)}
    if cfg.mode == "network3" and "matrix" in cfg.coupling:
        C = cfg.coupling["matrix"]
        out["v1_over_gamma"], out["v2_over_gamma"] = -C[0][2], -C[0][1]
    elif cfg.mode == "network3":
        out["v1_over_gamma"] = point.get("v1", cfg.coupling.get("v1", 0.0))
        out["v2_over_gamma"] = point.get("v2", cfg.coupling.get("v2", 0.0))
    for name, value in point.items():
        out[AXES[name]] = value
    return out


def _coupling_strength(cfg: SweepConfig, point: dict) -> float:
    if "matrix" in cfg.coupling:
        return -cfg.coupling["matrix"][0][1]
    return point.get("v", cfg.coupling.get("v", math.nan))


def _quantum(cfg: SweepConfig, net: NetworkSpec) -> dict:
    rho = solve_steady_state(build_network_liouvillian(net), net.layout, tol=cfg.residual_tolerance)
    rho.validate()
    out = {"residual": rho.residual, "tail_population": float(np.max(truncation_residual(rho)))}
    for j, k in _pairs(net.n_sites):
        s = pairwise_sync(rho, net.layout, (j, k))
        out["S" if net.n_sites == 2 else f"S_{_LABELS[j]}{_LABELS[k]}"] = s
    return out


def _perturbative(net: NetworkSpec, v: float) -> dict:
    (p1, p2), (d1, d2) = net.oscillators, net.layout.dims
    tail = max(uncoupled_fock_populations(p, d)[-2:].sum() for p, d in zip((p1, p2), (d1, d2)))
    return {"S": perturbative_sync(p1, p2, -v, d1, d2), "residual": math.nan,
            "tail_population": float(tail)}


def _classical(cfg: SweepConfig, net: NetworkSpec, seed: int) -> dict:
    opts = cfg.classical
    noise = NoiseParams(opts.get("gamma_t", 0.1), opts.get("n_t", 1.0), seed)
    dt = opts.get("dt", min(1e-3, max_stable_dt(net)))
    samples = simulate(
        net, noise, dt=dt,
        t_burn=opts.get("t_burn", 200.0), t_sample=opts.get("t_sample", 2000.0),
        n_traj=int(opts.get("n_traj", 32)), sample_interval=opts.get("sample_interval", 0.1),
        scheme=opts.get("scheme", "rotating"),
    )
    hist = classical_phase_histogram(samples.phases[(0, 1)], n_bins=int(opts.get("n_bins", 64)))
    return {"S": hist.s_measure, "S_stderr": hist.s_stderr, "n_samples": float(hist.n_samples),
            "n_unstable": float(len(samples.unstable)), "residual": math.nan,
            "tail_population": math.nan}


def evaluate_point(cfg: SweepConfig, index: int, point: dict) -> tuple:
    """One table row; failures are caught and reported in the ``error`` column."""
    columns = table_columns(cfg)
    values = dict.fromkeys(columns, math.nan)
    values.update(_coords(cfg, point))
    values["error"] = ""
    try:
        net = build_network(cfg, point)
        if cfg.mode == "perturbative-detuning":
            values.update(_perturbative(net, _coupling_strength(cfg, point)))
        elif cfg.mode == "classical-detuning":
            values.update(_classical(cfg, net, _point_seed(cfg.seed, index)))
        else:
            values.update(_quantum(cfg, net))
        if "S_over_V" in values:
            v = _coupling_strength(cfg, point)
            values["S_over_V"] = values["S"] / v if v else math.nan
        tail = values["tail_population"]
        # in the minimal model the truncation is the model, not an approximation
        if cfg.mode != "minimal-3level" and tail > cfg.tail_tolerance:
            values["error"] = f"truncation tail {tail:.3e} exceeds {cfg.tail_tolerance:.3e}"
    except ConfigError:
        raise
    except Exception as exc:  # recorded per point, surfaced through the exit code
        log.warning("point %d %s failed: %s", index, point, exc)
        values["error"] = f"{type(exc).__name__}: {exc}".replace("\n", " ")
    return tuple(values[c] for c in columns)


def _evaluate(args):
    return evaluate_point(*args)


def run_sweep(cfg: SweepConfig, threads: int | None = None) -> ResultTable:
    """
    Evaluate every sweep point, in parallel over ``threads`` processes.

    Rows come back in sweep order (last axis fastest) regardless of
    completion order, so the table depends only on ``cfg``.
    """
    threads = default_threads() if threads is None else max(1, int(threads))
    points = cfg.points()
    # fail fast on configuration problems before dispatching work
    build_network(cfg, points[0])
    tasks = [(cfg, i, p) for i, p in enumerate(points)]
    t0 = time.perf_counter()
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(threads) as pool:
            rows = list(pool.map(_evaluate, tasks, chunksize=1))
    else:
        rows = [_evaluate(t) for t in tasks]
    runtime = time.perf_counter() - t0
    table = ResultTable(table_columns(cfg), rows)
    table.metadata = {"config_hash": cfg.config_hash(), "runtime_seconds": runtime,
                      "n_points": len(rows), "n_failed": table.n_failed}
    return table

"""
Classical Langevin model of the coupled self-oscillators.

Each complex amplitude obeys

    dα_j/dt = -(i Ω_j(|α_j|²) + Γ_j(|α_j|²)/2) α_j - i sum_k C_jk α_k + η_j,
    Ω_j(n)  = ω_j - 2 K_j n,
    Γ_j(n)  = γ_j- f_j-(n) - γ_j+ f_j+(n),

with complex white noise ``⟨η_j(t) η_k*(t')⟩ = δ_jk δ(t-t') γ_T n_T``, i.e.
variance ``γ_T n_T dt / 2`` per real quadrature per step. Only thermal
noise is included.

Trajectories are integrated with Euler-Maruyama. By default the local
rotation ``exp(-i Ω_j dt)`` is applied exactly and only damping, coupling
and noise take an explicit Euler step (``scheme="rotating"``). Plain
explicit Euler (``scheme="euler"``) amplifies the Kerr rotation by
``1 + Ω² dt² / 2`` per step, which outruns the weak Lorentzian-tail damping
as soon as noise pushes ``|α|²`` a few quanta above the limit cycle. Both
schemes are first order and consume the same noise stream. Trajectory ``i`` draws its
noise from ``np.random.default_rng(SeedSequence(seed).spawn(n_traj)[i])`` in
chunks of :data:`CHUNK_STEPS` steps, real parts before imaginary parts; this
stream definition is what makes fixed-seed runs bit-reproducible.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.optimize import brentq

from .model import NetworkSpec, OscillatorParams
from .sync import PhaseDistribution

__all__ = [
    "CHUNK_STEPS",
    "SCHEMES",
    "InstabilityError",
    "ClassicalState",
    "NoiseParams",
    "ClassicalSamples",
    "limit_cycle_occupation",
    "drift",
    "max_rate_scale",
    "max_stable_dt",
    "propagate",
    "simulate",
    "classical_phase_histogram",
]

CHUNK_STEPS = 50_000
DIVERGENCE_FACTOR = 10.0


class InstabilityError(RuntimeError):
    """Every trajectory of a simulation diverged."""


@dataclass
class ClassicalState:
    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if not np.all(np.isfinite(self.amplitudes)):
            raise InstabilityError("non-finite classical amplitude")


@dataclass(frozen=True)
class NoiseParams:
    gamma_T: float = 0.1
    n_T: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.gamma_T < 0 or self.n_T < 0:
            raise ValueError("gamma_T and n_T must be >= 0")

    @property
    def strength(self) -> float:
        return self.gamma_T * self.n_T


@dataclass
class ClassicalSamples:
    """Relative phases ``phi_j - phi_k`` in ``[0, 2π)``, one row per kept trajectory."""

    phases: dict[tuple[int, int], np.ndarray]
    unstable: list[int] = field(default_factory=list)
    dt: float = 0.0
    sample_interval: float = 0.0

    @property
    def n_samples(self) -> int:
        return int(next(iter(self.phases.values())).size) if self.phases else 0


def _gamma_net(p: OscillatorParams, n):
    return p.gamma_minus * p.f_minus(n) - p.gamma_plus * p.f_plus(n)


def limit_cycle_occupation(p: OscillatorParams) -> float:
    """Stable zero of the net damping between the gain and loss centers."""
    lo, hi = sorted((p.n_plus, p.n_minus))
    if _gamma_net(p, lo) < 0 < _gamma_net(p, hi):
        return float(brentq(lambda n: _gamma_net(p, n), lo, hi, xtol=1e-14))
    return float(hi)


def drift(state, net: NetworkSpec) -> np.ndarray:
    """Deterministic part of the Langevin equation for every site."""
    alpha = state.amplitudes if isinstance(state, ClassicalState) else np.asarray(state, complex)
    out = np.empty_like(alpha, dtype=complex)
    for j, p in enumerate(net.oscillators):
        n = abs(alpha[j]) ** 2
        omega = p.omega - 2 * p.kerr * n
        out[j] = -(1j * omega + 0.5 * _gamma_net(p, n)) * alpha[j]
    return out - 1j * (net.coupling @ alpha)


def max_rate_scale(net: NetworkSpec, frame: float = 0.0) -> float:
    scale = 0.0
    for j, p in enumerate(net.oscillators):
        n = limit_cycle_occupation(p)
        scale = max(scale, p.gamma_plus, p.gamma_minus, p.kerr * max(p.n_minus, p.n_plus),
                    abs(p.omega - 2 * p.kerr * n - frame), np.abs(net.coupling[j]).sum())
    return scale


SCHEMES = ("rotating", "euler")


@numba.njit(cache=True, nogil=True)
def _em_chunk(alpha, omega, kerr, gp, gm, cp, cm, sp2, sm2, C, noise, dt,
              step0, burn, stride, out, rec, max_abs, exact_rotation):
    n_sites = alpha.shape[0]
    a_new = np.empty_like(alpha)
    for s in range(noise.shape[0]):
        for j in range(n_sites):
            n = alpha[j].real ** 2 + alpha[j].imag ** 2
            fp = sp2[j] / ((n - cp[j]) ** 2 + sp2[j])
            fm = sm2[j] / ((n - cm[j]) ** 2 + sm2[j])
            g = gm[j] * fm - gp[j] * fp
            w = omega[j] - 2.0 * kerr[j] * n
            hop = 0j
            for k in range(n_sites):
                hop += C[j, k] * alpha[k]
            if exact_rotation:
                rot = np.exp(-1j * w * dt) * alpha[j]
                a_new[j] = rot + (-0.5 * g * alpha[j] - 1j * hop) * dt + noise[s, j]
            else:
                d = -(1j * w + 0.5 * g) * alpha[j] - 1j * hop
                a_new[j] = alpha[j] + d * dt + noise[s, j]
        for j in range(n_sites):
            alpha[j] = a_new[j]
            if not (abs(alpha[j]) <= max_abs[j]):
                return 1, rec
        k = step0 + s + 1 - burn
        if k > 0 and k % stride == 0 and rec < out.shape[0]:
            for j in range(n_sites):
                out[rec, j] = alpha[j]
            rec += 1
    return 0, rec


def _common_frame(net: NetworkSpec) -> float:
    # mean limit-cycle frequency; relative phases do not depend on it
    return float(np.mean([p.omega - 2 * p.kerr * limit_cycle_occupation(p) for p in net.oscillators]))


def max_stable_dt(net: NetworkSpec) -> float:
    """Largest step accepted by :func:`simulate`, ``0.01 / max_rate_scale``."""
    scale = max_rate_scale(net, _common_frame(net))
    return 0.01 / scale if scale > 0 else math.inf


def _site_arrays(net: NetworkSpec, frame: float):
    ps = net.oscillators
    f = lambda attr: np.array([getattr(p, attr) for p in ps], dtype=float)  # noqa: E731
    return (f("omega") - frame, f("kerr"), f("gamma_plus"), f("gamma_minus"),
            f("n_plus"), f("n_minus"), f("sigma_plus") ** 2, f("sigma_minus") ** 2,
            np.ascontiguousarray(net.coupling, dtype=complex))


def _trajectory(net, frame, noise_strength, seed_seq, alpha0, dt, burn, n_samples, stride,
                exact_rotation=True):
    rng = np.random.default_rng(seed_seq)
    arrays = _site_arrays(net, frame)
    radius = np.sqrt([max(limit_cycle_occupation(p), 0.25) for p in net.oscillators])
    max_abs = DIVERGENCE_FACTOR * radius
    if alpha0 is None:
        alpha = radius * np.exp(2j * np.pi * rng.random(net.n_sites))
    else:
        alpha = np.array(alpha0, dtype=complex)
    out = np.empty((n_samples, net.n_sites), dtype=complex)
    total = burn + n_samples * stride
    sd = math.sqrt(noise_strength * dt / 2.0)
    step, rec = 0, 0
    while step < total:
        m = min(CHUNK_STEPS, total - step)
        re = rng.standard_normal((m, net.n_sites))
        im = rng.standard_normal((m, net.n_sites))
        noise = sd * (re + 1j * im)
        status, rec = _em_chunk(alpha, *arrays, noise, dt, step, burn, stride, out, rec, max_abs,
                                  exact_rotation)
        if status:
            return None
        step += m
    return out


def propagate(net: NetworkSpec, alpha0, dt: float, n_steps: int, *, noise_strength: float = 0.0,
              seed=None, scheme: str = "rotating") -> np.ndarray:
    """
    Amplitudes after ``n_steps`` integrator steps from ``alpha0``.

    Uses the same kernel as :func:`simulate` in the frame of the given
    frequencies; with ``noise_strength = 0`` the deterministic part alone
    is integrated.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    alpha = np.array(alpha0, dtype=complex)
    arrays = _site_arrays(net, 0.0)
    out = np.empty((0, net.n_sites), dtype=complex)
    max_abs = np.full(net.n_sites, np.inf)
    rng = np.random.default_rng(seed)
    sd = math.sqrt(noise_strength * dt / 2.0)
    done = 0
    while done < n_steps:
        m = min(CHUNK_STEPS, n_steps - done)
        if sd > 0:
            noise = sd * (rng.standard_normal((m, net.n_sites)) + 1j * rng.standard_normal((m, net.n_sites)))
        else:
            noise = np.zeros((m, net.n_sites), dtype=complex)
        _em_chunk(alpha, *arrays, noise, dt, 0, 0, 1, out, 0, max_abs, scheme == "rotating")
        done += m
    ClassicalState(alpha)
    return alpha


def simulate(net: NetworkSpec, noise: NoiseParams, dt: float = 1e-3, t_burn: float = 200.0,
             t_sample: float = 2000.0, n_traj: int = 32, sample_interval: float = 0.1,
             pairs=((0, 1),), threads: int = 1, alpha0=None,
             scheme: str = "rotating") -> ClassicalSamples:
    """
    Monte-Carlo relative phases of the classical network.

    Parameters
    ----------
    dt : float
        Euler-Maruyama step; must satisfy ``dt <= 0.01 / max_rate_scale``.
    t_burn, t_sample : float
        Discarded transient and sampled duration of each trajectory.
    n_traj : int
        Independently seeded trajectories.
    sample_interval : float
        Time between recorded samples (rounded to a whole number of steps).
    pairs : sequence of (j, k)
        Site pairs whose relative phase ``phi_j - phi_k`` is recorded.
    threads : int
        Trajectories integrated concurrently.
    alpha0 : array, optional
        Common initial amplitudes; by default each trajectory starts on the
        limit cycle with random phases.
    scheme : {"rotating", "euler"}
        Treat the local rotation exactly or with plain explicit Euler.

    Raises
    ------
    ValueError
        If ``dt`` violates the step-size bound.
    InstabilityError
        If every trajectory diverges.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    frame = _common_frame(net)
    bound = max_stable_dt(net)
    if dt > bound * (1 + 1e-12):
        raise ValueError(f"dt={dt} exceeds stability bound {bound:.3g}")
    burn = int(round(t_burn / dt))
    stride = max(1, int(round(sample_interval / dt)))
    n_samples = int(t_sample / (stride * dt))
    seeds = np.random.SeedSequence(noise.seed).spawn(n_traj)
    args = [(net, frame, noise.strength, s, alpha0, dt, burn, n_samples, stride,
             scheme == "rotating") for s in seeds]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(lambda a: _trajectory(*a), args))
    else:
        results = [_trajectory(*a) for a in args]
    unstable = [i for i, r in enumerate(results) if r is None]
    kept = [r for r in results if r is not None]
    if not kept:
        raise InstabilityError(f"all {n_traj} trajectories diverged")
    phases = {}
    for j, k in pairs:
        rel = np.stack([np.angle(r[:, j] * np.conj(r[:, k])) for r in kept])
        phases[(j, k)] = np.mod(rel, 2 * np.pi)
    return ClassicalSamples(phases, unstable, dt, stride * dt)


def classical_phase_histogram(samples, n_bins: int = 64, n_batches: int | None = None) -> PhaseDistribution:
    """
    Histogram density of relative phases and its synchronization measure.

    ``samples`` is a 1-d array or a ``(n_traj, n)`` array of phases. The
    standard error of S comes from batch means of the density in the
    maximal bin: one batch per trajectory for 2-d input with at least 16
    rows, otherwise ``n_batches`` (default 16) contiguous blocks.
    """
    samples = np.asarray(samples, dtype=float)
    total = samples.size
    if total < 10 * n_bins:
        raise ValueError(f"need at least {10 * n_bins} samples for {n_bins} bins, got {total}")
    if samples.ndim == 2 and n_batches is None and samples.shape[0] >= 16:
        batches = list(samples)
    else:
        batches = np.array_split(samples.ravel(), n_batches or 16)
    edges = np.linspace(0.0, 2 * np.pi, n_bins + 1)
    width = edges[1] - edges[0]
    phi = np.mod(samples.ravel(), 2 * np.pi)
    counts, _ = np.histogram(phi, bins=edges)
    density = counts / (total * width)
    top = int(np.argmax(density))
    per_batch = []
    for b in batches:
        c, _ = np.histogram(np.mod(b, 2 * np.pi), bins=edges)
        per_batch.append(c[top] / (b.size * width))
    per_batch = np.array(per_batch)
    stderr = 2 * np.pi * per_batch.std(ddof=1) / np.sqrt(len(per_batch))
    centers = 0.5 * (edges[:-1] + edges[1:])
    s = float(2 * np.pi * density[top] - 1.0)
    return PhaseDistribution({}, centers, density, s, float(stderr), int(total))

"""
Physical model: Kerr oscillators with Fock-state stabilizing dissipation.

Each oscillator has the Hamiltonian ``omega a†a - K a†a†aa`` and a ladder of
independent jump channels ``sqrt(n)|n⟩⟨n-1|`` (gain) and ``sqrt(n)|n-1⟩⟨n|``
(loss) weighted by Lorentzians in ``n``. Oscillators couple through
``V = sum_jk C_jk a_j† a_k``.

All rates are in units of a common reference rate (normally gamma). The
network is written in a rotating frame; only frequency differences matter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .fock import (
    DimensionError,
    ModeLayout,
    annihilation_matrix,
    creation_matrix,
    embed_site,
    prune,
)

__all__ = [
    "TRUNCATION_MARGIN",
    "InvalidParameterError",
    "OscillatorParams",
    "NetworkSpec",
    "SidebandParams",
    "lorentzian_rate",
    "site_energies",
    "site_hamiltonian",
    "stabilizer_jump_ops",
    "coupling_hamiltonian",
    "sideband_parameters",
    "default_dimension",
    "two_oscillators",
]

#: Extra Fock levels kept above ceil(n_minus) + 1 by :func:`default_dimension`.
TRUNCATION_MARGIN = 6


class InvalidParameterError(ValueError):
    """Raised for physically invalid model parameters."""


@dataclass(frozen=True)
class OscillatorParams:
    """Constants of one self-oscillator."""

    omega: float = 0.0
    kerr: float = 0.0
    gamma_plus: float = 1.0
    gamma_minus: float = 1.0
    n_plus: float = 1.0
    n_minus: float = 2.0
    sigma_plus: float = 0.2
    sigma_minus: float = 0.2

    def __post_init__(self):
        if self.sigma_plus <= 0 or self.sigma_minus <= 0:
            raise InvalidParameterError("Lorentzian widths must be positive")
        if self.gamma_plus < 0 or self.gamma_minus < 0:
            raise InvalidParameterError("gamma_plus and gamma_minus must be >= 0")
        if self.kerr < 0:
            raise InvalidParameterError("kerr must be >= 0")
        if self.n_plus < 0 or self.n_minus < 0:
            raise InvalidParameterError("Lorentzian centers must be >= 0")

    @classmethod
    def stabilized(cls, n_plus: float, *, omega: float = 0.0, kerr: float = 0.0,
                   gamma: float = 1.0, sigma: float = 0.2) -> "OscillatorParams":
        """Symmetric choice used throughout: equal gamma and sigma, n_minus = n_plus + 1."""
        return cls(omega=omega, kerr=kerr, gamma_plus=gamma, gamma_minus=gamma,
                   n_plus=n_plus, n_minus=n_plus + 1.0,
                   sigma_plus=sigma, sigma_minus=sigma)

    def with_(self, **changes) -> "OscillatorParams":
        return replace(self, **changes)

    def f_plus(self, n):
        return lorentzian_rate(n, self.n_plus, self.sigma_plus)

    def f_minus(self, n):
        return lorentzian_rate(n, self.n_minus, self.sigma_minus)


def default_dimension(p: OscillatorParams, margin: int = TRUNCATION_MARGIN) -> int:
    return int(math.ceil(p.n_minus)) + 1 + int(margin)


@dataclass(frozen=True)
class NetworkSpec:
    """Oscillators, their coupling matrix and the per-site truncation."""

    oscillators: tuple[OscillatorParams, ...]
    coupling: np.ndarray
    layout: ModeLayout = None  # type: ignore[assignment]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        oscs = tuple(self.oscillators)
        n = len(oscs)
        if n == 0:
            raise InvalidParameterError("network needs at least one oscillator")
        C = np.atleast_2d(np.asarray(self.coupling, dtype=complex))
        if C.shape != (n, n):
            raise InvalidParameterError(f"coupling matrix must be {n}x{n}, got {C.shape}")
        if not np.allclose(C, C.conj().T, atol=1e-14, rtol=0):
            raise InvalidParameterError("coupling matrix must be Hermitian")
        if np.any(np.abs(np.diag(C)) > 0):
            raise InvalidParameterError("coupling matrix must have zero diagonal")
        if not np.allclose(C.imag, 0.0, atol=1e-14):
            raise InvalidParameterError("coupling matrix entries must be real")
        C = C.real.copy()
        C.setflags(write=False)
        layout = self.layout
        if layout is None:
            layout = ModeLayout(tuple(default_dimension(p) for p in oscs))
        elif not isinstance(layout, ModeLayout):
            layout = ModeLayout(tuple(layout))
        if layout.n_sites != n:
            raise InvalidParameterError(
                f"layout has {layout.n_sites} sites but network has {n} oscillators")
        labels = tuple(self.labels) or tuple(chr(ord("A") + j) for j in range(n))
        if len(labels) != n:
            raise InvalidParameterError("one label per oscillator required")
        object.__setattr__(self, "oscillators", oscs)
        object.__setattr__(self, "coupling", C)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "labels", labels)

    @property
    def n_sites(self) -> int:
        return len(self.oscillators)

    def replace_oscillator(self, j: int, p: OscillatorParams) -> "NetworkSpec":
        oscs = list(self.oscillators)
        oscs[j] = p
        return replace(self, oscillators=tuple(oscs))


def two_oscillators(p1: OscillatorParams, p2: OscillatorParams, coupling: float,
                    dims: Sequence[int] | None = None) -> NetworkSpec:
    C = np.array([[0.0, coupling], [coupling, 0.0]])
    layout = ModeLayout(tuple(dims)) if dims is not None else None
    return NetworkSpec((p1, p2), C, layout)


@dataclass(frozen=True)
class SidebandParams:
    """Cavity-sideband implementation parameters (before adiabatic elimination)."""

    g: float
    kappa: float
    delta_plus: float
    delta_minus: float
    omega0: float
    kerr: float


def lorentzian_rate(n, center: float, sigma: float):
    """Lorentzian weight ``sigma² / ((n - center)² + sigma²)``, peak value 1."""
    if sigma <= 0:
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    n = np.asarray(n, dtype=float)
    out = sigma**2 / ((n - center) ** 2 + sigma**2)
    return float(out) if out.ndim == 0 else out


def site_energies(p: OscillatorParams, d: int) -> np.ndarray:
    n = np.arange(int(d), dtype=float)
    return p.omega * n - p.kerr * n * (n - 1)


def site_hamiltonian(p: OscillatorParams, d: int) -> sp.csr_matrix:
    if d < 2:
        raise DimensionError(f"dimension must be >= 2, got {d}")
    return prune(sp.diags(site_energies(p, d)))


def stabilizer_jump_ops(p: OscillatorParams, d: int) -> list[tuple[float, sp.csr_matrix]]:
    """
    Rate-weighted ladder jump operators of one oscillator.

    Returns ``(rate, L)`` pairs, gain terms first then loss terms, each in
    order of increasing ``n``. The generator contribution is
    ``rate * D[L]`` with the standard ``D[L]ρ = LρL† - {L†L, ρ}/2``:

        gain  n-1 -> n : rate = gamma_plus  * f_plus(n),  L = sqrt(n)|n⟩⟨n-1|
        loss  n -> n-1 : rate = gamma_minus * f_minus(n), L = sqrt(n)|n-1⟩⟨n|

    so the population transfer rate out of the initial level is
    ``rate * n``. Writing the prefactor as ``gamma f / 2`` instead
    corresponds to the doubled dissipator ``2LρL† - {L†L, ρ}``; the two
    forms are the same generator.
    """
    if d < 2:
        raise DimensionError(f"dimension must be >= 2, got {d}")
    ops = []
    for n in range(1, d):
        rate = p.gamma_plus * p.f_plus(n)
        if rate > 0:
            up = sp.csr_matrix(([math.sqrt(n)], ([n], [n - 1])), shape=(d, d), dtype=complex)
            ops.append((rate, up))
    for n in range(1, d):
        rate = p.gamma_minus * p.f_minus(n)
        if rate > 0:
            down = sp.csr_matrix(([math.sqrt(n)], ([n - 1], [n])), shape=(d, d), dtype=complex)
            ops.append((rate, down))
    return ops


def coupling_hamiltonian(net: NetworkSpec) -> sp.csr_matrix:
    layout = net.layout
    V = sp.csr_matrix((layout.total, layout.total), dtype=complex)
    for j in range(net.n_sites):
        for k in range(net.n_sites):
            c = net.coupling[j, k]
            if c == 0:
                continue
            adag_j = embed_site(creation_matrix(layout.dims[j]), j, layout)
            a_k = embed_site(annihilation_matrix(layout.dims[k]), k, layout)
            V = V + c * (adag_j @ a_k)
    return prune(V)


def sideband_parameters(s: SidebandParams) -> tuple[float, float, float, float]:
    """Map cavity sideband parameters to ``(gamma, sigma, n_plus, n_minus)``."""
    if s.kappa <= 0:
        raise InvalidParameterError("kappa must be positive")
    if s.kerr <= 0:
        raise InvalidParameterError("kerr must be positive")
    gamma = 4.0 * s.g**2 / s.kappa
    sigma = s.kappa / (8.0 * s.kerr)
    n_plus = (s.delta_plus - s.omega0) / (2.0 * s.kerr)
    n_minus = -(s.delta_minus - s.omega0) / (2.0 * s.kerr)
    return gamma, sigma, n_plus, n_minus

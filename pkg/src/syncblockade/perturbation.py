"""
First-order steady state of two weakly coupled oscillators.

Uncoupled, each oscillator relaxes to a diagonal state ``rho0``. The coupling
``c (a1† a2 + a2† a1)`` feeds only the coherences
``|m1-1, m2+1⟩⟨m1, m2|`` (and their conjugates). The uncoupled generator
acts on each such coherence as multiplication by a complex rate ``lambda``,
so the first-order correction is obtained in closed form and

    S ≈ 2 |sum_{m1>=1, m2>=0} rho1[(m1-1, m2+1), (m1, m2)]|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import OscillatorParams
from .steadystate import uncoupled_fock_populations

__all__ = [
    "CoherenceElement",
    "lambda_minus",
    "first_order_coherences",
    "first_order_state",
    "perturbative_sync",
]


@dataclass(frozen=True)
class CoherenceElement:
    """``rho1`` between ket ``|m1-1, m2+1⟩`` and bra ``⟨m1, m2|``."""

    m1: int
    m2: int
    value: complex
    lam: complex


def lambda_minus(m1: int, m2: int, p1: OscillatorParams, p2: OscillatorParams,
                 dims: tuple[int, int] | None = None) -> complex:
    """
    Eigenvalue of the uncoupled generator on ``|m1-1, m2+1⟩⟨m1, m2|``.

    The imaginary part is minus the energy difference of ket and bra,
    ``-omega1 + omega2 + 2 K1 m1 - 2 K2 m2 - 2 K1``; the real part is minus
    half the total escape rate of the four levels involved. With ``dims``
    given, ladder steps that would leave the truncated space are omitted so
    the result is exact for the truncated generator.
    """
    if m1 < 1 or m2 < 0:
        raise ValueError(f"need m1 >= 1 and m2 >= 0, got ({m1}, {m2})")
    d1, d2 = dims if dims is not None else (np.inf, np.inf)

    def up(p, n, d):
        # escape weight n f_+(n) of the step n-1 -> n, absent if n is truncated
        return n * p.f_plus(n) if n < d else 0.0

    detuning = -p1.omega + p2.omega + 2 * p1.kerr * m1 - 2 * p2.kerr * m2 - 2 * p1.kerr
    damping = (
        p1.gamma_plus / 2 * (up(p1, m1, d1) + up(p1, m1 + 1, d1))
        + p1.gamma_minus / 2 * ((m1 - 1) * p1.f_minus(m1 - 1) + m1 * p1.f_minus(m1))
        + p2.gamma_plus / 2 * (up(p2, m2 + 2, d2) + up(p2, m2 + 1, d2))
        + p2.gamma_minus / 2 * ((m2 + 1) * p2.f_minus(m2 + 1) + m2 * p2.f_minus(m2))
    )
    return complex(-damping, -detuning)


def first_order_coherences(p1: OscillatorParams, p2: OscillatorParams, c: float,
                           d1: int, d2: int) -> list[CoherenceElement]:
    """
    Nonzero first-order coherences for real coupling ``c``.

    ``rho1 = -L0^{-1} L1 rho0`` with ``L1 = -i[V, ·]`` gives

        rho1[(m1-1, m2+1), (m1, m2)] = i c sqrt(m1 (m2+1))
            (rho0[m1, m2] - rho0[m1-1, m2+1]) / lambda(m1, m2).
    """
    pop1 = uncoupled_fock_populations(p1, d1)
    pop2 = uncoupled_fock_populations(p2, d2)
    out = []
    for m1 in range(1, d1):
        for m2 in range(0, d2 - 1):
            lam = lambda_minus(m1, m2, p1, p2, (d1, d2))
            dpop = pop1[m1] * pop2[m2] - pop1[m1 - 1] * pop2[m2 + 1]
            value = 1j * c * np.sqrt(m1 * (m2 + 1)) * dpop / lam
            out.append(CoherenceElement(m1, m2, complex(value), lam))
    return out


def first_order_state(p1: OscillatorParams, p2: OscillatorParams, c: float,
                      d1: int, d2: int) -> np.ndarray:
    """``rho0 + rho1`` as a dense matrix on the two-mode space."""
    rho0 = np.kron(np.diag(uncoupled_fock_populations(p1, d1)),
                   np.diag(uncoupled_fock_populations(p2, d2))).astype(complex)
    rho = rho0.copy()
    for e in first_order_coherences(p1, p2, c, d1, d2):
        ket = (e.m1 - 1) * d2 + (e.m2 + 1)
        bra = e.m1 * d2 + e.m2
        rho[ket, bra] += e.value
        rho[bra, ket] += np.conj(e.value)
    return rho


def perturbative_sync(p1: OscillatorParams, p2: OscillatorParams, c: float,
                      d1: int, d2: int) -> float:
    total = sum(e.value for e in first_order_coherences(p1, p2, c, d1, d2))
    return float(2 * abs(total))

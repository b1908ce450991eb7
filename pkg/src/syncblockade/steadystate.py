"""
Steady states of sparse Liouvillians.

The production path replaces the equation for the ``(0, 0)`` matrix element
with the trace condition and solves the resulting sparse system by LU.
:func:`dense_nullspace_oracle` is an independent full-spectrum route for small
systems, and :func:`uncoupled_fock_populations` is the closed-form ladder
recursion for an isolated oscillator.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fock import DimensionError, ModeLayout, partial_trace, unvec, vec
from .model import InvalidParameterError, OscillatorParams

__all__ = [
    "RESIDUAL_TOL",
    "POSITIVITY_SLACK",
    "SolverError",
    "MultiplicityWarning",
    "DensityMatrix",
    "solve_steady_state",
    "balanced_sector",
    "relative_residual",
    "uncoupled_fock_populations",
    "dense_nullspace_oracle",
    "truncation_residual",
]

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
POSITIVITY_SLACK = 1e-8
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
DENSE_ORACLE_MAX_DIM = 64


class SolverError(RuntimeError):
    """The steady-state solve did not reach the residual tolerance."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(f"{message} (relative residual {residual:.3e})")
        self.residual = residual


class MultiplicityWarning(RuntimeWarning):
    """The generator appears to have more than one steady state."""


@dataclass(frozen=True)
class DensityMatrix:
    layout: ModeLayout
    data: np.ndarray
    residual: float = 0.0
    method: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T))[0])

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.data))

    def reduced(self, keep) -> "DensityMatrix":
        keep = sorted(keep)
        return DensityMatrix(self.layout.sub(keep), partial_trace(self.data, self.layout, keep))

    def validate(self, positivity_slack: float = POSITIVITY_SLACK) -> None:
        """Raise ``ValueError`` if Hermiticity, trace or positivity is violated."""
        herm = self.hermiticity_error()
        if herm > HERMITICITY_TOL:
            raise ValueError(f"state is not Hermitian (deviation {herm:.2e})")
        tr = abs(self.trace() - 1.0)
        if tr > TRACE_TOL:
            raise ValueError(f"state trace deviates from 1 by {tr:.2e}")
        lam = self.min_eigenvalue()
        if lam < -positivity_slack:
            raise ValueError(f"state has negative eigenvalue {lam:.2e}")


def relative_residual(L, rho) -> float:
    """``||L vec(rho)||_2 / ||L||_F``."""
    r = L @ vec(rho)
    norm = spla.norm(L) if sp.issparse(L) else np.linalg.norm(L)
    return float(np.linalg.norm(r) / norm) if norm > 0 else float(np.linalg.norm(r))


def _finish(x, dim: int) -> np.ndarray:
    rho = unvec(x, dim)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def balanced_sector(layout: ModeLayout) -> np.ndarray:
    """Vectorized indices whose ket and bra carry equal total excitation number."""
    n_tot = np.zeros(1, dtype=int)
    for d in layout.dims:
        n_tot = (n_tot[:, None] + np.arange(d)[None, :]).ravel()
    dim = layout.total
    # column stacking: index = ket + bra * dim
    ket = np.tile(np.arange(dim), dim)
    bra = np.repeat(np.arange(dim), dim)
    return np.flatnonzero(n_tot[ket] == n_tot[bra])


def _decouples(L, idx: np.ndarray) -> bool:
    inside = np.zeros(L.shape[0], dtype=bool)
    inside[idx] = True
    coo = L.tocoo()
    return not np.any(inside[coo.row] != inside[coo.col])


class _Reduced:
    """Generator restricted to a closed block of vectorized indices."""

    def __init__(self, L, dim: int, idx: np.ndarray | None):
        self.dim = dim
        self.n_full = dim * dim
        if idx is None:
            idx = np.arange(self.n_full)
            self.M = L
        else:
            self.M = L[idx][:, idx].tocsr()
        self.idx = idx
        pos = np.full(self.n_full, -1)
        pos[idx] = np.arange(idx.size)
        self.diag_pos = pos[np.arange(dim) * (dim + 1)]

    def lift(self, x) -> np.ndarray:
        full = np.zeros(self.n_full, dtype=complex)
        full[self.idx] = x
        return full

    def constrained(self, row: int):
        """Block with equation ``row`` replaced by the trace functional."""
        n = self.M.shape[0]
        keep = np.ones(n)
        keep[row] = 0.0
        T = sp.csr_matrix((np.ones(self.dim, dtype=complex),
                           (np.full(self.dim, row), self.diag_pos)), shape=(n, n))
        A = (sp.diags(keep) @ self.M + T).tocsc()
        b = np.zeros(n, dtype=complex)
        b[row] = 1.0
        return A, b


def _direct(red: _Reduced, row: int, refine: int = 3):
    A, b = red.constrained(row)
    lu = spla.splu(A, permc_spec="MMD_AT_PLUS_A")  # RuntimeError if exactly singular
    x = lu.solve(b)
    for _ in range(refine):
        r = b - A @ x
        if np.linalg.norm(r) <= 1e-15 * np.linalg.norm(b):
            break
        x = x + lu.solve(r)
    if not np.all(np.isfinite(x)):
        raise RuntimeError("non-finite solution from direct solve")
    return _finish(red.lift(x), red.dim)


def _inverse_iteration(L, red: _Reduced, variant: int, max_iter: int, tol: float):
    M = red.M
    n = M.shape[0]
    scale = float(spla.norm(M, 1)) or 1.0
    shift = 1e-10 * scale
    lu = spla.splu((M - shift * sp.identity(n, format="csc")).tocsc(), permc_spec="MMD_AT_PLUS_A")
    x = np.zeros(n, dtype=complex)
    weights = np.ones(red.dim) if variant == 0 else np.linspace(1.0, 2.0, red.dim)
    x[red.diag_pos] = weights / weights.sum()
    rho = _finish(red.lift(x), red.dim)
    res = relative_residual(L, rho)
    for _ in range(max_iter):
        x = lu.solve(x)
        x /= np.linalg.norm(x)
        rho = _finish(red.lift(x), red.dim)
        res = relative_residual(L, rho)
        if res <= tol:
            break
    return rho, res


def _solve_once(L, red: _Reduced, row: int, variant: int, tol: float, max_iter: int):
    try:
        rho = _direct(red, row)
        res = relative_residual(L, rho)
        if res <= tol:
            return rho, res, "direct"
        log.debug("direct solve residual %.3e above tolerance, falling back", res)
    except RuntimeError as exc:
        log.debug("direct solve failed (%s), falling back to inverse iteration", exc)
    rho, res = _inverse_iteration(L, red, variant, max_iter, tol)
    return rho, res, "inverse-iteration"


def solve_steady_state(L, layout: ModeLayout, *, tol: float = RESIDUAL_TOL,
                       max_iter: int = 50, check_multiplicity: bool = False,
                       reduce: bool = True) -> DensityMatrix:
    """
    Unit-trace null vector of ``L`` as a density matrix.

    Parameters
    ----------
    L : sparse matrix
        Column-stacked generator of dimension ``layout.total**2``.
    layout : ModeLayout
    tol : float
        Acceptance threshold on :func:`relative_residual` of the full ``L``.
    max_iter : int
        Iterations of the shifted inverse-iteration fallback.
    check_multiplicity : bool
        Solve a second time with a different constraint row and start
        vector and warn with :class:`MultiplicityWarning` if the two
        candidates differ.
    reduce : bool
        If ``L`` does not connect the :func:`balanced_sector` to the rest
        of the space (true whenever the coupling conserves excitation
        number), factor only that block. The trace functional lives there,
        so a unique steady state does too.

    Raises
    ------
    SolverError
        If neither the direct solve nor the fallback reaches ``tol``.
    """
    L = sp.csr_matrix(L)
    dim = layout.total
    if L.shape != (dim * dim, dim * dim):
        raise DimensionError(f"generator shape {L.shape} does not match layout {layout.dims}")
    idx = None
    if reduce:
        idx = balanced_sector(layout)
        if not _decouples(L, idx):
            idx = None
    red = _Reduced(L, dim, idx)
    rho, res, method = _solve_once(L, red, 0, 0, tol, max_iter)
    if res > tol:
        raise SolverError("steady-state solve did not converge", res)
    if check_multiplicity:
        last = int(red.diag_pos[-1])
        other, _, _ = _solve_once(L, red, last, 1, tol, max_iter)
        gap = float(np.max(np.abs(other - rho)))
        if gap > 1e-8:
            warnings.warn(
                f"steady state is not unique: two candidates differ by {gap:.2e}",
                MultiplicityWarning, stacklevel=2)
    if idx is not None:
        method += "/balanced-sector"
    return DensityMatrix(layout, rho, residual=res, method=method)


def uncoupled_fock_populations(p: OscillatorParams, d: int) -> np.ndarray:
    """
    Steady-state Fock populations of an isolated oscillator.

    Detailed balance across each ladder step gives
    ``p_m / p_{m-1} = (gamma_plus f_plus(m)) / (gamma_minus f_minus(m))``.
    """
    if d < 2:
        raise DimensionError(f"dimension must be >= 2, got {d}")
    if p.gamma_minus <= 0:
        raise InvalidParameterError("gamma_minus must be positive for a normalizable state")
    m = np.arange(1, d)
    ratios = (p.gamma_plus * p.f_plus(m)) / (p.gamma_minus * p.f_minus(m))
    pops = np.concatenate([[1.0], np.cumprod(ratios)])
    return pops / pops.sum()


def dense_nullspace_oracle(L, layout: ModeLayout) -> DensityMatrix:
    """Steady state from the dense eigenvector whose eigenvalue is nearest zero."""
    dim = layout.total
    if dim > DENSE_ORACLE_MAX_DIM:
        raise DimensionError(f"dense oracle limited to total dimension {DENSE_ORACLE_MAX_DIM}, got {dim}")
    Ld = L.toarray() if sp.issparse(L) else np.asarray(L)
    w, v = scipy.linalg.eig(Ld)
    k = int(np.argmin(np.abs(w)))
    rho = _finish(v[:, k], dim)
    return DensityMatrix(layout, rho, residual=relative_residual(L, rho), method="dense-eig")


def truncation_residual(rho: DensityMatrix) -> np.ndarray:
    """Population in the two highest Fock levels of each site."""
    tails = []
    for j, d in enumerate(rho.layout.dims):
        pops = np.real(np.diag(partial_trace(rho.data, rho.layout, [j])))
        tails.append(float(pops[-2:].sum()))
    return np.array(tails)

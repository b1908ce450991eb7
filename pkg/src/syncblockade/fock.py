"""
Sparse operator algebra on truncated multi-mode Fock spaces.

Operators are ``scipy.sparse`` CSR matrices of complex dtype. Multi-mode
spaces are described by a :class:`ModeLayout`; site 0 is the slowest-varying
tensor index, so ``|n0, n1⟩`` sits at flat index ``n0 * d1 + n1``.

Superoperators act on density matrices vectorized by column stacking,
``vec(rho) = rho.reshape(-1, order="F")``, for which

    vec(A @ rho @ B) = kron(B.T, A) @ vec(rho).

Every superoperator builder in the package uses this convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "DROP_TOL",
    "DimensionError",
    "ModeLayout",
    "annihilation_matrix",
    "creation_matrix",
    "number_matrix",
    "identity",
    "embed_site",
    "hamiltonian_superop",
    "dissipator_superop",
    "apply_superop",
    "vec",
    "unvec",
    "trace_row",
    "partial_trace",
    "prune",
]

#: Entries with modulus below this are dropped from constructed operators.
DROP_TOL = 1e-14


class DimensionError(ValueError):
    """Raised for invalid or mismatched Hilbert-space dimensions."""


@dataclass(frozen=True)
class ModeLayout:
    """Per-site Fock truncation dimensions of a multi-mode system."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise DimensionError("layout needs at least one site")
        if any(d < 2 for d in dims):
            raise DimensionError(f"every site dimension must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    def sub(self, sites: Sequence[int]) -> "ModeLayout":
        return ModeLayout(tuple(self.dims[s] for s in sites))


def prune(m, tol: float = DROP_TOL) -> sp.csr_matrix:
    """Return ``m`` as complex CSR with entries below ``tol`` removed."""
    m = sp.csr_matrix(m, dtype=complex)
    m.sum_duplicates()
    if tol > 0 and m.nnz:
        m.data[np.abs(m.data) < tol] = 0.0
    m.eliminate_zeros()
    return m


def _check_dim(d: int) -> int:
    d = int(d)
    if d < 2:
        raise DimensionError(f"dimension must be >= 2, got {d}")
    return d


def annihilation_matrix(d: int) -> sp.csr_matrix:
    """Bosonic annihilation operator truncated to ``d`` Fock levels."""
    d = _check_dim(d)
    n = np.arange(1, d)
    return prune(sp.csr_matrix((np.sqrt(n), (n - 1, n)), shape=(d, d)))


def creation_matrix(d: int) -> sp.csr_matrix:
    return prune(annihilation_matrix(d).T.conj())


def number_matrix(d: int) -> sp.csr_matrix:
    d = _check_dim(d)
    return prune(sp.diags(np.arange(d, dtype=float)))


def identity(d: int) -> sp.csr_matrix:
    return sp.identity(int(d), dtype=complex, format="csr")


def embed_site(op, site: int, layout: ModeLayout) -> sp.csr_matrix:
    """Lift a single-site operator to ``I ⊗ … ⊗ op ⊗ … ⊗ I``."""
    if not 0 <= site < layout.n_sites:
        raise IndexError(f"site {site} out of range for {layout.n_sites} sites")
    if op.shape != (layout.dims[site], layout.dims[site]):
        raise DimensionError(
            f"operator shape {op.shape} does not match site dimension {layout.dims[site]}"
        )
    left = int(np.prod(layout.dims[:site], dtype=int))
    right = int(np.prod(layout.dims[site + 1:], dtype=int))
    out = sp.csr_matrix(op, dtype=complex)
    if left > 1:
        out = sp.kron(identity(left), out, format="csr")
    if right > 1:
        out = sp.kron(out, identity(right), format="csr")
    return prune(out)


def _is_hermitian(m, tol: float) -> bool:
    diff = m - m.T.conj()
    if not sp.issparse(diff):
        return bool(np.max(np.abs(diff), initial=0.0) <= tol)
    return diff.nnz == 0 or bool(np.max(np.abs(diff.data)) <= tol)


def hamiltonian_superop(H, tol: float = 1e-12) -> sp.csr_matrix:
    """Superoperator of ``rho -> -i (H rho - rho H)``."""
    H = sp.csr_matrix(H, dtype=complex)
    if H.shape[0] != H.shape[1]:
        raise DimensionError(f"Hamiltonian must be square, got {H.shape}")
    if not _is_hermitian(H, tol):
        raise ValueError("Hamiltonian is not Hermitian")
    eye = identity(H.shape[0])
    return prune(-1j * (sp.kron(eye, H) - sp.kron(H.T, eye)))


def dissipator_superop(L) -> sp.csr_matrix:
    """Superoperator of ``D[L] rho = L rho L† - (L†L rho + rho L†L) / 2``."""
    L = sp.csr_matrix(L, dtype=complex)
    if L.shape[0] != L.shape[1]:
        raise DimensionError(f"jump operator must be square, got {L.shape}")
    eye = identity(L.shape[0])
    LdL = (L.T.conj() @ L).tocsr()
    out = sp.kron(L.conj(), L) - 0.5 * sp.kron(eye, LdL) - 0.5 * sp.kron(LdL.T, eye)
    return prune(out)


def vec(rho) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise DimensionError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape((dim, dim), order="F")


def apply_superop(S, rho) -> np.ndarray:
    """Apply a superoperator to a dense density matrix."""
    rho = np.asarray(rho)
    return unvec(S @ vec(rho), rho.shape[0])


def trace_row(dim: int) -> sp.csr_matrix:
    """Row vector ``t`` with ``t @ vec(rho) == trace(rho)``."""
    idx = np.arange(dim) * (dim + 1)
    return sp.csr_matrix((np.ones(dim, dtype=complex), (np.zeros(dim, dtype=int), idx)),
                         shape=(1, dim * dim))


def partial_trace(rho, layout: ModeLayout, keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix on the sites in ``keep``, ordered ascending."""
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= layout.n_sites:
        raise IndexError(f"keep {keep} out of range for {layout.n_sites} sites")
    rho = np.asarray(rho)
    if rho.shape != (layout.total, layout.total):
        raise DimensionError(f"state shape {rho.shape} does not match layout {layout.dims}")
    n = layout.n_sites
    t = rho.reshape(layout.dims + layout.dims)
    # contract traced ket/bra index pairs, highest site first so axes stay valid
    for s in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=s, axis2=s + t.ndim // 2)
    d = int(np.prod([layout.dims[k] for k in keep]))
    return t.reshape(d, d)

"""Assembly of the network generator as one sparse superoperator."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .fock import dissipator_superop, embed_site, hamiltonian_superop, prune
from .model import NetworkSpec, coupling_hamiltonian, site_hamiltonian, stabilizer_jump_ops

__all__ = [
    "DEFAULT_MEMORY_BUDGET",
    "CapacityError",
    "estimate_memory",
    "network_hamiltonian",
    "network_jump_ops",
    "build_network_liouvillian",
]

DEFAULT_MEMORY_BUDGET = 8 * 1024**3

# bytes per stored complex entry in CSR (value + column index) and a
# multiplier covering assembly temporaries and the sparse LU factors
_BYTES_PER_ENTRY = 24
_WORKSPACE_FACTOR = 40


class CapacityError(MemoryError):
    """The requested superoperator would not fit the memory budget."""


def estimate_memory(net: NetworkSpec) -> int:
    """Rough upper estimate of bytes needed to build and factor the generator."""
    dim2 = net.layout.total ** 2
    n_hops = int(np.count_nonzero(net.coupling))
    # diagonal + two hop entries per coupling term + one jump entry per site
    per_row = 1 + 2 * n_hops + net.n_sites
    return dim2 * per_row * _BYTES_PER_ENTRY * _WORKSPACE_FACTOR


def network_hamiltonian(net: NetworkSpec) -> sp.csr_matrix:
    layout = net.layout
    H = coupling_hamiltonian(net)
    for j, p in enumerate(net.oscillators):
        H = H + embed_site(site_hamiltonian(p, layout.dims[j]), j, layout)
    return prune(H)


def network_jump_ops(net: NetworkSpec) -> list[tuple[float, sp.csr_matrix]]:
    """All site jump operators lifted to the full space, site by site."""
    out = []
    for j, p in enumerate(net.oscillators):
        for rate, L in stabilizer_jump_ops(p, net.layout.dims[j]):
            out.append((rate, embed_site(L, j, net.layout)))
    return out


def build_network_liouvillian(net: NetworkSpec,
                              memory_budget: int = DEFAULT_MEMORY_BUDGET) -> sp.csr_matrix:
    """
    Sparse generator ``-i[sum_j H_j + V, ·] + sum_j L_j`` of the network.

    Terms are summed in a fixed order (Hamiltonian, then site 0 gain/loss
    ladders, site 1, ...) so repeated builds are bit-identical.

    Raises
    ------
    CapacityError
        If :func:`estimate_memory` exceeds ``memory_budget``.
    """
    need = estimate_memory(net)
    if need > memory_budget:
        dim2 = net.layout.total ** 2
        raise CapacityError(
            f"superoperator of dimension {dim2} (= {net.layout.total}^2) needs about "
            f"{need / 1024**3:.1f} GiB, budget is {memory_budget / 1024**3:.1f} GiB")
    L = hamiltonian_superop(network_hamiltonian(net))
    for rate, op in network_jump_ops(net):
        L = L + rate * dissipator_superop(op)
    return prune(L)

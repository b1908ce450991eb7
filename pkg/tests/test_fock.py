import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density, random_hermitian
from syncblockade.fock import (
    DROP_TOL,
    DimensionError,
    ModeLayout,
    annihilation_matrix,
    apply_superop,
    creation_matrix,
    dissipator_superop,
    embed_site,
    hamiltonian_superop,
    identity,
    number_matrix,
    partial_trace,
    prune,
    trace_row,
    unvec,
    vec,
)


def dense_lindblad(H, Ls, rho):
    out = -1j * (H @ rho - rho @ H)
    for L in Ls:
        LdL = L.conj().T @ L
        out += L @ rho @ L.conj().T - 0.5 * (LdL @ rho + rho @ LdL)
    return out


def test_layout_rejects_small_dims():
    with pytest.raises(DimensionError):
        ModeLayout((3, 1))
    assert ModeLayout((2, 3, 4)).total == 24


def test_annihilation_entries():
    assert annihilation_matrix(2).toarray().tolist() == [[0, 1], [0, 0]]
    a = annihilation_matrix(4).toarray()
    expected = np.zeros((4, 4))
    expected[0, 1], expected[1, 2], expected[2, 3] = 1, np.sqrt(2), np.sqrt(3)
    np.testing.assert_array_equal(a, expected)
    assert annihilation_matrix(4).nnz == 3


def test_number_operator_diagonal():
    n = (creation_matrix(3) @ annihilation_matrix(3)).toarray()
    np.testing.assert_allclose(n, np.diag([0, 1, 2]))
    np.testing.assert_allclose(number_matrix(3).toarray(), n)


def test_prune_drops_tiny_entries():
    m = sp.csr_matrix(np.array([[1.0, DROP_TOL / 10], [0.0, 2.0]]))
    assert prune(m).nnz == 2


def test_embed_identity_and_site_order():
    layout = ModeLayout((2, 3))
    np.testing.assert_array_equal(embed_site(identity(3), 1, layout).toarray(), np.eye(6))
    a0 = embed_site(annihilation_matrix(2), 0, ModeLayout((2, 2))).toarray()
    # site 0 is the slowest index: |1,0> has index 2
    ket10 = np.zeros(4)
    ket10[2] = 1
    ket00 = np.zeros(4)
    ket00[0] = 1
    np.testing.assert_array_equal(a0 @ ket10, ket00)


def test_embed_rejects_wrong_shape():
    with pytest.raises(DimensionError):
        embed_site(annihilation_matrix(3), 0, ModeLayout((2, 2)))


def test_different_modes_commute():
    layout = ModeLayout((3, 4))
    a = embed_site(annihilation_matrix(3), 0, layout)
    bd = embed_site(creation_matrix(4), 1, layout)
    assert abs(a @ bd - bd @ a).max() == 0


@pytest.mark.parametrize("dims", [(2, 2), (3, 2), (2, 4), (4, 3)])
def test_embed_is_homomorphism(dims, rng):
    layout = ModeLayout(dims)
    for site, d in enumerate(dims):
        A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        B = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        lhs = embed_site(sp.csr_matrix(A @ B), site, layout).toarray()
        rhs = (embed_site(sp.csr_matrix(A), site, layout) @ embed_site(sp.csr_matrix(B), site, layout)).toarray()
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_vec_is_column_stacking():
    rho = np.arange(4).reshape(2, 2)
    np.testing.assert_array_equal(vec(rho), [0, 2, 1, 3])
    np.testing.assert_array_equal(unvec(vec(rho)), rho)


def test_zero_hamiltonian_and_identity_jump():
    assert hamiltonian_superop(sp.csr_matrix((3, 3))).nnz == 0
    assert dissipator_superop(identity(3)).nnz == 0


def test_hamiltonian_superop_rejects_non_hermitian():
    with pytest.raises(ValueError):
        hamiltonian_superop(annihilation_matrix(3))


def test_diagonal_hamiltonian_leaves_diagonal_state(rng):
    H = sp.diags(rng.normal(size=5))
    out = apply_superop(hamiltonian_superop(H), np.diag(rng.random(5)))
    assert np.max(np.abs(out)) == 0


def test_single_photon_decay():
    rho = np.diag([0.0, 1.0]).astype(complex)
    out = apply_superop(dissipator_superop(annihilation_matrix(2)), rho)
    np.testing.assert_allclose(out, np.diag([1.0, -1.0]), atol=1e-15)


@pytest.mark.parametrize("dim", [2, 4, 6])
def test_superops_match_dense_products(dim, rng):
    H = random_hermitian(dim, rng)
    Ls = [rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)) for _ in range(2)]
    rho = random_density(dim, rng)
    S = hamiltonian_superop(sp.csr_matrix(H))
    for L in Ls:
        S = S + dissipator_superop(sp.csr_matrix(L))
    np.testing.assert_allclose(apply_superop(S, rho), dense_lindblad(H, Ls, rho), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(d1=st.integers(2, 4), d2=st.integers(2, 4), seed=st.integers(0, 2**31))
def test_generator_image_is_traceless_hermitian(d1, d2, seed):
    rng = np.random.default_rng(seed)
    layout = ModeLayout((d1, d2))
    dim = layout.total
    H = sp.csr_matrix(random_hermitian(dim, rng))
    L = hamiltonian_superop(H)
    for site, d in enumerate(layout.dims):
        L = L + rng.random() * dissipator_superop(embed_site(annihilation_matrix(d), site, layout))
        L = L + rng.random() * dissipator_superop(embed_site(creation_matrix(d), site, layout))
    rho = random_hermitian(dim, rng)
    out = apply_superop(L, rho)
    assert abs(np.trace(out)) < 1e-12 * max(1.0, np.abs(rho).max() * dim**2)
    assert np.max(np.abs(out - out.conj().T)) < 1e-12 * max(1.0, np.abs(out).max())
    # the trace functional annihilates the generator
    assert np.max(np.abs(trace_row(dim) @ L)) < 1e-12


def test_partial_trace_product_state(rng):
    ra, rb = random_density(3, rng), random_density(2, rng)
    layout = ModeLayout((3, 2))
    rho = np.kron(ra, rb)
    np.testing.assert_allclose(partial_trace(rho, layout, [0]), ra, atol=1e-14)
    np.testing.assert_allclose(partial_trace(rho, layout, [1]), rb, atol=1e-14)
    np.testing.assert_allclose(partial_trace(rho, layout, [0, 1]), rho)


def test_partial_trace_three_sites_keeps_order(rng):
    rs = [random_density(d, rng) for d in (2, 3, 2)]
    layout = ModeLayout((2, 3, 2))
    rho = np.kron(np.kron(rs[0], rs[1]), rs[2])
    np.testing.assert_allclose(partial_trace(rho, layout, [0, 2]), np.kron(rs[0], rs[2]), atol=1e-14)
    assert abs(np.trace(partial_trace(rho, layout, [1])) - 1) < 1e-14


def test_partial_trace_of_entangled_state_has_half_purity():
    psi = np.zeros(4)
    psi[1] = psi[2] = 1 / np.sqrt(2)
    r = partial_trace(np.outer(psi, psi), ModeLayout((2, 2)), [0])
    assert np.trace(r @ r).real == pytest.approx(0.5, abs=1e-15)

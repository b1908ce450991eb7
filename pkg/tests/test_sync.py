import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density, random_hermitian
from syncblockade.fock import ModeLayout
from syncblockade.liouvillian import build_network_liouvillian
from syncblockade.model import NetworkSpec, OscillatorParams, two_oscillators
from syncblockade.steadystate import solve_steady_state
from syncblockade.sync import (
    pairwise_sync,
    phase_distribution,
    relative_phase_fourier,
    sync_measure,
)


def brute_force_density(rho, dims, phi):
    """<phi1, phi2|rho|phi1, phi2> integrated along phi1 - phi2 = phi, by quadrature."""
    d1, d2 = dims
    grid = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    out = []
    for p in phi:
        total = 0.0
        for p2 in grid:
            p1 = p + p2
            v = np.kron(np.exp(1j * np.arange(d1) * p1), np.exp(1j * np.arange(d2) * p2)) / (2 * np.pi)
            total += np.real(v.conj() @ rho @ v)
        out.append(total * (2 * np.pi / grid.size))
    return np.array(out)


def test_diagonal_product_is_uniform(rng):
    rho = np.kron(np.diag(rng.random(3)), np.diag(rng.random(4)))
    rho /= np.trace(rho)
    c = relative_phase_fourier(rho, (3, 4))
    assert all(abs(v) == 0 for k, v in c.items() if k != 0)
    P = phase_distribution(c)
    np.testing.assert_allclose(P.density, 1 / (2 * np.pi))
    assert P.s_measure == pytest.approx(0.0, abs=1e-15)


def test_single_excitation_superposition():
    psi = np.zeros(4)
    psi[1] = psi[2] = 1 / np.sqrt(2)
    c = relative_phase_fourier(np.outer(psi, psi), (2, 2))
    assert c[1] == pytest.approx(0.5)
    assert c[-1] == pytest.approx(0.5)
    assert sync_measure(phase_distribution(c)) == pytest.approx(1.0, abs=1e-12)


def test_cosine_distribution():
    P = phase_distribution({-1: 0.5, 0: 1.0, 1: 0.5}, n_grid=64)
    np.testing.assert_allclose(P.density, (1 + np.cos(P.phi)) / (2 * np.pi), atol=1e-15)
    assert P.s_measure == pytest.approx(1.0)


def test_two_sided_coefficient_check():
    with pytest.raises(ValueError):
        phase_distribution({-1: 0.1, 0: 1.0, 1: 0.3})


@pytest.mark.parametrize("dims", [(2, 3), (3, 3), (4, 2)])
def test_fourier_matches_phase_state_quadrature(dims, rng):
    rho = random_density(dims[0] * dims[1], rng)
    P = phase_distribution(relative_phase_fourier(rho, dims), n_grid=16)
    np.testing.assert_allclose(P.density, brute_force_density(rho, dims, P.phi), atol=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 2**31))
def test_fourier_conjugate_symmetry_and_normalization(d1, d2, seed):
    rng = np.random.default_rng(seed)
    rho = random_hermitian(d1 * d2, rng)
    c = relative_phase_fourier(rho, (d1, d2))
    for k in c:
        assert c[-k] == pytest.approx(np.conj(c[k]), abs=1e-12)
    dens = random_density(d1 * d2, rng)
    P = phase_distribution(relative_phase_fourier(dens, (d1, d2)))
    assert P.density.mean() * 2 * np.pi == pytest.approx(1.0, abs=1e-12)
    assert P.s_measure >= 0


def test_extra_harmonics_vanish(rng):
    rho = random_density(9, rng)
    c3 = relative_phase_fourier(rho, (3, 3), k_max=6)
    assert all(c3[k] == 0 for k in (-6, -5, -4, -3, 3, 4, 5, 6))
    s_a = phase_distribution(relative_phase_fourier(rho, (3, 3))).s_measure
    s_b = phase_distribution(c3).s_measure
    assert s_a == pytest.approx(s_b, abs=1e-15)


def test_grid_refinement_is_negligible(rng):
    c = {0: 1.0}
    for k in range(1, 9):
        z = 0.3 * (rng.normal() + 1j * rng.normal()) / k
        c[k], c[-k] = z, np.conj(z)
    s1 = phase_distribution(c, 1024).s_measure
    s2 = phase_distribution(c, 2048).s_measure
    assert abs(s1 - s2) / (2 * np.pi) < 1e-6


def test_first_harmonic_gives_twice_c1():
    c1 = 0.0123 * np.exp(0.7j)
    S = phase_distribution({-1: np.conj(c1), 0: 1.0, 1: c1}).s_measure
    assert S == pytest.approx(2 * abs(c1), rel=1e-5)


def test_uncoupled_network_has_no_synchronization():
    p = OscillatorParams.stabilized(1, kerr=1.0)
    net = NetworkSpec((p, p, p), np.zeros((3, 3)), (3, 3, 3))
    rho = solve_steady_state(build_network_liouvillian(net), net.layout)
    for pair in [(0, 1), (0, 2), (1, 2)]:
        assert abs(pairwise_sync(rho, net.layout, pair)) < 1e-12


def test_detuning_symmetry_of_identical_pair():
    p = OscillatorParams.stabilized(2, kerr=3.0, sigma=0.3)

    def S(delta):
        net = two_oscillators(p, p.with_(omega=-delta), -0.2, (6, 6))
        rho = solve_steady_state(build_network_liouvillian(net), net.layout)
        return pairwise_sync(rho, net.layout, (0, 1))

    for delta in (1.0, 6.0, 11.3):
        assert S(delta) == pytest.approx(S(-delta), abs=1e-8)


def test_three_site_mediation_and_exchange_symmetry():
    K = 10.0
    p = OscillatorParams.stabilized(1, kerr=K)
    C = np.zeros((3, 3))
    C[0, 2] = C[2, 0] = C[1, 2] = C[2, 1] = -0.2
    net = NetworkSpec((p, p, p.with_(omega=-2 * K)), C, (5, 5, 5))
    rho = solve_steady_state(build_network_liouvillian(net), net.layout)
    s_ab = pairwise_sync(rho, net.layout, (0, 1))
    s_ac = pairwise_sync(rho, net.layout, (0, 2))
    s_bc = pairwise_sync(rho, net.layout, (1, 2))
    assert s_ab > 0 and s_ac > 0
    assert s_ac == pytest.approx(s_bc, abs=1e-9)
    assert pairwise_sync(rho, net.layout, (2, 0)) == pytest.approx(s_ac, abs=1e-12)


def test_pair_validation():
    with pytest.raises(ValueError):
        pairwise_sync(np.eye(4) / 4, ModeLayout((2, 2)), (1, 1))

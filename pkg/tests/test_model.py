import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from syncblockade.fock import ModeLayout, embed_site, number_matrix
from syncblockade.model import (
    InvalidParameterError,
    NetworkSpec,
    OscillatorParams,
    SidebandParams,
    coupling_hamiltonian,
    default_dimension,
    lorentzian_rate,
    sideband_parameters,
    site_hamiltonian,
    stabilizer_jump_ops,
    two_oscillators,
)


def test_lorentzian_values():
    assert lorentzian_rate(2.0, 2.0, 0.2) == 1.0
    assert lorentzian_rate(2.2, 2.0, 0.2) == pytest.approx(0.5)
    assert lorentzian_rate(1.8, 2.0, 0.2) == pytest.approx(0.5)
    assert lorentzian_rate(3, 2, 0.2) == pytest.approx(0.04 / 1.04, rel=1e-12)


def test_lorentzian_rejects_bad_width():
    with pytest.raises(InvalidParameterError):
        lorentzian_rate(1.0, 1.0, 0.0)


@given(center=st.floats(0, 10), sigma=st.floats(0.01, 3), a=st.floats(0, 5), b=st.floats(0, 5))
def test_lorentzian_symmetric_and_decreasing(center, sigma, a, b):
    assert lorentzian_rate(center + a, center, sigma) == pytest.approx(lorentzian_rate(center - a, center, sigma))
    if a < b:
        assert lorentzian_rate(center + a, center, sigma) >= lorentzian_rate(center + b, center, sigma)


def test_invalid_parameters():
    with pytest.raises(InvalidParameterError):
        OscillatorParams(sigma_plus=0.0)
    with pytest.raises(InvalidParameterError):
        OscillatorParams(gamma_minus=-1.0)
    with pytest.raises(InvalidParameterError):
        OscillatorParams(kerr=-0.1)


def test_default_dimension_rule():
    assert default_dimension(OscillatorParams.stabilized(4)) == 12
    assert default_dimension(OscillatorParams.stabilized(2)) == 10


def test_site_hamiltonian_levels():
    p = OscillatorParams(omega=1.0, kerr=0.1)
    e = site_hamiltonian(p, 6).diagonal().real
    assert e[0] == 0 and e[1] == 1.0
    assert e[2] == pytest.approx(1.8)
    n = np.arange(6)
    np.testing.assert_allclose(np.diff(e), 1.0 - 2 * 0.1 * n[:-1], atol=1e-14)
    np.testing.assert_array_equal(e, 1.0 * n - 0.1 * n * (n - 1))


def test_jump_ops_structure():
    only_down = stabilizer_jump_ops(OscillatorParams(gamma_plus=0.0), 5)
    assert all(op.toarray()[n - 1, n] != 0 for n, (_, op) in enumerate(only_down, start=1))
    two = stabilizer_jump_ops(OscillatorParams(), 2)
    assert len(two) == 2
    np.testing.assert_array_equal(two[0][1].toarray(), [[0, 0], [1, 0]])
    np.testing.assert_array_equal(two[1][1].toarray(), [[0, 1], [0, 0]])


def test_jump_ops_peak_at_stabilized_levels():
    p = OscillatorParams.stabilized(2)
    ops = stabilizer_jump_ops(p, 8)
    up = [(rate, int(op.nonzero()[0][0])) for rate, op in ops if op.nonzero()[0][0] > op.nonzero()[1][0]]
    down = [(rate, int(op.nonzero()[1][0])) for rate, op in ops if op.nonzero()[0][0] < op.nonzero()[1][0]]
    assert max(up)[1] == 2
    assert max(down)[1] == 3


def test_jump_rates_include_sqrt_n():
    p = OscillatorParams.stabilized(1, sigma=0.3)
    rate, op = stabilizer_jump_ops(p, 4)[1]  # gain into n = 2
    assert rate == pytest.approx(p.f_plus(2))
    assert op[2, 1] == pytest.approx(np.sqrt(2))


def test_coupling_hamiltonian_elements():
    p = OscillatorParams.stabilized(1)
    net = two_oscillators(p, p, 0.3, (3, 3))
    V = coupling_hamiltonian(net).toarray()
    idx = lambda n1, n2: n1 * 3 + n2  # noqa: E731
    assert V[idx(0, 1), idx(1, 0)] == pytest.approx(0.3)
    assert V[idx(1, 1), idx(2, 0)] == pytest.approx(0.3 * np.sqrt(2))
    zero = two_oscillators(p, p, 0.0, (3, 3))
    assert coupling_hamiltonian(zero).nnz == 0


def test_coupling_conserves_excitations(rng):
    p = OscillatorParams.stabilized(1)
    C = np.array([[0, 0.2, -0.1], [0.2, 0, 0.4], [-0.1, 0.4, 0]])
    net = NetworkSpec((p, p, p), C, (4, 4, 4))
    V = coupling_hamiltonian(net)
    N = sum(embed_site(number_matrix(4), j, net.layout) for j in range(3))
    comm = (V @ N - N @ V).toarray()
    n_tot = N.diagonal().real
    low = n_tot < 3  # away from the truncation boundary
    assert np.max(np.abs(comm[np.ix_(low, low)])) < 1e-14


def test_network_validation():
    p = OscillatorParams()
    with pytest.raises(InvalidParameterError):
        NetworkSpec((p, p), np.array([[0, 1], [2, 0]]))
    with pytest.raises(InvalidParameterError):
        NetworkSpec((p, p), np.array([[1, 0], [0, 0]]))
    with pytest.raises(InvalidParameterError):
        NetworkSpec((p, p), np.zeros((3, 3)))
    with pytest.raises(InvalidParameterError):
        NetworkSpec((p, p), np.zeros((2, 2)), ModeLayout((3,)))
    net = NetworkSpec((p, p), np.zeros((2, 2)))
    assert net.labels == ("A", "B")
    with pytest.raises(ValueError):
        net.coupling[0, 1] = 1.0


def test_sideband_mapping():
    g0 = sideband_parameters(SidebandParams(g=0.0, kappa=1.0, delta_plus=0, delta_minus=0, omega0=0, kerr=1.0))
    assert g0[0] == 0
    gamma, sigma, n_plus, n_minus = sideband_parameters(
        SidebandParams(g=0.1 * 0.8, kappa=0.8, delta_plus=5.0, delta_minus=-6.0, omega0=1.0, kerr=1.0))
    assert gamma == pytest.approx(0.04 * 0.8)
    assert sigma == pytest.approx(0.1)
    assert n_plus == pytest.approx(2.0)
    assert n_minus == pytest.approx(3.5)
    with pytest.raises(InvalidParameterError):
        sideband_parameters(SidebandParams(0.1, 0.0, 0, 0, 0, 1.0))


def test_hermitian_parts_are_real_sparse():
    H = site_hamiltonian(OscillatorParams(omega=0.5, kerr=1.0), 4)
    assert sp.issparse(H)
    assert np.all(np.isreal(H.toarray()))

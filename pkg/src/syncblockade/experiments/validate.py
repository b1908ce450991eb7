"""Fast self-checks run by ``syncblockade validate``."""

from __future__ import annotations

import numpy as np

from ..classical import NoiseParams, simulate
from ..liouvillian import build_network_liouvillian
from ..model import NetworkSpec, OscillatorParams, two_oscillators
from ..perturbation import perturbative_sync
from ..steadystate import (
    RESIDUAL_TOL,
    dense_nullspace_oracle,
    solve_steady_state,
    uncoupled_fock_populations,
)
from ..sync import pairwise_sync

__all__ = ["CHECKS", "run_checks"]


def _pair(delta=0.0, v=0.1, kerr=2.0, dims=(4, 4), n_plus=1):
    p = OscillatorParams.stabilized(n_plus, kerr=kerr, sigma=0.3)
    return two_oscillators(p, p.with_(omega=-delta), -v, dims)


def _solve(net):
    return solve_steady_state(build_network_liouvillian(net), net.layout)


def _check_oracle():
    net = _pair(delta=1.3, v=0.4)
    a = _solve(net)
    b = dense_nullspace_oracle(build_network_liouvillian(net), net.layout)
    err = float(np.max(np.abs(a.data - b.data)))
    return err <= 1e-8, f"max |rho_sparse - rho_dense| = {err:.2e}"


def _check_state_gates():
    rho = _solve(_pair(delta=0.7, v=0.3))
    rho.validate()
    return rho.residual <= RESIDUAL_TOL, f"residual {rho.residual:.2e}, min eigenvalue {rho.min_eigenvalue():.2e}"


def _check_recursion():
    net = _pair(v=0.0, dims=(6, 6), n_plus=2)
    rho = _solve(net)
    pops = np.real(np.diag(rho.reduced([0]).data))
    ref = uncoupled_fock_populations(net.oscillators[0], 6)
    err = float(np.max(np.abs(pops - ref)))
    return err <= 1e-9, f"max population error {err:.2e}"


def _check_symmetry():
    plus = pairwise_sync(_solve(_pair(delta=3.0)), _pair().layout, (0, 1))
    minus = pairwise_sync(_solve(_pair(delta=-3.0)), _pair().layout, (0, 1))
    return abs(plus - minus) <= 1e-8, f"|S(+d) - S(-d)| = {abs(plus - minus):.2e}"


def _check_uncoupled():
    s = pairwise_sync(_solve(_pair(delta=0.5, v=0.0)), _pair().layout, (0, 1))
    return abs(s) < 1e-9, f"S at V=0 is {s:.2e}"


def _check_perturbative():
    p = OscillatorParams.stabilized(1, kerr=5.0, sigma=0.2)
    q = p.with_(omega=-10.0)
    errs = []
    for v in (0.02, 0.01):
        net = two_oscillators(p, q, -v, (5, 5))
        s = pairwise_sync(_solve(net), net.layout, (0, 1))
        errs.append(abs(s - perturbative_sync(p, q, -v, 5, 5)))
    return errs[1] < errs[0] / 3, f"discrepancy {errs[0]:.2e} -> {errs[1]:.2e} on halving V"


def _check_reproducible():
    p = OscillatorParams.stabilized(2, kerr=0.5, sigma=0.3)
    net = NetworkSpec((p, p), np.array([[0.0, -0.05], [-0.05, 0.0]]))
    kw = dict(t_burn=1.0, t_sample=5.0, n_traj=2, dt=1e-3)
    a = simulate(net, NoiseParams(seed=7), **kw).phases[(0, 1)]
    b = simulate(net, NoiseParams(seed=7), **kw).phases[(0, 1)]
    return bool(np.array_equal(a, b)), "fixed-seed classical runs identical"


CHECKS = [
    ("dense oracle equivalence", _check_oracle),
    ("residual and state gates", _check_state_gates),
    ("uncoupled ladder recursion", _check_recursion),
    ("detuning symmetry", _check_symmetry),
    ("zero coupling gives S = 0", _check_uncoupled),
    ("first-order convergence", _check_perturbative),
    ("classical reproducibility", _check_reproducible),
]


def run_checks(echo=print) -> bool:
    ok = True
    for name, fn in CHECKS:
        try:
            passed, detail = fn()
        except Exception as exc:
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        ok &= passed
        echo(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return ok

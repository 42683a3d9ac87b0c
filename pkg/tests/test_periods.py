"""Master periods, fundamental solutions, and the twisted identification."""

import cmath
import math

import numpy as np
import pytest

from gamma_monodromy import periods as pd
from gamma_monodromy.cohomology import intersection_pairing, make_proj
from gamma_monodromy.numerics import (BranchState, branch_power, log_gamma,
                                      principal_branch)
from gamma_monodromy.quantum import (quantum_mult_proj, sseries_proj,
                                     SSeries)


def _series(m, q, K=60):
    return sseries_proj(m, complex(q), K)


# ---------------------------------------------------------------------------
# master period
# ---------------------------------------------------------------------------

def test_master_period_diagonal_when_rho_vanishes():
    sp = make_proj(2)
    sp.rho = np.zeros_like(sp.rho)
    br = principal_branch(3.0 + 1.0j)
    level = 1
    got = pd.master_period(sp, level, br)
    assert np.max(np.abs(got - np.diag(np.diag(got)))) == 0.0
    theta = np.diag(sp.theta)
    for i in range(sp.size):
        d = theta[i] - level - 0.5
        want = branch_power(br, d) * cmath.exp(-log_gamma(d + 1.0))
        assert abs(got[i, i] - want) < 1e-12 * max(1.0, abs(want))


def test_master_period_left_right_agree():
    for sp in (make_proj(1), make_proj(3)):
        for winding in (0, 1):
            br = principal_branch(2.5 - 1.2j, winding=winding)
            for level in (-4, 0, 3):
                a = pd.master_period(sp, level, br)
                b = pd.master_period_right(sp, level, br)
                scale = max(1.0, float(np.max(np.abs(a))))
                assert np.max(np.abs(a - b)) < 1e-12 * scale


def test_master_period_ladder_by_finite_differences():
    sp = make_proj(2)
    lam = 7.0 + 2.0j
    h = 1e-6 * abs(lam)
    lo = principal_branch(lam - h)
    hi = principal_branch(lam + h)
    mid = principal_branch(lam)
    for level in (-3, 0, 2):
        fd = (pd.master_period(sp, level, hi)
              - pd.master_period(sp, level, lo)) / (2 * h)
        nxt = pd.master_period(sp, level + 1, mid)
        scale = max(1.0, float(np.max(np.abs(nxt))))
        assert np.max(np.abs(fd - nxt)) < 1e-6 * scale


def test_master_period_finite_at_gamma_poles():
    # levels driving the Gamma argument to nonpositive integers stay finite
    sp = make_proj(1)
    br = principal_branch(4.0)
    got = pd.master_period(sp, 2, br)
    assert np.all(np.isfinite(got))


# ---------------------------------------------------------------------------
# fundamental solution
# ---------------------------------------------------------------------------

def test_fundamental_solution_reduces_to_master_at_q_zero():
    m = 2
    sp = make_proj(m)
    prod = quantum_mult_proj(m, 0.0)
    sser = _series(m, 0.0, K=20)
    br = principal_branch(2.0 + 0.5j)
    sol = pd.fundamental_solution(sp, prod, sser, -3, br, 1e-12)
    want = pd.master_period(sp, -3, br)
    assert np.max(np.abs(sol.value - want)) < 1e-10 * np.max(np.abs(want))


def test_fundamental_solution_guard_radius():
    m = 2
    sp = make_proj(m)
    prod = quantum_mult_proj(m, 1.0)   # eigenvalue radius 3
    sser = _series(m, 1.0)
    with pytest.raises(ValueError):
        pd.fundamental_solution(sp, prod, sser, -3,
                                principal_branch(4.0), 1e-10)


def test_fundamental_solution_nonconvergence_error():
    m = 2
    sp = make_proj(m)
    prod = quantum_mult_proj(m, 1.0)
    sser = _series(m, 1.0, K=30)
    with pytest.raises(pd.ConvergenceError):
        pd.fundamental_solution(sp, prod, sser, -3,
                                principal_branch(6.0), 0.0)


def test_fundamental_solution_truncation_recorded():
    m = 2
    sp = make_proj(m)
    prod = quantum_mult_proj(m, 1.0)
    sser = _series(m, 1.0)
    sol = pd.fundamental_solution(sp, prod, sser, -3,
                                  principal_branch(8.0), 1e-11)
    assert 0.0 < sol.truncation_error < 1e-9 * np.max(np.abs(sol.value))


def test_fundamental_solution_invertible_at_negative_level():
    m = 2
    sp = make_proj(m)
    prod = quantum_mult_proj(m, 1.0)
    sser = _series(m, 1.0)
    sol = pd.fundamental_solution(sp, prod, sser, -3,
                                  principal_branch(10.0), 1e-11)
    assert np.linalg.cond(sol.value) < 1e6


def test_level_ladder_of_fundamental_solution():
    m = 2
    sp = make_proj(m)
    prod = quantum_mult_proj(m, 1.0)
    sser = _series(m, 1.0)
    lam = 10.0
    h = 1e-5 * lam
    tol = 1e-11
    lo = pd.fundamental_solution(sp, prod, sser, -3,
                                 principal_branch(lam - h), tol).value
    hi = pd.fundamental_solution(sp, prod, sser, -3,
                                 principal_branch(lam + h), tol).value
    nxt = pd.fundamental_solution(sp, prod, sser, -2,
                                  principal_branch(lam), tol).value
    fd = (hi - lo) / (2 * h)
    assert np.max(np.abs(fd - nxt)) < 1e-6 * np.max(np.abs(nxt))


def test_connection_residual_of_fundamental_solution():
    m = 2
    sp = make_proj(m)
    prod = quantum_mult_proj(m, 1.0)
    sser = _series(m, 1.0)
    lam = 10.0
    h = 1e-5 * lam
    tol = 1e-11
    rhs = pd.connection_rhs(sp, prod, -3)
    mid = pd.fundamental_solution(sp, prod, sser, -3,
                                  principal_branch(lam), tol)
    lo = pd.fundamental_solution(sp, prod, sser, -3,
                                 principal_branch(lam - h), tol).value
    hi = pd.fundamental_solution(sp, prod, sser, -3,
                                 principal_branch(lam + h), tol).value
    fd = (hi - lo) / (2 * h)
    res = np.max(np.abs(fd - rhs(lam, mid.value)))
    assert res < 1e-6 * max(1.0, np.max(np.abs(mid.value)))


def test_connection_rhs_rejects_discriminant():
    m = 2
    sp = make_proj(m)
    prod = quantum_mult_proj(m, 1.0)
    rhs = pd.connection_rhs(sp, prod, -3)
    y = np.eye(sp.size, dtype=complex)
    with pytest.raises(ValueError):
        rhs(3.0, y)  # eigenvalue of the Euler operator at q=1


def test_pairing_constancy_along_lambda():
    m = 2
    sp = make_proj(m)
    prod = quantum_mult_proj(m, 1.0)
    sser = _series(m, 1.0)
    tol = 1e-11
    mats = []
    for lam in np.linspace(5.5, 8.0, 10):
        sol = pd.fundamental_solution(sp, prod, sser, 0,
                                      principal_branch(lam), tol).value
        pmat = sol.T @ sp.pairing @ (lam * sol - prod.euler_mult @ sol)
        mats.append(pmat)
    mats = np.array(mats)
    spread = np.max(np.abs(mats - mats[0]))
    assert spread < 1e-7
    want = np.array([[intersection_pairing(sp, a, b)
                      for b in np.eye(sp.size)] for a in np.eye(sp.size)])
    assert np.max(np.abs(mats[0] - want)) < 1e-7


# ---------------------------------------------------------------------------
# sigma transform and the twisted identification
# ---------------------------------------------------------------------------

def test_sigma_on_p1():
    sp = make_proj(1)
    got1 = pd.sigma_transform(sp, sp.unit())
    gotp = pd.sigma_transform(sp, sp.basis_vector("p"))
    assert abs(got1[0] - 1j) < 1e-14
    assert abs(gotp[1] + 1j) < 1e-14


def test_sigma_squares_to_theta_phase():
    sp = make_proj(3)
    v = np.ones(sp.size, dtype=complex)
    twice = pd.sigma_transform(sp, pd.sigma_transform(sp, v))
    want = np.exp(2j * np.pi * np.diag(sp.theta))
    assert np.max(np.abs(twice - want)) < 1e-13


def test_twisted_projective_identification_spot():
    # periods of the exceptional theory match conjugated projective ones
    n, Q, m = 3, 1.0, 3
    for lam in (6.0, 5.0 + 3.0j, -7.5 + 1.0j):
        br = principal_branch(lam)
        for idx in range(n - 1):
            beta = np.zeros(n - 1, dtype=complex)
            beta[idx] = 1.0
            lhs, rhs = pd.twisted_projective_match(n, Q, m, beta, br, 1e-11)
            scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)))
            assert np.max(np.abs(lhs - rhs)) < 1e-8 * scale


def test_twisted_period_reduces_to_master_with_identity_series(monkeypatch):
    # truncating the twisted calibration to the identity leaves the bare
    # master period
    from gamma_monodromy.cohomology import make_twisted

    n, Q = 3, 1.0
    sp = make_twisted(n)
    ident = SSeries(sp, complex(Q), [np.eye(sp.size, dtype=complex)]
                    + [np.zeros((sp.size, sp.size), complex)] * 12)
    monkeypatch.setattr(pd, "sseries_twisted", lambda *a, **k: ident)
    br = principal_branch(9.0)
    beta = np.array([1.0, 0.0], dtype=complex)
    got = pd.twisted_period(n, Q, 3, beta, br, 1e-11)
    want = pd.master_period(sp, -3, br) @ beta
    assert np.max(np.abs(got - want)) < 1e-10 * np.max(np.abs(want))

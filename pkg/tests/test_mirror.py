"""Oscillatory integral Phi: vanishing window, residue series, cross checks.

The closed-form oracles were frozen from 30-digit mpmath evaluations:
2*besselk(0, 2*sqrt(q)) for the 2-torus integral and
meijerg([[],[]], [[0,0,0],[]], q) for the 3-torus one.
"""

import math

import numpy as np
import pytest
import scipy.special

from gamma_monodromy import mirror as mr
from gamma_monodromy.numerics import NumericsError

J3 = {0.5: 0.478284421452162, 1.0: 0.227787745499067, 2.0: 0.084783547996803}
J4 = {1.0: 0.164041606748376, 2.0: 0.0607710339620886}
INVERSION_N3_Q1 = 0.90923943249776


def test_u_of_q_examples():
    assert mr.u_of_q(3, 1.0) == 2.0
    assert abs(mr.u_of_q(4, 8.0) - 6.0) < 1e-14


def test_tail_bound_certifies_config():
    cfg = mr.make_mb_config(3, 1.0, 3, 3.0, 1e-7)
    assert cfg.tail_bound <= 1e-8
    tight = mr.make_mb_config(3, 1.0, 3, 3.0, 1e-10)
    assert tight.T >= cfg.T
    assert tight.tail_bound <= 1e-11


def test_tail_bound_needs_decaying_integrand():
    with pytest.raises(ValueError):
        mr.make_mb_config(3, 1.0, 0, 3.0, 1e-7)


def test_contour_warns_off_the_real_axis():
    cfg = mr.make_mb_config(3, 1.0, 3, 3.0, 1e-6)
    with pytest.warns(UserWarning):
        mr.phi_mb_batch(3, 1.0, 3, np.array([3.0 + 1.0j]), cfg)


def test_phi_vanishes_on_the_window():
    out = mr.zero_region_scan(3, 1.0, 3, npts=10)
    assert out["max_abs"] < 1e-6


def test_residue_series_matches_contour():
    for n, q, m, lam in ((3, 1.0, 3, 3.0), (3, 1.0, 3, 4.5),
                         (3, 0.5, 3, 2.5), (4, 1.0, 4, 4.0)):
        ser = mr.phi_residue_series(n, q, m, lam, terms=50)
        mb = mr.phi_mellin_barnes(n, q, m, lam)
        assert abs(ser - mb) < 1e-6 * max(1.0, abs(mb))


def test_residue_series_domain_guards():
    with pytest.raises(ValueError):
        mr.phi_residue_series(3, 1.0, 3, 1.9)
    with pytest.raises(ValueError):
        mr.phi_residue_series(3, -1.0, 3, 5.0)
    with pytest.raises(ValueError):
        mr.phi_mellin_barnes(3, 0.0, 3, 3.0)


def test_residue_series_overflow_guard():
    # factorial growth of the residue at deep integer centers must fail
    # loudly, not return garbage
    with pytest.raises(NumericsError):
        mr.phi_residue_series(3, 1.0, 3, 5.0, terms=120)


def test_local_exponent_near_the_edge():
    fit = mr.local_exponent_fit(3, 1.0, 3)
    assert abs(fit["slope"] - 2.5) < 0.02
    assert fit["r2"] >= 0.999
    # raising the derivative level shifts the local power by one
    fit4 = mr.local_exponent_fit(3, 1.0, 4)
    assert abs(fit4["slope"] - 3.5) < 0.02


def test_exponent_fit_rejects_noise(monkeypatch):
    rng = np.random.default_rng(7)

    def noisy(n, q, m, lams, cfg):
        return np.asarray(rng.uniform(1e-9, 1e-6, size=len(lams)),
                          dtype=complex)

    monkeypatch.setattr(mr, "phi_mb_batch", noisy)
    with pytest.raises(mr.FitQualityError):
        mr.local_exponent_fit(3, 1.0, 3)


def test_oscillatory_j_against_bessel():
    for q, want in J3.items():
        got = mr.oscillatory_j(3, q)
        assert abs(got - want) < 1e-9
        # same constant through scipy's Bessel implementation
        assert abs(got - 2.0 * scipy.special.k0(2.0 * math.sqrt(q))) < 1e-9


def test_oscillatory_j_against_meijer_g():
    for q, want in J4.items():
        assert abs(mr.oscillatory_j(4, q) - want) < 1e-7


def test_oscillatory_j_rejects_other_n():
    with pytest.raises(ValueError):
        mr.oscillatory_j(5, 1.0)


def test_oscillatory_j_monotone_in_q():
    vals = [mr.oscillatory_j(3, q) for q in (0.5, 1.0, 1.5, 2.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_mellin_inversion_j_matches():
    for q, want in J3.items():
        assert abs(mr.mellin_inversion_j(3, q) - want) < 1e-9
    assert abs(mr.mellin_inversion_j(4, 1.0) - J4[1.0]) < 1e-8


def test_inversion_consistency_two_routes():
    out = mr.inversion_consistency(3, 1.0)
    assert out["rel_diff"] < 1e-6
    assert abs(out["lhs"].real) < 1e-8
    assert abs(out["lhs"].imag - INVERSION_N3_Q1) < 1e-6


def test_laplace_spot_check_p1():
    out = mr.laplace_spot_check(3, 1.0, 3)
    assert out["pass"]
    assert np.max(out["rel_errors"]) < 1e-4
    assert out["extension_sensitivity"] < 1e-6

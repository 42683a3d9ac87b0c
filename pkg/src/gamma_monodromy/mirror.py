"""Mellin-Barnes and residue representations of the distinguished period
integral, plus the oscillatory-integral cross-checks.

The central object is

    Phi(q, lambda) = (2 pi)^{(1-n)/2} int_{Re x = eps}
                     q^{-x} Gamma(x)^{n-1}
                     lambda^{(n-1)x + c - 1} / Gamma((n-1)x + c) dx / (i x)

with c = m + 1/2 - n/2.  The 1/i normalization makes Phi real for real
positive q and lambda.  Closing the contour to the left gives the residue
series over x = 0, -1, -2, ...; the two routes must agree for
lambda > u(q) = (n-1) q^{1/(n-1)}, and Phi vanishes identically on
0 < lambda <= u(q).

On the vertical line the Gamma-quotient decays only polynomially,
|integrand| ~ |b|^{-(m+1/2)}: the exponential decay of Gamma(x)^{n-1} is
eaten by 1/Gamma((n-1)x + c).  Truncation at height T therefore costs
about |f(eps+iT)| * T / (m - 1/2), which is the tail bound used to pick T.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.integrate
import scipy.special

from .numerics import (NumericsError, jet_exp, jet_mul, jet_recip,
                       log_gamma_jet, recip_gamma_jet)

_GL_NODES = 32
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_NODES)
_CHUNK = 1 << 18


class FitQualityError(NumericsError):
    pass


@dataclass
class MBConfig:
    epsilon: float
    T: float
    quadrature_step: float
    tail_bound: float


def u_of_q(n: int, q: float) -> float:
    """Principal real root (n-1) q^{1/(n-1)} bounding the vanishing region."""
    return (n - 1) * q ** (1.0 / (n - 1))


def _c_exp(n: int, m: int) -> float:
    return m + 0.5 - n / 2.0


def _log_integrand(n: int, q: float, m: int, x: np.ndarray) -> np.ndarray:
    """log of q^{-x} Gamma(x)^{n-1} / (Gamma((n-1)x+c) x), lambda part left out."""
    c = _c_exp(n, m)
    return ((n - 1) * scipy.special.loggamma(x)
            - scipy.special.loggamma((n - 1) * x + c)
            - x * math.log(q) - np.log(x))


def _tail_estimate(n: int, q: float, m: int, lam_max: float,
                   eps: float, T: float) -> float:
    x = complex(eps, T)
    c = _c_exp(n, m)
    top = _log_integrand(n, q, m, np.array([x]))[0] \
        + ((n - 1) * x + c - 1) * math.log(lam_max)
    pref = (2.0 * math.pi) ** ((1 - n) / 2.0)
    if m <= 0.5:
        raise ValueError("tail estimate needs m > 1/2")
    return 4.0 * pref * float(np.exp(top.real)) * T / (m - 0.5)


def make_mb_config(n: int, q: float, m: int, lam_max: float,
                   tol: float) -> MBConfig:
    """Pick the truncation height so the polynomial tail sits below tol/10."""
    eps = 1.0
    T = 64.0
    while True:
        bound = _tail_estimate(n, q, m, lam_max, eps, T)
        if bound <= tol / 10.0:
            return MBConfig(epsilon=eps, T=T, quadrature_step=0.5,
                            tail_bound=bound)
        if T > 5e5:
            raise NumericsError("tail bound %g not reachable" % tol)
        T *= 1.4


def _line_nodes(cfg: MBConfig) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights covering [-T, T] in fixed panels."""
    npanels = max(1, int(math.ceil(2.0 * cfg.T / cfg.quadrature_step)))
    edges = np.linspace(-cfg.T, cfg.T, npanels + 1)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    b = (mids[:, None] + half * _GL_X[None, :]).ravel()
    w = np.broadcast_to(half * _GL_W[None, :], (npanels, _GL_NODES)).ravel()
    return b, w


def phi_mb_batch(n: int, q: float, m: int, lams: np.ndarray,
                 cfg: MBConfig) -> np.ndarray:
    """Phi at several lambda, sharing one set of contour evaluations."""
    lams = np.asarray(lams, dtype=complex)
    if np.any(np.abs(lams.imag) > 0):
        warnings.warn("contour representation may diverge off the real axis")
    b, w = _line_nodes(cfg)
    c = _c_exp(n, m)
    pref = (2.0 * math.pi) ** ((1 - n) / 2.0)
    loglam = np.log(lams.astype(complex))
    out = np.zeros(len(lams), dtype=complex)
    # keep the 2-d work array around _CHUNK elements however many lambdas
    step = max(64, _CHUNK // max(1, len(lams)))
    for lo in range(0, len(b), step):
        x = cfg.epsilon + 1j * b[lo:lo + step]
        base = _log_integrand(n, q, m, x)
        lam_part = np.exp(base[None, :]
                          + loglam[:, None] * ((n - 1) * x + c - 1)[None, :])
        out += lam_part @ w[lo:lo + step]
    return pref * out


def phi_mellin_barnes(n: int, q: float, m: int, lam: complex,
                      cfg: MBConfig | None = None) -> complex:
    """Contour value of Phi at a single point."""
    if q <= 0:
        raise ValueError("q must be real positive")
    if cfg is None:
        cfg = make_mb_config(n, q, m, max(abs(lam), u_of_q(n, q)), 1e-7)
    return complex(phi_mb_batch(n, q, m, np.array([lam]), cfg)[0])


@lru_cache(maxsize=100000)
def _residue_poly(n: int, q: float, m: int, d: int) -> tuple:
    """Lambda-independent residue data at the pole x = -d.

    Returns (exponent, log_scale, unit polynomial p_t) such that the d-th
    residue contribution is exp(log_scale + exponent * log lam) *
    sum_t p_t log(lam)^t.  The pole has order n-1 from Gamma(x)^{n-1},
    plus one more at d = 0 from the 1/x; all Laurent data comes from
    jets of the entire function 1/Gamma.  The overall magnitude is kept
    in log_scale because the reciprocal-Gamma factor alone overflows a
    double at large d, even though the residue as a whole stays finite
    once the lambda power is attached.
    """
    order = n + 1
    c = _c_exp(n, m)
    logq = math.log(q)
    # regular part of Gamma(-d+w): w * Gamma has jet 1/shifted(1/Gamma),
    # factored into leading magnitude times a unit-leading jet
    rg = recip_gamma_jet(-d, order + 1).c
    rg1 = rg[1]
    gamma_reg = jet_recip(rg[1:order + 2] / rg1)
    log_scale = -(n - 1) * np.log(complex(rg1)) + d * logq
    prod = gamma_reg.copy()
    for _ in range(n - 2):
        prod = jet_mul(prod, gamma_reg)
    qjet = np.array([(-logq) ** t / math.factorial(t)
                     for t in range(order + 1)], dtype=complex)
    scale = np.array([(n - 1.0) ** t for t in range(order + 1)])
    center = c - (n - 1) * d
    rounded = round(center)
    if abs(center - rounded) < 1e-9 and rounded <= 0:
        # zero of 1/Gamma: finite jet, pull out its first nonzero entry
        gjet = recip_gamma_jet(rounded, order).c * scale
        if not np.all(np.isfinite(gjet)):
            raise NumericsError(
                "residue term %d overflows at center %d; reduce terms"
                % (d, rounded))
        nz = int(np.flatnonzero(np.abs(gjet) > 0.0)[0])
        s0 = gjet[nz]
        gjet = gjet / s0
        log_scale += np.log(complex(s0))
    else:
        lg = log_gamma_jet(center, order).c
        lg0 = lg.copy()
        lg0[0] = 0.0
        gjet = jet_exp(-lg0) * scale
        log_scale -= lg[0]
    prod = jet_mul(prod, jet_mul(qjet, gjet))
    if d == 0:
        idx = n - 1
    else:
        xinv = np.array([-(1.0 / d) * d ** (-t) for t in range(order + 1)],
                        dtype=complex)
        prod = jet_mul(prod, xinv)
        idx = n - 2
    expo = -(n - 1) * d + c - 1
    poly = tuple(complex(prod[idx - t]) * (n - 1.0) ** t / math.factorial(t)
                 for t in range(idx + 1))
    return expo, complex(log_scale), poly


def phi_residue_series(n: int, q: float, m: int, lam: complex,
                       terms: int = 40) -> complex:
    """Residue series of Phi, valid for |lambda| > u(q)."""
    if q <= 0:
        raise ValueError("q must be real positive")
    lam = complex(lam)
    if abs(lam) <= u_of_q(n, q):
        raise ValueError("residue series needs |lambda| > u(q)")
    loglam = cmath.log(lam)
    total = 0.0 + 0.0j
    for d in range(terms):
        expo, log_scale, poly = _residue_poly(n, q, m, d)
        val = 0.0 + 0.0j
        for t in range(len(poly) - 1, -1, -1):
            val = val * loglam + poly[t]
        arg = log_scale + expo * loglam
        if arg.real < -745.0:
            continue
        total += cmath.exp(arg) * val
    pref = (2.0 * math.pi) ** ((1 - n) / 2.0)
    return 2.0 * math.pi * pref * total


def zero_region_scan(n: int, q: float, m: int, npts: int = 20,
                     tol: float = 1e-7) -> dict:
    """Max |Phi| over a grid in the vanishing window 0 < lambda <= u(q)."""
    u = u_of_q(n, q)
    lams = u * np.linspace(0.05, 1.0, npts)
    cfg = make_mb_config(n, q, m, u, tol)
    vals = phi_mb_batch(n, q, m, lams, cfg)
    return {"max_abs": float(np.max(np.abs(vals))), "config": cfg,
            "lambdas": lams, "values": vals}


def local_exponent_fit(n: int, q: float, m: int, num: int = 9) -> dict:
    """Least-squares slope of log|Phi(u+s)| against log s.

    The s-grid is geometric with upper edge 0.1 u(q).  The lower edge
    adapts to the expected decay rate so the smallest sampled value stays
    above the float64 quadrature noise floor; a steeper local power needs
    a shallower window.  A coefficient of determination below 0.999
    raises FitQualityError instead of returning a number that looks like
    an exponent.
    """
    u = u_of_q(n, q)
    s_hi = 0.1 * u
    rough_cfg = make_mb_config(n, q, m, u * 1.2, 1e-8)
    rough = abs(complex(phi_mb_batch(n, q, m, np.array([u + s_hi]),
                                     rough_cfg)[0]))
    noise_floor = 1e-11
    s_lo = s_hi * (noise_floor / rough) ** (1.0 / (m - 0.5))
    s_lo = min(max(s_lo, 1e-3 * u), 2e-2 * u)
    s = np.geomspace(s_lo, s_hi, num)
    target = max(rough * (s[0] / s[-1]) ** (m - 0.5) * 1e-2, 1e-13)
    cfg = make_mb_config(n, q, m, u * 1.2, target)
    vals = np.abs(phi_mb_batch(n, q, m, u + s, cfg))
    x = np.log(s)
    y = np.log(vals)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    if r2 < 0.999:
        raise FitQualityError("exponent fit r^2 = %.6f" % r2)
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2,
            "config": cfg}


# ---------------------------------------------------------------------------
# the inversion-integral cross checks
# ---------------------------------------------------------------------------

def mellin_inversion_j(n: int, q: float, T: float = 40.0) -> float:
    """J(q) = (1/2 pi i) int q^{-x} Gamma(x)^{n-1} dx on Re x = 1.

    Here the integrand does decay exponentially (no Gamma in the
    denominator), so a short contour suffices.
    """
    npanels = int(math.ceil(2 * T / 0.5))
    edges = np.linspace(-T, T, npanels + 1)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    b = (mids[:, None] + half * _GL_X[None, :]).ravel()
    w = np.broadcast_to(half * _GL_W[None, :], (npanels, _GL_NODES)).ravel()
    x = 1.0 + 1j * b
    vals = np.exp((n - 1) * scipy.special.loggamma(x) - x * math.log(q))
    return float(((vals @ w) / (2.0 * math.pi)).real)


def oscillatory_j(n: int, q: float, tol: float = 1e-10) -> float:
    """The same J(q) as a real oscillation-free integral over (log) tori.

    n = 3: int exp(-(e^t + q e^{-t})) dt;
    n = 4: int int exp(-(e^t1 + e^t2 + q e^{-t1-t2})) dt1 dt2.
    """
    if n == 3:
        val, _ = scipy.integrate.quad(
            lambda t: math.exp(-(math.exp(t) + q * math.exp(-t))),
            -40.0, 10.0, epsabs=tol, epsrel=1e-10, limit=300)
        return float(val)
    if n == 4:
        def f(t2, t1):
            a = math.exp(t1) + math.exp(t2) + q * math.exp(-t1 - t2)
            return math.exp(-a) if a < 700 else 0.0

        val, _ = scipy.integrate.dblquad(
            f, -25.0, 8.0, lambda t1: -25.0, lambda t1: 8.0,
            epsabs=max(tol, 1e-9), epsrel=1e-8)
        return float(val)
    raise ValueError("oscillatory route implemented for n in {3, 4}")


def inversion_consistency(n: int, q: float) -> dict:
    """Two routes to int q^{-x} Gamma(x)^{n-1} dx / x on the vertical line.

    Left: 2 pi i times the outer integral int_0^inf J(q e^v) dv with J from
    the oscillation-free route.  Right: direct contour quadrature.  The two
    never share code paths, so agreement pins the contour bookkeeping.
    """
    vmax = max(9.0, math.log(4000.0 / q))
    npan = 6
    edges = np.linspace(0.0, vmax, npan + 1)
    outer = 0.0
    for a, b_edge in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b_edge - a)
        mid = 0.5 * (b_edge + a)
        for xg, wg in zip(_GL_X, _GL_W):
            v = mid + half * xg
            s = q * math.exp(v)
            # crude superexponential bound: skip points that cannot matter
            if (n - 1) * s ** (1.0 / (n - 1)) > 45.0 + math.log1p(s):
                continue
            outer += half * wg * oscillatory_j(n, s, tol=1e-11)
    lhs = 2j * math.pi * outer

    T = 40.0
    npanels = int(math.ceil(2 * T / 0.5))
    edges = np.linspace(-T, T, npanels + 1)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    b = (mids[:, None] + half * _GL_X[None, :]).ravel()
    w = np.broadcast_to(half * _GL_W[None, :], (npanels, _GL_NODES)).ravel()
    x = 1.0 + 1j * b
    vals = np.exp((n - 1) * scipy.special.loggamma(x) - x * math.log(q)) / x
    rhs = 1j * complex(vals @ w)
    return {"lhs": lhs, "rhs": rhs, "abs_diff": abs(lhs - rhs),
            "rel_diff": abs(lhs - rhs) / max(abs(rhs), 1e-300)}


def laplace_spot_check(n: int, q: float, m: int,
                       s_values=(0.5, 1.0, 2.0), tol: float = 1e-4) -> dict:
    """Laplace transform of Phi from the lambda side against the contour side.

    Left: quadrature of exp(-lambda s) Phi(lambda) over [u, Lambda] plus an
    explicit exponential tail bound.  Right: the contour integral with the
    lambda-power replaced by its Laplace image s^{n/2 - (n-1)x - m - 1/2}.
    Lambda values are produced by the contour only on the edge region
    [u, 1.5 u], where the residue series has not kicked in; past that the
    series is used (the two agree to ~1e-10 on the overlap, far below the
    1e-4 target here, and a contour sized for the whole range would need
    an enormous truncation height for the same certified error).  Lambda
    sensitivity is reported alongside.
    """
    u = u_of_q(n, q)
    smin = min(s_values)
    lam_break = 1.5 * u
    lam_max = lam_break + 30.0 / smin
    cfg = make_mb_config(n, q, m, lam_break, 3e-6)

    def phi_vals(lams: np.ndarray) -> np.ndarray:
        out = np.empty(len(lams), dtype=complex)
        near = lams <= lam_break
        if np.any(near):
            out[near] = phi_mb_batch(n, q, m, lams[near], cfg)
        if np.any(~near):
            out[~near] = [phi_residue_series(n, q, m, float(lv), terms=60)
                          for lv in lams[~near]]
        return out

    def lhs_on(lo: float, hi: float, npan: int) -> np.ndarray:
        edges = np.linspace(lo, hi, npan + 1)
        half = 0.5 * (edges[1] - edges[0])
        mids = 0.5 * (edges[:-1] + edges[1:])
        lams = (mids[:, None] + half * _GL_X[None, :]).ravel()
        wts = np.broadcast_to(half * _GL_W[None, :],
                              (npan, _GL_NODES)).ravel()
        g = phi_vals(lams)
        return np.array([np.sum(wts * np.exp(-lams * s) * g)
                         for s in s_values])

    lhs = lhs_on(u, lam_break, 8) + lhs_on(lam_break, lam_max, 20)
    lhs_wider = lhs + lhs_on(lam_max, lam_max + 15.0 / smin, 6)

    c = _c_exp(n, m)
    T = 40.0
    npanels = int(math.ceil(2 * T / 0.5))
    edges = np.linspace(-T, T, npanels + 1)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    b = (mids[:, None] + half * _GL_X[None, :]).ravel()
    w = np.broadcast_to(half * _GL_W[None, :], (npanels, _GL_NODES)).ravel()
    x = cfg.epsilon + 1j * b
    base = np.exp((n - 1) * scipy.special.loggamma(x)
                  - x * math.log(q) - np.log(x))
    pref = (2.0 * math.pi) ** ((1 - n) / 2.0)
    rhs = np.array([pref * complex((base * np.exp(
        (n / 2.0 - (n - 1) * x - m - 0.5) * math.log(s))) @ w)
        for s in s_values])

    rel = np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-300)
    sens = np.max(np.abs(lhs_wider - lhs) / np.maximum(np.abs(rhs), 1e-300))
    return {"s_values": list(s_values), "lhs": lhs, "rhs": rhs,
            "rel_errors": rel, "extension_sensitivity": float(sens),
            "config": cfg, "pass": bool(np.all(rel < tol))}

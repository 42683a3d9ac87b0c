"""Low-level numerics: truncated jets, complex special functions, branch
tracking, adaptive continuation along piecewise paths, and small dense
eigenvector extraction.

Everything is plain double precision.  Downstream tolerances are 1e-10 or
looser, so well-conditioned 1e-13 kernels are enough; no arbitrary
precision is attempted.  All summations run in a fixed order so repeated
runs are bit-identical.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath
import numpy as np
import scipy.special

TWO_PI = 2.0 * math.pi

MAX_JET_ORDER = 12

# for detecting arguments that sit exactly on a pole of Gamma
_POLE_EPS = 1e-9


class NumericsError(Exception):
    pass


class PoleError(NumericsError):
    """Evaluation requested at a pole of the function."""


class StepUnderflowError(NumericsError):
    """Adaptive step size fell below the resolvable arclength."""


class EigenAmbiguityError(NumericsError):
    """Eigenvalue near -1 missing or not unique within tolerance."""


# ---------------------------------------------------------------------------
# truncated jets (Taylor polynomials with arithmetic mod w^(order+1))
# ---------------------------------------------------------------------------

def jet_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cauchy product truncated to len(a) coefficients."""
    k = len(a)
    return np.convolve(a, b)[:k]


def jet_recip(a: np.ndarray) -> np.ndarray:
    """Reciprocal jet; constant term must be nonzero."""
    if a[0] == 0:
        raise ZeroDivisionError("jet reciprocal with vanishing constant term")
    k = len(a)
    out = np.zeros(k, dtype=complex)
    out[0] = 1.0 / a[0]
    for i in range(1, k):
        acc = 0.0 + 0.0j
        for j in range(1, i + 1):
            acc += a[j] * out[i - j]
        out[i] = -acc / a[0]
    return out


def jet_exp(a: np.ndarray) -> np.ndarray:
    """exp of a jet, via the derivative recurrence k*e_k = sum j*a_j*e_{k-j}."""
    k = len(a)
    out = np.zeros(k, dtype=complex)
    out[0] = cmath.exp(a[0])
    for i in range(1, k):
        acc = 0.0 + 0.0j
        for j in range(1, i + 1):
            acc += j * a[j] * out[i - j]
        out[i] = acc / i
    return out


@dataclass
class Jet:
    """Truncated Taylor expansion sum_k c[k] w^k, order = len(c)-1 <= 12."""

    c: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=complex)
        if self.c.ndim != 1:
            raise ValueError("jet coefficients must be a vector")
        if len(self.c) - 1 > MAX_JET_ORDER:
            raise ValueError("jet order above %d" % MAX_JET_ORDER)

    @property
    def order(self) -> int:
        return len(self.c) - 1

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.c + other.c)
        out = self.c.copy()
        out[0] += other
        return Jet(out)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Jet(self.c - other.c)
        out = self.c.copy()
        out[0] -= other
        return Jet(out)

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(jet_mul(self.c, other.c))
        return Jet(self.c * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return Jet(jet_mul(self.c, jet_recip(other.c)))
        return Jet(self.c / other)

    def exp(self) -> "Jet":
        return Jet(jet_exp(self.c))

    def __getitem__(self, k: int) -> complex:
        return complex(self.c[k])


def jet_variable(center: complex, order: int) -> Jet:
    """The jet of z = center + w."""
    c = np.zeros(order + 1, dtype=complex)
    c[0] = center
    if order >= 1:
        c[1] = 1.0
    return Jet(c)


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------

def _is_nonpositive_integer(z: complex, eps: float = _POLE_EPS) -> bool:
    z = complex(z)
    if abs(z.imag) > eps:
        return False
    r = round(z.real)
    return r <= 0 and abs(z.real - r) <= eps


def log_gamma(z: complex) -> complex:
    """Principal branch of log Gamma, continuous off the cut (-inf, 0]."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError("log_gamma pole at %r" % z)
    return complex(scipy.special.loggamma(z))


def polygamma(k: int, z: complex) -> complex:
    """psi^(k)(z) for complex z, k <= 12."""
    if not 0 <= k <= MAX_JET_ORDER:
        raise ValueError("polygamma order out of range")
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError("polygamma pole at %r" % z)
    val = mpmath.polygamma(k, mpmath.mpc(z))
    return complex(val)


def log_gamma_jet(z: complex, order: int) -> Jet:
    """Jet of log Gamma(z + w); z must avoid nonpositive integers."""
    c = np.zeros(order + 1, dtype=complex)
    c[0] = log_gamma(z)
    fact = 1.0
    for k in range(1, order + 1):
        fact *= k
        c[k] = polygamma(k - 1, z) / fact
    return Jet(c)


def recip_gamma_jet(z: complex, order: int) -> Jet:
    """Jet of the entire function 1/Gamma at center z.

    At a nonpositive integer center the logarithmic expansion breaks down,
    so the pole is peeled off with 1/Gamma(z+w) = (z+w)...(z+s-1+w) *
    1/Gamma(z+s+w) and only the shifted regular factor goes through exp.
    """
    if order > MAX_JET_ORDER:
        raise ValueError("jet order above %d" % MAX_JET_ORDER)
    z = complex(z)
    if _is_nonpositive_integer(z):
        shift = 1 - round(z.real)
        acc = jet_variable(z, order)
        for j in range(1, shift):
            acc = acc * jet_variable(z + j, order)
        return acc * recip_gamma_jet(z + shift, order)
    return Jet(jet_exp(-log_gamma_jet(z, order).c))


# ---------------------------------------------------------------------------
# branch tracking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BranchState:
    """A point lambda together with a chosen value of log(lambda)."""

    base: complex
    log_value: complex

    def check(self, tol: float = 1e-12) -> None:
        if abs(cmath.exp(self.log_value) - self.base) > tol * max(1.0, abs(self.base)):
            raise NumericsError("branch state inconsistent: exp(log) != base")


def principal_branch(lam: complex, winding: int = 0) -> BranchState:
    """Branch state with log = principal log + 2*pi*i*winding."""
    lam = complex(lam)
    if lam == 0:
        raise ValueError("no branch state at the origin")
    return BranchState(lam, cmath.log(lam) + 2j * math.pi * winding)


def branch_power(b: BranchState, s: complex) -> complex:
    """lambda**s on the branch carried by b, i.e. exp(s*log_value)."""
    return cmath.exp(complex(s) * b.log_value)


def _resync_log(point: complex, log_val: complex) -> complex:
    # keep the accumulated winding but re-anchor modulus and residual phase
    # on the exact endpoint, so exp(log) == base to machine precision
    p = cmath.log(point)
    w = round((log_val - p).imag / TWO_PI)
    return p + 2j * math.pi * w


# ---------------------------------------------------------------------------
# paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    z0: complex
    z1: complex

    def point(self, t: float) -> complex:
        return self.z0 + (self.z1 - self.z0) * t

    def deriv(self, t: float) -> complex:
        return self.z1 - self.z0

    def length(self) -> float:
        return abs(self.z1 - self.z0)

    @property
    def start(self) -> complex:
        return self.z0

    @property
    def end(self) -> complex:
        return self.z1

    def reversed(self) -> "Segment":
        return Segment(self.z1, self.z0)


@dataclass(frozen=True)
class Arc:
    """Circular arc center + radius*exp(i*angle), angle from angle0 to angle1.

    Orientation is the sign of angle1 - angle0 (positive = counterclockwise).
    """

    center: complex
    radius: float
    angle0: float
    angle1: float

    @property
    def orientation(self) -> int:
        d = self.angle1 - self.angle0
        return (d > 0) - (d < 0)

    def point(self, t: float) -> complex:
        a = self.angle0 + (self.angle1 - self.angle0) * t
        return self.center + self.radius * cmath.exp(1j * a)

    def deriv(self, t: float) -> complex:
        a = self.angle0 + (self.angle1 - self.angle0) * t
        return 1j * (self.angle1 - self.angle0) * self.radius * cmath.exp(1j * a)

    def length(self) -> float:
        return abs(self.angle1 - self.angle0) * self.radius

    @property
    def start(self) -> complex:
        return self.point(0.0)

    @property
    def end(self) -> complex:
        return self.point(1.0)

    def reversed(self) -> "Arc":
        return Arc(self.center, self.radius, self.angle1, self.angle0)


Piece = Segment | Arc
PathSpec = Sequence[Piece]


def validate_path(path: PathSpec, closed: bool = False, tol: float = 1e-12) -> None:
    """Endpoints of consecutive pieces must agree within tol."""
    if not path:
        raise ValueError("empty path")
    scale = max(1.0, max(abs(p.start) for p in path))
    for a, b in zip(path, path[1:]):
        if abs(a.end - b.start) > tol * scale:
            raise ValueError("path pieces do not join: %r -> %r" % (a.end, b.start))
    if closed and abs(path[-1].end - path[0].start) > tol * scale:
        raise ValueError("path does not close up")


def reverse_path(path: PathSpec) -> list:
    return [p.reversed() for p in reversed(path)]


def scale_path(path: PathSpec, w: complex) -> list:
    """Image of the path under multiplication by w."""
    out = []
    rot = cmath.phase(w)
    mag = abs(w)
    for p in path:
        if isinstance(p, Segment):
            out.append(Segment(p.z0 * w, p.z1 * w))
        else:
            out.append(Arc(p.center * w, p.radius * mag,
                           p.angle0 + rot, p.angle1 + rot))
    return out


# ---------------------------------------------------------------------------
# adaptive continuation (embedded Dormand-Prince 5(4) pair)
# ---------------------------------------------------------------------------

_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                   -92097 / 339200, 187 / 2100, 1 / 40])

_MIN_ARC_STEP = 1e-13


def ode_continue(
    rhs: Callable[[complex, np.ndarray], np.ndarray],
    path: PathSpec,
    y0: np.ndarray,
    tol: float,
    branch0: BranchState | None = None,
    singularities: Sequence[complex] = (),
) -> tuple[np.ndarray, BranchState]:
    """Continue dY/dlambda = rhs(lambda, Y) along the path, tracking log(lambda).

    Local error is controlled per unit arclength.  The branch of log(lambda)
    is integrated together with Y via dlog = dlambda/lambda; it is never
    recomputed from the principal branch mid-path, only re-anchored on the
    exact endpoint of each piece while keeping the accumulated winding.

    singularities: points whose distance caps the step size at 0.1*distance
    (on top of the 0.2*piece-length cap), per declared singular locus of rhs.
    """
    validate_path(path)
    y = np.array(y0, dtype=complex)
    start = path[0].start
    if branch0 is None:
        branch0 = principal_branch(start)
    if abs(branch0.base - start) > 1e-9 * max(1.0, abs(start)):
        raise ValueError("branch0.base does not match path start")
    branch0.check()
    logl = branch0.log_value
    sing = np.asarray(list(singularities), dtype=complex)

    for piece in path:
        plen = piece.length()
        if plen == 0.0:
            continue
        t = 0.0
        # first step guess: a modest fraction of the piece
        h = 0.05
        ks: list = [None] * 7
        while t < 1.0:
            z_here = piece.point(t)
            cap_arc = 0.2 * plen
            if len(sing):
                dmin = float(np.min(np.abs(z_here - sing)))
                cap_arc = min(cap_arc, 0.1 * dmin)
            dz_here = abs(piece.deriv(t))
            if dz_here > 0:
                h = min(h, cap_arc / dz_here)
            h = min(h, 1.0 - t)

            def f(tt: float, state_y: np.ndarray, state_l: complex):
                z = piece.point(tt)
                dz = piece.deriv(tt)
                return rhs(z, state_y) * dz, dz / z

            # one embedded step
            ky = []
            kl = []
            for i in range(7):
                yy = y
                ll = logl
                for j in range(i):
                    a = _DP_A[i][j]
                    if a != 0.0:
                        yy = yy + h * a * ky[j]
                        ll = ll + h * a * kl[j]
                fy, fl = f(t + _DP_C[i] * h, yy, ll)
                ky.append(fy)
                kl.append(fl)
            y5 = y
            y4 = y
            l5 = logl
            l4 = logl
            for i in range(7):
                if _DP_B5[i] != 0.0:
                    y5 = y5 + h * _DP_B5[i] * ky[i]
                    l5 = l5 + h * _DP_B5[i] * kl[i]
                if _DP_B4[i] != 0.0:
                    y4 = y4 + h * _DP_B4[i] * ky[i]
                    l4 = l4 + h * _DP_B4[i] * kl[i]

            h_arc = abs(piece.point(t + h) - z_here)
            h_arc = max(h_arc, _MIN_ARC_STEP)
            # mixed absolute/relative norm per component: solution matrices
            # can span several orders of magnitude across columns and a
            # global max would starve the small ones of relative accuracy
            denom = 1.0 + np.abs(y)
            err = float(np.max(np.abs(y5 - y4) / denom))
            err = max(err, abs(l5 - l4) / (1.0 + abs(logl)))
            # floor at a few ulps: the 5th/4th-order difference cannot drop
            # below roundoff, and short finishing steps would otherwise be
            # rejected forever at tight tolerances
            budget = tol * h_arc + 4.0e-16
            if err <= budget:
                t += h
                y = y5
                logl = l5
                grow = 0.9 * (budget / err) ** 0.2 if err > 0 else 5.0
                h *= min(5.0, max(0.2, grow))
            else:
                h *= max(0.2, 0.9 * (budget / err) ** 0.2)
            if h * dz_here < _MIN_ARC_STEP and t < 1.0:
                raise StepUnderflowError(
                    "step below %g near lambda=%r" % (_MIN_ARC_STEP, z_here))
        # re-anchor on the exact piece endpoint, keeping the winding
        logl = _resync_log(piece.end, logl)

    endpoint = path[-1].end
    return y, BranchState(endpoint, logl)


# ---------------------------------------------------------------------------
# eigenvector near -1
# ---------------------------------------------------------------------------

def eig_unit_minus(mat: np.ndarray, tol: float) -> np.ndarray:
    """Unit-norm eigenvector for the unique eigenvalue within tol of -1.

    Raises EigenAmbiguityError when no eigenvalue or more than one falls
    inside the tol-disk around -1.  The returned vector's largest component
    is rotated to the positive real axis so repeated runs agree.
    """
    mat = np.asarray(mat, dtype=complex)
    w, v = np.linalg.eig(mat)
    dist = np.abs(w + 1.0)
    hits = np.nonzero(dist <= tol)[0]
    if len(hits) == 0:
        raise EigenAmbiguityError(
            "no eigenvalue within %g of -1 (closest %g)" % (tol, dist.min()))
    if len(hits) > 1:
        raise EigenAmbiguityError("eigenvalue near -1 is not unique")
    idx = int(hits[0])
    vec = v[:, idx]
    # one inverse-iteration polish at the computed eigenvalue
    shift = w[idx]
    n = mat.shape[0]
    try:
        refined = np.linalg.solve(mat - shift * np.eye(n) + 1e-300, vec)
        nrm = np.linalg.norm(refined)
        if np.isfinite(nrm) and nrm > 0:
            vec = refined / nrm
    except np.linalg.LinAlgError:
        pass
    vec = vec / np.linalg.norm(vec)
    k = int(np.argmax(np.abs(vec)))
    phase = vec[k] / abs(vec[k])
    return vec / phase


def check_inverse(mat: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Invert mat; raise if ||mat*inv - id|| is above tol."""
    mat = np.asarray(mat, dtype=complex)
    inv = np.linalg.inv(mat)
    n = mat.shape[0]
    res = np.max(np.abs(mat @ inv - np.eye(n)))
    if res > tol:
        raise NumericsError("inverse residual %g above %g" % (res, tol))
    return inv

"""Special functions, root finding and adaptive quadrature for the link model."""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate, optimize, special

from coopnet_energy.exceptions import NoBracketError, NonConvergenceError, ValidationError
from coopnet_energy.logger import get_logger

logger = get_logger(__name__)

RealOrArray = Union[float, np.ndarray]

# 1 - x K1(x) switches from its ascending series to the direct form here
SERIES_CUTOFF = 2.0
_SERIES_TERMS = 24
_K = np.arange(_SERIES_TERMS)
_SERIES_COEFFS = (special.digamma(_K + 1) + special.digamma(_K + 2)) / (
    special.factorial(_K) * special.factorial(_K + 1)
)

# Gauss-Kronrod 21-point rule is the smallest rule quad applies on a finite interval
MIN_RULE_SIZE = 21


@dataclass(frozen=True)
class QuadratureResult:
    """Value of a definite integral with its absolute error estimate."""

    value: float
    error_estimate: float
    evaluations: int


# ============== SPECIAL FUNCTIONS ==============

def q_function(x: RealOrArray) -> RealOrArray:
    """
    Gaussian tail probability Q(x) = P(N(0,1) > x).

    Evaluated through the complementary error function, so the far tail
    underflows to 0 rather than losing relative accuracy.
    """
    arr = np.asarray(x, dtype=float)
    return _as_output(0.5 * special.erfc(arr / math.sqrt(2.0)), x)


def bessel_k1(x: RealOrArray) -> RealOrArray:
    """
    Modified Bessel function of the second kind, order one.

    Args:
        x: Positive argument(s)

    Raises:
        ValidationError: If any argument is not strictly positive
    """
    arr = _positive_argument(x)
    return _as_output(special.k1(arr), x)


def bessel_k1_scaled(x: RealOrArray) -> RealOrArray:
    """exp(x) * K1(x); stays representable where K1 itself underflows."""
    arr = _positive_argument(x)
    return _as_output(special.k1e(arr), x)


def one_minus_x_k1(x: RealOrArray) -> RealOrArray:
    """
    1 - x K1(x) without cancellation near x = 0.

    Uses the ascending series of K1 for x <= SERIES_CUTOFF:
        1 - x K1(x) = -x ln(x/2) I1(x) + (x^2/4) sum_k [psi(k+1) + psi(k+2)] (x^2/4)^k / (k! (k+1)!)
    and the direct form above it. The limit value at x = 0 is 0.
    """
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~(arr >= 0)):
        raise ValidationError(f"1 - x K1(x) needs x >= 0, got {x}", key="x")

    out = np.empty_like(arr)
    small = arr <= SERIES_CUTOFF
    out[small] = _one_minus_x_k1_series(arr[small])
    large = arr[~small]
    out[~small] = 1.0 - large * special.k1(large)
    return _as_output(out.reshape(np.shape(x)), x)


def _one_minus_x_k1_series(x: np.ndarray) -> np.ndarray:
    """Internal: Ascending-series branch of one_minus_x_k1."""
    q = 0.25 * x * x
    tail = q * np.polynomial.polynomial.polyval(q, _SERIES_COEFFS)
    return -special.xlogy(x, 0.5 * x) * special.i1(x) + tail


# ============== ROOT FINDING ==============

def find_root_monotone(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
) -> float:
    """
    Root of a monotone function inside a sign-changing bracket.

    Brent's method (bisection safeguarding inverse quadratic
    interpolation); the returned point is within tol * max(1, |x|) of
    the root.

    Args:
        f: Strictly monotone function on [lo, hi]
        lo: Left end of the bracket
        hi: Right end of the bracket
        tol: Relative bracket tolerance

    Raises:
        NoBracketError: If f(lo) and f(hi) have the same sign
        NonConvergenceError: If the iteration budget runs out
    """
    if not lo < hi:
        raise ValidationError(f"Root bracket must satisfy lo < hi, got [{lo}, {hi}]", key="bracket")

    f_lo = f(lo)
    f_hi = f(hi)
    if f_lo == 0:
        return float(lo)
    if f_hi == 0:
        return float(hi)
    if np.sign(f_lo) == np.sign(f_hi):
        raise NoBracketError(
            f"f({lo}) = {f_lo} and f({hi}) = {f_hi} do not bracket a root"
        )

    # brentq refuses rtol below 4 eps
    rtol = max(tol, 4 * np.finfo(float).eps)
    root, info = optimize.brentq(f, lo, hi, xtol=tol, rtol=rtol, maxiter=500, full_output=True, disp=False)
    if not info.converged:
        raise NonConvergenceError(
            f"Root finder did not converge in {info.iterations} iterations on [{lo}, {hi}]: {info.flag}"
        )
    return float(root)


# ============== QUADRATURE ==============

def integrate_adaptive(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    abs_tol: Optional[float] = None,
    limit: int = 200,
) -> QuadratureResult:
    """
    Adaptive Gauss-Kronrod integral of f over [a, b].

    Args:
        f: Integrand, finite on [a, b]; endpoint limits must be returned by f itself
        a: Lower limit
        b: Upper limit (a <= b)
        tol: Relative tolerance
        abs_tol: Absolute tolerance (defaults to tol)
        limit: Maximum number of subintervals

    Returns:
        QuadratureResult

    Raises:
        NonConvergenceError: If the subdivision budget is exhausted before tolerance is met
    """
    if a > b:
        raise ValidationError(f"Integration limits must satisfy a <= b, got [{a}, {b}]", key="limits")
    if abs_tol is None:
        abs_tol = tol

    result = integrate.quad(f, a, b, epsabs=abs_tol, epsrel=tol, limit=limit, full_output=1)
    value, error, info = result[0], result[1], result[2]
    message = result[3] if len(result) > 3 else ""

    if message and error > max(abs_tol, tol * abs(value)):
        raise NonConvergenceError(
            f"Quadrature on [{a}, {b}] stopped at error {error:.3e} "
            f"after {info['last']} subintervals: {message}"
        )
    if message:
        logger.debug("Quadrature on [%s, %s] accepted with note: %s", a, b, message)

    return QuadratureResult(
        value=float(value),
        error_estimate=float(abs(error)),
        evaluations=max(int(info["neval"]), MIN_RULE_SIZE),
    )


# ============== INTERNAL FUNCTIONS ==============

def _positive_argument(x: RealOrArray) -> np.ndarray:
    """Internal: Reject non-positive Bessel arguments."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValidationError(f"K1 is defined for x > 0 only, got {x}", key="x")
    return arr


def _as_output(arr: np.ndarray, like: RealOrArray) -> RealOrArray:
    """Internal: Return a float for scalar input, an array otherwise."""
    if np.ndim(like) == 0:
        return float(np.asarray(arr).reshape(()))
    return arr

"""
Gaussian special functions for the laboratory.

Standard normal density and CDF, probabilists' Hermite polynomials, closed-form
partial Hermite-Gaussian integrals, and the quadrature/root-finding utilities
every other module consumes. All functions are pure and accept numpy arrays
wherever the argument is a real number.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as sp_integrate
from scipy import optimize as sp_optimize
from scipy import special as sp_special

from config.logging import get_component_logger
from config.settings import get_settings
from src.exceptions import ConvergenceError, DegreeCapError, InvalidIntervalError, NoSignChangeError

logger = get_component_logger("special_functions")

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
SQRT_HALF = math.sqrt(0.5)
MAX_HERMITE_DEGREE = 64


@dataclass(frozen=True)
class QuadratureResult:
    """Value of an adaptive quadrature and its error estimate."""

    value: float
    error_estimate: float


def truncation() -> float:
    """Finite stand-in for +-infinity in integration limits."""
    return get_settings().numerics.truncation


def phi(x):
    """Standard normal density."""
    x = np.asarray(x, dtype=float)
    out = INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return out if out.ndim else float(out)


def Phi(x):
    """Standard normal CDF through the complementary error function."""
    x = np.asarray(x, dtype=float)
    out = 0.5 * sp_special.erfc(-x * SQRT_HALF)
    return out if out.ndim else float(out)


def Phi_inv(p):
    """Inverse of the standard normal CDF."""
    p = np.asarray(p, dtype=float)
    out = sp_special.ndtri(p)
    return out if out.ndim else float(out)


def _check_degree(k: int) -> None:
    if k < 0 or k > MAX_HERMITE_DEGREE:
        raise DegreeCapError(f"Hermite degree {k} outside [0, {MAX_HERMITE_DEGREE}]")


def hermite_he(k: int, x):
    """
    Probabilists' Hermite polynomial He_k(x).

    Uses the three-term recurrence He_{k+1} = x He_k - k He_{k-1}.
    """
    _check_degree(k)
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if k == 0:
        return prev if prev.ndim else float(prev)
    cur = x.copy()
    for j in range(1, k):
        prev, cur = cur, x * cur - j * prev
    return cur if cur.ndim else float(cur)


def hermite_table(max_degree: int, x) -> np.ndarray:
    """Rows He_0(x) .. He_max_degree(x) stacked along a new leading axis."""
    _check_degree(max_degree)
    x = np.asarray(x, dtype=float)
    table = np.empty((max_degree + 1,) + x.shape)
    table[0] = 1.0
    if max_degree >= 1:
        table[1] = x
    for j in range(1, max_degree):
        table[j + 1] = x * table[j] - j * table[j - 1]
    return table


def _boundary_term(k: int, t: float) -> float:
    # He_{k-1}(t) phi(t), vanishing at +-infinity
    if math.isinf(t):
        return 0.0
    return hermite_he(k - 1, t) * phi(t)


def hermite_partial_integral(k: int, a: float, b: float) -> float:
    """
    Closed form of the integral of He_k(x) phi(x) over [a, b].

    For k >= 1 the antiderivative of He_k phi is -He_{k-1} phi; infinite
    endpoints are allowed.
    """
    _check_degree(k)
    if a > b:
        raise InvalidIntervalError(f"invalid interval [{a}, {b}]")
    if k == 0:
        # difference of upper tails when the interval sits right of the origin
        if a > 0:
            return float(Phi(-a) - Phi(-b))
        return float(Phi(b) - Phi(a))
    return float(_boundary_term(k, a) - _boundary_term(k, b))


def integrate(
    f: Callable[[float], float], a: float, b: float, tol: float = None
) -> QuadratureResult:
    """
    Adaptive quadrature used as an independent oracle for the closed forms.

    Infinite limits are replaced by the configured truncation; finite limits
    are used as given.
    """
    numerics = get_settings().numerics
    tol = numerics.quad_tolerance if tol is None else tol
    if a > b:
        raise InvalidIntervalError(f"invalid interval [{a}, {b}]")
    cut = numerics.truncation
    lo = min(-cut, b) if a == -math.inf else a
    hi = max(cut, a) if b == math.inf else b
    value, err, info = sp_integrate.quad(
        f, lo, hi, epsabs=tol, epsrel=0.0, limit=numerics.quad_limit, full_output=1
    )[:3]
    if err > tol:
        logger.error(f"quadrature on [{lo}, {hi}] stalled at error {err:.3e} > {tol:.3e}")
        raise ConvergenceError(
            f"quadrature did not reach tolerance {tol:.3e} (estimate {err:.3e}, "
            f"{info['neval']} evaluations)"
        )
    return QuadratureResult(value=float(value), error_estimate=float(err))


def find_root(f: Callable[[float], float], lo: float, hi: float, tol: float = None) -> float:
    """
    Bracketing root finder (Brent: bisection with secant and inverse quadratic steps).
    """
    tol = get_settings().numerics.root_tolerance if tol is None else tol
    f_lo = f(lo)
    f_hi = f(hi)
    if f_lo == 0.0:
        return float(lo)
    if f_hi == 0.0:
        return float(hi)
    if f_lo * f_hi > 0:
        raise NoSignChangeError(
            f"no sign change on [{lo}, {hi}]: f(lo)={f_lo:.6g}, f(hi)={f_hi:.6g}"
        )
    root, result = sp_optimize.brentq(f, lo, hi, xtol=tol, maxiter=500, full_output=True)
    if not result.converged:
        logger.error(f"root finder stopped after {result.iterations} iterations on [{lo}, {hi}]")
        raise ConvergenceError(f"root finder did not converge on [{lo}, {hi}]: {result.flag}")
    return float(root)

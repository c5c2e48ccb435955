"""
Davie-Reeds objective and constants.

F(C) = 4 phi(C)^2 - lam (4 Phi(-C) - 1) bounds the value of the game
Pi_1 - lam I over all sign-function pairs. Its critical points, the constants
C*, lam*, C_+, val(A_DR) and K_DR, and the integrality-gap ratio R(C) are
computed here from scratch; nothing is hard-coded.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from config.logging import get_component_logger
from src.exceptions import DomainError
from src.numerics.special_functions import Phi, find_root, phi

logger = get_component_logger("davie_reeds")

# 2 C phi(C) peaks at C = 1; c_plus lies in (1, C_PLUS_BRACKET).
C_PLUS_BRACKET = 6.0


@dataclass(frozen=True)
class DrConstants:
    """Constants of the Davie-Reeds game."""

    c_star: float
    lambda_star: float
    c_plus: float
    val_dr: float
    k_dr: float

    def to_dict(self):
        return {
            "c_star": self.c_star,
            "lambda_star": self.lambda_star,
            "c_plus": self.c_plus,
            "val_dr": self.val_dr,
            "k_dr": self.k_dr,
        }


def h_gap(c):
    """H(C) = 4 phi(C)^2 - 4 Phi(-C) + 1; its root in (0, 1) is C*."""
    return 4.0 * phi(c) ** 2 - 4.0 * Phi(-np.asarray(c, dtype=float)) + 1.0


def f_objective(c, lam: float):
    """F(C) for the game Pi_1 - lam I."""
    return 4.0 * phi(c) ** 2 - lam * (4.0 * Phi(-np.asarray(c, dtype=float)) - 1.0)


def f_prime(c, lam: float):
    """F'(C) = 4 phi (lam - 2 C phi)."""
    p = phi(c)
    return 4.0 * p * (lam - 2.0 * np.asarray(c, dtype=float) * p)


def f_second(c, lam: float):
    """F''(C) = -4 lam C phi + 8 phi^2 (2 C^2 - 1)."""
    c = np.asarray(c, dtype=float)
    p = phi(c)
    return -4.0 * lam * c * p + 8.0 * p * p * (2.0 * c * c - 1.0)


def _critical_points(lam: float):
    """Both solutions of lam = 2 C phi(C): C_- in (0, 1) and C_+ in (1, oo)."""
    if not 0.0 < lam < 2.0 * phi(1.0):
        raise DomainError(f"lam={lam} must lie in (0, 2 phi(1)) for two critical points")
    gap = lambda c: lam - 2.0 * c * phi(c)  # noqa: E731
    return find_root(gap, 0.0, 1.0), find_root(gap, 1.0, C_PLUS_BRACKET)


@lru_cache(maxsize=1)
def solve_constants() -> DrConstants:
    """Derive C*, lam*, C_+, val(A_DR) and K_DR."""
    c_star = find_root(h_gap, 0.0, 1.0)
    lambda_star = 2.0 * c_star * phi(c_star)
    _, c_plus = _critical_points(lambda_star)
    val_dr = float(f_objective(c_star, lambda_star))
    constants = DrConstants(
        c_star=c_star,
        lambda_star=lambda_star,
        c_plus=c_plus,
        val_dr=val_dr,
        k_dr=(1.0 - lambda_star) / val_dr,
    )
    logger.debug(f"Davie-Reeds constants: {constants.to_dict()}")
    return constants


def dr_value_for_lambda(lam: float) -> dict:
    """
    Davie-Reeds bound for an arbitrary lam in (0, 2 phi(1)).

    Returns the two critical points, the upper bound F(C_-) on val(Pi_1 - lam I)
    and the resulting ratio (1 - lam) / F(C_-), which is largest at lam*.
    """
    c_minus, c_plus = _critical_points(lam)
    value = float(f_objective(c_minus, lam))
    return {
        "lam": lam,
        "c_minus": c_minus,
        "c_plus": c_plus,
        "value": value,
        "ratio": (1.0 - lam) / value,
    }


def _check_ratio_domain(c: float) -> None:
    if not 0.0 <= c < 1.0:
        raise DomainError(f"ratio is defined on [0, 1); got C={c}")


def ratio(c: float) -> float:
    """
    R(C) = [4 phi^2 - 2 C phi (4 Phi(-C) - 1)] / (1 - 2 C phi).

    val/sdp of the game tuned so that C is its critical point; minimal at C*.
    """
    _check_ratio_domain(c)
    p = phi(c)
    lam = 2.0 * c * p
    return float((4.0 * p * p - lam * (4.0 * Phi(-c) - 1.0)) / (1.0 - lam))


def ratio_prime(c: float) -> float:
    """R'(C) = 2 (1 - C^2) phi / (1 - 2 C phi)^2 * H(C)."""
    _check_ratio_domain(c)
    p = phi(c)
    return float(2.0 * (1.0 - c * c) * p / (1.0 - 2.0 * c * p) ** 2 * h_gap(c))


def landscape(
    c_min: float, c_max: float, steps: int, lam: Optional[float] = None
) -> pd.DataFrame:
    """Uniform-grid table of (C, F(C), F'(C)) behind the landscape plot."""
    if steps < 2:
        raise DomainError(f"landscape needs at least 2 steps, got {steps}")
    lam = solve_constants().lambda_star if lam is None else lam
    grid = np.linspace(c_min, c_max, steps)
    return pd.DataFrame(
        {"C": grid, "F": f_objective(grid, lam), "Fprime": f_prime(grid, lam)},
        columns=["C", "F", "Fprime"],
    )


def landscape_csv(table: pd.DataFrame, out: Optional[Union[str, Path]] = None) -> str:
    """Serialize a landscape table as CSV with 6 significant digits."""
    text = table.to_csv(index=False, float_format="%.6g", lineterminator="\n")
    if out is not None:
        Path(out).write_text(text)
    return text


def sign_changes(values) -> int:
    """Number of strict sign changes along a sequence."""
    signs = np.sign(np.asarray(values, dtype=float))
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def second_derivative_ceiling() -> float:
    """-(2/pi) e^{-1/4}: the bound on F'' over [0, 1/2]."""
    return -(2.0 / math.pi) * math.exp(-0.25)

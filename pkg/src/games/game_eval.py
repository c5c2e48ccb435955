"""
Hermite projection games on one-dimensional sign functions.

A game is sum_k c_k Pi_k with c_k = explicit(k) + identity_weight; the
identity part is evaluated through the exact overlap E[fg]. Also holds the
perturbed Davie-Reeds game and the arithmetic of the improved lower bound.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional

import numpy as np

from config.logging import get_component_logger
from src.exceptions import DegreeCapError, DomainError, GapNotPositiveError
from src.games.davie_reeds import solve_constants
from src.games.strip_games import SignFunction1D, disagreement_measure, moment_vector, overlap
from src.numerics.serialization import dumps
from src.numerics.special_functions import MAX_HERMITE_DEGREE

logger = get_component_logger("game_eval")

# E (Pi_3 f)(Pi_3 g) >= GAP_CONSTANT for every strip pair
GAP_CONSTANT = 0.046
# coefficient of (2 eps)^{1/4} in the robustness loss
ROBUSTNESS_CONSTANT = 12.0


@dataclass(frozen=True)
class GameCoefficients:
    """Coefficients of sum_k c_k Pi_k: finitely many explicit ones plus a multiple of I."""

    explicit: Dict[int, float] = field(default_factory=dict)
    identity_weight: float = 0.0

    def __post_init__(self):
        cleaned = {int(k): float(v) for k, v in self.explicit.items()}
        for k in cleaned:
            if k < 0 or k > MAX_HERMITE_DEGREE:
                raise DegreeCapError(f"explicit degree {k} outside [0, {MAX_HERMITE_DEGREE}]")
        object.__setattr__(self, "explicit", dict(sorted(cleaned.items())))
        object.__setattr__(self, "identity_weight", float(self.identity_weight))

    def coefficient(self, k: int) -> float:
        return self.explicit.get(k, 0.0) + self.identity_weight

    def max_degree(self) -> int:
        return max((k for k, v in self.explicit.items() if v != 0.0), default=0)

    def to_dict(self) -> dict:
        return {
            "explicit": {str(k): v for k, v in self.explicit.items()},
            "identity_weight": self.identity_weight,
        }


@dataclass(frozen=True)
class SdpValue:
    """sup_k |c_k| and the first degree attaining it."""

    value: float
    degree: int


def dr_game() -> GameCoefficients:
    """Pi_1 - lam* I."""
    return perturbed_game(0.0)


def perturbed_game(eps: float) -> GameCoefficients:
    """Pi_1 - lam* I - eps Pi_3."""
    if eps < 0:
        raise DomainError(f"eps must be non-negative, got {eps}")
    lam = solve_constants().lambda_star
    explicit = {1: 1.0, 3: -eps} if eps else {1: 1.0}
    return GameCoefficients(explicit=explicit, identity_weight=-lam)


def projection_game(k: int) -> GameCoefficients:
    """Pi_k alone."""
    return GameCoefficients(explicit={k: 1.0})


def sdp_value(game: GameCoefficients) -> SdpValue:
    """Limit of the vector value as the dimension grows: sup_k |c_k|."""
    best = SdpValue(0.0, 0)
    # first degree carrying only the identity weight
    free = next(k for k in range(MAX_HERMITE_DEGREE + 2) if k not in game.explicit)
    for k in sorted(set(game.explicit) | {free}):
        c = abs(game.coefficient(k))
        if c > best.value:
            best = SdpValue(c, k)
    return best


def val_1d(
    game: GameCoefficients,
    f: SignFunction1D,
    g: SignFunction1D,
    degree_cap: Optional[int] = None,
) -> float:
    """E[(A f) g] for univariate sign functions."""
    top = game.max_degree()
    degree_cap = top if degree_cap is None else degree_cap
    if degree_cap > MAX_HERMITE_DEGREE or top > degree_cap:
        raise DegreeCapError(
            f"explicit degree {top} with degree_cap {degree_cap} (cap limit {MAX_HERMITE_DEGREE})"
        )
    total = 0.0
    if game.explicit:
        mf = moment_vector(f, top)
        mg = moment_vector(g, top)
        for k, c in game.explicit.items():
            if c:
                total += c * mf[k] * mg[k] / math.factorial(k)
    if game.identity_weight:
        total += game.identity_weight * overlap(f, g)
    return float(total)


def value_stability_gap(
    game: GameCoefficients, f: SignFunction1D, f_tilde: SignFunction1D, g: SignFunction1D
):
    """
    Both sides of |val(f, g) - val(f~, g)| <= ||A|| ||f - f~||_2.

    Returns (lhs, rhs).
    """
    lhs = abs(val_1d(game, f, g) - val_1d(game, f_tilde, g))
    rhs = sdp_value(game).value * 2.0 * math.sqrt(disagreement_measure(f, f_tilde))
    return lhs, rhs


def gap_term(eps):
    """0.046 - 12 (2 eps)^{1/4}."""
    return GAP_CONSTANT - ROBUSTNESS_CONSTANT * np.power(2.0 * np.asarray(eps, dtype=float), 0.25)


def perturbed_upper_bound(eps: float) -> float:
    """
    Upper bound on val(A_eps).

    The strip case gives val_dr - eps gap(eps); the Cauchy-Schwarz cap
    |E Pi_3 f Pi_3 g| <= 1 gives val_dr + eps. Both hold, so the smaller is kept.
    """
    if eps < 0:
        raise DomainError(f"eps must be non-negative, got {eps}")
    val_dr = solve_constants().val_dr
    return float(min(val_dr - eps * gap_term(eps), val_dr + eps))


def certified_improvement(eps) -> np.ndarray:
    """(1 - lam*) / val_dr^2 * eps * gap(eps), the linearized gain over K_DR."""
    constants = solve_constants()
    eps = np.asarray(eps, dtype=float)
    return (1.0 - constants.lambda_star) / constants.val_dr**2 * eps * gap_term(eps)


@dataclass(frozen=True)
class BoundChainReport:
    """The lower-bound chain at one eps."""

    epsilon: float
    val_dr: float
    gap_term: float
    val_eps_upper: float
    kg_lower: float
    improvement: float

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "val_dr": self.val_dr,
            "gap_term": self.gap_term,
            "val_eps_upper": self.val_eps_upper,
            "kg_lower": self.kg_lower,
            "improvement": self.improvement,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


def bound_chain(eps: float) -> BoundChainReport:
    """K_G >= (1 - lam*)/val(A_DR) + (1 - lam*)/val(A_DR)^2 eps gap(eps)."""
    if eps < 0:
        raise DomainError(f"eps must be non-negative, got {eps}")
    constants = solve_constants()
    gap = float(gap_term(eps))
    if gap <= 0:
        logger.error(f"bound chain requested at eps={eps} with gap term {gap:.6g}")
        raise GapNotPositiveError(
            f"gap term 0.046 - 12(2 eps)^(1/4) = {gap:.6g} is not positive at eps={eps}"
        )
    improvement = float(certified_improvement(eps))
    report = BoundChainReport(
        epsilon=float(eps),
        val_dr=constants.val_dr,
        gap_term=gap,
        val_eps_upper=perturbed_upper_bound(eps),
        kg_lower=constants.k_dr + improvement,
        improvement=improvement,
    )
    logger.debug(f"bound chain: {report.to_dict()}")
    return report


def gap_ratio_lower(eps: float) -> float:
    """(1 - lam*) / perturbed_upper_bound(eps): the ratio before linearization."""
    return (1.0 - solve_constants().lambda_star) / perturbed_upper_bound(eps)


def convexity_margin(x) -> np.ndarray:
    """(1 - lam*)/(val_dr - x) - [K_DR + (1 - lam*)/val_dr^2 x]; non-negative on [0, val_dr/2]."""
    constants = solve_constants()
    x = np.asarray(x, dtype=float)
    numerator = 1.0 - constants.lambda_star
    return numerator / (constants.val_dr - x) - (
        constants.k_dr + numerator / constants.val_dr**2 * x
    )


def stationary_epsilon() -> float:
    """Maximizer of eps gap(eps): 0.046 = 15 (2 eps)^{1/4}."""
    return (GAP_CONSTANT / (1.25 * ROBUSTNESS_CONSTANT)) ** 4 / 2.0


def best_epsilon(grid: Optional[Iterable[float]] = None) -> dict:
    """Grid maximizer of the certified improvement."""
    eps = np.logspace(-14, -8, 601) if grid is None else np.asarray(list(grid), dtype=float)
    gains = certified_improvement(eps)
    i = int(np.argmax(gains))
    return {
        "epsilon": float(eps[i]),
        "improvement": float(gains[i]),
        "gap_term": float(gap_term(eps[i])),
        "stationary_epsilon": stationary_epsilon(),
    }


def little_grothendieck_ratio() -> dict:
    """sdp/val of Pi_1 alone: val = 2/pi at f = g = sign, sdp = 1."""
    game = projection_game(1)
    sign = SignFunction1D.sign()
    val = val_1d(game, sign, sign)
    sdp = sdp_value(game).value
    return {"val": val, "sdp": sdp, "ratio": sdp / val}

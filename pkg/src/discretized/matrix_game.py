"""
Quadrature-discretized one-dimensional games.

The Gaussian value integral is replaced by an m-point Gauss-Hermite rule; the
game becomes an m x m matrix whose sign optimum (brute force) and vector
optimum (low-rank block-coordinate ascent) sandwich the Grothendieck ratio.
"""

import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from scipy import linalg as sp_linalg

from config.logging import get_component_logger, log_run
from config.settings import get_settings
from src.exceptions import SizeBoundError
from src.games.game_eval import GameCoefficients
from src.numerics.serialization import matrix_text
from src.numerics.special_functions import hermite_table

logger = get_component_logger("discretized")

MIN_NODES = 4
MAX_NODES = 64
MAX_ENUMERATION = 24
# pi / (2 ln(1 + sqrt 2)), the upper bound on K_G
KRIVINE_BOUND = math.pi / (2.0 * math.log(1.0 + math.sqrt(2.0)))


def gauss_hermite_normal(m: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights of the m-point rule for the standard normal weight.

    Golub-Welsch: the nodes are the eigenvalues of the Jacobi matrix of the
    He_k recurrence (zero diagonal, off-diagonal sqrt(k)); the weights are the
    squared first components of the normalized eigenvectors.
    """
    if m < 1:
        raise SizeBoundError(f"quadrature needs at least one node, got m={m}")
    off = np.sqrt(np.arange(1, m, dtype=float))
    nodes, vectors = sp_linalg.eigh_tridiagonal(np.zeros(m), off)
    weights = vectors[0, :] ** 2
    # enforce the exact mirror symmetry of the rule
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return nodes, weights / weights.sum()


@dataclass(frozen=True)
class DiscreteGame:
    """Game matrix on a Gauss-Hermite grid."""

    nodes: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray
    degree_cap: int

    @property
    def m(self) -> int:
        return len(self.nodes)

    def quadratic_form(self, f, g=None) -> float:
        """f^T A g for node-value vectors."""
        f = np.asarray(f, dtype=float)
        g = f if g is None else np.asarray(g, dtype=float)
        return float(f @ self.matrix @ g)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "degree_cap": self.degree_cap,
            "nodes": self.nodes.tolist(),
            "weights": self.weights.tolist(),
        }


def build(game: GameCoefficients, m: Optional[int] = None, degree_cap: Optional[int] = None):
    """
    Discretize sum_k c_k Pi_k on the m-point rule.

    matrix = W (sum_{k <= cap} explicit(k) He_k He_k^T / k!) W + identity_weight W,
    with W = diag(weights); explicit degrees above the cap are dropped.
    """
    settings = get_settings().discretization
    m = settings.m if m is None else m
    degree_cap = settings.degree_cap if degree_cap is None else degree_cap
    if not MIN_NODES <= m <= MAX_NODES:
        raise SizeBoundError(f"m must lie in [{MIN_NODES}, {MAX_NODES}], got {m}")
    if not 0 <= degree_cap < m:
        raise SizeBoundError(f"degree_cap must lie in [0, m), got {degree_cap} with m={m}")
    nodes, weights = gauss_hermite_normal(m)
    table = hermite_table(degree_cap, nodes)
    kernel = np.zeros((m, m))
    for k, c in game.explicit.items():
        if c and k <= degree_cap:
            kernel += c / math.factorial(k) * np.outer(table[k], table[k])
    matrix = weights[:, None] * kernel * weights[None, :] + game.identity_weight * np.diag(weights)
    return DiscreteGame(nodes=nodes, weights=weights, matrix=matrix, degree_cap=degree_cap)


def _matrix_of(dg: Union[DiscreteGame, np.ndarray]) -> np.ndarray:
    return dg.matrix if isinstance(dg, DiscreteGame) else np.asarray(dg, dtype=float)


def brute_val(dg: Union[DiscreteGame, np.ndarray], chunk: Optional[int] = None):
    """
    max over sign vectors f, g of f^T A g.

    For fixed f the best g is sign(A^T f), so the value is max_f ||A^T f||_1;
    f and -f give the same value, so f_0 = +1 is fixed. Returns (val, f, g).
    """
    matrix = _matrix_of(dg)
    m = matrix.shape[0]
    if m > MAX_ENUMERATION:
        raise SizeBoundError(f"brute force is limited to m <= {MAX_ENUMERATION}, got {m}")
    chunk = get_settings().discretization.enumeration_chunk if chunk is None else chunk
    started = time.perf_counter()
    total = 1 << (m - 1)
    shifts = np.arange(m - 1, dtype=np.int64)
    best_val = -np.inf
    best_index = 0
    for start in range(0, total, chunk):
        index = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = (index[:, None] >> shifts[None, :]) & 1
        signs = np.hstack([np.ones((len(index), 1)), 1.0 - 2.0 * bits])
        values = np.abs(signs @ matrix).sum(axis=1)
        j = int(np.argmax(values))
        if values[j] > best_val:
            best_val, best_index = float(values[j]), int(index[j])
    f = np.concatenate([[1.0], 1.0 - 2.0 * ((best_index >> np.arange(m - 1)) & 1)])
    g = np.where(f @ matrix >= 0, 1.0, -1.0)
    log_run("discretized", "brute_val", {"m": m, "val": best_val}, time.perf_counter() - started)
    return best_val, f.astype(int), g.astype(int)


def _normalize_rows(v: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)
    return np.where(norms > 0, v / safe, fallback)


def block_coordinate_ascent(
    matrix: np.ndarray, x: np.ndarray, y: np.ndarray, iters: int, tol: float = 1e-14
) -> np.ndarray:
    """
    Alternating exact maximization of sum_ij A_ij <x_i, y_j> over unit rows.

    Returns the objective after each sweep (non-decreasing).
    """
    history = []
    for _ in range(iters):
        x = _normalize_rows(matrix @ y, x)
        y = _normalize_rows(matrix.T @ x, y)
        history.append(float(np.sum(x * (matrix @ y))))
        if len(history) > 1 and history[-1] - history[-2] <= tol * max(1.0, abs(history[-1])):
            break
    return np.array(history)


def _random_unit_rows(rng: np.random.Generator, m: int, rank: int) -> np.ndarray:
    return _normalize_rows(rng.normal(size=(m, rank)), np.eye(1, rank).repeat(m, axis=0))


def bca_sdp(
    dg: Union[DiscreteGame, np.ndarray],
    rank: Optional[int] = None,
    iters: Optional[int] = None,
    seed: Optional[int] = None,
    warm_start: Optional[np.ndarray] = None,
) -> float:
    """
    Heuristic vector value: best over sweeps of block-coordinate ascent in rank r.

    Runs from a seeded random start and, if given, from the sign vector
    warm_start embedded in the first coordinate; the larger value is returned.
    """
    settings = get_settings()
    rank = settings.discretization.rank if rank is None else rank
    iters = settings.discretization.iters if iters is None else iters
    seed = settings.seed if seed is None else seed
    if rank < 2:
        raise SizeBoundError(f"rank must be at least 2, got {rank}")
    matrix = _matrix_of(dg)
    m = matrix.shape[0]
    rng = np.random.default_rng(seed)
    starts = [(_random_unit_rows(rng, m, rank), _random_unit_rows(rng, m, rank))]
    if warm_start is not None:
        f = np.asarray(warm_start, dtype=float)
        g = np.where(f @ matrix >= 0, 1.0, -1.0)
        e1 = np.eye(1, rank)
        starts.append((f[:, None] * e1, g[:, None] * e1))
    best = 0.0 if not np.any(matrix) else -np.inf
    for x, y in starts:
        history = block_coordinate_ascent(matrix, x, y, iters)
        if history.size:
            best = max(best, float(history.max()))
    logger.debug(f"bca_sdp: m={m} rank={rank} value={best:.15g}")
    return best


def random_instance(rng: np.random.Generator, m: int = 10, degree_cap: int = 6) -> DiscreteGame:
    """Discretized game with Gaussian random coefficients on degrees 0..degree_cap."""
    explicit = {k: float(rng.normal()) for k in range(degree_cap + 1)}
    return build(GameCoefficients(explicit, float(rng.normal())), m, degree_cap)


def export_matrix(dg: DiscreteGame, out: Optional[Union[str, Path]] = None) -> str:
    text = matrix_text(dg.matrix)
    if out is not None:
        Path(out).write_text(text)
    return text

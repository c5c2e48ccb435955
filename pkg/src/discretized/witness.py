"""
Monte Carlo checks in n dimensions.

witness_mc samples the degree-k multilinear witness Psi(x), whose coordinates
are the normalized products x_S over k-subsets S. Its squared norm is the
elementary symmetric polynomial e_k(x_1^2, ..., x_n^2) / C(n, k), computed from
power sums, so no O(n^k) vector is ever formed.

rotation_invariance_mc estimates E[(Pi_k f)(Pi_k g)] through the paired-sample
kernel identity E[f(X) g(X') K_k(X, X')], K_k = sum_{|a|=k} He_a(x) He_a(y) / a!,
before and after composing f and g with a random orthogonal map.
"""

import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from config.logging import get_component_logger, log_run
from config.settings import get_settings
from src.exceptions import SizeBoundError
from src.games.game_eval import GameCoefficients, sdp_value
from src.numerics.special_functions import hermite_table

logger = get_component_logger("witness")

SUPPORTED_DEGREES = (1, 3)
MIN_SAMPLES = 100


@dataclass(frozen=True)
class WitnessEstimate:
    """Statistics of <A Psi/|Psi|, Psi/|Psi|> sampled over X."""

    n: int
    k: int
    samples: int
    value_mean: float
    value_stderr: float
    norm_variance: float
    norm_mean: float
    norm_deviation: float
    sdp_lower: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "samples": self.samples,
            "value_mean": self.value_mean,
            "value_stderr": self.value_stderr,
            "norm_variance": self.norm_variance,
            "norm_mean": self.norm_mean,
            "norm_deviation": self.norm_deviation,
            "sdp_lower": self.sdp_lower,
        }


def _check_degree(k: int) -> None:
    if k not in SUPPORTED_DEGREES:
        raise SizeBoundError(f"k must be one of {SUPPORTED_DEGREES}, got {k}")


def _chunks(samples: int, chunk_size: int, seed: int):
    """(size, generator) per chunk, each chunk on its own spawned stream."""
    count = math.ceil(samples / chunk_size)
    streams = np.random.SeedSequence(seed).spawn(count)
    for i, stream in enumerate(streams):
        yield min(chunk_size, samples - i * chunk_size), np.random.default_rng(stream)


def witness_norm_sq(x: np.ndarray, k: int) -> np.ndarray:
    """|Psi(x)|^2 = e_k(x^2) / C(n, k) for each row of x."""
    _check_degree(k)
    n = x.shape[-1]
    sq = x * x
    p1 = sq.sum(axis=-1)
    if k == 1:
        return p1 / n
    p2 = (sq * sq).sum(axis=-1)
    p3 = (sq * sq * sq).sum(axis=-1)
    # Newton's identity for e_3 in terms of power sums
    e3 = (p1**3 - 3.0 * p1 * p2 + 2.0 * p3) / 6.0
    return e3 / math.comb(n, 3)


def witness_mc(
    n: int,
    k: int,
    game: GameCoefficients,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    chunk_size: Optional[int] = None,
) -> WitnessEstimate:
    """
    Monte Carlo statistics of the degree-k witness.

    Each sample contributes c_k |Psi(X)|^2, the exact value of <A Psi, Psi> at X
    (Psi is homogeneous of degree k). Also reports E|Psi|, E(|Psi| - 1)^2 and
    the certified lower bound |c_k| (E|Psi|)^2 - sup|c| (1 - (E|Psi|)^2) on the
    vector value.
    """
    settings = get_settings()
    samples = settings.monte_carlo.samples if samples is None else samples
    seed = settings.seed if seed is None else seed
    chunk_size = settings.monte_carlo.chunk_size if chunk_size is None else chunk_size
    _check_degree(k)
    if n < k:
        raise SizeBoundError(f"n must be at least k={k}, got {n}")
    if samples < MIN_SAMPLES:
        raise SizeBoundError(f"samples must be at least {MIN_SAMPLES}, got {samples}")

    started = time.perf_counter()
    c_k = game.coefficient(k)
    sums = np.zeros(5)  # |Psi|^2, |Psi|^4, |Psi|, (|Psi| - 1)^2, count
    for size, rng in _chunks(samples, chunk_size, seed):
        norm_sq = witness_norm_sq(rng.standard_normal((size, n)), k)
        norm = np.sqrt(np.maximum(norm_sq, 0.0))
        sums += [norm_sq.sum(), (norm_sq**2).sum(), norm.sum(), ((norm - 1.0) ** 2).sum(), size]

    total = sums[4]
    mean_sq = sums[0] / total
    var_sq = max(sums[1] / total - mean_sq**2, 0.0) * total / (total - 1)
    norm_mean = sums[2] / total
    sup = sdp_value(game).value
    estimate = WitnessEstimate(
        n=n,
        k=k,
        samples=samples,
        value_mean=c_k * mean_sq,
        value_stderr=abs(c_k) * math.sqrt(var_sq / total),
        norm_variance=var_sq,
        norm_mean=norm_mean,
        norm_deviation=sums[3] / total,
        sdp_lower=abs(c_k) * norm_mean**2 - sup * (1.0 - norm_mean**2),
    )
    log_run("witness", "witness_mc", {"n": n, "k": k, "samples": samples}, time.perf_counter() - started)
    return estimate


def random_rotation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar orthogonal matrix from the sign-fixed QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))[None, :]


@dataclass(frozen=True)
class AffineSign:
    """x -> sign(<direction, x> - offset), with sign(0) = +1."""

    direction: tuple
    offset: float = 0.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.where(x @ np.asarray(self.direction) - self.offset >= 0, 1.0, -1.0)


def default_pair(n: int):
    """Two fixed affine sign functions in n dimensions."""
    a = np.zeros(n)
    b = np.zeros(n)
    a[0], a[1] = 1.0, 0.5
    b[0] = 1.0
    b[-1] -= 0.3
    return (
        AffineSign(tuple(a / np.linalg.norm(a)), 0.2),
        AffineSign(tuple(b / np.linalg.norm(b)), -0.1),
    )


def hermite_kernel(x: np.ndarray, y: np.ndarray, k: int) -> np.ndarray:
    """K_k(x, y) = sum over multi-indices |a| = k of He_a(x) He_a(y) / a!, row by row."""
    n = x.shape[-1]
    hx = hermite_table(k, x)
    hy = hermite_table(k, y)
    out = np.zeros(x.shape[0])
    for combo in itertools.combinations_with_replacement(range(n), k):
        counts = np.bincount(combo, minlength=n)
        term = np.ones(x.shape[0])
        scale = 1.0
        for i in np.flatnonzero(counts):
            d = counts[i]
            term *= hx[d, :, i] * hy[d, :, i]
            scale *= math.factorial(d)
        out += term / scale
    return out


@dataclass(frozen=True)
class RotationCheck:
    """Estimates of E[(Pi_k f)(Pi_k g)] for (f, g) and (f o T, g o T)."""

    val_original: float
    err_original: float
    val_rotated: float
    err_rotated: float

    @property
    def combined_stderr(self) -> float:
        return math.hypot(self.err_original, self.err_rotated)

    @property
    def agree(self) -> bool:
        return abs(self.val_original - self.val_rotated) <= 4.0 * self.combined_stderr

    def to_dict(self) -> dict:
        return {
            "val_original": self.val_original,
            "err_original": self.err_original,
            "val_rotated": self.val_rotated,
            "err_rotated": self.err_rotated,
            "agree": self.agree,
        }


def rotation_invariance_mc(
    n: int,
    k: int,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    f: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    g: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    rotation: Optional[np.ndarray] = None,
    chunk_size: Optional[int] = None,
) -> RotationCheck:
    """Paired-sample estimates before and after a seeded random rotation, on shared samples."""
    settings = get_settings()
    samples = settings.monte_carlo.samples if samples is None else samples
    seed = settings.seed if seed is None else seed
    chunk_size = settings.monte_carlo.chunk_size if chunk_size is None else chunk_size
    _check_degree(k)
    if n < 2:
        raise SizeBoundError(f"n must be at least 2, got {n}")
    if samples < MIN_SAMPLES:
        raise SizeBoundError(f"samples must be at least {MIN_SAMPLES}, got {samples}")
    if f is None or g is None:
        default_f, default_g = default_pair(n)
        f = default_f if f is None else f
        g = default_g if g is None else g

    root = np.random.SeedSequence(seed)
    rotation_stream, sample_stream = root.spawn(2)
    if rotation is None:
        rotation = random_rotation(n, np.random.default_rng(rotation_stream))

    started = time.perf_counter()
    sums = np.zeros(4)
    for size, rng in _chunks(samples, chunk_size, int(sample_stream.generate_state(1)[0])):
        x = rng.standard_normal((size, n))
        y = rng.standard_normal((size, n))
        kernel = hermite_kernel(x, y, k)
        original = f(x) * g(y) * kernel
        rotated = f(x @ rotation.T) * g(y @ rotation.T) * kernel
        sums += [original.sum(), (original**2).sum(), rotated.sum(), (rotated**2).sum()]

    def mean_err(s, s2):
        mean = s / samples
        var = max(s2 / samples - mean**2, 0.0) * samples / (samples - 1)
        return float(mean), math.sqrt(var / samples)

    val_o, err_o = mean_err(sums[0], sums[1])
    val_r, err_r = mean_err(sums[2], sums[3])
    log_run(
        "witness",
        "rotation_invariance_mc",
        {"n": n, "k": k, "samples": samples},
        time.perf_counter() - started,
    )
    return RotationCheck(val_o, err_o, val_r, err_r)

"""
Multi-start coordinate ascent over breakpoint parameterizations.

Each restart draws random sign functions f and g and moves one breakpoint at a
time to the best position in its cell (coarse scan, then bounded Brent on the
best bracket). Moves are accepted only when they raise the value, so every
trace is non-decreasing. Restarts own independent generator streams and are
merged by a max-reduction, so the result does not depend on the worker count.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, field_validator
from scipy import optimize as sp_optimize

from config.logging import get_component_logger, log_run
from config.settings import get_settings
from src.games.game_eval import GameCoefficients, val_1d
from src.games.strip_games import SignFunction1D, random_sign_function
from src.numerics.serialization import dumps

logger = get_component_logger("search")


class SearchConfig(BaseModel):
    """Search parameters; defaults come from the GLAB_SEARCH_* settings."""

    model_config = ConfigDict(frozen=True)

    max_breakpoints_per_function: int
    restarts: int
    seed: int
    step_tolerance: float
    value_tolerance: float
    max_sweeps: int = 200
    grid_points: int = 12
    workers: int = 1

    @field_validator("restarts", "max_breakpoints_per_function", "max_sweeps", "workers")
    @classmethod
    def validate_positive(cls, v):
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @field_validator("grid_points")
    @classmethod
    def validate_grid(cls, v):
        if v < 3:
            raise ValueError("grid_points must be at least 3")
        return v

    @field_validator("step_tolerance", "value_tolerance")
    @classmethod
    def validate_tolerance(cls, v):
        if v <= 0:
            raise ValueError("tolerances must be positive")
        return v

    @field_validator("seed")
    @classmethod
    def validate_seed(cls, v):
        if not 0 <= v < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        return v

    @classmethod
    def from_settings(cls, **overrides) -> "SearchConfig":
        settings = get_settings()
        search = settings.search
        values = {
            "max_breakpoints_per_function": search.max_breakpoints,
            "restarts": search.restarts,
            "seed": settings.seed,
            "step_tolerance": search.step_tolerance,
            "value_tolerance": search.value_tolerance,
            "max_sweeps": search.max_sweeps,
            "grid_points": search.grid_points,
            "workers": search.workers,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass
class RestartOutcome:
    """Best pair found by one restart."""

    restart: int
    val: float
    f: SignFunction1D
    g: SignFunction1D
    trace: List[Tuple[int, float]]
    converged: bool


@dataclass
class SearchResult:
    """Best pair over all restarts plus the per-restart traces."""

    best_f: SignFunction1D
    best_g: SignFunction1D
    best_val: float
    trace: List[Tuple[int, int, float]]
    converged: bool
    best_restart: int
    config: SearchConfig
    restart_values: List[float] = field(default_factory=list)
    restart_pairs: List[Tuple[SignFunction1D, SignFunction1D]] = field(default_factory=list)

    def trace_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.trace, columns=["restart", "iteration", "val"])

    def trace_csv(self, out: Optional[Union[str, Path]] = None) -> str:
        text = self.trace_frame().to_csv(index=False, float_format="%.17g", lineterminator="\n")
        if out is not None:
            Path(out).write_text(text)
        return text

    def to_dict(self) -> dict:
        return {
            "best_val": self.best_val,
            "best_f": self.best_f.to_dict(),
            "best_g": self.best_g.to_dict(),
            "best_restart": self.best_restart,
            "converged": self.converged,
            "config": self.config.model_dump(),
        }

    def to_json(self) -> str:
        return dumps(self.to_dict())


class _Coordinate:
    """Line searches over the breakpoints of one sign function with the other held fixed."""

    def __init__(self, game: GameCoefficients, cfg: SearchConfig, bound: float):
        self.game = game
        self.cfg = cfg
        self.bound = bound

    def value(self, f: SignFunction1D, g: SignFunction1D) -> float:
        return val_1d(self.game, f, g)

    def moved(self, fn: SignFunction1D, i: int, x: float) -> SignFunction1D:
        bps = list(fn.breakpoints)
        bps[i] = x
        return SignFunction1D.canonical(bps, fn.leading_sign, bound=self.bound)

    def line_search(self, fn, other, i, current, first):
        """Best position of breakpoint i of fn; returns (value, new fn)."""
        bps = fn.breakpoints
        lo = bps[i - 1] if i > 0 else -self.bound
        hi = bps[i + 1] if i + 1 < len(bps) else self.bound

        def val_at(x):
            candidate = self.moved(fn, i, x)
            pair = (candidate, other) if first else (other, candidate)
            return self.value(*pair), candidate

        grid = np.linspace(lo, hi, self.cfg.grid_points)
        scanned = [val_at(x) for x in grid]
        j = int(np.argmax([v for v, _ in scanned]))
        best_val, best_fn = scanned[j]
        if 0 < j < len(grid) - 1:
            res = sp_optimize.minimize_scalar(
                lambda x: -val_at(x)[0],
                bounds=(grid[j - 1], grid[j + 1]),
                method="bounded",
                options={"xatol": self.cfg.step_tolerance},
            )
            refined_val, refined_fn = val_at(float(res.x))
            if refined_val > best_val:
                best_val, best_fn = refined_val, refined_fn
        if best_val > current:
            return best_val, best_fn
        return current, fn


def _shift(fn: SignFunction1D, other: SignFunction1D) -> float:
    """Largest breakpoint displacement between two sign functions (inf if the count changed)."""
    if len(fn.breakpoints) != len(other.breakpoints) or fn.leading_sign != other.leading_sign:
        return np.inf
    if not fn.breakpoints:
        return 0.0
    return float(np.max(np.abs(np.subtract(fn.breakpoints, other.breakpoints))))


def run_restart(
    game: GameCoefficients, cfg: SearchConfig, restart: int, seed_seq: np.random.SeedSequence
) -> RestartOutcome:
    """One coordinate-ascent run from a random start."""
    rng = np.random.default_rng(seed_seq)
    bound = get_settings().numerics.truncation
    coordinate = _Coordinate(game, cfg, bound)
    f = random_sign_function(rng, cfg.max_breakpoints_per_function)
    g = random_sign_function(rng, cfg.max_breakpoints_per_function)
    current = coordinate.value(f, g)
    trace = [(0, current)]
    converged = False
    for sweep in range(1, cfg.max_sweeps + 1):
        start_val, start_f, start_g = current, f, g
        for first in (True, False):
            i = 0
            while i < len((f if first else g).breakpoints):
                if first:
                    current, f = coordinate.line_search(f, g, i, current, True)
                else:
                    current, g = coordinate.line_search(g, f, i, current, False)
                i += 1
        trace.append((sweep, current))
        step = max(_shift(f, start_f), _shift(g, start_g))
        if current - start_val <= cfg.value_tolerance or step <= cfg.step_tolerance:
            converged = True
            break
    logger.debug(
        f"restart {restart}: val={current:.15g} after {len(trace) - 1} sweeps "
        f"({len(f.breakpoints)}+{len(g.breakpoints)} breakpoints)"
    )
    return RestartOutcome(restart, current, f, g, trace, converged)


def optimize(game: GameCoefficients, cfg: Optional[SearchConfig] = None) -> SearchResult:
    """Best pair over cfg.restarts coordinate-ascent runs; deterministic given cfg.seed."""
    cfg = SearchConfig.from_settings() if cfg is None else cfg
    started = time.perf_counter()
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    jobs = list(range(cfg.restarts))
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(
                pool.map(run_restart, [game] * len(jobs), [cfg] * len(jobs), jobs, streams)
            )
    else:
        outcomes = [run_restart(game, cfg, r, streams[r]) for r in jobs]

    # ties go to the lowest restart index
    best = max(outcomes, key=lambda o: (o.val, -o.restart))
    trace = [(o.restart, it, v) for o in outcomes for it, v in o.trace]
    result = SearchResult(
        best_f=best.f,
        best_g=best.g,
        best_val=val_1d(game, best.f, best.g),
        trace=trace,
        converged=all(o.converged for o in outcomes),
        best_restart=best.restart,
        config=cfg,
        restart_values=[o.val for o in outcomes],
        restart_pairs=[(o.f, o.g) for o in outcomes],
    )
    log_run(
        "search",
        "optimize",
        {"restarts": cfg.restarts, "seed": cfg.seed, "best_val": result.best_val},
        time.perf_counter() - started,
    )
    return result

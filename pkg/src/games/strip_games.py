"""
One-dimensional sign functions and Davie-Reeds strip games.

Provides the value types SignFunction1D, StepFunction1D and IntervalUnion,
exact Hermite moments of step functions, the square-wave strip optimizers and
the degree-3 gap of strip pairs.

In one dimension Pi_k f is the rank-one term moment(f, k)/k! He_k, so every
projection-game quantity reduces to moments of step functions.
"""

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.logging import get_component_logger
from src.exceptions import (
    DegreeCapError,
    InvalidIntervalError,
    NoRootInCellError,
    NoSignChangeError,
    NotAStripPairError,
    SupportViolationError,
)
from src.games.davie_reeds import solve_constants
from src.numerics.special_functions import (
    MAX_HERMITE_DEGREE,
    Phi,
    find_root,
    hermite_partial_integral,
    hermite_table,
    phi,
)

logger = get_component_logger("strip_games")

INF = math.inf


def _midpoint(lo: float, hi: float) -> float:
    if math.isinf(lo) and math.isinf(hi):
        return 0.0
    if math.isinf(lo):
        return hi - 1.0
    if math.isinf(hi):
        return lo + 1.0
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SignFunction1D:
    """A +-1 step function: leading_sign on (-oo, first breakpoint), flipping at each breakpoint."""

    breakpoints: Tuple[float, ...]
    leading_sign: int

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        if any(not math.isfinite(b) for b in bps):
            raise InvalidIntervalError(f"breakpoints must be finite: {bps}")
        if any(b1 >= b2 for b1, b2 in zip(bps, bps[1:])):
            raise InvalidIntervalError(f"breakpoints must be strictly increasing: {bps}")
        if self.leading_sign not in (1, -1):
            raise ValueError(f"leading_sign must be +1 or -1, got {self.leading_sign}")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "leading_sign", int(self.leading_sign))

    @classmethod
    def constant(cls, sign: int = 1) -> "SignFunction1D":
        return cls((), sign)

    @classmethod
    def sign(cls) -> "SignFunction1D":
        """sign(x)."""
        return cls((0.0,), -1)

    @classmethod
    def canonical(
        cls,
        breakpoints: Iterable[float],
        leading_sign: int,
        merge_tol: float = 0.0,
        bound: Optional[float] = None,
    ) -> "SignFunction1D":
        """
        Build a sign function from unsorted, possibly coincident breakpoints.

        Coincident breakpoints (within merge_tol) annihilate in pairs; breakpoints
        at or beyond +-bound are dropped, flipping the leading sign for the left ones.
        """
        sign = leading_sign
        kept: List[float] = []
        for b in sorted(float(b) for b in breakpoints):
            if bound is not None and b <= -bound:
                sign = -sign
                continue
            if bound is not None and b >= bound:
                continue
            if kept and b - kept[-1] <= merge_tol:
                kept.pop()
            else:
                kept.append(b)
        return cls(tuple(kept), sign)

    def values(self) -> Tuple[int, ...]:
        return tuple(self.leading_sign * (-1) ** i for i in range(len(self.breakpoints) + 1))

    def cells(self) -> Tuple[Tuple[float, ...], Tuple[int, ...]]:
        """Cell edges (with +-oo) and the value on each cell."""
        return (-INF,) + self.breakpoints + (INF,), self.values()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(np.asarray(self.breakpoints, dtype=float), x, side="right")
        out = self.leading_sign * np.where(idx % 2 == 0, 1, -1)
        return out if out.ndim else int(out)

    def negate(self) -> "SignFunction1D":
        return SignFunction1D(self.breakpoints, -self.leading_sign)

    def reflect(self) -> "SignFunction1D":
        """x -> f(-x)."""
        trailing = self.values()[-1]
        return SignFunction1D(tuple(-b for b in reversed(self.breakpoints)), trailing)

    def to_dict(self) -> dict:
        return {"leading_sign": self.leading_sign, "breakpoints": list(self.breakpoints)}

    @classmethod
    def from_dict(cls, data: dict) -> "SignFunction1D":
        return cls(tuple(data["breakpoints"]), int(data["leading_sign"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SignFunction1D":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class StepFunction1D:
    """A step function with values in {-1, 0, +1}, one value per cell."""

    breakpoints: Tuple[float, ...]
    values: Tuple[int, ...]

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        vals = tuple(int(v) for v in self.values)
        if len(vals) != len(bps) + 1:
            raise ValueError(f"need {len(bps) + 1} values for {len(bps)} breakpoints, got {len(vals)}")
        if any(v not in (-1, 0, 1) for v in vals):
            raise ValueError(f"values must lie in {{-1, 0, 1}}: {vals}")
        if any(not math.isfinite(b) for b in bps):
            raise InvalidIntervalError(f"breakpoints must be finite: {bps}")
        if any(b1 >= b2 for b1, b2 in zip(bps, bps[1:])):
            raise InvalidIntervalError(f"breakpoints must be strictly increasing: {bps}")
        if any(v1 == v2 for v1, v2 in zip(vals, vals[1:])):
            raise ValueError(f"adjacent values must differ: {vals}")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_cells(cls, edges: Sequence[float], values: Sequence[int]) -> "StepFunction1D":
        """Drop zero-width cells and merge equal neighbours; edges include +-oo."""
        bps: List[float] = []
        vals: List[int] = [int(values[0])]
        for edge, v in zip(edges[1:-1], values[1:]):
            v = int(v)
            if v == vals[-1]:
                continue
            if bps and edge <= bps[-1]:
                # zero-width cell: the new value replaces the previous one
                vals[-1] = v
                if len(vals) >= 2 and vals[-1] == vals[-2]:
                    vals.pop()
                    bps.pop()
                continue
            bps.append(float(edge))
            vals.append(v)
        return cls(tuple(bps), tuple(vals))

    def cells(self) -> Tuple[Tuple[float, ...], Tuple[int, ...]]:
        return (-INF,) + self.breakpoints + (INF,), self.values

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(np.asarray(self.breakpoints, dtype=float), x, side="right")
        out = np.asarray(self.values)[idx]
        return out if out.ndim else int(out)

    def reflect(self) -> "StepFunction1D":
        return StepFunction1D(
            tuple(-b for b in reversed(self.breakpoints)), tuple(reversed(self.values))
        )

    def to_sign_function(self) -> SignFunction1D:
        if 0 in self.values:
            raise SupportViolationError(f"step function takes the value 0: {self.values}")
        return SignFunction1D(self.breakpoints, self.values[0])


AnyStep = Union[SignFunction1D, StepFunction1D]


def _as_step(f: AnyStep) -> StepFunction1D:
    if isinstance(f, StepFunction1D):
        return f
    return StepFunction1D(f.breakpoints, f.values())


def refine(*functions: AnyStep) -> Tuple[np.ndarray, List[np.ndarray]]:
    """Common refinement: cell edges (with +-oo) and each function's values on them."""
    inner = sorted({b for f in functions for b in f.breakpoints})
    edges = np.array([-INF] + inner + [INF])
    mids = np.array([_midpoint(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])])
    return edges, [np.asarray(f(mids)) for f in functions]


# --------------------------------------------------------------------------- moments


def _check_degree(k: int) -> None:
    if k < 0 or k > MAX_HERMITE_DEGREE:
        raise DegreeCapError(f"Hermite degree {k} outside [0, {MAX_HERMITE_DEGREE}]")


def moment(f: AnyStep, k: int) -> float:
    """E[He_k(X) f(X)], assembled cell by cell from the closed-form partial integrals."""
    _check_degree(k)
    edges, values = f.cells()
    total = 0.0
    for lo, hi, v in zip(edges[:-1], edges[1:], values):
        if v:
            total += v * hermite_partial_integral(k, lo, hi)
    return total


def _jumps(f: AnyStep) -> Tuple[np.ndarray, np.ndarray, int]:
    edges, values = f.cells()
    vals = np.asarray(values, dtype=float)
    return np.asarray(edges[1:-1], dtype=float), vals[1:] - vals[:-1], int(values[-1])


def moment_vector(f: AnyStep, max_degree: int) -> np.ndarray:
    """
    Moments of degrees 0..max_degree at once.

    Uses the jump form: the moment of degree k >= 1 is the sum over breakpoints
    t of (jump at t) He_{k-1}(t) phi(t).
    """
    _check_degree(max_degree)
    t, d, last = _jumps(f)
    out = np.empty(max_degree + 1)
    out[0] = last - float(np.dot(d, Phi(t))) if t.size else float(last)
    if max_degree >= 1:
        if t.size:
            table = hermite_table(max_degree - 1, t)
            out[1:] = table @ (d * phi(t))
        else:
            out[1:] = 0.0
    return out


def overlap(f: SignFunction1D, g: SignFunction1D) -> float:
    """E[f(X) g(X)], exact from the interval overlap."""
    merged = np.sort(np.concatenate([f.breakpoints, g.breakpoints]))
    if merged.size == 0:
        return float(f.leading_sign * g.leading_sign)
    sign = f.leading_sign * g.leading_sign
    alternating = sign * np.where(np.arange(merged.size) % 2 == 0, 1.0, -1.0)
    # cell values v_j = sign (-1)^j; jump at t_j is -2 v_{j-1}
    last = sign * (-1) ** merged.size
    return float(last + 2.0 * np.dot(alternating, Phi(merged)))


def pi_k_inner(f: AnyStep, g: AnyStep, k: int) -> float:
    """<Pi_k f, Pi_k g> for univariate functions: moment(f,k) moment(g,k) / k!."""
    _check_degree(k)
    return moment(f, k) * moment(g, k) / math.factorial(k)


def projection_norm_sq(f: AnyStep, k: int) -> float:
    return pi_k_inner(f, f, k)


def parseval_partial_sum(f: AnyStep, max_degree: int) -> np.ndarray:
    """Cumulative sums of moment(f,k)^2 / k! for k = 0..max_degree."""
    m = moment_vector(f, max_degree)
    factorials = np.array([math.factorial(k) for k in range(max_degree + 1)], dtype=float)
    return np.cumsum(m * m / factorials)


# --------------------------------------------------------------------------- interval unions


@dataclass(frozen=True)
class IntervalUnion:
    """Finite union of disjoint closed intervals, sorted; +-oo allowed at the extremes."""

    intervals: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        for a, b in ivs:
            if not a < b:
                raise InvalidIntervalError(f"interval [{a}, {b}] is empty or reversed")
        for (_, b1), (a2, _) in zip(ivs, ivs[1:]):
            if not b1 < a2:
                raise InvalidIntervalError(f"intervals overlap or are unsorted: {ivs}")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def empty(cls) -> "IntervalUnion":
        return cls(())

    @classmethod
    def strip_complement(cls, c: float) -> "IntervalUnion":
        """{x : |x| >= c}."""
        if c <= 0.0:
            return cls(((-INF, INF),))
        return cls(((-INF, -c), (c, INF)))

    @classmethod
    def strip(cls, c: float) -> "IntervalUnion":
        """{x : |x| <= c}."""
        return cls(((-c, c),)) if c > 0.0 else cls.empty()

    @classmethod
    def from_mask(cls, edges: Sequence[float], mask: Sequence[bool]) -> "IntervalUnion":
        """Union of the cells (edges[i], edges[i+1]) where mask[i] holds."""
        out: List[Tuple[float, float]] = []
        for lo, hi, inside in zip(edges[:-1], edges[1:], mask):
            if not inside or not lo < hi:
                continue
            if out and out[-1][1] >= lo:
                out[-1] = (out[-1][0], hi)
            else:
                out.append((float(lo), float(hi)))
        return cls(tuple(out))

    def _edges(self) -> List[float]:
        return [e for iv in self.intervals for e in iv]

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals:
            inside |= (x >= a) & (x <= b)
        return inside if inside.ndim else bool(inside)

    def _combine(self, other: "IntervalUnion", op: Callable[[bool, bool], bool]) -> "IntervalUnion":
        edges = sorted({-INF, INF, *self._edges(), *other._edges()})
        mids = [_midpoint(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
        mask = [op(self.contains(m), other.contains(m)) for m in mids]
        return IntervalUnion.from_mask(edges, mask)

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return self._combine(other, lambda a, b: a or b)

    def intersection(self, other: "IntervalUnion") -> "IntervalUnion":
        return self._combine(other, lambda a, b: a and b)

    def difference(self, other: "IntervalUnion") -> "IntervalUnion":
        return self._combine(other, lambda a, b: a and not b)

    def complement(self) -> "IntervalUnion":
        return IntervalUnion(((-INF, INF),)).difference(self)

    def gaussian_measure(self) -> float:
        return float(sum(hermite_partial_integral(0, a, b) for a, b in self.intervals))

    def abs_x_mass(self) -> float:
        """E[|X| 1_S(X)]."""
        total = 0.0
        for a, b in self.intervals:
            if a >= 0.0:
                total += phi(a) - phi(b)
            elif b <= 0.0:
                total += phi(b) - phi(a)
            else:
                total += 2.0 * phi(0.0) - phi(a) - phi(b)
        return float(total)

    def to_list(self) -> List[List[float]]:
        return [[a, b] for a, b in self.intervals]


def gaussian_measure(s: IntervalUnion) -> float:
    return s.gaussian_measure()


def symmetric_difference(s: IntervalUnion, t: IntervalUnion) -> IntervalUnion:
    return s._combine(t, lambda a, b: a != b)


def abs_x_mass(s: IntervalUnion) -> float:
    return s.abs_x_mass()


def level_set(f: AnyStep, value: int) -> IntervalUnion:
    """{x : f(x) = value}."""
    edges, values = f.cells()
    return IntervalUnion.from_mask(edges, [v == value for v in values])


def agreement_set(f: SignFunction1D, g: SignFunction1D) -> IntervalUnion:
    """S = {f = g}."""
    edges, (vf, vg) = refine(f, g)
    return IntervalUnion.from_mask(list(edges), list(vf == vg))


def disagreement_measure(f: AnyStep, g: AnyStep) -> float:
    """Gaussian measure of {f != g}."""
    edges, (vf, vg) = refine(f, g)
    return IntervalUnion.from_mask(list(edges), list(vf != vg)).gaussian_measure()


def l2_distance(f: SignFunction1D, g: SignFunction1D) -> float:
    """||f - g||_2 for +-1 functions: 2 sqrt(measure{f != g})."""
    return 2.0 * math.sqrt(disagreement_measure(f, g))


# --------------------------------------------------------------------------- strip pairs


def u_function(c: Optional[float] = None) -> StepFunction1D:
    """u(x) = sign(x) 1_{|x| >= C}."""
    c = solve_constants().c_star if c is None else c
    return StepFunction1D((-c, c), (-1, 0, 1))


def constant_strip(sign: int = 1, c: Optional[float] = None) -> StepFunction1D:
    """h equal to sign on the whole strip [-C, C]."""
    c = solve_constants().c_star if c is None else c
    return StepFunction1D((-c, c), (0, sign, 0))


def square_wave(inner: Sequence[float], c: Optional[float] = None) -> StepFunction1D:
    """
    Odd square wave on the strip.

    inner are the positive breakpoints 0 < t_1 < ... < t_r < C; the wave is +1
    on (t_r, C), alternates towards the origin and is mirrored oddly, so it
    always flips at 0.
    """
    c = solve_constants().c_star if c is None else c
    ts = sorted(float(t) for t in inner)
    if any(not 0.0 < t < c for t in ts):
        raise SupportViolationError(f"square-wave breakpoints must lie in (0, {c}): {ts}")
    r = len(ts)
    positive = [(-1) ** (r - i) for i in range(r + 1)]  # values on (0,t_1), ..., (t_r, C)
    negative = [-v for v in reversed(positive)]  # values on (-C,-t_r), ..., (-t_1, 0)
    bps = [-c] + [-t for t in reversed(ts)] + [0.0] + ts + [c]
    return StepFunction1D(tuple(bps), tuple([0] + negative + positive + [0]))


def build_strip_pair(h: StepFunction1D, c: Optional[float] = None):
    """
    Strip pair f = u + h, g = u - h for a strip pattern h.

    h must vanish outside [-C, C] and be +-1 inside.
    """
    c = solve_constants().c_star if c is None else c
    h = _as_step(h)
    edges = np.array(sorted({-INF, INF, -c, c, *h.breakpoints}))
    mids = np.array([_midpoint(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])])
    vh = np.asarray(h(mids))
    inside = np.abs(mids) < c
    if np.any(vh[~inside] != 0) or np.any(vh[inside] == 0):
        logger.error(f"strip pattern violates its support: breakpoints={h.breakpoints}")
        raise SupportViolationError(
            f"h must be +-1 on (-{c}, {c}) and 0 outside; got values {h.values} "
            f"at breakpoints {h.breakpoints}"
        )
    outside_sign = np.where(mids > 0, 1, -1)
    vf = np.where(inside, vh, outside_sign)
    vg = np.where(inside, -vh, outside_sign)
    f = StepFunction1D.from_cells(list(edges), list(vf)).to_sign_function()
    g = StepFunction1D.from_cells(list(edges), list(vg)).to_sign_function()
    return f, g


def solve_balanced_breakpoint(
    pattern: Callable[[float], StepFunction1D],
    lo: float,
    hi: float,
    guess: Optional[float] = None,
    tol: float = 1e-13,
) -> float:
    """
    Position of the free breakpoint that makes moment(h, 1) vanish.

    pattern maps the free breakpoint to the strip pattern h; the root is
    searched in the feasible cell [lo, hi].
    """
    residual = lambda b: moment(pattern(b), 1)  # noqa: E731
    if guess is not None and abs(residual(guess)) <= 1e-12:
        return float(guess)
    try:
        return find_root(residual, lo, hi, tol)
    except NoSignChangeError as exc:
        logger.debug(f"no balanced breakpoint in [{lo}, {hi}]: {exc}")
        raise NoRootInCellError(f"moment(h, 1) has no root in [{lo}, {hi}]") from exc


def fig1_middle_breakpoint() -> float:
    """Breakpoint b of the symmetric square wave flipping at -b, 0, b."""
    c = solve_constants().c_star
    return solve_balanced_breakpoint(lambda b: square_wave([b], c), 1e-9, c - 1e-9)


def fig1_right_breakpoint(inner: float = 0.12708) -> float:
    """Outer breakpoint of the two-level square wave with inner breakpoint fixed."""
    c = solve_constants().c_star
    return solve_balanced_breakpoint(
        lambda b: square_wave([inner, b], c), inner + 1e-9, c - 1e-9
    )


@dataclass(frozen=True)
class StripDiagnostics:
    """Outcome of the strip-pair check."""

    item_i: bool
    orientation: int
    defect: float
    h_moment1: float
    item_ii: bool

    def to_dict(self) -> dict:
        return {
            "item_i": self.item_i,
            "orientation": self.orientation,
            "defect": self.defect,
            "h_moment1": self.h_moment1,
            "item_ii": self.item_ii,
        }


def is_strip_pair(
    f: SignFunction1D,
    g: SignFunction1D,
    tol: float = 1e-9,
    balance_tol: Optional[float] = None,
    c: Optional[float] = None,
) -> StripDiagnostics:
    """
    Check item (i) up to x -> -x and report the balance residual of item (ii).

    defect is the L2 size of the smallest edit that makes (f, g) a strip pair
    in the best orientation.
    """
    c = solve_constants().c_star if c is None else c
    balance_tol = tol if balance_tol is None else balance_tol
    marks = StepFunction1D((-c, c), (-1, 0, 1))
    edges, (vf, vg, vm) = refine(f, g, marks)
    widths = np.array(
        [hermite_partial_integral(0, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
    )
    inside = vm == 0
    best = None
    for s in (1, -1):
        bad = np.where(inside, vf != -vg, (vf != s * vm).astype(int) + (vg != s * vm))
        mismatch = float(np.dot(widths, bad))
        if best is None or mismatch < best[1]:
            best = (s, mismatch)
    orientation, mismatch = best
    defect = 2.0 * math.sqrt(max(mismatch, 0.0))
    h = StepFunction1D.from_cells(list(edges), list(np.where(inside, vf, 0)))
    h_moment1 = abs(moment(h, 1))
    return StripDiagnostics(
        item_i=defect <= tol,
        orientation=orientation,
        defect=defect,
        h_moment1=h_moment1,
        item_ii=h_moment1 <= balance_tol,
    )


def strip_restriction(f: SignFunction1D, c: Optional[float] = None) -> StepFunction1D:
    """h = f 1_{|x| <= C}."""
    c = solve_constants().c_star if c is None else c
    edges, (vf, vm) = refine(f, StepFunction1D((-c, c), (-1, 0, 1)))
    return StepFunction1D.from_cells(list(edges), list(np.where(vm == 0, vf, 0)))


def pi3_gap(f: SignFunction1D, g: SignFunction1D, tol: float = 1e-7) -> float:
    """E[(Pi_3 f)(Pi_3 g)] for a strip pair; equals ||Pi_3 u||^2 - ||Pi_3 h||^2."""
    diagnostics = is_strip_pair(f, g, tol)
    if not diagnostics.item_i:
        raise NotAStripPairError(
            f"not a strip pair (L2 defect {diagnostics.defect:.3e} > {tol:.1e})"
        )
    return pi_k_inner(f, g, 3)


def random_balanced_pattern(
    rng: np.random.Generator, max_breakpoints: int = 8, c: Optional[float] = None
) -> StepFunction1D:
    """
    Random strip pattern with vanishing degree-1 moment.

    Samples up to max_breakpoints - 1 free breakpoints in the strip, then solves
    the last one on the outermost cell; unsolvable draws are resampled.
    """
    c = solve_constants().c_star if c is None else c
    while True:
        r = int(rng.integers(0, max_breakpoints))
        free = np.sort(rng.uniform(-c, c, size=r))
        first = int(rng.choice([-1, 1]))
        left = float(free[-1]) if r else -c

        def pattern(b: float) -> StepFunction1D:
            bps = [-c, *free, b, c]
            vals = [0] + [first * (-1) ** i for i in range(len(bps) - 1)] + [0]
            return StepFunction1D.from_cells([-INF, *bps, INF], vals)

        try:
            b = solve_balanced_breakpoint(pattern, left + 1e-12, c - 1e-12)
        except NoRootInCellError:
            continue
        return pattern(b)


def random_sign_function(rng: np.random.Generator, max_breakpoints: int = 6) -> SignFunction1D:
    """1..max_breakpoints standard normal breakpoints and a random leading sign."""
    count = int(rng.integers(1, max_breakpoints + 1))
    return SignFunction1D.canonical(rng.normal(size=count), int(rng.choice([-1, 1])))


def strip_split_residual(f: SignFunction1D, g: SignFunction1D, h: StepFunction1D, k: int) -> float:
    """<Pi_k f, Pi_k g> - (||Pi_k u||^2 - ||Pi_k h||^2) for the strip pair built from h."""
    u = u_function()
    return pi_k_inner(f, g, k) - (moment(u, k) ** 2 - moment(h, k) ** 2) / math.factorial(k)

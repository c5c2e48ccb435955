"""
Command-line front door of the laboratory.

Every subcommand delegates to one module operation and prints a table (or JSON
with --json) to stdout; files are written only through --out. Exit codes: 0 on
success, 1 when a verification fails, 2 on usage or computation errors.
"""

import argparse
import math
import sys
import time
from typing import List, Optional, Sequence

import numpy as np

from config.logging import get_component_logger, log_run, setup_logging
from config.settings import get_settings, reload_settings
from src.cli.reports import (
    VerificationReport,
    all_passed,
    render_json,
    render_mapping,
    render_table,
)
from src.discretized.matrix_game import KRIVINE_BOUND, bca_sdp, brute_val, build, export_matrix
from src.discretized.witness import witness_mc
from src.exceptions import GlabError
from src.games.davie_reeds import (
    f_objective,
    f_prime,
    f_second,
    h_gap,
    landscape,
    landscape_csv,
    sign_changes,
    solve_constants,
)
from src.games.game_eval import (
    best_epsilon,
    bound_chain,
    convexity_margin,
    dr_game,
    gap_ratio_lower,
    little_grothendieck_ratio,
    perturbed_game,
    perturbed_upper_bound,
    value_stability_gap,
)
from src.games.strip_games import (
    SignFunction1D,
    build_strip_pair,
    constant_strip,
    fig1_middle_breakpoint,
    fig1_right_breakpoint,
    pi3_gap,
    projection_norm_sq,
    random_balanced_pattern,
    random_sign_function,
    square_wave,
    strip_split_residual,
    u_function,
)
from src.numerics.serialization import dumps
from src.numerics.special_functions import Phi, phi
from src.search.optimizer import SearchConfig, optimize
from src.search.stability import (
    bathtub_check,
    calculus_stability_scan,
    lemma_constants,
    random_interval_union,
    stability_audit,
)

logger = get_component_logger("cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

STRIP_BOUND_SQ = 0.040745
GAP_FLOOR = 0.046
CALCULUS_ETAS = (1e-5, 1e-4, 1e-3, 9e-3)


def _row(name, computed, target, tolerance, comparison, anchor) -> VerificationReport:
    return VerificationReport(
        name=name,
        computed=float(computed),
        target=float(target),
        tolerance=float(tolerance),
        comparison=comparison,
        anchor=anchor,
    )


def cmd_constants() -> List[VerificationReport]:
    """Davie-Reeds constants, internal identities, degree-3 quantities and strip breakpoints."""
    k = solve_constants()
    p = phi(k.c_star)
    strip = 2.0 * Phi(k.c_star) - 1.0
    grid = np.arange(0.0, 4.0 + 5e-3, 1e-2)
    concave = np.linspace(0.0, 0.5, 5001)
    little = little_grothendieck_ratio()
    return [
        _row("c_star", k.c_star, 0.25573, 5e-5, "two-sided", "root of H(C) on (0, 1)"),
        _row("lambda_star", k.lambda_star, 0.19748, 5e-5, "two-sided", "lambda* = 2 C* phi(C*)"),
        _row("c_plus", k.c_plus, 2.0582, 1e-3, "two-sided", "second critical point of F"),
        _row("val_dr", k.val_dr, 0.4786, 1e-4, "two-sided", "val(A_DR) = F(C*)"),
        _row("k_dr", k.k_dr, 1.6769, 1e-4, "two-sided", "K_DR = (1 - lambda*)/val(A_DR)"),
        _row("lambda_identity", abs(k.lambda_star - 2 * k.c_star * p), 0.0, 1e-9, "two-sided",
             "lambda* = 2 C* phi(C*)"),
        _row("h_at_c_star", h_gap(k.c_star), 0.0, 1e-9, "two-sided", "H(C*) = 0"),
        _row("val_dr_identity", k.val_dr - 4 * p * p * (1 - k.lambda_star), 0.0, 1e-9,
             "two-sided", "val(A_DR) = 4 phi(C*)^2 (1 - lambda*)"),
        _row("k_dr_identity", k.k_dr - 1 / (4 * p * p), 0.0, 1e-9, "two-sided",
             "K_DR = 1/(4 phi(C*)^2)"),
        _row("pi3_u_norm_sq", projection_norm_sq(u_function(), 3), 0.0868, 2e-4, "two-sided",
             "||Pi_3 u||^2 = (2 (C*^2 - 1) phi(C*))^2 / 6"),
        _row("strip_measure", strip, 0.20184, 5e-5, "two-sided", "2 Phi(C*) - 1"),
        _row("strip_bound", strip**2, STRIP_BOUND_SQ, 0.0, "at-most",
             "||Pi_3 h||^2 <= (2 Phi(C*) - 1)^2"),
        _row("fig1_middle_breakpoint", fig1_middle_breakpoint(), 0.18009, 2e-4, "two-sided",
             "phi(b) = (phi(0) + phi(C*))/2"),
        _row("fig1_right_breakpoint", fig1_right_breakpoint(0.12708), 0.22101, 2e-4,
             "two-sided", "outer breakpoint with inner 0.12708"),
        _row("F_at_0", f_objective(0.0, k.lambda_star), 0.4391, 1e-4, "two-sided", "F(0)"),
        _row("F_at_half", f_objective(0.5, k.lambda_star), 0.4496, 1e-4, "two-sided", "F(1/2)"),
        _row("F_prime_sign_changes", sign_changes(f_prime(grid, k.lambda_star)), 2, 0,
             "two-sided", "F' vanishes at C* and C_+ on [0, 4]"),
        _row("F_second_max", float(np.max(f_second(concave, k.lambda_star))), -0.49, 0.0,
             "at-most", "F'' <= -(2/pi) e^{-1/4} on [0, 1/2]"),
        _row("little_grothendieck", little["ratio"], math.pi / 2, 1e-12, "two-sided",
             "sdp/val of Pi_1 = pi/2"),
        _row("improvement_4e-11", bound_chain(4e-11).improvement, 1e-12, 0.0, "at-least",
             "K_G >= K_DR + 1e-12"),
    ]


def _strip_pair_sweep(rng: np.random.Generator, pairs: int):
    gaps, h_norms, split_errors = [], [], []
    for _ in range(pairs):
        h = random_balanced_pattern(rng)
        f, g = build_strip_pair(h)
        gaps.append(pi3_gap(f, g))
        h_norms.append(projection_norm_sq(h, 3))
        split_errors.append(max(abs(strip_split_residual(f, g, h, k)) for k in range(11)))
    return min(gaps), max(h_norms), max(split_errors)


def _near_optimizers() -> List[tuple]:
    """Strip optimizers and copies with one breakpoint of f moved."""
    pairs = []
    for h in (constant_strip(1), square_wave([fig1_middle_breakpoint()])):
        f, g = build_strip_pair(h)
        pairs.append((f, g))
        for delta in (1e-3, 1e-2, 5e-2):
            bps = list(f.breakpoints)
            bps[0] += delta
            pairs.append((SignFunction1D(tuple(bps), f.leading_sign), g))
    return pairs


def cmd_verify_lemmas(
    seed: int, pairs: int = 1000, unions: int = 500, triples: int = 200, restarts: int = 8
) -> List[VerificationReport]:
    """Property sweeps behind the improved bound, reported as worst-case margins."""
    streams = np.random.SeedSequence(seed).spawn(3)
    rng_pairs, rng_sets, rng_triples = (np.random.default_rng(s) for s in streams)

    gap_min, h_max, split_err = _strip_pair_sweep(rng_pairs, pairs)

    bathtub = [bathtub_check(random_interval_union(rng_sets)) for _ in range(unions)]
    bathtub_excess = max(b.sym_diff - b.bound for b in bathtub)
    bathtub_ratio = max(b.ratio for b in bathtub)

    game = dr_game()
    stability_excess = -math.inf
    for _ in range(triples):
        f, f_tilde, g = (random_sign_function(rng_triples) for _ in range(3))
        lhs, rhs = value_stability_gap(game, f, f_tilde, g)
        stability_excess = max(stability_excess, lhs - rhs)

    calculus = calculus_stability_scan(CALCULUS_ETAS)
    calculus_excess = max(r.max_distance - r.bound for r in calculus)

    audits = [stability_audit(f, g) for f, g in _near_optimizers()]
    robust_excess = max(max(a.dist_f, a.dist_g) - a.bound for a in audits)

    search = optimize(game, SearchConfig.from_settings(restarts=restarts, seed=seed))
    search_audits = [stability_audit(f, g) for f, g in search.restart_pairs]
    search_excess = max(max(a.dist_f, a.dist_g) - a.bound for a in search_audits)

    x = np.linspace(0.0, solve_constants().val_dr / 2.0, 1001)
    convexity_min = float(np.min(convexity_margin(x)))

    rows = [
        _row("pi3_gap_min", gap_min, GAP_FLOOR, 0.0, "at-least",
             "E (Pi_3 f)(Pi_3 g) >= 0.046 on strip pairs"),
        _row("pi3_h_max", h_max, STRIP_BOUND_SQ, 0.0, "at-most",
             "||Pi_3 h||^2 <= (2 Phi(C*) - 1)^2 for balanced h"),
        _row("strip_split_error", split_err, 0.0, 1e-10, "two-sided",
             "<Pi_k f, Pi_k g> = ||Pi_k u||^2 - ||Pi_k h||^2"),
        _row("bathtub_excess", bathtub_excess, 0.0, 1e-12, "at-most",
             "gamma(S sym-diff S_C) <= 4 sqrt(eps)"),
        _row("bathtub_worst_ratio", bathtub_ratio, 4.0, 0.0, "at-most",
             "gamma(S sym-diff S_C) / sqrt(eps) <= 4"),
        _row("value_stability_excess", stability_excess, 0.0, 1e-12, "at-most",
             "|val(f,g) - val(f~,g)| <= ||A|| ||f - f~||"),
        _row("calculus_stability_excess", calculus_excess, 0.0, 1e-12, "at-most",
             "F(C) >= F(C*) - eta implies |C - C*| <= 3 sqrt(eta)"),
        _row("robustness_excess", robust_excess, 0.0, 1e-12, "at-most",
             "distance to strip pair <= 6 eta^{1/4}"),
        _row("search_robustness_excess", search_excess, 0.0, 1e-12, "at-most",
             "search outputs: distance to strip pair <= 6 eta^{1/4}"),
        _row("convexity_margin_min", convexity_min, 0.0, 1e-15, "at-least",
             "convexity of (1 - lambda*)/(val_dr - x)"),
    ]
    for name, (value, ceiling) in lemma_constants().items():
        anchor = f"{name.replace('_', ' ')} <= {ceiling:g}"
        rows.append(_row(name, value, ceiling, 0.0, "at-most", anchor))
    return rows


def cmd_landscape(
    c_min: float, c_max: float, steps: int, out: Optional[str], as_json: bool = False
) -> str:
    table = landscape(c_min, c_max, steps)
    if not as_json:
        return landscape_csv(table, out)
    text = dumps(table.to_dict(orient="records"))
    if out:
        with open(out, "w") as handle:
            handle.write(text)
    return text


def cmd_optimize(args) -> tuple:
    game = perturbed_game(args.eps)
    cfg = SearchConfig.from_settings(
        restarts=args.restarts,
        seed=args.seed,
        max_breakpoints_per_function=args.breakpoints,
        workers=args.workers,
    )
    result = optimize(game, cfg)
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(result.to_json())
    if args.trace:
        result.trace_csv(args.trace)
    rows = [
        _row("best_val_ceiling", result.best_val, perturbed_upper_bound(args.eps), 1e-9,
             "at-most", "val(A_eps) <= val_dr - eps gap(eps)"),
    ]
    if args.eps == 0:
        rows.append(_row("best_val", result.best_val, 0.4780, 0.0, "at-least",
                         "search reaches the strip optimum"))
    return result, rows


def cmd_discretize(args) -> tuple:
    dg = build(dr_game(), args.m, args.cap)
    val, f, _ = brute_val(dg)
    sdp = bca_sdp(dg, args.rank, args.iters, args.seed, warm_start=f)
    if args.out:
        export_matrix(dg, args.out)
    rows = [
        _row("sandwich_lower", sdp, val, 1e-9, "at-least", "brute_val <= bca_sdp"),
        _row("sandwich_upper", sdp, KRIVINE_BOUND * val, 1e-6, "at-most",
             "bca_sdp <= Krivine bound x brute_val"),
    ]
    payload = dict(dg.to_dict(), brute_val=val, bca_sdp=sdp, argmax_f=f.tolist())
    return payload, rows


def cmd_witness(args) -> dict:
    estimate = witness_mc(args.n, args.k, perturbed_game(args.eps), args.samples, args.seed)
    return estimate.to_dict()


def cmd_bound_chain(eps: float, scan: bool) -> dict:
    report = bound_chain(eps).to_dict()
    if scan:
        report["best"] = best_epsilon()
        report["gap_ratio_lower"] = gap_ratio_lower(eps)
    return report


def _seed_default() -> int:
    return get_settings().seed


def _count(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glab", description="Numerical laboratory for the Davie-Reeds bound on K_G"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="verify the Davie-Reeds constants")
    p.add_argument("--json", action="store_true")

    search = get_settings().search
    p = sub.add_parser("verify-lemmas", help="run the property sweeps")
    p.add_argument("--seed", type=_seed, default=_seed_default())
    p.add_argument("--pairs", type=_count, default=1000)
    p.add_argument("--unions", type=_count, default=500)
    p.add_argument("--triples", type=_count, default=200)
    p.add_argument("--restarts", type=_count, default=8, help="searches whose outputs are audited")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("landscape", help="C, F(C), F'(C) as CSV (or JSON)")
    p.add_argument("--min", dest="c_min", type=float, default=0.0)
    p.add_argument("--max", dest="c_max", type=float, default=4.0)
    p.add_argument("--steps", type=int, default=401)
    p.add_argument("--out")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("optimize", help="multi-start breakpoint search")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--restarts", type=_count, default=search.restarts)
    p.add_argument("--breakpoints", type=_count, default=search.max_breakpoints)
    p.add_argument("--workers", type=_count, default=search.workers)
    p.add_argument("--seed", type=_seed, default=_seed_default())
    p.add_argument("--out", help="result JSON")
    p.add_argument("--trace", help="trace CSV (restart,iteration,val)")
    p.add_argument("--json", action="store_true")

    discrete = get_settings().discretization
    p = sub.add_parser("discretize", help="Gauss-Hermite game matrix, brute force and BCA")
    p.add_argument("--m", type=_count, default=discrete.m)
    p.add_argument("--cap", type=_non_negative, default=discrete.degree_cap)
    p.add_argument("--rank", type=_count, default=discrete.rank)
    p.add_argument("--iters", type=_count, default=discrete.iters)
    p.add_argument("--seed", type=_seed, default=_seed_default())
    p.add_argument("--out", help="matrix text file")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("witness", help="Monte Carlo of the degree-k witness")
    p.add_argument("--n", type=_count, default=400)
    p.add_argument("--k", type=int, default=3, choices=(1, 3))
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--samples", type=_count, default=get_settings().monte_carlo.samples)
    p.add_argument("--seed", type=_seed, default=_seed_default())
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("bound-chain", help="arithmetic of the improved lower bound")
    p.add_argument("--eps", type=float, default=4e-11)
    p.add_argument("--scan", action="store_true", help="also report the best eps on a grid")
    p.add_argument("--json", action="store_true")
    return parser


def _emit(rows: List[VerificationReport], as_json: bool, title: str) -> int:
    sys.stdout.write(render_json(rows) if as_json else render_table(rows, title))
    return EXIT_OK if all_passed(rows) else EXIT_FAILED


def _emit_mapping(data: dict, as_json: bool, title: str) -> int:
    sys.stdout.write(dumps(data) if as_json else render_mapping(data, title))
    return EXIT_OK


def _run(args) -> int:
    if args.command == "constants":
        return _emit(cmd_constants(), args.json, "Davie-Reeds constants")
    if args.command == "verify-lemmas":
        rows = cmd_verify_lemmas(args.seed, args.pairs, args.unions, args.triples, args.restarts)
        return _emit(rows, args.json, "Lemma sweeps")
    if args.command == "landscape":
        text = cmd_landscape(args.c_min, args.c_max, args.steps, args.out, args.json)
        if not args.out:
            sys.stdout.write(text)
        return EXIT_OK
    if args.command == "optimize":
        result, rows = cmd_optimize(args)
        if args.json:
            sys.stdout.write(result.to_json())
            return EXIT_OK if all_passed(rows) else EXIT_FAILED
        sys.stdout.write(f"best f: {result.best_f.to_json()}\nbest g: {result.best_g.to_json()}\n")
        return _emit(rows, False, f"Search at eps={args.eps:g}")
    if args.command == "discretize":
        payload, rows = cmd_discretize(args)
        if args.json:
            sys.stdout.write(dumps(payload))
            return EXIT_OK if all_passed(rows) else EXIT_FAILED
        return _emit(rows, False, f"Discretized game m={args.m} cap={args.cap}")
    if args.command == "witness":
        return _emit_mapping(cmd_witness(args), args.json, f"Witness n={args.n} k={args.k}")
    if args.command == "bound-chain":
        report = cmd_bound_chain(args.eps, args.scan)
        return _emit_mapping(report, args.json, f"Bound chain at eps={args.eps:g}")
    raise AssertionError(f"unhandled command {args.command}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    reload_settings()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    setup_logging()
    started = time.perf_counter()
    try:
        code = _run(args)
    except GlabError as exc:
        logger.error(f"{args.command} failed: {exc}")
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    log_run("cli", args.command, {"exit_code": code}, time.perf_counter() - started)
    return code

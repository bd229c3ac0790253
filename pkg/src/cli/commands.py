import argparse
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import pandas as pd

from src.cli.output import save_table
from src.config.parser import configure_logging, init_config
from src.config.run_config import RunConfig
from src.errors import BlowupError, BracketError, ConfigError, KellerOssermanError, NumericalError
from src.expansion.power_law import power_law_expansion
from src.expansion.three_term import invert_three_term, three_term_table
from src.nonlinearity.conditions import keller_osserman
from src.nonlinearity.profile import leading_profile
from src.phase_plane.shooting import solve_large_solution
from src.picard.fixed_point import fixed_point, invert_uk
from src.universality.criterion import classify
from src.universality.gaps import default_oracle

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 2
EXIT_INCONCLUSIVE = 3
EXIT_CONFIG = 64
EXIT_NUMERIC = 70


def cmd_ko(cfg):
    """Keller-Osserman verdict: exit 0 holds, 2 fails, 3 inconclusive."""
    nl = cfg.build_nonlinearity()
    report = keller_osserman(nl)
    print(f"{nl.label}: verdict={report.verdict.value} tail_integral={report.tail_integral:.17g} "
          f"decay={report.decay:.6g} ({report.detail})")
    frame = pd.DataFrame([{
        "verdict": report.verdict.value, "tail_integral": report.tail_integral, "lower": report.lower,
        "decay": report.decay, "detail": report.detail,
    }])
    return report.verdict.exit_code, {"ko": frame}


def cmd_solve(cfg):
    """Radial large solution on the unit ball, sampled at the configured radii."""
    nl = cfg.build_nonlinearity()
    sol = solve_large_solution(nl, cfg.N, **cfg.phase_plane)
    rows = []
    for r, d in zip(cfg.r_sequence, cfg.distances):
        u = sol.u_at_distance(d)
        rows.append({"r": r, "d": d, "u": u, "u0": leading_profile(nl, d), "v": sol.v_at(r)})
    print(f"{nl.label}, N={cfg.N}: u(0)={sol.center_value:.17g}, overlap error {sol.overlap_error:.3g}")
    return EXIT_OK, {"solve": pd.DataFrame(rows), "profile": sol.to_frame()}


def _or_nan(compute):
    try:
        return compute()
    except (BracketError, ValueError) as e:
        logger.warning(f"table entry skipped: {e}")
        return math.nan


def cmd_picard(cfg):
    """Picard iterates v_k and the profiles u_k at the configured radii."""
    nl = cfg.build_nonlinearity()
    result = fixed_point(nl, cfg.N, cfg.picard)
    print(f"{nl.label}, N={cfg.N}: converged_at_iteration={result.converged_at} "
          f"U0={result.U0:.17g} residual={result.residual:.3g}")
    rows = []
    for r, d in zip(cfg.r_sequence, cfg.distances):
        row = {"r": r, "d": d}
        for k in range(cfg.k + 1):
            row[f"u_{k}"] = _or_nan(lambda: invert_uk(result.iterate(k), r))
        rows.append(row)
    return EXIT_OK, {"picard": pd.DataFrame(rows), "iterates": result.to_frame()}


def cmd_expand(cfg):
    """Coefficients a_k of u = d^(-2/(p-1)) sum a_k d^k for f = u^p."""
    if cfg.family != "power":
        raise ConfigError("the expand command needs the power family.")
    expansion = power_law_expansion(cfg.p, cfg.N, cfg.order)
    frame = expansion.to_frame()
    for row in frame.itertuples():
        print(f"k={row.k} exponent={row.exponent:.6g} a_k={row.a_k:.17g}")
    return EXIT_OK, {"expand": frame}


def cmd_universal(cfg):
    """Universality verdict from phi(u) = sqrt(2F(u)) int_u^inf G/(2F)^(3/2)."""
    nl = cfg.build_nonlinearity()
    report = classify(nl, max_doublings=cfg.max_doublings, ceiling=cfg.ceiling)
    print(f"{nl.label}: verdict={report.verdict.value} ({report.detail})")
    return report.verdict.exit_code, {"universal": report.samples}


def cmd_compare(cfg):
    """Reference solution, Picard profiles, three-term inversion and power expansion at the same radii."""
    nl = cfg.build_nonlinearity()
    distances = cfg.distances
    if cfg.N == 1:
        oracle = default_oracle(nl, 1, distances)
    else:
        oracle = solve_large_solution(nl, cfg.N, **cfg.phase_plane).u_at_distance
    result = fixed_point(nl, cfg.N, cfg.picard)
    table = three_term_table(nl, cfg.N, cfg.U_grid)
    expansion = power_law_expansion(cfg.p, cfg.N, cfg.order) if cfg.family == "power" else None
    rows = []
    for r, d in zip(cfg.r_sequence, distances):
        row = {"r": r, "d": d, "oracle": float(oracle(d))}
        for k in range(cfg.k + 1):
            row[f"u_{k}"] = _or_nan(lambda: invert_uk(result.iterate(k), r))
        row["three_term"] = _or_nan(lambda: invert_three_term(table, r))
        row["expansion"] = expansion.evaluate(d) if expansion is not None else math.nan
        rows.append(row)
    return EXIT_OK, {"compare": pd.DataFrame(rows)}


COMMANDS = {
    "ko": (cmd_ko, "Keller-Osserman condition: int^inf dt / sqrt(F(t)) < inf."),
    "solve": (cmd_solve, "Radial large solution of u'' + (N-1)/r u' = f(u), u -> inf as r -> 1."),
    "picard": (cmd_picard, "Fixed point of v^2 = 2F - 2(N-1) int^u v / r, with 1 - r = int_u^inf dt / v."),
    "expand": (cmd_expand, "Expansion u = d^(-2/(p-1)) sum_{k <= 2/(p-1)} a_k d^k + o(1) for f = u^p."),
    "universal": (cmd_universal, "Universality iff sqrt(2F(u)) int_u^inf G / (2F)^(3/2) -> 0, G = int_0^u sqrt(2F)."),
    "compare": (cmd_compare, "1 - r = R0(u2) + R1(u2) + R2(u2)(1 + o(1)) against the other profiles."),
}


def build_parser():
    """
    Argument parser with one sub-command per computation.

    Returns:
        argparse.ArgumentParser: The parser.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file.")
    common.add_argument("--out", help="Output directory (run.output).")
    common.add_argument("--jobs", type=int, default=1, help="Number of jobs run concurrently.")
    common.add_argument("--family", choices=("power", "exponential", "custom"))
    common.add_argument("--p", type=float, help="Exponent of f = u^p.")
    common.add_argument("--expr", help="Expression of f in u, e.g. 'u^3 + exp(u)'.")
    common.add_argument("--a", type=float, help="Positivity threshold of a custom f.")
    common.add_argument("--N", type=int, help="Dimension.")
    common.add_argument("--rho", type=float, help="Radius of the Picard ball.")
    common.add_argument("--order", type=int, help="Highest expansion coefficient index.")
    common.add_argument("--r", type=float, nargs="+", dest="r_sequence", help="Radii in (0, 1).")

    parser = argparse.ArgumentParser(prog="blowup-rates", description="Boundary blow-up rates of large solutions.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, equation) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=equation, description=equation)
    return parser


def flag_overrides(args):
    """Configuration overrides from command-line flags."""
    overrides = {"nonlinearity": {}, "run": {}, "picard": {}, "expansion": {}}
    for key in ("family", "p", "expr", "a"):
        if getattr(args, key) is not None:
            overrides["nonlinearity"][key] = getattr(args, key)
    if args.N is not None:
        overrides["run"]["N"] = args.N
    if args.r_sequence is not None:
        overrides["run"]["r_sequence"] = args.r_sequence
    if args.out is not None:
        overrides["run"]["output"] = args.out
    if args.rho is not None:
        overrides["picard"]["rho"] = args.rho
    if args.order is not None:
        overrides["expansion"]["order"] = args.order
    return {section: values for section, values in overrides.items() if values}


def exit_code_for(error):
    """Maps a library exception to the exit code of the command line."""
    if isinstance(error, KellerOssermanError):
        return EXIT_NEGATIVE
    if isinstance(error, NumericalError):
        return EXIT_NUMERIC
    if isinstance(error, (BlowupError, ValueError, KeyError, TypeError)):
        return EXIT_CONFIG
    return EXIT_NUMERIC


def run_job(command, config, job, name):
    """
    Runs one job and writes its tables.

    Args:
        command (str): Sub-command name.
        config (dict): Merged configuration.
        job (dict): Per-job overrides.
        name (str): Prefix of the output files.

    Returns:
        int: Exit code of the job.
    """
    handler, _ = COMMANDS[command]
    try:
        cfg = RunConfig.from_dict(config, job)
        code, tables = handler(cfg)
    except Exception as e:
        code = exit_code_for(e)
        print(f"{name}: error: {e}", file=sys.stderr)
        logger.debug(f"{name} failed", exc_info=True)
        return code
    for suffix, frame in tables.items():
        save_table(frame, cfg.output, f"{name}_{suffix}", cfg.raw)
    return code


def run_cli(argv=None):
    """
    Command-line entry point.

    Returns:
        int: The largest exit code over all jobs (0 ok, 2 negative verdict,
        3 inconclusive, 64 configuration error, 70 numerical failure).
    """
    args = build_parser().parse_args(argv)
    try:
        config = init_config(args.config, flag_overrides(args), reload=True)
        configure_logging(config)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.jobs < 1:
        print(f"error: --jobs must be positive, got {args.jobs}", file=sys.stderr)
        return EXIT_CONFIG
    merged = config.as_dict()
    jobs = [dict(job) if isinstance(job, dict) else job for job in (merged.get("jobs") or [{}])]
    names = [job.pop("name", f"job{i}") if isinstance(job, dict) else f"job{i}" for i, job in enumerate(jobs)]
    names = [f"{args.command}_{name}" for name in names]
    if any(not isinstance(job, dict) for job in jobs):
        print("error: every entry of 'jobs' must be an object", file=sys.stderr)
        return EXIT_CONFIG
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        codes = list(pool.map(lambda item: run_job(args.command, merged, item[0], item[1]), zip(jobs, names)))
    return max(codes)

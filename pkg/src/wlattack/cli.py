"""Command-line front end: sweep, solve, simulate, coupler.

Every subcommand is deterministic under a fixed configuration and seed, and
all numeric output is rendered with 17 significant digits so files and
reports are reproducible byte for byte.  Exit codes: 0 on success, 2 for
I/O or configuration problems, 3 for domain infeasibility (no solution, no
wavelength, infeasible round).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import __version__
from .analysis import excess_noise_detected, estimate_parameters, sweep_v_be
from .config import OutputConfig, RunConfig, SimulationConfig, dump_toml, load_config
from .coupler import invert_transmittance, transmittance
from .errors import (
    BranchError,
    ConfigError,
    ContractViolationError,
    DomainError,
    InfeasibleError,
    InsufficientDataError,
    NoSolutionError,
    SessionInfeasibleError,
    UnrealizableError,
)
from .session import run_session
from .solver import attack_residuals, solve_general

_INFEASIBLE = (
    DomainError,
    NoSolutionError,
    InfeasibleError,
    UnrealizableError,
    SessionInfeasibleError,
    BranchError,
    ContractViolationError,
)


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wlattack",
        description="Wavelength-attack simulator and analysis toolkit for heterodyne CVQKD",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML run configuration")
    common.add_argument("--seed", type=int, metavar="U64", help="override simulation.seed")
    common.add_argument("--out", metavar="PATH", help="override output.path")
    common.add_argument(
        "--echo-config",
        action="store_true",
        help="print the effective configuration as TOML and exit",
    )

    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser(
        "sweep", parents=[common], help="tabulate V_B|E and its two terms over a T2 grid"
    )
    p_sweep.add_argument("--t2-min", type=float, default=0.0)
    p_sweep.add_argument("--t2-max", type=float, default=1.0)
    p_sweep.add_argument("--steps", type=int, default=1001)
    p_sweep.set_defaults(handler=cmd_sweep)

    p_solve = sub.add_parser(
        "solve", parents=[common], help="solve the attacking equations for one outcome"
    )
    p_solve.add_argument("x_e", type=float, help="Eve's x quadrature outcome, sqrt(N0) units")
    p_solve.add_argument("p_e", type=float, help="Eve's p quadrature outcome, sqrt(N0) units")
    p_solve.set_defaults(handler=cmd_solve)

    p_sim = sub.add_parser(
        "simulate", parents=[common], help="run a seeded attacked session and estimate parameters"
    )
    p_sim.add_argument("--rounds", type=int, metavar="N", help="override simulation.n_rounds")
    p_sim.add_argument(
        "--format", choices=("csv", "json-lines"), help="override output.format"
    )
    p_sim.set_defaults(handler=cmd_simulate)

    p_coup = sub.add_parser(
        "coupler", parents=[common], help="evaluate or invert the coupler transmittance"
    )
    direction = p_coup.add_mutually_exclusive_group(required=True)
    direction.add_argument(
        "--wavelength", type=float, metavar="UM", help="evaluate T at this wavelength"
    )
    direction.add_argument(
        "--transmittance", type=float, metavar="T", help="list band wavelengths reaching T"
    )
    p_coup.set_defaults(handler=cmd_coupler)

    return parser


def _effective_config(args) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    sim = config.simulation
    if args.seed is not None:
        sim = SimulationConfig(n_rounds=sim.n_rounds, seed=args.seed)
    if getattr(args, "rounds", None) is not None:
        sim = SimulationConfig(n_rounds=args.rounds, seed=sim.seed)
    out = config.output
    if args.out is not None:
        out = OutputConfig(path=args.out, format=out.format)
    if getattr(args, "format", None) is not None:
        out = OutputConfig(path=out.path, format=args.format)
    return dataclasses.replace(config, simulation=sim, output=out)


def cmd_sweep(config: RunConfig, args) -> int:
    rows = sweep_v_be(args.t2_min, args.t2_max, args.steps)
    path = config.output.path
    with open(path, "w", newline="\n") as fh:
        fh.write("t2,first_term,second_term,v_be\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    t2_star, _, _, v_star = max(rows, key=lambda row: row[3])
    print(f"wrote {len(rows)} rows to {path}")
    print(f"max v_be = {_fmt(v_star)} N0 at t2 = {_fmt(t2_star)}")
    return 0


def cmd_solve(config: RunConfig, args) -> int:
    params = config.protocol
    sol = solve_general(
        args.x_e,
        args.p_e,
        params.eta,
        params.lo_amplitude,
        forged_lo_intensity=config.attack.forged_lo_intensity,
    )
    r_x, r_p = attack_residuals(sol, args.x_e, args.p_e, params.eta, params.lo_amplitude)
    lams = {}
    for name, t in (("lambda1", sol.t1), ("lambda2", sol.t2)):
        try:
            found = invert_transmittance(config.coupler, t, config.band)
        except NoSolutionError:
            found = []
        lams[name] = (
            _fmt(min(found, key=lambda lam: abs(lam - 1.55)))
            if found
            else f"(not realizable in band [{_fmt(config.band.lambda_min)}, "
            f"{_fmt(config.band.lambda_max)}] um)"
        )
    print(f"T1 = {_fmt(sol.t1)}")
    print(f"T2 = {_fmt(sol.t2)}")
    print(f"signal_intensity = {_fmt(sol.signal_intensity)}")
    print(f"lo_intensity = {_fmt(sol.lo_intensity)}")
    print(f"lambda1 = {lams['lambda1']}")
    print(f"lambda2 = {lams['lambda2']}")
    print(f"residual_x = {_fmt(r_x)}")
    print(f"residual_p = {_fmt(r_p)}")
    return 0


def cmd_simulate(config: RunConfig, args) -> int:
    dataset = run_session(
        config.protocol,
        config.attack,
        config.simulation.n_rounds,
        config.simulation.seed,
        coupler_model=config.coupler,
        band=config.band,
    )
    path = config.output.path
    if config.output.format == "csv":
        dataset.write_csv(path)
    else:
        dataset.write_jsonl(path)
    print(f"wrote {dataset.n_rounds} rounds to {path} (t2 = {_fmt(dataset.t2)})")
    try:
        report = estimate_parameters(dataset)
    except InsufficientDataError as exc:
        print(f"estimation refused: {exc}")
        return 0
    print(f"t_hat = {_fmt(report.t_hat)} (se {_fmt(report.t_se)})")
    print(f"excess_hat = {_fmt(report.excess_hat)} N0 (se {_fmt(report.excess_se)})")
    detected = excess_noise_detected(report, config.protocol.epsilon)
    print(f"excess noise above epsilon = {_fmt(config.protocol.epsilon)}: {'yes' if detected else 'no'}")
    return 0


def cmd_coupler(config: RunConfig, args) -> int:
    if args.wavelength is not None:
        t = transmittance(config.coupler, args.wavelength)
        print(f"T({_fmt(args.wavelength)} um) = {_fmt(t)}")
        return 0
    lams = invert_transmittance(config.coupler, args.transmittance, config.band)
    if not lams:
        print(
            f"no wavelength in band [{_fmt(config.band.lambda_min)}, "
            f"{_fmt(config.band.lambda_max)}] um reaches T = {_fmt(args.transmittance)}"
        )
        return 0
    for lam in lams:
        print(f"lambda = {_fmt(lam)} um -> T = {_fmt(transmittance(config.coupler, lam))}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _effective_config(args)
        if args.echo_config:
            sys.stdout.write(dump_toml(config))
            return 0
        return args.handler(config, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except _INFEASIBLE as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

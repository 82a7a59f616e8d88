"""Command-line interface: gen-graph, debias, solve, and compare subcommands."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .debias import DebiasConfig, load_cached_constraint
from .experiments import ExperimentConfig, run_comparison, run_debias_experiment, solve
from .graph import Graph, gen_erdos_renyi
from .ising import CouplerSet
from .samplers import (
    MEASUREMENT_BETA_SCALE,
    MEASUREMENT_SWEEPS,
    SOLVE_BETA_SCALE,
    BiasedSampler,
    ExactGroundSampler,
    HardwareBiasModel,
    Sampler,
    SimulatedAnnealingSampler,
)


def default_penalty_weight(n: int) -> float:
    """Smallest integer penalty weight keeping A/B >= n/8 at B = 1."""
    return float(max(1, math.ceil(n / 8)))


def _add_sampler_args(parser: argparse.ArgumentParser, *, measurement: bool = False) -> None:
    sweeps, scale = (
        (MEASUREMENT_SWEEPS, MEASUREMENT_BETA_SCALE) if measurement
        else (1000, SOLVE_BETA_SCALE)
    )
    parser.add_argument(
        "--sampler", choices=["exact", "sa", "biased-sa"], default="sa",
        help="sampling backend (default: sa)",
    )
    parser.add_argument("--sweeps", type=int, default=sweeps,
                        help=f"annealing sweeps per read (default: {sweeps})")
    parser.add_argument("--beta-scale", type=float, nargs=2, default=list(scale),
                        metavar=("INITIAL", "FINAL"),
                        help="beta schedule endpoints as multiples of 1/max|coefficient| "
                             f"(default: {scale[0]:g} {scale[1]:g})")
    parser.add_argument("--bias-model", type=Path, default=None,
                        help="bias model JSON; required for --sampler biased-sa")


def _make_sampler(kind: str, sweeps: int, beta_scale, bias_model: Path | None) -> Sampler:
    if kind == "exact":
        return ExactGroundSampler()
    inner = SimulatedAnnealingSampler(sweeps=sweeps, beta_scale=tuple(beta_scale))
    if kind == "sa":
        return inner
    if bias_model is None:
        raise SystemExit("--sampler biased-sa requires --bias-model")
    return BiasedSampler(inner, HardwareBiasModel.load(bias_model))


def _build_sampler(args: argparse.Namespace) -> Sampler:
    return _make_sampler(args.sampler, args.sweeps, args.beta_scale, args.bias_model)


def _add_debias_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k", type=float, default=10.0, help="update scaling constant")
    parser.add_argument("--tau", type=float, default=0.05, help="noise cutoff")
    parser.add_argument("--sigma", type=float, default=0.2, help="stopping threshold")
    parser.add_argument("--max-iters", type=int, default=500, help="iteration cap")


def cmd_gen_graph(args: argparse.Namespace) -> int:
    g = gen_erdos_renyi(args.n, args.p, args.seed)
    g.save(args.out)
    print(f"wrote {args.out}: n={g.n}, edges={g.num_edges}")
    return 0


def cmd_debias(args: argparse.Namespace) -> int:
    A = args.A if args.A is not None else default_penalty_weight(args.n)
    config = ExperimentConfig(
        n=args.n,
        A=A,
        base_seed=args.seed,
        debias=DebiasConfig(
            k=args.k, tau=args.tau, sigma=args.sigma,
            reads_per_iteration=args.reads, max_iterations=args.max_iters,
            seed=args.seed,
        ),
        out_dir=args.out_dir,
    )
    sampler = _build_sampler(args)
    trajectory = run_debias_experiment(config, sampler, dump_bias_reports=args.dump_bias_reports)
    first = trajectory.iterations[0]
    last = trajectory.iterations[-1]
    print(
        f"{trajectory.termination} after {last.index} update iterations; "
        f"total |b|: {first.total_abs_quadratic:.4f} -> {last.total_abs_quadratic:.4f}"
    )
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    g = Graph.load(args.graph)
    A = args.A if args.A is not None else default_penalty_weight(g.n)
    corrected: CouplerSet | None = None
    if args.formulation == "corrected":
        if args.constraint is not None:
            corrected = CouplerSet.load(args.constraint)
        elif args.cache_dir is not None:
            corrected = load_cached_constraint(args.cache_dir, g.n)
        else:
            raise SystemExit(
                "formulation 'corrected' needs --constraint or --cache-dir"
            )
    sampler = _build_sampler(args)
    result = solve(g, args.formulation, sampler, args.reads, args.seed, A, args.B, corrected)
    payload = {
        "formulation": args.formulation,
        "cut": result.cut,
        "balanced": result.balanced,
        "assignment": None if result.assignment is None else list(result.assignment),
        "feasible_reads": result.feasible_reads,
        "total_reads": result.total_reads,
    }
    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.out is not None:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    A = args.A if args.A is not None else default_penalty_weight(args.n)
    config = ExperimentConfig(
        n=args.n,
        A=A,
        B=args.B,
        num_instances=args.instances,
        p_range=(args.p_min, args.p_max),
        base_seed=args.seed,
        eval_reads=args.reads,
        debias=DebiasConfig(
            k=args.k, tau=args.tau, sigma=args.sigma,
            reads_per_iteration=args.debias_reads, max_iterations=args.max_iters,
            seed=args.seed,
        ),
        per_instance_debias=args.per_instance,
        out_dir=args.out_dir,
    )
    corrected = CouplerSet.load(args.constraint) if args.constraint is not None else None
    sampler = _build_sampler(args)
    measurement = _make_sampler(
        args.sampler, args.debias_sweeps, args.debias_beta_scale, args.bias_model
    )
    _, summary = run_comparison(config, sampler, corrected, measurement)
    print(json.dumps(summary, sort_keys=True, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpdebias",
        description="Bias-corrected Ising models for balanced graph partitioning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen-graph", help="generate a seeded random graph")
    p_gen.add_argument("--n", type=int, required=True, help="vertex count")
    p_gen.add_argument("--p", type=float, required=True, help="edge probability")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", type=Path, required=True, help="output graph JSON")
    p_gen.set_defaults(func=cmd_gen_graph)

    p_deb = sub.add_parser("debias", help="run the constraint correction loop")
    p_deb.add_argument("--n", type=int, required=True, help="variable count")
    p_deb.add_argument("--A", type=float, default=None,
                       help="penalty weight (default: max(1, ceil(n/8)))")
    p_deb.add_argument("--reads", type=int, default=1000, help="reads per iteration")
    p_deb.add_argument("--seed", type=int, default=0)
    p_deb.add_argument("--out-dir", type=Path, required=True)
    p_deb.add_argument("--dump-bias-reports", action="store_true",
                       help="write one bias report JSON per iteration")
    _add_debias_args(p_deb)
    _add_sampler_args(p_deb, measurement=True)
    p_deb.set_defaults(func=cmd_debias)

    p_sol = sub.add_parser("solve", help="solve one instance from a graph file")
    p_sol.add_argument("--graph", type=Path, required=True, help="graph JSON")
    p_sol.add_argument("--formulation", choices=["original", "corrected"],
                       default="original")
    p_sol.add_argument("--A", type=float, default=None)
    p_sol.add_argument("--B", type=float, default=1.0)
    p_sol.add_argument("--reads", type=int, default=1000)
    p_sol.add_argument("--seed", type=int, default=0)
    p_sol.add_argument("--constraint", type=Path, default=None,
                       help="corrected constraint JSON (for --formulation corrected)")
    p_sol.add_argument("--cache-dir", type=Path, default=None,
                       help="directory holding cached corrected constraints")
    p_sol.add_argument("--out", type=Path, default=None, help="also write result JSON here")
    _add_sampler_args(p_sol)
    p_sol.set_defaults(func=cmd_solve)

    p_cmp = sub.add_parser("compare", help="original vs corrected over random instances")
    p_cmp.add_argument("--instances", type=int, default=100)
    p_cmp.add_argument("--n", type=int, required=True)
    p_cmp.add_argument("--p-min", type=float, default=0.05)
    p_cmp.add_argument("--p-max", type=float, default=0.95)
    p_cmp.add_argument("--A", type=float, default=None)
    p_cmp.add_argument("--B", type=float, default=1.0)
    p_cmp.add_argument("--reads", type=int, default=1000, help="evaluation reads per formulation")
    p_cmp.add_argument("--debias-reads", type=int, default=1000,
                       help="reads per correction iteration")
    p_cmp.add_argument("--seed", type=int, default=0)
    p_cmp.add_argument("--constraint", type=Path, default=None,
                       help="reuse an existing corrected constraint JSON")
    p_cmp.add_argument("--per-instance", action="store_true",
                       help="debias separately for every instance")
    p_cmp.add_argument("--out-dir", type=Path, required=True)
    p_cmp.add_argument("--debias-sweeps", type=int, default=MEASUREMENT_SWEEPS,
                       help="sweeps per read during the correction phase")
    p_cmp.add_argument("--debias-beta-scale", type=float, nargs=2,
                       default=list(MEASUREMENT_BETA_SCALE),
                       metavar=("INITIAL", "FINAL"),
                       help="beta schedule for the correction phase")
    _add_debias_args(p_cmp)
    _add_sampler_args(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

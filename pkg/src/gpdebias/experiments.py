"""Batch experiment drivers: correction runs with histogram/trajectory output,
and head-to-head comparison of the original versus corrected formulations.

Every instance and every sampler call derives its seed from the base seed,
an instance id, and a role tag, so whole experiments replay bit-for-bit
and are safe to parallelize by instance.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .debias import (
    DebiasConfig,
    DebiasTrajectory,
    constraint_cache_name,
    debias_constraint,
    write_coupler_snapshots_csv,
    write_trajectory_csv,
)
from .graph import Graph, cut_size, gen_erdos_renyi, is_balanced
from .ising import (
    CouplerSet,
    IsingModel,
    assemble_corrected_ising,
    build_gp_ising,
    constraint_couplers,
    normalize_couplers,
)
from .samplers import Sampler, SamplerConfig, measurement_variant
from .seeding import derive_seed

__all__ = [
    "ComparisonRecord",
    "ExperimentConfig",
    "SolveResult",
    "run_debias_experiment",
    "run_comparison",
    "solve",
    "best_feasible_cut",
]

# Role tags for per-instance seed derivation.
_TAG_GRAPH = 1
_TAG_P = 2
_TAG_EVAL_ORIGINAL = 3
_TAG_EVAL_CORRECTED = 4
_TAG_DEBIAS = 5

HISTOGRAM_BIN_WIDTH = 0.05


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings shared by the experiment drivers."""

    n: int
    A: float
    B: float = 1.0
    num_instances: int = 100
    p_range: tuple[float, float] = (0.05, 0.95)
    base_seed: int = 0
    eval_reads: int = 1000
    debias: DebiasConfig = DebiasConfig()
    per_instance_debias: bool = False
    out_dir: Path | None = None

    def __post_init__(self):
        if self.num_instances < 1:
            raise ValueError("num_instances must be >= 1")
        lo, hi = self.p_range
        if not (0.0 <= lo <= hi <= 1.0):
            raise ValueError(f"p range must be within [0, 1], got {self.p_range}")
        if self.eval_reads < 1:
            raise ValueError("eval_reads must be >= 1")
        if self.out_dir is not None:
            object.__setattr__(self, "out_dir", Path(self.out_dir))


@dataclass(frozen=True)
class ComparisonRecord:
    """Outcome of one instance: best feasible cut under each formulation.

    A positive difference means the corrected formulation found the better
    (smaller) cut. Instances where either formulation produced no feasible
    read are marked skipped and excluded from the difference statistics.
    """

    instance_id: int
    n: int
    p: float
    graph_seed: int
    original_best_cut: int | None
    corrected_best_cut: int | None
    difference: int | None
    original_feasible_reads: int
    corrected_feasible_reads: int
    status: str  # "ok" | "skipped"


@dataclass(frozen=True)
class SolveResult:
    """Best feasible read for a single instance, or evidence there was none."""

    assignment: tuple[int, ...] | None
    cut: int | None
    balanced: bool
    feasible_reads: int
    total_reads: int


def bias_histogram(values) -> tuple[np.ndarray, np.ndarray]:
    """Histogram of bias values with fixed 0.05-wide bins over [-0.5, 0.5]."""
    edges = np.round(np.arange(-0.5, 0.5 + HISTOGRAM_BIN_WIDTH / 2, HISTOGRAM_BIN_WIDTH), 10)
    counts, _ = np.histogram(np.asarray(list(values), dtype=float), bins=edges)
    return edges, counts


def write_histogram_csv(values, path: str | Path) -> None:
    edges, counts = bias_histogram(values)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_lo", "bin_hi", "count"])
        for k in range(len(counts)):
            writer.writerow([repr(float(edges[k])), repr(float(edges[k + 1])), int(counts[k])])


def run_debias_experiment(
    config: ExperimentConfig, sampler: Sampler, dump_bias_reports: bool = False
) -> DebiasTrajectory:
    """Run one correction loop and emit its trajectory and bias histograms.

    Writes, under config.out_dir: the per-iteration trajectory CSV, the
    per-coupler snapshot CSV, first/last-iteration histograms of quadratic
    and linear biases, and the normalized corrected constraint keyed by
    (n, sampler fingerprint, seed). Optionally one bias-report JSON per
    iteration.
    """
    if config.out_dir is None:
        raise ValueError("run_debias_experiment requires an output directory")
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    initial = constraint_couplers(config.n, config.A)
    corrected, trajectory = debias_constraint(initial, config.debias, sampler)
    write_trajectory_csv(trajectory, out / "trajectory.csv")
    write_coupler_snapshots_csv(trajectory, out / "coupler_trajectories.csv")
    first = trajectory.iterations[0].report
    last = trajectory.iterations[-1].report
    write_histogram_csv(first.quadratic.values(), out / "quadratic_bias_first.csv")
    write_histogram_csv(last.quadratic.values(), out / "quadratic_bias_last.csv")
    write_histogram_csv(first.linear.values(), out / "linear_bias_first.csv")
    write_histogram_csv(last.linear.values(), out / "linear_bias_last.csv")
    if dump_bias_reports:
        for it in trajectory.iterations:
            it.report.save(out / f"bias_report_iter_{it.index}.json")
    normalized = normalize_couplers(corrected)
    name = constraint_cache_name(config.n, sampler.fingerprint, config.debias.seed)
    normalized.save(out / name)
    return trajectory


def best_feasible_cut(
    g: Graph, model: IsingModel, sampler: Sampler, num_reads: int, seed: int
) -> tuple[int | None, int, tuple[int, ...] | None]:
    """Sample a model and return (best cut, feasible read count, best assignment).

    Only balance-satisfying reads count; cuts are always evaluated on the
    graph itself, never inferred from model energies. Returns (None, 0,
    None) when every read is infeasible.
    """
    samples = sampler.sample(model, SamplerConfig(num_reads=num_reads, seed=seed))
    best_cut = None
    best_assignment = None
    feasible = 0
    for record in samples.records:
        if not is_balanced(record.assignment):
            continue
        feasible += record.count
        cut = cut_size(g, record.assignment)
        if best_cut is None or cut < best_cut:
            best_cut = cut
            best_assignment = record.assignment
    return best_cut, feasible, best_assignment


def shared_corrected_constraint(
    config: ExperimentConfig, sampler: Sampler
) -> CouplerSet:
    """Debias the n-variable constraint once for reuse across instances."""
    initial = constraint_couplers(config.n, config.A)
    corrected, _ = debias_constraint(initial, config.debias, sampler)
    return normalize_couplers(corrected)


def run_comparison(
    config: ExperimentConfig,
    sampler: Sampler,
    corrected: CouplerSet | None = None,
    measurement_sampler: Sampler | None = None,
) -> tuple[list[ComparisonRecord], dict]:
    """Compare formulations over random instances with matched read budgets.

    For each instance a graph is generated, both the original and the
    corrected model are sampled with the same number of reads (seeds derived
    from base seed, instance id, and formulation tag), infeasible reads are
    discarded, and the best cuts are recorded. The corrected constraint is
    produced once and shared across instances unless per_instance_debias is
    set or one is supplied; the correction loop runs on
    ``measurement_sampler`` (default: the measurement variant of
    ``sampler``, same emulated hardware, shallow anneals). Writes records
    CSV and summary JSON when config.out_dir is set.
    """
    if measurement_sampler is None:
        measurement_sampler = measurement_variant(sampler)
    if corrected is None and not config.per_instance_debias:
        corrected = shared_corrected_constraint(config, measurement_sampler)
    records = []
    lo, hi = config.p_range
    for idx in range(config.num_instances):
        graph_seed = derive_seed(config.base_seed, idx, _TAG_GRAPH)
        p_rng = np.random.default_rng(derive_seed(config.base_seed, idx, _TAG_P))
        p = float(lo + (hi - lo) * p_rng.random())
        g = gen_erdos_renyi(config.n, p, graph_seed)
        if config.per_instance_debias:
            instance_cfg = DebiasConfig(
                k=config.debias.k,
                tau=config.debias.tau,
                sigma=config.debias.sigma,
                reads_per_iteration=config.debias.reads_per_iteration,
                max_iterations=config.debias.max_iterations,
                seed=derive_seed(config.base_seed, idx, _TAG_DEBIAS),
            )
            instance_corrected, _ = debias_constraint(
                constraint_couplers(config.n, config.A), instance_cfg, measurement_sampler
            )
            constraint = normalize_couplers(instance_corrected)
        else:
            constraint = corrected
        original_model = build_gp_ising(g, config.A, config.B)
        corrected_model = assemble_corrected_ising(constraint, g, config.A, config.B)
        orig_cut, orig_feasible, _ = best_feasible_cut(
            g, original_model, sampler, config.eval_reads,
            derive_seed(config.base_seed, idx, _TAG_EVAL_ORIGINAL),
        )
        corr_cut, corr_feasible, _ = best_feasible_cut(
            g, corrected_model, sampler, config.eval_reads,
            derive_seed(config.base_seed, idx, _TAG_EVAL_CORRECTED),
        )
        if orig_cut is None or corr_cut is None:
            records.append(ComparisonRecord(
                idx, config.n, p, graph_seed, orig_cut, corr_cut, None,
                orig_feasible, corr_feasible, "skipped",
            ))
        else:
            records.append(ComparisonRecord(
                idx, config.n, p, graph_seed, orig_cut, corr_cut, orig_cut - corr_cut,
                orig_feasible, corr_feasible, "ok",
            ))
    summary = summarize_comparison(records, config.eval_reads)
    if config.out_dir is not None:
        config.out_dir.mkdir(parents=True, exist_ok=True)
        write_comparison_csv(records, config.out_dir / "comparison_records.csv")
        (config.out_dir / "comparison_summary.json").write_text(
            json.dumps(summary, sort_keys=True, indent=2) + "\n"
        )
    return records, summary


def summarize_comparison(records: list[ComparisonRecord], eval_reads: int) -> dict:
    """Aggregate win/loss/tie counts and mean statistics over evaluated instances."""
    evaluated = [r for r in records if r.status == "ok"]
    diffs = [r.difference for r in evaluated]
    return {
        "instances": len(records),
        "evaluated": len(evaluated),
        "skipped": len(records) - len(evaluated),
        "wins": sum(1 for d in diffs if d > 0),
        "losses": sum(1 for d in diffs if d < 0),
        "ties": sum(1 for d in diffs if d == 0),
        "mean_difference": (sum(diffs) / len(diffs)) if diffs else None,
        "mean_original_cut": (
            sum(r.original_best_cut for r in evaluated) / len(evaluated)
            if evaluated else None
        ),
        "eval_reads": eval_reads,
    }


_CSV_COLUMNS = [
    "instance_id", "n", "p", "graph_seed",
    "original_best_cut", "corrected_best_cut", "difference",
    "original_feasible_reads", "corrected_feasible_reads", "status",
]


def write_comparison_csv(records: list[ComparisonRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for r in records:
            writer.writerow([
                r.instance_id, r.n, repr(r.p), r.graph_seed,
                "" if r.original_best_cut is None else r.original_best_cut,
                "" if r.corrected_best_cut is None else r.corrected_best_cut,
                "" if r.difference is None else r.difference,
                r.original_feasible_reads, r.corrected_feasible_reads, r.status,
            ])


def read_comparison_csv(path: str | Path) -> list[ComparisonRecord]:
    records = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(ComparisonRecord(
                instance_id=int(row["instance_id"]),
                n=int(row["n"]),
                p=float(row["p"]),
                graph_seed=int(row["graph_seed"]),
                original_best_cut=int(row["original_best_cut"]) if row["original_best_cut"] else None,
                corrected_best_cut=int(row["corrected_best_cut"]) if row["corrected_best_cut"] else None,
                difference=int(row["difference"]) if row["difference"] else None,
                original_feasible_reads=int(row["original_feasible_reads"]),
                corrected_feasible_reads=int(row["corrected_feasible_reads"]),
                status=row["status"],
            ))
    return records


def solve(
    g: Graph,
    formulation: str,
    sampler: Sampler,
    num_reads: int,
    seed: int,
    A: float,
    B: float = 1.0,
    corrected: CouplerSet | None = None,
) -> SolveResult:
    """Solve one partitioning instance and return the best feasible read.

    formulation "original" builds the standard penalty model; "corrected"
    requires a normalized corrected constraint for g.n variables.
    """
    if formulation == "original":
        model = build_gp_ising(g, A, B)
    elif formulation == "corrected":
        if corrected is None:
            raise ValueError("corrected formulation requires a corrected constraint")
        model = assemble_corrected_ising(corrected, g, A, B)
    else:
        raise ValueError(f"unknown formulation {formulation!r}")
    cut, feasible, assignment = best_feasible_cut(g, model, sampler, num_reads, seed)
    return SolveResult(
        assignment=assignment,
        cut=cut,
        balanced=assignment is not None,
        feasible_reads=feasible,
        total_reads=num_reads,
    )

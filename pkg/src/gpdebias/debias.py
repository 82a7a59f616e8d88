"""Measurement of sampling biases and the iterative coupler-correction loop.

The quadratic bias of a pair (i, j) is how often the two variables agree
across N reads, relative to the 0.5 expected of an unbiased sampler:
b_ij = n_ij/N - 0.5. The correction loop repeatedly measures these biases
on the constraint-only model and nudges each offending coupler by k*b_ij
until every |b_ij| falls below a stopping threshold. Linear biases
b_i = m_i/N - 0.5 (frequency of +1) are tracked throughout but never
corrected.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph
from .ising import (
    CouplerSet,
    IsingModel,
    assemble_corrected_ising,
    constraint_couplers,
    normalize_couplers,
)
from .samplers import Sampler, SamplerConfig, SampleSet
from .seeding import derive_seed

__all__ = [
    "BiasReport",
    "DebiasConfig",
    "DebiasIteration",
    "DebiasTrajectory",
    "calculate_bias",
    "update_terms",
    "debias_constraint",
    "full_pipeline",
    "constraint_cache_name",
    "load_cached_constraint",
]


@dataclass(frozen=True)
class BiasReport:
    """Per-pair quadratic biases and per-variable linear biases from one measurement."""

    n: int
    quadratic: dict[tuple[int, int], float]
    linear: dict[int, float]
    total_abs_quadratic: float
    max_abs_quadratic: float
    reads_used: int

    @classmethod
    def from_sample_set(
        cls, samples: SampleSet, pairs: tuple[tuple[int, int], ...]
    ) -> BiasReport:
        """Tally pair agreements and +1 counts, weighted by occurrence counts."""
        states = samples.states().astype(np.int64)
        counts = samples.counts()
        total = samples.total_reads
        gram = (states * counts[:, None]).T @ states
        plus_counts = ((states + 1) // 2 * counts[:, None]).sum(axis=0)
        quadratic = {}
        for i, j in pairs:
            n_agree = int(gram[i, j] + total) // 2
            quadratic[(i, j)] = n_agree / total - 0.5
        linear = {i: int(plus_counts[i]) / total - 0.5 for i in range(samples.n)}
        abs_vals = [abs(v) for v in quadratic.values()]
        return cls(
            n=samples.n,
            quadratic=quadratic,
            linear=linear,
            total_abs_quadratic=float(sum(abs_vals)),
            max_abs_quadratic=float(max(abs_vals, default=0.0)),
            reads_used=total,
        )

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "quadratic": {f"{i},{j}": v for (i, j), v in self.quadratic.items()},
            "linear": {str(i): v for i, v in self.linear.items()},
            "total_abs_quadratic": self.total_abs_quadratic,
            "max_abs_quadratic": self.max_abs_quadratic,
            "reads_used": self.reads_used,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True) + "\n")


@dataclass(frozen=True)
class DebiasConfig:
    """Knobs of the correction loop.

    k scales each coupler update; tau is the noise cutoff below which a
    measured bias is left alone; sigma is the stopping threshold on
    max |b_ij|. The iteration cap guards against divergence. tau = 0.05
    with sigma = 0.2 is the default pairing; tau = 0.15 trades some
    correction quality for fewer iterations.

    At small problem sizes raise reads_per_iteration so that k times the
    sampling noise (k * sqrt(0.25/N)) stays well below the coupler scale
    2A, or the updates random-walk; 1000 reads is a sound default at
    n around 16, A around 2.
    """

    k: float = 10.0
    tau: float = 0.05
    sigma: float = 0.2
    reads_per_iteration: int = 100
    max_iterations: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError(f"scaling constant k must be positive, got {self.k}")
        if self.tau <= 0:
            raise ValueError(f"noise cutoff tau must be positive, got {self.tau}")
        if self.sigma <= 0:
            raise ValueError(f"stopping threshold sigma must be positive, got {self.sigma}")
        if self.reads_per_iteration < 1:
            raise ValueError("reads_per_iteration must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class DebiasIteration:
    """State of the loop at one iteration: couplers in effect and what they measured."""

    index: int
    couplers: CouplerSet
    report: BiasReport

    @property
    def total_abs_quadratic(self) -> float:
        return self.report.total_abs_quadratic

    @property
    def max_abs_quadratic(self) -> float:
        return self.report.max_abs_quadratic


@dataclass(frozen=True)
class DebiasTrajectory:
    """Full history of a correction run and why it stopped."""

    iterations: tuple[DebiasIteration, ...]
    termination: str  # "converged" | "iteration-cap"

    @property
    def num_iterations(self) -> int:
        return len(self.iterations)

    @property
    def converged(self) -> bool:
        return self.termination == "converged"


def calculate_bias(
    couplers: CouplerSet, sampler: Sampler, num_reads: int, *, seed: int = 0
) -> BiasReport:
    """Sample the pure-coupler model and measure quadratic and linear biases."""
    if num_reads < 1:
        raise ValueError(f"num_reads must be >= 1, got {num_reads}")
    samples = sampler.sample(couplers.to_ising(), SamplerConfig(num_reads=num_reads, seed=seed))
    return BiasReport.from_sample_set(samples, couplers.pairs())


def update_terms(couplers: CouplerSet, report: BiasReport, tau: float, k: float) -> CouplerSet:
    """Nudge each coupler by k * b_ij wherever |b_ij| exceeds the noise cutoff.

    A positive bias (the pair agrees too often) raises the coupler, making
    agreement costlier. Pairs at or below tau pass through untouched; the
    input is never modified.
    """
    if set(couplers.values) != set(report.quadratic):
        raise ValueError("coupler set and bias report cover different pairs")
    updated = {}
    for pair, value in couplers.values.items():
        b = report.quadratic[pair]
        updated[pair] = value + k * b if abs(b) > tau else value
    return CouplerSet(couplers.n, updated)


def debias_constraint(
    initial: CouplerSet, config: DebiasConfig, sampler: Sampler
) -> tuple[CouplerSet, DebiasTrajectory]:
    """Iteratively correct couplers until all |b_ij| <= sigma or the cap is hit.

    Each iteration measures biases with a fresh sampler seed derived from
    (config.seed, iteration index), so the whole run is a deterministic
    function of its inputs. Iteration 0 is the initial measurement; the
    couplers returned are those in effect when the loop stopped.
    """
    couplers = initial
    iterations = []
    termination = "iteration-cap"
    for index in range(config.max_iterations + 1):
        report = calculate_bias(
            couplers,
            sampler,
            config.reads_per_iteration,
            seed=derive_seed(config.seed, index),
        )
        iterations.append(DebiasIteration(index, couplers, report))
        if report.max_abs_quadratic <= config.sigma:
            termination = "converged"
            break
        if index == config.max_iterations:
            break
        couplers = update_terms(couplers, report, config.tau, config.k)
    return couplers, DebiasTrajectory(tuple(iterations), termination)


def constraint_cache_name(n: int, fingerprint: str, seed: int) -> str:
    """File name under which a corrected constraint is cached."""
    return f"corrected-constraint-n{n}-{fingerprint}-seed{seed}.json"


def load_cached_constraint(
    cache_dir: str | Path, n: int, fingerprint: str | None = None
) -> CouplerSet:
    """Load a previously cached corrected constraint for n variables.

    When no fingerprint is given and several cached runs match, the
    lexicographically first file wins so lookups stay deterministic.
    """
    cache_dir = Path(cache_dir)
    if fingerprint is not None:
        pattern = f"corrected-constraint-n{n}-{fingerprint}-seed*.json"
    else:
        pattern = f"corrected-constraint-n{n}-*.json"
    matches = sorted(cache_dir.glob(pattern))
    if not matches:
        raise FileNotFoundError(
            f"no cached corrected constraint for n={n} in {cache_dir}"
        )
    return CouplerSet.load(matches[0])


def full_pipeline(
    g: Graph,
    A: float,
    B: float,
    config: DebiasConfig,
    sampler: Sampler,
    cache_dir: str | Path | None = None,
) -> IsingModel:
    """Debias the balance constraint for g.n variables and reattach the objective.

    Runs the correction loop on the uniform 2A constraint couplers,
    normalizes the result, and assembles the corrected partitioning model.
    The normalized constraint depends only on n (not on the graph), so it is
    optionally cached for reuse with other n-vertex graphs.
    """
    initial = constraint_couplers(g.n, A)
    corrected, _ = debias_constraint(initial, config, sampler)
    normalized = normalize_couplers(corrected)
    if cache_dir is not None:
        cache_dir = Path(cache_dir)
        cache_dir.mkdir(parents=True, exist_ok=True)
        name = constraint_cache_name(g.n, sampler.fingerprint, config.seed)
        normalized.save(cache_dir / name)
    return assemble_corrected_ising(normalized, g, A, B)


def write_trajectory_csv(trajectory: DebiasTrajectory, path: str | Path) -> None:
    """One row per iteration: index, total and max absolute quadratic bias."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "total_abs_quadratic", "max_abs_quadratic"])
        for it in trajectory.iterations:
            writer.writerow([it.index, repr(it.total_abs_quadratic), repr(it.max_abs_quadratic)])


def write_coupler_snapshots_csv(trajectory: DebiasTrajectory, path: str | Path) -> None:
    """One row per pair with that coupler's value at every iteration."""
    if not trajectory.iterations:
        raise ValueError("empty trajectory")
    pairs = trajectory.iterations[0].couplers.pairs()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pair"] + [f"iter_{it.index}" for it in trajectory.iterations])
        for pair in pairs:
            row = [f"{pair[0]}-{pair[1]}"]
            row += [repr(it.couplers.values[pair]) for it in trajectory.iterations]
            writer.writerow(row)

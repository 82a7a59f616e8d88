"""Bias-corrected Ising models for balanced graph partitioning.

Measure how far a sampler's constraint-only output deviates from uniform,
iteratively correct the constraint couplers, and reassemble the corrected
constraint with the cut objective to solve partitioning instances on
biased samplers.
"""

from .graph import Graph, cut_size, gen_erdos_renyi, imbalance, is_balanced
from .ising import (
    CouplerSet,
    IsingModel,
    assemble_corrected_ising,
    build_constraint_ising,
    build_gp_ising,
    constraint_couplers,
    energy,
    normalize_couplers,
)
from .samplers import (
    MEASUREMENT_BETA_SCALE,
    MEASUREMENT_SWEEPS,
    SOLVE_BETA_SCALE,
    BiasedSampler,
    ExactGroundSampler,
    HardwareBiasModel,
    SampleRecord,
    SampleSet,
    Sampler,
    SamplerConfig,
    SimulatedAnnealingSampler,
    measurement_variant,
    random_bias_model,
)
from .debias import (
    BiasReport,
    DebiasConfig,
    DebiasIteration,
    DebiasTrajectory,
    calculate_bias,
    debias_constraint,
    full_pipeline,
    load_cached_constraint,
    update_terms,
)
from .experiments import (
    ComparisonRecord,
    ExperimentConfig,
    SolveResult,
    run_comparison,
    run_debias_experiment,
    solve,
)
from .seeding import derive_seed

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "gen_erdos_renyi",
    "cut_size",
    "imbalance",
    "is_balanced",
    "IsingModel",
    "CouplerSet",
    "build_constraint_ising",
    "build_gp_ising",
    "constraint_couplers",
    "energy",
    "normalize_couplers",
    "assemble_corrected_ising",
    "Sampler",
    "SamplerConfig",
    "SampleSet",
    "SampleRecord",
    "ExactGroundSampler",
    "SimulatedAnnealingSampler",
    "BiasedSampler",
    "HardwareBiasModel",
    "random_bias_model",
    "measurement_variant",
    "SOLVE_BETA_SCALE",
    "MEASUREMENT_BETA_SCALE",
    "MEASUREMENT_SWEEPS",
    "BiasReport",
    "DebiasConfig",
    "DebiasIteration",
    "DebiasTrajectory",
    "calculate_bias",
    "update_terms",
    "debias_constraint",
    "full_pipeline",
    "load_cached_constraint",
    "ComparisonRecord",
    "ExperimentConfig",
    "SolveResult",
    "run_comparison",
    "run_debias_experiment",
    "solve",
    "derive_seed",
    "__version__",
]

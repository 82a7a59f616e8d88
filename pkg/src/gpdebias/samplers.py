"""Samplers that draw spin assignments from Ising models.

Three interchangeable backends share one contract: an exhaustive
ground-state enumerator (the unbiased oracle), a restart-based simulated
annealer (the workhorse), and a wrapper that perturbs the submitted model
to emulate analog-hardware imperfections before delegating to an inner
sampler. All samplers are deterministic functions of (model, config),
with per-read randomness keyed by (seed, read index) so the read set does
not depend on batching.
"""

from __future__ import annotations

import hashlib
import json
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .ising import IsingModel, energies_for_states

__all__ = [
    "SampleRecord",
    "SampleSet",
    "SamplerConfig",
    "Sampler",
    "ExactGroundSampler",
    "SimulatedAnnealingSampler",
    "HardwareBiasModel",
    "BiasedSampler",
    "random_bias_model",
    "measurement_variant",
    "SOLVE_BETA_SCALE",
    "MEASUREMENT_BETA_SCALE",
    "MEASUREMENT_SWEEPS",
]

_U64 = (1 << 64) - 1

# Stream ids reserved for non-read draws; SA reads use ids 0..num_reads-1.
_EXACT_DRAW_STREAM = _U64
_BIAS_DRAW_STREAM = _U64 - 1

ENUMERATION_LIMIT = 24


def _stream(seed: int, stream: int) -> np.random.Generator:
    key = np.array([int(seed) & _U64, int(stream) & _U64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SampleRecord:
    """One distinct assignment with its occurrence count and model energy."""

    assignment: tuple[int, ...]
    count: int
    energy: float


@dataclass(frozen=True)
class SampleSet:
    """Aggregated output of one sampler invocation.

    Records are unique assignments sorted by (energy, assignment); the
    occurrence counts sum to ``total_reads``.
    """

    n: int
    records: tuple[SampleRecord, ...]
    total_reads: int

    def __post_init__(self):
        total = 0
        for rec in self.records:
            if len(rec.assignment) != self.n:
                raise ValueError("record length does not match variable count")
            if any(s not in (-1, 1) for s in rec.assignment):
                raise ValueError("spins must be -1 or +1")
            if rec.count < 1:
                raise ValueError("occurrence counts must be positive")
            total += rec.count
        if total != self.total_reads:
            raise ValueError(f"counts sum to {total}, expected total_reads={self.total_reads}")

    def states(self) -> np.ndarray:
        """Unique assignments as an (len(records), n) int8 array."""
        if not self.records:
            return np.empty((0, self.n), dtype=np.int8)
        return np.array([r.assignment for r in self.records], dtype=np.int8)

    def counts(self) -> np.ndarray:
        return np.array([r.count for r in self.records], dtype=np.int64)

    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    def best(self) -> SampleRecord:
        """Record with the lowest energy (records are sorted)."""
        if not self.records:
            raise ValueError("empty sample set")
        return self.records[0]


def _sampleset_from_states(model: IsingModel, states: np.ndarray) -> SampleSet:
    """Aggregate raw per-read states into a canonical SampleSet."""
    total = states.shape[0]
    uniq, counts = np.unique(states.astype(np.int8), axis=0, return_counts=True)
    energies = energies_for_states(model, uniq)
    order = np.argsort(energies, kind="stable")
    records = tuple(
        SampleRecord(tuple(int(s) for s in uniq[k]), int(counts[k]), float(energies[k]))
        for k in order
    )
    return SampleSet(model.n, records, total)


@dataclass(frozen=True)
class SamplerConfig:
    """Per-invocation sampler settings.

    ``sweeps`` and ``beta_range`` only apply to annealing backends; when left
    None the sampler's own defaults are used (beta_range defaults to a
    geometric schedule derived from the model's coefficient scale).
    """

    num_reads: int
    seed: int = 0
    sweeps: int | None = None
    beta_range: tuple[float, float] | None = None

    def __post_init__(self):
        if self.num_reads < 1:
            raise ValueError(f"num_reads must be >= 1, got {self.num_reads}")
        if self.sweeps is not None and self.sweeps < 1:
            raise ValueError(f"sweeps must be >= 1, got {self.sweeps}")
        if self.beta_range is not None:
            b0, b1 = self.beta_range
            if not (0 < b0 <= b1):
                raise ValueError(f"beta range must satisfy 0 < initial <= final, got {self.beta_range}")


class Sampler(ABC):
    """Contract shared by all sampling backends."""

    @abstractmethod
    def sample(self, model: IsingModel, config: SamplerConfig) -> SampleSet:
        """Draw config.num_reads assignments; deterministic in (model, config)."""

    @property
    @abstractmethod
    def fingerprint(self) -> str:
        """Short stable identifier of the sampler and its algorithmic knobs."""


class ExactGroundSampler(Sampler):
    """Enumerates every assignment and samples the exact ground-state set uniformly.

    Serves as the unbiased reference: every minimum-energy assignment is
    equally likely in each read. Limited to n <= 24 variables.
    """

    def sample(self, model: IsingModel, config: SamplerConfig) -> SampleSet:
        if model.n > ENUMERATION_LIMIT:
            raise ValueError(
                f"exhaustive enumeration supports n <= {ENUMERATION_LIMIT}, got {model.n}"
            )
        codes, _ = ground_state_codes(model)
        rng = _stream(config.seed, _EXACT_DRAW_STREAM)
        picks = rng.integers(0, codes.shape[0], size=config.num_reads)
        chosen, counts = np.unique(codes[picks], return_counts=True)
        states = _decode_codes(chosen, model.n)
        energies = energies_for_states(model, states)
        order = np.argsort(energies, kind="stable")
        records = tuple(
            SampleRecord(tuple(int(s) for s in states[k]), int(counts[k]), float(energies[k]))
            for k in order
        )
        return SampleSet(model.n, records, config.num_reads)

    @property
    def fingerprint(self) -> str:
        return "exact"


def _decode_codes(codes: np.ndarray, n: int) -> np.ndarray:
    """Map state codes to spin rows: bit b of the code set means spin b is -1."""
    bits = (codes[:, None] >> np.arange(n, dtype=np.uint64)) & 1
    return (1 - 2 * bits.astype(np.int8)).astype(np.int8)


def ground_state_codes(model: IsingModel, chunk: int = 1 << 18) -> tuple[np.ndarray, float]:
    """All state codes attaining the minimum energy, plus that energy.

    Enumeration runs in two chunked passes so memory stays bounded even at
    the n = 24 limit; states within 1e-9 of the minimum count as ground.
    """
    n = model.n
    if n > ENUMERATION_LIMIT:
        raise ValueError(f"exhaustive enumeration supports n <= {ENUMERATION_LIMIT}, got {n}")
    h, ju, offset = model.to_arrays()
    total = 1 << n
    best = math.inf
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        e = _energies_for_codes(codes, n, h, ju, offset)
        best = min(best, float(e.min()))
    found = []
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        e = _energies_for_codes(codes, n, h, ju, offset)
        found.append(codes[e <= best + 1e-9])
    return np.concatenate(found), best


def _energies_for_codes(codes, n, h, ju, offset):
    s = _decode_codes(codes, n).astype(np.float64)
    return ((s @ ju) * s).sum(axis=1) + s @ h + offset


@njit(cache=True)
def _anneal_reads(states, h, jsym, betas, uniforms):
    """Metropolis sweeps over a batch of independent restarts, in place.

    states: (reads, n) spins as float64; uniforms: (reads, sweeps, n)
    pre-drawn per-read randomness; betas: (sweeps,) inverse temperatures.
    """
    num_reads, n = states.shape
    num_sweeps = betas.shape[0]
    for r in range(num_reads):
        local = np.empty(n)
        for i in range(n):
            acc = h[i]
            for j in range(n):
                acc += jsym[i, j] * states[r, j]
            local[i] = acc
        for t in range(num_sweeps):
            beta = betas[t]
            for i in range(n):
                de = -2.0 * states[r, i] * local[i]
                if de <= 0.0 or uniforms[r, t, i] < np.exp(-beta * de):
                    old = states[r, i]
                    states[r, i] = -old
                    for j in range(n):
                        local[j] += jsym[i, j] * (-2.0 * old)


# Auto-schedule presets, as multiples of the model's max |coefficient|.
# The deep quench optimizes well; the shallow schedule keeps read
# distributions smooth in the couplers, which the correction feedback loop
# needs for stability (a near-zero-temperature sampler reacts to coupler
# updates with +-0.5 bias jumps that no step size can damp).
SOLVE_BETA_SCALE = (1.0, 50.0)
MEASUREMENT_BETA_SCALE = (0.3, 1.6)
MEASUREMENT_SWEEPS = 300


class SimulatedAnnealingSampler(Sampler):
    """Independent-restart simulated annealing under a geometric beta schedule.

    Each read is one restart from a random state, annealed for ``sweeps``
    full Metropolis sweeps from beta_initial to beta_final; the final state
    is the read. The schedule scales with the model: beta runs between
    ``beta_scale`` multiples of 1/max|coef| (default 1 to 50, a deep
    quench), so behavior is invariant under uniform rescaling of the
    coefficients. An explicit ``beta_range`` overrides the scaling.
    """

    def __init__(
        self,
        sweeps: int = 1000,
        beta_range: tuple[float, float] | None = None,
        beta_scale: tuple[float, float] = SOLVE_BETA_SCALE,
    ):
        if sweeps < 1:
            raise ValueError(f"sweeps must be >= 1, got {sweeps}")
        if not (0 < beta_scale[0] <= beta_scale[1]):
            raise ValueError(f"beta scale must satisfy 0 < initial <= final, got {beta_scale}")
        self.sweeps = sweeps
        self.beta_range = beta_range
        self.beta_scale = (float(beta_scale[0]), float(beta_scale[1]))

    def sample(self, model: IsingModel, config: SamplerConfig) -> SampleSet:
        sweeps = config.sweeps if config.sweeps is not None else self.sweeps
        beta_range = config.beta_range or self.beta_range or self._auto_beta_range(model)
        betas = np.geomspace(beta_range[0], beta_range[1], sweeps)
        h, ju, _ = model.to_arrays()
        jsym = ju + ju.T
        n = model.n
        final = np.empty((config.num_reads, n), dtype=np.float64)
        # Chunk reads so the pre-drawn uniforms stay within ~32 MB.
        per_read = (sweeps + 1) * n * 8
        chunk = max(1, min(config.num_reads, (32 << 20) // max(per_read, 1)))
        for start in range(0, config.num_reads, chunk):
            stop = min(start + chunk, config.num_reads)
            states = np.empty((stop - start, n))
            uniforms = np.empty((stop - start, sweeps, n))
            for r in range(start, stop):
                stream = _stream(config.seed, r)
                states[r - start] = np.where(stream.random(n) < 0.5, 1.0, -1.0)
                uniforms[r - start] = stream.random((sweeps, n))
            _anneal_reads(states, h, jsym, betas, uniforms)
            final[start:stop] = states
        return _sampleset_from_states(model, final)

    def _auto_beta_range(self, model: IsingModel) -> tuple[float, float]:
        scale = model.max_abs_coefficient or 1.0
        return (self.beta_scale[0] / scale, self.beta_scale[1] / scale)

    @property
    def fingerprint(self) -> str:
        fp = f"sa{self.sweeps}"
        if self.beta_scale != SOLVE_BETA_SCALE:
            fp += f"-s{self.beta_scale[0]:g}-{self.beta_scale[1]:g}"
        if self.beta_range is not None:
            fp += f"-b{self.beta_range[0]:g}-{self.beta_range[1]:g}"
        return fp


@dataclass(frozen=True)
class HardwareBiasModel:
    """Static, model-independent perturbations applied before sampling.

    ``linear_offsets`` and ``coupler_offsets`` are expressed in the units of
    the submitted problem and sit on top of the (optionally rescaled and
    quantized) coefficients. ``leakage`` feeds a fraction of every coupler
    into its two incident linear terms. ``range_clamp`` rescales the model
    into the analog ranges h in [-2, 2], J in [-1, 1] before quantization
    to ``quantization_bits`` uniform levels.
    """

    linear_offsets: dict[int, float] = field(default_factory=dict)
    coupler_offsets: dict[tuple[int, int], float] = field(default_factory=dict)
    leakage: float = 0.0
    quantization_bits: int | None = None
    range_clamp: bool = False

    def __post_init__(self):
        if not 0.0 <= self.leakage < 1.0:
            raise ValueError(f"leakage must lie in [0, 1), got {self.leakage}")
        if self.quantization_bits is not None and not 2 <= self.quantization_bits <= 16:
            raise ValueError(f"quantization_bits must be in [2, 16], got {self.quantization_bits}")
        lin = {int(k): float(v) for k, v in self.linear_offsets.items()}
        quad = {}
        for key, value in self.coupler_offsets.items():
            i, j = int(key[0]), int(key[1])
            if i >= j:
                raise ValueError(f"coupler offset key ({i}, {j}) must satisfy i < j")
            quad[(i, j)] = float(value)
        for v in list(lin.values()) + list(quad.values()):
            if not math.isfinite(v):
                raise ValueError("bias offsets must be finite")
        object.__setattr__(self, "linear_offsets", dict(sorted(lin.items())))
        object.__setattr__(self, "coupler_offsets", dict(sorted(quad.items())))

    @property
    def is_zero(self) -> bool:
        """True when the wrapper is an exact pass-through."""
        return (
            not self.linear_offsets
            and not self.coupler_offsets
            and self.leakage == 0.0
            and self.quantization_bits is None
            and not self.range_clamp
        )

    def to_json_dict(self) -> dict:
        return {
            "linear_offsets": {str(i): v for i, v in self.linear_offsets.items()},
            "coupler_offsets": {f"{i},{j}": v for (i, j), v in self.coupler_offsets.items()},
            "leakage": self.leakage,
            "quantization_bits": self.quantization_bits,
            "range_clamp": self.range_clamp,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> HardwareBiasModel:
        coupler_offsets = {}
        for key, value in data.get("coupler_offsets", {}).items():
            i, j = key.split(",")
            coupler_offsets[(int(i), int(j))] = float(value)
        bits = data.get("quantization_bits")
        return cls(
            linear_offsets={int(k): float(v) for k, v in data.get("linear_offsets", {}).items()},
            coupler_offsets=coupler_offsets,
            leakage=float(data.get("leakage", 0.0)),
            quantization_bits=None if bits is None else int(bits),
            range_clamp=bool(data.get("range_clamp", False)),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> HardwareBiasModel:
        return cls.from_json_dict(json.loads(Path(path).read_text()))

    @property
    def digest(self) -> str:
        blob = json.dumps(self.to_json_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:8]


def _quantize(values: np.ndarray, limit: float, bits: int) -> np.ndarray:
    """Snap values to 2**bits uniform levels spanning [-limit, limit]."""
    step = 2.0 * limit / (2**bits - 1)
    clipped = np.clip(values, -limit, limit)
    return np.round((clipped + limit) / step) * step - limit


def apply_hardware_bias(model: IsingModel, bias: HardwareBiasModel) -> IsingModel:
    """The perturbed model a biased device effectively anneals.

    A single scale factor maps the model into the analog ranges (h/scale in
    [-2, 2], J/scale in [-1, 1]); quantization and the offsets act in those
    units, offsets being divided by the same factor so they track the
    problem's scale. Without range_clamp the result is mapped back to the
    problem's units, which leaves the sampled distribution unchanged under
    the scale-free default beta schedule.
    """
    h, ju, offset = model.to_arrays()
    scale = max(
        float(np.abs(ju).max(initial=0.0)),
        float(np.abs(h).max(initial=0.0)) / 2.0,
    )
    if scale == 0.0:
        scale = 1.0
    hw = h / scale
    jw = ju / scale
    if bias.quantization_bits is not None:
        hw = _quantize(hw, 2.0, bias.quantization_bits)
        mask = jw != 0.0
        jw = np.where(mask, _quantize(jw, 1.0, bias.quantization_bits), 0.0)
    for i, v in bias.linear_offsets.items():
        if i < model.n:
            hw[i] += v / scale
    for (i, j), v in bias.coupler_offsets.items():
        if j < model.n:
            jw[i, j] += v / scale
    if bias.leakage > 0.0:
        rows, cols = np.nonzero(jw)
        for i, j in zip(rows, cols):
            leaked = bias.leakage * jw[i, j]
            hw[i] += leaked
            hw[j] += leaked
    if not bias.range_clamp:
        hw = hw * scale
        jw = jw * scale
        new_offset = offset
    else:
        new_offset = offset / scale
    linear = {i: float(v) for i, v in enumerate(hw) if v != 0.0}
    quadratic = {
        (int(i), int(j)): float(jw[i, j]) for i, j in zip(*np.nonzero(jw))
    }
    return IsingModel(model.n, linear, quadratic, float(new_offset))


class BiasedSampler(Sampler):
    """Wraps another sampler, perturbing each submitted model first.

    The inner sampler anneals the perturbed model, but reported energies are
    always recomputed against the model the caller submitted, matching what
    a client of a real analog device observes.
    """

    def __init__(self, inner: Sampler, bias: HardwareBiasModel):
        self.inner = inner
        self.bias = bias

    def sample(self, model: IsingModel, config: SamplerConfig) -> SampleSet:
        if self.bias.is_zero:
            return self.inner.sample(model, config)
        perturbed = apply_hardware_bias(model, self.bias)
        raw = self.inner.sample(perturbed, config)
        states = raw.states()
        energies = energies_for_states(model, states)
        order = np.argsort(energies, kind="stable")
        records = tuple(
            SampleRecord(raw.records[k].assignment, raw.records[k].count, float(energies[k]))
            for k in order
        )
        return SampleSet(model.n, records, raw.total_reads)

    @property
    def fingerprint(self) -> str:
        return f"{self.inner.fingerprint}-bias{self.bias.digest}"


def random_bias_model(
    n: int,
    coupler_offset_range: float,
    seed: int,
    *,
    linear_offset_range: float = 0.0,
    leakage: float = 0.05,
    quantization_bits: int | None = 8,
    range_clamp: bool = True,
) -> HardwareBiasModel:
    """Draw a static bias model with per-pair coupler offsets.

    Offsets are uniform in [-coupler_offset_range, +coupler_offset_range],
    drawn once from the given seed, covering every pair i < j (and every
    vertex, when linear_offset_range > 0).
    """
    rng = _stream(seed, _BIAS_DRAW_STREAM)
    pairs = [(i, j) for i in range(n - 1) for j in range(i + 1, n)]
    draws = rng.uniform(-coupler_offset_range, coupler_offset_range, len(pairs))
    coupler_offsets = {pair: float(v) for pair, v in zip(pairs, draws)}
    linear_offsets = {}
    if linear_offset_range > 0.0:
        hdraws = rng.uniform(-linear_offset_range, linear_offset_range, n)
        linear_offsets = {i: float(v) for i, v in enumerate(hdraws)}
    return HardwareBiasModel(
        linear_offsets=linear_offsets,
        coupler_offsets=coupler_offsets,
        leakage=leakage,
        quantization_bits=quantization_bits,
        range_clamp=range_clamp,
    )


def measurement_variant(sampler: Sampler) -> Sampler:
    """The bias-measurement counterpart of a solving sampler.

    Annealing backends are swapped to the shallow measurement schedule
    (short anneals, beta capped at MEASUREMENT_BETA_SCALE) while any bias
    wrapper, i.e. the emulated hardware, is kept identical. Samplers without
    a schedule are returned unchanged.
    """
    if isinstance(sampler, BiasedSampler):
        return BiasedSampler(measurement_variant(sampler.inner), sampler.bias)
    if isinstance(sampler, SimulatedAnnealingSampler):
        return SimulatedAnnealingSampler(
            sweeps=MEASUREMENT_SWEEPS, beta_scale=MEASUREMENT_BETA_SCALE
        )
    return sampler

"""Ising models for balanced two-way graph partitioning.

Energies take the form  offset + sum_i h_i s_i + sum_{i<j} J_ij s_i s_j
over spins s_i in {-1, +1}. The partitioning model combines a balance
penalty A*(sum_i s_i)^2 with the cut objective B * |cut edges|; the penalty
expands to a uniform coupler of 2A on every pair plus a constant n*A, which
is what the bias-correction loop operates on.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import Graph, as_spins

__all__ = [
    "IsingModel",
    "CouplerSet",
    "build_constraint_ising",
    "build_gp_ising",
    "constraint_couplers",
    "energy",
    "normalize_couplers",
    "assemble_corrected_ising",
]


def _check_pair_keys(n: int, mapping: dict, what: str) -> dict[tuple[int, int], float]:
    out = {}
    for key, value in mapping.items():
        i, j = int(key[0]), int(key[1])
        if not (0 <= i < j < n):
            raise ValueError(f"{what} key ({i}, {j}) must satisfy 0 <= i < j < {n}")
        v = float(value)
        if not math.isfinite(v):
            raise ValueError(f"{what} coefficient for ({i}, {j}) is not finite")
        out[(i, j)] = v
    return dict(sorted(out.items()))


@dataclass(frozen=True)
class IsingModel:
    """Immutable Ising energy model: linear terms, pair couplers, constant offset.

    Quadratic keys are (i, j) with i < j; absent keys mean a zero coefficient.
    """

    n: int
    linear: dict[int, float] = field(default_factory=dict)
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"variable count must be a positive integer, got {self.n!r}")
        lin = {}
        for key, value in self.linear.items():
            i = int(key)
            if not 0 <= i < self.n:
                raise ValueError(f"linear index {i} out of range for n={self.n}")
            v = float(value)
            if not math.isfinite(v):
                raise ValueError(f"linear coefficient for {i} is not finite")
            lin[i] = v
        quad = _check_pair_keys(self.n, self.quadratic, "quadratic")
        off = float(self.offset)
        if not math.isfinite(off):
            raise ValueError("offset is not finite")
        object.__setattr__(self, "linear", dict(sorted(lin.items())))
        object.__setattr__(self, "quadratic", quad)
        object.__setattr__(self, "offset", off)

    @property
    def max_abs_coefficient(self) -> float:
        """Largest |h_i| or |J_ij|; 0.0 for the all-zero model."""
        vals = [abs(v) for v in self.linear.values()]
        vals += [abs(v) for v in self.quadratic.values()]
        return max(vals, default=0.0)

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray, float]:
        """Dense (h, J-upper-triangular, offset) representation."""
        h = np.zeros(self.n)
        for i, v in self.linear.items():
            h[i] = v
        ju = np.zeros((self.n, self.n))
        for (i, j), v in self.quadratic.items():
            ju[i, j] = v
        return h, ju, self.offset

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "linear": {str(i): v for i, v in self.linear.items()},
            "quadratic": {f"{i},{j}": v for (i, j), v in self.quadratic.items()},
            "offset": self.offset,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> IsingModel:
        linear = {int(k): float(v) for k, v in data.get("linear", {}).items()}
        quadratic = {}
        for key, value in data.get("quadratic", {}).items():
            i, j = key.split(",")
            quadratic[(int(i), int(j))] = float(value)
        return cls(int(data["n"]), linear, quadratic, float(data.get("offset", 0.0)))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> IsingModel:
        return cls.from_json_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class CouplerSet:
    """Pure pair-coupler collection, the object the bias-correction loop updates."""

    n: int
    values: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"variable count must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "values", _check_pair_keys(self.n, self.values, "coupler"))

    @property
    def max_abs(self) -> float:
        return max((abs(v) for v in self.values.values()), default=0.0)

    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(self.values.keys())

    def to_ising(self) -> IsingModel:
        return IsingModel(self.n, {}, self.values, 0.0)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "quadratic": {f"{i},{j}": v for (i, j), v in self.values.items()},
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> CouplerSet:
        values = {}
        for key, value in data.get("quadratic", {}).items():
            i, j = key.split(",")
            values[(int(i), int(j))] = float(value)
        return cls(int(data["n"]), values)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> CouplerSet:
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def constraint_couplers(n: int, A: float) -> CouplerSet:
    """Couplers of the balance penalty alone: 2A on every pair i < j."""
    if n < 2:
        raise ValueError(f"need at least 2 variables, got {n}")
    if A <= 0:
        raise ValueError(f"penalty weight A must be positive, got {A}")
    values = {(i, j): 2.0 * A for i in range(n - 1) for j in range(i + 1, n)}
    return CouplerSet(n, values)


def build_constraint_ising(n: int, A: float) -> IsingModel:
    """Ising model of the balance penalty A*(sum_i s_i)^2.

    Expanding the square gives coupler 2A on every pair plus the constant
    n*A, so the returned model evaluates to exactly A*(sum s)^2 everywhere.
    """
    couplers = constraint_couplers(n, A)
    return IsingModel(n, {}, couplers.values, n * float(A))


def build_gp_ising(g: Graph, A: float, B: float) -> IsingModel:
    """Full partitioning model: balance penalty plus B-weighted cut count.

    Each edge contributes B*(1 - s_i s_j)/2, i.e. a -B/2 coupler and a +B/2
    constant. Emits a warning when A/B < n/8, the threshold below which
    breaking balance can pay off.
    """
    if A <= 0 or B <= 0:
        raise ValueError(f"penalty weights must be positive, got A={A}, B={B}")
    if A / B < g.n / 8.0:
        warnings.warn(
            f"A/B = {A / B:g} is below n/8 = {g.n / 8:g}; "
            "minimizers may violate the balance constraint",
            stacklevel=2,
        )
    base = build_constraint_ising(g.n, A)
    quadratic = dict(base.quadratic)
    for i, j in g.edges:
        quadratic[(i, j)] = quadratic.get((i, j), 0.0) - B / 2.0
    offset = base.offset + B * g.num_edges / 2.0
    return IsingModel(g.n, {}, quadratic, offset)


def energy(m: IsingModel, s) -> float:
    """Evaluate offset + sum h_i s_i + sum_{i<j} J_ij s_i s_j."""
    spins = as_spins(s, m.n)
    total = m.offset
    for i, v in m.linear.items():
        total += v * spins[i]
    for (i, j), v in m.quadratic.items():
        total += v * spins[i] * spins[j]
    return float(total)


def energies_for_states(m: IsingModel, states: np.ndarray) -> np.ndarray:
    """Energies of a (reads, n) array of spin rows, vectorized."""
    h, ju, offset = m.to_arrays()
    st = states.astype(np.float64)
    return ((st @ ju) * st).sum(axis=1) + st @ h + offset


def normalize_couplers(couplers: CouplerSet) -> CouplerSet:
    """Divide every coupler by the maximum absolute coupler.

    The result has max |value| exactly 1 with signs preserved; an all-zero
    input has no defined normalization and is rejected.
    """
    m = couplers.max_abs
    if m == 0.0:
        raise ValueError("cannot normalize an all-zero coupler set")
    return CouplerSet(couplers.n, {k: v / m for k, v in couplers.values.items()})


def assemble_corrected_ising(corrected: CouplerSet, g: Graph, A: float, B: float) -> IsingModel:
    """Combine a normalized corrected constraint with the cut objective.

    The corrected constraint is scaled back by 2A and the per-edge objective
    terms are added on top; the model carries no linear terms and only the
    B*|E|/2 constant from the objective.
    """
    if corrected.n != g.n:
        raise ValueError(f"coupler set is over {corrected.n} variables but graph has {g.n}")
    if A <= 0 or B <= 0:
        raise ValueError(f"penalty weights must be positive, got A={A}, B={B}")
    if abs(corrected.max_abs - 1.0) > 1e-9:
        raise ValueError(
            f"corrected couplers must be normalized (max |value| == 1), got {corrected.max_abs!r}"
        )
    quadratic = {pair: 2.0 * A * v for pair, v in corrected.values.items()}
    for i, j in g.edges:
        quadratic[(i, j)] = quadratic.get((i, j), 0.0) - B / 2.0
    return IsingModel(g.n, {}, quadratic, B * g.num_edges / 2.0)

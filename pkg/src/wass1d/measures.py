"""Discrete measures on the real line and their dyadic geometry.

A :class:`DiscreteMeasure` is a finite collection of strictly increasing
atoms with positive weights summing to one; every other module works on
this representation.  The dyadic side consists of annular blocks
``B_0 = (-1, 1]``, ``B_m = (-2^m, 2^m] \\ (-2^{m-1}, 2^{m-1}]`` and, inside
the unit block, level-``l`` partitions of ``(-1, 1]`` into ``2^l`` equal
half-open cells.  All intervals are left-open / right-closed, so an atom
sitting exactly on a boundary belongs to the cell on its left side,
deterministically.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

# Construction renormalizes when the weight sum is within this tolerance of
# one and rejects the input otherwise.
WEIGHT_TOL = 1e-12


def abs_pow(d: float, p: float) -> float:
    """|d|^p for real p >= 1, with the zero case short-circuited.

    Shared by every distance and moment routine so that cross-checks between
    different computation routes compare identical per-term arithmetic.
    """
    if d == 0.0:
        return 0.0
    return abs(d) ** p


@dataclass(frozen=True)
class SortedSample:
    """A sorted batch of observations.

    The constructor rejects out-of-order input; use :meth:`from_unsorted`
    when the data arrives in arbitrary order.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError("sample must be one-dimensional")
        if vals.size > 1 and np.any(np.diff(vals) < 0):
            raise ValueError("sample values must be non-decreasing")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_unsorted(cls, values: Iterable[float]) -> "SortedSample":
        return cls(np.sort(np.asarray(list(values), dtype=float)))

    @property
    def n(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Probability measure with finitely many atoms on the real line.

    Construction canonicalizes: atoms are sorted, exact duplicates merged
    with summed weights, zero weights rejected, and the total weight
    renormalized to one provided it is within ``WEIGHT_TOL`` of one.
    Instances are immutable and safe to share across threads.
    """

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        atoms = np.asarray(self.atoms, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if atoms.ndim != 1 or weights.ndim != 1 or atoms.size != weights.size:
            raise ValueError("atoms and weights must be 1-d arrays of equal length")
        if atoms.size == 0:
            raise ValueError("measure needs at least one atom")
        if not np.all(np.isfinite(atoms)):
            raise ValueError("atoms must be finite")
        order = np.argsort(atoms, kind="stable")
        atoms = atoms[order]
        weights = weights[order]
        if atoms.size > 1 and np.any(np.diff(atoms) == 0.0):
            # merge duplicates, summing weights
            uniq, inverse = np.unique(atoms, return_inverse=True)
            merged = np.zeros(uniq.size)
            np.add.at(merged, inverse, weights)
            atoms, weights = uniq, merged
        if np.any(weights <= 0.0):
            raise ValueError("weights must be positive")
        total = math.fsum(weights.tolist())
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {total!r}, outside tolerance of 1")
        if total != 1.0:
            weights = weights / total
        atoms = atoms.copy()
        atoms.setflags(write=False)
        weights = np.ascontiguousarray(weights)
        weights.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @property
    def n_atoms(self) -> int:
        return int(self.atoms.size)

    @cached_property
    def cum_weights(self) -> np.ndarray:
        cw = np.cumsum(self.weights)
        cw[-1] = 1.0
        cw.setflags(write=False)
        return cw

    def mass_in(self, lo: float, hi: float) -> float:
        """Mass of the half-open interval (lo, hi]."""
        i0 = int(np.searchsorted(self.atoms, lo, side="right"))
        i1 = int(np.searchsorted(self.atoms, hi, side="right"))
        if i1 <= i0:
            return 0.0
        return math.fsum(self.weights[i0:i1].tolist())

    @classmethod
    def point_mass(cls, x: float) -> "DiscreteMeasure":
        return cls(np.array([x]), np.array([1.0]))

    # -- CSV interface: two columns `atom,weight`, header row, atoms ascending
    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["atom", "weight"])
            for a, w in zip(self.atoms.tolist(), self.weights.tolist()):
                writer.writerow([repr(a), repr(w)])

    @classmethod
    def from_csv(cls, path: str | Path) -> "DiscreteMeasure":
        atoms: list[float] = []
        weights: list[float] = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header[:2]] != ["atom", "weight"]:
                raise ValueError(f"{path}: expected header 'atom,weight'")
            for row in reader:
                if not row:
                    continue
                try:
                    atoms.append(float(row[0]))
                    weights.append(float(row[1]))
                except (IndexError, ValueError) as exc:
                    raise ValueError(f"{path}: malformed row {row!r}") from exc
        if not atoms:
            raise ValueError(f"{path}: no atoms")
        return cls(np.array(atoms), np.array(weights))


# ---------------------------------------------------------------------------
# Dyadic blocks and cells
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Block:
    """Dyadic annulus ``B_m``.

    ``B_0 = (-1, 1]``; for m >= 1, ``B_m = (-2^m, 2^m] \\ (-2^{m-1}, 2^{m-1}]``,
    i.e. the two pieces ``(-2^m, -2^{m-1}]`` and ``(2^{m-1}, 2^m]``.
    """

    m: int

    def __post_init__(self) -> None:
        if self.m < 0:
            raise ValueError("block index must be >= 0")

    def pieces(self) -> list[tuple[float, float]]:
        if self.m == 0:
            return [(-1.0, 1.0)]
        outer = 2.0 ** self.m
        inner = 2.0 ** (self.m - 1)
        return [(-outer, -inner), (inner, outer)]

    def contains(self, x: float) -> bool:
        return any(lo < x <= hi for lo, hi in self.pieces())


@dataclass(frozen=True)
class DyadicCell:
    """Cell j of the level-l partition of (-1, 1] into 2^l translates."""

    level: int
    index: int

    def __post_init__(self) -> None:
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if not 0 <= self.index < 2 ** self.level:
            raise ValueError("cell index out of range")

    @property
    def bounds(self) -> tuple[float, float]:
        width = 2.0 ** (1 - self.level)
        return (-1.0 + self.index * width, -1.0 + (self.index + 1) * width)

    def contains(self, x: float) -> bool:
        lo, hi = self.bounds
        return lo < x <= hi


def dyadic_cells(level: int) -> list[DyadicCell]:
    """All cells of the level-`level` partition, in index order."""
    return [DyadicCell(level, j) for j in range(2 ** level)]


def block_index(x: float) -> int:
    """Index m of the block ``B_m`` containing x."""
    if not math.isfinite(x):
        raise ValueError("point must be finite")
    if -1.0 < x <= 1.0:
        return 0
    a = abs(x)
    # log2 is ulp-accurate; correct the candidate with the exact predicate
    m = max(1, math.ceil(math.log2(a)))
    for cand in (m - 1, m, m + 1):
        if cand >= 1 and Block(cand).contains(x):
            return cand
    raise AssertionError(f"no block found for {x!r}")


def max_block_index(measure: DiscreteMeasure) -> int:
    """Largest m with positive mass in B_m (support-truncation bound)."""
    return max(block_index(float(measure.atoms[0])),
               block_index(float(measure.atoms[-1])))


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def empirical_from_sample(sample: SortedSample) -> DiscreteMeasure:
    """Empirical measure of a sample: distinct values weighted by multiplicity/n."""
    if sample.n == 0:
        raise ValueError("empty sample")
    values, counts = np.unique(sample.values, return_counts=True)
    return DiscreteMeasure(values, counts / sample.n)


def moment(measure: DiscreteMeasure, p: float) -> float:
    """Absolute moment of order p: sum of w_k * |x_k|^p."""
    if p < 1.0:
        raise ValueError("order p must be >= 1")
    return math.fsum(
        w * abs_pow(a, p)
        for a, w in zip(measure.atoms.tolist(), measure.weights.tolist())
    )


def block_mass(measure: DiscreteMeasure, m: int) -> float:
    """Mass of the dyadic annulus B_m, half-open boundary convention."""
    if m < 0:
        raise ValueError("block index must be >= 0")
    return math.fsum(measure.mass_in(lo, hi) for lo, hi in Block(m).pieces())


def restrict_rescale(measure: DiscreteMeasure, m: int) -> DiscreteMeasure:
    """Restriction of the measure to B_m, renormalized and mapped into (-1, 1].

    The map is x -> x / 2^m, so the result is a probability measure supported
    in (-1, 1].  Raises when the block carries no mass (the corresponding
    term of the multiscale decomposition vanishes and the caller must skip).
    """
    block = Block(m)
    mask = np.array([block.contains(float(a)) for a in measure.atoms])
    total = math.fsum(measure.weights[mask].tolist())
    if total <= 0.0:
        raise ValueError("empty block")
    scale = 2.0 ** m
    return DiscreteMeasure(measure.atoms[mask] / scale, measure.weights[mask] / total)


def cell_masses(measure: DiscreteMeasure, level: int) -> np.ndarray:
    """Masses of all 2^level cells of the level partition of (-1, 1].

    Requires the measure to be supported in (-1, 1]; cell edges are exact
    dyadic floats so boundary assignment is deterministic.
    """
    if level < 0:
        raise ValueError("level must be >= 0")
    atoms = measure.atoms
    if atoms[0] <= -1.0 or atoms[-1] > 1.0:
        raise ValueError("support violation: measure not supported in (-1, 1]")
    n_cells = 2 ** level
    width = 2.0 ** (1 - level)
    edges = -1.0 + np.arange(n_cells + 1) * width
    # left-open/right-closed: an atom equal to edge j lands in cell j-1
    idx = np.searchsorted(edges, atoms, side="left") - 1
    out = np.zeros(n_cells)
    np.add.at(out, idx, measure.weights)
    return out

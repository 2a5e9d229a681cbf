"""Datasets, sample ordering, input scaling, and shared validity checks.

A dataset here is an *ordered* sequence of (x, y) samples.  The order is
semantically significant: SQANN construction consumes samples in dataset
order, and TNN requires a strict descending order over scalar inputs.
All types are immutable after creation and all operations are pure.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DuplicateInputError, IllDefinedDatasetError


def _as_finite_vector(values, what: str) -> tuple[float, ...]:
    vec = tuple(float(v) for v in np.atleast_1d(values))
    if not all(np.isfinite(v) for v in vec):
        raise DataError(f"{what} contains a non-finite component: {vec}")
    return vec


def _fingerprint(samples, input_dim: int, output_dim: int) -> str:
    h = hashlib.sha256()
    h.update(struct.pack(">qqq", len(samples), input_dim, output_dim))
    for s in samples:
        h.update(struct.pack(f">{len(s.x)}d", *s.x))
        h.update(struct.pack(f">{len(s.y)}d", *s.y))
    return h.hexdigest()


@dataclass(frozen=True)
class Sample:
    """One (input, output) pair with its position in the originally supplied data."""

    x: tuple[float, ...]
    y: tuple[float, ...]
    index: int

    @classmethod
    def of(cls, x, y, index: int) -> "Sample":
        return cls(_as_finite_vector(x, "x"), _as_finite_vector(y, "y"), int(index))


@dataclass(frozen=True)
class Dataset:
    """Ordered sequence of samples sharing input/output dimensions."""

    samples: tuple[Sample, ...]
    input_dim: int
    output_dim: int

    def __post_init__(self):
        for s in self.samples:
            if len(s.x) != self.input_dim or len(s.y) != self.output_dim:
                raise DataError(
                    f"sample {s.index} has dims ({len(s.x)}, {len(s.y)}), "
                    f"dataset declares ({self.input_dim}, {self.output_dim})"
                )
        indices = [s.index for s in self.samples]
        if len(set(indices)) != len(indices):
            raise DataError("sample indices are not unique within the dataset")

    def __len__(self) -> int:
        return len(self.samples)

    @classmethod
    def from_arrays(cls, X, Y) -> "Dataset":
        """Build a dataset from row-aligned input/output arrays.

        Rows become samples in the given order; indices are assigned 0..n-1.
        1-D arrays are treated as columns of scalars.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if X.shape[0] == 1 and Y.shape[0] != 1:
            X = X.T
        if Y.shape[0] == 1 and X.shape[0] != 1:
            Y = Y.T
        if X.shape[0] != Y.shape[0]:
            raise DataError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
        samples = tuple(Sample.of(x, y, i) for i, (x, y) in enumerate(zip(X, Y)))
        return cls(samples, X.shape[1], Y.shape[1])

    def inputs(self) -> np.ndarray:
        """(n, input_dim) array of inputs in dataset order."""
        return np.array([s.x for s in self.samples], dtype=float).reshape(len(self), self.input_dim)

    def outputs(self) -> np.ndarray:
        """(n, output_dim) array of outputs in dataset order."""
        return np.array([s.y for s in self.samples], dtype=float).reshape(len(self), self.output_dim)

    def content_fingerprint(self) -> str:
        """SHA-256 over dimensions, sample values, and their order."""
        return _fingerprint(self.samples, self.input_dim, self.output_dim)

    def subset(self, positions) -> "Dataset":
        """New dataset from the samples at the given positions, reindexed 0..k-1."""
        picked = [self.samples[p] for p in positions]
        samples = tuple(Sample(s.x, s.y, i) for i, s in enumerate(picked))
        return Dataset(samples, self.input_dim, self.output_dim)

    def extended_with(self, other: "Dataset", positions) -> "Dataset":
        """Append the samples of ``other`` at ``positions`` (in that order), reindexed."""
        if other.input_dim != self.input_dim or other.output_dim != self.output_dim:
            raise DataError("datasets have different dimensions")
        extra = [other.samples[p] for p in positions]
        samples = list(self.samples) + extra
        samples = tuple(Sample(s.x, s.y, i) for i, s in enumerate(samples))
        return Dataset(samples, self.input_dim, self.output_dim)


@dataclass(frozen=True)
class ValidationResult:
    """Findings of :func:`validate_dataset`; ``ok`` means no contradictions."""

    ok: bool
    ill_defined_pairs: tuple[tuple[int, int], ...] = ()
    duplicate_pairs: tuple[tuple[int, int], ...] = ()


def validate_dataset(d: Dataset) -> ValidationResult:
    """Check that the x -> y map over ``d`` is a well-defined function.

    Input equality is exact component equality; near-duplicates are the
    models' business (they surface as collisions), not the validator's.
    Pairs with identical x and identical y are reported as duplicate
    warnings since they carry no contradiction.
    """
    groups: dict[tuple[float, ...], list[int]] = {}
    for pos, s in enumerate(d.samples):
        groups.setdefault(s.x, []).append(pos)
    ill, dup = [], []
    for positions in groups.values():
        for a in range(len(positions)):
            for b in range(a + 1, len(positions)):
                i, j = positions[a], positions[b]
                if d.samples[i].y == d.samples[j].y:
                    dup.append((i, j))
                else:
                    ill.append((i, j))
    return ValidationResult(ok=not ill, ill_defined_pairs=tuple(ill), duplicate_pairs=tuple(dup))


@dataclass(frozen=True)
class ScalingParams:
    """Per-dimension (min, max) recorded from a fitting dataset.

    External samples must be mapped with the *same* parameters; values
    outside [0, 1] are then permitted.  Constant dimensions map to 0.5
    (interior to the unit interval, zero distance contribution).
    """

    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        mins = np.array(self.mins)
        maxs = np.array(self.maxs)
        span = maxs - mins
        out = np.empty_like(x, dtype=float)
        const = span == 0
        out[..., const] = 0.5
        out[..., ~const] = (x[..., ~const] - mins[~const]) / span[~const]
        return out

    def invert(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        mins = np.array(self.mins)
        span = np.array(self.maxs) - mins
        return mins + z * span

    def apply_dataset(self, d: Dataset) -> Dataset:
        scaled = self.apply(d.inputs())
        samples = tuple(
            Sample(tuple(float(v) for v in row), s.y, s.index)
            for row, s in zip(scaled, d.samples)
        )
        return Dataset(samples, d.input_dim, d.output_dim)


def min_max_scale(d: Dataset) -> tuple[Dataset, ScalingParams]:
    """Affinely map each input dimension to [0, 1] over the dataset."""
    if len(d) == 0:
        raise DataError("cannot derive scaling parameters from an empty dataset")
    X = d.inputs()
    params = ScalingParams(tuple(float(v) for v in X.min(axis=0)),
                           tuple(float(v) for v in X.max(axis=0)))
    return params.apply_dataset(d), params


@dataclass(frozen=True)
class OrderedDataset:
    """Scalar-input dataset sorted strictly descending by x.

    Original sample indices are preserved; only the order changes.
    """

    samples: tuple[Sample, ...]
    output_dim: int
    input_dim: int = field(default=1)

    def __len__(self) -> int:
        return len(self.samples)

    def xs(self) -> np.ndarray:
        return np.array([s.x[0] for s in self.samples], dtype=float)

    def ys(self) -> np.ndarray:
        return np.array([s.y for s in self.samples], dtype=float).reshape(len(self), self.output_dim)

    def content_fingerprint(self) -> str:
        return _fingerprint(self.samples, self.input_dim, self.output_dim)


def linear_order(d: Dataset) -> OrderedDataset:
    """Sort a scalar-input dataset strictly descending by x.

    Raises :class:`DuplicateInputError` when two samples share the same x
    (strict ordering impossible), or :class:`IllDefinedDatasetError` when
    they additionally disagree on y.
    """
    if d.input_dim != 1:
        raise DataError(f"linear ordering requires scalar inputs, got input_dim={d.input_dim}")
    result = validate_dataset(d)
    if not result.ok:
        raise IllDefinedDatasetError(result.ill_defined_pairs)
    if result.duplicate_pairs:
        raise DuplicateInputError(result.duplicate_pairs)
    ordered = tuple(sorted(d.samples, key=lambda s: -s.x[0]))
    return OrderedDataset(samples=ordered, output_dim=d.output_dim)

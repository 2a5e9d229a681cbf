"""Single-layer network with triangular construction over ordered scalar inputs.

The model is ``TNN(x) = alpha @ sigmoid(W x + b)``.  Weights are chosen in
closed form so that the inputs, sorted strictly descending, produce the
staircase activation pattern [1,...,1,0,...,0]: the number of fully-on
neurons encodes an input's rank, which is what makes every prediction
attributable to a specific fitting sample.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .activations import sigmoid
from .dataset import Dataset, OrderedDataset, linear_order
from .errors import DegenerateGapError, InvalidToleranceError


class DummyDeltaRule(enum.Enum):
    """How to pick the extra gap below the smallest input.

    The construction needs one gap per neuron; with N samples there are
    only N-1 real gaps, so the final one is chosen freely.  It only
    affects the curve's shape below the smallest sample.

    MEAN_GAP    arithmetic mean of the real gaps (default)
    SUM_OVER_N  sum of the real gaps divided by N (slightly smaller)
    LAST_GAP    reuse the gap between the two smallest samples
    """

    MEAN_GAP = "mean_gap"
    SUM_OVER_N = "sum_over_n"
    LAST_GAP = "last_gap"


def _resolve_dummy(gaps: np.ndarray, rule: DummyDeltaRule | float) -> float:
    if isinstance(rule, (int, float)) and not isinstance(rule, bool):
        return float(rule)
    if len(gaps) == 0:
        # single-sample dataset: no real gaps to derive from
        return 1.0
    if rule is DummyDeltaRule.MEAN_GAP:
        return float(gaps.sum() / len(gaps))
    if rule is DummyDeltaRule.SUM_OVER_N:
        return float(gaps.sum() / (len(gaps) + 1))
    if rule is DummyDeltaRule.LAST_GAP:
        return float(gaps[-1])
    raise ValueError(f"unknown dummy gap rule: {rule!r}")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TnnModel:
    """Closed-form single-layer model over linearly ordered scalar inputs.

    ``ordered_x`` is strictly descending; ``W``/``b`` have one entry per
    fitting sample, ``alpha`` is (output_dim, N).
    """

    W: np.ndarray
    b: np.ndarray
    alpha: np.ndarray
    a: float
    ordered_x: np.ndarray
    ordered_y: np.ndarray  # (output_dim, N)
    delta_dummy: float
    dataset_fingerprint: str = ""

    @property
    def n_samples(self) -> int:
        return len(self.W)

    @property
    def output_dim(self) -> int:
        return self.alpha.shape[0]

    def predict(self, x) -> np.ndarray:
        return tnn_predict(self, x)


def build_tnn(
    d: Dataset | OrderedDataset,
    a: float = 5.0,
    dummy_rule: DummyDeltaRule | float = DummyDeltaRule.MEAN_GAP,
) -> TnnModel:
    """Construct the model in closed form from an ordered scalar dataset.

    Accepts an unordered scalar dataset for convenience (it is ordered
    first).  ``a`` is the activation sharpness: neuron pre-activations at
    fitting samples land at or beyond +/-a, so larger ``a`` means smaller
    fitting error.  Identical inputs and parameters produce a bitwise
    identical model.
    """
    if a <= 0:
        raise ValueError(f"sharpness a must be positive, got {a}")
    fingerprint = d.content_fingerprint()
    if isinstance(d, Dataset):
        d = linear_order(d)
    if len(d) == 0:
        raise DegenerateGapError("cannot build from an empty dataset")

    xs = d.xs()                     # strictly descending
    ys = d.ys().T                   # (output_dim, N)
    n = len(xs)
    gaps = xs[:-1] - xs[1:]         # gaps[k-1] = x^(k) - x^(k+1), all positive
    if np.any(gaps <= 0):
        raise DegenerateGapError(f"non-positive gap in ordered inputs: {gaps}")
    dummy = _resolve_dummy(gaps, dummy_rule)
    if dummy <= 0:
        raise DegenerateGapError(f"dummy gap must be positive, got {dummy}")

    deltas = np.concatenate([gaps, [dummy]])    # deltas[k-1] = gap below sample k
    # Neuron j turns on at x >= x^(N-j+1): W_j = 2a / Delta^(N-j+1), b_j = a - W_j x^(N-j+1)
    W = 2.0 * a / deltas[::-1]
    b = a - W * xs[::-1]
    # Retrieval coefficients: partial sums of alpha along the staircase hit each y.
    alpha = np.empty_like(ys)
    alpha[:, 0] = ys[:, -1]
    alpha[:, 1:] = ys[:, -2::-1] - ys[:, :0:-1]

    return TnnModel(
        W=_readonly(W),
        b=_readonly(b),
        alpha=_readonly(alpha),
        a=float(a),
        ordered_x=_readonly(xs),
        ordered_y=_readonly(ys),
        delta_dummy=float(dummy),
        dataset_fingerprint=fingerprint,
    )


def tnn_predict(m: TnnModel, x) -> np.ndarray:
    """Evaluate the model at a scalar input; returns an (output_dim,) vector."""
    x = float(np.asarray(x).reshape(-1)[0]) if np.ndim(x) else float(x)
    s = sigmoid(m.W * x + m.b)
    return m.alpha @ s


def tnn_predict_batch(m: TnnModel, xs) -> np.ndarray:
    """Evaluate at many scalar inputs at once; returns (n, output_dim)."""
    xs = np.asarray(xs, dtype=float).reshape(-1)
    s = sigmoid(np.outer(xs, m.W) + m.b)
    return s @ m.alpha.T


HALF = 0.5

_PATTERN_TOL = 1e-9


def tnn_activation_pattern(m: TnnModel, x) -> tuple[np.ndarray, np.ndarray]:
    """Thresholded activation pattern plus the raw sigmoid activations.

    Pattern entries are 1.0 (>= 1-delta), 0.0 (<= delta) or 0.5
    otherwise, with delta = sigmoid(-a).  For fitting sample k the
    pattern is ones in the first N-k+1 positions and zeros after; the
    last fully-on neuron identifies the sample.  A small tolerance
    absorbs float round-off exactly at the thresholds.
    """
    x = float(np.asarray(x).reshape(-1)[0]) if np.ndim(x) else float(x)
    raw = sigmoid(m.W * x + m.b)
    delta = sigmoid(-m.a)
    pattern = np.full_like(raw, HALF)
    pattern[raw >= 1.0 - delta - _PATTERN_TOL] = 1.0
    pattern[raw <= delta + _PATTERN_TOL] = 0.0
    return pattern, raw


def tnn_error_bound(m: TnnModel) -> float:
    """Guaranteed per-sample fitting error: delta * (N + 1) * U.

    delta = sigmoid(-a) and U is the largest |y| component over the
    fitting samples.  Every fitting prediction error is at most this;
    the bound vanishes as a -> infinity.
    """
    delta = sigmoid(-m.a)
    U = float(np.max(np.abs(m.ordered_y))) if m.ordered_y.size else 0.0
    return float(delta * (m.n_samples + 1) * U)


def required_sharpness(epsilon: float, n_samples: int, U: float) -> float:
    """Sharpness ``a`` for which the error bound equals ``epsilon``.

    Solves sigmoid(-a) = epsilon / (U * (N + 1)), i.e.
    a = ln(U (N + 1) / epsilon - 1).  Raises
    :class:`InvalidToleranceError` when epsilon >= U (N + 1), where the
    required delta would reach 1 (U = 0 needs no sharpness at all and is
    rejected for the same reason).
    """
    if epsilon <= 0:
        raise InvalidToleranceError(f"epsilon must be positive, got {epsilon}")
    if epsilon >= U * (n_samples + 1):
        raise InvalidToleranceError(
            f"epsilon={epsilon} is not below U*(N+1)={U * (n_samples + 1)}"
        )
    return math.log(U * (n_samples + 1) / epsilon - 1.0)

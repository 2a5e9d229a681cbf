"""Scalar activation functions both models are built from.

All functions are pure and accept scalars or numpy arrays elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def sigmoid(t):
    """Logistic function 1 / (1 + e^-t), numerically stable on both tails."""
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out if out.ndim else float(out)


def selective_pi(x, a: float):
    """Selective activation a / (a + x^2); 1 iff x = 0, decreasing in |x|."""
    if a <= 0:
        raise ValueError(f"width a must be positive, got {a}")
    x = np.asarray(x, dtype=float)
    out = a / (a + x * x)
    return out if out.ndim else float(out)


def super_gaussian(x, a: float):
    """Flat-topped bump exp(-(x/a)^8); 1 iff x = 0."""
    if a <= 0:
        raise ValueError(f"width a must be positive, got {a}")
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        out = np.exp(-((x / a) ** 8))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DsaParams:
    """Parameters of the double selective activation.

    ``a1`` controls the narrow selective peak, ``a2`` the flat-topped
    plateau, ``r`` mixes the two.  The defaults give the three-regime
    response (strong / moderate / weak) the models rely on.
    """

    a1: float = 0.001
    a2: float = 0.5
    r: float = 0.5

    def __post_init__(self):
        if not (self.a1 > 0 and self.a2 > 0):
            raise ValueError(f"a1 and a2 must be positive, got ({self.a1}, {self.a2})")
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r must lie in [0, 1], got {self.r}")


def dsa(x, p: DsaParams = DsaParams()):
    """Double selective activation: (1-r)*pi(x, a1) + r*sg(x, a2).

    Equals exactly 1 at x = 0, is even, and strictly decreases in |x|.
    The exponent 8 of the super-Gaussian part is fixed; all reference
    values assume it.
    """
    return (1.0 - p.r) * selective_pi(x, p.a1) + p.r * super_gaussian(x, p.a2)

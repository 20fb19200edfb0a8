"""Discriminating two displaced Gaussians: Helstrom bound vs. the threshold scheme.

The threshold scheme reads the particle's position and declares ``+`` near
``+alpha``, ``-`` near ``-alpha`` and "inconclusive" anywhere else. Ideal
point projectors have zero acceptance probability, so acceptance rates are
reported for bins of finite width ``w``; error rates use density ratios and do
not depend on ``w``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable

from scipy.special import expit, ndtr


@dataclass(frozen=True)
class GaussianPair:
    """Gaussians of width ``width`` centred at ``+separation`` and ``-separation``."""

    separation: float
    width: float = 1.0

    def __post_init__(self):
        if not self.width > 0.0:
            raise ValueError("width must be positive")
        if self.separation < 0.0:
            raise ValueError("separation must be non-negative")


@dataclass(frozen=True)
class ThresholdScheme:
    """Bins centred at ``+alpha`` and ``-alpha``.

    ``bin_width=None`` means ``0.1 * delta`` of whichever pair it is applied to.
    """

    alpha: float
    bin_width: float | None = None

    def __post_init__(self):
        if self.alpha < 0.0:
            raise ValueError("alpha must be non-negative")
        if self.bin_width is None:
            return
        if not self.bin_width > 0.0:
            raise ValueError("bin_width must be positive")
        if self.alpha > 0.0 and self.bin_width >= 2.0 * self.alpha:
            raise ValueError("bins around +alpha and -alpha overlap (need w < 2 alpha)")


def gaussian_overlap(pair: GaussianPair) -> float:
    return math.exp(-(pair.separation**2) / (2.0 * pair.width**2))


def helstrom_error(pair: GaussianPair) -> float:
    """Minimum-error probability for equal priors, ``(1 - sqrt(1 - |<+|->|^2)) / 2``."""
    # -expm1 keeps precision for tiny separations
    return 0.5 * (1.0 - math.sqrt(-math.expm1(-(pair.separation**2) / pair.width**2)))


def threshold_error(scheme: ThresholdScheme, pair: GaussianPair) -> float:
    """Error probability conditioned on a conclusive outcome, ``1 / (1 + exp(2 alpha eps / delta^2))``."""
    return float(expit(-2.0 * scheme.alpha * pair.separation / pair.width**2))


def _bin_mass(center: float, half: float, mu: float, sigma: float) -> float:
    return float(ndtr((center + half - mu) / sigma) - ndtr((center - half - mu) / sigma))


def conclusive_probability(scheme: ThresholdScheme, pair: GaussianPair) -> float:
    """Probability that the position lands in either bin, for equal priors.

    Bins are ``[+-alpha - w/2, +-alpha + w/2]``; bin masses use the Gaussian
    CDF, so no quadrature error enters.
    """
    w = scheme.bin_width if scheme.bin_width is not None else 0.1 * pair.width
    if w >= 2.0 * scheme.alpha:
        raise ValueError("conclusive probability needs two disjoint bins (w < 2 alpha)")
    half = 0.5 * w
    total = 0.0
    for mu in (pair.separation, -pair.separation):
        for c in (scheme.alpha, -scheme.alpha):
            total += _bin_mass(c, half, mu, pair.width)
    return 0.5 * total


def threshold_curve(eps_over_delta_sq: float, alphas: Iterable[float]) -> list[tuple[float, float]]:
    """Threshold-scheme error as a function of ``alpha`` at fixed ``eps / delta^2``.

    Evaluated with ``delta = 1``, which is no loss of generality because the
    error depends only on ``alpha eps / delta^2``.
    """
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise ValueError("need at least one alpha")
    pair = GaussianPair(eps_over_delta_sq, 1.0)
    return [(a, threshold_error(ThresholdScheme(a), pair)) for a in alphas]


def curve_to_csv(rows: list[tuple[float, float]], header=("alpha", "p_err")) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    for row in rows:
        w.writerow([format(v, ".10g") for v in row])
    return buf.getvalue()

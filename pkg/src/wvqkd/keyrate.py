"""Pieces shared by the first-order and all-orders security analyses.

Eve's conditional memories are built from relative pointer weights. At pointer
position ``x`` write ``u = gamma x / delta^2``; up to a common factor the two
branch densities are ``exp(+-u)`` and their product is ``1``. Dropping the
common factor keeps everything finite for ``alpha`` of several tens of widths,
and trace normalization removes it anyway.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .protocol import ChannelModel, ProtocolParams, bell_amplitude_signs, weak_value_table
from .qmath import DensityMatrix, check_distribution, von_neumann_entropy

POSITIVE_RATE = 1e-9
GRID_STEP = 1e-3
BISECT_TOL = 1e-6


class Regime(str, enum.Enum):
    WMA = "wma"
    EXACT = "exact"


@dataclass(frozen=True)
class SecurityReport:
    joint: np.ndarray
    qber: float
    mi: float
    holevo: float
    secret_fraction: float
    regime: Regime
    params: ProtocolParams
    eta: float
    dw_rate: float | None = None
    postselection_probability: float | None = None

    def __post_init__(self):
        joint = check_distribution(self.joint)
        if abs(self.qber - (joint[0, 1] + joint[1, 0])) > 1e-12:
            raise ValueError("qber does not match the joint table")
        if abs(self.secret_fraction - (self.mi - self.holevo)) > 1e-12:
            raise ValueError("secret fraction is not mi - holevo")

    def as_row(self) -> dict:
        return {
            "eta": self.eta,
            "regime": self.regime.value,
            "alpha": self.params.alpha,
            "gamma": self.params.gamma,
            "delta": self.params.delta,
            "qber": self.qber,
            "mi": self.mi,
            "holevo": self.holevo,
            "f_sec": self.secret_fraction,
        }


def relative_pointer_weights(x: float, gamma: float, delta: float, wma: bool) -> dict:
    """Scaled ``|xi+|^2``, ``|xi-|^2`` and the cross term at position ``x``.

    Keys are ``(+1, +1)``, ``(-1, -1)`` and ``(+1, -1)``/``(-1, +1)``.
    The all-orders cross term is ``xi+ xi-``; the first-order version replaces
    it by ``|xi(x)|^2``, larger by ``exp(gamma^2 / 2 delta^2)``.
    """
    u = gamma * x / delta**2
    m = abs(u)
    cross = math.exp(-m + (gamma**2 / (2 * delta**2) if wma else 0.0))
    return {
        (1, 1): math.exp(u - m),
        (-1, -1): math.exp(-u - m),
        (1, -1): cross,
        (-1, 1): cross,
    }


def eve_matrix(a: int, x: float, channel: ChannelModel, params: ProtocolParams, wma: bool) -> np.ndarray:
    """Unnormalized Eve memory for Alice's bit ``a`` and pointer position ``x``.

    Entry ``(i, j)`` is ``s_i s_j sqrt(l_i l_j) K(w_i, w_j)`` where ``s`` are
    the signs of ``<psi^a|Phi_i>``, ``w`` the branch weak values and ``K``
    the pointer weight table.
    """
    k = relative_pointer_weights(x, params.gamma, params.delta, wma)
    signs = bell_amplitude_signs(a)
    table = weak_value_table()
    branch = [table[(a, i)] for i in range(4)]
    amp = [signs[i] * math.sqrt(channel.lambdas[i]) for i in range(4)]
    m = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            m[i, j] = amp[i] * amp[j] * k[(branch[i], branch[j])]
    return m


def holevo_from_states(joint: np.ndarray, states: dict[tuple[int, int], DensityMatrix]) -> float:
    """Holevo quantity of Alice's bit against Eve's memory.

    ``states[(a, b)]`` is Eve's state given the key bits; Alice's bit is
    uniform and ``joint`` gives the weights within each row.
    """
    omegas = []
    for a in (0, 1):
        row = joint[a, 0] + joint[a, 1]
        m = (joint[a, 0] * states[(a, 0)].matrix + joint[a, 1] * states[(a, 1)].matrix) / row
        omegas.append(DensityMatrix.normalized(m))
    omega = DensityMatrix.normalized(0.5 * (omegas[0].matrix + omegas[1].matrix))
    chi = von_neumann_entropy(omega) - 0.5 * (von_neumann_entropy(omegas[0]) + von_neumann_entropy(omegas[1]))
    return float(min(max(chi, 0.0), 2.0))


@dataclass
class ToleranceResult:
    eta_tol: float
    grid_step: float = GRID_STEP
    bisection_iterations: int = 0
    grid: np.ndarray = field(default=None, repr=False)
    values: np.ndarray = field(default=None, repr=False)


def tolerance_search(
    secret_fraction: Callable[[float], float],
    grid_step: float = GRID_STEP,
    tol: float = BISECT_TOL,
) -> ToleranceResult:
    """Largest noise in ``[0, 1/2]`` with secret fraction above ``1e-9``.

    A uniform pre-scan locates the last positive grid point; bisection then
    refines the crossing to ``tol``.
    """
    n = int(round(0.5 / grid_step))
    grid = np.round(np.linspace(0.0, 0.5, n + 1), 12)
    values = np.array([secret_fraction(float(e)) for e in grid])
    positive = np.nonzero(values > POSITIVE_RATE)[0]
    if positive.size == 0:
        return ToleranceResult(0.0, grid_step, 0, grid, values)
    k = int(positive[-1])
    if k == n:
        return ToleranceResult(0.5, grid_step, 0, grid, values)
    lo, hi = float(grid[k]), float(grid[k + 1])
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if secret_fraction(mid) > POSITIVE_RATE:
            lo = mid
        else:
            hi = mid
        iterations += 1
    return ToleranceResult(lo, grid_step, iterations, grid, values)


def postselection_probability(density_cdf_mass: Callable[[int, float, float], float], params: ProtocolParams) -> float:
    """``1/2 sum_a sum_b`` of the pointer mass of ``P_a`` inside bin ``b``.

    ``density_cdf_mass(a, lo, hi)`` must integrate Alice-``a``'s pointer
    density over ``[lo, hi]``.
    """
    if params.bin_width is None:
        raise ValueError("postselection probability needs a bin width")
    half = 0.5 * params.bin_width
    total = 0.0
    for a in (0, 1):
        for b in (0, 1):
            c = params.alpha if b == 0 else -params.alpha
            total += density_cdf_mass(a, c - half, c + half)
    return 0.5 * total

"""Security of the protocol with the pointer coupling kept to all orders.

Each Bell branch has weak value +1 or -1, an eigenvalue of sigma, so the
coupling translates the pointer by exactly ``+-gamma`` per branch. Pointer
statistics become mixtures of two Gaussians and Eve's conditional memory is
a pure state.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .keyrate import (
    Regime,
    SecurityReport,
    ToleranceResult,
    eve_matrix,
    holevo_from_states,
    postselection_probability,
    tolerance_search,
)
from .protocol import ChannelModel, ProtocolParams, weak_value_table
from .qmath import PSD_TOL, DensityMatrix, InvalidStateError, NumericalError, mutual_information
from .security_wma import WMAArtifactWarning, secret_fraction_wma
from .weakvalues import gaussian_density, pointer_exact_shift

SIXSTATE_ALPHAS = (10.0, 20.0, 40.0, 80.0)


def _branch_weights(a: int, channel: ChannelModel) -> dict[int, float]:
    """Total Bell weight whose pointer moves by ``+gamma`` (key 1) or ``-gamma`` (key -1)."""
    table = weak_value_table()
    out = {1: 0.0, -1: 0.0}
    for i, lam in enumerate(channel.lambdas):
        out[table[(a, i)]] += lam
    return out


def pointer_density_exact(a: int, x: float, channel: ChannelModel, params: ProtocolParams) -> float:
    """Pointer density for Alice's bit ``a``: a two-Gaussian mixture."""
    w = _branch_weights(a, channel)
    plus = pointer_exact_shift(1.0, params.gamma, params.delta)
    minus = pointer_exact_shift(-1.0, params.gamma, params.delta)
    return w[1] * gaussian_density(plus, x) + w[-1] * gaussian_density(minus, x)


def joint_prob_exact(eta: float, params: ProtocolParams) -> np.ndarray:
    """Joint key-bit table with ``s = 2 gamma alpha / delta^2``.

    Agreement cells ``((1 - eta) + eta e^-s) / (2 (1 + e^-s))``, disagreement
    cells ``((1 - eta) e^-s + eta) / (2 (1 + e^-s))``.
    """
    ChannelModel.depolarizing(eta)
    r = math.exp(-params.separation_exponent)
    den = 2.0 * (1.0 + r)
    same = ((1.0 - eta) + eta * r) / den
    diff = ((1.0 - eta) * r + eta) / den
    return np.array([[same, diff], [diff, same]])


def qber_exact(eta: float, params: ProtocolParams) -> float:
    j = joint_prob_exact(eta, params)
    return float(j[0, 1] + j[1, 0])


def eve_state_exact(a: int, b: int, eta: float, params: ProtocolParams) -> DensityMatrix:
    """Eve's memory given Alice's bit ``a`` and Bob's bit ``b``.

    Evaluated at the bin centre ``x = (-1)^b alpha``. The matrix is a Gram
    matrix of a single vector, so any eigenvalue below ``-1e-10`` is a bug and
    raises :class:`NumericalError`.
    """
    if b not in (0, 1):
        raise ValueError("key bit must be 0 or 1")
    channel = ChannelModel.depolarizing(eta)
    x = params.alpha if b == 0 else -params.alpha
    m = eve_matrix(a, x, channel, params, wma=False)
    try:
        return DensityMatrix.normalized(m, psd_tol=PSD_TOL)
    except InvalidStateError as exc:
        raise NumericalError(f"all-orders Eve state is unphysical: {exc}") from exc


def _eve_states(eta: float, params: ProtocolParams) -> dict:
    return {(a, b): eve_state_exact(a, b, eta, params) for a in (0, 1) for b in (0, 1)}


def holevo_exact(eta: float, params: ProtocolParams) -> float:
    return holevo_from_states(joint_prob_exact(eta, params), _eve_states(eta, params))


def _bin_mass_exact(eta: float, params: ProtocolParams):
    w = {a: _branch_weights(a, ChannelModel.depolarizing(eta)) for a in (0, 1)}

    def mass(a: int, lo: float, hi: float) -> float:
        d, g = params.delta, params.gamma
        plus = ndtr((hi - g) / d) - ndtr((lo - g) / d)
        minus = ndtr((hi + g) / d) - ndtr((lo + g) / d)
        return float(w[a][1] * plus + w[a][-1] * minus)

    return mass


def secret_fraction_exact(eta: float, params: ProtocolParams) -> SecurityReport:
    joint = joint_prob_exact(eta, params)
    mi = mutual_information(joint)
    chi = holevo_exact(eta, params)
    f_sec = mi - chi
    omega = dw = None
    if params.bin_width is not None:
        omega = postselection_probability(_bin_mass_exact(eta, params), params)
        dw = omega * f_sec
    return SecurityReport(
        joint=joint,
        qber=float(joint[0, 1] + joint[1, 0]),
        mi=mi,
        holevo=chi,
        secret_fraction=f_sec,
        regime=Regime.EXACT,
        params=params,
        eta=float(eta),
        dw_rate=dw,
        postselection_probability=omega,
    )


def tolerance_exact(params: ProtocolParams) -> float:
    return tolerance_search_exact(params).eta_tol


def tolerance_search_exact(params: ProtocolParams) -> ToleranceResult:
    return tolerance_search(lambda eta: secret_fraction_exact(eta, params).secret_fraction)


@dataclass(frozen=True)
class SixStateLimit:
    eta: float
    alphas: tuple[float, ...]
    qbers: tuple[float, ...]
    deviations: tuple[float, ...]

    @property
    def monotone(self) -> bool:
        d = self.deviations
        return all(d[k + 1] < d[k] for k in range(len(d) - 1))


def sixstate_limit_check(eta: float, params: ProtocolParams, alphas=SIXSTATE_ALPHAS) -> SixStateLimit:
    """QBER at growing ``alpha`` and its distance from the channel noise ``eta``.

    The all-orders joint table tends to that of the six-state protocol, whose
    error rate equals ``eta``.
    """
    qbers = []
    for a in alphas:
        p = ProtocolParams(params.gamma, params.delta, float(a))
        qbers.append(qber_exact(eta, p))
    devs = tuple(abs(q - eta) for q in qbers)
    return SixStateLimit(float(eta), tuple(float(a) for a in alphas), tuple(qbers), devs)


@dataclass(frozen=True)
class ComparisonRow:
    eta: float
    f_sec_wma: float
    f_sec_exact: float

    @property
    def gap(self) -> float:
        return self.f_sec_wma - self.f_sec_exact


def wma_vs_exact_report(eta_grid, params: ProtocolParams) -> list[ComparisonRow]:
    """First-order vs. all-orders secret fraction on a noise grid."""
    rows = []
    for eta in eta_grid:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", WMAArtifactWarning)
            f_wma = secret_fraction_wma(eta, params).secret_fraction
        f_ex = secret_fraction_exact(eta, params).secret_fraction
        rows.append(ComparisonRow(float(eta), f_wma, f_ex))
    return rows

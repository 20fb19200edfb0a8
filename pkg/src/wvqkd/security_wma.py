"""Security of the protocol under the weak measurement approximation (WMA).

The pointer is assumed to move by ``gamma`` times the weak value of the mixed
state and the overlap factor between oppositely displaced pointers is set to
one. Neither step is exact, which is why the resulting key rates are too
optimistic; see :mod:`wvqkd.security_exact` for the all-orders treatment.
"""

from __future__ import annotations

import logging
import warnings

import numpy as np
from scipy.special import expit, ndtr

from .keyrate import (
    Regime,
    SecurityReport,
    ToleranceResult,
    eve_matrix,
    holevo_from_states,
    postselection_probability,
    tolerance_search,
)
from .protocol import ChannelModel, ProtocolParams, weak_value_sigma
from .qmath import DensityMatrix, hermitian_eigh, mutual_information
from .weakvalues import gaussian_density, pointer_after_wma

log = logging.getLogger(__name__)

WMA_CLIP = 1e-8


class WMAArtifactWarning(UserWarning):
    """A first-order Eve memory came out non-positive and was clipped."""


def _exponent(eta: float, params: ProtocolParams) -> float:
    return (1.0 - 2.0 * eta) * params.separation_exponent


def joint_prob_wma(eta: float, params: ProtocolParams) -> np.ndarray:
    """Joint key-bit table ``P[a, b]``; agreement cells ``1 / (2 (1 + e^-t))``."""
    ChannelModel.depolarizing(eta)
    t = _exponent(eta, params)
    same = 0.5 * float(expit(t))
    diff = 0.5 * float(expit(-t))
    return np.array([[same, diff], [diff, same]])


def qber_wma(eta: float, params: ProtocolParams) -> float:
    ChannelModel.depolarizing(eta)
    return float(expit(-_exponent(eta, params)))


def pointer_density_wma(a: int, x: float, eta: float, params: ProtocolParams) -> float:
    """Pointer density for Alice's bit ``a``: Gaussian at ``gamma <sigma^a>_w``."""
    wv = weak_value_sigma(ChannelModel.depolarizing(eta), a)
    return gaussian_density(pointer_after_wma(wv, params.gamma, params.delta), x)


def eve_state_wma(a: int, x: float, eta: float, params: ProtocolParams) -> DensityMatrix:
    """Eve's memory for Alice's bit ``a`` when the pointer is found at ``x``.

    The first-order matrix is not always positive. Negative eigenvalues are
    clipped to zero; a :class:`WMAArtifactWarning` is raised when one falls
    below ``-1e-8`` after trace normalization.
    """
    channel = ChannelModel.depolarizing(eta)
    m = eve_matrix(a, x, channel, params, wma=True)
    m = m / np.trace(m)
    vals, vecs = hermitian_eigh(m)
    if vals[-1] < -WMA_CLIP:
        warnings.warn(
            f"first-order Eve memory has eigenvalue {vals[-1]:.3e}; clipped",
            WMAArtifactWarning,
            stacklevel=2,
        )
        log.debug("WMA clip at a=%d x=%g eta=%g: min eigenvalue %.3e", a, x, eta, vals[-1])
    if vals[-1] < 0.0:
        vals = np.clip(vals, 0.0, None)
        m = (vecs * vals) @ vecs.conj().T
    return DensityMatrix.normalized(m)


def _eve_states(eta: float, params: ProtocolParams) -> dict:
    return {
        (a, b): eve_state_wma(a, params.alpha if b == 0 else -params.alpha, eta, params)
        for a in (0, 1)
        for b in (0, 1)
    }


def holevo_wma(eta: float, params: ProtocolParams) -> float:
    return holevo_from_states(joint_prob_wma(eta, params), _eve_states(eta, params))


def _bin_mass_wma(eta: float, params: ProtocolParams):
    def mass(a: int, lo: float, hi: float) -> float:
        mu = params.gamma * weak_value_sigma(ChannelModel.depolarizing(eta), a)
        d = params.delta
        return float(ndtr((hi - mu) / d) - ndtr((lo - mu) / d))

    return mass


def secret_fraction_wma(eta: float, params: ProtocolParams) -> SecurityReport:
    joint = joint_prob_wma(eta, params)
    mi = mutual_information(joint)
    chi = holevo_wma(eta, params)
    f_sec = mi - chi
    omega = dw = None
    if params.bin_width is not None:
        omega = postselection_probability(_bin_mass_wma(eta, params), params)
        dw = omega * f_sec
    return SecurityReport(
        joint=joint,
        qber=float(joint[0, 1] + joint[1, 0]),
        mi=mi,
        holevo=chi,
        secret_fraction=f_sec,
        regime=Regime.WMA,
        params=params,
        eta=float(eta),
        dw_rate=dw,
        postselection_probability=omega,
    )


def _f_sec_quiet(params: ProtocolParams):
    def f(eta: float) -> float:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", WMAArtifactWarning)
            return secret_fraction_wma(eta, params).secret_fraction

    return f


def tolerance_wma(params: ProtocolParams) -> float:
    """Largest ``eta`` with positive first-order secret fraction."""
    return tolerance_search_wma(params).eta_tol


def tolerance_search_wma(params: ProtocolParams) -> ToleranceResult:
    return tolerance_search(_f_sec_quiet(params))


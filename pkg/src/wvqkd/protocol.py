"""Entanglement-based protocol: Bell pairs, Bell-diagonal channel, post-selection.

Qubit order is Alice (x) Bob. Bell states are indexed 0..3 in code for
Phi+, Phi-, Psi+, Psi-.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qmath import DensityMatrix

SQRT_HALF = 1.0 / math.sqrt(2.0)

KET0 = np.array([1.0, 0.0], dtype=complex)
KET1 = np.array([0.0, 1.0], dtype=complex)
KET_PLUS = SQRT_HALF * np.array([1.0, 1.0], dtype=complex)
KET_MINUS = SQRT_HALF * np.array([1.0, -1.0], dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


@dataclass(frozen=True)
class ChannelModel:
    """Bell-diagonal channel weights ``lambdas`` (Phi+, Phi-, Psi+, Psi-).

    ``eta`` is the depolarizing noise level when the channel came from
    :meth:`depolarizing`, otherwise ``None``.
    """

    lambdas: tuple[float, float, float, float]
    eta: float | None = None

    def __post_init__(self):
        lam = tuple(float(x) for x in self.lambdas)
        if len(lam) != 4:
            raise ValueError("need exactly four Bell weights")
        if any(x < 0.0 for x in lam):
            raise ValueError("Bell weights must be non-negative")
        if abs(sum(lam) - 1.0) > 1e-12:
            raise ValueError(f"Bell weights sum to {sum(lam)}, not 1")
        object.__setattr__(self, "lambdas", lam)

    @classmethod
    def depolarizing(cls, eta: float) -> "ChannelModel":
        eta = float(eta)
        if not 0.0 <= eta <= 0.5:
            raise ValueError("depolarizing noise must lie in [0, 1/2]")
        return cls((1.0 - 1.5 * eta, eta / 2, eta / 2, eta / 2), eta=eta)

    @property
    def is_depolarizing(self) -> bool:
        if self.eta is None:
            return False
        l1, l2, l3, l4 = self.lambdas
        return abs(l1 - (1 - 1.5 * self.eta)) < 1e-12 and max(abs(l - self.eta / 2) for l in (l2, l3, l4)) < 1e-12


@dataclass(frozen=True)
class ProtocolParams:
    """Pointer coupling ``gamma``, pointer width ``delta``, bin centre ``alpha``.

    ``bin_width`` is optional; it is only needed for absolute acceptance
    probabilities (Devetak-Winter rate, Monte Carlo binning).
    """

    gamma: float
    delta: float = 1.0
    alpha: float = 0.0
    bin_width: float | None = None

    def __post_init__(self):
        if self.gamma < 0.0:
            raise ValueError("gamma must be non-negative")
        if not self.delta > 0.0:
            raise ValueError("delta must be positive")
        if self.alpha < 0.0:
            raise ValueError("alpha must be non-negative")
        if self.bin_width is not None:
            if not self.bin_width > 0.0:
                raise ValueError("bin_width must be positive")
            if self.alpha > 0.0 and self.bin_width >= 2.0 * self.alpha:
                raise ValueError("bins around +alpha and -alpha overlap (need w < 2 alpha)")

    @property
    def separation_exponent(self) -> float:
        """``2 gamma alpha / delta^2``, the log-likelihood ratio between the two bins."""
        return 2.0 * self.gamma * self.alpha / self.delta**2


def bell_states() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Phi+, Phi-, Psi+, Psi- in the computational basis of Alice (x) Bob."""
    phi_p = SQRT_HALF * np.array([1, 0, 0, 1], dtype=complex)
    phi_m = SQRT_HALF * np.array([1, 0, 0, -1], dtype=complex)
    psi_p = SQRT_HALF * np.array([0, 1, 1, 0], dtype=complex)
    psi_m = SQRT_HALF * np.array([0, 1, -1, 0], dtype=complex)
    return phi_p, phi_m, psi_p, psi_m


def rho_ab(channel: ChannelModel) -> DensityMatrix:
    m = np.zeros((4, 4), dtype=complex)
    for lam, b in zip(channel.lambdas, bell_states()):
        m += lam * np.outer(b, b.conj())
    return DensityMatrix(m)


def postselection_state(a: int) -> np.ndarray:
    """``|a> (x) |+>``: Alice's outcome ``a`` and Bob's successful post-selection."""
    if a not in (0, 1):
        raise ValueError("key bit must be 0 or 1")
    return np.kron(KET0 if a == 0 else KET1, KET_PLUS)


def sigma_observable() -> np.ndarray:
    """``1 (x) sigma_z``: Bob's weakly measured observable."""
    return np.kron(np.eye(2), SIGMA_Z)


# per-branch weak values <psi^a| sigma |Phi_i> / <psi^a|Phi_i>
_WEAK_VALUE_SIGNS = {
    (0, 0): 1, (0, 1): 1, (0, 2): -1, (0, 3): -1,
    (1, 0): -1, (1, 1): -1, (1, 2): 1, (1, 3): 1,
}


def weak_value_table() -> dict[tuple[int, int], int]:
    """Map ``(a, i)`` to the weak value of sigma for Bell branch ``i`` (0-based)."""
    return dict(_WEAK_VALUE_SIGNS)


def bell_amplitude_signs(a: int) -> tuple[int, int, int, int]:
    """Signs of ``<psi^a|Phi_i>``; every overlap has magnitude 1/2."""
    return (1, 1, 1, 1) if a == 0 else (1, -1, 1, -1)


def weak_value_sigma(channel: ChannelModel, a: int) -> float:
    """Weak value of sigma for the depolarized pair: ``(-1)^a (1 - 2 eta)``."""
    if not channel.is_depolarizing:
        raise ValueError("closed-form weak value requires a depolarizing channel")
    if a not in (0, 1):
        raise ValueError("key bit must be 0 or 1")
    return (-1) ** a * (1.0 - 2.0 * channel.eta)

"""Weak values and Gaussian pointer states.

Pointers are kept in parametric form (center, width, phase rate); nothing in
this module touches a position grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .qmath import (
    HERMITIAN_TOL,
    DensityMatrix,
    DimensionError,
    InvalidStateError,
    as_matrix,
    hermitian_eigh,
    state_vector,
)

OVERLAP_TOL = 1e-14


class OrthogonalPostselectionError(ZeroDivisionError):
    """Post-selection has (numerically) zero probability."""


class NonEigenvalueShiftWarning(UserWarning):
    """An all-orders pointer shift was requested for a weak value other than +-1."""


def _observable(obs, dim: int) -> np.ndarray:
    a = as_matrix(obs)
    if a.shape != (dim, dim):
        raise DimensionError(f"observable shape {a.shape} does not match state dim {dim}")
    if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL:
        raise InvalidStateError("observable is not Hermitian")
    return a


def weak_value_pure(obs, pre, post) -> complex:
    """``<post|A|pre> / <post|pre>`` for pure pre- and post-selection.

    >>> import numpy as np
    >>> z = np.diag([1, -1])
    >>> wv = weak_value_pure(z, [0.6, 0.8], np.array([1, 1]) / np.sqrt(2))
    >>> round(wv.real * 7, 12), wv.imag
    (-1.0, 0.0)
    """
    psi = state_vector(pre)
    phi = state_vector(post)
    if psi.shape != phi.shape:
        raise DimensionError("pre- and post-selected states differ in dimension")
    a = _observable(obs, psi.size)
    den = np.vdot(phi, psi)
    if abs(den) <= OVERLAP_TOL:
        raise OrthogonalPostselectionError("pre- and post-selection are orthogonal")
    return complex(np.vdot(phi, a @ psi) / den)


def _density(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    return DensityMatrix(rho).matrix


def weak_value_mixed(obs, pre, post) -> complex:
    """``<post|A rho|post> / <post|rho|post>`` for a mixed pre-selection."""
    rho = _density(pre)
    phi = state_vector(post)
    if rho.shape[0] != phi.size:
        raise DimensionError("density matrix and post-selection differ in dimension")
    a = _observable(obs, phi.size)
    den = np.vdot(phi, rho @ phi)
    if abs(den) <= OVERLAP_TOL:
        raise OrthogonalPostselectionError("post-selection has zero probability")
    return complex(np.vdot(phi, a @ rho @ phi) / den)


# tighter than the solver default: eigenvector error feeds straight into the weak value
SPECTRAL_TOL = 1e-15


def _spectral_ensemble(rho) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = hermitian_eigh(_density(rho), tol=SPECTRAL_TOL)
    return np.clip(vals, 0.0, None), vecs


def purify(rho) -> np.ndarray:
    """Purification ``sum_i sqrt(p_i) |psi_i> (x) |e_i>`` from the eigenbasis of rho.

    The ancilla has the same dimension as the system and ``|e_i>`` is its
    computational basis. Ordering of the tensor product is system (x) ancilla.
    """
    p, vecs = _spectral_ensemble(rho)
    d = p.size
    psi = np.zeros(d * d, dtype=complex)
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        psi += math.sqrt(p[i]) * np.kron(vecs[:, i], e)
    return psi / np.linalg.norm(psi)


def postselected_purification_weak_value(obs, rho, post) -> complex:
    """Weak value of ``A (x) 1`` between the purified pre-selection and the
    post-selected joint state.

    The post-selected state is ``N |phi> (x) sum_i sqrt(p_i) <phi|psi_i> |e_i>``
    with ``N`` computed explicitly. Agrees with :func:`weak_value_mixed`.
    """
    phi = state_vector(post)
    p, vecs = _spectral_ensemble(rho)
    d = p.size
    if phi.size != d:
        raise DimensionError("density matrix and post-selection differ in dimension")
    a = _observable(obs, d)

    big_psi = purify(rho)
    ancilla = np.sqrt(p) * (vecs.conj().T @ phi).conj()
    # ancilla[i] = sqrt(p_i) <phi|psi_i>
    nrm = np.linalg.norm(ancilla)
    if nrm <= OVERLAP_TOL:
        raise OrthogonalPostselectionError("post-selection has zero probability")
    big_phi = np.kron(phi, ancilla / nrm)

    den = np.vdot(big_phi, big_psi)
    if abs(den) <= OVERLAP_TOL:
        raise OrthogonalPostselectionError("post-selection has zero probability")
    num = np.vdot(big_phi, np.kron(a, np.eye(d)) @ big_psi)
    return complex(num / den)


@dataclass(frozen=True)
class PointerWavefunction:
    """Gaussian pointer ``(2 pi d^2)^-1/4 exp(i k x) exp(-(x - c)^2 / 4 d^2)``."""

    center: float = 0.0
    width: float = 1.0
    phase_rate: float = 0.0

    def __post_init__(self):
        if not self.width > 0.0:
            raise ValueError("pointer width must be positive")

    def amplitude(self, x):
        x = np.asarray(x, dtype=float)
        d = self.width
        env = (2.0 * math.pi * d * d) ** -0.25 * np.exp(-((x - self.center) ** 2) / (4.0 * d * d))
        if self.phase_rate == 0.0:
            return env
        return env * np.exp(1j * self.phase_rate * x)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        d = self.width
        return (2.0 * math.pi * d * d) ** -0.5 * np.exp(-((x - self.center) ** 2) / (2.0 * d * d))


def pointer_after_wma(wv: complex, gamma: float, delta: float) -> PointerWavefunction:
    """First-order pointer: shifted by ``gamma Re(wv)``, phase rate ``gamma Im(wv)``."""
    wv = complex(wv)
    return PointerWavefunction(gamma * wv.real, delta, gamma * wv.imag)


def pointer_exact_shift(wv_real: float, gamma: float, delta: float) -> PointerWavefunction:
    """All-orders pointer for a branch whose weak value is an eigenvalue.

    Exact only when ``wv_real`` is +1 or -1 (translation by ``gamma wv_real``);
    other values are accepted but raise :class:`NonEigenvalueShiftWarning`.
    """
    if abs(abs(wv_real) - 1.0) > 1e-12:
        warnings.warn(
            f"pointer shift for weak value {wv_real} is not exact beyond first order",
            NonEigenvalueShiftWarning,
            stacklevel=2,
        )
    return PointerWavefunction(gamma * float(wv_real), delta, 0.0)


def gaussian_density(p: PointerWavefunction, x):
    """``|xi(x)|^2``; the phase rate drops out."""
    out = p.density(x)
    return float(out) if np.ndim(out) == 0 else out


def gaussian_cross_term(a: PointerWavefunction, b: PointerWavefunction, x, wma: bool = False):
    """Product ``xi_a(x) xi_b(x)`` of two real Gaussians of equal width.

    With ``wma=True`` the overlap suppression factor ``exp(-(c_a - c_b)^2 / 8 d^2)``
    is dropped, i.e. the product is replaced by the unshifted density centred
    midway between the two pointers.
    """
    if abs(a.width - b.width) > 1e-15 * max(a.width, b.width):
        raise ValueError("cross term requires equal pointer widths")
    if a.phase_rate != 0.0 or b.phase_rate != 0.0:
        raise ValueError("cross term requires real pointers")
    if wma:
        mid = PointerWavefunction(0.5 * (a.center + b.center), a.width)
        out = mid.density(x)
    else:
        out = a.amplitude(x) * b.amplitude(x)
    return float(out) if np.ndim(out) == 0 else out

"""Dense complex linear algebra and entropy kernels for small matrices.

Everything here works on plain ``numpy`` arrays. The only validated type is
:class:`DensityMatrix`, which checks Hermiticity, unit trace and positivity
when it is built and caches its spectrum.

Eigenvalues come from a cyclic complex Jacobi solver rather than LAPACK:
matrices never exceed dimension 8 and Jacobi gives eigenvectors that are
orthonormal to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
NORM_TOL = 1e-10


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class InvalidStateError(ValueError):
    """A matrix or vector violates a quantum-state invariant."""


class InvalidDistributionError(ValueError):
    """A probability table is negative or not normalized."""


class NumericalError(ArithmeticError):
    """An iterative routine failed to converge or produced an unphysical result."""


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains NaN or Inf")
    return a


def _square(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def add(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"cannot add {a.shape} and {b.shape}")
    return a + b


def scale(c: complex, a) -> np.ndarray:
    return complex(c) * as_matrix(a)


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def tensor(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def trace(a) -> complex:
    return complex(np.trace(_square(a)))


def partial_trace(m, dims: Sequence[int], trace_out: int | Sequence[int]) -> np.ndarray:
    """Trace out one or more tensor factors.

    Parameters
    ----------
    m : array_like
        Square matrix on ``H_0 (x) H_1 (x) ... (x) H_{k-1}``.
    dims : sequence of int
        Dimension of each factor, in order.
    trace_out : int or sequence of int
        Indices of the factors to remove.

    Returns
    -------
    numpy.ndarray
        Reduced matrix on the remaining factors, in their original order.
    """
    a = _square(m)
    dims = [int(d) for d in dims]
    total = math.prod(dims)
    if total != a.shape[0]:
        raise DimensionError(f"subsystem dims {dims} do not factor dimension {a.shape[0]}")
    if isinstance(trace_out, (int, np.integer)):
        trace_out = [int(trace_out)]
    drop = sorted(set(int(i) for i in trace_out))
    if any(i < 0 or i >= len(dims) for i in drop):
        raise DimensionError(f"factor index out of range: {drop}")

    k = len(dims)
    t = a.reshape(dims + dims)
    # trace highest index first so remaining axis numbers stay valid
    for n_removed, i in enumerate(sorted(drop, reverse=True)):
        cur = k - n_removed
        t = np.trace(t, axis1=i, axis2=i + cur)
    keep = [d for i, d in enumerate(dims) if i not in drop]
    kd = math.prod(keep) if keep else 1
    return t.reshape(kd, kd)


def hermitian_eigh(
    m, tol: float = 1e-12, max_sweeps: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi.

    Returns ``(values, vectors)`` with eigenvalues sorted in descending order
    and eigenvectors as the matching columns of ``vectors``.

    Each rotation first removes the phase of the pivot ``a[p, q]`` and then
    applies the classical real Jacobi rotation, so the combined 2x2 unitary is
    ``[[c, s], [-s e*, c e*]]`` with ``e = a[p, q] / |a[p, q]|``.
    """
    a = _square(m).copy()
    n = a.shape[0]
    if np.max(np.abs(a - a.conj().T), initial=0.0) > HERMITIAN_TOL * max(1.0, np.max(np.abs(a))):
        raise InvalidStateError("matrix is not Hermitian")
    a = 0.5 * (a + a.conj().T)
    threshold = tol * max(1.0, float(np.linalg.norm(a)))
    # plain Python lists: for the 4x4 matrices used here numpy call overhead dominates
    A = a.tolist()
    V = [[1.0 + 0j if i == j else 0j for j in range(n)] for i in range(n)]

    def off_max() -> float:
        return max((abs(A[i][j]) for i in range(n) for j in range(n) if i != j), default=0.0)

    for _ in range(max_sweeps):
        if off_max() < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                g = A[p][q]
                r = abs(g)
                if r < 1e-300:
                    continue
                e = g / r
                ec = e.conjugate()
                theta = (A[q][q].real - A[p][p].real) / (2.0 * r)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # columns: A <- A U, then rows: A <- U^H A
                for row in A:
                    x, y = row[p], row[q]
                    row[p] = c * x - s * ec * y
                    row[q] = s * x + c * ec * y
                rp, rq = A[p], A[q]
                for k in range(n):
                    x, y = rp[k], rq[k]
                    rp[k] = c * x - s * e * y
                    rq[k] = s * x + c * e * y
                rp[q] = rq[p] = 0j
                rp[p] = complex(rp[p].real)
                rq[q] = complex(rq[q].real)
                for row in V:
                    x, y = row[p], row[q]
                    row[p] = c * x - s * ec * y
                    row[q] = s * x + c * ec * y
    else:
        if off_max() >= threshold:
            raise NumericalError(f"Jacobi did not converge in {max_sweeps} sweeps")

    a = np.array(A, dtype=complex)
    v = np.array(V, dtype=complex)
    vals = np.real(np.diag(a))
    order = np.argsort(-vals, kind="stable")
    return vals[order], v[:, order]


def hermitian_eigenvalues(m) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, sorted descending."""
    if isinstance(m, DensityMatrix):
        return m.eigenvalues.copy()
    return hermitian_eigh(m)[0]


@dataclass(frozen=True)
class DensityMatrix:
    """Validated density operator.

    Construction fails with :class:`InvalidStateError` unless the matrix is
    Hermitian, has unit trace and no eigenvalue below ``-psd_tol``.
    """

    matrix: np.ndarray
    psd_tol: float = PSD_TOL
    eigenvalues: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = _square(self.matrix)
        if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL:
            raise InvalidStateError("density matrix is not Hermitian")
        tr = np.trace(a)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"density matrix trace is {tr}, not 1")
        vals = hermitian_eigh(a)[0]
        if vals[-1] < -self.psd_tol:
            raise InvalidStateError(f"density matrix has eigenvalue {vals[-1]:.3e}")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "eigenvalues", vals)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_pure(cls, psi) -> "DensityMatrix":
        v = state_vector(psi)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def normalized(cls, m, psd_tol: float = PSD_TOL) -> "DensityMatrix":
        """Build from an unnormalized positive matrix by dividing by its trace."""
        a = _square(m)
        a = 0.5 * (a + a.conj().T)
        tr = np.trace(a).real
        if not tr > 0.0:
            raise InvalidStateError("matrix has non-positive trace")
        return cls(a / tr, psd_tol=psd_tol)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def state_vector(v) -> np.ndarray:
    """Return ``v`` as a complex 1-d array, checking it has unit norm."""
    a = np.asarray(v, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise ValueError("state vector contains NaN or Inf")
    nrm = np.linalg.norm(a)
    if abs(nrm - 1.0) > NORM_TOL:
        raise InvalidStateError(f"state vector norm is {nrm}, not 1")
    return a


def entropy_from_spectrum(eigenvalues) -> float:
    """Shannon entropy in bits of an eigenvalue list, ``0 log 0 = 0``."""
    lam = np.asarray(eigenvalues, dtype=float)
    if np.any(lam < -PSD_TOL):
        raise InvalidStateError(f"eigenvalue {lam.min():.3e} below clipping window")
    lam = lam[lam > 0.0]
    return float(max(0.0, -np.sum(lam * np.log2(lam))))


def von_neumann_entropy(rho) -> float:
    """Von Neumann entropy in bits.

    Eigenvalues in ``[-1e-10, 0)`` are treated as zero; anything more
    negative raises :class:`InvalidStateError`.

    >>> von_neumann_entropy(DensityMatrix(np.eye(2) / 2))
    1.0
    """
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho)
    s = entropy_from_spectrum(rho.eigenvalues)
    return min(s, math.log2(rho.dim))


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def check_distribution(p, tol: float = 1e-10) -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(a)):
        raise InvalidDistributionError("distribution contains NaN or Inf")
    if np.any(a < 0.0):
        raise InvalidDistributionError("distribution has a negative entry")
    if abs(a.sum() - 1.0) > tol:
        raise InvalidDistributionError(f"distribution sums to {a.sum()}, not 1")
    return a


def mutual_information(p) -> float:
    """Mutual information in bits of a 2x2 joint distribution ``p[a, b]``."""
    joint = check_distribution(p)
    if joint.shape != (2, 2):
        raise DimensionError(f"expected a 2x2 table, got {joint.shape}")
    pa = joint.sum(axis=1)
    pb = joint.sum(axis=0)
    mi = 0.0
    for a in range(2):
        for b in range(2):
            pab = joint[a, b]
            if pab > 0.0:
                mi += pab * math.log2(pab / (pa[a] * pb[b]))
    return float(min(max(mi, 0.0), 1.0))

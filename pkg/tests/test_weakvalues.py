import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from conftest import random_density, random_hermitian, random_ket
from wvqkd.weakvalues import (
    NonEigenvalueShiftWarning,
    OrthogonalPostselectionError,
    PointerWavefunction,
    gaussian_cross_term,
    gaussian_density,
    pointer_after_wma,
    pointer_exact_shift,
    postselected_purification_weak_value,
    purify,
    weak_value_mixed,
    weak_value_pure,
)
from wvqkd.qmath import DimensionError, partial_trace

Z = np.diag([1.0, -1.0])


def test_minus_one_seventh():
    wv = weak_value_pure(Z, [0.6, 0.8], np.array([1, 1]) / math.sqrt(2))
    assert wv == pytest.approx(-1 / 7, abs=1e-15)


def test_anomalous_weak_value_exceeds_spectrum():
    pre = np.array([1.0, 1.0]) / math.sqrt(2)
    post = np.array([1.0, -0.8]) / math.hypot(1.0, 0.8)
    # nearly orthogonal selections: (2 - 0.2) / 0.2
    assert weak_value_pure(Z, pre, post) == pytest.approx(9.0)


def test_orthogonal_postselection_raises():
    with pytest.raises(OrthogonalPostselectionError):
        weak_value_pure(Z, [1, 0], [0, 1])
    with pytest.raises(OrthogonalPostselectionError):
        weak_value_mixed(Z, np.diag([1.0, 0.0]), [0, 1])


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        weak_value_pure(Z, [1, 0], [1, 0, 0, 0])


def test_eigenstate_preselection_gives_eigenvalue():
    assert weak_value_pure(Z, [0, 1], np.array([1, 1j]) / math.sqrt(2)) == pytest.approx(-1.0)


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4]))
def test_mixed_reduces_to_pure(seed, d):
    rng = np.random.default_rng(seed)
    psi, phi, a = random_ket(rng, d), random_ket(rng, d), random_hermitian(rng, d)
    rho = np.outer(psi, psi.conj())
    assert weak_value_mixed(a, rho, phi) == pytest.approx(weak_value_pure(a, psi, phi), rel=1e-9, abs=1e-9)


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 4]))
def test_purification_reduces_to_rho(seed, d):
    rho = random_density(np.random.default_rng(seed), d)
    big = purify(rho)
    assert np.allclose(partial_trace(np.outer(big, big.conj()), [d, d], 1), rho, atol=1e-12)


def test_purification_equivalence_100_instances(rng):
    for k in range(100):
        d = 2 if k % 2 else 4
        rho = random_density(rng, d)
        a = random_hermitian(rng, d)
        phi = random_ket(rng, d)
        lhs = weak_value_mixed(a, rho, phi)
        rhs = postselected_purification_weak_value(a, rho, phi)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_purification_equivalence_rank_deficient(rng):
    rho = random_density(rng, 4, rank=2)
    a, phi = random_hermitian(rng, 4), random_ket(rng, 4)
    assert postselected_purification_weak_value(a, rho, phi) == pytest.approx(weak_value_mixed(a, rho, phi), abs=1e-11)


@pytest.mark.parametrize("wv", [0.3, -1.0, 2.5 + 0.7j, -0.2 - 3j])
def test_wma_pointer_normalized_and_centred(wv):
    p = pointer_after_wma(wv, 0.1, 1.3)
    norm, _ = quad(lambda x: gaussian_density(p, x), -30, 30)
    mean, _ = quad(lambda x: x * gaussian_density(p, x), -30, 30)
    assert norm == pytest.approx(1.0, abs=1e-10)
    assert mean == pytest.approx(0.1 * complex(wv).real, abs=1e-10)


def test_amplitude_squared_is_density():
    p = pointer_after_wma(0.4 + 2j, 0.5, 0.7)
    x = np.linspace(-3, 3, 41)
    assert np.allclose(np.abs(p.amplitude(x)) ** 2, p.density(x))


def test_exact_shift_warns_off_spectrum():
    with pytest.warns(NonEigenvalueShiftWarning):
        pointer_exact_shift(0.5, 0.1, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert pointer_exact_shift(-1.0, 0.2, 1.0).center == pytest.approx(-0.2)


def test_cross_term_all_orders_vs_first_order():
    g, d = 0.3, 1.0
    plus, minus = PointerWavefunction(g, d), PointerWavefunction(-g, d)
    x = np.linspace(-2, 2, 9)
    exact = gaussian_cross_term(plus, minus, x)
    assert np.allclose(exact, plus.amplitude(x) * minus.amplitude(x))
    first = gaussian_cross_term(plus, minus, x, wma=True)
    assert np.allclose(first / exact, math.exp(g**2 / (2 * d * d)))


def test_pointer_rejects_bad_width():
    with pytest.raises(ValueError):
        PointerWavefunction(0.0, 0.0)


@pytest.mark.parametrize("wv", [1.0, -1.0])
def test_exact_and_first_order_pointers_agree_on_eigenvalues(wv):
    assert pointer_exact_shift(wv, 0.3, 1.1) == pointer_after_wma(wv, 0.3, 1.1)

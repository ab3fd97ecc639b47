"""Numerical primitives: seeded RNG, Hermitian products, HPD solves, sampling."""

import numpy as np
import pytest

from rkmimo.core import (
    hermitian_dot,
    make_rng,
    sample_categorical,
    sample_complex_gaussian,
    solve_hpd,
)


def test_make_rng_deterministic_per_key():
    assert np.array_equal(make_rng(7).random(5), make_rng(7).random(5))
    assert not np.array_equal(make_rng(7).random(5), make_rng(8).random(5))


def test_make_rng_tuple_keys_are_distinct_streams():
    # SeedSequence zero-pads its entropy, so stream tags must be non-zero to
    # separate (key, tag) from the bare key; the simulator's tags start at 1
    a = make_rng((7, 1)).random(4)
    assert not np.array_equal(a, make_rng(7).random(4))
    assert not np.array_equal(a, make_rng((7, 2)).random(4))
    assert not np.array_equal(a, make_rng((1, 7)).random(4))
    assert np.array_equal(a, make_rng((7, 1)).random(4))


def test_make_rng_accepts_seed_sequence():
    a = make_rng(np.random.SeedSequence(5)).random(3)
    b = make_rng(np.random.SeedSequence(5)).random(3)
    assert np.array_equal(a, b)


def test_hermitian_dot_matches_explicit_sum():
    rng = make_rng(11)
    a = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    b = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    ref = complex(np.sum(np.conj(a) * b))
    assert hermitian_dot(a, b) == pytest.approx(ref, rel=1e-13)
    # conjugation sits on the first argument
    assert hermitian_dot(a, b) == pytest.approx(np.conj(hermitian_dot(b, a)), rel=1e-13)


def test_hermitian_dot_support_equals_dense_on_supported_vectors():
    rng = make_rng(12)
    sup = np.array([1, 4, 7], dtype=np.int64)
    a = np.zeros(10, dtype=np.complex128)
    a[sup] = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    b = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    ref = complex(np.sum(np.conj(a[sup]) * b[sup]))
    assert hermitian_dot(a, b, sup) == pytest.approx(ref, rel=1e-13)
    assert hermitian_dot(a, b, sup) == pytest.approx(hermitian_dot(a, b), rel=1e-13)


def test_hermitian_dot_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        hermitian_dot(np.zeros(3, complex), np.zeros(4, complex))


def test_solve_hpd_residual_is_small():
    rng = make_rng(13)
    n = 12
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = x @ x.conj().T + np.eye(n)
    b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    sol = solve_hpd(a, b)
    assert np.linalg.norm(a @ sol - b) <= 1e-10 * np.linalg.norm(b)


def test_solve_hpd_rejects_non_hermitian():
    a = np.array([[2.0, 1.0], [0.5, 2.0]], dtype=np.complex128)
    with pytest.raises(ValueError):
        solve_hpd(a, np.ones(2, dtype=np.complex128))


def test_solve_hpd_propagates_indefinite_failure():
    a = np.diag([1.0, -1.0]).astype(np.complex128)
    with pytest.raises(np.linalg.LinAlgError):
        solve_hpd(a, np.ones(2, dtype=np.complex128))


def test_solve_hpd_rejects_bad_shapes():
    with pytest.raises(ValueError):
        solve_hpd(np.ones((2, 3), complex), np.ones(2, complex))
    with pytest.raises(ValueError):
        solve_hpd(np.eye(3, dtype=complex), np.ones(2, complex))


def test_sample_categorical_frequencies_match_probabilities():
    p = np.array([0.2, 0.3, 0.5])
    rng = make_rng(14)
    n = 20000
    draws = np.array([sample_categorical(p, rng) for _ in range(n)])
    freq = np.bincount(draws, minlength=3) / n
    # 4 sigma of a Bernoulli proportion at n = 20000 is under 0.015
    assert np.all(np.abs(freq - p) < 0.015)


def test_sample_categorical_deterministic_and_skips_zero_mass():
    p = np.array([0.5, 0.0, 0.5])
    a = [sample_categorical(p, make_rng((15, i))) for i in range(200)]
    b = [sample_categorical(p, make_rng((15, i))) for i in range(200)]
    assert a == b
    assert 1 not in a
    assert {0, 2} == set(a)


def test_sample_categorical_validates_input():
    rng = make_rng(16)
    with pytest.raises(ValueError):
        sample_categorical(np.array([0.5, -0.1, 0.6]), rng)
    with pytest.raises(ValueError):
        sample_categorical(np.array([0.4, 0.4]), rng)
    with pytest.raises(ValueError):
        sample_categorical(np.array([]), rng)


def test_sample_complex_gaussian_layout_and_moments():
    n = 200_000
    z = sample_complex_gaussian(n, make_rng(17))
    # the real block is drawn before the imaginary block from the same stream
    ref = make_rng(17)
    re = ref.standard_normal(n)
    im = ref.standard_normal(n)
    assert np.array_equal(z, (re + 1j * im) / np.sqrt(2.0))
    assert abs(np.mean(z)) < 5.0 / np.sqrt(n)
    assert np.var(z.real) == pytest.approx(0.5, rel=0.02)
    assert np.var(z.imag) == pytest.approx(0.5, rel=0.02)
    assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, rel=0.02)


def test_sample_complex_gaussian_rejects_bad_size():
    with pytest.raises(ValueError):
        sample_complex_gaussian(0, make_rng(18))

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jitterless.errors import InvalidInputError
from jitterless.spline import KnotSeries, eval_second_difference_energy, fit

from oracles import barry_goldman, uniform_spline_exact

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_constant_knots_reproduced():
    s = fit(([0, 1, 2], [5, 5, 5]))
    assert np.all(s(np.linspace(0, 2, 41)) == 5.0)


def test_affine_knots_midpoint():
    s = fit(([0, 1, 2, 3], [0, 1, 2, 3]))
    assert s(1.5) == 1.5


def test_midpoint_basis_value():
    assert barry_goldman(0, 1, 2, 0, Fraction(1, 2)) == Fraction(27, 16)
    s = fit(([0, 1, 2, 3], [0, 1, 2, 0]))
    assert abs(s(1.5) - 27 / 16) <= 1e-15


def test_eval_at_knot():
    s = fit(([0, 2, 4], [0, 7, 3]))
    assert s(2) == 7.0


def test_linear_extrapolation_of_affine_data():
    s = fit(([0, 1, 2], [0, 2, 4]))
    assert abs(s(5) - 10) < 1e-12
    assert abs(s(-3) + 6) < 1e-12


@pytest.mark.parametrize("t", ["0.25", "1.3", "2.25", "2.9", "-1.5", "4.75"])
def test_matches_segment_polynomial_oracle(t):
    values = [0, 1, 2, 0]
    s = fit((np.arange(4), values))
    expected = float(uniform_spline_exact(values, Fraction(t)))
    assert abs(s(float(Fraction(t))) - expected) < 1e-14


def test_vector_valued_knots_match_columnwise():
    rng = np.random.default_rng(3)
    vals = rng.normal(size=(7, 4))
    t = np.linspace(-2, 8, 57)
    joint = fit((np.arange(7) * 2.0, vals))(t)
    for d in range(4):
        np.testing.assert_array_equal(joint[:, d], fit((np.arange(7) * 2.0, vals[:, d]))(t))


@pytest.mark.parametrize(
    "ts, vs",
    [([0.0], [1.0]), ([0, 0, 1], [1, 2, 3]), ([0, 2, 1], [1, 2, 3]), ([0, 1], [1, 2, 3])],
)
def test_invalid_knots(ts, vs):
    with pytest.raises(InvalidInputError):
        KnotSeries(ts, vs)


def test_non_finite_parameter():
    s = fit(([0, 1], [0, 1]))
    with pytest.raises(InvalidInputError):
        s(float("nan"))
    with pytest.raises(InvalidInputError):
        s([0.0, np.inf])


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=2, max_size=12), st.floats(0.1, 5), st.floats(-10, 10))
def test_interpolation_is_exact(values, spacing, origin):
    ts = origin + spacing * np.arange(len(values))
    s = fit((ts, values))
    assert np.all(s(ts) == np.asarray(values, dtype=float))


@settings(max_examples=60, deadline=None)
@given(finite, finite, st.integers(2, 12))
def test_affine_reproduction(a, b, n):
    ts = np.arange(n, dtype=float)
    s = fit((ts, a * ts + b))
    t = np.linspace(-3, n + 2, 97)
    scale = max(1.0, abs(a), abs(b))
    assert np.max(np.abs(s(t) - (a * t + b))) < 1e-12 * scale * (n + 3)


def test_affine_reproduction_unit_scale():
    ts = np.arange(10, dtype=float)
    s = fit((ts, 0.7 * ts - 1.3))
    t = np.linspace(-5, 15, 201)
    assert np.max(np.abs(s(t) - (0.7 * t - 1.3))) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(finite, min_size=3, max_size=10))
def test_c1_at_interior_knots(values):
    s = fit((np.arange(len(values)), values))
    h = 1e-6
    scale = max(1.0, max(abs(v) for v in values))
    for k in range(1, len(values) - 1):
        left = (s(k) - s(k - h)) / h
        right = (s(k + h) - s(k)) / h
        # one-sided quotients carry O(h * f'') truncation on top of rounding
        assert abs(left - right) < 1e-6 * scale * 1e3


def test_c1_at_interior_knots_central_differences():
    rng = np.random.default_rng(11)
    values = rng.normal(size=9)
    s = fit((np.arange(9), values))
    h = 1e-6
    for k in range(1, 8):
        # derivative of each neighbouring segment, evaluated at the shared knot
        left = (s(k - h / 2) - s(k - 3 * h / 2)) / h
        right = (s(k + 3 * h / 2) - s(k + h / 2)) / h
        assert abs(left - right) < 1e-5
        assert abs(s.tangents[k] - (s(k + h) - s(k - h)) / (2 * h)) < 1e-6


def test_locality():
    base = np.array([0.3, -1.0, 2.0, 0.5, 1.5, -0.7, 0.0, 1.1, 0.9, 2.2])
    bumped = base.copy()
    j = 5
    bumped[j] += 3.0
    t = np.linspace(-2, 11, 521)
    a, b = fit((np.arange(10), base))(t), fit((np.arange(10), bumped))(t)
    changed = t[a != b]
    assert changed.min() > j - 2 and changed.max() < j + 2


def test_locality_near_endpoint_reaches_extrapolation():
    base = np.arange(8, dtype=float)
    bumped = base.copy()
    bumped[0] += 1.0
    a, b = fit((np.arange(8), base)), fit((np.arange(8), bumped))
    assert a(-2.0) != b(-2.0)
    assert a(3.5) == b(3.5)


def test_second_difference_energy():
    affine = fit((np.arange(10), 2 * np.arange(10) + 1))
    assert eval_second_difference_energy(affine, np.arange(10)) < 1e-24
    const = fit(([0, 5], [3, 3]))
    assert eval_second_difference_energy(const, np.arange(6)) == 0.0

    s = fit((np.arange(6), np.arange(6) ** 2))
    samples = np.arange(-1, 8)
    y = [s(float(x)) for x in samples]
    d2 = [y[i + 1] - 2 * y[i] + y[i - 1] for i in range(1, len(y) - 1)]
    expected = sum(d * d for d in d2) / len(d2)
    assert abs(eval_second_difference_energy(s, samples) - expected) < 1e-12


def test_second_difference_energy_needs_three_samples():
    s = fit(([0, 1], [0, 1]))
    with pytest.raises(InvalidInputError):
        eval_second_difference_energy(s, [0, 1])
    with pytest.raises(InvalidInputError):
        eval_second_difference_energy(s, [0, 2, 1])

import math

import numpy as np
import pytest

from uic import maps
from uic.certificates import (
    UICCertificate, certify_iterate_contraction, derivative_product_bound, example1_entry_index,
    example1_pair_index, example2_pair_index, example2_self_index, example3_pair_index,
    example3_self_index, example3_slice_width,
)
from uic.errors import DomainError, EqualPoints, NotSelfMap
from uic.metric import L1Point


def test_certificate_factor_range():
    for k in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(DomainError):
            UICCertificate(k, None, None)


def test_grid_max_on_core_interval():
    report = derivative_product_bound(maps.ex1_array, maps.ex1_derivative_array, (-1, 3), 1, 10_000)
    assert report.grid_max <= 0.62
    assert report.certified_k is not None and report.certified_k <= 0.62 * 1.001


def test_scalar_functions_fall_back():
    vec = derivative_product_bound(maps.ex1_array, maps.ex1_derivative_array, (-1, 3), 2, 500)
    scalar = derivative_product_bound(maps.eval_ex1, maps.ex1_derivative, (-1, 3), 2, 500)
    assert vec.grid_max == pytest.approx(scalar.grid_max, rel=1e-12)


def test_not_self_map():
    with pytest.raises(NotSelfMap):
        derivative_product_bound(lambda x: 2 * x, lambda x: 2.0 + 0 * x, (0.5, 1.0), 1, 100)


def test_no_certificate_for_expanding_map():
    report = derivative_product_bound(lambda x: 1.0 - x, lambda x: -1.0 + 0 * x, (0.0, 1.0), 3, 100)
    assert report.grid_max == 1.0 and report.certified_k is None


def test_certify_iterate_contraction():
    # cos on [0, 1]: |sin| <= sin(1) ~ 0.84, so a few iterates reach 0.5
    found = certify_iterate_contraction(np.cos, lambda x: -np.sin(x), (0.0, 1.0), 0.5, 20, grid=2000)
    assert found is not None
    n, report = found
    assert report.certified_k <= 0.5
    earlier = derivative_product_bound(np.cos, lambda x: -np.sin(x), (0.0, 1.0), n - 1, 2000)
    assert earlier.certified_k is None or earlier.certified_k > 0.5


# -- Ex1 ---------------------------------------------------------------------

@pytest.mark.parametrize("x,expected", [(0.0, 0), (3.0, 0), (-1.0, 0), (8.5, 6), (3.98, 1), (3.995, 2), (4.0, 2), (-1.99, 1), (-10.0, 10)])
def test_entry_index(x, expected):
    assert example1_entry_index(x) == expected


def test_entry_property():
    for x in np.linspace(-200, 200, 401):
        N = example1_entry_index(x)
        y = x
        for _ in range(N):
            y = maps.eval_ex1(y)
        for _ in range(20):
            assert -1 <= y <= 3
            y = maps.eval_ex1(y)


def test_pair_index_values():
    # N = 0 gives ceil(log_0.62 0.62) = 1
    assert example1_pair_index(-1, 3) == 1
    assert example1_pair_index(-1, 8.5) == 6 + math.ceil(1 - 6 * math.log(1.25) / math.log(0.62))
    with pytest.raises(DomainError):
        example1_pair_index(0.0, 3.0)


def test_ex1_start_gives_published_gap():
    from uic.builtin import get_builtin
    assert get_builtin("ex1").certificate.self_index(8.5) == 10


# -- Ex2 ---------------------------------------------------------------------

def test_ex2_pair_index():
    c = L1Point.center()
    assert example2_pair_index(c, c.shifted({5: 1.0})) == 10
    # tail 1 at index 9 is more than a quarter of 1 at index 2, so J = 9
    assert example2_pair_index(c, c.shifted({2: 1.0, 9: 1.0})) == 18
    assert example2_pair_index(c, c.shifted({2: 1.0, 9: 0.25})) == 4
    assert example2_pair_index(c.shifted({2: 1.0, 8: 1.0}), c) == 16
    with pytest.raises(EqualPoints):
        example2_pair_index(c, c)


def test_ex2_self_index():
    c = L1Point.center()
    assert example2_self_index(c) == 1
    assert example2_self_index(c.shifted({7: -3.0})) == 14
    # zero sequence, uncentered: head 1 + 1/4 + 1/9 first beats the tail bound at J = 4
    assert example2_self_index(L1Point(())) == 6


# -- Ex3 ---------------------------------------------------------------------

def test_ex3_pair_index_formula():
    y, r = 0.5, 0.6
    expected = math.ceil(2 / (0.2 * 5 * y * math.cos(math.pi * r / 2)))
    assert example3_pair_index(0.1, 0.3, y, r) == expected


def test_ex3_self_index_tiny_x():
    n = example3_self_index(1e-200, 0.5, 0.5)
    assert n > 10 ** 399
    assert example3_self_index(0.0, 0.5, 0.5) == 1


def test_ex3_slice_rules():
    assert example3_slice_width(0.4) == pytest.approx(0.41)
    assert example3_slice_width(0.995) == 0.999
    assert 0.9995 < example3_slice_width(0.9995) < 1.0
    with pytest.raises(DomainError):
        example3_pair_index(0.7, 0.1, 0.5, 0.6)
    with pytest.raises(DomainError):
        example3_self_index(0.1, 0.0, 0.5)


# -- worked examples ---------------------------------------------------------

def test_halving_map_product():
    report = derivative_product_bound(lambda x: x / 2, lambda x: 0.5 + 0 * x, (0.0, 1.0), 3, 101)
    assert report.grid_max == 0.125


def test_ex1_global_slope():
    report = derivative_product_bound(maps.ex1_array, maps.ex1_derivative_array, (-9.0, 9.0), 1, 10_000)
    assert report.grid_max <= 1.25


def test_certify_examples():
    n, report = certify_iterate_contraction(lambda x: 0.9 * x, lambda x: 0.9 + 0 * x, (0.0, 1.0), 0.5, 20)
    assert n == 7 and report.grid_max == pytest.approx(0.9 ** 7)
    n, _ = certify_iterate_contraction(maps.ex1_array, maps.ex1_derivative_array, (-1.0, 3.0), 0.62, 5)
    assert n == 1
    assert certify_iterate_contraction(lambda x: x, lambda x: 1.0 + 0 * x, (0.0, 1.0), 0.99, 30) is None


@pytest.mark.parametrize("n", [1, 2, 3])
def test_product_bound_is_lipschitz_bound(n):
    report = derivative_product_bound(maps.ex1_array, maps.ex1_derivative_array, (-1.0, 3.0), n, 10_000)
    rng = np.random.default_rng(n)
    u, v = rng.uniform(-1, 3, size=(2, 5000))
    fu, fv = u, v
    for _ in range(n):
        fu, fv = maps.ex1_array(fu), maps.ex1_array(fv)
    assert np.all(np.abs(fu - fv) <= report.grid_max * np.abs(u - v) + 1e-6)


@pytest.mark.parametrize("x", [-0.7, 0.2, 1.9, 2.8])
def test_product_matches_finite_difference_slope(x):
    n = 3
    # chain rule along the orbit, then compare with symmetric slopes of f^n
    y, product = x, 1.0
    for _ in range(n):
        product *= maps.ex1_derivative(y)
        y = maps.eval_ex1(y)

    def fn(t):
        for _ in range(n):
            t = maps.eval_ex1(t)
        return t

    errors = [abs(product - (fn(x + h) - fn(x - h)) / (2 * h)) for h in (1e-4, 1e-5, 1e-6)]
    assert errors[0] < 1e-6 and errors[1] < 1e-7 and errors[2] < 1e-8


def test_ex1_pair_index_examples():
    assert example1_pair_index(-1, 8.5) == 10
    assert example1_pair_index(-1, 3) == 1
    assert example1_pair_index(-6.5, 3) == 10
    assert example1_entry_index(2.0) == 0


def test_ex1_pair_index_contracts():
    from uic.builtin import get_builtin
    ex1 = get_builtin("ex1")
    rng = np.random.default_rng(4)
    for a, b in rng.uniform(-40, 40, size=(200, 2)):
        N = ex1.certificate.pair_index(a, b)
        assert abs(ex1.handle.apply(a, N) - ex1.handle.apply(b, N)) <= 0.62 * abs(a - b) + 1e-9


def test_ex2_more_indices():
    c = L1Point.center()
    assert example2_pair_index(c, c.shifted({1: 1.0})) == 2
    assert example2_self_index(c.shifted({5: 1.0})) == 10


def test_ex2_zero_sequence_against_partial_sums():
    J = next(j for j in range(2, 100) if 1 / (j - 1) <= 0.25 * math.fsum(1 / i ** 2 for i in range(1, j)))
    assert example2_self_index(L1Point(())) == 2 * (J - 1)


def test_ex2_certified_factor():
    for J in range(1, 101):
        for p in (2 * J, 2 * J + 1, 5 * J):
            assert 2.0 ** (-p / J) + 0.25 <= 0.5


def test_ex3_worked_indices():
    assert example3_pair_index(0.4, 0.2, 1.0, 0.5) == 3
    f = 0.4 / (1 + 2 * math.cos(0.2 * math.pi))
    assert example3_self_index(0.4, 1.0, 0.5) == math.ceil(2 / ((0.4 - f) * 5 * math.cos(math.pi / 4)))
    # |x1 - x2| 5 y cos(pi r/2) never reaches 2 on a slice, so the clamp is
    # only reachable through the helper
    from fractions import Fraction
    from uic.certificates import _ceil_positive
    assert _ceil_positive(Fraction(1, 3)) == 1


def test_ex3_halving_property():
    rng = np.random.default_rng(3)
    for _ in range(100):
        y, r = rng.uniform(0.05, 1.0), rng.uniform(0.05, 0.99)
        a, b = rng.uniform(0, r, size=2)
        if a == b:
            continue
        N = example3_pair_index(a, b, y, r)
        fa, fb = maps.ex3_power(maps.PlanePoint(a, y), N), maps.ex3_power(maps.PlanePoint(b, y), N)
        assert abs(fa.x - fb.x) <= 0.5 * abs(a - b) + 1e-12

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abinitio.stats import (
    FavreStats,
    WelfordAccumulator,
    cauchy_rate,
    favre_finalize,
    welford_merge,
    welford_update,
)


def accumulate(xs):
    acc = WelfordAccumulator.empty(np.shape(xs[0]))
    for x in xs:
        acc.update(x)
    return acc


def two_pass(xs):
    xs = np.asarray(xs, float)
    m = xs.mean(axis=0)
    return m, ((xs - m) ** 2).sum(axis=0) / (len(xs) - 1)


def exact_two_pass(xs):
    """Two-pass mean and variance in rational arithmetic."""
    q = [Fraction(float(x)) for x in xs]
    m = sum(q) / len(q)
    return float(m), float(sum((x - m) ** 2 for x in q) / (len(q) - 1))


def merge_tree(xs, rng, leaf=17):
    """Random split points, accumulated leaves, merged bottom-up in random order."""
    if len(xs) <= leaf:
        return accumulate(xs)
    k = int(rng.integers(1, len(xs)))
    a, b = merge_tree(xs[:k], rng, leaf), merge_tree(xs[k:], rng, leaf)
    return welford_merge(a, b) if rng.random() < 0.5 else welford_merge(b, a)


def test_small_examples():
    acc = accumulate([1.0, 2.0, 3.0])
    assert acc.count == 3 and acc.mean == 2.0 and acc.variance == 1.0
    c = accumulate([4.25] * 10)
    assert c.mean == 4.25 and c.m2 == 0.0
    big = accumulate([1e12 + 1.0, 1e12 + 2.0, 1e12 + 3.0])
    assert big.mean == 1e12 + 2.0 and big.variance == 1.0 and c.variance == 0.0
    assert WelfordAccumulator.empty(()).variance == 0.0


def test_functional_update_leaves_input():
    a = accumulate([1.0, 2.0])
    b = welford_update(a, 3.0)
    assert a.count == 2 and b.count == 3 and b.variance == 1.0


def test_merge_examples():
    a = accumulate([1.0, 2.0])
    e = WelfordAccumulator.empty(())
    m = welford_merge(a, e)
    assert (m.count, m.mean, m.m2) == (a.count, a.mean, a.m2)
    m = welford_merge(e, a)
    assert (m.count, m.mean, m.m2) == (a.count, a.mean, a.m2)
    m = welford_merge(a, accumulate([3.0]))
    assert m.count == 3 and m.mean == 2.0 and m.variance == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("offset", [0.0, 1e6, 1e9])
def test_sequential_and_merge_tree_vs_two_pass(offset):
    rng = np.random.default_rng(42)
    xs = offset + rng.standard_normal(10_000)
    mean, var = exact_two_pass(xs)
    seq = accumulate(xs)
    assert seq.mean == pytest.approx(mean, rel=1e-12)
    assert seq.variance == pytest.approx(var, rel=1e-12)
    for seed in range(3):
        tree = merge_tree(xs, np.random.default_rng(seed))
        assert tree.count == 10_000
        assert tree.mean == pytest.approx(mean, rel=1e-12)
        assert tree.variance == pytest.approx(var, rel=1e-12)


def test_power_of_two_merge():
    xs = np.random.default_rng(1).uniform(size=(1024, 3, 2))
    parts = [accumulate(xs[i:i + 64]) for i in range(0, 1024, 64)]
    while len(parts) > 1:
        parts = [welford_merge(parts[i], parts[i + 1]) for i in range(0, len(parts), 2)]
    mean, var = two_pass(xs)
    assert np.allclose(parts[0].mean, mean, rtol=1e-12)
    assert np.allclose(parts[0].variance, var, rtol=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=60), st.integers(1, 59))
def test_merge_any_split(xs, k):
    k = min(k, len(xs) - 1)
    m = welford_merge(accumulate(xs[:k]), accumulate(xs[k:]))
    mean, var = two_pass(xs)
    assert m.mean == pytest.approx(mean, rel=1e-9, abs=1e-9)
    assert m.variance == pytest.approx(var, rel=1e-8, abs=1e-8)


def test_favre_pure_phase():
    alpha = accumulate([np.array([[1.0, 0.0]])] * 4)
    xq = accumulate([np.array([[5.0, 0.0]])] * 4)
    s = favre_finalize(alpha, {"q": xq})
    assert isinstance(s, FavreStats)
    assert s.alpha.tolist() == [[1.0, 0.0]]
    assert s.mean["q"].tolist() == [[5.0, 0.0]]
    assert s.var["q"].tolist() == [[0.0, 0.0]]


def test_favre_two_equiprobable_layouts():
    # cell [0, 1]; phase 1 on one half with q = 1, phase 2 elsewhere with q = 3
    outcomes = [np.array([[0.5, 0.5]]), np.array([[0.5, 0.5]])]
    products = [np.array([[0.5, 1.5]]), np.array([[0.5, 1.5]])]
    s = favre_finalize(accumulate(outcomes), {"q": accumulate(products)})
    assert s.alpha.tolist() == [[0.5, 0.5]]
    assert s.mean["q"].tolist() == [[1.0, 3.0]]


def test_favre_threshold_sets_zero():
    alpha = accumulate([np.array([1e-13, 1.0 - 1e-13])])
    s = favre_finalize(alpha, {"q": accumulate([np.array([1e-13, 0.5])])})
    assert s.mean["q"][0] == 0.0


def test_favre_differs_from_reynolds_by_covariance():
    rng = np.random.default_rng(3)
    X = rng.uniform(0.1, 1.0, size=(500, 1))
    q = 2.0 + X + 0.1 * rng.standard_normal((500, 1))
    s = favre_finalize(accumulate(list(X)), {"q": accumulate(list(X * q))})
    reynolds = q.mean()
    cov = np.mean((X - X.mean()) * (q - q.mean()))
    assert s.mean["q"][0] - reynolds == pytest.approx(cov / X.mean(), rel=1e-10)


def test_cauchy_rate():
    a = np.linspace(0, 1, 10)
    assert cauchy_rate(a, a, 0.1) == 0.0
    assert cauchy_rate(np.zeros(4), np.ones(4), 0.25) == pytest.approx(1.0)
    assert cauchy_rate(np.zeros(4), np.ones(4), np.full(4, 0.25)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        cauchy_rate(np.zeros(4), np.zeros(5), 0.25)
    with pytest.raises(ValueError):
        cauchy_rate(np.zeros(4), np.zeros(4), np.ones(3))


def test_cauchy_rate_of_two_resolutions():
    # cell averages of sin(pi x) on [0, 1] against midpoint values
    for M in (50, 100, 200):
        e = np.linspace(0, 1, M + 1)
        avg = (np.cos(np.pi * e[:-1]) - np.cos(np.pi * e[1:])) / (np.pi / M)
        mid = np.sin(np.pi * 0.5 * (e[1:] + e[:-1]))
        # |average - midpoint| = (pi^2 h^2 / 24) sin(pi x) + O(h^4); its integral is pi h^2 / 12
        exact = np.pi / 12 / M**2
        assert cauchy_rate(avg, mid, 1.0 / M) == pytest.approx(exact, rel=1e-3)

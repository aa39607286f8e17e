import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fomkit import _kernels
from fomkit.core import (
    Box,
    ConfigurationError,
    DomainError,
    EuclideanBall,
    FreeSpace,
    NonnegOrthant,
    Simplex,
    norm,
)
from fomkit.prox import (
    EntropyProx,
    EuclideanProx,
    PNormProx,
    ProductProx,
    bregman,
    mirror_step,
    pnorm_grad_d,
    pnorm_mirror_map_inverse,
    project_simplex_euclidean,
    prox_radius,
    step_residual,
)

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)


def interior(rng, n):
    return rng.dirichlet(np.ones(n))


# bregman


def test_bregman_examples():
    assert bregman(EuclideanProx(FreeSpace(2)), [1, 2], [0, 0]) == 2.5
    ent = EntropyProx(2)
    assert bregman(ent, [0.5, 0.5], [0.5, 0.5]) == 0.0
    assert bregman(ent, [0.5, 0.5], [0.25, 0.75]) == pytest.approx(0.143841, abs=1e-6)
    assert bregman(ent, [0.5, 0.5], [0.25, 0.75]) == pytest.approx(
        0.5 * math.log(2) + 0.5 * math.log(2 / 3), rel=1e-14)


def test_entropy_bregman_needs_positive_y():
    with pytest.raises(DomainError):
        bregman(EntropyProx(2), [0.5, 0.5], [1.0, 0.0])


def test_prox_radius_examples():
    assert prox_radius(EuclideanProx(FreeSpace(2)), [0, 0], [1, 1]) == 1.0
    ent = EntropyProx(4)
    assert prox_radius(ent, np.full(4, 0.25), [1, 0, 0, 0]) == pytest.approx(math.log(4), abs=1e-12)
    x0 = np.array([0.1, 0.2, 0.3, 0.4])
    assert prox_radius(ent, x0, x0) == 0.0


@pytest.mark.parametrize("setup,sampler", [
    (EuclideanProx(FreeSpace(4)), lambda r: r.standard_normal(4)),
    (EntropyProx(4), lambda r: r.dirichlet(np.ones(4))),
    (EntropyProx(4), lambda r: r.dirichlet(np.full(4, 0.1))),
    (PNormProx(1.5, 4), lambda r: r.standard_normal(4)),
])
def test_strong_convexity_certificate(setup, sampler):
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(10_000):
        x, y = sampler(rng), sampler(rng)
        worst = max(worst, 0.5 * norm(x - y, setup.norm_spec) ** 2 - setup.bregman(x, y))
    assert worst <= 1e-12


@pytest.mark.parametrize("setup,sampler", [
    (EuclideanProx(FreeSpace(3)), lambda r: r.standard_normal(3)),
    (EntropyProx(3), lambda r: r.dirichlet(np.ones(3))),
])
def test_three_point_identity(setup, sampler):
    rng = np.random.default_rng(2)
    for _ in range(2000):
        x, y, z = sampler(rng), sampler(rng), sampler(rng)
        lhs = setup.bregman(x, z)
        rhs = setup.bregman(x, y) + setup.bregman(y, z) + float(
            (setup.grad_d(y) - setup.grad_d(z)) @ (x - y))
        assert lhs == pytest.approx(rhs, abs=1e-10)


# mirror steps


def test_mirror_step_examples():
    assert np.array_equal(mirror_step(EuclideanProx(FreeSpace(2)), [1, 1], [1, 0], 1.0), [0, 1])
    out = mirror_step(EntropyProx(2), [0.5, 0.5], [math.log(2), 0.0], 1.0)
    np.testing.assert_allclose(out, [1 / 3, 2 / 3], rtol=1e-14)
    out = mirror_step(EuclideanProx(Box([0, 0], [1, 1])), [0.5, 0.5], [2, -2], 1.0)
    assert np.array_equal(out, [0, 1])


def test_unsupported_combinations():
    with pytest.raises(ConfigurationError):
        EntropyProx(Box([0, 0], [1, 1]))
    with pytest.raises(ConfigurationError):
        PNormProx(1.5, Simplex(3))
    with pytest.raises(DomainError):
        PNormProx(2.5, 3)


def _samples(setup, rng, n=200):
    s = setup.set
    if isinstance(s, Simplex):
        return list(s.vertices())
    if isinstance(s, Box):
        return [s.lo + (s.hi - s.lo) * rng.uniform(size=s.dim) for _ in range(n)] + \
            [s.support(rng.standard_normal(s.dim))[1] for _ in range(n)]
    if isinstance(s, EuclideanBall):
        return [s.support(rng.standard_normal(s.dim))[1] for _ in range(n)]
    return [s.project(rng.standard_normal(s.dim) * 10) for _ in range(n)]


@pytest.mark.parametrize("setup", [
    EuclideanProx(FreeSpace(3)),
    EuclideanProx(Box([-1, 0, 0], [1, 2, 0.5])),
    EuclideanProx(EuclideanBall([0.5, 0, 0], 1.0)),
    EuclideanProx(Simplex(3)),
    EuclideanProx(NonnegOrthant(3)),
    EntropyProx(3),
    PNormProx(1.3, 3),
])
def test_mirror_step_optimality(setup):
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = setup.set.project(rng.standard_normal(3)) if not isinstance(setup, EntropyProx) \
            else interior(rng, 3)
        g = rng.standard_normal(3)
        h = float(rng.uniform(0.1, 2.0))
        xn = mirror_step(setup, x, g, h)
        assert setup.set.contains(xn, 1e-10)
        assert step_residual(setup, x, g, h, xn, _samples(setup, rng)) <= 1e-8


# simplex projection


def test_simplex_projection_examples():
    np.testing.assert_allclose(project_simplex_euclidean([0.2, 0.3, 0.5]), [0.2, 0.3, 0.5],
                               atol=1e-15)
    np.testing.assert_allclose(project_simplex_euclidean([0.5, 0.5, 2.0]), [0, 0, 1], atol=1e-15)
    np.testing.assert_allclose(project_simplex_euclidean([1, 1]), [0.5, 0.5], atol=1e-15)


@given(arrays(np.float64, st.integers(1, 12), elements=finite))
def test_simplex_projection_feasible_and_optimal(v):
    p = project_simplex_euclidean(v)
    assert np.all(p >= 0)
    assert abs(p.sum() - 1) <= 1e-12
    # variational inequality <v - p, u - p> <= 0 at every vertex
    r = v - p
    assert np.max(r) - r @ p <= 1e-9 * (1 + np.abs(v).max())


def test_simplex_projection_against_grid():
    k = 1000
    i, j = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
    m = i + j <= k
    grid = np.stack([i[m] / k, j[m] / k, 1 - (i[m] + j[m]) / k], axis=1)
    rng = np.random.default_rng(4)
    for _ in range(20):
        v = rng.normal(0.3, 0.7, 3)
        best = grid[np.argmin(np.sum((grid - v) ** 2, axis=1))]
        assert np.max(np.abs(best - project_simplex_euclidean(v))) <= 2e-3


# p-norm mirror map


def test_pnorm_inverse_examples():
    np.testing.assert_allclose(pnorm_mirror_map_inverse([3, -4], 2.0), [3, -4])
    s = pnorm_grad_d([1.0, 0.0], 1.5)
    np.testing.assert_allclose(pnorm_mirror_map_inverse(s, 1.5), [1, 0], atol=1e-12)
    assert np.array_equal(pnorm_mirror_map_inverse(np.zeros(3), 1.7), np.zeros(3))


@given(arrays(np.float64, 4, elements=st.floats(-10, 10)), st.floats(1.05, 2.0))
def test_pnorm_round_trip(s, p):
    back = pnorm_grad_d(pnorm_mirror_map_inverse(s, p), p)
    np.testing.assert_allclose(back, s, rtol=1e-9, atol=1e-9 * (1 + np.abs(s).max()))


# entropy floor


def test_entropy_step_stays_representable():
    ent = EntropyProx(3)
    x = ent.step(np.array([1 / 3] * 3), np.array([0.0, 1e4, -1e4]), 1.0)
    assert np.all(x >= _kernels.ENTROPY_FLOOR)
    assert not ent.representable(x)
    assert ent.representable(np.array([0.2, 0.3, 0.5]))
    floored = np.array([1e-300, 0.5, 0.5])
    assert ent.representable(floored, start=np.array([1e-200, 0.5, 0.5]))
    assert not ent.representable(floored, start=np.array([1e-100, 0.5, 0.5]))


def test_product_prox_blocks():
    pp = ProductProx(EntropyProx(2), EuclideanProx(Box([0], [1])))
    x = pp.start_point()
    np.testing.assert_allclose(x, [0.5, 0.5, 0.0])
    xn = pp.step(x, np.array([math.log(2), 0.0, -3.0]), 1.0)
    np.testing.assert_allclose(xn, [1 / 3, 2 / 3, 1.0])
    assert pp.bregman(xn, x) == pytest.approx(
        EntropyProx(2).bregman(xn[:2], x[:2]) + 0.5, rel=1e-14)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fomkit import zoo
from fomkit.core import (
    BreakdownError,
    ConfigurationError,
    DivergenceError,
    FirstOrderOracle,
    FreeSpace,
    Problem,
    Simplex,
)
from fomkit.methods.first_order import (
    ExactQuadraticLineSearch,
    FixedInverseL,
    Sequence,
    cg_quadratic,
    frank_wolfe_simplex,
    gradient_descent,
    heavy_ball,
    linear_coupling,
    model_gradient_method,
    nesterov_momentum,
    nonlinear_cg,
    subgradient_method,
)
from fomkit.model import linear_model
from fomkit.prox import EntropyProx, EuclideanProx


def quad_problem(diag, b=None):
    A = np.diag(np.asarray(diag, dtype=float))
    b = np.zeros(len(diag)) if b is None else np.asarray(b, dtype=float)
    xs = np.linalg.solve(A, b)

    def fg(x):
        return 0.5 * float(x @ A @ x) - float(b @ x), A @ x - b

    return Problem(FirstOrderOracle(fg, len(diag)), FreeSpace(len(diag)), xs,
                   -0.5 * float(b @ xs), {"L1": float(max(diag)), "mu": float(min(diag))},
                   quadratic=(A, b))


def descent_violations(tr, L):
    v = np.asarray(tr.values)
    g = np.asarray(tr.grad_norms)
    return np.max(v[1:] - (v[:-1] - g[:-1] ** 2 / (2 * L)))


# gradient descent


def test_gd_one_exact_step():
    P = quad_problem([5.0])
    tr = gradient_descent(P, [1.0], FixedInverseL(5.0), 1)
    assert tr.x[0] == 0.0
    assert len(tr.iterates) == 2 and tr.check_lengths()


def test_gd_hand_step():
    tr = gradient_descent(quad_problem([1.0, 10.0]), [1.0, 1.0], 10.0, 1)
    np.testing.assert_allclose(tr.x, [0.9, 0.0], atol=1e-15)


def test_gd_huber_decrease_pattern():
    # start on the quadratic piece: the decrease is exactly h(1 - Lh/2)||g||^2
    z = zoo.huber(2.0, 1.0, 1.0, dim=2, x0=np.array([0.3, 0.1]))
    L = 2.0
    h = 0.7 / L
    tr = gradient_descent(z.problem, z.x0, Sequence(h), 5)
    for k in range(5):
        dec = tr.values[k] - tr.values[k + 1]
        assert dec == pytest.approx(h * (1 - L * h / 2) * tr.grad_norms[k] ** 2, rel=1e-12)


def test_gd_linear_region_step():
    z = zoo.huber(1.0, 1.0, 1.0, dim=2, x0=np.array([3.0, 4.0]))
    tr = gradient_descent(z.problem, z.x0, FixedInverseL(1.0), 3)
    assert descent_violations(tr, 1.0) <= 1e-10


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_gd_divergence_reports_step():
    def fg(x):
        return float(np.exp(x @ x)), 2 * x * np.exp(x @ x)

    P = Problem(FirstOrderOracle(fg, 1), FreeSpace(1))
    with pytest.raises(DivergenceError) as e:
        gradient_descent(P, [2.0], Sequence(10.0), 50)
    assert e.value.step >= 1


@pytest.mark.parametrize("seed", range(5))
def test_gd_strongly_convex_rate(seed):
    z = zoo.random_quadratic(10, 1.0, 100.0, seed)
    tr = gradient_descent(z.problem, z.x0, FixedInverseL(100.0), 1000)
    g0 = z.problem.gap(z.x0)
    for N in (10, 100, 1000):
        assert z.problem.gap(tr.iterates[N]) <= math.exp(-N / 100) * g0 + 1e-14
    assert z.problem.gap(tr.x) <= math.exp(-10) * g0


def test_gd_exact_line_search_on_quadratic():
    P = quad_problem([1.0, 10.0])
    tr = gradient_descent(P, [1.0, 1.0], ExactQuadraticLineSearch(P.quadratic[0]), 20)
    assert all(b <= a + 1e-15 for a, b in zip(tr.values, tr.values[1:]))


@given(st.floats(0.01, 100.0))
def test_gd_argmin_invariance(c):
    P1 = quad_problem([1.0, 3.0], [1.0, -1.0])
    P2 = quad_problem([c, 3.0 * c], [c, -c])
    t1 = gradient_descent(P1, [0.2, 0.4], FixedInverseL(3.0), 10)
    t2 = gradient_descent(P2, [0.2, 0.4], FixedInverseL(3.0 * c), 10)
    np.testing.assert_allclose(t1.x, t2.x, rtol=1e-12, atol=1e-14)


def test_average_conventions():
    P = quad_problem([1.0])
    a = gradient_descent(P, [1.0], 2.0, 2)
    b = gradient_descent(P, [1.0], 2.0, 2, average_from_zero=True)
    assert a.averaged_point[0] == pytest.approx((0.5 + 0.25) / 2)
    assert b.averaged_point[0] == pytest.approx((1.0 + 0.5) / 2)


def test_subgradient_default_step():
    z = zoo.power_norm(1.0, dim=2, x0=np.array([0.6, 0.8]))
    tr = subgradient_method(z.problem, z.x0, 100)
    assert tr.step_constants[0] == pytest.approx(1.0 / (1.0 / 10.0))
    with pytest.raises(ConfigurationError):
        subgradient_method(Problem(z.oracle, FreeSpace(2)), z.x0, 10)


# model gradient method


def test_model_gd_matches_gd_bitwise():
    z = zoo.random_quadratic(6, 0.0, 3.0, 4)
    a = gradient_descent(z.problem, z.x0, FixedInverseL(3.0), 25)
    b = model_gradient_method(linear_model(z.oracle), EuclideanProx(FreeSpace(6)), 3.0, z.x0, 25)
    for u, v in zip(a.iterates, b.iterates):
        assert np.array_equal(u, v)


def test_model_gd_entropy_multiplicative_weights():
    c = np.array([1.0, 2.0, 0.5])
    o = FirstOrderOracle(lambda x: (float(c @ x), c.copy()), 3)
    tr = model_gradient_method(linear_model(o), EntropyProx(3), 2.0, np.full(3, 1 / 3), 1)
    w = np.exp(-c / 2.0)
    np.testing.assert_allclose(tr.x, w / w.sum(), rtol=1e-14)


@pytest.mark.parametrize("seed", range(3))
def test_model_gd_bregman_monotone_and_rate(seed):
    z = zoo.random_quadratic(8, 0.0, 2.0, seed)
    prox = EuclideanProx(FreeSpace(8))
    tr = model_gradient_method(linear_model(z.oracle), prox, 2.0, z.x0, 200)
    V0 = prox.bregman(z.problem.x_star, z.x0)
    for x in tr.iterates:
        assert prox.bregman(z.problem.x_star, x) <= V0 + 1e-9
    for N in (10, 50, 200):
        avg = np.mean(tr.iterates[1:N + 1], axis=0)
        assert z.problem.gap(avg) <= 2.0 * V0 / N + 1e-12


def test_entropy_model_gd_on_simplex_rate():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((4, 4))
    A = M @ M.T
    o = FirstOrderOracle(lambda x: (0.5 * float(x @ A @ x), A @ x), 4)
    # reference optimum by fine mirror descent
    L = float(np.max(np.abs(A)))
    ref = model_gradient_method(linear_model(o), EntropyProx(4), L, np.full(4, 0.25), 20000)
    f_star = min(ref.values)
    tr = model_gradient_method(linear_model(o), EntropyProx(4), L, np.full(4, 0.25), 100)
    assert o.peek(tr.averaged_point) - f_star <= L * math.log(4) / 100 + 1e-9


# heavy ball and momentum


def test_heavy_ball_examples():
    P = quad_problem([1.0])
    tr = heavy_ball(P, [1.0], 1.0, 0.5, 2)
    assert tr.iterates[1][0] == 0.0 and tr.iterates[2][0] == -0.5
    P = quad_problem([1.0, 4.0], [1.0, 1.0])
    a = heavy_ball(P, [0.0, 0.0], 0.2, 0.0, 15)
    b = gradient_descent(P, [0.0, 0.0], Sequence(0.2), 15)
    for u, v in zip(a.iterates, b.iterates):
        np.testing.assert_array_equal(u, v)


def test_heavy_ball_tuned_linear_rate():
    P = quad_problem([1.0, 100.0], [1.0, 1.0])
    L, mu = 100.0, 1.0
    alpha = 4 / (math.sqrt(L) + math.sqrt(mu)) ** 2
    beta = ((math.sqrt(L) - math.sqrt(mu)) / (math.sqrt(L) + math.sqrt(mu))) ** 2
    tr = heavy_ball(P, [0.0, 0.0], alpha, beta, 300)
    d = [np.linalg.norm(x - P.x_star) for x in tr.iterates]
    rate = (d[300] / d[100]) ** (1 / 200)
    assert rate < 0.9


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_heavy_ball_divergence_surfaces():
    with pytest.raises(DivergenceError):
        heavy_ball(quad_problem([1.0]), [1.0], 5.0, 0.9, 3000)


def test_nesterov_first_step_and_mu_equals_L():
    P = quad_problem([1.0, 3.0], [1.0, 0.5])
    a = nesterov_momentum(P, [0.0, 0.0], 3.0, 1)
    b = gradient_descent(P, [0.0, 0.0], 3.0, 1)
    np.testing.assert_array_equal(a.x, b.x)
    a = nesterov_momentum(P, [0.0, 0.0], 3.0, 10, mu=3.0)
    b = gradient_descent(P, [0.0, 0.0], 3.0, 10)
    np.testing.assert_allclose(a.x, b.x, rtol=0, atol=0)


def test_nesterov_beats_gd_on_worst_case():
    z = zoo.worst_case_smooth(1.0, 20, 41)
    P = z.problem
    R = P.constants["R"]
    nm = nesterov_momentum(P, z.x0, 1.0, 20)
    gd = gradient_descent(P, z.x0, 1.0, 20)
    bound = 4 * R * R / 21 ** 2
    assert P.gap(nm.x) <= bound
    assert min(P.gap(x) for x in gd.iterates) >= P.constants["lower_bound"]


# linear coupling


def test_linear_coupling_hand_iteration():
    tr = linear_coupling(quad_problem([1.0]), [1.0], 1.0, 1, h=1.0)
    # tau = 1/2: x = (z + y)/2 = 1, y+ = 0, z+ = 0
    assert tr.iterates[1][0] == 0.0


def test_linear_coupling_anytime_schedule_rate():
    P = quad_problem([1.0, 10.0], [1.0, 1.0])
    x0 = np.array([2.0, -1.0])
    R2 = float(np.sum((x0 - P.x_star) ** 2))
    tr = linear_coupling(P, x0, 10.0, 100, schedule="anytime")
    assert P.gap(tr.x) <= 2 * 4 * 10.0 * R2 / 100 ** 2


def test_linear_coupling_config_errors():
    with pytest.raises(ConfigurationError):
        linear_coupling(quad_problem([1.0]), [1.0], 1.0, 1)
    with pytest.raises(ConfigurationError):
        linear_coupling(quad_problem([1.0]), [1.0], 1.0, 1, h=1.0, schedule="odd")


# conjugate gradients


def test_cg_identity_one_step():
    tr = cg_quadratic(np.eye(4), np.ones(4), np.array([3.0, -1.0, 0.0, 2.0]), 5)
    np.testing.assert_allclose(tr.iterates[1], np.ones(4), atol=1e-15)
    assert tr.converged


def test_cg_finite_termination():
    A = np.diag([1.0, 2.0, 3.0])
    b = np.ones(3)
    tr = cg_quadratic(A, b, np.zeros(3), 3)
    assert np.linalg.norm(A @ tr.iterates[3] - b) <= 1e-10 * np.linalg.norm(b)


@pytest.mark.parametrize("seed", range(5))
def test_cg_gradient_orthogonality(seed):
    z = zoo.random_quadratic(20, 1.0, 10.0, seed)
    A, b = z.problem.quadratic
    tr = cg_quadratic(A, b, z.x0, 20)
    G = np.array([A @ x - b for x in tr.iterates])
    D = np.abs(G @ G.T) / float(G[0] @ G[0])
    assert np.max(D[np.tril_indices(len(G), -1)]) <= 1e-8


def test_cg_chebyshev_bound():
    rng = np.random.default_rng(1)
    lam = np.linspace(1.0, 50.0, 30)
    A = np.diag(lam)
    b = rng.standard_normal(30)
    xs = b / lam
    f = lambda x: 0.5 * x @ A @ x - b @ x  # noqa: E731
    f_star = f(xs)
    tr = cg_quadratic(A, b, np.zeros(30), 15)
    q = (math.sqrt(50) - 1) / (math.sqrt(50) + 1)
    R2 = float(xs @ xs)
    for N in range(1, 16):
        bound = min(50 * R2 / (2 * (2 * N + 1) ** 2), 2 * q ** (2 * N) * (f(np.zeros(30)) - f_star) * 1.0 + 1e-300,
                    50 * R2 / 2)
        assert f(tr.iterates[N]) - f_star <= bound * (1 + 1e-9)


def test_cg_breakdown_on_indefinite():
    with pytest.raises(BreakdownError):
        cg_quadratic(np.diag([1.0, -1.0]), np.array([0.0, 1.0]), np.zeros(2), 2)


@pytest.mark.parametrize("variant", ["FR", "PRP"])
def test_nonlinear_cg_matches_cg_on_quadratic(variant):
    z = zoo.random_quadratic(15, 1.0, 10.0, 2)
    A, b = z.problem.quadratic
    ref = cg_quadratic(A, b, z.x0, 15)
    for ls in ("exact", "bisection"):
        tr = nonlinear_cg(z.problem, z.x0, variant, N=15, line_search=ls)
        k = min(len(tr.iterates), len(ref.iterates))
        tol = 1e-8 if ls == "exact" else 1e-5
        for u, v in zip(tr.iterates[:k], ref.iterates[:k]):
            assert np.linalg.norm(u - v) <= tol * max(1.0, np.linalg.norm(v))


def test_nonlinear_cg_restart_one_is_steepest_descent():
    P = quad_problem([1.0, 10.0], [1.0, 1.0])
    a = nonlinear_cg(P, [0.0, 0.0], "FR", restart_period=1, N=10, line_search="exact")
    b = gradient_descent(P, [0.0, 0.0], ExactQuadraticLineSearch(P.quadratic[0]), 10)
    for u, v in zip(a.iterates, b.iterates):
        np.testing.assert_allclose(u, v, rtol=1e-12, atol=1e-14)


def test_nonlinear_cg_nesterov_skokov_stalls():
    z = zoo.nesterov_skokov(15)
    for variant in ("FR", "PRP"):
        tr = nonlinear_cg(z.problem, z.x0, variant, N=100, line_search_tol=1e-12)
        g = np.asarray(tr.grad_norms)
        k = int(np.flatnonzero(g <= 1e-8)[0])
        assert tr.values[k] - z.problem.f_star > 0.9


def test_nonlinear_cg_line_search_failure_records_event():
    # linear objective: directional derivative never changes sign
    o = FirstOrderOracle(lambda x: (float(x.sum()), np.ones(2)), 2)
    P = Problem(o, FreeSpace(2), constants={"L1": 1.0})
    tr = nonlinear_cg(P, [0.0, 0.0], N=2)
    assert any("line search" in e[1] for e in tr.events)


def test_nonlinear_cg_config_errors():
    P = quad_problem([1.0])
    with pytest.raises(ConfigurationError):
        nonlinear_cg(P, [1.0], "XX")
    with pytest.raises(ConfigurationError):
        nonlinear_cg(P, [1.0], restart_period=0)


# Frank-Wolfe


def test_frank_wolfe_degenerate_and_feasibility():
    tr = frank_wolfe_simplex(np.array([[2.0]]), [1.0], 5)
    assert all(x[0] == 1.0 for x in tr.iterates)
    rng = np.random.default_rng(0)
    M = rng.standard_normal((5, 5))
    tr = frank_wolfe_simplex(M @ M.T, np.eye(5)[2], 50)
    for x in tr.iterates:
        assert np.all(x >= 0) and abs(x.sum() - 1) <= 1e-12


def test_frank_wolfe_identity_gap_bound():
    tr = frank_wolfe_simplex(np.eye(2), [1.0, 0.0], 200)
    for N in (10, 50, 200):
        assert tr.values[N] - 0.25 <= 8.0 / N
    assert np.allclose(tr.x, [0.5, 0.5], atol=0.02)
    with pytest.raises(ConfigurationError):
        frank_wolfe_simplex(np.eye(2), [0.5, 0.5], 3)


def test_frank_wolfe_tie_breaks_low_index():
    tr = frank_wolfe_simplex(np.ones((3, 3)), [0.0, 0.0, 1.0], 1)
    np.testing.assert_allclose(tr.iterates[1], [1.0, 0.0, 0.0])


def test_simplex_projected_gd_stays_feasible():
    c = np.array([0.3, -0.2, 0.1])
    o = FirstOrderOracle(lambda x: (0.5 * float((x - c) @ (x - c)), x - c), 3)
    P = Problem(o, Simplex(3))
    tr = gradient_descent(P, [1.0, 0.0, 0.0], 1.0, 10)
    assert all(Simplex(3).contains(x) for x in tr.iterates)

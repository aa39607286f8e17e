import itertools
import math

import numpy as np
import pytest

from fomkit.core import DomainError, finite_diff_check
from fomkit.methods.first_order import (
    cg_quadratic,
    gradient_descent,
    linear_coupling,
    nesterov_momentum,
    subgradient_method,
)
from fomkit.model import linear_model, model_check, random_pairs
from fomkit.zoo import (
    consensus_problem,
    entropy_linear,
    huber,
    laplacian,
    matrix_game,
    nesterov_skokov,
    path_edges,
    power_norm,
    random_quadratic,
    worst_case_nonsmooth,
    worst_case_smooth,
)


def test_worst_case_smooth_gradient_at_zero():
    z = worst_case_smooth(4.0, 3)
    g = z.oracle.peek_grad(np.zeros(7))[1]
    expected = np.zeros(7)
    expected[0] = -1.0
    np.testing.assert_allclose(g, expected)


def test_worst_case_smooth_spectrum():
    L, N = 3.0, 5
    z = worst_case_smooth(L, N, n=14)
    H = z.problem.quadratic[0]
    m = 2 * N + 1
    ev = np.sort(np.linalg.eigvalsh(H[:m, :m]))
    ref = np.sort([L / 4 * 2 * (1 - math.cos(math.pi * k / (m + 1))) for k in range(1, m + 1)])
    np.testing.assert_allclose(ev, ref, atol=1e-12)
    assert ev.max() <= L


def test_worst_case_smooth_optimum_and_bound():
    L, N = 2.0, 4
    z = worst_case_smooth(L, N)
    xs, fs = z.reference_solver()
    m = 2 * N + 1
    # closed form: x_i = 1 - i/(m+1)
    np.testing.assert_allclose(xs, 1 - np.arange(1, m + 1) / (m + 1), atol=1e-12)
    assert np.linalg.norm(z.oracle.peek_grad(xs)[1]) < 1e-12
    assert z.problem.f_star == pytest.approx(fs)
    R = np.linalg.norm(xs)
    assert z.problem.constants["lower_bound"] == pytest.approx(3 * L * R ** 2 / (32 * (N + 1) ** 2))
    with pytest.raises(DomainError):
        worst_case_smooth(1.0, 3, n=6)


def _span_ok(iterates):
    for k, x in enumerate(iterates):
        if np.any(x[k + 1:] != 0):
            return False
    return True


def test_worst_case_smooth_span_property():
    L, N = 1.0, 6
    z = worst_case_smooth(L, N)
    P = z.problem
    x0 = z.x0
    assert _span_ok(gradient_descent(P, x0, 1 / L, N).iterates[:N + 1])
    assert _span_ok(nesterov_momentum(P, x0, L, N).iterates[:N + 1])
    assert _span_ok(linear_coupling(P, x0, L, N, h=1 / L).iterates[:N + 1])
    H, b = P.quadratic
    assert _span_ok(cg_quadratic(H, b, x0, N).iterates[:N + 1])


def test_worst_case_nonsmooth_constants():
    z = worst_case_nonsmooth(1.0, 4, 1.0)
    assert z.problem.f_star == pytest.approx(-0.25)
    np.testing.assert_allclose(z.problem.x_star, -0.5 * np.ones(4))
    assert z.oracle.peek(z.problem.x_star) == pytest.approx(-0.25)
    # tau* = -R/sqrt(N): 0 = mu x* + L0 (1/N) sum e_i at the symmetric point
    mu = z.problem.constants["mu"]
    np.testing.assert_allclose(mu * z.problem.x_star + 1.0 / 4, 0, atol=1e-15)


def test_adversarial_tie_break():
    z = worst_case_nonsmooth(2.0, 3, 1.0)
    orc = z.oracle
    _, g = orc(np.zeros(3))
    np.testing.assert_allclose(g, [2.0, 0, 0])
    _, g = orc(np.zeros(3))
    np.testing.assert_allclose(g, [0, 2.0, 0])
    assert orc.grad_calls == 2
    # pure views ignore the adversary state
    np.testing.assert_allclose(orc.peek_grad(np.zeros(3))[1], [2.0, 0, 0])
    orc.reset()
    assert orc.grad_calls == 0
    np.testing.assert_allclose(orc(np.zeros(3))[1], [2.0, 0, 0])


def test_worst_case_nonsmooth_lower_bound():
    for N in (4, 9, 16):
        z = worst_case_nonsmooth(1.0, N, 1.0, N + 3)
        P = z.problem
        tr = subgradient_method(P, z.x0, N)
        lb = z.problem.constants["lower_bound"]
        assert lb == pytest.approx(1.0 / (2 * math.sqrt(N)))
        for x in tr.iterates[:N]:
            assert P.gap(x) >= lb - 1e-9


def test_nesterov_skokov_values():
    z = nesterov_skokov(5)
    assert z.oracle.peek(np.ones(5)) == 0.0
    assert z.oracle.peek(z.x0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        nesterov_skokov(1)


def test_nesterov_skokov_finite_differences():
    z = nesterov_skokov(6)
    rng = np.random.default_rng(0)
    assert finite_diff_check(z.oracle, z.x0) < 1e-5
    for _ in range(100):
        assert finite_diff_check(z.oracle, rng.uniform(-1, 1, 6)) < 1e-5


def test_nesterov_skokov_local_constant():
    # the Gershgorin value dominates the Hessian norm on the box
    z = nesterov_skokov(6)
    L = z.problem.constants["L1"]
    rng = np.random.default_rng(1)
    for _ in range(200):
        x = rng.uniform(-1, 1, 6)
        h = 1e-5
        H = np.array([(z.oracle.peek_grad(x + h * e)[1] - z.oracle.peek_grad(x - h * e)[1]) / (2 * h)
                      for e in np.eye(6)])
        assert np.linalg.norm(0.5 * (H + H.T), 2) <= L


def test_huber_branches_and_seam():
    L, R, th = 2.0, 1.0, 0.5
    z = huber(L, R, th, dim=3)
    s = R / th ** 2
    orc = z.oracle
    x = np.array([0.3, -0.2, 0.1])
    f, g = orc.peek_grad(x)
    assert f == pytest.approx(0.5 * L * x @ x)
    np.testing.assert_allclose(g, L * x)
    u = np.array([1.0, 2.0, -2.0]) / 3.0
    # both branches evaluated at the seam radius itself
    at = orc.peek_grad(u * s)
    assert abs(at[0] - 0.5 * L * s * s) <= 1e-12 * at[0]
    np.testing.assert_allclose(at[1], L * u * s, rtol=1e-12)
    below = orc.peek_grad(u * s * (1 - 1e-9))
    assert abs(below[0] - at[0]) <= 2e-9 * at[0]
    far = orc.peek_grad(u * 10 * s)[1]
    assert np.linalg.norm(far) == pytest.approx(L * R / th ** 2)
    assert z.problem.constants["L0"] == pytest.approx(L * R / th ** 2)
    with pytest.raises(DomainError):
        huber(0.0, 1.0, 1.0)


def test_power_norm_constants():
    for p in (1.0, 1.25, 1.5, 2.0):
        z = power_norm(p, dim=3, scale=1.5)
        nu = p - 1
        c = z.problem.constants
        assert c["L_nu"] == pytest.approx(1.5 * p * 2 ** (1 - nu))
        # the sup is attained at y = -x
        x = np.array([0.6, 0.0, 0.8])
        gx, gy = z.oracle.peek_grad(x)[1], z.oracle.peek_grad(-x)[1]
        ratio = np.linalg.norm(gx - gy) / np.linalg.norm(2 * x) ** nu
        assert ratio == pytest.approx(c["L_nu"])
        rng = np.random.default_rng(int(p * 100))
        for _ in range(300):
            a, b = rng.standard_normal(3), rng.standard_normal(3)
            ga, gb = z.oracle.peek_grad(a)[1], z.oracle.peek_grad(b)[1]
            assert np.linalg.norm(ga - gb) <= c["L_nu"] * np.linalg.norm(a - b) ** nu * (1 + 1e-9)
    np.testing.assert_allclose(power_norm(1.0, dim=2).oracle.peek_grad(np.zeros(2))[1], [1.0, 0.0])
    with pytest.raises(DomainError):
        power_norm(2.5)


def test_random_quadratic_spectrum_and_determinism():
    z = random_quadratic(8, 0.5, 7.0, seed=3)
    A, b = z.problem.quadratic
    # power iteration and inverse iteration
    v = np.ones(8)
    for _ in range(2000):
        v = A @ v
        v /= np.linalg.norm(v)
    assert v @ A @ v == pytest.approx(7.0, abs=1e-9)
    w = np.ones(8)
    for _ in range(2000):
        w = np.linalg.solve(A, w)
        w /= np.linalg.norm(w)
    assert w @ A @ w == pytest.approx(0.5, abs=1e-9)
    z2 = random_quadratic(8, 0.5, 7.0, seed=3)
    np.testing.assert_array_equal(z2.problem.quadratic[0], A)
    np.testing.assert_array_equal(z2.x0, z.x0)
    zi = random_quadratic(4, 2.0, 2.0, seed=0)
    np.testing.assert_allclose(zi.problem.quadratic[0], 2.0 * np.eye(4), atol=1e-12)
    assert np.linalg.norm(z.x0 - z.problem.x_star) == pytest.approx(1.0)


@pytest.mark.parametrize("make", [
    lambda: worst_case_smooth(3.0, 3),
    lambda: huber(2.0, 1.0, 0.7, dim=3),
    lambda: power_norm(2.0, dim=3),
    lambda: random_quadratic(5, 0.1, 4.0, seed=9),
])
def test_declared_smoothness_passes_model_check(make):
    z = make()
    P = z.problem
    pairs = random_pairs(P.dim, 1000, 3.0, seed=4)
    assert model_check(linear_model(P.oracle), P.constants["L1"], 0.0, pairs) <= 1e-9


def test_reference_solvers_against_grid():
    z = random_quadratic(2, 0.5, 3.0, seed=5)
    xs, fs = z.reference_solver()
    g = np.linspace(-4, 4, 801)
    X, Y = np.meshgrid(g + xs[0], g + xs[1])
    A, b = z.problem.quadratic
    vals = 0.5 * (A[0, 0] * X ** 2 + 2 * A[0, 1] * X * Y + A[1, 1] * Y ** 2) - b[0] * X - b[1] * Y
    i = np.unravel_index(np.argmin(vals), vals.shape)
    assert abs(X[i] - xs[0]) <= 0.01 and abs(Y[i] - xs[1]) <= 0.01
    assert vals.min() >= fs - 1e-12


def test_matrix_game_examples():
    G = matrix_game(np.zeros((2, 3)))
    rng = np.random.default_rng(0)
    assert G.gap(rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(3))) == 0.0
    mp = matrix_game([[1, -1], [-1, 1]])
    assert mp.gap([0.5, 0.5], [0.5, 0.5]) == pytest.approx(0.0)
    assert mp.value(np.array([0.5, 0.5]), np.array([0.5, 0.5])) == 0.0
    assert mp.gap([1, 0], [1, 0]) == pytest.approx(2.0)
    assert mp.field.L == 1.0


def test_entropy_linear_examples():
    prog = entropy_linear(A=np.zeros((2, 3)), b=np.array([0.2, -0.1]), mu=0.5)
    x = np.array([1.0, 2.0])
    np.testing.assert_allclose(prog.y_of(x), np.ones(3) / 3)
    assert prog.dual_value(x) == pytest.approx(x @ prog.b + 0.5 * math.log(3))
    prog = entropy_linear(mu=0.3, m=3, n=5, seed=1)
    rng = np.random.default_rng(2)
    for _ in range(20):
        y = prog.y_of(rng.standard_normal(3) * 10)
        assert abs(y.sum() - 1.0) <= 1e-15
        assert np.all(y >= 0)


def test_entropy_linear_grid_optimum():
    # m = 1, n = 2 so the feasible set is a point; m = 1, n = 3 gives a segment
    A = np.array([[0.0, 1.0, 2.0]])
    b = np.array([0.7])
    mu = 0.2
    prog = entropy_linear(A=A, b=b, mu=mu)
    from fomkit.primal_dual import dual_solve_restore

    r = dual_solve_restore(prog, 1e-4, 1e-4)
    # y = (y1, 0.7 - 2 t, t) along the feasible segment with y1 = 1 - y2 - y3
    t = np.linspace(0, 0.35, 350001)
    Y = np.stack([1 - (0.7 - 2 * t) - t, 0.7 - 2 * t, t], axis=1)
    Y = Y[np.all(Y >= 0, axis=1)]
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = mu * np.sum(np.where(Y > 0, Y * np.log(Y), 0.0), axis=1)
    best = Y[np.argmin(vals)]
    np.testing.assert_allclose(r.y_bar, best, atol=1e-3)


def test_laplacian_and_consensus():
    W = laplacian(path_edges(3))
    np.testing.assert_allclose(np.linalg.eigvalsh(W), [0.0, 1.0, 3.0], atol=1e-12)
    np.testing.assert_array_equal(W.sum(axis=1), 0.0)
    prog = consensus_problem(path_edges(2), [1.0, 4.0])
    np.testing.assert_allclose(prog.y_star, [2.5, 2.5])
    # W y = 0 iff all coordinates agree
    W4 = laplacian([(0, 1), (1, 2), (2, 3), (3, 0)])
    assert np.allclose(W4 @ np.full(4, 3.3), 0)
    assert not np.allclose(W4 @ np.array([1.0, 1.0, 1.0, 2.0]), 0)
    with pytest.raises(DomainError):
        consensus_problem([(0, 1), (2, 3)], [1.0, 2.0, 3.0, 4.0])
    with pytest.raises(DomainError):
        consensus_problem(path_edges(3), [1.0, 2.0, 3.0], weights=[1.0, 0.0, 1.0])


def test_seeded_generators_are_deterministic():
    for make in (lambda s: entropy_linear(m=3, n=4, seed=s),):
        a, b = make(7), make(7)
        np.testing.assert_array_equal(a.A, b.A)
        np.testing.assert_array_equal(a.b, b.b)
    for m, n in itertools.product((2, 3), (2, 4)):
        from fomkit.zoo import random_matrix_game

        np.testing.assert_array_equal(random_matrix_game(m, n, 1).C, random_matrix_game(m, n, 1).C)

"""Non-adaptive first-order methods.

Every method returns a :class:`~fomkit.core.Trace` whose entry 0 is the
starting point. Unless stated otherwise the averaging weights cover
iterates ``1..N``; pass ``average_from_zero=True`` for the ``0..N-1``
convention.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import (
    BreakdownError,
    ConfigurationError,
    FreeSpace,
    Trace,
    as_point,
    check_finite,
)
from ..prox import EuclideanProx


# ---------------------------------------------------------------------------
# step rules


class StepRule:
    """Base class; ``size(k, x, g)`` returns the step length of step ``k``."""

    def size(self, k, x, g):
        raise NotImplementedError

    def constant(self, k):
        """The ``L`` the step corresponds to (``1/h``) for trace bookkeeping."""
        return float("nan")


class FixedInverseL(StepRule):
    """``h = 1/L``."""

    def __init__(self, L):
        if not L > 0:
            raise ConfigurationError("step rule: L must be positive")
        self.L = float(L)

    def size(self, k, x, g):
        return 1.0 / self.L

    def constant(self, k):
        return self.L


class Sequence(StepRule):
    """Prescribed steps ``h_k``: a scalar, an array or a callable of ``k``."""

    def __init__(self, steps):
        if callable(steps):
            self._f = steps
        elif np.ndim(steps) == 0:
            h = float(steps)
            if not h > 0:
                raise ConfigurationError("step sizes must be positive")
            self._f = lambda k: h
        else:
            arr = np.asarray(steps, dtype=float)
            if np.any(arr <= 0):
                raise ConfigurationError("step sizes must be positive")
            self._f = lambda k: float(arr[k])

    def size(self, k, x, g):
        h = float(self._f(k))
        if not h > 0:
            raise ConfigurationError(f"step {k} has non-positive size {h}")
        return h

    def constant(self, k):
        return 1.0 / float(self._f(k))


class ExactQuadraticLineSearch(StepRule):
    """Exact minimization along the antigradient of ``<Ax,x>/2 - <b,x>``."""

    def __init__(self, A):
        self.A = np.asarray(A, dtype=float)

    def size(self, k, x, g):
        gg = float(g @ g)
        curv = float(g @ self.A @ g)
        if gg == 0.0:
            return 1.0
        if not curv > 0:
            raise BreakdownError("non-positive curvature along the gradient")
        return gg / curv


def _euclid(g):
    return float(math.sqrt(float(g @ g)))


def _weight(k, n_steps, from_zero):
    # weight of stored iterate k (0..N)
    if from_zero:
        return 1.0 if k < n_steps else 0.0
    return 1.0 if k >= 1 else 0.0


def _finish(trace, oracle, from_zero):
    n = len(trace.iterates) - 1
    trace.weights = [_weight(k, n, from_zero) for k in range(n + 1)]
    trace.take_counts(oracle)
    trace.info["average_convention"] = "0..N-1" if from_zero else "1..N"
    return trace


# ---------------------------------------------------------------------------
# gradient descent family


def gradient_descent(problem, x0, step, N, average_from_zero=False):
    """Projected gradient descent ``x+ = P_Q(x - h grad f(x))``.

    Parameters
    ----------
    problem : Problem
    x0 : array_like
    step : StepRule or float
        A float is read as ``FixedInverseL(L)``.
    N : int
        Number of steps; the trace holds ``N + 1`` iterates.

    Raises
    ------
    DivergenceError
        When a non-finite value or iterate appears.
    """
    if not isinstance(step, StepRule):
        step = FixedInverseL(step)
    oracle = problem.oracle
    x = problem.set.project(as_point(x0, problem.dim))
    trace = Trace(counter=oracle)
    f, g = oracle(x)
    check_finite(0, f, g)
    for k in range(N):
        h = step.size(k, x, g)
        trace.record(x, f, step.constant(k), 0.0, _euclid(g))
        x = problem.set.project(x - h * g)
        f, g = oracle(x)
        check_finite(k + 1, f, g, x)
    trace.record(x, f, float("nan"), 0.0, _euclid(g))
    return _finish(trace, oracle, average_from_zero)


def subgradient_method(problem, x0, N, R=None, L0=None, steps=None):
    """Subgradient descent with the constant step ``h = R / (L0 sqrt(N))``.

    ``steps`` overrides the default with any :class:`StepRule`.
    """
    c = problem.constants
    if steps is None:
        R = c.get("R") if R is None else R
        L0 = c.get("L0") if L0 is None else L0
        if R is None or L0 is None:
            raise ConfigurationError("subgradient step needs R and L0")
        steps = Sequence(R / (L0 * math.sqrt(N)))
    return gradient_descent(problem, x0, steps, N)


def model_gradient_method(oracle, prox, L, x0, N, average_from_zero=False):
    """Gradient method on a (delta, L)-model: ``x+ = argmin psi(x) + L V(x, x_k)``.

    Parameters
    ----------
    oracle : ModelOracle
    prox : ProxSetup
    L : float
    x0 : array_like
    N : int
    """
    if not L > 0:
        raise ConfigurationError("L must be positive")
    h = 1.0 / L
    x = as_point(x0, oracle.dim)
    trace = Trace(counter=oracle.oracle)
    m = oracle.query(x)
    check_finite(0, m.f_delta, m.linear)
    for k in range(N):
        trace.record(x, m.f_delta, L, 0.0, prox.dual_norm(m.linear))
        x = prox.step(x, m.linear, h, m.composite)
        m = oracle.query(x)
        check_finite(k + 1, m.f_delta, m.linear, x)
    trace.record(x, m.f_delta, float("nan"), 0.0, prox.dual_norm(m.linear))
    return _finish(trace, oracle.oracle, average_from_zero)


def heavy_ball(problem, x0, alpha, beta, N):
    """``x+ = x - alpha grad f(x) + beta (x - x_prev)`` with ``x_prev = x0`` at start."""
    if not alpha > 0 or not 0 <= beta < 1:
        raise ConfigurationError("heavy ball needs alpha > 0 and 0 <= beta < 1")
    oracle = problem.oracle
    x = as_point(x0, problem.dim)
    x_prev = x.copy()
    trace = Trace(counter=oracle)
    f, g = oracle(x)
    check_finite(0, f, g)
    for k in range(N):
        trace.record(x, f, 1.0 / alpha, 0.0, _euclid(g))
        x, x_prev = problem.set.project(x - alpha * g + beta * (x - x_prev)), x
        f, g = oracle(x)
        check_finite(k + 1, f, g, x)
    trace.record(x, f, float("nan"), 0.0, _euclid(g))
    return _finish(trace, oracle, False)


def nesterov_momentum(problem, x0, L, N, mu=None):
    """Fast gradient method with momentum.

    Without ``mu`` the momentum of step ``k = 1, 2, ...`` is
    ``(k - 1)/(k + 2)``; with ``mu`` it is the constant
    ``(sqrt(L) - sqrt(mu))/(sqrt(L) + sqrt(mu))``. The gradient is taken at
    the extrapolated point; the stored iterates are the ``x`` sequence.
    """
    if not L > 0:
        raise ConfigurationError("L must be positive")
    if mu is not None and not 0 < mu <= L:
        raise ConfigurationError("mu must satisfy 0 < mu <= L")
    oracle = problem.oracle
    x = as_point(x0, problem.dim)
    x_prev = x.copy()
    trace = Trace(counter=oracle)
    for k in range(1, N + 1):
        if mu is None:
            beta = (k - 1) / (k + 2)
        else:
            beta = (math.sqrt(L) - math.sqrt(mu)) / (math.sqrt(L) + math.sqrt(mu))
        y = x + beta * (x - x_prev)
        fy, gy = oracle(y)
        check_finite(k, fy, gy, y)
        fx, gx = oracle.peek_grad(x)
        trace.record(x, fx, L, 0.0, _euclid(gx))
        x, x_prev = problem.set.project(y - gy / L), x
    fx, gx = oracle.peek_grad(x)
    check_finite(N, fx, x)
    trace.record(x, fx, float("nan"), 0.0, _euclid(gx))
    return _finish(trace, oracle, False)


def linear_coupling(problem, x0, L, N, h=None, schedule="fixed"):
    """Linear coupling of a gradient step and a mirror step.

    ``x+ = tau z + (1 - tau) y``, ``y+ = x+ - grad f(x+)/L``,
    ``z+ = z - h grad f(x+)``. With ``schedule="fixed"`` the coupling is
    ``tau = 1/(L h + 1)``; with ``schedule="anytime"`` step ``k = 0, 1, ...``
    uses ``tau_k = 2/(k + 2)`` and ``h_k = (k + 2)/(2L)``. The stored
    iterates are the ``y`` sequence with ``y0 = z0 = x0``.
    """
    if not L > 0:
        raise ConfigurationError("L must be positive")
    if schedule == "fixed":
        if h is None or not h > 0:
            raise ConfigurationError("fixed schedule needs h > 0")
    elif schedule != "anytime":
        raise ConfigurationError(f"unknown schedule {schedule!r}")
    oracle = problem.oracle
    y = as_point(x0, problem.dim)
    z = y.copy()
    trace = Trace(counter=oracle)
    fy, gy = oracle.peek_grad(y)
    trace.record(y, fy, L, 0.0, _euclid(gy))
    for k in range(N):
        if schedule == "fixed":
            hk = h
            tau = 1.0 / (L * h + 1.0)
        else:
            hk = (k + 2) / (2.0 * L)
            tau = 2.0 / (k + 2)
        x = tau * z + (1.0 - tau) * y
        f, g = oracle(x)
        check_finite(k + 1, f, g, x)
        y = x - g / L
        z = z - hk * g
        fy, gy = oracle.peek_grad(y)
        trace.record(y, fy, L, 0.0, _euclid(gy))
    return _finish(trace, oracle, False)


# ---------------------------------------------------------------------------
# conjugate gradients


def cg_quadratic(A, b, x0, N, tol=0.0):
    """Conjugate gradients for ``<Ax,x>/2 - <b,x>`` with SPD ``A``.

    Stops early once the residual vanishes (or drops below ``tol * ||b||``).

    Raises
    ------
    BreakdownError
        On a search direction of non-positive curvature.
    """
    A = np.asarray(A, dtype=float)
    b = as_point(b)
    x = as_point(x0, b.shape[0])
    fval = lambda z: 0.5 * float(z @ A @ z) - float(b @ z)  # noqa: E731
    r = b - A @ x
    p = r.copy()
    rr = float(r @ r)
    trace = Trace()
    trace.record(x, fval(x), float("nan"), 0.0, math.sqrt(rr))
    bnorm = _euclid(b)
    calls = 1
    for k in range(N):
        if rr == 0.0 or math.sqrt(rr) <= tol * bnorm:
            trace.converged = True
            break
        Ap = A @ p
        curv = float(p @ Ap)
        if not curv > 0:
            raise BreakdownError(f"non-positive curvature at step {k}")
        alpha = rr / curv
        x = x + alpha * p
        r = r - alpha * Ap
        rr_new = float(r @ r)
        p = r + (rr_new / rr) * p
        rr = rr_new
        calls += 1
        check_finite(k + 1, x)
        trace.record(x, fval(x), 1.0 / alpha, 1.0, math.sqrt(rr))
    trace.oracle_grad_calls = calls
    trace.info["average_convention"] = "1..N"
    return trace


def _bisection_search(oracle, x, d, t0, tol, slope0, max_expand=60, max_bisect=200):
    """Step ``t`` with ``<grad f(x + t d), d> ~ 0`` by bracketing then bisection.

    ``slope0`` is ``<grad f(x), d>``. Returns ``None`` when no sign change
    is found within the bracket budget.
    """
    if slope0 >= 0:
        return None
    lo, hi = 0.0, t0
    for _ in range(max_expand):
        s = float(oracle(x + hi * d)[1] @ d)
        if s >= 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        return None
    for _ in range(max_bisect):
        mid = 0.5 * (lo + hi)
        s = float(oracle(x + mid * d)[1] @ d)
        if abs(s) <= tol * abs(slope0) or hi - lo <= tol * max(1.0, hi):
            return mid
        if s < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def nonlinear_cg(problem, x0, variant="FR", restart_period=None, N=100,
                 line_search_tol=1e-10, line_search="bisection"):
    """Nonlinear conjugate gradients (Fletcher-Reeves or Polak-Ribiere-Polyak).

    Parameters
    ----------
    variant : {"FR", "PRP"}
    restart_period : int, optional
        Every ``restart_period`` steps the direction is reset to the
        antigradient; defaults to the dimension.
    line_search : {"bisection", "exact"}
        ``"exact"`` needs ``problem.quadratic``.

    Notes
    -----
    When the bracketing search finds no sign change, or the direction is
    not a descent direction, a gradient step is taken instead and an event
    is recorded in ``trace.events``.
    """
    variant = variant.upper()
    if variant not in ("FR", "PRP"):
        raise ConfigurationError(f"unknown CG variant {variant!r}")
    n = problem.dim
    period = n if restart_period is None else int(restart_period)
    if period < 1:
        raise ConfigurationError("restart_period must be >= 1")
    if line_search == "exact":
        if problem.quadratic is None:
            raise ConfigurationError("exact line search needs a quadratic problem")
        A = np.asarray(problem.quadratic[0], dtype=float)
    elif line_search != "bisection":
        raise ConfigurationError(f"unknown line search {line_search!r}")
    oracle = problem.oracle
    L_fallback = problem.constants.get("L1")
    x = as_point(x0, n)
    f, g = oracle(x)
    d = -g
    # first bracket trial is a plain gradient step when L is known, so the
    # search does not leap across nearby basins
    t_prev = 1.0 / L_fallback if L_fallback else 1.0 / max(_euclid(g), 1e-300)
    trace = Trace(counter=oracle)
    for k in range(N):
        trace.record(x, f, float("nan"), 0.0, _euclid(g))
        gg = float(g @ g)
        if gg == 0.0:
            trace.converged = True
            break
        if float(g @ d) >= 0:
            trace.events.append((k, "non-descent direction reset"))
            d = -g
        if line_search == "exact":
            curv = float(d @ A @ d)
            if not curv > 0:
                raise BreakdownError(f"non-positive curvature at step {k}")
            t = -float(g @ d) / curv
        else:
            t = _bisection_search(oracle, x, d, t_prev, line_search_tol, float(g @ d))
        if t is None:
            trace.events.append((k, "line search failed"))
            h = 1.0 / L_fallback if L_fallback else t_prev
            x_new = x - h * g
            d_next_reset = True
        else:
            t_prev = t
            x_new = x + t * d
            d_next_reset = False
        f_new, g_new = oracle(x_new)
        check_finite(k + 1, f_new, g_new, x_new)
        if d_next_reset or (k + 1) % period == 0:
            d = -g_new
        else:
            if variant == "FR":
                beta = float(g_new @ g_new) / gg
            else:
                beta = float(g_new @ (g_new - g)) / gg
            d = -g_new + beta * d
        x, f, g = x_new, f_new, g_new
    else:
        trace.record(x, f, float("nan"), 0.0, _euclid(g))
    trace.weights = [0.0] + [1.0] * (len(trace.iterates) - 1)
    trace.take_counts(oracle)
    trace.info["variant"] = variant
    return trace


# ---------------------------------------------------------------------------
# Frank-Wolfe


def frank_wolfe_simplex(A, x0, N):
    """Frank-Wolfe for ``<Ax,x>/2`` on the unit simplex with ``gamma_k = 2/(k+2)``.

    The linear minimization picks the lowest index among minimal partial
    derivatives. ``trace.info["bound"]`` holds ``8 max|A_ij| / N``.
    """
    A = np.asarray(A, dtype=float)
    x = as_point(x0, A.shape[0])
    if not (np.isclose(x.sum(), 1.0, atol=1e-12) and np.all(x >= 0)
            and np.count_nonzero(x) == 1):
        raise ConfigurationError("Frank-Wolfe start must be a simplex vertex")
    trace = Trace()
    for k in range(N):
        g = A @ x
        trace.record(x, 0.5 * float(x @ g), float("nan"), 0.0, _euclid(g))
        i = int(np.argmin(g))
        gamma = 2.0 / (k + 2)
        x = (1.0 - gamma) * x
        x[i] += gamma
    g = A @ x
    trace.record(x, 0.5 * float(x @ g), float("nan"), 0.0, _euclid(g))
    trace.weights = [0.0] * len(trace.iterates)
    trace.oracle_grad_calls = N + 1
    L1 = float(np.max(np.abs(A))) if A.size else 0.0
    trace.info["bound"] = 2.0 * L1 * 4.0 / N if N > 0 else float("inf")
    return trace


def euclidean_free(dim):
    """Shorthand for the Euclidean setup on the whole space."""
    return EuclideanProx(FreeSpace(dim))

"""Adaptive and accelerated model methods.

* :func:`universal_gradient` adapts ``L`` by halving and doubling against
  an inexact descent test with slack ``epsilon/2``;
* :func:`similar_triangles` is the accelerated three-sequence method with a
  single mirror step per iteration;
* :func:`restart_strongly_convex` restarts a convex-rate method each time
  its certified gap guarantees the distance to the optimum halves.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import (
    AdaptivityError,
    ConfigurationError,
    EuclideanBall,
    Trace,
    as_point,
    check_finite,
)


def _linear_min(set_, center, radius, gsum):
    """``min <gsum, x>`` over the ball ``B(center, radius)`` or, without a radius, over the set."""
    if radius is not None:
        return float(gsum @ center) - radius * float(np.linalg.norm(gsum))
    return -set_.support(-gsum)[0]


def universal_gradient(oracle, prox, x0, epsilon, L0=1.0, budget=60, R=None,
                       max_iter=10 ** 6):
    """Universal gradient method.

    Iteration ``k`` sets ``L = L_k / 2`` and doubles it until the mirror
    step ``x+`` with step ``1/L`` satisfies

        f(x+) <= f_delta(x) + psi(x+) + L V(x+, x) + epsilon/2.

    Accepted points get weight ``1/L``. After each iteration the weighted
    certificate

        (1/W) sum w_k f(x_{k+1}) - (1/W) min_{x in B} sum w_k [f(x_k) + <g_k, x - x_k>]

    is updated, with ``B`` the Euclidean ball of radius ``R`` around ``x0``
    (or the feasible set itself when it is compact and ``R`` is None). It
    needs no extra oracle calls and the run stops once it is ``<= epsilon``.
    Without ``R`` and a compact set the certificate is unavailable and the
    run stops at ``max_iter``.

    Parameters
    ----------
    oracle : ModelOracle
    prox : ProxSetup
    x0 : array_like
    epsilon : float
    L0 : float
        Initial guess for ``L``.
    budget : int
        Doublings allowed per iteration.
    R : float, optional
        Radius of the certificate ball.

    Raises
    ------
    AdaptivityError
        When the budget is exhausted without an accepted step.
    """
    if not epsilon > 0 or not L0 > 0:
        raise ConfigurationError("epsilon and L0 must be positive")
    base = oracle.oracle
    base.reset_counts()
    x = as_point(x0, oracle.dim)
    x_start = x.copy()
    composite = getattr(oracle, "composite", None)
    has_comp = getattr(composite, "kind", "none") != "none"
    cert_ok = (R is not None or getattr(prox.set, "compact", False)) and not has_comp
    L = float(L0)
    trace = Trace(counter=base)
    m = oracle.query(x)
    trace.record(x, m.f_delta, L, 0.0, prox.dual_norm(m.linear))
    W = 0.0
    fsum = 0.0
    const = 0.0
    gsum = np.zeros(oracle.dim)
    certs, trials = [], []
    cert = float("inf")
    for k in range(max_iter):
        L = L / 2.0
        for t in range(budget):
            xn = prox.step(x, m.linear, 1.0 / L, m.composite)
            fn = oracle.value(xn)
            check_finite(k + 1, xn, fn)
            if (fn <= m.f_delta + m.psi(xn) + L * prox.bregman(xn, x) + 0.5 * epsilon
                    and prox.representable(xn, x)):
                break
            L *= 2.0
        else:
            raise AdaptivityError(f"no accepted step after {budget} doublings at iteration {k}")
        trials.append(t + 1)
        a = 1.0 / L
        W += a
        fsum += a * fn
        const += a * (m.f_delta - float(m.linear @ x))
        gsum += a * m.linear
        x = xn
        m = oracle.query(x)
        check_finite(k + 1, m.f_delta, m.linear)
        trace.record(x, m.f_delta, L, a, prox.dual_norm(m.linear))
        if cert_ok:
            lo = (const + _linear_min(prox.set, x_start, R, gsum)) / W
            cert = fsum / W - lo
            certs.append(cert)
            if cert <= epsilon:
                trace.converged = True
                break
    trace.take_counts(base)
    n_it = len(trace.iterates) - 1
    trace.info.update(
        certificates=certs,
        certificate=cert,
        trials=trials,
        iterations=n_it,
        L_sequence=trace.step_constants[1:],
        epsilon=epsilon,
        L0=float(L0),
        weight_sum=W,
    )
    return trace


def triangle_coefficients(L, N):
    """``alpha_k`` and ``A_k`` for ``k = 0..N`` (with ``alpha_0 = A_0 = 0``)."""
    alpha = np.zeros(N + 1)
    A = np.zeros(N + 1)
    for k in range(N):
        alpha[k + 1] = 0.5 / L + math.sqrt(0.25 / L ** 2 + alpha[k] ** 2)
        A[k + 1] = A[k] + alpha[k + 1]
    return alpha, A


def similar_triangles(oracle, prox, L, x0, N, monotone=False):
    """Accelerated method of similar triangles.

    ``y = (alpha u + A x)/A+``, ``u+ = argmin alpha psi(., y) + V(., u)``,
    ``x+ = (alpha u+ + A x)/A+``. With ``monotone=True`` the next ``x`` is
    the best of ``{y, u+, x+}`` (and ``x``), costing extra value calls.

    ``trace.info`` holds ``alpha`` and ``A`` and, after the run, ``bound``
    set to ``V(x*, x0)/A_N`` when ``x_star`` is passed through
    :func:`accelerated_bound`.
    """
    if not L > 0:
        raise ConfigurationError("L must be positive")
    base = oracle.oracle
    x = as_point(x0, oracle.dim)
    u = x.copy()
    A = 0.0
    alpha = 0.0
    alphas, As = [0.0], [0.0]
    trace = Trace(counter=base)
    trace.record(x, oracle.peek(x), L, 0.0, float("nan"))
    for k in range(N):
        alpha = 0.5 / L + math.sqrt(0.25 / L ** 2 + alpha ** 2)
        A_new = A + alpha
        y = (alpha * u + A * x) / A_new
        m = oracle.query(y)
        check_finite(k + 1, m.f_delta, m.linear, y)
        u = prox.step(u, m.linear, alpha, m.composite)
        x_new = (alpha * u + A * x) / A_new
        if monotone:
            cands = [x_new, y, u, x]
            vals = [oracle.value(c) for c in cands]
            j = int(np.argmin(vals))
            x_new, fx = cands[j], vals[j]
        else:
            fx = oracle.peek(x_new)
        x = x_new
        A = A_new
        alphas.append(alpha)
        As.append(A)
        check_finite(k + 1, x)
        trace.record(x, fx, L, 0.0, prox.dual_norm(m.linear))
    trace.weights[-1] = 1.0
    trace.take_counts(base)
    trace.info.update(alpha=alphas, A=As)
    return trace


def accelerated_bound(prox, x0, x_star, A_N):
    """``V(x*, x0) / A_N``."""
    return prox.bregman(x_star, x0) / A_N


# ---------------------------------------------------------------------------
# restarts


class SubgradientStage:
    """Stage solver: averaged subgradient method for an ``L0``-Lipschitz objective.

    A stage reaching ``target`` from within distance ``R`` uses
    ``N = ceil((L0 R / target)^2)`` steps ``h = R/(L0 sqrt(N))``; the
    average then satisfies ``f - f* <= L0 R / sqrt(N) <= target``. Iterates
    are projected onto the stage ball ``B(x0, R)``, which contains the
    optimum, so ``L0`` only has to bound subgradients on the working ball.
    """

    def __init__(self, problem, L0, project_ball=True):
        self.problem = problem
        self.L0 = float(L0)
        self.project_ball = project_ball

    def solve_stage(self, x0, R, target):
        N = max(1, math.ceil((self.L0 * R / target) ** 2))
        h = R / (self.L0 * math.sqrt(N))
        orc = self.problem.oracle
        ball = EuclideanBall(x0, R) if self.project_ball else None
        x = x0.copy()
        s = np.zeros_like(x)
        for k in range(N):
            _, g = orc(x)
            x = self.problem.set.project(x - h * g)
            if ball is not None:
                x = ball.project(x)
            check_finite(k, x)
            s += x
        return s / N, N, self.L0 * R / math.sqrt(N)


class GradientStage:
    """Stage solver: gradient descent with step ``1/L1``, averaged over ``1..N``.

    ``N = ceil(L1 R^2 / (2 target))`` gives ``f - f* <= L1 R^2/(2N) <= target``.
    """

    def __init__(self, problem, L1):
        self.problem = problem
        self.L1 = float(L1)

    def solve_stage(self, x0, R, target):
        N = max(1, math.ceil(self.L1 * R * R / (2.0 * target)))
        orc = self.problem.oracle
        x = x0.copy()
        s = np.zeros_like(x)
        for k in range(N):
            _, g = orc(x)
            x = self.problem.set.project(x - g / self.L1)
            check_finite(k, x)
            s += x
        return s / N, N, self.L1 * R * R / (2.0 * N)


class UniversalStage:
    """Stage solver: :func:`universal_gradient` run to the stage target."""

    def __init__(self, oracle, prox, L0=1.0):
        self.oracle = oracle
        self.prox = prox
        self.L0 = float(L0)

    def solve_stage(self, x0, R, target):
        tr = universal_gradient(self.oracle, self.prox, x0, target, self.L0, R=R)
        self.L0 = tr.step_constants[-1]
        return tr.averaged_point, tr.info["iterations"], tr.info["certificate"]


def _restart_pass(method, mu, x0, epsilon, R0, C_n, max_stages, value, detect, trace):
    x = x0
    R = float(R0)
    stages = []
    total = 0
    prev_target = None
    mu_eff = mu / (2.0 * C_n)
    for s in range(max_stages):
        R_next = R / 2.0
        target = 0.5 * mu_eff * R_next ** 2
        final = target <= epsilon
        if final:
            target = epsilon
        x_new, n_it, bound = method.solve_stage(x, R, target)
        total += n_it
        stages.append({"R": R, "target": target, "iterations": n_it, "bound": bound})
        if detect:
            # necessary conditions for mu to be valid
            step = float(np.linalg.norm(x_new - x))
            far = step > R + R_next + 1e-12 * max(1.0, R)
            drop = (prev_target is not None
                    and value(x) - value(x_new) > prev_target + 1e-12)
            if far or drop:
                return x_new, stages, total, False
        x = x_new
        trace.record(x, float("nan") if value is None else value(x), float("nan"), 0.0)
        if final:
            return x, stages, total, True
        prev_target = target
        R = R_next
    return x, stages, total, False


def restart_strongly_convex(method, mu, x0, epsilon, R0, C_n=0.5, mu_search=False,
                            max_stages=200, value=None, max_halvings=30):
    """Restart a convex-rate stage solver to exploit strong convexity.

    Stage ``k`` starts at the previous output with radius ``R_k`` and is
    asked for the gap ``mu_eff R_{k+1}^2 / 2`` with ``R_{k+1} = R_k/2`` and
    ``mu_eff = mu / (2 C_n)``; strong convexity then guarantees
    ``||x_out - x*|| <= R_{k+1}``. Once that target drops below
    ``epsilon``, a final stage is run to ``epsilon`` itself.

    Parameters
    ----------
    method : object with ``solve_stage(x0, R, target) -> (x, iterations, bound)``
    mu : float
        Strong convexity modulus (or a guess when ``mu_search`` is set).
    R0 : float
        Bound on ``||x0 - x*||``.
    C_n : float
        Constant with ``d(x - x0) <= C_n ||x - x0||^2`` (1/2 for Euclidean).
    mu_search : bool
        Watch two consequences of a valid ``mu`` (consecutive outputs stay
        within ``R_k + R_{k+1}``, the value drop between stages stays below
        the previous target). On a violation ``mu`` is halved and the whole
        scheme is rerun from ``x0``.
    value : callable, optional
        Objective values, needed for ``mu_search``.

    Raises
    ------
    ConfigurationError
        If ``method`` has no ``solve_stage``.
    """
    if not hasattr(method, "solve_stage"):
        raise ConfigurationError("restart wrapper needs a method with a stage certificate")
    if not mu > 0 or not epsilon > 0 or not R0 > 0:
        raise ConfigurationError("mu, epsilon and R0 must be positive")
    if mu_search and value is None:
        raise ConfigurationError("mu_search needs a value function")
    x0 = as_point(x0)
    trace = Trace()
    trace.record(x0, float("nan") if value is None else value(x0), float("nan"), 0.0)
    mu_cur = float(mu)
    all_stages, total = [], 0
    for _ in range(max_halvings + 1):
        x, stages, n_it, ok = _restart_pass(method, mu_cur, x0, epsilon, R0, C_n,
                                            max_stages, value, mu_search, trace)
        all_stages.extend(stages)
        total += n_it
        if ok or not mu_search:
            trace.converged = ok
            break
        mu_cur /= 2.0
        trace.events.append((len(all_stages), f"mu halved to {mu_cur}"))
    trace.weights[-1] = 1.0
    trace.info.update(stages=all_stages, total_iterations=total, mu=mu_cur)
    return trace

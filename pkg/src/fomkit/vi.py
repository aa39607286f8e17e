"""Extragradient (Mirror Prox) solvers for monotone variational inequalities.

The weak gap of a weighted set of points ``y_k`` with field values
``g_k = g(y_k)`` is

    (1/W) max_{x in Q} sum_k w_k <g_k, y_k - x>,

computed exactly through the support function of ``Q`` when the domain
has one (simplex, box, ball and products of these).
"""

from __future__ import annotations

import math
import threading

import numpy as np

from .core import (
    AdaptivityError,
    Box,
    ConfigurationError,
    EuclideanBall,
    ProductSet,
    Simplex,
    Trace,
    as_point,
    check_finite,
)


class VectorField:
    """Operator ``g(x)`` of a variational inequality on a compact domain.

    Parameters
    ----------
    fun : callable
        ``x -> ndarray`` of the same dimension.
    domain : FeasibleSet
    monotone : bool
        Declared monotonicity (checked statistically in tests only).
    L : float, optional
        Declared Lipschitz constant in the dual norm of the prox setup.
    """

    def __init__(self, fun, domain, monotone=True, L=None, name="field"):
        self._fun = fun
        self.domain = domain
        self.monotone = bool(monotone)
        self.L = L
        self.name = name
        self.calls = 0
        self._lock = threading.Lock()

    @property
    def dim(self):
        return self.domain.dim

    def __call__(self, x):
        x = as_point(x, self.dim)
        with self._lock:
            self.calls += 1
        g = np.asarray(self._fun(x), dtype=float)
        if g.shape != (self.dim,):
            raise ValueError(f"{self.name}: output has shape {g.shape}")
        return g

    def reset_counts(self):
        with self._lock:
            self.calls = 0


class SaddleSpec:
    """Saddle problem ``min_u max_w  u^T C w + mu_u/2 ||u||^2 - mu_w/2 ||w||^2``.

    ``Qu`` and ``Qw`` may be simplices, boxes or Euclidean balls; inner
    best responses are then exact (linear: support point; quadratic:
    Euclidean projection of the unconstrained optimizer).
    """

    def __init__(self, C, Qu, Qw, mu_u=0.0, mu_w=0.0, name="saddle"):
        self.C = np.asarray(C, dtype=float)
        m, n = self.C.shape
        if Qu.dim != m or Qw.dim != n:
            raise ValueError("domain dimensions do not match the payoff matrix")
        if mu_u < 0 or mu_w < 0:
            raise ValueError("quadratic weights must be nonnegative")
        self.Qu, self.Qw = Qu, Qw
        self.mu_u, self.mu_w = float(mu_u), float(mu_w)
        self.name = name
        self.domain = ProductSet(Qu, Qw)
        L = float(np.max(np.abs(self.C))) if self.C.size else 0.0
        self.field = VectorField(self._g, self.domain, True, L + max(self.mu_u, self.mu_w),
                                 name=f"{name}-field")

    @property
    def shape(self):
        return self.C.shape

    def split(self, x):
        m = self.C.shape[0]
        return x[:m], x[m:]

    def value(self, u, w):
        return (float(u @ self.C @ w) + 0.5 * self.mu_u * float(u @ u)
                - 0.5 * self.mu_w * float(w @ w))

    def _g(self, x):
        u, w = self.split(x)
        return np.concatenate([self.C @ w + self.mu_u * u, -(self.C.T @ u - self.mu_w * w)])

    def _best(self, Q, lin, mu):
        # argmax_{z in Q} <lin, z> - mu/2 ||z||^2
        if mu > 0:
            return Q.project(lin / mu)
        return Q.support(lin)[1]

    def best_response_w(self, u):
        return self._best(self.Qw, self.C.T @ u, self.mu_w)

    def best_response_u(self, w):
        return self._best(self.Qu, -(self.C @ w), self.mu_u)

    def gap(self, u, w):
        """``max_w' f(u, w') - min_u' f(u', w)``."""
        if not all(isinstance(Q, (Simplex, Box, EuclideanBall)) for Q in (self.Qu, self.Qw)):
            raise ConfigurationError("exact saddle gap needs simplex, box or ball domains")
        u = as_point(u, self.Qu.dim)
        w = as_point(w, self.Qw.dim)
        hi = self.value(u, self.best_response_w(u))
        lo = self.value(self.best_response_u(w), w)
        return max(0.0, hi - lo)


def saddle_gap(spec, u, w):
    """Primal-dual gap of ``(u, w)``; zero exactly at saddle points."""
    if not hasattr(spec, "gap"):
        raise ConfigurationError("saddle spec has no exact inner solver")
    return spec.gap(u, w)


def weighted_gap(points, field_values, weights, domain):
    """Weak VI gap of weighted points.

    Returns
    -------
    (float, bool)
        The gap value and whether it is exact. Domains without a support
        function fall back to a scan over ``domain.vertices()`` and are
        reported as approximate.
    """
    Y = np.asarray(points, dtype=float)
    G = np.asarray(field_values, dtype=float)
    w = np.asarray(weights, dtype=float)
    W = float(w.sum())
    if W <= 0:
        raise ValueError("weights must have a positive sum")
    s = float(np.einsum("k,ki,ki->", w, G, Y))
    gsum = w @ G
    try:
        smax, _ = domain.support(-gsum)
        exact = True
    except ConfigurationError:
        V = domain.vertices()
        if V is None:
            return float("nan"), False
        smax = float(np.max(V @ (-gsum)))
        exact = False
    return (s + smax) / W, exact


def _trace_gap(trace, domain):
    pts = trace.info["points"]
    return weighted_gap(pts, trace.info["field_values"], trace.info["point_weights"], domain)


def mirror_prox(field, prox, L, x0, N):
    """Mirror Prox with a fixed constant ``L``.

    ``y = step(x, g(x))``, ``x+ = step(x, g(y))``, both with step ``1/L``.
    The trace stores ``y_1..y_N`` (entry 0 is ``x0``) with uniform weights;
    ``trace.info["gap"]`` holds the weighted gap of the ``y`` average.
    """
    if not L > 0:
        raise ConfigurationError("L must be positive")
    h = 1.0 / L
    x = as_point(x0, field.dim)
    trace = Trace(counter=field)
    trace.record(x, float("nan"), L, 0.0, float("nan"))
    pts, gvals = [], []
    xs = [x]
    for k in range(N):
        gx = field(x)
        y = prox.step(x, gx, h)
        gy = field(y)
        x = prox.step(x, gy, h)
        check_finite(k + 1, y, gy, x)
        pts.append(y)
        gvals.append(gy)
        xs.append(x)
        trace.record(y, float("nan"), L, 1.0, prox.dual_norm(gy))
    trace.oracle_grad_calls = field.calls
    trace.info.update(points=pts, field_values=gvals, point_weights=[1.0] * N, x_sequence=xs)
    if N > 0:
        trace.info["gap"], trace.info["gap_exact"] = _trace_gap(trace, field.domain)
    return trace


def universal_mirror_prox(field, prox, epsilon, L0=1.0, budget=60, x0=None, max_iter=10 ** 6):
    """Mirror Prox with the halving/doubling rule for ``L``.

    Each iteration starts from half of the previous constant and doubles it
    until

        <g(y) - g(x), y - x+> <= L V(y, x) + L V(x+, y) + epsilon/2.

    The second divergence is taken from ``y`` to ``x+``: this is the
    orientation the three-point argument behind the gap bound produces, and
    it matters for non-Euclidean setups.

    The output average uses weights ``1/L_k``; the run stops when the
    weighted gap is at most ``epsilon``. A trial whose step output is not
    exactly representable (an entropy coordinate pushed from a
    non-negligible value to the floor) counts as a failed test, since the
    gap analysis needs exact steps. Coordinates that are already below
    ``sqrt(floor)`` may stay clamped; otherwise runs on games with dominated
    strategies stall with ever larger ``L``.

    Raises
    ------
    AdaptivityError
        When ``budget`` doublings do not produce an accepted step.
    """
    if not epsilon > 0 or not L0 > 0:
        raise ConfigurationError("epsilon and L0 must be positive")
    x = prox.start_point() if x0 is None else as_point(x0, field.dim)
    L = float(L0)
    trace = Trace(counter=field)
    trace.record(x, float("nan"), L, 0.0, float("nan"))
    pts, gvals, wts, trials = [], [], [], []
    Gsum = np.zeros(field.dim)
    S = 0.0
    W = 0.0
    gap = float("inf")
    exact = True
    for k in range(max_iter):
        gx = field(x)
        L = L / 2.0
        for t in range(budget):
            h = 1.0 / L
            y = prox.step(x, gx, h)
            gy = field(y)
            xn = prox.step(x, gy, h)
            check_finite(k + 1, y, gy, xn)
            lhs = float((gy - gx) @ (y - xn))
            rhs = L * prox.bregman(y, x) + L * prox.bregman(xn, y) + 0.5 * epsilon
            # a step whose exact output underflows is treated as rejected
            if lhs <= rhs and prox.representable(y, x) and prox.representable(xn, x):
                break
            L *= 2.0
        else:
            raise AdaptivityError(f"no accepted step after {budget} doublings at iteration {k}")
        trials.append(t + 1)
        a = 1.0 / L
        pts.append(y)
        gvals.append(gy)
        wts.append(a)
        W += a
        S += a * float(gy @ y)
        Gsum += a * gy
        x = xn
        trace.record(y, float("nan"), L, a, prox.dual_norm(gy))
        try:
            smax, _ = field.domain.support(-Gsum)
        except ConfigurationError:
            smax, exact = float("nan"), False
        gap = (S + smax) / W
        if gap <= epsilon:
            trace.converged = True
            break
    trace.oracle_grad_calls = field.calls
    trace.info.update(points=pts, field_values=gvals, point_weights=wts, gap=gap,
                      gap_exact=exact, trials=trials, iterations=len(pts))
    return trace


def averaged_point(trace):
    """Weighted average of the stored ``y`` points."""
    w = np.asarray(trace.info["point_weights"], dtype=float)
    return (w / w.sum()) @ np.asarray(trace.info["points"])


def vi_radius_sq(prox, x0):
    """``max_{x in Q} V(x, x0)`` for the closed-form (setup, domain) pairs."""
    return prox.max_radius_sq(x0)


def iteration_bound(L_nu, nu, R_sq, epsilon):
    """``(2 L_nu R^{1+nu} / epsilon)^{2/(1+nu)}``."""
    R = math.sqrt(R_sq)
    return (2.0 * L_nu * R ** (1.0 + nu) / epsilon) ** (2.0 / (1.0 + nu))

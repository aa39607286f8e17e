"""Shared vocabulary: norms, feasible sets, oracles, problems and traces."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels


class FomError(Exception):
    """Base class for errors raised by the toolkit."""


class ConfigurationError(FomError, ValueError):
    """An unsupported or inconsistent combination of inputs."""


class DomainError(FomError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class DivergenceError(FomError, FloatingPointError):
    """A method produced a non-finite value.

    Attributes
    ----------
    step : int
        Index of the iteration at which the non-finite value appeared.
    """

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite value encountered at step {step}")


class AdaptivityError(FomError, RuntimeError):
    """The adaptive inner loop ran out of trials without accepting a step."""


class BreakdownError(FomError, ArithmeticError):
    """A Krylov recurrence hit a direction of non-positive curvature."""


def as_point(x, dim=None):
    """Convert ``x`` to a finite 1-D float array, checking its dimension."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] == 0:
        raise ValueError(f"expected a non-empty vector, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite entries")
    return x


# ---------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class NormSpec:
    """An l_p norm with ``p >= 1`` (``p = inf`` allowed)."""

    p: float = 2.0

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError(f"norm exponent must be >= 1, got {self.p}")

    @classmethod
    def euclidean(cls):
        return cls(2.0)

    @property
    def dual_p(self):
        if self.p == 1:
            return math.inf
        if math.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1.0)

    @property
    def is_euclidean(self):
        return self.p == 2


def _lp(v, p):
    a = np.abs(v)
    if math.isinf(p):
        return float(a.max())
    if p == 1:
        return float(a.sum())
    if p == 2:
        return float(np.sqrt(a @ a))
    m = a.max()
    if m == 0:
        return 0.0
    return float(m * np.sum((a / m) ** p) ** (1.0 / p))


def norm(v, spec=NormSpec()):
    """Norm of ``v`` under ``spec``."""
    return _lp(as_point(v), spec.p)


def dual_norm(v, spec=NormSpec()):
    """Dual norm of ``v``: the l_q norm with ``1/p + 1/q = 1``."""
    return _lp(as_point(v), spec.dual_p)


# ---------------------------------------------------------------------------
# feasible sets


class FeasibleSet:
    """Closed convex set with a cheap Euclidean projection."""

    dim: int
    compact = False

    def contains(self, x, tol=1e-12):
        raise NotImplementedError

    def project(self, x):
        raise NotImplementedError

    def support(self, g):
        """Return ``(max_{x in set} <g, x>, maximizer)``; compact sets only."""
        raise ConfigurationError(f"{type(self).__name__} is unbounded")

    def vertices(self):
        """Extreme points when there are finitely many and few of them."""
        return None


@dataclass(frozen=True)
class FreeSpace(FeasibleSet):
    dim: int

    def contains(self, x, tol=1e-12):
        return np.shape(x) == (self.dim,)

    def project(self, x):
        return np.array(x, dtype=float)


@dataclass(frozen=True)
class NonnegOrthant(FeasibleSet):
    dim: int

    def contains(self, x, tol=1e-12):
        return bool(np.all(np.asarray(x) >= -tol))

    def project(self, x):
        return np.maximum(np.asarray(x, dtype=float), 0.0)


@dataclass(frozen=True)
class FreeTimesOrthant(FeasibleSet):
    """Product of a free block (first ``n_free`` coordinates) and an orthant."""

    n_free: int
    n_orthant: int

    @property
    def dim(self):
        return self.n_free + self.n_orthant

    def contains(self, x, tol=1e-12):
        return bool(np.all(np.asarray(x)[self.n_free:] >= -tol))

    def project(self, x):
        y = np.array(x, dtype=float)
        y[self.n_free:] = np.maximum(y[self.n_free:], 0.0)
        return y


class Box(FeasibleSet):
    compact = True

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise ValueError("box bounds must be vectors of equal length")
        if np.any(self.lo > self.hi):
            raise DomainError("box requires lo <= hi coordinatewise")
        self.dim = self.lo.shape[0]

    def contains(self, x, tol=1e-12):
        x = np.asarray(x)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def project(self, x):
        return np.clip(np.asarray(x, dtype=float), self.lo, self.hi)

    def support(self, g):
        g = np.asarray(g, dtype=float)
        x = np.where(g >= 0, self.hi, self.lo)
        return float(g @ x), x


class EuclideanBall(FeasibleSet):
    compact = True

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        if not self.radius > 0:
            raise DomainError("ball radius must be positive")
        self.dim = self.center.shape[0]

    def contains(self, x, tol=1e-12):
        return float(np.linalg.norm(np.asarray(x) - self.center)) <= self.radius + tol

    def project(self, x):
        d = np.asarray(x, dtype=float) - self.center
        r = np.linalg.norm(d)
        if r <= self.radius:
            return self.center + d
        return self.center + d * (self.radius / r)

    def support(self, g):
        g = np.asarray(g, dtype=float)
        gn = np.linalg.norm(g)
        if gn == 0:
            return float(g @ self.center), self.center.copy()
        x = self.center + self.radius * g / gn
        return float(g @ self.center + self.radius * gn), x


@dataclass(frozen=True)
class Simplex(FeasibleSet):
    """The unit simplex ``{x >= 0, sum x = 1}``."""

    dim: int
    compact = True

    def contains(self, x, tol=1e-12):
        x = np.asarray(x)
        return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol * max(1, self.dim))

    def project(self, x):
        return _kernels.project_simplex(np.asarray(x, dtype=float))

    def support(self, g):
        g = np.asarray(g, dtype=float)
        i = int(np.argmax(g))
        x = np.zeros(self.dim)
        x[i] = 1.0
        return float(g[i]), x

    def vertices(self):
        return np.eye(self.dim)

    def center(self):
        return np.full(self.dim, 1.0 / self.dim)


class ProductSet(FeasibleSet):
    """Cartesian product of sets acting on consecutive coordinate blocks."""

    def __init__(self, *blocks):
        self.blocks = tuple(blocks)
        self.sizes = tuple(b.dim for b in blocks)
        self.offsets = tuple(np.cumsum((0,) + self.sizes[:-1]))
        self.dim = int(sum(self.sizes))
        self.compact = all(b.compact for b in blocks)

    def split(self, x):
        x = np.asarray(x)
        return [x[o:o + s] for o, s in zip(self.offsets, self.sizes)]

    def contains(self, x, tol=1e-12):
        return all(b.contains(p, tol) for b, p in zip(self.blocks, self.split(x)))

    def project(self, x):
        return np.concatenate([b.project(p) for b, p in zip(self.blocks, self.split(x))])

    def support(self, g):
        vals, xs = zip(*(b.support(p) for b, p in zip(self.blocks, self.split(g))))
        return float(sum(vals)), np.concatenate(xs)


# ---------------------------------------------------------------------------
# oracles


class FirstOrderOracle:
    """Value/subgradient oracle with call counters.

    ``oracle(x)`` returns ``(value, subgradient)`` and counts one gradient
    call; ``oracle.value(x)`` returns only the value and counts one value
    call. Counter updates are guarded by a lock so a shared oracle stays
    consistent, but a single run should own its oracle.

    Parameters
    ----------
    fun_grad : callable
        ``x -> (float, ndarray)``.
    dim : int
    fun : callable, optional
        Cheaper value-only evaluation; defaults to ``fun_grad(x)[0]``.
    name : str
    """

    def __init__(self, fun_grad, dim, fun=None, name="oracle"):
        self._fun_grad = fun_grad
        self._fun = fun
        self.dim = int(dim)
        self.name = name
        self.grad_calls = 0
        self.value_calls = 0
        self._lock = threading.Lock()

    def __call__(self, x):
        x = as_point(x, self.dim)
        with self._lock:
            self.grad_calls += 1
        f, g = self._fun_grad(x)
        g = np.asarray(g, dtype=float)
        if g.shape != (self.dim,):
            raise ValueError(f"{self.name}: subgradient has shape {g.shape}")
        return float(f), g

    def value(self, x):
        x = as_point(x, self.dim)
        with self._lock:
            self.value_calls += 1
        if self._fun is not None:
            return float(self._fun(x))
        return float(self._fun_grad(x)[0])

    def grad(self, x):
        return self(x)[1]

    def peek(self, x):
        """Objective value without touching counters or oracle state."""
        x = as_point(x, self.dim)
        if self._fun is not None:
            return float(self._fun(x))
        return float(self._fun_grad(x)[0])

    def peek_grad(self, x):
        """Value and subgradient without touching counters or oracle state."""
        f, g = self._fun_grad(as_point(x, self.dim))
        return float(f), np.asarray(g, dtype=float)

    @property
    def evaluations(self):
        """Number of function values computed (gradient calls return one too)."""
        return self.grad_calls + self.value_calls

    def reset_counts(self):
        with self._lock:
            self.grad_calls = 0
            self.value_calls = 0


def finite_diff_check(oracle, x, h=1e-6):
    """Largest relative discrepancy between central differences and the oracle.

    Returns ``max_i |D_i - g_i| / (1 + |D_i|)`` with ``D_i`` the central
    difference along coordinate ``i``; scaling by the difference quotient
    keeps a wrong gradient from shrinking its own error.
    """
    if not h > 0:
        raise ValueError("step h must be positive")
    x = as_point(x, oracle.dim)
    _, g = oracle(x)
    worst = 0.0
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        fp, fm = oracle.value(x + e), oracle.value(x - e)
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise DomainError(f"non-finite oracle value near x along coordinate {i}")
        d = (fp - fm) / (2 * h)
        worst = max(worst, abs(d - g[i]) / (1.0 + abs(d)))
    return worst


# ---------------------------------------------------------------------------
# problems and traces


@dataclass
class Problem:
    """A minimization task ``min_{x in set} f(x)`` plus whatever is known about it.

    ``constants`` may hold ``L1`` (gradient Lipschitz), ``L0`` (subgradient
    bound), ``mu`` (strong convexity) and ``R`` (distance to the optimum).
    ``quadratic`` holds ``(A, b)`` when ``f = <Ax,x>/2 - <b,x>``.
    """

    oracle: FirstOrderOracle
    set: FeasibleSet
    x_star: Optional[np.ndarray] = None
    f_star: Optional[float] = None
    constants: dict = field(default_factory=dict)
    quadratic: Optional[tuple] = None
    name: str = "problem"

    def __post_init__(self):
        if self.set.dim != self.oracle.dim:
            raise ValueError("oracle and feasible set dimensions differ")
        if self.x_star is not None:
            self.x_star = as_point(self.x_star, self.dim)
            if not self.set.contains(self.x_star, 1e-9):
                raise ValueError("known optimum lies outside the feasible set")
        if self.f_star is not None and not math.isfinite(self.f_star):
            raise ValueError("f_star must be finite")

    @property
    def dim(self):
        return self.oracle.dim

    def gap(self, x):
        """``f(x) - f*`` without touching the call counters."""
        if self.f_star is None:
            raise ConfigurationError(f"{self.name} has no known optimal value")
        return self.oracle.peek(x) - self.f_star


@dataclass
class Trace:
    """Per-iteration record of a run.

    All per-iteration sequences have one entry per stored iterate, index 0
    being the starting point. ``weights[k]`` is the averaging weight of
    iterate ``k``; the starting point carries weight 0 unless the method
    averages over ``0..N-1``.
    """

    iterates: list = field(default_factory=list)
    values: list = field(default_factory=list)
    step_constants: list = field(default_factory=list)
    weights: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    oracle_grad_calls: int = 0
    oracle_value_calls: int = 0
    converged: bool = False
    info: dict = field(default_factory=dict)
    events: list = field(default_factory=list)
    counter: object = field(default=None, repr=False)
    grad_call_log: list = field(default_factory=list)
    value_call_log: list = field(default_factory=list)

    def record(self, x, value, step_constant=float("nan"), weight=0.0, grad_norm=float("nan")):
        c = self.counter
        if c is not None:
            # cumulative counts at the moment the iterate is stored
            self.grad_call_log.append(int(getattr(c, "grad_calls", getattr(c, "calls", 0))))
            self.value_call_log.append(int(getattr(c, "value_calls", 0)))
        self.iterates.append(np.array(x, dtype=float))
        self.values.append(float(value))
        self.step_constants.append(float(step_constant))
        self.weights.append(float(weight))
        self.grad_norms.append(float(grad_norm))

    def __len__(self):
        return len(self.iterates)

    @property
    def x(self):
        return self.iterates[-1]

    @property
    def averaged_point(self):
        w = np.asarray(self.weights, dtype=float)
        if w.sum() <= 0:
            return self.iterates[-1].copy()
        X = np.asarray(self.iterates)
        return (w / w.sum()) @ X

    def check_lengths(self):
        n = len(self.iterates)
        return all(len(s) == n for s in (self.values, self.step_constants,
                                         self.weights, self.grad_norms))

    def take_counts(self, oracle):
        self.oracle_grad_calls = oracle.grad_calls
        self.oracle_value_calls = oracle.evaluations


def check_finite(step, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise DivergenceError(step)


"""Prox-functions, Bregman divergences and closed-form mirror steps.

A prox setup bundles a norm, a prox-function ``d`` that is 1-strongly
convex in that norm on the feasible set, and an exact solver for

    argmin_{x in Q} { h <g, x> + h c(x) + V(x, x_k) }

where ``c`` is an optional composite term carried by handle (see
:mod:`fomkit.model`).
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .core import (
    Box,
    ConfigurationError,
    DomainError,
    EuclideanBall,
    FeasibleSet,
    FreeSpace,
    NonnegOrthant,
    NormSpec,
    ProductSet,
    Simplex,
    _lp,
    as_point,
)


_NEGLIGIBLE = math.sqrt(_kernels.ENTROPY_FLOOR)


def project_simplex_euclidean(v):
    """Euclidean projection onto the unit simplex.

    Uses the sorted-threshold rule: with ``u`` the entries of ``v`` in
    decreasing order, the projection is ``max(v - theta, 0)`` where ``theta``
    is fixed by the largest index ``j`` with ``u_j > (sum_{i<=j} u_i - 1)/j``.
    """
    return _kernels.project_simplex(as_point(v))


def soft_threshold(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


class ProxSetup:
    """Norm, prox-function and mirror-step solver over a feasible set."""

    set: FeasibleSet
    norm_spec: NormSpec
    #: constant C with d(x - x0) <= C ||x - x0||^2, when it exists
    restart_constant = None

    @property
    def dim(self):
        return self.set.dim

    def norm(self, v):
        return _lp(np.asarray(v, dtype=float), self.norm_spec.p)

    def dual_norm(self, v):
        return _lp(np.asarray(v, dtype=float), self.norm_spec.dual_p)

    def d(self, x):
        raise NotImplementedError

    def grad_d(self, x):
        raise NotImplementedError

    def bregman(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        return max(0.0, self.d(x) - self.d(y) - float(self.grad_d(y) @ (x - y)))

    def step(self, x, g, h, composite=None):
        raise NotImplementedError

    def representable(self, x, start=None):
        """Whether the step output ``x`` is exact (no floor clamping).

        With ``start`` given, only coordinates clamped from a non-negligible
        starting value count as inexact.
        """
        return True

    def max_radius_sq(self, x0):
        """``max_{x in Q} V(x, x0)``."""
        raise ConfigurationError(f"{type(self).__name__}: no closed-form set radius")

    def start_point(self):
        """The minimizer of ``d`` over the set, the natural starting point."""
        raise NotImplementedError


class EuclideanProx(ProxSetup):
    """``d(x) = ||x||_2^2 / 2``; the mirror step is a projected gradient step."""

    norm_spec = NormSpec(2.0)
    restart_constant = 0.5

    def __init__(self, set):
        if not isinstance(set, (FreeSpace, Box, EuclideanBall, Simplex, NonnegOrthant)) \
                and not hasattr(set, "project"):
            raise ConfigurationError(f"unsupported set {set!r} for the Euclidean setup")
        self.set = set

    def d(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ x)

    def grad_d(self, x):
        return np.array(x, dtype=float)

    def bregman(self, x, y):
        r = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        return 0.5 * float(r @ r)

    def step(self, x, g, h, composite=None):
        v = x - h * g
        kind = getattr(composite, "kind", "none")
        if kind == "none":
            return self.set.project(v)
        if kind == "l1":
            if isinstance(self.set, FreeSpace):
                return soft_threshold(v, h * composite.weight)
            if isinstance(self.set, Box):
                return self.set.project(soft_threshold(v, h * composite.weight))
            raise ConfigurationError("l1 composite needs a free-space or box set")
        if kind == "indicator":
            if isinstance(self.set, FreeSpace):
                return composite.set.project(v)
            raise ConfigurationError("indicator composite needs the free-space setup")
        if kind == "custom":
            return composite.solve(self, x, g, h)
        raise ConfigurationError(f"composite {kind!r} is incompatible with the Euclidean setup")

    def max_radius_sq(self, x0):
        s = self.set
        x0 = np.asarray(x0, dtype=float)
        if isinstance(s, Simplex):
            return 0.5 * float(max(np.sum((e - x0) ** 2) for e in s.vertices()))
        if isinstance(s, Box):
            return 0.5 * float(np.sum(np.maximum((s.lo - x0) ** 2, (s.hi - x0) ** 2)))
        if isinstance(s, EuclideanBall):
            return 0.5 * (float(np.linalg.norm(x0 - s.center)) + s.radius) ** 2
        return super().max_radius_sq(x0)

    def start_point(self):
        s = self.set
        if isinstance(s, Simplex):
            return s.center()
        if isinstance(s, EuclideanBall):
            return s.center.copy()
        return s.project(np.zeros(s.dim))


class EntropyProx(ProxSetup):
    """``d(x) = sum x_i ln x_i`` on the simplex (1-strongly convex in l1).

    The mirror step is the multiplicative update
    ``x_i <- x_i exp(-h g_i) / sum_j x_j exp(-h g_j)``.
    """

    norm_spec = NormSpec(1.0)

    def __init__(self, dim_or_set):
        if isinstance(dim_or_set, FeasibleSet):
            if not isinstance(dim_or_set, Simplex):
                raise ConfigurationError("entropy setup requires the simplex")
            self.set = dim_or_set
        else:
            self.set = Simplex(int(dim_or_set))

    def d(self, x):
        x = np.asarray(x, dtype=float)
        pos = x > 0
        return float(np.sum(x[pos] * np.log(x[pos])))

    def grad_d(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise DomainError("entropy gradient needs strictly positive coordinates")
        return 1.0 + np.log(x)

    def bregman(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if np.any(y <= 0):
            raise DomainError("entropy divergence needs y with positive coordinates")
        pos = x > 0
        v = float(np.sum(x[pos] * np.log(x[pos] / y[pos]))) - float(x.sum()) + float(y.sum())
        return max(0.0, v)

    def step(self, x, g, h, composite=None):
        kind = getattr(composite, "kind", "none")
        if kind == "none":
            return _kernels.entropy_step(x, h * np.asarray(g, dtype=float))
        if kind == "entropy":
            # argmin h<g,x> + h*mu*sum x ln x + KL(x, x_k): x ∝ (x_k e^{-hg})^{1/(1+h mu)}
            a = 1.0 + h * composite.weight
            z = (np.log(np.maximum(x, _kernels.ENTROPY_FLOOR)) - h * np.asarray(g)) / a
            return _kernels.entropy_step(np.ones_like(z) / z.size, -z)
        if kind == "custom":
            return composite.solve(self, x, g, h)
        raise ConfigurationError(f"composite {kind!r} is incompatible with the entropy setup")

    def representable(self, x, start=None):
        ok = np.asarray(x) > _kernels.ENTROPY_FLOOR
        if start is not None:
            # coordinates already below sqrt(floor) are effectively zero; letting
            # them sit at the floor avoids an endless doubling of L near faces
            ok |= np.asarray(start) <= _NEGLIGIBLE
        return bool(np.all(ok))

    def max_radius_sq(self, x0):
        x0 = np.asarray(x0, dtype=float)
        if np.any(x0 <= 0):
            raise DomainError("entropy radius needs an interior starting point")
        return float(-np.log(x0.min()))

    def start_point(self):
        return self.set.center()


def pnorm_grad_d(x, p):
    """Gradient of ``d(x) = ||x||_p^2 / (2(p-1))``."""
    x = np.asarray(x, dtype=float)
    nx = _lp(x, p)
    if nx == 0:
        return np.zeros_like(x)
    # scaled form avoids overflow of nx ** (2 - p) for tiny inputs
    return nx * np.sign(x) * (np.abs(x) / nx) ** (p - 1.0) / (p - 1.0)


def pnorm_mirror_map_inverse(s, p):
    """The unique ``x`` with ``grad d(x) = s`` for ``d = ||x||_p^2 / (2(p-1))``.

    This is the gradient of the conjugate ``(p-1)/2 ||s||_q^2`` with
    ``1/p + 1/q = 1``.
    """
    if not 1.0 < p <= 2.0:
        raise DomainError(f"p-norm prox needs 1 < p <= 2, got {p}")
    s = np.asarray(s, dtype=float)
    q = p / (p - 1.0)
    ns = _lp(s, q)
    if ns == 0:
        return np.zeros_like(s)
    return (p - 1.0) * ns * np.sign(s) * (np.abs(s) / ns) ** (q - 1.0)


class PNormProx(ProxSetup):
    """``d(x) = ||x||_p^2 / (2(p-1))`` on the whole space, ``1 < p <= 2``."""

    def __init__(self, p, dim_or_set):
        if not 1.0 < p <= 2.0:
            raise DomainError(f"p-norm prox needs 1 < p <= 2, got {p}")
        s = dim_or_set if isinstance(dim_or_set, FeasibleSet) else FreeSpace(int(dim_or_set))
        if not isinstance(s, FreeSpace):
            raise ConfigurationError("p-norm setup is only supported on the free space")
        self.p = float(p)
        self.set = s
        self.norm_spec = NormSpec(self.p)
        self.restart_constant = 1.0 / (2.0 * (self.p - 1.0))

    def d(self, x):
        return _lp(np.asarray(x, dtype=float), self.p) ** 2 / (2.0 * (self.p - 1.0))

    def grad_d(self, x):
        return pnorm_grad_d(x, self.p)

    def step(self, x, g, h, composite=None):
        kind = getattr(composite, "kind", "none")
        if kind == "none":
            return pnorm_mirror_map_inverse(self.grad_d(x) - h * np.asarray(g), self.p)
        if kind == "custom":
            return composite.solve(self, x, g, h)
        raise ConfigurationError(f"composite {kind!r} is incompatible with the p-norm setup")

    def start_point(self):
        return np.zeros(self.dim)


class ProductProx(ProxSetup):
    """Block-separable setup on a product of sets.

    ``V`` is the sum of block divergences; it is 1-strongly convex in the
    norm ``sqrt(sum_i ||x_i||_i^2)``.
    """

    def __init__(self, *blocks):
        self.blocks = tuple(blocks)
        self.set = ProductSet(*(b.set for b in blocks))

    def _split(self, x):
        return self.set.split(x)

    def norm(self, v):
        return math.sqrt(sum(b.norm(p) ** 2 for b, p in zip(self.blocks, self._split(v))))

    def dual_norm(self, v):
        return math.sqrt(sum(b.dual_norm(p) ** 2 for b, p in zip(self.blocks, self._split(v))))

    def d(self, x):
        return sum(b.d(p) for b, p in zip(self.blocks, self._split(x)))

    def grad_d(self, x):
        return np.concatenate([b.grad_d(p) for b, p in zip(self.blocks, self._split(x))])

    def bregman(self, x, y):
        return sum(b.bregman(px, py) for b, px, py
                   in zip(self.blocks, self._split(x), self._split(y)))

    def step(self, x, g, h, composite=None):
        if composite is not None and getattr(composite, "kind", "none") != "none":
            raise ConfigurationError("product setup does not take composite terms")
        return np.concatenate([b.step(px, pg, h) for b, px, pg
                               in zip(self.blocks, self._split(x), self._split(g))])

    def representable(self, x, start=None):
        if start is None:
            return all(b.representable(p) for b, p in zip(self.blocks, self._split(x)))
        return all(b.representable(p, q) for b, p, q
                   in zip(self.blocks, self._split(x), self._split(start)))

    def max_radius_sq(self, x0):
        return sum(b.max_radius_sq(p) for b, p in zip(self.blocks, self._split(x0)))

    def start_point(self):
        return np.concatenate([b.start_point() for b in self.blocks])


def bregman(setup, x, y):
    """Bregman divergence ``V(x, y) = d(x) - d(y) - <grad d(y), x - y>``."""
    return setup.bregman(as_point(x, setup.dim), as_point(y, setup.dim))


def mirror_step(setup, x, g, h, composite=None):
    """Exact solution of ``argmin_{u in Q} <h g, u - x> + h c(u) + V(u, x)``."""
    if not h > 0:
        raise ValueError("step size must be positive")
    x = as_point(x, setup.dim)
    g = as_point(g, setup.dim)
    return setup.step(x, g, h, composite)


def prox_radius(setup, x0, x):
    """``V(x, x0)``, the squared radius entering the rate bounds."""
    return bregman(setup, x, x0)


def step_residual(setup, x, g, h, x_new, candidates):
    """Largest value of ``<h g + grad d(x+) - grad d(x), x+ - u>`` over ``candidates``.

    For an exact mirror step this is ``<= 0`` for every feasible ``u``.
    """
    s = h * np.asarray(g) + setup.grad_d(x_new) - setup.grad_d(x)
    return float(max(s @ (x_new - u) for u in candidates))

"""(delta, L)-models of an objective.

A model of ``f`` at ``x`` is a value estimate ``f_delta(x)`` and a convex
function ``psi(y, x)`` with ``psi(x, x) = 0`` such that

    0 <= f(y) - f_delta(x) - psi(y, x) <= L/2 ||y - x||^2 + delta.

Here ``psi`` is always a linear part plus an optional composite term kept
by handle, so mirror steps can use the composite's closed form.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import DomainError, FeasibleSet, _lp, as_point


@dataclass(frozen=True)
class CompositeTerm:
    """A simple convex term ``c(x)`` with an exact prox.

    ``kind`` is one of ``"none"``, ``"l1"`` (``weight * ||x||_1``),
    ``"entropy"`` (``weight * sum x ln x``), ``"indicator"`` (of ``set``)
    or ``"custom"`` (``value`` and ``solve`` supplied by the caller).
    """

    kind: str = "none"
    weight: float = 0.0
    set: Optional[FeasibleSet] = None
    value_fn: Optional[Callable] = None
    solve_fn: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in ("none", "l1", "entropy", "indicator", "custom"):
            raise ValueError(f"unknown composite kind {self.kind!r}")
        if self.weight < 0:
            raise ValueError("composite weight must be nonnegative")
        if self.kind == "indicator" and self.set is None:
            raise ValueError("indicator composite needs a set")
        if self.kind == "custom" and (self.value_fn is None or self.solve_fn is None):
            raise ValueError("custom composite needs value_fn and solve_fn")

    @classmethod
    def l1(cls, lam):
        return cls("l1", float(lam))

    @classmethod
    def entropy(cls, mu):
        return cls("entropy", float(mu))

    @classmethod
    def indicator(cls, set):
        return cls("indicator", set=set)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "none":
            return 0.0
        if self.kind == "l1":
            return self.weight * float(np.abs(x).sum())
        if self.kind == "entropy":
            pos = x > 0
            return self.weight * float(np.sum(x[pos] * np.log(x[pos])))
        if self.kind == "indicator":
            return 0.0 if self.set.contains(x, 1e-9) else np.inf
        return float(self.value_fn(x))

    def solve(self, setup, x, g, h):
        return self.solve_fn(setup, x, g, h)


NO_COMPOSITE = CompositeTerm()


@dataclass
class Model:
    """``f_delta`` and ``psi(y) = <linear, y - center> + c(y) - c(center)``."""

    f_delta: float
    linear: np.ndarray
    center: np.ndarray
    composite: CompositeTerm = field(default=NO_COMPOSITE)

    def psi(self, y):
        y = np.asarray(y, dtype=float)
        c = self.composite
        return float(self.linear @ (y - self.center)) + c(y) - c(self.center)


class ModelOracle:
    """Produces models of ``F + c`` from a first-order oracle of ``F``.

    Parameters
    ----------
    oracle : FirstOrderOracle
        Oracle of the smooth (or subdifferentiable) part ``F``.
    composite : CompositeTerm
    declared_delta : float
        The ``delta`` the models are claimed to satisfy.
    """

    def __init__(self, oracle, composite=NO_COMPOSITE, declared_delta=0.0):
        self.oracle = oracle
        self.composite = composite
        self.declared_delta = float(declared_delta)

    @property
    def dim(self):
        return self.oracle.dim

    def query(self, x):
        x = as_point(x, self.dim)
        f, g = self.oracle(x)
        return Model(f + self.composite(x), g, x, self.composite)

    def value(self, x):
        """True objective ``F(x) + c(x)``."""
        return self.oracle.value(x) + self.composite(x)

    def peek(self, x):
        return self.oracle.peek(x) + self.composite(x)

    def reset_counts(self):
        self.oracle.reset_counts()


def linear_model(oracle):
    """Exact first-order model ``psi(y, x) = <grad f(x), y - x>``."""
    return ModelOracle(oracle)


def composite_model(F, g):
    """Model of ``F + g`` linearizing only ``F``.

    Compatibility of ``g`` with a prox setup is checked when the mirror
    step is taken (unsupported pairs raise ``ConfigurationError`` there).
    """
    return ModelOracle(F, composite=g)


def _point_rng(seed, x):
    h = hashlib.blake2b(np.ascontiguousarray(x).tobytes(), digest_size=8).digest()
    return np.random.default_rng([int(seed), int.from_bytes(h, "little")])


class InexactModelOracle(ModelOracle):
    """Seeded, deterministic perturbation of an exact model oracle.

    At each query point the value estimate is lowered by ``e`` drawn from
    ``[delta/4, delta/2]`` and the linear part is tilted by a vector ``t``
    with ``||t||_2 * radius <= e``. For ``||y - x||_2 <= radius`` both sides
    of the sandwich then hold with the original ``L`` and the given delta.
    """

    def __init__(self, base, delta, seed, radius):
        super().__init__(base.oracle, base.composite, base.declared_delta + delta)
        self.base = base
        self.delta = float(delta)
        self.seed = int(seed)
        self.radius = float(radius)

    def query(self, x):
        m = self.base.query(x)
        if self.delta == 0:
            return m
        rng = _point_rng(self.seed, m.center)
        e = self.delta * (0.25 + 0.25 * rng.random())
        t = rng.standard_normal(self.dim)
        t *= e / (self.radius * max(np.linalg.norm(t), 1e-300))
        return Model(m.f_delta - e, m.linear + t, m.center, m.composite)


def inexact_wrap(oracle, delta, seed, radius=1.0):
    """Wrap ``oracle`` with a controlled inexactness of size ``delta``."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if delta == 0:
        return oracle
    return InexactModelOracle(oracle, delta, seed, radius)


def model_check(oracle, L, delta, samples, norm=None):
    """Largest violation of the model sandwich over sample pairs ``(x, y)``.

    Returns ``max(0, max over pairs of lower and upper violations)``.
    ``norm`` defaults to the Euclidean norm.
    """
    nrm = norm or (lambda v: _lp(v, 2.0))
    worst = 0.0
    for x, y in samples:
        m = oracle.query(x)
        gap = oracle.peek(y) - m.f_delta - m.psi(y)
        upper = 0.5 * L * nrm(np.asarray(y) - np.asarray(x)) ** 2 + delta
        worst = max(worst, -gap, gap - upper)
    return max(0.0, worst)


def random_pairs(dim, count, radius, seed=0, center=None, set=None):
    """Sample pairs of points in a ball (then projected onto ``set``)."""
    rng = np.random.default_rng(seed)
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    out = []
    for _ in range(count):
        pts = []
        for _ in range(2):
            d = rng.standard_normal(dim)
            d *= radius * rng.random() ** (1.0 / dim) / np.linalg.norm(d)
            p = c + d
            pts.append(set.project(p) if set is not None else p)
        out.append(tuple(pts))
    return out


def holder_to_smooth_L(L_nu, nu, delta):
    """Smoothness constant that makes a Holder-gradient function ``(delta, L)``-smooth.

    ``L = L_nu * [L_nu / (2 delta) * (1 - nu) / (1 + nu)] ** ((1 - nu) / (1 + nu))``
    """
    if not L_nu > 0:
        raise DomainError("L_nu must be positive")
    if not 0.0 <= nu <= 1.0:
        raise DomainError("nu must lie in [0, 1]")
    if nu == 1.0:
        return float(L_nu)
    if not delta > 0:
        raise DomainError("delta must be positive when nu < 1")
    expo = (1.0 - nu) / (1.0 + nu)
    return float(L_nu * (L_nu / (2.0 * delta) * (1.0 - nu) / (1.0 + nu)) ** expo)

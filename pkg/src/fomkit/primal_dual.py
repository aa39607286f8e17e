"""Accuracy certificates and the dual approach to linearly constrained programs.

For ``min phi(y)`` subject to ``A y = b``, ``y in Q`` with ``phi``
``mu``-strongly convex, the dual objective

    f(x) = max_{y in Q} { <x, b - A y> - phi(y) }

is smooth with gradient ``b - A y(x)``. Running gradient descent on ``f``
from ``x0 = 0`` and averaging the inner maximizers recovers a nearly
feasible, nearly optimal ``y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (
    Box,
    ConfigurationError,
    DomainError,
    EuclideanBall,
    FeasibleSet,
    FirstOrderOracle,
    Simplex,
    as_point,
    check_finite,
)


# ---------------------------------------------------------------------------
# certificates


@dataclass
class Certificate:
    """Computable upper bound on ``f(x_bar) - f*`` valid when ``x*`` is in the ball."""

    gap_value: float
    reference_ball_radius: float


def certificate(points, values, grads, ball, weights=None, f_bar=None):
    """Weighted linearization certificate.

    ``f_bar - (1/W) min_{x in ball} sum_k w_k [f(x_k) + <g_k, x - x_k>]``

    Parameters
    ----------
    points, values, grads : sequences
        Points ``x_k``, values ``f(x_k)`` and (sub)gradients ``g_k``.
    ball : EuclideanBall, Box or Simplex
        The set the minimum is taken over.
    weights : sequence, optional
        Defaults to uniform.
    f_bar : float, optional
        ``f`` at the averaged point; defaults to the weighted mean of
        ``values`` (an upper bound on it by convexity).

    Raises
    ------
    ConfigurationError
        For a set without a closed-form linear minimization.
    """
    if not isinstance(ball, (EuclideanBall, Box, Simplex)):
        raise ConfigurationError("certificate needs a ball, box or simplex")
    X = np.atleast_2d(np.asarray(points, dtype=float))
    F = np.asarray(values, dtype=float)
    G = np.atleast_2d(np.asarray(grads, dtype=float))
    w = np.ones(len(F)) if weights is None else np.asarray(weights, dtype=float)
    W = float(w.sum())
    const = float(w @ F) - float(np.einsum("k,ki,ki->", w, G, X))
    gsum = w @ G
    # min <gsum, x> = -max <-gsum, x>
    lin_min = -ball.support(-gsum)[0]
    lower = (const + lin_min) / W
    if f_bar is None:
        f_bar = float(w @ F) / W
    if isinstance(ball, EuclideanBall):
        radius = ball.radius
    elif isinstance(ball, Box):
        radius = 0.5 * float(np.linalg.norm(ball.hi - ball.lo))
    else:
        radius = math.sqrt(2.0)
    return Certificate(float(f_bar) - lower, float(radius))


# ---------------------------------------------------------------------------
# constrained programs


@dataclass
class ConstrainedProgram:
    """``min phi(y)`` subject to ``A y = b``, ``y in set``.

    Parameters
    ----------
    phi : FirstOrderOracle
        ``mu``-strongly convex in the ``p``-norm on ``set``.
    A, b : arrays
    set : FeasibleSet
    inner_solver : callable
        ``x -> argmax_{y in set} <x, b - A y> - phi(y)``, exact.
    mu : float
    p : {1, 2}
    y_star, phi_star : optional known solution.
    """

    phi: FirstOrderOracle
    A: np.ndarray
    b: np.ndarray
    set: FeasibleSet
    inner_solver: Callable
    mu: float
    p: float = 2.0
    y_star: Optional[np.ndarray] = None
    phi_star: Optional[float] = None
    name: str = "program"
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = as_point(self.b, self.A.shape[0])
        if self.set.dim != self.A.shape[1]:
            raise ValueError("set dimension must equal the number of columns of A")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if self.p not in (1.0, 2.0):
            raise ValueError("p must be 1 or 2")

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    def dual_L(self):
        """Gradient Lipschitz constant of the dual objective."""
        if self.p == 2.0:
            lam = float(np.linalg.eigvalsh(self.A.T @ self.A).max()) if self.A.size else 0.0
            return lam / self.mu
        return float(np.max(np.sum(self.A ** 2, axis=0))) / self.mu

    def y_of(self, x):
        y = np.asarray(self.inner_solver(as_point(x, self.m)), dtype=float)
        return y

    def dual_value(self, x):
        x = as_point(x, self.m)
        y = self.y_of(x)
        return float(x @ (self.b - self.A @ y)) - self.phi.peek(y)


def dual_oracle(prog):
    """First-order oracle of the dual objective; ``oracle.L`` holds its smoothness."""

    def fg(x):
        y = prog.y_of(x)
        r = prog.b - prog.A @ y
        return float(x @ r) - prog.phi.peek(y), r

    orc = FirstOrderOracle(fg, prog.m, name=f"{prog.name}-dual")
    orc.L = prog.dual_L()
    return orc


@dataclass
class RestoreResult:
    x_bar: np.ndarray
    y_bar: np.ndarray
    iterations: int
    gaps: list
    residuals: list
    converged: bool
    L: float
    info: dict = field(default_factory=dict)


def dual_solve_restore(prog, epsilon, epsilon_tilde, N_cap=10 ** 6, accelerated=False):
    """Solve the dual from ``x0 = 0`` and restore a primal point.

    Plain variant: gradient descent with step ``1/L``; ``x_bar`` averages
    ``x_1..x_N`` and ``y_bar`` averages ``y(x_0)..y(x_{N-1})``. The run
    stops at the first ``N`` with

        f(x_bar) + phi(y_bar) <= epsilon  and  ||A y_bar - b||_2 <= epsilon_tilde.

    Accelerated variant: the similar-triangles recursion on the dual with
    ``y_bar = sum_k alpha_k y(y_k) / A_N`` (``y_k`` the gradient points) and
    the last ``x`` as dual output.

    Returns
    -------
    RestoreResult
        ``converged`` is False when ``N_cap`` is reached first.
    """
    if not epsilon > 0 or not epsilon_tilde > 0:
        raise ConfigurationError("tolerances must be positive")
    L = prog.dual_L()
    if not L > 0:
        raise DomainError("dual objective has zero curvature (A = 0)")
    A, b = prog.A, prog.b
    phi = prog.phi
    x = np.zeros(prog.m)
    xsum = np.zeros(prog.m)
    ysum = np.zeros(prog.n)
    gaps, res = [], []
    converged = False
    if accelerated:
        Ak, alpha = 0.0, 0.0
        u = x.copy()
    N = 0
    for N in range(1, N_cap + 1):
        if not accelerated:
            y = prog.y_of(x)
            g = b - A @ y
            ysum += y
            x = x - g / L
            xsum += x
            check_finite(N, x)
            x_out = xsum / N
            y_bar = ysum / N
        else:
            alpha = 0.5 / L + math.sqrt(0.25 / L ** 2 + alpha ** 2)
            A_new = Ak + alpha
            z = (alpha * u + Ak * x) / A_new
            y = prog.y_of(z)
            g = b - A @ y
            ysum += alpha * y
            u = u - alpha * g
            x = (alpha * u + Ak * x) / A_new
            Ak = A_new
            check_finite(N, x)
            x_out = x
            y_bar = ysum / Ak
        gap = prog.dual_value(x_out) + phi.peek(y_bar)
        r = float(np.linalg.norm(A @ y_bar - b))
        gaps.append(gap)
        res.append(r)
        if gap <= epsilon and r <= epsilon_tilde:
            converged = True
            break
    info = {"A_N": Ak} if accelerated else {}
    return RestoreResult(x_out, y_bar, N, gaps, res, converged, L, info)


def theorem_budget(L, R, epsilon, epsilon_tilde):
    """``max(2 L R^2 / epsilon, 2 L R / epsilon_tilde)``."""
    return max(2.0 * L * R * R / epsilon, 2.0 * L * R / epsilon_tilde)


def regularize(oracle, mu_reg, center, prox):
    """Oracle of ``phi(y) + mu_reg V(y, center)``."""
    if not mu_reg > 0:
        raise ValueError("mu_reg must be positive")
    c = as_point(center, oracle.dim)
    gc = prox.grad_d(c)

    def fg(y):
        f, g = oracle.peek_grad(y)
        return f + mu_reg * prox.bregman(y, c), g + mu_reg * (prox.grad_d(y) - gc)

    return FirstOrderOracle(fg, oracle.dim, name=f"{oracle.name}-reg")


def regularization_weight(epsilon, V_star):
    """Largest admissible ``mu = epsilon / (2 V(y*, y0))``."""
    if V_star <= 0:
        return float("inf")
    return epsilon / (2.0 * V_star)


def smallest_positive_eigenvalue(M, rtol=1e-10):
    """Smallest eigenvalue of the symmetric PSD ``M`` above ``rtol * max``."""
    ev = np.linalg.eigvalsh(np.asarray(M, dtype=float))
    top = float(ev.max()) if ev.size else 0.0
    pos = ev[ev > rtol * max(top, 1e-300)]
    if pos.size == 0:
        raise DomainError("matrix has no positive eigenvalue")
    return float(pos.min())


def dual_size_bound(prog, y_star=None, squared=False):
    """Bound on the norm of the minimal-norm dual solution.

    ``||x*||_2^2 <= ||grad phi(y*)||_2^2 / sigma`` with ``sigma`` the
    smallest positive eigenvalue of ``A A^T``. Returns the bound on
    ``||x*||_2`` (or its square with ``squared=True``).
    """
    y = prog.y_star if y_star is None else y_star
    if y is None:
        raise ConfigurationError("dual_size_bound needs y*")
    sigma = smallest_positive_eigenvalue(prog.A @ prog.A.T)
    if sigma < 1e-14:
        raise DomainError("degenerate constraints: smallest positive eigenvalue vanishes")
    g = prog.phi.peek_grad(y)[1]
    r2 = float(g @ g) / sigma
    return r2 if squared else math.sqrt(r2)


def slater_dual_bound(f0, h, x_bar, f0_min):
    """``(f0(x_bar) - min f0) / gamma`` with ``gamma = min_i -h_i(x_bar)``.

    ``h`` is a callable returning the constraint values (scalar or array)
    or a list of such callables.

    Raises
    ------
    DomainError
        If ``x_bar`` is not a strict Slater point.
    """
    if callable(h):
        hv = np.atleast_1d(np.asarray(h(x_bar), dtype=float))
    else:
        hv = np.asarray([float(hi(x_bar)) for hi in h])
    gamma = float(np.min(-hv))
    if not gamma > 0:
        raise DomainError("x_bar is not a strict Slater point")
    return (float(f0(x_bar)) - float(f0_min)) / gamma


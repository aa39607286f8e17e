"""Test problems with exact oracles and known optima.

Subgradient choices at kinks are documented per function. All random
generators take an explicit seed that is stored in ``params``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from . import _kernels
from .core import (
    DomainError,
    FirstOrderOracle,
    FreeSpace,
    Problem,
    Simplex,
)
from .primal_dual import ConstrainedProgram
from .vi import SaddleSpec


@dataclass
class ZooProblem:
    """A :class:`Problem` plus its family tag, parameters and a suggested start."""

    problem: Problem
    family: str
    params: dict
    x0: Optional[np.ndarray] = None
    reference_solver: Optional[Callable] = None
    extras: dict = field(default_factory=dict)

    @property
    def oracle(self):
        return self.problem.oracle

    @property
    def constants(self):
        return self.problem.constants


# ---------------------------------------------------------------------------
# lower-bound instances


def _tridiag_solve(m, rhs):
    ab = np.zeros((3, m))
    ab[0, 1:] = -1.0
    ab[1, :] = 2.0
    ab[2, :-1] = -1.0
    return solve_banded((1, 1), ab, rhs)


def worst_case_smooth(L, N, n=None):
    """``L/8 [x1^2 + sum_{i<2N+1} (x_i - x_{i+1})^2 + x_{2N+1}^2] - L/4 x1``.

    Coordinates beyond ``2N + 1`` do not enter. The start is ``0`` and the
    optimum is found by a tridiagonal solve; ``constants["lower_bound"]`` is
    ``3 L R^2 / (32 (N+1)^2)``.
    """
    m = 2 * N + 1
    n = m if n is None else int(n)
    if n < m:
        raise DomainError(f"worst_case_smooth needs n >= 2N+1 = {m}, got {n}")
    if not L > 0 or N < 1:
        raise DomainError("need L > 0 and N >= 1")
    scale, lin = L / 8.0, L / 4.0

    def fg(x):
        return _kernels.chain_quadratic(x, m, scale, lin)

    e1 = np.zeros(m)
    e1[0] = 1.0
    xs = np.zeros(n)
    xs[:m] = _tridiag_solve(m, e1)
    f_star = -0.5 * lin * xs[0]
    H = np.zeros((n, n))
    idx = np.arange(m)
    H[idx, idx] = 2.0
    H[idx[:-1], idx[:-1] + 1] = -1.0
    H[idx[:-1] + 1, idx[:-1]] = -1.0
    H *= L / 4.0
    b = np.zeros(n)
    b[0] = lin
    R = float(np.linalg.norm(xs))
    prob = Problem(FirstOrderOracle(fg, n, name="worst-smooth"), FreeSpace(n), xs, f_star,
                   {"L1": float(L), "R": R,
                    "lower_bound": 3.0 * L * R * R / (32.0 * (N + 1) ** 2)},
                   quadratic=(H, b), name=f"worst_case_smooth(N={N})")
    return ZooProblem(prob, "worst_case_smooth", {"L": L, "N": N, "n": n}, np.zeros(n),
                      lambda: (xs.copy(), f_star))


class AdversarialMaxOracle(FirstOrderOracle):
    """Oracle of ``L0 max_{i<N} x_i + mu/2 ||x||^2`` with an adaptive tie-break.

    Among the coordinates attaining the max, the counted call returns the
    smallest index not returned before (or the smallest index if all were
    used), and remembers it. This state is deliberate: it realizes the
    lower-bound construction and makes the oracle order-dependent.
    ``peek``/``peek_grad`` are pure and break ties by smallest index.
    """

    def __init__(self, L0, N, mu, dim):
        self.L0, self.N, self.mu = float(L0), int(N), float(mu)
        self.touched = set()
        super().__init__(self._pure, dim, fun=self._value, name="worst-nonsmooth")

    def _value(self, x):
        return self.L0 * float(np.max(x[:self.N])) + 0.5 * self.mu * float(x @ x)

    def _grad_at(self, x, j):
        g = self.mu * x
        g[j] += self.L0
        return g

    def _pure(self, x):
        j = int(np.argmax(x[:self.N]))
        return self._value(x), self._grad_at(x, j)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"{self.name}: expected dimension {self.dim}")
        with self._lock:
            self.grad_calls += 1
        head = x[:self.N]
        ties = np.flatnonzero(head == head.max())
        fresh = [int(i) for i in ties if int(i) not in self.touched]
        j = fresh[0] if fresh else int(ties[0])
        self.touched.add(j)
        return self._value(x), self._grad_at(x, j)

    def reset(self):
        self.touched.clear()
        self.reset_counts()


def worst_case_nonsmooth(L0, N, R, n=None):
    """``L0 max_{i<=N} x_i + mu/2 ||x||^2`` with ``mu = L0 / (R sqrt(N))``.

    The optimum is ``x_i = -R/sqrt(N)`` for ``i <= N`` (zero elsewhere) with
    ``f* = -L0 R / (2 sqrt(N))``. See :class:`AdversarialMaxOracle` for the
    subgradient rule.
    """
    n = N if n is None else int(n)
    if n < N:
        raise DomainError("worst_case_nonsmooth needs n >= N")
    mu = L0 / (R * math.sqrt(N))
    orc = AdversarialMaxOracle(L0, N, mu, n)
    xs = np.zeros(n)
    xs[:N] = -R / math.sqrt(N)
    f_star = -L0 * R / (2.0 * math.sqrt(N))
    prob = Problem(orc, FreeSpace(n), xs, f_star,
                   {"L0": float(L0), "R": float(R), "mu": mu,
                    "lower_bound": L0 * R / (2.0 * math.sqrt(N))},
                   name=f"worst_case_nonsmooth(N={N})")
    return ZooProblem(prob, "worst_case_nonsmooth", {"L0": L0, "N": N, "R": R, "n": n},
                      np.zeros(n), lambda: (xs.copy(), f_star))


# ---------------------------------------------------------------------------
# smooth test functions


def nesterov_skokov_local_L(n):
    """Gershgorin bound on the Hessian norm over ``[-1, 1]^n``.

    Row ``i`` collects at most ``2*16 + 2*2*4`` from its own residual,
    ``2`` from the previous one and ``8 + 8`` off the diagonal.
    """
    return 66.0 if n >= 3 else 56.5


def nesterov_skokov(n):
    """``1/4 (x1 - 1)^2 + sum_{i<n} (x_{i+1} - 2 x_i^2 + 1)^2``.

    Nonconvex, minimized at ``(1, ..., 1)`` with value 0. The recommended
    start is ``(-1, 1, ..., 1)`` where ``f = 1``. ``constants["L1"]`` is the
    Gershgorin Hessian bound over the box ``[-1, 1]^n``, which contains the
    sublevel trajectories of descent methods started there (checked by the
    callers, not assumed).
    """
    if n < 2:
        raise DomainError("nesterov_skokov needs n >= 2")
    orc = FirstOrderOracle(_kernels.nesterov_skokov, n, name="nesterov-skokov")
    x0 = np.ones(n)
    x0[0] = -1.0
    prob = Problem(orc, FreeSpace(n), np.ones(n), 0.0,
                   {"L1": nesterov_skokov_local_L(n), "L1_region": "box [-1,1]^n"},
                   name=f"nesterov_skokov(n={n})")
    return ZooProblem(prob, "nesterov_skokov", {"n": n}, x0)


def huber(L, R, theta, dim=2, x0=None):
    """C^1 Huber function with seam at ``||x|| = R/theta^2``.

    Inside: ``L/2 ||x||^2``. Outside: ``(L R/theta^2) ||x|| - L R^2/(2 theta^4)``,
    the constant chosen so values and gradients meet at the seam.
    """
    if not (L > 0 and R > 0 and theta > 0):
        raise DomainError("huber needs L, R, theta > 0")
    s = R / theta ** 2
    slope = L * s

    def fg(x):
        r = float(np.linalg.norm(x))
        if r < s:
            return 0.5 * L * r * r, L * x
        return slope * r - 0.5 * L * s * s, slope * x / r

    lo = 0.5 * L * s * s
    hi = slope * s - 0.5 * L * s * s
    if abs(lo - hi) > 1e-12 * max(1.0, abs(lo)):
        raise AssertionError("huber seam mismatch")
    if x0 is None:
        x0 = np.zeros(dim)
        x0[0] = R
    x0 = np.asarray(x0, dtype=float)
    prob = Problem(FirstOrderOracle(fg, dim, name="huber"), FreeSpace(dim), np.zeros(dim), 0.0,
                   {"L1": float(L), "L0": slope, "R": float(np.linalg.norm(x0)), "seam": s},
                   name="huber")
    return ZooProblem(prob, "huber", {"L": L, "R": R, "theta": theta, "dim": dim}, x0)


def power_norm(power, dim=2, scale=1.0, x0=None):
    """``scale * ||x||_2^power`` for ``1 <= power <= 2``.

    Its gradient is Holder with exponent ``nu = power - 1``. The declared
    constant ``L_nu`` is ``scale * power * 2^(1-nu)``, the sup of
    ``||g(x) - g(y)|| / ||x - y||^nu`` (attained at ``y = -x``). At the
    origin the returned subgradient is ``scale * e_1`` for ``power = 1`` and
    ``0`` otherwise.
    """
    if not 1.0 <= power <= 2.0:
        raise DomainError("power must lie in [1, 2]")
    nu = power - 1.0

    def fg(x):
        r = float(np.linalg.norm(x))
        if r == 0.0:
            g = np.zeros_like(x)
            if power == 1.0:
                g[0] = scale
            return 0.0, g
        return scale * r ** power, scale * power * r ** (power - 2.0) * x

    if x0 is None:
        x0 = np.zeros(dim)
        x0[0] = 1.0
    x0 = np.asarray(x0, dtype=float)
    L_nu = scale * power * 2.0 ** (1.0 - nu)
    consts = {"nu": nu, "L_nu": L_nu, "R": float(np.linalg.norm(x0))}
    if power == 1.0:
        consts["L0"] = scale
    if power == 2.0:
        consts["L1"] = 2.0 * scale
    prob = Problem(FirstOrderOracle(fg, dim, name=f"norm^{power}"), FreeSpace(dim),
                   np.zeros(dim), 0.0, consts, name=f"power_norm({power})")
    return ZooProblem(prob, "power_norm", {"power": power, "dim": dim, "scale": scale}, x0)


def random_quadratic(n, mu, L, seed, R=1.0):
    """``<Ax,x>/2 - <b,x>`` with the spectrum of ``A`` in ``[mu, L]``.

    ``A = Q diag(lam) Q^T`` with ``Q`` from a seeded QR factorization and
    ``lam`` containing both ``mu`` and ``L``. A minimizer ``x*`` is drawn
    first and ``b = A x*``; the suggested start lies at distance ``R``.
    """
    if not 0 <= mu <= L or not L > 0:
        raise DomainError("need 0 <= mu <= L, L > 0")
    rng = np.random.default_rng(seed)
    Q, Rm = np.linalg.qr(rng.standard_normal((n, n)))
    Q *= np.sign(np.diag(Rm))
    lam = np.sort(rng.uniform(mu, L, n))
    lam[0], lam[-1] = mu, L
    A = (Q * lam) @ Q.T
    A = 0.5 * (A + A.T)
    xs = rng.standard_normal(n)
    b = A @ xs
    d = rng.standard_normal(n)
    x0 = xs + R * d / np.linalg.norm(d)
    f_star = -0.5 * float(xs @ A @ xs)

    def fg(x):
        Ax = A @ x
        return 0.5 * float(x @ Ax) - float(b @ x), Ax - b

    prob = Problem(FirstOrderOracle(fg, n, name="quadratic"), FreeSpace(n), xs, f_star,
                   {"L1": float(L), "mu": float(mu), "R": float(R)},
                   quadratic=(A, b), name=f"random_quadratic(seed={seed})")
    return ZooProblem(prob, "random_quadratic",
                      {"n": n, "mu": mu, "L": L, "seed": seed, "R": R}, x0,
                      lambda: (np.linalg.lstsq(A, b, rcond=None)[0], f_star),
                      {"eigenvalues": lam})


# ---------------------------------------------------------------------------
# saddle problems


def matrix_game(C):
    """Bilinear game ``u^T C w`` over two simplices.

    Returns a :class:`SaddleSpec`; its ``field`` has Lipschitz constant
    ``max |C_ij|`` for the entropy setup on both simplices.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    m, n = C.shape
    return SaddleSpec(C, Simplex(m), Simplex(n), name="matrix_game")


def random_matrix_game(m, n, seed):
    rng = np.random.default_rng(seed)
    return matrix_game(rng.uniform(-1.0, 1.0, (m, n)))


# ---------------------------------------------------------------------------
# constrained programs


def _softmax(z):
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def entropy_linear(A=None, b=None, mu=0.1, m=5, n=10, seed=0):
    """``min mu sum y_i ln y_i`` over the simplex subject to ``A y = b``.

    Without ``A``, a seeded Gaussian matrix is drawn and ``b = A y_f`` for a
    random interior point ``y_f``, so the program is feasible. The inner
    maximizer is ``y(x) = softmax(-A^T x / mu)``.
    """
    if A is None:
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((m, n))
        y_f = rng.dirichlet(np.ones(n))
        b = A @ y_f if b is None else b
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    b = np.zeros(m) if b is None else np.asarray(b, dtype=float)

    def phi_fg(y):
        y = np.asarray(y, dtype=float)
        pos = y > 0
        val = mu * float(np.sum(y[pos] * np.log(y[pos])))
        with np.errstate(divide="ignore"):
            g = mu * (1.0 + np.log(y))
        return val, g

    def inner(x):
        return _softmax(-(A.T @ x) / mu)

    phi = FirstOrderOracle(phi_fg, n, name="entropy")
    return ConstrainedProgram(phi, A, b, Simplex(n), inner, mu, 1.0, name="entropy_linear",
                              info={"seed": seed})


def laplacian(edges, n_nodes=None):
    edges = [(int(i), int(j)) for i, j in edges]
    n = n_nodes or (max(max(e) for e in edges) + 1)
    W = np.zeros((n, n))
    for i, j in edges:
        if i == j:
            continue
        W[i, j] -= 1.0
        W[j, i] -= 1.0
        W[i, i] += 1.0
        W[j, j] += 1.0
    return W


def path_edges(n):
    return [(i, i + 1) for i in range(n - 1)]


def consensus_problem(edges, centers, weights=None, n_nodes=None):
    """``min sum_i a_i/2 (y_i - c_i)^2`` subject to ``W y = 0``.

    ``W`` is the graph Laplacian, so the constraint forces all ``y_i`` to
    agree; the solution is the weighted mean of the centers.

    Raises
    ------
    DomainError
        If the graph is disconnected.
    """
    c = np.asarray(centers, dtype=float)
    n = c.shape[0] if n_nodes is None else n_nodes
    W = laplacian(edges, n)
    if W.shape[0] != c.shape[0]:
        raise DomainError("one center per node is required")
    ev = np.linalg.eigvalsh(W)
    if n > 1 and ev[1] <= 1e-10 * max(ev[-1], 1.0):
        raise DomainError("graph is disconnected")
    a = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if np.any(a <= 0):
        raise DomainError("quadratic weights must be positive")

    def phi_fg(y):
        d = y - c
        return 0.5 * float(a @ (d * d)), a * d

    def inner(x):
        return c - (W.T @ x) / a

    t = float(a @ c / a.sum())
    ys = np.full(n, t)
    phi = FirstOrderOracle(phi_fg, n, name="consensus")
    prog = ConstrainedProgram(phi, W, np.zeros(n), FreeSpace(n), inner, float(a.min()), 2.0,
                              y_star=ys, phi_star=phi_fg(ys)[0], name="consensus",
                              info={"laplacian_eigenvalues": ev})
    return prog

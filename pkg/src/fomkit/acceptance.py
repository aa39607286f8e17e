"""The acceptance suite: each criterion returns measured and predicted values.

Every ``criterion_*`` function returns a :class:`CriterionResult`; the
``ALL`` list drives ``fomkit verify-suite`` and ``tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import zoo
from .core import FirstOrderOracle, FreeSpace, Problem
from .methods.first_order import (
    FixedInverseL,
    cg_quadratic,
    gradient_descent,
    linear_coupling,
    nesterov_momentum,
    nonlinear_cg,
    subgradient_method,
)
from .methods.universal import (
    SubgradientStage,
    restart_strongly_convex,
    similar_triangles,
    universal_gradient,
)
from .model import holder_to_smooth_L, linear_model, model_check, random_pairs
from .primal_dual import dual_oracle, dual_size_bound, dual_solve_restore, theorem_budget
from .prox import EntropyProx, EuclideanProx, ProductProx, project_simplex_euclidean
from .vi import averaged_point, iteration_bound, mirror_prox, universal_mirror_prox


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: float
    predicted: float
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] criterion {self.number:2d} {self.name}: "
                f"measured={self.measured:.6g} predicted={self.predicted:.6g} {self.detail}")


def _quadratics(count=50, n=50, seed0=0):
    return [zoo.random_quadratic(n, 0.0, 1.0, seed0 + s, R=1.0) for s in range(count)]


def _descent_violations(trace, L, tol=1e-10):
    v = np.asarray(trace.values)
    g = np.asarray(trace.grad_norms)
    return int(np.sum(v[1:] > v[:-1] - g[:-1] ** 2 / (2.0 * L) + tol))


_CACHE = {}


def _gd_runs():
    if "gd" not in _CACHE:
        convex = [(z, gradient_descent(z.problem, z.x0, FixedInverseL(1.0), 1000))
                  for z in _quadratics()]
        strong = []
        for s in range(10):
            z = zoo.random_quadratic(50, 1.0, 100.0, 100 + s, R=1.0)
            strong.append((z, gradient_descent(z.problem, z.x0, FixedInverseL(100.0), 2000)))
        _CACHE["gd"] = (convex, strong)
    return _CACHE["gd"]


def criterion_1():
    convex, _ = _gd_runs()
    worst = -np.inf
    for z, tr in convex:
        X = np.asarray(tr.iterates)
        csum = np.cumsum(X[1:], axis=0)
        for N in (10, 100, 1000):
            gap = z.problem.gap(csum[N - 1] / N)
            worst = max(worst, gap - 0.5 / N)
    return CriterionResult(1, "GD convex rate", bool(worst < 1e-10), worst, 1e-10,
                           "max over runs and N of gap - LR^2/(2N)")


def criterion_2():
    _, strong = _gd_runs()
    worst = -np.inf
    for z, tr in strong:
        g0 = z.problem.gap(tr.iterates[0])
        gaps = np.array([z.problem.gap(x) for x in tr.iterates])
        N = np.arange(len(gaps))
        worst = max(worst, float(np.max(gaps - np.exp(-N / 100.0) * g0)))
    return CriterionResult(2, "GD strongly convex rate", bool(worst < 1e-10), worst, 1e-10,
                           "max over runs and N of gap - exp(-mu N/L) gap_0")


def criterion_3():
    convex, strong = _gd_runs()
    bad = sum(_descent_violations(tr, 1.0) for _, tr in convex)
    bad += sum(_descent_violations(tr, 100.0) for _, tr in strong)
    return CriterionResult(3, "descent certificate", bad == 0, bad, 0, "violating steps")


def criterion_4():
    z = zoo.nesterov_skokov(15)
    P = z.problem
    L = P.constants["L1"]
    tr = gradient_descent(P, z.x0, FixedInverseL(L), 3000)
    g = np.asarray(tr.grad_norms)
    in_box = max(float(np.abs(x).max()) for x in tr.iterates) <= 1.0 + 1e-12
    f0 = tr.values[0]
    N = np.arange(1, len(g))
    running_min = np.minimum.accumulate(g)[1:]
    ratio = float(np.max(running_min / np.sqrt(2.0 * L * (f0 - P.f_star) / N)))
    hits = np.flatnonzero(g <= 1e-6)
    k = int(hits[0]) if hits.size else -1
    gap_at = tr.values[k] - P.f_star if k >= 0 else float("nan")
    viol = _descent_violations(tr, L)
    ok = ratio <= 1.0 and k >= 0 and gap_at >= 0.1 and in_box and viol == 0
    return CriterionResult(4, "stationarity on Nesterov-Skokov", bool(ok), ratio, 1.0,
                           f"(ratio to bound) first k with |grad|<=1e-6: {k}, gap there "
                           f"{gap_at:.4f}; trajectory in box: {in_box}; descent violations {viol}",
                           {"k": k, "gap": gap_at})


def criterion_5():
    z = zoo.worst_case_smooth(1.0, 20, 41)
    P = z.problem
    lb = P.constants["lower_bound"]
    R = P.constants["R"]
    runs = {
        "gradient_descent": gradient_descent(P, z.x0, FixedInverseL(1.0), 20),
        "nesterov_momentum": nesterov_momentum(P, z.x0, 1.0, 20),
        "linear_coupling": linear_coupling(P, z.x0, 1.0, 20, h=1.0),
        "linear_coupling_anytime": linear_coupling(P, z.x0, 1.0, 20, schedule="anytime"),
        "cg_quadratic": cg_quadratic(*P.quadratic, z.x0, 20),
    }
    mins = {k: min(P.gap(x) for x in tr.iterates) for k, tr in runs.items()}
    lower_ok = all(v >= lb - 1e-12 for v in mins.values())
    upper = 4.0 * R * R / 21 ** 2
    nm_gap = P.gap(runs["nesterov_momentum"].x)
    ok = lower_ok and nm_gap <= upper and upper / lb <= 43
    return CriterionResult(5, "lower-bound separation", bool(ok), nm_gap, upper,
                           "min gaps / lower bound: "
                           + ", ".join(f"{k}={v / lb:.3f}" for k, v in mins.items()))


def criterion_6():
    worst = -np.inf
    worst_id = 0.0
    for z in _quadratics():
        P = z.problem
        prox = EuclideanProx(FreeSpace(P.dim))
        V = prox.bregman(P.x_star, z.x0)
        for N in (10, 100):
            tr = similar_triangles(linear_model(P.oracle), prox, 1.0, z.x0, N)
            worst = max(worst, P.gap(tr.x) - 4.0 * V / (N + 1) ** 2)
            a = np.asarray(tr.info["alpha"][1:])
            A = np.asarray(tr.info["A"][1:])
            worst_id = max(worst_id, float(np.max(np.abs(A - a ** 2) / A)))
    ok = worst < 1e-10 and worst_id <= 1e-10
    return CriterionResult(6, "accelerated rate", bool(ok), worst, 1e-10,
                           f"max gap - 4LV/(N+1)^2; A_k = L alpha_k^2 rel. error {worst_id:.2e}")


def criterion_7():
    z = zoo.worst_case_nonsmooth(1.0, 25, 1.0, 30)
    P = z.problem
    tr = subgradient_method(P, z.x0, 25)
    gaps = [P.gap(x) for x in tr.iterates]
    lb = 1.0 / (2 * 5)
    lower_all = min(gaps[:26])
    lower_first = min(gaps[:25])
    avg_gap = P.gap(tr.averaged_point)
    ok = lower_all >= lb - 1e-9 and avg_gap <= 1.0 / 5
    return CriterionResult(7, "nonsmooth lower bound", bool(ok), lower_all, lb,
                           f"(min gap over k<=25) min over k<=24 = {lower_first:.4f}; "
                           f"averaged gap {avg_gap:.4f} <= {0.2}",
                           {"gaps": gaps, "avg_gap": avg_gap})


def _unit(dim, seed):
    v = np.random.default_rng(seed).standard_normal(dim)
    return v / np.linalg.norm(v)


def criterion_8():
    eps = 1e-2
    dim = 10
    cases = [
        ("huber", zoo.huber(1.0, 1.0, 1.0, dim=dim, x0=0.9 * _unit(dim, 1)), 1.0, "L1"),
        ("norm", zoo.power_norm(1.0, dim=dim, x0=_unit(dim, 2)), 0.0, "L_nu"),
        ("norm^1.5", zoo.power_norm(1.5, dim=dim, x0=_unit(dim, 3)), 0.5, "L_nu"),
    ]
    ok = True
    worst = 0.0
    parts = []
    for name, z, nu, key in cases:
        P = z.problem
        Lnu = P.constants[key]
        R = P.constants["R"]
        Nb = iteration_bound(Lnu, nu, R * R, eps)
        Lcap = holder_to_smooth_L(Lnu, nu, eps / 2)
        for L0 in (0.25, 1.0, 4.0):
            tr = universal_gradient(linear_model(P.oracle), EuclideanProx(FreeSpace(dim)), z.x0,
                                    eps, L0, R=R)
            N = tr.info["iterations"]
            Ls = np.asarray(tr.info["L_sequence"])
            avg = tr.oracle_value_calls / N
            allowed = 4.0 + max(0.0, math.log2(Ls[-1] / L0) / N) + 0.5
            c = (tr.converged and N <= 2 * Nb and avg <= allowed and Ls.max() <= 2 * Lcap
                 and P.gap(tr.averaged_point) <= eps)
            ok = ok and c
            worst = max(worst, N / (2 * Nb))
            parts.append(f"{name}/L0={L0}: N={N} (2x bound {2 * Nb:.0f}), calls/it={avg:.2f}, "
                         f"maxL={Ls.max():.3g} (cap {2 * Lcap:.3g})")
    return CriterionResult(8, "universal adaptivity", bool(ok), worst, 1.0,
                           "(max N / 2x bound) " + "; ".join(parts))


def criterion_9():
    mu, eps, dim = 0.1, 1e-3, 5

    def fg(x):
        r = float(np.linalg.norm(x))
        g = x / r if r > 0 else np.eye(dim)[0]
        return r + 0.5 * mu * float(x @ x), g + mu * x

    P = Problem(FirstOrderOracle(fg, dim, name="norm+quad"), FreeSpace(dim), np.zeros(dim), 0.0)
    x0 = _unit(dim, 4)
    R0 = 1.0
    L0 = 1.0 + mu * 2.0 * R0  # subgradient bound on B(0, 2 R0), which holds every stage ball
    tr = restart_strongly_convex(SubgradientStage(P, L0), mu, x0, eps, R0)
    total = tr.info["total_iterations"]
    bound = 512.0 * L0 ** 2 / (mu * eps)
    gap = P.gap(tr.x)
    ok = total <= bound and gap <= eps
    return CriterionResult(9, "restart law", bool(ok), total, bound,
                           f"final gap {gap:.3g} <= {eps}")


def _games():
    return [zoo.matrix_game([[1.0, -1.0], [-1.0, 1.0]])] + \
        [zoo.random_matrix_game(5, 5, s) for s in range(10)]


def criterion_10():
    worst = 0.0
    uworst = 0.0
    ok = True
    for G in _games():
        m, n = G.shape
        prox = ProductProx(EntropyProx(m), EntropyProx(n))
        L = G.field.L
        x0 = prox.start_point()
        for N in (100, 1000):
            tr = mirror_prox(G.field, prox, L, x0, N)
            u, w = G.split(averaged_point(tr))
            bound = 2.0 * L * (math.log(m) + math.log(n)) / N
            gap = G.gap(u, w)
            ok = ok and gap <= bound + 1e-9
            worst = max(worst, gap / bound)
        tr = universal_mirror_prox(G.field, prox, 1e-2, 1.0)
        u, w = G.split(averaged_point(tr))
        Nb = iteration_bound(L, 1.0, prox.max_radius_sq(x0), 1e-2)
        it = tr.info["iterations"]
        ok = ok and tr.converged and G.gap(u, w) <= 1e-2 and it <= 2 * Nb
        uworst = max(uworst, it / (2 * Nb))
    return CriterionResult(10, "Mirror Prox certificate", bool(ok), worst, 1.0,
                           f"(max gap / bound) universal: max N / 2x bound = {uworst:.3f}")


def _reference_dual(prog):
    orc = dual_oracle(prog)
    res = minimize(lambda x: orc.peek_grad(x), np.zeros(prog.m), jac=True, method="BFGS",
                   options={"gtol": 1e-12, "maxiter": 20000})
    return res.x, -float(res.fun)


def criterion_11():
    eps = 1e-3
    prog = zoo.entropy_linear(mu=0.1, m=5, n=10, seed=0)
    x_star, phi_star = _reference_dual(prog)
    R = float(np.linalg.norm(x_star))
    r = dual_solve_restore(prog, eps, eps)
    budget = theorem_budget(r.L, R, eps, eps)
    sub = prog.phi.peek(r.y_bar) - phi_star
    ok = (r.converged and r.gaps[-1] <= eps and r.residuals[-1] <= eps
          and r.iterations <= budget and sub <= eps)
    return CriterionResult(11, "dual solve and restore", bool(ok), r.iterations, budget,
                           f"gap {r.gaps[-1]:.3g}, residual {r.residuals[-1]:.3g}, "
                           f"phi(y)-phi* {sub:.3g}")


def criterion_12():
    prog = zoo.consensus_problem(zoo.path_edges(5), [1, 2, 3, 4, 5])
    r = dual_solve_restore(prog, 1e-3, 1e-3)
    dist = float(np.linalg.norm(r.y_bar - 3.0))
    bound = dual_size_bound(prog)
    xn = float(np.linalg.norm(r.x_bar))
    ok = r.converged and dist <= 1e-2 and bound >= xn
    return CriterionResult(12, "consensus", bool(ok), dist, 1e-2,
                           f"dual size bound {bound:.4f} >= |x_bar| {xn:.4f}; N={r.iterations}")


def criterion_13():
    res_w = orth_w = match_w = 0.0
    for s in range(20):
        z = zoo.random_quadratic(30, 1.0, 10.0, 200 + s)
        A, b = z.problem.quadratic
        x0 = z.x0
        tr = cg_quadratic(A, b, x0, 30)
        G = np.array([A @ x - b for x in tr.iterates])
        nrm = np.linalg.norm(G, axis=1)
        res_w = max(res_w, nrm[-1] / nrm[0])
        # scaled by the initial gradient: late gradients sit at round-off level
        D = np.abs(G @ G.T) / nrm[0] ** 2
        orth_w = max(orth_w, float(np.max(D[np.tril_indices(len(G), -1)])))
        full = cg_quadratic(A, b, x0, 30)
        for variant in ("FR", "PRP"):
            nc = nonlinear_cg(z.problem, x0, variant, N=30, line_search="exact")
            k = min(len(nc.iterates), len(full.iterates))
            for a, c in zip(nc.iterates[:k], full.iterates[:k]):
                match_w = max(match_w, np.linalg.norm(a - c) / max(1.0, np.linalg.norm(c)))
    ok = res_w <= 1e-8 and orth_w <= 1e-8 and match_w <= 1e-8
    return CriterionResult(13, "CG exactness", bool(ok), res_w, 1e-8,
                           f"(relative residual) orthogonality {orth_w:.2e}, "
                           f"FR/PRP vs CG {match_w:.2e}")


def _grid_simplex(step):
    k = int(round(1 / step))
    i, j = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
    mask = i + j <= k
    a, b = i[mask] * step, j[mask] * step
    return np.stack([a, b, 1.0 - a - b], axis=1)


def criterion_14():
    rng = np.random.default_rng(14)
    grid = _grid_simplex(1e-3)
    proj_w = 0.0
    opt_w = -np.inf
    for _ in range(100):
        v = rng.normal(0.3, 0.7, 3)
        p = project_simplex_euclidean(v)
        d = np.sum((grid - v) ** 2, axis=1)
        best = grid[int(np.argmin(d))]
        proj_w = max(proj_w, float(np.max(np.abs(best - p))))
        opt_w = max(opt_w, float(np.sum((p - v) ** 2) - d.min()))
    ent_w = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 8))
        x = rng.dirichlet(np.ones(n))
        g = rng.standard_normal(n)
        h = float(rng.uniform(0.01, 3))
        step = EntropyProx(n).step(x, g, h)
        closed = x * np.exp(-h * g) / np.sum(x * np.exp(-h * g))
        ent_w = max(ent_w, float(np.max(np.abs(step - closed))))
    tp_w = 0.0
    for prox, sampler in ((EuclideanProx(FreeSpace(4)), lambda: rng.standard_normal(4)),
                          (EntropyProx(4), lambda: rng.dirichlet(np.ones(4)))):
        for _ in range(5000):
            x, y, zz = sampler(), sampler(), sampler()
            lhs = prox.bregman(x, zz)
            rhs = (prox.bregman(x, y) + prox.bregman(y, zz)
                   + float((prox.grad_d(y) - prox.grad_d(zz)) @ (x - y)))
            tp_w = max(tp_w, abs(lhs - rhs))
    ok = proj_w <= 2e-3 and opt_w <= 1e-12 and ent_w <= 1e-12 and tp_w <= 1e-10
    return CriterionResult(14, "prox-geometry oracles", bool(ok), proj_w, 2e-3,
                           f"(grid distance) projection optimality excess {opt_w:.2e}, "
                           f"entropy step {ent_w:.2e}, three-point {tp_w:.2e}")


def _smooth_oracles():
    out = []
    z = zoo.worst_case_smooth(1.0, 10, 25)
    out.append(("worst_case_smooth", linear_model(z.oracle), 1.0, z.problem.x_star, 2 * z.problem.constants["R"]))
    for s in range(3):
        z = zoo.random_quadratic(20, 0.5, 10.0, 300 + s)
        out.append((f"random_quadratic[{s}]", linear_model(z.oracle), 10.0, z.problem.x_star, 2.0))
    z = zoo.huber(2.0, 1.0, 1.5, dim=6)
    out.append(("huber", linear_model(z.oracle), 2.0, np.zeros(6), 2.0))
    z = zoo.power_norm(2.0, dim=6)
    out.append(("norm^2", linear_model(z.oracle), z.problem.constants["L1"], np.zeros(6), 2.0))
    prog = zoo.entropy_linear(mu=0.1, m=5, n=10, seed=0)
    orc = dual_oracle(prog)
    out.append(("entropy_linear dual", linear_model(orc), orc.L, np.zeros(5), 2.0))
    prog = zoo.consensus_problem(zoo.path_edges(5), [1, 2, 3, 4, 5])
    orc = dual_oracle(prog)
    out.append(("consensus dual", linear_model(orc), orc.L, np.zeros(5), 10.0))
    return out


def criterion_15():
    worst = 0.0
    names = []
    for i, (name, mo, L, c, rad) in enumerate(_smooth_oracles()):
        pairs = random_pairs(mo.dim, 1000, rad, seed=15 + i, center=c)
        v = model_check(mo, L, 0.0, pairs)
        worst = max(worst, v)
        names.append(name)
    z = zoo.random_quadratic(20, 0.5, 10.0, 300)
    pairs = random_pairs(20, 1000, 2.0, seed=99, center=z.problem.x_star)
    fault = model_check(linear_model(z.oracle), 5.0, 0.0, pairs)
    ok = worst <= 1e-12 and fault > 0
    return CriterionResult(15, "model sandwich", bool(ok), worst, 1e-12,
                           f"over {len(names)} oracles; halved-L violation {fault:.3g}")


ALL = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
       criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12,
       criterion_13, criterion_14, criterion_15]


def run_all(select=None):
    out = []
    for i, fn in enumerate(ALL, start=1):
        if select is None or i in select:
            out.append(fn())
    return out

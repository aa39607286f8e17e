"""Command-line harness: ``fomkit run|compare|verify-suite``.

A config is a JSON document::

    {
      "schema": 1,
      "name": "gd-quadratic",
      "problem": {"family": "random_quadratic",
                  "params": {"n": 10, "mu": 1, "L": 100}, "seed": 7},
      "method": {"name": "gradient_descent", "params": {}},
      "budget": {"iterations": 1000},
      "verify": ["descent", "gd-strong-rate"]
    }

``compare`` takes ``"methods": [...]`` instead of ``"method"``. A ``run``
config may instead hold ``"runs": [...]``, a batch of run configs executed
concurrently by ``FOMKIT_THREADS`` worker threads.

Exit codes: 0 success, 1 configuration error, 2 failed bound check,
3 divergence or adaptivity failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import zoo
from .core import (
    AdaptivityError,
    ConfigurationError,
    DivergenceError,
    DomainError,
    FreeSpace,
)
from .methods.first_order import (
    FixedInverseL,
    cg_quadratic,
    gradient_descent,
    heavy_ball,
    linear_coupling,
    model_gradient_method,
    nesterov_momentum,
    nonlinear_cg,
    subgradient_method,
)
from .methods.universal import similar_triangles, universal_gradient
from .model import linear_model
from .primal_dual import dual_solve_restore
from .prox import EntropyProx, EuclideanProx, ProductProx
from .vi import iteration_bound, mirror_prox, universal_mirror_prox

SCHEMA = 1
THREADS_ENV = "FOMKIT_THREADS"
COLUMNS = ["iter", "f_value", "grad_norm_dual", "step_L", "bregman_to_opt",
           "certificate", "grad_calls", "value_calls"]

log = logging.getLogger("fomkit")

EXIT_OK, EXIT_CONFIG, EXIT_BOUND, EXIT_DIVERGED = 0, 1, 2, 3


class ConfigError(Exception):
    """A config problem; ``field`` names the offending entry."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


# ---------------------------------------------------------------------------
# problem and method registries

MINIMIZATION = {
    "random_quadratic": lambda p, seed: zoo.random_quadratic(
        int(p.get("n", 10)), float(p.get("mu", 0.0)), float(p.get("L", 1.0)),
        seed, float(p.get("R", 1.0))),
    "worst_case_smooth": lambda p, seed: zoo.worst_case_smooth(
        float(p.get("L", 1.0)), int(p.get("N", 20)), p.get("n")),
    "worst_case_nonsmooth": lambda p, seed: zoo.worst_case_nonsmooth(
        float(p.get("L0", 1.0)), int(p.get("N", 25)), float(p.get("R", 1.0)), p.get("n")),
    "nesterov_skokov": lambda p, seed: zoo.nesterov_skokov(int(p.get("n", 15))),
    "huber": lambda p, seed: zoo.huber(
        float(p.get("L", 1.0)), float(p.get("R", 1.0)), float(p.get("theta", 1.0)),
        int(p.get("dim", 2))),
    "power_norm": lambda p, seed: zoo.power_norm(
        float(p.get("power", 2.0)), int(p.get("dim", 2)), float(p.get("scale", 1.0))),
}
GAMES = {
    "matrix_game": lambda p, seed: zoo.matrix_game(p["C"]),
    "random_matrix_game": lambda p, seed: zoo.random_matrix_game(
        int(p.get("m", 5)), int(p.get("n", 5)), seed),
}
PROGRAMS = {
    "entropy_linear": lambda p, seed: zoo.entropy_linear(
        mu=float(p.get("mu", 0.1)), m=int(p.get("m", 5)), n=int(p.get("n", 10)), seed=seed),
    "consensus": lambda p, seed: zoo.consensus_problem(
        zoo.path_edges(int(p["nodes"])) if "edges" not in p else [tuple(e) for e in p["edges"]],
        p["centers"], p.get("weights")),
}

MIN_METHODS = {"gradient_descent", "nesterov_momentum", "linear_coupling", "heavy_ball",
               "subgradient_method", "cg_quadratic", "nonlinear_cg", "similar_triangles",
               "universal_gradient", "model_gradient_method"}
GAME_METHODS = {"mirror_prox", "universal_mirror_prox"}
PROGRAM_METHODS = {"dual_solve_restore"}

CHECKS = {"descent", "gd-convex-rate", "gd-strong-rate", "lower-bound", "accelerated-rate",
          "universal-budget", "mirror-prox-rate", "final-gap"}


# ---------------------------------------------------------------------------
# config handling


def _require(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise ConfigError(f"{where}.{key}" if where else key, "missing")
    return d[key]


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be an object")
    schema = cfg.get("schema")
    if schema != SCHEMA:
        raise ConfigError("schema", f"expected {SCHEMA}, got {schema!r}")
    return cfg


def _budget(cfg):
    b = cfg.get("budget", {})
    if not isinstance(b, dict):
        raise ConfigError("budget", "must be an object")
    out = {}
    for key in ("iterations", "oracle_calls"):
        if key in b:
            v = b[key]
            if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
                raise ConfigError(f"budget.{key}", "must be a positive integer")
            out[key] = v
    if "wall_time" in b:
        v = b["wall_time"]
        if not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError("budget.wall_time", "must be positive")
        out["wall_time"] = float(v)
    return out


def _verify_list(cfg):
    raw = cfg.get("verify", [])
    if not isinstance(raw, list):
        raise ConfigError("verify", "must be a list")
    names = []
    for i, item in enumerate(raw):
        name = item.get("name") if isinstance(item, dict) else item
        if name not in CHECKS:
            raise ConfigError(f"verify[{i}]", f"unknown check {name!r}; known: {sorted(CHECKS)}")
        names.append(name)
    return names


def build_problem(spec, seed_override=None):
    family = _require(spec, "family", "problem")
    params = spec.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("problem.params", "must be an object")
    seed = int(seed_override if seed_override is not None else spec.get("seed", 0))
    for kind, table in (("min", MINIMIZATION), ("game", GAMES), ("program", PROGRAMS)):
        if family in table:
            try:
                return kind, table[family](params, seed)
            except KeyError as exc:
                raise ConfigError(f"problem.params.{exc.args[0]}", "missing") from exc
            except (DomainError, ConfigurationError, ValueError, TypeError) as exc:
                raise ConfigError("problem.params", str(exc)) from exc
    raise ConfigError("problem.family", f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# execution


@dataclass
class RunResult:
    label: str
    rows: list
    checks: list = field(default_factory=list)
    status: int = EXIT_OK
    message: str = ""


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return "%.12e" % v


def _param(params, key, default, where):
    v = params.get(key, default)
    if v is None:
        raise ConfigError(f"{where}.{key}", "required for this problem")
    return v


def _rows_from_trace(trace, x_star=None, bregman=None, certs=None, cert_offset=1):
    n = len(trace.iterates)
    gc = trace.grad_call_log if len(trace.grad_call_log) == n else [None] * n
    vc = trace.value_call_log if len(trace.value_call_log) == n else [None] * n
    rows = []
    for k in range(n):
        b = None
        if x_star is not None:
            b = bregman(x_star, trace.iterates[k])
        c = None
        if certs is not None and k - cert_offset >= 0 and k - cert_offset < len(certs):
            c = certs[k - cert_offset]
        rows.append([k, trace.values[k], trace.grad_norms[k], trace.step_constants[k], b, c,
                     gc[k], vc[k]])
    return rows


def _run_minimization(zp, mspec, budget, where):
    name = _require(mspec, "name", where)
    if name not in MIN_METHODS:
        raise ConfigError(f"{where}.name", f"{name!r} does not apply to minimization problems")
    params = mspec.get("params", {})
    P = zp.problem
    P.oracle.reset_counts()
    const = P.constants
    N = int(params.get("N", budget.get("iterations", 100)))
    x0 = np.asarray(params["x0"], dtype=float) if "x0" in params else zp.x0
    if x0 is None:
        x0 = np.zeros(P.dim)
    R = const.get("R")
    if "x0" in params:
        # the declared R belongs to the default start
        R = float(np.linalg.norm(x0 - P.x_star)) if P.x_star is not None else None
    L = params.get("L", const.get("L1"))
    pw = f"{where}.params"
    prox = EuclideanProx(P.set if not isinstance(P.set, FreeSpace) else FreeSpace(P.dim))
    certs = None
    if name == "gradient_descent":
        tr = gradient_descent(P, x0, FixedInverseL(float(_param(params, "L", L, pw))), N)
    elif name == "nesterov_momentum":
        tr = nesterov_momentum(P, x0, float(_param(params, "L", L, pw)), N, params.get("mu"))
    elif name == "linear_coupling":
        tr = linear_coupling(P, x0, float(_param(params, "L", L, pw)), N, params.get("h"),
                             params.get("schedule", "fixed"))
    elif name == "heavy_ball":
        tr = heavy_ball(P, x0, float(_param(params, "alpha", None, pw)),
                        float(_param(params, "beta", None, pw)), N)
    elif name == "subgradient_method":
        tr = subgradient_method(P, x0, N, params.get("R", R),
                                params.get("L0", const.get("L0")))
    elif name == "cg_quadratic":
        if P.quadratic is None:
            raise ConfigError(f"{where}.name", "cg_quadratic needs a quadratic problem")
        A, b = P.quadratic
        tr = cg_quadratic(A, b, x0, N, float(params.get("tol", 0.0)))
        # one product with A per stored iterate
        tr.grad_call_log = list(range(1, len(tr.iterates) + 1))
        tr.value_call_log = [0] * len(tr.iterates)
    elif name == "nonlinear_cg":
        tr = nonlinear_cg(P, x0, params.get("variant", "FR"), params.get("restart_period"), N,
                          float(params.get("line_search_tol", 1e-10)),
                          params.get("line_search", "bisection"))
    elif name == "similar_triangles":
        tr = similar_triangles(linear_model(P.oracle), prox, float(_param(params, "L", L, pw)),
                               x0, N)
    elif name == "model_gradient_method":
        tr = model_gradient_method(linear_model(P.oracle), prox,
                                   float(_param(params, "L", L, pw)), x0, N)
    else:  # universal_gradient
        eps = float(_param(params, "epsilon", None, pw))
        log.warning("universal_gradient embeds epsilon=%g; a different accuracy needs a fresh run",
                    eps)
        tr = universal_gradient(linear_model(P.oracle), prox, x0, eps,
                                float(params.get("L0", 1.0)), int(params.get("doublings", 60)),
                                params.get("R", R),
                                max_iter=budget.get("iterations", 10 ** 6))
        certs = tr.info.get("certificates") or None
    x_star = P.x_star
    rows = _rows_from_trace(tr, x_star, prox.bregman if x_star is not None else None, certs)
    return tr, rows


def _run_game(G, mspec, budget, where):
    name = _require(mspec, "name", where)
    if name not in GAME_METHODS:
        raise ConfigError(f"{where}.name", f"{name!r} does not apply to saddle problems")
    params = mspec.get("params", {})
    m, n = G.shape
    prox = ProductProx(EntropyProx(m), EntropyProx(n))
    G.field.calls = 0
    if name == "mirror_prox":
        N = int(params.get("N", budget.get("iterations", 100)))
        tr = mirror_prox(G.field, prox, float(params.get("L", G.field.L)), prox.start_point(), N)
    else:
        eps = float(_param(params, "epsilon", None, f"{where}.params"))
        tr = universal_mirror_prox(G.field, prox, eps, float(params.get("L0", 1.0)),
                                   max_iter=budget.get("iterations", 10 ** 6))
    pts, w = tr.info["points"], tr.info["point_weights"]
    W = np.cumsum(w)
    S = np.cumsum(np.asarray(w)[:, None] * np.asarray(pts), axis=0)
    gaps = []
    for k in range(len(pts)):
        u, v = G.split(S[k] / W[k])
        gaps.append(G.gap(u, v))
    tr.values = [float("nan")] * len(tr.iterates)
    tr.info["game_gaps"] = gaps
    rows = _rows_from_trace(tr, certs=gaps)
    return tr, rows


def _run_program(prog, mspec, budget, where):
    name = _require(mspec, "name", where)
    if name not in PROGRAM_METHODS:
        raise ConfigError(f"{where}.name", f"{name!r} does not apply to constrained programs")
    params = mspec.get("params", {})
    pw = f"{where}.params"
    eps = float(_param(params, "epsilon", None, pw))
    eps_t = float(params.get("epsilon_tilde", eps))
    r = dual_solve_restore(prog, eps, eps_t, N_cap=budget.get("iterations", 10 ** 6),
                           accelerated=bool(params.get("accelerated", False)))
    # the dual gradient at the averaged point is the constraint residual
    rows = [[k + 1, None, r.residuals[k], r.L, None, r.gaps[k], None, None]
            for k in range(len(r.gaps))]
    return r, rows


def _gap_of(P, x):
    return P.gap(x) if P.f_star is not None else float("nan")


def _check(name, kind, obj, tr, rows, mspec):
    """Evaluate one bound check; returns (name, passed, measured, predicted)."""
    params = mspec.get("params", {})
    if name == "final-gap":
        eps = float(params.get("epsilon", params.get("target", float("nan"))))
        if kind == "game":
            measured = tr.info["game_gaps"][-1]
        elif kind == "program":
            measured = tr.gaps[-1] if tr.gaps else float("inf")
        else:
            measured = _gap_of(obj.problem, tr.averaged_point)
        return name, bool(measured <= eps), measured, eps
    if kind == "game":
        if name != "mirror-prox-rate":
            raise ConfigError("verify", f"{name!r} does not apply to saddle problems")
        m, n = obj.shape
        N = len(tr.iterates) - 1
        L = float(params.get("L", obj.field.L))
        pred = 2.0 * L * (math.log(m) + math.log(n)) / N
        meas = tr.info["game_gaps"][-1]
        return name, bool(meas <= pred + 1e-12), meas, pred
    if kind == "program":
        raise ConfigError("verify", f"{name!r} does not apply to constrained programs")
    P = obj.problem
    c = P.constants
    N = len(tr.iterates) - 1
    if name == "descent":
        v = np.asarray(tr.values)
        g = np.asarray(tr.grad_norms)
        Ls = np.asarray(tr.step_constants)
        excess = v[1:] - (v[:-1] - g[:-1] ** 2 / (2.0 * Ls[:-1]))
        meas = float(np.max(excess)) if excess.size else 0.0
        return name, bool(meas <= 1e-10), meas, 1e-10
    if name == "gd-convex-rate":
        pred = c["L1"] * c["R"] ** 2 / (2.0 * N)
        meas = _gap_of(P, tr.averaged_point)
        return name, bool(meas <= pred + 1e-10), meas, pred
    if name == "gd-strong-rate":
        pred = math.exp(-c["mu"] * N / c["L1"]) * _gap_of(P, tr.iterates[0])
        meas = _gap_of(P, tr.x)
        return name, bool(meas <= pred + 1e-10), meas, pred
    if name == "lower-bound":
        if "lower_bound" not in c:
            raise ConfigError("verify", "lower-bound needs a problem with a known lower bound")
        # the bound covers the first N steps of the instance only
        horizon = int(obj.params.get("N", N))
        meas = min(_gap_of(P, x) for x in tr.iterates[:horizon + 1])
        return name, bool(meas >= c["lower_bound"] - 1e-12), meas, c["lower_bound"]
    if name == "accelerated-rate":
        pred = 4.0 * c["L1"] * c["R"] ** 2 / (N + 1) ** 2
        meas = _gap_of(P, tr.x)
        return name, bool(meas <= pred + 1e-10), meas, pred
    if name == "universal-budget":
        eps = float(params["epsilon"])
        nu = float(c.get("nu", 1.0))
        Lnu = c.get("L_nu", c.get("L1"))
        pred = iteration_bound(Lnu, nu, c["R"] ** 2, eps)
        meas = tr.info.get("iterations", N)
        return name, bool(meas <= 2.0 * pred), meas, 2.0 * pred
    raise ConfigError("verify", f"{name!r} does not apply to minimization problems")


def execute(cfg, mspec, seed=None, label=None, verify=True):
    """Run one method on the config's problem; returns a :class:`RunResult`."""
    budget = _budget(cfg)
    kind, obj = build_problem(_require(cfg, "problem", ""), seed)
    where = "method"
    label = label or mspec.get("name", "?")
    try:
        if kind == "min":
            tr, rows = _run_minimization(obj, mspec, budget, where)
        elif kind == "game":
            tr, rows = _run_game(obj, mspec, budget, where)
        else:
            tr, rows = _run_program(obj, mspec, budget, where)
    except (DivergenceError, AdaptivityError, FloatingPointError) as exc:
        return RunResult(label, [], status=EXIT_DIVERGED, message=str(exc))
    except ConfigurationError as exc:
        raise ConfigError(f"{where}.params", str(exc)) from exc
    res = RunResult(label, rows)
    if verify:
        for name in _verify_list(cfg):
            try:
                chk = _check(name, kind, obj, tr, rows, mspec)
            except KeyError as exc:
                raise ConfigError("verify", f"{name!r} needs constant {exc.args[0]!r}") from exc
            res.checks.append(chk)
            if not chk[1]:
                res.status = EXIT_BOUND
    return res


def write_csv(path, rows, method_column=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    header = (["method"] if method_column is not None else []) + COLUMNS
    w.writerow(header)
    for i, r in enumerate(rows):
        prefix = [method_column[i]] if method_column is not None else []
        w.writerow(prefix + [_fmt(v) for v in r])
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def plot_csv(csv_path, svg_path, column="f_value", log_y=True):
    """Best-effort SVG plot of ``column`` against ``iter``, grouped by method.

    Reads only the CSV so that plotting never touches trace data. Returns
    False when matplotlib is unavailable.
    """
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return False
    rows = read_csv(csv_path)
    groups = {}
    for r in rows:
        groups.setdefault(r.get("method", "run"), []).append(r)
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, rs in groups.items():
        xs, ys = [], []
        for r in rs:
            y = r.get(column, "")
            if y in ("", "nan"):
                continue
            xs.append(int(r["iter"]))
            ys.append(float(y))
        if ys:
            ax.plot(xs, ys, label=label)
    if log_y and all(y > 0 for line in ax.get_lines() for y in line.get_ydata()):
        ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel(column)
    if len(groups) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(svg_path, format="svg")
    plt.close(fig)
    return True


# ---------------------------------------------------------------------------
# commands


def _report(res, out=None):
    out = out or sys.stdout
    for name, ok, meas, pred in res.checks:
        print(f"  check {name}: {'PASS' if ok else 'FAIL'} measured={meas:.6g} "
              f"predicted={pred:.6g}", file=out)
    if res.message:
        print(f"  {res.message}", file=out)


def _plot_column(rows):
    certs = [r[5] for r in rows if r[5] is not None]
    return "certificate" if certs else "bregman_to_opt" if any(
        r[4] is not None for r in rows) else "f_value"


def cmd_run(cfg, out_dir, seed, plot):
    runs = cfg.get("runs")
    if runs is not None:
        if not isinstance(runs, list) or not runs:
            raise ConfigError("runs", "must be a non-empty list")
        subs = []
        for i, sub in enumerate(runs):
            if not isinstance(sub, dict):
                raise ConfigError(f"runs[{i}]", "must be an object")
            merged = {k: v for k, v in cfg.items() if k != "runs"}
            merged.update(sub)
            merged.setdefault("name", f"run{i}")
            subs.append(merged)
        names = [s["name"] for s in subs]
        if len(set(names)) != len(names):
            raise ConfigError("runs", "run names must be distinct")
        threads = max(1, int(os.environ.get(THREADS_ENV, "1") or 1))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            statuses = list(pool.map(lambda s: _single_run(s, out_dir, seed, plot), subs))
        return max(statuses)
    return _single_run(cfg, out_dir, seed, plot)


def _single_run(cfg, out_dir, seed, plot):
    mspec = _require(cfg, "method", "")
    if not isinstance(mspec, dict):
        raise ConfigError("method", "must be an object")
    name = cfg.get("name", mspec.get("name", "run"))
    res = execute(cfg, mspec, seed, label=name)
    print(f"run {name}: exit {res.status}")
    _report(res)
    if res.status == EXIT_DIVERGED:
        return res.status
    outputs = cfg.get("outputs", {})
    csv_path = Path(out_dir) / outputs.get("trace", f"{name}.csv")
    write_csv(csv_path, res.rows)
    if plot:
        svg = Path(out_dir) / outputs.get("plot", f"{name}.svg")
        if not plot_csv(csv_path, svg, _plot_column(res.rows)):
            log.warning("matplotlib unavailable; skipping plot")
    return res.status


def cmd_compare(cfg, out_dir, seed, plot):
    methods = _require(cfg, "methods", "")
    if not isinstance(methods, list) or not methods:
        raise ConfigError("methods", "must be a non-empty list")
    name = cfg.get("name", "compare")
    rows, labels, status = [], [], EXIT_OK
    for i, mspec in enumerate(methods):
        if not isinstance(mspec, dict):
            raise ConfigError(f"methods[{i}]", "must be an object")
        label = f"{mspec.get('name', '?')}#{i}"
        try:
            res = execute(cfg, mspec, seed, label=label)
        except ConfigError as exc:
            raise ConfigError(f"methods[{i}]." + exc.field.split(".", 1)[-1],
                              str(exc).split(": ", 1)[-1]) from exc
        print(f"method {label}: exit {res.status}")
        _report(res)
        status = max(status, res.status)
        rows.extend(res.rows)
        labels.extend([label] * len(res.rows))
    outputs = cfg.get("outputs", {})
    csv_path = Path(out_dir) / outputs.get("trace", f"{name}.csv")
    write_csv(csv_path, rows, labels)
    if plot:
        svg = Path(out_dir) / outputs.get("plot", f"{name}.svg")
        if not plot_csv(csv_path, svg, _plot_column(rows)):
            log.warning("matplotlib unavailable; skipping plot")
    return status


def cmd_verify_suite(out_dir=None):
    from .acceptance import run_all

    results = run_all()
    print(f"{'#':>3} {'criterion':<34} {'status':<6} {'measured':>14} {'predicted':>14}")
    for r in results:
        print(f"{r.number:>3} {r.name:<34} {'PASS' if r.passed else 'FAIL':<6} "
              f"{r.measured:>14.6g} {r.predicted:>14.6g}")
        print(f"    {r.detail}")
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        with open(Path(out_dir) / "verify_suite.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(["criterion", "name", "passed", "measured", "predicted"])
            for r in results:
                w.writerow([r.number, r.name, int(r.passed), _fmt(r.measured), _fmt(r.predicted)])
    return EXIT_OK if all(r.passed for r in results) else EXIT_BOUND


def build_parser():
    ap = argparse.ArgumentParser(prog="fomkit", description="First-order method benchmarks.")
    ap.add_argument("--out", default=".", help="output directory (default: current)")
    ap.add_argument("--seed", type=int, default=None, help="override the problem seed")
    ap.add_argument("--no-plot", action="store_true", help="skip SVG plots")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("run", "compare"):
        p = sub.add_parser(name)
        p.add_argument("config")
    sub.add_parser("verify-suite")
    return ap


def main(argv=None):
    # flags are accepted before or after the subcommand
    argv = list(sys.argv[1:] if argv is None else argv)
    flags, rest = [], []
    it = iter(argv)
    for a in it:
        if a in ("--out", "--seed"):
            flags += [a, next(it, "")]
        elif a.startswith(("--out=", "--seed=")) or a == "--no-plot":
            flags.append(a)
        else:
            rest.append(a)
    args = build_parser().parse_args(flags + rest)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.command == "verify-suite":
            return cmd_verify_suite(None if args.out == "." else args.out)
        cfg = load_config(args.config)
        fn = cmd_run if args.command == "run" else cmd_compare
        return fn(cfg, args.out, args.seed, not args.no_plot)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

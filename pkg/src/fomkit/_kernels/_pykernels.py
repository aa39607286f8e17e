"""Pure NumPy implementations of the hot kernels.

These are the reference versions; the Cython module mirrors them one to one
and must agree to rounding.
"""

import numpy as np

ENTROPY_FLOOR = 1e-300


def project_simplex(v):
    """Euclidean projection of ``v`` onto the unit simplex (sorted threshold)."""
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, n + 1)
    cond = u - css / ind > 0
    rho = ind[cond][-1]
    theta = css[cond][-1] / rho
    return np.maximum(v - theta, 0.0)


def entropy_step(x, s):
    """Return ``x * exp(-s)`` renormalized onto the simplex.

    Computed in the log domain; coordinates of ``x`` below the floor are
    clamped to it before taking logs, and the output is floored again so
    iterates stay strictly inside the simplex.
    """
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    z = np.log(np.maximum(x, ENTROPY_FLOOR)) - s
    z -= z.max()
    w = np.exp(z)
    return np.maximum(w / w.sum(), ENTROPY_FLOOR)


def nesterov_skokov(x):
    """Value and gradient of the Nesterov-Skokov function."""
    x = np.asarray(x, dtype=float)
    r = x[1:] - 2.0 * x[:-1] ** 2 + 1.0
    f = 0.25 * (x[0] - 1.0) ** 2 + float(r @ r)
    g = np.zeros_like(x)
    g[0] = 0.5 * (x[0] - 1.0)
    g[1:] += 2.0 * r
    g[:-1] -= 8.0 * r * x[:-1]
    return f, g


def chain_quadratic(x, m, scale, lin):
    """Value and gradient of the tridiagonal worst-case quadratic.

    ``f(x) = scale * [x_1^2 + sum_{i<m} (x_i - x_{i+1})^2 + x_m^2] - lin * x_1``
    where only the first ``m`` coordinates participate.
    """
    x = np.asarray(x, dtype=float)
    y = x[:m]
    d = y[:-1] - y[1:]
    f = scale * (y[0] ** 2 + float(d @ d) + y[-1] ** 2) - lin * y[0]
    g = np.zeros_like(x)
    gy = g[:m]
    gy[0] += 2.0 * scale * y[0] - lin
    gy[-1] += 2.0 * scale * y[-1]
    gy[:-1] += 2.0 * scale * d
    gy[1:] -= 2.0 * scale * d
    return f, g

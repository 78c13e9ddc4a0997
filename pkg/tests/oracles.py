"""Independent oracles for the test suite: grids, enumerations, line searches.

These deliberately avoid the library's closed forms so each assertion
compares two separately derived answers.
"""

import itertools
import math

import numpy as np


def min_linear_on_ball(a, offset=0.0, angular_step=0.01):
    """Grid minimum of offset + a'x over the unit ball, dimension <= 3.

    A linear function attains its ball minimum on the sphere (or at the
    center when a = 0), so the grid runs over sphere directions plus the
    center.  The value error of the angular grid is quadratic in the step,
    well below 1e-4 for |a| of a few units at the default step.
    """
    a = np.asarray(a, dtype=float)
    m = a.size
    best = offset  # x = 0 candidate
    if m == 0:
        return best
    if m == 1:
        return min(best, offset - abs(a[0]), offset + a[0], offset - a[0])
    if m == 2:
        theta = np.arange(0.0, 2.0 * np.pi, angular_step)
        vals = offset + a[0] * np.cos(theta) + a[1] * np.sin(theta)
        return min(best, float(vals.min()))
    if m == 3:
        theta = np.arange(0.0, np.pi + angular_step, angular_step)
        phi = np.arange(0.0, 2.0 * np.pi, 2.0 * angular_step)
        st, ct = np.sin(theta)[:, None], np.cos(theta)[:, None]
        cp, sp = np.cos(phi)[None, :], np.sin(phi)[None, :]
        vals = offset + a[0] * st * cp + a[1] * st * sp + a[2] * ct
        return min(best, float(vals.min()))
    raise ValueError("ball grid oracle supports dimension <= 3 only")


def all_binary_vectors(n):
    """All 0/1 vectors of length n in lexicographic order, via itertools."""
    return [np.array(v, dtype=float) for v in itertools.product((0, 1), repeat=n)]


def family_members(kind, n, k=None):
    """Binary members of an activation family, independent enumeration."""
    out = []
    for v in itertools.product((0, 1), repeat=n):
        total = sum(v)
        if kind == "card_le" and total > k:
            continue
        if kind == "card_eq" and total != k:
            continue
        out.append(np.array(v, dtype=float))
    return out


def supports_mask(n, k):
    """(m, n) 0/1 matrix of every support of size <= k."""
    rows = []
    for size in range(min(k, n) + 1):
        for support in itertools.combinations(range(n), size):
            row = [0.0] * n
            for i in support:
                row[i] = 1.0
            rows.append(row)
    return np.array(rows)


def golden_min(f, lo, hi, iters=90):
    """Golden-section minimum of a convex scalar function; returns (x, f(x))."""
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    best_x, best_f = lo, f(lo)
    f_hi = f(hi)
    if f_hi < best_f:
        best_x, best_f = hi, f_hi
    c = hi - inv * (hi - lo)
    d = lo + inv * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - inv * (hi - lo)
            fc = f(c)
        elif fc > fd:
            lo, c, fc = c, d, fd
            d = lo + inv * (hi - lo)
            fd = f(d)
        else:
            lo, hi = c, d
            c = hi - inv * (hi - lo)
            d = lo + inv * (hi - lo)
            fc, fd = f(c), f(d)
        if fc < best_f:
            best_x, best_f = c, fc
        if fd < best_f:
            best_x, best_f = d, fd
    return best_x, best_f


def refined_grid_max(f, lo, hi, coarse=2001, fine=2001):
    """Two-stage grid maximum of a scalar function over [lo, hi]."""
    xs = np.linspace(lo, hi, coarse)
    vals = np.array([f(x) for x in xs])
    j = int(np.argmax(vals))
    left = xs[max(j - 1, 0)]
    right = xs[min(j + 1, coarse - 1)]
    xs2 = np.linspace(left, right, fine)
    vals2 = np.array([f(x) for x in xs2])
    j2 = int(np.argmax(vals2))
    return float(xs2[j2]), float(vals2[j2])


def sample_X_point(zfam_kind, n, k, rng):
    """Random feasible (x, z) of the indicator-ball set."""
    if zfam_kind == "free":
        z = rng.integers(0, 2, size=n).astype(float)
    elif zfam_kind == "card_le":
        size = int(rng.integers(0, k + 1))
        z = np.zeros(n)
        z[rng.choice(n, size=size, replace=False)] = 1.0
    else:
        z = np.zeros(n)
        z[rng.choice(n, size=k, replace=False)] = 1.0
    x = np.zeros(n)
    support = np.flatnonzero(z > 0.5)
    if support.size:
        direction = rng.normal(size=support.size)
        norm = np.linalg.norm(direction)
        if norm > 0:
            x[support] = direction / norm * rng.uniform(0.0, 1.0)
    return x, z


def sample_simplex(n, rng, count=1):
    """Uniform-ish simplex samples via normalized exponentials."""
    mat = rng.exponential(size=(count, n))
    mat /= mat.sum(axis=1, keepdims=True)
    return mat if count > 1 else mat[0]

"""Brute-force reference implementations, independent of the package's kernels."""

import itertools
import math

import numpy as np


def _patterns(m):
    return np.array(list(itertools.product((0, 1, 2), repeat=m)), dtype=np.int8)


_PATTERN_CACHE = {}


def project_active_set(v, b, total=1.0):
    """Enumerate every lower/upper/free pattern with the sum constraint slack or tight.

    Each pattern gives a closed-form candidate; the feasible candidate nearest to v
    is the projection.
    """
    v = np.asarray(v, float)
    b = np.asarray(b, float)
    m = len(v)
    P = _PATTERN_CACHE.setdefault(m, _patterns(m))
    lo, up, free = P == 0, P == 1, P == 2
    base = np.where(up, b, 0.0)
    cands = []
    # sum constraint slack: free coordinates keep their value
    cands.append(np.where(free, v, base))
    # sum constraint tight: free coordinates shift by a common tau
    nfree = free.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        tau = ((free * v).sum(axis=1) + (up * b).sum(axis=1) - total) / nfree
    tau = np.where(nfree > 0, tau, 0.0)
    cands.append(np.where(free, v - tau[:, None], base))
    C = np.concatenate(cands)
    ok = np.all(C >= -1e-12, axis=1) & np.all(C <= b + 1e-12, axis=1) & (C.sum(axis=1) <= total + 1e-12)
    C = C[ok]
    d = ((C - v) ** 2).sum(axis=1)
    return C[np.argmin(d)]


def polytope_vertices(b, total=1.0):
    """Every vertex of {0 <= z <= b, sum z <= total} (possibly with repeats)."""
    b = np.asarray(b, float)
    m = len(b)
    out = []
    for mask in itertools.product((0, 1), repeat=m):
        z = np.array(mask, float) * b
        s = z.sum()
        if s <= total + 1e-12:
            out.append(z)
            for j in range(m):
                if not mask[j] and 0 < total - s < b[j]:
                    y = z.copy()
                    y[j] = total - s
                    out.append(y)
    return np.array(out)


def max_linear_enum(w, b, total=1.0):
    V = polytope_vertices(b, total)
    vals = V @ np.asarray(w, float)
    i = int(np.argmax(vals))
    return V[i], float(vals[i])


def golden_section(f, lo, hi, tol=1e-10):
    """Maximize a unimodal f on [lo, hi]."""
    g = (math.sqrt(5) - 1) / 2
    a, bb = lo, hi
    c, d = bb - g * (bb - a), a + g * (bb - a)
    fc, fd = f(c), f(d)
    while bb - a > tol:
        if fc > fd:
            bb, d, fd = d, c, fc
            c = bb - g * (bb - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (bb - a)
            fd = f(d)
    return 0.5 * (a + bb)


def grid_max_2d(f, b0, b1, total=1.0, step=1e-3, refine=1e-5):
    """Maximize f(x, y) over {0<=x<=b0, 0<=y<=b1, x+y<=total} by a grid, then a finer grid around the best cell."""

    def search(x0, x1, y0, y1, h):
        xs = np.arange(max(x0, 0.0), min(x1, b0) + h / 2, h)
        ys = np.arange(max(y0, 0.0), min(y1, b1) + h / 2, h)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        keep = X + Y <= total + 1e-12
        with np.errstate(divide="ignore"):
            F = np.where(keep, f(X, Y), -np.inf)
        i, j = np.unravel_index(np.argmax(F), F.shape)
        return xs[i], ys[j], F[i, j]

    x, y, _ = search(0, b0, 0, b1, step)
    return search(x - step, x + step, y - step, y + step, refine)

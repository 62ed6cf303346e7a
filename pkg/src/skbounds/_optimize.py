"""Small deterministic scalar minimizers shared by the bound modules."""

import math

import numpy as np

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, a, b, tol=1e-10, max_iter=200):
    """Minimize a unimodal ``f`` on [a, b]; returns ``(x, f(x))``."""
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _better(cand, best):
    # Lower value wins; values equal to within a few ulps go to smaller x.
    (xc, vc), (xb, vb) = cand, best
    if abs(vc - vb) <= 4 * np.spacing(max(abs(vc), abs(vb), 1.0)):
        return xc < xb
    return vc < vb


def grid_golden_minimize(f_scalar, f_vector, lo=0.0, hi=1.0, points=1001,
                         tol=1e-10, max_refine=16):
    """Global minimum of a function on [lo, hi].

    A uniform grid of ``points`` values is scanned with ``f_vector``; golden
    section search then refines around every grid-local minimum (the lowest
    ``max_refine`` of them).  Ties are broken toward the smaller abscissa.
    """
    grid = np.linspace(lo, hi, points)
    values = np.asarray(f_vector(grid), dtype=float)
    left = np.r_[np.inf, values[:-1]]
    right = np.r_[values[1:], np.inf]
    local = np.flatnonzero((values <= left) & (values <= right))
    local = local[np.argsort(values[local], kind="stable")][:max_refine]
    best = (float(grid[local[0]]), float(values[local[0]]))
    for i in sorted(local):
        cand = (float(grid[i]), float(values[i]))
        if _better(cand, best):
            best = cand
        a, b = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
        cand = golden_section(f_scalar, float(a), float(b), tol=tol)
        cand = (float(cand[0]), float(cand[1]))
        if _better(cand, best):
            best = cand
    return best

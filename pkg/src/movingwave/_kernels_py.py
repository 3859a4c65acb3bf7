"""Pure numpy implementation of the three-level sweep."""
import numpy as np
from scipy.linalg import solve_banded


def _tri_apply(tri, v):
    out = tri[1] * v
    out[1:] += tri[0, 1:] * v[:-1]
    out[:-1] += tri[2, :-1] * v[1:]
    return out


def three_level_sweep(new_tri, cur_tri, old_tri, src, out, blowup):
    """Advance ``out[s + 2]`` from ``out[s + 1]`` and ``out[s]``.

    Each step solves ``new_tri @ out[s+2] = cur_tri @ out[s+1] +
    old_tri @ out[s] + src[s]``.  Tridiagonals are stored as rows
    ``(sub, diag, sup)`` with ``sub[0]`` and ``sup[-1]`` unused.
    Returns the first step whose values exceed ``blowup``, or -1.
    """
    nsteps, _, m = new_tri.shape
    ab = np.empty((3, m))
    for s in range(nsteps):
        rhs = _tri_apply(cur_tri[s], out[s + 1]) + _tri_apply(old_tri[s], out[s]) + src[s]
        tri = new_tri[s]
        if not (np.any(tri[0, 1:]) or np.any(tri[2, :-1])):
            res = rhs / tri[1]
        else:
            ab[0, 1:] = tri[2, :-1]
            ab[0, 0] = 0.0
            ab[1] = tri[1]
            ab[2, :-1] = tri[0, 1:]
            ab[2, -1] = 0.0
            res = solve_banded((1, 1), ab, rhs, check_finite=False)
        out[s + 2] = res
        if not np.all(np.abs(res) <= blowup):
            return s
    return -1

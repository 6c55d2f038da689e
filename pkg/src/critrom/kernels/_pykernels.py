"""Pure-Python/numpy implementations of the sweep-heavy kernels.

Mirrors ``_ckernels`` one-to-one.  These loops are the fallback path: they
are correct but slow for large grids, so the compiled extension is preferred
whenever it is importable.
"""

import numpy as np


def gs_banded_sweep(diag, offsets, bands, rhs, x):
    """One forward then one backward Gauss-Seidel pass, in place on ``x``.

    The matrix is stored by stencil bands: ``bands[b, i]`` holds the entry
    coupling row ``i`` to column ``i + offsets[b]`` (zero where the neighbour
    does not exist).
    """
    n = x.shape[0]
    nb = offsets.shape[0]
    for i in range(n):
        s = rhs[i]
        for b in range(nb):
            j = i + offsets[b]
            if 0 <= j < n:
                s -= bands[b, i] * x[j]
        x[i] = s / diag[i]
    for i in range(n - 1, -1, -1):
        s = rhs[i]
        for b in range(nb):
            j = i + offsets[b]
            if 0 <= j < n:
                s -= bands[b, i] * x[j]
        x[i] = s / diag[i]


def gs_dense_sweep(a, rhs, x):
    """One forward then one backward Gauss-Seidel pass for a dense matrix."""
    n = x.shape[0]
    for i in range(n):
        s = rhs[i] - a[i] @ x + a[i, i] * x[i]
        x[i] = s / a[i, i]
    for i in range(n - 1, -1, -1):
        s = rhs[i] - a[i] @ x + a[i, i] * x[i]
        x[i] = s / a[i, i]


def stencil_matvec(diag, offsets, bands, x, out):
    """Banded matrix-vector product ``out = A x``."""
    n = x.shape[0]
    out[:] = diag * x
    for b in range(offsets.shape[0]):
        off = int(offsets[b])
        if off > 0:
            out[: n - off] += bands[b, : n - off] * x[off:]
        else:
            out[-off:] += bands[b, -off:] * x[: n + off]


def jacobi_sweep(a, v, threshold):
    """One cyclic sweep of symmetric Jacobi rotations, in place.

    Rotates every upper-triangle pair whose magnitude exceeds ``threshold``,
    accumulating the rotations into ``v``.  Returns the rotation count.
    """
    n = a.shape[0]
    rotations = 0
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q]
            if abs(apq) <= threshold:
                continue
            tau = (a[q, q] - a[p, p]) / (2.0 * apq)
            if tau >= 0.0:
                t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
            else:
                t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            # A <- G^T A G applied as a column update then a row update.
            akp = a[:, p].copy()
            akq = a[:, q].copy()
            a[:, p] = c * akp - s * akq
            a[:, q] = s * akp + c * akq
            arp = a[p, :].copy()
            arq = a[q, :].copy()
            a[p, :] = c * arp - s * arq
            a[q, :] = s * arp + c * arq
            a[p, q] = 0.0
            a[q, p] = 0.0
            vkp = v[:, p].copy()
            vkq = v[:, q].copy()
            v[:, p] = c * vkp - s * vkq
            v[:, q] = s * vkp + c * vkq
            rotations += 1
    return rotations

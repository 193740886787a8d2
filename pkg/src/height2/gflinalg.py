"""Dense linear algebra over F4 on uint8 numpy arrays (values 0..3)."""

from __future__ import annotations

import numpy as np

from .gf4 import MUL, INV


def mat(rows) -> np.ndarray:
    return np.array(rows, dtype=np.uint8)


def zeros(r: int, c: int) -> np.ndarray:
    return np.zeros((r, c), dtype=np.uint8)


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.uint8)


def mmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product; split into F2 planes so products become int matmuls."""
    a0 = (a & 1).astype(np.int64)
    a1 = (a >> 1).astype(np.int64)
    b0 = (b & 1).astype(np.int64)
    b1 = (b >> 1).astype(np.int64)
    c0 = (a0 @ b0 + a1 @ b1) & 1
    c1 = (a0 @ b1 + a1 @ b0 + a1 @ b1) & 1
    return (c0 | (c1 << 1)).astype(np.uint8)


def mvec(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    return mmul(a, v.reshape(-1, 1)).ravel()


def scale_row(row: np.ndarray, c: int) -> np.ndarray:
    return MUL[c][row]


def rref(a: np.ndarray):
    """Row-reduce; returns (R, pivot column list)."""
    r = a.copy()
    rows, cols = r.shape
    pivots = []
    i = 0
    for j in range(cols):
        if i >= rows:
            break
        nz = np.nonzero(r[i:, j])[0]
        if nz.size == 0:
            continue
        k = i + nz[0]
        if k != i:
            r[[i, k]] = r[[k, i]]
        r[i] = MUL[INV[r[i, j]]][r[i]]
        col = r[:, j].copy()
        col[i] = 0
        r ^= MUL[col[:, None], r[i][None, :]]
        pivots.append(j)
        i += 1
    return r, pivots


def rank(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    return len(rref(a)[1])


def solve(a: np.ndarray, b: np.ndarray):
    """One solution x of a @ x = b, or None if inconsistent."""
    rows = a.shape[0]
    aug = np.concatenate([a, b.reshape(rows, -1)], axis=1)
    r, pivots = rref(aug)
    ncols = a.shape[1]
    if any(p >= ncols for p in pivots):
        return None
    wide = b.reshape(rows, -1).shape[1]
    x = np.zeros((ncols, wide), dtype=np.uint8)
    for i, p in enumerate(pivots):
        x[p] = r[i, ncols:]
    return x.ravel() if b.ndim == 1 else x


def inv_mat(a: np.ndarray):
    n = a.shape[0]
    r, pivots = rref(np.concatenate([a, eye(n)], axis=1))
    if pivots != list(range(n)):
        return None
    return r[:, n:].copy()


def nullspace(a: np.ndarray) -> np.ndarray:
    """Rows form a basis of the right kernel."""
    r, pivots = rref(a)
    cols = a.shape[1]
    free = [j for j in range(cols) if j not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for t, j in enumerate(free):
        basis[t, j] = 1
        for i, p in enumerate(pivots):
            basis[t, p] = r[i, j]
    return basis


def row_space(a: np.ndarray) -> np.ndarray:
    """Canonical (rref, nonzero rows) basis of the row span."""
    if a.size == 0:
        return a.reshape(0, a.shape[1] if a.ndim == 2 else 0)
    r, pivots = rref(a)
    return r[: len(pivots)].copy()


def in_span(basis: np.ndarray, v: np.ndarray) -> bool:
    if basis.size == 0:
        return not v.any()
    return rank(np.vstack([basis, v])) == rank(basis)


def intersect_kernels(mats) -> np.ndarray:
    """Basis (rows) of the joint right kernel of a list of matrices."""
    stack = [m for m in mats if m.size]
    if not stack:
        raise ValueError("no constraints")
    return nullspace(np.vstack(stack))

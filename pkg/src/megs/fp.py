"""Small exact linear algebra over the prime field F_p."""

from __future__ import annotations

import numpy as np


def _as_matrix(rows, p: int) -> np.ndarray:
    m = np.array(rows, dtype=np.int64) % p
    if m.ndim == 1:
        m = m.reshape(1, -1)
    return m


def row_echelon(rows, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod p. Returns (matrix, pivot column list)."""
    m = _as_matrix(rows, p)
    nrows, ncols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        sel = None
        for i in range(r, nrows):
            if m[i, c] % p:
                sel = i
                break
        if sel is None:
            continue
        if sel != r:
            m[[r, sel]] = m[[sel, r]]
        inv = pow(int(m[r, c]), -1, p)
        m[r] = (m[r] * inv) % p
        for i in range(nrows):
            if i != r and m[i, c]:
                m[i] = (m[i] - m[i, c] * m[r]) % p
        pivots.append(c)
        r += 1
    return m[: len(pivots)], pivots


def rank_mod(rows, p: int) -> int:
    if len(rows) == 0:
        return 0
    return len(row_echelon(rows, p)[1])


def null_space(rows, p: int) -> list[np.ndarray]:
    """Basis of the right null space {x : M x = 0 mod p}, ordered by free column."""
    m = _as_matrix(rows, p)
    _, ncols = m.shape
    ech, pivots = row_echelon(m, p)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(ncols, dtype=np.int64)
        v[f] = 1
        for i, c in enumerate(pivots):
            v[c] = (-ech[i, f]) % p
        basis.append(v)
    return basis


def left_kernel_vector(rows, p: int) -> np.ndarray | None:
    """First nonzero lambda with sum_i lambda_i * rows[i] = 0 mod p, or None."""
    m = _as_matrix(rows, p)
    basis = null_space(m.T, p)
    if not basis:
        return None
    return basis[0]

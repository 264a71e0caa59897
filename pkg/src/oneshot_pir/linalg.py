"""Exact linear algebra over F_q (numpy, single and batched) and over Q."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np


@lru_cache(maxsize=None)
def inverse_table(q: int) -> np.ndarray:
    """``table[x] = x^-1 mod q`` with ``table[0] = 0``."""
    table = np.zeros(q, dtype=np.int64)
    for x in range(1, q):
        table[x] = pow(x, -1, q)
    table.setflags(write=False)
    return table


def rref_mod(a, q: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``a`` over F_q and its pivot columns."""
    m = np.array(a, dtype=np.int64) % q
    if m.ndim != 2:
        raise ValueError("rref_mod expects a 2-d array")
    inv = inverse_table(q)
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        m[r] = m[r] * inv[m[r, c]] % q
        f = m[:, c].copy()
        f[r] = 0
        m = (m - np.outer(f, m[r])) % q
        pivots.append(c)
        r += 1
    return m, pivots


def rank_mod(a, q: int) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return len(rref_mod(a, q)[1])


def solve_mod(a, b, q: int) -> np.ndarray | None:
    """One solution ``x`` of ``a @ x = b`` over F_q (free variables set to 0),
    or ``None`` if the system is inconsistent. ``b`` may be a matrix."""
    a = np.array(a, dtype=np.int64) % q
    b = np.array(b, dtype=np.int64) % q
    vec = b.ndim == 1
    if vec:
        b = b[:, None]
    n = a.shape[1]
    aug, pivots = rref_mod(np.hstack([a, b]), q)
    if any(p >= n for p in pivots):
        return None
    x = np.zeros((n, b.shape[1]), dtype=np.int64)
    for i, p in enumerate(pivots):
        x[p] = aug[i, n:]
    return x[:, 0] if vec else x


def inv_mod(a, q: int) -> np.ndarray:
    a = np.array(a, dtype=np.int64) % q
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    aug, pivots = rref_mod(np.hstack([a, np.eye(n, dtype=np.int64)]), q)
    if [p for p in pivots if p < n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return aug[:, n:]


def batch_rank_mod(a: np.ndarray, q: int) -> np.ndarray:
    """Ranks of a stack of matrices, shape ``(B, n, m)`` -> ``(B,)``.

    Forward elimination on the whole stack at once; trials without a pivot in
    the current column are carried along with a zero update.
    """
    dtype = np.int32 if q * q < 2 ** 31 else np.int64
    m = (np.asarray(a, dtype=np.int64) % q).astype(dtype)
    batch, rows, cols = m.shape
    rank = np.zeros(batch, dtype=np.int64)
    if rows == 0 or cols == 0:
        return rank
    inv = inverse_table(q).astype(dtype)
    row_ids = np.arange(rows)
    b = np.arange(batch)
    for c in range(cols):
        cand = (m[:, :, c] != 0) & (row_ids[None, :] >= rank[:, None])
        has = cand.any(axis=1)
        if not has.any():
            continue
        r0 = np.minimum(rank, rows - 1)
        piv = np.where(has, cand.argmax(axis=1), r0)
        top = m[b, r0].copy()
        m[b, r0] = m[b, piv]
        m[b, piv] = top
        lead = np.where(has, inv[m[b, r0, c]], 1).astype(dtype)
        prow = m[b, r0] * lead[:, None] % q
        m[b, r0] = prow
        f = m[:, :, c] * (row_ids[None, :] > r0[:, None]) * has[:, None]
        m = (m - f[:, :, None] * prow[:, None, :]) % q
        rank += has
    return rank


def _rref_rational(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return m, []
    n_rows, n_cols = len(m), len(m[0])
    pivots = []
    r = 0
    for c in range(n_cols):
        p = next((i for i in range(r, n_rows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        lead = m[r][c]
        m[r] = [x / lead for x in m[r]]
        for i in range(n_rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    return m, pivots


def rank_rational(rows: Sequence[Sequence]) -> int:
    return len(_rref_rational(rows)[1])


def solve_rational(a: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """One rational solution of ``a x = b`` (free variables 0) or ``None``."""
    n = len(a[0])
    aug, pivots = _rref_rational([list(row) + [rhs] for row, rhs in zip(a, b)])
    if any(p >= n for p in pivots):
        return None
    x = [Fraction(0)] * n
    for i, p in enumerate(pivots):
        x[p] = aug[i][n]
    return x

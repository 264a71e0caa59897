"""Symbolic matrices: the bookkeeping behind the lift recursion.

Entry ``k`` at ``(i, j)`` stands for ``C(M, k)`` ``k``-queries sent to server
``j``, one per ``k``-subset of messages. Positions are 1-based ``(row, col)``
pairs throughout; ``0`` plays the role of a blank.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import ConsistencyError, ParameterError

Position = tuple[int, int]


@dataclass(frozen=True, eq=False)
class SymbolicMatrix:
    entries: np.ndarray
    provenance: tuple[int, int, int] | None = None   # (N, r, M)

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.int64)
        if a.ndim != 2:
            raise ParameterError("symbolic matrix must be 2-d")
        if (a < 0).any():
            raise ParameterError("symbolic matrix entries must be nonnegative")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        if self.provenance is not None:
            N, r, M = self.provenance
            if a.shape[1] != N or a.max(initial=0) > M:
                raise ParameterError(f"entries inconsistent with provenance {self.provenance}")

    @property
    def N(self) -> int:
        return self.entries.shape[1]

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    def __getitem__(self, pos: Position) -> int:
        i, j = pos
        return int(self.entries[i - 1, j - 1])

    def __eq__(self, other):
        return isinstance(other, SymbolicMatrix) and np.array_equal(self.entries, other.entries)

    def tolist(self) -> list[list[int]]:
        return self.entries.tolist()

    def to_text(self) -> str:
        N, r, M = self.provenance if self.provenance is not None else (self.N, 0, int(self.entries.max(initial=0)))
        lines = [f"{N} {r} {M} {self.rows}"]
        lines += [" ".join(str(int(v)) for v in row) for row in self.entries]
        return "\n".join(lines) + "\n"


def symbolic_from_text(text: str) -> SymbolicMatrix:
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    try:
        N, r, M, rows = (int(v) for v in lines[0])
        body = [[int(v) for v in ln] for ln in lines[1:]]
    except (ValueError, IndexError) as exc:
        raise ParameterError(f"malformed symbolic matrix text: {exc}") from exc
    if len(body) != rows or any(len(row) != N for row in body):
        raise ParameterError(f"header promises {rows}x{N}, body does not match")
    return SymbolicMatrix(np.array(body, dtype=np.int64).reshape(rows, N), (N, r, M))


def save_symbolic(s: SymbolicMatrix, path: str | Path) -> None:
    Path(path).write_text(s.to_text())


def load_symbolic(path: str | Path) -> SymbolicMatrix:
    return symbolic_from_text(Path(path).read_text())


def shift_columns(s: SymbolicMatrix, times: int = 1) -> SymbolicMatrix:
    """sigma: column j takes the old column j+1 (cyclically)."""
    return SymbolicMatrix(np.roll(s.entries, -times, axis=1), None)


def entries_with_value(s: SymbolicMatrix, k: int) -> list[Position]:
    """Positions holding ``k``, in row-major (lexicographic) order."""
    return [(int(i) + 1, int(j) + 1) for i, j in np.argwhere(s.entries == k)]


def tau_shift(k: int, pos: Position, N: int) -> Position:
    """Move ``k`` rows down and one column left, wrapping column 1 to ``N``."""
    i, j = pos
    if not 1 <= j <= N:
        raise ParameterError(f"column {j} outside 1..{N}")
    return (i + k, j - 1) if j >= 2 else (i + k, N)


def column_projection(positions: Iterable[Position]) -> set[int]:
    return {j for _, j in positions}


def leftover_sets(s: SymbolicMatrix, r: int, M: int) -> list[list[Position]]:
    """``B_i = [b_i, tau_l(b_i), ..., tau_l^{r-1}(b_i)]`` for every value-``M`` entry."""
    l = s.rows
    out = []
    for b in entries_with_value(s, M):
        chain = [b]
        for _ in range(r - 1):
            chain.append(tau_shift(l, chain[-1], s.N))
        out.append(chain)
    return out


def lift_once(s: SymbolicMatrix, r: int, N: int, M: int) -> SymbolicMatrix:
    if s.N != N:
        raise ParameterError(f"matrix has {s.N} columns, expected N={N}")
    if not 1 <= r < N:
        raise ParameterError(f"need 1 <= r < N, got r={r}, N={N}")
    copies = [np.roll(s.entries, -t, axis=1) for t in range(r)]
    sets = leftover_sets(s, r, M)
    a = np.full((len(sets), N), M + 1, dtype=np.int64)
    for row, chain in enumerate(sets):
        for j in column_projection(chain):
            a[row, j - 1] = 0
    return SymbolicMatrix(np.vstack(copies + [a]), (N, r, M + 1))


def _check_nrm(N: int, r: int, M: int) -> None:
    if not 1 <= r < N:
        raise ParameterError(f"need 1 <= r < N, got r={r}, N={N}")
    if M < 2:
        raise ParameterError(f"need M >= 2, got M={M}")


def base_symbolic(N: int, r: int) -> SymbolicMatrix:
    _check_nrm(N, r, 2)
    return SymbolicMatrix(np.array([[1] * r + [2] * (N - r)], dtype=np.int64), (N, r, 2))


def build_symbolic(N: int, r: int, M: int) -> SymbolicMatrix:
    _check_nrm(N, r, M)
    s = base_symbolic(N, r)
    for m in range(2, M):
        s = lift_once(s, r, N, m)
    return s


def _check_counts(N: int, r: int, M: int) -> None:
    if not 1 <= r < N or M < 1:
        raise ParameterError(f"need 1 <= r < N and M >= 1, got N={N}, r={r}, M={M}")


def closed_form_count(N: int, r: int, M: int, k: int) -> int:
    """``#(k, S_M) = r^(M-k) (N-r)^(k-1)``."""
    if not 1 <= k <= M:
        return 0
    return r ** (M - k) * (N - r) ** (k - 1)


def count_value(s: SymbolicMatrix, k: int) -> int:
    """Number of entries equal to ``k``, cross-checked against the closed form
    when ``s`` carries its provenance."""
    n = int((s.entries == k).sum())
    if s.provenance is not None and k >= 1:
        N, r, M = s.provenance
        expected = closed_form_count(N, r, M, k)
        if n != expected:
            raise ConsistencyError(f"#({k}, S_{M}) = {n}, closed form gives {expected} for N={N}, r={r}")
    return n


def total_queries(N: int, r: int, M: int) -> int:
    _check_counts(N, r, M)
    total = sum(closed_form_count(N, r, M, k) * comb(M, k) for k in range(1, M + 1))
    if total * (N - r) != N ** M - r ** M:
        raise ConsistencyError(f"total {total} != (N^M - r^M)/(N - r) for {(N, r, M)}")
    return total


def informative_queries(N: int, r: int, M: int) -> int:
    _check_counts(N, r, M)
    n = sum(closed_form_count(N, r, M, k) * comb(M - 1, k - 1) for k in range(1, M + 1))
    if n != N ** (M - 1):
        raise ConsistencyError(f"informative {n} != N^(M-1) for {(N, r, M)}")
    return n


def slot_counts(s: SymbolicMatrix, M: int | None = None) -> tuple[int, int]:
    """(total, informative) slots read off the matrix itself."""
    if M is None:
        M = s.provenance[2] if s.provenance else int(s.entries.max(initial=0))
    values = s.entries[s.entries > 0]
    total = sum(comb(M, int(k)) for k in values)
    informative = sum(comb(M - 1, int(k) - 1) for k in values)
    return total, informative

"""(N, K)-MDS storage: parameters, generator matrices, encoding and erasure decoding.

Message ``W`` of length ``L`` is cut into ``L/K`` consecutive chunks of ``K``
symbols; server ``i`` stores ``chunk @ G[:, i]`` for every chunk, so it holds
``L/K`` symbols per message. ``D_i`` is the concatenation over messages.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConsistencyError, InfeasibleParametersError, ParameterError, ValidationError
from .field import FieldVector, check_modulus
from .linalg import inv_mod, rank_mod

# The (4,2) code over F_3 used throughout the worked examples:
# servers hold W_1, W_2, W_1 + W_2, W_1 + 2 W_2.
EXAMPLE_4_2_ROWS = ((1, 0, 1, 1), (0, 1, 1, 2))

PRESETS = {"example-4-2": EXAMPLE_4_2_ROWS}


@dataclass(frozen=True)
class PirParams:
    N: int
    K: int
    T: int
    M: int
    q: int
    r: int | None = None
    L: int | None = None

    def __post_init__(self):
        check_modulus(self.q)
        if not 1 <= self.K <= self.N:
            raise ParameterError(f"need 1 <= K <= N, got K={self.K}, N={self.N}")
        if not 1 <= self.T <= self.N:
            raise ParameterError(f"need 1 <= T <= N, got T={self.T}, N={self.N}")
        if self.M < 1:
            raise ParameterError(f"need M >= 1, got M={self.M}")
        if self.r is not None and not 0 <= self.r < self.N:
            raise ParameterError(f"codimension r={self.r} must satisfy 0 <= r < N={self.N}")
        if self.L is not None:
            if self.L < 1 or self.L % self.K:
                raise ParameterError(f"K={self.K} must divide L={self.L}")

    def replace(self, **changes) -> "PirParams":
        return dataclasses.replace(self, **changes)

    @property
    def block_len(self) -> int:
        """Symbols per message per server, L/K."""
        if self.L is None:
            raise ParameterError("L not set")
        return self.L // self.K

    @property
    def query_dim(self) -> int:
        return self.M * self.block_len


@dataclass(frozen=True, eq=False)
class GeneratorSpec:
    coefficients: np.ndarray
    q: int

    @property
    def K(self) -> int:
        return self.coefficients.shape[0]

    @property
    def N(self) -> int:
        return self.coefficients.shape[1]

    def column(self, i: int) -> np.ndarray:
        """Column of server ``i`` (1-based)."""
        return self.coefficients[:, i - 1]

    def __eq__(self, other):
        return (isinstance(other, GeneratorSpec) and self.q == other.q
                and np.array_equal(self.coefficients, other.coefficients))

    def to_text(self) -> str:
        lines = [f"{self.K} {self.N} {self.q}"]
        lines += [" ".join(str(int(v)) for v in row) for row in self.coefficients]
        return "\n".join(lines) + "\n"


def non_mds_subset(coefficients: np.ndarray, q: int) -> tuple[int, ...] | None:
    """First K-subset of columns (1-based) whose submatrix is singular."""
    k, n = coefficients.shape
    for cols in combinations(range(n), k):
        if rank_mod(coefficients[:, cols], q) < k:
            return tuple(c + 1 for c in cols)
    return None


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.int64)
    a.setflags(write=False)
    return a


def make_generator(N: int, K: int, q: int, coefficients: Sequence[Sequence[int]] | str | None = None
                   ) -> GeneratorSpec:
    """Build an MDS generator, either from explicit rows / a preset name, or by
    evaluating ``1, x, ..., x^(K-1)`` at the points ``0..N-1`` (plus the point at
    infinity when ``N = q + 1``)."""
    q = check_modulus(q)
    if not 1 <= K <= N:
        raise ParameterError(f"need 1 <= K <= N, got K={K}, N={N}")
    if isinstance(coefficients, str):
        if coefficients not in PRESETS:
            raise ParameterError(f"unknown generator preset {coefficients!r}")
        coefficients = PRESETS[coefficients]
    if coefficients is None:
        if N > q + 1:
            raise InfeasibleParametersError(f"no evaluation code of length N={N} over F_{q}")
        cols = [[pow(x, k, q) for k in range(K)] for x in range(min(N, q))]
        if N == q + 1:
            cols.append([0] * (K - 1) + [1])
        mat = np.array(cols, dtype=np.int64).T % q
    else:
        mat = np.array(coefficients, dtype=np.int64) % q
        if mat.shape != (K, N):
            raise ParameterError(f"generator must be {K}x{N}, got {mat.shape}")
    bad = non_mds_subset(mat, q)
    if bad is not None:
        raise ValidationError(f"generator is not MDS over F_{q}: columns {bad} are dependent")
    return GeneratorSpec(_freeze(mat), q)


def generator_from_text(text: str) -> GeneratorSpec:
    lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
    try:
        K, N, q = (int(v) for v in lines[0])
        rows = [[int(v) for v in ln] for ln in lines[1:]]
    except (ValueError, IndexError) as exc:
        raise ParameterError(f"malformed generator text: {exc}") from exc
    if len(rows) != K:
        raise ParameterError(f"header announces {K} rows, found {len(rows)}")
    return make_generator(N, K, q, rows)


def save_generator(g: GeneratorSpec, path: str | Path) -> None:
    Path(path).write_text(g.to_text())


def load_generator(path: str | Path) -> GeneratorSpec:
    return generator_from_text(Path(path).read_text())


@dataclass(frozen=True, eq=False)
class Database:
    """``messages`` has shape (M, L); ``stored`` has shape (N, M, L/K)."""

    messages: np.ndarray
    stored: np.ndarray
    generator: GeneratorSpec

    @property
    def q(self) -> int:
        return self.generator.q

    @property
    def M(self) -> int:
        return self.messages.shape[0]

    @property
    def L(self) -> int:
        return self.messages.shape[1]

    def server_data(self, i: int) -> FieldVector:
        """``D_i`` for server ``i`` (1-based)."""
        return FieldVector(self.stored[i - 1].reshape(-1), self.q)

    def message(self, j: int) -> FieldVector:
        return FieldVector(self.messages[j - 1], self.q)

    def share(self, i: int, j: int) -> FieldVector:
        """``W^j_i``: what server ``i`` stores about message ``j``."""
        return FieldVector(self.stored[i - 1, j - 1], self.q)


def encode(messages, g: GeneratorSpec) -> Database:
    q = g.q
    if isinstance(messages, np.ndarray):
        w = messages.astype(np.int64) % q
    else:
        rows = [m.values if isinstance(m, FieldVector) else m for m in messages]
        lengths = {len(r) for r in rows}
        if len(lengths) != 1:
            raise ParameterError(f"messages have differing lengths {sorted(lengths)}")
        w = np.array(rows, dtype=np.int64) % q
    if w.ndim != 2 or w.shape[0] < 1:
        raise ParameterError("expected a non-empty list of messages")
    M, L = w.shape
    if L % g.K:
        raise ParameterError(f"K={g.K} must divide message length L={L}")
    chunks = w.reshape(M, L // g.K, g.K)
    stored = np.einsum("msk,kn->nms", chunks, g.coefficients) % q
    return Database(_freeze(w), _freeze(stored), g)


def decode_from_subset(shares: Mapping[int, FieldVector | np.ndarray], g: GeneratorSpec) -> FieldVector:
    """Recover a message from ``K`` shares keyed by 1-based server index."""
    cols = sorted(shares)
    if len(cols) != g.K or len(set(cols)) != g.K:
        raise ParameterError(f"need exactly K={g.K} distinct shares, got servers {cols}")
    if not all(1 <= c <= g.N for c in cols):
        raise ParameterError(f"server index out of range in {cols}")
    y = np.array([np.asarray(getattr(shares[c], "values", shares[c])) for c in cols],
                 dtype=np.int64).T % g.q
    sub = g.coefficients[:, [c - 1 for c in cols]]
    try:
        sub_inv = inv_mod(sub, g.q)
    except ZeroDivisionError as exc:
        raise ConsistencyError(f"columns {cols} singular: generator is not MDS") from exc
    return FieldVector((y @ sub_inv % g.q).reshape(-1), g.q)


def random_messages(M: int, L: int, q: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, q, size=(M, L), dtype=np.int64)

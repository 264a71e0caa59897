"""Batched query sampling, answering and decoding shared by one-shot runs and
lifted schemes.

A :class:`QueryLayout` is the client-side bookkeeping for one desired index:
an ordered list of slots (one transmitted vector each) plus the noise
instances that feed them. Every noise instance is one draw of the one-shot
noise code: ``f`` free vectors supported on a set of message blocks, mapped to
server ``j`` through row ``j`` of the noise code. A slot transmits the noise of
its instance at its server, plus (for informative slots) a vector supported on
the desired block.

Randomness is kept in two raw arrays so that the same code path serves random
sampling and exhaustive enumeration:

* ``free``: shape ``(B, n_instances, f, M, blk)``, zero outside each instance's blocks;
* ``info``: shape ``(B, n_informative, blk)``.
"""

from __future__ import annotations

import zlib
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ConsistencyError, EnumerationInfeasibleError, NotDecodableError, RetryExhaustedError
from .linalg import batch_rank_mod, solve_mod

RESAMPLE_BUDGET = 64
ENUMERATION_LIMIT = 10**7


def substream(seed: int, *labels) -> np.random.Generator:
    """Generator for the labelled substream ``(seed, *labels)``.

    Labels are folded to integers with CRC-32 so the mapping is stable across
    platforms and Python versions.
    """
    key = tuple(lab if isinstance(lab, int) else zlib.crc32(str(lab).encode()) for lab in labels)
    ss = np.random.SeedSequence(entropy=int(seed) & ((1 << 64) - 1), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class NoiseInstance:
    blocks: tuple[int, ...]            # 0-based message blocks
    noise_positions: tuple[int, ...]   # 1-based servers carrying pure noise
    coefficients: dict                 # mixed server -> coefficients over noise_positions


@dataclass(frozen=True)
class Slot:
    server: int                        # 1-based
    support: tuple[int, ...]           # 0-based blocks the transmitted vector may touch
    instance: int | None
    informative: int | None
    label: tuple = ()                  # client-side only (entry, subset, ...)


@dataclass(frozen=True, eq=False)
class QueryLayout:
    N: int
    M: int
    L: int
    blk: int
    q: int
    desired: int                       # 1-based
    noise_code: np.ndarray             # N x f
    generator: np.ndarray              # K x N
    slots: tuple[Slot, ...]
    instances: tuple[NoiseInstance, ...]
    n_informative: int
    condition_noise: bool

    @property
    def f(self) -> int:
        return self.noise_code.shape[1]

    @property
    def dim(self) -> int:
        return self.M * self.blk

    def slots_at(self, servers) -> list[int]:
        servers = set(servers)
        return [i for i, s in enumerate(self.slots) if s.server in servers]

    def per_server_counts(self) -> list[int]:
        counts = [0] * self.N
        for s in self.slots:
            counts[s.server - 1] += 1
        return counts

    def informative_servers(self) -> np.ndarray:
        servers = np.zeros(self.n_informative, dtype=np.int64)
        for s in self.slots:
            if s.informative is not None:
                servers[s.informative] = s.server
        return servers

    def block_counts(self) -> dict[int, list[int]]:
        """For each block: instance indices whose free vectors live on it."""
        out: dict[int, list[int]] = {}
        for k, inst in enumerate(self.instances):
            for j in inst.blocks:
                out.setdefault(j, []).append(k)
        return out


def functional_matrix(layout: QueryLayout, info: np.ndarray) -> np.ndarray:
    """Rows ``a_i (x) G[:, server_i]``: the linear functional on the desired
    message returned by ``<D_server, a_i>``. ``info`` is ``(..., n_inf, blk)``."""
    g = layout.generator[:, layout.informative_servers() - 1].T    # n_inf x K
    rows = info[..., :, :, None] * g[:, None, :]                   # (..., n_inf, blk, K)
    return rows.reshape(*info.shape[:-2], layout.n_informative, layout.blk * g.shape[1]) % layout.q


def _informative_ok(layout: QueryLayout, info: np.ndarray) -> np.ndarray:
    target = min(layout.n_informative, layout.L)
    return batch_rank_mod(functional_matrix(layout, info), layout.q) == target


def _noise_block_ok(layout: QueryLayout, free: np.ndarray, block: int, insts: list[int]) -> np.ndarray:
    comp = free[:, :, :, block, :][:, insts].reshape(free.shape[0], -1, layout.blk)
    target = min(comp.shape[1], layout.blk)
    return batch_rank_mod(comp, layout.q) == target


def _draw(rng: np.random.Generator, q: int, shape, support: Sequence[int] | None) -> np.ndarray:
    if support is None:
        return rng.integers(0, q, size=shape, dtype=np.int64)
    return np.asarray(support, dtype=np.int64)[rng.integers(0, len(support), size=shape)]


def sample_randomness(layout: QueryLayout, rng: np.random.Generator, batch: int = 1,
                      noise_support: Sequence[int] | None = None,
                      fixed_informative: np.ndarray | None = None,
                      budget: int = RESAMPLE_BUDGET) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``(free, info)`` for ``batch`` independent protocol runs.

    Informative vectors are uniform subject to their functionals reaching full
    rank. When ``layout.condition_noise`` is set, the free vectors' components
    on each block are additionally required to have full rank jointly across
    instances. Each condition is enforced by resampling only the offending
    component, at most ``budget`` times.
    """
    q, blk = layout.q, layout.blk
    free = np.zeros((batch, len(layout.instances), layout.f, layout.M, blk), dtype=np.int64)
    per_block = layout.block_counts()
    for j, insts in per_block.items():
        free[:, :, :, j, :][:, insts] = _draw(rng, q, (batch, len(insts), layout.f, blk), noise_support)
        if not layout.condition_noise:
            continue
        bad = ~_noise_block_ok(layout, free, j, insts)
        tries = 0
        while bad.any():
            tries += 1
            if tries > budget:
                raise RetryExhaustedError(f"noise on block {j + 1} rank-deficient after {budget} resamples")
            idx = np.nonzero(bad)[0]
            sub = free[idx]
            sub[:, :, :, j, :][:, insts] = _draw(rng, q, (idx.size, len(insts), layout.f, blk), noise_support)
            free[idx] = sub
            bad[idx] = ~_noise_block_ok(layout, sub, j, insts)

    if fixed_informative is not None:
        info = np.broadcast_to(np.asarray(fixed_informative, dtype=np.int64) % q,
                               (batch, layout.n_informative, blk)).copy()
        if not _informative_ok(layout, info).all():
            raise NotDecodableError("fixed informative vectors give rank-deficient functionals")
        return free, info
    info = rng.integers(0, q, size=(batch, layout.n_informative, blk), dtype=np.int64)
    bad = ~_informative_ok(layout, info)
    tries = 0
    while bad.any():
        tries += 1
        if tries > budget:
            raise RetryExhaustedError(f"informative functionals rank-deficient after {budget} resamples")
        idx = np.nonzero(bad)[0]
        info[idx] = rng.integers(0, q, size=(idx.size, layout.n_informative, blk), dtype=np.int64)
        bad[idx] = ~_informative_ok(layout, info[idx])
    return free, info


def _slot_index_arrays(layout: QueryLayout):
    inst = np.array([-1 if s.instance is None else s.instance for s in layout.slots], dtype=np.int64)
    inf = np.array([-1 if s.informative is None else s.informative for s in layout.slots], dtype=np.int64)
    server = np.array([s.server for s in layout.slots], dtype=np.int64)
    return inst, inf, server


def assemble(layout: QueryLayout, free: np.ndarray, info: np.ndarray, slots: Sequence[int] | None = None
             ) -> np.ndarray:
    """Transmitted vectors, shape ``(B, n_slots, M * blk)`` (optionally a subset of slots)."""
    q = layout.q
    inst, inf, server = _slot_index_arrays(layout)
    if slots is not None:
        inst, inf, server = inst[slots], inf[slots], server[slots]
    batch = free.shape[0]
    out = np.zeros((batch, inst.size, layout.M, layout.blk), dtype=np.int64)
    has_noise = inst >= 0
    if has_noise.any():
        rows = layout.noise_code[server[has_noise] - 1]                      # (n, f)
        picked = free[:, inst[has_noise]]                                    # (B, n, f, M, blk)
        out[:, has_noise] = np.einsum("nt,bntmk->bnmk", rows, picked)
    has_info = inf >= 0
    if has_info.any():
        out[:, has_info, layout.desired - 1, :] += info[:, inf[has_info]]
    return (out % q).reshape(batch, inst.size, layout.dim)


def answer(layout: QueryLayout, queries: np.ndarray, stored: np.ndarray) -> np.ndarray:
    """Inner products ``<D_server, query>`` for every slot; ``stored`` is (N, M, blk)."""
    d = stored.reshape(stored.shape[0], -1)
    _, _, server = _slot_index_arrays(layout)
    return np.einsum("bsd,sd->bs", queries, d[server - 1]) % layout.q


def informative_values(layout: QueryLayout, responses: np.ndarray) -> np.ndarray:
    """Strip the noise from every informative slot using the decoding equations."""
    q = layout.q
    where: dict[tuple[int, int], int] = {}
    for i, s in enumerate(layout.slots):
        if s.instance is not None:
            where[(s.instance, s.server)] = i
    values = np.zeros(layout.n_informative, dtype=np.int64)
    for i, s in enumerate(layout.slots):
        if s.informative is None:
            continue
        y = int(responses[i])
        if s.instance is not None:
            inst = layout.instances[s.instance]
            alpha = inst.coefficients[s.server]
            y -= sum(int(a) * int(responses[where[(s.instance, n)]])
                     for a, n in zip(alpha, inst.noise_positions))
        values[s.informative] = y % q
    return values


def decode_message(layout: QueryLayout, info: np.ndarray, responses: np.ndarray) -> np.ndarray:
    """Solve for the desired message from one run's responses."""
    y = informative_values(layout, responses)
    x = solve_mod(functional_matrix(layout, info), y, layout.q)
    if x is None:
        raise ConsistencyError("informative responses are inconsistent with the decoding system")
    return x


# -- exhaustive enumeration -------------------------------------------------

def _free_coordinates(layout: QueryLayout) -> list[tuple[int, int, int, int]]:
    coords = []
    for k, inst in enumerate(layout.instances):
        for t in range(layout.f):
            for j in inst.blocks:
                for s in range(layout.blk):
                    coords.append((k, t, j, s))
    return coords


def enumeration_size(layout: QueryLayout) -> int:
    n = len(_free_coordinates(layout)) + layout.n_informative * layout.blk
    return layout.q ** n


def enumerate_randomness(layout: QueryLayout, chunk: int = 1 << 15,
                         limit: int = ENUMERATION_LIMIT) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield every admissible ``(free, info)`` pair in chunks; each admissible
    pair has equal probability under :func:`sample_randomness`."""
    q = layout.q
    coords = _free_coordinates(layout)
    n_free = len(coords)
    n = n_free + layout.n_informative * layout.blk
    total = q ** n
    if total > limit:
        raise EnumerationInfeasibleError(f"{q}^{n} = {total} sampler states exceed the limit {limit}")
    k_idx, t_idx, j_idx, s_idx = (np.array(c, dtype=np.int64) for c in zip(*coords)) if coords else ([],) * 4
    powers = q ** np.arange(n, dtype=np.int64)
    per_block = layout.block_counts()
    for start in range(0, total, chunk):
        ids = np.arange(start, min(total, start + chunk), dtype=np.int64)
        digits = (ids[:, None] // powers[None, :]) % q
        free = np.zeros((ids.size, len(layout.instances), layout.f, layout.M, layout.blk), dtype=np.int64)
        if n_free:
            free[:, k_idx, t_idx, j_idx, s_idx] = digits[:, :n_free]
        info = digits[:, n_free:].reshape(ids.size, layout.n_informative, layout.blk)
        ok = _informative_ok(layout, info)
        if layout.condition_noise:
            for j, insts in per_block.items():
                ok &= _noise_block_ok(layout, free, j, insts)
        if ok.any():
            yield free[ok], info[ok]


def view_distribution(layout: QueryLayout, servers, limit: int = ENUMERATION_LIMIT) -> tuple[Counter, int]:
    """Exact distribution (as counts over equally likely states) of everything
    transmitted to ``servers``."""
    slots = layout.slots_at(servers)
    counts: Counter = Counter()
    total = 0
    for free, info in enumerate_randomness(layout, limit=limit):
        views = assemble(layout, free, info, slots).astype(np.uint8 if layout.q < 256 else np.uint16)
        flat = views.reshape(views.shape[0], -1)
        counts.update(row.tobytes() for row in flat)
        total += flat.shape[0]
    return counts, total

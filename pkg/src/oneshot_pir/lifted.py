"""Refined and lifted schemes built from a symbolic matrix and a one-shot scheme.

The symbolic matrix says how many queries each server gets; the noise groups
say which slots share one draw of the one-shot noise. Groups are built along
the lift recursion:

* ``S_2`` has one level-1 group: pure slots on the ``1`` entries, mixed slots
  on the ``2`` entries, canonical role assignment;
* the copy ``sigma^t(S_M)`` inherits every group of ``S_M`` with rows shifted by
  ``t * rows(S_M)``, columns moved ``t`` to the left and the rotation offset
  increased by ``t``;
* every leftover chain ``B_i`` together with row ``i`` of ``A`` forms a new
  level-``M`` group.

For a desired message ``m`` a group of level ``v`` carries one noise instance
per ``v``-subset ``U`` of messages avoiding ``m``: its pure slots are the
``U``-queries on the pure entries and its mixed slots are the
``(U + {m})``-queries on the mixed entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np

from .errors import ConsistencyError, InfeasibleParametersError, NotRotatableError, ParameterError
from .field import FieldElement, FieldVector
from .mds import Database, PirParams
from .oneshot import OneShotScheme, rotate_oneshot
from .protocol import (NoiseInstance, QueryLayout, Slot, answer, assemble, decode_message,
                       sample_randomness, substream)
from .symbolic import (Position, SymbolicMatrix, base_symbolic, build_symbolic, column_projection, informative_queries,
                       leftover_sets, lift_once, total_queries)


@dataclass(frozen=True)
class SubspaceLayout:
    """``M`` consecutive blocks of width ``blk`` inside ``F_q^(M*blk)``."""

    M: int
    blk: int

    def block(self, j: int) -> range:
        """Coordinates of ``V_j`` (``j`` is 1-based)."""
        return range((j - 1) * self.blk, j * self.blk)

    def support(self, vector) -> tuple[int, ...]:
        v = np.asarray(getattr(vector, "values", vector)).reshape(self.M, self.blk)
        return tuple(j + 1 for j in range(self.M) if v[j].any())


@dataclass(frozen=True)
class NoiseGroup:
    level: int
    pure_slots: tuple[Position, ...]
    mixed_slots: tuple[Position, ...]
    offset: int

    def columns(self) -> tuple[int, ...]:
        return tuple(j for _, j in self.pure_slots + self.mixed_slots)


def _move(pos: Position, t: int, rows: int, N: int) -> Position:
    i, j = pos
    return (t * rows + i, (j - 1 - t) % N + 1)


def lift_groups(groups: list[NoiseGroup], s: SymbolicMatrix, r: int, N: int, M: int) -> list[NoiseGroup]:
    """Groups of ``lift(s)`` from the groups of ``s`` (an ``M``-message matrix)."""
    rows = s.rows
    out = []
    for t in range(r):
        for g in groups:
            out.append(NoiseGroup(g.level,
                                  tuple(_move(p, t, rows, N) for p in g.pure_slots),
                                  tuple(_move(p, t, rows, N) for p in g.mixed_slots),
                                  (g.offset + t) % N))
    for i, chain in enumerate(leftover_sets(s, r, M), start=1):
        cols = column_projection(chain)
        mixed = tuple((r * rows + i, j) for j in range(1, N + 1) if j not in cols)
        out.append(NoiseGroup(M, tuple(chain), mixed, (r - chain[0][1]) % N))
    return out


@dataclass(frozen=True, eq=False)
class DecodingPlan:
    scheme: OneShotScheme
    symbolic: SymbolicMatrix
    groups: tuple[NoiseGroup, ...]
    rotations: dict              # offset -> rotated scheme
    M: int

    @property
    def N(self) -> int:
        return self.scheme.N

    @property
    def r(self) -> int:
        return self.scheme.r

    @property
    def q(self) -> int:
        return self.scheme.q

    @property
    def L(self) -> int:
        return self.N ** (self.M - 1)

    @property
    def blk(self) -> int:
        return self.L // self.scheme.params.K

    @property
    def subspaces(self) -> SubspaceLayout:
        return SubspaceLayout(self.M, self.blk)

    def entries(self) -> list[tuple[Position, int]]:
        """Nonzero entries in canonical (server, row) order."""
        e = self.symbolic.entries
        return [((int(i) + 1, j), int(e[i, j - 1]))
                for j in range(1, self.N + 1) for i in np.nonzero(e[:, j - 1])[0]]

    def slot_labels(self) -> list[tuple[Position, tuple[int, ...]]]:
        """Every (entry, message subset) slot in transmission order: server by
        server, row-major entries, lexicographic subsets. Independent of ``m``."""
        out = []
        for pos, k in self.entries():
            for subset in combinations(range(1, self.M + 1), k):
                out.append((pos, subset))
        return out

    def per_server_counts(self) -> list[int]:
        counts = [0] * self.N
        for (_, j), _ in self.slot_labels():
            counts[j - 1] += 1
        return counts

    def layout(self, desired: int) -> QueryLayout:
        M, N = self.M, self.N
        if not 1 <= desired <= M:
            raise ParameterError(f"desired index {desired} outside 1..{M}")
        pure_of: dict[Position, int] = {}
        mixed_of: dict[Position, int] = {}
        for gi, g in enumerate(self.groups):
            for p in g.pure_slots:
                pure_of[p] = gi
            for p in g.mixed_slots:
                mixed_of[p] = gi
        instance_ids: dict[tuple[int, tuple[int, ...]], int] = {}
        instances: list[NoiseInstance] = []

        def instance(gi: int, subset: tuple[int, ...]) -> int:
            key = (gi, subset)
            if key not in instance_ids:
                rot = self.rotations[self.groups[gi].offset]
                instance_ids[key] = len(instances)
                instances.append(NoiseInstance(tuple(u - 1 for u in subset), rot.noise_positions,
                                               dict(rot.decoding_equations)))
            return instance_ids[key]

        slots = []
        n_inf = 0
        for pos, subset in self.slot_labels():
            support = tuple(u - 1 for u in subset)
            if desired not in subset:
                slots.append(Slot(pos[1], support, instance(pure_of[pos], subset), None, (pos, subset)))
            elif len(subset) == 1:
                slots.append(Slot(pos[1], support, None, n_inf, (pos, subset)))
                n_inf += 1
            else:
                rest = tuple(u for u in subset if u != desired)
                slots.append(Slot(pos[1], support, instance(mixed_of[pos], rest), n_inf, (pos, subset)))
                n_inf += 1
        return QueryLayout(N, M, self.L, self.blk, self.q, desired, self.scheme.noise_code,
                           self.scheme.generator.coefficients, tuple(slots), tuple(instances), n_inf,
                           condition_noise=True)


def _rotations(s: OneShotScheme, offsets) -> dict:
    out = {}
    for t in sorted(set(offsets)):
        try:
            out[t] = rotate_oneshot(s, t)
        except NotRotatableError as exc:
            raise NotRotatableError(f"scheme cannot be lifted: {exc}") from exc
    return out


def _check_divisibility(s: OneShotScheme, M: int) -> None:
    K, N = s.params.K, s.N
    if N ** (M - 1) % K:
        raise InfeasibleParametersError(
            f"K={K} does not divide L=N^(M-1)={N ** (M - 1)}; repeat the scheme "
            f"{K // np.gcd(K, N ** (M - 1))} times with a longer message instead")


def build_plan(symbolic: SymbolicMatrix, s: OneShotScheme) -> DecodingPlan:
    if symbolic.provenance is None:
        raise ParameterError("symbolic matrix must come from build_symbolic")
    N, r, M = symbolic.provenance
    if (N, r) != (s.N, s.r):
        raise ParameterError(f"symbolic matrix built for (N, r) = {(N, r)}, scheme has {(s.N, s.r)}")
    _check_divisibility(s, M)
    current = base_symbolic(N, r)
    groups = [NoiseGroup(1, tuple((1, j) for j in range(1, r + 1)),
                         tuple((1, j) for j in range(r + 1, N + 1)), 0)]
    for m in range(2, M):
        groups = lift_groups(groups, current, r, N, m)
        current = lift_once(current, r, N, m)
    if current != symbolic:
        raise ConsistencyError("symbolic matrix does not match the lift recursion")
    rotations = _rotations(s, (g.offset for g in groups))
    for g in groups:
        pure_cols = tuple(sorted(j for _, j in g.pure_slots))
        if pure_cols != rotations[g.offset].noise_positions or len(set(g.columns())) != N:
            raise ConsistencyError(f"group {g} does not match its rotation")
    return DecodingPlan(s, symbolic, tuple(groups), rotations, M)


def refine(s: OneShotScheme) -> DecodingPlan:
    """Two-message scheme of rate N/(N + r)."""
    if s.N % s.params.K:
        raise InfeasibleParametersError(
            f"K={s.params.K} does not divide N={s.N}; repeat the refined scheme to reach a multiple of K")
    return build_plan(build_symbolic(s.N, s.r, 2), s)


def lifted_plan(s: OneShotScheme, M: int) -> DecodingPlan:
    return build_plan(build_symbolic(s.N, s.r, M), s)


def measured_rate(plan: DecodingPlan) -> Fraction:
    labels = plan.slot_labels()
    informative = sum(1 for _, subset in labels if 1 in subset)
    rate = Fraction(informative, len(labels))
    N, r, M = plan.N, plan.r, plan.M
    closed = Fraction((N - r) * N ** (M - 1), N ** M - r ** M)
    if rate != closed or len(labels) != total_queries(N, r, M) or informative != informative_queries(N, r, M):
        raise ConsistencyError(f"measured rate {rate} differs from the closed form {closed}")
    return rate


# -- instantiation ------------------------------------------------------------

@dataclass(frozen=True)
class QueryBatch:
    """What goes on the wire: one list of vectors per server."""

    queries: tuple[tuple[FieldVector, ...], ...]

    def sizes(self) -> list[int]:
        return [len(qs) for qs in self.queries]


@dataclass(frozen=True)
class ResponseBatch:
    responses: tuple[tuple[FieldElement, ...], ...]


@dataclass(frozen=True, eq=False)
class ClientState:
    """Private decoding state; never sent."""

    layout: QueryLayout
    informative: np.ndarray
    free: np.ndarray


def _split(layout: QueryLayout, flat) -> list[list]:
    out = [[] for _ in range(layout.N)]
    for slot, value in zip(layout.slots, flat):
        out[slot.server - 1].append(value)
    return out


def instantiate_queries(plan: DecodingPlan, params: PirParams | None, desired: int,
                        rng_seed: int | np.random.Generator) -> tuple[QueryBatch, ClientState]:
    if params is not None:
        if params.q != plan.q or params.M != plan.M or (params.L is not None and params.L != plan.L):
            raise ParameterError(f"database parameters {params} do not match the plan")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else substream(rng_seed, "instantiate", desired)
    layout = plan.layout(desired)
    free, info = sample_randomness(layout, rng, 1)
    queries = assemble(layout, free, info)[0]
    per_server = _split(layout, [FieldVector(v, plan.q) for v in queries])
    return QueryBatch(tuple(tuple(v) for v in per_server)), ClientState(layout, info[0], free[0])


def answer_batch(db: Database, batch: QueryBatch) -> ResponseBatch:
    if len(batch.queries) != db.stored.shape[0]:
        raise ParameterError(f"batch addresses {len(batch.queries)} servers, database has {db.stored.shape[0]}")
    out = []
    for i, qs in enumerate(batch.queries, start=1):
        d = db.server_data(i)
        row = []
        for qv in qs:
            if len(qv) != len(d) or qv.q != d.q:
                raise ParameterError(f"query of length {len(qv)} for server data of length {len(d)}")
            row.append(FieldElement(int(np.dot(d.values, qv.values) % d.q), d.q))
        out.append(tuple(row))
    return ResponseBatch(tuple(out))


def _flatten(layout: QueryLayout, responses: ResponseBatch) -> np.ndarray:
    per_server = [list(r) for r in responses.responses]
    flat = np.zeros(len(layout.slots), dtype=np.int64)
    cursor = [0] * layout.N
    for i, slot in enumerate(layout.slots):
        lst = per_server[slot.server - 1]
        if cursor[slot.server - 1] >= len(lst):
            raise ParameterError(f"missing responses from server {slot.server}")
        flat[i] = int(lst[cursor[slot.server - 1]])
        cursor[slot.server - 1] += 1
    return flat


def decode(plan: DecodingPlan, state: ClientState, responses: ResponseBatch) -> FieldVector:
    flat = _flatten(state.layout, responses)
    return FieldVector(decode_message(state.layout, state.informative, flat), plan.q)


def retrieve(plan: DecodingPlan, db: Database, desired: int, seed: int) -> FieldVector:
    batch, state = instantiate_queries(plan, None, desired, seed)
    return decode(plan, state, answer_batch(db, batch))


def dump_transcript(plan: DecodingPlan, batch: QueryBatch, responses: ResponseBatch,
                    state: ClientState | None = None) -> str:
    lines = [f"# transcript N={plan.N} r={plan.r} M={plan.M} q={plan.q} L={plan.L}"]
    for i, (qs, rs) in enumerate(zip(batch.queries, responses.responses), start=1):
        lines.append(f"server {i}")
        for qv, a in zip(qs, rs):
            lines.append(f"  {' '.join(str(v) for v in qv.tolist())} -> {int(a)}")
    if state is not None:
        lines.append("# private")
        for slot in state.layout.slots:
            (row, col), subset = slot.label
            kind = "bare" if slot.instance is None else ("mixed" if slot.informative is not None else "pure")
            lines.append(f"  server {slot.server} entry ({row},{col}) messages {list(subset)} {kind}"
                         + ("" if slot.instance is None else f" instance {slot.instance}"))
    return "\n".join(lines) + "\n"


def plan_summary(plan: DecodingPlan) -> dict:
    by_level: dict[int, int] = {}
    for g in plan.groups:
        by_level[g.level] = by_level.get(g.level, 0) + 1
    total = sum(plan.per_server_counts())
    return {"N": plan.N, "r": plan.r, "M": plan.M, "L": plan.L, "total": total,
            "informative": plan.L, "per_server": plan.per_server_counts(), "groups_by_level": by_level,
            "check_total": total == sum(comb(plan.M, k) * c for k, c in
                                        ((k, int((plan.symbolic.entries == k).sum())) for k in range(1, plan.M + 1)))}

"""One-shot PIR schemes.

A one-shot scheme sends one query per server. ``f`` free noise vectors
``qhat_1..qhat_f`` are drawn uniformly; server ``j`` receives
``q_j = sum_t noise_code[j, t] qhat_t``, plus an informative vector when ``j``
is a mixed position. The noise code is tied to the servers: rotating a scheme
moves the noise/mixed roles, never the rows.

Decoding equations are always derived by solving a linear system, never
transcribed: the response ``<D_i, q_i>`` is the bilinear form
``G[:, i] (x) noise_code[i, :]`` in (data chunk, free noise) coordinates, so the
equation for a mixed position ``p`` is a solution ``alpha`` of
``sum_j alpha_j v_{n_j} = v_p`` over the noise positions ``n_j``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Sequence

import numpy as np

from .errors import (ConstructionUnsupportedError, InfeasibleParametersError, NotDecodableError,
                     NotRotatableError, ParameterError, ValidationError)
from .field import next_prime
from .linalg import inv_mod, rank_mod, rank_rational, solve_mod, solve_rational
from .mds import Database, GeneratorSpec, PirParams, make_generator, non_mds_subset
from .protocol import (NoiseInstance, QueryLayout, Slot, answer, assemble, decode_message,
                       functional_matrix, informative_values, sample_randomness)

KINDS = ("secret_sharing", "geometrical", "explicit")


@dataclass(frozen=True, eq=False)
class OneShotScheme:
    params: PirParams
    noise_code: np.ndarray                        # N x f, reduced mod q
    noise_positions: tuple[int, ...]              # 1-based, sorted
    mixed_positions: tuple[int, ...]              # 1-based, sorted
    generator: GeneratorSpec
    decoding_equations: dict[int, tuple[int, ...]]  # mixed position -> alpha over noise_positions
    kind: str = "explicit"
    offset: int = 0

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def r(self) -> int:
        return len(self.noise_positions)

    @property
    def q(self) -> int:
        return self.params.q

    @property
    def f(self) -> int:
        return self.noise_code.shape[1]

    def signed_equation(self, p: int) -> tuple[int, ...]:
        """Decoding coefficients for ``p`` as representatives in (-q/2, q/2]."""
        q = self.q
        return tuple(a - q if a > q // 2 else a for a in self.decoding_equations[p])

    def describe(self) -> str:
        lines = [f"{self.kind} one-shot scheme N={self.N} K={self.params.K} T={self.params.T} "
                 f"q={self.q} r={self.r} offset={self.offset}"]
        for j in range(1, self.N + 1):
            role = "noise" if j in self.noise_positions else "mixed"
            lines.append(f"  server {j}: {role} row {self.noise_code[j - 1].tolist()}")
        for p in self.mixed_positions:
            terms = " + ".join(f"{a}<D_{n},q_{n}>" for a, n in zip(self.signed_equation(p), self.noise_positions))
            lines.append(f"  <D_{p},q_{p}> = {terms}")
        return "\n".join(lines)


@dataclass(frozen=True)
class GeometricalSpec:
    """``lam[(i, l)]`` holds ``lambda^i_j(l)`` for ``j`` in ``T+1..K+T-1`` followed
    by ``lambda^i_l(l)``; ``gamma[(i, l)]`` is the ratio constant."""

    N: int
    K: int
    T: int
    q: int
    lam: dict
    gamma: dict

    @property
    def l0(self) -> int:
        return self.K + self.T

    @property
    def middle(self) -> tuple[int, ...]:
        return tuple(range(self.T + 1, self.K + self.T))


# -- decoding equations -------------------------------------------------------

def _response_form(noise_code, g_coeffs, i: int) -> np.ndarray:
    return np.kron(np.asarray(g_coeffs)[:, i - 1], np.asarray(noise_code)[i - 1])


def derive_decoding_equations(noise_code, generator: GeneratorSpec | np.ndarray, p: int,
                              noise_positions: Sequence[int], q: int | None = None) -> tuple[int, ...]:
    """Coefficients ``alpha`` with ``<D_p, q_p> = sum_j alpha_j <D_{n_j}, q_{n_j}>``
    identically in the data and the free noise."""
    if isinstance(generator, GeneratorSpec):
        g, q = generator.coefficients, generator.q
    else:
        g = np.asarray(generator, dtype=np.int64)
    if q is None:
        raise ParameterError("field size required with a raw generator array")
    if p in noise_positions:
        raise ParameterError(f"position {p} is a noise position")
    lam = np.asarray(noise_code, dtype=np.int64) % q
    a = np.array([_response_form(lam, g, n) for n in noise_positions], dtype=np.int64).T
    b = _response_form(lam, g, p)
    x = solve_mod(a, b, q)
    if x is None:
        raise NotDecodableError(f"noise at server {p} is not a combination of servers {tuple(noise_positions)}")
    return tuple(int(v) for v in x)


def derive_rational_equations(noise_code, g_rows, p: int, noise_positions: Sequence[int]
                              ) -> list[Fraction] | None:
    """Same system over the rationals, on integer lifts."""
    lam = np.asarray(noise_code, dtype=object)
    g = np.asarray(g_rows, dtype=object)
    cols = [list(np.kron(g[:, n - 1], lam[n - 1])) for n in noise_positions]
    a = [list(row) for row in zip(*cols)]
    b = list(np.kron(g[:, p - 1], lam[p - 1]))
    return solve_rational(a, b)


# -- validation ---------------------------------------------------------------

def _rank_failures(noise_code, T: int, rank) -> tuple[int, ...] | None:
    n = len(noise_code)
    for rows in combinations(range(n), T):
        if rank([list(noise_code[i]) for i in rows]) < T:
            return tuple(i + 1 for i in rows)
    return None


def _problems(noise_code, g, T, noise_positions, mixed_positions, q=None) -> list[str]:
    """Invariant violations, computed mod ``q`` or (``q is None``) over Q."""
    out = []
    if q is None:
        rank = rank_rational
        mds_bad = next((c for c in combinations(range(1, g.shape[1] + 1), g.shape[0])
                        if rank_rational(g[:, [x - 1 for x in c]].tolist()) < g.shape[0]), None)
    else:
        def rank(rows):
            return rank_mod(np.array(rows, dtype=np.int64), q)
        mds_bad = non_mds_subset(np.asarray(g, dtype=np.int64) % q, q)
    if mds_bad is not None:
        out.append(f"generator columns {mds_bad} are dependent")
    bad = _rank_failures(np.asarray(noise_code), T, rank)
    if bad is not None:
        out.append(f"noise rows {bad} have rank < T={T}")
    for p in mixed_positions:
        if q is None:
            ok = derive_rational_equations(noise_code, g, p, noise_positions) is not None
        else:
            try:
                derive_decoding_equations(noise_code, np.asarray(g) % q, p, noise_positions, q)
                ok = True
            except NotDecodableError:
                ok = False
        if not ok:
            out.append(f"no decoding equation for mixed position {p}")
    return out


def _guarded(noise_int, g_int, params: PirParams, noise_positions, mixed_positions) -> None:
    """Raise unless the scheme is valid mod q; blame the characteristic when
    the same integer data is valid over the rationals."""
    problems = _problems(noise_int, g_int, params.T, noise_positions, mixed_positions, params.q)
    if not problems:
        return
    if not _problems(np.asarray(noise_int, dtype=object), np.asarray(g_int, dtype=object),
                     params.T, noise_positions, mixed_positions, None):
        raise InfeasibleParametersError(
            f"characteristic {params.q} incompatible with the scheme: {'; '.join(problems)}")
    kind = NotDecodableError if all(p.startswith("no decoding") for p in problems) else ValidationError
    raise kind("; ".join(problems))


def _assemble(params, noise_code, noise_positions, generator, kind, offset=0) -> OneShotScheme:
    q = params.q
    noise_code = np.array(noise_code, dtype=np.int64) % q
    noise_code.setflags(write=False)
    noise_positions = tuple(sorted(noise_positions))
    mixed = tuple(j for j in range(1, params.N + 1) if j not in noise_positions)
    eqs = {p: derive_decoding_equations(noise_code, generator, p, noise_positions) for p in mixed}
    params = params.replace(r=len(noise_positions))
    return OneShotScheme(params, noise_code, noise_positions, mixed, generator, eqs, kind, offset)


def _generator_input(params: PirParams, generator) -> tuple[GeneratorSpec | None, np.ndarray]:
    """Integer lift of the generator, and the validated generator when it is valid mod q."""
    if generator is None:
        if params.K == 1:
            rows = np.ones((1, params.N), dtype=np.int64)
        else:
            g = make_generator(params.N, params.K, params.q)
            return g, g.coefficients
    elif isinstance(generator, GeneratorSpec):
        if generator.q != params.q or generator.coefficients.shape != (params.K, params.N):
            raise ParameterError("generator does not match the scheme parameters")
        return generator, generator.coefficients
    elif isinstance(generator, str):
        from .mds import PRESETS
        if generator not in PRESETS:
            raise ParameterError(f"unknown generator preset {generator!r}")
        rows = np.array(PRESETS[generator], dtype=np.int64)
    else:
        rows = np.array(generator, dtype=np.int64)
    if rows.shape != (params.K, params.N):
        raise ParameterError(f"generator must be {params.K}x{params.N}, got {rows.shape}")
    try:
        return make_generator(params.N, params.K, params.q, rows.tolist()), rows
    except ValidationError:
        return None, rows


def build_explicit_oneshot(params: PirParams, noise_code, mixed_positions: Sequence[int],
                           generator=None) -> OneShotScheme:
    """Scheme from a hand-written noise code. ``generator`` may be a
    :class:`GeneratorSpec`, integer rows, a preset name, or ``None``
    (replication for ``K = 1``)."""
    noise_int = np.array(noise_code, dtype=np.int64)
    if noise_int.ndim != 2 or noise_int.shape[0] != params.N or noise_int.shape[1] < 1:
        raise ParameterError(f"noise code must be N x f with N={params.N}, got shape {noise_int.shape}")
    mixed = tuple(sorted(set(int(p) for p in mixed_positions)))
    if not mixed or not all(1 <= p <= params.N for p in mixed) or len(mixed) == params.N:
        raise ParameterError(f"mixed positions {tuple(mixed_positions)} invalid for N={params.N}")
    noise_positions = tuple(j for j in range(1, params.N + 1) if j not in mixed)
    g, g_int = _generator_input(params, generator)
    _guarded(noise_int, g_int, params, noise_positions, mixed)
    if g is None:       # valid mod q after all checks, so this cannot happen
        raise ValidationError("generator is not MDS")
    return _assemble(params, noise_int, noise_positions, g, "explicit")


def systematic_noise_code(N: int, T: int, q: int) -> np.ndarray:
    """Systematic (N, T) extended Reed-Solomon code, one row per server.

    Evaluation points are taken in the order 0, infinity, 1, 2, ... so that
    ``T = 2`` gives rows (1,0), (0,1), (1,1), (1,2), ...
    """
    if T == 1:
        return np.ones((N, 1), dtype=np.int64)
    if N > q + 1:
        raise InfeasibleParametersError(f"no ({N},{T}) MDS noise code over F_{q}: need N <= q+1")
    points: list[int | None] = [0, None] + list(range(1, q))
    rows = []
    for x in points[:N]:
        rows.append([0] * (T - 1) + [1] if x is None else [pow(x, k, q) for k in range(T)])
    v = np.array(rows, dtype=np.int64)
    return v @ inv_mod(v[:T], q) % q


def build_secret_sharing_oneshot(N: int, T: int, M: int, q: int) -> OneShotScheme:
    params = PirParams(N=N, K=1, T=T, M=M, q=q)
    if T >= N:
        raise ParameterError(f"secret sharing scheme needs T < N, got T={T}, N={N}")
    g = make_generator(N, 1, q, [[1] * N])
    lam = systematic_noise_code(N, T, q)
    noise_positions = tuple(range(1, T + 1))
    _guarded(lam, g.coefficients, params, noise_positions, tuple(range(T + 1, N + 1)))
    return _assemble(params, lam, noise_positions, g, "secret_sharing")


def geometrical_spec(N: int, K: int, T: int, g: GeneratorSpec) -> GeometricalSpec:
    """Solve for the lambda coefficients and check the ratio condition."""
    q = g.q
    middle = list(range(T + 1, K + T))
    l0 = K + T
    lam = {}
    for l in range(l0, N + 1):
        cols = [c - 1 for c in middle + [l]]
        sub = g.coefficients[:, cols]
        for i in range(1, T + 1):
            x = solve_mod(sub, g.coefficients[:, i - 1], q)
            if x is None:
                raise ValidationError(f"server {i} not in the span of servers {middle + [l]}")
            lam[(i, l)] = tuple(int(v) for v in x)
    gamma = {}
    for i in range(1, T + 1):
        gamma[(i, l0)] = 1
        for l in range(l0 + 1, N + 1):
            ratio = None
            for pos, j in enumerate(middle):
                num, den = lam[(i, l0)][pos], lam[(i, l)][pos]
                if den == 0:
                    if num != 0:
                        raise ConstructionUnsupportedError(
                            f"ratio condition fails at (i, j, l) = ({i}, {j}, {l}): lambda^i_j(l) = 0")
                    continue
                value = num * pow(den, -1, q) % q
                if ratio is None:
                    ratio = value
                elif value != ratio:
                    raise ConstructionUnsupportedError(
                        f"ratio condition fails at (i, j, l) = ({i}, {j}, {l}): "
                        f"{value} != {ratio} found for an earlier j")
            gamma[(i, l)] = ratio   # None: unconstrained (no middle servers)
    return GeometricalSpec(N, K, T, q, lam, gamma)


def geometrical_noise_code(gs: GeometricalSpec) -> np.ndarray:
    N, K, T, q = gs.N, gs.K, gs.T, gs.q
    l0 = gs.l0
    lam = np.zeros((N, T), dtype=np.int64)
    lam[:T] = np.eye(T, dtype=np.int64)
    for i in range(1, T + 1):
        for pos, j in enumerate(gs.middle):
            lam[j - 1, i - 1] = gs.lam[(i, l0)][pos]
        lam[l0 - 1, i - 1] = gs.lam[(i, l0)][-1]
    free = [l for l in range(l0 + 1, N + 1) if any(gs.gamma[(i, l)] is None for i in range(1, T + 1))]
    if free:
        # No middle servers: the ratios are unconstrained. Take a systematic MDS
        # noise code and rescale its columns so the l0 row is the forced one.
        base = systematic_noise_code(N, T, q)
        scale = np.array([lam[l0 - 1, i] * pow(int(base[l0 - 1, i]), -1, q) for i in range(T)], dtype=np.int64)
        for l in free:
            lam[l - 1] = base[l - 1] * scale % q
    for l in range(l0 + 1, N + 1):
        if l in free:
            continue
        for i in range(1, T + 1):
            lam[l - 1, i - 1] = gs.gamma[(i, l)] * gs.lam[(i, l)][-1] % q
    return lam % q


def _generator_failure(g_int: np.ndarray, q: int):
    rows = np.asarray(g_int, dtype=object)
    k = rows.shape[0]
    if all(rank_rational(rows[:, list(c)].tolist()) == k for c in combinations(range(rows.shape[1]), k)):
        raise InfeasibleParametersError(f"generator is MDS over Q but not over F_{q}")
    raise ValidationError("generator is not MDS")


def build_geometrical_oneshot(N: int, K: int, T: int, q: int, G=None, M: int = 2) -> OneShotScheme:
    if K + T - 1 >= N:
        raise ParameterError(f"geometrical scheme needs K+T-1 < N, got K={K}, T={T}, N={N}")
    params = PirParams(N=N, K=K, T=T, M=M, q=q)
    g, g_int = _generator_input(params, G)
    if g is None:
        _generator_failure(g_int, q)
    gs = geometrical_spec(N, K, T, g)
    lam = geometrical_noise_code(gs)
    r = K + T - 1
    noise_positions = tuple(range(1, r + 1))
    mixed = tuple(range(r + 1, N + 1))
    problems = _problems(lam, g.coefficients, T, noise_positions, mixed, q)
    if problems:
        raise ConstructionUnsupportedError("geometrical noise code invalid: " + "; ".join(problems))
    return _assemble(params, lam, noise_positions, g, "geometrical")


def geometrical_equation(gs: GeometricalSpec, l: int) -> tuple[int, ...]:
    """Closed-form coefficients over servers 1..K+T-1: gamma_i^l on the first T,
    -1 on the middle ones."""
    return tuple(gs.gamma[(i, l)] for i in range(1, gs.T + 1)) + tuple(gs.q - 1 for _ in gs.middle)


# -- rotation and rate --------------------------------------------------------

def rotated_positions(noise_positions: Sequence[int], N: int, offset: int) -> tuple[int, ...]:
    return tuple(sorted((p - 1 - offset) % N + 1 for p in noise_positions))


def rotate_oneshot(s: OneShotScheme, offset: int) -> OneShotScheme:
    """Shift the noise/mixed roles ``offset`` servers to the left; the noise
    code stays attached to the servers."""
    if not 0 <= offset < s.N:
        raise ParameterError(f"offset {offset} outside 0..{s.N - 1}")
    if offset == 0:
        return s
    noise = rotated_positions(s.noise_positions, s.N, offset)
    try:
        rotated = _assemble(s.params, s.noise_code, noise, s.generator, s.kind, (s.offset + offset) % s.N)
    except NotDecodableError as exc:
        raise NotRotatableError(f"offset {offset}: {exc}") from exc
    return rotated


def oneshot_rate(s: OneShotScheme) -> Fraction:
    return Fraction(s.N - s.r, s.N)


@dataclass
class OneShotCheck:
    ok: bool
    failures: list[str] = field(default_factory=list)


def verify_oneshot(s: OneShotScheme, trials: int = 100, rng: np.random.Generator | None = None,
                   blk: int = 2) -> OneShotCheck:
    """Check the T-rank condition on the noise code and every decoding equation
    on ``trials`` random (database, free noise) pairs."""
    rng = rng if rng is not None else np.random.default_rng(0)
    q, N, T, K = s.q, s.N, s.params.T, s.params.K
    failures = []
    bad = _rank_failures(s.noise_code, T, lambda rows: rank_mod(np.array(rows), q))
    if bad is not None:
        failures.append(f"noise rows {bad} have rank < T={T}")
    if set(s.decoding_equations) != set(s.mixed_positions):
        failures.append("decoding equations do not cover the mixed positions")
    M = max(s.params.M, 1)
    for trial in range(trials):
        chunks = rng.integers(0, q, size=(M, blk, K))
        stored = np.einsum("msk,kn->nms", chunks, s.generator.coefficients) % q
        free = rng.integers(0, q, size=(s.f, M, blk))
        noise = np.einsum("nt,tmk->nmk", s.noise_code, free) % q
        resp = np.einsum("nmk,nmk->n", stored, noise) % q
        for p, alpha in s.decoding_equations.items():
            rhs = sum(a * int(resp[n - 1]) for a, n in zip(alpha, s.noise_positions)) % q
            if rhs != resp[p - 1]:
                failures.append(f"decoding equation for server {p} fails on trial {trial}")
                break
        if len(failures) > 5:
            break
    return OneShotCheck(not failures, failures)


# -- running rounds -----------------------------------------------------------

def default_q(N: int, start: int | None = None) -> int:
    return next_prime(max(N, 3) if start is None else start)


def suggest_q(build, N: int, coefficient_bound: int = 0, limit: int = 1 << 12) -> int:
    """Smallest prime ``q >= max(N, 3)`` above ``coefficient_bound`` for which
    ``build(q)`` succeeds."""
    q = next_prime(max(N, 3, coefficient_bound + 1))
    while q < limit:
        try:
            build(q)
            return q
        except (InfeasibleParametersError, ValidationError):
            q = next_prime(q + 1)
    raise InfeasibleParametersError(f"no prime below {limit} supports the construction")


def rational_coefficient_bound(noise_code, g_rows, N: int, noise_positions: Sequence[int]) -> int:
    """Largest numerator/denominator magnitude among the decoding coefficients
    of every rotation, computed over Q."""
    bound = 0
    for t in range(N):
        noise = rotated_positions(noise_positions, N, t)
        for p in range(1, N + 1):
            if p in noise:
                continue
            x = derive_rational_equations(noise_code, g_rows, p, noise)
            if x is None:
                continue
            for v in x:
                bound = max(bound, abs(v.numerator), abs(v.denominator))
    return bound


def rounds_needed(s: OneShotScheme, L: int) -> int:
    """Rounds so that every round is full and the retrieved symbols span W."""
    per_round = s.N - s.r
    return lcm(per_round, L) // per_round


def oneshot_layout(s: OneShotScheme, M: int, L: int, desired: int, rounds: int | None = None) -> QueryLayout:
    K = s.params.K
    if L % K:
        raise InfeasibleParametersError(f"K={K} must divide L={L}")
    if not 1 <= desired <= M:
        raise ParameterError(f"desired index {desired} outside 1..{M}")
    blk = L // K
    rounds = rounds_needed(s, L) if rounds is None else rounds
    slots, instances = [], []
    n_inf = 0
    for t in range(rounds):
        rot = rotate_oneshot(s, t % s.N)
        instances.append(NoiseInstance(tuple(range(M)), rot.noise_positions, dict(rot.decoding_equations)))
        for j in range(1, s.N + 1):
            mixed = j in rot.mixed_positions
            slots.append(Slot(j, tuple(range(M)), t, n_inf if mixed else None, ("round", t + 1)))
            n_inf += mixed
    return QueryLayout(s.N, M, L, blk, s.q, desired, s.noise_code, s.generator.coefficients,
                       tuple(slots), tuple(instances), n_inf, condition_noise=False)


@dataclass(frozen=True)
class OneShotRun:
    message: np.ndarray
    rounds: int
    functionals: np.ndarray     # one row per retrieved symbol, over the L message symbols
    values: np.ndarray


def run_oneshot_rounds(s: OneShotScheme, db: Database, desired: int, rng: np.random.Generator,
                       informative: str = "random") -> OneShotRun:
    """Retrieve ``W^desired`` with as many rotated rounds as the message needs.

    ``informative="basis"`` uses standard basis vectors (cycling through the
    block) as in the worked examples; ``"random"`` samples them.
    """
    if db.generator != s.generator:
        raise ParameterError("database and scheme use different generators")
    layout = oneshot_layout(s, db.M, db.L, desired)
    fixed = None
    if informative == "basis":
        fixed = np.zeros((layout.n_informative, layout.blk), dtype=np.int64)
        fixed[np.arange(layout.n_informative), np.arange(layout.n_informative) % layout.blk] = 1
    elif informative != "random":
        raise ParameterError(f"unknown informative mode {informative!r}")
    free, info = sample_randomness(layout, rng, 1, fixed_informative=fixed)
    queries = assemble(layout, free, info)
    responses = answer(layout, queries, np.asarray(db.stored))[0]
    message = decode_message(layout, info[0], responses)
    return OneShotRun(message, len(layout.instances), functional_matrix(layout, info[0]),
                      informative_values(layout, responses))

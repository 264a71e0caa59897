"""Correctness and T-privacy audits.

Exact privacy enumerates every admissible draw of the sampler's raw
randomness (free noise vectors and informative vectors), which are equally
likely, and compares the resulting view distributions across desired indices.
The statistical check replaces enumeration by sampling and two families of
chi-square tests.
"""

from __future__ import annotations

import dataclasses
import io
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.stats import chi2_contingency, chisquare

from .config import SchemeConfig
from .errors import ParameterError
from .mds import encode, random_messages
from .protocol import (QueryLayout, answer, assemble, decode_message, sample_randomness, substream,
                       view_distribution)

CHUNK = 10_000
MIN_EXPECTED = 5.0


# -- correctness ----------------------------------------------------------------

@dataclass
class CorrectnessReport:
    label: str
    trials: int
    seed: int
    ok: bool
    counterexample: dict | None = None


def correctness_suite(config: SchemeConfig, trials: int = 100, seed: int = 0,
                      corrupt: bool = False) -> CorrectnessReport:
    """Run ``trials`` full protocol rounds, cycling the desired index, and
    compare against the stored message. ``corrupt`` flips one informative
    response per trial (negative control)."""
    scheme = config.build_scheme()
    plan = config.build_plan(scheme) if config.transform == "lifted" else None
    layouts = {m: config.layout(m, scheme, plan) for m in range(1, config.M + 1)}
    L = config.message_length(scheme)
    for t in range(trials):
        m = t % config.M + 1
        layout = layouts[m]
        msgs = random_messages(config.M, L, scheme.q, substream(seed, "messages", t))
        db = encode(msgs, scheme.generator)
        free, info = sample_randomness(layout, substream(seed, "queries", t), 1)
        responses = answer(layout, assemble(layout, free, info), np.asarray(db.stored))[0]
        if corrupt:
            slot = next(i for i, s in enumerate(layout.slots) if s.informative is not None)
            responses[slot] = (responses[slot] + 1) % scheme.q
        try:
            got = decode_message(layout, info[0], responses)
        except Exception as exc:   # any decoding failure is a counterexample
            got = f"{type(exc).__name__}: {exc}"
        if not isinstance(got, np.ndarray) or not np.array_equal(got, msgs[m - 1]):
            cx = {"trial": t, "seed": seed, "desired": m, "expected": msgs[m - 1].tolist(),
                  "got": got.tolist() if isinstance(got, np.ndarray) else got, "config": config.label()}
            return CorrectnessReport(config.label(), t + 1, seed, False, cx)
    return CorrectnessReport(config.label(), trials, seed, True)


# -- exact privacy ----------------------------------------------------------------

@dataclass
class DistributionTable:
    counts: Counter
    total: int
    shape: tuple[int, int]        # (slots in the view, vector length)
    dtype: str

    def __post_init__(self):
        if sum(self.counts.values()) != self.total:
            raise ValueError("counts do not sum to the total")

    def probability(self, key: bytes) -> Fraction:
        return Fraction(self.counts.get(key, 0), self.total)

    def decode_key(self, key: bytes) -> list[list[int]]:
        return np.frombuffer(key, dtype=self.dtype).reshape(self.shape).tolist()

    def first_difference(self, other: "DistributionTable") -> bytes | None:
        for key in sorted(set(self.counts) | set(other.counts)):
            if self.counts.get(key, 0) * other.total != other.counts.get(key, 0) * self.total:
                return key
        return None


def _layout_for(config_or_layouts, m: int) -> QueryLayout:
    if isinstance(config_or_layouts, SchemeConfig):
        return config_or_layouts.layout(m)
    return config_or_layouts[m]


def enumerate_query_distribution(config, servers: Sequence[int], m: int) -> DistributionTable:
    """Exact distribution of what ``servers`` receive when ``m`` is desired.
    ``config`` is a :class:`SchemeConfig` or a mapping ``m -> QueryLayout``."""
    layout = _layout_for(config, m)
    counts, total = view_distribution(layout, servers)
    n_slots = len(layout.slots_at(servers))
    return DistributionTable(counts, total, (n_slots, layout.dim), "uint8" if layout.q < 256 else "uint16")


@dataclass
class PrivacyReport:
    label: str
    ok: bool
    mode: str
    subsets: list = field(default_factory=list)     # (servers, ok, detail)
    witness: dict | None = None
    inconclusive: bool = False


def privacy_exact_check(config, m_pair: tuple[int, int] = (1, 2), T: int | None = None,
                        label: str = "") -> PrivacyReport:
    if isinstance(config, SchemeConfig):
        T = config.T
        label = label or config.label()
        layouts = {m: config.layout(m) for m in m_pair}
    else:
        layouts = config
        if T is None:
            raise ParameterError("T required when passing layouts")
    N = layouts[m_pair[0]].N
    report = PrivacyReport(label, True, "exact")
    for J in combinations(range(1, N + 1), T):
        a = enumerate_query_distribution(layouts, J, m_pair[0])
        b = enumerate_query_distribution(layouts, J, m_pair[1])
        key = a.first_difference(b)
        same = key is None
        report.subsets.append((J, same, f"{len(a.counts)} views, {a.total} / {b.total} states"))
        if not same and report.witness is None:
            report.ok = False
            report.witness = {"servers": J, "view": a.decode_key(key),
                              f"P(m={m_pair[0]})": str(a.probability(key)),
                              f"P(m={m_pair[1]})": str(b.probability(key))}
    return report


def zero_noise(config: SchemeConfig):
    """Layouts for both desired indices with the noise code replaced by zeros
    (negative control: queries become deterministic in the index)."""
    scheme = config.build_scheme()
    plan = config.build_plan(scheme) if config.transform == "lifted" else None
    out = {}
    for m in range(1, config.M + 1):
        layout = config.layout(m, scheme, plan)
        out[m] = dataclasses.replace(layout, noise_code=np.zeros_like(layout.noise_code))
    return out


# -- statistical privacy ----------------------------------------------------------

_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def fingerprint(rows: np.ndarray, bins: int) -> np.ndarray:
    """Public mixing function (splitmix64 finaliser folded over the columns)."""
    h = np.zeros(rows.shape[0], dtype=np.uint64)
    with np.errstate(over="ignore"):
        for col in rows.T.astype(np.uint64):
            h = h ^ (col + _GOLDEN + (h << np.uint64(6)) + (h >> np.uint64(2)))
            h = (h ^ (h >> np.uint64(30))) * _MIX1
            h = (h ^ (h >> np.uint64(27))) * _MIX2
            h = h ^ (h >> np.uint64(31))
    return (h % np.uint64(bins)).astype(np.int64)


def _projection_index(views: np.ndarray, layout: QueryLayout, slots: list[int], width: int) -> np.ndarray:
    """Per (trial, slot, support block): the first ``width`` coordinates of the
    block, packed into one integer in ``[0, q^width)``. Returns (B, cells)."""
    q, blk = layout.q, layout.blk
    cols = []
    weights = q ** np.arange(width, dtype=np.int64)
    for k, s in enumerate(slots):
        for j in layout.slots[s].support:
            cols.append(views[:, k, j * blk: j * blk + width] @ weights)
    return np.stack(cols, axis=1) if cols else np.zeros((views.shape[0], 0), dtype=np.int64)


@dataclass
class StatTest:
    name: str
    statistic: float
    p_value: float
    cells: int


def privacy_statistical_check(config: SchemeConfig, trials: int = 100_000, significance: float = 0.01,
                              width: int = 2, bins: int = 64, seed: int = 0,
                              noise_support: Sequence[int] | None = None, m_pair: tuple[int, int] = (1, 2),
                              label: str = "") -> PrivacyReport:
    """Sampled surrogate for the privacy definition.

    (a) each transmitted slot's projection onto the first ``width``
    coordinates of every block it touches must look uniform; (b) for every
    T-subset the fingerprinted projected view must have the same distribution
    under both desired indices. All p-values are Bonferroni corrected.
    """
    if trials < 1:
        raise ParameterError("need at least one trial")
    scheme = config.build_scheme()
    plan = config.build_plan(scheme) if config.transform == "lifted" else None
    layouts = {m: config.layout(m, scheme, plan) for m in m_pair}
    q, N, T = scheme.q, scheme.N, config.T
    report = PrivacyReport(label or config.label(), True, "statistical")
    width = min(width, layouts[m_pair[0]].blk)
    if width <= 0:
        report.inconclusive = True
        report.subsets.append(("all", True, "projection width 0: nothing to test"))
        return report
    subsets = list(combinations(range(1, N + 1), T))

    while True:
        cells = q ** width
        n_slots = len(layouts[m_pair[0]].slots)
        marg = {m: None for m in m_pair}
        fps = {m: np.zeros((len(subsets), bins), dtype=np.int64) for m in m_pair}
        for m in m_pair:
            layout = layouts[m]
            rng = substream(seed, "statistical", m)
            done = 0
            while done < trials:
                b = min(CHUNK, trials - done)
                free, info = sample_randomness(layout, rng, b, noise_support=noise_support)
                views = assemble(layout, free, info)
                idx = _projection_index(views, layout, list(range(n_slots)), width)
                if marg[m] is None:
                    marg[m] = np.zeros((idx.shape[1], cells), dtype=np.int64)
                for c in range(idx.shape[1]):
                    marg[m][c] += np.bincount(idx[:, c], minlength=cells)
                for si, J in enumerate(subsets):
                    sl = layout.slots_at(J)
                    fp = fingerprint(_projection_index(views[:, sl], layout, sl, width), bins)
                    fps[m][si] += np.bincount(fp, minlength=bins)
                done += b
        expected_cell = trials / cells
        if expected_cell >= MIN_EXPECTED and trials / bins >= MIN_EXPECTED:
            break
        if width > 1:
            width -= 1
            continue
        if bins > 2:
            bins //= 2
            continue
        report.inconclusive = True
        report.subsets.append(("all", True, f"under-sampled: {trials} trials for {cells} cells"))
        return report

    tests: list[StatTest] = []
    for m in m_pair:
        for c, counts in enumerate(marg[m]):
            stat, p = chisquare(counts)
            tests.append(StatTest(f"uniform m={m} cell-group {c}", float(stat), float(p), cells))
    for si, J in enumerate(subsets):
        table = np.vstack([fps[m][si] for m in m_pair])
        table = table[:, table.sum(axis=0) > 0]
        if table.shape[1] < 2:
            tests.append(StatTest(f"two-sample {J}", 0.0, 1.0, table.shape[1]))
            continue
        stat, p, _, _ = chi2_contingency(table)
        tests.append(StatTest(f"two-sample {J}", float(stat), float(p), table.shape[1]))
    threshold = significance / len(tests)
    worst = min(tests, key=lambda t: t.p_value)
    report.ok = all(t.p_value >= threshold for t in tests)
    for J_index, J in enumerate(subsets):
        t = next(x for x in tests if x.name == f"two-sample {J}")
        report.subsets.append((J, t.p_value >= threshold, f"p={t.p_value:.4g}"))
    report.subsets.append(("marginals", all(t.p_value >= threshold for t in tests if t.name.startswith("uniform")),
                           f"{sum(t.name.startswith('uniform') for t in tests)} tests, width {width}"))
    report.witness = {"tests": len(tests), "threshold": threshold, "worst": worst.name,
                      "worst_p": worst.p_value, "width": width, "bins": bins}
    return report


# -- reporting -------------------------------------------------------------------

def format_report(report) -> str:
    out = io.StringIO()
    if isinstance(report, CorrectnessReport):
        status = "PASS" if report.ok else "FAIL"
        out.write(f"correctness,{status},{report.label},trials={report.trials},seed={report.seed}\n")
        if report.counterexample:
            for k, v in report.counterexample.items():
                out.write(f"  {k}: {v}\n")
    elif isinstance(report, PrivacyReport):
        status = "INCONCLUSIVE" if report.inconclusive else ("PASS" if report.ok else "FAIL")
        out.write(f"privacy-{report.mode},{status},{report.label}\n")
        for servers, ok, detail in report.subsets:
            out.write(f"  {servers},{'ok' if ok else 'differs'},{detail}\n")
        if report.witness:
            for k, v in report.witness.items():
                out.write(f"  {k}: {v}\n")
    else:
        raise TypeError(f"cannot format {type(report).__name__}")
    return out.getvalue()

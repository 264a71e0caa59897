"""Acceptance criteria 1-10, each at its stated tolerance and time budget.

Every test records one PASS/FAIL line; the lines are printed in the pytest
terminal summary (see ``conftest.py``).
"""

import functools
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from oneshot_pir.audit import correctness_suite, privacy_exact_check, privacy_statistical_check, zero_noise
from oneshot_pir.config import EXAMPLE_NOISE_4_2_2, PRESETS
from oneshot_pir.errors import InfeasibleParametersError
from oneshot_pir.lifted import lifted_plan, measured_rate, refine
from oneshot_pir.mds import PirParams
from oneshot_pir.oneshot import (build_explicit_oneshot, build_geometrical_oneshot, build_secret_sharing_oneshot,
                                 oneshot_rate, rotate_oneshot, verify_oneshot)
from oneshot_pir.rates import capacity, freij_rate, lifted_rate, taje18_rate
from oneshot_pir.symbolic import build_symbolic, count_value, slot_counts

GOLDEN = Path(__file__).parent / "golden"
RESULTS: dict[int, str] = {}


def criterion(number: int, budget_s: float):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            start = time.perf_counter()
            try:
                detail = fn(*args, **kwargs) or ""
                elapsed = time.perf_counter() - start
                assert elapsed < budget_s, f"took {elapsed:.2f}s, budget {budget_s}s"
            except BaseException as exc:
                RESULTS[number] = f"FAIL ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
                print(f"criterion {number}: {RESULTS[number]}")
                raise
            RESULTS[number] = f"PASS ({elapsed:.2f}s{', ' + detail if detail else ''})"
            print(f"criterion {number}: {RESULTS[number]}")
        return run
    return wrap


@criterion(1, 1.0)
def test_c01_golden_symbolic_matrices():
    for name, (N, r, M) in {"S3_N4_r3": (4, 3, 3), "S4_N4_r3": (4, 3, 4),
                            "S3_N4_r2": (4, 2, 3), "S4_N4_r2": (4, 2, 4)}.items():
        assert build_symbolic(N, r, M).to_text().encode() == (GOLDEN / f"{name}.txt").read_bytes(), name
    return "4 golden files byte-exact"


@criterion(2, 10.0)
def test_c02_value_counts():
    checked = 0
    for N in range(2, 7):
        for r in range(1, N):
            for M in range(2, 7):
                s = build_symbolic(N, r, M)
                for k in range(1, M + 1):
                    counted = int((s.entries == k).sum())
                    assert counted == r ** (M - k) * (N - r) ** (k - 1), (N, r, M, k)
                    assert count_value(s, k) == counted
                    checked += 1
    return f"{checked} (N, r, M, k) cases"


@criterion(3, 10.0)
def test_c03_query_counts():
    for N in range(2, 7):
        for r in range(1, N):
            for M in range(2, 7):
                total, informative = slot_counts(build_symbolic(N, r, M), M)
                assert total * (N - r) == N ** M - r ** M, (N, r, M)
                assert informative == N ** (M - 1), (N, r, M)
    assert slot_counts(build_symbolic(4, 3, 3), 3) == (37, 16)
    return "total 37 / informative 16 at (4,3,3)"


FIG_SERIES = {2: 0.58, 3: 0.45, 4: 0.39, 5: 0.36, 6: 0.34, 7: 0.3269, 8: 0.3183, 9: 0.3126, 10: 0.3087}


@criterion(4, 1.0)
def test_c04_rates():
    plans = [lifted_plan(build_secret_sharing_oneshot(2, 1, 2, 3), 2),
             lifted_plan(build_secret_sharing_oneshot(2, 1, 4, 3), 4),
             lifted_plan(build_secret_sharing_oneshot(4, 2, 3, 5), 3),
             lifted_plan(build_secret_sharing_oneshot(4, 1, 3, 5), 3),
             lifted_plan(build_secret_sharing_oneshot(5, 3, 3, 7), 3),
             lifted_plan(build_geometrical_oneshot(4, 2, 2, 5, "example-4-2"), 3),
             lifted_plan(build_geometrical_oneshot(4, 2, 2, 5, "example-4-2"), 4),
             lifted_plan(build_geometrical_oneshot(6, 2, 2, 7), 3),
             lifted_plan(build_geometrical_oneshot(6, 2, 3, 7), 2)]
    for p in plans:
        rate = measured_rate(p)
        assert rate == lifted_rate(p.N, p.r, p.M)
        K, T = p.scheme.params.K, p.scheme.params.T
        if K == 1 and p.r == T:
            assert rate == capacity(p.N, T, p.M)
    for M, plotted in FIG_SERIES.items():
        assert abs(float(lifted_rate(10, 7, M)) - plotted) <= 0.01, M
    assert lifted_rate(10, 7, 2) == Fraction(10, 17)
    assert lifted_rate(10, 7, 9) == Fraction(3 * 10 ** 8, 10 ** 9 - 7 ** 9)
    return f"{len(plans)} plans, series N=10 r=7 M=2..10"


@criterion(5, 1.0)
def test_c05_worked_example_rates():
    otp = build_secret_sharing_oneshot(2, 1, 2, 2)
    assert oneshot_rate(otp) == Fraction(1, 2)
    assert measured_rate(refine(build_secret_sharing_oneshot(2, 1, 2, 3))) == Fraction(2, 3)
    assert measured_rate(refine(build_secret_sharing_oneshot(4, 2, 2, 3))) == Fraction(2, 3)
    explicit = build_explicit_oneshot(PirParams(4, 2, 2, 2, 3), EXAMPLE_NOISE_4_2_2, (4,), "example-4-2")
    assert oneshot_rate(explicit) == Fraction(1, 4)
    assert measured_rate(refine(explicit)) == Fraction(4, 7)
    geo = build_geometrical_oneshot(4, 2, 2, 5, "example-4-2")
    assert measured_rate(lifted_plan(geo, 3)) == Fraction(16, 37)
    return "1/2, 2/3, 2/3, 1/4, 4/7, 16/37"


CORRECTNESS = ["refined-otp-q3", "ss-4-1-2-m2", "ss-4-1-2-m3", "geo-4-2-2-m2", "geo-4-2-2-m3", "explicit-4-2-2-m3"]


@criterion(6, 60.0)
def test_c06_end_to_end_correctness():
    for name in CORRECTNESS:
        report = correctness_suite(PRESETS[name], trials=100, seed=2024)
        assert report.ok, (name, report.counterexample)
    return f"{len(CORRECTNESS)} configs x 100 trials"


@criterion(7, 60.0)
def test_c07_exact_privacy():
    for name in ["one-time-pad", "refined-otp-q3"]:
        cfg = PRESETS[name]
        assert privacy_exact_check(cfg).ok, name
        control = privacy_exact_check(zero_noise(cfg), T=cfg.T)
        assert not control.ok, f"zero-noise control passed for {name}"
    return "2 configs pass, zeroed-noise controls fail"


@criterion(8, 300.0)
def test_c08_statistical_privacy():
    lines = []
    for name in ["ss-4-1-2-m3", "geo-4-2-2-m3"]:
        cfg = PRESETS[name]
        report = privacy_statistical_check(cfg, trials=100_000, significance=0.01, seed=0)
        assert report.ok and not report.inconclusive, name
        control = privacy_statistical_check(cfg, trials=100_000, significance=0.01, seed=0, noise_support=[0, 1])
        assert not control.ok, f"biased control passed for {name}"
        lines.append(name)
    return "10^5 trials on " + " and ".join(lines) + ", biased controls fail"


ONESHOT_BUILDS = [
    lambda: build_secret_sharing_oneshot(2, 1, 2, 2),
    lambda: build_secret_sharing_oneshot(2, 1, 2, 3),
    lambda: build_secret_sharing_oneshot(4, 2, 3, 5),
    lambda: build_secret_sharing_oneshot(4, 2, 2, 3),
    lambda: build_secret_sharing_oneshot(6, 3, 2, 7),
    lambda: build_explicit_oneshot(PirParams(4, 2, 2, 2, 3), EXAMPLE_NOISE_4_2_2, (4,), "example-4-2"),
    lambda: build_explicit_oneshot(PirParams(4, 2, 2, 3, 5), EXAMPLE_NOISE_4_2_2, (4,), "example-4-2"),
    lambda: build_geometrical_oneshot(4, 2, 2, 3, "example-4-2"),
    lambda: build_geometrical_oneshot(4, 2, 2, 5, "example-4-2"),
    lambda: build_geometrical_oneshot(5, 2, 2, 7),
    lambda: build_geometrical_oneshot(5, 3, 2, 7),
    lambda: build_geometrical_oneshot(6, 2, 3, 7),
    lambda: build_geometrical_oneshot(7, 2, 2, 11),
]


@criterion(9, 10.0)
def test_c09_oneshot_validity():
    rng = np.random.default_rng(9)
    n = 0
    for build in ONESHOT_BUILDS:
        s = build()
        for t in range(s.N):
            check = verify_oneshot(rotate_oneshot(s, t), trials=100, rng=rng)
            assert check.ok, (s.describe(), t, check.failures)
            n += 1
    with pytest.raises(InfeasibleParametersError):
        build_explicit_oneshot(PirParams(4, 2, 2, 2, 2), EXAMPLE_NOISE_4_2_2, (4,), "example-4-2")
    return f"{n} (scheme, rotation) pairs, F_2 explicit rejected"


@criterion(10, 5.0)
def test_c10_rate_ordering():
    n = 0
    for N in range(2, 9):
        for K in range(1, N):
            for T in range(1, N - K + 1):
                for M in range(2, 7):
                    a, b = taje18_rate(N, K, T, M), freij_rate(N, K, T, M)
                    assert a <= b, (N, K, T, M)
                    assert (a == b) == (K == 1 or N == K + T), (N, K, T, M)
                    n += 1
    return f"{n} parameter sets"

"""Closed-form rates as exact rationals, and their decimal rendering."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ParameterError

FORMULAS = ("capacity", "oneshot", "refined", "lifted", "taje18", "freij")


def capacity(N: int, T: int, M: int) -> Fraction:
    """Replicated-storage capacity with ``T`` colluding servers."""
    if not 1 <= T < N:
        raise ParameterError(f"capacity needs 1 <= T < N, got T={T}, N={N}")
    return Fraction((N - T) * N ** (M - 1), N ** M - T ** M)


def _codim(N, r) -> Fraction:
    r = Fraction(r)
    if not 0 < r < N:
        raise ParameterError(f"codimension r={r} must lie in (0, N) for N={N}")
    return r


def oneshot_rate_closed(N: int, r) -> Fraction:
    r = _codim(N, r)
    return (N - r) / N


def refined_rate(N: int, r) -> Fraction:
    r = _codim(N, r)
    return N / (N + r)


def lifted_rate(N: int, r, M: int) -> Fraction:
    """``(N - r) N^(M-1) / (N^M - r^M)``; ``r`` may be rational."""
    r = _codim(N, r)
    if M < 1:
        raise ParameterError(f"need M >= 1, got M={M}")
    return (N - r) * Fraction(N) ** (M - 1) / (Fraction(N) ** M - r ** M)


def taje18_codim(N: int, K: int, T: int) -> Fraction:
    return Fraction(N * K - N + T, K)


def freij_codim(N: int, K: int, T: int) -> Fraction:
    return Fraction(K + T - 1)


def taje18_rate(N: int, K: int, T: int, M: int) -> Fraction:
    """Refined and lifted rate for codimension ``(NK - N + T)/K``, in the
    cleared form ``(N - T)(NK)^(M-1) / ((NK)^M - (NK - N + T)^M)``."""
    nk = N * K
    value = Fraction((N - T) * nk ** (M - 1), nk ** M - (nk - N + T) ** M)
    assert value == lifted_rate(N, taje18_codim(N, K, T), M)
    return value


def freij_rate(N: int, K: int, T: int, M: int) -> Fraction:
    r = K + T - 1
    return Fraction((N - r) * N ** (M - 1), N ** M - r ** M)


def evaluate(formula: str, N: int, K: int, T: int, M: int, r=None) -> tuple[Fraction, Fraction | None]:
    """(value, codimension used) for one named formula."""
    if formula == "capacity":
        return capacity(N, T, M), None
    if formula == "taje18":
        return taje18_rate(N, K, T, M), taje18_codim(N, K, T)
    if formula == "freij":
        return freij_rate(N, K, T, M), freij_codim(N, K, T)
    r = Fraction(K + T - 1 if r is None else r)
    if formula == "oneshot":
        return oneshot_rate_closed(N, r), r
    if formula == "refined":
        return refined_rate(N, r), r
    if formula == "lifted":
        return lifted_rate(N, r, M), r
    raise ParameterError(f"unknown formula {formula!r}; choose from {FORMULAS}")


@dataclass
class RateReport:
    label: str
    N: int
    K: int
    T: int
    M: int
    r: Fraction
    closed_form: Fraction
    measured: Fraction | None = None
    capacity: Fraction | None = None
    formulas: dict = field(default_factory=dict)
    matches: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.matches.values())


def rate_formulas(N: int, K: int, T: int, M: int, r=None, measured: Fraction | None = None,
                  label: str = "refine+lift") -> RateReport:
    """Every closed form for one parameter set plus the exact comparisons
    that should hold between them."""
    if not (1 <= K and 1 <= T and K + T <= N):
        raise ParameterError(f"need K + T <= N, got N={N}, K={K}, T={T}")
    r = Fraction(K + T - 1 if r is None else r)
    closed = lifted_rate(N, r, M)
    cap = capacity(N, T, M) if K == 1 else None
    taje, freij = taje18_rate(N, K, T, M), freij_rate(N, K, T, M)
    report = RateReport(label, N, K, T, M, r, closed, measured, cap,
                        {"lifted": closed, "taje18": taje, "freij": freij,
                         "oneshot": oneshot_rate_closed(N, r), "refined": refined_rate(N, r)})
    if measured is not None:
        report.matches["measured_equals_closed_form"] = measured == closed
    if K == 1 and r == T:
        report.matches["lifted_equals_capacity"] = closed == cap
    report.matches["taje18_le_freij"] = taje <= freij
    report.matches["equality_iff_K1_or_tight"] = (taje == freij) == (K == 1 or N == K + T)
    return report


def decimal6(x: Fraction) -> str:
    """Six decimals, round half to even, computed exactly."""
    x = Fraction(x)
    sign = "-" if x < 0 else ""
    x = abs(x)
    q, rem = divmod(x.numerator * 10 ** 6, x.denominator)
    if 2 * rem > x.denominator or (2 * rem == x.denominator and q % 2 == 1):
        q += 1
    return f"{sign}{q // 10 ** 6}.{q % 10 ** 6:06d}"


def exact(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


CSV_HEADER = ("N", "K", "T", "M", "r", "formula", "value_exact", "value_decimal")


def rate_rows(formulas, Ns, Ks, Ts, Ms, r=None) -> list[tuple]:
    rows = []
    for N in Ns:
        for K in Ks:
            for T in Ts:
                if K + T > N and r is None:
                    continue
                for M in Ms:
                    for f in formulas:
                        try:
                            value, codim = evaluate(f, N, K, T, M, r)
                        except ParameterError:
                            continue
                        rows.append((N, K, T, M, "" if codim is None else str(codim), f, exact(value),
                                     decimal6(value)))
    return rows

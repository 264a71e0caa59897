"""Scheme configurations (JSON) and the named presets used by tests and the CLI."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from math import lcm
from pathlib import Path

from .errors import ParameterError
from .lifted import DecodingPlan, lifted_plan
from .mds import PirParams
from .oneshot import (KINDS, OneShotScheme, build_explicit_oneshot, build_geometrical_oneshot,
                      build_secret_sharing_oneshot, oneshot_layout, suggest_q)
from .protocol import QueryLayout

TRANSFORMS = ("lifted", "oneshot")


@dataclass(frozen=True)
class SchemeConfig:
    kind: str
    N: int
    K: int = 1
    T: int = 1
    M: int = 2
    q: int | None = None
    generator: tuple | str | None = None     # integer rows or a preset name
    noise_code: tuple | None = None          # explicit kind only
    mixed: tuple | None = None               # explicit kind only
    seed: int = 0
    transform: str = "lifted"
    L: int | None = None                     # message length for bare one-shot runs

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown scheme kind {self.kind!r}; choose from {KINDS}")
        if self.transform not in TRANSFORMS:
            raise ParameterError(f"unknown transform {self.transform!r}; choose from {TRANSFORMS}")
        if self.kind == "explicit" and (self.noise_code is None or self.mixed is None):
            raise ParameterError("explicit schemes need noise_code and mixed")
        for name in ("generator", "noise_code", "mixed"):
            value = getattr(self, name)
            if isinstance(value, list):
                object.__setattr__(self, name, _tuplify(value))

    def _build(self, q: int) -> OneShotScheme:
        if self.kind == "secret_sharing":
            if self.K != 1:
                raise ParameterError("the secret sharing scheme needs K = 1")
            return build_secret_sharing_oneshot(self.N, self.T, self.M, q)
        if self.kind == "geometrical":
            return build_geometrical_oneshot(self.N, self.K, self.T, q, self.generator, self.M)
        params = PirParams(N=self.N, K=self.K, T=self.T, M=self.M, q=q)
        return build_explicit_oneshot(params, self.noise_code, self.mixed, self.generator)

    def resolved_q(self) -> int:
        return self.q if self.q is not None else suggest_q(self._build, self.N)

    def build_scheme(self) -> OneShotScheme:
        return self._build(self.resolved_q())

    def build_plan(self, scheme: OneShotScheme | None = None) -> DecodingPlan:
        if self.M < 2:
            raise ParameterError("refined and lifted schemes need M >= 2")
        return lifted_plan(scheme or self.build_scheme(), self.M)

    def message_length(self, scheme: OneShotScheme) -> int:
        if self.transform == "lifted":
            return self.N ** (self.M - 1)
        return self.L if self.L is not None else lcm(self.K, self.N - scheme.r)

    def layout(self, desired: int, scheme: OneShotScheme | None = None,
               plan: DecodingPlan | None = None) -> QueryLayout:
        if self.transform == "lifted":
            return (plan or self.build_plan(scheme)).layout(desired)
        scheme = scheme or self.build_scheme()
        return oneshot_layout(scheme, self.M, self.message_length(scheme), desired)

    def replace(self, **changes) -> "SchemeConfig":
        return dataclasses.replace(self, **changes)

    def label(self) -> str:
        q = "auto" if self.q is None else self.q
        return f"{self.kind}/{self.transform} N={self.N} K={self.K} T={self.T} M={self.M} q={q}"

    def to_dict(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items() if v is not None}


def _tuplify(x):
    return tuple(_tuplify(v) for v in x) if isinstance(x, (list, tuple)) else x


def config_from_dict(d: dict) -> SchemeConfig:
    names = {f.name for f in dataclasses.fields(SchemeConfig)}
    unknown = set(d) - names
    if unknown:
        raise ParameterError(f"unknown config fields {sorted(unknown)}")
    try:
        return SchemeConfig(**d)
    except TypeError as exc:
        raise ParameterError(str(exc)) from exc


def load_config(path: str | Path) -> SchemeConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParameterError(f"{path}: expected a JSON object")
    return config_from_dict(data)


def save_config(cfg: SchemeConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


EXAMPLE_NOISE_4_2_2 = ((1, 0), (0, 1), (1, 1), (1, 2))

PRESETS = {
    "one-time-pad": SchemeConfig("secret_sharing", N=2, T=1, M=2, q=2, transform="oneshot", L=1),
    "refined-otp-q3": SchemeConfig("secret_sharing", N=2, T=1, M=2, q=3),
    "ss-4-1-2-m2": SchemeConfig("secret_sharing", N=4, T=2, M=2, q=3),
    "ss-4-1-2-m3": SchemeConfig("secret_sharing", N=4, T=2, M=3, q=5),
    "geo-4-2-2-m2": SchemeConfig("geometrical", N=4, K=2, T=2, M=2, q=3, generator="example-4-2"),
    "geo-4-2-2-m3": SchemeConfig("geometrical", N=4, K=2, T=2, M=3, q=5, generator="example-4-2"),
    "explicit-4-2-2-m3": SchemeConfig("explicit", N=4, K=2, T=2, M=3, q=5, generator="example-4-2",
                                      noise_code=EXAMPLE_NOISE_4_2_2, mixed=(4,)),
    "explicit-4-2-2-oneshot": SchemeConfig("explicit", N=4, K=2, T=2, M=2, q=3, generator="example-4-2",
                                           noise_code=EXAMPLE_NOISE_4_2_2, mixed=(4,), transform="oneshot",
                                           L=2),
}

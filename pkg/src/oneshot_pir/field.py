"""Prime-field scalars and vectors.

Scalars are small frozen dataclasses; vectors wrap a read-only ``int64``
numpy array so they interoperate with the batched code in ``linalg`` and
``protocol``. Everything is kept canonically reduced into ``[0, q)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ParameterError

MAX_MODULUS = 1 << 16


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def check_modulus(q: int) -> int:
    q = int(q)
    if not 2 <= q < MAX_MODULUS:
        raise ParameterError(f"field size q={q} outside [2, 2^16)")
    if not is_prime(q):
        raise ParameterError(f"field size q={q} is not prime")
    return q


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    n = max(2, n)
    while not is_prime(n):
        n += 1
    return n


@dataclass(frozen=True)
class FieldElement:
    value: int
    q: int

    def __post_init__(self):
        check_modulus(self.q)
        object.__setattr__(self, "value", int(self.value) % self.q)

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.q != self.q:
                raise ParameterError(f"modulus mismatch: {self.q} vs {other.q}")
            return other.value
        return int(other)

    def __add__(self, other):
        return FieldElement(self.value + self._other(other), self.q)

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.value - self._other(other), self.q)

    def __rsub__(self, other):
        return FieldElement(self._other(other) - self.value, self.q)

    def __mul__(self, other):
        return FieldElement(self.value * self._other(other), self.q)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value, self.q)

    def __truediv__(self, other):
        if not isinstance(other, FieldElement):
            other = FieldElement(other, self.q)
        return self * field_inverse(other)

    def inverse(self) -> "FieldElement":
        return field_inverse(self)

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.q})"


def field_arithmetic(op: str, x: FieldElement, y: FieldElement | None = None) -> FieldElement:
    """Apply ``op`` in {add, sub, mul, neg}; ``y`` is ignored for ``neg``."""
    if op == "neg":
        return -x
    if y is None:
        raise ParameterError(f"operation {op!r} needs two operands")
    if x.q != y.q:
        raise ParameterError(f"modulus mismatch: {x.q} vs {y.q}")
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    raise ParameterError(f"unknown field operation {op!r}")


def field_inverse(x: FieldElement) -> FieldElement:
    if x.value == 0:
        raise ZeroDivisionError(f"0 has no inverse in F_{x.q}")
    return FieldElement(pow(x.value, -1, x.q), x.q)


class FieldVector:
    """Immutable vector over F_q."""

    __slots__ = ("_values", "q")

    def __init__(self, values: Iterable[int] | np.ndarray, q: int):
        self.q = check_modulus(q)
        arr = np.array(values, dtype=np.int64).reshape(-1) % self.q
        arr.setflags(write=False)
        self._values = arr

    @classmethod
    def zeros(cls, length: int, q: int) -> "FieldVector":
        return cls(np.zeros(length, dtype=np.int64), q)

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self):
        return len(self._values)

    def __getitem__(self, i) -> FieldElement:
        return FieldElement(int(self._values[i]), self.q)

    def __iter__(self):
        return (FieldElement(int(v), self.q) for v in self._values)

    def _check(self, other: "FieldVector"):
        if other.q != self.q:
            raise ParameterError(f"modulus mismatch: {self.q} vs {other.q}")
        if len(other) != len(self):
            raise ParameterError(f"length mismatch: {len(self)} vs {len(other)}")

    def __add__(self, other: "FieldVector") -> "FieldVector":
        self._check(other)
        return FieldVector(self._values + other._values, self.q)

    def __sub__(self, other: "FieldVector") -> "FieldVector":
        self._check(other)
        return FieldVector(self._values - other._values, self.q)

    def __mul__(self, scalar) -> "FieldVector":
        return FieldVector(self._values * (int(scalar) % self.q), self.q)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, FieldVector):
            return NotImplemented
        return self.q == other.q and np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash((self.q, self._values.tobytes()))

    def tolist(self) -> list[int]:
        return [int(v) for v in self._values]

    def __repr__(self):
        return f"FieldVector({self.tolist()}, q={self.q})"


def inner_product(d: FieldVector, qv: FieldVector) -> FieldElement:
    d._check(qv)
    return FieldElement(int(np.dot(d.values, qv.values) % d.q), d.q)

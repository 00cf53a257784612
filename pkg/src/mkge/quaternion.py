"""Plain quaternion arithmetic, kept independent of the embedding code.

Used as the reference for the four-embedding weight vector. The score is
Re(h * conj(t) * r) summed over dimensions. Quaternion multiplication is
associative, so ``(h * conj(t)) * r`` and ``h * (conj(t) * r)`` agree; the
operand order is what matters. This order was checked term by term against
the published 16-term expansion (see tests/test_quaternion.py).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class Quaternion:
    a: float  # real part
    b: float = 0.0  # i
    c: float = 0.0  # j
    d: float = 0.0  # k

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.a, self.b, self.c, self.d)):
            raise ValueError(f"non-finite quaternion component in {self}")

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        return hamilton_product(self, other)

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.a, -self.b, -self.c, -self.d)

    def norm(self) -> float:
        return math.sqrt(self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)


I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)
ONE = Quaternion(1.0)


def hamilton_product(p: Quaternion, q: Quaternion) -> Quaternion:
    return Quaternion(
        p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
        p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
        p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
        p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a,
    )


def conjugate(q: Quaternion) -> Quaternion:
    return Quaternion(q.a, -q.b, -q.c, -q.d)


def quat_trilinear_score(h: Sequence[Quaternion], t: Sequence[Quaternion],
                         r: Sequence[Quaternion]) -> float:
    if not (len(h) == len(t) == len(r)):
        raise ValueError(f"length mismatch: h={len(h)}, t={len(t)}, r={len(r)}")
    total = 0.0
    for hd, td, rd in zip(h, t, r):
        total += hamilton_product(hamilton_product(hd, conjugate(td)), rd).a
    return total


def from_components(components) -> list[Quaternion]:
    """Build quaternions from a [4, D] array (rows are a, b, c, d)."""
    rows = [list(map(float, row)) for row in components]
    if len(rows) != 4:
        raise ValueError(f"expected 4 component rows, got {len(rows)}")
    return [Quaternion(*q) for q in zip(*rows)]

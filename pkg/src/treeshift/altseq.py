"""Completely alternating sequences with finitely atomic representing measures.

A sequence is stored as ``(a0, tau)`` and generated by

    a_n = a0 + sum over atoms (t, m) of m * (1 + t + ... + t^(n-1)).

Everything is exact over ``fractions.Fraction``.  Negative moments of a
measure with an atom at 0 are ``math.inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

from .verdict import FAILS, INCONCLUSIVE, ClassVerdict, Witness

Q = Fraction
INF = math.inf


def as_q(x) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings; floats are rejected."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite positive measure on [0, 1]; atoms sorted by position."""

    atoms: tuple[tuple[Fraction, Fraction], ...] = ()

    def __post_init__(self):
        prev = None
        for t, m in self.atoms:
            if not isinstance(t, Fraction) or not isinstance(m, Fraction):
                raise TypeError("atom positions and masses must be Fractions")
            if not 0 <= t <= 1:
                raise ValueError(f"atom position {t} outside [0, 1]")
            if m <= 0:
                raise ValueError("atom masses must be positive")
            if prev is not None and t <= prev:
                raise ValueError("atoms must be strictly sorted by position")
            prev = t

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple]) -> "AtomicMeasure":
        """Build from (t, mass) pairs, merging repeats and dropping zero masses."""
        acc: dict[Fraction, Fraction] = {}
        for t, m in pairs:
            t, m = as_q(t), as_q(m)
            if m < 0:
                raise ValueError("negative mass")
            acc[t] = acc.get(t, Fraction(0)) + m
        return cls(tuple((t, m) for t, m in sorted(acc.items()) if m != 0))

    @classmethod
    def delta(cls, t=1, mass=1) -> "AtomicMeasure":
        return cls.from_pairs([(t, mass)])

    @property
    def is_zero(self) -> bool:
        return not self.atoms

    @property
    def total_mass(self) -> Fraction:
        return sum((m for _, m in self.atoms), Fraction(0))

    def mass_at(self, t) -> Fraction:
        t = as_q(t)
        for s, m in self.atoms:
            if s == t:
                return m
        return Fraction(0)

    def scale(self, c) -> "AtomicMeasure":
        c = as_q(c)
        if c < 0:
            raise ValueError("negative scale")
        return AtomicMeasure.from_pairs((t, c * m) for t, m in self.atoms)

    def times_power(self, j: int) -> "AtomicMeasure | None":
        """The measure t^j d(tau); None if j < 0 and there is an atom at 0."""
        if j < 0 and self.mass_at(0):
            return None
        return AtomicMeasure.from_pairs((t, m * t**j) for t, m in self.atoms)

    def integrate(self, f) -> Fraction:
        return sum((m * f(t) for t, m in self.atoms), Fraction(0))

    def __add__(self, other: "AtomicMeasure") -> "AtomicMeasure":
        return AtomicMeasure.from_pairs(self.atoms + other.atoms)

    def to_json(self) -> list[dict[str, str]]:
        return [{"t": _s(t), "mass": _s(m)} for t, m in self.atoms]

    @classmethod
    def from_json(cls, data) -> "AtomicMeasure":
        return cls.from_pairs((as_q(d["t"]), as_q(d["mass"])) for d in data)


def _s(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


ZERO = AtomicMeasure()


def measure_moment(tau: AtomicMeasure, j: int) -> Fraction | float:
    """Integral of t^j; +inf when j < 0 and tau charges 0 (0^0 = 1)."""
    if j < 0 and tau.mass_at(0):
        return INF
    return sum((m * t**j for t, m in tau.atoms), Fraction(0))


def _geom(t: Fraction, n: int) -> Fraction:
    """1 + t + ... + t^(n-1)."""
    if t == 1:
        return Fraction(n)
    return (1 - t**n) / (1 - t)


@dataclass(frozen=True)
class CASeq:
    a0: Fraction
    measure: AtomicMeasure = ZERO

    def __post_init__(self):
        if not isinstance(self.a0, Fraction):
            object.__setattr__(self, "a0", as_q(self.a0))

    def value(self, n: int) -> Fraction:
        return seq_value(self, n)

    def prefix(self, length: int) -> list[Fraction]:
        return [seq_value(self, n) for n in range(length)]

    def to_json(self) -> dict:
        return {"a0": _s(self.a0), "measure": self.measure.to_json()}

    @classmethod
    def from_json(cls, data) -> "CASeq":
        return cls(as_q(data["a0"]), AtomicMeasure.from_json(data.get("measure", [])))


def seq_value(s: CASeq, n: int) -> Fraction:
    if n < 0:
        raise ValueError("n must be nonnegative")
    return s.a0 + sum((m * _geom(t, n) for t, m in s.measure.atoms), Fraction(0))


class DiffTable:
    """Triangular table A[n][m] with A[0][m] = a_m and A[n+1][m] = A[n][m] - A[n][m+1]."""

    def __init__(self, prefix: Sequence, order: int):
        if order < 0:
            raise ValueError("order must be nonnegative")
        if len(prefix) < order + 1:
            raise ValueError(f"need {order + 1} terms for order {order}, got {len(prefix)}")
        row = [as_q(x) for x in prefix[: order + 1]]
        rows = [row]
        for _ in range(order):
            row = [row[i] - row[i + 1] for i in range(len(row) - 1)]
            rows.append(row)
        self.order = order
        self._rows = rows

    def __call__(self, m: int, n: int) -> Fraction:
        """A_m^n."""
        if m < 0 or n < 0 or m + n > self.order:
            raise IndexError("outside the table")
        return self._rows[n][m]

    def entries(self):
        for n, row in enumerate(self._rows):
            for m, v in enumerate(row):
                yield m, n, v


def diff_table(prefix: Sequence, order: int) -> DiffTable:
    return DiffTable(prefix, order)


def binomial_difference(prefix: Sequence, m: int, n: int) -> Fraction:
    """A_m^n straight from the binomial sum."""
    return sum(((-1) ** j * comb(n, j) * as_q(prefix[m + j]) for j in range(n + 1)), Fraction(0))


def is_ca_prefix(prefix: Sequence, order: int) -> ClassVerdict:
    """Test A_m^n <= 0 for 1 <= n, m + n <= order.

    Passing a finite prefix test never proves complete alternation, so the
    best outcome here is inconclusive-at-horizon.
    """
    table = diff_table(prefix, order)
    for n in range(1, order + 1):
        for m in range(order - n + 1):
            v = table(m, n)
            if v > 0:
                return ClassVerdict("ca", FAILS, Witness(f"m={m}", n, v), order, True)
    return ClassVerdict("ca", INCONCLUSIVE, None, order, False)


@dataclass(frozen=True)
class CAExtension:
    """Extension of a CA sequence k steps back, renormalised so a_{-k} = 1."""

    sequence: CASeq
    prefix: tuple[Fraction, ...]
    k: int
    remainder: Fraction


def extension_condition(tau: AtomicMeasure, k: int) -> Fraction | float:
    """Sum over j = 1..k of the integral of t^-j."""
    return sum((measure_moment(tau, -j) for j in range(1, k + 1)), Fraction(0))


def ca_extend(s: CASeq, k: int) -> CAExtension | None:
    """Prepend a_{-k} = 1, ..., a_{-1} keeping the sequence completely alternating.

    Exists iff tau has no atom at 0 and the k negative moments sum to at most
    a0 - 1.  The new measure is t^-k tau plus the leftover mass at 0.
    """
    if k < 1:
        raise ValueError("k must be positive")
    tau = s.measure
    if tau.mass_at(0):
        return None
    cond = extension_condition(tau, k)
    rem = s.a0 - 1 - cond
    if rem < 0:
        return None
    shifted = tau.times_power(-k)
    rho = shifted + AtomicMeasure.from_pairs([(0, rem)])
    ext = CASeq(Fraction(1), rho)
    prefix = tuple(seq_value(ext, i) for i in range(k))
    return CAExtension(ext, prefix, k, rem)


def mix_measures(pairs: Iterable[tuple]) -> AtomicMeasure:
    """Atom-wise sum of weight * measure."""
    out = []
    for w, tau in pairs:
        w = as_q(w)
        if w < 0:
            raise ValueError("negative weight")
        out.extend((t, w * m) for t, m in tau.atoms)
    return AtomicMeasure.from_pairs(out)


def inv_t_transform(tau: AtomicMeasure) -> AtomicMeasure | None:
    return tau.times_power(-1)

"""Weighted shifts on a finite core tree with infinite rays hanging off anchors.

Squared weights are stored, never the weights themselves.  A vertex of the
model is either a core vertex id (``str``) or a ray position
``TailPos(anchor, m)`` with ``m >= 1``; the anchor itself is ray position 0.

Two ray kinds are supported.  An :class:`AlternatingTail` has norms
``a_n = 1 + integral of (1 + t + ... + t^(n-1)) d tau`` (completely
alternating), with ratios ``a_{n+1}/a_n`` non-increasing.  A
:class:`MomentTail` has ``a_n = sum w_i s_i^n`` (an atomic moment
sequence), with ratios non-decreasing.  In both cases ray position m sees
the scaled tail ``a_{m+n}/a_m``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

import numpy as np

from .altseq import ZERO as ZERO_MEASURE
from .altseq import AtomicMeasure, CASeq, as_q, seq_value
from .surd import ZERO as SZERO
from .surd import Surd
from .tree import DirectedTree, backward_extend_tree, rooted_sum


class StructuralError(ValueError):
    """Model violates properness, leaflessness or another shape requirement."""


class TailPos(NamedTuple):
    anchor: str
    m: int


Ref = Union[str, TailPos]


def _norm_ref(ref: Ref) -> Ref:
    if isinstance(ref, TailPos) and ref.m == 0:
        return ref.anchor
    return ref


# ---------------------------------------------------------------- tails


@dataclass(frozen=True)
class AlternatingTail:
    generator: CASeq
    _values: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    kind = "alternating"

    def __post_init__(self):
        if self.generator.a0 != 1:
            raise StructuralError("tail generators must have a0 = 1")

    def value(self, n: int) -> Fraction:
        v = self._values.get(n)
        if v is None:
            v = self._values[n] = seq_value(self.generator, n)
        return v

    @property
    def is_trivial(self) -> bool:
        return self.generator.measure.is_zero

    def shifted(self, m: int) -> "AlternatingTail":
        """Generator seen from ray position m."""
        am = self.value(m)
        tau = AtomicMeasure.from_pairs((t, mass * t**m / am) for t, mass in self.generator.measure.atoms)
        return AlternatingTail(CASeq(Fraction(1), tau))

    def ca_measure(self, m: int = 0) -> AtomicMeasure:
        return self.shifted(m).generator.measure if m else self.generator.measure

    def ratio_sup(self) -> Fraction:
        return self.value(1)

    def ratio_inf(self) -> Fraction:
        # ratios decrease to 1 whether a_n grows linearly or converges
        return Fraction(1)

    def moment_form(self) -> "MomentTail | None":
        return MomentTail(((Fraction(1), Fraction(1)),)) if self.is_trivial else None

    def to_json(self) -> dict:
        return self.generator.to_json()


@dataclass(frozen=True)
class MomentTail:
    """Ray with norms a_n = sum w * s^n; atoms sorted by s, weights sum to 1."""

    atoms: tuple[tuple[Fraction, Fraction], ...]
    _values: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    kind = "moment"

    def __post_init__(self):
        if not self.atoms:
            raise StructuralError("moment tail needs at least one atom")
        prev = None
        for s, w in self.atoms:
            if s <= 0 or w <= 0:
                raise StructuralError("moment tail atoms need s > 0 and w > 0")
            if prev is not None and s <= prev:
                raise StructuralError("moment tail atoms must be strictly sorted")
            prev = s
        if sum(w for _, w in self.atoms) != 1:
            raise StructuralError("moment tail weights must sum to 1")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple]) -> "MomentTail":
        acc: dict[Fraction, Fraction] = {}
        for s, w in pairs:
            s, w = as_q(s), as_q(w)
            acc[s] = acc.get(s, Fraction(0)) + w
        return cls(tuple(sorted((s, w) for s, w in acc.items() if w)))

    @classmethod
    def constant(cls, c) -> "MomentTail":
        """Ray with every squared weight equal to c."""
        return cls(((as_q(c), Fraction(1)),))

    def value(self, n: int) -> Fraction:
        v = self._values.get(n)
        if v is None:
            v = self._values[n] = sum((w * s**n for s, w in self.atoms), Fraction(0))
        return v

    @property
    def is_trivial(self) -> bool:
        return self.atoms == ((Fraction(1), Fraction(1)),)

    def shifted(self, m: int) -> "MomentTail":
        am = self.value(m)
        return MomentTail.from_pairs((s, w * s**m / am) for s, w in self.atoms)

    def ca_measure(self, m: int = 0) -> AtomicMeasure | None:
        return ZERO_MEASURE if self.is_trivial else None

    def ratio_sup(self) -> Fraction:
        return self.atoms[-1][0]

    def ratio_inf(self) -> Fraction:
        return self.value(1)

    def moment_form(self) -> "MomentTail":
        return self

    def eps(self, j: int) -> Fraction:
        """Relative weight of the non-dominant atoms at index j."""
        s1, w1 = self.atoms[-1]
        return sum(((w / w1) * (s / s1) ** j for s, w in self.atoms[:-1]), Fraction(0))

    def to_json(self) -> dict:
        return {"moments": [{"s": _s(s), "w": _s(w)} for s, w in self.atoms]}


Tail = Union[AlternatingTail, MomentTail]


def tail_from_json(data: Mapping) -> Tail:
    if "moments" in data:
        return MomentTail.from_pairs((as_q(d["s"]), as_q(d["w"])) for d in data["moments"])
    return AlternatingTail(CASeq.from_json(data))


def _s(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------- model


class ShiftModel:
    """Weighted shift on a rooted tree with ray tails.

    ``weights_sq`` must cover every non-root core vertex.  By default all
    squared weights must be positive; ``allow_zero=True`` admits the
    non-proper models used in demonstrations.  Leaves (childless core
    vertices without a tail) are allowed here and reported by checks.
    """

    def __init__(
        self,
        tree: DirectedTree,
        weights_sq: Mapping[str, object],
        tails: Mapping[str, Tail] | None = None,
        *,
        allow_zero: bool = False,
    ):
        self.tree = tree
        w = {str(v): as_q(x) for v, x in weights_sq.items()}
        expected = set(tree.vertices) - {tree.root}
        if set(w) != expected:
            extra, missing = set(w) - expected, expected - set(w)
            raise StructuralError(f"weights must cover non-root vertices (missing {sorted(missing)[:3]}, extra {sorted(extra)[:3]})")
        for v, x in w.items():
            if x < 0 or (x == 0 and not allow_zero):
                raise StructuralError(f"squared weight at {v!r} must be positive, got {x}")
        self.weights_sq = w
        self.tails: dict[str, Tail] = dict(tails or {})
        for a in self.tails:
            if a not in tree:
                raise StructuralError(f"tail anchor {a!r} is not a vertex")
            if tree.children(a):
                raise StructuralError(f"tail anchor {a!r} has core children")
        self._desc: dict[str, list] = {}
        self._norm: dict[tuple, Fraction] = {}

    @property
    def root(self) -> str:
        return self.tree.root

    @property
    def is_proper(self) -> bool:
        return all(x > 0 for x in self.weights_sq.values())

    def leaves(self) -> tuple[str, ...]:
        return tuple(v for v in self.tree.leaves() if v not in self.tails)

    @property
    def is_leafless(self) -> bool:
        return self.tree.is_leafless(self.tails)

    def require_leafless(self) -> None:
        bad = self.leaves()
        if bad:
            raise StructuralError(f"vertex {bad[0]!r} is a leaf without a tail")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ShiftModel):
            return NotImplemented
        return (self.tree, self.weights_sq, self.tails) == (other.tree, other.weights_sq, other.tails)

    def __repr__(self) -> str:
        return f"ShiftModel(core={len(self.tree)}, tails={len(self.tails)})"

    # -- vertex navigation

    @staticmethod
    def label(ref: Ref) -> str:
        ref = _norm_ref(ref)
        return ref if isinstance(ref, str) else f"{ref.anchor}~{ref.m}"

    def ref(self, label: str) -> Ref:
        if label in self.tree:
            return label
        a, _, m = label.rpartition("~")
        if a in self.tails and m.isdigit():
            return _norm_ref(TailPos(a, int(m)))
        raise KeyError(f"unknown vertex {label!r}")

    def _check(self, ref: Ref) -> Ref:
        ref = _norm_ref(ref)
        if isinstance(ref, TailPos):
            if ref.anchor not in self.tails or ref.m < 0:
                raise KeyError(f"unknown ray position {ref!r}")
        elif ref not in self.tree:
            raise KeyError(f"unknown vertex {ref!r}")
        return ref

    def depth(self, ref: Ref) -> int:
        ref = self._check(ref)
        if isinstance(ref, TailPos):
            return self.tree.depth(ref.anchor) + ref.m
        return self.tree.depth(ref)

    def parent(self, ref: Ref) -> Ref:
        ref = self._check(ref)
        if isinstance(ref, TailPos):
            return _norm_ref(TailPos(ref.anchor, ref.m - 1))
        return self.tree.parent(ref)

    def children(self, ref: Ref) -> tuple[Ref, ...]:
        ref = self._check(ref)
        if isinstance(ref, TailPos):
            return (TailPos(ref.anchor, ref.m + 1),)
        if ref in self.tails:
            return (TailPos(ref, 1),)
        return self.tree.children(ref)

    def weight_sq(self, ref: Ref) -> Fraction:
        ref = self._check(ref)
        if isinstance(ref, TailPos):
            t = self.tails[ref.anchor]
            return t.value(ref.m) / t.value(ref.m - 1)
        if ref == self.root:
            return Fraction(0)
        return self.weights_sq[ref]

    def lambda_k_sq(self, ref: Ref, k: int) -> Fraction:
        """Squared product of the weights of ref and its k-1 nearest ancestors."""
        ref = self._check(ref)
        out = Fraction(1)
        for _ in range(k):
            if ref == self.root:
                return Fraction(0)
            if isinstance(ref, TailPos):
                # jump straight to the anchor when possible
                t = self.tails[ref.anchor]
                steps = min(k, ref.m)
                k -= steps
                out *= t.value(ref.m) / t.value(ref.m - steps)
                ref = _norm_ref(TailPos(ref.anchor, ref.m - steps))
                return out * self.lambda_k_sq(ref, k) if k else out
            out *= self.weights_sq[ref]
            ref = self.tree.parent(ref)
        return out

    def _descent(self, v: str) -> list[tuple[str, int, Fraction]]:
        """Core descendants of v with distance and squared weight product."""
        got = self._desc.get(v)
        if got is None:
            got = [(v, 0, Fraction(1))]
            i = 0
            while i < len(got):
                u, d, c = got[i]
                for w in self.tree.children(u):
                    got.append((w, d + 1, c * self.weights_sq[w]))
                i += 1
            self._desc[v] = got
        return got

    def anchors_below(self, v: str) -> list[tuple[str, int, Fraction]]:
        return [(u, d, c) for u, d, c in self._descent(v) if u in self.tails]

    def kth_children(self, ref: Ref, k: int) -> list[tuple[Ref, Fraction]]:
        """Pairs (u, lambda^(k)_u squared) over the k-th children of ref."""
        ref = self._check(ref)
        if isinstance(ref, TailPos):
            t = self.tails[ref.anchor]
            return [(_norm_ref(TailPos(ref.anchor, ref.m + k)), t.value(ref.m + k) / t.value(ref.m))]
        out: list[tuple[Ref, Fraction]] = []
        for u, d, c in self._descent(ref):
            if d == k:
                out.append((u, c))
            elif d < k and u in self.tails:
                out.append((TailPos(u, k - d), c * self.tails[u].value(k - d)))
        return out

    def norm_sq(self, ref: Ref, k: int) -> Fraction:
        """Squared norm of S^k e_ref."""
        ref = self._check(ref)
        if isinstance(ref, TailPos):
            t = self.tails[ref.anchor]
            return t.value(ref.m + k) / t.value(ref.m)
        key = (ref, k)
        got = self._norm.get(key)
        if got is None:
            got = sum((c for _, c in self.kth_children(ref, k)), Fraction(0))
            self._norm[key] = got
        return got

    def refs_to_depth(self, depth: int) -> list[Ref]:
        """All vertices at depth <= depth, breadth first."""
        out: list[Ref] = []
        level: list[Ref] = [self.root]
        d = 0
        while level and d <= depth:
            out.extend(level)
            level = [u for v in level for u in self.children(v)]
            d += 1
        return out

    def tail_positions(self, upto: int) -> list[TailPos]:
        return [TailPos(a, m) for a in self.tails for m in range(1, upto + 1)]

    # -- suprema and infima of ||S e_v||^2

    def op_norm_sq(self, horizon: int = 64) -> tuple[Fraction, bool]:
        """Squared operator norm and whether it is exact (it always is for the two ray kinds)."""
        vals = [self.norm_sq(v, 1) for v in self.tree]
        vals += [t.ratio_sup() for t in self.tails.values()]
        return max(vals), True

    def inf_norm_sq(self) -> tuple[Fraction, Ref]:
        """Infimum of ||S e_v||^2 and a vertex attaining it (or the ray approaching it)."""
        best: tuple[Fraction, Ref] | None = None
        for v in self.tree:
            x = self.norm_sq(v, 1)
            if best is None or x < best[0]:
                best = (x, v)
        for a, t in self.tails.items():
            x = t.ratio_inf()
            if x < best[0]:
                best = (x, TailPos(a, 1))
        return best

    # -- closed-form bounds for large orders

    def asymptotic_bound(self, v: str, n0: int, shift: int) -> Fraction | None:
        """Upper bound, valid for all n >= n0, on

            sum over u in Chi^[n](v) of lambda^(n)_u^2 / ||S^(n+shift) e_u||^2.

        Needs every ray below v to have moment form and n0 beyond the core
        below v.  Returns None when either fails.
        """
        desc = self._descent(v)
        if n0 <= max(d for _, d, _ in desc):
            return None
        total = Fraction(0)
        for u, d, c in desc:
            if u not in self.tails:
                if not self.tree.children(u):
                    return None
                continue
            mt = self.tails[u].moment_form()
            if mt is None:
                return None
            s1, w1 = mt.atoms[-1]
            total += c * w1 * s1 ** (-d - shift) * (1 + mt.eps(n0 - d)) ** 2
        return total

    # -- derived models

    def restrict(self, ref: Ref) -> "ShiftModel":
        """The shift restricted to the descendants of ref, which becomes the root."""
        ref = self._check(ref)
        if isinstance(ref, TailPos):
            lab = self.label(ref)
            return ShiftModel(DirectedTree({lab: lab}), {}, {lab: self.tails[ref.anchor].shifted(ref.m)})
        sub = self.tree.subtree(ref)
        w = {u: self.weights_sq[u] for u in sub if u != ref}
        tails = {a: t for a, t in self.tails.items() if a in sub}
        return ShiftModel(sub, w, tails, allow_zero=True)

    def norm_table(self, horizon: int) -> "NormTable":
        rows = {}
        for v in self.tree:
            for k in range(horizon + 1):
                rows[(v, k)] = self.norm_sq(v, k)
        return NormTable(horizon, rows)


def lambda_k_sq(m: ShiftModel, v: Ref, k: int) -> Fraction:
    return m.lambda_k_sq(v, k)


def norm_sq(m: ShiftModel, v: Ref, k: int) -> Fraction:
    return m.norm_sq(v, k)


def op_norm_sq(m: ShiftModel, horizon: int = 64) -> tuple[Fraction, bool]:
    return m.op_norm_sq(horizon)


def restrict_to_subtree(m: ShiftModel, v: Ref) -> ShiftModel:
    return m.restrict(v)


@dataclass(frozen=True)
class NormTable:
    horizon: int
    values: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["vertex", "k", "value"])
        for (v, k), x in self.values.items():
            w.writerow([v, k, _s(x)])
        return buf.getvalue()


# ---------------------------------------------------------------- constructions


def rooted_sum_model(
    models: Sequence[ShiftModel],
    root_weights_sq: Sequence,
    labels: Sequence[str] | None = None,
    root: str = "o",
) -> ShiftModel:
    """Join models under a fresh root; member j's root gets root_weights_sq[j]."""
    if len(models) != len(root_weights_sq):
        raise ValueError("one root weight per member is required")
    tree, ext = rooted_sum([m.tree for m in models], labels, root)
    w: dict[str, Fraction] = {}
    tails: dict[str, Tail] = {}
    for m, emb, x in zip(models, ext.embedding, root_weights_sq):
        for v, y in m.weights_sq.items():
            w[emb[v]] = y
        w[emb[m.root]] = as_q(x)
        for a, t in m.tails.items():
            tails[emb[a]] = t
    allow = any(not m.is_proper for m in models) or any(as_q(x) == 0 for x in root_weights_sq)
    return ShiftModel(tree, w, tails, allow_zero=allow)


def backward_extend_model(m: ShiftModel, new_weights_sq: Sequence) -> tuple[ShiftModel, tuple[str, ...]]:
    """Extend by len(new_weights_sq) steps; entry j is the squared weight of omega_j (omega_0 = old root)."""
    k = len(new_weights_sq)
    tree, ext = backward_extend_tree(m.tree, k)
    chain = (m.root,) + ext.new_vertices
    w = dict(m.weights_sq)
    for j in range(k):
        w[chain[j]] = as_q(new_weights_sq[j])
    return ShiftModel(tree, w, m.tails, allow_zero=not m.is_proper), chain


def ray_model(tail: Tail, name: str = "r0") -> ShiftModel:
    """A single ray: the root itself anchors the tail."""
    return ShiftModel(DirectedTree({name: name}), {}, {name: tail})


# ---------------------------------------------------------------- matrices


@dataclass
class Truncation:
    """Matrix of the shift on span{e_v : depth(v) <= depth}; column j is S e_{refs[j]}."""

    depth: int
    refs: list
    labels: list[str]
    matrix: object
    exact: bool

    def index(self, ref: Ref) -> int:
        return self._pos[_norm_ref(ref)]

    def __post_init__(self):
        self._pos = {r: i for i, r in enumerate(self.refs)}


def truncate_matrix(m: ShiftModel, depth: int, exact: bool = True) -> Truncation:
    """Dense truncation with surd entries (exact) or float64 entries."""
    refs = m.refs_to_depth(depth)
    pos = {r: i for i, r in enumerate(refs)}
    n = len(refs)
    if exact:
        mat = [[SZERO] * n for _ in range(n)]
    else:
        mat = np.zeros((n, n))
    for j, v in enumerate(refs):
        for u in m.children(v):
            i = pos.get(u)
            if i is None:
                continue
            w = m.weight_sq(u)
            if exact:
                mat[i][j] = Surd.sqrt(w)
            else:
                mat[i, j] = float(w) ** 0.5
    return Truncation(depth, refs, [m.label(r) for r in refs], mat, exact)

"""Membership tests for the operator classes, with re-checkable witnesses."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .altseq import AtomicMeasure, CASeq, ca_extend, mix_measures
from .shiftmodel import Ref, ShiftModel, StructuralError, TailPos
from .verdict import FAILS, HOLDS, INCONCLUSIVE, ClassVerdict, Witness

CLASSES = ("bounded", "below", "contraction", "expansive", "isometry", "quasinormal", "hyponormal", "powhyp", "che")


@dataclass(frozen=True)
class HypoValue:
    v: str
    k: int
    value: Fraction


def h_value(m: ShiftModel, v: Ref, k: int) -> Fraction:
    """Sum over the k-th children u of v of lambda^(k)_u^2 / ||S^k e_u||^2."""
    if k < 1:
        raise ValueError("k must be positive")
    m.require_leafless()
    total = Fraction(0)
    for u, c in m.kth_children(v, k):
        if not c:
            continue
        d = m.norm_sq(u, k)
        if not d:
            raise StructuralError(f"||S^{k} e_u|| vanishes at {m.label(u)!r}")
        total += c / d
    return total


def _tail_h(tail, pos: int, k: int) -> Fraction:
    a = tail.value
    return a(pos + k) ** 2 / (a(pos) * a(pos + 2 * k))


def check_power_hyponormal(m: ShiftModel, K: int = 8, N: int = 64) -> ClassVerdict:
    """h^<k>(v) <= 1 for every core vertex and ray position up to N, all k <= K.

    ``exact`` is set when the orders beyond K are covered too: rays with
    moment form are log-convex, and core vertices are closed by
    :meth:`ShiftModel.asymptotic_bound`.
    """
    cls = "powhyp" if K > 1 else "hyponormal"
    leaves = m.leaves()
    if leaves:
        return ClassVerdict(cls, FAILS, Witness(leaves[0], 0, Fraction(0), "leaf"), K, True)
    for v in m.tree:
        for k in range(1, K + 1):
            h = h_value(m, v, k)
            if h > 1:
                return ClassVerdict(cls, FAILS, Witness(v, k, h, "h-value"), K, True)
    for a, t in m.tails.items():
        for pos in range(1, N + 1):
            for k in range(1, K + 1):
                h = _tail_h(t, pos, k)
                if h > 1:
                    return ClassVerdict(cls, FAILS, Witness(m.label(TailPos(a, pos)), k, h, "h-value"), K, True)
    exact = K >= 1 and all(t.moment_form() is not None for t in m.tails.values())
    if exact:
        for v in m.tree:
            if v in m.tails:
                continue
            bound = m.asymptotic_bound(v, K + 1, 0)
            if bound is None or bound > 1:
                exact = False
                break
    return ClassVerdict(cls, HOLDS, None, K, exact, {"N": N})


# ---------------------------------------------------------------- CHE


@dataclass
class CHEReport:
    verdict: ClassVerdict
    measures: dict[str, AtomicMeasure] = field(default_factory=dict)
    model: ShiftModel | None = None

    def measure_at(self, ref: Ref) -> AtomicMeasure:
        if isinstance(ref, TailPos) and ref.m > 0:
            return self.model.tails[ref.anchor].ca_measure(ref.m)
        if isinstance(ref, TailPos):
            ref = ref.anchor
        return self.measures[ref]

    @property
    def root_measure(self) -> AtomicMeasure:
        return self.measures[self.model.root]


def _lifted_difference(s: Fraction, tau: AtomicMeasure, n: int) -> Fraction:
    """A_0^n of the sequence (1, b_0, b_1, ...) where b has a0 = s and measure tau."""
    total = 1 - s
    for t, mass in tau.atoms:
        total += mass * (n - 1 if t == 0 else (1 - (1 - t) ** (n - 1)) / t)
    return total


def _che_witness_order(s: Fraction, tau: AtomicMeasure, cap: int = 1 << 12) -> tuple[int, Fraction] | None:
    """Smallest n with A_0^n > 0; the value is non-decreasing in n."""
    if _lifted_difference(s, tau, 1) > 0:
        return 1, _lifted_difference(s, tau, 1)
    lo, hi = 1, 2
    while _lifted_difference(s, tau, hi) <= 0:
        lo, hi = hi, hi * 2
        if hi > cap:
            return None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _lifted_difference(s, tau, mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi, _lifted_difference(s, tau, hi)


def check_che(m: ShiftModel, N: int = 64) -> CHEReport:
    """Propagate representing measures from the rays up to the root.

    A core vertex whose children carry measures tau_u sees the shifted
    sequence ||S^(n+1) e_v||^2 with measure sum lambda_u^2 tau_u; prepending
    ||e_v||^2 = 1 is the one-step extension problem.
    """
    meas: dict[str, AtomicMeasure] = {}

    def fail(w: Witness) -> CHEReport:
        return CHEReport(ClassVerdict("che", FAILS, w, N, True), meas, m)

    for v in reversed(m.tree.vertices):
        if v in m.tails:
            t = m.tails[v]
            mu = t.ca_measure(0)
            if mu is None:
                a = t.value
                return fail(Witness(v, 2, a(0) - 2 * a(1) + a(2), "moment ray is not alternating"))
            meas[v] = mu
            continue
        kids = m.tree.children(v)
        if not kids:
            return fail(Witness(v, 1, Fraction(1), "leaf"))
        s = sum((m.weights_sq[u] for u in kids), Fraction(0))
        tau = mix_measures((m.weights_sq[u], meas[u]) for u in kids)
        ext = ca_extend(CASeq(s, tau), 1)
        if ext is None:
            found = _che_witness_order(s, tau)
            if found is None:
                v_ = ClassVerdict("che", INCONCLUSIVE, None, N, False, {"vertex": v})
                return CHEReport(v_, meas, m)
            n, val = found
            return fail(Witness(v, n, val, "alternating difference A_0^n"))
        meas[v] = ext.sequence.measure
    return CHEReport(ClassVerdict("che", HOLDS, None, N, True), meas, m)


# ---------------------------------------------------------------- simple classes


def _scan_tail(m: ShiftModel, a: str, pred, limit: int):
    """First ray position (from 1) whose ||S e||^2 satisfies pred."""
    t = m.tails[a]
    for pos in range(1, limit + 1):
        x = t.value(pos + 1) / t.value(pos)
        if pred(x):
            return Witness(m.label(TailPos(a, pos)), 1, x)
    return None


def _first(m: ShiftModel, pred, N: int) -> Witness | None:
    for v in m.tree:
        x = m.norm_sq(v, 1)
        if pred(x):
            return Witness(v, 1, x)
    for a in m.tails:
        w = _scan_tail(m, a, pred, 16 * N)
        if w:
            return w
    return None


def check_simple_classes(m: ShiftModel, N: int = 64) -> dict[str, ClassVerdict]:
    sup, sup_exact = m.op_norm_sq(N)
    inf, _ = m.inf_norm_sq()
    out: dict[str, ClassVerdict] = {}

    def verdict(cls: str, ok: bool, pred, info=None) -> ClassVerdict:
        if ok:
            return ClassVerdict(cls, HOLDS, None, N, True, info or {})
        w = _first(m, pred, N)
        if w is None:
            return ClassVerdict(cls, INCONCLUSIVE, None, N, False, info or {})
        return ClassVerdict(cls, FAILS, w, N, True, info or {})

    out["bounded"] = ClassVerdict("bounded", HOLDS, None, N, sup_exact, {"sup": sup})
    out["contraction"] = verdict("contraction", sup <= 1, lambda x: x > 1, {"sup": sup})
    out["expansive"] = verdict("expansive", inf >= 1, lambda x: x < 1, {"inf": inf})
    out["below"] = verdict("below", inf > 0, lambda x: x == 0, {"inf": inf})
    out["isometry"] = verdict("isometry", sup == 1 and inf == 1, lambda x: x != 1)
    c = m.norm_sq(m.root, 1)
    out["quasinormal"] = verdict("quasinormal", sup == c and inf == c, lambda x: x != c, {"c": c})
    return out


def check_class(m: ShiftModel, cls: str, K: int = 8, N: int = 64) -> ClassVerdict:
    if cls == "che":
        return check_che(m, N).verdict
    if cls == "powhyp":
        return check_power_hyponormal(m, K, N)
    if cls == "hyponormal":
        return check_power_hyponormal(m, 1, N)
    if cls in CLASSES:
        return check_simple_classes(m, N)[cls]
    raise ValueError(f"unknown class {cls!r}")

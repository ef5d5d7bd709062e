"""Backward extensions: trivial fills, power hyponormal and completely
hyperexpansive k-step extensions, joint extensions over rooted sums, and
extensions over a depth-k cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

from .altseq import AtomicMeasure, CASeq, ca_extend, extension_condition, inv_t_transform, mix_measures
from .classify import check_che, check_class, check_power_hyponormal
from .serialize import model_to_json
from .shiftmodel import (
    AlternatingTail,
    Ref,
    ShiftModel,
    StructuralError,
    backward_extend_model,
    ray_model,
    rooted_sum_model,
)
from .tree import DirectedTree
from .verdict import ClassVerdict, fmt

TRIVIAL_CLASSES = ("bounded", "contraction", "below", "expansive", "isometry", "quasinormal", "hyponormal")

# resolution used when the largest admissible theta is irrational
THETA_BITS = 32


class ConsistencyError(AssertionError):
    """A construction produced something its own theory rules out."""


@dataclass
class ExtensionCertificate:
    cls: str
    k: int
    new_weights_sq: dict[str, Fraction]
    resulting_model: ShiftModel
    condition_values: dict[str, Any] = field(default_factory=dict)
    horizon_used: int = 0
    exact: bool = True
    verdict: ClassVerdict | None = None

    def to_json(self, float_mode: bool = False) -> dict[str, Any]:
        return {
            "class": self.cls,
            "k": self.k,
            "new_weights_sq": fmt(self.new_weights_sq, float_mode),
            "condition_values": fmt(self.condition_values, float_mode),
            "horizon": self.horizon_used,
            "exact": self.exact,
            "verdict": self.verdict.to_json(float_mode) if self.verdict else None,
            "model": model_to_json(self.resulting_model),
        }


@dataclass(frozen=True)
class JointSpec:
    members: tuple[ShiftModel, ...]
    k: int = 0

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("a joint extension needs at least one member")
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        for i, m in enumerate(self.members):
            if not m.is_proper:
                raise StructuralError(f"member {i} is not proper")
            if not m.is_leafless:
                raise StructuralError(f"member {i} has a leaf")


def _extended(m: ShiftModel, weights: Sequence[Fraction]) -> tuple[ShiftModel, dict[str, Fraction]]:
    ext, chain = backward_extend_model(m, weights)
    return ext, {chain[j]: weights[j] for j in range(len(weights))}


# ---------------------------------------------------------------- trivial and isometric


def trivial_extend(m: ShiftModel, cls: str, k: int, K: int = 8, N: int = 64) -> ExtensionCertificate:
    """Every new squared weight equals ||S e_root||^2."""
    if cls not in TRIVIAL_CLASSES:
        raise ValueError(f"no trivial extension for class {cls!r}")
    if not check_class(m, cls, K, N).holds:
        raise ValueError(f"model is not in class {cls!r}")
    w = m.norm_sq(m.root, 1)
    if w == 0:
        raise ValueError("the zero operator has no extension with nonzero weights")
    ext, new = _extended(m, [w] * k)
    v = check_class(ext, cls, K, N)
    if not v.holds:
        raise ConsistencyError(f"trivial {cls} extension left the class: {v.witness}")
    return ExtensionCertificate(cls, k, new, ext, {"root_norm_sq": w}, N, v.exact, v)


def isometry_weights(tree: DirectedTree, tails=()) -> ShiftModel:
    """Split unit mass equally among the children of every vertex; tails become isometric rays."""
    anchors = set(tails)
    if not tree.is_leafless(anchors):
        raise StructuralError("isometric weights need a leafless tree")
    w = {v: Fraction(1, len(tree.children(tree.parent(v)))) for v in tree if v != tree.root}
    return ShiftModel(tree, w, {a: AlternatingTail(CASeq(Fraction(1))) for a in anchors})


# ---------------------------------------------------------------- power hyponormal


def _iroot(n: int, k: int) -> int:
    """Floor of the k-th root of a nonnegative integer."""
    if n < 2:
        return n
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x**k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def root_floor(x: Fraction, k: int, bits: int = THETA_BITS) -> Fraction:
    """x^(1/k) when rational, else the largest multiple of 2^-bits below it."""
    if k == 1:
        return x
    rn, rd = _iroot(x.numerator, k), _iroot(x.denominator, k)
    if rn**k == x.numerator and rd**k == x.denominator:
        return Fraction(rn, rd)
    scale = 1 << (bits * k)
    return Fraction(_iroot(x.numerator * scale // x.denominator, k), 1 << bits)


def _b_sum(m: ShiftModel, n: int, shift: int) -> Fraction:
    root = m.root
    return sum((c / m.norm_sq(u, n + shift) for u, c in m.kth_children(root, n)), Fraction(0))


def powhyp_sups(m: ShiftModel, k: int, N: int) -> tuple[dict[int, Fraction], bool]:
    """sup over n of B(n, j) for j = 1..k.

    Values for n <= N are exact; beyond N a closed-form bound is used.  If
    the bound does not exceed the observed maximum the sup is exact.
    Otherwise the bound itself is returned (a safe over-estimate) and the
    flag is False.
    """
    sups: dict[int, Fraction] = {}
    exact = True
    for j in range(1, k + 1):
        obs = max(_b_sum(m, n, j) for n in range(N + 1))
        bound = m.asymptotic_bound(m.root, N + 1, j)
        if bound is None:
            sups[j] = obs
            exact = False
        elif bound <= obs:
            sups[j] = obs
        else:
            sups[j] = bound
            exact = False
    return sups, exact


def powhyp_kstep(m: ShiftModel, k: int, N: int = 64, K: int = 8) -> ExtensionCertificate | None:
    """Power hyponormal k-step extension with all new squared weights equal to theta."""
    if k < 1:
        raise ValueError("k must be positive")
    if not m.is_leafless or m.norm_sq(m.root, 1) == 0:
        return None
    if not check_power_hyponormal(m, K, N).holds:
        return None
    sups, exact = powhyp_sups(m, k, N)
    caps = {j: min(1 / sups[j], m.norm_sq(m.root, j)) for j in sups}
    theta = min(root_floor(caps[j], j) for j in caps)
    ext, new = _extended(m, [theta] * k)
    v = check_power_hyponormal(ext, max(K, 2 * k + 4), N)
    if not v.holds:
        raise ConsistencyError(f"power hyponormal extension failed re-check: {v.witness}")
    cond = {"theta": theta, **{f"B_sup[{j}]": s for j, s in sups.items()}}
    return ExtensionCertificate("powhyp", k, new, ext, cond, N, exact and v.exact, v)


def _pos_weights(n: int) -> list[Fraction]:
    # any positive weights summing to 1 serve a finite family
    return [Fraction(1, n)] * n


def powhyp_joint(
    spec: JointSpec,
    N: int = 64,
    K: int = 8,
    labels: Sequence[str] | None = None,
    root: str = "o",
) -> ExtensionCertificate | None:
    """Root weights for the rooted sum of the members (first member plays j0)."""
    k = spec.k
    consts = []
    exact = True
    for mem in spec.members:
        cert = powhyp_kstep(mem, k + 1, N, K)
        if cert is None:
            return None
        exact = exact and cert.exact
        sup = max(v for key, v in cert.condition_values.items() if key.startswith("B_sup"))
        consts.append(max(Fraction(1), sup))
    pre = _pos_weights(len(spec.members))
    a = [pre[j] * min(Fraction(1), consts[j] ** -3) for j in range(len(pre))]
    a[0] = (1 - sum(a[j] * consts[j] for j in range(1, len(a)))) / consts[0]
    model = rooted_sum_model(spec.members, a, labels, root)
    v = check_power_hyponormal(model, K, N)
    if not v.holds:
        raise ConsistencyError(f"joint model is not power hyponormal: {v.witness}")
    if k >= 1 and powhyp_kstep(model, k, N, K) is None:
        raise ConsistencyError("joint model does not extend as promised")
    norm, _ = model.op_norm_sq(N)
    member_norm = max(mem.op_norm_sq(N)[0] for mem in spec.members)
    if norm != member_norm:
        raise ConsistencyError(f"norm identity failed: {norm} != {member_norm}")
    new = {c: a[j] for j, c in enumerate(model.tree.children(model.root))}
    cond = {
        "C": consts,
        "a": a,
        "sum_aC": sum(x * c for x, c in zip(a, consts)),
        "k_step_constant": sum(x * c**3 for x, c in zip(a, consts)),
        "op_norm_sq": norm,
    }
    return ExtensionCertificate("powhyp", k, new, model, cond, N, exact and v.exact, v)


def joint_extend_at_depth(
    cap: DirectedTree,
    members: Mapping[str, ShiftModel | None],
    cls: str = "powhyp",
    N: int = 64,
    K: int = 8,
) -> ShiftModel | None:
    """Fill the cap's weights level by level, from the attach points to the root.

    ``members`` maps each attach point (the depth-k vertices of the cap) to
    a model; None marks a blank subtree, filled with an isometric ray.
    """
    if cls != "powhyp":
        raise ValueError("only the power hyponormal class is supported here")
    leaves = set(cap.leaves())
    depths = {cap.depth(v) for v in leaves}
    if len(depths) != 1:
        raise StructuralError("attach points must all lie at the same depth")
    (k,) = depths
    if set(members) != leaves:
        raise StructuralError("attach points and members do not match")
    built: dict[str, ShiftModel] = {}
    for v in leaves:
        mem = members[v]
        built[v] = mem if mem is not None else ray_model(AlternatingTail(CASeq(Fraction(1))), v)
    for d in range(k - 1, -1, -1):
        for v in cap.vertices:
            if cap.depth(v) != d:
                continue
            kids = cap.children(v)
            cert = powhyp_joint(JointSpec([built[u] for u in kids], d), N, K, labels=kids, root=v)
            if cert is None:
                return None
            built[v] = cert.resulting_model
    out = built[cap.root]
    if not check_power_hyponormal(out, K, N).holds:
        raise ConsistencyError("cap extension is not power hyponormal")
    return out


# ---------------------------------------------------------------- completely hyperexpansive


def che_condition(m: ShiftModel, k: int) -> Fraction | float | None:
    """C0 = sum_{j=1..k} of the integral of t^-j against the root measure; None if not CHE."""
    rep = check_che(m)
    if not rep.verdict.holds:
        return None
    return extension_condition(rep.root_measure, k)


def che_kstep(m: ShiftModel, k: int, N: int = 64) -> ExtensionCertificate | None:
    if k < 1:
        raise ValueError("k must be positive")
    rep = check_che(m, N)
    if not rep.verdict.holds:
        return None
    tau = rep.root_measure
    c0 = extension_condition(tau, k)
    if c0 >= 1:
        return None
    C = 1 / (1 - c0)
    ext = ca_extend(CASeq(C, tau.scale(C)), k)
    if ext is None or ext.remainder != 0:
        raise ConsistencyError("scaled root sequence did not extend with zero remainder")
    # seq[i] = a_{i-k}; seq[k] = C
    seq = list(ext.prefix) + [C]
    weights = [seq[k - l] / seq[k - l - 1] for l in range(k)]
    model, new = _extended(m, weights)
    rep2 = check_che(model, N)
    if not rep2.verdict.holds or rep2.root_measure != ext.sequence.measure:
        raise ConsistencyError("CHE extension failed re-check")
    cond = {"C0": c0, "C": C, "prefix": seq}
    return ExtensionCertificate("che", k, new, model, cond, N, True, rep2.verdict)


def che_joint(spec: JointSpec, N: int = 64, labels: Sequence[str] | None = None, root: str = "o") -> ExtensionCertificate | None:
    k = spec.k
    taus, Cs, Ds = [], [], []
    for mem in spec.members:
        rep = check_che(mem, N)
        if not rep.verdict.holds:
            return None
        tau = rep.root_measure
        d = extension_condition(tau, k + 1)
        if d >= 1:
            return None
        taus.append(tau)
        Cs.append(extension_condition(tau, 1))
        Ds.append(d)
    g = _pos_weights(len(taus))
    a = [g[j] / (1 - Cs[j]) for j in range(len(g))]
    expected = mix_measures((a[j], inv_t_transform(taus[j])) for j in range(len(a)))
    model = rooted_sum_model(spec.members, a, labels, root)
    rep = check_che(model, N)
    if not rep.verdict.holds or rep.root_measure != expected:
        raise ConsistencyError("joint CHE model failed re-check")
    c0 = extension_condition(expected, k)
    if k >= 1 and c0 >= 1:
        raise ConsistencyError("joint CHE model does not extend")
    norm, _ = model.op_norm_sq(N)
    cond: dict[str, Any] = {"C": Cs, "D": Ds, "a": a, "C0": c0, "op_norm_sq": norm}
    if k >= 1:
        bound = max(max(mem.op_norm_sq(N)[0] for mem in spec.members), Fraction(k + 1, k))
        if norm > bound:
            raise ConsistencyError(f"norm bound failed: {norm} > {bound}")
        cond["norm_bound"] = bound
    new = {c: a[j] for j, c in enumerate(model.tree.children(model.root))}
    return ExtensionCertificate("che", k, new, model, cond, N, True, rep.verdict)


def che_witness_finder(m: ShiftModel, n: int, k: int = 0) -> Ref:
    """A vertex among the n-th children of the root whose restriction extends n + k steps.

    Descends one generation at a time; at depth l the current vertex
    extends l + k steps, so one of its children extends l + k + 1 steps.
    """
    rep = check_che(m)
    if not rep.verdict.holds:
        raise ValueError("model is not completely hyperexpansive")
    if k >= 1 and extension_condition(rep.root_measure, k) >= 1:
        raise ValueError(f"model has no {k}-step CHE extension")
    u: Ref = m.root
    for level in range(1, n + 1):
        for child in m.children(u):
            if extension_condition(rep.measure_at(child), level + k) < 1:
                u = child
                break
        else:
            raise ConsistencyError(f"no child of {m.label(u)!r} extends {level + k} steps")
    return u


def glue_demo() -> ShiftModel:
    """An isometric tree joined by a zero-weight edge to a non-isometric CHE tree."""
    tree = DirectedTree({"w1": "w1", "a": "w1", "w2": "w1", "b": "w2"})
    tails = {
        "a": AlternatingTail(CASeq(Fraction(1))),
        "b": AlternatingTail(CASeq(Fraction(1), AtomicMeasure.delta(1, Fraction(1, 2)))),
    }
    return ShiftModel(tree, {"a": 1, "w2": 0, "b": 2}, tails, allow_zero=True)


def extend(m: ShiftModel, cls: str, k: int, N: int = 64, K: int = 8) -> ExtensionCertificate | None:
    """Dispatch on "powhyp", "che" or "trivial:<class>"."""
    if cls == "powhyp":
        return powhyp_kstep(m, k, N, K)
    if cls == "che":
        return che_kstep(m, k, N)
    if cls.startswith("trivial:"):
        sub = cls.split(":", 1)[1]
        if sub not in TRIVIAL_CLASSES:
            raise ValueError(f"no trivial extension for class {sub!r}")
        if not check_class(m, sub, K, N).holds or m.norm_sq(m.root, 1) == 0:
            return None
        return trivial_extend(m, sub, k, K, N)
    raise ValueError(f"unknown extension class {cls!r}")


__all__ = [
    "ConsistencyError",
    "ExtensionCertificate",
    "JointSpec",
    "che_condition",
    "che_joint",
    "che_kstep",
    "che_witness_finder",
    "extend",
    "glue_demo",
    "isometry_weights",
    "joint_extend_at_depth",
    "powhyp_joint",
    "powhyp_kstep",
    "root_floor",
    "trivial_extend",
]

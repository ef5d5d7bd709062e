"""Worked examples, each returning a report of named assertions."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Any

from .altseq import AtomicMeasure, CASeq, as_q
from .classify import check_che, check_power_hyponormal, check_simple_classes, h_value
from .extend import che_condition, che_kstep, che_witness_finder, glue_demo, joint_extend_at_depth
from .serialize import model_to_json
from .shiftmodel import AlternatingTail, MomentTail, ShiftModel, ray_model, rooted_sum_model
from .tree import DirectedTree
from .verdict import fmt

DEMOS = ("che-nonjoint", "below-fail", "glue", "two-trees")


class Report:
    def __init__(self, name: str):
        self.name = name
        self.items: list[dict[str, Any]] = []
        self.models: dict[str, ShiftModel] = {}
        self.data: dict[str, Any] = {}

    def check(self, what: str, ok: bool, value: Any = None) -> bool:
        item = {"assertion": what, "passed": bool(ok)}
        if value is not None:
            item["value"] = fmt(value)
        self.items.append(item)
        return ok

    @property
    def passed(self) -> bool:
        return all(i["passed"] for i in self.items)

    def to_json(self) -> dict[str, Any]:
        return {"demo": self.name, "passed": self.passed, "assertions": self.items, "data": fmt(self.data)}


# ---------------------------------------------------------------- two-armed star


def che_nonjoint_model(alpha) -> ShiftModel:
    """Two rays from the root: weights n/(n-1) on arm 1 (root weight alpha), 1 on arm 2."""
    alpha = as_q(alpha)
    tree = DirectedTree({"0": "0", "1,1": "0", "2,1": "0"})
    tails = {
        "1,1": AlternatingTail(CASeq(Fraction(1), AtomicMeasure.delta(1, 1))),
        "2,1": AlternatingTail(CASeq(Fraction(1))),
    }
    return ShiftModel(tree, {"1,1": alpha, "2,1": Fraction(1)}, tails)


def che_nonjoint(k: int = 2, alpha="2/5", horizon: int = 64) -> Report:
    alpha = as_q(alpha)
    if k < 1 or not 0 < alpha < Fraction(1, k):
        raise ValueError("need k >= 1 and 0 < alpha < 1/k")
    rep = Report("che-nonjoint")
    m = che_nonjoint_model(alpha)
    rep.models["che-nonjoint"] = m
    rep.check("||S^n e_(1,1)||^2 = n + 1 for n <= horizon",
              all(m.norm_sq("1,1", n) == n + 1 for n in range(horizon + 1)))
    rep.check("||S^n e_0||^2 = alpha n + 1 for n <= horizon",
              all(m.norm_sq("0", n) == alpha * n + 1 for n in range(horizon + 1)))
    che = check_che(m, horizon)
    rep.check("completely hyperexpansive", che.verdict.holds)
    if che.verdict.holds:
        rep.check("root measure is alpha delta_1", che.root_measure == AtomicMeasure.delta(1, alpha), che.root_measure.to_json())
    cert = che_kstep(m, k, horizon)
    rep.check(f"{k}-step CHE extension exists", cert is not None)
    if cert is not None:
        c0 = cert.condition_values["C0"]
        rep.check("C0 = k alpha", c0 == k * alpha, c0)
        rep.data["extension_weights_sq"] = cert.new_weights_sq
    branch = m.restrict("1,1")
    rep.models["branch-1"] = branch
    c0b = che_condition(branch, 1)
    rep.check("branch 1 has no 1-step CHE extension", che_kstep(branch, 1, horizon) is None)
    rep.check("branch 1 condition C0 = 1", c0b == 1, c0b)
    norm, _ = m.op_norm_sq(horizon)
    rep.check("||S||^2 = max(alpha + 1, 2)", norm == max(alpha + 1, Fraction(2)), norm)
    w = che_witness_finder(m, 1, k)
    rep.check("witness finder picks the isometric arm", w == "2,1", w)
    rep.data["h1_root"] = h_value(m, "0", 1)
    return rep


# ---------------------------------------------------------------- bounded below


def below_fail_model(n_members: int, root_weights_sq=None) -> ShiftModel:
    """Rooted sum of rays where member n has every squared weight 1/n^2."""
    members = [ray_model(MomentTail.constant(Fraction(1, n * n))) for n in range(1, n_members + 1)]
    if root_weights_sq is None:
        root_weights_sq = [Fraction(1, n_members)] * n_members
    return rooted_sum_model(members, root_weights_sq)


def below_fail(members: int = 8, trials: int = 20, seed: int = 0) -> Report:
    """For N = 2..members, random root weightings never lift the infimum above 1/N^2."""
    if members < 2:
        raise ValueError("need at least two members")
    rng = random.Random(seed)
    rep = Report("below-fail")
    bounds = []
    for N in range(2, members + 1):
        worst = Fraction(0)
        for t in range(trials):
            ws = [Fraction(1, N)] * N if t == 0 else [Fraction(rng.randint(1, 50), rng.randint(1, 50)) for _ in range(N)]
            inf, _ = below_fail_model(N, ws).inf_norm_sq()
            worst = max(worst, inf)
        bounds.append((N, worst))
        rep.check(f"N={N}: every weighting has inf ||S e_v||^2 <= 1/N^2", worst <= Fraction(1, N * N), worst)
    rep.check("bound decreases strictly in N", all(b[1] > c[1] for b, c in zip(bounds, bounds[1:])))
    rep.models["below-fail"] = below_fail_model(members)
    rep.data["sup_of_inf"] = {str(N): b for N, b in bounds}
    rep.data["infimum"] = bounds[-1][1]
    return rep


# ---------------------------------------------------------------- glue


def glue(kmax: int = 32, horizon: int = 64) -> Report:
    rep = Report("glue")
    m = glue_demo()
    rep.models["glue"] = m
    che = check_che(m, horizon)
    rep.check("completely hyperexpansive", che.verdict.holds)
    rep.check("root measure is zero", che.verdict.holds and che.root_measure.is_zero)
    rep.check(f"CHE k-step extension exists for k = 1..{kmax}",
              all(che_kstep(m, k, horizon) is not None for k in range(1, kmax + 1)))
    iso = check_simple_classes(m, horizon)["isometry"]
    rep.check("not an isometry", iso.fails, iso.witness.to_json() if iso.witness else None)
    rep.check("not proper", not m.is_proper)
    return rep


# ---------------------------------------------------------------- two caps


def two_caps() -> tuple[DirectedTree, DirectedTree]:
    """Two non-isomorphic depth-3 trees whose third generation is m1..m4."""
    a = DirectedTree({"c": "c", "x": "c", "y1": "x", "y2": "x",
                      "m1": "y1", "m2": "y1", "m3": "y2", "m4": "y2"})
    b = DirectedTree({"c": "c", "x1": "c", "x2": "c", "y1": "x1", "y2": "x2",
                      "m1": "y1", "m2": "y1", "m3": "y1", "m4": "y2"})
    return a, b


def random_member(rng: random.Random, allow_bad: bool = False) -> ShiftModel:
    """A ray; moment tails are power hyponormal, alternating ones are not."""
    if allow_bad:
        mass = Fraction(rng.randint(1, 4), rng.randint(2, 8))
        return ray_model(AlternatingTail(CASeq(Fraction(1), AtomicMeasure.delta(Fraction(rng.randint(1, 4), 4), mass))))
    n_atoms = rng.randint(1, 3)
    ss = sorted({Fraction(rng.randint(1, 12), rng.randint(2, 6)) for _ in range(n_atoms)})
    ws = [Fraction(rng.randint(1, 5)) for _ in ss]
    total = sum(ws)
    return ray_model(MomentTail.from_pairs((s, w / total) for s, w in zip(ss, ws)))


def two_trees(sets: int = 1, seed: int = 0, bad_rate: float = 0.2, N: int = 32, K: int = 6) -> Report:
    rng = random.Random(seed)
    rep = Report("two-trees")
    cap_a, cap_b = two_caps()
    outcomes = []
    for s in range(sets):
        bad = rng.random() < bad_rate
        slot = rng.randrange(4) if bad else -1
        members = {f"m{i + 1}": random_member(rng, i == slot) for i in range(4)}
        ra = joint_extend_at_depth(cap_a, members, "powhyp", N, K)
        rb = joint_extend_at_depth(cap_b, members, "powhyp", N, K)
        outcomes.append((ra is not None, rb is not None))
        rep.check(f"set {s}: both caps agree", (ra is None) == (rb is None), "extends" if ra is not None else "no extension")
        if ra is not None and rb is not None:
            rep.check(f"set {s}: both results power hyponormal",
                      check_power_hyponormal(ra, K, N).holds and check_power_hyponormal(rb, K, N).holds)
            if s == 0:
                rep.models["cap-a"], rep.models["cap-b"] = ra, rb
        if s == 0:
            for name, mem in members.items():
                rep.models[name] = mem
    rep.data["successes"] = sum(1 for a, _ in outcomes if a)
    rep.data["failures"] = sum(1 for a, _ in outcomes if not a)
    return rep


def demo_models() -> dict[str, ShiftModel]:
    """One model per demo, for oracle sweeps."""
    a, _ = two_caps()
    rng = random.Random(0)
    members = {f"m{i + 1}": random_member(rng) for i in range(4)}
    return {
        "che-nonjoint": che_nonjoint_model(Fraction(2, 5)),
        "below-fail": below_fail_model(8),
        "glue": glue_demo(),
        "two-trees": joint_extend_at_depth(a, members, "powhyp", 32, 6),
    }


def run_demo(name: str, **params) -> Report:
    if name == "che-nonjoint":
        return che_nonjoint(params.get("k", 2), params.get("alpha", "2/5"))
    if name == "below-fail":
        return below_fail(params.get("members", 8), seed=params.get("seed", 0))
    if name == "glue":
        return glue()
    if name == "two-trees":
        return two_trees(params.get("sets", 1), params.get("seed", 0))
    raise ValueError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")


__all__ = [
    "DEMOS",
    "Report",
    "below_fail",
    "below_fail_model",
    "che_nonjoint",
    "che_nonjoint_model",
    "demo_models",
    "glue",
    "model_to_json",
    "run_demo",
    "two_caps",
    "two_trees",
]

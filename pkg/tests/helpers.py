"""Random model generators shared by the test modules."""

from __future__ import annotations

import random
from fractions import Fraction

from treeshift.altseq import AtomicMeasure, CASeq, measure_moment
from treeshift.shiftmodel import AlternatingTail, MomentTail, ShiftModel, ray_model
from treeshift.tree import DirectedTree

T_GRID = [Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4), Fraction(1)]


def rand_q(rng: random.Random, lo: int = 1, hi: int = 9, den: int = 9) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.randint(1, den))


def rand_measure(rng: random.Random, atoms: int = 3, max_mass: Fraction = Fraction(1), allow_zero: bool = False) -> AtomicMeasure:
    n = rng.randint(0, atoms)
    grid = ([Fraction(0)] if allow_zero else []) + T_GRID
    pairs = [(rng.choice(grid), max_mass * Fraction(rng.randint(1, 8), 8)) for _ in range(n)]
    return AtomicMeasure.from_pairs(pairs)


def rand_caseq(rng: random.Random) -> CASeq:
    return CASeq(1 + Fraction(rng.randint(0, 12), rng.randint(1, 4)), rand_measure(rng))


def rand_alt_tail(rng: random.Random, max_mass: Fraction = Fraction(1)) -> AlternatingTail:
    return AlternatingTail(CASeq(Fraction(1), rand_measure(rng, 2, max_mass)))


def rand_moment_tail(rng: random.Random, atoms: int = 3) -> MomentTail:
    ss = {Fraction(rng.randint(1, 12), rng.randint(2, 6)) for _ in range(rng.randint(1, atoms))}
    ws = {s: Fraction(rng.randint(1, 5)) for s in ss}
    total = sum(ws.values())
    return MomentTail.from_pairs((s, w / total) for s, w in ws.items())


def rand_tree(rng: random.Random, n: int) -> DirectedTree:
    par = {"v0": "v0"}
    for i in range(1, n):
        par[f"v{i}"] = f"v{rng.randrange(i)}"
    return DirectedTree(par)


def rand_model(rng: random.Random, n: int | None = None) -> ShiftModel:
    """Proper leafless model with arbitrary positive weights and mixed tails."""
    tree = rand_tree(rng, n or rng.randint(1, 7))
    w = {v: rand_q(rng) for v in tree if v != tree.root}
    tails = {}
    for v in tree.leaves():
        tails[v] = rand_alt_tail(rng) if rng.random() < 0.5 else rand_moment_tail(rng)
    return ShiftModel(tree, w, tails)


def rand_che_model(rng: random.Random, n: int | None = None, root_slack: bool = True, tries: int = 200):
    """Random CHE model and the measures expected at each core vertex.

    Weights below a core vertex are a positive scaling c of random raw
    weights, chosen so the one-step extension has zero leftover mass; only
    the root may get leftover mass (an atom at 0).
    """
    for _ in range(tries):
        tree = rand_tree(rng, n or rng.randint(1, 6))
        tails = {v: rand_alt_tail(rng, Fraction(1, 2)) for v in tree.leaves()}
        meas: dict[str, AtomicMeasure] = {}
        weights: dict[str, Fraction] = {}
        ok = True
        for v in reversed(tree.vertices):
            if v in tails:
                meas[v] = tails[v].generator.measure
                continue
            kids = tree.children(v)
            raw = {u: rand_q(rng, 1, 5, 5) for u in kids}
            slack = sum((raw[u] * (1 - measure_moment(meas[u], -1)) for u in kids if not meas[u].mass_at(0)), Fraction(0))
            usable = [u for u in kids if not meas[u].mass_at(0)]
            if slack <= 0 or len(usable) != len(kids):
                ok = False
                break
            c = 1 / slack
            if v == tree.root and root_slack and rng.random() < 0.5:
                c *= 1 + Fraction(rng.randint(1, 4), 4)
            for u in kids:
                weights[u] = c * raw[u]
            s = c * sum(raw.values())
            tau = AtomicMeasure.from_pairs((t, weights[u] * m) for u in kids for t, m in meas[u].atoms)
            inv = tau.times_power(-1)
            rem = s - 1 - inv.total_mass
            meas[v] = inv + AtomicMeasure.from_pairs([(0, rem)])
        if ok:
            return ShiftModel(tree, weights, tails), meas
    raise RuntimeError("could not build a CHE model")


def rand_che_member(rng: random.Random, k: int):
    """A CHE model admitting a (k+1)-step extension (D < 1)."""
    from treeshift.extend import che_condition

    while True:
        if rng.random() < 0.4:
            mass = Fraction(rng.randint(1, 8), 8 * (k + 2) * rng.randint(1, 3))
            m = ray_model(AlternatingTail(CASeq(Fraction(1), AtomicMeasure.delta(rng.choice(T_GRID[3:]), mass))))
        else:
            m, _ = rand_che_model(rng, root_slack=False)
        d = che_condition(m, k + 1)
        if d is not None and d < 1:
            return m


def isometric_ray(name: str = "r0") -> ShiftModel:
    return ray_model(AlternatingTail(CASeq(Fraction(1))), name)

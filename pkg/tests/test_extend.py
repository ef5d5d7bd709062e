import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import isometric_ray, rand_che_member, rand_che_model, rand_moment_tail
from treeshift.altseq import AtomicMeasure, CASeq, ZERO, extension_condition
from treeshift.classify import check_che, check_class, check_power_hyponormal, check_simple_classes, h_value
from treeshift.demos import che_nonjoint_model, two_caps
from treeshift.extend import (
    ConsistencyError,
    JointSpec,
    che_condition,
    che_joint,
    che_kstep,
    che_witness_finder,
    extend,
    glue_demo,
    isometry_weights,
    joint_extend_at_depth,
    powhyp_joint,
    powhyp_kstep,
    root_floor,
    trivial_extend,
)
from treeshift.shiftmodel import AlternatingTail, MomentTail, ShiftModel, StructuralError, ray_model
from treeshift.tree import DirectedTree, full_tree, path_tree

seeds = st.integers(0, 10**6)
STAR = che_nonjoint_model(F(2, 5))


def ca_ray(mass, t=1):
    return ray_model(AlternatingTail(CASeq(1, AtomicMeasure.delta(t, mass))))


# ---------------------------------------------------------------- trivial fills


def test_isometry_weights():
    ray = isometry_weights(path_tree(3), tails=["v2"])
    assert set(ray.weights_sq.values()) == {1}
    binary = isometry_weights(full_tree(2, 3), tails=full_tree(2, 3).leaves())
    assert set(binary.weights_sq.values()) == {F(1, 2)}
    assert check_class(binary, "isometry").holds
    with pytest.raises(StructuralError):
        isometry_weights(path_tree(3))


def test_trivial_extend_examples():
    iso = isometry_weights(full_tree(2, 2), tails=full_tree(2, 2).leaves())
    cert = trivial_extend(iso, "isometry", 3)
    assert check_class(cert.resulting_model, "isometry").holds
    two = ray_model(MomentTail.constant(2))
    cert = trivial_extend(two, "expansive", 2)
    assert set(cert.new_weights_sq.values()) == {2}
    assert check_class(cert.resulting_model, "expansive").holds
    mom = ray_model(MomentTail.from_pairs([(F(1, 2), F(1, 2)), (2, F(1, 2))]))
    cert = trivial_extend(mom, "hyponormal", 2)
    assert check_class(cert.resulting_model, "hyponormal").holds
    with pytest.raises(ValueError):
        trivial_extend(STAR, "isometry", 1)
    with pytest.raises(ValueError):
        trivial_extend(iso, "che", 1)


# ---------------------------------------------------------------- power hyponormal


def test_root_floor():
    assert root_floor(F(9, 4), 2) == F(3, 2)
    assert root_floor(F(5, 7), 1) == F(5, 7)
    r = root_floor(F(2), 2)
    assert r * r <= 2 < (r + F(1, 2**32)) ** 2


@given(st.fractions(min_value=F(1, 100), max_value=100, max_denominator=100), st.integers(2, 6))
def test_root_floor_is_tight(x, k):
    r = root_floor(x, k)
    assert r**k <= x
    assert r**k == x or (r + F(1, 2**32)) ** k > x


def test_powhyp_kstep_isometry():
    iso = isometry_weights(full_tree(2, 2), tails=full_tree(2, 2).leaves())
    for k in (1, 3):
        cert = powhyp_kstep(iso, k)
        assert cert.condition_values["theta"] == 1
        assert check_class(cert.resulting_model, "isometry").holds


def test_powhyp_kstep_moment_ray():
    m = ray_model(MomentTail.from_pairs([(F(1, 2), F(1, 2)), (2, F(1, 2))]))
    cert = powhyp_kstep(m, 2)
    assert cert.condition_values["theta"] == F(5, 4)
    assert cert.exact
    ext = cert.resulting_model
    for v in ext.tree:
        for n in range(1, 9):
            assert h_value(ext, v, n) <= 1


@given(seeds, st.integers(1, 3))
@settings(max_examples=25)
def test_powhyp_kstep_bounded_below(seed, k):
    """Lower bound C on ||S e||^2 gives B-sups at most C^-j."""
    m = ray_model(rand_moment_tail(random.Random(seed)))
    c, _ = m.inf_norm_sq()
    cert = powhyp_kstep(m, k, 32, 6)
    assert cert is not None
    for j in range(1, k + 1):
        assert cert.condition_values[f"B_sup[{j}]"] <= c ** -j
    assert check_power_hyponormal(cert.resulting_model, 2 * k + 4, 32).holds


def test_powhyp_kstep_rejects_linear_growth():
    # norms n + 1: log-concave, so not power hyponormal to begin with
    assert powhyp_kstep(ca_ray(1), 1) is None
    with pytest.raises(ValueError):
        powhyp_kstep(STAR, 0)


def test_powhyp_joint_two_isometries():
    cert = powhyp_joint(JointSpec([isometric_ray(), isometric_ray()], 0))
    assert cert.condition_values["a"] == [F(1, 2), F(1, 2)]
    m = cert.resulting_model
    assert h_value(m, m.root, 1) == 1
    assert m.op_norm_sq()[0] == 1
    assert check_class(m, "isometry").holds


def test_powhyp_joint_failing_member():
    assert powhyp_joint(JointSpec([isometric_ray(), ca_ray(F(1, 2))], 1)) is None


def test_joint_spec_validation():
    with pytest.raises(ValueError):
        JointSpec([], 0)
    with pytest.raises(ValueError):
        JointSpec([isometric_ray()], -1)
    leafy = ShiftModel(DirectedTree({"r": "r", "a": "r"}), {"a": 1})
    with pytest.raises(StructuralError):
        JointSpec([leafy], 0)


@given(seeds)
@settings(max_examples=20)
def test_powhyp_joint_random_families(seed):
    rng = random.Random(seed)
    members = [ray_model(rand_moment_tail(rng)) for _ in range(rng.randint(2, 4))]
    k = rng.randint(0, 2)
    cert = powhyp_joint(JointSpec(members, k), 32, 6)
    assert cert is not None
    a, C = cert.condition_values["a"], cert.condition_values["C"]
    assert sum(x * c for x, c in zip(a, C)) == 1
    assert cert.condition_values["op_norm_sq"] == max(m.op_norm_sq()[0] for m in members)


# ---------------------------------------------------------------- completely hyperexpansive


def test_che_kstep_fifth():
    cert = che_kstep(ca_ray(F(1, 5)), 3)
    cv = cert.condition_values
    assert cv["C0"] == F(3, 5) and cv["C"] == F(5, 2)
    assert cert.new_weights_sq == {"r0": F(5, 4), "r0^1": F(4, 3), "r0^2": F(3, 2)}
    m = cert.resulting_model
    assert [m.norm_sq(m.root, n) for n in range(5)] == [1, F(3, 2), 2, F(5, 2), 3]
    assert check_che(m).verdict.holds


def test_che_kstep_examples():
    assert che_kstep(ca_ray(1), 1) is None
    assert che_condition(ca_ray(1), 1) == 1
    cert = che_kstep(STAR, 2)
    assert cert.condition_values["C0"] == F(4, 5)
    assert che_kstep(STAR, 3) is None
    assert che_condition(ray_model(MomentTail.constant(F(1, 2))), 1) is None


@given(seeds, st.integers(1, 5))
def test_che_kstep_iff_condition(seed, k):
    m, _ = rand_che_model(random.Random(seed))
    c0 = che_condition(m, k)
    cert = che_kstep(m, k)
    assert (cert is not None) == (c0 < 1)
    if cert is not None:
        ext = cert.resulting_model
        assert check_che(ext).verdict.holds
        # the old root's norms are the tail of the new root's, scaled by C
        C = cert.condition_values["C"]
        for n in range(6):
            assert ext.norm_sq(ext.root, k + n) == C * m.norm_sq(m.root, n)


def test_che_joint_examples():
    cert = che_joint(JointSpec([isometric_ray(), isometric_ray()], 2))
    assert cert.condition_values["a"] == [F(1, 2), F(1, 2)]
    assert check_class(cert.resulting_model, "isometry").holds
    cert = che_joint(JointSpec([ca_ray(F(1, 8)), ca_ray(F(1, 8))], 1))
    cv = cert.condition_values
    assert cv["C"] == [F(1, 8)] * 2 and cv["D"] == [F(1, 4)] * 2
    assert cv["a"] == [F(4, 7)] * 2
    assert check_che(cert.resulting_model).root_measure == AtomicMeasure.delta(1, F(1, 7))
    assert cv["C0"] == F(1, 7)
    assert che_joint(JointSpec([isometric_ray(), ca_ray(1)], 0)) is None


@given(seeds)
@settings(max_examples=30)
def test_che_joint_random(seed):
    rng = random.Random(seed)
    k = rng.randint(0, 3)
    members = [rand_che_member(rng, k) for _ in range(rng.randint(1, 4))]
    cert = che_joint(JointSpec(members, k))
    assert cert is not None
    a, C = cert.condition_values["a"], cert.condition_values["C"]
    assert sum(x * (1 - c) for x, c in zip(a, C)) == 1


# ---------------------------------------------------------------- caps and witnesses


def test_cap_depth_one_is_rooted_sum():
    cap = DirectedTree({"c": "c", "m1": "c", "m2": "c"})
    members = {"m1": ray_model(MomentTail.constant(2)), "m2": isometric_ray()}
    via_cap = joint_extend_at_depth(cap, members)
    direct = powhyp_joint(JointSpec(list(members.values()), 0), labels=["m1", "m2"], root="c").resulting_model
    assert via_cap == direct


def test_cap_blank_subtree():
    a, _ = two_caps()
    rng = random.Random(5)
    members = {f"m{i}": ray_model(rand_moment_tail(rng)) for i in range(1, 5)}
    full = joint_extend_at_depth(a, members, N=32, K=6)
    members["m4"] = None
    blank = joint_extend_at_depth(a, members, N=32, K=6)
    assert full is not None and blank is not None


def test_cap_errors():
    a, _ = two_caps()
    with pytest.raises(StructuralError):
        joint_extend_at_depth(a, {"m1": isometric_ray()})
    uneven = DirectedTree({"c": "c", "x": "c", "y": "x", "z": "c"})
    with pytest.raises(StructuralError):
        joint_extend_at_depth(uneven, {"y": isometric_ray(), "z": isometric_ray()})
    with pytest.raises(ValueError):
        joint_extend_at_depth(a, {}, cls="che")


def test_cap_failure_propagates():
    a, b = two_caps()
    members = {f"m{i}": isometric_ray() for i in range(1, 5)}
    members["m2"] = ca_ray(F(1, 2))
    assert joint_extend_at_depth(a, members, N=32, K=6) is None
    assert joint_extend_at_depth(b, members, N=32, K=6) is None


def test_witness_finder_examples():
    assert che_witness_finder(STAR, 1, 2) == "2,1"
    iso = isometry_weights(full_tree(2, 2), tails=full_tree(2, 2).leaves())
    for n in range(1, 5):
        assert iso.depth(che_witness_finder(iso, n, 3)) == n
    with pytest.raises(ValueError):
        che_witness_finder(STAR, 1, 3)
    with pytest.raises(ValueError):
        che_witness_finder(ray_model(MomentTail.constant(F(1, 2))), 1)


def test_witness_finder_thousand_trials():
    rng = random.Random(2024)
    done = 0
    while done < 1000:
        m, _ = rand_che_model(rng)
        k = rng.randint(0, 3)
        if k and che_condition(m, k) >= 1:
            continue
        n = rng.randint(1, 6)
        u = che_witness_finder(m, n, k)
        assert m.depth(u) == n
        rep = check_che(m.restrict(u))
        assert extension_condition(rep.root_measure, n + k) < 1
        done += 1


def test_glue_demo():
    m = glue_demo()
    rep = check_che(m)
    assert rep.verdict.holds and rep.root_measure == ZERO
    assert not m.is_proper
    iso = check_simple_classes(m)["isometry"]
    assert iso.fails and iso.witness.vertex == "w2" and iso.witness.value == 2
    assert all(che_kstep(m, k) is not None for k in (1, 5, 32))


def test_extend_dispatch():
    assert extend(STAR, "che", 2).condition_values["C0"] == F(4, 5)
    assert extend(STAR, "trivial:isometry", 1) is None
    assert extend(isometric_ray(), "trivial:isometry", 4) is not None
    assert extend(isometric_ray(), "powhyp", 2) is not None
    with pytest.raises(ValueError):
        extend(STAR, "trivial:che", 1)
    with pytest.raises(ValueError):
        extend(STAR, "subnormal", 1)


def test_consistency_error_is_assertion():
    assert issubclass(ConsistencyError, AssertionError)

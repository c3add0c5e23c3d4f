"""Hardness-construction tests: validation, reductions, margins, cover search."""

import random
from importlib import resources
from itertools import combinations

import pytest

from relctl.election import Election, Rule, parse_election, verify_deletion
from relctl.reduction import (
    MarginAudit,
    OneInThreeInstance,
    ReductionError,
    X4CInstance,
    audit_margins,
    build_control_instance,
    find_exact_cover,
    gen_1in3,
    gen_x4c,
    reduce_1in3_to_x4c,
    scan_deletions_up_to,
    validate_1in3,
    validate_x4c,
)


def swap_elements(inst: X4CInstance, rng: random.Random, swaps: int) -> X4CInstance:
    """Exchange elements between sets; keeps sizes and occurrence counts."""
    sets = [set(s) for s in inst.sets]
    for _ in range(swaps):
        a, b = rng.sample(range(len(sets)), 2)
        xs = sorted(sets[a] - sets[b])
        ys = sorted(sets[b] - sets[a])
        if not xs or not ys:
            continue
        x, y = rng.choice(xs), rng.choice(ys)
        sets[a].remove(x)
        sets[a].add(y)
        sets[b].remove(y)
        sets[b].add(x)
    return X4CInstance.from_lists(inst.n, sets)


def brute_cover(inst: X4CInstance):
    k = len(inst.sets)
    full = frozenset(range(1, inst.n + 1))
    for combo in combinations(range(k), inst.n // 4):
        union = frozenset().union(*(inst.sets[i] for i in combo))
        if union == full:
            return tuple(i + 1 for i in combo)
    return None


# -- instance validation --------------------------------------------------------


def test_validate_minimal_instance():
    inst = X4CInstance.from_lists(4, [[1, 2, 3, 4]] * 3)
    assert validate_x4c(inst) == []


def test_validate_catches_each_violation():
    bad = X4CInstance.from_lists(4, [[1, 2, 3], [1, 2, 3, 4], [1, 2, 3, 4]])
    msgs = validate_x4c(bad)
    assert any("3 elements" in m for m in msgs)
    assert any("occurs in" in m for m in msgs)
    assert validate_x4c(X4CInstance.from_lists(6, [[1, 2, 3, 4]] * 3))
    assert validate_x4c(X4CInstance.from_lists(4, [[1, 2, 3, 4]] * 2))
    assert any(
        "outside" in m
        for m in validate_x4c(
            X4CInstance.from_lists(4, [[1, 2, 3, 9], [1, 2, 3, 4], [1, 2, 4, 9]])
        )
    )


def test_x4c_json_roundtrip():
    inst = gen_x4c(16, seed=1)
    assert X4CInstance.from_json(inst.to_json()) == inst
    with pytest.raises(ReductionError):
        X4CInstance.from_json({"n": 4})
    with pytest.raises(ReductionError):
        X4CInstance.from_json({"n": "x", "sets": []})


def test_1in3_json_roundtrip():
    inst = gen_1in3(12, seed=2)
    assert OneInThreeInstance.from_json(inst.to_json()) == inst
    with pytest.raises(ReductionError):
        OneInThreeInstance.from_json({"vars": 1, "clauses": [[1, 2]]})


# -- generators and the 1-in-3 reduction ------------------------------------------


def test_gen_x4c_valid_and_coverable():
    for n in (8, 12, 16, 20, 24):
        inst = gen_x4c(n, seed=n)
        assert validate_x4c(inst) == []
        cover = find_exact_cover(inst)
        assert cover is not None and len(cover) == n // 4
    assert gen_x4c(16, seed=5) == gen_x4c(16, seed=5)
    with pytest.raises(ReductionError):
        gen_x4c(10)


def test_gen_1in3_valid():
    for n in (8, 12, 16):
        inst = gen_1in3(n, seed=n)
        assert validate_1in3(inst) == []
        assert inst.num_vars == 3 * n // 4


def test_reduce_1in3_preserves_structure():
    rng = random.Random(12)
    for _ in range(10):
        n = rng.choice((8, 12, 16))
        seed = rng.randrange(1000)
        one = gen_1in3(n, seed=seed)
        x4c = reduce_1in3_to_x4c(one)
        assert validate_x4c(x4c) == []
        assert x4c.n == len(one.clauses)
        # the generated instance is the dual of a generated X4C instance,
        # so the reduction reconstructs it exactly
        assert x4c == gen_x4c(n, seed=seed)


def test_reduce_1in3_satisfiable_gives_cover():
    for n in (8, 12, 16):
        x4c = reduce_1in3_to_x4c(gen_1in3(n, seed=7))
        assert find_exact_cover(x4c) is not None


def test_reduce_1in3_rejects_invalid():
    bad = OneInThreeInstance(2, ((1, 2, 2),))
    assert validate_1in3(bad)
    with pytest.raises(ReductionError):
        reduce_1in3_to_x4c(bad)


# -- exact cover search ------------------------------------------------------------


def test_find_exact_cover_matches_brute_force():
    rng = random.Random(13)
    negatives = 0
    for _ in range(40):
        n = rng.choice((8, 12))
        inst = swap_elements(gen_x4c(n, seed=rng.randrange(1000)), rng, swaps=8)
        assert validate_x4c(inst) == []
        got = find_exact_cover(inst)
        expect = brute_cover(inst)
        if expect is None:
            negatives += 1
            assert got is None
        else:
            assert got is not None
            chosen = [inst.sets[i - 1] for i in got]
            assert len(got) == n // 4
            assert frozenset().union(*chosen) == frozenset(range(1, n + 1))
            assert sum(len(s) for s in chosen) == n  # pairwise disjoint
    assert negatives >= 3  # the sample genuinely exercises the None branch


# -- election construction ----------------------------------------------------------


def test_build_control_instance_shape_n16():
    inst = gen_x4c(16, seed=0)
    e, layout = build_control_instance(inst)
    assert e.n == 77 and e.m == 33
    assert layout.t == 2 and layout.budget == 4
    assert layout.target == "astar"
    assert len(layout.tags) == 77
    assert layout.tags[:2] == ("group1(i=1)", "group1(i=1)")
    assert layout.tags[-1] == "group4"
    assert e.alternatives[0] == "astar"
    assert e.alternatives[1:17] == tuple(f"s{i}" for i in range(1, 17))
    assert e.alternatives[17:] == tuple(f"b{i}" for i in range(1, 17))


def test_build_control_instance_voter_counts():
    for n in (16, 20, 24):
        inst = gen_x4c(n, seed=n)
        e, layout = build_control_instance(inst)
        t = n // 4 - 2
        assert layout.t == t
        assert e.n == 2 * n * t + 3 * n // 4 + 1
        assert e.m == 2 * n + 1


def test_group_orders():
    inst = gen_x4c(16, seed=0)
    e, layout = build_control_instance(inst)
    n, t = 16, 2
    # group 4 ranks astar first, then all s ascending, then all b ascending
    g4 = e.voters[-1].ranking
    assert g4[0] == "astar"
    assert list(g4[1:17]) == [f"s{i}" for i in range(1, 17)]
    assert list(g4[17:]) == [f"b{i}" for i in range(1, 17)]
    # group 1 for i=3: s-block without s3, then s3, b3, b-block without b3, astar
    v = e.voters[(3 - 1) * t].ranking
    assert list(v[:15]) == [f"s{j}" for j in range(1, 17) if j != 3]
    assert v[15] == "s3" and v[16] == "b3" and v[-1] == "astar"
    # group 2 for i=3 mirrors it around astar
    v = e.voters[n * t + (3 - 1) * t].ranking
    assert list(v[:15]) == [f"b{j}" for j in range(1, 17) if j != 3]
    assert v[15] == "astar" and v[16] == "s3" and v[17] == "b3"
    # group 3 of the first set: excluded b's, astar, all s, member b's ascending
    members = sorted(inst.sets[0])
    v = e.voters[layout.group3_voter(1) - 1].ranking
    assert list(v[-4:]) == [f"b{j}" for j in members]
    assert v[12] == "astar"
    assert list(v[13:29]) == [f"s{i}" for i in range(1, 17)]


def test_build_control_instance_preconditions():
    with pytest.raises(ReductionError):
        build_control_instance(gen_x4c(8, seed=0))
    with pytest.raises(ReductionError):
        build_control_instance(X4CInstance.from_lists(16, [[1, 2, 3, 4]] * 12))


def test_layout_json():
    inst = gen_x4c(16, seed=0)
    _, layout = build_control_instance(inst)
    doc = layout.to_json()
    assert doc["target"] == "astar" and doc["budget"] == 4
    assert len(doc["voter_tags"]) == 77
    assert doc["alternatives"][0] == "astar"


# -- margin audit ------------------------------------------------------------------


def test_audit_margins_exact_values():
    for n in (16, 20, 24):
        inst = gen_x4c(n, seed=n + 1)
        e, layout = build_control_instance(inst)
        audit = audit_margins(e, layout)
        t = n // 4 - 2
        assert audit.ok
        assert audit.expected == {
            "margin(b_i, astar)": 2 * (n - 1) * t + 3 * n // 4 - 7,
            "margin(astar, s_i)": 3 * n // 4 + 1,
            "margin(b_i, s_j)": 3 * n // 4 - 7,
            "margin(b_i, s_i)": n // 4 - 3,
        }
        assert audit.weaker_astar_bound == n // 4 + 1
        assert audit.weaker_astar_bound_met
    assert audit_margins(*build_control_instance(gen_x4c(16, seed=9))).expected[
        "margin(b_i, astar)"
    ] == 65


def test_audit_flags_a_corrupted_election():
    inst = gen_x4c(16, seed=0)
    e, layout = build_control_instance(inst)
    from relctl.election import VoterOrder

    voters = list(e.voters)
    voters[0] = VoterOrder.from_ranking(tuple(reversed(voters[0].ranking)))
    corrupted = Election(e.alternatives, tuple(voters))
    audit = audit_margins(corrupted, layout)
    assert not audit.ok and audit.deviations


# -- ground truth: cover deletions and the small-deletion scan -----------------------


def test_cover_deletion_makes_astar_uncovered():
    inst = gen_x4c(16, seed=0)
    e, layout = build_control_instance(inst)
    cover = find_exact_cover(inst)
    voters = [layout.group3_voter(i) for i in cover]
    assert verify_deletion(e, voters, "astar", Rule.UNCOVERED)
    assert not verify_deletion(e, [], "astar", Rule.UNCOVERED)


def test_no_small_deletion_helps_astar():
    inst = gen_x4c(16, seed=0)
    e, _ = build_control_instance(inst)
    assert scan_deletions_up_to(e, "astar", Rule.UNCOVERED, 3) == []


def test_scan_agrees_with_known_example_counts():
    text = (
        resources.files("relctl.data").joinpath("sample13.elec").read_text("utf-8")
    )
    e = parse_election(text)
    assert scan_deletions_up_to(e, "g", Rule.UNCOVERED, 4) == []
    assert len(scan_deletions_up_to(e, "g", Rule.UNCOVERED, 5)) == 15
    assert scan_deletions_up_to(e, "b", Rule.CONDORCET, 7) == []
    assert scan_deletions_up_to(e, "a", Rule.CONDORCET, 0) == [()]

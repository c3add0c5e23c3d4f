"""Control-by-deleting-voters solver tests, cross-checked against the oracle."""

import random
from importlib import resources
from itertools import permutations, product as iproduct

import pytest

from relctl.carrier import UNIT, Powerset
from relctl.election import (
    Election,
    Rule,
    VoterOrder,
    build_P,
    covering,
    dominance,
    parse_election,
    verify_deletion,
)
from relctl.control import (
    analyze,
    cand_condorcet,
    cand_uncovered,
    maximal_solutions,
    relativized_covering,
    relativized_dominance,
    solve,
    summarize,
)
from relctl.oracle import oracle_dominance_on, oracle_solve
from relctl.relalg import RelAlgError


def sample13() -> Election:
    text = (
        resources.files("relctl.data").joinpath("sample13.elec").read_text("utf-8")
    )
    return parse_election(text)


def random_election(rng, n, m) -> Election:
    alts = tuple("abcdefghij"[:m])
    return Election(
        alts, tuple(VoterOrder.from_ranking(rng.sample(alts, m)) for _ in range(n))
    )


def row_at(R, x_index):
    """Row of a powerset-source relation at one subset, as a column vector."""
    pt = R.ctx.point_of(R.source, x_index)
    return (pt.T @ R).T


# -- relativized dominance -------------------------------------------------------


def test_relativized_row_at_full_set_is_plain_dominance():
    e = sample13()
    P = build_P(e)
    R = relativized_dominance(P)
    C = dominance(P).C
    assert row_at(R, (1 << 13) - 1) == C.vec()


def test_relativized_row_at_empty_set_is_empty():
    e = sample13()
    R = relativized_dominance(build_P(e))
    assert row_at(R, 0).is_empty()


def test_relativized_dominance_exhaustive_tiny():
    orders = list(permutations("abc"))
    alts = tuple("abc")
    for n in range(0, 3):
        for profile in iproduct(orders, repeat=n):
            e = Election(alts, tuple(VoterOrder.from_ranking(p) for p in profile))
            R = relativized_dominance(build_P(e))
            for x_mask in range(1 << n):
                X = [i + 1 for i in range(n) if (x_mask >> i) & 1]
                _, dom = oracle_dominance_on(e, X)
                for a in range(3):
                    for b in range(3):
                        assert R.holds(x_mask, a * 3 + b) == dom[a][b]


def test_relativized_dominance_random():
    rng = random.Random(7)
    for _ in range(12):
        n, m = rng.randint(3, 5), rng.randint(2, 4)
        e = random_election(rng, n, m)
        R = relativized_dominance(build_P(e))
        for x_mask in range(1 << n):
            X = [i + 1 for i in range(n) if (x_mask >> i) & 1]
            _, dom = oracle_dominance_on(e, X)
            for a in range(m):
                for b in range(m):
                    assert R.holds(x_mask, a * m + b) == dom[a][b]


# -- relativized covering --------------------------------------------------------


def test_relativized_covering_contained_and_agrees_at_full_set():
    rng = random.Random(8)
    for _ in range(50):
        n, m = rng.randint(0, 6), rng.randint(1, 4)
        e = random_election(rng, n, m)
        P = build_P(e)
        R = relativized_dominance(P)
        U = relativized_covering(R)
        assert U.is_incl(R)
        G = covering(dominance(P).C)
        assert row_at(U, (1 << n) - 1) == G.vec()


def test_relativized_covering_rejects_non_square_pairs():
    e = sample13()
    P = build_P(e)  # N <-> A*A but not of the expected shape? it is; use P.T
    with pytest.raises(RelAlgError):
        relativized_covering(P.T)


# -- candidate vectors and maximal solutions ---------------------------------------


def test_cand_condorcet_running_example():
    art = analyze(sample13(), "a", Rule.CONDORCET)
    # keeping everyone works for the current winner, as does dropping everyone
    # but any single voter block that keeps a ahead; spot-check the extremes
    assert art.cand.holds((1 << 13) - 1, 0)
    assert not art.cand.holds(0, 0)
    assert art.sol.is_point()
    assert art.U is None


def test_cand_uncovered_row_zero_when_no_voters_kept():
    # with no voters every alternative is uncovered, so the empty set is
    # always a candidate for the uncovered rule
    art = analyze(sample13(), "d", Rule.UNCOVERED)
    assert art.cand.holds(0, 0)


def test_maximal_solutions_vs_popcount():
    from relctl.relalg import Context

    ctx = Context()
    rng = random.Random(9)
    for trial in range(40):
        m = rng.randint(0, 5)
        members = [x for x in range(1 << m) if rng.random() < 0.4]
        b = ctx.base(f"M{trial}_{m}", m)
        v = ctx.from_pairs(Powerset(b), UNIT, [(x, 0) for x in members])
        best = max((bin(x).count("1") for x in members), default=None)
        expect = sorted(x for x in members if bin(x).count("1") == best)
        got = sorted(i for i, _ in maximal_solutions(v).entries())
        assert got == expect


def test_maximal_solutions_rejects_non_powerset():
    e = sample13()
    P = build_P(e)
    with pytest.raises(RelAlgError):
        maximal_solutions(P)


# -- solve: frozen running-example table -------------------------------------------


def test_solve_condorcet_running_example_table():
    e = sample13()
    expect = {
        "a": (0, 1),
        "b": (8, 45),
        "h": (6, 84),
    }
    for t in "abcdefgh":
        res = solve(e, t, Rule.CONDORCET)
        if t in expect:
            assert res.feasible, t
            assert (res.min_deletions, res.num_optimal) == expect[t], t
        else:
            assert not res.feasible, t
            assert res.min_deletions is None and res.num_optimal == 0


def test_solve_uncovered_running_example_table():
    e = sample13()
    expect = {
        "a": (0, 1),
        "b": (7, 120),
        "c": (13, 1),
        "d": (13, 1),
        "e": (5, 111),
        "f": (5, 111),
        "g": (5, 15),
        "h": (5, 126),
    }
    for t in "abcdefgh":
        res = solve(e, t, Rule.UNCOVERED)
        assert res.feasible, t
        assert (res.min_deletions, res.num_optimal) == expect[t], t


def test_solve_b_condorcet_solutions_verify_and_match_oracle():
    e = sample13()
    res = solve(e, "b", Rule.CONDORCET)
    sols = list(res.solutions)
    assert len(sols) == 45
    for keep, delete in sols:
        assert len(delete) == 8
        assert verify_deletion(e, delete, "b", Rule.CONDORCET)
    assert ((7, 8, 9, 12, 13), (1, 2, 3, 4, 5, 6, 10, 11)) in sols
    oracle = list(oracle_solve(e, "b", Rule.CONDORCET).solutions)
    assert sols == oracle


def test_solve_e_uncovered_contains_known_deletion():
    e = sample13()
    res = solve(e, "e", Rule.UNCOVERED)
    sols = list(res.solutions)
    assert len(sols) == 111
    keep = (3, 7, 8, 9, 10, 11, 12, 13)
    delete = (1, 2, 4, 5, 6)
    assert (keep, delete) in sols
    for k, d in sols:
        assert verify_deletion(e, d, "e", Rule.UNCOVERED)


def test_solve_condorcet_target_c_infeasible_cand_empty():
    art = analyze(sample13(), "c", Rule.CONDORCET)
    assert art.cand.is_empty()
    assert art.sol.is_empty()


# -- solve vs oracle on random elections -------------------------------------------


def test_solve_matches_oracle_random_small():
    rng = random.Random(10)
    for _ in range(20):
        n, m = rng.randint(0, 7), rng.randint(1, 5)
        e = random_election(rng, n, m)
        target = rng.choice(e.alternatives)
        for rule in Rule:
            sym = solve(e, target, rule)
            ora = oracle_solve(e, target, rule)
            assert sym.feasible == ora.feasible
            assert sym.min_deletions == ora.min_deletions
            assert sym.num_optimal == ora.num_optimal
            assert list(sym.solutions) == list(ora.solutions)


def test_solve_no_voters():
    e = parse_election("alternatives: a b\n")
    res = solve(e, "a", Rule.CONDORCET)
    assert not res.feasible
    res = solve(e, "a", Rule.UNCOVERED)
    assert res.feasible and res.min_deletions == 0
    assert list(res.solutions) == [((), ())]


def test_solve_single_alternative():
    e = parse_election("alternatives: a\na\na\n")
    res = solve(e, "a", Rule.CONDORCET)
    assert res.feasible and res.min_deletions == 0 and res.num_optimal == 1
    assert next(iter(res.solutions)) == ((1, 2), ())


def test_summarize_matches_solve():
    e = parse_election("alternatives: a b c\n3: a b c\n2: b c a\n2: c a b\n")
    for target, rule in (("a", Rule.CONDORCET), ("b", Rule.UNCOVERED), ("b", Rule.CONDORCET)):
        via = summarize(analyze(e, target, rule).sol, target, rule, e.n)
        ref = solve(e, target, rule)
        assert (via.feasible, via.min_deletions, via.num_optimal) == (
            ref.feasible,
            ref.min_deletions,
            ref.num_optimal,
        )
        assert list(via.solutions) == list(ref.solutions)


# -- result serialization -----------------------------------------------------------


def test_result_json_truncation():
    e = sample13()
    doc = solve(e, "g", Rule.UNCOVERED).to_json(limit=10)
    assert doc["feasible"] is True
    assert doc["min_deletions"] == 5
    assert doc["num_optimal"] == "15"
    assert len(doc["solutions"]) == 10
    assert doc["truncated"] is True
    doc = solve(e, "g", Rule.UNCOVERED).to_json(limit=None)
    assert len(doc["solutions"]) == 15
    assert doc["truncated"] is False
    assert doc["solutions"][0]["keep"] + doc["solutions"][0]["delete"]


def test_result_json_infeasible():
    doc = solve(sample13(), "c", Rule.CONDORCET).to_json()
    assert doc == {
        "target": "c",
        "rule": "condorcet",
        "feasible": False,
        "min_deletions": None,
        "num_optimal": "0",
        "solutions": [],
        "truncated": False,
    }

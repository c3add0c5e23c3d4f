"""Executable hardness constructions around exact cover by 4-sets.

X4C instances (4-element sets over {1..n}, every element in exactly three
sets) reduce to constructive control by deleting voters: an election over
one designated alternative astar plus paired alternatives s_i/b_i, in which
astar can be made uncovered by deleting n/4 voters exactly when the
instance has an exact cover. Also: the matching reduction from 1-in-3
satisfiability, a margin audit of the constructed election, a DFS exact
cover search, and a direct scan over small deletion sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional

import numpy as np

from .election import Election, Rule, VoterOrder
from .oracle import preference_masks


class ReductionError(Exception):
    """Invalid instance or unmet size precondition."""


@dataclass(frozen=True)
class X4CInstance:
    n: int
    sets: tuple[frozenset[int], ...]

    @staticmethod
    def from_lists(n: int, sets: Iterable[Iterable[int]]) -> "X4CInstance":
        return X4CInstance(n, tuple(frozenset(s) for s in sets))

    def to_json(self) -> dict:
        return {"n": self.n, "sets": [sorted(s) for s in self.sets]}

    @staticmethod
    def from_json(doc: dict) -> "X4CInstance":
        try:
            return X4CInstance.from_lists(int(doc["n"]), doc["sets"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ReductionError(f"malformed X4C document: {exc}") from None


@dataclass(frozen=True)
class OneInThreeInstance:
    num_vars: int
    clauses: tuple[tuple[int, int, int], ...]

    def to_json(self) -> dict:
        return {"vars": self.num_vars, "clauses": [list(c) for c in self.clauses]}

    @staticmethod
    def from_json(doc: dict) -> "OneInThreeInstance":
        try:
            clauses = tuple(
                (int(a), int(b), int(c)) for a, b, c in doc["clauses"]
            )
            return OneInThreeInstance(int(doc["vars"]), clauses)
        except (KeyError, TypeError, ValueError) as exc:
            raise ReductionError(f"malformed 1-in-3 document: {exc}") from None


def validate_x4c(inst: X4CInstance) -> list[str]:
    """All invariant violations, as messages; an empty list means valid."""
    out = []
    n = inst.n
    if n <= 0 or n % 4 != 0:
        out.append(f"ground-set size {n} is not a positive multiple of 4")
    for idx, s in enumerate(inst.sets, start=1):
        if len(s) != 4:
            out.append(f"set {idx} has {len(s)} elements, expected 4")
        stray = [j for j in s if not 1 <= j <= n]
        if stray:
            out.append(f"set {idx} contains elements outside 1..{n}: {sorted(stray)}")
    if len(inst.sets) != 3 * n // 4:
        out.append(f"{len(inst.sets)} sets, expected 3n/4 = {3 * n // 4}")
    occurrences = {j: 0 for j in range(1, n + 1)}
    for s in inst.sets:
        for j in s:
            if j in occurrences:
                occurrences[j] += 1
    bad = {j: c for j, c in occurrences.items() if c != 3}
    for j, c in sorted(bad.items()):
        out.append(f"element {j} occurs in {c} sets, expected 3")
    return out


def validate_1in3(inst: OneInThreeInstance) -> list[str]:
    out = []
    v = inst.num_vars
    for idx, clause in enumerate(inst.clauses, start=1):
        if len(set(clause)) != 3:
            out.append(f"clause {idx} does not have 3 distinct variables")
        stray = [x for x in clause if not 1 <= x <= v]
        if stray:
            out.append(f"clause {idx} uses variables outside 1..{v}: {stray}")
    counts = {i: 0 for i in range(1, v + 1)}
    for clause in inst.clauses:
        for x in clause:
            if x in counts:
                counts[x] += 1
    for i, c in sorted(counts.items()):
        if c != 4:
            out.append(f"variable {i} occurs in {c} clauses, expected 4")
    if 4 * v != 3 * len(inst.clauses):
        out.append(
            f"{v} variables with {len(inst.clauses)} clauses; "
            "expected vars = 3/4 * clauses"
        )
    return out


def reduce_1in3_to_x4c(inst: OneInThreeInstance) -> X4CInstance:
    """Clause j becomes ground element j; S_i collects the clauses using x_i."""
    problems = validate_1in3(inst)
    if problems:
        raise ReductionError("; ".join(problems))
    sets = [
        frozenset(
            j for j, clause in enumerate(inst.clauses, start=1) if i in clause
        )
        for i in range(1, inst.num_vars + 1)
    ]
    return X4CInstance(len(inst.clauses), tuple(sets))


def gen_x4c(n: int, seed: int = 0) -> X4CInstance:
    """A random valid instance: three independent partitions into 4-blocks.

    Always has an exact cover (any one of the partitions).
    """
    if n <= 0 or n % 4 != 0:
        raise ReductionError(f"ground-set size {n} must be a positive multiple of 4")
    import random

    rng = random.Random(seed)
    sets = []
    for _ in range(3):
        elements = list(range(1, n + 1))
        rng.shuffle(elements)
        sets.extend(
            frozenset(elements[i : i + 4]) for i in range(0, n, 4)
        )
    return X4CInstance(n, tuple(sets))


def gen_1in3(num_clauses: int, seed: int = 0) -> OneInThreeInstance:
    """A random valid 1-in-3 instance, as the dual of a generated X4C one."""
    x4c = gen_x4c(num_clauses, seed)
    clauses = []
    for j in range(1, num_clauses + 1):
        members = [i for i, s in enumerate(x4c.sets, start=1) if j in s]
        clauses.append(tuple(members))
    return OneInThreeInstance(len(x4c.sets), tuple(clauses))


def find_exact_cover(inst: X4CInstance) -> Optional[tuple[int, ...]]:
    """Some exact cover as sorted 1-based set indices, or None.

    DFS branching on the uncovered element with the fewest usable sets.
    """
    containing: dict[int, list[int]] = {j: [] for j in range(1, inst.n + 1)}
    for idx, s in enumerate(inst.sets):
        for j in s:
            if j in containing:
                containing[j].append(idx)

    chosen: list[int] = []
    covered: set[int] = set()

    def usable(j: int) -> list[int]:
        return [idx for idx in containing[j] if not (inst.sets[idx] & covered)]

    def search() -> bool:
        if len(covered) == inst.n:
            return True
        j = min(
            (j for j in range(1, inst.n + 1) if j not in covered),
            key=lambda j: len(usable(j)),
        )
        for idx in usable(j):
            chosen.append(idx)
            covered.update(inst.sets[idx])
            if search():
                return True
            covered.difference_update(inst.sets[idx])
            chosen.pop()
        return False

    if search():
        return tuple(sorted(idx + 1 for idx in chosen))
    return None


# -- the election construction ------------------------------------------------------


@dataclass(frozen=True)
class ReductionLayout:
    n: int
    t: int
    target: str
    budget: int
    alternatives: tuple[str, ...]
    tags: tuple[str, ...]  # tags[v-1] names the group of voter v

    def group3_voter(self, set_index: int) -> int:
        """Voter number of the group-3 ballot for the given 1-based set."""
        return 2 * self.n * self.t + set_index

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "budget": self.budget,
            "n": self.n,
            "t": self.t,
            "alternatives": list(self.alternatives),
            "voter_tags": list(self.tags),
        }


def build_control_instance(inst: X4CInstance) -> tuple[Election, ReductionLayout]:
    """The control election for an X4C instance: can astar be made uncovered
    by deleting at most n/4 voters?"""
    problems = validate_x4c(inst)
    if problems:
        raise ReductionError("; ".join(problems))
    n = inst.n
    if n < 16:
        raise ReductionError(f"ground-set size {n} below the supported minimum 16")
    t = n // 4 - 2
    astar = "astar"
    s = [f"s{i}" for i in range(1, n + 1)]  # s[i-1] pairs with element i
    b = [f"b{i}" for i in range(1, n + 1)]
    alternatives = (astar, *s, *b)

    voters: list[VoterOrder] = []
    tags: list[str] = []

    def add(order: list[str], tag: str, copies: int = 1) -> None:
        vo = VoterOrder.from_ranking(order)
        for _ in range(copies):
            voters.append(vo)
            tags.append(tag)

    for i in range(1, n + 1):
        s_not_i = [s[j - 1] for j in range(1, n + 1) if j != i]
        b_not_i = [b[j - 1] for j in range(1, n + 1) if j != i]
        add(
            s_not_i + [s[i - 1], b[i - 1]] + b_not_i + [astar],
            f"group1(i={i})",
            copies=t,
        )
    for i in range(1, n + 1):
        s_not_i = [s[j - 1] for j in range(1, n + 1) if j != i]
        b_not_i = [b[j - 1] for j in range(1, n + 1) if j != i]
        add(
            b_not_i + [astar, s[i - 1], b[i - 1]] + s_not_i,
            f"group2(i={i})",
            copies=t,
        )
    for idx, cover_set in enumerate(inst.sets, start=1):
        b_out = [b[j - 1] for j in range(1, n + 1) if j not in cover_set]
        b_in = [b[j - 1] for j in range(1, n + 1) if j in cover_set]
        add(b_out + [astar] + s + b_in, f"group3(set={idx})")
    add([astar] + s + b, "group4")

    layout = ReductionLayout(
        n, t, astar, n // 4, alternatives, tuple(tags)
    )
    return Election(alternatives, tuple(voters)), layout


@dataclass(frozen=True)
class MarginAudit:
    """Pairwise-margin check of a constructed election against the four
    closed forms it must satisfy."""

    n: int
    t: int
    expected: dict[str, int]
    deviations: tuple[str, ...]
    weaker_astar_bound: int  # the alternative published threshold n/4 + 1
    weaker_astar_bound_met: bool

    @property
    def ok(self) -> bool:
        return not self.deviations

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "t": self.t,
            "expected": dict(self.expected),
            "deviations": list(self.deviations),
            "weaker_astar_bound": self.weaker_astar_bound,
            "weaker_astar_bound_met": self.weaker_astar_bound_met,
            "ok": self.ok,
        }


def audit_margins(e: Election, layout: ReductionLayout) -> MarginAudit:
    n, t = layout.n, layout.t
    expected = {
        "margin(b_i, astar)": 2 * (n - 1) * t + 3 * n // 4 - 7,
        "margin(astar, s_i)": 3 * n // 4 + 1,
        "margin(b_i, s_j)": 3 * n // 4 - 7,
        "margin(b_i, s_i)": n // 4 - 3,
    }
    idx = {name: k for k, name in enumerate(e.alternatives)}
    masks = preference_masks(e)
    full = (1 << e.n) - 1

    def margin(x: str, y: str) -> int:
        a, c = idx[x], idx[y]
        return (masks[a][c] & full).bit_count() - (masks[c][a] & full).bit_count()

    deviations = []
    weaker_met = True
    for i in range(1, n + 1):
        got = margin(f"b{i}", "astar")
        if got != expected["margin(b_i, astar)"]:
            deviations.append(f"margin(b{i}, astar) = {got}")
        got = margin("astar", f"s{i}")
        if got != expected["margin(astar, s_i)"]:
            deviations.append(f"margin(astar, s{i}) = {got}")
        if got < n // 4 + 1:
            weaker_met = False
        got = margin(f"b{i}", f"s{i}")
        if got != expected["margin(b_i, s_i)"]:
            deviations.append(f"margin(b{i}, s{i}) = {got}")
        for j in range(1, n + 1):
            if j == i:
                continue
            got = margin(f"b{i}", f"s{j}")
            if got != expected["margin(b_i, s_j)"]:
                deviations.append(f"margin(b{i}, s{j}) = {got}")
    return MarginAudit(
        n, t, expected, tuple(deviations), n // 4 + 1, weaker_met
    )


# -- direct scan over small deletion sets ---------------------------------------------


def _sign_tensors(e: Election) -> tuple[np.ndarray, np.ndarray]:
    """Full margin matrix and per-voter sign matrices (+1: row preferred)."""
    m, n = e.m, e.n
    idx = {name: k for k, name in enumerate(e.alternatives)}
    signs = np.zeros((n, m, m), dtype=np.int16)
    for v, voter in enumerate(e.voters):
        rank = {idx[name]: r for r, name in enumerate(voter.ranking)}
        order = np.array([rank[k] for k in range(m)])
        signs[v] = np.sign(order[None, :] - order[:, None])
    return signs.sum(axis=0), signs


def _target_wins(margins: np.ndarray, ti: int, rule: Rule) -> bool:
    dom = margins > 0
    m = margins.shape[0]
    if rule is Rule.CONDORCET:
        return bool(dom[ti].sum() == m - 1)
    for c in range(m):
        if dom[c, ti] and not np.any(dom[:, c] & ~dom[:, ti]):
            return False
    return True


def scan_deletions_up_to(
    e: Election, target: str, rule: Rule, max_delete: int
) -> list[tuple[int, ...]]:
    """All deletion sets of size <= max_delete after which the target wins,
    by direct margin recomputation; voters 1-based."""
    ti = e.alternative_index(target)
    full, signs = _sign_tensors(e)
    hits = []
    for k in range(max_delete + 1):
        for combo in combinations(range(e.n), k):
            margins = full.copy()
            for v in combo:
                margins -= signs[v]
            if _target_wins(margins, ti, rule):
                hits.append(tuple(v + 1 for v in combo))
    return hits

"""Election model: parsing, preference relation, dominance and covering.

The preference relation P of an election relates each voter i to every
ordered pair (a, b) of alternatives with a ranked strictly above b.  From
P the dominance relation (majority comparison), the covering relation and
the winner sets are computed with pure relation algebra.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .carrier import UNIT, Base, Powerset, Product, bits_of_index, size
from .relalg import Context, RelAlgError, Relation

_NAME_RE = re.compile(r"[A-Za-z0-9_]+\Z")


class ElectionParseError(Exception):
    """Malformed election file."""


class ElectionError(Exception):
    """Semantically invalid request against a parsed election."""


def _closure(pairs: set[tuple[str, str]]) -> frozenset[tuple[str, str]]:
    """Transitive closure of a set of ordered pairs."""
    succ: dict[str, set[str]] = {}
    for a, b in pairs:
        succ.setdefault(a, set()).add(b)
    changed = True
    while changed:
        changed = False
        for a, outs in succ.items():
            extra = set()
            for b in outs:
                extra |= succ.get(b, set()) - outs
            if extra:
                outs |= extra
                changed = True
    return frozenset((a, b) for a, outs in succ.items() for b in outs)


@dataclass(frozen=True)
class VoterOrder:
    """One voter's strict preferences.

    ``ranking`` is the permutation as written (best first) when the ballot
    was given as a ranking; pair ballots from the permissive mode leave it
    unset.  ``pairs`` always holds the full strict order.
    """

    pairs: frozenset[tuple[str, str]]
    ranking: Optional[tuple[str, ...]] = None

    @classmethod
    def from_ranking(cls, names: Sequence[str]) -> "VoterOrder":
        ranked = tuple(names)
        pairs = frozenset(
            (ranked[i], ranked[j])
            for i in range(len(ranked))
            for j in range(i + 1, len(ranked))
        )
        return cls(pairs, ranked)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "VoterOrder":
        closed = _closure(set(pairs))
        for a, b in closed:
            if a == b:
                raise ElectionParseError(f"preference cycle through {a!r}")
        return cls(closed)

    def prefers(self, a: str, b: str) -> bool:
        return (a, b) in self.pairs


@dataclass(frozen=True)
class Election:
    alternatives: tuple[str, ...]
    voters: tuple[VoterOrder, ...]

    @property
    def n(self) -> int:
        return len(self.voters)

    @property
    def m(self) -> int:
        return len(self.alternatives)

    def alternative_index(self, name: str) -> int:
        try:
            return self.alternatives.index(name)
        except ValueError:
            raise ElectionError(f"unknown alternative {name!r}") from None

    def without(self, delete: Iterable[int]) -> "Election":
        """Sub-election keeping original order; voters are 1-based."""
        drop = set(delete)
        for i in drop:
            if not 1 <= i <= self.n:
                raise ElectionError(f"unknown voter index {i}")
        kept = tuple(v for i, v in enumerate(self.voters, 1) if i not in drop)
        return Election(self.alternatives, kept)


def parse_election(text: str, permissive: bool = False) -> Election:
    """Parse the election file format.

    Lines: '#' starts a comment, blank lines are skipped.  The first
    significant line is ``alternatives: <name> ...``; every further line is
    ``[<count>:] <name> ...``, a full ranking best first, repeated <count>
    times.  In permissive mode a ballot line may instead rank only a subset
    of the alternatives or give explicit ``x>y`` pairs (closed under
    transitivity, rejected when cyclic).
    """
    alternatives: Optional[tuple[str, ...]] = None
    voters: list[VoterOrder] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if alternatives is None:
            head, sep, rest = line.partition(":")
            if head.strip() != "alternatives" or not sep:
                raise ElectionParseError(
                    f"line {lineno}: expected 'alternatives: ...' first"
                )
            names = rest.split()
            if not names:
                raise ElectionParseError(f"line {lineno}: empty alternative list")
            for name in names:
                if not _NAME_RE.match(name):
                    raise ElectionParseError(
                        f"line {lineno}: bad alternative name {name!r}"
                    )
            if len(set(names)) != len(names):
                raise ElectionParseError(f"line {lineno}: duplicate alternative")
            alternatives = tuple(names)
            continue
        count = 1
        head, sep, rest = line.partition(":")
        if sep:
            try:
                count = int(head.strip())
            except ValueError:
                raise ElectionParseError(
                    f"line {lineno}: bad multiplicity {head.strip()!r}"
                ) from None
            if count < 1:
                raise ElectionParseError(f"line {lineno}: multiplicity < 1")
            line = rest.strip()
        tokens = line.split()
        if not tokens:
            raise ElectionParseError(f"line {lineno}: empty ballot")
        universe = set(alternatives)
        if any(">" in t for t in tokens):
            if not permissive:
                raise ElectionParseError(
                    f"line {lineno}: pair ballots need permissive mode"
                )
            pairs = []
            for t in tokens:
                a, sep2, b = t.partition(">")
                if not sep2 or not a or not b:
                    raise ElectionParseError(f"line {lineno}: bad pair {t!r}")
                if a not in universe or b not in universe:
                    raise ElectionParseError(
                        f"line {lineno}: unknown alternative in {t!r}"
                    )
                pairs.append((a, b))
            try:
                order = VoterOrder.from_pairs(pairs)
            except ElectionParseError as exc:
                raise ElectionParseError(f"line {lineno}: {exc}") from None
        else:
            for t in tokens:
                if t not in universe:
                    raise ElectionParseError(
                        f"line {lineno}: unknown alternative {t!r}"
                    )
            if len(set(tokens)) != len(tokens):
                raise ElectionParseError(f"line {lineno}: repeated alternative")
            if len(tokens) != len(alternatives) and not permissive:
                raise ElectionParseError(
                    f"line {lineno}: ranking must list all alternatives"
                )
            order = VoterOrder.from_ranking(tokens)
        voters.extend([order] * count)
    if alternatives is None:
        raise ElectionParseError("missing 'alternatives:' line")
    return Election(alternatives, tuple(voters))


def format_election(e: Election) -> str:
    """Canonical text rendering; consecutive equal ballots grouped."""
    lines = ["alternatives: " + " ".join(e.alternatives)]
    i = 0
    while i < e.n:
        j = i
        while j < e.n and e.voters[j] == e.voters[i]:
            j += 1
        v = e.voters[i]
        if v.ranking is None:
            body = " ".join(f"{a}>{b}" for a, b in sorted(v.pairs))
        else:
            body = " ".join(v.ranking)
        lines.append(body if j - i == 1 else f"{j - i}: {body}")
        i = j
    return "\n".join(lines) + "\n"


# -- relational pipeline ------------------------------------------------------


def build_P(e: Election) -> Relation:
    """Preference relation N <-> A*A over a fresh context.

    Entry (i, (a, b)) present iff voter i ranks a strictly above b.  The
    carriers registered on the context: N labelled "1".."n", A labelled by
    the alternative names.
    """
    ctx = Context()
    A = ctx.base("A", list(e.alternatives))
    N = ctx.base("N", [str(i) for i in range(1, e.n + 1)])
    A2 = Product(A, A)
    mgr = ctx.mgr
    m = e.m
    wn = max(e.n - 1, 0).bit_length()
    fn = mgr.false
    idx = {name: k for k, name in enumerate(e.alternatives)}
    for i, voter in enumerate(e.voters):
        row = mgr.false
        for a, b in voter.pairs:
            u = idx[a] * m + idx[b]
            bits = bits_of_index(A2, u)
            row |= mgr.cube({wn + k: bit for k, bit in enumerate(bits)})
        cube = mgr.cube(
            {k: bit for k, bit in enumerate(bits_of_index(N, i))}
        )
        fn |= cube & row
    return Relation(ctx, N, A2, fn)


def pair_counts(P: Relation) -> dict[tuple[int, int], int]:
    """Number of voters preferring a over b, for each ordered pair."""
    A2 = P.target
    counts: dict[tuple[int, int], int] = {}
    ms = size(A2.right)
    for _, u in P.entries():
        key = (u // ms, u % ms)
        counts[key] = counts.get(key, 0) + 1
    return counts


@dataclass(frozen=True)
class DominanceView:
    """Majority comparison: relation, margins and the winner if any."""

    names: tuple[str, ...]
    C: Relation
    margins: tuple[tuple[int, ...], ...]

    @property
    def winner(self) -> Optional[str]:
        winners = condorcet_winners(self.C)
        return next(iter(winners)) if winners else None

    def to_json(self) -> dict:
        m = len(self.names)
        matrix = [[self.C.holds(i, j) for j in range(m)] for i in range(m)]
        return {
            "winner": self.winner,
            "dominance": matrix,
            "margins": [list(row) for row in self.margins],
        }


def dominance(P: Relation) -> DominanceView:
    """Majority dominance from the preference relation.

    The relation is assembled by comparing, for each ordered pair u, the
    set of voters preferring u with the set preferring the swapped pair,
    through membership and size-comparison relations; margins are counted
    directly from the entries of P as an independent check.
    """
    ctx = P.ctx
    N, A2 = P.source, P.target
    A = A2.left
    eps = ctx.eps(N)
    E = P.syq(eps)
    F = (P @ ctx.exchange(A2)).syq(eps)
    strict = ctx.strict_omega(N)
    PN = Powerset(N)
    vect = (E & (F @ strict)) @ ctx.universal(PN, UNIT)
    C = vect.rel_of(A, A)

    counts = pair_counts(P)
    m = size(A)
    margins = tuple(
        tuple(
            counts.get((i, j), 0) - counts.get((j, i), 0) if i != j else 0
            for j in range(m)
        )
        for i in range(m)
    )
    names = ctx.labels(A) or tuple(str(i) for i in range(m))
    return DominanceView(names, C, margins)


def condorcet_winners(C: Relation) -> set[str]:
    """Alternatives dominating every other one (zero or one of them)."""
    ctx = C.ctx
    A = C.source
    m = size(A)
    out = set()
    for i in range(m):
        if all(C.holds(i, j) for j in range(m) if j != i):
            out.add(ctx.label(A, i))
    return out


def covering(C: Relation) -> Relation:
    """a covers b: a dominates b and every dominator of a dominates b."""
    return C & ~(C.T @ ~C)


def uncovered(G: Relation) -> set[str]:
    """Alternatives not covered by anything else."""
    ctx = G.ctx
    A = G.source
    covered = G.T @ ctx.universal(A, UNIT)
    out = set()
    for i in range(size(A)):
        if not covered.holds(i, 0):
            out.add(ctx.label(A, i))
    return out


class Rule(enum.Enum):
    CONDORCET = "condorcet"
    UNCOVERED = "uncovered"

    @classmethod
    def from_string(cls, s: str) -> "Rule":
        for rule in cls:
            if rule.value == s:
                return rule
        raise ValueError(f"unknown rule {s!r}; expected condorcet or uncovered")


def winning_set(e: Election) -> dict[Rule, set[str]]:
    """Winner sets of both rules for a (sub-)election."""
    P = build_P(e)
    view = dominance(P)
    winners = condorcet_winners(view.C)
    unc = uncovered(covering(view.C))
    return {Rule.CONDORCET: winners, Rule.UNCOVERED: unc}


def verify_deletion(
    e: Election, delete: Iterable[int], target: str, rule: Rule
) -> bool:
    """Does the target win under the rule once the voters are deleted?"""
    if target not in e.alternatives:
        raise ElectionError(f"unknown alternative {target!r}")
    sub = e.without(delete)
    return target in winning_set(sub)[rule]

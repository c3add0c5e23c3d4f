"""Exact control by deleting voters, solved symbolically.

The pipeline lifts the majority comparison to every subset X of voters at
once: the relativized dominance relation R relates X to the pairs (a, b)
where a beats b among the voters in X, and the relativized covering
relation U does the same for the covering order.  Candidate vectors then
select the subsets where the target wins, and a size-comparison filter
keeps exactly the maximum keep-sets, i.e. the minimum deletion sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from .bdd import VarBlock
from .carrier import UNIT, Powerset, Product, size, width
from .election import Election, Rule, build_P
from .relalg import Context, RelAlgError, Relation


@dataclass(frozen=True)
class ControlArtifacts:
    """Intermediate relations of one solve, for inspection and reuse."""

    P: Relation
    R: Relation
    U: Optional[Relation]
    cand: Relation
    sol: Relation


@dataclass
class ControlResult:
    target: str
    rule: Rule
    feasible: bool
    min_deletions: Optional[int]
    num_optimal: int
    n: int
    solutions: Iterator[tuple[tuple[int, ...], tuple[int, ...]]]

    def to_json(self, limit: Optional[int] = 10) -> dict:
        sols = []
        truncated = False
        for keep, delete in self.solutions:
            if limit is not None and len(sols) == limit:
                truncated = True
                break
            sols.append({"keep": list(keep), "delete": list(delete)})
        return {
            "target": self.target,
            "rule": self.rule.value,
            "feasible": self.feasible,
            "min_deletions": self.min_deletions,
            "num_optimal": str(self.num_optimal),
            "solutions": sols,
            "truncated": truncated,
        }


def relativized_dominance(P: Relation) -> Relation:
    """R over 2^N <-> A*A: within X, more voters prefer u than its swap.

    Built like the plain dominance relation but with the voter set paired
    in: the column of (X, u) is X intersected with the supporters of u,
    compared by size against X intersected with the supporters of the
    swapped pair.
    """
    ctx = P.ctx
    N, A2 = P.source, P.target
    eps = ctx.eps(N)
    E = eps.pairing(P).syq(eps)
    F = eps.pairing(P @ ctx.exchange(A2)).syq(eps)
    strict = ctx.strict_omega(N)
    PN = Powerset(N)
    vect = (E & (F @ strict)) @ ctx.universal(PN, UNIT)
    return vect.rel_of(PN, A2)


def relativized_covering(R: Relation) -> Relation:
    """U over 2^N <-> A*A: within X, u1 upward-covers u2.

    u1 covers u2 when u1 beats u2 and every alternative beating u1 also
    beats u2, all majorities taken within X.
    """
    ctx = R.ctx
    A2 = R.target
    if not isinstance(A2, Product) or A2.left != A2.right:
        raise RelAlgError(f"relativized covering needs a square pair type, got {A2}")
    pi = ctx.pi(A2)
    rho = ctx.rho(A2)
    E = (
        (pi @ rho.T).pairing(rho @ rho.T).T
        & (pi @ pi.T).vec() @ ctx.universal(UNIT, A2)
    )
    return R & ~(R.pairing(~R) @ E)


def cand_condorcet(R: Relation, p: Relation) -> Relation:
    """Keep-sets X in which the target beats every other alternative."""
    _check_point(R, p)
    ctx = R.ctx
    A2 = R.target
    pi = ctx.pi(A2)
    rho = ctx.rho(A2)
    return ~(~R @ ((pi @ p) & ~(rho @ p)))


def cand_uncovered(U: Relation, p: Relation) -> Relation:
    """Keep-sets X in which nothing upward-covers the target."""
    _check_point(U, p)
    ctx = U.ctx
    A2 = U.target
    pi = ctx.pi(A2)
    rho = ctx.rho(A2)
    return ~(U @ (~(pi @ p) & (rho @ p)))


def _check_point(R: Relation, p: Relation) -> None:
    if not isinstance(R.target, Product):
        raise RelAlgError(f"expected pair-typed relation, got {R.type_name()}")
    if p.source != R.target.left or p.target != UNIT:
        raise RelAlgError(f"target point must be typed {R.target.left} <-> unit")
    if not p.is_point():
        raise RelAlgError("target must be a point (exactly one entry)")


def maximal_solutions(cand: Relation) -> Relation:
    """Restrict a subset vector to its maximum-cardinality members."""
    if not isinstance(cand.source, Powerset) or cand.target != UNIT:
        raise RelAlgError(
            f"maximal_solutions needs a powerset vector, got {cand.type_name()}"
        )
    ctx = cand.ctx
    om = ctx.omega(cand.source.inner)
    return cand & ~((~om.T) @ cand)


def analyze(e: Election, target: str, rule: Rule) -> ControlArtifacts:
    """Build all relations for one control question."""
    P = build_P(e)
    ctx = P.ctx
    A = P.target.left
    p = ctx.point_of(A, e.alternative_index(target))
    R = relativized_dominance(P)
    if rule is Rule.CONDORCET:
        U = None
        cand = cand_condorcet(R, p)
    else:
        U = relativized_covering(R)
        cand = cand_uncovered(U, p)
    sol = maximal_solutions(cand)
    return ControlArtifacts(P, R, U, cand, sol)


def _solution_stream(
    sol: Relation, n: int
) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    mgr = sol.ctx.mgr
    w = width(sol.source)
    everyone = range(1, n + 1)
    for bits in mgr.enumerate_models(sol.fn, [VarBlock(0, w)] if w else []):
        keep = tuple(i for i in everyone if bits[i - 1])
        delete = tuple(i for i in everyone if not bits[i - 1])
        yield keep, delete


def summarize(sol: Relation, target: str, rule: Rule, n: int) -> ControlResult:
    """Package a maximal-solutions vector as a control result.

    Useful when the relativized relations are shared across several
    targets; solve() goes through here after building them from scratch.
    """
    if sol.is_empty():
        return ControlResult(target, rule, False, None, 0, n, iter(()))
    first = next(_solution_stream(sol, n))
    min_deletions = len(first[1])
    num = sol.entry_count()
    return ControlResult(
        target, rule, True, min_deletions, num, n, _solution_stream(sol, n)
    )


def solve(e: Election, target: str, rule: Rule) -> ControlResult:
    """Minimum number of voter deletions making the target win, exactly.

    Feasibility, the minimum deletion count, the exact number of optimal
    deletion sets, and a deterministic enumeration of them (keep-set and
    delete-set, voters 1-based, lexicographic by voter index).
    """
    art = analyze(e, target, rule)
    return summarize(art.sol, target, rule, e.n)

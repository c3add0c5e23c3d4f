"""Reduced ordered binary decision diagrams.

A `Manager` owns a shared unique table of BDD nodes, so structurally equal
functions are represented by the same node.  That canonicity is what the
rest of the package relies on: two relations are equal iff their `BoolFn`
handles are identical.

Variables are identified by nonnegative integers; the variable order is the
numeric order and never changes.  `VarBlock` names a contiguous range of
variables, which is how relations address their source and target bits.

No complement edges, no dynamic reordering.  Model counts are exact Python
integers.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from itertools import islice
from typing import Iterable, Iterator, Optional

# Nodes are ints: 0 is the constant false, 1 the constant true, inner nodes
# start at 2.  Terminals sit below every variable.
FALSE = 0
TRUE = 1
_TERMINAL = 1 << 40

_AND = 0
_OR = 1
_XOR = 2
_OPS = {"and": _AND, "or": _OR, "xor": _XOR}

# Apply-cache keys pack (f, g, op) into one int; node indices stay far below
# this width in any workload the package generates.
_SHIFT = 42

_CACHE_LIMIT = 4_000_000


class BddError(Exception):
    """Raised on misuse of the kernel API."""


@dataclass(frozen=True)
class VarBlock:
    """A contiguous range of variables: offset, offset+1, ..., offset+width-1."""

    offset: int
    width: int

    def __post_init__(self) -> None:
        if self.offset < 0 or self.width < 0:
            raise BddError(f"bad block {self.offset}+{self.width}")

    @property
    def stop(self) -> int:
        return self.offset + self.width

    def vars(self) -> range:
        return range(self.offset, self.offset + self.width)


def _block_vars(blocks: "VarBlock | Iterable[VarBlock]") -> list[int]:
    if isinstance(blocks, VarBlock):
        blocks = [blocks]
    out: set[int] = set()
    for b in blocks:
        out.update(b.vars())
    return sorted(out)


class BoolFn:
    """Immutable handle to a Boolean function inside one Manager.

    Handle equality is function equality.  Supports `&`, `|`, `^`, `~`.
    """

    __slots__ = ("mgr", "node")

    def __init__(self, mgr: "Manager", node: int):
        self.mgr = mgr
        self.node = node

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BoolFn)
            and other.mgr is self.mgr
            and other.node == self.node
        )

    def __hash__(self) -> int:
        return hash((id(self.mgr), self.node))

    def __and__(self, other: "BoolFn") -> "BoolFn":
        return self.mgr.apply("and", self, other)

    def __or__(self, other: "BoolFn") -> "BoolFn":
        return self.mgr.apply("or", self, other)

    def __xor__(self, other: "BoolFn") -> "BoolFn":
        return self.mgr.apply("xor", self, other)

    def __invert__(self) -> "BoolFn":
        return self.mgr.neg(self)

    def is_false(self) -> bool:
        return self.node == FALSE

    def is_true(self) -> bool:
        return self.node == TRUE

    def support(self) -> set[int]:
        return self.mgr.support(self)

    def __repr__(self) -> str:
        return f"BoolFn(node={self.node}, size={self.mgr.node_count(self)})"


class Manager:
    """A store of reduced ordered BDD nodes with memoized operations.

    The manager grows its variable range on demand (`ensure_vars`); existing
    variables never change their relative order.  All node-creating calls
    must stay on one thread per manager.
    """

    def __init__(self, variable_count: int = 0):
        self._nvars = variable_count
        # Parallel arrays indexed by node id.  Slots 0/1 are the terminals.
        self._var: list[int] = [_TERMINAL, _TERMINAL]
        self._lo: list[int] = [0, 1]
        self._hi: list[int] = [0, 1]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._apply_cache: dict[int, int] = {}
        self._neg_cache: dict[int, int] = {}
        self._support_cache: dict[int, frozenset[int]] = {}
        if sys.getrecursionlimit() < 100_000:
            sys.setrecursionlimit(100_000)

    # -- bookkeeping ----------------------------------------------------

    @property
    def variable_count(self) -> int:
        return self._nvars

    def ensure_vars(self, n: int) -> None:
        """Grow the variable range to at least n variables."""
        if n > self._nvars:
            self._nvars = n

    def __len__(self) -> int:
        return len(self._var)

    def _trim_caches(self) -> None:
        if len(self._apply_cache) > _CACHE_LIMIT:
            self._apply_cache.clear()
        if len(self._neg_cache) > _CACHE_LIMIT:
            self._neg_cache.clear()

    def _mk(self, v: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (v, lo, hi)
        node = self._unique.get(key)
        if node is None:
            node = len(self._var)
            self._var.append(v)
            self._lo.append(lo)
            self._hi.append(hi)
            self._unique[key] = node
        return node

    def _wrap(self, node: int) -> BoolFn:
        return BoolFn(self, node)

    def _check(self, *fns: BoolFn) -> None:
        for f in fns:
            if f.mgr is not self:
                raise BddError("BoolFn belongs to a different Manager")

    # -- constants and variables ----------------------------------------

    @property
    def true(self) -> BoolFn:
        return self._wrap(TRUE)

    @property
    def false(self) -> BoolFn:
        return self._wrap(FALSE)

    def const(self, b: bool) -> BoolFn:
        return self.true if b else self.false

    def var(self, i: int) -> BoolFn:
        if i < 0:
            raise BddError(f"negative variable {i}")
        self.ensure_vars(i + 1)
        return self._wrap(self._mk(i, FALSE, TRUE))

    def nvar(self, i: int) -> BoolFn:
        self.ensure_vars(i + 1)
        return self._wrap(self._mk(i, TRUE, FALSE))

    def cube(self, bits: dict[int, int]) -> BoolFn:
        """Conjunction of literals; bits maps variable -> 0/1."""
        node = TRUE
        for v in sorted(bits, reverse=True):
            node = self._mk(v, FALSE, node) if bits[v] else self._mk(v, node, FALSE)
            self.ensure_vars(v + 1)
        return self._wrap(node)

    # -- core operations --------------------------------------------------

    def apply(self, op: str, f: BoolFn, g: BoolFn) -> BoolFn:
        """Pointwise and/or/xor of two functions."""
        try:
            code = _OPS[op]
        except KeyError:
            raise BddError(f"unknown op {op!r}") from None
        self._check(f, g)
        self._trim_caches()
        return self._wrap(self._apply(code, f.node, g.node))

    def _apply(self, op: int, f: int, g: int) -> int:
        if op == _AND:
            if f == FALSE or g == FALSE:
                return FALSE
            if f == TRUE:
                return g
            if g == TRUE:
                return f
            if f == g:
                return f
        elif op == _OR:
            if f == TRUE or g == TRUE:
                return TRUE
            if f == FALSE:
                return g
            if g == FALSE:
                return f
            if f == g:
                return f
        else:
            if f == g:
                return FALSE
            if f == FALSE:
                return g
            if g == FALSE:
                return f
            if f == TRUE:
                return self._neg(g)
            if g == TRUE:
                return self._neg(f)
        if f > g:  # all three ops are commutative
            f, g = g, f
        key = ((f << _SHIFT) | g) << 2 | op
        cache = self._apply_cache
        r = cache.get(key)
        if r is not None:
            return r
        var, lo, hi = self._var, self._lo, self._hi
        vf, vg = var[f], var[g]
        if vf < vg:
            v, flo, fhi, glo, ghi = vf, lo[f], hi[f], g, g
        elif vg < vf:
            v, flo, fhi, glo, ghi = vg, f, f, lo[g], hi[g]
        else:
            v, flo, fhi, glo, ghi = vf, lo[f], hi[f], lo[g], hi[g]
        r = self._mk(v, self._apply(op, flo, glo), self._apply(op, fhi, ghi))
        cache[key] = r
        return r

    def neg(self, f: BoolFn) -> BoolFn:
        self._check(f)
        return self._wrap(self._neg(f.node))

    def _neg(self, f: int) -> int:
        if f == FALSE:
            return TRUE
        if f == TRUE:
            return FALSE
        cache = self._neg_cache
        r = cache.get(f)
        if r is None:
            r = self._mk(self._var[f], self._neg(self._lo[f]), self._neg(self._hi[f]))
            cache[f] = r
            cache[r] = f
        return r

    def ite(self, f: BoolFn, g: BoolFn, h: BoolFn) -> BoolFn:
        """if f then g else h, as (f ∧ g) ∨ (¬f ∧ h)."""
        self._check(f, g, h)
        a = self._apply(_AND, f.node, g.node)
        b = self._apply(_AND, self._neg(f.node), h.node)
        return self._wrap(self._apply(_OR, a, b))

    # -- quantification ---------------------------------------------------

    def exists(self, f: BoolFn, blocks: "VarBlock | Iterable[VarBlock]") -> BoolFn:
        """Existential quantification over every variable of the blocks."""
        self._check(f)
        vs = _block_vars(blocks)
        if not vs:
            return f
        vset = frozenset(vs)
        vmax = vs[-1]
        cache: dict[int, int] = {}
        var, lo, hi = self._var, self._lo, self._hi

        def rec(n: int) -> int:
            if n < 2:
                return n
            v = var[n]
            if v > vmax:
                return n
            r = cache.get(n)
            if r is not None:
                return r
            if v in vset:
                a = rec(lo[n])
                r = TRUE if a == TRUE else self._apply(_OR, a, rec(hi[n]))
            else:
                r = self._mk(v, rec(lo[n]), rec(hi[n]))
            cache[n] = r
            return r

        return self._wrap(rec(f.node))

    def and_exists(
        self, f: BoolFn, g: BoolFn, blocks: "VarBlock | Iterable[VarBlock]"
    ) -> BoolFn:
        """exists(blocks, f ∧ g) without materializing the conjunction."""
        self._check(f, g)
        vs = _block_vars(blocks)
        if not vs:
            return f & g
        vset = frozenset(vs)
        vmax = vs[-1]
        cache: dict[int, int] = {}
        var, lo, hi = self._var, self._lo, self._hi

        def rec(a: int, b: int) -> int:
            if a == FALSE or b == FALSE:
                return FALSE
            if a == TRUE and b == TRUE:
                return TRUE
            va, vb = var[a], var[b]
            v = va if va < vb else vb
            if v > vmax:
                return self._apply(_AND, a, b)
            if a > b:
                a, b = b, a
                va, vb = vb, va
            key = (a << _SHIFT) | b
            r = cache.get(key)
            if r is not None:
                return r
            alo, ahi = (lo[a], hi[a]) if var[a] == v else (a, a)
            blo, bhi = (lo[b], hi[b]) if var[b] == v else (b, b)
            if v in vset:
                x = rec(alo, blo)
                r = TRUE if x == TRUE else self._apply(_OR, x, rec(ahi, bhi))
            else:
                r = self._mk(v, rec(alo, blo), rec(ahi, bhi))
            cache[key] = r
            return r

        return self._wrap(rec(f.node, g.node))

    def forall_equiv(
        self, f: BoolFn, g: BoolFn, blocks: "VarBlock | Iterable[VarBlock]"
    ) -> BoolFn:
        """forall(blocks, f ↔ g), the quantified biconditional in one pass."""
        self._check(f, g)
        vs = _block_vars(blocks)
        if not vs:
            return self._wrap(self._neg(self._apply(_XOR, f.node, g.node)))
        vset = frozenset(vs)
        vmax = vs[-1]
        cache: dict[int, int] = {}
        var, lo, hi = self._var, self._lo, self._hi

        def rec(a: int, b: int) -> int:
            va = var[a] if a >= 2 else _TERMINAL
            vb = var[b] if b >= 2 else _TERMINAL
            v = va if va < vb else vb
            if v > vmax:
                return self._neg(self._apply(_XOR, a, b))
            key = (a << _SHIFT) | b
            r = cache.get(key)
            if r is not None:
                return r
            alo, ahi = (lo[a], hi[a]) if va == v else (a, a)
            blo, bhi = (lo[b], hi[b]) if vb == v else (b, b)
            if v in vset:
                x = rec(alo, blo)
                r = FALSE if x == FALSE else self._apply(_AND, x, rec(ahi, bhi))
            else:
                r = self._mk(v, rec(alo, blo), rec(ahi, bhi))
            cache[key] = r
            return r

        return self._wrap(rec(f.node, g.node))

    # -- renaming ---------------------------------------------------------

    def rename(self, f: BoolFn, src: VarBlock, dst: VarBlock) -> BoolFn:
        """Substitute variables of `src` by the matching variables of `dst`."""
        return self.rename_blocks(f, [(src, dst)])

    def rename_blocks(
        self, f: BoolFn, moves: list[tuple[VarBlock, VarBlock]]
    ) -> BoolFn:
        """Simultaneously move several variable blocks.

        Every block pair must have equal width; the combined map must be
        injective on the support of f, and no target variable may collide
        with an untouched support variable.
        """
        self._check(f)
        vmap: dict[int, int] = {}
        for src, dst in moves:
            if src.width != dst.width:
                raise BddError(
                    f"rename width mismatch: {src.width} vs {dst.width}"
                )
            for i in range(src.width):
                if src.offset + i in vmap:
                    raise BddError("rename source blocks overlap")
                vmap[src.offset + i] = dst.offset + i
            self.ensure_vars(dst.stop)
        sup = self.support(f)
        total = {v: vmap.get(v, v) for v in sup}
        images = list(total.values())
        if len(set(images)) != len(images):
            raise BddError("rename target collides within support")
        if any(v != total[v] and total[v] in sup and total[v] not in vmap
               for v in sup):
            raise BddError("rename target overlaps untouched support")
        ordered = sorted(total)
        monotone = all(
            total[a] < total[b] for a, b in zip(ordered, ordered[1:])
        )
        if monotone:
            return self._wrap(self._rename_monotone(f.node, total))
        return self._wrap(self._rename_general(f.node, total))

    def _rename_monotone(self, f: int, total: dict[int, int]) -> int:
        cache: dict[int, int] = {}
        var, lo, hi = self._var, self._lo, self._hi

        def rec(n: int) -> int:
            if n < 2:
                return n
            r = cache.get(n)
            if r is None:
                v = var[n]
                r = self._mk(total.get(v, v), rec(lo[n]), rec(hi[n]))
                cache[n] = r
            return r

        return rec(f)

    def _rename_general(self, f: int, total: dict[int, int]) -> int:
        # Shannon substitution: rebuild bottom-up, inserting each renamed
        # variable with a small ite.  Handles order-crossing moves such as
        # transposition.
        cache: dict[int, int] = {}
        var, lo, hi = self._var, self._lo, self._hi

        def rec(n: int) -> int:
            if n < 2:
                return n
            r = cache.get(n)
            if r is None:
                v = total.get(var[n], var[n])
                l, h = rec(lo[n]), rec(hi[n])
                pos = self._mk(v, FALSE, TRUE)
                neg = self._mk(v, TRUE, FALSE)
                r = self._apply(
                    _OR, self._apply(_AND, pos, h), self._apply(_AND, neg, l)
                )
                cache[n] = r
            return r

        return rec(f)

    # -- models -----------------------------------------------------------

    def _support_vars(
        self, f: BoolFn, blocks: "VarBlock | Iterable[VarBlock]"
    ) -> list[int]:
        vs = _block_vars(blocks)
        missing = self.support(f) - set(vs)
        if missing:
            raise BddError(f"support too small: missing variables {sorted(missing)}")
        return vs

    def sat_count(self, f: BoolFn, blocks: "VarBlock | Iterable[VarBlock]") -> int:
        """Number of satisfying assignments over exactly the block variables."""
        self._check(f)
        vs = self._support_vars(f, blocks)
        pos = {v: i for i, v in enumerate(vs)}
        m = len(vs)
        var, lo, hi = self._var, self._lo, self._hi
        memo: dict[int, int] = {}

        def below(n: int, p: int) -> int:
            # count over positions p.. assuming var(n) maps to position >= p
            if n == FALSE:
                return 0
            if n == TRUE:
                return 1 << (m - p)
            j = pos[var[n]]
            c = memo.get(n)
            if c is None:
                c = below(lo[n], j + 1) + below(hi[n], j + 1)
                memo[n] = c
            return c << (j - p)

        return below(f.node, 0)

    def pick_model(
        self, f: BoolFn, blocks: "VarBlock | Iterable[VarBlock]"
    ) -> Optional[tuple[int, ...]]:
        """Lexicographically least satisfying assignment, or None.

        The assignment is a bit tuple aligned with the sorted block
        variables (see `enumerate_models`).
        """
        return next(self.enumerate_models(f, blocks), None)

    def enumerate_models(
        self,
        f: BoolFn,
        blocks: "VarBlock | Iterable[VarBlock]",
        limit: Optional[int] = None,
    ) -> Iterator[tuple[int, ...]]:
        """Satisfying assignments in lexicographic order (0 before 1).

        Yields bit tuples aligned with the sorted variables of the blocks.
        """
        self._check(f)
        vs = self._support_vars(f, blocks)
        m = len(vs)
        var, lo, hi = self._var, self._lo, self._hi
        bits = [0] * m

        def gen(n: int, p: int) -> Iterator[tuple[int, ...]]:
            if n == FALSE:
                return
            if p == m:
                yield tuple(bits)
                return
            v = vs[p]
            if n >= 2 and var[n] == v:
                if lo[n] != FALSE:
                    bits[p] = 0
                    yield from gen(lo[n], p + 1)
                if hi[n] != FALSE:
                    bits[p] = 1
                    yield from gen(hi[n], p + 1)
            else:
                bits[p] = 0
                yield from gen(n, p + 1)
                bits[p] = 1
                yield from gen(n, p + 1)

        it = gen(f.node, 0)
        return it if limit is None else islice(it, limit)

    def evaluate(self, f: BoolFn, assignment: dict[int, int]) -> bool:
        """Evaluate f at a full assignment of its support."""
        self._check(f)
        n = f.node
        var, lo, hi = self._var, self._lo, self._hi
        while n >= 2:
            n = hi[n] if assignment[var[n]] else lo[n]
        return n == TRUE

    # -- introspection ----------------------------------------------------

    def support(self, f: BoolFn | int) -> set[int]:
        node = f.node if isinstance(f, BoolFn) else f
        cached = self._support_cache.get(node)
        if cached is not None:
            return set(cached)
        var, lo, hi = self._var, self._lo, self._hi
        seen: set[int] = set()
        out: set[int] = set()
        stack = [node]
        while stack:
            n = stack.pop()
            if n < 2 or n in seen:
                continue
            seen.add(n)
            out.add(var[n])
            stack.append(lo[n])
            stack.append(hi[n])
        if len(self._support_cache) < _CACHE_LIMIT:
            self._support_cache[node] = frozenset(out)
        return out

    def node_count(self, f: BoolFn) -> int:
        """Number of inner nodes reachable from f."""
        seen: set[int] = set()
        stack = [f.node]
        lo, hi = self._lo, self._hi
        while stack:
            n = stack.pop()
            if n < 2 or n in seen:
                continue
            seen.add(n)
            stack.append(lo[n])
            stack.append(hi[n])
        return len(seen)

    def to_dot(self, f: BoolFn, name: str = "bdd") -> str:
        """DOT-format dump of the subgraph rooted at f (debugging aid)."""
        lines = [f"digraph {name} {{", '  rankdir=TB;']
        lines.append('  t0 [label="0", shape=box];')
        lines.append('  t1 [label="1", shape=box];')
        seen: set[int] = set()
        stack = [f.node]
        var, lo, hi = self._var, self._lo, self._hi

        def ref(n: int) -> str:
            return f"t{n}" if n < 2 else f"n{n}"

        while stack:
            n = stack.pop()
            if n < 2 or n in seen:
                continue
            seen.add(n)
            lines.append(f'  n{n} [label="x{var[n]}", shape=circle];')
            lines.append(f"  n{n} -> {ref(lo[n])} [style=dashed];")
            lines.append(f"  n{n} -> {ref(hi[n])};")
            stack.append(lo[n])
            stack.append(hi[n])
        lines.append(f'  root [shape=none, label=""]; root -> {ref(f.node)};')
        lines.append("}")
        return "\n".join(lines)


def mk_const(m: Manager, b: bool) -> BoolFn:
    """Canonical constant function."""
    return m.const(b)

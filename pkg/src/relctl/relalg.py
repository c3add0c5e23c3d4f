"""Typed relation algebra over BDD-represented characteristic functions.

A relation R between carriers X and Y is stored as a boolean function over
``width(X) + width(Y)`` BDD variables: source bits occupy positions
``0 .. width(X)-1``, target bits follow.  All operations keep relations
inside the care space (bit patterns that encode actual elements), so
complement is always taken relative to the universal relation of the type.

Positions are relative to the pair, not global: two relations of equal
type over the same context share variables, and binary operations align
operands by renaming blocks before combining them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence, Union

from .bdd import FALSE, BoolFn, Manager, VarBlock
from .carrier import (
    UNIT,
    Base,
    Carrier,
    Powerset,
    Product,
    Unit,
    bits_of_index,
    index_of_bits,
    size,
    width,
)
from . import dense


class RelAlgError(Exception):
    """Malformed operand or unsatisfied precondition."""


class TypeMismatchError(RelAlgError):
    """Operands have incompatible relation types."""


def _fmt_type(src: Carrier, tgt: Carrier) -> str:
    return f"{src} <-> {tgt}"


class Context:
    """Shared BDD manager plus caches for structural relations.

    All relations combined by an operation must come from the same
    context; the context also registers element labels for base carriers
    so relations can be rendered with meaningful row and column names.
    """

    def __init__(self) -> None:
        self.mgr = Manager()
        self._labels: dict[Base, tuple[str, ...]] = {}
        self._care: dict[tuple[Carrier, int], BoolFn] = {}
        self._universal: dict[tuple[Carrier, Carrier], "Relation"] = {}
        self._identity: dict[Carrier, "Relation"] = {}
        self._eps: dict[Carrier, "Relation"] = {}
        self._omega: dict[Carrier, "Relation"] = {}
        self._strict_omega: dict[Carrier, "Relation"] = {}

    # -- carriers ---------------------------------------------------------

    def base(self, name: str, elements: Union[int, Sequence[str]]) -> Base:
        """Create a base carrier, optionally with element labels."""
        if isinstance(elements, int):
            return Base(name, elements)
        labels = tuple(elements)
        if len(set(labels)) != len(labels):
            raise RelAlgError(f"duplicate labels in base carrier {name!r}")
        c = Base(name, len(labels))
        self._labels[c] = labels
        return c

    def labels(self, c: Base) -> Optional[tuple[str, ...]]:
        return self._labels.get(c)

    def label(self, c: Carrier, index: int) -> str:
        """Human-readable name of element ``index``."""
        if index < 0 or index >= size(c):
            raise RelAlgError(f"index {index} out of range for {c}")
        if isinstance(c, Unit):
            return "*"
        if isinstance(c, Base):
            names = self._labels.get(c)
            return names[index] if names is not None else str(index)
        if isinstance(c, Product):
            rs = size(c.right)
            return f"({self.label(c.left, index // rs)},{self.label(c.right, index % rs)})"
        if isinstance(c, Powerset):
            members = [
                self.label(c.inner, j) for j in range(size(c.inner)) if (index >> j) & 1
            ]
            return "{" + ",".join(members) + "}"
        raise TypeError(f"not a carrier: {c!r}")

    # -- care space -------------------------------------------------------

    def _less_than(self, offset: int, w: int, bound: int) -> BoolFn:
        """MSB-first unsigned comparison: encoded value < bound."""
        mgr = self.mgr
        if bound >= (1 << w):
            return mgr.true
        fn = mgr.false
        for j in reversed(range(w)):
            v = mgr.var(offset + j)
            if (bound >> (w - 1 - j)) & 1:
                fn = mgr.ite(v, fn, mgr.true)
            else:
                fn = mgr.ite(v, mgr.false, fn)
        return fn

    def care_fn(self, c: Carrier, offset: int) -> BoolFn:
        """Characteristic function of valid encodings at a bit offset."""
        key = (c, offset)
        cached = self._care.get(key)
        if cached is not None:
            return cached
        if isinstance(c, (Unit, Powerset)):
            fn = self.mgr.true
        elif isinstance(c, Base):
            fn = self._less_than(offset, width(c), c.size)
        elif isinstance(c, Product):
            fn = self.care_fn(c.left, offset) & self.care_fn(
                c.right, offset + width(c.left)
            )
        else:
            raise TypeError(f"not a carrier: {c!r}")
        self._care[key] = fn
        return fn

    # -- relation constructors --------------------------------------------

    def _wrap(self, src: Carrier, tgt: Carrier, fn: BoolFn) -> "Relation":
        return Relation(self, src, tgt, fn)

    def empty(self, src: Carrier, tgt: Carrier) -> "Relation":
        return self._wrap(src, tgt, self.mgr.false)

    def universal(self, src: Carrier, tgt: Carrier) -> "Relation":
        key = (src, tgt)
        cached = self._universal.get(key)
        if cached is None:
            fn = self.care_fn(src, 0) & self.care_fn(tgt, width(src))
            cached = self._wrap(src, tgt, fn)
            self._universal[key] = cached
        return cached

    def identity(self, src: Carrier, tgt: Optional[Carrier] = None) -> "Relation":
        if tgt is not None and tgt != src:
            raise TypeMismatchError(
                f"identity needs equal carriers, got {src} and {tgt}"
            )
        c = src
        cached = self._identity.get(c)
        if cached is None:
            w = width(c)
            mgr = self.mgr
            fn = mgr.true
            for i in reversed(range(w)):
                fn = mgr.neg(mgr.var(i) ^ mgr.var(w + i)) & fn
            fn &= self.care_fn(c, 0)
            cached = self._wrap(c, c, fn)
            self._identity[c] = cached
        return cached

    def from_function(
        self, src: Carrier, tgt: Carrier, holds
    ) -> "Relation":
        """Build a relation from an index predicate (small carriers only)."""
        mgr = self.mgr
        ws = width(src)
        fn = mgr.false
        for i in range(size(src)):
            sb = bits_of_index(src, i)
            row = mgr.false
            for j in range(size(tgt)):
                if holds(i, j):
                    tb = bits_of_index(tgt, j)
                    row |= mgr.cube({ws + k: b for k, b in enumerate(tb)})
            if row.node != FALSE:
                fn |= mgr.cube({k: b for k, b in enumerate(sb)}) & row
        return self._wrap(src, tgt, fn)

    def from_pairs(
        self, src: Carrier, tgt: Carrier, pairs: Iterable[tuple[int, int]]
    ) -> "Relation":
        wanted = set(pairs)
        return self.from_function(src, tgt, lambda i, j: (i, j) in wanted)

    def point_of(self, c: Carrier, index: int) -> "Relation":
        """The vector selecting exactly one element."""
        if not 0 <= index < size(c):
            raise RelAlgError(f"point index {index} out of range for {c}")
        bits = bits_of_index(c, index)
        fn = self.mgr.cube({k: b for k, b in enumerate(bits)})
        return self._wrap(c, UNIT, fn)

    # -- structural relations ----------------------------------------------

    def pi(self, prod: Carrier) -> "Relation":
        """First projection of a product carrier."""
        if not isinstance(prod, Product):
            raise RelAlgError(f"pi needs a product carrier, got {prod}")
        left, right = prod.left, prod.right
        wl, wp = width(left), width(prod)
        mgr = self.mgr
        fn = mgr.true
        for i in reversed(range(wl)):
            fn = mgr.neg(mgr.var(i) ^ mgr.var(wp + i)) & fn
        fn &= self.care_fn(prod, 0)
        return self._wrap(prod, left, fn)

    def rho(self, prod: Carrier) -> "Relation":
        """Second projection of a product carrier."""
        if not isinstance(prod, Product):
            raise RelAlgError(f"rho needs a product carrier, got {prod}")
        left, right = prod.left, prod.right
        wl, wr, wp = width(left), width(right), width(prod)
        mgr = self.mgr
        fn = mgr.true
        for i in reversed(range(wr)):
            fn = mgr.neg(mgr.var(wl + i) ^ mgr.var(wp + i)) & fn
        fn &= self.care_fn(prod, 0)
        return self._wrap(prod, right, fn)

    def exchange(self, prod: Carrier) -> "Relation":
        """Swap the components of a square product: (x,y) -> (y,x)."""
        if not isinstance(prod, Product) or prod.left != prod.right:
            raise RelAlgError(f"exchange needs a square product, got {prod}")
        wl = width(prod.left)
        wp = width(prod)
        mgr = self.mgr
        fn = mgr.true
        for i in reversed(range(wl)):
            fn = mgr.neg(mgr.var(wl + i) ^ mgr.var(wp + i)) & fn
        for i in reversed(range(wl)):
            fn = mgr.neg(mgr.var(i) ^ mgr.var(wp + wl + i)) & fn
        fn &= self.care_fn(prod, 0)
        return self._wrap(prod, prod, fn)

    def eps(self, inner: Carrier) -> "Relation":
        """Membership: inner element x relates to the subsets containing x."""
        cached = self._eps.get(inner)
        if cached is not None:
            return cached
        mgr = self.mgr
        w = width(inner)
        fn = mgr.false
        for j in range(size(inner)):
            bits = bits_of_index(inner, j)
            fn |= mgr.cube({k: b for k, b in enumerate(bits)}) & mgr.var(w + j)
        cached = self._wrap(inner, Powerset(inner), fn)
        self._eps[inner] = cached
        return cached

    def omega(self, inner: Carrier) -> "Relation":
        """Size comparison on subsets: (Y, Z) related iff |Y| <= |Z|.

        Built by dynamic programming over the member bits: thresholds
        "at least d of the remaining Z bits are set" feed a counter walk
        over the Y bits, so the BDD stays quadratic in the inner size.
        """
        cached = self._omega.get(inner)
        if cached is not None:
            return cached
        mgr = self.mgr
        m = size(inner)
        # thresh[d] = "at least d ones among z_j .. z_{m-1}", refined as j drops
        thresh = [mgr.true] + [mgr.false] * m
        for j in reversed(range(m)):
            z = mgr.var(m + j)
            nxt = [mgr.true]
            for d in range(1, m + 1):
                nxt.append(mgr.ite(z, thresh[d - 1], thresh[d]))
            thresh = nxt
        # walk the y bits, tracking how many are set so far
        level = thresh
        for i in reversed(range(m)):
            y = mgr.var(i)
            nxt = []
            for k in range(i + 1):
                hi = level[k + 1] if k + 1 <= m else mgr.false
                nxt.append(mgr.ite(y, hi, level[k]))
            level = nxt
        cached = self._wrap(Powerset(inner), Powerset(inner), level[0])
        self._omega[inner] = cached
        return cached

    def strict_omega(self, inner: Carrier) -> "Relation":
        """Strict size comparison: (Y, Z) related iff |Y| < |Z|."""
        cached = self._strict_omega.get(inner)
        if cached is None:
            om = self.omega(inner)
            cached = om & ~om.transpose()
            self._strict_omega[inner] = cached
        return cached

    def inj(self, r: "Relation") -> "Relation":
        """Embedding of the subset described by a vector.

        For a vector r over X the result maps a fresh base carrier, one
        element per member of r in index order, injectively into X.
        """
        if r.target != UNIT:
            raise RelAlgError(f"inj needs a vector, got {r.type_name()}")
        mgr = r.ctx.mgr
        w = width(r.source)
        members = sorted(
            index_of_bits(r.source, bits)
            for bits in mgr.enumerate_models(r.fn, [VarBlock(0, w)])
        )
        sub = Base(f"sub{len(members)}", len(members))
        wy = width(sub)
        fn = mgr.false
        for k, x in enumerate(members):
            kb = bits_of_index(sub, k)
            xb = bits_of_index(r.source, x)
            cube = dict(enumerate(kb))
            cube.update({wy + i: b for i, b in enumerate(xb)})
            fn |= mgr.cube(cube)
        return self._wrap(sub, r.source, fn)

    def column_enum(self, r: "Relation") -> "Relation":
        """Columns of the subsets selected by a vector over a powerset."""
        if r.target != UNIT or not isinstance(r.source, Powerset):
            raise RelAlgError(
                f"column_enum needs a vector over a powerset, got {r.type_name()}"
            )
        return self.eps(r.source.inner) @ self.inj(r).transpose()


@dataclass(frozen=True, eq=False)
class Relation:
    """An immutable typed relation bound to a context."""

    ctx: Context
    source: Carrier
    target: Carrier
    fn: BoolFn

    # -- identity -----------------------------------------------------------

    def type_name(self) -> str:
        return _fmt_type(self.source, self.target)

    def __repr__(self) -> str:
        return f"<Relation {self.type_name()} entries={self.entry_count()}>"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return (
            self.ctx is other.ctx
            and self.source == other.source
            and self.target == other.target
            and self.fn == other.fn
        )

    def __hash__(self) -> int:
        return hash((id(self.ctx), self.source, self.target, self.fn.node))

    def _check_same_type(self, other: "Relation", op: str) -> None:
        if self.ctx is not other.ctx:
            raise RelAlgError(f"{op}: relations from different contexts")
        if self.source != other.source or self.target != other.target:
            raise TypeMismatchError(
                f"{op}: {self.type_name()} vs {other.type_name()}"
            )

    # -- boolean lattice ----------------------------------------------------

    def union(self, other: "Relation") -> "Relation":
        self._check_same_type(other, "union")
        return Relation(self.ctx, self.source, self.target, self.fn | other.fn)

    def inter(self, other: "Relation") -> "Relation":
        self._check_same_type(other, "inter")
        return Relation(self.ctx, self.source, self.target, self.fn & other.fn)

    def complement(self) -> "Relation":
        univ = self.ctx.universal(self.source, self.target)
        return Relation(self.ctx, self.source, self.target, ~self.fn & univ.fn)

    def difference(self, other: "Relation") -> "Relation":
        self._check_same_type(other, "difference")
        return Relation(self.ctx, self.source, self.target, self.fn & ~other.fn)

    def is_incl(self, other: "Relation") -> bool:
        self._check_same_type(other, "is_incl")
        return (self.fn & ~other.fn).node == FALSE

    def is_eq(self, other: "Relation") -> bool:
        self._check_same_type(other, "is_eq")
        return self.fn == other.fn

    def is_empty(self) -> bool:
        return self.fn.node == FALSE

    def __or__(self, other: "Relation") -> "Relation":
        return self.union(other)

    def __and__(self, other: "Relation") -> "Relation":
        return self.inter(other)

    def __invert__(self) -> "Relation":
        return self.complement()

    def __sub__(self, other: "Relation") -> "Relation":
        return self.difference(other)

    def __le__(self, other: "Relation") -> bool:
        return self.is_incl(other)

    # -- relational operations ----------------------------------------------

    def transpose(self) -> "Relation":
        ws, wt = width(self.source), width(self.target)
        if ws and wt:
            fn = self.ctx.mgr.rename_blocks(
                self.fn,
                [(VarBlock(0, ws), VarBlock(wt, ws)), (VarBlock(ws, wt), VarBlock(0, wt))],
            )
        else:
            # one side is unit-like, the bits already sit where they belong
            fn = self.fn
        return Relation(self.ctx, self.target, self.source, fn)

    @property
    def T(self) -> "Relation":
        return self.transpose()

    def compose(self, other: "Relation") -> "Relation":
        if self.ctx is not other.ctx:
            raise RelAlgError("compose: relations from different contexts")
        if self.target != other.source:
            raise TypeMismatchError(
                f"compose: {self.type_name()} then {other.type_name()}"
            )
        mgr = self.ctx.mgr
        p = width(self.source)
        q = width(self.target)
        r = width(other.target)
        g = other.fn
        if p:
            moves = []
            if q:
                moves.append((VarBlock(0, q), VarBlock(p, q)))
            if r:
                moves.append((VarBlock(q, r), VarBlock(p + q, r)))
            g = mgr.rename_blocks(g, moves)
        if q:
            fn = mgr.and_exists(self.fn, g, [VarBlock(p, q)])
            if r:
                fn = mgr.rename_blocks(fn, [(VarBlock(p + q, r), VarBlock(p, r))])
        else:
            fn = self.fn & g
        return Relation(self.ctx, self.source, other.target, fn)

    def __matmul__(self, other: "Relation") -> "Relation":
        return self.compose(other)

    def syq(self, other: "Relation") -> "Relation":
        """Symmetric quotient: column y of self equals column z of other."""
        if self.ctx is not other.ctx:
            raise RelAlgError("syq: relations from different contexts")
        if self.source != other.source:
            raise TypeMismatchError(
                f"syq: sources differ, {self.type_name()} vs {other.type_name()}"
            )
        mgr = self.ctx.mgr
        wx = width(self.source)
        wy = width(self.target)
        wz = width(other.target)
        g = other.fn
        if wy and wz:
            g = mgr.rename_blocks(g, [(VarBlock(wx, wz), VarBlock(wx + wy, wz))])
        fn = mgr.forall_equiv(self.fn, g, [VarBlock(0, wx)] if wx else [])
        if wx:
            moves = []
            if wy:
                moves.append((VarBlock(wx, wy), VarBlock(0, wy)))
            if wz:
                moves.append((VarBlock(wx + wy, wz), VarBlock(wy, wz)))
            fn = mgr.rename_blocks(fn, moves)
        univ = self.ctx.universal(self.target, other.target)
        return Relation(self.ctx, self.target, other.target, fn & univ.fn)

    def pairing(self, other: "Relation") -> "Relation":
        """Fork into a product target: x -> (y, z) with x R y and x S z."""
        if self.ctx is not other.ctx:
            raise RelAlgError("pairing: relations from different contexts")
        if self.source != other.source:
            raise TypeMismatchError(
                f"pairing: sources differ, {self.type_name()} vs {other.type_name()}"
            )
        mgr = self.ctx.mgr
        wx = width(self.source)
        wy = width(self.target)
        wz = width(other.target)
        g = other.fn
        if wy and wz:
            g = mgr.rename_blocks(g, [(VarBlock(wx, wz), VarBlock(wx + wy, wz))])
        return Relation(
            self.ctx,
            self.source,
            Product(self.target, other.target),
            self.fn & g,
        )

    # -- vectors and reshaping ------------------------------------------------

    def vec(self) -> "Relation":
        """Reinterpret an X <-> Y relation as a vector over X*Y."""
        return Relation(self.ctx, Product(self.source, self.target), UNIT, self.fn)

    def rel_of(self, src: Carrier, tgt: Carrier) -> "Relation":
        """Reinterpret a vector over src*tgt as a src <-> tgt relation."""
        if self.target != UNIT:
            raise RelAlgError(f"rel_of needs a vector, got {self.type_name()}")
        if self.source != Product(src, tgt):
            raise TypeMismatchError(
                f"rel_of: vector over {self.source}, asked for {src}*{tgt}"
            )
        return Relation(self.ctx, src, tgt, self.fn)

    def is_vector(self) -> bool:
        return self.target == UNIT

    def is_point(self) -> bool:
        return self.is_vector() and self.entry_count() == 1

    # -- inspection -------------------------------------------------------------

    def entry_count(self) -> int:
        ws, wt = width(self.source), width(self.target)
        blocks = []
        if ws:
            blocks.append(VarBlock(0, ws))
        if wt:
            blocks.append(VarBlock(ws, wt))
        return self.ctx.mgr.sat_count(self.fn, blocks)

    def entries(self, limit: Optional[int] = None) -> Iterator[tuple[int, int]]:
        """Yield (source index, target index) pairs in lexicographic order."""
        ws, wt = width(self.source), width(self.target)
        blocks = []
        if ws:
            blocks.append(VarBlock(0, ws))
        if wt:
            blocks.append(VarBlock(ws, wt))
        for bits in self.ctx.mgr.enumerate_models(self.fn, blocks, limit=limit):
            yield (
                index_of_bits(self.source, bits[:ws]),
                index_of_bits(self.target, bits[ws:]),
            )

    def holds(self, i: int, j: int) -> bool:
        """Test one entry by element indices."""
        sb = bits_of_index(self.source, i)
        tb = bits_of_index(self.target, j)
        ws = width(self.source)
        assignment = {k: b for k, b in enumerate(sb)}
        assignment.update({ws + k: b for k, b in enumerate(tb)})
        return self.ctx.mgr.evaluate(self.fn, assignment)

    def in_care_space(self) -> bool:
        """Check the invariant that no entry uses an invalid encoding."""
        univ = self.ctx.universal(self.source, self.target)
        return (self.fn & ~univ.fn).node == FALSE

    def node_count(self) -> int:
        return self.ctx.mgr.node_count(self.fn)

    # -- conversions --------------------------------------------------------------

    def to_dense(self) -> dense.DenseRelation:
        out = dense.empty(size(self.source), size(self.target))
        for i, j in self.entries():
            out.bits[i, j] = True
        return out

    def pretty(self, max_cells: int = 1 << 16) -> str:
        """Render as an ASCII matrix with element labels."""
        rows, cols = size(self.source), size(self.target)
        if rows * cols > max_cells:
            raise RelAlgError(f"relation too large to render: {rows}x{cols}")
        present = set(self.entries())
        row_labels = [self.ctx.label(self.source, i) for i in range(rows)]
        col_labels = [self.ctx.label(self.target, j) for j in range(cols)]
        left = max((len(s) for s in row_labels), default=1)
        widths = [max(len(s), 1) for s in col_labels]
        lines = [
            " " * left
            + "  "
            + " ".join(s.rjust(w) for s, w in zip(col_labels, widths))
        ]
        for i in range(rows):
            cells = [
                ("1" if (i, j) in present else ".").rjust(widths[j])
                for j in range(cols)
            ]
            lines.append(row_labels[i].ljust(left) + "  " + " ".join(cells))
        return "\n".join(lines)


def from_dense(
    ctx: Context, d: dense.DenseRelation, src: Carrier, tgt: Carrier
) -> Relation:
    """Lift a dense boolean matrix into a typed symbolic relation."""
    if d.source_size != size(src) or d.target_size != size(tgt):
        raise TypeMismatchError(
            f"dense {d.source_size}x{d.target_size} does not fit {_fmt_type(src, tgt)}"
        )
    return ctx.from_function(src, tgt, lambda i, j: bool(d.bits[i, j]))

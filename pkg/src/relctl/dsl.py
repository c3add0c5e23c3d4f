"""Typed relational expression scripts: lexer, parser, typechecker, evaluator.

Scripts are straight-line — carrier aliases, optional typed let bindings,
one final "eval" expression:

    carrier PNA2 = PN * A2;
    let E : PNA2 <-> PN = syq(pair(eps[N], P), eps[N]);
    eval E . L[PN <-> unit]

Operators, tightest first: prefix "-" (complement) and postfix "^"
(transpose), then "." (composition), "&" (intersection), "|" (union).
"#" starts a comment running to end of line.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .carrier import UNIT, Base, Carrier, Powerset, Product
from .relalg import Context, Relation

Pos = tuple[int, int]


class DslParseError(Exception):
    def __init__(self, message: str, pos: Pos, expected: frozenset[str]):
        super().__init__(message)
        self.line, self.column = pos
        self.expected = expected


class DslTypeError(Exception):
    def __init__(self, message: str, pos: Pos):
        super().__init__(message)
        self.line, self.column = pos


# -- lexer ---------------------------------------------------------------------

_KEYWORDS = frozenset(
    """carrier let eval unit pow
       L O I eps omega pi rho syq pair vec rel inj""".split()
)
_PUNCT = ("<->", "=", ";", ":", "*", "^", ".", "-", "&", "|", "(", ")", "[", "]", ",")


@dataclass(frozen=True)
class Token:
    kind: str  # "id", "nat", a keyword, a punctuation mark, or "end"
    text: str
    pos: Pos


def _lex(text: str) -> Iterator[Token]:
    line, col, i, n = 1, 1, 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        pos = (line, col)
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            yield Token(word if word in _KEYWORDS else "id", word, pos)
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            yield Token("nat", text[i:j], pos)
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                yield Token(p, p, pos)
                i += len(p)
                col += len(p)
                break
        else:
            raise DslParseError(
                f"{line}:{col}: unexpected character {ch!r}", pos, frozenset()
            )
    yield Token("end", "", (line, col))


# -- syntax trees ----------------------------------------------------------------


@dataclass
class CexprName:
    name: str
    pos: Pos = field(compare=False)


@dataclass
class CexprProd:
    left: str
    right: str
    pos: Pos = field(compare=False)


@dataclass
class CexprPow:
    inner: str
    pos: Pos = field(compare=False)


@dataclass
class CexprUnit:
    pos: Pos = field(compare=False)


Cexpr = Union[CexprName, CexprProd, CexprPow, CexprUnit]


@dataclass
class RType:
    source: Cexpr
    target: Cexpr
    pos: Pos = field(compare=False)


RelType = tuple[object, object]  # carriers, or SubsetSource placeholders


@dataclass
class Ident:
    name: str
    pos: Pos = field(compare=False)
    ty: Optional[RelType] = field(default=None, compare=False, repr=False)


@dataclass
class Compl:
    arg: "Expr"
    pos: Pos = field(compare=False)
    ty: Optional[RelType] = field(default=None, compare=False, repr=False)


@dataclass
class Transp:
    arg: "Expr"
    pos: Pos = field(compare=False)
    ty: Optional[RelType] = field(default=None, compare=False, repr=False)


@dataclass
class BinOp:
    op: str  # ".", "&" or "|"
    left: "Expr"
    right: "Expr"
    pos: Pos = field(compare=False)
    ty: Optional[RelType] = field(default=None, compare=False, repr=False)


@dataclass
class Const:
    kind: str  # "L" or "O"
    rtype: RType
    pos: Pos = field(compare=False)
    ty: Optional[RelType] = field(default=None, compare=False, repr=False)


@dataclass
class CarrierOp:
    kind: str  # "I", "eps", "omega", "pi" or "rho"
    cexpr: Cexpr
    pos: Pos = field(compare=False)
    ty: Optional[RelType] = field(default=None, compare=False, repr=False)


@dataclass
class Call2:
    kind: str  # "syq" or "pair"
    left: "Expr"
    right: "Expr"
    pos: Pos = field(compare=False)
    ty: Optional[RelType] = field(default=None, compare=False, repr=False)


@dataclass
class Call1:
    kind: str  # "vec", "rel" or "inj"
    arg: "Expr"
    pos: Pos = field(compare=False)
    ty: Optional[RelType] = field(default=None, compare=False, repr=False)


Expr = Union[Ident, Compl, Transp, BinOp, Const, CarrierOp, Call2, Call1]


@dataclass
class CarrierDecl:
    name: str
    rhs: Union[int, Cexpr]
    pos: Pos = field(compare=False)


@dataclass
class LetDecl:
    name: str
    rtype: Optional[RType]
    expr: Expr
    pos: Pos = field(compare=False)


Stmt = Union[CarrierDecl, LetDecl]


@dataclass
class Script:
    stmts: list[Stmt]
    final: Expr
    pos: Pos = field(compare=False)


# -- parser ----------------------------------------------------------------------

_ATOM_FIRST = frozenset(
    ["id", "(", "L", "O", "I", "eps", "omega", "pi", "rho", "syq", "pair", "vec", "rel", "inj"]
)


class _Parser:
    def __init__(self, text: str):
        self.tokens = list(_lex(text))
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def fail(self, expected: frozenset[str]) -> "DslParseError":
        t = self.tok
        got = "end of input" if t.kind == "end" else repr(t.text)
        want = ", ".join(sorted(expected))
        return DslParseError(
            f"{t.pos[0]}:{t.pos[1]}: expected one of {want}; got {got}",
            t.pos,
            expected,
        )

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            raise self.fail(frozenset([kind]))
        return self.advance()

    def script(self) -> Script:
        pos = self.tok.pos
        stmts: list[Stmt] = []
        while self.tok.kind in ("carrier", "let"):
            stmts.append(self.stmt())
        if self.tok.kind != "eval":
            raise self.fail(frozenset(["carrier", "let", "eval"]))
        self.advance()
        final = self.expr()
        self.expect("end")
        return Script(stmts, final, pos)

    def stmt(self) -> Stmt:
        t = self.advance()
        name = self.expect("id")
        if t.kind == "carrier":
            self.expect("=")
            rhs: Union[int, Cexpr]
            if self.tok.kind == "nat":
                rhs = int(self.advance().text)
            else:
                rhs = self.cexpr()
            self.expect(";")
            return CarrierDecl(name.text, rhs, t.pos)
        rtype = None
        if self.tok.kind == ":":
            self.advance()
            rtype = self.rtype()
        self.expect("=")
        expr = self.expr()
        self.expect(";")
        return LetDecl(name.text, rtype, expr, t.pos)

    def cexpr(self) -> Cexpr:
        t = self.tok
        if t.kind == "unit":
            self.advance()
            return CexprUnit(t.pos)
        if t.kind == "pow":
            self.advance()
            return CexprPow(self.expect("id").text, t.pos)
        if t.kind == "id":
            self.advance()
            if self.tok.kind == "*":
                self.advance()
                return CexprProd(t.text, self.expect("id").text, t.pos)
            return CexprName(t.text, t.pos)
        raise self.fail(frozenset(["id", "pow", "unit"]))

    def rtype(self) -> RType:
        pos = self.tok.pos
        src = self.cexpr()
        self.expect("<->")
        return RType(src, self.cexpr(), pos)

    def expr(self) -> Expr:
        e = self.inter()
        while self.tok.kind == "|":
            pos = self.advance().pos
            e = BinOp("|", e, self.inter(), pos)
        return e

    def inter(self) -> Expr:
        e = self.comp()
        while self.tok.kind == "&":
            pos = self.advance().pos
            e = BinOp("&", e, self.comp(), pos)
        return e

    def comp(self) -> Expr:
        e = self.unary()
        while self.tok.kind == ".":
            pos = self.advance().pos
            e = BinOp(".", e, self.unary(), pos)
        return e

    def unary(self) -> Expr:
        if self.tok.kind == "-":
            pos = self.advance().pos
            return Compl(self.unary(), pos)
        return self.postfix()

    def postfix(self) -> Expr:
        e = self.atom()
        while self.tok.kind == "^":
            pos = self.advance().pos
            e = Transp(e, pos)
        return e

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "id":
            self.advance()
            return Ident(t.text, t.pos)
        if t.kind == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind in ("L", "O"):
            self.advance()
            self.expect("[")
            rt = self.rtype()
            self.expect("]")
            return Const(t.kind, rt, t.pos)
        if t.kind in ("I", "eps", "omega", "pi", "rho"):
            self.advance()
            self.expect("[")
            c = self.cexpr()
            self.expect("]")
            return CarrierOp(t.kind, c, t.pos)
        if t.kind in ("syq", "pair"):
            self.advance()
            self.expect("(")
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(")")
            return Call2(t.kind, a, b, t.pos)
        if t.kind in ("vec", "rel", "inj"):
            self.advance()
            self.expect("(")
            a = self.expr()
            self.expect(")")
            return Call1(t.kind, a, t.pos)
        raise self.fail(_ATOM_FIRST)


def parse(text: str) -> Script:
    """Parse a script; raises DslParseError with line/column on bad input."""
    return _Parser(text).script()


# -- pretty printer ----------------------------------------------------------------

_LEVEL = {"|": 0, "&": 1, ".": 2}


def _fmt_cexpr(c: Cexpr) -> str:
    if isinstance(c, CexprUnit):
        return "unit"
    if isinstance(c, CexprPow):
        return f"pow {c.inner}"
    if isinstance(c, CexprProd):
        return f"{c.left} * {c.right}"
    return c.name


def _fmt_rtype(rt: RType) -> str:
    return f"{_fmt_cexpr(rt.source)} <-> {_fmt_cexpr(rt.target)}"


def _fmt_expr(e: Expr, level: int) -> str:
    if isinstance(e, BinOp):
        mine = _LEVEL[e.op]
        s = (
            f"{_fmt_expr(e.left, mine)} {e.op} {_fmt_expr(e.right, mine + 1)}"
            if e.op != "."
            else f"{_fmt_expr(e.left, mine)}{e.op}{_fmt_expr(e.right, mine + 1)}"
        )
        return f"({s})" if mine < level else s
    if isinstance(e, Compl):
        s = f"-{_fmt_expr(e.arg, 3)}"
        return f"({s})" if level > 3 else s
    if isinstance(e, Transp):
        return f"{_fmt_expr(e.arg, 4)}^"
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Const):
        return f"{e.kind}[{_fmt_rtype(e.rtype)}]"
    if isinstance(e, CarrierOp):
        return f"{e.kind}[{_fmt_cexpr(e.cexpr)}]"
    if isinstance(e, Call2):
        return f"{e.kind}({_fmt_expr(e.left, 0)}, {_fmt_expr(e.right, 0)})"
    return f"{e.kind}({_fmt_expr(e.arg, 0)})"


def format_script(s: Script) -> str:
    """Canonical text form; parse(format_script(parse(t))) == parse(t)."""
    lines = []
    for st in s.stmts:
        if isinstance(st, CarrierDecl):
            rhs = st.rhs if isinstance(st.rhs, int) else _fmt_cexpr(st.rhs)
            lines.append(f"carrier {st.name} = {rhs};")
        else:
            ann = f" : {_fmt_rtype(st.rtype)}" if st.rtype else ""
            lines.append(f"let {st.name}{ann} = {_fmt_expr(st.expr, 0)};")
    lines.append(f"eval {_fmt_expr(s.final, 0)}")
    return "\n".join(lines) + "\n"


# -- typechecker -------------------------------------------------------------------


@dataclass(frozen=True)
class SubsetSource:
    """Stands in for the value-dependent source carrier of inj."""

    of: object
    uid: int


_subset_uid = itertools.count()


def _show_carrier(c: object) -> str:
    if isinstance(c, SubsetSource):
        return f"subset({_show_carrier(c.of)})"
    if isinstance(c, Product):
        return f"({_show_carrier(c.left)} * {_show_carrier(c.right)})"
    if isinstance(c, Powerset):
        return f"pow {_show_carrier(c.inner)}"
    if isinstance(c, Base):
        return c.name
    return "unit"


def _show(ty: RelType) -> str:
    return f"{_show_carrier(ty[0])} <-> {_show_carrier(ty[1])}"


class _Checker:
    def __init__(self, carriers: dict[str, Carrier], relations: dict[str, RelType]):
        self.carriers = dict(carriers)
        self.relations = dict(relations)

    def run(self, s: Script) -> None:
        for st in s.stmts:
            if isinstance(st, CarrierDecl):
                self.carrier_decl(st)
            else:
                self.let_decl(st)
        self.expr(s.final)

    def bind_check(self, name: str, pos: Pos) -> None:
        if name in self.carriers or name in self.relations:
            raise DslTypeError(f"{pos[0]}:{pos[1]}: {name!r} is already bound", pos)

    def carrier_decl(self, st: CarrierDecl) -> None:
        self.bind_check(st.name, st.pos)
        if isinstance(st.rhs, int):
            self.carriers[st.name] = Base(st.name, st.rhs)
        else:
            self.carriers[st.name] = self.cexpr(st.rhs)

    def let_decl(self, st: LetDecl) -> None:
        self.bind_check(st.name, st.pos)
        ty = self.expr(st.expr)
        if st.rtype is not None:
            declared = (self.cexpr(st.rtype.source), self.cexpr(st.rtype.target))
            if declared != ty:
                raise DslTypeError(
                    f"{st.pos[0]}:{st.pos[1]}: {st.name} declared "
                    f"{_show(declared)} but its expression has type {_show(ty)}",
                    st.pos,
                )
        self.relations[st.name] = ty

    def cexpr(self, c: Cexpr) -> Carrier:
        if isinstance(c, CexprUnit):
            return UNIT
        if isinstance(c, CexprPow):
            return Powerset(self.lookup_carrier(c.inner, c.pos))
        if isinstance(c, CexprProd):
            return Product(
                self.lookup_carrier(c.left, c.pos),
                self.lookup_carrier(c.right, c.pos),
            )
        return self.lookup_carrier(c.name, c.pos)

    def lookup_carrier(self, name: str, pos: Pos) -> Carrier:
        if name in self.carriers:
            return self.carriers[name]
        kind = "a relation" if name in self.relations else "not bound"
        raise DslTypeError(f"{pos[0]}:{pos[1]}: {name!r} is {kind}, not a carrier", pos)

    def expr(self, e: Expr) -> RelType:
        ty = self._expr(e)
        e.ty = ty
        return ty

    def _expr(self, e: Expr) -> RelType:
        pos = e.pos
        if isinstance(e, Ident):
            if e.name in self.relations:
                return self.relations[e.name]
            kind = "a carrier" if e.name in self.carriers else "not bound"
            raise DslTypeError(
                f"{pos[0]}:{pos[1]}: {e.name!r} is {kind}, not a relation", pos
            )
        if isinstance(e, Compl):
            return self.expr(e.arg)
        if isinstance(e, Transp):
            s, t = self.expr(e.arg)
            return (t, s)
        if isinstance(e, BinOp):
            lt, rt = self.expr(e.left), self.expr(e.right)
            if e.op == ".":
                if lt[1] != rt[0]:
                    raise DslTypeError(
                        f"{pos[0]}:{pos[1]}: cannot compose {_show(lt)} "
                        f"with {_show(rt)}: middle carriers differ",
                        pos,
                    )
                return (lt[0], rt[1])
            if lt != rt:
                raise DslTypeError(
                    f"{pos[0]}:{pos[1]}: operands of {e.op!r} have different "
                    f"types: {_show(lt)} vs {_show(rt)}",
                    pos,
                )
            return lt
        if isinstance(e, Const):
            return (self.cexpr(e.rtype.source), self.cexpr(e.rtype.target))
        if isinstance(e, CarrierOp):
            c = self.cexpr(e.cexpr)
            if e.kind == "I":
                return (c, c)
            if e.kind == "eps":
                return (c, Powerset(c))
            if e.kind == "omega":
                return (Powerset(c), Powerset(c))
            if not isinstance(c, Product):
                raise DslTypeError(
                    f"{pos[0]}:{pos[1]}: {e.kind} needs a product carrier, "
                    f"got {_show_carrier(c)}",
                    pos,
                )
            return (c, c.left if e.kind == "pi" else c.right)
        if isinstance(e, Call2):
            lt, rt = self.expr(e.left), self.expr(e.right)
            if lt[0] != rt[0]:
                raise DslTypeError(
                    f"{pos[0]}:{pos[1]}: {e.kind} arguments must share their "
                    f"source: {_show(lt)} vs {_show(rt)}",
                    pos,
                )
            if e.kind == "syq":
                return (lt[1], rt[1])
            return (lt[0], Product(lt[1], rt[1]))
        # Call1
        at = self.expr(e.arg)
        if e.kind == "vec":
            return (Product(at[0], at[1]), UNIT)
        if e.kind == "rel":
            if not isinstance(at[0], Product) or at[1] != UNIT:
                raise DslTypeError(
                    f"{pos[0]}:{pos[1]}: rel needs a vector over a product "
                    f"carrier, got {_show(at)}",
                    pos,
                )
            return (at[0].left, at[0].right)
        if at[1] != UNIT:
            raise DslTypeError(
                f"{pos[0]}:{pos[1]}: inj needs a vector, got {_show(at)}", pos
            )
        return (SubsetSource(at[0], next(_subset_uid)), at[0])


def typecheck(
    s: Script,
    carriers: dict[str, Carrier],
    relations: dict[str, RelType],
) -> Script:
    """Annotate every expression with its relation type; errors carry positions."""
    _Checker(carriers, relations).run(s)
    return s


# -- evaluator ---------------------------------------------------------------------


class _Evaluator:
    def __init__(self, ctx: Context, carriers: dict[str, Carrier], relations):
        self.ctx = ctx
        self.carriers = dict(carriers)
        self.relations = dict(relations)

    def run(self, s: Script) -> Relation:
        for st in s.stmts:
            if isinstance(st, CarrierDecl):
                if isinstance(st.rhs, int):
                    self.carriers[st.name] = self.ctx.base(st.name, st.rhs)
                else:
                    self.carriers[st.name] = self.cexpr(st.rhs)
            else:
                self.relations[st.name] = self.expr(st.expr)
        return self.expr(s.final)

    def cexpr(self, c: Cexpr) -> Carrier:
        if isinstance(c, CexprUnit):
            return UNIT
        if isinstance(c, CexprPow):
            return Powerset(self.carriers[c.inner])
        if isinstance(c, CexprProd):
            return Product(self.carriers[c.left], self.carriers[c.right])
        return self.carriers[c.name]

    def expr(self, e: Expr) -> Relation:
        ctx = self.ctx
        if isinstance(e, Ident):
            return self.relations[e.name]
        if isinstance(e, Compl):
            return ~self.expr(e.arg)
        if isinstance(e, Transp):
            return self.expr(e.arg).T
        if isinstance(e, BinOp):
            l, r = self.expr(e.left), self.expr(e.right)
            return l @ r if e.op == "." else (l & r if e.op == "&" else l | r)
        if isinstance(e, Const):
            s, t = self.cexpr(e.rtype.source), self.cexpr(e.rtype.target)
            return ctx.universal(s, t) if e.kind == "L" else ctx.empty(s, t)
        if isinstance(e, CarrierOp):
            c = self.cexpr(e.cexpr)
            if e.kind == "I":
                return ctx.identity(c)
            if e.kind == "eps":
                return ctx.eps(c)
            if e.kind == "omega":
                return ctx.omega(c)
            return ctx.pi(c) if e.kind == "pi" else ctx.rho(c)
        if isinstance(e, Call2):
            l, r = self.expr(e.left), self.expr(e.right)
            return l.syq(r) if e.kind == "syq" else l.pairing(r)
        a = self.expr(e.arg)
        if e.kind == "vec":
            return a.vec()
        if e.kind == "rel":
            return a.rel_of(a.source.left, a.source.right)
        return self.ctx.inj(a)


def evaluate(
    s: Script,
    ctx: Context,
    carriers: dict[str, Carrier],
    relations: dict[str, Relation],
) -> Relation:
    """Evaluate a typechecked script bottom-up against bound relations."""
    return _Evaluator(ctx, carriers, relations).run(s)


def run(
    text: str,
    ctx: Context,
    carriers: dict[str, Carrier],
    relations: dict[str, Relation],
) -> Relation:
    """parse + typecheck + evaluate in one step."""
    s = parse(text)
    typecheck(s, carriers, {k: (r.source, r.target) for k, r in relations.items()})
    return evaluate(s, ctx, carriers, relations)

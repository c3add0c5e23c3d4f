"""Script language tests: grammar, printing, typing, evaluation, shipped scripts."""

import random
from importlib import resources

import pytest

from relctl.carrier import UNIT, Powerset, Product
from relctl.control import (
    cand_condorcet,
    cand_uncovered,
    maximal_solutions,
    relativized_covering,
    relativized_dominance,
)
from relctl.dsl import (
    BinOp,
    CarrierDecl,
    Compl,
    DslParseError,
    DslTypeError,
    Ident,
    LetDecl,
    Transp,
    evaluate,
    format_script,
    parse,
    run,
    typecheck,
)
from relctl.election import Election, VoterOrder, build_P, dominance, parse_election
from relctl.relalg import Context

SCRIPTS = ["cv1.ra", "cv2.ra", "cv3.ra", "cv4.ra", "cv5.ra"]


def script_text(name: str) -> str:
    return resources.files("relctl.scripts").joinpath(name).read_text("utf-8")


def sample13() -> Election:
    text = (
        resources.files("relctl.data").joinpath("sample13.elec").read_text("utf-8")
    )
    return parse_election(text)


def standard_env(P):
    ctx = P.ctx
    N, A2 = P.source, P.target
    carriers = {"N": N, "A": A2.left, "A2": A2, "PN": Powerset(N)}
    return ctx, carriers


# -- parsing ------------------------------------------------------------------------


def test_precedence_example():
    s = parse("eval -R^ | S & T.U")
    e = s.final
    assert isinstance(e, BinOp) and e.op == "|"
    assert isinstance(e.left, Compl) and isinstance(e.left.arg, Transp)
    assert isinstance(e.left.arg.arg, Ident) and e.left.arg.arg.name == "R"
    assert isinstance(e.right, BinOp) and e.right.op == "&"
    assert isinstance(e.right.right, BinOp) and e.right.right.op == "."


def test_parens_override_precedence():
    assert parse("eval -(R^)") == parse("eval -R^")
    assert parse("eval (-R)^") != parse("eval -R^")
    assert parse("eval (A | B) & C") != parse("eval A | B & C")


def test_transpose_stacks():
    e = parse("eval R^^").final
    assert isinstance(e, Transp) and isinstance(e.arg, Transp)


def test_statement_forms():
    s = parse(
        "carrier B = 5; carrier Q = A * A; carrier W = pow B;\n"
        "carrier U = unit; let X : Q <-> unit = vec(I[A]); eval X"
    )
    assert len(s.stmts) == 5
    assert isinstance(s.stmts[0], CarrierDecl) and s.stmts[0].rhs == 5
    assert isinstance(s.stmts[4], LetDecl)
    assert s.stmts[4].rtype is not None


def test_empty_let_is_a_syntax_error_at_the_semicolon():
    with pytest.raises(DslParseError) as info:
        parse("let X = ;\neval X")
    assert info.value.line == 1 and info.value.column == 9
    assert info.value.expected  # nonempty expected-token set


def test_parse_error_positions_and_expected_sets():
    with pytest.raises(DslParseError) as info:
        parse("let X = A |\neval X")
    assert (info.value.line, info.value.column) == (2, 1)
    with pytest.raises(DslParseError) as info:
        parse("eval syq(A; B)")
    assert info.value.expected == frozenset([","])
    with pytest.raises(DslParseError):
        parse("eval A @ B")
    with pytest.raises(DslParseError):
        parse("carrier X = ; eval I[A]")
    with pytest.raises(DslParseError):
        parse("eval I[A] extra")
    with pytest.raises(DslParseError):
        parse("")


def test_reserved_words_are_not_identifiers():
    with pytest.raises(DslParseError):
        parse("let eps = I[A]; eval eps")
    with pytest.raises(DslParseError):
        parse("eval L")  # constants demand a type bracket


def test_comments_and_whitespace():
    s = parse("# top\n  eval  R # trailing\n# end\n")
    assert isinstance(s.final, Ident)


def test_cv1_is_a_three_binding_script():
    s = parse(script_text("cv1.ra"))
    assert [st.name for st in s.stmts] == ["E", "F", "C"]
    assert all(isinstance(st, LetDecl) for st in s.stmts)
    assert isinstance(s.final, Ident) and s.final.name == "C"


# -- printing -----------------------------------------------------------------------


@pytest.mark.parametrize("name", SCRIPTS)
def test_print_parse_fixpoint_shipped(name):
    s = parse(script_text(name))
    assert parse(format_script(s)) == s


def test_print_parse_fixpoint_assorted():
    snippets = [
        "eval -R^ | S & T.U",
        "eval (-R)^",
        "eval ((A | B) & C) . (D | E)",
        "eval syq(pair(A, B), C^)",
        "carrier B = 3; let X = eps[B] . omega[B]; eval inj(vec(X)) . L[B * PB <-> unit]",
        "eval rel(vec(I[A]) & O[A2 <-> unit])",
        "eval -(A . B)^",  # complement of a transposed composition
    ]
    for text in snippets:
        s = parse(text)
        assert parse(format_script(s)) == s, text


def test_printed_form_is_canonical():
    assert format_script(parse("eval ((A))")) == "eval A\n"
    assert format_script(parse("eval (A.B).C")) == "eval A.B.C\n"
    assert format_script(parse("eval A.(B.C)")) == "eval A.(B.C)\n"


# -- typechecking --------------------------------------------------------------------


def tiny_env():
    ctx = Context()
    A = ctx.base("A", ["x", "y"])
    N = ctx.base("N", ["1", "2", "3"])
    A2 = Product(A, A)
    carriers = {"N": N, "A": A, "A2": A2, "PN": Powerset(N)}
    reltypes = {"P": (N, A2)}
    return ctx, carriers, reltypes


def test_identity_composition_types():
    ctx, carriers, reltypes = tiny_env()
    s = parse("eval I[N] . P")
    typecheck(s, carriers, reltypes)
    assert s.final.ty == (carriers["N"], carriers["A2"])


def test_composition_mismatch():
    ctx, carriers, reltypes = tiny_env()
    with pytest.raises(DslTypeError) as info:
        typecheck(parse("eval P . P"), carriers, reltypes)
    msg = str(info.value)
    assert "N <-> (A * A)" in msg and "compose" in msg


def test_unknown_identifier():
    ctx, carriers, reltypes = tiny_env()
    with pytest.raises(DslTypeError) as info:
        typecheck(parse("eval Q"), carriers, reltypes)
    assert "not bound" in str(info.value)


def test_namespace_confusions():
    ctx, carriers, reltypes = tiny_env()
    with pytest.raises(DslTypeError):
        typecheck(parse("eval N"), carriers, reltypes)  # carrier as relation
    with pytest.raises(DslTypeError):
        typecheck(parse("eval I[P]"), carriers, reltypes)  # relation as carrier
    with pytest.raises(DslTypeError):
        typecheck(parse("let P = I[A]; eval P"), carriers, reltypes)
    with pytest.raises(DslTypeError):
        typecheck(parse("carrier A = 4; eval P"), carriers, reltypes)


def test_annotation_mismatch_reports_both_types():
    ctx, carriers, reltypes = tiny_env()
    with pytest.raises(DslTypeError) as info:
        typecheck(parse("let X : N <-> N = P; eval X"), carriers, reltypes)
    msg = str(info.value)
    assert "N <-> N" in msg and "N <-> (A * A)" in msg


def test_operator_type_rules():
    ctx, carriers, reltypes = tiny_env()
    bad = [
        "eval P | I[N]",
        "eval P & P^",
        "eval pi[N]",
        "eval rho[PN]",
        "eval rel(P)",
        "eval rel(vec(P) . L[unit <-> unit] . O[unit <-> N])",
        "eval inj(P)",
        "eval syq(P, I[A])",
        "eval pair(P, I[A2])",
    ]
    for text in bad:
        with pytest.raises(DslTypeError):
            typecheck(parse(text), carriers, reltypes)
    good = [
        ("eval P^", (carriers["A2"], carriers["N"])),
        ("eval -P", (carriers["N"], carriers["A2"])),
        ("eval vec(P)", (Product(carriers["N"], carriers["A2"]), UNIT)),
        ("eval syq(P, P)", (carriers["A2"], carriers["A2"])),
        ("eval pair(P, P)", (carriers["N"], Product(carriers["A2"], carriers["A2"]))),
        ("eval eps[A]", (carriers["A"], Powerset(carriers["A"]))),
        ("eval omega[A]", (Powerset(carriers["A"]), Powerset(carriers["A"]))),
        ("eval pi[A2] . rho[A2]^", (carriers["A2"], carriers["A2"])),
        ("eval rel(vec(P))", (carriers["N"], carriers["A2"])),
    ]
    for text, expect in good:
        s = parse(text)
        typecheck(s, carriers, reltypes)
        assert s.final.ty == expect, text


def test_inj_types_as_opaque_subset_source():
    ctx, carriers, reltypes = tiny_env()
    s = parse("let v = vec(I[A]); let J = inj(v); eval J . v")
    typecheck(s, carriers, reltypes)
    assert s.final.ty[1] == UNIT
    # two inj occurrences of the same vector still have distinct sources
    with pytest.raises(DslTypeError):
        typecheck(parse("let v = vec(I[A]); eval inj(v) | inj(v)"), carriers, reltypes)


def test_positions_in_type_errors():
    ctx, carriers, reltypes = tiny_env()
    with pytest.raises(DslTypeError) as info:
        typecheck(parse("let X = P;\nlet Y = X . X; eval Y"), carriers, reltypes)
    assert info.value.line == 2


# -- evaluation ---------------------------------------------------------------------


def test_identity_evaluates_to_identity():
    ctx, carriers, _ = tiny_env()
    out = run("eval I[A] . I[A]", ctx, carriers, {})
    assert out == ctx.identity(carriers["A"])


def test_constants_and_carrier_declarations():
    ctx, carriers, _ = tiny_env()
    out = run("carrier B = 4; eval L[B <-> unit] & -O[B <-> unit]", ctx, carriers, {})
    assert out.entry_count() == 4
    out = run("carrier B = 4; carrier PB = pow B; eval eps[B] . I[PB]", ctx, carriers, {})
    assert out == ctx.eps(ctx.base("B", 4))


def test_inj_evaluation():
    ctx, carriers, _ = tiny_env()
    out = run("let v = vec(I[A]); eval inj(v)", ctx, carriers, {})
    assert out.target == Product(carriers["A"], carriers["A"])
    assert out.entry_count() == 2
    assert out @ out.T == ctx.identity(out.source)


def test_shipped_scripts_match_pipeline_running_example():
    e = sample13()
    P = build_P(e)
    ctx, carriers = standard_env(P)
    C = dominance(P).C
    R = relativized_dominance(P)
    U = relativized_covering(R)
    assert run(script_text("cv1.ra"), ctx, carriers, {"P": P}) == C
    assert run(script_text("cv2.ra"), ctx, carriers, {"P": P}) == R
    assert run(script_text("cv4.ra"), ctx, carriers, {"P": P}) == U
    A = P.target.left
    for t in ("b", "h"):
        p = ctx.point_of(A, e.alternative_index(t))
        sol = maximal_solutions(cand_condorcet(R, p))
        assert run(script_text("cv3.ra"), ctx, carriers, {"P": P, "p": p}) == sol
    for t in ("e", "g"):
        p = ctx.point_of(A, e.alternative_index(t))
        sol = maximal_solutions(cand_uncovered(U, p))
        assert run(script_text("cv5.ra"), ctx, carriers, {"P": P, "p": p}) == sol


def test_cv3_solution_count_for_target_b():
    e = sample13()
    P = build_P(e)
    ctx, carriers = standard_env(P)
    p = ctx.point_of(P.target.left, e.alternative_index("b"))
    out = run(script_text("cv3.ra"), ctx, carriers, {"P": P, "p": p})
    assert out.entry_count() == 45


def test_shipped_scripts_match_pipeline_random():
    rng = random.Random(11)
    texts = {name: script_text(name) for name in SCRIPTS}
    for _ in range(12):
        n, m = rng.randint(1, 5), rng.randint(2, 4)
        alts = tuple("abcde"[:m])
        e = Election(
            alts,
            tuple(VoterOrder.from_ranking(rng.sample(alts, m)) for _ in range(n)),
        )
        P = build_P(e)
        ctx, carriers = standard_env(P)
        R = relativized_dominance(P)
        U = relativized_covering(R)
        assert run(texts["cv1.ra"], ctx, carriers, {"P": P}) == dominance(P).C
        assert run(texts["cv2.ra"], ctx, carriers, {"P": P}) == R
        assert run(texts["cv4.ra"], ctx, carriers, {"P": P}) == U
        t = rng.randrange(m)
        p = ctx.point_of(P.target.left, t)
        env = {"P": P, "p": p}
        assert run(texts["cv3.ra"], ctx, carriers, env) == maximal_solutions(
            cand_condorcet(R, p)
        )
        assert run(texts["cv5.ra"], ctx, carriers, env) == maximal_solutions(
            cand_uncovered(U, p)
        )

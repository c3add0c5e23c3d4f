"""Command-line front end.

Subcommands: winners, control, check, eval, reduce, gen-x4c, reduce-1in3.
Exit codes: 0 success (an infeasible control answer is still success),
1 usage or semantic error, 2 input parse error, 3 script type error.
Output is deterministic: identical inputs give byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .carrier import Powerset, size
from .control import ControlResult, solve
from .dsl import DslParseError, DslTypeError
from .dsl import evaluate as dsl_evaluate
from .dsl import parse as dsl_parse
from .dsl import typecheck as dsl_typecheck
from .election import (
    Election,
    ElectionError,
    ElectionParseError,
    Rule,
    build_P,
    covering,
    dominance,
    format_election,
    parse_election,
    uncovered,
    verify_deletion,
)
from .oracle import OracleCapError, oracle_solve
from .reduction import (
    OneInThreeInstance,
    ReductionError,
    X4CInstance,
    audit_margins,
    build_control_instance,
    gen_x4c,
    reduce_1in3_to_x4c,
    validate_x4c,
)
from .relalg import RelAlgError

_MATRIX_CELL_LIMIT = 4096
_VECTOR_LIST_LIMIT = 50


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; usage errors are exit 1 here
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    try:
        return Path(path).read_text("utf-8")
    except OSError as exc:
        raise ElectionError(f"cannot read {path}: {exc}") from None


def _load_election(path: str) -> Election:
    return parse_election(_read(path))


def _emit(doc: dict) -> None:
    print(json.dumps(doc, indent=2))


def _uncovered_names(e: Election, G) -> list[str]:
    names = uncovered(G)
    return [a for a in e.alternatives if a in names]


def _print_matrices(view, G, e: Election) -> None:
    print("dominance:")
    print(view.C.pretty())
    print("covering:")
    print(G.pretty())
    print("uncovered:", " ".join(_uncovered_names(e, G)))


def cmd_winners(args) -> int:
    e = _load_election(args.election)
    view = dominance(build_P(e))
    G = covering(view.C)
    if args.json:
        doc = view.to_json()
        doc["alternatives"] = list(e.alternatives)
        doc["uncovered"] = _uncovered_names(e, G)
        _emit(doc)
        return 0
    print("winner:", view.winner if view.winner is not None else "none")
    _print_matrices(view, G, e)
    return 0


def _render_control(res: ControlResult, backend: str, limit: Optional[int], as_json: bool) -> None:
    if as_json:
        doc = res.to_json(limit)
        doc["backend"] = backend
        _emit(doc)
        return
    print("target:", res.target)
    print("rule:", res.rule.value)
    print("feasible:", "true" if res.feasible else "false")
    if not res.feasible:
        return
    print("min_deletions:", res.min_deletions)
    print("num_optimal:", res.num_optimal)
    shown = 0
    for keep, delete in res.solutions:
        if limit is not None and shown == limit:
            print(f"... ({res.num_optimal - shown} more)")
            break
        d = ",".join(map(str, delete)) or "-"
        k = ",".join(map(str, keep)) or "-"
        print(f"  delete {d} | keep {k}")
        shown += 1


def cmd_control(args) -> int:
    e = _load_election(args.election)
    rule = Rule.from_string(args.rule)
    if args.oracle:
        res = oracle_solve(e, args.target, rule)
        backend = "oracle"
    else:
        res = solve(e, args.target, rule)
        backend = "symbolic"
    _render_control(res, backend, args.enumerate, args.json)
    return 0


def _parse_deletions(raw: str) -> list[int]:
    if not raw.strip():
        return []
    try:
        return [int(part) for part in raw.split(",")]
    except ValueError:
        raise ElectionError(f"bad deletion list {raw!r}: expected e.g. 1,2,5") from None


def cmd_check(args) -> int:
    e = _load_election(args.election)
    rule = Rule.from_string(args.rule)
    delete = _parse_deletions(args.delete)
    ok = verify_deletion(e, delete, args.target, rule)
    sub = e.without(delete)
    view = dominance(build_P(sub))
    G = covering(view.C)
    if args.json:
        doc = {
            "target": args.target,
            "rule": rule.value,
            "delete": sorted(delete),
            "wins": ok,
            "winner": view.winner,
            "uncovered": _uncovered_names(sub, G),
        }
        _emit(doc)
        return 0
    print(f"{args.target} wins under {rule.value} after deletion:", "true" if ok else "false")
    _print_matrices(view, G, sub)
    return 0


def cmd_eval(args) -> int:
    e = _load_election(args.election)
    P = build_P(e)
    ctx = P.ctx
    N, A2 = P.source, P.target
    A = A2.left
    carriers = {"N": N, "A": A, "A2": A2, "PN": Powerset(N)}
    relations = {"P": P}
    if args.target is not None:
        relations["p"] = ctx.point_of(A, e.alternative_index(args.target))
    script = dsl_parse(_read(args.script))
    dsl_typecheck(
        script, carriers, {k: (r.source, r.target) for k, r in relations.items()}
    )
    out = dsl_evaluate(script, ctx, carriers, relations)
    cells = size(out.source) * size(out.target)
    if args.json:
        doc = {
            "type": out.type_name(),
            "entry_count": str(out.entry_count()),
            "node_count": out.node_count(),
        }
        if cells <= _MATRIX_CELL_LIMIT:
            doc["rows"] = [ctx.label(out.source, i) for i in range(size(out.source))]
            doc["cols"] = [ctx.label(out.target, j) for j in range(size(out.target))]
            present = set(out.entries())
            doc["matrix"] = [
                [(i, j) in present for j in range(size(out.target))]
                for i in range(size(out.source))
            ]
        _emit(doc)
        return 0
    print("type:", out.type_name())
    print("entries:", out.entry_count())
    if cells <= _MATRIX_CELL_LIMIT:
        print(out.pretty())
    elif out.is_vector() and size(out.source) > 0:
        shown = 0
        for i, _ in out.entries(limit=_VECTOR_LIST_LIMIT):
            print(" ", ctx.label(out.source, i))
            shown += 1
        remaining = out.entry_count() - shown
        if remaining:
            print(f"  ... ({remaining} more)")
    return 0


def cmd_reduce(args) -> int:
    inst = X4CInstance.from_json(_load_json(args.instance))
    problems = validate_x4c(inst)
    if problems:
        for line in problems:
            print(line, file=sys.stderr)
        return 1
    e, layout = build_control_instance(inst)
    out = Path(args.out)
    out.write_text(format_election(e), "utf-8")
    sidecar = out.with_suffix(".layout.json")
    sidecar.write_text(json.dumps(layout.to_json(), indent=2) + "\n", "utf-8")
    print(f"wrote {out} ({e.n} voters, {e.m} alternatives)")
    print(f"wrote {sidecar} (target {layout.target}, budget {layout.budget})")
    if args.audit:
        audit = audit_margins(e, layout)
        _emit(audit.to_json())
        if not audit.ok:
            return 1
    return 0


def _load_json(path: str) -> dict:
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise ElectionParseError(f"{path}: {exc}") from None


def _write_json(doc: dict, out: Optional[str]) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, "utf-8")
        print(f"wrote {out}")


def cmd_gen_x4c(args) -> int:
    inst = gen_x4c(args.n, seed=args.seed)
    _write_json(inst.to_json(), args.out)
    return 0


def cmd_reduce_1in3(args) -> int:
    inst = OneInThreeInstance.from_json(_load_json(args.instance))
    _write_json(reduce_1in3_to_x4c(inst).to_json(), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="relctl",
        description="Symbolic analysis of Condorcet-style elections and "
        "exact control by deleting voters.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("winners", parents=[], help="winner, dominance, covering")
    p.add_argument("election")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_winners)

    p = sub.add_parser("control", help="minimum voter deletions for a target")
    p.add_argument("election")
    p.add_argument("--target", required=True)
    p.add_argument("--rule", required=True, choices=[r.value for r in Rule])
    p.add_argument("--enumerate", type=int, default=10, metavar="K")
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_control)

    p = sub.add_parser("check", help="verify one deletion set directly")
    p.add_argument("election")
    p.add_argument("--delete", default="", metavar="I,J,...")
    p.add_argument("--target", required=True)
    p.add_argument("--rule", required=True, choices=[r.value for r in Rule])
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("eval", help="run a .ra script against an election")
    p.add_argument("script")
    p.add_argument("--election", required=True)
    p.add_argument("--target", default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("reduce", help="build the control election of an X4C instance")
    p.add_argument("instance")
    p.add_argument("--out", required=True)
    p.add_argument("--audit", action="store_true")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("gen-x4c", help="generate a valid X4C instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen_x4c)

    p = sub.add_parser("reduce-1in3", help="reduce a 1-in-3 instance to X4C")
    p.add_argument("instance")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_reduce_1in3)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ElectionParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except DslParseError as exc:
        print(f"script parse error: {exc}", file=sys.stderr)
        return 2
    except DslTypeError as exc:
        print(f"script type error: {exc}", file=sys.stderr)
        return 3
    except (ElectionError, OracleCapError, ReductionError, RelAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

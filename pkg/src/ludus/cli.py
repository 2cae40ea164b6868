"""Command-line surface: evaluation, tracing, axiom checking, codec
utilities, table emission, and an interactive Opponent session.

Exit status: 0 on success, 1 on user error, 2 on an internal invariant
breach.  All output is line-oriented text or JSONL.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional, Tuple

from . import pcf
from .core import OMEGA, Budget, GameExpr, Position, default_budget, hide_game, label
from .strategy import (
    Strategy,
    check_axioms,
    hide_strategy,
    o_options,
    play,
    trace_records,
)
from .constructions import (
    NAT,
    case_strat,
    copycat,
    count_nonzeros_strat,
    dereliction,
    fix_strat,
    numeral_env,
    pred_strat,
    succ_strat,
    zero_strat,
    zeroq_strat,
)
from .stalg import (
    StAlgorithm,
    format_table,
    stalg_case,
    stalg_copycat,
    stalg_count_nonzeros,
    stalg_dereliction,
    stalg_fix,
    stalg_pred,
    stalg_succ,
    stalg_zero,
    stalg_zeroq,
)
from .tags import ext_decode, tag_str


class UserError(Exception):
    pass


def _default_fuel() -> int:
    v = os.environ.get("LUDUS_FUEL")
    if v is None:
        return pcf.DEFAULT_FUEL
    try:
        return int(v)
    except ValueError:
        raise UserError(f"LUDUS_FUEL is not an integer: {v!r}")


def _default_tag_budget() -> Budget:
    v = os.environ.get("LUDUS_TAG_BUDGET")
    if v is None:
        return default_budget()
    try:
        a, b = (int(x) for x in v.split(","))
        return Budget(a, b)
    except ValueError:
        raise UserError(f"LUDUS_TAG_BUDGET must be 'entries,length': {v!r}")


# ---------------------------------------------------------------------------
# Builtin registry: name with optional type parameter, e.g. cp@N, fix@N->N
# ---------------------------------------------------------------------------

_TYPED = {
    "cp": (copycat, stalg_copycat),
    "copycat": (copycat, stalg_copycat),
    "der": (dereliction, stalg_dereliction),
    "dereliction": (dereliction, stalg_dereliction),
    "case": (case_strat, stalg_case),
    "fix": (fix_strat, stalg_fix),
}

_PLAIN = {
    "zero": (zero_strat, stalg_zero),
    "succ": (succ_strat, stalg_succ),
    "pred": (pred_strat, stalg_pred),
    "zero?": (zeroq_strat, stalg_zeroq),
    "countnonzeros": (count_nonzeros_strat, stalg_count_nonzeros),
}


def registry_names() -> List[str]:
    return sorted(_PLAIN) + sorted(f"{n}[@TYPE]" for n in _TYPED)


def _lookup(name: str) -> Tuple[Strategy, Optional[StAlgorithm]]:
    base, _, typ = name.partition("@")
    if base in _PLAIN:
        if typ:
            raise UserError(f"{base} takes no type parameter")
        mk_s, mk_a = _PLAIN[base]
        return mk_s(), mk_a()
    if base in _TYPED:
        if typ:
            try:
                g = pcf.type_game(pcf.parse_type(typ))
            except pcf.PcfSyntaxError as e:
                raise UserError(f"bad type parameter {typ!r}: {e}")
        else:
            g = NAT
        mk_s, mk_a = _TYPED[base]
        return mk_s(g), mk_a(g)
    raise UserError(
        f"unknown strategy {name!r}; known: {', '.join(registry_names())}")


def _parse_term(src: str) -> pcf.PcfTerm:
    try:
        t = pcf.parse(src)
        pcf.typecheck([], t)
        return t
    except pcf.PcfSyntaxError as e:
        raise UserError(f"syntax error at {e.line}:{e.col}: {e.msg}")
    except pcf.PcfTypeError as e:
        raise UserError(f"type error: {e}")


def _print_value(v: Optional[int]) -> None:
    print(v if v is not None else "undefined (fuel exhausted)")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_eval(args) -> int:
    t = _parse_term(args.term)
    _print_value(pcf.eval(t, fuel=args.fuel))
    return 0


def _cmd_oracle_eval(args) -> int:
    from . import oracle

    t = _parse_term(args.term)
    _print_value(oracle.ref_eval(t, fuel=args.fuel))
    return 0


def _cmd_trace(args) -> int:
    if args.strategy:
        sigma, _ = _lookup(args.target)
        env = numeral_env(args.input)
    else:
        t = _parse_term(args.target)
        ty = pcf.typecheck([], t)
        if str(ty) != "N":
            raise UserError(f"trace needs a ground term, got type {ty}")
        s, _ = pcf.elaborate(pcf.compile(t))
        sigma = s
        env = numeral_env(None)
    if args.hide:
        sigma = hide_strategy(sigma, OMEGA)
    tr = play(sigma, env, fuel=args.fuel)
    for rec in trace_records(sigma.game, tr.position):
        print(json.dumps(rec))
    print(json.dumps({"status": tr.status}))
    return 0


def _cmd_check(args) -> int:
    sigma, _ = _lookup(args.name)
    report = check_axioms(sigma, depth=args.depth, budget=args.tag_budget)
    for ax in ("s1", "s2", "innocence", "bracketing"):
        print(f"{ax}: {'pass' if report[ax] else 'FAIL'}")
    print(f"positions explored: {report['positions']}")
    for ax, msg in report["violations"]:
        print(f"violation [{ax}]: {msg}")
    return 0 if not report["violations"] else 1


def _cmd_emit_table(args) -> int:
    _, alg = _lookup(args.name)
    for line in format_table(alg):
        print(line)
    return 0


def _cmd_codec(args) -> int:
    if args.op != "ede":
        raise UserError(f"unknown codec operation {args.op!r} (supported: ede)")
    try:
        seq = ext_decode(args.tag)
    except Exception as e:
        raise UserError(f"cannot decode {args.tag!r}: {e}")
    print(" ".join(str(n) for n in seq))
    return 0


def _fmt_move(g: GameExpr, s: Position, i: int) -> str:
    rec = trace_records(g, s.prefix(i + 1))[-1]
    inner = rec["inner"]
    tags = "".join(f"({t})" for t in inner["tags"])
    pr = rec["priority"]
    just = "" if rec["justifier"] is None else f" -> {rec['justifier']}"
    return (f"{inner['substance']}{tags} @{rec['outer']} "
            f"[{rec['op']}{rec['qa']} pr={pr}]{just}")


def _cmd_repl(args) -> int:
    sigma, _ = _lookup(args.name)
    g = sigma.game
    s: Position = Position()
    print(f"interactive session on {sigma.name}; index selects an O-move, "
          ":hide shows the hidden external position, :quit exits")
    while True:
        # auto-dummies after internal P-moves, then the strategy's reply
        while len(s) % 2 == 1 or (len(s) > 0 and label(g, s.move(len(s) - 1)).pr > 0):
            if len(s) % 2 == 0:
                from .core import dummy
                from .strategy import dummy_pointer

                dm = dummy(g, s.move(len(s) - 1))
                if dm is None:
                    print("no dummy for internal move; stopping")
                    return 2
                s = s.snoc(dm, dummy_pointer(g, s))
                print(f"  [{len(s)-1}] (dummy) {_fmt_move(g, s, len(s)-1)}")
            else:
                r = sigma.next_move(s)
                if r is None:
                    print("strategy has no response here; play complete")
                    return 0
                s = s.snoc(*r)
                print(f"  [{len(s)-1}] (P) {_fmt_move(g, s, len(s)-1)}")
        opts = o_options(g, s, args.tag_budget)
        if not opts:
            print("no legal O-moves; play complete")
            return 0
        for k, (m, j) in enumerate(opts):
            probe = s.snoc(m, j)
            print(f"  {k}: {_fmt_move(g, probe, len(probe)-1)}")
        try:
            line = input("O> ").strip()
        except EOFError:
            return 0
        if line == ":quit":
            return 0
        if line == ":hide":
            from .core import hide_jseq

            hidden = hide_jseq(g, s, OMEGA)
            hg = hide_game(g, OMEGA)
            for rec in trace_records(hg, hidden):
                print(json.dumps(rec))
            continue
        try:
            k = int(line)
            m, j = opts[k]
        except (ValueError, IndexError):
            print(f"pick an index 0..{len(opts)-1}, :hide, or :quit")
            continue
        s = s.snoc(m, j)
        print(f"  [{len(s)-1}] (O) {_fmt_move(g, s, len(s)-1)}")


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def _build_parser(fuel: int, tag_budget: Budget) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ludus",
                                 description="game-semantic virtual machine")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("eval", help="evaluate a closed ground term")
    p.add_argument("term")
    p.add_argument("--fuel", type=int, default=fuel)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("oracle-eval", help="evaluate with the reference interpreter")
    p.add_argument("term")
    p.add_argument("--fuel", type=int, default=fuel)
    p.set_defaults(fn=_cmd_oracle_eval)

    p = sub.add_parser("trace", help="print a play as JSONL move records")
    p.add_argument("target", help="a term, or a strategy name with --strategy")
    p.add_argument("--strategy", action="store_true",
                   help="treat target as a builtin strategy name")
    p.add_argument("--input", type=int, default=None,
                   help="numeral fed to a builtin strategy's domain")
    p.add_argument("--hide", action="store_true",
                   help="trace the fully hidden strategy")
    p.add_argument("--fuel", type=int, default=fuel)
    p.set_defaults(fn=_cmd_trace)

    p = sub.add_parser("check", help="run the strategy axiom checks")
    p.add_argument("name")
    p.add_argument("--depth", type=int, default=10)
    p.set_defaults(fn=_cmd_check, tag_budget=tag_budget)

    p = sub.add_parser("repl", help="interactive Opponent session")
    p.add_argument("name")
    p.set_defaults(fn=_cmd_repl, tag_budget=tag_budget)

    p = sub.add_parser("emit-table", help="print a builtin instruction table")
    p.add_argument("name")
    p.set_defaults(fn=_cmd_emit_table)

    p = sub.add_parser("codec", help="tag codec utilities")
    p.add_argument("op", help="ede: decode an outer tag to a natural sequence")
    p.add_argument("tag")
    p.set_defaults(fn=_cmd_codec)

    return ap


def main(argv: Optional[List[str]] = None) -> int:
    try:
        ap = _build_parser(_default_fuel(), _default_tag_budget())
        try:
            args = ap.parse_args(argv)
        except SystemExit as e:
            return 1 if e.code not in (0, None) else 0
        return args.fn(args)
    except UserError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 0
    except Exception as e:  # invariant breach inside the machine
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

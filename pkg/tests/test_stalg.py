"""Symbolic tables over the instruction game: move encodings, transcribed
tables, realization against the builtin strategies, standardness, the table
combinators, and specialization."""

import pytest

from ludus.tags import InnerElement, Move, mk_move, parse_outer
from ludus.core import OMEGA, Budget, is_move
from ludus.strategy import BuiltinStrategy, equal_up_to, hide_strategy, play
from ludus.constructions import (
    NAT,
    UNIT,
    arrow_c,
    case_strat,
    concat_strat,
    copycat,
    count_nonzeros_strat,
    count_yes,
    curry_strat,
    dereliction,
    eval_numeral,
    fix_strat,
    numeral_env,
    pairing_strat,
    pred_strat,
    promotion_strat,
    succ_strat,
    tensor_c,
    tensor_strat,
    uncurry_strat,
    zero_strat,
    zeroq_strat,
)
from ludus.stalg import (
    Entry,
    EntryTable,
    IMove,
    MoveEncoding,
    cls,
    decode_move,
    encode_move,
    first_recursion,
    format_table,
    initial_inners,
    instr_game,
    instr_next,
    is_standard,
    lit,
    mview,
    query_state,
    realize,
    specialize,
    stalg_case,
    stalg_concat,
    stalg_copycat,
    stalg_count_nonzeros,
    stalg_curry,
    stalg_dereliction,
    stalg_fix,
    stalg_pairing,
    stalg_pred,
    stalg_promotion,
    stalg_succ,
    stalg_tensor,
    stalg_uncurry,
    stalg_zero,
    stalg_zeroq,
)

B11 = Budget(1, 1)

QI = "q^I"
QTH = "q^T"
QT = "qT"


def el(sub, *tags):
    return InnerElement(sub, tags)


def im(sym, comp):
    return IMove(sym, comp)


QH_E, QH_W = el("q^", "E"), el("q^", "W")
Q_E, Q_W = el("q", "E"), el("q", "W")
YES_E, YES_W = el("yes", "E"), el("yes", "W")
NO_E, NO_W = el("no", "E"), el("no", "W")


# ---------------------------------------------------------------------------
# Move encodings
# ---------------------------------------------------------------------------

class TestMoveEncoding:
    def test_roundtrip_on_played_moves(self):
        sigma = succ_strat()
        g = sigma.game
        tr = play(sigma, numeral_env(2))
        assert tr.status == "completed"
        for i in range(len(tr.position)):
            m = tr.position.move(i)
            enc = encode_move(g, m)
            assert decode_move(g, enc) == m

    def test_roundtrip_on_composite_moves(self):
        sigma = concat_strat(promotion_strat(succ_strat()), pred_strat())
        g = sigma.game
        tr = play(sigma, numeral_env(1))
        assert tr.status == "completed"
        for i in range(len(tr.position)):
            m = tr.position.move(i)
            assert decode_move(g, encode_move(g, m)) == m

    def test_encode_rejects_non_move(self):
        g = succ_strat().game
        with pytest.raises(ValueError):
            encode_move(g, mk_move("q^", ()))

    def test_decode_rejects_garbage(self):
        g = succ_strat().game
        assert decode_move(g, MoveEncoding(el("nope", "E"), ())) is None
        assert decode_move(g, MoveEncoding(QH_E, ("x",))) is None
        assert decode_move(g, MoveEncoding(QH_E, ("[",))) is None  # unclosed
        # a wellformed word that is not a move of the game
        assert decode_move(g, MoveEncoding(QH_E, tuple("[]#"))) is None


# ---------------------------------------------------------------------------
# The transcribed successor table, row by row
# ---------------------------------------------------------------------------

SUCC_ROWS = [
    ((im(QI, 3),), im(QI, 2)),
    ((im(QI, 3), im(QI, 2), im(QH_E, 2)), im(QH_W, 3)),
    ((im(QTH, 3),), im(QI, 2)),
    ((im(QTH, 3), im(QI, 2), im(QH_E, 2)), im("[", 3)),
    ((im(QTH, 3), im(QI, 2), im(QH_E, 2), im("[", 3), im(QT, 3)),
     im("]", 3)),
    ((im(QTH, 3), im(QI, 2), im(QH_E, 2), im("[", 3), im(QT, 3),
      im("]", 3), im(QT, 3)), im("#", 3)),
    ((im(QTH, 3), im(QI, 2), im(QH_E, 2), im("[", 3), im(QT, 3),
      im("]", 3), im(QT, 3), im("#", 3), im(QT, 3)), im("ok", 3)),
    ((im(QI, 3), im(QI, 2), im(Q_E, 2)), im(QI, 0)),
    ((im(QI, 3), im(QI, 2), im(Q_E, 2), im(QI, 0), im(NO_W, 0)),
     im(NO_E, 3)),
    ((im(QTH, 3), im(QI, 2), im(Q_E, 2)), im(QI, 0)),
    ((im(QTH, 3), im(QI, 2), im(Q_E, 2), im(QI, 0), im(NO_W, 0)),
     im("ok", 3)),
    ((im(QI, 3), im(QI, 2), im(Q_E, 2), im(QI, 0), im(YES_W, 0)),
     im(Q_W, 3)),
    ((im(QTH, 3), im(QI, 2), im(Q_E, 2), im(QI, 0), im(YES_W, 0)),
     im("[", 3)),
    ((im(QTH, 3), im(QI, 2), im(Q_E, 2), im(QI, 0), im(YES_W, 0),
      im("[", 3), im(QT, 3)), im("]", 3)),
    ((im(QTH, 3), im(QI, 2), im(Q_E, 2), im(QI, 0), im(YES_W, 0),
      im("[", 3), im(QT, 3), im("]", 3), im(QT, 3)), im("#", 3)),
    ((im(QTH, 3), im(QI, 2), im(Q_E, 2), im(QI, 0), im(YES_W, 0),
      im("[", 3), im(QT, 3), im("]", 3), im(QT, 3), im("#", 3), im(QT, 3)),
     im("ok", 3)),
    ((im(QI, 3), im(QI, 2), im(YES_W, 2)), im(YES_E, 3)),
    ((im(QI, 3), im(QI, 2), im(NO_W, 2)), im(YES_E, 3)),
    ((im(QTH, 3), im(QI, 2), im(YES_W, 2)), im("ok", 3)),
    ((im(QTH, 3), im(QI, 2), im(NO_W, 2)), im("ok", 3)),
]


class TestSuccessorTable:
    def test_state_space_and_query(self):
        alg = stalg_succ()
        assert alg.has_state((QH_E,))
        assert not alg.has_state((QH_E, QH_W))
        assert alg.query(QH_E)
        for other in (QH_W, Q_E, YES_W, NO_E):
            assert not alg.query(other)
        assert alg.view_scope == 11

    @pytest.mark.parametrize("run,out", SUCC_ROWS)
    def test_row(self, run, out):
        alg = stalg_succ()
        got = instr_next(alg, (QH_E,), run)
        assert got is not None, f"undefined on {run}"
        assert got[0] == out


# ---------------------------------------------------------------------------
# The transcribed copy-cat table, row by row
# ---------------------------------------------------------------------------

def copycat_rows():
    rows = [((im(QI, 3),), im(QI, 2)),
            ((im(QTH, 3),), im(QTH, 2))]
    for a in ("q^", "q", "yes", "no"):
        rows.append(((im(QI, 3), im(QI, 2), im(el(a, "W"), 2)),
                     im(el(a, "E"), 3)))
        rows.append(((im(QI, 3), im(QI, 2), im(el(a, "E"), 2)),
                     im(el(a, "W"), 3)))
    # spelling relays: question mirrored down, answer mirrored up
    for x in (QTH, QT):
        for y in ("#", "l", "[", "]"):
            rows.append(((im(x, 3), im(x, 2), im(y, 2)), im(y, 3)))
        rows.append(((im(x, 3), im(x, 2), im("ok", 2)), im("ok", 3)))
    for x in ("#", "l", "[", "]"):
        rows.append(((im(x, 2), im(x, 3), im(QT, 3)), im(QT, 2)))
    return rows


class TestCopycatTable:
    def test_states_cover_openings(self):
        alg = stalg_copycat(NAT)
        assert alg.has_state((QH_E,))
        assert alg.view_scope == 3

    @pytest.mark.parametrize("run,out", copycat_rows())
    def test_row(self, run, out):
        alg = stalg_copycat(NAT)
        got = instr_next(alg, (QH_E,), run)
        assert got is not None, f"undefined on {run}"
        assert got[0] == out


# ---------------------------------------------------------------------------
# Bracket views of spelling runs
# ---------------------------------------------------------------------------

class TestMView:
    def test_bracket_free_is_empty(self):
        run = tuple(im(c, 3) for c in "#l#")
        assert mview(run, 0) == ()

    def test_two_groups_at_depth_zero(self):
        run = tuple(im(c, 3) for c in "[#][l]")
        kept = mview(run, 0)
        assert [x.sym for x in kept] == ["[", "]", "[", "]"]

    def test_depth_filter(self):
        run = tuple(im(c, 3) for c in "[[[#]]]")
        assert [x.sym for x in mview(run, 1)] == ["[", "[", "]", "]"]
        assert [x.sym for x in mview(run, 0)] == ["[", "]"]

    def test_component_filter(self):
        run = (im("[", 3), im("[", 2), im("]", 2), im("]", 3))
        assert [x.sym for x in mview(run, 0, comp=2)] == ["[", "]"]


# ---------------------------------------------------------------------------
# Realization agrees with the builtin strategies
# ---------------------------------------------------------------------------

class TestRealizeAtoms:
    @pytest.mark.parametrize("mk_alg,mk_str,args", [
        (stalg_zero, zero_strat, ()),
        (stalg_succ, succ_strat, ()),
        (stalg_pred, pred_strat, ()),
        (stalg_zeroq, zeroq_strat, ()),
        (stalg_copycat, copycat, (NAT,)),
        (stalg_dereliction, dereliction, (NAT,)),
    ], ids=["zero", "succ", "pred", "zeroq", "copycat", "dereliction"])
    def test_equal_depth_12(self, mk_alg, mk_str, args):
        alg = mk_alg(*args)
        rs = realize(alg)
        assert rs.game is mk_str(*args).game
        assert equal_up_to(rs, mk_str(*args), depth=12, budget=B11)

    @pytest.mark.parametrize("mk_alg,mk_str,args", [
        (stalg_case, case_strat, (NAT,)),
        (stalg_fix, fix_strat, (NAT,)),
        (stalg_count_nonzeros, count_nonzeros_strat, ()),
    ], ids=["case", "fix", "count-nonzeros"])
    def test_equal_depth_8(self, mk_alg, mk_str, args):
        alg = mk_alg(*args)
        assert equal_up_to(realize(alg), mk_str(*args), depth=8, budget=B11)

    def test_copycat_on_tensor_game(self):
        a = tensor_c(NAT, NAT)
        assert equal_up_to(realize(stalg_copycat(a)), copycat(a),
                           depth=8, budget=B11)

    def test_realized_numeral_play(self):
        tr = play(realize(stalg_succ()), numeral_env(2))
        assert tr.status == "completed"
        assert count_yes(tr.position) == 3

    def test_query_state_filters_view(self):
        alg = stalg_succ()
        g = alg.game
        tr = play(succ_strat(), numeral_env(1))
        vm = [tr.position.move(i) for i in range(len(tr.position))]
        st = query_state(alg, vm)
        assert st == (QH_E,)

    def test_instruction_game_shape(self):
        ig = instr_game(succ_strat().game)
        assert ig.base is succ_strat().game
        assert is_move(ig.shape, mk_move("q^I", ("W", "E")))


# ---------------------------------------------------------------------------
# Standardness
# ---------------------------------------------------------------------------

class TestStandardness:
    @pytest.mark.parametrize("mk,args", [
        (stalg_zero, ()), (stalg_succ, ()), (stalg_pred, ()),
        (stalg_zeroq, ()), (stalg_copycat, (NAT,)),
        (stalg_dereliction, (NAT,)), (stalg_case, (NAT,)),
        (stalg_fix, (NAT,)),
    ], ids=["zero", "succ", "pred", "zeroq", "copycat", "dereliction",
            "case", "fix"])
    def test_builders_standard(self, mk, args):
        assert is_standard(mk(*args))

    def test_count_nonzeros_not_standard(self):
        assert not is_standard(stalg_count_nonzeros())

    def test_combined_tables_standard(self):
        assert is_standard(stalg_tensor(stalg_succ(), stalg_pred()))
        assert is_standard(stalg_promotion(stalg_succ()))
        assert is_standard(stalg_concat(stalg_promotion(stalg_succ()),
                                        stalg_pred()))

    def test_combinators_reject_non_standard(self):
        with pytest.raises(ValueError):
            stalg_tensor(stalg_succ(), stalg_count_nonzeros())
        with pytest.raises(ValueError):
            stalg_promotion(stalg_count_nonzeros())


# ---------------------------------------------------------------------------
# Combinator coherence: realize(combine(tables)) == combine(realize(tables))
# ---------------------------------------------------------------------------

class TestCombinators:
    def test_tensor(self):
        alg = stalg_tensor(stalg_succ(), stalg_pred())
        ref = tensor_strat(succ_strat(), pred_strat())
        assert realize(alg).game is ref.game
        assert equal_up_to(realize(alg), ref, depth=8, budget=B11)

    def test_pairing(self):
        alg = stalg_pairing(stalg_zeroq(), stalg_zeroq())
        ref = pairing_strat(zeroq_strat(), zeroq_strat())
        assert realize(alg).game is ref.game
        assert equal_up_to(realize(alg), ref, depth=8, budget=B11)

    def test_promotion(self):
        alg = stalg_promotion(stalg_succ())
        ref = promotion_strat(succ_strat())
        assert realize(alg).game is ref.game
        assert equal_up_to(realize(alg), ref, depth=10, budget=B11)

    def test_concat(self):
        alg = stalg_concat(stalg_promotion(stalg_succ()), stalg_pred())
        ref = concat_strat(promotion_strat(succ_strat()), pred_strat())
        assert realize(alg).game is ref.game
        assert equal_up_to(realize(alg), ref, depth=10, budget=B11)

    def test_curry_uncurry(self):
        a = tensor_c(NAT, NAT)
        alg_cp, cp = stalg_copycat(a), copycat(a)
        alg_c, c = stalg_curry(alg_cp), curry_strat(cp)
        assert realize(alg_c).game is c.game
        assert equal_up_to(realize(alg_c), c, depth=8, budget=B11)
        alg_u, u = stalg_uncurry(alg_c), uncurry_strat(c)
        assert realize(alg_u).game is u.game
        assert equal_up_to(realize(alg_u), u, depth=8, budget=B11)

    def test_concat_tower_evaluates(self):
        three = stalg_zero(UNIT)
        for _ in range(3):
            three = stalg_concat(stalg_promotion(three), stalg_succ())
        hid = hide_strategy(realize(three), OMEGA)
        assert eval_numeral(hid) == (3, "completed")


# ---------------------------------------------------------------------------
# Specialization and first recursion
# ---------------------------------------------------------------------------

def _stalg_numeral(n):
    acc = stalg_zero(UNIT)
    for _ in range(n):
        acc = stalg_concat(stalg_promotion(acc), stalg_succ())
    return acc


def _const_zero_fn():
    """A functional ignoring its argument: unit => (nat => nat), answering
    zero; as a table and as a strategy."""
    g = arrow_c(UNIT, arrow_c(NAT, NAT))
    qh = el("q^", "E", "E")
    no = el("no", "E", "E")
    entries = [
        Entry((lit(QI, 3), lit(QI, 2), lit(qh, 2)), no, 3, sel="partner"),
        Entry((lit(QI, 3),), QI, 2),
        Entry((lit(QTH, 3), lit(QI, 2), lit(qh, 2)), "ok", 3),
        Entry((lit(QTH, 3),), QI, 2),
    ]
    init = initial_inners(g)
    alg = EntryTable(g, "const-zero-fn", frozenset((i,) for i in init),
                     lambda i: i in init, entries)

    def fn(gg, s):
        m = s.move(len(s) - 1)
        if m.inner == qh:
            return mk_move("no", ("E", "E")), len(s) - 1
        return None

    return alg, BuiltinStrategy(g, "const-zero-fn", fn)


class TestSpecialize:
    def test_m0_is_composition(self):
        sp = specialize([_stalg_numeral(2)], stalg_succ(), m=0)
        assert is_standard(sp)
        hid = hide_strategy(realize(sp), OMEGA)
        assert eval_numeral(hid) == (3, "completed")

    def test_m2_unsupported(self):
        with pytest.raises(NotImplementedError):
            specialize([_stalg_numeral(0)], stalg_succ(), m=2)

    def test_first_recursion_of_constant(self):
        alg, phi = _const_zero_fn()
        assert equal_up_to(realize(alg), phi, depth=6, budget=B11)
        frt = first_recursion(alg)
        ref = concat_strat(promotion_strat(phi), fix_strat(NAT))
        assert realize(frt).game is ref.game
        assert equal_up_to(realize(frt), ref, depth=8, budget=B11)
        assert eval_numeral(hide_strategy(realize(frt), OMEGA)) == \
            (0, "completed")


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

class TestFormatTable:
    def test_entry_table_lines(self):
        lines = format_table(stalg_zero())
        assert len(lines) == 2
        assert all("->" in ln and "|" in ln for ln in lines)

    def test_combined_table_summary(self):
        lines = format_table(stalg_promotion(stalg_succ()))
        assert len(lines) == 1

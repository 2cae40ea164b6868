"""Play engine, strategy axioms, hiding laws, and bounded equality."""

import pytest

from ludus.tags import (
    EMPTY_TAG,
    InnerElement,
    Move,
    bang_tag,
    mk_move,
)
from ludus.core import (
    Budget,
    OMEGA,
    is_position,
    label,
    satisfies_dummy_discipline,
)
from ludus.strategy import (
    BuiltinStrategy,
    FiniteTable,
    check_axioms,
    dummy_pointer,
    equal_up_to,
    hide_strategy,
    play,
    scripted_env,
)
from ludus.constructions import (
    NAT,
    NO,
    Q,
    Q_HAT,
    YES,
    arrow_c,
    concat_strat,
    count_yes,
    eval_numeral,
    numeral_env,
    pred_strat,
    promotion_strat,
    succ_strat,
    zeroq_strat,
)

T0 = bang_tag(EMPTY_TAG, EMPTY_TAG)
B11 = Budget(1, 1)


def axioms_ok(report):
    return all(report[k] for k in ("s1", "s2", "innocence", "bracketing"))


def assert_sound_trace(sigma, trace):
    """Engine soundness: the trace is a position of the game, and every
    internal O-move is the forced dummy of its predecessor."""
    g = sigma.game
    s = trace.position
    assert is_position(g, s), f"trace of {sigma.name} is not a position"
    assert satisfies_dummy_discipline(g, s)
    for i in range(len(s)):
        m, j = s.entry(i)
        lab = label(g, m)
        if lab.op == "O" and lab.pr > 0:
            prev = s.prefix(i)
            from ludus.core import dummy

            assert m == dummy(g, s.move(i - 1))
            assert j == dummy_pointer(g, prev)


# ---------------------------------------------------------------------------
# The play engine and its four statuses
# ---------------------------------------------------------------------------

class TestPlayEngine:
    def test_completed(self):
        tr = play(succ_strat(), numeral_env(2))
        assert tr.status == "completed"
        assert count_yes(tr.position) == 3
        assert_sound_trace(succ_strat(), tr)

    def test_o_stuck_on_illegal_env_move(self):
        bad = scripted_env([(mk_move(Q, ("E",)), None)])  # q is not an opening
        tr = play(succ_strat(), bad)
        assert tr.status == "o-stuck"
        assert len(tr.position) == 0

    def test_p_undefined(self):
        mute = BuiltinStrategy(succ_strat().game, "mute", lambda g, s: None)
        tr = play(mute, numeral_env(0))
        assert tr.status == "p-undefined"
        assert len(tr.position) == 1

    def test_fuel_exhausted(self):
        tr = play(succ_strat(), numeral_env(50), fuel=5)
        assert tr.status == "fuel-exhausted"

    def test_illegal_strategy_move_raises(self):
        def fn(g, s):
            return mk_move(Q_HAT, ("E",)), None  # O-move offered by P

        liar = BuiltinStrategy(succ_strat().game, "liar", fn)
        with pytest.raises(ValueError):
            play(liar, numeral_env(0))

    def test_successor_opening_response(self):
        sigma = succ_strat()
        s = play(sigma, scripted_env([(mk_move(Q_HAT, ("E",)), None)]),
                 fuel=1).position
        assert sigma.next_move(s) == (mk_move(Q_HAT, ("W",), T0), 0)


# ---------------------------------------------------------------------------
# Finite strategy tables
# ---------------------------------------------------------------------------

def _numeral_table(extra=None):
    from ludus.constructions import UNIT

    g = arrow_c(UNIT, NAT)
    k_open = ((Q_HAT, ("E",)),)
    k_more = ((Q_HAT, ("E",)), (YES, ("E",)), (Q, ("E",)))
    k_even_more = ((YES, ("E",)), (Q, ("E",)), (YES, ("E",)))
    entries = {
        k_open: [(mk_move(YES, ("E",)), "last-o")],
        k_more: [(mk_move(NO, ("E",)), "last-o")],
        k_even_more: [(mk_move(NO, ("E",)), "last-o")],
    }
    if extra:
        for k, v in extra.items():
            entries.setdefault(k, []).extend(v)
    return FiniteTable(g, "one", entries)


class TestFiniteTable:
    def test_table_numeral_behaves(self):
        tr = play(_numeral_table(), numeral_env())
        assert tr.status == "completed"
        assert count_yes(tr.position) == 1

    def test_table_passes_axioms(self):
        rep = check_axioms(_numeral_table(), depth=8, budget=B11)
        assert axioms_ok(rep)

    def test_corrupted_table_violates_determinism(self):
        k_open = ((Q_HAT, ("E",)),)
        bad = _numeral_table({k_open: [(mk_move(NO, ("E",)), "last-o")]})
        rep = check_axioms(bad, depth=4, budget=B11)
        assert not rep["s2"]
        assert any(ax == "s2" for ax, _ in rep["violations"])


# ---------------------------------------------------------------------------
# Axiom checks on the arithmetic strategies
# ---------------------------------------------------------------------------

class TestAxioms:
    @pytest.mark.parametrize("mk", [succ_strat, pred_strat, zeroq_strat])
    def test_builtins_pass(self, mk):
        rep = check_axioms(mk(), depth=10, budget=B11)
        assert axioms_ok(rep), rep["violations"]

    def test_engine_soundness_on_plays(self):
        for sigma, n in ((succ_strat(), 3), (pred_strat(), 2), (zeroq_strat(), 0)):
            tr = play(sigma, numeral_env(n), deep_check=True)
            assert tr.status == "completed"
            assert_sound_trace(sigma, tr)


# ---------------------------------------------------------------------------
# Hiding laws
# ---------------------------------------------------------------------------

def _succ_then_pred():
    return concat_strat(promotion_strat(succ_strat()), pred_strat())


class TestHiding:
    def test_hiding_a_normalized_strategy_is_identity(self):
        sigma = succ_strat()
        assert hide_strategy(sigma, OMEGA) is sigma
        assert hide_strategy(sigma, 0) is sigma

    def test_iterated_hiding_law(self):
        cc = _succ_then_pred()
        a = hide_strategy(hide_strategy(cc, 1), 1)
        b = hide_strategy(cc, 2)
        assert equal_up_to(a, b, depth=10, budget=B11)

    def test_fully_hidden_composite_passes_axioms(self):
        rep = check_axioms(hide_strategy(_succ_then_pred(), OMEGA),
                           depth=10, budget=B11)
        assert axioms_ok(rep), rep["violations"]

    def test_hidden_successor_then_predecessor_is_identity(self):
        hs = hide_strategy(_succ_then_pred(), OMEGA)
        for n in range(5):
            assert eval_numeral(hs, n) == (n, "completed")

    def test_hidden_trace_is_sound(self):
        hs = hide_strategy(_succ_then_pred(), OMEGA)
        tr = play(hs, numeral_env(2), deep_check=True)
        assert tr.status == "completed"
        assert_sound_trace(hs, tr)


# ---------------------------------------------------------------------------
# Bounded extensional equality
# ---------------------------------------------------------------------------

class TestEqualUpTo:
    def test_reflexive(self):
        assert equal_up_to(succ_strat(), succ_strat(), depth=8, budget=B11)

    def test_distinguishes_successor_from_predecessor(self):
        assert not equal_up_to(succ_strat(), pred_strat(), depth=8, budget=B11)

    def test_rejects_different_games(self):
        with pytest.raises(ValueError):
            equal_up_to(succ_strat(), zeroq_strat(), depth=8, budget=B11)

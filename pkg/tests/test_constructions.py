"""Arithmetic strategies, combinators on strategies, and their interactions."""

import pytest

from ludus.tags import (
    EMPTY_TAG,
    InnerElement,
    Move,
    bang_tag,
    box,
    leaf,
    mk_move,
    sep,
)
from ludus.core import Budget, OMEGA, is_position
from ludus.strategy import check_axioms, equal_up_to, play, scripted_env
from ludus.constructions import (
    BOOL,
    FF,
    NAT,
    NO,
    Q,
    Q_HAT,
    TT,
    UNIT,
    YES,
    BuiltinStrategy,
    arrow_c,
    case_strat,
    compose_strat,
    concat_strat,
    count_yes,
    curry_strat,
    dereliction,
    copycat,
    eval_numeral,
    fix_strat,
    lolli_c,
    numeral_env,
    numeral_pipeline,
    numeral_strat,
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

T0 = bang_tag(EMPTY_TAG, EMPTY_TAG)
B11 = Budget(1, 1)


def axioms_ok(rep):
    return all(rep[k] for k in ("s1", "s2", "innocence", "bracketing"))


def entries(trace):
    return [(trace.position.move(k), trace.position.just(k))
            for k in range(len(trace.position))]


# ---------------------------------------------------------------------------
# Arithmetic on lazy naturals
# ---------------------------------------------------------------------------

class TestArithmetic:
    def test_successor(self):
        for n in range(6):
            assert eval_numeral(succ_strat(), n) == (n + 1, "completed")

    def test_predecessor(self):
        assert eval_numeral(pred_strat(), 0) == (0, "completed")
        for n in range(1, 6):
            assert eval_numeral(pred_strat(), n) == (n - 1, "completed")

    def test_numerals(self):
        for n in range(6):
            assert eval_numeral(numeral_strat(n)) == (n, "completed")

    def test_zero(self):
        assert eval_numeral(zero_strat()) == (0, "completed")

    def test_zero_test(self):
        def drive(n):
            tr = play(zeroq_strat(), numeral_env(n))
            assert tr.status == "completed"
            return tr.position.move(len(tr.position) - 1).inner.substance

        assert drive(0) == TT
        assert drive(3) == FF

    def test_copycat_and_dereliction_are_identities(self):
        for n in range(4):
            assert eval_numeral(dereliction(NAT), n) == (n, "completed")
        # plain copycat: the domain is not banged, so answer per question
        cc = copycat(NAT)
        tr = play(cc, numeral_env(2), deep_check=True)
        assert tr.status == "completed"
        assert count_yes(tr.position) == 2


# ---------------------------------------------------------------------------
# Tensor of strategies: successor alongside predecessor
# ---------------------------------------------------------------------------

class TestTensor:
    def test_interleaved_play(self):
        ten = tensor_strat(succ_strat(), pred_strat())
        env = scripted_env([
            (mk_move(Q_HAT, ("E", "E")), None),
            (mk_move(YES, ("E", "W"), T0), 1),
            (mk_move(Q_HAT, ("W", "E")), None),
            (mk_move(NO, ("W", "W"), T0), 5),
            (mk_move(NO, ("E", "W"), T0), 3),
            (mk_move(Q, ("W", "E")), 7),
        ])
        tr = play(ten, env, deep_check=True)
        assert tr.status == "completed"
        assert entries(tr) == [
            (mk_move(Q_HAT, ("E", "E")), None),
            (mk_move(Q_HAT, ("E", "W"), T0), 0),
            (mk_move(YES, ("E", "W"), T0), 1),
            (mk_move(Q, ("E", "W"), T0), 2),
            (mk_move(Q_HAT, ("W", "E")), None),
            (mk_move(Q_HAT, ("W", "W"), T0), 4),
            (mk_move(NO, ("W", "W"), T0), 5),
            (mk_move(YES, ("W", "E")), 4),
            (mk_move(NO, ("E", "W"), T0), 3),
            (mk_move(NO, ("E", "E")), 0),
            (mk_move(Q, ("W", "E")), 7),
            (mk_move(NO, ("W", "E")), 10),
        ]
        assert is_position(ten.game, tr.position)


# ---------------------------------------------------------------------------
# Pairing: one product side is interrogated per play
# ---------------------------------------------------------------------------

def _drive_pair(side, n):
    pr = pairing_strat(succ_strat(), pred_strat())
    inner = numeral_env(n)

    def env(g, s):
        if len(s) == 0:
            return mk_move(Q_HAT, (side, "E")), None
        r = inner(g, s)
        if r is None:
            return None
        m, j = r
        if m.inner.tags == ("E",):
            return Move(InnerElement(m.inner.substance, (side, "E")), m.outer), j
        return m, j

    tr = play(pr, env, deep_check=True)
    v = sum(1 for k in range(len(tr.position))
            if tr.position.move(k).inner.substance == YES
            and tr.position.move(k).inner.tags[-2:] == (side, "E"))
    return pr, tr, v


class TestPairing:
    def test_left_side_runs_successor(self):
        pr, tr, v = _drive_pair("W", 1)
        assert (tr.status, v) == ("completed", 2)
        assert is_position(pr.game, tr.position)
        assert entries(tr) == [
            (mk_move(Q_HAT, ("W", "E")), None),
            (mk_move(Q_HAT, ("W",), T0), 0),
            (mk_move(YES, ("W",), T0), 1),
            (mk_move(YES, ("W", "E")), 0),
            (mk_move(Q, ("W", "E")), 3),
            (mk_move(Q, ("W",), T0), 2),
            (mk_move(NO, ("W",), T0), 5),
            (mk_move(YES, ("W", "E")), 4),
            (mk_move(Q, ("W", "E")), 7),
            (mk_move(NO, ("W", "E")), 8),
        ]

    def test_right_side_runs_predecessor(self):
        pr, tr, v = _drive_pair("E", 1)
        assert (tr.status, v) == ("completed", 0)
        assert is_position(pr.game, tr.position)


# ---------------------------------------------------------------------------
# Promotion: one copy of the strategy per thread
# ---------------------------------------------------------------------------

class TestPromotion:
    def test_two_threads(self):
        ps = promotion_strat(succ_strat())
        thread_l = bang_tag(leaf("l"), EMPTY_TAG)

        def env(g, s):
            if len(s) == 0:
                return mk_move(Q_HAT, ("E",), T0), None
            if len(s) == 2:
                return mk_move(Q_HAT, ("E",), thread_l), None
            m = s.move(len(s) - 1)
            if m.inner.tags[-1] == "W" and m.inner.substance == Q_HAT:
                return Move(InnerElement(NO, m.inner.tags), m.outer), len(s) - 1
            return None

        tr = play(ps, env, deep_check=True)
        assert tr.status == "completed"
        assert entries(tr) == [
            (mk_move(Q_HAT, ("E",), T0), None),
            (mk_move(Q_HAT, ("W",),
                     bang_tag(sep(box(EMPTY_TAG), box(EMPTY_TAG)), EMPTY_TAG)), 0),
            (mk_move(Q_HAT, ("E",), thread_l), None),
            (mk_move(Q_HAT, ("W",),
                     bang_tag(sep(box(leaf("l")), box(EMPTY_TAG)), EMPTY_TAG)), 2),
            (mk_move(NO, ("W",),
                     bang_tag(sep(box(leaf("l")), box(EMPTY_TAG)), EMPTY_TAG)), 3),
            (mk_move(YES, ("E",), thread_l), 2),
        ]
        assert is_position(ps.game, tr.position)


# ---------------------------------------------------------------------------
# Concatenation: promoted successor feeding predecessor
# ---------------------------------------------------------------------------

class TestConcat:
    def test_interaction_on_zero(self):
        cc = concat_strat(promotion_strat(succ_strat()), pred_strat())
        tr = play(cc, numeral_env(0), deep_check=True)
        assert tr.status == "completed"
        mid = bang_tag(sep(box(EMPTY_TAG), box(EMPTY_TAG)), EMPTY_TAG)
        assert entries(tr) == [
            (mk_move(Q_HAT, ("E",)), None),
            (mk_move(Q_HAT, ("W", "N"), T0), 0),
            (mk_move(Q_HAT, ("E", "S"), T0), 1),
            (mk_move(Q_HAT, ("W",), mid), 2),
            (mk_move(NO, ("W",), mid), 3),
            (mk_move(YES, ("E", "S"), T0), 2),
            (mk_move(YES, ("W", "N"), T0), 1),
            (mk_move(Q, ("W", "N"), T0), 6),
            (mk_move(Q, ("E", "S"), T0), 5),
            (mk_move(NO, ("E", "S"), T0), 8),
            (mk_move(NO, ("W", "N"), T0), 7),
            (mk_move(NO, ("E",)), 0),
        ]
        assert is_position(cc.game, tr.position)

    def test_composition_behaves_as_identity(self):
        hs = compose_strat(promotion_strat(succ_strat()), pred_strat())
        for n in range(4):
            assert eval_numeral(hs, n) == (n, "completed")

    def test_numeral_pipelines(self):
        for n in range(5):
            assert eval_numeral(numeral_pipeline(n)) == (n, "completed")


# ---------------------------------------------------------------------------
# Case: branch on a boolean
# ---------------------------------------------------------------------------

def _case_env(boolean, branch_val):
    def env(g, s):
        if len(s) == 0:
            return mk_move(Q_HAT, ("E",)), None
        m = s.move(len(s) - 1)
        tags = m.inner.tags
        if tags[-2:] == ("E", "W") and m.inner.substance == Q_HAT:
            return mk_move(boolean, ("E", "W"), m.outer), len(s) - 1
        if tags[-2:] == ("W", "W") and m.inner.substance in (Q_HAT, Q):
            c = sum(1 for k in range(len(s))
                    if s.move(k).inner.substance == YES
                    and s.move(k).inner.tags[-2:] == ("W", "W"))
            sub = YES if c < branch_val else NO
            return Move(InnerElement(sub, tags), m.outer), len(s) - 1
        if tags[-1] == "E" and m.inner.substance == YES:
            return mk_move(Q, ("E",), m.outer), len(s) - 1
        return None

    return env


class TestCase:
    @pytest.mark.parametrize("boolean,val", [(TT, 2), (FF, 3)])
    def test_branches(self, boolean, val):
        sigma = case_strat(NAT)
        tr = play(sigma, _case_env(boolean, val), deep_check=True)
        assert tr.status == "completed"
        assert count_yes(tr.position) == val
        assert is_position(sigma.game, tr.position)

    def test_axioms(self):
        rep = check_axioms(case_strat(NAT), depth=10, budget=B11)
        assert axioms_ok(rep), rep["violations"]


# ---------------------------------------------------------------------------
# Fixpoints
# ---------------------------------------------------------------------------

def _const_fn(n):
    """A function strategy ignoring its argument: constantly the numeral n."""
    g = arrow_c(UNIT, arrow_c(NAT, NAT))

    def fn(g, s):
        m = s.move(len(s) - 1)
        if m.inner.tags[-2:] == ("E", "E") and m.inner.substance in (Q_HAT, Q):
            c = sum(1 for k in range(len(s))
                    if s.move(k).inner.substance == YES
                    and s.move(k).inner.tags[-2:] == ("E", "E")
                    and s.move(k).outer is m.outer)
            sub = YES if c < n else NO
            return Move(InnerElement(sub, m.inner.tags), m.outer), len(s) - 1
        return None

    return BuiltinStrategy(g, f"const{n}", fn)


def _succ_fn():
    """A function strategy computing x+1 from its argument."""
    from ludus.core import p_view_indices
    from ludus.tags import split_bang

    g = arrow_c(UNIT, arrow_c(NAT, NAT))

    def fn(g, s):
        m = s.move(len(s) - 1)
        tags = m.inner.tags
        if tags[-2:] == ("E", "E"):
            if m.inner.substance == Q_HAT:
                return Move(InnerElement(YES, tags), m.outer), len(s) - 1
            if m.inner.substance == Q:
                vis = p_view_indices(g, s)
                prev = s.move(vis[-3]) if len(vis) >= 3 else None
                if prev is not None and prev.inner.tags[-2:] == ("W", "E"):
                    return (Move(InnerElement(Q, prev.inner.tags), prev.outer),
                            vis[-3])
                return (mk_move(Q_HAT, ("W", "E"), bang_tag(EMPTY_TAG, m.outer)),
                        len(s) - 1)
        if tags[-2:] == ("W", "E") and m.inner.substance in (YES, NO):
            vis = p_view_indices(g, s)
            sb = split_bang(m.outer)
            return (Move(InnerElement(m.inner.substance, ("E", "E")), sb[1]),
                    vis[-3])
        return None

    return BuiltinStrategy(g, "succ-fn", fn)


class TestFix:
    def test_fixpoint_of_constant_function(self):
        fx = compose_strat(promotion_strat(_const_fn(3)), fix_strat(NAT))
        assert eval_numeral(fx) == (3, "completed")

    def test_fixpoint_of_successor_function_diverges(self):
        fx = compose_strat(promotion_strat(_succ_fn()), fix_strat(NAT))
        assert eval_numeral(fx, fuel=2_000) == (None, "fuel-exhausted")

    def test_axioms(self):
        rep = check_axioms(fix_strat(NAT), depth=10, budget=B11)
        assert axioms_ok(rep), rep["violations"]


# ---------------------------------------------------------------------------
# Currying and uncurrying
# ---------------------------------------------------------------------------

def _component_mirror():
    """(N (x) N) -o N, mirroring one tensor component of the domain."""
    from ludus.constructions import _partner_justifier

    g = lolli_c(tensor_c(NAT, NAT), NAT)

    def fn(g, s):
        m = s.move(len(s) - 1)
        tags = m.inner.tags
        if tags[-1] == "E":
            r = Move(InnerElement(m.inner.substance, ("W", "W")), m.outer)
        elif tags[-2:] == ("W", "W"):
            r = Move(InnerElement(m.inner.substance, ("E",)), m.outer)
        else:
            return None
        return r, _partner_justifier(g, s, r)

    return BuiltinStrategy(g, "component-mirror", fn)


def _drive_tagged(sigma, open_tags, dom_tags, n):
    c = [0]

    def env(g, s):
        if len(s) == 0:
            return mk_move(Q_HAT, open_tags), None
        m = s.move(len(s) - 1)
        if m.inner.tags == dom_tags and m.inner.substance in (Q_HAT, Q):
            sub = YES if c[0] < n else NO
            c[0] += 1
            return Move(InnerElement(sub, m.inner.tags), m.outer), len(s) - 1
        if m.inner.tags == open_tags and m.inner.substance == YES:
            return mk_move(Q, open_tags, m.outer), len(s) - 1
        return None

    tr = play(sigma, env, deep_check=True)
    v = sum(1 for k in range(len(tr.position))
            if tr.position.move(k).inner.substance == YES
            and tr.position.move(k).inner.tags == open_tags)
    return tr, v


class TestCurrying:
    def test_curry_exposes_the_component_as_outer_argument(self):
        cu = curry_strat(_component_mirror())
        tr, v = _drive_tagged(cu, ("E", "E"), ("W",), 2)
        assert (tr.status, v) == ("completed", 2)
        assert is_position(cu.game, tr.position)

    def test_uncurry_round_trip(self):
        rt = uncurry_strat(curry_strat(_component_mirror()))
        tr, v = _drive_tagged(rt, ("E",), ("W", "W"), 2)
        assert (tr.status, v) == ("completed", 2)
        assert is_position(rt.game, tr.position)

"""Reference call-by-name interpreter for the term language.

A deliberately simple small-step reducer used to cross-check the
game-semantic evaluator: explicit redex search, pure substitution, no
environments, and a fuel bound on the number of reduction steps.
"""

from __future__ import annotations

from typing import Optional, Set

from .pcf import (
    App,
    Fix,
    IfZ,
    Lam,
    Num,
    Pair,
    PcfTerm,
    PcfTypeError,
    Pred,
    Proj1,
    Proj2,
    Succ,
    Var,
    Zero,
    typecheck,
)

DEFAULT_FUEL = 100_000


def free_vars(t: PcfTerm) -> Set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.name}
    if isinstance(t, App):
        return free_vars(t.f) | free_vars(t.a)
    if isinstance(t, (Succ, Pred, Fix, Proj1, Proj2)):
        return free_vars(t.t)
    if isinstance(t, IfZ):
        return free_vars(t.c) | free_vars(t.then) | free_vars(t.els)
    if isinstance(t, Pair):
        return free_vars(t.l) | free_vars(t.r)
    return set()


def subst(t: PcfTerm, x: str, v: PcfTerm) -> PcfTerm:
    """t[v/x]; v must be closed, so substitution cannot capture."""
    if isinstance(t, Var):
        return v if t.name == x else t
    if isinstance(t, Lam):
        if t.name == x:
            return t
        return Lam(t.name, t.type, subst(t.body, x, v))
    if isinstance(t, App):
        return App(subst(t.f, x, v), subst(t.a, x, v))
    if isinstance(t, Succ):
        return Succ(subst(t.t, x, v))
    if isinstance(t, Pred):
        return Pred(subst(t.t, x, v))
    if isinstance(t, Fix):
        return Fix(subst(t.t, x, v))
    if isinstance(t, IfZ):
        return IfZ(subst(t.c, x, v), subst(t.then, x, v), subst(t.els, x, v))
    if isinstance(t, Pair):
        return Pair(subst(t.l, x, v), subst(t.r, x, v))
    if isinstance(t, Proj1):
        return Proj1(subst(t.t, x, v))
    if isinstance(t, Proj2):
        return Proj2(subst(t.t, x, v))
    return t


def _numeral(t: PcfTerm) -> Optional[int]:
    if isinstance(t, Zero):
        return 0
    if isinstance(t, Num):
        return t.n
    return None


def step(t: PcfTerm) -> Optional[PcfTerm]:
    """One leftmost-outermost reduction step, or None if t is normal."""
    if isinstance(t, App):
        if isinstance(t.f, Lam):
            return subst(t.f.body, t.f.name, t.a)
        f2 = step(t.f)
        return None if f2 is None else App(f2, t.a)
    if isinstance(t, Fix):
        return App(t.t, t)
    if isinstance(t, Succ):
        n = _numeral(t.t)
        if n is not None:
            return Num(n + 1)
        a2 = step(t.t)
        return None if a2 is None else Succ(a2)
    if isinstance(t, Pred):
        n = _numeral(t.t)
        if n is not None:
            return Num(max(n - 1, 0))
        a2 = step(t.t)
        return None if a2 is None else Pred(a2)
    if isinstance(t, IfZ):
        n = _numeral(t.c)
        if n is not None:
            return t.then if n == 0 else t.els
        c2 = step(t.c)
        return None if c2 is None else IfZ(c2, t.then, t.els)
    if isinstance(t, Proj1):
        if isinstance(t.t, Pair):
            return t.t.l
        a2 = step(t.t)
        return None if a2 is None else Proj1(a2)
    if isinstance(t, Proj2):
        if isinstance(t.t, Pair):
            return t.t.r
        a2 = step(t.t)
        return None if a2 is None else Proj2(a2)
    return None


def ref_eval(t: PcfTerm, fuel: int = DEFAULT_FUEL) -> Optional[int]:
    """Evaluate a closed term of ground type; None on fuel exhaustion."""
    ty = typecheck([], t)
    if str(ty) != "N":
        raise PcfTypeError(f"oracle evaluates ground terms only, got {ty}", t)
    for _ in range(fuel):
        n = _numeral(t)
        if n is not None:
            return n
        t2 = step(t)
        if t2 is None:
            raise RuntimeError(f"stuck term: {t}")
        t = t2
    return None

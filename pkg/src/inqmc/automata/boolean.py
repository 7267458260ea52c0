"""Positive Boolean formulas over automaton states, kept in minimal DNF.

A formula is a frozenset of conjuncts, each conjunct a frozenset of states.
``FALSE`` has no conjuncts; ``TRUE`` has the single empty conjunct.  The
minimal DNF of a monotone function is unique, so structural equality of two
normalized formulas is semantic equality.
"""

from __future__ import annotations

from typing import Callable, Hashable, Iterable

Dnf = frozenset

FALSE: Dnf = frozenset()
TRUE: Dnf = frozenset({frozenset()})


def var(q: Hashable) -> Dnf:
    return frozenset({frozenset({q})})


def _minimize(conjuncts: Iterable[frozenset]) -> Dnf:
    cs = sorted(set(conjuncts), key=len)
    if not cs:
        return FALSE
    if not cs[0]:
        return TRUE
    kept: list[frozenset] = []
    for c in cs:
        if not any(k <= c for k in kept):
            kept.append(c)
    return frozenset(kept)


def lor(a: Dnf, b: Dnf) -> Dnf:
    if not a:
        return b
    if not b or a is b:
        return a
    if a == TRUE or b == TRUE:
        return TRUE
    return _minimize(a | b)


def land(a: Dnf, b: Dnf) -> Dnf:
    if not a or not b:
        return FALSE
    if a == TRUE:
        return b
    if b == TRUE:
        return a
    return _minimize(x | y for x in a for y in b)


def lor_all(fs: Iterable[Dnf]) -> Dnf:
    out = FALSE
    for f in fs:
        out = lor(out, f)
    return out


def land_all(fs: Iterable[Dnf]) -> Dnf:
    out = TRUE
    for f in fs:
        out = land(out, f)
        if not out:
            return FALSE
    return out


def rename(a: Dnf, f: Callable[[Hashable], Hashable]) -> Dnf:
    return frozenset(frozenset(f(q) for q in c) for c in a)


def substitute(a: Dnf, f: Callable[[Hashable], Dnf]) -> Dnf:
    """Replace every state ``q`` by the formula ``f(q)``."""
    return lor_all(land_all(f(q) for q in c) for c in a)


def dual(a: Dnf) -> Dnf:
    """Swap conjunction and disjunction (and ``TRUE``/``FALSE``)."""
    out = TRUE
    for c in a:
        out = land(out, frozenset(frozenset({q}) for q in c))
        if not out:
            return FALSE
    return out


def cnf(a: Dnf) -> frozenset:
    """Clauses of the minimal CNF of ``a`` (each clause a set of states)."""
    return dual(a)


def states_of(a: Dnf) -> set:
    out = set()
    for c in a:
        out |= c
    return out


def evaluate(a: Dnf, holds: Callable[[Hashable], bool]) -> bool:
    return any(all(holds(q) for q in c) for c in a)


def to_str(a: Dnf) -> str:
    if not a:
        return "false"
    if a == TRUE:
        return "true"
    return " | ".join("(" + " & ".join(sorted(map(str, c))) + ")" for c in sorted(a, key=lambda c: sorted(map(str, c))))

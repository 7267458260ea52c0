"""From alternating to nondeterministic Büchi automata.

``haa_to_nbw`` first turns every stratum into plain alternating-Büchi form:
transient and Büchi strata keep their accepting sets, coBüchi strata with an
empty (full) accepting set become all-accepting (all-rejecting), and any
other coBüchi stratum is weakened by ranks ``0..2n``.  The resulting
alternating Büchi automaton is dealternated by the breakpoint construction.
"""

from __future__ import annotations

from typing import Optional, Sequence

from ..formula import Formula, Kind, collapse
from . import boolean as B
from .core import BUCHI, COBUCHI, TRANSIENT, Budget, Haa, Nbw


def _prune_dominated(pairs: set) -> list:
    """Keep pairs (U, O) not componentwise above another pair."""
    items = sorted(pairs, key=lambda uo: (len(uo[0]), len(uo[1])))
    kept: list = []
    for u, o in items:
        if not any(ku <= u and ko <= o for ku, ko in kept):
            kept.append((u, o))
    return kept


def haa_to_nbw(A: Haa, budget: Optional[Budget] = None, name: Optional[str] = None) -> Nbw:
    name = name or f"nbw({A.name})"
    # Büchi-acceptance flag per stratum: True/False for the whole stratum,
    # "own" to use the stratum's accepting set, or a rank bound 2n.
    mode: dict[int, object] = {}
    unknown = []
    for i, kind in enumerate(A.kinds):
        hint = A.hints[i]
        if kind == TRANSIENT:
            mode[i] = True
        elif kind == BUCHI:
            mode[i] = False if hint == "none" else True if hint == "all" else "own"
        elif hint == "none":
            mode[i] = True
        elif hint == "all":
            mode[i] = False
        else:
            unknown.append(i)
    if unknown:
        for i, (states, acc, kind) in enumerate(A.strata_sets()):
            if i not in unknown:
                continue
            if not acc:
                mode[i] = True
            elif acc == states:
                mode[i] = False
            else:
                mode[i] = 2 * len(states)
    ranked = {i: m for i, m in mode.items() if not isinstance(m, (bool, str))}

    def enter(q):
        i = A.stratum(q)
        if i in ranked:
            return ("rk", q, ranked[i])
        return q

    def is_acc(x) -> bool:
        if isinstance(x, tuple) and len(x) == 3 and x[0] == "rk":
            return x[2] % 2 == 1
        m = mode[A.stratum(x)]
        return A.accepting(x) if m == "own" else m

    def abw_delta(x, a) -> B.Dnf:
        if isinstance(x, tuple) and len(x) == 3 and x[0] == "rk":
            _, q, r = x
            if r % 2 == 1 and A.accepting(q):
                return B.FALSE
            i = A.stratum(q)

            def sub(t):
                if A.stratum(t) != i:
                    return B.var(enter(t))
                t_acc = A.accepting(t)
                return frozenset(frozenset({("rk", t, j)}) for j in range(r + 1)
                                 if not (j % 2 == 1 and t_acc))
            return B.substitute(A.delta(q, a), sub)
        return B.rename(A.delta(x, a), enter)

    x0 = enter(A.initial)

    def post(state, a):
        U, O = state
        partial = {(frozenset(), frozenset())}
        for x in U:
            opts = abw_delta(x, a)
            if not opts:
                return ()
            in_o = x in O
            partial = {(u | c, (o | c) if in_o else o) for u, o in partial for c in opts}
        out = set()
        for u, o in partial:
            base = o if O else u
            out.add((u, frozenset(q for q in base if not is_acc(q))))
        return _prune_dominated(out)

    return Nbw(A.alphabet, [(frozenset({x0}), frozenset())], post,
               lambda state: not state[1], name=name, budget=budget)


def ltl_to_haa(phi: Formula, ap: Sequence[str], alphabet: Optional[Sequence[int]] = None) -> Haa:
    """Alternating automaton for an NNF LTL formula over letters ``2^AP``.

    Letters are bit sets over ``ap``.  States are subformulas; until-states
    form rejecting Büchi strata, release-states accepting (coBüchi, F empty).
    """
    bit = {p: 1 << i for i, p in enumerate(ap)}
    if alphabet is None:
        alphabet = range(1 << len(ap))
    nodes = sorted(set(phi.subformulas()), key=lambda f: (-f.size, str(f)))
    index = {f: i for i, f in enumerate(nodes)}
    kinds = [BUCHI if f.kind is Kind.UNTIL else COBUCHI if f.kind is Kind.RELEASE else TRANSIENT
             for f in nodes]

    def expand(f: Formula, a: int) -> B.Dnf:
        k = f.kind
        if k is Kind.TOP:
            return B.TRUE
        if k is Kind.BOT:
            return B.FALSE
        if k is Kind.ATOM:
            return B.TRUE if a & bit.get(f.name, 0) else B.FALSE
        if k is Kind.IMPL:
            if not (f.is_negation() and f.lhs.kind is Kind.ATOM):
                raise ValueError(f"formula not in negation normal form: {f}")
            return B.FALSE if a & bit.get(f.lhs.name, 0) else B.TRUE
        if k is Kind.BDIS:
            return B.lor(expand(f.lhs, a), expand(f.rhs, a))
        if k is Kind.CONJ:
            return B.land(expand(f.lhs, a), expand(f.rhs, a))
        if k is Kind.NEXT:
            return B.var(f.sub)
        if k is Kind.UNTIL:
            return B.lor(expand(f.rhs, a), B.land(expand(f.lhs, a), B.var(f)))
        return B.land(expand(f.rhs, a), B.lor(expand(f.lhs, a), B.var(f)))

    return Haa(alphabet, phi, kinds, index.__getitem__, lambda q: False, expand,
               name=f"ltl({phi})")


def ltl_to_nbw(phi: Formula, ap: Sequence[str], alphabet: Optional[Sequence[int]] = None,
               budget: Optional[Budget] = None) -> Nbw:
    """NBW over ``2^AP`` accepting the traces satisfying ``phi`` read classically."""
    return haa_to_nbw(ltl_to_haa(collapse(phi), ap, alphabet), budget=budget,
                      name=f"nbw({phi})")

"""Automata for macro-path semantics and the model-checking pipeline.

A :class:`Checker` is bound to one Kripke structure and one alphabet of
macro-states; it caches the automata it builds per subformula, so checking
many formulas against one structure shares work.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..formula import Formula, Kind, classify, drop_flat_double_negations, pretty
from ..kripke import KripkeStructure, bits, submasks
from . import boolean as B
from .core import (BUCHI, COBUCHI, TRANSIENT, Budget, Haa, Nbw, OneLetterHaa, haa_dual,
                   nbw_to_haa)
from .dealternation import haa_to_nbw, ltl_to_nbw
from .games import one_letter_nonempty


class FragmentError(ValueError):
    """The formula is outside left-positive InqLTL."""


def down_closure(letters: Iterable[int]) -> frozenset:
    out: set[int] = set()
    for a in letters:
        if a not in out:
            out.update(submasks(a))
    return frozenset(out)


def _is_literal_negation(f: Formula) -> bool:
    return f.is_negation() and f.lhs.kind is Kind.ATOM


def _is_hard(f: Formula) -> bool:
    """Implications and negations other than negated atoms get their own automaton."""
    return f.kind is Kind.IMPL and not _is_literal_negation(f)


@dataclass
class Verdict:
    holds: bool
    formula: str
    fragment: dict
    stats: dict = field(default_factory=dict)
    seconds: float = 0.0


class Checker:
    """Automata constructions for one structure ``K``.

    ``alphabet`` defaults to all macro-states ``2^S``; the model-checking
    pipeline narrows it to the sub-macro-states of the initial macro-path.
    ``negation_fast_path`` enables the direct transition for ``!p``.
    """

    def __init__(self, K: KripkeStructure, alphabet: Optional[Iterable[int]] = None,
                 state_budget: Optional[int] = None, negation_fast_path: bool = True):
        self.K = K
        if alphabet is None:
            alphabet = range(1 << K.n)
        self.alphabet = down_closure(alphabet)
        self.state_budget = state_budget
        self.negation_fast_path = negation_fast_path
        self._holds = {p: sum(1 << s for s in range(K.n) if p in K.labels[s]) for p in K.ap}
        self._lab_mask = [sum(1 << i for i, p in enumerate(K.ap) if p in K.labels[s])
                          for s in range(K.n)]
        self._body: dict = {}
        self._neg: dict = {}
        self._imp: dict = {}
        self._nbw: dict = {}
        self._restricted: dict = {}
        self.built: list = []

    def _budget(self, stage: str) -> Budget:
        return Budget(self.state_budget, stage)

    # -- macro-state atoms ---------------------------------------------------

    def atom_holds(self, p: str, sigma: int) -> bool:
        """``p`` holds at every state of the macro-state ``sigma``."""
        return sigma & ~self._holds.get(p, 0) == 0

    def atom_fails(self, p: str, sigma: int) -> bool:
        return sigma & self._holds.get(p, 0) == 0

    # -- negation --------------------------------------------------------------

    def lift_nbw(self, N: Nbw, name: str) -> Nbw:
        """NBW over ``2^S`` accepting macro-paths having a path whose trace N accepts."""
        K = self.K
        lab = self._lab_mask

        def post(state, sigma):
            q, s = state
            cands = sigma if s is None else sigma & K.succ[s]
            out = []
            for t in bits(cands):
                for r in N.post(q, lab[t]):
                    out.append((r, t))
            return out

        return Nbw(self.alphabet, [(q, None) for q in N.initial], post,
                   lambda st: st[1] is not None and N.accepting(st[0]),
                   name=f"lift({N.name})", budget=self._budget(f"lift({N.name})"))

    def negation(self, body: Formula) -> Haa:
        """HAA for ``!body``: complement of 'some path satisfies body'."""
        try:
            return self._neg[body]
        except KeyError:
            pass
        letters = sorted(set(self._lab_mask))
        N = ltl_to_nbw(body, self.K.ap, alphabet=letters,
                       budget=self._budget(f"ltl({pretty(body)})"))
        lifted = self.lift_nbw(N, f"!{pretty(body)}")
        A = haa_dual(nbw_to_haa(lifted))
        A.name = f"neg({pretty(body)})"
        self._neg[body] = A
        self.built += [("ltl-nbw", N), ("lifted-nbw", lifted), ("negation-haa", A)]
        return A

    # -- implication -----------------------------------------------------------

    def nbw_of(self, A: Haa, key) -> Nbw:
        try:
            return self._nbw[key]
        except KeyError:
            pass
        N = haa_to_nbw(A, budget=self._budget(f"nbw({A.name})"))
        self._nbw[key] = N
        self.built.append(("dealternated-nbw", N))
        return N

    def product_nbw(self, N1: Nbw, N2: Nbw, name: str) -> Nbw:
        """Accepts rho iff some nonempty sub-macro-path of rho is accepted by N1 and N2."""
        K = self.K
        top = ("top",)

        def first(N, T):
            out = set()
            for q in N.initial:
                out |= N.post(q, T)
            return out

        def post(state, sigma):
            out = []
            if state == top:
                for T in submasks(sigma):
                    if not T:
                        continue
                    q1s = first(N1, T)
                    if not q1s:
                        continue
                    for q2 in first(N2, T):
                        for q1 in q1s:
                            out.append((T, q1, q2, 1))
                return out
            T, q1, q2, flag = state
            if flag == 1:
                nflag = 2 if N1.accepting(q1) else 1
            else:
                nflag = 1 if N2.accepting(q2) else 2
            for T2 in K.successor_macro_states(T, sigma):
                q1s = N1.post(q1, T2)
                if not q1s:
                    continue
                for q2n in N2.post(q2, T2):
                    for q1n in q1s:
                        out.append((T2, q1n, q2n, nflag))
            return out

        def accepting(state):
            return state != top and state[3] == 2 and N2.accepting(state[2])

        return Nbw(self.alphabet, [top], post, accepting, name=name,
                   budget=self._budget(name))

    def implication(self, f: Formula) -> Haa:
        """HAA for ``lhs -> rhs`` (antecedent positive) over macro-paths."""
        try:
            return self._imp[f]
        except KeyError:
            pass
        A1 = self.body(f.lhs)
        N1 = self.nbw_of(A1, ("pos", f.lhs))
        A2 = self.body(f.rhs)
        N2 = self.nbw_of(haa_dual(A2), ("dual", f.rhs))
        N = self.product_nbw(N1, N2, f"witness({pretty(f)})")
        A = haa_dual(nbw_to_haa(N))
        A.name = f"impl({pretty(f)})"
        self._imp[f] = A
        self.built += [("witness-nbw", N), ("implication-haa", A)]
        return A

    # -- formulas --------------------------------------------------------------

    def body(self, phi: Formula) -> Haa:
        """HAA ``A`` with ``L(A) & mp(K) = mp(K, phi)`` (no macro-path monitor)."""
        try:
            return self._body[phi]
        except KeyError:
            pass
        fast = self.negation_fast_path
        fs: list[Formula] = []
        seen = set()
        stack = [phi]
        while stack:
            f = stack.pop()
            if f in seen:
                continue
            seen.add(f)
            fs.append(f)
            if f.kind is Kind.IMPL and (not fast or not _is_literal_negation(f)):
                continue
            if fast and _is_literal_negation(f):
                continue
            stack.extend(f.children)
        fs.sort(key=lambda f: (-f.size, pretty(f)))
        index = {f: i for i, f in enumerate(fs)}
        subs: dict = {}
        kinds = [BUCHI if f.kind is Kind.UNTIL else COBUCHI if f.kind is Kind.RELEASE else TRANSIENT
                 for f in fs]
        hints = ["none"] * len(kinds)
        offsets = []
        for f in fs:
            if f.kind is not Kind.IMPL or (fast and _is_literal_negation(f)):
                continue
            sub = self.negation(f.lhs) if f.is_negation() else self.implication(f)
            j = len(offsets)
            subs[f] = (j, sub)
            offsets.append((len(kinds), sub))
            kinds.extend(sub.kinds)
            hints.extend(sub.hints)

        def stratum(q):
            if q[0] == "f":
                return index[q[1]]
            off, sub = offsets[q[1]]
            return off + sub.stratum(q[2])

        def accepting(q):
            if q[0] == "f":
                return False
            return offsets[q[1]][1].accepting(q[2])

        def expand(f: Formula, sigma: int) -> B.Dnf:
            k = f.kind
            if k is Kind.ATOM:
                return B.TRUE if self.atom_holds(f.name, sigma) else B.FALSE
            if k is Kind.TOP:
                return B.TRUE
            if k is Kind.BOT:
                return B.TRUE if sigma == 0 else B.FALSE
            if k is Kind.IMPL:
                if f in subs:
                    j, sub = subs[f]
                    return B.rename(sub.delta(sub.initial, sigma), lambda r: ("h", j, r))
                return B.TRUE if self.atom_fails(f.lhs.name, sigma) else B.FALSE
            if k is Kind.BDIS:
                return B.lor(expand(f.lhs, sigma), expand(f.rhs, sigma))
            if k is Kind.CONJ:
                return B.land(expand(f.lhs, sigma), expand(f.rhs, sigma))
            if k is Kind.NEXT:
                return B.var(("f", f.sub))
            me = B.var(("f", f))
            if k is Kind.UNTIL:
                return B.lor(expand(f.rhs, sigma), B.land(expand(f.lhs, sigma), me))
            return B.land(expand(f.rhs, sigma), B.lor(expand(f.lhs, sigma), me))

        def delta(q, sigma):
            if q[0] == "f":
                return expand(q[1], sigma)
            j = q[1]
            sub = offsets[j][1]
            return B.rename(sub.delta(q[2], sigma), lambda r: ("h", j, r))

        A = Haa(self.alphabet, ("f", phi), kinds, stratum, accepting, delta,
                name=f"body({pretty(phi)})", hints=hints)
        self._body[phi] = A
        self.built.append(("formula-haa", A))
        return A

    def restrict(self, A: Haa) -> Haa:
        """``L(A) & mp(K)``: A in parallel with a previous-letter monitor."""
        try:
            return self._restricted[id(A)][1]
        except KeyError:
            pass
        K = self.K
        init = ("r0",)
        depth = A.depth

        def stratum(q):
            if q[0] == "a":
                return 1 + A.stratum(q[1])
            return 0 if q == init else 1 + depth

        def accepting(q):
            return q[0] == "a" and A.accepting(q[1])

        def wrap(r):
            return ("a", r)

        def delta(q, sigma):
            if q == init:
                return B.land(B.rename(A.delta(A.initial, sigma), wrap), B.var(("mon", sigma)))
            if q[0] == "a":
                return B.rename(A.delta(q[1], sigma), wrap)
            prev = q[1]
            return B.var(("mon", sigma)) if K.is_successor(prev, sigma) else B.FALSE

        R = Haa(self.alphabet, init, (TRANSIENT,) + A.kinds + (COBUCHI,), stratum, accepting,
                delta, name=f"mp({A.name})", hints=("none",) + A.hints + ("none",))
        self._restricted[id(A)] = (A, R)
        return R

    def compile(self, phi: Formula, check_fragment: bool = True) -> Haa:
        """HAA accepting exactly ``mp(K, phi)``."""
        if check_fragment:
            report = classify(phi)
            if not report.is_left_positive:
                raise FragmentError(f"not left-positive: {report.reason}")
        _check_atoms(self.K, phi)
        return self.restrict(self.body(drop_flat_double_negations(phi)))

    def one_letterize(self, A: Haa) -> OneLetterHaa:
        return OneLetterHaa(A, (A.initial, self.K.initial), self.K.forward_image)

    def stats(self) -> dict:
        out: dict = {}
        for stage, aut in self.built:
            out.setdefault(stage, []).append(aut.size())
        return {stage: {"count": len(v), "max_states": max(v), "total_states": sum(v)}
                for stage, v in out.items()}


def _check_atoms(K: KripkeStructure, phi: Formula):
    unknown = phi.atoms() - set(K.ap)
    if unknown:
        raise ValueError(f"formula uses propositions not declared by the structure: {sorted(unknown)}")


def pipeline_alphabet(K: KripkeStructure) -> frozenset:
    """Sub-macro-states of the initial macro-path: every letter the pipeline reads."""
    return down_closure(K.initial_macro_lasso().letters())


def model_check(K: KripkeStructure, phi: Formula, state_budget: Optional[int] = None,
                checker: Optional[Checker] = None) -> Verdict:
    """Decide ``L(K) |= phi`` for left-positive ``phi``."""
    start = time.perf_counter()
    report = classify(phi)
    if not report.is_left_positive:
        raise FragmentError(f"not left-positive: {report.reason}")
    if checker is None:
        checker = Checker(K, pipeline_alphabet(K), state_budget=state_budget)
    A = checker.compile(phi)
    A1 = checker.one_letterize(A)
    limit = checker.state_budget if checker.state_budget is not None else Budget().limit
    holds = one_letter_nonempty(A1, limit=limit)
    elapsed = time.perf_counter() - start
    stats = checker.stats()
    stats["compiled"] = {"strata": A.depth, "states": A.size()}
    return Verdict(holds, pretty(phi), report.as_dict(), stats, elapsed)

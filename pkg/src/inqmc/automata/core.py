"""Hesitant alternating automata (HAA) and nondeterministic Büchi automata (NBW).

Both are represented lazily: transitions are computed on demand and cached,
and the reachable state space is materialized only when something explores
it.  The stratum of an HAA state is given by a function, so strata of
automata whose states are discovered on the fly need no up-front listing.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Optional

from . import boolean as B

TRANSIENT, BUCHI, COBUCHI = "t", "b", "c"
_DUAL_KIND = {TRANSIENT: TRANSIENT, BUCHI: COBUCHI, COBUCHI: BUCHI}

DEFAULT_STATE_BUDGET = 5_000_000


def default_budget() -> int:
    env = os.environ.get("INQMC_STATE_BUDGET")
    return int(env) if env else DEFAULT_STATE_BUDGET


class BudgetExceeded(RuntimeError):
    """An automaton construction materialized more states than allowed."""

    def __init__(self, stage: str, budget: int):
        super().__init__(f"state budget exceeded in {stage} (budget {budget})")
        self.stage = stage
        self.budget = budget


class MalformedAutomaton(AssertionError):
    """A constructed automaton violates the HAA well-formedness conditions."""


class Budget:
    """Shared state counter for one construction stage."""

    def __init__(self, limit: Optional[int] = None, stage: str = "automaton"):
        self.limit = default_budget() if limit is None else limit
        self.stage = stage
        self.used = 0

    def charge(self, n: int = 1):
        self.used += n
        if self.used > self.limit:
            raise BudgetExceeded(self.stage, self.limit)


class Haa:
    """HAA over a finite alphabet of ``int`` letters.

    ``kinds[i]`` is the acceptance kind of stratum ``i``; ``stratum(q)`` maps
    a state to its stratum index and ``accepting(q)`` tells whether ``q`` is in
    the stratum's accepting set.
    """

    def __init__(self, alphabet: Iterable[int], initial: Hashable, kinds: Iterable[str],
                 stratum: Callable[[Hashable], int], accepting: Callable[[Hashable], bool],
                 delta: Callable[[Hashable, int], B.Dnf], name: str = "haa",
                 budget: Optional[Budget] = None, hints: Optional[Iterable] = None):
        self.alphabet = frozenset(alphabet)
        self.initial = initial
        self.kinds = tuple(kinds)
        # per stratum: "none" (F empty), "all" (F = stratum) or None (unknown)
        self.hints = tuple(hints) if hints is not None else (None,) * len(self.kinds)
        assert len(self.hints) == len(self.kinds)
        self.stratum = stratum
        self.accepting = accepting
        self._delta = delta
        self._cache: dict = {}
        self.name = name
        self.budget = budget

    def delta(self, q, a: int) -> B.Dnf:
        key = (q, a)
        try:
            return self._cache[key]
        except KeyError:
            pass
        if a not in self.alphabet:
            raise KeyError(f"letter {a} outside the alphabet of {self.name}")
        out = self._delta(q, a)
        self._cache[key] = out
        return out

    @property
    def depth(self) -> int:
        return len(self.kinds)

    def kind_of(self, q) -> str:
        return self.kinds[self.stratum(q)]

    def reachable(self, limit: Optional[int] = None) -> list:
        """States reachable from the initial state over the whole alphabet."""
        seen = {self.initial}
        order = [self.initial]
        queue = deque(order)
        letters = sorted(self.alphabet)
        while queue:
            q = queue.popleft()
            for a in letters:
                for c in self.delta(q, a):
                    for r in c:
                        if r not in seen:
                            seen.add(r)
                            order.append(r)
                            queue.append(r)
                            if limit is not None and len(order) > limit:
                                raise BudgetExceeded(f"exploring {self.name}", limit)
        return order

    def strata_sets(self) -> list[tuple[frozenset, frozenset, str]]:
        """Explicit ``(Q_i, F_i, kind)`` for the reachable part."""
        groups: list[set] = [set() for _ in self.kinds]
        for q in self.reachable():
            groups[self.stratum(q)].add(q)
        return [(frozenset(g), frozenset(q for q in g if self.accepting(q)), k)
                for g, k in zip(groups, self.kinds)]

    def validate(self, limit: Optional[int] = None) -> None:
        """Check the partial-order and hesitant requirements on the reachable part."""
        for q in self.reachable(limit):
            i = self.stratum(q)
            if not 0 <= i < len(self.kinds):
                raise MalformedAutomaton(f"{self.name}: state {q!r} has no stratum")
            kind = self.kinds[i]
            for a in self.alphabet:
                f = self.delta(q, a)
                same = set()
                for r in B.states_of(f):
                    j = self.stratum(r)
                    if j < i:
                        raise MalformedAutomaton(
                            f"{self.name}: {q!r} (stratum {i}) moves to {r!r} (stratum {j})")
                    if j == i:
                        same.add(r)
                if not same:
                    continue
                if kind == TRANSIENT:
                    raise MalformedAutomaton(f"{self.name}: transient state {q!r} loops in its stratum")
                groups = f if kind == BUCHI else B.cnf(f)
                for g in groups:
                    if sum(1 for r in g if self.stratum(r) == i) > 1:
                        form = "DNF conjunct" if kind == BUCHI else "CNF disjunct"
                        raise MalformedAutomaton(
                            f"{self.name}: {form} of delta({q!r}, {a}) has two states of stratum {i}")

    def size(self) -> int:
        """Number of distinct states touched so far by transition queries."""
        seen = {self.initial}
        for (q, _), f in self._cache.items():
            seen.add(q)
            seen.update(B.states_of(f))
        return len(seen)

    def dump(self) -> dict:
        """JSON-friendly description of the reachable part (debugging aid)."""
        states = self.reachable()
        idx = {q: i for i, q in enumerate(states)}
        return {
            "name": self.name,
            "initial": idx[self.initial],
            "states": [repr(q) for q in states],
            "strata": [{"kind": k,
                        "states": [idx[q] for q in states if self.stratum(q) == i],
                        "accepting": [idx[q] for q in states
                                      if self.stratum(q) == i and self.accepting(q)]}
                       for i, k in enumerate(self.kinds)],
            "delta": [{"from": idx[q], "letter": a,
                       "dnf": [sorted(idx[r] for r in c) for c in self.delta(q, a)]}
                      for q in states for a in sorted(self.alphabet)],
        }


def haa_dual(A: Haa) -> Haa:
    """Dual automaton: dualized transitions, Büchi and coBüchi strata swapped."""
    return Haa(A.alphabet, A.initial, (_DUAL_KIND[k] for k in A.kinds), A.stratum,
               A.accepting, lambda q, a: B.dual(A.delta(q, a)), name=f"dual({A.name})",
               budget=A.budget, hints=A.hints)


class Nbw:
    """Büchi NBW with lazily computed successor sets."""

    def __init__(self, alphabet: Iterable[int], initial: Iterable[Hashable],
                 post: Callable[[Hashable, int], Iterable[Hashable]],
                 accepting: Callable[[Hashable], bool], name: str = "nbw",
                 budget: Optional[Budget] = None):
        self.alphabet = frozenset(alphabet)
        self.initial = frozenset(initial)
        self._post = post
        self.accepting = accepting
        self._cache: dict = {}
        self._states: set = set(self.initial)
        self.name = name
        self.budget = budget
        if budget is not None:
            budget.charge(len(self._states))

    def post(self, q, a: int) -> frozenset:
        key = (q, a)
        try:
            return self._cache[key]
        except KeyError:
            pass
        if a not in self.alphabet:
            raise KeyError(f"letter {a} outside the alphabet of {self.name}")
        out = frozenset(self._post(q, a))
        self._cache[key] = out
        new = out - self._states
        if new:
            self._states |= new
            if self.budget is not None:
                self.budget.charge(len(new))
        return out

    def reachable(self) -> list:
        order = list(self.initial)
        seen = set(order)
        queue = deque(order)
        letters = sorted(self.alphabet)
        while queue:
            q = queue.popleft()
            for a in letters:
                for r in self.post(q, a):
                    if r not in seen:
                        seen.add(r)
                        order.append(r)
                        queue.append(r)
        return order

    def size(self) -> int:
        return len(self._states)


_NBW_INIT = ("nbw-init",)


def nbw_to_haa(N: Nbw) -> Haa:
    """An NBW read as an HAA: one Büchi stratum, disjunctive transitions.

    With several initial states a fresh transient initial state is added.
    """
    single = len(N.initial) == 1

    def delta(q, a):
        if q == _NBW_INIT:
            succ = set()
            for q0 in N.initial:
                succ |= N.post(q0, a)
            return frozenset(frozenset({r}) for r in succ)
        return frozenset(frozenset({r}) for r in N.post(q, a))

    if single:
        (q0,) = N.initial
        return Haa(N.alphabet, q0, (BUCHI,), lambda q: 0, N.accepting, delta,
                   name=f"haa({N.name})", budget=N.budget)
    return Haa(N.alphabet, _NBW_INIT, (TRANSIENT, BUCHI),
               lambda q: 0 if q == _NBW_INIT else 1,
               lambda q: q != _NBW_INIT and N.accepting(q), delta,
               name=f"haa({N.name})", budget=N.budget, hints=("none", None))


@dataclass(frozen=True)
class OneLetterHaa:
    """1-letter HAA tracking the macro-state read by the simulated automaton.

    States are ``(q, T)``; the single letter drives ``T`` to its forward
    image, so a run of this automaton is a run of ``base`` on the
    deterministic macro-path starting at the initial ``T``.
    """

    base: Haa
    initial: tuple
    image: Callable[[int], int]

    @property
    def kinds(self):
        return self.base.kinds

    def stratum(self, state) -> int:
        return self.base.stratum(state[0])

    def accepting(self, state) -> bool:
        return self.base.accepting(state[0])

    def delta(self, state) -> B.Dnf:
        q, T = state
        nxt = self.image(T)
        return B.rename(self.base.delta(q, T), lambda r: (r, nxt))

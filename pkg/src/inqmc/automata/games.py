"""Acceptance games for hesitant automata.

A position is owned by the automaton ("Eve"): she picks a DNF conjunct of
its transition formula, then the pathfinder picks a target in it.  Plays
that stay in one stratum forever are judged by that stratum's Büchi or
coBüchi condition.  Strata are solved bottom-up, so positions of later
strata are already decided when an earlier stratum is processed.
"""

from __future__ import annotations

from collections import deque
from typing import Callable, Hashable, Optional

from ..kripke import Lasso
from . import boolean as B
from .core import BUCHI, COBUCHI, TRANSIENT, BudgetExceeded, Haa, MalformedAutomaton, Nbw, OneLetterHaa


def solve_game(initial: Hashable, moves: Callable[[Hashable], B.Dnf],
               stratum: Callable[[Hashable], int], kinds: tuple,
               accepting: Callable[[Hashable], bool],
               limit: Optional[int] = None) -> tuple[bool, dict]:
    """Decide whether Eve wins from ``initial``; also return all position values."""
    table: dict = {}
    queue = deque([initial])
    table[initial] = None
    while queue:
        p = queue.popleft()
        f = moves(p)
        table[p] = f
        for c in f:
            for r in c:
                if r not in table:
                    table[r] = None
                    queue.append(r)
                    if limit is not None and len(table) > limit:
                        raise BudgetExceeded("acceptance game", limit)

    groups: dict[int, list] = {}
    level = {}
    for p in table:
        i = stratum(p)
        level[p] = i
        groups.setdefault(i, []).append(p)

    value: dict = {}
    for i in sorted(groups, reverse=True):
        members = groups[i]
        local: dict = {}
        for p in members:
            cs = []
            for c in table[p]:
                keep = []
                dead = False
                for r in c:
                    j = level[r]
                    if j == i:
                        keep.append(r)
                    elif j < i:
                        raise MalformedAutomaton(f"position {p!r} moves back to stratum {j}")
                    elif not value[r]:
                        dead = True
                        break
                if not dead:
                    cs.append(tuple(keep))
            local[p] = cs
        kind = kinds[i]
        if kind == TRANSIENT:
            for p in members:
                if any(c for c in local[p]):
                    raise MalformedAutomaton(f"transient position {p!r} loops in its stratum")
                value[p] = any(not c for c in local[p])
            continue
        if kind == BUCHI:
            win = _buchi(members, local, accepting)
        elif kind == COBUCHI:
            win = _cobuchi(members, local, accepting)
        else:
            raise MalformedAutomaton(f"unknown stratum kind {kind!r}")
        for p in members:
            value[p] = p in win
    return value[initial], value


def _index(members, local):
    preds: dict = {p: [] for p in members}
    conj = []
    for p in members:
        for c in local[p]:
            k = len(conj)
            conj.append((p, c))
            for r in c:
                preds[r].append(k)
    return conj, preds


def _attractor(members, conj, preds, seeds) -> set:
    count = [len(c) for _, c in conj]
    Y = set()
    queue = deque()
    for p in seeds:
        if p not in Y:
            Y.add(p)
            queue.append(p)
    for k, (p, c) in enumerate(conj):
        if not c and p not in Y:
            Y.add(p)
            queue.append(p)
    while queue:
        y = queue.popleft()
        for k in preds[y]:
            count[k] -= 1
            if count[k] == 0:
                p = conj[k][0]
                if p not in Y:
                    Y.add(p)
                    queue.append(p)
    return Y


def _buchi(members, local, accepting) -> set:
    # nu Z. mu Y. (F & pre(Z)) | pre(Y)
    conj, preds = _index(members, local)
    acc = [p for p in members if accepting(p)]
    Z = set(members)
    while True:
        seeds = [p for p in acc if any(all(r in Z for r in c) for c in local[p])]
        Y = _attractor(members, conj, preds, seeds)
        if Y == Z:
            return Z
        Z = Y & Z


def _cobuchi(members, local, accepting) -> set:
    # mu Z. nu Y. pre(Z) | (!F & pre(Y))
    conj, preds = _index(members, local)
    Z: set = set()
    while True:
        good = {p for p in members if any(all(r in Z for r in c) for c in local[p])}
        Y = set(good) | {p for p in members if not accepting(p)}
        bad = [sum(1 for r in c if r not in Y) for _, c in conj]
        alive = {p: 0 for p in members}
        for k, (p, c) in enumerate(conj):
            if bad[k] == 0:
                alive[p] += 1
        queue = deque(p for p in Y if p not in good and alive[p] == 0)
        removed = set(queue)
        while queue:
            y = queue.popleft()
            Y.discard(y)
            for k in preds[y]:
                bad[k] += 1
                if bad[k] == 1:
                    owner = conj[k][0]
                    alive[owner] -= 1
                    if alive[owner] == 0 and owner not in good and owner in Y and owner not in removed:
                        removed.add(owner)
                        queue.append(owner)
        if Y == Z:
            return Z
        Z = Y | Z


def haa_accepts(A: Haa, w: Lasso, limit: Optional[int] = None) -> bool:
    """Membership of the lasso word ``w`` in L(A)."""
    def moves(pos):
        q, i = pos
        j = w.next_index(i)
        return B.rename(A.delta(q, w[i]), lambda r: (r, j))

    won, _ = solve_game((A.initial, 0), moves, lambda pos: A.stratum(pos[0]), A.kinds,
                        lambda pos: A.accepting(pos[0]), limit)
    return won


def one_letter_nonempty(A1: OneLetterHaa, limit: Optional[int] = None) -> bool:
    """Nonemptiness of a 1-letter HAA (its only candidate word is 1^omega)."""
    won, _ = solve_game(A1.initial, A1.delta, A1.stratum, A1.kinds, A1.accepting, limit)
    return won


def nbw_accepts(N: Nbw, w: Lasso) -> bool:
    """Lasso membership for an NBW: a reachable cycle through an accepting state."""
    nodes = []
    succ: dict = {}
    start = [(q, 0) for q in N.initial]
    seen = set(start)
    stack = list(start)
    while stack:
        node = stack.pop()
        nodes.append(node)
        q, i = node
        j = w.next_index(i)
        out = [(r, j) for r in N.post(q, w[i])]
        succ[node] = out
        for m in out:
            if m not in seen:
                seen.add(m)
                stack.append(m)
    for comp in _sccs(nodes, succ):
        if len(comp) == 1:
            (v,) = comp
            if v not in succ[v]:
                continue
        if any(N.accepting(q) for q, _ in comp):
            return True
    return False


def _sccs(nodes, succ):
    """Tarjan's algorithm, iterative."""
    index: dict = {}
    low: dict = {}
    on: set = set()
    stack: list = []
    out = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for m in it:
                if m not in index:
                    index[m] = low[m] = counter
                    counter += 1
                    stack.append(m)
                    on.add(m)
                    work.append((m, iter(succ[m])))
                    advanced = True
                    break
                if m in on:
                    low[v] = min(low[v], index[m])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    x = stack.pop()
                    on.discard(x)
                    comp.append(x)
                    if x == v:
                        break
                out.append(comp)
    return out

"""Reference semantics used to cross-check the automata pipeline.

Three evaluators, none of which share code with the automata:

* ``eval_ltl_lasso``: classical LTL on one ultimately periodic trace.
* ``eval_team_finite``: InqLTL team semantics on a finite set of trace
  lassos, with implication checked on every subteam.
* ``eval_macro_lasso``: macro-path semantics on a macro lasso, with
  implication checked on every sub-macro-lasso up to a length bound.

All three evaluate a subformula at every lasso position at once; until and
release are least and greatest fixpoints over positions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .formula import Formula, Kind, pretty
from .kripke import KripkeStructure, Lasso, align, bits, initial_paths, submasks

DEFAULT_TEAM_BOUND = 6
DEFAULT_LCM_CAP = 1024


class OracleRefusal(ValueError):
    """The oracle cannot give an exact verdict for this input."""


def _until(a: Sequence[bool], b: Sequence[bool], nxt: Callable[[int], int]) -> tuple:
    n = len(a)
    val = [False] * n
    changed = True
    while changed:
        changed = False
        for i in range(n - 1, -1, -1):
            if not val[i] and (b[i] or (a[i] and val[nxt(i)])):
                val[i] = True
                changed = True
    return tuple(val)


def _release(a: Sequence[bool], b: Sequence[bool], nxt: Callable[[int], int]) -> tuple:
    n = len(a)
    val = [True] * n
    changed = True
    while changed:
        changed = False
        for i in range(n - 1, -1, -1):
            if val[i] and not (b[i] and (a[i] or val[nxt(i)])):
                val[i] = False
                changed = True
    return tuple(val)


# -- classical LTL --------------------------------------------------------------


def eval_ltl_lasso(w: Lasso, phi: Formula) -> bool:
    """Classical LTL truth of ``phi`` on the trace lasso ``w`` (letters are sets of atoms).

    Inquisitive connectives get their single-trace reading: ``|`` is
    disjunction, ``->`` is material implication and ``bot`` is false.
    """
    return ltl_positions(w, phi)[0]


def ltl_positions(w: Lasso, phi: Formula) -> tuple:
    memo: dict = {}
    n = len(w)
    nxt = w.next_index

    def ev(f: Formula) -> tuple:
        if f in memo:
            return memo[f]
        k = f.kind
        if k is Kind.BOT:
            out = (False,) * n
        elif k is Kind.TOP:
            out = (True,) * n
        elif k is Kind.ATOM:
            out = tuple(f.name in w[i] for i in range(n))
        elif k is Kind.BDIS:
            out = tuple(x or y for x, y in zip(ev(f.lhs), ev(f.rhs)))
        elif k is Kind.CONJ:
            out = tuple(x and y for x, y in zip(ev(f.lhs), ev(f.rhs)))
        elif k is Kind.IMPL:
            out = tuple((not x) or y for x, y in zip(ev(f.lhs), ev(f.rhs)))
        elif k is Kind.NEXT:
            s = ev(f.sub)
            out = tuple(s[nxt(i)] for i in range(n))
        elif k is Kind.UNTIL:
            out = _until(ev(f.lhs), ev(f.rhs), nxt)
        else:
            out = _release(ev(f.lhs), ev(f.rhs), nxt)
        memo[f] = out
        return out

    return ev(phi)


# -- finite teams ---------------------------------------------------------------


@dataclass(frozen=True)
class FiniteTeam:
    """A finite set of trace lassos over ``ap`` (letters are frozensets of atoms)."""

    ap: tuple
    traces: tuple

    @classmethod
    def of(cls, ap: Sequence[str], traces: Sequence[Lasso]) -> "FiniteTeam":
        out: list[Lasso] = []
        seen = set()
        for w in traces:
            w = Lasso(tuple(frozenset(a) for a in w.stem), tuple(frozenset(a) for a in w.period))
            c = w.canonical()
            if c not in seen:
                seen.add(c)
                out.append(c)
        return cls(tuple(ap), tuple(out))

    def __len__(self) -> int:
        return len(self.traces)

    @classmethod
    def from_dict(cls, doc: dict) -> "FiniteTeam":
        try:
            ap = list(doc["ap"])
            traces = []
            for t in doc["traces"]:
                stem = tuple(frozenset(a) for a in t.get("stem", []))
                period = tuple(frozenset(a) for a in t["period"])
                for letter in stem + period:
                    extra = letter - set(ap)
                    if extra:
                        raise ValueError(f"undeclared propositions {sorted(extra)}")
                traces.append(Lasso(stem, period))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed team file: {exc}") from None
        return cls.of(ap, traces)

    def to_dict(self) -> dict:
        return {"ap": list(self.ap),
                "traces": [{"stem": [sorted(a) for a in w.stem],
                            "period": [sorted(a) for a in w.period]} for w in self.traces]}


def load_team(path) -> FiniteTeam:
    with open(path, encoding="utf-8") as fh:
        return FiniteTeam.from_dict(json.load(fh))


def traces_of_structure(K: KripkeStructure, cap: int = DEFAULT_TEAM_BOUND) -> FiniteTeam:
    """``L(K)`` as a finite team; refused when K has infinitely many initial paths."""
    paths = initial_paths(K, cap=max(cap, 1) * 4)
    if paths is None:
        raise OracleRefusal("structure has infinitely many initial paths "
                            "(a reachable state on a cycle has several successors)")
    return FiniteTeam.of(K.ap, [K.trace_of(p) for p in paths])


class TeamEvaluator:
    """Team semantics on subteams of one finite team, memoized per (subformula, subteam)."""

    def __init__(self, team: FiniteTeam, bound: int = DEFAULT_TEAM_BOUND,
                 lcm_cap: int = DEFAULT_LCM_CAP):
        if len(team) > bound:
            raise OracleRefusal(f"team of size {len(team)} exceeds the bound {bound}")
        self.team = team
        stem, period = align(team.traces) if team.traces else (0, 1)
        if period > lcm_cap:
            raise OracleRefusal(f"period lcm {period} exceeds the cap {lcm_cap}")
        self.stem, self.period = stem, period
        self.n = stem + period
        self.full = (1 << len(team)) - 1
        # holders[p][i]: subteam mask of traces with p at aligned position i
        self._holders: dict = {}
        for p in team.ap:
            self._holders[p] = tuple(
                sum(1 << j for j, w in enumerate(team.traces) if p in w[i]) for i in range(self.n))
        self._memo: dict = {}

    def nxt(self, i: int) -> int:
        i += 1
        return self.stem if i == self.n else i

    def holds(self, phi: Formula, mask: Optional[int] = None) -> bool:
        return self.positions(phi, self.full if mask is None else mask)[0]

    def positions(self, f: Formula, mask: int) -> tuple:
        key = (f, mask)
        try:
            return self._memo[key]
        except KeyError:
            pass
        n, k = self.n, f.kind
        if k is Kind.BOT:
            out = (mask == 0,) * n
        elif k is Kind.TOP:
            out = (True,) * n
        elif k is Kind.ATOM:
            hold = self._holders.get(f.name, (0,) * n)
            out = tuple(mask & ~hold[i] == 0 for i in range(n))
        elif k is Kind.BDIS:
            out = tuple(x or y for x, y in zip(self.positions(f.lhs, mask),
                                               self.positions(f.rhs, mask)))
        elif k is Kind.CONJ:
            out = tuple(x and y for x, y in zip(self.positions(f.lhs, mask),
                                                self.positions(f.rhs, mask)))
        elif k is Kind.IMPL:
            val = [True] * n
            for sub in submasks(mask):
                a = self.positions(f.lhs, sub)
                b = self.positions(f.rhs, sub)
                for i in range(n):
                    if a[i] and not b[i]:
                        val[i] = False
            out = tuple(val)
        elif k is Kind.NEXT:
            s = self.positions(f.sub, mask)
            out = tuple(s[self.nxt(i)] for i in range(n))
        elif k is Kind.UNTIL:
            out = _until(self.positions(f.lhs, mask), self.positions(f.rhs, mask), self.nxt)
        else:
            out = _release(self.positions(f.lhs, mask), self.positions(f.rhs, mask), self.nxt)
        self._memo[key] = out
        return out


def eval_team_finite(team: FiniteTeam, phi: Formula, bound: int = DEFAULT_TEAM_BOUND) -> bool:
    """Exact InqLTL satisfaction ``team |= phi``."""
    return TeamEvaluator(team, bound).holds(phi)


# -- macro lassos ---------------------------------------------------------------


@dataclass
class MacroVerdict:
    holds: bool
    exhaustive: bool
    witness: Optional[Lasso] = None
    sub_lassos: int = 0

    @property
    def advisory(self) -> bool:
        return not self.exhaustive


class MacroEvaluator:
    """Macro-path semantics on macro lassos of ``K``.

    An implication at position ``i`` of ``rho`` is checked on sub-macro-lassos
    of ``rho[i:]``: walks through nodes ``(position, T)`` with ``T`` a nonempty
    subset of ``rho(position)`` and consecutive ``T`` related by the successor
    relation, closed into a lasso when a node repeats.  Walks are enumerated
    up to ``bound`` nodes; if some walk is cut off, or some node on a cycle
    has several successors (infinitely many sub-macro-paths), the verdict is
    marked non-exhaustive.  The empty sub-macro-path is skipped: every
    formula holds on it.
    """

    def __init__(self, K: KripkeStructure, bound: int, literal_shortcut: bool = True):
        self.K = K
        self.bound = bound
        self.literal_shortcut = literal_shortcut
        self.exhaustive = True
        self.sub_lassos = 0
        self._holds = {p: sum(1 << s for s in range(K.n) if p in K.labels[s]) for p in K.ap}
        self._memo: dict = {}
        self._walks: dict = {}
        self.witnesses: dict = {}

    def positions(self, f: Formula, rho: Lasso) -> tuple:
        key = (f, rho)
        try:
            return self._memo[key]
        except KeyError:
            pass
        n, k = len(rho), f.kind
        nxt = rho.next_index
        if k is Kind.BOT:
            out = tuple(rho[i] == 0 for i in range(n))
        elif k is Kind.TOP:
            out = (True,) * n
        elif k is Kind.ATOM:
            hold = self._holds.get(f.name, 0)
            out = tuple(rho[i] & ~hold == 0 for i in range(n))
        elif k is Kind.BDIS:
            out = tuple(x or y for x, y in zip(self.positions(f.lhs, rho),
                                               self.positions(f.rhs, rho)))
        elif k is Kind.CONJ:
            out = tuple(x and y for x, y in zip(self.positions(f.lhs, rho),
                                                self.positions(f.rhs, rho)))
        elif k is Kind.IMPL and self.literal_shortcut and f.is_negation() and f.lhs.kind is Kind.ATOM:
            # each state of rho(i) starts a singleton sub-macro-path, so !p
            # fails exactly when some state of rho(i) is labelled p
            hold = self._holds.get(f.lhs.name, 0)
            out = tuple(rho[i] & hold == 0 for i in range(n))
        elif k is Kind.IMPL:
            out = tuple(self._implication(f, rho, i) for i in range(n))
        elif k is Kind.NEXT:
            s = self.positions(f.sub, rho)
            out = tuple(s[nxt(i)] for i in range(n))
        elif k is Kind.UNTIL:
            out = _until(self.positions(f.lhs, rho), self.positions(f.rhs, rho), nxt)
        else:
            out = _release(self.positions(f.lhs, rho), self.positions(f.rhs, rho), nxt)
        self._memo[key] = out
        return out

    def _implication(self, f: Formula, rho: Lasso, i: int) -> bool:
        for sub in self.sub_macro_lassos(rho, i):
            if self.positions(f.lhs, sub)[0] and not self.positions(f.rhs, sub)[0]:
                self.witnesses.setdefault((f, rho, i), sub)
                return False
        return True

    def sub_macro_lassos(self, rho: Lasso, i: int) -> list:
        """Nonempty sub-macro-lassos of ``rho[i:]``, shortest first."""
        key = (rho, i)
        if key in self._walks:
            return self._walks[key]
        K = self.K
        found: dict = {}
        truncated = False
        branching = False

        def succ(node):
            pos, T = node
            npos = rho.next_index(pos)
            return [(npos, T2) for T2 in K.successor_macro_states(T, rho[npos])]

        # a node lies on a cycle of the walk graph iff a walk through it closes there
        for T0 in submasks(rho[i]):
            if not T0:
                continue
            stack = [[(i, T0)]]
            while stack:
                trail = stack.pop()
                nodes = succ(trail[-1])
                for node in nodes:
                    if node in trail:
                        k = trail.index(node)
                        if len(nodes) > 1 or any(len(succ(m)) > 1 for m in trail[k:]):
                            branching = True
                        letters = [T for _, T in trail]
                        lasso = Lasso(tuple(letters[:k]), tuple(letters[k:]))
                        found.setdefault(lasso.canonical(), len(trail))
                    elif len(trail) >= self.bound:
                        truncated = True
                    else:
                        stack.append(trail + [node])
        if truncated or branching:
            self.exhaustive = False
        out = sorted(found, key=lambda l: (found[l], len(l)))
        self.sub_lassos += len(out)
        self._walks[key] = out
        return out


def walk_graph_size(K: KripkeStructure, rho: Lasso) -> int:
    """Number of nodes ``(position, T)`` reachable in the sub-macro-path graph of ``rho``."""
    seen = set()
    stack = [(i, T) for i in range(len(rho)) for T in submasks(rho[i]) if T]
    seen.update(stack)
    while stack:
        pos, T = stack.pop()
        npos = rho.next_index(pos)
        for T2 in K.successor_macro_states(T, rho[npos]):
            if (npos, T2) not in seen:
                seen.add((npos, T2))
                stack.append((npos, T2))
    return len(seen)


def eval_macro_lasso(K: KripkeStructure, rho: Lasso, phi: Formula,
                     bound: Optional[int] = None, literal_shortcut: bool = True) -> MacroVerdict:
    """Macro-path satisfaction ``rho |=_K phi`` by bounded sub-lasso enumeration.

    ``bound`` defaults to the size of the sub-macro-path graph of ``rho``,
    which makes every simple walk fit.
    """
    if not K.is_macro_lasso(rho):
        raise ValueError("not a macro-path of the structure")
    if bound is None:
        bound = walk_graph_size(K, rho) + 1
    ev = MacroEvaluator(K, bound, literal_shortcut)
    holds = ev.positions(phi, rho)[0]
    witness = None
    if not holds and phi.kind is Kind.IMPL:
        witness = ev.witnesses.get((phi, rho, 0))
    return MacroVerdict(holds, ev.exhaustive, witness, ev.sub_lassos)


@dataclass
class AgreementReport:
    team_holds: bool
    macro_holds: bool
    automata_holds: Optional[bool]
    team_size: int
    exhaustive: bool
    notes: list = field(default_factory=list)

    @property
    def agree(self) -> bool:
        vals = {self.team_holds, self.macro_holds}
        if self.automata_holds is not None:
            vals.add(self.automata_holds)
        return len(vals) == 1


def team_vs_macro(K: KripkeStructure, phi: Formula, bound: int = DEFAULT_TEAM_BOUND,
                  with_automata: bool = True) -> AgreementReport:
    """Compare ``L(K) |= phi`` (team oracle), ``rho0 |=_K phi`` (macro oracle)
    and, optionally, the automata pipeline, on a structure with finitely many
    initial paths."""
    team = traces_of_structure(K, cap=bound)
    team_holds = eval_team_finite(team, phi, bound)
    mv = eval_macro_lasso(K, K.initial_macro_lasso(), phi)
    auto = None
    if with_automata:
        from .automata import model_check
        auto = model_check(K, phi).holds
    notes = [] if mv.exhaustive else ["macro verdict is advisory"]
    return AgreementReport(team_holds, mv.holds, auto, len(team), mv.exhaustive, notes)


def describe_witness(K: KripkeStructure, rho: Lasso) -> str:
    fmt = K.format_macro
    stem = " ".join(fmt(m) for m in rho.stem)
    period = " ".join(fmt(m) for m in rho.period)
    return f"{stem} ({period})^w".strip()

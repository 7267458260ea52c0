"""Finite Kripke structures, macro-states and lasso-shaped macro-paths.

Macro-states are ``int`` bit sets over the structure's state ordering, so
they double as letters of the automata alphabet ``2^S``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import lcm
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence


class StructureError(ValueError):
    pass


def bits(mask: int) -> Iterator[int]:
    """Indices of set bits, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask`` including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


@dataclass(frozen=True)
class Lasso:
    """Ultimately periodic word ``stem . period^omega``."""

    stem: tuple
    period: tuple

    def __post_init__(self):
        if not self.period:
            raise ValueError("lasso period must be nonempty")

    def __len__(self) -> int:
        return len(self.stem) + len(self.period)

    def __getitem__(self, i: int):
        n = len(self.stem)
        if i < n:
            return self.stem[i]
        return self.period[(i - n) % len(self.period)]

    def next_index(self, i: int) -> int:
        """Successor of position ``i`` among the ``len(self)`` canonical positions."""
        i += 1
        return len(self.stem) if i == len(self) else i

    def letters(self) -> tuple:
        return self.stem + self.period

    def suffix(self, i: int) -> "Lasso":
        n = len(self.stem)
        if i < n:
            return Lasso(self.stem[i:], self.period)
        k = (i - n) % len(self.period)
        return Lasso((), self.period[k:] + self.period[:k])

    def unroll(self, stem_len: int, period_len: int) -> "Lasso":
        """Equivalent lasso with the given stem length and a period length
        that is a multiple of the current one."""
        assert stem_len >= len(self.stem) and period_len % len(self.period) == 0
        stem = tuple(self[i] for i in range(stem_len))
        period = tuple(self[stem_len + i] for i in range(period_len))
        return Lasso(stem, period)

    def canonical(self) -> "Lasso":
        """Shortest equivalent lasso (minimal period, then minimal stem)."""
        period = self.period
        p = len(period)
        for d in range(1, p + 1):
            if p % d == 0 and all(period[i] == period[i % d] for i in range(p)):
                period = period[:d]
                break
        stem = self.stem
        while stem and stem[-1] == period[-1]:
            stem = stem[:-1]
            period = (period[-1],) + period[:-1]
        return Lasso(stem, period)

    def same_word(self, other: "Lasso") -> bool:
        return self.canonical() == other.canonical()


def align(lassos: Sequence[Lasso]) -> tuple[int, int]:
    """Common (stem length, period length) for a family of lassos."""
    stem = max((len(l.stem) for l in lassos), default=0)
    period = 1
    for l in lassos:
        period = lcm(period, len(l.period))
    return stem, period


MacroLasso = Lasso
TraceLasso = Lasso


@dataclass(frozen=True)
class KripkeStructure:
    """``<S, S0, R, Lab>`` with states indexed ``0..n-1``.

    ``succ[i]`` and ``pred[i]`` are bit sets; ``labels[i]`` is the set of
    propositions true at state ``i``.
    """

    ap: tuple[str, ...]
    state_ids: tuple[str, ...]
    initial: int
    succ: tuple[int, ...]
    labels: tuple[frozenset, ...]

    def __post_init__(self):
        n = len(self.state_ids)
        if n == 0:
            raise StructureError("structure has no states")
        if len(set(self.state_ids)) != n:
            raise StructureError("duplicate state ids")
        if self.initial == 0:
            raise StructureError("empty initial set")
        for i, m in enumerate(self.succ):
            if m == 0:
                raise StructureError(f"not left-total at {self.state_ids[i]}")
        aps = set(self.ap)
        for i, lab in enumerate(self.labels):
            extra = set(lab) - aps
            if extra:
                raise StructureError(
                    f"label of {self.state_ids[i]} uses undeclared propositions {sorted(extra)}")
        pred = [0] * n
        for s in range(n):
            for t in bits(self.succ[s]):
                pred[t] |= 1 << s
        object.__setattr__(self, "pred", tuple(pred))

    @property
    def n(self) -> int:
        return len(self.state_ids)

    @property
    def all_states(self) -> int:
        return (1 << self.n) - 1

    def index(self, state_id: str) -> int:
        return self.state_ids.index(state_id)

    def label(self, s: int) -> frozenset:
        return self.labels[s]

    def trace_of(self, path: Lasso) -> Lasso:
        return Lasso(tuple(self.labels[s] for s in path.stem),
                     tuple(self.labels[s] for s in path.period))

    def mask_of(self, ids: Iterable[str]) -> int:
        m = 0
        for sid in ids:
            m |= 1 << self.index(sid)
        return m

    def ids_of(self, mask: int) -> list[str]:
        return [self.state_ids[i] for i in bits(mask)]

    def format_macro(self, mask: int) -> str:
        return "{" + ",".join(self.ids_of(mask)) + "}"

    # -- macro-state operations --------------------------------------------

    def forward_image(self, mask: int) -> int:
        out = 0
        for s in bits(mask):
            out |= self.succ[s]
        return out

    def is_successor(self, src: int, dst: int) -> bool:
        """``dst`` is a successor macro-state of ``src``: every state of ``src``
        has an R-successor in ``dst`` and every state of ``dst`` has an
        R-predecessor in ``src``."""
        for s in bits(src):
            if not self.succ[s] & dst:
                return False
        return dst & ~self.forward_image(src) == 0

    def successor_macro_states(self, src: int, within: int) -> list[int]:
        """Nonempty successors of ``src`` that are subsets of ``within``."""
        image = self.forward_image(src) & within
        return [t for t in submasks(image) if t and self.is_successor(src, t)]

    def initial_macro_lasso(self) -> Lasso:
        seen: dict[int, int] = {}
        seq: list[int] = []
        cur = self.initial
        while cur not in seen:
            seen[cur] = len(seq)
            seq.append(cur)
            cur = self.forward_image(cur)
        k = seen[cur]
        return Lasso(tuple(seq[:k]), tuple(seq[k:]))

    def is_macro_lasso(self, rho: Lasso) -> bool:
        return all(self.is_successor(rho[i], rho[rho.next_index(i)]) for i in range(len(rho)))

    def is_path_lasso(self, path: Lasso) -> bool:
        return all(self.succ[path[i]] >> path[path.next_index(i)] & 1 for i in range(len(path)))

    # -- (de)serialization --------------------------------------------------

    @classmethod
    def from_dict(cls, doc: dict) -> "KripkeStructure":
        try:
            for key in ("ap", "states", "initial", "edges"):
                if not isinstance(doc[key], list):
                    raise TypeError(f"{key!r} must be a list")
            ap = tuple(doc["ap"])
            if not all(isinstance(p, str) for p in ap):
                raise TypeError("'ap' entries must be strings")
            states = doc["states"]
            ids = tuple(str(s["id"]) for s in states)
            labels = tuple(frozenset(s.get("label", [])) for s in states)
            initial_ids = doc["initial"]
            edges = doc["edges"]
        except (KeyError, TypeError) as exc:
            raise StructureError(f"schema violation: missing or malformed field {exc}") from None
        index = {sid: i for i, sid in enumerate(ids)}
        succ = [0] * len(ids)
        for edge in edges:
            if len(edge) != 2:
                raise StructureError(f"schema violation: edge {edge!r} is not a pair")
            a, b = map(str, edge)
            for end in (a, b):
                if end not in index:
                    raise StructureError(f"schema violation: edge endpoint {end!r} is not a declared state")
            succ[index[a]] |= 1 << index[b]
        initial = 0
        for sid in initial_ids:
            if str(sid) not in index:
                raise StructureError(f"schema violation: initial state {sid!r} is not declared")
            initial |= 1 << index[str(sid)]
        return cls(ap, ids, initial, tuple(succ), labels)

    def to_dict(self) -> dict:
        return {
            "ap": list(self.ap),
            "states": [{"id": sid, "label": sorted(self.labels[i])}
                       for i, sid in enumerate(self.state_ids)],
            "initial": self.ids_of(self.initial),
            "edges": [[self.state_ids[s], self.state_ids[t]]
                      for s in range(self.n) for t in bits(self.succ[s])],
        }


def load_structure(path) -> KripkeStructure:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructureError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise StructureError("schema violation: top-level value must be an object")
    return KripkeStructure.from_dict(doc)


def mp_of_paths(K: KripkeStructure, paths: Sequence[Lasso]) -> Lasso:
    """Positionwise union ``mp(Pi)`` of a finite family of path lassos."""
    if not paths:
        return Lasso((), (0,))
    stem, period = align(paths)
    seq = [0] * (stem + period)
    for p in paths:
        for i in range(stem + period):
            seq[i] |= 1 << p[i]
    return Lasso(tuple(seq[:stem]), tuple(seq[stem:]))


def macro_contains_path(rho: Lasso, path: Lasso) -> bool:
    stem, period = align([rho, path])
    return all(rho[i] >> path[i] & 1 for i in range(stem + period))


def paths_of_macro_lasso(K: KripkeStructure, rho: Lasso,
                         cap: int = 10_000) -> tuple[list[Lasso], bool]:
    """Enumerate simple path lassos inside ``rho`` (up to ``cap``).

    Nodes are (lasso position, state); a path closes when it revisits a
    node.  Returns (paths, empty) where ``empty`` says Paths(rho) is empty.
    """
    if rho[0] == 0:
        return [], True
    out: list[Lasso] = []
    seen_words: set[Lasso] = set()

    def dfs(trail: list[tuple[int, int]], where: dict):
        if len(out) >= cap:
            return
        pos, s = trail[-1]
        npos = rho.next_index(pos)
        for t in bits(K.succ[s] & rho[npos]):
            node = (npos, t)
            if node in where:
                k = where[node]
                states = [st for _, st in trail]
                lasso = Lasso(tuple(states[:k]), tuple(states[k:])).canonical()
                if lasso not in seen_words:
                    seen_words.add(lasso)
                    out.append(lasso)
                if len(out) >= cap:
                    return
                continue
            where[node] = len(trail)
            trail.append(node)
            dfs(trail, where)
            trail.pop()
            del where[node]

    for s in bits(rho[0]):
        dfs([(0, s)], {(0, s): 0})
    return out, False


def initial_paths(K: KripkeStructure, cap: int = 64) -> Optional[list[Lasso]]:
    """All initial paths when there are finitely many (at most ``cap``), else None.

    The initial path set is finite iff no reachable state that lies on a
    cycle has more than one successor.
    """
    reach = 0
    frontier = K.initial
    while frontier:
        reach |= frontier
        frontier = K.forward_image(frontier) & ~reach
    for s in bits(reach):
        if bin(K.succ[s]).count("1") > 1 and _on_cycle(K, s):
            return None
    paths, _ = paths_of_macro_lasso(K, K.initial_macro_lasso(), cap=cap + 1)
    if len(paths) > cap:
        return None
    return paths


def _on_cycle(K: KripkeStructure, s: int) -> bool:
    seen = 0
    frontier = K.succ[s]
    while frontier:
        if frontier >> s & 1:
            return True
        seen |= frontier
        frontier = K.forward_image(frontier) & ~seen
    return False

"""Deterministic generators for small structures and formulas (test corpora, benchmarks)."""

from __future__ import annotations

import itertools
import random
from typing import Iterator, Optional, Sequence

from . import formula as F
from .formula import Formula, classify
from .kripke import KripkeStructure, initial_paths


def structure_from_masks(succ: Sequence[int], labels: Sequence[frozenset], initial: int,
                         ap: Sequence[str]) -> KripkeStructure:
    n = len(succ)
    return KripkeStructure(tuple(ap), tuple(f"s{i}" for i in range(n)), initial, tuple(succ),
                           tuple(frozenset(l) for l in labels))


def _canonical_key(succ, labels, initial) -> tuple:
    """Smallest encoding over all state renamings (isomorphism classes)."""
    n = len(succ)
    best = None
    for perm in itertools.permutations(range(n)):
        def m(mask):
            return sum(1 << perm[i] for i in range(n) if mask >> i & 1)
        inv = [0] * n
        for i, j in enumerate(perm):
            inv[j] = i
        key = (tuple(m(succ[inv[j]]) for j in range(n)),
               tuple(tuple(sorted(labels[inv[j]])) for j in range(n)), m(initial))
        if best is None or key < best:
            best = key
    return best


def enumerate_structures(max_states: int = 3, ap: Sequence[str] = ("p",),
                         finite_paths_only: bool = False) -> Iterator[KripkeStructure]:
    """All structures up to ``max_states`` states, one per isomorphism class, in a fixed order."""
    letters = [frozenset(c) for r in range(len(ap) + 1) for c in itertools.combinations(ap, r)]
    seen = set()
    for n in range(1, max_states + 1):
        full = (1 << n) - 1
        for succ in itertools.product(range(1, full + 1), repeat=n):
            for labels in itertools.product(letters, repeat=n):
                for initial in range(1, full + 1):
                    key = _canonical_key(succ, labels, initial)
                    if key in seen:
                        continue
                    seen.add(key)
                    K = structure_from_masks(succ, labels, initial, ap)
                    if finite_paths_only and initial_paths(K) is None:
                        continue
                    yield K


def random_structure(rng: random.Random, n: int, ap: Sequence[str] = ("p", "q"),
                     out_degree: Optional[int] = None) -> KripkeStructure:
    succ = []
    for _ in range(n):
        if out_degree == 1:
            succ.append(1 << rng.randrange(n))
        else:
            mask = 0
            while not mask:
                mask = rng.randrange(1, 1 << n)
            succ.append(mask)
    labels = [frozenset(p for p in ap if rng.random() < 0.5) for _ in range(n)]
    initial = 0
    while not initial:
        initial = rng.randrange(1, 1 << n)
    return structure_from_masks(succ, labels, initial, ap)


def random_path_structure(rng: random.Random, n: int, ap: Sequence[str] = ("p", "q")) -> KripkeStructure:
    """Deterministic structure with a single initial state: exactly one initial path."""
    K = random_structure(rng, n, ap, out_degree=1)
    return structure_from_masks(K.succ, K.labels, 1 << rng.randrange(n), ap)


class FormulaGenerator:
    """Random formulas with bounded temporal depth and implication depth."""

    def __init__(self, ap: Sequence[str], seed: int = 0):
        self.ap = tuple(ap)
        self.rng = random.Random(seed)

    def literal(self) -> Formula:
        r = self.rng.random()
        p = F.atom(self.rng.choice(self.ap))
        if r < 0.45:
            return p
        if r < 0.85:
            return F.neg(p)
        return self.rng.choice([F.BOT, F.TOP])

    def positive(self, size: int, tdepth: int) -> Formula:
        return self._gen(size, tdepth, 0, positive=True)

    def left_positive(self, size: int, tdepth: int, k: int) -> Formula:
        return self._gen(size, tdepth, k, positive=False)

    def inquisitive(self, size: int, tdepth: int, k: int) -> Formula:
        """Arbitrary formula (antecedents unrestricted)."""
        return self._gen(size, tdepth, k, positive=False, free=True)

    def _gen(self, size: int, tdepth: int, k: int, positive: bool, free: bool = False) -> Formula:
        rng = self.rng
        if size <= 1:
            return self.literal()
        ops = ["|", "&"]
        if tdepth > 0:
            ops += ["X", "U", "R", "F", "G"]
        if not positive:
            ops += ["neg"]
            if k > 0:
                ops += ["->", "->"]
        op = rng.choice(ops)
        sub = size - 1
        if op in ("X", "F", "G"):
            f = self._gen(sub, tdepth - 1, k, positive, free)
            return {"X": F.nxt, "F": F.eventually, "G": F.always}[op](f)
        if op == "neg":
            # bodies of negations are unrestricted
            f = self._gen(sub, tdepth, k, positive=False, free=True)
            return F.neg(f)
        left = rng.randint(1, max(1, sub - 1))
        right = max(1, sub - left)
        if op == "->":
            if free:
                a = self._gen(left, tdepth, k - 1, positive=False, free=True)
            else:
                a = self._gen(left, tdepth, 0, positive=True)
            return F.impl(a, self._gen(right, tdepth, k - 1, positive, free))
        dt = tdepth - 1 if op in ("U", "R") else tdepth
        a = self._gen(left, dt, k, positive, free)
        b = self._gen(right, dt, k, positive, free)
        return {"|": F.bdis, "&": F.conj, "U": F.until, "R": F.release}[op](a, b)


def formula_pool(count: int, ap: Sequence[str] = ("p",), max_tdepth: int = 2, max_k: int = 1,
                 seed: int = 0, max_size: int = 7) -> list[Formula]:
    """Distinct left-positive formulas, covering every (k, temporal-depth) combination."""
    gen = FormulaGenerator(ap, seed)
    out: list[Formula] = []
    seen = set()
    attempts = 0
    while len(out) < count and attempts < 100 * count:
        attempts += 1
        k = attempts % (max_k + 1)
        td = (attempts // (max_k + 1)) % (max_tdepth + 1)
        f = gen.left_positive(gen.rng.randint(2, max_size), td, k)
        rep = classify(f)
        if not rep.is_left_positive or rep.implication_depth > max_k or f in seen:
            continue
        if temporal_depth(f) > max_tdepth:
            continue
        seen.add(f)
        out.append(f)
    return out


def temporal_depth(f: Formula) -> int:
    inner = max((temporal_depth(c) for c in f.children), default=0)
    if f.kind in (F.Kind.NEXT, F.Kind.UNTIL, F.Kind.RELEASE):
        return 1 + inner
    return inner

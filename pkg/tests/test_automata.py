import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inqmc.automata import (BUCHI, COBUCHI, FALSE, TRANSIENT, TRUE, Budget, BudgetExceeded,
                            Checker, Haa, MalformedAutomaton, Nbw, haa_accepts, haa_dual,
                            haa_to_nbw, ltl_to_nbw, model_check, nbw_accepts, nbw_to_haa,
                            one_letter_nonempty, pipeline_alphabet)
from inqmc.automata import boolean as B
from inqmc.formula import atom, classify, parse
from inqmc.generate import random_structure, structure_from_masks
from inqmc.kripke import KripkeStructure, Lasso, submasks
from inqmc.oracle import eval_ltl_lasso

from strategies import formulas, random_haa, random_lasso, trace_lassos


def one_state(kind, accepting, f):
    return Haa([0, 1], "q", [kind], lambda q: 0, lambda q: accepting, lambda q, a: f)


def naive_accepts(A, w):
    """Enumerate positional choices of conjuncts and look for a losing play.

    Acceptance games of hesitant automata are determined with positional
    strategies, so A accepts w iff some positional choice leaves no play
    that is trapped in a stratum violating its condition and no play
    reaching an empty disjunction.  Returns None when there are too many
    strategies to enumerate.
    """
    positions = []
    moves = {}
    stack = [(A.initial, 0)]
    seen = {stack[0]}
    while stack:
        pos = stack.pop()
        positions.append(pos)
        q, i = pos
        j = w.next_index(i)
        moves[pos] = [frozenset((r, j) for r in c) for c in A.delta(q, w[i])]
        for c in moves[pos]:
            for r in c:
                if r not in seen:
                    seen.add(r)
                    stack.append(r)
    if not moves[(A.initial, 0)]:
        return False
    choosers = [p for p in positions]
    space = 1
    for p in choosers:
        space *= max(1, len(moves[p]))
    if space > 20000:
        return None
    for choice in itertools.product(*(range(max(1, len(moves[p]))) for p in choosers)):
        pick = {}
        ok = True
        for p, k in zip(choosers, choice):
            if not moves[p]:
                pick[p] = None
            else:
                pick[p] = moves[p][k]
        # reachable positions under the strategy
        reach = {(A.initial, 0)}
        todo = [(A.initial, 0)]
        while todo and ok:
            p = todo.pop()
            if pick[p] is None:
                ok = False
                break
            for r in pick[p]:
                if r not in reach:
                    reach.add(r)
                    todo.append(r)
        if not ok:
            continue
        if not _bad_cycle(A, reach, pick):
            return True
    return False


def _bad_cycle(A, reach, pick) -> bool:
    for p in reach:
        i = A.stratum(p[0])
        kind = A.kinds[i]
        if kind == TRANSIENT:
            continue
        if kind == BUCHI and A.accepting(p[0]):
            continue
        if kind == COBUCHI and not A.accepting(p[0]):
            continue
        # p is a 'bad' anchor for Büchi (non-accepting) cycles only when the
        # whole cycle avoids F; for coBüchi any cycle through p is bad.
        allowed = (lambda r: A.stratum(r[0]) == i and not A.accepting(r[0])) if kind == BUCHI \
            else (lambda r: A.stratum(r[0]) == i)
        todo = [r for r in pick[p] if allowed(r)]
        seen = set(todo)
        while todo:
            r = todo.pop()
            if r == p:
                return True
            for s in pick[r] or ():
                if allowed(s) and s not in seen:
                    seen.add(s)
                    todo.append(s)
    return False


class TestBoolean:
    def test_constants(self):
        assert B.dual(TRUE) == FALSE and B.dual(FALSE) == TRUE
        assert B.land(TRUE, B.var(1)) == B.var(1)
        assert B.lor(FALSE, B.var(1)) == B.var(1)

    def test_absorption(self):
        f = B.lor(B.var(1), B.land(B.var(1), B.var(2)))
        assert f == B.var(1)

    @given(st.lists(st.frozensets(st.integers(0, 4), max_size=3), max_size=4))
    def test_dual_involution(self, cs):
        f = B._minimize(cs)
        assert B.dual(B.dual(f)) == f

    @given(st.lists(st.frozensets(st.integers(0, 4), max_size=3), max_size=4),
           st.frozensets(st.integers(0, 4)))
    def test_dual_semantics(self, cs, true_set):
        f = B._minimize(cs)
        assert B.evaluate(f, true_set.__contains__) == \
            (not B.evaluate(B.dual(f), lambda q: q not in true_set))


class TestGames:
    def test_true_accepts(self):
        A = one_state(BUCHI, True, B.var("q"))
        assert haa_accepts(A, Lasso((0,), (1,)))

    def test_false_rejects(self):
        A = one_state(BUCHI, True, FALSE)
        assert not haa_accepts(A, Lasso((), (0,)))

    def test_buchi_loop_without_accepting_state(self):
        assert not haa_accepts(one_state(BUCHI, False, B.var("q")), Lasso((), (0,)))

    def test_cobuchi_loop(self):
        assert haa_accepts(one_state(COBUCHI, False, B.var("q")), Lasso((), (0,)))
        assert not haa_accepts(one_state(COBUCHI, True, B.var("q")), Lasso((), (0,)))

    def test_one_letter_examples(self):
        from inqmc.automata.games import solve_game
        won, _ = solve_game("q", lambda q: TRUE, lambda q: 0, (BUCHI,), lambda q: False)
        assert won
        won, _ = solve_game("q", lambda q: B.var("q"), lambda q: 0, (BUCHI,), lambda q: False)
        assert not won

    def test_agreement_with_strategy_enumeration(self):
        rng = random.Random(7)
        checked = 0
        for _ in range(400):
            A = random_haa(rng)
            A.validate()
            w = random_lasso(rng, (0, 1), max_stem=2, max_period=2)
            expected = naive_accepts(A, w)
            if expected is not None:
                checked += 1
                assert haa_accepts(A, w) == expected
        assert checked > 200

    def test_gf_nbw(self):
        # states: 0 waiting, 1 just saw the letter 1
        N = Nbw([0, 1], [0], lambda q, a: [a], lambda q: q == 1)
        assert nbw_accepts(N, Lasso((), (0, 1)))
        assert not nbw_accepts(N, Lasso((1,), (0,)))


class TestDualAndDealternation:
    def test_dual_of_all_accepting_rejects_everything(self):
        A = one_state(BUCHI, True, B.var("q"))
        D = haa_dual(A)
        for w in (Lasso((), (0,)), Lasso((1,), (0, 1))):
            assert haa_accepts(A, w) and not haa_accepts(D, w)

    def test_dual_involution_structural(self):
        rng = random.Random(3)
        for _ in range(50):
            A = random_haa(rng)
            DD = haa_dual(haa_dual(A))
            assert DD.kinds == A.kinds
            for q in A.reachable():
                for a in A.alphabet:
                    assert DD.delta(q, a) == A.delta(q, a)

    def test_complementation_on_random_automata(self):
        rng = random.Random(11)
        for _ in range(200):
            A = random_haa(rng)
            D = haa_dual(A)
            D.validate()
            for _ in range(5):
                w = random_lasso(rng, (0, 1))
                assert haa_accepts(A, w) != haa_accepts(D, w)

    def test_dealternation_agrees_with_membership(self):
        rng = random.Random(5)
        for _ in range(300):
            A = random_haa(rng)
            N = haa_to_nbw(A)
            for _ in range(5):
                w = random_lasso(rng, (0, 1))
                assert nbw_accepts(N, w) == haa_accepts(A, w)

    def test_universal_and_empty(self):
        N = haa_to_nbw(one_state(BUCHI, True, B.var("q")))
        assert nbw_accepts(N, Lasso((), (0, 1)))
        N = haa_to_nbw(one_state(BUCHI, True, FALSE))
        assert not N.reachable() or not nbw_accepts(N, Lasso((), (0,)))

    def test_nbw_to_haa(self):
        N = Nbw([0, 1], [0, 1], lambda q, a: [a], lambda q: q == 1)
        A = nbw_to_haa(N)
        A.validate()
        for w in (Lasso((), (0, 1)), Lasso((1,), (0,)), Lasso((), (1,))):
            assert haa_accepts(A, w) == nbw_accepts(N, w)

    def test_budget(self):
        rng = random.Random(1)
        A = random_haa(rng, max_strata=3, max_states=2)
        with pytest.raises(BudgetExceeded):
            N = haa_to_nbw(A, budget=Budget(0, "tiny"))
            N.reachable()


class TestLtlToNbw:
    def test_atom(self):
        N = ltl_to_nbw(atom("p"), ["p"])
        assert nbw_accepts(N, Lasso((1,), (0,)))
        assert not nbw_accepts(N, Lasso((0,), (1,)))

    def test_gf(self):
        N = ltl_to_nbw(parse("G F p"), ["p"])
        assert nbw_accepts(N, Lasso((), (0, 1)))
        assert not nbw_accepts(N, Lasso((1,), (0,)))

    @settings(max_examples=500)
    @given(formulas(), trace_lassos())
    def test_agrees_with_lasso_evaluation(self, f, w):
        ap = ["p", "q"]
        N = ltl_to_nbw(f, ap)
        bitw = Lasso(tuple(_mask(a, ap) for a in w.stem), tuple(_mask(a, ap) for a in w.period))
        assert nbw_accepts(N, bitw) == eval_ltl_lasso(w, f)


def _mask(letter, ap):
    return sum(1 << i for i, p in enumerate(ap) if p in letter)


def chain(labels, loop_to):
    """Deterministic chain s0 -> s1 -> ... -> s(n-1) -> s(loop_to)."""
    n = len(labels)
    succ = [1 << (i + 1) for i in range(n - 1)] + [1 << loop_to]
    return structure_from_masks(succ, labels, 1, ["p", "q"])


class TestBuilders:
    def test_single_state_atom(self):
        K = structure_from_masks([1], [frozenset({"p"})], 1, ["p"])
        assert model_check(K, atom("p")).holds
        ch = Checker(K)
        A = ch.compile(atom("p"))
        assert haa_accepts(A, K.initial_macro_lasso())

    def test_negation_rejects_satisfied_body(self):
        K = structure_from_masks([1], [frozenset({"p"})], 1, ["p"])
        ch = Checker(K, negation_fast_path=False)
        A = ch.negation(atom("p"))
        assert not haa_accepts(A, Lasso((), (1,)))
        assert haa_accepts(A, Lasso((), (0,)))

    def test_negation_of_unreachable_eventuality(self):
        K = structure_from_masks([0b10, 0b10], [frozenset(), frozenset()], 1, ["p"])
        A = Checker(K).negation(parse("F p"))
        assert haa_accepts(A, K.initial_macro_lasso())

    def test_every_negation_accepts_empty(self):
        K = random_structure(random.Random(0), 3)
        ch = Checker(K)
        for text in ("p", "F p", "G (p | q)", "(p -> q) U q"):
            assert haa_accepts(ch.negation(parse(text)), Lasso((), (0,)))

    def test_restriction_rejects_non_successor(self):
        # s0 -> s1, s1 -> s0, no self-loops
        K = structure_from_masks([0b10, 0b01], [frozenset(), frozenset()], 1, ["p"])
        ch = Checker(K)
        R = ch.restrict(ch.body(parse("top")))
        assert not haa_accepts(R, Lasso((), (0b01, 0b01)))
        assert haa_accepts(R, Lasso((), (0b01, 0b10)))
        assert haa_accepts(R, K.initial_macro_lasso())

    def test_restriction_accepts_only_macro_paths(self):
        rng = random.Random(2)
        for _ in range(30):
            K = random_structure(rng, 3)
            ch = Checker(K)
            R = ch.restrict(ch.body(parse("top")))
            letters = list(range(1, 1 << K.n))
            for _ in range(20):
                w = random_lasso(rng, letters)
                assert haa_accepts(R, w) == K.is_macro_lasso(w)

    def test_implication_top_to_atom(self):
        K = structure_from_masks([1], [frozenset({"p"})], 1, ["p"])
        A = Checker(K).implication(parse("top -> p"))
        assert haa_accepts(A, Lasso((), (1,)))

    def test_implication_accepts_empty(self):
        K = random_structure(random.Random(4), 3)
        ch = Checker(K)
        for text in ("q -> F p", "(p | q) -> X p", "top -> G p"):
            assert haa_accepts(ch.implication(parse(text)), Lasso((), (0,)))

    def test_builder_outputs_are_well_formed(self):
        rng = random.Random(9)
        texts = ["G (q -> F p)", "!(F p) | X p", "(p U q) -> G !q", "F (p -> X !(q U p))",
                 "A (p R q)", "!!(p U q) & G (p | !p)"]
        for _ in range(5):
            K = random_structure(rng, 3)
            ch = Checker(K, pipeline_alphabet(K))
            for text in texts:
                A = ch.compile(parse(text, K.ap))
                A.validate()
                assert A.depth <= 2 + len(ch.body(parse(text, K.ap)).kinds)
            for _, aut in ch.built:
                if isinstance(aut, Haa):
                    aut.validate()

    def test_bot_transition(self):
        K = structure_from_masks([1], [frozenset()], 1, ["p"])
        A = Checker(K).body(parse("bot"))
        assert A.delta(A.initial, 0) == TRUE
        assert A.delta(A.initial, 1) == FALSE

    def test_fragment_refusal(self):
        from inqmc.automata import FragmentError
        K = structure_from_masks([1], [frozenset()], 1, ["p"])
        with pytest.raises(FragmentError, match="not left-positive: antecedent !!F p"):
            model_check(K, parse("(!!(F p)) -> F p"))

    def test_unknown_atom(self):
        K = structure_from_masks([1], [frozenset()], 1, ["p"])
        with pytest.raises(ValueError, match="not declared"):
            model_check(K, parse("zz"))

    def test_state_budget(self):
        K = random_structure(random.Random(3), 5)
        with pytest.raises(BudgetExceeded):
            model_check(K, parse("(F p) -> G ((F q) -> X (p U (p & q)))", K.ap), state_budget=50)

    def test_budget_from_environment(self, monkeypatch):
        from inqmc.automata.core import default_budget
        monkeypatch.setenv("INQMC_STATE_BUDGET", "123")
        assert default_budget() == 123
        assert Budget().limit == 123


class TestOneLetter:
    def test_agrees_with_rho0_membership(self):
        rng = random.Random(13)
        texts = ["G (q -> F p)", "!(F p) | X p", "(p U q) -> G !q", "F (p -> X !(q U p))",
                 "A1 F p", "dep(p; q)", "X X (p | q)", "(G p) R (F q)"]
        for _ in range(20):
            K = random_structure(rng, rng.randint(1, 4))
            ch = Checker(K, pipeline_alphabet(K))
            rho0 = K.initial_macro_lasso()
            for text in texts:
                A = ch.compile(parse(text, K.ap))
                A1 = ch.one_letterize(A)
                assert one_letter_nonempty(A1) == haa_accepts(A, rho0)
                assert A1.kinds == A.kinds

    def test_single_state_lift(self):
        K = structure_from_masks([1], [frozenset({"p"})], 1, ["p"])
        ch = Checker(K)
        A = ch.compile(parse("G p"))
        A1 = ch.one_letterize(A)
        q0, T = A1.initial
        assert T == 1
        assert A1.delta(A1.initial) == B.rename(A.delta(A.initial, 1), lambda r: (r, 1))

    @settings(max_examples=60)
    @given(formulas(left_positive=True, max_leaves=6), st.integers(0, 10_000))
    def test_negation_fast_path_matches_general(self, f, seed):
        if not classify(f).is_left_positive:
            return
        K = random_structure(random.Random(seed), 3)
        fast = model_check(K, f).holds
        slow = model_check(K, f, checker=Checker(K, pipeline_alphabet(K),
                                                 negation_fast_path=False)).holds
        assert fast == slow

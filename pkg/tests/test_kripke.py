import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from inqmc.kripke import (KripkeStructure, Lasso, StructureError, align, bits, initial_paths,
                          load_structure, macro_contains_path, mp_of_paths, paths_of_macro_lasso,
                          submasks)

from strategies import path_lassos, structures


def make(states, edges, initial, ap=("p",)):
    return KripkeStructure.from_dict({
        "ap": list(ap),
        "states": [{"id": s, "label": list(lab)} for s, lab in states],
        "initial": initial,
        "edges": edges,
    })


@pytest.fixture
def total2():
    return make([("s0", []), ("s1", ["p"])],
                [["s0", "s0"], ["s0", "s1"], ["s1", "s0"], ["s1", "s1"]], ["s0"])


class TestLoading:
    def test_single_state(self):
        K = make([("s0", ["p"])], [["s0", "s0"]], ["s0"])
        assert K.n == 1 and K.initial == 1 and K.label(0) == {"p"}

    def test_not_left_total(self):
        with pytest.raises(StructureError, match="not left-total at s1"):
            make([("s0", []), ("s1", [])], [["s0", "s1"]], ["s0"])

    def test_dangling_edge(self):
        with pytest.raises(StructureError, match="s9"):
            make([("s0", [])], [["s0", "s0"], ["s0", "s9"]], ["s0"])

    def test_empty_initial(self):
        with pytest.raises(StructureError, match="empty initial set"):
            make([("s0", [])], [["s0", "s0"]], [])

    def test_undeclared_label(self):
        with pytest.raises(StructureError, match="undeclared"):
            make([("s0", ["zz"])], [["s0", "s0"]], ["s0"])

    @pytest.mark.parametrize("doc", [
        {"states": [], "initial": [], "edges": []},
        {"ap": ["p"], "states": [{"label": []}], "initial": [], "edges": []},
        {"ap": ["p"], "states": [{"id": "s0", "label": []}], "initial": ["s0"], "edges": [["s0"]]},
        {"ap": "p", "states": [{"id": "s0", "label": []}], "initial": ["s0"], "edges": [["s0", "s0"]]},
    ])
    def test_schema_violations(self, doc):
        with pytest.raises(StructureError):
            KripkeStructure.from_dict(doc)

    def test_round_trip_file(self, tmp_path, total2):
        path = tmp_path / "k.json"
        path.write_text(json.dumps(total2.to_dict()))
        assert load_structure(path) == total2

    def test_bad_json(self, tmp_path):
        path = tmp_path / "k.json"
        path.write_text("{nope")
        with pytest.raises(StructureError, match="invalid JSON"):
            load_structure(path)

    def test_bundled_corpus_loads(self, corpus):
        for path in corpus.glob("*.json"):
            doc = json.loads(path.read_text())
            if "states" in doc:
                load_structure(path)


class TestSuccessor:
    def test_total_structure(self, total2):
        assert total2.is_successor(0b01, 0b10)

    def test_empty_cases(self, total2):
        assert total2.is_successor(0, 0)
        assert not total2.is_successor(0, 0b01)
        assert not total2.is_successor(0b01, 0)

    def test_unjustified_target(self):
        K = make([("s0", []), ("s1", [])], [["s0", "s0"], ["s1", "s1"]], ["s0"])
        assert not K.is_successor(0b01, 0b11)
        assert K.is_successor(0b01, 0b01)

    def test_uncovered_source(self):
        K = make([("s0", []), ("s1", [])], [["s0", "s0"], ["s1", "s1"]], ["s0"])
        assert not K.is_successor(0b11, 0b01)

    def test_forward_image(self):
        K = make([("s0", []), ("s1", [])], [["s0", "s0"], ["s0", "s1"], ["s1", "s1"]], ["s0"])
        assert K.forward_image(0b01) == 0b11
        assert K.forward_image(0) == 0

    @given(structures(), st.data())
    def test_forward_image_monotone(self, K, data):
        a = data.draw(st.integers(0, K.all_states))
        b = data.draw(st.integers(0, K.all_states)) | a
        assert K.forward_image(a) & ~K.forward_image(b) == 0

    @given(structures(), st.data())
    def test_successor_macro_states_are_successors(self, K, data):
        src = data.draw(st.integers(1, K.all_states))
        within = data.draw(st.integers(0, K.all_states))
        got = set(K.successor_macro_states(src, within))
        expected = {t for t in submasks(within) if t and K.is_successor(src, t)}
        assert got == expected

    def test_forward_image_is_largest_successor(self, total2):
        assert total2.is_successor(0b01, total2.forward_image(0b01))


class TestInitialMacroLasso:
    def test_single_state(self):
        K = make([("s", [])], [["s", "s"]], ["s"])
        assert K.initial_macro_lasso() == Lasso((), (1,))

    def test_total_two_state(self, total2):
        assert total2.initial_macro_lasso() == Lasso((0b01,), (0b11,))

    @given(structures(max_states=4))
    def test_adjacency(self, K):
        rho = K.initial_macro_lasso()
        assert K.is_macro_lasso(rho)
        assert len(rho) <= 2 ** K.n
        assert len(set(rho.letters())) == len(rho)

    @given(structures(max_states=4))
    def test_deterministic(self, K):
        assert K.initial_macro_lasso() == K.initial_macro_lasso()

    @given(structures(max_states=3))
    def test_paths_are_initial_paths(self, K):
        paths = initial_paths(K)
        if paths is None:
            return
        rho = K.initial_macro_lasso()
        got, empty = paths_of_macro_lasso(K, rho)
        assert not empty
        assert {p.canonical() for p in got} == {p.canonical() for p in paths}
        for p in paths:
            assert K.initial >> p[0] & 1
            assert K.is_path_lasso(p)


class TestMacroPaths:
    def test_mp_of_two_constant_paths(self, total2):
        rho = mp_of_paths(total2, [Lasso((), (0,)), Lasso((), (1,))])
        assert rho == Lasso((), (0b11,))
        got, _ = paths_of_macro_lasso(total2, rho)
        assert Lasso((), (0, 1)) in got  # a recombination not among the two paths
        assert len(got) > 2

    def test_mp_of_singleton(self, total2):
        path = Lasso((0,), (1, 0))
        rho = mp_of_paths(total2, [path])
        got, _ = paths_of_macro_lasso(total2, rho)
        assert [g.canonical() for g in got] == [path.canonical()]

    def test_mp_of_empty(self, total2):
        assert mp_of_paths(total2, []) == Lasso((), (0,))

    def test_shared_prefix_recombines(self):
        # s0 -> {s1, s2}; s1 -> {s3, s4}; s2 -> {s3, s4}; s3, s4 self-loops
        K = make([("s0", []), ("s1", []), ("s2", []), ("s3", []), ("s4", [])],
                 [["s0", "s1"], ["s0", "s2"], ["s1", "s3"], ["s1", "s4"], ["s2", "s3"],
                  ["s2", "s4"], ["s3", "s3"], ["s4", "s4"]], ["s0"])
        a = Lasso((0, 1), (3,))
        b = Lasso((0, 2), (4,))
        rho = mp_of_paths(K, [a, b])
        got = {g.canonical() for g in paths_of_macro_lasso(K, rho)[0]}
        assert got == {a, b, Lasso((0, 1), (4,)), Lasso((0, 2), (3,))}

    def test_paths_of_empty(self, total2):
        assert paths_of_macro_lasso(total2, Lasso((), (0,))) == ([], True)

    def test_paths_of_total(self, total2):
        got, _ = paths_of_macro_lasso(total2, Lasso((), (0b11,)))
        for p in (Lasso((), (0,)), Lasso((), (1,)), Lasso((), (0, 1))):
            assert p in got

    @given(structures(max_states=4), st.data())
    def test_mp_superset(self, K, data):
        paths = data.draw(st.lists(path_lassos(K), min_size=1, max_size=3))
        rho = mp_of_paths(K, paths)
        assert K.is_macro_lasso(rho)
        for p in paths:
            assert macro_contains_path(rho, p)

    @given(structures(max_states=4), st.data())
    def test_emptiness_propagation(self, K, data):
        paths = data.draw(st.lists(path_lassos(K), max_size=2))
        rho = mp_of_paths(K, paths)
        assert (rho[0] == 0) == all(m == 0 for m in rho.letters())


class TestLasso:
    def test_canonical(self):
        assert Lasso((1, 2, 1, 2), (1, 2)).canonical() == Lasso((), (1, 2))
        assert Lasso((0,), (1, 1, 1)).canonical() == Lasso((0,), (1,))

    def test_align(self):
        assert align([Lasso((1,), (2, 3)), Lasso((), (4, 5, 6))]) == (1, 6)

    def test_suffix(self):
        w = Lasso((0,), (1, 2))
        assert w.suffix(2).same_word(Lasso((), (2, 1)))

    def test_bits_and_submasks(self):
        assert list(bits(0b1011)) == [0, 1, 3]
        assert sorted(submasks(0b101)) == [0, 1, 4, 5]

    def test_period_required(self):
        with pytest.raises(ValueError):
            Lasso((1,), ())

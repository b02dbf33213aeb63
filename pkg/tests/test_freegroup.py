"""Subgroup cores, induced endomorphisms, and the stable image.

Membership and kernel claims are cross-checked against brute-force word
enumeration (oracles.py); the enumeration relies only on free reduction,
never on the folding code under test.
"""

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from ttforge.graphs import (
    EdgePath, GraphMap, SerreGraph, inv, rose, token_dart,
)
from ttforge.freegroup import (
    LabeledGraph, SubgroupGraph, endomorphism_on_rose, fold, hall_completion,
    image_subgroup, induces_pi1_isomorphism, is_injective_on,
    kernel_stabilization, map_subgroup, pi1_endomorphism, stable_quotient,
    whole_group_graph,
)

from oracles import apply_endo, ball, kernel_ball

ROSE2 = rose(["a", "b"])


def w(text):
    """Token string to dart tuple."""
    return tuple(token_dart(t) for t in text.split())


def subgroup_ball(generator_words, depth):
    """All elements expressible as a product of at most ``depth`` generators.

    For a Nielsen-reduced generating set this contains every subgroup element
    of reduced length <= depth, because each factor contributes at least one
    surviving letter.
    """
    gens = []
    for text in generator_words:
        darts = w(text)
        gens.append(darts)
        gens.append(tuple(inv(d) for d in reversed(darts)))

    from ttforge.graphs import reduce_darts
    seen = {()}
    frontier = [()]
    for _ in range(depth):
        new = []
        for word in frontier:
            for g in gens:
                prod = reduce_darts(word + g)
                if prod not in seen:
                    seen.add(prod)
                    new.append(prod)
        frontier = new
    return seen


class TestFold:
    def test_single_loop_core(self):
        h = fold(ROSE2, "v", ["a b"])
        assert h.rank() == 1
        assert len(h.graph.vertices) == 2
        assert h.is_folded()
        assert not h.core_violations()

    def test_full_group(self):
        h = fold(ROSE2, "v", ["a", "b"])
        assert h.rank() == 2
        assert len(h.graph.vertices) == 1
        assert h.is_covering()

    def test_no_loops_gives_point(self):
        h = fold(ROSE2, "v", [])
        assert h.rank() == 0
        assert len(h.graph.vertices) == 1
        assert not h.graph.edge_ids

    def test_shared_prefix_folds(self):
        g3 = rose(["a", "b", "c"])
        h = fold(g3, "v", ["a b", "a c"])
        assert h.rank() == 2
        assert len(h.graph.vertices) == 2

    def test_accepts_paths_and_dart_tuples(self):
        from_path = fold(ROSE2, "v", [EdgePath(ROSE2, w("a b"))])
        from_darts = fold(ROSE2, "v", [w("a b")])
        from_text = fold(ROSE2, "v", ["a b"])
        assert from_path == from_darts == from_text

    def test_rejects_open_path(self):
        theta = SerreGraph(["p", "q"],
                           [("x", "p", "q"), ("y", "p", "q")])
        with pytest.raises(ValueError):
            fold(theta, "p", [("x",)])

    def test_rejects_unknown_basepoint(self):
        with pytest.raises(ValueError):
            fold(ROSE2, "nope", [])

    def test_confluence_under_permutation(self):
        words = ["a b", "b a -b", "a a b", "-b a"]
        reference = fold(ROSE2, "v", words)
        for perm in itertools.permutations(words):
            other = fold(ROSE2, "v", list(perm))
            assert other == reference
            assert hash(other) == hash(reference)
            assert other.canonical_key() == reference.canonical_key()

    @given(seed=st.integers(0, 10 ** 9))
    @settings(max_examples=60, deadline=None)
    def test_confluence_on_random_words(self, seed):
        rng = random.Random(seed)
        letters = ["a", "b", "-a", "-b"]
        words = []
        for _ in range(rng.randint(1, 4)):
            word = " ".join(rng.choice(letters)
                            for _ in range(rng.randint(1, 6)))
            words.append(word)
        reference = fold(ROSE2, "v", words)
        shuffled = words[:]
        rng.shuffle(shuffled)
        assert fold(ROSE2, "v", shuffled) == reference
        # refolding the computed basis reproduces the same core
        assert fold(ROSE2, "v",
                    [" ".join(map(str, wd)) for wd in ()] or
                    reference.generator_words()) == reference

    def test_refold_of_basis_is_identity(self):
        h = fold(ROSE2, "v", ["a a", "b b", "a b"])
        assert fold(ROSE2, "v", h.generator_words()) == h


class TestMembership:
    def test_membership_examples(self):
        h = fold(ROSE2, "v", ["a b"])
        assert h.contains(w("a b a b"))
        assert not h.contains(w("a"))
        assert h.contains(())

    def test_rewrite_round_trip(self):
        h = fold(ROSE2, "v", ["a b"])
        tokens = h.rewrite(w("a b a b"))
        assert tokens == (("g0", 1), ("g0", 1))
        with pytest.raises(ValueError):
            h.rewrite(w("a"))

    @pytest.mark.parametrize("gens", [
        ["a b"],
        ["a", "b a -b"],
        ["a a", "b b"],
    ])
    def test_membership_matches_product_enumeration(self, gens):
        h = fold(ROSE2, "v", gens)
        members = subgroup_ball(gens, 8)
        rng = random.Random(42)
        words = [wd for wd in
                 (tuple(w(" ".join(word))) for word in [])] or []
        # every reduced word of length <= 4, plus random longer ones
        letters = ["a", "b", "-a", "-b"]
        for length in range(0, 5):
            for combo in itertools.product(letters, repeat=length):
                word = w(" ".join(combo))
                from ttforge.graphs import reduce_darts
                if reduce_darts(word) == word:
                    words.append(word)
        for _ in range(150):
            length = rng.randint(5, 8)
            word = []
            for _ in range(length):
                options = [x for x in letters
                           if not word or w(x)[0] != inv(word[-1])]
                word.append(w(rng.choice(options))[0])
            words.append(tuple(word))
        for word in words:
            assert h.contains(word) == (word in members), word

    def test_trace_and_step(self):
        h = fold(ROSE2, "v", ["a b"])
        end, lifted, consumed = h.trace(h.basepoint, w("a b"))
        assert end == h.basepoint and consumed == 2
        assert h.project_darts(lifted) == w("a b")
        assert h.step(h.basepoint, token_dart("-b")) is not None
        assert h.step(h.basepoint, token_dart("b")) is None


class TestLabeledGraphPredicates:
    def test_unfolded_graph_is_not_immersion(self):
        graph = SerreGraph(["w0", "w1", "w2"],
                           [("p0", "w0", "w1"), ("p1", "w0", "w2")])
        lab = LabeledGraph(graph, ROSE2, {"p0": "a", "p1": "a"},
                           {"w0": "v", "w1": "v", "w2": "v"})
        assert not lab.is_immersion()

    def test_whole_group_graph_is_degree_one_cover(self):
        full = whole_group_graph(ROSE2, "v")
        assert full.is_covering()
        assert full.degree() == 1
        assert full.rank() == 2

    def test_proper_core_is_not_a_cover(self):
        h = fold(ROSE2, "v", ["a b"])
        assert not h.is_covering()


class TestInducedEndomorphism:
    def test_sigma_basis_images(self, sigma):
        phi = pi1_endomorphism(sigma)
        assert phi.basis_names() == ("x0", "x1")
        assert phi.basis == {"x0": ("a",), "x1": ("b",)}
        assert phi.basis_images() == {"x0": w("a b"), "x1": w("a b")}

    def test_fib_basis_images(self, fib):
        phi = pi1_endomorphism(fib)
        assert phi.basis_images() == {"x0": ("b",), "x1": w("a b")}

    def test_identity_endomorphism(self):
        ident = GraphMap(ROSE2, ROSE2, {"v": "v"}, {"a": "a", "b": "b"})
        phi = pi1_endomorphism(ident)
        assert phi.basis_images() == phi.basis

    def test_apply_word_iterates(self, sigma):
        phi = pi1_endomorphism(sigma)
        word = w("a -b")
        assert phi.apply_word(word, 2) == phi.apply_word(phi.apply_word(word))
        assert phi.apply_word(word, 0) == word

    def test_needs_fixed_basepoint(self, cyc2):
        with pytest.raises(ValueError):
            pi1_endomorphism(cyc2)
        phi = pi1_endomorphism(cyc2.power(2), "u")
        assert phi.rank == 1

    def test_rejects_unfixed_choice(self, pre1_r2):
        with pytest.raises(ValueError):
            pi1_endomorphism(pre1_r2, "v0")

    def test_explicit_tree_changes_basis_not_image(self):
        theta = SerreGraph(["p", "q"], [("x", "p", "q"), ("y", "p", "q"),
                                        ("z", "p", "q")])
        f = GraphMap(theta, theta, {"p": "p", "q": "q"},
                     {"x": "x", "y": "y", "z": "x"})
        phi_x = pi1_endomorphism(f, "p")
        phi_y = pi1_endomorphism(f, "p", tree={"y"})
        assert phi_x.tree_edges != phi_y.tree_edges
        assert image_subgroup(phi_x, 1) == image_subgroup(phi_y, 1)

    def test_rejects_non_spanning_tree(self, sigma):
        with pytest.raises(ValueError):
            pi1_endomorphism(sigma, "v", tree={"a"})

    def test_rose_realization_matches_graph_map(self, sigma):
        phi = endomorphism_on_rose(["a", "b"], {"a": "a b", "b": "a b"})
        direct = pi1_endomorphism(sigma)
        assert phi.basis_images() == direct.basis_images()


class TestImageChain:
    def test_image_subgroup_examples(self, sigma, fib, nilp):
        phi = pi1_endomorphism(sigma)
        assert image_subgroup(phi, 1).rank() == 1
        assert image_subgroup(pi1_endomorphism(fib), 5).rank() == 2
        assert image_subgroup(pi1_endomorphism(nilp), 3).rank() == 0
        assert image_subgroup(phi, 0) == whole_group_graph(ROSE2, "v")
        with pytest.raises(ValueError):
            image_subgroup(phi, -1)

    def test_map_subgroup_examples(self, sigma, fib):
        phi = pi1_endomorphism(sigma)
        assert map_subgroup(phi, fold(ROSE2, "v", ["a"])) \
            == fold(ROSE2, "v", ["a b"])
        ident = pi1_endomorphism(
            GraphMap(ROSE2, ROSE2, {"v": "v"}, {"a": "a", "b": "b"}))
        h = fold(ROSE2, "v", ["a b", "b b"])
        assert map_subgroup(ident, h) == h
        assert map_subgroup(pi1_endomorphism(fib), fold(ROSE2, "v", ["a"])) \
            == fold(ROSE2, "v", ["b"])

    def test_injectivity_by_rank(self, sigma):
        phi = pi1_endomorphism(sigma)
        assert not is_injective_on(phi, whole_group_graph(ROSE2, "v"))
        assert is_injective_on(phi, fold(ROSE2, "v", ["a b"]))
        assert is_injective_on(phi, fold(ROSE2, "v", []))

    def test_stabilization_constants(self, sigma, fib, nilp, stab2, stab3):
        for f, expected in ((fib, 0), (sigma, 1), (nilp, 3),
                            (stab2, 2), (stab3, 3)):
            assert kernel_stabilization(pi1_endomorphism(f)) == expected

    def test_rank_chain_strictly_decreases_then_freezes(
            self, named_fixture_maps, nilp):
        maps = dict(named_fixture_maps)
        maps["nilp"] = nilp
        for name, f in maps.items():
            for r in range(1, len(f.domain.vertices) + 1):
                power = f.power(r)
                if any(power.vertex_map[v] == v
                       for v in f.domain.vertices):
                    break
            phi = pi1_endomorphism(power)
            K = kernel_stabilization(phi)
            ranks = [image_subgroup(phi, k).rank() for k in range(K + 3)]
            for k in range(K):
                assert ranks[k] > ranks[k + 1], name
            assert ranks[K] == ranks[K + 1] == ranks[K + 2], name


class TestKernelWitnesses:
    IMAGES = {"a": ("c",), "b": ("c",), "c": ("a", "-b")}

    def test_kernel_chain_witnesses(self, nilp):
        phi = pi1_endomorphism(nilp)
        assert phi.apply_word(w("a -b"), 1) == ()
        assert phi.apply_word(w("a c -b"), 1) != ()
        assert phi.apply_word(w("a c -b"), 2) == ()
        deep = w("c a b -a -c")
        assert phi.apply_word(deep, 2) != ()
        assert phi.apply_word(deep, 3) == ()

    def test_kernel_balls_nest(self):
        k1 = set(kernel_ball(self.IMAGES, ["a", "b", "c"], 1, 3))
        k2 = set(kernel_ball(self.IMAGES, ["a", "b", "c"], 2, 3))
        k3 = set(kernel_ball(self.IMAGES, ["a", "b", "c"], 3, 3))
        assert k1 < k2 < k3
        assert ("a", "-b") in k1
        assert ("a", "c", "-b") in k2 - k1

    def test_every_short_word_eventually_dies(self):
        for word in ball(["a", "b", "c"], 3):
            assert apply_endo(self.IMAGES, word, 3) == ()


class TestStableQuotient:
    def test_sigma_squares_a_generator(self, sigma):
        report = stable_quotient(pi1_endomorphism(sigma))
        assert report.exponent == 1
        assert report.rank == 1
        assert report.injective
        assert report.restriction == {"g0": "g0 g0"}
        assert report.restriction_word("g0") == "g0 g0"

    def test_fib_is_already_stable(self, fib):
        report = stable_quotient(pi1_endomorphism(fib))
        assert report.exponent == 0
        assert report.rank == 2
        assert report.injective
        assert report.core == whole_group_graph(ROSE2, "v")

    def test_nilp_collapses(self, nilp):
        report = stable_quotient(pi1_endomorphism(nilp))
        assert report.exponent == 3
        assert report.rank == 0
        assert report.restriction == {}
        assert report.injective

    def test_rank_is_stable_downstream(self, sigma, nilp, stab2):
        for f in (sigma, nilp, stab2):
            phi = pi1_endomorphism(f)
            report = stable_quotient(phi)
            for m in range(1, 4):
                assert image_subgroup(
                    phi, report.exponent + m).rank() == report.rank


class TestHomotopyEquivalence:
    def test_fixture_verdicts(self, sigma, fib, nilp, stab2, stab3):
        assert induces_pi1_isomorphism(fib)
        assert not induces_pi1_isomorphism(sigma)
        assert not induces_pi1_isomorphism(nilp)
        assert not induces_pi1_isomorphism(stab2)
        assert not induces_pi1_isomorphism(stab3)

    def test_identity_and_cyclic_relabel(self):
        ident = GraphMap(ROSE2, ROSE2, {"v": "v"}, {"a": "a", "b": "b"})
        swap = GraphMap(ROSE2, ROSE2, {"v": "v"}, {"a": "b", "b": "a"})
        assert induces_pi1_isomorphism(ident)
        assert induces_pi1_isomorphism(swap)


class TestHallCompletion:
    def test_single_loop_degree_one(self):
        h = fold(ROSE2, "v", ["a"])
        cover = hall_completion(h)
        assert cover.is_covering()
        assert cover.degree() == 1
        assert len(cover.graph.edge_ids) == 2

    def test_two_segment_path_closes_cyclically(self):
        graph = SerreGraph(["w0", "w1", "w2"],
                           [("p0", "w0", "w1"), ("p1", "w1", "w2")])
        sub = SubgroupGraph(graph, ROSE2, {"p0": "a", "p1": "a"},
                            {"w0": "v", "w1": "v", "w2": "v"}, "w0")
        cover = hall_completion(sub)
        assert cover.is_covering()
        assert cover.degree() == 3
        # original edges kept verbatim
        for e in graph.edge_ids:
            assert cover.graph.origin(e) == graph.origin(e)
            assert cover.graph.terminus(e) == graph.terminus(e)
            assert cover.edge_label[e] == sub.edge_label[e]

    def test_cover_input_is_returned_unchanged(self):
        full = whole_group_graph(ROSE2, "v")
        cover = hall_completion(full)
        assert cover.degree() == 1
        assert cover.graph.edge_data == ROSE2.edge_data

    @given(seed=st.integers(0, 10 ** 9))
    @settings(max_examples=50, deadline=None)
    def test_random_cores_embed_in_covers(self, seed):
        rng = random.Random(seed)
        k = rng.randint(2, 3)
        ambient = rose(["a", "b", "c"][:k])
        letters = [x for g in ambient.edge_ids for x in (g, "-" + g)]
        words = [" ".join(rng.choice(letters)
                          for _ in range(rng.randint(1, 6)))
                 for _ in range(rng.randint(1, 3))]
        sub = fold(ambient, "v", words)
        cover = hall_completion(sub)
        assert cover.is_covering()
        assert cover.degree() >= 1
        for e in sub.graph.edge_ids:
            assert cover.edge_label[e] == sub.edge_label[e]
            assert cover.graph.origin(e) == sub.graph.origin(e)
            assert cover.graph.terminus(e) == sub.graph.terminus(e)
        for v in sub.graph.vertices:
            assert cover.vertex_image[v] == sub.vertex_image[v]

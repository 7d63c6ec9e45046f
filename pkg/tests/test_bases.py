"""Automorphisms, transform descriptors, folding, signed permutations."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from whitehead.bases import (
    Automorphism,
    SignedPermutation,
    WhiteheadTransformDescriptor,
    compose,
    enumerate_signed_permutations,
    enumerate_whitehead_transforms,
    fold,
    invert_aut,
    invert_images,
    is_basis,
    relabel_tables,
    signed_permutation_match,
    transform_to_automorphism,
)
from whitehead.errors import NotABasis, RankMismatch
from whitehead.words import CyclicWord, Word

from helpers import random_automorphism, random_word


def W(text, rank=2):
    return Word.parse(rank, text)


class TestEnumeration:
    def test_counts(self):
        assert len(enumerate_whitehead_transforms(1)) == 0
        assert len(enumerate_whitehead_transforms(2)) == 12
        assert len(enumerate_whitehead_transforms(3)) == 90

    def test_images_are_distinct(self):
        seen = {tuple(d.images()) for d in enumerate_whitehead_transforms(3)}
        assert len(seen) == 90

    def test_multiplier_order_is_letter_order(self):
        ms = [d.multiplier for d in enumerate_whitehead_transforms(2)]
        assert ms == [1, 1, 1, 2, 2, 2, -1, -1, -1, -2, -2, -2]

    def test_first_descriptor_is_right_multiplication(self):
        d = enumerate_whitehead_transforms(2)[0]
        assert [w.to_text() for w in d.images()] == ["a", "bA"]

    def test_inverse_keeps_flags_inverts_multiplier(self):
        # the transform a->a, b->ab inverts to a->a, b->Ab
        for d in enumerate_whitehead_transforms(2):
            if [w.to_text() for w in d.images()] == ["a", "ab"]:
                inv = d.inverse()
                assert [w.to_text() for w in inv.images()] == ["a", "Ab"]
                break
        else:
            pytest.fail("transform (a, ab) not enumerated")

    def test_set_closed_under_inverse(self):
        ts = enumerate_whitehead_transforms(2)
        images = {tuple(w.codes for w in d.images()) for d in ts}
        for d in ts:
            assert tuple(w.codes for w in d.inverse().images()) in images

    def test_descriptor_round_trips_json(self):
        for d in enumerate_whitehead_transforms(2)[:4]:
            again = WhiteheadTransformDescriptor.from_json_dict(2, d.to_json_dict())
            assert again == d

    def test_rejects_identity_descriptor(self):
        with pytest.raises(ValueError):
            WhiteheadTransformDescriptor(2, 1, ((False, False), (False, False)))


class TestAutomorphism:
    def test_identity(self):
        e = Automorphism.identity(2)
        assert e.is_identity()
        assert e.apply(W("abAB")) == W("abAB")

    def test_known_inverse(self):
        y = Automorphism.from_images(2, (W("ab"), W("b")))
        assert [w.to_text() for w in y.backward] == ["aB", "b"]

    def test_apply_is_homomorphism(self):
        rng = random.Random(7)
        aut = random_automorphism(2, 3, rng)
        for _ in range(20):
            u, v = random_word(2, 6, rng), random_word(2, 6, rng)
            assert aut.apply(u * v) == aut.apply(u) * aut.apply(v)

    def test_apply_cyclic_returns_cyclic(self):
        y = Automorphism.from_images(2, (W("ab"), W("b")))
        img = y.apply(CyclicWord.parse(2, "ab"))
        assert isinstance(img, CyclicWord)

    def test_compose_against_pointwise(self):
        rng = random.Random(11)
        s = random_automorphism(2, 3, rng)
        t = random_automorphism(2, 3, rng)
        st_ = compose(s, t)
        for _ in range(20):
            w = random_word(2, 8, rng)
            assert st_.apply(w) == s.apply(t.apply(w))

    def test_inverse_composes_to_identity(self):
        rng = random.Random(13)
        s = random_automorphism(3, 3, rng)
        assert compose(s, invert_aut(s)).is_identity()
        assert compose(invert_aut(s), s).is_identity()

    def test_rejects_non_basis_images(self):
        with pytest.raises(NotABasis):
            Automorphism.from_images(2, (W("aa"), W("b")))
        with pytest.raises(NotABasis):
            Automorphism.from_images(2, (W("ab"), W("ba")))

    def test_rejects_rank_mismatch(self):
        with pytest.raises(RankMismatch):
            compose(Automorphism.identity(2), Automorphism.identity(3))

    def test_json_round_trip(self):
        rng = random.Random(17)
        s = random_automorphism(2, 4, rng)
        again = Automorphism.from_json_dict(s.to_json_dict())
        assert again == s

    def test_letter_image(self):
        y = Automorphism.from_images(2, (W("ab"), W("b")))
        assert y.letter_image(1).to_text() == "ab"
        assert y.letter_image(-1).to_text() == "BA"


class TestInvertImages:
    def test_single_letters(self):
        assert invert_images(2, (W("b"), W("a"))) == (W("b"), W("a"))
        assert invert_images(2, (W("A"), W("b"))) == (W("A"), W("b"))

    def test_not_a_basis_raises(self):
        for imgs in [(W("a"), W("a")), (W("aa"), W("b")), (W("abAB"), W("b"))]:
            with pytest.raises(NotABasis):
                invert_images(2, imgs)

    def test_identity_image_raises(self):
        with pytest.raises(NotABasis):
            invert_images(2, (W(""), W("b")))

    @settings(deadline=None, max_examples=30)
    @given(st.integers(2, 3), st.integers(0, 5), st.randoms(use_true_random=False))
    def test_round_trip_on_composed_transforms(self, rank, depth, rng):
        aut = random_automorphism(rank, depth, rng)
        assert invert_images(rank, aut.forward) == aut.backward

    def test_rank_one(self):
        assert invert_images(1, (Word.parse(1, "A"),)) == (Word.parse(1, "A"),)
        with pytest.raises(NotABasis):
            invert_images(1, (Word.parse(1, "aa"),))


class TestFolding:
    def test_two_vertex_example(self):
        g = fold(2, (W("aa"), W("b")))
        assert g.n_vertices == 2
        assert g.edges == frozenset({(0, 1, 1), (1, 1, 0), (0, 2, 0)})
        assert not g.is_rose

    def test_rose_examples(self):
        assert fold(2, (W("ab"), W("aba"))).is_rose
        assert fold(2, (W("b"), W("ab"))).is_rose
        assert fold(2, (W("a"), W("b"))).is_rose

    def test_more_generators_than_rank_can_still_generate(self):
        g = fold(2, (W("aa"), W("ab"), W("b")))
        assert g.is_rose

    def test_is_basis_requires_exact_size(self):
        assert not is_basis(2, (W("a"),))
        assert not is_basis(2, (W("a"), W("b"), W("ab")))
        assert is_basis(2, (W("a"), W("b")))

    def test_conjugate_pair_is_a_basis(self):
        assert is_basis(2, (W("bab"), W("b")))

    @settings(deadline=None, max_examples=30)
    @given(st.integers(2, 3), st.integers(0, 4), st.randoms(use_true_random=False))
    def test_automorphism_images_always_a_basis(self, rank, depth, rng):
        aut = random_automorphism(rank, depth, rng)
        assert is_basis(rank, aut.forward)


class TestSignedPermutations:
    def test_counts_and_identity_first(self):
        assert len(enumerate_signed_permutations(1)) == 2
        assert len(enumerate_signed_permutations(2)) == 8
        assert len(enumerate_signed_permutations(3)) == 48
        assert enumerate_signed_permutations(3)[0].is_identity()

    def test_apply_compose_inverse(self):
        p = SignedPermutation(2, (-2, 1))
        q = SignedPermutation(2, (2, 1))
        w = W("abAB")
        assert p.apply(w) == W("BabA")
        assert p.compose(p.inverse()).is_identity()
        assert q.compose(p).apply(w) == q.apply(p.apply(w))

    def test_matches_automorphism_action(self):
        p = SignedPermutation(2, (-2, 1))
        aut = p.to_automorphism()
        for text in ("ab", "aBBa", "bAb"):
            assert p.apply(W(text)) == aut.apply(W(text))

    def test_relabel_tables_identity_row(self):
        t = relabel_tables(2)[0]
        assert list(t) == [-2, -1, 0, 1, 2]

    def test_rejects_bad_targets(self):
        with pytest.raises(ValueError):
            SignedPermutation(2, (1, 1))


class TestSignedPermutationMatch:
    def test_positive(self):
        x = Automorphism.identity(2)
        y = Automorphism.from_images(2, (W("B"), W("a")))
        m = signed_permutation_match(x, y)
        assert m is not None and m.targets == (-2, 1)
        assert compose(x, m.to_automorphism()) == y

    def test_negative(self):
        x = Automorphism.identity(2)
        y = Automorphism.from_images(2, (W("ab"), W("b")))
        assert signed_permutation_match(x, y) is None

    def test_same_basis_gives_identity(self):
        rng = random.Random(23)
        x = random_automorphism(2, 3, rng)
        m = signed_permutation_match(x, x)
        assert m is not None and m.is_identity()

    def test_transform_to_automorphism(self):
        d = enumerate_whitehead_transforms(2)[0]
        assert transform_to_automorphism(d).forward == d.images()

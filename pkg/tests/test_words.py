"""Word layer: shortlex order, canonical forms, conjugation."""

import itertools

import pytest
from hypothesis import given, strategies as st

from momentsdp.words import (
    Context,
    Dictionary,
    IDENTITY_WORD,
    OperatorWord,
    ZERO_WORD,
    shortlex_key,
    word_hash,
)


def brute_shortlex(words):
    # independent ordering: length first, then tuple comparison
    return sorted(words, key=lambda w: (len(w), w))


def test_shortlex_matches_bruteforce():
    words = [tuple(t) for n in range(4) for t in itertools.product(range(3), repeat=n)]
    assert sorted(words, key=shortlex_key) == brute_shortlex(words)


@given(st.lists(st.tuples(), max_size=0))
def test_identity_word_is_least(_):
    assert shortlex_key(()) <= shortlex_key((0,))


@given(
    st.tuples(st.lists(st.integers(0, 4), max_size=6).map(tuple),
              st.lists(st.integers(0, 4), max_size=6).map(tuple),
              st.lists(st.integers(0, 4), max_size=6).map(tuple))
)
def test_shortlex_total_order(abc):
    a, b, c = abc
    ka, kb, kc = shortlex_key(a), shortlex_key(b), shortlex_key(c)
    assert (ka == kb) == (a == b)
    if ka <= kb and kb <= kc:
        assert ka <= kc


def test_identity_and_zero_words():
    assert IDENTITY_WORD.is_identity
    assert not IDENTITY_WORD.is_zero
    assert ZERO_WORD.is_zero
    assert OperatorWord((0, 1)).bare() == OperatorWord((0, 1))
    assert OperatorWord((0, 1), phase=3).bare() == OperatorWord((0, 1))


def test_phase_arithmetic():
    w = OperatorWord((2,), phase=1)
    assert w.phase_value == 1j
    assert OperatorWord((2,), phase=2).phase_value == -1
    assert w.with_phase(7).phase == 3  # quarter turns wrap mod 4


def test_word_hash_is_shortlex_rank():
    words = [tuple(t) for n in range(4) for t in itertools.product(range(4), repeat=n)]
    words.sort(key=shortlex_key)
    # rank r for the r-th word of the ordered language, so injective and monotone
    assert [word_hash(w, 4) for w in words] == list(range(len(words)))


class TestHermitianContext:
    def test_conjugate_reverses(self):
        ctx = Context(3)
        w = ctx.word((0, 1, 2))
        assert ctx.conjugate(w).indices == (2, 1, 0)

    def test_conjugate_involutive(self):
        ctx = Context(3)
        for t in itertools.product(range(3), repeat=3):
            w = ctx.word(t)
            assert ctx.conjugate(ctx.conjugate(w)) == w

    def test_multiply_concatenates(self):
        ctx = Context(2)
        w = ctx.multiply(ctx.word((0,)), ctx.word((1, 0)))
        assert w.indices == (0, 1, 0)

    def test_canonical_moment_word_default_is_identity_map(self):
        # conjugate-pair folding happens at registry level, not here
        ctx = Context(2)
        w = ctx.word((1, 0))
        assert ctx.canonical_moment_word(w) == w


class TestNonHermitianContext:
    def test_adjoint_slots_interleave(self):
        from momentsdp.algebraic import AlgebraicContext

        ctx = AlgebraicContext(2, hermitian=False)
        # x1, x1*, x2, x2* occupy indices 0..3
        assert ctx.operator_count == 4
        assert ctx.adjoint_index(0) == 1
        assert ctx.adjoint_index(1) == 0
        assert ctx.adjoint_index(2) == 3
        assert ctx.operator_name(0) != ctx.operator_name(1)

    def test_conjugate_uses_adjoints(self):
        from momentsdp.algebraic import AlgebraicContext

        ctx = AlgebraicContext(1, hermitian=False)
        w = ctx.word((0, 0))
        assert ctx.conjugate(w).indices == (1, 1)


class TestDictionary:
    def test_free_algebra_counts(self):
        # 2 hermitian generators: 1 + 2 + 4 + 8 words by level
        ctx = Context(2)
        for level, count in [(0, 1), (1, 3), (2, 7), (3, 15)]:
            assert len(Dictionary(ctx, level).words) == count

    def test_words_sorted_and_unique(self):
        ctx = Context(3)
        d = Dictionary(ctx, 2)
        keys = [shortlex_key(w.indices) for w in d.words]
        assert keys == sorted(keys)
        assert len(set(keys)) == len(keys)

    def test_identity_first(self):
        ctx = Context(2)
        assert Dictionary(ctx, 2).words[0].is_identity

    def test_admit_filter(self):
        ctx = Context(2)
        d = Dictionary(ctx, 2, admit=lambda idx: 1 not in idx)
        assert all(1 not in w.indices for w in d.words)
        assert len(d.words) == 3  # e, x, xx

    def test_conjugate_words(self):
        from momentsdp.algebraic import AlgebraicContext

        ctx = AlgebraicContext(1, hermitian=False)
        d = Dictionary(ctx, 1)
        conj = d.conjugate_words()
        assert len(conj) == len(d.words)
        assert conj[0].is_identity
        # x row word is x*, and vice versa
        assert conj[1].indices == (1,)
        assert conj[2].indices == (0,)

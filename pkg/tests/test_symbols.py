"""Symbol registry and moment polynomial algebra."""

import math

import pytest

import momentsdp as msdp
from momentsdp import AlgebraicScenario, IDENTITY_SYMBOL, ZERO_SYMBOL, MomentPolynomial


@pytest.fixture
def free_xy():
    sc = AlgebraicScenario(2, names=["x", "y"])
    sc.moment_matrix(1)  # registers all level-1 moments
    return sc


def test_reserved_symbols():
    assert ZERO_SYMBOL == 0
    assert IDENTITY_SYMBOL == 1


def test_registration_order_follows_matrix_walk(free_xy):
    names = [row["name"] for row in free_xy.registry.table()]
    assert names == ["0", "<I>", "<x>", "<y>", "<x;x>", "<x;y>", "<y;y>"]


def test_hermitian_flags(free_xy):
    table = {row["name"]: row["hermitian"] for row in free_xy.registry.table()}
    # xy is the only non-hermitian moment at level 1: (xy)* = yx != xy
    assert table["<x>"] and table["<x;x>"] and table["<y;y>"]
    assert not table["<x;y>"]


def test_conjugate_word_shares_symbol(free_xy):
    reg = free_xy.registry
    s_xy = reg.register_word(free_xy.context.word((0, 1)))
    s_yx = reg.register_word(free_xy.context.word((1, 0)))
    assert s_xy.symbol == s_yx.symbol
    assert not s_xy.conjugated
    assert s_yx.conjugated


def test_slot_layout_real_and_imag(free_xy):
    lay = free_xy.registry.slot_layout()
    assert lay.real_symbols == (1, 2, 3, 4, 5, 6)
    assert lay.imag_symbols == (5,)
    assert lay.count == 7


def test_lookup_word(free_xy):
    reg = free_xy.registry
    hit = reg.lookup_word(free_xy.context.word((0,)))
    assert hit is not None
    assert reg.symbol_name(hit) == "<x>"
    assert reg.lookup_word(free_xy.context.word((0, 0, 0))) is None


def test_register_label():
    sc = AlgebraicScenario(1, names=["x"])
    reg = sc.registry
    s = reg.register_label("w2", hermitian=False)
    assert reg.symbol_name(s) == "<w2>"
    assert not reg.entry(s).hermitian


class TestMomentPolynomial:
    def test_str_sorted_descending(self, free_xy):
        p = free_xy.moment(free_xy.monomial([0, 1], 2.0))
        q = free_xy.moment(free_xy.monomial([0], 1.0))
        one = free_xy.moment(free_xy.identity())
        total = q + p + one
        assert str(total) == "2*<x;y> + <x> + <I>"

    def test_conjugated_is_involution(self, free_xy):
        p = free_xy.moment(free_xy.monomial([0, 1], 1 + 2j))
        assert str(p.conjugated().conjugated()) == str(p)

    def test_real_imag_parts_sum_back(self, free_xy):
        p = free_xy.moment(free_xy.monomial([0, 1], 2.0))
        re, im = p.real_part(), p.imag_part()
        # p = re + i*im for the hermitian split
        back = re + im.scaled(1j)
        assert str(back) == str(p)

    def test_hermitian_moment_conjugates_to_itself(self, free_xy):
        p = free_xy.moment(free_xy.monomial([0], 3.0))
        assert str(p.conjugated()) == str(p)

    def test_evaluate(self, free_xy):
        p = free_xy.moment(free_xy.monomial([0, 1], 2.0))
        assert p.evaluate({5: 1 + 1j}) == 2 + 2j
        assert p.conjugated().evaluate({5: 1 + 1j}) == 2 - 2j

    def test_zero_collapses(self, free_xy):
        p = free_xy.moment(free_xy.monomial([0], 1.0))
        assert (p - p).is_zero()

    def test_scalar_detection(self, free_xy):
        one = free_xy.moment(free_xy.identity())
        assert one.scaled(2.5).is_scalar()
        assert one.scaled(2.5).scalar_value() == 2.5
        assert not free_xy.moment(free_xy.monomial([0])).is_scalar()

    def test_leading_is_highest_symbol(self, free_xy):
        p = free_xy.moment(free_xy.monomial([0])) + free_xy.moment(
            free_xy.monomial([0, 1], 4.0))
        assert p.leading.symbol == 5

    def test_scalar_multiplication(self, free_xy):
        p = free_xy.moment(free_xy.monomial([0]))
        assert str(2 * p) == str(p.scaled(2)) == "2*<x>"


class TestCompositeSymbols:
    def test_composite_records_factors(self):
        # <a><b> as a dedicated product variable
        sc = AlgebraicScenario(2, names=["a", "b"])
        sc.moment_matrix(1)
        reg = sc.registry
        sa = reg.lookup_word(sc.context.word((0,)))
        sb = reg.lookup_word(sc.context.word((1,)))
        prod = reg.register_composite((sa, sb))
        lay = reg.slot_layout()
        assert reg.entry(prod).factors == (sa, sb)
        assert reg.symbol_name(prod) == "(<a>*<b>)"
        # a product symbol is a genuine scalar variable in the layout
        assert prod in lay.real_symbols

    def test_register_composite_idempotent(self):
        sc = AlgebraicScenario(2, names=["a", "b"])
        sc.moment_matrix(1)
        reg = sc.registry
        sa = reg.lookup_word(sc.context.word((0,)))
        assert reg.register_composite((sa, sa)) == reg.register_composite((sa, sa))

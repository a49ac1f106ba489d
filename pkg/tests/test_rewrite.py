"""String rewriting and Knuth-Bendix completion."""

import random

import pytest

from momentsdp.rewrite import OperatorRule, OperatorRulebook
from momentsdp.words import OperatorWord, shortlex_key


def naive_reduce(rules, seq, order=None):
    """Oracle: apply rules at the first matching position until fixpoint.

    `order` permutes the rule list, so completion can be checked for
    order independence.
    """
    rules = [rules[i] for i in order] if order is not None else list(rules)
    seq = tuple(seq)
    changed = True
    while changed:
        changed = False
        for r in rules:
            l = len(r.lhs)
            for i in range(len(seq) - l + 1):
                if seq[i:i + l] == r.lhs:
                    seq = seq[:i] + r.rhs + seq[i + l:]
                    changed = True
                    break
            if changed:
                break
    return seq


def test_paper_pair_completes_with_exactly_ac():
    # {ab -> a, bc -> b} is not confluent: abc reduces to both ac and a
    rb = OperatorRulebook([OperatorRule((0, 1), (0,)), OperatorRule((1, 2), (1,))])
    assert not rb.is_confluent()
    assert rb.complete()
    got = sorted((r.lhs, r.rhs) for r in rb.rules)
    assert got == [((0, 1), (0,)), ((0, 2), (0,)), ((1, 2), (1,))]
    assert rb.is_confluent()


def test_critical_pair_word_now_joinable():
    rb = OperatorRulebook([OperatorRule((0, 1), (0,)), OperatorRule((1, 2), (1,))])
    rb.complete()
    assert rb.reduce((0, 1, 2)).indices == (0,)


def test_random_words_reduce_order_independently():
    rb = OperatorRulebook([OperatorRule((0, 1), (0,)), OperatorRule((1, 2), (1,))])
    rb.complete()
    rules = list(rb.rules)
    rng = random.Random(20240817)
    for _ in range(1000):
        seq = tuple(rng.randrange(3) for _ in range(rng.randrange(1, 10)))
        perm = list(range(len(rules)))
        rng.shuffle(perm)
        expected = naive_reduce(rules, seq)
        assert naive_reduce(rules, seq, perm) == expected
        assert rb.reduce(seq).indices == expected


def test_reduction_never_increases_shortlex():
    rb = OperatorRulebook([OperatorRule((0, 1), (0,)), OperatorRule((1, 2), (1,))])
    rb.complete()
    rng = random.Random(7)
    for _ in range(300):
        seq = tuple(rng.randrange(3) for _ in range(rng.randrange(0, 8)))
        red = rb.reduce(seq)
        assert shortlex_key(red.indices) <= shortlex_key(seq)


def test_projector_rule():
    rb = OperatorRulebook([OperatorRule((0, 0), (0,))])
    assert rb.reduce((0, 0, 0, 0)).indices == (0,)
    assert rb.reduce((0, 1, 0)).indices == (0, 1, 0)


def test_zero_rule_annihilates():
    rb = OperatorRulebook([OperatorRule((0, 1), (), is_zero=True)])
    w = rb.reduce((2, 0, 1, 2))
    assert w.is_zero


def test_phase_rule_accumulates():
    # yx -> i xy twice: yyxx involves two swaps with one phase each
    rb = OperatorRulebook([OperatorRule((1, 0), (0, 1), phase=1)])
    w = rb.reduce((1, 0))
    assert w.indices == (0, 1) and w.phase == 1
    w2 = rb.reduce((1, 1, 0))
    assert w2.indices == (0, 1, 1) and w2.phase == 2


def test_phase_consistency_detected_on_overlap():
    # xx -> 1 with phase and a commuting pair stays completable
    rb = OperatorRulebook([OperatorRule((0, 0), ()), OperatorRule((1, 0), (0, 1))])
    assert rb.complete()
    assert rb.reduce((1, 0, 0)).indices == (1,)


def test_rules_must_be_shortlex_decreasing():
    from momentsdp.rewrite import RulebookError

    with pytest.raises(RulebookError):
        OperatorRulebook([OperatorRule((1, 0), (0, 0, 1))])


def test_completion_cap_reports_failure():
    # cap of zero cannot absorb the needed ac -> a
    rb = OperatorRulebook([OperatorRule((0, 1), (0,)), OperatorRule((1, 2), (1,))])
    assert rb.complete(max_new_rules=0) is False


def test_completion_log_callback():
    lines = []
    rb = OperatorRulebook([OperatorRule((0, 1), (0,)), OperatorRule((1, 2), (1,))])
    rb.complete(log=lines.append)
    assert any("(0, 2)" in ln or "ac" in ln or "0 2" in ln for ln in lines) or lines


def test_reduce_word_keeps_phase():
    rb = OperatorRulebook([OperatorRule((0, 1), (0,))])
    w = OperatorWord((0, 1), phase=3)
    red = rb.reduce_word(w)
    assert red.indices == (0,) and red.phase == 3

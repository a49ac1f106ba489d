"""String rewriting over operator words, with Knuth-Bendix completion.

Rules map an index substring to a shorter-or-equal string times a phase
(or to zero).  Reduction repeatedly applies the first matching rule at its
leftmost occurrence until no rule matches.  Completion resolves overlap
ambiguities between rule left-hand sides, appending new rules until the
set is convergent or a restart cap is hit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .words import OperatorWord, ZERO_WORD, shortlex_key


@dataclass(frozen=True)
class OperatorRule:
    """An oriented rewrite rule lhs -> phase * rhs (or lhs -> 0).

    lhs/rhs are raw index tuples; phase is a power of i applied once per
    substitution.  Orientation invariant: rhs < lhs in shortlex order.
    """

    lhs: tuple[int, ...]
    rhs: tuple[int, ...]
    phase: int = 0
    is_zero: bool = False

    def __str__(self) -> str:
        left = ".".join(str(i + 1) for i in self.lhs) or "I"
        if self.is_zero:
            return f"{left} -> 0"
        prefix = {0: "", 1: "i", 2: "-", 3: "-i"}[self.phase & 3]
        right = ".".join(str(i + 1) for i in self.rhs) or "I"
        return f"{left} -> {prefix}{right}"


class RulebookError(ValueError):
    pass


def orient_rule(a: Sequence[int], b: Sequence[int], phase: int = 0,
                b_zero: bool = False) -> OperatorRule | None:
    """Orient the equality a = i^phase * b into a shortlex-decreasing rule.

    Returns None for trivial identities a = a.  Equal sequences with a
    non-unit relative phase collapse to a zero rule (w = i^k w forces
    w = 0 for k != 0).
    """
    a, b = tuple(a), tuple(b)
    if b_zero:
        if not a:
            raise RulebookError("cannot map identity to zero")
        return OperatorRule(a, (), 0, True)
    if a == b:
        if phase % 4 == 0:
            return None
        if not a:
            raise RulebookError("identity equated with a phase of itself")
        return OperatorRule(a, (), 0, True)
    if shortlex_key(a) > shortlex_key(b):
        return OperatorRule(a, b, phase % 4)
    # flip: b = i^{-phase} a
    return OperatorRule(b, a, (-phase) % 4)


def _find(haystack: tuple[int, ...], needle: tuple[int, ...]) -> int:
    n, m = len(haystack), len(needle)
    if m == 0 or m > n:
        return -1
    first = needle[0]
    for i in range(n - m + 1):
        if haystack[i] == first and haystack[i:i + m] == needle:
            return i
    return -1


class OperatorRulebook:
    """An ordered set of rewrite rules acting on index sequences."""

    def __init__(self, rules: Iterable[OperatorRule] = ()):
        self.rules: list[OperatorRule] = []
        for r in rules:
            self.add(r)

    def add(self, rule: OperatorRule) -> None:
        if not rule.lhs:
            raise RulebookError("rule with empty left-hand side")
        if not rule.is_zero and shortlex_key(rule.rhs) >= shortlex_key(rule.lhs):
            raise RulebookError(f"rule not shortlex-decreasing: {rule}")
        self.rules.append(rule)

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    # -- reduction ------------------------------------------------------
    def reduce(self, indices: Sequence[int], phase: int = 0) -> OperatorWord:
        """Fully reduce a raw sequence; deterministic leftmost-first order."""
        seq = tuple(indices)
        ph = phase & 3
        changed = True
        while changed:
            changed = False
            for rule in self.rules:
                pos = _find(seq, rule.lhs)
                if pos < 0:
                    continue
                if rule.is_zero:
                    return ZERO_WORD
                seq = seq[:pos] + rule.rhs + seq[pos + len(rule.lhs):]
                ph = (ph + rule.phase) & 3
                changed = True
                break
        return OperatorWord(seq, ph)

    def reduce_word(self, word: OperatorWord) -> OperatorWord:
        if word.is_zero:
            return ZERO_WORD
        return self.reduce(word.indices, word.phase)

    # -- completion -----------------------------------------------------
    def is_confluent(self) -> bool:
        """True if no ordered rule pair has a non-confluent overlap."""
        return self._find_critical_pair() is None

    def _find_critical_pair(self):
        for i, ri in enumerate(self.rules):
            for j, rj in enumerate(self.rules):
                if i == j:
                    continue
                overlap = self._max_overlap(ri.lhs, rj.lhs)
                if overlap == 0:
                    continue
                word = ri.lhs + rj.lhs[overlap:]
                left = self._apply_at(word, ri, 0)
                right = self._apply_at(word, rj, len(word) - len(rj.lhs))
                red_l = self.reduce(*left) if left is not None else ZERO_WORD
                red_r = self.reduce(*right) if right is not None else ZERO_WORD
                if red_l != red_r:
                    return ri, rj, word, red_l, red_r
        return None

    @staticmethod
    def _max_overlap(a: tuple[int, ...], b: tuple[int, ...]) -> int:
        for k in range(min(len(a), len(b)), 0, -1):
            if a[len(a) - k:] == b[:k]:
                return k
        return 0

    @staticmethod
    def _apply_at(word: tuple[int, ...], rule: OperatorRule, pos: int):
        if rule.is_zero:
            return None  # the whole word vanishes
        seq = word[:pos] + rule.rhs + word[pos + len(rule.lhs):]
        return seq, rule.phase

    def complete(self, max_new_rules: int = 128,
                 log: Callable[[str], None] | None = None) -> bool:
        """Knuth-Bendix completion; True on success, False if capped.

        Each new rule triggers a restart of the pair scan; existing rules
        have their right-hand sides re-reduced against the new rule, and
        rules collapsing to triviality are dropped.
        """
        emit = log if log is not None else (lambda line: None)
        restarts = 0
        while True:
            found = self._find_critical_pair()
            if found is None:
                emit(f"complete: {len(self.rules)} rules, {restarts} new")
                return True
            ri, rj, word, red_l, red_r = found
            wtxt = ".".join(str(x + 1) for x in word)
            emit(f"overlap {ri} / {rj} on {wtxt}: {red_l} != {red_r}")
            if restarts >= max_new_rules:
                emit(f"gave up after {restarts} new rules")
                return False
            if red_l.is_zero or red_r.is_zero:
                survivor = red_r if red_l.is_zero else red_l
                new_rule = OperatorRule(survivor.indices, (), 0, True) \
                    if not survivor.is_zero else None
            else:
                new_rule = orient_rule(red_l.indices, red_r.indices,
                                       (red_r.phase - red_l.phase) % 4)
            if new_rule is not None:
                self._reduce_existing(new_rule, emit)
                self.add(new_rule)
                emit(f"new rule: {new_rule}")
            restarts += 1

    def _reduce_existing(self, new_rule: OperatorRule,
                         emit: Callable[[str], None]) -> None:
        probe = OperatorRulebook()
        probe.rules = self.rules + [new_rule]
        kept: list[OperatorRule] = []
        for rk in self.rules:
            if rk.is_zero or _find(rk.rhs, new_rule.lhs) < 0:
                kept.append(rk)
                continue
            reduced = probe.reduce(rk.rhs, rk.phase)
            if not reduced.is_zero and reduced.indices == rk.lhs \
                    and reduced.phase == 0:
                emit(f"deleted redundant rule: {rk}")
                continue
            if reduced.is_zero:
                replacement = OperatorRule(rk.lhs, (), 0, True)
            else:
                replacement = OperatorRule(rk.lhs, reduced.indices,
                                           reduced.phase)
            emit(f"rewrote rhs: {rk} => {replacement}")
            kept.append(replacement)
        self.rules = kept

"""Scenarios whose algebra is given by monomial rewrite relations.

Operators are declared up front; relations equate one index sequence with
a phase times another (or with zero) and are oriented into shortlex
decreasing rules.  Running completion makes the rule set confluent, after
which every word has a unique canonical form and the moment matrices are
well defined.
"""

from __future__ import annotations

from typing import Callable, Sequence

from .rewrite import OperatorRulebook, orient_rule
from .scenario import Scenario
from .words import Context, OperatorWord


class AlgebraicContext(Context):
    """Alphabet with monomial rewrite relations.

    With ``hermitian=False`` each declared operator brings its adjoint as
    a separate fundamental operator, interleaved as (x1, x1*, x2, x2*...).
    """

    def __init__(self, operator_count: int, hermitian: bool = True,
                 names: Sequence[str] | None = None):
        count = operator_count if hermitian else 2 * operator_count
        super().__init__(count, hermitian)
        self.rulebook = OperatorRulebook()
        self._names = list(names) if names is not None else None

    def operator_name(self, index: int) -> str:
        if self.hermitian_alphabet:
            if self._names is not None:
                return self._names[index]
            return f"X{index + 1}"
        base = (self._names[index // 2] if self._names is not None
                else f"X{index // 2 + 1}")
        return base if index % 2 == 0 else base + "*"

    def adjoint_index(self, index: int) -> int:
        if self.hermitian_alphabet:
            return index
        return index + 1 if index % 2 == 0 else index - 1

    def simplify(self, indices: Sequence[int], phase: int = 0) -> OperatorWord:
        return self.rulebook.reduce(indices, phase)


class AlgebraicScenario(Scenario):
    """Moment relaxations over a finitely presented operator algebra."""

    context: AlgebraicContext

    def __init__(self, operator_count: int, hermitian: bool = True,
                 names: Sequence[str] | None = None):
        super().__init__(AlgebraicContext(operator_count, hermitian, names))
        self._frozen = False

    def add_rule(self, lhs: Sequence[int], rhs: Sequence[int] | None = None,
                 phase: int = 0, with_conjugate: bool = False):
        """Impose lhs = i^phase * rhs (rhs None means lhs = 0).

        Sequences use 0-based operator indices.  ``with_conjugate`` also
        imposes the adjoint relation, keeping the rule set closed under
        conjugation.  Returns the oriented rule (None if trivial).
        """
        if self._frozen:
            raise RuntimeError("rules cannot change once words were generated")
        a = tuple(lhs)
        zero = rhs is None
        b = () if zero else tuple(rhs)
        rule = orient_rule(a, b, phase, zero)
        if rule is not None:
            self.context.rulebook.add(rule)
        if with_conjugate:
            ctx = self.context
            ac = tuple(ctx.adjoint_index(i) for i in reversed(a))
            bc = tuple(ctx.adjoint_index(i) for i in reversed(b))
            crule = orient_rule(ac, bc, (-phase) % 4, zero)
            if crule is not None:
                self.context.rulebook.add(crule)
        return rule

    # -- rule builders ---------------------------------------------------
    def resolve(self, op) -> int:
        """Operator index from an index or a display name."""
        count = self.context.operator_count
        if isinstance(op, int):
            if not 0 <= op < count:
                raise IndexError(f"operator index {op} out of range")
            return op
        for i in range(count):
            if self.context.operator_name(i) == op:
                return i
        raise KeyError(f"unknown operator name {op!r}")

    def make_hermitian(self, op):
        """Identify an operator with its adjoint: x* -> x."""
        i = self.resolve(op)
        j = self.context.adjoint_index(i)
        if i == j:
            return None
        return self.add_rule((j,), (i,))

    def make_projector(self, op):
        """Make an operator idempotent: xx -> x."""
        i = self.resolve(op)
        return self.add_rule((i, i), (i,))

    def add_commutator(self, op1, op2):
        """Let two operators commute; the rule is oriented by shortlex."""
        i = self.resolve(op1)
        j = self.resolve(op2)
        if i == j:
            return None
        return self.add_rule((i, j), (j, i))

    def complete(self, max_new_rules: int = 128,
                 log: Callable[[str], None] | None = None) -> bool:
        """Knuth-Bendix completion; False if the new-rule cap was hit."""
        if self._frozen:
            raise RuntimeError("rules cannot change once words were generated")
        return self.context.rulebook.complete(max_new_rules, log)

    def rules(self) -> list:
        return list(self.context.rulebook)

    def _build_dictionary(self, level: int):
        self._frozen = True
        return super()._build_dictionary(level)

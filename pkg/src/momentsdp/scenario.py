"""Base class tying an operator context to registries and cached matrices."""

from __future__ import annotations

from .matrices import (SymbolicMatrix, anticommutator_matrix,
                       commutator_matrix, localizing_matrix, moment_matrix)
from .operators import OperatorPolynomial
from .symbols import MomentPolynomial, SymbolRegistry
from .words import Context, Dictionary


class Scenario:
    """A context plus the bookkeeping shared by every problem family.

    Dictionaries and moment matrices are cached per level.  The symbol
    registry is shared by everything the scenario builds, so the same
    moment always resolves to the same symbol id across matrices,
    objectives and constraints.
    """

    def __init__(self, context: Context):
        self.context = context
        self.registry = SymbolRegistry(context)
        self._dictionaries: dict[int, Dictionary] = {}
        self._moments: dict[int, SymbolicMatrix] = {}

    # -- operator polynomials -------------------------------------------
    def identity(self, coeff: complex = 1.0) -> OperatorPolynomial:
        return OperatorPolynomial.identity(self.context, coeff)

    def operator(self, index: int) -> OperatorPolynomial:
        if not 0 <= index < self.context.operator_count:
            raise IndexError(f"operator index {index} out of range")
        return OperatorPolynomial.monomial(self.context, (index,))

    def operators(self) -> list[OperatorPolynomial]:
        return [self.operator(i) for i in range(self.context.operator_count)]

    def monomial(self, indices, coeff: complex = 1.0) -> OperatorPolynomial:
        return OperatorPolynomial.monomial(self.context, indices, coeff)

    # -- moments --------------------------------------------------------
    def moment(self, poly: OperatorPolynomial) -> MomentPolynomial:
        """Register an operator polynomial as a linear moment expression."""
        return self.registry.register_polynomial(poly)

    # -- matrices -------------------------------------------------------
    def dictionary(self, level: int) -> Dictionary:
        if level not in self._dictionaries:
            self._dictionaries[level] = self._build_dictionary(level)
        return self._dictionaries[level]

    def _build_dictionary(self, level: int) -> Dictionary:
        return Dictionary(self.context, level)

    def moment_matrix(self, level: int) -> SymbolicMatrix:
        if level not in self._moments:
            self._moments[level] = moment_matrix(
                self.context, self.registry, self.dictionary(level))
        return self._moments[level]

    def localizing_matrix(self, level: int, poly: OperatorPolynomial,
                          name: str | None = None) -> SymbolicMatrix:
        return localizing_matrix(self.context, self.registry,
                                 self.dictionary(level), poly, name)

    def commutator_matrix(self, level: int, poly: OperatorPolynomial,
                          name: str = "commutator matrix") -> SymbolicMatrix:
        return commutator_matrix(self.context, self.registry,
                                 self.dictionary(level), poly, name)

    def anticommutator_matrix(self, level: int, poly: OperatorPolynomial,
                              name: str = "anticommutator matrix"
                              ) -> SymbolicMatrix:
        return anticommutator_matrix(self.context, self.registry,
                                     self.dictionary(level), poly, name)

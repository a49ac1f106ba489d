"""Bell scenarios: parties, measurements, outcomes.

Each measurement is modelled by one projector per non-final outcome (the
final outcome is the identity minus the others).  Operators of different
parties commute; within a party, projectors of the same measurement are
idempotent and mutually orthogonal, and projectors of different
measurements are free.  Canonical words are party-sorted with collapsed
blocks, which keeps prefixes of canonical words canonical.
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .operators import OperatorPolynomial
from .scenario import Scenario
from .words import Context, OperatorWord, ZERO_WORD

_PARTY_LETTERS = "abcdefgh"


class LocalityContext(Context):
    """Commuting parties of orthogonal projector families."""

    def __init__(self, outcomes: Sequence[Sequence[int]]):
        self.outcomes = [list(per_party) for per_party in outcomes]
        if not self.outcomes:
            raise ValueError("at least one party required")
        self._party: list[int] = []
        self._measurement: list[int] = []
        self._outcome: list[int] = []
        self._slots: dict[tuple[int, int, int], int] = {}
        for p, per_party in enumerate(self.outcomes):
            for m, n_out in enumerate(per_party):
                if n_out < 2:
                    raise ValueError("measurements need at least two outcomes")
                for o in range(n_out - 1):
                    self._slots[(p, m, o)] = len(self._party)
                    self._party.append(p)
                    self._measurement.append(m)
                    self._outcome.append(o)
        super().__init__(len(self._party), hermitian=True)

    @property
    def parties(self) -> int:
        return len(self.outcomes)

    def slot(self, party: int, measurement: int, outcome: int) -> int:
        """Operator index of a non-final-outcome projector."""
        return self._slots[(party, measurement, outcome)]

    def operator_name(self, index: int) -> str:
        p = self._party[index]
        letter = _PARTY_LETTERS[p] if p < len(_PARTY_LETTERS) else f"p{p}."
        if all(n == 2 for n in self.outcomes[p]):
            return f"{letter}{self._measurement[index]}"
        return f"{letter}{self._measurement[index]}.{self._outcome[index]}"

    def simplify(self, indices: Sequence[int], phase: int = 0) -> OperatorWord:
        ops = sorted(indices, key=lambda i: self._party[i])
        out: list[int] = []
        for op in ops:
            if out:
                prev = out[-1]
                if (self._party[prev] == self._party[op]
                        and self._measurement[prev] == self._measurement[op]):
                    if prev == op:
                        continue        # projector squared
                    return ZERO_WORD    # orthogonal outcomes
            out.append(op)
        return OperatorWord(tuple(out), phase & 3)


class LocalityScenario(Scenario):
    """Moment relaxations of correlation problems between parties.

    ``outcomes[party][measurement]`` gives the outcome count of each
    measurement.
    """

    context: LocalityContext

    def __init__(self, outcomes: Sequence[Sequence[int]]):
        super().__init__(LocalityContext(outcomes))

    @classmethod
    def uniform(cls, parties: int, measurements: int,
                outcomes: int = 2) -> "LocalityScenario":
        return cls([[outcomes] * measurements] * parties)

    # -- building blocks ------------------------------------------------
    def projector(self, party: int, measurement: int,
                  outcome: int) -> OperatorPolynomial:
        """Projector onto one outcome; the final outcome is implicit."""
        n = self.context.outcomes[party][measurement]
        if not 0 <= outcome < n:
            raise IndexError(f"outcome {outcome} out of range")
        if outcome < n - 1:
            return self.operator(self.context.slot(party, measurement, outcome))
        total = self.identity()
        for o in range(n - 1):
            total = total - self.operator(
                self.context.slot(party, measurement, o))
        return total

    def observable(self, party: int, measurement: int) -> OperatorPolynomial:
        """The +-1-valued observable of a binary measurement."""
        if self.context.outcomes[party][measurement] != 2:
            raise ValueError("observables require binary measurements")
        return (self.projector(party, measurement, 0)
                - self.projector(party, measurement, 1))

    def probability(self, measurements: Sequence[int], outcomes: Sequence[int],
                    parties: Sequence[int] | None = None) -> OperatorPolynomial:
        """Joint outcome probability as a projector product."""
        if parties is None:
            parties = range(len(measurements))
        if len(measurements) != len(outcomes):
            raise ValueError("one outcome per measurement required")
        poly = self.identity()
        for p, m, o in zip(parties, measurements, outcomes):
            poly = poly * self.projector(p, m, o)
        return poly

    # -- tensor contractions --------------------------------------------
    def full_correlator(self, tensor) -> OperatorPolynomial:
        """Contract a correlator coefficient tensor into a polynomial.

        Axis ``p`` has length ``measurements_p + 1``; index 0 stands for
        the identity and index k for the k-th binary observable.
        """
        for p, per_party in enumerate(self.context.outcomes):
            if any(n != 2 for n in per_party):
                raise ValueError("full correlator form needs binary outcomes")
        basis = [[self.identity()]
                 + [self.observable(p, m)
                    for m in range(len(self.context.outcomes[p]))]
                 for p in range(self.context.parties)]
        return self._contract(tensor, basis)

    def collins_gisin(self, tensor) -> OperatorPolynomial:
        """Contract a Collins-Gisin coefficient tensor into a polynomial.

        Axis ``p`` runs over the identity followed by each measurement's
        non-final-outcome projectors, measurement-major.
        """
        basis = []
        for p, per_party in enumerate(self.context.outcomes):
            row = [self.identity()]
            for m, n_out in enumerate(per_party):
                for o in range(n_out - 1):
                    row.append(self.projector(p, m, o))
            basis.append(row)
        return self._contract(tensor, basis)

    def _contract(self, tensor, basis: list[list[OperatorPolynomial]]
                  ) -> OperatorPolynomial:
        arr = np.asarray(tensor, dtype=complex)
        shape = tuple(len(row) for row in basis)
        if arr.shape != shape:
            raise ValueError(f"tensor shape {arr.shape}, expected {shape}")
        total = self.identity(0.0)
        for idx in itertools.product(*(range(s) for s in shape)):
            c = arr[idx]
            if c == 0:
                continue
            term = self.identity(c)
            for p, k in enumerate(idx):
                if k:
                    term = term * basis[p][k]
            total = total + term
        return total

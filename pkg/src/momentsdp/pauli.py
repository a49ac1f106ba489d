"""Spin-1/2 qubit algebras on chains and lattices.

Each qubit carries three operators X, Y, Z (operator id 3*qubit + axis).
Same-qubit products fuse like Pauli matrices with phase accumulation;
operators on different qubits commute, so a canonical word is qubit
sorted with at most one operator per qubit.  Chains and lattices add
nearest-neighbour dictionary filters and, optionally, translational
symmetrization of moments.
"""

from __future__ import annotations

from typing import Sequence

from .matrices import (SymbolicMatrix, anticommutator_matrix,
                       commutator_matrix, localizing_matrix, moment_matrix)
from .moment_rules import MomentRulebook
from .operators import OperatorPolynomial
from .scenario import Scenario
from .words import Context, Dictionary, OperatorWord, shortlex_key

_AXIS_NAMES = "XYZ"


class PauliContext(Context):
    """3N Hermitian operators fusing like Pauli matrices per qubit."""

    def __init__(self, qubits: int, rows: int | None = None,
                 wrap: bool = False, symmetrized: bool = False):
        if qubits < 1:
            raise ValueError("at least one qubit required")
        if rows is not None and qubits % rows:
            raise ValueError("lattice size must be rows * columns")
        super().__init__(3 * qubits, hermitian=True)
        self.qubits = qubits
        self.rows = rows            # None for chains
        self.wrap = wrap
        self.symmetrized = symmetrized

    @property
    def is_lattice(self) -> bool:
        return self.rows is not None

    @property
    def columns(self) -> int:
        return self.qubits // self.rows if self.rows else 1

    def operator_name(self, index: int) -> str:
        qubit, axis = divmod(index, 3)
        return f"{_AXIS_NAMES[axis]}{qubit + 1}"

    def simplify(self, indices: Sequence[int], phase: int = 0) -> OperatorWord:
        ops = sorted(indices, key=lambda i: i // 3)
        out: list[int] = []
        ph = phase
        for op in ops:
            if out and out[-1] // 3 == op // 3:
                prev = out.pop()
                a, b = prev % 3, op % 3
                if a == b:
                    continue                    # sigma squared is identity
                ph = (ph + (1 if (b - a) % 3 == 1 else 3)) & 3
                out.append((op // 3) * 3 + (3 - a - b))
            else:
                out.append(op)
        return OperatorWord(tuple(out), ph & 3)

    # -- translations ---------------------------------------------------
    def _shift_qubit(self, qubit: int, shift: tuple[int, ...]) -> int | None:
        """Translated qubit index, or None when it leaves the system."""
        if not self.is_lattice:
            q = qubit + shift[0]
            if self.wrap:
                return q % self.qubits
            return q if 0 <= q < self.qubits else None
        r, c = qubit % self.rows, qubit // self.rows
        r += shift[0]
        c += shift[1]
        if self.wrap:
            r %= self.rows
            c %= self.columns
        elif not (0 <= r < self.rows and 0 <= c < self.columns):
            return None
        return c * self.rows + r

    def translations(self):
        """All translation vectors of the topology (identity included)."""
        if not self.is_lattice:
            return [(k,) for k in range(self.qubits)] if self.wrap \
                else [(k,) for k in range(-self.qubits + 1, self.qubits)]
        rr = range(self.rows) if self.wrap else range(-self.rows + 1, self.rows)
        cc = range(self.columns) if self.wrap \
            else range(-self.columns + 1, self.columns)
        return [(dr, dc) for dr in rr for dc in cc]

    def translate_word(self, seq: tuple[int, ...],
                       shift: tuple[int, ...]) -> tuple[int, ...] | None:
        """Shifted index sequence (qubit-sorted), or None if out of range."""
        moved = []
        for op in seq:
            q = self._shift_qubit(op // 3, shift)
            if q is None:
                return None
            moved.append(3 * q + op % 3)
        moved.sort()
        return tuple(moved)

    def canonical_moment_word(self, word: OperatorWord) -> OperatorWord:
        if not self.symmetrized or word.is_zero or not word.indices:
            return word
        best = word.indices
        for shift in self.translations():
            cand = self.translate_word(word.indices, shift)
            if cand is not None and shortlex_key(cand) < shortlex_key(best):
                best = cand
        return OperatorWord(best, word.phase)

    # -- neighbour filter -----------------------------------------------
    def neighbour_admit(self, m: int):
        """Admission test: successive qubit gaps at most m."""
        if m < 1:
            raise ValueError("neighbour parameter must be at least 1")
        if self.is_lattice and m != 1:
            raise ValueError("lattices support m = 1 only")

        def chain_gap_ok(q1: int, q2: int) -> bool:
            d = q2 - q1
            if self.wrap:
                d = min(d, self.qubits - d)
            return d <= m

        def lattice_adjacent(q1: int, q2: int) -> bool:
            r1, c1 = q1 % self.rows, q1 // self.rows
            r2, c2 = q2 % self.rows, q2 // self.rows
            dr, dc = abs(r1 - r2), abs(c1 - c2)
            if self.wrap:
                dr = min(dr, self.rows - dr)
                dc = min(dc, self.columns - dc)
            return (dr, dc) in ((0, 1), (1, 0))

        ok = lattice_adjacent if self.is_lattice else chain_gap_ok

        def admit(indices: tuple[int, ...]) -> bool:
            qubits = [i // 3 for i in indices]
            return all(ok(q1, q2) for q1, q2 in zip(qubits, qubits[1:]))

        return admit


class PauliScenario(Scenario):
    """Moment relaxations over spin-1/2 systems.

    ``lattice=(rows, cols)`` selects the two-dimensional topology;
    otherwise ``qubits`` forms a chain (an unstructured system is the
    same thing with no neighbour filter in use).
    """

    context: PauliContext

    def __init__(self, qubits: int | None = None,
                 lattice: tuple[int, int] | None = None,
                 wrap: bool = False, symmetrized: bool = False):
        if lattice is not None:
            rows, cols = lattice
            context = PauliContext(rows * cols, rows, wrap, symmetrized)
        elif qubits is not None:
            context = PauliContext(qubits, None, wrap, symmetrized)
        else:
            raise ValueError("qubit count or lattice shape required")
        super().__init__(context)
        self._filtered: dict[tuple[int, int], Dictionary] = {}

    @property
    def qubits(self) -> int:
        return self.context.qubits

    def pauli(self, axis: int, qubit: int) -> OperatorPolynomial:
        return self.operator(3 * qubit + axis)

    def x(self, qubit: int) -> OperatorPolynomial:
        return self.pauli(0, qubit)

    def y(self, qubit: int) -> OperatorPolynomial:
        return self.pauli(1, qubit)

    def z(self, qubit: int) -> OperatorPolynomial:
        return self.pauli(2, qubit)

    def neighbour_dictionary(self, level: int, m: int) -> Dictionary:
        key = (level, m)
        if key not in self._filtered:
            self._filtered[key] = Dictionary(
                self.context, level, self.context.neighbour_admit(m))
        return self._filtered[key]

    def symmetrize(self, poly: OperatorPolynomial) -> OperatorPolynomial:
        """Average an operator polynomial over the translation group.

        On wrapped topologies every term is averaged over all |T| shifts;
        without wrapping each term is averaged over the shifts that keep
        it inside the system.
        """
        ctx = self.context
        if not ctx.symmetrized:
            raise ValueError("scenario was not built with symmetrization")
        shifts = ctx.translations()
        total = self.identity(0.0)
        for seq, coeff in poly.terms.items():
            if not seq:
                total = total + self.identity(coeff)
                continue
            images = [s for s in (ctx.translate_word(seq, sh) for sh in shifts)
                      if s is not None]
            share = coeff / len(images)
            for s in images:
                total = total + OperatorPolynomial.monomial(ctx, s, share)
        return total


def heisenberg_hamiltonian(scenario: PauliScenario, coupling,
                           field: float = 0.0) -> OperatorPolynomial:
    """Nearest-neighbour XYZ chain Hamiltonian with a Z field.

    ``coupling`` is one number (isotropic) or a triple (jX, jY, jZ);
    edges follow the chain ordering and close up when the topology wraps.
    """
    if scenario.context.is_lattice:
        raise ValueError("chain Hamiltonian needs a chain topology")
    j = ((coupling,) * 3 if isinstance(coupling, (int, float))
         else tuple(coupling))
    if len(j) != 3:
        raise ValueError("coupling must be one number or three")
    n = scenario.qubits
    edges = [(q, q + 1) for q in range(n - 1)]
    if scenario.context.wrap and n > 2:
        edges.append((n - 1, 0))
    total = scenario.identity(0.0)
    for q1, q2 in edges:
        for axis, ja in enumerate(j):
            if ja:
                total = total + ja * (scenario.pauli(axis, q1)
                                      * scenario.pauli(axis, q2))
    if field:
        for q in range(n):
            total = total + field * scenario.z(q)
    return total


def energy_bound_problem(scenario: Scenario,
                         hamiltonian: OperatorPolynomial, level: int,
                         neighbours: int | None = None,
                         optimality: bool = True):
    """Relaxation whose optimum brackets an extremal eigenstate energy.

    Returns (objective, matrices): minimizing the objective over the PSD
    matrices lower-bounds the ground energy.  With ``optimality`` the
    moments are reduced by the eigenstate rules <[w, H]> = 0 and a second
    matrix <conj(w_i) (H - <H>) w_j> (first row and column dropped, they
    vanish identically) is added; maximizing then gives an upper bound on
    the ground energy.
    """
    ctx = scenario.context
    reg = scenario.registry
    if neighbours is not None:
        dictionary = scenario.neighbour_dictionary(level, neighbours)
    else:
        dictionary = scenario.dictionary(level)
    moments = moment_matrix(ctx, reg, dictionary)
    objective = reg.register_polynomial(hamiltonian)
    if not optimality:
        return objective, [moments]
    commutators = commutator_matrix(ctx, reg, dictionary, hamiltonian)
    loc = localizing_matrix(ctx, reg, dictionary, hamiltonian,
                            "energy localizing")
    anti = anticommutator_matrix(ctx, reg, dictionary, hamiltonian)
    d = moments.dimension
    gamma = SymbolicMatrix(
        reg, [[loc[i, j] + anti[i, j].scaled(-0.5) for j in range(d)]
              for i in range(d)],
        moments.row_labels, moments.col_labels, "optimality gap matrix")
    book = MomentRulebook(reg)
    seen: dict[tuple, "object"] = {}
    for row in commutators.entries:
        for p in row:
            if p.is_zero():
                continue
            key = tuple((t.symbol, t.conjugated,
                         round(complex(t.coeff).real, 9),
                         round(complex(t.coeff).imag, 9)) for t in p.terms)
            seen.setdefault(key, p)
    book.complete(seen.values())
    moments = book.reduce_matrix(moments)
    gamma = book.reduce_matrix(gamma)
    if any(not gamma[0, k].is_zero() for k in range(d)):
        raise AssertionError("identity row of the optimality matrix should "
                             "vanish under the eigenstate rules")
    gamma = gamma.trim(range(1, d))
    objective = book.reduce_polynomial(objective)
    return objective, [moments, gamma]

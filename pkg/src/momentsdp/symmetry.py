"""Symmetry reduction of moment problems (Ioannou-Rosset style).

A finite group acts on the operator row vector (1, x_1, ..., x_N) from
the right; each generator is a square matrix of size 1+N whose column j
expresses the image of the j-th basis element over the original basis.
The pipeline: Dimino generation of the group, lifting of each element to
the word basis of length <= W, group averaging, and a rank-revealing LU
factorization of the averaged moment map.  The factorization's U rows
define the reduced moments and L maps every original moment onto them.

The elimination below keeps rows and columns in place (pivots are
recorded rather than swapped), which reproduces the textbook staircase
presentation: permutations come out as the identity whenever the pivot
sequence is monotone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .matrices import SymbolicMatrix
from .operators import OperatorPolynomial
from .symbols import (IDENTITY_SYMBOL, MomentMonomial, MomentPolynomial,
                      SymbolRegistry)
from .words import OperatorWord

GROUP_CAP = 1_000_000


def _mat_key(M: np.ndarray) -> bytes:
    return np.round(M, 9).tobytes()


def dimino_generate(generators: Sequence[np.ndarray],
                    cap: int = GROUP_CAP) -> list[np.ndarray]:
    """All elements of the group generated by the given matrices."""
    gens = [np.asarray(g, dtype=float) for g in generators]
    if not gens:
        raise ValueError("at least one generator required")
    n = gens[0].shape[0]
    for g in gens:
        if g.ndim != 2 or g.shape != (n, n):
            raise ValueError("generators must be square matrices of equal size")
    ident = np.eye(n)
    elems: list[np.ndarray] = [ident]
    seen = {_mat_key(ident): 0}

    def add(M: np.ndarray) -> bool:
        k = _mat_key(M)
        if k in seen:
            return False
        if len(elems) >= cap:
            raise ValueError(f"group size exceeds the cap of {cap} elements")
        seen[k] = len(elems)
        elems.append(M)
        return True

    # cyclic group of the first generator
    h = gens[0]
    while add(h):
        h = h @ gens[0]

    for i in range(1, len(gens)):
        gi = gens[i]
        if _mat_key(gi) in seen:
            continue
        prev_order = len(elems)
        add(gi)
        for e in elems[1:prev_order]:
            add(e @ gi)
        rep_pos = prev_order
        while rep_pos < len(elems):
            rep = elems[rep_pos]
            for s in gens[:i + 1]:
                t = rep @ s
                if _mat_key(t) not in seen:
                    add(t)
                    for e in elems[1:prev_order]:
                        add(e @ t)
            rep_pos += prev_order
    return elems


@dataclass
class SymmetryGroup:
    """Generators plus the fully generated element list."""

    generators: list[np.ndarray]
    elements: list[np.ndarray]
    word_length: int

    @classmethod
    def generate(cls, generators: Sequence[np.ndarray], word_length: int,
                 cap: int = GROUP_CAP) -> "SymmetryGroup":
        gens = [np.asarray(g, dtype=float) for g in generators]
        return cls(gens, dimino_generate(gens, cap), word_length)

    def __len__(self) -> int:
        return len(self.elements)


def lift_representation(scenario, elements: Sequence[np.ndarray],
                        word_length: int) -> list[np.ndarray]:
    """Represent each group element on the word basis of length <= W.

    Column j of the result holds the image of the j-th dictionary word,
    expanded letter by letter and simplified in-context.  An image
    producing a word outside the dictionary is an inconsistent symmetry
    for the scenario and raises.
    """
    ctx = scenario.context
    dictionary = scenario.dictionary(word_length)
    words = list(dictionary)
    index = {w.indices: i for i, w in enumerate(words)}
    dim = len(words)
    count = ctx.operator_count
    out = []
    for g in elements:
        if g.shape != (count + 1, count + 1):
            raise ValueError("generator size does not match the operator count")
        images = []
        for j in range(count):
            col = g[:, j + 1]
            p = OperatorPolynomial.identity(ctx, complex(col[0]))
            for i in range(count):
                if col[i + 1]:
                    p = p + OperatorPolynomial.monomial(ctx, (i,),
                                                        complex(col[i + 1]))
            images.append(p)
        mat = np.zeros((dim, dim), dtype=complex)
        for jcol, w in enumerate(words):
            p = OperatorPolynomial.identity(ctx, 1.0)
            for letter in w.indices:
                p = p * images[letter]
            for seq, c in p.terms.items():
                i = index.get(seq)
                if i is None:
                    raise ValueError(
                        "symmetry image leaves the span of the word basis")
                mat[i, jcol] += c
        if np.abs(mat.imag).max() < 1e-14:
            mat = mat.real
        out.append(mat)
    return out


def group_average(lifted: Sequence[np.ndarray]) -> np.ndarray:
    return sum(lifted) / len(lifted)


@dataclass
class LuFactors:
    """Stationary-form rank-revealing factorization A = lower @ upper.

    Pivot rows and columns stay at their original positions; ``pivots``
    records the elimination order.  ``row_permutation``/``col_permutation``
    are identity permutations whenever the pivot sequence is monotone (no
    physical exchange was needed), otherwise they order the pivots.
    """

    lower: np.ndarray
    upper: np.ndarray
    pivots: list[tuple[int, int]]

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def _perm(self, coord: int) -> np.ndarray:
        n = self.lower.shape[0]
        order = [p[coord] for p in self.pivots]
        rest = [i for i in range(n) if i not in set(order)]
        perm = np.zeros((n, n))
        for pos, idx in enumerate(order + rest):
            perm[idx, pos] = 1.0
        return perm

    @property
    def row_permutation(self) -> np.ndarray:
        rows = [p[0] for p in self.pivots]
        if rows == sorted(rows):
            return np.eye(self.lower.shape[0])
        return self._perm(0)

    @property
    def col_permutation(self) -> np.ndarray:
        cols = [p[1] for p in self.pivots]
        if cols == sorted(cols):
            return np.eye(self.lower.shape[0])
        return self._perm(1)


def lu_reduce(A: np.ndarray, threshold: float = 1e-10) -> LuFactors:
    """Eliminate with full pivoting, first maximal entry in row-major order.

    Entries below ``threshold`` relative to the largest pivot count as
    rank deficiency; that deficiency is exactly the variable reduction.
    """
    A = np.array(A)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("square matrix required")
    work = A.astype(complex if np.iscomplexobj(A) else float)
    lower = np.zeros_like(work)
    upper = np.zeros_like(work)
    open_rows = np.ones(n, dtype=bool)
    open_cols = np.ones(n, dtype=bool)
    pivots: list[tuple[int, int]] = []
    tol = None
    for _ in range(n):
        mag = np.abs(work)
        mag[~open_rows, :] = -1.0
        mag[:, ~open_cols] = -1.0
        flat = int(np.argmax(mag))
        r, c = divmod(flat, n)
        piv = work[r, c]
        if tol is None:
            tol = abs(piv) * threshold
        if abs(piv) <= tol or abs(piv) == 0.0:
            break
        pivots.append((r, c))
        upper[r, :] = work[r, :]
        lower[r, r] = 1.0
        open_rows[r] = False
        open_cols[c] = False
        for i in range(n):
            if open_rows[i] and work[i, c] != 0:
                m = work[i, c] / piv
                work[i, :] -= m * work[r, :]
                work[i, c] = 0.0
                lower[i, r] = m
    return LuFactors(lower, upper, pivots)


class ReductionMap:
    """Forward map onto reduced moments plus their definitions.

    ``forward`` has one row per basis word and one column per reduced
    symbol; ``definitions`` has one row per reduced symbol over the basis
    words.  The reduced registry holds <1> plus fresh labels Z1, Z2, ...
    in pivot order.
    """

    def __init__(self, scenario, factors: LuFactors, word_length: int):
        self.scenario = scenario
        self.factors = factors
        self.word_length = word_length
        self.words = list(scenario.dictionary(word_length))
        self._index = {w.indices: i for i, w in enumerate(self.words)}
        rows = [p[0] for p in factors.pivots]
        self.forward = factors.lower[:, rows]
        self.definitions = factors.upper[rows, :]
        self.registry = SymbolRegistry(None)
        self.symbols: list[int] = []
        counter = 0
        for k in range(len(rows)):
            d = self.definitions[k]
            if abs(d[0] - 1.0) < 1e-12 and np.abs(d[1:]).max(initial=0.0) < 1e-12:
                self.symbols.append(IDENTITY_SYMBOL)
                continue
            poly = self.definition_polynomial(k)
            conj = poly.conjugated()
            herm = poly == conj
            antiherm = poly == conj.scaled(-1.0)
            counter += 1
            sym = self.registry.register_label(f"Z{counter}", hermitian=herm)
            self.registry.entry(sym).antihermitian = antiherm
            self.symbols.append(sym)

    def definition_polynomial(self, k: int) -> MomentPolynomial:
        """Reduced symbol k as a combination of base-scenario moments."""
        base_reg = self.scenario.registry
        terms = []
        for i, coeff in enumerate(self.definitions[k]):
            if abs(coeff) < 1e-14:
                continue
            terms.append(base_reg.register_word(self.words[i]).scaled(coeff))
        return MomentPolynomial.build(base_reg, terms)

    def _word_row(self, word: OperatorWord) -> tuple[complex, int]:
        i = self._index.get(word.bare().indices)
        if i is None:
            raise ValueError(
                f"moment word exceeds the symmetrized length {self.word_length}")
        return word.phase_value, i

    def transform_polynomial(self, poly: MomentPolynomial) -> MomentPolynomial:
        base_reg = self.scenario.registry
        ctx = self.scenario.context
        out = []
        for t in poly.terms:
            ent = base_reg.entry(t.symbol)
            if t.symbol == IDENTITY_SYMBOL:
                word = OperatorWord()
            elif ent.word is None:
                raise ValueError(
                    "only word-backed moments can be symmetry reduced")
            else:
                word = ctx.conjugate(ent.word) if t.conjugated else ent.word
            phase, i = self._word_row(word)
            coeff = t.coeff * phase
            row = self.forward[i]
            for k in range(row.shape[0]):
                if abs(row[k]) > 1e-14:
                    out.append(MomentMonomial(self.symbols[k], False,
                                              coeff * row[k]))
        return MomentPolynomial.build(self.registry, out)

    def transform_matrix(self, matrix: SymbolicMatrix) -> SymbolicMatrix:
        entries = [[self.transform_polynomial(p) for p in row]
                   for row in matrix.entries]
        name = f"reduced {matrix.name}" if matrix.name else "matrix"
        return SymbolicMatrix(self.registry, entries, matrix.row_labels,
                              matrix.col_labels, name)

    def transform(self, obj):
        if isinstance(obj, SymbolicMatrix):
            return self.transform_matrix(obj)
        if isinstance(obj, MomentPolynomial):
            return self.transform_polynomial(obj)
        if isinstance(obj, OperatorPolynomial):
            return self.transform_polynomial(
                self.scenario.registry.register_polynomial(obj))
        raise TypeError(f"cannot transform {type(obj).__name__}")


class SymmetrizedScenario:
    """A scenario transformed onto symmetry-reduced moments.

    ``level`` fixes the deepest moment matrix to be reduced; words up to
    twice that length are registered in the base scenario.
    """

    def __init__(self, base, generators: Sequence[np.ndarray],
                 level: int | None = None, word_length: int | None = None,
                 cap: int = GROUP_CAP):
        if word_length is None:
            if level is None:
                raise ValueError("give either level or word_length")
            word_length = 2 * level
        self.base = base
        self.group = SymmetryGroup.generate(generators, word_length, cap)
        self.lifted = lift_representation(base, self.group.elements,
                                          word_length)
        self.average = group_average(self.lifted)
        # the moment map acts on moment column vectors with the transpose
        self.factors = lu_reduce(np.asarray(self.average).T)
        self.reduction = ReductionMap(base, self.factors, word_length)

    @property
    def registry(self) -> SymbolRegistry:
        return self.reduction.registry

    def transform(self, obj):
        return self.reduction.transform(obj)

    def moment_matrix(self, level: int) -> SymbolicMatrix:
        if 2 * level > self.reduction.word_length:
            raise ValueError("moment matrix level exceeds the registered "
                             "word length")
        return self.reduction.transform_matrix(self.base.moment_matrix(level))

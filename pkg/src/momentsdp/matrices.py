"""Symbolic operator matrices: moment, localizing, commutator, extended.

A symbolic matrix holds one moment polynomial per entry, all sharing a
symbol registry.  Decomposition splits a matrix over the real/imaginary
basis slots of its registry: M = sum_s a_s A_s + sum_s b_s B_s with every
A_s, B_s Hermitian, a_s = Re<s>, b_s = Im<s>.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .operators import OperatorPolynomial
from .symbols import (IDENTITY_SYMBOL, MomentMonomial, MomentPolynomial,
                      SlotLayout, SymbolRegistry)
from .words import Context, Dictionary, OperatorWord


class SymbolicMatrix:
    """Square matrix of moment polynomials."""

    def __init__(self, registry: SymbolRegistry,
                 entries: list[list[MomentPolynomial]],
                 row_labels: Sequence[str] | None = None,
                 col_labels: Sequence[str] | None = None,
                 name: str = "matrix"):
        self.registry = registry
        self.entries = entries
        self.row_labels = list(row_labels) if row_labels else None
        self.col_labels = list(col_labels) if col_labels else None
        self.name = name

    @property
    def dimension(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij: tuple[int, int]) -> MomentPolynomial:
        i, j = ij
        return self.entries[i][j]

    def is_hermitian(self) -> bool:
        d = self.dimension
        for i in range(d):
            for j in range(i, d):
                if self.entries[j][i] != self.entries[i][j].conjugated():
                    return False
        return True

    def map_entries(self, fn: Callable[[MomentPolynomial], MomentPolynomial],
                    name: str | None = None) -> "SymbolicMatrix":
        out = [[fn(p) for p in row] for row in self.entries]
        return SymbolicMatrix(self.registry, out, self.row_labels,
                              self.col_labels, name or self.name)

    def trim(self, keep: Sequence[int], name: str | None = None) -> "SymbolicMatrix":
        """Submatrix on the given row/column indices."""
        keep = list(keep)
        out = [[self.entries[i][j] for j in keep] for i in keep]
        rl = [self.row_labels[i] for i in keep] if self.row_labels else None
        cl = [self.col_labels[j] for j in keep] if self.col_labels else None
        return SymbolicMatrix(self.registry, out, rl, cl, name or self.name)

    def symbols(self) -> set[int]:
        seen: set[int] = set()
        for row in self.entries:
            for p in row:
                seen |= p.symbols()
        return seen

    def decompose(self) -> "BasisDecomposition":
        d = self.dimension
        reals: dict[int, np.ndarray] = {}
        imags: dict[int, np.ndarray] = {}
        reg = self.registry
        for i in range(d):
            for j in range(d):
                for t in self.entries[i][j].terms:
                    sym = reg.slot_symbol(t.symbol)
                    ent = reg.entry(sym)
                    c = complex(t.coeff)
                    if ent.has_real_part:
                        a = reals.setdefault(
                            sym, np.zeros((d, d), dtype=complex))
                        a[i, j] += c
                    if ent.has_imag_part:
                        b = imags.setdefault(
                            sym, np.zeros((d, d), dtype=complex))
                        b[i, j] += -1j * c if t.conjugated else 1j * c
        return BasisDecomposition(self, reals, imags)

    def evaluate(self, values: dict[int, complex]) -> np.ndarray:
        d = self.dimension
        out = np.zeros((d, d), dtype=complex)
        for i in range(d):
            for j in range(d):
                out[i, j] = self.entries[i][j].evaluate(values)
        return out

    def render(self) -> str:
        rows = []
        for row in self.entries:
            rows.append("[" + ", ".join(str(p) for p in row) + "]")
        return "\n".join(rows)


@dataclass
class BasisDecomposition:
    """M = sum_s Re<s> * real_parts[s] + sum_s Im<s> * imag_parts[s]."""

    matrix: SymbolicMatrix
    real_parts: dict[int, np.ndarray]
    imag_parts: dict[int, np.ndarray]

    def reconstruct(self, values: dict[int, complex]) -> np.ndarray:
        d = self.matrix.dimension
        out = np.zeros((d, d), dtype=complex)
        for s, mat in self.real_parts.items():
            out += complex(values.get(s, 0.0)).real * mat
        for s, mat in self.imag_parts.items():
            out += complex(values.get(s, 0.0)).imag * mat
        return out

    def slot_matrices(self, layout: SlotLayout) -> list[np.ndarray]:
        """Basis matrices aligned with the layout's slot numbering."""
        d = self.matrix.dimension
        zero = np.zeros((d, d), dtype=complex)
        out = []
        for s in layout.real_symbols:
            out.append(self.real_parts.get(s, zero))
        for s in layout.imag_symbols:
            out.append(self.imag_parts.get(s, zero))
        return out


# -- builders -----------------------------------------------------------

def moment_matrix(context: Context, registry: SymbolRegistry,
                  dictionary: Dictionary, name: str | None = None) -> SymbolicMatrix:
    """M[i, j] = < conj(w_i) w_j > over the dictionary words."""
    rows = dictionary.conjugate_words()
    cols = dictionary.words
    entries = []
    for wi in rows:
        line = []
        for wj in cols:
            mono = registry.register_word(context.multiply(wi, wj))
            line.append(MomentPolynomial.build(registry, [mono]))
        entries.append(line)
    labels_r = [context.word_name(w) for w in rows]
    labels_c = [context.word_name(w) for w in cols]
    return SymbolicMatrix(registry, entries, labels_r, labels_c,
                          name or f"moment matrix level {dictionary.level}")


def localizing_matrix(context: Context, registry: SymbolRegistry,
                      dictionary: Dictionary, poly: OperatorPolynomial,
                      name: str | None = None) -> SymbolicMatrix:
    """L[i, j] = < conj(w_i) v w_j > extended linearly over v's terms."""
    rows = dictionary.conjugate_words()
    cols = dictionary.words
    mid = [(OperatorWord(seq), c) for seq, c in poly.terms.items()]
    entries = []
    for wi in rows:
        line = []
        for wj in cols:
            terms = []
            for u, c in mid:
                prod = context.multiply(context.multiply(wi, u), wj)
                terms.append(registry.register_word(prod).scaled(c))
            line.append(MomentPolynomial.build(registry, terms))
        entries.append(line)
    labels_r = [context.word_name(w) for w in rows]
    labels_c = [context.word_name(w) for w in cols]
    return SymbolicMatrix(registry, entries, labels_r, labels_c,
                          name or f"localizing matrix level {dictionary.level}")


def _bracket_matrix(context: Context, registry: SymbolRegistry,
                    dictionary: Dictionary, poly: OperatorPolynomial,
                    sign: float, name: str) -> SymbolicMatrix:
    rows = dictionary.conjugate_words()
    cols = dictionary.words
    mid = [(OperatorWord(seq), c) for seq, c in poly.terms.items()]
    entries = []
    for wi in rows:
        line = []
        for wj in cols:
            base = context.multiply(wi, wj)
            terms = []
            for u, c in mid:
                left = context.multiply(base, u)
                right = context.multiply(u, base)
                terms.append(registry.register_word(left).scaled(c))
                terms.append(registry.register_word(right).scaled(sign * c))
            line.append(MomentPolynomial.build(registry, terms))
        entries.append(line)
    labels_r = [context.word_name(w) for w in rows]
    labels_c = [context.word_name(w) for w in cols]
    return SymbolicMatrix(registry, entries, labels_r, labels_c, name)


def commutator_matrix(context: Context, registry: SymbolRegistry,
                      dictionary: Dictionary, poly: OperatorPolynomial,
                      name: str = "commutator matrix") -> SymbolicMatrix:
    """Entries < [conj(w_i) w_j, K] >."""
    return _bracket_matrix(context, registry, dictionary, poly, -1.0, name)


def anticommutator_matrix(context: Context, registry: SymbolRegistry,
                          dictionary: Dictionary, poly: OperatorPolynomial,
                          name: str = "anticommutator matrix") -> SymbolicMatrix:
    """Entries < {conj(w_i) w_j, K} >."""
    return _bracket_matrix(context, registry, dictionary, poly, 1.0, name)


def matrix_sum(a: SymbolicMatrix, b: SymbolicMatrix,
               name: str = "sum") -> SymbolicMatrix:
    if a.dimension != b.dimension:
        raise ValueError("matrix dimensions differ")
    entries = [[a.entries[i][j] + b.entries[i][j]
                for j in range(a.dimension)] for i in range(a.dimension)]
    return SymbolicMatrix(a.registry, entries, a.row_labels, a.col_labels, name)


def extended_matrix(context: Context, registry: SymbolRegistry,
                    dictionary: Dictionary, extension_symbols: Sequence[int],
                    name: str | None = None) -> SymbolicMatrix:
    """Moment matrix bordered by scalar-moment extension rows/columns.

    Border entries are composite symbols: row e, column w carries the
    product moment <e><w>.  A product whose factorization was declared on
    an existing symbol resolves to that symbol's basis slots.  Only plain
    monomial entries (real scenarios) are supported.
    """
    base = moment_matrix(context, registry, dictionary)
    word_syms = []
    for w in dictionary.words:
        mono = registry.register_word(w)
        if mono.conjugated or abs(mono.coeff - 1) > 1e-12:
            raise ValueError("extension requires plain real moment entries")
        word_syms.append(mono.symbol)
    exts = list(extension_symbols)
    d = base.dimension
    n = d + len(exts)
    entries = [[None] * n for _ in range(n)]
    for i in range(d):
        for j in range(d):
            entries[i][j] = base.entries[i][j]
    for k, e in enumerate(exts):
        for j in range(d):
            comp = registry.register_composite([e, word_syms[j]])
            poly = MomentPolynomial.build(registry, [MomentMonomial(comp)])
            entries[d + k][j] = poly
            entries[j][d + k] = poly
        for l, f in enumerate(exts):
            comp = registry.register_composite([e, f])
            entries[d + k][d + l] = MomentPolynomial.build(
                registry, [MomentMonomial(comp)])
    labels = (base.row_labels or []) + \
        [registry.symbol_name(e) for e in exts]
    return SymbolicMatrix(registry, entries, labels, labels,
                          name or "extended moment matrix")

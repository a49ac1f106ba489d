"""Linear combinations of operator words.

Operator polynomials live above a context: every term is a canonical word
with a complex coefficient.  Products act on operators (words multiply and
re-simplify); they are turned into moment polynomials only when registered
with a symbol registry.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .words import Context, IDENTITY_WORD, OperatorWord, shortlex_key

_TOL = 1e-12


class OperatorPolynomial:
    """Sum of canonical operator words with complex coefficients."""

    __slots__ = ("context", "terms")

    def __init__(self, context: Context,
                 terms: Mapping[tuple[int, ...], complex] | None = None):
        self.context = context
        self.terms: dict[tuple[int, ...], complex] = dict(terms or {})

    # -- constructors ---------------------------------------------------
    @classmethod
    def from_word(cls, context: Context, word: OperatorWord,
                  coeff: complex = 1.0) -> "OperatorPolynomial":
        p = cls(context)
        p._accumulate(word, coeff)
        return p

    @classmethod
    def monomial(cls, context: Context, indices: Sequence[int],
                 coeff: complex = 1.0) -> "OperatorPolynomial":
        return cls.from_word(context, context.word(indices), coeff)

    @classmethod
    def identity(cls, context: Context, coeff: complex = 1.0) -> "OperatorPolynomial":
        return cls.from_word(context, IDENTITY_WORD, coeff)

    def _accumulate(self, word: OperatorWord, coeff: complex) -> None:
        if word.is_zero:
            return
        value = coeff * word.phase_value
        key = word.indices
        new = self.terms.get(key, 0.0) + value
        if abs(new) <= _TOL:
            self.terms.pop(key, None)
        else:
            self.terms[key] = new

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other) -> "OperatorPolynomial | None":
        if isinstance(other, OperatorPolynomial):
            return other
        if isinstance(other, OperatorWord):
            return OperatorPolynomial.from_word(self.context, other)
        if isinstance(other, (int, float, complex)):
            return OperatorPolynomial.identity(self.context, other)
        return None

    def __add__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        out = OperatorPolynomial(self.context, self.terms)
        for key, c in rhs.terms.items():
            out._accumulate(OperatorWord(key), c)
        return out

    __radd__ = __add__

    def __neg__(self):
        return OperatorPolynomial(self.context,
                                  {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return rhs + (-self)

    def __mul__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        ctx = self.context
        out = OperatorPolynomial(ctx)
        for ka, ca in self.terms.items():
            for kb, cb in rhs.terms.items():
                word = ctx.simplify(ka + kb)
                out._accumulate(word, ca * cb)
        return out

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return OperatorPolynomial(
                self.context, {k: other * c for k, c in self.terms.items()})
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return rhs * self

    def conjugate(self) -> "OperatorPolynomial":
        ctx = self.context
        out = OperatorPolynomial(ctx)
        for key, c in self.terms.items():
            out._accumulate(ctx.conjugate(OperatorWord(key)),
                            complex(c).conjugate())
        return out

    def commutator(self, other: "OperatorPolynomial") -> "OperatorPolynomial":
        return self * other - other * self

    def anticommutator(self, other: "OperatorPolynomial") -> "OperatorPolynomial":
        return self * other + other * self

    # -- inspection -----------------------------------------------------
    def sorted_terms(self) -> list[tuple[OperatorWord, complex]]:
        keys = sorted(self.terms, key=shortlex_key)
        return [(OperatorWord(k), self.terms[k]) for k in keys]

    def is_zero(self) -> bool:
        return not self.terms

    def is_hermitian(self) -> bool:
        conj = self.conjugate()
        if set(conj.terms) != set(self.terms):
            return False
        return all(abs(conj.terms[k] - self.terms[k]) <= 1e-9
                   for k in self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for word, coeff in self.sorted_terms():
            bits.append(f"{_fmt_coeff(coeff)}{self.context.word_name(word)}")
        return " + ".join(bits)


def _fmt_coeff(c: complex) -> str:
    c = complex(c)
    if abs(c.imag) <= _TOL:
        r = c.real
        if abs(r - 1) <= _TOL:
            return ""
        if abs(r + 1) <= _TOL:
            return "-"
        return f"{r:g}*"
    return f"({c:g})*"


def hermitian_part(p: OperatorPolynomial) -> OperatorPolynomial:
    return 0.5 * (p + p.conjugate())

"""Symbol registry: the shared table of moments behind all matrices.

Every distinct moment seen in any generated object maps to one symbol.  A
symbol stores the shortlex-lower member of the conjugate pair {w, w*}, its
realness class (Hermitian words give real moments, anti-Hermitian words
imaginary ones), and an optional factorization into other symbols.  Real
and imaginary basis slots are allocated per symbol; slot 1 of the real
basis is always <1>.

Moment polynomials are linear combinations of symbols (optionally
conjugated).  Their term order follows the symbol order: primary key is
the shortlex of the conjugate-pair representative, descending, with the
unconjugated member of a pair listed first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .operators import OperatorPolynomial
from .words import Context, OperatorWord, shortlex_key

ZERO_SYMBOL = 0
IDENTITY_SYMBOL = 1

_TOL = 1e-12


@dataclass
class SymbolEntry:
    """One registered moment (or product of moments)."""

    symbol: int
    word: OperatorWord | None = None
    conjugate_word: OperatorWord | None = None
    conjugate_phase: int = 0          # word^dagger = i^phase * conjugate_word
    hermitian: bool = False
    antihermitian: bool = False
    factors: tuple[int, ...] | None = None
    label: str | None = None

    @property
    def has_real_part(self) -> bool:
        return not self.antihermitian

    @property
    def has_imag_part(self) -> bool:
        return not self.hermitian


@dataclass(frozen=True)
class MomentMonomial:
    """coeff * <symbol> or coeff * <symbol>^* ."""

    symbol: int
    conjugated: bool = False
    coeff: complex = 1.0

    def scaled(self, k: complex) -> "MomentMonomial":
        return MomentMonomial(self.symbol, self.conjugated, self.coeff * k)


class SymbolRegistry:
    """Symbol table with first-encounter id assignment.

    ``context`` may be None for moment-only registries (imported symbols,
    symmetry-reduced symbols) where moments are fundamental and not backed
    by operator words.
    """

    def __init__(self, context: Context | None = None):
        self.context = context
        self.entries: list[SymbolEntry] = []
        self._by_seq: dict[tuple[int, ...], int] = {}
        self._by_factors: dict[tuple[int, ...], int] = {}
        zero = SymbolEntry(0, None, None, 0, True, False, None, "0")
        self.entries.append(zero)
        one = SymbolEntry(1, OperatorWord() if context is not None else None,
                          OperatorWord() if context is not None else None,
                          0, hermitian=True, label="1")
        self.entries.append(one)
        if context is not None:
            self._by_seq[()] = 1

    def __len__(self) -> int:
        return len(self.entries)

    def entry(self, symbol: int) -> SymbolEntry:
        return self.entries[symbol]

    # -- registration ---------------------------------------------------
    def register_word(self, word: OperatorWord) -> MomentMonomial:
        """Map a canonical word to its symbol, creating it if unseen."""
        if self.context is None:
            raise ValueError("registry has no operator context")
        if word.is_zero:
            return MomentMonomial(ZERO_SYMBOL, False, 0.0)
        folded = self.context.canonical_moment_word(word.bare())
        coeff = word.phase_value * folded.phase_value
        seq = folded.indices
        sym = self._by_seq.get(seq)
        if sym is not None:
            ent = self.entries[sym]
            if ent.word is not None and ent.word.indices == seq:
                return MomentMonomial(sym, False, coeff)
            # seq is the conjugate member: <seq> = i^{-phase} <rep>^*
            k = PHASEVAL[(-ent.conjugate_phase) % 4]
            if ent.hermitian:
                return MomentMonomial(sym, False, coeff * k)
            return MomentMonomial(sym, True, coeff * k)
        return self._create_word_entry(seq, coeff)

    def _create_word_entry(self, seq: tuple[int, ...], coeff: complex) -> MomentMonomial:
        ctx = self.context
        conj = ctx.conjugate(OperatorWord(seq))
        conj = ctx.canonical_moment_word(conj.bare()).with_phase(conj.phase)
        cseq, psi = conj.indices, conj.phase
        if shortlex_key(cseq) < shortlex_key(seq):
            rep, other = cseq, seq
            # rep^dagger: conjugating twice returns seq with the same phase
            rep_conj_phase = psi
        else:
            rep, other = seq, cseq
            rep_conj_phase = psi
        sym = len(self.entries)
        hermit = rep == other and psi % 4 == 0
        antiherm = rep == other and psi % 4 == 2
        ent = SymbolEntry(sym, OperatorWord(rep), OperatorWord(other),
                          rep_conj_phase, hermit, antiherm)
        self.entries.append(ent)
        self._by_seq[rep] = sym
        if other != rep:
            self._by_seq[other] = sym
        if seq == rep:
            return MomentMonomial(sym, False, coeff)
        k = PHASEVAL[(-psi) % 4]
        if hermit:
            return MomentMonomial(sym, False, coeff * k)
        return MomentMonomial(sym, True, coeff * k)

    def register_product(self, *words: OperatorWord) -> MomentMonomial:
        if self.context is None:
            raise ValueError("registry has no operator context")
        acc = OperatorWord()
        for w in words:
            acc = self.context.multiply(acc, w)
        return self.register_word(acc)

    def register_polynomial(self, poly: OperatorPolynomial) -> "MomentPolynomial":
        terms = [self.register_word(OperatorWord(seq)).scaled(c)
                 for seq, c in poly.terms.items()]
        return MomentPolynomial.build(self, terms)

    def register_composite(self, factor_syms: Sequence[int]) -> int:
        """Symbol standing for the product of the factor moments."""
        flat: list[int] = []
        for f in factor_syms:
            ent = self.entries[f]
            if ent.factors is not None:
                flat.extend(ent.factors)
            else:
                flat.append(f)
        if any(f == ZERO_SYMBOL for f in flat):
            return ZERO_SYMBOL
        flat = sorted(f for f in flat if f != IDENTITY_SYMBOL)
        if not flat:
            return IDENTITY_SYMBOL
        if len(flat) == 1:
            return flat[0]
        key = tuple(flat)
        sym = self._by_factors.get(key)
        if sym is not None:
            return sym
        sym = len(self.entries)
        hermit = all(self.entries[f].hermitian for f in key)
        ent = SymbolEntry(sym, None, None, 0, hermit, False, key)
        self.entries.append(ent)
        self._by_factors[key] = sym
        return sym

    def declare_factorization(self, symbol: int, factor_syms: Sequence[int]) -> None:
        """Record that an existing moment equals a product of others."""
        ent = self.entries[symbol]
        flat: list[int] = []
        for f in factor_syms:
            fe = self.entries[f]
            flat.extend(fe.factors if fe.factors is not None else (f,))
        key = tuple(sorted(f for f in flat if f != IDENTITY_SYMBOL))
        ent.factors = key
        owner = self._by_factors.get(key)
        if owner is None or self.entries[owner].word is None:
            # a word moment owns the slot; any pure product symbol for the
            # same factor list becomes an alias of it
            self._by_factors[key] = symbol

    def register_factor_alias(self, factor_syms: Sequence[int]) -> int:
        """Fresh symbol for a factor product already owned by a moment.

        The alias and the owning moment share one basis slot; the alias
        exists so substitution rules can address the product form itself.
        """
        key = tuple(sorted(f for f in factor_syms if f != IDENTITY_SYMBOL))
        sym = len(self.entries)
        hermit = all(self.entries[f].hermitian for f in key)
        self.entries.append(SymbolEntry(sym, None, None, 0, hermit, False, key))
        self._by_factors.setdefault(key, sym)
        return sym

    def slot_symbol(self, symbol: int) -> int:
        """The symbol whose basis slots this one addresses."""
        ent = self.entries[symbol]
        if ent.factors is not None:
            owner = self._by_factors.get(ent.factors)
            if owner is not None and owner != symbol:
                return owner
        return symbol

    def register_label(self, label: str, hermitian: bool = False,
                       symbol: int | None = None) -> int:
        """Create (or fetch) a moment-only symbol, e.g. for imports."""
        if symbol is None:
            symbol = len(self.entries)
        while len(self.entries) <= symbol:
            k = len(self.entries)
            self.entries.append(SymbolEntry(k, label=f"#{k}"))
        ent = self.entries[symbol]
        ent.label = label
        ent.hermitian = ent.hermitian or hermitian
        return symbol

    def lookup_word(self, word: OperatorWord) -> int | None:
        if self.context is None or word.is_zero:
            return None
        folded = self.context.canonical_moment_word(word.bare())
        return self._by_seq.get(folded.indices)

    # -- naming ---------------------------------------------------------
    def symbol_name(self, symbol: int, conjugated: bool = False) -> str:
        ent = self.entries[symbol]
        if symbol == ZERO_SYMBOL:
            return "0"
        if ent.factors is not None and ent.label is None:
            inner = "*".join(self.symbol_name(f) for f in ent.factors)
            return f"({inner}){'^*' if conjugated else ''}"
        if ent.label is not None and ent.word is None:
            base = ent.label if symbol != IDENTITY_SYMBOL else "1"
            return f"<{base}>{'^*' if conjugated else ''}"
        name = self.context.word_name(ent.word) if self.context else str(ent.word)
        return f"<{name}>{'^*' if conjugated else ''}"

    def table(self) -> list[dict]:
        """Symbol table dump: one row per symbol, display ids 1-based words."""
        rows = []
        for ent in self.entries:
            rows.append({
                "symbol": ent.symbol,
                "name": self.symbol_name(ent.symbol),
                "hermitian": ent.hermitian,
                "antihermitian": ent.antihermitian,
                "factors": list(ent.factors) if ent.factors else None,
            })
        return rows

    # -- basis slots ----------------------------------------------------
    def slot_layout(self, real_only: bool = False) -> "SlotLayout":
        real: list[int] = []
        imag: list[int] = []
        aliases: dict[int, int] = {}
        for ent in self.entries[1:]:
            owner = self.slot_symbol(ent.symbol)
            if owner != ent.symbol:
                aliases[ent.symbol] = owner
                continue
            if ent.has_real_part:
                real.append(ent.symbol)
            if ent.has_imag_part and not real_only:
                imag.append(ent.symbol)
        return SlotLayout(tuple(real), tuple(imag), aliases)


PHASEVAL = (1, 1j, -1, -1j)


@dataclass(frozen=True)
class SlotLayout:
    """Assignment of registered symbols to real optimization variables.

    ``aliases`` maps factor-product symbols onto the moment owning the
    same factor list; both address the owner's slots.
    """

    real_symbols: tuple[int, ...]
    imag_symbols: tuple[int, ...]
    aliases: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        real = {s: i for i, s in enumerate(self.real_symbols)}
        imag = {s: len(self.real_symbols) + i
                for i, s in enumerate(self.imag_symbols)}
        for twin, owner in self.aliases.items():
            if owner in real:
                real[twin] = real[owner]
            if owner in imag:
                imag[twin] = imag[owner]
        object.__setattr__(self, "real_index", real)
        object.__setattr__(self, "imag_index", imag)

    @property
    def count(self) -> int:
        return len(self.real_symbols) + len(self.imag_symbols)

    def moment_value(self, symbol: int, x: Sequence[float]) -> complex:
        a = x[self.real_index[symbol]] if symbol in self.real_index else 0.0
        b = x[self.imag_index[symbol]] if symbol in self.imag_index else 0.0
        return complex(a, b)


class MomentPolynomial:
    """Normalized linear combination of moments."""

    __slots__ = ("registry", "terms")

    def __init__(self, registry: SymbolRegistry,
                 terms: tuple[MomentMonomial, ...] = ()):
        self.registry = registry
        self.terms = terms

    @classmethod
    def build(cls, registry: SymbolRegistry,
              terms: Iterable[MomentMonomial]) -> "MomentPolynomial":
        merged: dict[tuple[int, bool], complex] = {}
        for t in terms:
            if t.symbol == ZERO_SYMBOL or abs(t.coeff) <= _TOL:
                continue
            key = (t.symbol, t.conjugated)
            merged[key] = merged.get(key, 0.0) + t.coeff
        out = [MomentMonomial(s, c, v) for (s, c), v in merged.items()
               if abs(v) > _TOL]
        out.sort(key=lambda t: (registry_order_key(registry, t.symbol),
                                not t.conjugated))
        out.reverse()
        return cls(registry, tuple(out))

    @classmethod
    def constant(cls, registry: SymbolRegistry, value: complex) -> "MomentPolynomial":
        return cls.build(registry, [MomentMonomial(IDENTITY_SYMBOL, False, value)])

    @classmethod
    def zero(cls, registry: SymbolRegistry) -> "MomentPolynomial":
        return cls(registry, ())

    # -- queries --------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def leading(self) -> MomentMonomial:
        return self.terms[0]

    def is_scalar(self) -> bool:
        """True if the polynomial is k*<1> (or empty)."""
        return all(t.symbol == IDENTITY_SYMBOL for t in self.terms)

    def scalar_value(self) -> complex:
        return sum((t.coeff for t in self.terms
                    if t.symbol == IDENTITY_SYMBOL), 0.0)

    def coefficient(self, symbol: int, conjugated: bool = False) -> complex:
        for t in self.terms:
            if t.symbol == symbol and t.conjugated == conjugated:
                return t.coeff
        return 0.0

    def symbols(self) -> set[int]:
        return {t.symbol for t in self.terms}

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other: "MomentPolynomial") -> "MomentPolynomial":
        return MomentPolynomial.build(self.registry, self.terms + other.terms)

    def __sub__(self, other: "MomentPolynomial") -> "MomentPolynomial":
        return self + other.scaled(-1)

    def scaled(self, k: complex) -> "MomentPolynomial":
        if abs(k) <= _TOL:
            return MomentPolynomial.zero(self.registry)
        return MomentPolynomial(self.registry,
                                tuple(t.scaled(k) for t in self.terms))

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scaled(other)
        if isinstance(other, MomentPolynomial):
            raise TypeError("moment expressions cannot be multiplied: "
                            "products need the operator algebra, which "
                            "moments do not carry")
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self.scaled(other)
        return NotImplemented

    def conjugated(self) -> "MomentPolynomial":
        reg = self.registry
        out = []
        for t in self.terms:
            ent = reg.entry(t.symbol)
            c = complex(t.coeff).conjugate()
            if t.conjugated:
                out.append(MomentMonomial(t.symbol, False, c))
            elif ent.hermitian:
                out.append(MomentMonomial(t.symbol, False, c))
            elif ent.antihermitian:
                out.append(MomentMonomial(t.symbol, False, -c))
            else:
                out.append(MomentMonomial(t.symbol, True, c))
        return MomentPolynomial.build(reg, out)

    def real_part(self) -> "MomentPolynomial":
        return (self + self.conjugated()).scaled(0.5)

    def imag_part(self) -> "MomentPolynomial":
        return (self - self.conjugated()).scaled(-0.5j)

    # -- evaluation -----------------------------------------------------
    def evaluate(self, values: Mapping[int, complex]) -> complex:
        total = 0.0 + 0.0j
        for t in self.terms:
            v = values.get(t.symbol, 0.0)
            if t.conjugated:
                v = complex(v).conjugate()
            total += t.coeff * v
        return total

    def evaluate_slots(self, layout: SlotLayout, x: Sequence[float]) -> complex:
        vals = {s: layout.moment_value(s, x)
                for s in self.symbols() if s != IDENTITY_SYMBOL}
        vals[IDENTITY_SYMBOL] = layout.moment_value(IDENTITY_SYMBOL, x) \
            if IDENTITY_SYMBOL in layout.real_index else 1.0
        return self.evaluate(vals)

    def sort_key(self) -> tuple:
        """Ascending comparison key between polynomials (leading term first)."""
        return tuple((registry_order_key(self.registry, t.symbol),
                      t.conjugated) for t in self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for t in self.terms:
            name = self.registry.symbol_name(t.symbol, t.conjugated)
            bits.append(f"{_fmt(t.coeff)}{name}")
        return " + ".join(bits)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MomentPolynomial):
            return NotImplemented
        if len(self.terms) != len(other.terms):
            return False
        return all(a.symbol == b.symbol and a.conjugated == b.conjugated
                   and abs(a.coeff - b.coeff) <= 1e-9
                   for a, b in zip(self.terms, other.terms))

    def __hash__(self):
        return hash(tuple((t.symbol, t.conjugated) for t in self.terms))


def registry_order_key(registry: SymbolRegistry, symbol: int) -> tuple:
    """Primary symbol-order key: shortlex of the pair representative."""
    ent = registry.entry(symbol)
    if symbol == ZERO_SYMBOL:
        return (-1, (), -1)
    if ent.word is not None:
        k = shortlex_key(ent.word)
        return (k[0], k[1], symbol)
    # moment-only and composite symbols order by id after any length proxy
    if ent.factors is not None:
        return (10**6, (), symbol)
    return (0, (), symbol) if symbol == IDEN_ONLY else (10**3, (), symbol)


IDEN_ONLY = IDENTITY_SYMBOL


def _fmt(c: complex) -> str:
    c = complex(c)
    if abs(c.imag) <= _TOL:
        r = c.real
        if abs(r - 1) <= _TOL:
            return ""
        if abs(r + 1) <= _TOL:
            return "-"
        return f"{r:g}*"
    if abs(c.real) <= _TOL:
        im = c.imag
        if abs(im - 1) <= _TOL:
            return "i*"
        if abs(im + 1) <= _TOL:
            return "-i*"
        return f"{im:g}i*"
    return f"({c:g})*"

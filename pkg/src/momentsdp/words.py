"""Operator words, shortlex ordering and dictionaries.

An operator word is a finite sequence of operator indices together with a
phase drawn from {1, i, -1, -i} and a flag marking the zero operator.  Words
are always kept in canonical form: the context that owns the alphabet knows
how to simplify an arbitrary index sequence to the shortlex-least equivalent
word.  Dictionaries enumerate every canonical word up to a given length and
fix the row/column ordering of moment matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

# Phases are stored as powers of i: value = i**phase with phase in 0..3.
PHASE_VALUES = (1, 1j, -1, -1j)

_UINT64_MAX = 2**64 - 1


class WordHashOverflowError(OverflowError):
    """Raised when a word's shortlex rank does not fit in 64 bits.

    Hitting this signals the depth limit of the hierarchy for the given
    alphabet (with 4 fundamental operators, some words of length 32 still
    rank below 2^64 but no word of length 33 does).
    """


@dataclass(frozen=True)
class OperatorWord:
    """A canonical product of fundamental operators times a phase.

    ``indices`` uses 0-based operator ids internally; display is 1-based.
    ``phase`` is the power of i multiplying the bare sequence.  The zero
    operator is a distinct sentinel that sorts before the empty word and
    never appears in dictionaries.
    """

    indices: tuple[int, ...] = ()
    phase: int = 0
    is_zero: bool = False

    def __post_init__(self) -> None:
        if self.is_zero and (self.indices or self.phase):
            object.__setattr__(self, "indices", ())
            object.__setattr__(self, "phase", 0)

    @property
    def is_identity(self) -> bool:
        return not self.is_zero and not self.indices

    @property
    def phase_value(self) -> complex:
        return PHASE_VALUES[self.phase & 3]

    def __len__(self) -> int:
        return len(self.indices)

    def with_phase(self, phase: int) -> "OperatorWord":
        if self.is_zero:
            return self
        return OperatorWord(self.indices, phase & 3)

    def bare(self) -> "OperatorWord":
        """The same sequence with phase +1."""
        if self.phase == 0:
            return self
        return OperatorWord(self.indices, 0, self.is_zero)

    def sort_key(self) -> tuple:
        return shortlex_key(self)

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        prefix = {0: "", 1: "i", 2: "-", 3: "-i"}[self.phase & 3]
        if not self.indices:
            return prefix + "I"
        return prefix + "X" + ".".join(str(i + 1) for i in self.indices)


ZERO_WORD = OperatorWord(is_zero=True)
IDENTITY_WORD = OperatorWord()


def shortlex_key(word: OperatorWord | Sequence[int]) -> tuple:
    """Sort key realizing shortlex order; the zero word sorts first."""
    if isinstance(word, OperatorWord):
        if word.is_zero:
            return (-1, ())
        return (len(word.indices), word.indices)
    return (len(word), tuple(word))


def shortlex_compare(a: OperatorWord | Sequence[int], b: OperatorWord | Sequence[int]) -> int:
    """-1, 0 or 1 as a sorts before, equal to, or after b."""
    ka, kb = shortlex_key(a), shortlex_key(b)
    if ka < kb:
        return -1
    if ka > kb:
        return 1
    return 0


def word_hash(word: OperatorWord | Sequence[int], operator_count: int) -> int:
    """Shortlex rank: the count of strictly shortlex-smaller sequences.

    The rank of the empty word is 0 and ranks are strictly monotone with
    shortlex order.  Raises WordHashOverflowError if the rank exceeds the
    64-bit range used for symbol lookup.
    """
    seq = word.indices if isinstance(word, OperatorWord) else tuple(word)
    n = operator_count
    if n < 1:
        if seq:
            raise ValueError("nonempty word over empty alphabet")
        return 0
    # Count of all words strictly shorter, then the lexicographic index
    # among words of the same length.
    length = len(seq)
    if n == 1:
        rank = length
    else:
        rank = (n**length - 1) // (n - 1)
        for pos, op in enumerate(seq):
            if not 0 <= op < n:
                raise ValueError(f"operator index {op} out of range")
            rank += op * n ** (length - pos - 1)
    if rank > _UINT64_MAX:
        raise WordHashOverflowError(
            f"word of length {length} over {n} operators exceeds 64-bit rank"
        )
    return rank


class Context:
    """Abstract description of an operator alphabet.

    A context fixes the number of fundamental operators, how raw index
    sequences simplify to canonical words, and how words conjugate.  All
    scenario-specific algebra lives in subclasses; everything downstream
    (dictionaries, matrices, registries) only talks to this interface.
    """

    def __init__(self, operator_count: int, hermitian: bool = True):
        self.operator_count = operator_count
        self.hermitian_alphabet = hermitian

    # -- naming ---------------------------------------------------------
    def operator_name(self, index: int) -> str:
        return f"X{index + 1}"

    def word_name(self, word: OperatorWord) -> str:
        if word.is_zero:
            return "0"
        prefix = {0: "", 1: "i", 2: "-", 3: "-i"}[word.phase & 3]
        if not word.indices:
            return prefix + "I"
        return prefix + ";".join(self.operator_name(i) for i in word.indices)

    # -- algebra --------------------------------------------------------
    def adjoint_index(self, index: int) -> int:
        """Index of the adjoint of a fundamental operator."""
        if self.hermitian_alphabet:
            return index
        raise NotImplementedError

    def simplify(self, indices: Sequence[int], phase: int = 0) -> OperatorWord:
        """Canonical form of a raw index sequence (default: free algebra)."""
        return OperatorWord(tuple(indices), phase & 3)

    def conjugate(self, word: OperatorWord) -> OperatorWord:
        """Canonical form of the Hermitian conjugate of a word."""
        if word.is_zero:
            return ZERO_WORD
        rev = tuple(self.adjoint_index(i) for i in reversed(word.indices))
        return self.simplify(rev, (-word.phase) % 4)

    def multiply(self, a: OperatorWord, b: OperatorWord) -> OperatorWord:
        if a.is_zero or b.is_zero:
            return ZERO_WORD
        return self.simplify(a.indices + b.indices, (a.phase + b.phase) % 4)

    def word(self, indices: Sequence[int]) -> OperatorWord:
        """Canonical word for a raw 0-based index sequence."""
        return self.simplify(tuple(indices))

    # -- dictionary support --------------------------------------------
    def admits(self, indices: tuple[int, ...]) -> bool:
        """Admissibility filter for dictionary membership (default: all)."""
        return True

    def is_commutative(self) -> bool:
        return False

    def canonical_moment_word(self, word: OperatorWord) -> OperatorWord:
        """Representative used when a word is registered as a moment.

        Subclasses with moment-level equivalences (translation symmetry,
        source-copy relabelling) fold the orbit here.  The default is the
        word itself.
        """
        return word


class FreeContext(Context):
    """Free algebra: no relations beyond the adjoint pairing.

    With ``hermitian=False`` every declared operator brings its adjoint as
    a separate fundamental operator; the pair is interleaved so operator
    2k is x_{k} and operator 2k+1 is its adjoint.
    """

    def __init__(self, operator_count: int, hermitian: bool = True):
        n = operator_count if hermitian else 2 * operator_count
        super().__init__(n, hermitian)

    def adjoint_index(self, index: int) -> int:
        if self.hermitian_alphabet:
            return index
        return index + 1 if index % 2 == 0 else index - 1


class Dictionary:
    """All canonical words of length at most ``level``, shortlex ordered.

    Level l words are produced by extending level l-1 words one operator
    at a time; this is exhaustive because every prefix of a canonical word
    is canonical for the supported contexts.
    """

    def __init__(self, context: Context, level: int,
                 admit: Callable[[tuple[int, ...]], bool] | None = None):
        self.context = context
        self.level = level
        self.words: list[OperatorWord] = []
        self.index: dict[tuple[int, ...], int] = {}
        self._generate(admit if admit is not None else context.admits)

    def _generate(self, admit: Callable[[tuple[int, ...]], bool]) -> None:
        ctx = self.context
        current = [IDENTITY_WORD]
        self._append(IDENTITY_WORD)
        for length in range(1, self.level + 1):
            produced: dict[tuple[int, ...], OperatorWord] = {}
            for stem in current:
                for op in range(ctx.operator_count):
                    cand = ctx.simplify(stem.indices + (op,))
                    if cand.is_zero or len(cand) != length:
                        continue
                    bare = cand.bare()
                    if bare.indices not in produced and admit(bare.indices):
                        produced[bare.indices] = bare
            current = sorted(produced.values(), key=shortlex_key)
            for w in current:
                self._append(w)

    def _append(self, word: OperatorWord) -> None:
        self.index[word.indices] = len(self.words)
        self.words.append(word)

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self) -> Iterator[OperatorWord]:
        return iter(self.words)

    def __getitem__(self, i: int) -> OperatorWord:
        return self.words[i]

    def __contains__(self, word: OperatorWord) -> bool:
        return word.indices in self.index

    def conjugate_words(self) -> list[OperatorWord]:
        """Row words of a moment matrix: each word conjugated, in order."""
        return [self.context.conjugate(w) for w in self.words]

"""Scenarios whose moments come from outside, with no operator algebra.

Matrices and polynomials are written as grids or lists of short strings:
an integer id names a moment (0 is the zero moment, 1 the unit), an
asterisk suffix conjugates, a leading minus negates, a real prefactor
goes before a hash, and a number with a decimal point is a constant.
Structure declared at import time (Hermitian or symmetric) is checked
and used to infer which moments are real.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .matrices import SymbolicMatrix
from .symbols import (IDENTITY_SYMBOL, MomentMonomial, MomentPolynomial,
                      SymbolRegistry, ZERO_SYMBOL)

MODES = ("general", "hermitian", "symmetric")


class MomentParseError(ValueError):
    """Malformed moment token, with the failing position recorded."""

    def __init__(self, text: str, position: int, reason: str):
        super().__init__(
            f"cannot parse moment token {text!r} at position {position}: "
            f"{reason}")
        self.text = text
        self.position = position


@dataclass(frozen=True)
class MomentToken:
    """One parsed moment reference: coefficient times a symbol id."""

    coefficient: float
    index: int
    conjugated: bool = False
    is_constant: bool = False

    def conjugate(self) -> "MomentToken":
        if self.is_constant:
            return self
        return MomentToken(self.coefficient, self.index, not self.conjugated)


def parse_moment_string(s: str) -> MomentToken:
    """Parse one token: '#id', 'id', 'c#id', with optional '-' and '*'."""
    if not isinstance(s, str):
        raise MomentParseError(str(s), 0, "not a string")
    text = s.strip()
    if not text:
        raise MomentParseError(s, 0, "empty token")
    pos = 0
    sign = 1.0
    if text[0] == "-":
        sign = -1.0
        pos = 1
        if len(text) == 1:
            raise MomentParseError(s, 1, "nothing after the minus sign")
    body = text[pos:]
    if "#" in body:
        prefix, _, id_part = body.partition("#")
        if prefix:
            try:
                coeff = float(prefix)
            except ValueError:
                raise MomentParseError(s, pos, "bad prefactor") from None
            if isinstance(coeff, complex):
                raise MomentParseError(s, pos, "prefactors must be real")
        else:
            coeff = 1.0
        return _symbol_token(s, sign * coeff, id_part,
                             pos + len(prefix) + 1)
    conjugated = body.endswith("*")
    core = body[:-1] if conjugated else body
    try:
        index = int(core)
    except ValueError:
        pass
    else:
        if index < 0:
            raise MomentParseError(s, pos, "negative symbol id")
        return MomentToken(sign, index, conjugated)
    if conjugated:
        raise MomentParseError(s, pos, "constants cannot be conjugated")
    try:
        value = float(body)
    except ValueError:
        raise MomentParseError(s, pos, "neither a symbol id nor a "
                               "constant") from None
    return MomentToken(sign * value, IDENTITY_SYMBOL, False, True)


def _symbol_token(s: str, coeff: float, id_part: str,
                  at: int) -> MomentToken:
    conjugated = id_part.endswith("*")
    if conjugated:
        id_part = id_part[:-1]
    try:
        index = int(id_part)
    except ValueError:
        raise MomentParseError(s, at, "symbol id must be an integer") from None
    if index < 0:
        raise MomentParseError(s, at, "negative symbol id")
    return MomentToken(coeff, index, conjugated)


def render_moment_token(t: MomentToken) -> str:
    """Canonical string for a token; parse(render(t)) == t."""
    if t.is_constant:
        return repr(float(t.coefficient))
    star = "*" if t.conjugated else ""
    if t.coefficient == 1.0:
        return f"{t.index}{star}"
    if t.coefficient == -1.0:
        return f"-{t.index}{star}"
    return f"{repr(float(t.coefficient))}#{t.index}{star}"


def parse_grid(text: str) -> list[list[str]]:
    """CSV-like grid: one row per line, comma-separated tokens."""
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        rows.append([cell.strip() for cell in line.split(",")])
    return rows


class ImportedScenario:
    """Moments as fundamental objects, declared rather than generated.

    ``real=True`` makes every imported moment real a priori.  Without it,
    realness is only what Hermitian-matrix imports manage to infer.
    Anything needing explicit operator relations (products, localizing
    matrices) is unavailable here.
    """

    def __init__(self, real: bool = False):
        self.real = real
        self.registry = SymbolRegistry(None)
        self.context = None

    def _moment(self, token: MomentToken) -> int:
        idx = token.index
        if token.is_constant or idx in (ZERO_SYMBOL, IDENTITY_SYMBOL):
            return idx if not token.is_constant else IDENTITY_SYMBOL
        return self.registry.register_label(f"w{idx}", hermitian=self.real,
                                            symbol=idx)

    def _term(self, token: MomentToken) -> MomentMonomial:
        sym = self._moment(token)
        return MomentMonomial(sym, token.conjugated, token.coefficient)

    def import_polynomial(self, strings: Sequence[str]) -> MomentPolynomial:
        tokens = [parse_moment_string(s) for s in strings]
        return MomentPolynomial.build(self.registry,
                                      [self._term(t) for t in tokens])

    def import_matrix(self, grid, mode: str = "general") -> SymbolicMatrix:
        """Square grid of tokens as a symbolic matrix.

        hermitian mode requires entry (j,i) to be the conjugate of entry
        (i,j); a moment equal to its own transpose twin is thereby real.
        symmetric mode requires literal equality and infers nothing in
        complex scenarios.
        """
        if mode not in MODES:
            raise ValueError(f"unknown import mode {mode!r}")
        if isinstance(grid, str):
            grid = parse_grid(grid)
        cells = [[parse_moment_string(s) for s in row] for row in grid]
        d = len(cells)
        if any(len(row) != d for row in cells):
            raise ValueError("imported matrix must be square")
        if mode == "hermitian":
            self._check_hermitian(cells)
        elif mode == "symmetric":
            self._check_symmetric(cells)
        entries = [[MomentPolynomial.build(self.registry, [self._term(t)])
                    for t in row] for row in cells]
        return SymbolicMatrix(self.registry, entries,
                              name=f"imported {mode} matrix"
                              if mode != "general" else "imported matrix")

    def import_hermitian_matrix(self, grid) -> SymbolicMatrix:
        return self.import_matrix(grid, "hermitian")

    def import_symmetric_matrix(self, grid) -> SymbolicMatrix:
        return self.import_matrix(grid, "symmetric")

    def _check_hermitian(self, cells: list[list[MomentToken]]) -> None:
        d = len(cells)
        for i in range(d):
            for j in range(i, d):
                t, u = cells[i][j], cells[j][i]
                if t.is_constant or u.is_constant:
                    if not (t.is_constant and u.is_constant
                            and t.coefficient == u.coefficient):
                        raise ValueError(
                            f"entries ({i},{j}) and ({j},{i}) cannot form "
                            f"a Hermitian pair")
                    continue
                if t.index != u.index or t.coefficient != u.coefficient:
                    raise ValueError(
                        f"conflicting Hermitian entries at ({i},{j}) and "
                        f"({j},{i}): different moments")
                if t.conjugated == u.conjugated:
                    # <w> equal to its transpose twin, so <w>* = <w>
                    sym = self._moment(t)
                    if sym not in (ZERO_SYMBOL, IDENTITY_SYMBOL):
                        self.registry.register_label(f"w{t.index}",
                                                     hermitian=True,
                                                     symbol=t.index)
                # a starred twin is consistent and stays complex

    def _check_symmetric(self, cells: list[list[MomentToken]]) -> None:
        d = len(cells)
        for i in range(d):
            # diagonal moments still sit at conjugate positions, so they
            # come out real; off-diagonal coincidences say nothing here
            t = cells[i][i]
            if not t.is_constant and t.index not in (ZERO_SYMBOL,
                                                     IDENTITY_SYMBOL):
                self.registry.register_label(f"w{t.index}", hermitian=True,
                                             symbol=t.index)
            for j in range(i + 1, d):
                if cells[i][j] != cells[j][i]:
                    raise ValueError(
                        f"conflicting symmetric entries at ({i},{j}) and "
                        f"({j},{i})")

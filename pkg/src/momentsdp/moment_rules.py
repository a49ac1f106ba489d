"""Moment substitution rules built from scalar equality constraints.

Each constraint polynomial (implicitly "= 0") is oriented into a rule
rewriting its leading moment in terms of lower-ordered ones.  Three rule
shapes arise:

* oriented:   <m1> -> -(1/c1) * (rest of p); the plain case.
* reoriented: when the two leading terms are a conjugate pair with
  coefficients of different modulus, p is combined with its conjugate to
  eliminate the leading term, then oriented as usual.
* partial:    conjugate-pair leading terms of equal modulus pin only one
  real axis of the moment.  With delta = (arg c1 - arg c2)/2 the rule is
  <X> -> (1/2)(<X> - e^{-2i delta}<X*>) + e^{-i delta} * kappa, where
  kappa is the symbolic real part of -e^{-i(a+b)/2} q / (2k); the
  imaginary-part constraint splits off as a new polynomial.

The completed book has a unique left-hand symbol per rule (a moment and
its conjugate count as one) and every right-hand side is a fixed point of
every other rule, so a single substitution pass reduces any polynomial.
"""

from __future__ import annotations

import bisect
import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .matrices import SymbolicMatrix
from .symbols import (IDENTITY_SYMBOL, MomentMonomial, MomentPolynomial,
                      SymbolRegistry, registry_order_key)


class InconsistencyError(ValueError):
    """A constraint set implies 1 = 0."""


@dataclass
class MomentRule:
    """lhs symbol -> rhs polynomial; partial rules keep their axis data."""

    lhs: int
    rhs: MomentPolynomial
    kind: str = "oriented"          # oriented | reoriented | partial
    delta: float | None = None
    kappa: MomentPolynomial | None = None

    def __str__(self) -> str:
        reg = self.rhs.registry
        return f"{reg.symbol_name(self.lhs)} -> {self.rhs}  [{self.kind}]"


def _partial_rhs(registry: SymbolRegistry, lhs: int, delta: float,
                 kappa: MomentPolynomial) -> MomentPolynomial:
    eshift = cmath.exp(-2j * delta)
    econst = cmath.exp(-1j * delta)
    terms = [MomentMonomial(lhs, False, 0.5),
             MomentMonomial(lhs, True, -0.5 * eshift)]
    return MomentPolynomial.build(registry, terms) + kappa.scaled(econst)


class MomentRulebook:
    """Reduced set of moment substitution rules."""

    def __init__(self, registry: SymbolRegistry, zero_tolerance: float = 1e-12):
        self.registry = registry
        self.tol = zero_tolerance
        self.rules: dict[int, MomentRule] = {}

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(sorted(self.rules.values(),
                           key=lambda r: registry_order_key(self.registry, r.lhs)))

    # -- reduction ------------------------------------------------------
    def reduce_polynomial(self, poly: MomentPolynomial) -> MomentPolynomial:
        guard = len(self.rules) + 2
        current = poly
        for _ in range(guard):
            nxt, changed = self._reduce_once(current)
            if not changed:
                return current
            current = nxt
        return current

    def _reduce_once(self, poly: MomentPolynomial):
        out: list[MomentMonomial] = []
        touched = False
        for t in poly.terms:
            rule = self.rules.get(t.symbol)
            if rule is None:
                out.append(t)
                continue
            rhs = rule.rhs if not t.conjugated else rule.rhs.conjugated()
            out.extend(rhs.scaled(t.coeff).terms)
            touched = True
        if not touched:
            return poly, False
        result = MomentPolynomial.build(self.registry, out)
        # partial rules are projectors: a projected polynomial maps to
        # itself, which counts as a fixed point
        return result, result != poly

    def reduce_matrix(self, matrix: SymbolicMatrix,
                      name: str | None = None) -> SymbolicMatrix:
        return matrix.map_entries(self.reduce_polynomial,
                                  name or f"{matrix.name} (reduced)")

    # -- completion -----------------------------------------------------
    def complete(self, polys: Iterable[MomentPolynomial]) -> "MomentRulebook":
        """Orient and mutually reduce a batch of equality constraints."""
        pending: list[MomentPolynomial] = []
        for p in polys:
            norm = MomentPolynomial.build(self.registry, p.terms)
            if not norm.is_zero():
                pending.append(norm)
        pending.sort(key=lambda q: q.sort_key())
        while pending:
            p = pending.pop(0)
            reduced = self.reduce_polynomial(p)
            if reduced.is_zero():
                continue
            if reduced.is_scalar():
                if abs(reduced.scalar_value()) > self.tol:
                    raise InconsistencyError(
                        f"constraints imply 1 = 0 (residual {reduced})")
                continue
            rule, extra = self._orient(reduced)
            for q in extra:
                qn = self.reduce_polynomial(q)
                if qn.is_zero():
                    continue
                if qn.is_scalar():
                    if abs(qn.scalar_value()) > self.tol:
                        raise InconsistencyError(
                            f"constraints imply 1 = 0 (residual {qn})")
                    continue
                bisect.insort(pending, qn, key=lambda r: r.sort_key())
            if rule is None:
                continue
            self._insert(rule)
        self._mutual_reduce()
        return self

    # -- orientation ----------------------------------------------------
    def _orient(self, p: MomentPolynomial):
        """Build a rule from a reduced, non-scalar polynomial."""
        lead = p.terms[0]
        pair = None
        if len(p.terms) > 1:
            second = p.terms[1]
            if second.symbol == lead.symbol and not lead.conjugated \
                    and second.conjugated:
                pair = second
        if pair is None:
            return self._orient_plain(p, lead), []  # no extras in this case
        c1, c2 = lead.coeff, pair.coeff
        if abs(abs(c1) - abs(c2)) > self.tol * max(abs(c1), abs(c2)):
            # combine with the conjugate to cancel the leading term
            combined = p.scaled(1.0 / c1) - \
                p.conjugated().scaled(1.0 / complex(c2).conjugate())
            combined = MomentPolynomial.build(self.registry, combined.terms)
            rule, extra = self._orient(combined)
            if rule is not None:
                rule.kind = "reoriented"
            return rule, extra
        return self._orient_partial(p, lead, pair)

    def _orient_plain(self, p: MomentPolynomial, lead: MomentMonomial):
        rest = MomentPolynomial(self.registry, p.terms[1:])
        rhs = rest.scaled(-1.0 / lead.coeff)
        if lead.conjugated:
            rhs = rhs.conjugated()
        return MomentRule(lead.symbol, rhs)

    def _orient_partial(self, p: MomentPolynomial, lead: MomentMonomial,
                        pair: MomentMonomial):
        c1, c2 = complex(lead.coeff), complex(pair.coeff)
        k = 0.5 * (abs(c1) + abs(c2))
        a, b = cmath.phase(c1), cmath.phase(c2)
        delta = _wrap_angle(0.5 * (a - b))
        q = MomentPolynomial(self.registry, p.terms[2:])
        r = q.scaled(-cmath.exp(-0.5j * (a + b)) / (2.0 * k))
        kappa = r.real_part()
        split = r.imag_part()
        rule = MomentRule(lead.symbol,
                          _partial_rhs(self.registry, lead.symbol, delta, kappa),
                          "partial", delta, kappa)
        extra = [] if split.is_zero() else [split]
        return rule, extra

    # -- insertion ------------------------------------------------------
    def insert_rule(self, rule: MomentRule) -> None:
        """Add an already-oriented rule, merging and cross-reducing."""
        self._insert(rule)

    def _insert(self, rule: MomentRule) -> None:
        existing = self.rules.get(rule.lhs)
        if existing is not None:
            rule = self._merge(existing, rule)
            if rule is None:
                return
        self.rules[rule.lhs] = rule
        for other in list(self.rules.values()):
            if other.lhs == rule.lhs:
                continue
            reduced = self._reduce_rhs_by(other.rhs, rule)
            if reduced is not None:
                self.rules[other.lhs] = MomentRule(
                    other.lhs, reduced, other.kind, other.delta, other.kappa)

    def _reduce_rhs_by(self, rhs: MomentPolynomial, rule: MomentRule):
        sub = MomentRulebook(self.registry, self.tol)
        sub.rules = {rule.lhs: rule}
        reduced = sub.reduce_polynomial(rhs)
        return None if reduced == rhs else reduced

    def _merge(self, existing: MomentRule, new: MomentRule):
        """Resolve a second rule landing on an existing left-hand symbol."""
        if existing.kind != "partial":
            raise InconsistencyError(
                f"conflicting rules for {self.registry.symbol_name(existing.lhs)}")
        if new.kind != "partial":
            return new  # full determination supersedes the axis pin
        d1, k1 = existing.delta, existing.kappa
        d2, k2 = new.delta, new.kappa
        s = math.sin(d1 - d2)
        if abs(s) <= 1e-9:
            # same axis (possibly flipped): consistent iff kappas agree
            flip = math.cos(d1 - d2)
            want = k1.scaled(1.0 if flip > 0 else -1.0)
            if want == k2:
                return None
            raise InconsistencyError(
                f"contradictory axis constraints on "
                f"{self.registry.symbol_name(existing.lhs)}")
        # two independent axes pin the full complex value:
        # x = [-i e^{-i d2} K1 + i e^{-i d1} K2] / sin(d1 - d2)
        rhs = (k1.scaled(-1j * cmath.exp(-1j * d2)) +
               k2.scaled(1j * cmath.exp(-1j * d1))).scaled(1.0 / s)
        return MomentRule(existing.lhs, rhs, "oriented")

    def _mutual_reduce(self, max_rounds: int = 64) -> None:
        """Enforce: every rhs is a fixed point of every other rule."""
        for _ in range(max_rounds):
            changed = False
            for lhs, rule in list(self.rules.items()):
                sub = MomentRulebook(self.registry, self.tol)
                sub.rules = {k: v for k, v in self.rules.items() if k != lhs}
                reduced = sub.reduce_polynomial(rule.rhs)
                if reduced != rule.rhs:
                    self.rules[lhs] = MomentRule(lhs, reduced, rule.kind,
                                                 rule.delta, rule.kappa)
                    changed = True
            if not changed:
                return
        raise InconsistencyError("rulebook failed to stabilize")


def _wrap_angle(x: float) -> float:
    """Wrap into (-pi, pi], mapping the -pi boundary to +pi."""
    y = math.fmod(x + math.pi, 2 * math.pi)
    if y <= 0:
        y += 2 * math.pi
    return y - math.pi


def complete_rulebook(registry: SymbolRegistry,
                      polys: Sequence[MomentPolynomial],
                      zero_tolerance: float = 1e-12) -> MomentRulebook:
    book = MomentRulebook(registry, zero_tolerance)
    return book.complete(polys)

"""Classical causal networks and their web inflations.

A network declares observables (discrete outcome counts, or continuous)
and sources (subsets of observables).  Inflation level N gives every
source N independent copies; an observable fed by m sources acquires N^m
variants, one per copy tuple (row-major in source-declaration order).
All operators commute.  Discrete variants behave like one-measurement
parties (idempotent, orthogonal outcomes); continuous variants are plain
Hermitian operators.

Moments are canonicalized over independent permutations of each source's
copies, and a moment whose operators split into groups sharing no
concrete source copy factorizes into independent factors.
"""

from __future__ import annotations

import itertools
from typing import Mapping, Sequence

from .matrices import SymbolicMatrix, extended_matrix
from .moment_rules import MomentRule, MomentRulebook
from .operators import OperatorPolynomial
from .scenario import Scenario
from .symbols import MomentMonomial, MomentPolynomial
from .words import Context, OperatorWord, ZERO_WORD, shortlex_key

_OBS_LETTERS = "ABCDEFGH"

_PERM_GROUP_CAP = 200_000


class InflationContext(Context):
    """Commuting alphabet of inflated-variant operators."""

    def __init__(self, observables: Sequence[int | None],
                 sources: Sequence[Sequence[int]], level: int,
                 names: Sequence[str] | None = None):
        if level < 1:
            raise ValueError("inflation level must be at least 1")
        self.outcome_counts = list(observables)
        self.sources = [tuple(s) for s in sources]
        self.level = level
        n_obs = len(self.outcome_counts)
        for s in self.sources:
            for o in s:
                if not 0 <= o < n_obs:
                    raise ValueError(f"source references observable {o}")
        self.attached = [[] for _ in range(n_obs)]
        for sid, members in enumerate(self.sources):
            for o in members:
                self.attached[o].append(sid)
        if any(not a for a in self.attached):
            raise ValueError("every observable needs at least one source")
        for n in self.outcome_counts:
            if n is not None and n < 2:
                raise ValueError("discrete observables need >= 2 outcomes")
        if names is None:
            names = [_OBS_LETTERS[o] if o < len(_OBS_LETTERS) else f"O{o}"
                     for o in range(n_obs)]
        self.names = list(names)

        # allocate operators variant-major, outcomes within a variant
        self._ops: list[tuple[int, tuple[int, ...], int | None]] = []
        self._variant: list[int] = []
        self._copy_set: list[frozenset] = []
        self._slot: dict[tuple[int, tuple[int, ...], int | None], int] = {}
        variant_id = 0
        for o, n_out in enumerate(self.outcome_counts):
            m = len(self.attached[o])
            for copies in itertools.product(range(level), repeat=m):
                keys = range(n_out - 1) if n_out is not None else (None,)
                pairs = frozenset(zip(self.attached[o], copies))
                for k in keys:
                    self._slot[(o, copies, k)] = len(self._ops)
                    self._ops.append((o, copies, k))
                    self._variant.append(variant_id)
                    self._copy_set.append(pairs)
                variant_id += 1
        super().__init__(len(self._ops), hermitian=True)
        self._fold_cache: dict[tuple[int, ...], tuple[int, ...]] = {}
        self._perms: list | None = None

    # -- naming ---------------------------------------------------------
    def operator_name(self, index: int) -> str:
        o, copies, outcome = self._ops[index]
        tag = "".join(str(c + 1) for c in copies)
        name = f"{self.names[o]}{tag}" if self.level > 1 else self.names[o]
        n_out = self.outcome_counts[o]
        if n_out is not None and n_out > 2:
            name += f".{outcome}"
        return name

    # -- algebra --------------------------------------------------------
    def is_commutative(self) -> bool:
        return True

    def simplify(self, indices: Sequence[int], phase: int = 0) -> OperatorWord:
        ops = sorted(indices)
        out: list[int] = []
        for op in ops:
            if out:
                prev = out[-1]
                if self._variant[prev] == self._variant[op]:
                    if prev == op:
                        if self._ops[op][2] is not None:
                            continue            # projector squared
                    else:
                        return ZERO_WORD        # orthogonal outcomes
            out.append(op)
        return OperatorWord(tuple(out), phase & 3)

    # -- source-copy permutations ---------------------------------------
    def _permutations(self):
        if self._perms is None:
            per_source = list(itertools.permutations(range(self.level)))
            size = len(per_source) ** len(self.sources)
            if size > _PERM_GROUP_CAP:
                raise ValueError("source permutation group too large")
            self._perms = list(itertools.product(per_source,
                                                 repeat=len(self.sources)))
        return self._perms

    def permute_operator(self, index: int, perm) -> int:
        o, copies, outcome = self._ops[index]
        moved = tuple(perm[s][c] for s, c in zip(self.attached[o], copies))
        return self._slot[(o, moved, outcome)]

    def canonical_moment_word(self, word: OperatorWord) -> OperatorWord:
        if word.is_zero or not word.indices:
            return word
        cached = self._fold_cache.get(word.indices)
        if cached is None:
            best = word.indices
            for perm in self._permutations():
                cand = tuple(sorted(self.permute_operator(i, perm)
                                    for i in word.indices))
                if shortlex_key(cand) < shortlex_key(best):
                    best = cand
            self._fold_cache[word.indices] = cached = best
        return OperatorWord(cached, word.phase)

    # -- factorization --------------------------------------------------
    def factor_components(self, seq: Sequence[int]) -> list[tuple[int, ...]]:
        """Partition by connectivity through shared concrete source copies."""
        seq = tuple(seq)
        if not seq:
            return []
        parent = list(range(len(seq)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        first_seen: dict[tuple[int, int], int] = {}
        for pos, op in enumerate(seq):
            for pair in self._copy_set[op]:
                if pair in first_seen:
                    ra, rb = find(first_seen[pair]), find(pos)
                    if ra != rb:
                        parent[rb] = ra
                else:
                    first_seen[pair] = pos
        groups: dict[int, list[int]] = {}
        for pos, op in enumerate(seq):
            groups.setdefault(find(pos), []).append(op)
        return sorted((tuple(g) for g in groups.values()),
                      key=shortlex_key)


class InflationScenario(Scenario):
    """Moment relaxations testing distributions against a causal network.

    ``observables[i]`` is an outcome count (or None for a continuous
    observable); ``sources`` lists which observables each source feeds.
    """

    context: InflationContext

    def __init__(self, observables: Sequence[int | None],
                 sources: Sequence[Sequence[int]], level: int = 1,
                 names: Sequence[str] | None = None):
        super().__init__(InflationContext(observables, sources, level, names))

    # -- operator access ------------------------------------------------
    def variant_projector(self, observable: int, copies: Sequence[int],
                          outcome: int = 0) -> OperatorPolynomial:
        """Projector of one inflated variant; final outcome is implicit."""
        ctx = self.context
        n = ctx.outcome_counts[observable]
        copies = tuple(copies)
        if n is None:
            return self.operator(ctx._slot[(observable, copies, None)])
        if not 0 <= outcome < n:
            raise IndexError(f"outcome {outcome} out of range")
        if outcome < n - 1:
            return self.operator(ctx._slot[(observable, copies, outcome)])
        total = self.identity()
        for k in range(n - 1):
            total = total - self.operator(ctx._slot[(observable, copies, k)])
        return total

    def primary(self, observable: int, outcome: int = 0) -> OperatorPolynomial:
        """The first-copy variant of an observable."""
        m = len(self.context.attached[observable])
        return self.variant_projector(observable, (0,) * m, outcome)

    def factorize_moment(self, word: OperatorWord) -> list[OperatorWord]:
        """Independent factors of a moment word, each canonicalized."""
        ctx = self.context
        if word.is_zero:
            return [ZERO_WORD]
        parts = ctx.factor_components(word.indices)
        if len(parts) <= 1:
            return [ctx.canonical_moment_word(word)]
        return [ctx.canonical_moment_word(OperatorWord(p)) for p in parts]

    def extended_matrix(self, level: int, extension_symbols: Sequence[int],
                        name: str | None = None) -> SymbolicMatrix:
        """Moment matrix bordered by scalar-multiple extension columns."""
        return extended_matrix(self.context, self.registry,
                               self.dictionary(level), extension_symbols, name)

    def declare_factorizations(self) -> None:
        """Attach factor lists to every registered factorizable moment."""
        ctx = self.context
        reg = self.registry
        for sym in range(2, len(reg)):
            entry = reg.entry(sym)
            if entry.word is None or entry.factors is not None:
                continue
            seq = entry.word.indices
            if len(seq) < 2:
                continue
            parts = ctx.factor_components(seq)
            if len(parts) < 2:
                continue
            factor_syms = [reg.register_word(OperatorWord(p)).symbol
                           for p in parts]
            reg.declare_factorization(sym, factor_syms)

    # -- distributions --------------------------------------------------
    def discrete_observables(self) -> list[int]:
        return [o for o, n in enumerate(self.context.outcome_counts)
                if n is not None]

    def probability_polynomial(self, outcomes: Sequence[int]
                               ) -> OperatorPolynomial:
        """Joint outcome probability over the primary variants."""
        discrete = self.discrete_observables()
        if len(outcomes) != len(discrete):
            raise ValueError("one outcome per discrete observable required")
        poly = self.identity()
        for o, k in zip(discrete, outcomes):
            poly = poly * self.primary(o, k)
        return poly

    def distribution_rulebook(self, distribution: Mapping[Sequence[int], float],
                              ) -> MomentRulebook:
        """Moment rules imposing a distribution over the primary variants.

        ``distribution`` maps full outcome tuples to probabilities;
        missing tuples count as zero.  Beyond the explicit constraints,
        factorizable registered moments with numerically pinned factors
        get implied substitution rules.
        """
        table = {tuple(k): float(v) for k, v in distribution.items()}
        discrete = self.discrete_observables()
        ranges = [range(self.context.outcome_counts[o]) for o in discrete]
        polys = []
        for combo in itertools.product(*ranges):
            prob = table.pop(combo, 0.0)
            target = self.moment(self.probability_polynomial(combo))
            polys.append(target - MomentPolynomial.constant(self.registry, prob))
        if table:
            raise ValueError(f"unknown outcome tuples: {sorted(table)}")
        self.declare_factorizations()
        book = MomentRulebook(self.registry)
        book.complete(polys)
        self._imply_factor_rules(book)
        return book

    def _imply_factor_rules(self, book: MomentRulebook) -> None:
        """Substitute pinned factor values into factorizable moments.

        A moment whose factors are all pinned collapses to its numeric
        value.  One with some factors still unknown gets two rules: one
        on the moment itself and one on the partially evaluated factor
        product, which survives as a slot-sharing alias symbol.  Moments
        with no pinned factor are left alone.
        """
        reg = self.registry
        while True:
            known = {lhs: rule.rhs.scalar_value()
                     for lhs, rule in book.rules.items()
                     if rule.kind != "partial" and rule.rhs.is_scalar()}
            added = False
            for sym in range(2, len(reg)):
                if sym in book.rules:
                    continue
                entry = reg.entry(sym)
                factors = entry.factors
                if not factors or len(factors) < 2:
                    continue
                value = 1.0
                rest: list[int] = []
                hit = False
                for f in factors:
                    if f in known:
                        value *= known[f]
                        hit = True
                    else:
                        rest.append(f)
                if not hit:
                    continue
                if not rest:
                    rhs = MomentPolynomial.constant(reg, value)
                else:
                    if len(rest) == 1:
                        remainder = rest[0]
                    else:
                        remainder = reg.register_composite(rest)
                    rhs = MomentPolynomial.build(
                        reg, [MomentMonomial(remainder, False, value)])
                    if entry.word is not None:
                        twin = reg.register_factor_alias(factors)
                        book.insert_rule(MomentRule(twin, rhs))
                book.insert_rule(MomentRule(sym, rhs))
                added = True
            if not added:
                return

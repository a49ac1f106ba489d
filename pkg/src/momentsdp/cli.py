"""Command-line front end: JSON scenario configs in, reports and SDP files out.

A config is a single JSON object with a ``kind`` discriminator
(locality, algebraic, pauli, inflation, imported) plus kind-specific
keys; the ``example`` subcommand ships ready-made configs for the
worked examples.  Exit codes: 0 success or feasible, 1 infeasible,
2 usage or schema error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .algebraic import AlgebraicScenario
from .imported import ImportedScenario, MomentParseError
from .inflation import InflationScenario
from .locality import LocalityScenario
from .matrices import SymbolicMatrix
from .moment_rules import InconsistencyError
from .pauli import PauliScenario, energy_bound_problem, heisenberg_hamiltonian
from .sdp import (AssemblyError, assemble, problem_to_json, solution_to_json,
                  solve, write_sdpa)
from .solver import (STATUS_INFEASIBLE, STATUS_OPTIMAL, SolverOptions)
from .symmetry import SymmetrizedScenario

KINDS = ("locality", "algebraic", "pauli", "inflation", "imported")
IMPORT_MODES = ("general", "hermitian", "symmetric")
THREADS_ENV = "MOMENTSDP_THREADS"

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_NUM = (int, float)


class SchemaError(ValueError):
    """Config rejected; ``path`` points at the offending key."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


# -- config validation --------------------------------------------------

def _require(cond: bool, path: str, reason: str) -> None:
    if not cond:
        raise SchemaError(path, reason)


def _sub(path: str, key) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else str(key)


def _field(doc: dict, key: str, path: str, types, default=None,
           required: bool = False):
    here = _sub(path, key)
    if key not in doc:
        _require(not required, here, "required key missing")
        return default
    val = doc[key]
    if types is bool:
        _require(isinstance(val, bool), here, "expected true or false")
    elif types is int:
        _require(isinstance(val, int) and not isinstance(val, bool),
                 here, "expected an integer")
    elif types is _NUM:
        _require(isinstance(val, _NUM) and not isinstance(val, bool),
                 here, "expected a number")
    else:
        _require(isinstance(val, types), here,
                 f"expected {getattr(types, '__name__', 'value')}")
    return val


def _check_number_grid(grid, path: str) -> None:
    _require(isinstance(grid, list) and grid, path,
             "expected a non-empty list of rows")
    for i, row in enumerate(grid):
        _require(isinstance(row, list) and row, _sub(path, i),
                 "expected a non-empty row of numbers")
        for j, v in enumerate(row):
            _require(isinstance(v, _NUM) and not isinstance(v, bool),
                     _sub(_sub(path, i), j), "expected a number")


def _check_words(terms, path: str) -> None:
    _require(isinstance(terms, list) and terms, path,
             "expected a non-empty list of [coefficient, indices] pairs")
    for k, pair in enumerate(terms):
        here = _sub(path, k)
        _require(isinstance(pair, list) and len(pair) == 2, here,
                 "expected [coefficient, indices]")
        coeff, indices = pair
        if isinstance(coeff, list):
            _require(len(coeff) == 2 and all(
                isinstance(c, _NUM) and not isinstance(c, bool)
                for c in coeff), _sub(here, 0),
                "complex coefficient is [re, im]")
        else:
            _require(isinstance(coeff, _NUM) and not isinstance(coeff, bool),
                     _sub(here, 0), "expected a number or [re, im]")
        _require(isinstance(indices, list), _sub(here, 1),
                 "expected a list of operator indices")
        for m, idx in enumerate(indices):
            _require(isinstance(idx, int) and not isinstance(idx, bool)
                     and idx >= 0, _sub(_sub(here, 1), m),
                     "expected a non-negative operator index")


def _check_objective(doc, path: str, forms: tuple[str, ...]) -> None:
    _require(isinstance(doc, dict), path, "expected an object")
    picked = [k for k in forms if k in doc]
    _require(len(picked) == 1, path,
             f"exactly one of {', '.join(forms)} required")
    extras = set(doc) - set(forms)
    if extras:
        raise SchemaError(_sub(path, sorted(extras)[0]), "unknown key")
    form = picked[0]
    if form in ("fc", "cg"):
        _check_number_grid(doc[form], _sub(path, form))
    elif form == "words":
        _check_words(doc["words"], _sub(path, "words"))
    elif form == "tokens":
        toks = doc["tokens"]
        _require(isinstance(toks, list) and toks, _sub(path, "tokens"),
                 "expected a non-empty list of moment strings")
        for k, t in enumerate(toks):
            _require(isinstance(t, str), _sub(_sub(path, "tokens"), k),
                     "expected a moment string")


def _check_common(doc: dict) -> None:
    level = _field(doc, "level", "", int)
    if level is not None:
        _require(level >= 0, "level", "level must be at least 0")
    _field(doc, "real_only", "", bool)
    _field(doc, "maximize", "", bool)
    _field(doc, "name", "", str)
    opts = _field(doc, "solve", "", dict)
    if opts is not None:
        tol = _field(opts, "tolerance", "solve", _NUM)
        if tol is not None:
            _require(tol > 0, "solve.tolerance", "must be positive")
        it = _field(opts, "max_iterations", "solve", int)
        if it is not None:
            _require(it > 0, "solve.max_iterations", "must be positive")


def _check_symmetry(doc: dict) -> None:
    sym = _field(doc, "symmetry", "", dict)
    if sym is None:
        return
    gens = _field(sym, "generators", "symmetry", list, required=True)
    _require(bool(gens), "symmetry.generators", "at least one generator")
    for k, g in enumerate(gens):
        here = _sub("symmetry.generators", k)
        _check_number_grid(g, here)
        d = len(g)
        _require(all(len(row) == d for row in g), here,
                 "generator must be a square matrix")
    wl = _field(sym, "word_length", "symmetry", int)
    if wl is not None:
        _require(wl >= 1, "symmetry.word_length", "must be at least 1")


def _validate_locality(doc: dict) -> None:
    outcomes = _field(doc, "outcomes", "", list, required=True)
    _require(bool(outcomes), "outcomes", "at least one party")
    for p, party in enumerate(outcomes):
        here = _sub("outcomes", p)
        _require(isinstance(party, list) and party, here,
                 "expected a list of outcome counts per measurement")
        for m, n in enumerate(party):
            _require(isinstance(n, int) and not isinstance(n, bool)
                     and n >= 2, _sub(here, m),
                     "outcome counts are integers of at least 2")
    if "objective" in doc:
        _check_objective(doc["objective"], "objective", ("fc", "cg", "words"))
    _check_symmetry(doc)


def _validate_algebraic(doc: dict) -> None:
    count = _field(doc, "operators", "", int, required=True)
    _require(count >= 0, "operators", "operator count cannot be negative")
    _field(doc, "hermitian", "", bool)
    names = _field(doc, "names", "", list)
    if names is not None:
        _require(len(names) == count, "names",
                 f"expected {count} names, one per operator")
        for k, n in enumerate(names):
            _require(isinstance(n, str) and n, _sub("names", k),
                     "expected a non-empty string")
    rules = _field(doc, "rules", "", list, default=[])
    for k, rule in enumerate(rules):
        here = _sub("rules", k)
        _require(isinstance(rule, dict), here, "expected an object")
        lhs = _field(rule, "lhs", here, list, required=True)
        for m, idx in enumerate(lhs):
            _require(isinstance(idx, int) and not isinstance(idx, bool)
                     and idx >= 0, _sub(_sub(here, "lhs"), m),
                     "expected a non-negative operator index")
        if rule.get("rhs") is not None:
            for m, idx in enumerate(_field(rule, "rhs", here, list)):
                _require(isinstance(idx, int) and not isinstance(idx, bool)
                         and idx >= 0, _sub(_sub(here, "rhs"), m),
                         "expected a non-negative operator index")
        phase = _field(rule, "phase", here, int, default=0)
        _require(phase in (0, 1, 2, 3), _sub(here, "phase"),
                 "phase is a power of i, 0 through 3")
        _field(rule, "with_conjugate", here, bool)
    _field(doc, "complete", "", bool)
    cap = _field(doc, "max_new_rules", "", int)
    if cap is not None:
        _require(cap >= 1, "max_new_rules", "must be at least 1")
    loc = _field(doc, "localizing", "", list, default=[])
    for k, entry in enumerate(loc):
        here = _sub("localizing", k)
        _require(isinstance(entry, dict), here, "expected an object")
        _check_words(_field(entry, "poly", here, list, required=True),
                     _sub(here, "poly"))
        lev = _field(entry, "level", here, int)
        if lev is not None:
            _require(lev >= 0, _sub(here, "level"), "must be at least 0")
        _field(entry, "name", here, str)
    if "objective" in doc:
        _check_objective(doc["objective"], "objective", ("words",))
    _check_symmetry(doc)
    if loc and "symmetry" in doc:
        raise SchemaError("symmetry",
                          "symmetry reduction with localizing matrices "
                          "is not supported")


def _validate_pauli(doc: dict) -> None:
    qubits = _field(doc, "qubits", "", int)
    lattice = _field(doc, "lattice", "", list)
    _require((qubits is None) != (lattice is None), "qubits",
             "give exactly one of qubits or lattice")
    if qubits is not None:
        _require(qubits >= 1, "qubits", "must be at least 1")
    if lattice is not None:
        _require(len(lattice) == 2 and all(
            isinstance(v, int) and not isinstance(v, bool) and v >= 1
            for v in lattice), "lattice", "expected [rows, columns]")
    _field(doc, "wrap", "", bool)
    _field(doc, "symmetrized", "", bool)
    nb = _field(doc, "neighbours", "", int)
    if nb is not None:
        _require(nb >= 1, "neighbours", "must be at least 1")
    ham = _field(doc, "hamiltonian", "", dict)
    if ham is not None:
        picked = [k for k in ("heisenberg", "words") if k in ham]
        _require(len(picked) == 1, "hamiltonian",
                 "exactly one of heisenberg, words required")
        if picked[0] == "heisenberg":
            h = ham["heisenberg"]
            _require(isinstance(h, dict), "hamiltonian.heisenberg",
                     "expected an object")
            coupling = _field(h, "coupling", "hamiltonian.heisenberg",
                              (list, int, float), required=True)
            if isinstance(coupling, list):
                _require(len(coupling) == 3 and all(
                    isinstance(v, _NUM) and not isinstance(v, bool)
                    for v in coupling), "hamiltonian.heisenberg.coupling",
                    "expected one number or [jx, jy, jz]")
            else:
                _require(not isinstance(coupling, bool),
                         "hamiltonian.heisenberg.coupling",
                         "expected one number or [jx, jy, jz]")
            _field(h, "field", "hamiltonian.heisenberg", _NUM)
        else:
            _check_words(ham["words"], "hamiltonian.words")
    _field(doc, "optimality", "", bool)
    _require("objective" not in doc, "objective",
             "spin scenarios take a hamiltonian, not an objective")


def _parse_outcome_key(key: str, path: str) -> tuple[int, ...]:
    parts = key.split(",") if "," in key else list(key)
    out = []
    for p in parts:
        _require(p.isdigit(), path,
                 "outcome keys are digit strings like \"010\" "
                 "(comma-separated for outcomes beyond 9)")
        out.append(int(p))
    return tuple(out)


def _validate_inflation(doc: dict) -> None:
    obs = _field(doc, "observables", "", list, required=True)
    _require(bool(obs), "observables", "at least one observable")
    for k, n in enumerate(obs):
        if n is not None:
            _require(isinstance(n, int) and not isinstance(n, bool)
                     and n >= 1, _sub("observables", k),
                     "expected an outcome count or null (continuous)")
    sources = _field(doc, "sources", "", list, required=True)
    _require(bool(sources), "sources", "at least one source")
    for k, src in enumerate(sources):
        here = _sub("sources", k)
        _require(isinstance(src, list) and src, here,
                 "expected a list of observable indices")
        for m, idx in enumerate(src):
            _require(isinstance(idx, int) and not isinstance(idx, bool)
                     and 0 <= idx < len(obs), _sub(here, m),
                     f"observable index out of range 0..{len(obs) - 1}")
    infl = _field(doc, "inflation", "", int, default=1)
    _require(infl >= 1, "inflation", "inflation level is at least 1")
    names = _field(doc, "names", "", list)
    if names is not None:
        _require(len(names) == len(obs), "names",
                 f"expected {len(obs)} names, one per observable")
    dist = _field(doc, "distribution", "", dict)
    if dist is not None:
        discrete = [n for n in obs if n is not None]
        for key, prob in dist.items():
            here = _sub("distribution", key)
            combo = _parse_outcome_key(key, here)
            _require(len(combo) == len(discrete), here,
                     f"expected {len(discrete)} outcomes, one per "
                     "discrete observable")
            for v, n in zip(combo, discrete):
                _require(v < n, here, f"outcome {v} out of range 0..{n - 1}")
            _require(isinstance(prob, _NUM) and not isinstance(prob, bool)
                     and 0 <= prob <= 1, here,
                     "probability must lie in [0, 1]")
    if "objective" in doc:
        _check_objective(doc["objective"], "objective", ("words",))


def _validate_imported(doc: dict) -> None:
    _field(doc, "real", "", bool)
    mode = _field(doc, "mode", "", str, default="general")
    _require(mode in IMPORT_MODES, "mode",
             f"expected one of {', '.join(IMPORT_MODES)}")
    matrix = doc.get("matrix")
    matrix_file = _field(doc, "matrix_file", "", str)
    _require((matrix is None) != (matrix_file is None), "matrix",
             "give exactly one of matrix or matrix_file")
    if matrix is not None:
        _require(isinstance(matrix, (str, list)), "matrix",
                 "expected a grid of moment strings or a CSV string")
        if isinstance(matrix, list):
            for i, row in enumerate(matrix):
                here = _sub("matrix", i)
                _require(isinstance(row, list) and row, here,
                         "expected a row of moment strings")
                for j, cell in enumerate(row):
                    _require(isinstance(cell, str), _sub(here, j),
                             "expected a moment string")
    if "objective" in doc:
        _check_objective(doc["objective"], "objective", ("tokens",))


_VALIDATORS = {
    "locality": _validate_locality,
    "algebraic": _validate_algebraic,
    "pauli": _validate_pauli,
    "inflation": _validate_inflation,
    "imported": _validate_imported,
}


def validate_config(doc) -> dict:
    """Schema check; returns the document unchanged or raises SchemaError."""
    _require(isinstance(doc, dict), "config", "expected a JSON object")
    kind = _field(doc, "kind", "", str, required=True)
    _require(kind in KINDS, "kind", f"expected one of {', '.join(KINDS)}")
    _check_common(doc)
    _VALIDATORS[kind](doc)
    return doc


def parse_config(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("config", f"not valid JSON ({exc})")
    return validate_config(doc)


def render_config(config: dict) -> str:
    return json.dumps(config, indent=2, sort_keys=True)


# -- problem building ---------------------------------------------------

@dataclass
class BuiltProblem:
    """A config turned into symbolic matrices plus solve settings."""

    kind: str
    scenario: object
    registry: object
    matrices: list
    objective: object | None
    maximize: bool
    real_only: bool
    alphabet: list[str] | None = None
    dictionary: list[str] | None = None
    notes: list[str] = field(default_factory=list)


def _operator_poly(scenario, terms, path: str):
    count = scenario.context.operator_count
    poly = scenario.identity(0.0)
    for k, (coeff, indices) in enumerate(terms):
        c = (complex(coeff[0], coeff[1]) if isinstance(coeff, list)
             else complex(coeff))
        for idx in indices:
            _require(idx < count, _sub(path, k),
                     f"operator index {idx} out of range "
                     f"(alphabet has {count} operators)")
        poly = poly + scenario.monomial(tuple(indices), c)
    return poly


def _dictionary_names(scenario, dictionary) -> list[str]:
    ctx = scenario.context
    return [ctx.word_name(w) for w in dictionary.words]


def _apply_symmetry(scenario, objective, level: int, sym_cfg: dict):
    """Wrap a scenario's moment matrix and objective in a symmetry quotient."""
    gens = [np.array(g, dtype=float) for g in sym_cfg["generators"]]
    expect = scenario.context.operator_count + 1
    for k, g in enumerate(gens):
        _require(g.shape == (expect, expect),
                 _sub("symmetry.generators", k),
                 f"expected a {expect}x{expect} matrix over "
                 "(identity, operators)")
    word_length = sym_cfg.get("word_length")
    try:
        if word_length is None:
            wrap = SymmetrizedScenario(scenario, gens, level=level)
        else:
            wrap = SymmetrizedScenario(scenario, gens,
                                       word_length=word_length)
        matrices = [wrap.moment_matrix(level)]
        if objective is not None:
            objective = wrap.transform(objective)
    except ValueError as exc:
        raise SchemaError("symmetry", str(exc))
    notes = [f"symmetry group order {len(wrap.group)}",
             f"reduced to {len(wrap.reduction.symbols)} moment symbols"]
    return wrap, matrices, objective, notes


def _build_locality(cfg: dict, level: int, log) -> BuiltProblem:
    sc = LocalityScenario(cfg["outcomes"])
    objective = None
    ocfg = cfg.get("objective")
    if ocfg is not None:
        try:
            if "fc" in ocfg:
                poly = sc.full_correlator(ocfg["fc"])
            elif "cg" in ocfg:
                poly = sc.collins_gisin(ocfg["cg"])
            else:
                poly = _operator_poly(sc, ocfg["words"], "objective.words")
        except ValueError as exc:
            raise SchemaError("objective", str(exc))
        objective = sc.moment(poly)
    notes = [f"{len(cfg['outcomes'])} parties, measurements per party: "
             + ", ".join(str(len(p)) for p in cfg["outcomes"])]
    registry = sc.registry
    if "symmetry" in cfg:
        wrap, matrices, objective, sym_notes = _apply_symmetry(
            sc, objective, level, cfg["symmetry"])
        registry = wrap.registry
        notes += sym_notes
        dictionary = None
    else:
        matrices = [sc.moment_matrix(level)]
        dictionary = _dictionary_names(sc, sc.dictionary(level))
    alphabet = [sc.context.operator_name(i)
                for i in range(sc.context.operator_count)]
    return BuiltProblem("locality", sc, registry, matrices, objective,
                        cfg.get("maximize", False),
                        cfg.get("real_only", False),
                        alphabet, dictionary, notes)


def _build_algebraic(cfg: dict, level: int, log) -> BuiltProblem:
    sc = AlgebraicScenario(cfg["operators"], cfg.get("hermitian", True),
                           cfg.get("names"))
    for k, rule in enumerate(cfg.get("rules", ())):
        try:
            sc.add_rule(rule["lhs"], rule.get("rhs"),
                        rule.get("phase", 0),
                        rule.get("with_conjugate", False))
        except (ValueError, IndexError) as exc:
            raise SchemaError(_sub("rules", k), str(exc))
    notes = [f"{len(sc.rules())} rewrite rules"]
    if cfg.get("complete", False):
        cap = cfg.get("max_new_rules", 128)
        converged = sc.complete(cap, log)
        notes[-1] = f"{len(sc.rules())} rewrite rules after completion"
        if not converged:
            notes.append(f"completion stopped at the {cap} new-rule cap "
                         "without reaching confluence")
    objective = None
    ocfg = cfg.get("objective")
    if ocfg is not None:
        objective = sc.moment(
            _operator_poly(sc, ocfg["words"], "objective.words"))
    registry = sc.registry
    if "symmetry" in cfg:
        wrap, matrices, objective, sym_notes = _apply_symmetry(
            sc, objective, level, cfg["symmetry"])
        registry = wrap.registry
        notes += sym_notes
        dictionary = None
    else:
        matrices = [sc.moment_matrix(level)]
        for k, entry in enumerate(cfg.get("localizing", ())):
            poly = _operator_poly(sc, entry["poly"],
                                  _sub(_sub("localizing", k), "poly"))
            lev = entry.get("level")
            if lev is None:
                lev = max(level - 1, 0)
            name = entry.get("name") or f"localizing matrix {k + 1}"
            matrices.append(sc.localizing_matrix(lev, poly, name))
        dictionary = _dictionary_names(sc, sc.dictionary(level))
    alphabet = [sc.context.operator_name(i)
                for i in range(sc.context.operator_count)]
    return BuiltProblem("algebraic", sc, registry, matrices, objective,
                        cfg.get("maximize", False),
                        cfg.get("real_only", False),
                        alphabet, dictionary, notes)


def _build_pauli(cfg: dict, level: int, log) -> BuiltProblem:
    if "lattice" in cfg:
        sc = PauliScenario(lattice=tuple(cfg["lattice"]),
                           wrap=cfg.get("wrap", False),
                           symmetrized=cfg.get("symmetrized", False))
    else:
        sc = PauliScenario(qubits=cfg["qubits"],
                           wrap=cfg.get("wrap", False),
                           symmetrized=cfg.get("symmetrized", False))
    neighbours = cfg.get("neighbours")
    notes = [f"{sc.qubits} qubits"
             + (", translation symmetrized" if cfg.get("symmetrized") else "")]
    if neighbours is not None:
        notes.append(f"words restricted to {neighbours}-neighbour supports")
    ham_cfg = cfg.get("hamiltonian")
    if ham_cfg is None:
        matrices = [sc.moment_matrix(level)]
        objective = None
        dictionary = _dictionary_names(sc, sc.dictionary(level))
    else:
        if "heisenberg" in ham_cfg:
            h = ham_cfg["heisenberg"]
            coupling = h["coupling"]
            if isinstance(coupling, list):
                coupling = tuple(coupling)
            try:
                ham = heisenberg_hamiltonian(sc, coupling,
                                             h.get("field", 0.0))
            except ValueError as exc:
                raise SchemaError("hamiltonian.heisenberg", str(exc))
        else:
            ham = _operator_poly(sc, ham_cfg["words"], "hamiltonian.words")
        objective, matrices = energy_bound_problem(
            sc, ham, level, neighbours=neighbours,
            optimality=cfg.get("optimality", True))
        if cfg.get("optimality", True):
            notes.append("eigenstate optimality rules applied; maximizing "
                         "upper-bounds the ground energy")
        if neighbours is not None:
            dictionary = _dictionary_names(
                sc, sc.neighbour_dictionary(level, neighbours))
        else:
            dictionary = _dictionary_names(sc, sc.dictionary(level))
    alphabet = [sc.context.operator_name(i)
                for i in range(sc.context.operator_count)]
    return BuiltProblem("pauli", sc, sc.registry, matrices, objective,
                        cfg.get("maximize", False),
                        cfg.get("real_only", False),
                        alphabet, dictionary, notes)


def _build_inflation(cfg: dict, level: int, log) -> BuiltProblem:
    sc = InflationScenario(cfg["observables"], cfg["sources"],
                           cfg.get("inflation", 1), cfg.get("names"))
    matrices = [sc.moment_matrix(level)]
    objective = None
    if cfg.get("objective") is not None:
        objective = sc.moment(_operator_poly(
            sc, cfg["objective"]["words"], "objective.words"))
    notes = [f"inflation level {cfg.get('inflation', 1)}, "
             f"{sc.context.operator_count} inflated operators"]
    dist = cfg.get("distribution")
    if dist is not None:
        table = {_parse_outcome_key(k, _sub("distribution", k)): v
                 for k, v in dist.items()}
        book = sc.distribution_rulebook(table)
        matrices = [book.reduce_matrix(m) for m in matrices]
        if objective is not None:
            objective = book.reduce_polynomial(objective)
        notes.append(f"distribution imposed via {len(book)} "
                     "moment substitution rules")
    alphabet = [sc.context.operator_name(i)
                for i in range(sc.context.operator_count)]
    dictionary = _dictionary_names(sc, sc.dictionary(level))
    return BuiltProblem("inflation", sc, sc.registry, matrices, objective,
                        cfg.get("maximize", False),
                        cfg.get("real_only", False),
                        alphabet, dictionary, notes)


def _build_imported(cfg: dict, level: int, log) -> BuiltProblem:
    sc = ImportedScenario(cfg.get("real", False))
    if "matrix_file" in cfg:
        with open(cfg["matrix_file"], encoding="utf-8") as fh:
            grid = fh.read()
    else:
        grid = cfg["matrix"]
    mode = cfg.get("mode", "general")
    try:
        matrix = sc.import_matrix(grid, mode)
    except (MomentParseError, ValueError) as exc:
        raise SchemaError("matrix", str(exc))
    objective = None
    if cfg.get("objective") is not None:
        try:
            objective = sc.import_polynomial(cfg["objective"]["tokens"])
        except MomentParseError as exc:
            raise SchemaError("objective.tokens", str(exc))
    layout = sc.registry.slot_layout()
    complex_moments = [sc.registry.symbol_name(s)
                       for s in layout.imag_symbols]
    notes = [f"imported {matrix.dimension}x{matrix.dimension} "
             f"{mode} matrix"]
    if complex_moments:
        notes.append("moments with an imaginary part: "
                     + ", ".join(complex_moments))
    else:
        notes.append("all imported moments are real")
    return BuiltProblem("imported", sc, sc.registry, [matrix], objective,
                        cfg.get("maximize", False),
                        cfg.get("real_only", False), None, None, notes)


_BUILDERS = {
    "locality": _build_locality,
    "algebraic": _build_algebraic,
    "pauli": _build_pauli,
    "inflation": _build_inflation,
    "imported": _build_imported,
}


def build_problem(config: dict, log=None) -> BuiltProblem:
    """Symbolic matrices and solve settings from a validated config."""
    validate_config(config)
    level = config.get("level", 1)
    return _BUILDERS[config["kind"]](config, level, log)


def solver_options(config: dict, tolerance: float | None = None
                   ) -> SolverOptions:
    opts = config.get("solve", {})
    kwargs = {}
    if tolerance is not None:
        kwargs["tolerance"] = tolerance
    elif "tolerance" in opts:
        kwargs["tolerance"] = float(opts["tolerance"])
    if "max_iterations" in opts:
        kwargs["max_iterations"] = int(opts["max_iterations"])
    return SolverOptions(**kwargs)


# -- built-in examples --------------------------------------------------

_CHSH_BASE = {
    "kind": "locality",
    "name": "chsh",
    "outcomes": [[2, 2], [2, 2]],
    "level": 1,
    "real_only": True,
    "maximize": False,
    "objective": {"fc": [[0, 0, 0], [0, 1, 1], [0, 1, -1]]},
}

# party swap and the measurement relabelling (a0 a1)(b1 -> 1 - b1),
# written as images of the operator row (1, a0, a1, b0, b1)
_CHSH_GENERATORS = [
    [[1, 0, 0, 0, 0],
     [0, 0, 0, 1, 0],
     [0, 0, 0, 0, 1],
     [0, 1, 0, 0, 0],
     [0, 0, 1, 0, 0]],
    [[1, 0, 0, 0, 1],
     [0, 0, 1, 0, 0],
     [0, 1, 0, 0, 0],
     [0, 0, 0, 1, 0],
     [0, 0, 0, 0, -1]],
]

EXAMPLE_CONFIGS: dict[str, dict] = {
    "chsh": _CHSH_BASE,
    "i3322": {
        "kind": "locality",
        "name": "i3322",
        "outcomes": [[2, 2, 2], [2, 2, 2]],
        "level": 1,
        "real_only": True,
        "maximize": True,
        "objective": {"fc": [[0, -1, -1, 0],
                             [-1, -1, -1, -1],
                             [-1, -1, -1, 1],
                             [0, -1, 1, 0]]},
    },
    "cglmp": {
        "kind": "locality",
        "name": "cglmp",
        "outcomes": [[3, 3], [3, 3]],
        "level": 2,
        "real_only": True,
        "maximize": True,
        "objective": {"cg": [[0, -1, -1, 0, 0],
                             [-1, 1, 1, 0, 1],
                             [-1, 1, 0, 1, 1],
                             [0, 0, 1, 0, -1],
                             [0, 1, 1, -1, -1]]},
    },
    "pna": {
        "kind": "algebraic",
        "name": "pna",
        "operators": 2,
        "hermitian": True,
        "names": ["x1", "x2"],
        "rules": [{"lhs": [0, 0], "rhs": [0]}],
        "level": 2,
        "real_only": True,
        "maximize": False,
        "objective": {"words": [[1, [0, 1]], [1, [1, 0]]]},
        "localizing": [{"poly": [[-1, [1, 1]], [1, [1]], [0.5, []]],
                        "name": "constraint localizing matrix"}],
    },
    "heisenberg": {
        "kind": "pauli",
        "name": "heisenberg",
        "qubits": 6,
        "wrap": True,
        "symmetrized": True,
        "level": 2,
        "neighbours": 1,
        "hamiltonian": {"heisenberg": {"coupling": 0.25, "field": 0.0}},
        "optimality": False,
        "maximize": False,
    },
    "triangle": {
        "kind": "inflation",
        "name": "triangle",
        "observables": [2, 2, 2],
        "sources": [[0, 1], [1, 2], [0, 2]],
        "inflation": 2,
        "level": 2,
        "distribution": {"000": 0.5, "111": 0.5},
    },
    "chsh_symmetric": dict(
        _CHSH_BASE,
        name="chsh_symmetric",
        maximize=True,
        symmetry={"generators": _CHSH_GENERATORS},
    ),
    "chsh_imported": {
        "kind": "imported",
        "name": "chsh_imported",
        "mode": "hermitian",
        "maximize": False,
        "matrix": [["1", "2", "3", "4", "5"],
                   ["2", "2", "6", "7", "8"],
                   ["3", "6*", "3", "9", "10"],
                   ["4", "7", "9", "4", "11"],
                   ["5", "8", "10", "11*", "5"]],
        "objective": {"tokens": ["2.0", "-4#2", "-4#4", "4#7",
                                 "4#8", "4#9", "-4#10"]},
    },
}


def example_config(name: str) -> dict:
    if name not in EXAMPLE_CONFIGS:
        raise SchemaError("example", f"unknown example {name!r}; choose "
                          f"from {', '.join(sorted(EXAMPLE_CONFIGS))}")
    return copy.deepcopy(EXAMPLE_CONFIGS[name])


def _load_config(source: str) -> dict:
    if os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            return parse_config(fh.read())
    if source in EXAMPLE_CONFIGS:
        return example_config(source)
    raise SchemaError("config",
                      f"{source!r} is neither a config file nor a "
                      "built-in example")


def _apply_overrides(cfg: dict, args) -> dict:
    if getattr(args, "level", None) is not None:
        cfg["level"] = args.level
    if getattr(args, "neighbours", None) is not None:
        _require(cfg["kind"] == "pauli", "neighbours",
                 "the neighbour filter only applies to spin scenarios")
        cfg["neighbours"] = args.neighbours
    if getattr(args, "real_only", False):
        cfg["real_only"] = True
    if getattr(args, "max_new_rules", None) is not None:
        _require(cfg["kind"] == "algebraic", "max_new_rules",
                 "the rule cap only applies to algebraic scenarios")
        cfg["max_new_rules"] = args.max_new_rules
    return validate_config(cfg)


def _completion_log(args):
    if getattr(args, "log_completion", False):
        return lambda line: print(line, file=sys.stderr)
    return None


# -- commands -----------------------------------------------------------

def _symbol_kind(entry) -> str:
    if entry.antihermitian:
        return "imaginary"
    return "real" if entry.hermitian else "complex"


def cmd_describe(args) -> int:
    cfg = _apply_overrides(_load_config(args.config), args)
    built = build_problem(cfg, log=_completion_log(args))
    out = sys.stdout
    title = cfg.get("name") or cfg["kind"]
    print(f"scenario: {title} ({built.kind})", file=out)
    for note in built.notes:
        print(note, file=out)
    if built.alphabet is not None:
        print(f"operators ({len(built.alphabet)}): "
              + ", ".join(built.alphabet), file=out)
    if built.dictionary is not None:
        print(f"dictionary (level {cfg.get('level', 1)}, "
              f"{len(built.dictionary)} words): "
              + ", ".join(built.dictionary), file=out)
    reg = built.registry
    rows = reg.table()
    print(f"symbols ({len(rows)}):", file=out)
    for row in rows:
        print(f"  {row['symbol']:>4}  {row['name']:<24} "
              f"{_symbol_kind(reg.entry(row['symbol']))}", file=out)
    for matrix in built.matrices:
        d = matrix.dimension
        print(f"{matrix.name} ({d}x{d}):", file=out)
        print(matrix.render(), file=out)
    if built.objective is not None:
        sense = "maximize" if built.maximize else "minimize"
        print(f"objective ({sense}): {built.objective}", file=out)
    return EXIT_OK


def _assemble_problem(built: BuiltProblem):
    return assemble(built.objective, built.matrices,
                    real_only=built.real_only, maximize=built.maximize)


def _generate_report(built: BuiltProblem, problem) -> list[str]:
    lines = []
    for matrix in built.matrices:
        lines.append(f"{matrix.name}: {matrix.dimension} x "
                     f"{matrix.dimension}")
    layout = problem.layout
    lines.append(f"scalar variables: {layout.count} "
                 f"({len(layout.real_symbols)} real, "
                 f"{len(layout.imag_symbols)} imaginary)")
    eq = problem.numeric_equalities()
    lines.append(f"equality constraints: {0 if eq is None else len(eq[1])}")
    if problem.inequalities:
        lines.append(f"inequality constraints: {len(problem.inequalities)}")
    return lines


def cmd_generate(args) -> int:
    cfg = _apply_overrides(_load_config(args.config), args)
    built = build_problem(cfg, log=_completion_log(args))
    problem = _assemble_problem(built)
    if args.format == "sdpa":
        payload = write_sdpa(problem)
    else:
        payload = problem_to_json(problem).encode()
    report = _generate_report(built, problem)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(payload)
        report.append(f"wrote {args.out} ({len(payload)} bytes, "
                      f"{args.format})")
        for line in report:
            print(line)
    else:
        # payload on stdout, report on stderr, so output stays pipeable
        for line in report:
            print(line, file=sys.stderr)
        sys.stdout.write(payload.decode())
    return EXIT_OK


def _status_exit(status: str, feasible=None) -> int:
    if status == STATUS_OPTIMAL:
        if feasible is False:
            return EXIT_INFEASIBLE
        return EXIT_OK
    if status == STATUS_INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_NUMERICAL


def cmd_solve(args) -> int:
    cfg = _apply_overrides(_load_config(args.config), args)
    built = build_problem(cfg, log=_completion_log(args))
    problem = _assemble_problem(built)
    sol = solve(problem, solver_options(cfg, args.tolerance))
    if args.format == "json":
        print(solution_to_json(sol))
        return _status_exit(sol.status, sol.feasible)
    print(f"status: {sol.status}")
    if built.objective is None:
        verdict = {True: "feasible", False: "infeasible"}.get(
            sol.feasible, "undetermined")
        print(f"feasibility: {verdict}")
    elif sol.objective is not None:
        sense = "maximum" if built.maximize else "minimum"
        print(f"{sense}: {sol.objective:.10g}")
    if sol.iterations:
        print(f"iterations: {sol.iterations}")
    if sol.gap == sol.gap:
        print(f"duality gap: {sol.gap:.3e}")
    if sol.status not in (STATUS_OPTIMAL, STATUS_INFEASIBLE) and sol.message:
        print(f"note: {sol.message}")
    return _status_exit(sol.status, sol.feasible)


# -- example runners ----------------------------------------------------

def _solve_value(cfg: dict, tolerance: float | None = None) -> float:
    built = build_problem(cfg)
    problem = _assemble_problem(built)
    sol = solve(problem, solver_options(cfg, tolerance))
    if sol.status != STATUS_OPTIMAL or sol.objective is None:
        raise RuntimeError(f"solver failed: {sol.status} ({sol.message})")
    return sol.objective


def _solve_feasible(cfg: dict, tolerance: float | None = None) -> bool:
    built = build_problem(cfg)
    problem = _assemble_problem(built)
    sol = solve(problem, solver_options(cfg, tolerance))
    if sol.feasible is None:
        raise RuntimeError(f"solver failed: {sol.status} ({sol.message})")
    return sol.feasible


def _run_chsh(args) -> int:
    cfg = _apply_overrides(example_config("chsh"), args)
    lo = _solve_value(cfg, args.tolerance)
    cfg_max = dict(cfg, maximize=True)
    hi = _solve_value(cfg_max, args.tolerance)
    print(f"chsh level {cfg.get('level', 1)} minimum: {lo:.4f}")
    print(f"chsh level {cfg.get('level', 1)} maximum: {hi:.4f}")
    print(f"2*sqrt(2) = {2 * np.sqrt(2):.10f}")
    return EXIT_OK


def _run_i3322(args) -> int:
    cfg = _apply_overrides(example_config("i3322"), args)
    val = _solve_value(cfg, args.tolerance)
    print(f"i3322 level {cfg.get('level', 1)} maximum: {val:.6f}")
    return EXIT_OK


def _run_cglmp(args) -> int:
    cfg = _apply_overrides(example_config("cglmp"), args)
    val = _solve_value(cfg, args.tolerance)
    print(f"cglmp level {cfg.get('level', 2)} maximum: {val:.6f}")
    print(f"(sqrt(33) - 3) / 9 = {(np.sqrt(33) - 3) / 9:.6f}")
    return EXIT_OK


def _run_pna(args) -> int:
    cfg = _apply_overrides(example_config("pna"), args)
    val = _solve_value(cfg, args.tolerance)
    print(f"pna level {cfg.get('level', 2)} minimum: {val:.6f}")
    return EXIT_OK


def _run_heisenberg(args) -> int:
    cfg = _apply_overrides(example_config("heisenberg"), args)
    lower = _solve_value(cfg, args.tolerance)
    upper_cfg = dict(cfg, optimality=True, maximize=True)
    upper = _solve_value(upper_cfg, args.tolerance)
    n, j = cfg["qubits"], cfg["hamiltonian"]["heisenberg"]["coupling"]
    print(f"heisenberg ring, {n} qubits, coupling {j}:")
    print(f"ground energy lower bound: {lower:.6f}")
    print(f"ground energy upper bound: {upper:.6f}")
    return EXIT_OK


def _run_triangle(args) -> int:
    cfg = _apply_overrides(example_config("triangle"), args)
    flat = dict(cfg, inflation=1, level=3)
    feasible_flat = _solve_feasible(flat, args.tolerance)
    feasible_inflated = _solve_feasible(cfg, args.tolerance)
    print("target distribution: P(000) = P(111) = 1/2 on the triangle")
    print(f"uninflated test: "
          f"{'feasible' if feasible_flat else 'infeasible'}")
    print(f"inflation level {cfg['inflation']}: "
          f"{'feasible' if feasible_inflated else 'infeasible'}")
    return EXIT_OK


def _run_chsh_symmetric(args) -> int:
    cfg = _apply_overrides(example_config("chsh_symmetric"), args)
    built = build_problem(cfg)
    for note in built.notes:
        print(note)
    problem = _assemble_problem(built)
    sol = solve(problem, solver_options(cfg, args.tolerance))
    if sol.status != STATUS_OPTIMAL or sol.objective is None:
        raise RuntimeError(f"solver failed: {sol.status} ({sol.message})")
    print(f"symmetry-reduced chsh maximum: {sol.objective:.4f}")
    return EXIT_OK


def _run_chsh_imported(args) -> int:
    cfg = _apply_overrides(example_config("chsh_imported"), args)
    built = build_problem(cfg)
    for note in built.notes:
        print(note)
    val = _solve_value(cfg, args.tolerance)
    print(f"imported chsh minimum: {val:.4f}")
    return EXIT_OK


EXAMPLE_RUNNERS = {
    "chsh": _run_chsh,
    "i3322": _run_i3322,
    "cglmp": _run_cglmp,
    "pna": _run_pna,
    "heisenberg": _run_heisenberg,
    "triangle": _run_triangle,
    "chsh_symmetric": _run_chsh_symmetric,
    "chsh_imported": _run_chsh_imported,
}


def cmd_example(args) -> int:
    if args.show_config:
        print(render_config(example_config(args.name)))
        return EXIT_OK
    return EXAMPLE_RUNNERS[args.name](args)


# -- benchmarking -------------------------------------------------------

def _parse_levels(text: str) -> list[int]:
    levels: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            lo, hi = part.split(":", 1)
            try:
                lo_i, hi_i = int(lo), int(hi)
            except ValueError:
                raise SchemaError("levels", f"bad range {part!r}")
            _require(lo_i <= hi_i, "levels", f"empty range {part!r}")
            levels.extend(range(lo_i, hi_i + 1))
        else:
            try:
                levels.append(int(part))
            except ValueError:
                raise SchemaError("levels", f"bad level {part!r}")
    _require(all(v >= 0 for v in levels), "levels",
             "levels cannot be negative")
    return levels


def cmd_bench(args) -> int:
    cfg = _apply_overrides(_load_config(args.config), args)
    repeats = args.repeats
    _require(repeats >= 3, "repeats",
             "at least 3 repeats needed to trim the fastest and slowest")
    if args.levels:
        levels = _parse_levels(args.levels)
    else:
        levels = [cfg.get("level", 1)]
    print(f"set-up timing, mean of {repeats} runs with the fastest "
          "and slowest dropped (solver excluded)")
    print(f"{'level':>5}  {'dimensions':>12}  {'variables':>9}  "
          f"{'mean (s)':>10}")
    for level in levels:
        run_cfg = dict(cfg, level=level)
        times = []
        dims = ""
        nvars = 0
        for _ in range(repeats):
            t0 = time.perf_counter()
            built = build_problem(run_cfg)
            problem = _assemble_problem(built)
            times.append(time.perf_counter() - t0)
            dims = ",".join(str(m.dimension) for m in built.matrices)
            nvars = problem.layout.count
        trimmed = sorted(times)[1:-1]
        mean = sum(trimmed) / len(trimmed)
        print(f"{level:>5}  {dims:>12}  {nvars:>9}  {mean:>10.4f}")
    return EXIT_OK


# -- argument parsing ---------------------------------------------------

def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--level", type=int, default=None,
                     help="override the config's moment matrix level")
    sub.add_argument("--neighbours", type=int, default=None,
                     help="restrict spin words to m-neighbour supports")
    sub.add_argument("--real-only", action="store_true",
                     help="drop imaginary basis slots when assembling")
    sub.add_argument("--threads", type=int, default=_default_threads(),
                     help="worker count pin; execution is single-threaded "
                          "and deterministic at any setting "
                          f"(default from ${THREADS_ENV})")
    sub.add_argument("--tolerance", type=float, default=None,
                     help="solver convergence tolerance")
    sub.add_argument("--max-new-rules", type=int, default=None,
                     help="cap on rules added by Knuth-Bendix completion")
    sub.add_argument("--log-completion", action="store_true",
                     help="trace Knuth-Bendix completion on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="momentsdp",
        description="Moment-matrix relaxations of operator optimization "
                    "problems, solved or exported as SDPs.")
    commands = parser.add_subparsers(dest="command")

    describe = commands.add_parser(
        "describe", help="print alphabet, dictionary, symbols and matrices")
    describe.add_argument("config", help="config file or example name")
    _add_common(describe)
    describe.set_defaults(func=cmd_describe)

    generate = commands.add_parser(
        "generate", help="assemble and export an SDP")
    generate.add_argument("config", help="config file or example name")
    generate.add_argument("--format", choices=("sdpa", "json"),
                          default="sdpa", help="export format")
    generate.add_argument("--out", default=None,
                          help="output path (stdout when omitted)")
    _add_common(generate)
    generate.set_defaults(func=cmd_generate)

    solve_p = commands.add_parser(
        "solve", help="assemble and solve with the embedded solver")
    solve_p.add_argument("config", help="config file or example name")
    solve_p.add_argument("--format", choices=("text", "json"),
                         default="text", help="report format")
    _add_common(solve_p)
    solve_p.set_defaults(func=cmd_solve)

    example = commands.add_parser(
        "example", help="run a built-in worked example")
    example.add_argument("name", choices=sorted(EXAMPLE_CONFIGS),
                         help="example name")
    example.add_argument("--show-config", action="store_true",
                         help="print the example's config instead of "
                              "running it")
    _add_common(example)
    example.set_defaults(func=cmd_example)

    bench = commands.add_parser(
        "bench", help="time problem set-up (solver excluded)")
    bench.add_argument("config", help="config file or example name")
    bench.add_argument("--repeats", type=int, default=5,
                       help="runs per level (fastest and slowest dropped)")
    bench.add_argument("--levels", default=None,
                       help="levels to sweep, e.g. 1:4 or 1,2,5")
    _add_common(bench)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"config error at {exc.path}: {exc.reason}", file=sys.stderr)
        return EXIT_USAGE
    except AssemblyError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InconsistencyError as exc:
        print(f"inconsistent constraints: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

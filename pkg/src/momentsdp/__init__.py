"""Moment-matrix relaxations of operator optimization problems.

Declarative scenarios (locality, algebraic, Pauli spin, causal
inflation, imported) generate symbolic moment and localizing matrices
over a shared symbol registry; substitution and symmetry machinery
shrink them; the bridge turns them into semidefinite programs for the
embedded interior-point solver or for export.
"""

from .algebraic import AlgebraicContext, AlgebraicScenario
from .imported import (ImportedScenario, MomentParseError, MomentToken,
                       parse_grid, parse_moment_string, render_moment_token)
from .inflation import InflationContext, InflationScenario
from .locality import LocalityContext, LocalityScenario
from .matrices import (BasisDecomposition, SymbolicMatrix,
                       anticommutator_matrix, commutator_matrix,
                       extended_matrix, localizing_matrix, matrix_sum,
                       moment_matrix)
from .moment_rules import (InconsistencyError, MomentRule, MomentRulebook,
                           complete_rulebook)
from .operators import OperatorPolynomial
from .pauli import (PauliContext, PauliScenario, energy_bound_problem,
                    heisenberg_hamiltonian)
from .rewrite import OperatorRule, OperatorRulebook, orient_rule
from .scenario import Scenario
from .sdp import (AssemblyError, SdpProblem, SdpSolution, assemble,
                  evaluate, problem_to_json, solution_to_json, solve,
                  solve_simple, write_sdpa)
from .solver import (SdpBlock, SolverOptions, SolverResult, feasibility_slack,
                     solve_sdp)
from .symbols import (IDENTITY_SYMBOL, ZERO_SYMBOL, MomentMonomial,
                      MomentPolynomial, SlotLayout, SymbolEntry,
                      SymbolRegistry)
from .symmetry import (ReductionMap, SymmetrizedScenario, SymmetryGroup,
                       dimino_generate, group_average, lift_representation,
                       lu_reduce)
from .words import (IDENTITY_WORD, ZERO_WORD, Context, Dictionary,
                    OperatorWord, shortlex_key, word_hash)

__version__ = "0.1.0"

__all__ = [
    "AlgebraicContext", "AlgebraicScenario", "AssemblyError",
    "BasisDecomposition", "Context", "Dictionary", "IDENTITY_SYMBOL",
    "ImportedScenario", "InconsistencyError", "InflationContext",
    "InflationScenario", "LocalityContext", "LocalityScenario",
    "MomentMonomial", "MomentParseError", "MomentPolynomial", "MomentRule",
    "MomentRulebook", "MomentToken", "OperatorPolynomial", "OperatorRule",
    "OperatorRulebook", "OperatorWord", "PauliContext", "PauliScenario",
    "ReductionMap", "Scenario", "SdpBlock", "SdpProblem", "SdpSolution",
    "SlotLayout", "SolverOptions", "SolverResult", "SymbolEntry",
    "SymbolRegistry", "SymbolicMatrix", "SymmetrizedScenario",
    "SymmetryGroup", "ZERO_SYMBOL", "anticommutator_matrix", "assemble",
    "commutator_matrix", "complete_rulebook", "dimino_generate",
    "energy_bound_problem", "evaluate", "extended_matrix",
    "feasibility_slack", "group_average", "heisenberg_hamiltonian",
    "lift_representation", "localizing_matrix", "lu_reduce", "matrix_sum",
    "moment_matrix", "orient_rule", "parse_grid", "parse_moment_string",
    "problem_to_json", "render_moment_token", "shortlex_key",
    "solution_to_json", "solve", "solve_sdp", "solve_simple", "word_hash",
    "write_sdpa", "IDENTITY_WORD", "ZERO_WORD", "__version__",
]

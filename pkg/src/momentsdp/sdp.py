"""Bridge between symbolic moment objects and numeric semidefinite programs.

An assembled problem is linear in the registry's real slots: every PSD
block is a stack of coefficient matrices aligned with the slot layout,
the objective and scalar constraints are linear functionals over the
same slots, and the normalization constraint pins the identity slot to
one.  Solving uses the embedded interior-point solver; exporting writes
SDPA sparse files or a JSON dump for external tooling.

Complex Hermitian blocks are handled through the real embedding
[[Re, -Im], [Im, Re]], applied only when a block actually carries
imaginary data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .matrices import BasisDecomposition, SymbolicMatrix
from .solver import (SdpBlock, SolverError, SolverOptions, SolverResult,
                     STATUS_INFEASIBLE, STATUS_ITERATIONS, STATUS_NUMERICAL,
                     STATUS_OPTIMAL, STATUS_UNBOUNDED, feasibility_slack,
                     solve_sdp)
from .symbols import (IDENTITY_SYMBOL, MomentPolynomial, SlotLayout,
                      SymbolRegistry)

__all__ = [
    "SdpProblem", "SdpSolution", "assemble", "solve", "solve_simple",
    "evaluate", "write_sdpa", "problem_to_json", "solution_to_json",
    "SolverOptions", "SolverError",
]


class AssemblyError(ValueError):
    pass


def _functionals(poly: MomentPolynomial,
                 layout: SlotLayout) -> tuple[np.ndarray, np.ndarray]:
    """Real and imaginary part of a moment polynomial as slot functionals."""
    re = np.zeros(layout.count)
    im = np.zeros(layout.count)
    for t in poly.terms:
        c = complex(t.coeff)
        sign = -1.0 if t.conjugated else 1.0
        i_re = layout.real_index.get(t.symbol)
        i_im = layout.imag_index.get(t.symbol)
        if i_re is None and i_im is None:
            raise AssemblyError(
                f"moment {poly.registry.symbol_name(t.symbol)} has no slot "
                "in this problem")
        if i_re is not None:
            re[i_re] += c.real
            im[i_re] += c.imag
        if i_im is not None:
            re[i_im] += -sign * c.imag
            im[i_im] += sign * c.real
    return re, im


def _embed(mat: np.ndarray) -> np.ndarray:
    """Real symmetric embedding of a Hermitian matrix."""
    a, b = mat.real, mat.imag
    return np.block([[a, -b], [b, a]])


@dataclass
class SdpProblem:
    """Standard-form SDP over the registry's real slots."""

    registry: SymbolRegistry
    layout: SlotLayout
    objective: np.ndarray | None            # linear functional, None = feasibility
    objective_constant: float
    maximize: bool
    psd_blocks: list[BasisDecomposition]
    block_names: list[str]
    equalities: list[tuple[np.ndarray, float]]
    inequalities: list[tuple[np.ndarray, float]]
    normalized: bool

    @property
    def real_count(self) -> int:
        return len(self.layout.real_symbols)

    @property
    def imag_count(self) -> int:
        return len(self.layout.imag_symbols)

    def numeric_blocks(self) -> list[tuple[str, np.ndarray, np.ndarray]]:
        """(name, F0, coefficient stack) per block, complex pre-embedded."""
        out = []
        n = self.layout.count
        for name, dec in zip(self.block_names, self.psd_blocks):
            mats = dec.slot_matrices(self.layout)
            d = dec.matrix.dimension
            complex_data = any(np.abs(np.asarray(m).imag).max() > 1e-14
                               for m in mats if np.asarray(m).size)
            if complex_data:
                stack = np.stack([_embed(np.asarray(m, dtype=complex))
                                  for m in mats]) if mats else \
                    np.zeros((0, 2 * d, 2 * d))
                F0 = np.zeros((2 * d, 2 * d))
            else:
                stack = np.stack([np.asarray(m).real for m in mats]) \
                    if mats else np.zeros((0, d, d))
                F0 = np.zeros((d, d))
            out.append((name, F0, stack))
        return out

    def numeric_equalities(self) -> tuple[np.ndarray, np.ndarray] | None:
        rows = []
        rhs = []
        if self.normalized:
            e = np.zeros(self.layout.count)
            e[self.layout.real_index[IDENTITY_SYMBOL]] = 1.0
            rows.append(e)
            rhs.append(1.0)
        for vec, val in self.equalities:
            rows.append(vec)
            rhs.append(val)
        if not rows:
            return None
        return np.array(rows), np.array(rhs)


@dataclass
class SdpSolution:
    """Numeric outcome of a solve, tied to the problem's slot layout."""

    status: str
    objective: float | None
    x: np.ndarray | None
    layout: SlotLayout
    registry: SymbolRegistry
    feasible: bool | None = None            # set by feasibility-mode solves
    gap: float = float("nan")
    iterations: int = 0
    primal_residuals: tuple[float, ...] = ()
    dual_residual: float = float("nan")
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OPTIMAL

    def moment(self, symbol: int) -> complex:
        if self.x is None:
            raise ValueError("solution carries no values")
        return self.layout.moment_value(symbol, self.x)

    def moments(self) -> dict[int, complex]:
        out = {}
        for s in self.layout.real_symbols:
            out[s] = self.moment(s)
        for s in self.layout.imag_symbols:
            out.setdefault(s, self.moment(s))
        return out


def assemble(objective: MomentPolynomial | None,
             psd: Sequence[SymbolicMatrix | BasisDecomposition],
             constraints: Iterable = (),
             *, real_only: bool = False, normalize: bool = True,
             maximize: bool = False,
             registry: SymbolRegistry | None = None) -> SdpProblem:
    """Build a standard-form problem; rulebooks are applied beforehand.

    ``constraints`` holds moment polynomials: a bare polynomial asserts
    equality with zero, a ``(polynomial, ">=")`` pair a one-sided bound.
    """
    psd = list(psd)
    decs = []
    names = []
    for k, m in enumerate(psd):
        if isinstance(m, SymbolicMatrix):
            decs.append(m.decompose())
            names.append(m.name or f"block{k + 1}")
        elif isinstance(m, BasisDecomposition):
            decs.append(m)
            names.append(m.matrix.name or f"block{k + 1}")
        else:
            raise AssemblyError("psd entries must be symbolic matrices")
    if registry is None:
        if objective is not None:
            registry = objective.registry
        elif decs:
            registry = decs[0].matrix.registry
        else:
            raise AssemblyError("cannot infer the registry")
    for dec in decs:
        if dec.matrix.registry is not registry:
            raise AssemblyError("all objects must share one scenario")
    if objective is not None and objective.registry is not registry:
        raise AssemblyError("all objects must share one scenario")

    layout = registry.slot_layout(real_only=real_only)

    vec = None
    if objective is not None:
        vec, im = _functionals(objective, layout)
        if np.abs(im).max() > 1e-9:
            raise AssemblyError("objective must be real-valued")

    eqs: list[tuple[np.ndarray, float]] = []
    ineqs: list[tuple[np.ndarray, float]] = []
    for item in constraints:
        if isinstance(item, tuple):
            poly, rel = item
        else:
            poly, rel = item, "=="
        if poly.registry is not registry:
            raise AssemblyError("all objects must share one scenario")
        re, im = _functionals(poly, layout)
        if rel == "==":
            if np.abs(re).max() > 1e-12:
                eqs.append((re, 0.0))
            if np.abs(im).max() > 1e-12:
                eqs.append((im, 0.0))
        elif rel == ">=":
            if np.abs(im).max() > 1e-9:
                raise AssemblyError("inequality constraints must be real-valued")
            ineqs.append((re, 0.0))
        else:
            raise AssemblyError(f"unknown constraint relation {rel!r}")

    return SdpProblem(registry, layout, vec, 0.0, maximize, decs, names,
                      eqs, ineqs, normalize)


def _trivial_solve(problem: SdpProblem,
                   opts: SolverOptions) -> SdpSolution:
    """No PSD blocks and no inequalities: equalities decide everything."""
    eq = problem.numeric_equalities()
    n = problem.layout.count
    if eq is None:
        x = np.zeros(n)
    else:
        E, f = eq
        x, *_ = np.linalg.lstsq(E, f, rcond=None)
        if np.linalg.norm(E @ x - f) > 1e-9 * (1 + np.linalg.norm(f)):
            return SdpSolution(STATUS_INFEASIBLE, None, None, problem.layout,
                               problem.registry, feasible=False,
                               message="inconsistent equality constraints")
    if problem.objective is None:
        return SdpSolution(STATUS_OPTIMAL, 1.0, x, problem.layout,
                           problem.registry, feasible=True, gap=0.0)
    b = problem.objective
    if eq is not None:
        # bounded only when the objective is constant on the feasible set
        _, s, vt = np.linalg.svd(np.atleast_2d(eq[0]), full_matrices=True)
        rank = int(np.sum(s > 1e-12 * (s[0] if s.size else 1)))
        Zt = vt[rank:]
        free = float(np.abs(Zt @ b).max()) if Zt.size else 0.0
    else:
        free = float(np.abs(b).max())
    if free > 1e-12:
        return SdpSolution(STATUS_UNBOUNDED, None, None, problem.layout,
                           problem.registry,
                           message="objective unbounded without constraints")
    return SdpSolution(STATUS_OPTIMAL, float(b @ x), x, problem.layout,
                       problem.registry, gap=0.0)


def solve(problem: SdpProblem,
          options: SolverOptions | None = None) -> SdpSolution:
    """Solve with the embedded interior-point method.

    With no objective the solve runs in feasibility mode: the uniform
    slack t is maximized subject to every block dominating t times the
    identity, and the problem is reported feasible iff t* clears the
    margin.
    """
    opts = options or SolverOptions()
    named = problem.numeric_blocks()
    blocks = [SdpBlock(F0, Fs) for _, F0, Fs in named]
    n = problem.layout.count
    for vec, val in problem.inequalities:
        F0 = np.array([[-val]])
        Fs = vec.reshape(n, 1, 1)
        blocks.append(SdpBlock(F0, Fs))
    if not blocks:
        return _trivial_solve(problem, opts)
    eq = problem.numeric_equalities()

    if problem.objective is None:
        res = feasibility_slack(blocks, eq, opts)
        feasible = res.status in (STATUS_OPTIMAL, STATUS_ITERATIONS) \
            and res.objective is not None \
            and res.objective >= -opts.feasibility_margin
        if res.status in (STATUS_OPTIMAL, STATUS_ITERATIONS):
            status = STATUS_OPTIMAL if feasible else STATUS_INFEASIBLE
        else:
            status = res.status
        sol = SdpSolution(status, res.objective, res.variables,
                          problem.layout, problem.registry,
                          feasible=feasible, gap=res.gap,
                          iterations=res.iterations,
                          dual_residual=res.dual_residual,
                          message=res.message)
    else:
        res = solve_sdp(blocks, problem.objective, eq,
                        maximize=problem.maximize, options=opts)
        obj = None
        if res.objective is not None:
            obj = res.objective + problem.objective_constant
        sol = SdpSolution(res.status, obj, res.variables, problem.layout,
                          problem.registry, gap=res.gap,
                          iterations=res.iterations,
                          dual_residual=res.dual_residual,
                          message=res.message)
    if sol.x is not None:
        resid = []
        for _, F0, Fs in named:
            if Fs.shape[0]:
                M = F0 + np.tensordot(sol.x, Fs, axes=1)
            else:
                M = F0
            lam = float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])
            resid.append(max(0.0, -lam))
        sol.primal_residuals = tuple(resid)
    return sol


def evaluate(obj, solution: SdpSolution):
    """Numeric value of a symbolic object at a solution."""
    if solution.x is None:
        raise ValueError("solution carries no values")
    if isinstance(obj, MomentPolynomial):
        _check_coverage(obj.symbols(), obj.registry, solution.layout)
        return obj.evaluate_slots(solution.layout, solution.x)
    if isinstance(obj, BasisDecomposition):
        obj = obj.matrix
    if isinstance(obj, SymbolicMatrix):
        _check_coverage(obj.symbols(), obj.registry, solution.layout)
        values = {s: solution.layout.moment_value(s, solution.x)
                  for s in obj.symbols()
                  if s in solution.layout.real_index
                  or s in solution.layout.imag_index}
        values.setdefault(IDENTITY_SYMBOL, 1.0)
        return obj.evaluate(values)
    raise TypeError(f"cannot evaluate {type(obj).__name__}")


def _check_coverage(symbols, registry, layout):
    for s in symbols:
        if s == IDENTITY_SYMBOL:
            continue
        if s not in layout.real_index and s not in layout.imag_index:
            raise ValueError(
                f"solution does not cover moment {registry.symbol_name(s)}")


def solve_simple(matrices, objective: MomentPolynomial | None = None,
                 *, maximize: bool = False, real_only: bool = False,
                 constraints: Iterable = (), normalize: bool = True,
                 options: SolverOptions | None = None):
    """Sugar over assemble + solve.

    With an objective, returns the optimum (minimized by default);
    without one, returns a feasibility boolean.
    """
    if isinstance(matrices, (SymbolicMatrix, BasisDecomposition)):
        matrices = [matrices]
    problem = assemble(objective, matrices, constraints,
                       real_only=real_only, normalize=normalize,
                       maximize=maximize)
    sol = solve(problem, options)
    if objective is None:
        if sol.feasible is None:
            raise RuntimeError(f"solver failed: {sol.status} {sol.message}")
        if sol.status not in (STATUS_OPTIMAL, STATUS_INFEASIBLE):
            raise RuntimeError(f"solver failed: {sol.status} {sol.message}")
        return sol.feasible
    if sol.status != STATUS_OPTIMAL:
        raise RuntimeError(f"solver failed: {sol.status} {sol.message}")
    return sol.objective


# -- export -------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_sdpa(problem: SdpProblem, sink=None) -> bytes:
    """SDPA sparse (.dat-s) export, minimization sense, deterministic.

    Equalities (the normalization included) become paired opposing
    entries of a trailing diagonal block; complex blocks are written
    pre-embedded.  A maximization objective is negated on export.
    """
    n = problem.layout.count
    named = problem.numeric_blocks()
    eq = problem.numeric_equalities()
    eq_rows = [] if eq is None else list(zip(eq[0], eq[1]))
    diag = 2 * len(eq_rows) + len(problem.inequalities)

    dims = [Fs.shape[1] if Fs.shape[0] else F0.shape[0]
            for _, F0, Fs in named]
    if diag:
        dims.append(-diag)

    if problem.objective is None:
        c = np.zeros(n)
    elif problem.maximize:
        c = -problem.objective
    else:
        c = problem.objective.copy()

    lines = ['"momentsdp export']
    lines.append(str(n))
    lines.append(str(len(dims)))
    lines.append(" ".join(str(d) for d in dims))
    lines.append(" ".join(_fmt(v) for v in c))

    # entry list per matno: 0 is the constant side, k the k-th variable
    entries: list[tuple[int, int, int, int, float]] = []
    diag_no = len(named) + 1
    pos = 1
    for vec, val in eq_rows:
        # vec . x - val >= 0 and val - vec . x >= 0
        if val:
            entries.append((0, diag_no, pos, pos, val))
            entries.append((0, diag_no, pos + 1, pos + 1, -val))
        for k in range(n):
            if vec[k]:
                entries.append((k + 1, diag_no, pos, pos, vec[k]))
                entries.append((k + 1, diag_no, pos + 1, pos + 1, -vec[k]))
        pos += 2
    for vec, val in problem.inequalities:
        if val:
            entries.append((0, diag_no, pos, pos, val))
        for k in range(n):
            if vec[k]:
                entries.append((k + 1, diag_no, pos, pos, vec[k]))
        pos += 1
    for bno, (_, F0, Fs) in enumerate(named, start=1):
        d = F0.shape[0]
        for i in range(d):
            for j in range(i, d):
                if F0[i, j]:
                    entries.append((0, bno, i + 1, j + 1, -F0[i, j]))
        for k in range(Fs.shape[0]):
            Fk = Fs[k]
            for i in range(d):
                for j in range(i, d):
                    if Fk[i, j]:
                        entries.append((k + 1, bno, i + 1, j + 1, Fk[i, j]))

    entries.sort(key=lambda e: (e[0], e[1], e[2], e[3]))
    for mat, blk, i, j, v in entries:
        lines.append(f"{mat} {blk} {i} {j} {_fmt(v)}")
    data = ("\n".join(lines) + "\n").encode()
    if sink is not None:
        if hasattr(sink, "write"):
            sink.write(data)
        else:
            with open(sink, "wb") as fh:
                fh.write(data)
    return data


def _slot_names(problem: SdpProblem) -> dict[str, list[str]]:
    reg = problem.registry
    return {
        "real": [reg.symbol_name(s) for s in problem.layout.real_symbols],
        "imag": [reg.symbol_name(s) for s in problem.layout.imag_symbols],
    }


def problem_to_json(problem: SdpProblem) -> str:
    """Coordinate-form JSON dump of an assembled problem."""
    blocks = []
    for name, F0, Fs in problem.numeric_blocks():
        coords = []
        d = F0.shape[0]
        for i in range(d):
            for j in range(d):
                if F0[i, j]:
                    coords.append([0, i, j, F0[i, j]])
        for k in range(Fs.shape[0]):
            Fk = Fs[k]
            for i in range(d):
                for j in range(d):
                    if Fk[i, j]:
                        coords.append([k + 1, i, j, Fk[i, j]])
        blocks.append({"name": name, "dimension": d, "entries": coords})
    doc = {
        "slots": _slot_names(problem),
        "maximize": problem.maximize,
        "objective": None if problem.objective is None
        else list(problem.objective),
        "objective_constant": problem.objective_constant,
        "normalized": problem.normalized,
        "equalities": [{"coefficients": list(v), "value": val}
                       for v, val in problem.equalities],
        "inequalities": [{"coefficients": list(v), "value": val}
                         for v, val in problem.inequalities],
        "blocks": blocks,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def solution_to_json(solution: SdpSolution) -> str:
    reg = solution.registry
    moments = None
    if solution.x is not None:
        moments = {reg.symbol_name(s): [v.real, v.imag]
                   for s, v in sorted(solution.moments().items())}
    doc = {
        "status": solution.status,
        "objective": solution.objective,
        "feasible": solution.feasible,
        "gap": None if solution.gap != solution.gap else solution.gap,
        "iterations": solution.iterations,
        "moments": moments,
    }
    return json.dumps(doc, indent=2, sort_keys=True)

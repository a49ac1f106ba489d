"""Embedded primal-dual interior-point solver for small dense SDPs.

Problems arrive in the form

    maximize  b . y
    s.t.      F0 + sum_i y_i F_i  >= 0   (one constraint per PSD block)
              E y = f                     (optional equalities)

with real symmetric matrices.  Equalities are eliminated through a
null-space parametrization y = y0 + Z t before the interior-point loop,
so the core iteration only sees the semidefinite constraints.  The
iteration is a Mehrotra-style predictor-corrector with the HKM search
direction and a dense Schur complement; everything is plain numpy and a
single solve is deterministic and single-threaded by construction.

Intended for desk-scale problems (block dimensions up to a few hundred);
larger blocks should be exported instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_ITERATIONS = "iteration_limit"
STATUS_NUMERICAL = "numerical_failure"


@dataclass
class SdpBlock:
    """One PSD constraint F0 + sum_i y_i F_i >= 0."""

    constant: np.ndarray        # (d, d)
    coefficients: np.ndarray    # (n, d, d)

    def __post_init__(self):
        self.constant = np.asarray(self.constant, dtype=float)
        self.coefficients = np.asarray(self.coefficients, dtype=float)
        d = self.constant.shape[0]
        if self.constant.shape != (d, d):
            raise ValueError("block constant must be square")
        if self.coefficients.ndim != 3 or self.coefficients.shape[1:] != (d, d):
            raise ValueError("coefficient stack shape mismatch")
        # enforce exact symmetry; callers build from Hermitian data
        self.constant = 0.5 * (self.constant + self.constant.T)
        self.coefficients = 0.5 * (self.coefficients
                                   + self.coefficients.transpose(0, 2, 1))

    @property
    def dimension(self) -> int:
        return self.constant.shape[0]


@dataclass
class SolverOptions:
    tolerance: float = 1e-8
    max_iterations: int = 200
    step_fraction: float = 0.98
    block_cap: int = 350
    feasibility_margin: float = 1e-7


@dataclass
class SolverResult:
    status: str
    objective: float | None
    variables: np.ndarray | None
    iterations: int = 0
    gap: float = float("nan")
    bound: float | None = None          # objective seen from the other side
    primal_residual: float = float("nan")
    dual_residual: float = float("nan")
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OPTIMAL


class SolverError(RuntimeError):
    pass


def _null_space(E: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    u, s, vt = np.linalg.svd(E, full_matrices=True)
    tol = max(E.shape) * (s[0] if s.size else 0.0) * rtol
    rank = int(np.sum(s > tol))
    return vt[rank:].T


def _eliminate_equalities(blocks: list[SdpBlock], b: np.ndarray,
                          E: np.ndarray, f: np.ndarray):
    """Substitute y = y0 + Z t; returns reduced problem plus the recovery."""
    y0, *_ = np.linalg.lstsq(E, f, rcond=None)
    if E.size and np.linalg.norm(E @ y0 - f) > 1e-9 * (1 + np.linalg.norm(f)):
        return None
    Z = _null_space(E)
    reduced = []
    for blk in blocks:
        const = blk.constant + np.tensordot(y0, blk.coefficients, axes=1)
        coeffs = np.tensordot(Z.T, blk.coefficients, axes=([1], [0]))
        reduced.append(SdpBlock(const, coeffs))
    return reduced, Z.T @ b, float(b @ y0), y0, Z


def _max_step(P: np.ndarray, D: np.ndarray) -> float:
    """Largest a with P + a D >= 0, for P > 0 (inf -> returned as large)."""
    L = np.linalg.cholesky(P)
    W = np.linalg.solve(L, np.linalg.solve(L, D).T).T
    lam = float(np.linalg.eigvalsh(0.5 * (W + W.T))[0])
    if lam >= -1e-14:
        return 1e6
    return -1.0 / lam


def solve_sdp(blocks: Sequence[SdpBlock], objective: Sequence[float],
              equalities: tuple[np.ndarray, np.ndarray] | None = None,
              maximize: bool = True,
              options: SolverOptions | None = None) -> SolverResult:
    """Solve max (or min) objective . y subject to the block constraints."""
    opts = options or SolverOptions()
    b_full = np.asarray(objective, dtype=float)
    blocks = [blk if isinstance(blk, SdpBlock) else SdpBlock(*blk)
              for blk in blocks]
    if not blocks:
        raise SolverError("at least one PSD block required")
    n_full = b_full.shape[0]
    for blk in blocks:
        if blk.coefficients.shape[0] != n_full:
            raise SolverError("blocks disagree on the variable count")
        if blk.dimension > opts.block_cap:
            raise SolverError(
                f"block dimension {blk.dimension} exceeds the embedded cap "
                f"{opts.block_cap}; export the problem to an external solver")
    if not maximize:
        flipped = solve_sdp(blocks, -b_full, equalities, True, opts)
        if flipped.objective is not None:
            flipped.objective = -flipped.objective
        if flipped.bound is not None:
            flipped.bound = -flipped.bound
        return flipped

    offset = 0.0
    y0 = np.zeros(n_full)
    Z = np.eye(n_full)
    if equalities is not None:
        E = np.atleast_2d(np.asarray(equalities[0], dtype=float))
        f = np.atleast_1d(np.asarray(equalities[1], dtype=float))
        outcome = _eliminate_equalities(blocks, b_full, E, f)
        if outcome is None:
            return SolverResult(STATUS_INFEASIBLE, None, None,
                                message="inconsistent equality constraints")
        blocks, b, offset, y0, Z = outcome
    else:
        b = b_full

    n = b.shape[0]
    if n == 0:
        lam_min = min(float(np.linalg.eigvalsh(blk.constant)[0])
                      for blk in blocks)
        if lam_min < -1e-9:
            return SolverResult(STATUS_INFEASIBLE, None, None,
                                message="constant constraints not PSD")
        return SolverResult(STATUS_OPTIMAL, offset, y0, gap=0.0,
                            bound=offset, primal_residual=0.0,
                            dual_residual=0.0)

    # drop variables that touch no block; they cannot move the constraints
    touched = np.zeros(n, dtype=bool)
    for blk in blocks:
        touched |= np.abs(blk.coefficients).reshape(n, -1).max(axis=1) > 0
    if not touched.all():
        if np.abs(b[~touched]).max() > 0:
            return SolverResult(STATUS_UNBOUNDED, None, None,
                                message="objective on an unconstrained variable")
        keep = np.where(touched)[0]
        sub = [SdpBlock(blk.constant, blk.coefficients[keep])
               for blk in blocks]
        inner = solve_sdp(sub, b[keep], None, True, opts)
        if inner.variables is not None:
            t_full = np.zeros(n)
            t_full[keep] = inner.variables
            inner.variables = y0 + Z @ t_full
            inner.objective = (inner.objective or 0.0) + offset
            if inner.bound is not None:
                inner.bound += offset
        return inner

    F0 = [blk.constant for blk in blocks]
    Fs = [blk.coefficients for blk in blocks]
    dims = [blk.dimension for blk in blocks]
    total_dim = sum(dims)

    scale = max([1.0, float(np.abs(b).max() if b.size else 0.0)]
                + [float(np.abs(F).max()) for F in F0]
                + [float(np.abs(F).max()) for F in Fs])
    X = [scale * np.eye(d) for d in dims]
    S = [scale * np.eye(d) for d in dims]
    y = np.zeros(n)

    best = None
    status = STATUS_ITERATIONS
    message = ""
    it = 0
    for it in range(1, opts.max_iterations + 1):
        try:
            Sinv = []
            for Sb in S:
                L = np.linalg.cholesky(Sb)
                Linv = np.linalg.solve(L, np.eye(L.shape[0]))
                Sinv.append(Linv.T @ Linv)
        except np.linalg.LinAlgError:
            status, message = STATUS_NUMERICAL, "slack lost definiteness"
            break

        # residuals
        mu = sum(float(np.tensordot(Xb, Sb)) for Xb, Sb in zip(X, S)) / total_dim
        rp = b + np.array([sum(float(np.tensordot(F[i], Xb))
                               for F, Xb in zip(Fs, X)) for i in range(n)])
        Rd = [F0b + np.tensordot(y, Fb, axes=1) - Sb
              for F0b, Fb, Sb in zip(F0, Fs, S)]

        gap = sum(float(np.tensordot(Xb, Sb)) for Xb, Sb in zip(X, S))
        dobj = float(b @ y)
        pobj = sum(float(np.tensordot(F0b, Xb)) for F0b, Xb in zip(F0, X))
        rel_gap = gap / (1.0 + abs(dobj) + abs(pobj))
        rp_rel = float(np.abs(rp).max()) / (1.0 + float(np.abs(b).max()))
        rd_rel = max(float(np.abs(R).max()) for R in Rd) / (1.0 + scale)

        best = (dobj, pobj, rel_gap, rp_rel, rd_rel)
        if rel_gap <= opts.tolerance and rp_rel <= 100 * opts.tolerance \
                and rd_rel <= 100 * opts.tolerance:
            status = STATUS_OPTIMAL
            break

        # Schur complement M_ij = sum_blocks tr(Sinv F_i X F_j)
        M = np.zeros((n, n))
        rhs_base = b.copy()
        for Fb, Si, Xb, R in zip(Fs, Sinv, X, Rd):
            left = np.matmul(Si, np.matmul(Fb, Xb))
            M += left.reshape(n, -1) @ Fb.reshape(n, -1).T
            rhs_base -= np.tensordot(Fb, Si @ R @ Xb, axes=([1, 2], [0, 1]))
        M = 0.5 * (M + M.T)
        trFSi = np.array([sum(float(np.tensordot(F[i], Si))
                              for F, Si in zip(Fs, Sinv)) for i in range(n)])

        jitter = 0.0
        try:
            Mc = np.linalg.cholesky(M + jitter * np.eye(n))
        except np.linalg.LinAlgError:
            jitter = 1e-12 * (1 + float(np.trace(M)) / max(n, 1))
            for _ in range(8):
                try:
                    Mc = np.linalg.cholesky(M + jitter * np.eye(n))
                    break
                except np.linalg.LinAlgError:
                    jitter *= 100
            else:
                status, message = STATUS_NUMERICAL, "Schur factorization failed"
                break

        def schur_solve(r):
            z = np.linalg.solve(Mc, r)
            return np.linalg.solve(Mc.T, z)

        # predictor (affine scaling, sigma = 0)
        dy_aff = schur_solve(rhs_base)
        dS_aff = [R + np.tensordot(dy_aff, Fb, axes=1)
                  for R, Fb in zip(Rd, Fs)]
        dX_aff = []
        for Si, Xb, dSb in zip(Sinv, X, dS_aff):
            raw = -Xb - Si @ dSb @ Xb
            dX_aff.append(0.5 * (raw + raw.T))

        ap = min(1.0, min(opts.step_fraction * _max_step(Xb, dXb)
                          for Xb, dXb in zip(X, dX_aff)))
        ad = min(1.0, min(opts.step_fraction * _max_step(Sb, dSb)
                          for Sb, dSb in zip(S, dS_aff)))
        mu_aff = sum(float(np.tensordot(Xb + ap * dXb, Sb + ad * dSb))
                     for Xb, dXb, Sb, dSb
                     in zip(X, dX_aff, S, dS_aff)) / total_dim
        sigma = min(1.0, max(0.0, (mu_aff / mu)) ** 3)

        # corrector
        rhs = rhs_base + sigma * mu * trFSi
        for Fb, Si, dSb, dXb in zip(Fs, Sinv, dS_aff, dX_aff):
            corr = Si @ dSb @ dXb
            rhs -= np.tensordot(Fb, corr, axes=([1, 2], [0, 1]))
        dy = schur_solve(rhs)
        dS = [R + np.tensordot(dy, Fb, axes=1) for R, Fb in zip(Rd, Fs)]
        dX = []
        for Si, Xb, dSb, dSa, dXa in zip(Sinv, X, dS, dS_aff, dX_aff):
            raw = sigma * mu * Si - Xb - Si @ dSb @ Xb - Si @ dSa @ dXa
            dX.append(0.5 * (raw + raw.T))

        ap = min(1.0, min(opts.step_fraction * _max_step(Xb, dXb)
                          for Xb, dXb in zip(X, dX)))
        ad = min(1.0, min(opts.step_fraction * _max_step(Sb, dSb)
                          for Sb, dSb in zip(S, dS)))
        if ap < 1e-10 and ad < 1e-10:
            status, message = STATUS_NUMERICAL, "step length collapsed"
            break
        X = [Xb + ap * dXb for Xb, dXb in zip(X, dX)]
        S = [Sb + ad * dSb for Sb, dSb in zip(S, dS)]
        y = y + ad * dy

    if best is None:
        return SolverResult(STATUS_NUMERICAL, None, None, iterations=it,
                            message=message or "no iterate completed")
    dobj, pobj, rel_gap, rp_rel, rd_rel = best
    y_full = y0 + Z @ y
    result = SolverResult(status, dobj + offset, y_full, iterations=it,
                          gap=rel_gap, bound=pobj + offset,
                          primal_residual=rp_rel, dual_residual=rd_rel,
                          message=message)
    return result


def feasibility_slack(blocks: Sequence[SdpBlock],
                      equalities: tuple[np.ndarray, np.ndarray] | None = None,
                      options: SolverOptions | None = None) -> SolverResult:
    """Maximize a uniform slack t with every block >= t I (capped at 1).

    The returned result's objective is t*; the constraints are feasible
    exactly when t* clears the configured margin.
    """
    opts = options or SolverOptions()
    blocks = [blk if isinstance(blk, SdpBlock) else SdpBlock(*blk)
              for blk in blocks]
    if not blocks:
        raise SolverError("at least one PSD block required")
    n = blocks[0].coefficients.shape[0]
    ext = []
    for blk in blocks:
        d = blk.dimension
        coeffs = np.concatenate([blk.coefficients,
                                 -np.eye(d)[None]], axis=0)
        ext.append(SdpBlock(blk.constant, coeffs))
    cap = SdpBlock(np.array([[1.0]]),
                   np.concatenate([np.zeros((n, 1, 1)),
                                   [[[-1.0]]]], axis=0))
    ext.append(cap)
    b = np.zeros(n + 1)
    b[n] = 1.0
    eq = None
    if equalities is not None:
        E = np.atleast_2d(np.asarray(equalities[0], dtype=float))
        f = np.atleast_1d(np.asarray(equalities[1], dtype=float))
        eq = (np.hstack([E, np.zeros((E.shape[0], 1))]), f)
    result = solve_sdp(ext, b, eq, True, opts)
    if result.variables is not None:
        result.variables = result.variables[:n]
    return result


def is_feasible(result: SolverResult,
                options: SolverOptions | None = None) -> bool:
    """Interpret a feasibility_slack result."""
    opts = options or SolverOptions()
    if result.status not in (STATUS_OPTIMAL, STATUS_ITERATIONS):
        return False
    return result.objective is not None \
        and result.objective >= -opts.feasibility_margin

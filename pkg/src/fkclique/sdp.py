"""Numerical solver for SDPs with affine equality constraints, entrywise box
constraints, and linear or convex-quadratic objectives.

The method is operator splitting (ADMM): one half-step solves a linearly
constrained least-squares problem over the constraint polytope (cached
factorization, then a box clamp on designated entries), the other projects
onto the PSD cone through a symmetric eigendecomposition.  Constraints are
functionals sum_{i<=j} c_ij * X[i,j] on the symmetric matrix variable.

Two structural reductions keep the affine step cheap: entries forced to zero
are eliminated up front, and two-entry equality constraints of the form
X[a] - X[b] = 0 (ubiquitous in moment-matrix relaxations) are folded into
entry groups instead of KKT rows.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse

__all__ = [
    "SDPProblem",
    "SDPSolution",
    "LinearObjective",
    "SquaredNormObjective",
    "solve",
    "min_eigenvalue",
    "project_psd",
    "CONVERGED",
    "MAX_ITERATIONS",
    "INFEASIBLE_CERTIFIED",
]

CONVERGED = "Converged"
MAX_ITERATIONS = "MaxIterations"
INFEASIBLE_CERTIFIED = "InfeasibleCertified"

Cell = tuple[int, int]


def _canon_cell(cell: Cell) -> Cell:
    i, j = cell
    return (i, j) if i <= j else (j, i)


@dataclass(frozen=True)
class LinearObjective:
    """Minimize sum over cells of coeff * X[i,j] (upper-triangle convention)."""

    coeffs: dict[Cell, float]


@dataclass(frozen=True)
class SquaredNormObjective:
    """Minimize sum over rows of (sum_j coeff_j * X[cell_j] - offset)^2."""

    rows: tuple[tuple[tuple[Cell, ...], tuple[float, ...], float], ...]

    @staticmethod
    def from_rows(rows) -> SquaredNormObjective:
        packed = []
        for cells, coeffs, offset in rows:
            packed.append(
                (tuple(_canon_cell(c) for c in cells), tuple(float(x) for x in coeffs), float(offset))
            )
        return SquaredNormObjective(tuple(packed))


@dataclass
class SDPProblem:
    """Symmetric matrix variable of side `dim`, equality constraints
    (functional, value), optional [lo, hi] box applied to every entry, a set of
    entries pinned to zero, and an optional objective."""

    dim: int
    constraints: list[tuple[dict[Cell, float], float]] = field(default_factory=list)
    box: tuple[float, float] | None = None
    zero_pattern: frozenset[Cell] = frozenset()
    objective: LinearObjective | SquaredNormObjective | None = None

    def add_constraint(self, coeffs: dict[Cell, float], b: float) -> None:
        self.constraints.append(({_canon_cell(c): float(v) for c, v in coeffs.items()}, float(b)))


@dataclass
class SDPSolution:
    X: np.ndarray
    status: str
    primal_residual: float
    dual_residual: float
    objective_value: float
    iterations: int


def project_psd(M: np.ndarray) -> np.ndarray:
    """Nearest (Frobenius) PSD matrix: clamp negative eigenvalues to zero."""
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    pos = vals > 0
    if not pos.any():
        return np.zeros_like(M)
    V = vecs[:, pos]
    return (V * vals[pos]) @ V.T


def min_eigenvalue(X: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    X = np.asarray(X, dtype=float)
    if X.shape[0] == 0:
        return 0.0
    vals = scipy.linalg.eigh(0.5 * (X + X.T), eigvals_only=True, subset_by_index=[0, 0])
    return float(vals[0])


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


class _CompiledSDP:
    """Problem compiled to group coordinates with a cached KKT factorization."""

    def __init__(self, problem: SDPProblem, rho: float):
        self.problem = problem
        dim = problem.dim
        zero = {_canon_cell(c) for c in problem.zero_pattern}
        cells = [(i, j) for i in range(dim) for j in range(i, dim) if (i, j) not in zero]
        self.cells = cells
        self.cell_index = {c: idx for idx, c in enumerate(cells)}
        self.ci = np.fromiter((c[0] for c in cells), dtype=np.intp, count=len(cells))
        self.cj = np.fromiter((c[1] for c in cells), dtype=np.intp, count=len(cells))
        self.wcell = np.where(self.ci == self.cj, 1.0, 2.0)

        # split constraints into entry ties and genuine KKT rows
        uf = _UnionFind(len(cells))
        rows = []
        for coeffs, b in problem.constraints:
            reduced = {}
            for cell, c in coeffs.items():
                cell = _canon_cell(cell)
                if cell in zero:
                    continue
                if c != 0.0:
                    reduced[self.cell_index[cell]] = reduced.get(self.cell_index[cell], 0.0) + c
            if len(reduced) == 2 and b == 0.0:
                (i1, c1), (i2, c2) = reduced.items()
                if c1 == -c2 and c1 != 0.0:
                    uf.union(i1, i2)
                    continue
            rows.append((reduced, b))

        roots = sorted({uf.find(i) for i in range(len(cells))})
        root_to_group = {r: g for g, r in enumerate(roots)}
        self.group_of_cell = np.fromiter(
            (root_to_group[uf.find(i)] for i in range(len(cells))), dtype=np.intp, count=len(cells)
        )
        self.n_groups = len(roots)
        self.Wg = np.bincount(self.group_of_cell, weights=self.wcell, minlength=self.n_groups)

        # group-level box bounds
        if problem.box is not None:
            lo, hi = problem.box
            self.lo = np.full(self.n_groups, float(lo))
            self.hi = np.full(self.n_groups, float(hi))
        else:
            self.lo = self.hi = None

        # assemble normalized constraint rows over groups
        self.n_rows = len(rows)
        self.b = np.zeros(self.n_rows)
        A = scipy.sparse.lil_matrix((self.n_rows, self.n_groups)) if self.n_rows else None
        for r, (reduced, b) in enumerate(rows):
            norm = math.sqrt(
                sum(c * c * (1.0 if self.ci[i] == self.cj[i] else 0.5) for i, c in reduced.items())
            )
            scale = 1.0 / norm if norm > 0 else 1.0
            for i, c in reduced.items():
                A[r, self.group_of_cell[i]] += c * scale
            self.b[r] = b * scale
        self.A = A.tocsr() if A is not None else None

        # objective in group coordinates
        self.lin = None
        self.L = None
        self.d = None
        obj = problem.objective
        if isinstance(obj, LinearObjective):
            self.lin = np.zeros(self.n_groups)
            for cell, c in obj.coeffs.items():
                cell = _canon_cell(cell)
                if cell in zero:
                    continue
                self.lin[self.group_of_cell[self.cell_index[cell]]] += c
        elif isinstance(obj, SquaredNormObjective):
            L = scipy.sparse.lil_matrix((len(obj.rows), self.n_groups))
            d = np.zeros(len(obj.rows))
            for r, (rcells, coeffs, offset) in enumerate(obj.rows):
                for cell, c in zip(rcells, coeffs):
                    if cell in zero:
                        continue
                    L[r, self.group_of_cell[self.cell_index[cell]]] += c
                d[r] = offset
            self.L = L.tocsr()
            self.d = d

        self.set_rho(rho)

    # -- factorization ------------------------------------------------------

    def set_rho(self, rho: float) -> None:
        self.rho = rho
        G = self.rho * self.Wg.copy()
        if self.L is not None:
            LtL = (self.L.T @ self.L).tocoo()
            off_diag = LtL.row != LtL.col
            if np.any(off_diag & (LtL.data != 0.0)):
                if self.n_groups > 4000:
                    raise ValueError("dense quadratic objective too large for this solver")
                Gd = np.diag(G) + 2.0 * LtL.toarray()
                self._G_dense = Gd
                self._G_chol = scipy.linalg.cho_factor(Gd)
                self._G_diag = None
            else:
                diag_add = np.zeros(self.n_groups)
                diag_mask = ~off_diag
                np.add.at(diag_add, LtL.row[diag_mask], LtL.data[diag_mask])
                G = G + 2.0 * diag_add
                self._G_diag = G
                self._G_chol = None
        else:
            self._G_diag = G
            self._G_chol = None

        if self.A is not None and self.n_rows > 0:
            AGiAt = (self.A @ self._apply_G_inv_mat(self.A.T.toarray())) if self._G_diag is None \
                else (self.A.multiply(1.0 / self._G_diag) @ self.A.T).toarray()
            S = np.asarray(AGiAt)
            S = 0.5 * (S + S.T)
            vals, vecs = np.linalg.eigh(S)
            tol = max(S.shape[0], 1) * np.finfo(float).eps * max(vals.max(initial=0.0), 1.0)
            keep = vals > tol
            self._S_vecs = vecs[:, keep]
            self._S_inv_vals = 1.0 / vals[keep]
        else:
            self._S_vecs = None

    def _apply_G_inv_mat(self, M: np.ndarray) -> np.ndarray:
        if self._G_diag is not None:
            return M / self._G_diag[:, None]
        return scipy.linalg.cho_solve(self._G_chol, M)

    def _apply_G_inv(self, v: np.ndarray) -> np.ndarray:
        if self._G_diag is not None:
            return v / self._G_diag
        return scipy.linalg.cho_solve(self._G_chol, v)

    def _apply_S_pinv(self, v: np.ndarray) -> np.ndarray:
        return self._S_vecs @ (self._S_inv_vals * (self._S_vecs.T @ v))

    # -- projections --------------------------------------------------------

    def gather(self, M: np.ndarray) -> np.ndarray:
        """Weighted group sums of the matrix entries at the free cells."""
        vals = M[self.ci, self.cj]
        return np.bincount(self.group_of_cell, weights=self.wcell * vals, minlength=self.n_groups)

    def scatter(self, z: np.ndarray) -> np.ndarray:
        M = np.zeros((self.problem.dim, self.problem.dim))
        vals = z[self.group_of_cell]
        M[self.ci, self.cj] = vals
        M[self.cj, self.ci] = vals
        return M

    def affine_step(self, t: np.ndarray, clamp: bool = True):
        """Minimize objective + (rho/2) * ||z - v||_W^2 subject to the equality
        rows, where t = gather(v); then clamp to the box.

        Returns (z, multipliers).
        """
        r = self.rho * t
        if self.lin is not None:
            r = r - self.lin
        if self.L is not None:
            r = r + 2.0 * (self.L.T @ self.d)
        nu = None
        if self.A is not None and self.n_rows > 0:
            Ar = self.A @ self._apply_G_inv(r)
            nu = self._apply_S_pinv(Ar - self.b)
            z = self._apply_G_inv(r - self.A.T @ nu)
        else:
            z = self._apply_G_inv(r)
        if clamp and self.lo is not None:
            z = np.clip(z, self.lo, self.hi)
        return z, nu

    def equality_residual(self, z: np.ndarray) -> float:
        if self.A is None or self.n_rows == 0:
            return 0.0
        return float(np.abs(self.A @ z - self.b).max(initial=0.0))

    def objective_value(self, z: np.ndarray) -> float:
        if self.lin is not None:
            return float(self.lin @ z)
        if self.L is not None:
            resid = self.L @ z - self.d
            return float(resid @ resid)
        return 0.0

    # -- presolve infeasibility checks --------------------------------------

    def presolve_infeasible(self) -> bool:
        if self.A is None or self.n_rows == 0:
            return False
        # least-squares consistency of the equality system
        z0 = self._apply_G_inv(self.A.T @ self._apply_S_pinv(self.b))
        resid = np.abs(self.A @ z0 - self.b).max(initial=0.0)
        if resid > 1e-8 * (1.0 + np.abs(self.b).max(initial=0.0)):
            return True
        # interval arithmetic against the box
        if self.lo is not None:
            Acoo = self.A.tocoo()
            lo_sum = np.zeros(self.n_rows)
            hi_sum = np.zeros(self.n_rows)
            reach_lo = np.where(Acoo.data > 0, Acoo.data * self.lo[Acoo.col], Acoo.data * self.hi[Acoo.col])
            reach_hi = np.where(Acoo.data > 0, Acoo.data * self.hi[Acoo.col], Acoo.data * self.lo[Acoo.col])
            np.add.at(lo_sum, Acoo.row, reach_lo)
            np.add.at(hi_sum, Acoo.row, reach_hi)
            slack = 1e-9 * (1.0 + np.abs(self.b))
            if np.any(self.b < lo_sum - slack) or np.any(self.b > hi_sum + slack):
                return True
        return False

    def farkas_certificate(self, y: np.ndarray, margin: float) -> bool:
        """Check a candidate dual ray: y'b > 0 while sum_i y_i A_i is NSD
        certifies infeasibility of the equality + PSD system (the box only
        shrinks the feasible set, so the certificate carries over)."""
        if self.A is None or self.n_rows == 0 or not np.isfinite(y).all():
            return False
        norm = np.linalg.norm(y)
        if norm == 0:
            return False
        y = y / norm
        gain = float(y @ self.b)
        if gain < margin:
            return False
        coeffs = np.asarray(self.A.T @ y).ravel()
        M = np.zeros((self.problem.dim, self.problem.dim))
        vals = coeffs[self.group_of_cell]
        half = np.where(self.ci == self.cj, vals, 0.5 * vals)
        M[self.ci, self.cj] = half
        M[self.cj, self.ci] = half
        lam_max = -min_eigenvalue(-M)
        return lam_max <= margin * 1e-2


def solve(
    problem: SDPProblem,
    tol_p: float = 1e-6,
    tol_d: float = 1e-6,
    max_iter: int = 20000,
    rho: float = 1.0,
    over_relaxation: float = 1.6,
    x0: np.ndarray | None = None,
    adapt_rho: bool = True,
    verbose_stream=None,
) -> SDPSolution:
    """Run the splitting iteration until both residuals fall below tolerance.

    Deterministic given the problem and parameters.  Non-convergence is
    reported through the status field (MaxIterations), never an exception;
    InfeasibleCertified is returned only for presolve linear contradictions or
    a verified dual ray.
    """
    if problem.dim < 1:
        raise ValueError("dim must be >= 1")
    if problem.objective is None and not problem.constraints:
        raise ValueError("need at least one constraint or an objective")
    comp = _CompiledSDP(problem, rho)
    dim = problem.dim

    if comp.presolve_infeasible():
        return SDPSolution(
            X=np.zeros((dim, dim)),
            status=INFEASIBLE_CERTIFIED,
            primal_residual=float("inf"),
            dual_residual=float("inf"),
            objective_value=float("nan"),
            iterations=0,
        )

    X = np.zeros((dim, dim)) if x0 is None else 0.5 * (np.asarray(x0, float) + np.asarray(x0, float).T)
    U = np.zeros((dim, dim))
    alpha = over_relaxation
    nu_avg = np.zeros(comp.n_rows)
    r_p = r_d = float("inf")
    rho_updates = 0
    it = 0

    for it in range(1, max_iter + 1):
        z, nu = comp.affine_step(comp.gather(X - U))
        Z = comp.scatter(z)
        Zhat = alpha * Z + (1.0 - alpha) * X
        X_new = project_psd(Zhat + U)
        U = U + Zhat - X_new

        r_p = np.linalg.norm(X_new - Z) / max(1.0, np.linalg.norm(X_new), np.linalg.norm(Z))
        r_d = comp.rho * np.linalg.norm(X_new - X) / max(1.0, comp.rho * np.linalg.norm(U))
        X = X_new
        if nu is not None:
            nu_avg = 0.95 * nu_avg + 0.05 * nu

        if verbose_stream is not None and it % 25 == 0:
            verbose_stream.write(
                json.dumps({"iter": it, "primal": r_p, "dual": r_d, "rho": comp.rho}) + "\n"
            )
        if r_p <= tol_p and r_d <= tol_d:
            break
        if adapt_rho and it % 50 == 0 and rho_updates < 40:
            if r_p > 10.0 * r_d:
                comp.set_rho(comp.rho * 2.0)
                U = U / 2.0
                rho_updates += 1
            elif r_d > 10.0 * r_p:
                comp.set_rho(comp.rho / 2.0)
                U = U * 2.0
                rho_updates += 1

    converged = r_p <= tol_p and r_d <= tol_d
    status = CONVERGED if converged else MAX_ITERATIONS
    if not converged and comp.n_rows > 0:
        # dual variables grow along a ray on infeasible problems
        if comp.farkas_certificate(nu_avg, 1e-6) or comp.farkas_certificate(-nu_avg, 1e-6):
            status = INFEASIBLE_CERTIFIED
    z_final, _ = comp.affine_step(comp.gather(X - U))
    return SDPSolution(
        X=X,
        status=status,
        primal_residual=float(r_p),
        dual_residual=float(r_d),
        objective_value=comp.objective_value(z_final),
        iterations=it,
    )

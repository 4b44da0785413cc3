"""Arbitrary-precision dense solvers: full GMRES and an LU fallback.

GMRES is unrestarted, with modified Gram-Schmidt Arnoldi plus one
unconditional reorthogonalization pass (cheap insurance against the severe
ill-conditioning these interpolation systems are known for), Givens
rotations for the running least-squares problem, and a tolerance on the
relative residual ||b - Ax|| / ||b||.  LU uses partial pivoting and signals
singularity on a vanishing pivot.  Every report carries the relative
residual recomputed from scratch, never the solver's internal estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp
from mpmath import mpf

from .mpnum import PrecisionContext

__all__ = [
    "SolveOptions",
    "SolveReport",
    "SingularMatrixError",
    "residual_norm",
    "lu_solve",
    "gmres_solve",
    "solve",
]


class SingularMatrixError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SolveOptions:
    method: str = "gmres"
    tol: str = "1e-20"  # relative residual target, decimal string
    max_iter: int = 1000

    def __post_init__(self):
        if self.method not in ("gmres", "lu"):
            raise ValueError(f"unknown solver {self.method!r}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not mpf(self.tol) > 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class SolveReport:
    relative_residual: mpf
    iterations: int
    method: str
    converged: bool


def _rows(A) -> list:
    return [[A[i, j] for j in range(A.cols)] for i in range(A.rows)]


def _vec(b) -> list:
    return [b[i] for i in range(b.rows)]


def _dot(u, v):
    return mp.fsum((ui * vi for ui, vi in zip(u, v)), absolute=False)


def _norm2(u):
    return mp.sqrt(mp.fsum((ui * ui for ui in u), absolute=False))


def residual_norm(A, x, b, ctx: PrecisionContext) -> mpf:
    """||b - Ax||_2 / ||b||_2 recomputed from the raw data."""
    with ctx.working():
        rows, xs, bs = _rows(A), _vec(x), _vec(b)
        if len(rows) != len(bs) or (rows and len(rows[0]) != len(xs)):
            raise ValueError("dimension mismatch")
        r = [bi - _dot(row, xs) for row, bi in zip(rows, bs)]
        nb = _norm2(bs)
        if nb == 0:
            raise ValueError("b must be nonzero")
        v = _norm2(r) / nb
    return ctx.rounded(v)


def lu_solve(A, b, ctx: PrecisionContext):
    """Partial-pivot LU solve; report carries the recomputed residual."""
    with ctx.working():
        rows = _rows(A)
        rhs = _vec(b)
        n = len(rows)
        if n == 0 or len(rows[0]) != n:
            raise ValueError("A must be square and nonempty")
        if len(rhs) != n:
            raise ValueError("dimension mismatch")
        pivot_floor = mpf(10) ** (-(ctx.digits - 10))
        for col in range(n):
            piv = max(range(col, n), key=lambda i: abs(rows[i][col]))
            if abs(rows[piv][col]) < pivot_floor:
                raise SingularMatrixError(
                    f"pivot {rows[piv][col]} below 1e-{ctx.digits - 10} at column {col}"
                )
            if piv != col:
                rows[col], rows[piv] = rows[piv], rows[col]
                rhs[col], rhs[piv] = rhs[piv], rhs[col]
            prow = rows[col]
            pval = prow[col]
            for i in range(col + 1, n):
                factor = rows[i][col] / pval
                if factor:
                    ri = rows[i]
                    for j in range(col + 1, n):
                        ri[j] -= factor * prow[j]
                    rhs[i] -= factor * rhs[col]
                    ri[col] = mpf(0)
        x = [mpf(0)] * n
        for i in range(n - 1, -1, -1):
            x[i] = (rhs[i] - _dot(rows[i][i + 1 :], x[i + 1 :])) / rows[i][i]
        xm = mp.matrix(x)
    report = SolveReport(
        relative_residual=residual_norm(A, xm, b, ctx),
        iterations=1,
        method="lu",
        converged=True,
    )
    return xm, report


def gmres_solve(A, b, opts: SolveOptions, ctx: PrecisionContext):
    """Full (unrestarted) GMRES from the zero vector.

    Returns the minimizing iterate once the relative-residual estimate drops
    below opts.tol, or the best iterate with converged=False after max_iter
    steps (the Krylov space saturates at the system size, so at working
    precision stagnation beyond n steps is a genuine non-convergence signal).
    """
    with ctx.working():
        rows = _rows(A)
        rhs = _vec(b)
        n = len(rows)
        if n == 0 or len(rows[0]) != n:
            raise ValueError("A must be square and nonempty")
        if len(rhs) != n:
            raise ValueError("dimension mismatch")
        beta = _norm2(rhs)
        if beta == 0:
            raise ValueError("b must be nonzero")
        tol = mpf(opts.tol)

        max_dim = min(n, opts.max_iter)
        V = [[ri / beta for ri in rhs]]
        H: list[list] = []  # H[j] holds column j, length j+2
        cs: list = []
        sn: list = []
        g = [beta] + [mpf(0)] * max_dim
        converged = False
        j = 0
        for j in range(max_dim):
            w = [_dot(row, V[j]) for row in rows]
            hcol = []
            for i in range(j + 1):
                hij = _dot(V[i], w)
                for t in range(n):
                    w[t] -= hij * V[i][t]
                hcol.append(hij)
            for i in range(j + 1):  # one reorthogonalization pass
                corr = _dot(V[i], w)
                for t in range(n):
                    w[t] -= corr * V[i][t]
                hcol[i] += corr
            hnext = _norm2(w)
            hcol.append(hnext)
            H.append(hcol)
            if hnext != 0:
                V.append([wt / hnext for wt in w])
            # apply accumulated Givens rotations to the new column
            for i in range(j):
                tmp = cs[i] * hcol[i] + sn[i] * hcol[i + 1]
                hcol[i + 1] = -sn[i] * hcol[i] + cs[i] * hcol[i + 1]
                hcol[i] = tmp
            denom = mp.sqrt(hcol[j] ** 2 + hcol[j + 1] ** 2)
            if denom == 0:
                cs.append(mpf(1))
                sn.append(mpf(0))
            else:
                cs.append(hcol[j] / denom)
                sn.append(hcol[j + 1] / denom)
            tmp = cs[j] * g[j] + sn[j] * g[j + 1]
            g[j + 1] = -sn[j] * g[j] + cs[j] * g[j + 1]
            g[j] = tmp
            hcol[j] = denom
            hcol[j + 1] = mpf(0)
            if abs(g[j + 1]) / beta <= tol:
                converged = True
                break
            if hnext == 0:
                break  # Krylov space exhausted (lucky breakdown)
        dim = j + 1
        # back-substitute the triangular system H y = g
        y = [mpf(0)] * dim
        for i in range(dim - 1, -1, -1):
            acc = g[i]
            for t in range(i + 1, dim):
                acc -= H[t][i] * y[t]
            if H[i][i] == 0:
                raise SingularMatrixError("GMRES least-squares system singular")
            y[i] = acc / H[i][i]
        x = [mpf(0)] * n
        for t in range(dim):
            yt = y[t]
            vt = V[t]
            for i in range(n):
                x[i] += yt * vt[i]
        xm = mp.matrix(x)
    report = SolveReport(
        relative_residual=residual_norm(A, xm, b, ctx),
        iterations=dim,
        method="gmres",
        converged=converged,
    )
    return xm, report


def solve(A, b, opts: SolveOptions, ctx: PrecisionContext):
    if opts.method == "lu":
        return lu_solve(A, b, ctx)
    return gmres_solve(A, b, opts, ctx)

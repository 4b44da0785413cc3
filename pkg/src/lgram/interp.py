"""Constrained interpolation of L(s, chi) by finite Dirichlet series.

An approximant F(s) = sum_{n in I} a_n n^{-s} is fitted with real
coefficients supported on I, the first N naturals coprime to q, with the
leading k of them (the sublist J) frozen to a_n = chi(n).  Two node families
give two linear systems for the remaining coefficients:

  * zero nodes ("full" method): F must vanish at M known zeros
    1/2 + i x_m, split into real and imaginary conditions, giving a
    2M x 2M system (N = 2M + k); with k = 1 the right-hand side is the
    constant pattern (-1, ..., -1, 0, ..., 0);

  * Gram nodes ("gram" method): only Im F(1/2 + i g_m) = 0 is imposed at
    M Gram points, where Im L vanishes for free, giving an M x M system
    (N = M + k); k >= 2 is required since the n = 1 column contributes
    nothing to the imaginary part and k = 1 degenerates to x = 0.

Entries are mu_{m,n} = Re or Im of n^{-1/2 - i x_m}; the right-hand side is
minus the contribution of the frozen columns.  Dropping the coprimality
restriction on I (the failure-mode demo) is supported behind a flag.

Zero discovery evaluates the rotated approximant Re(e^{i theta(t)} F(1/2+it))
along Gram intervals to bracket candidates, then polishes each with a complex
Newton iteration using the exact derivative F'(s) = -sum a_n log(n) n^{-s}.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from math import gcd

import mpmath as mp
from mpmath import mpc, mpf

from .characters import RealPrimitiveCharacter, character_from_discriminant
from .gramzero import GramTable, ZeroTable, refine_root
from .lref import theta
from .mpnum import PrecisionContext, exp_i, real_from_str, real_to_str

__all__ = [
    "IndexScheme",
    "InterpolationSystem",
    "Approximant",
    "DiscoveredZero",
    "coprime_indices",
    "index_scheme",
    "build_system_full",
    "build_system_gram",
    "assemble_approximant",
    "evaluate",
    "evaluate_derivative",
    "node_residuals",
    "newton_zero",
    "discover_zeros",
]


def coprime_indices(q: int, N: int) -> list:
    """First N naturals coprime to q, ascending."""
    if q < 3:
        raise ValueError(f"modulus must be >= 3, got {q}")
    if N < 1:
        raise ValueError("need at least one index")
    out = []
    n = 1
    while len(out) < N:
        if gcd(n, q) == 1:
            out.append(n)
        n += 1
    return out


@dataclass(frozen=True)
class IndexScheme:
    q: int
    k: int
    M: int
    N: int
    method: str  # "full_zeros" | "gram_imag"
    constrained: bool  # coprime support restriction active
    I: tuple
    J: tuple

    @property
    def retained(self) -> tuple:
        return self.I[self.k :]


def index_scheme(
    q: int, M: int, k: int, method: str, constrained: bool = True
) -> IndexScheme:
    if method not in ("full_zeros", "gram_imag"):
        raise ValueError(f"unknown method {method!r}")
    if M < 1:
        raise ValueError("M must be >= 1")
    if method == "full_zeros":
        if k < 1:
            raise ValueError(
                "k must be >= 1 for the zero-node method: k = 0 makes the "
                "system homogeneous with only the trivial solution"
            )
        N = 2 * M + k
    else:
        if k < 2:
            raise ValueError(
                "k must be >= 2 for the Gram-node method: the n = 1 column "
                "has no imaginary part, so k = 1 yields b = 0 and the "
                "trivial solution"
            )
        N = M + k
    if constrained:
        I = tuple(coprime_indices(q, N))
    else:
        I = tuple(range(1, N + 1))
    return IndexScheme(
        q=q, k=k, M=M, N=N, method=method, constrained=constrained, I=I, J=I[:k]
    )


@dataclass(frozen=True)
class InterpolationSystem:
    A: mp.matrix
    b: mp.matrix
    scheme: IndexScheme
    nodes: tuple
    digits: int

    @property
    def method(self) -> str:
        return self.scheme.method


def _neg_power_table(indices, s: mpc) -> list:
    """n^{-s} for each n in indices (log table built once per call)."""
    return [mp.exp(-s * mp.log(mpf(n))) if n > 1 else mpc(1) for n in indices]


def build_system_full(
    char: RealPrimitiveCharacter,
    zeros,
    k: int,
    ctx: PrecisionContext,
    coprime_constraint: bool = True,
) -> InterpolationSystem:
    """2M x 2M system interpolating F = 0 at M zero ordinates.

    Rows 0..M-1 are the real-part conditions, rows M..2M-1 the imaginary
    parts; columns run over I \\ J.  The right-hand side folds in the frozen
    coefficients: b_m = -sum_{n in J} chi(n) Re(n^{-1/2 - i x_m}) and the
    imaginary analog below.
    """
    M = len(zeros)
    scheme = index_scheme(char.q, M, k, "full_zeros", constrained=coprime_constraint)
    cols = scheme.retained
    if len(cols) != 2 * M:
        raise ValueError(f"column count {len(cols)} does not match 2M={2 * M}")
    with ctx.working():
        A = mp.matrix(2 * M, 2 * M)
        b = mp.matrix(2 * M, 1)
        half = mpf(1) / 2
        for m, x in enumerate(zeros):
            s = mpc(half, mpf(x))
            powers = _neg_power_table(cols, s)
            for j, p in enumerate(powers):
                A[m, j] = p.real
                A[M + m, j] = p.imag
            bre = mpf(0)
            bim = mpf(0)
            for n, p in zip(scheme.J, _neg_power_table(scheme.J, s)):
                c = char(n)
                if c:
                    bre -= c * p.real
                    bim -= c * p.imag
            b[m] = bre
            b[M + m] = bim
        nodes = tuple(mpf(x) for x in zeros)
    return InterpolationSystem(A=A, b=b, scheme=scheme, nodes=nodes, digits=ctx.digits)


def build_system_gram(
    char: RealPrimitiveCharacter, gram_points, k: int, ctx: PrecisionContext
) -> InterpolationSystem:
    """M x M system imposing Im F(1/2 + i g_m) = 0 at M Gram points."""
    M = len(gram_points)
    scheme = index_scheme(char.q, M, k, "gram_imag", constrained=True)
    cols = scheme.retained
    if len(cols) != M:
        raise ValueError(f"column count {len(cols)} does not match M={M}")
    with ctx.working():
        A = mp.matrix(M, M)
        b = mp.matrix(M, 1)
        half = mpf(1) / 2
        for m, g in enumerate(gram_points):
            s = mpc(half, mpf(g))
            powers = _neg_power_table(cols, s)
            for j, p in enumerate(powers):
                A[m, j] = p.imag
            acc = mpf(0)
            for n, p in zip(scheme.J, _neg_power_table(scheme.J, s)):
                c = char(n)
                if c:
                    acc -= c * p.imag
            b[m] = acc
        nodes = tuple(mpf(g) for g in gram_points)
    return InterpolationSystem(A=A, b=b, scheme=scheme, nodes=nodes, digits=ctx.digits)


@dataclass(frozen=True)
class Approximant:
    """Finite Dirichlet series F(s) = sum a_n n^{-s} with real coefficients."""

    d: int
    q: int
    method: str
    M: int
    k: int
    digits: int
    constrained: bool
    coefficients: tuple  # of (n, a_n) ascending in n
    node_digest: str

    @property
    def N(self) -> int:
        return len(self.coefficients)

    def coefficient(self, n: int) -> mpf:
        for m, a in self.coefficients:
            if m == n:
                return a
        return mpf(0)

    def support(self) -> list:
        return [n for n, _ in self.coefficients]

    def to_json(self) -> dict:
        ctx = PrecisionContext(self.digits)
        return {
            "d": self.d,
            "method": self.method,
            "M": self.M,
            "k": self.k,
            "digits": self.digits,
            "constrained": self.constrained,
            "node_digest": self.node_digest,
            "coefficients": [
                {"n": n, "value": real_to_str(a, ctx)} for n, a in self.coefficients
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "Approximant":
        if isinstance(obj, str):
            obj = json.loads(obj)
        ctx = PrecisionContext(obj["digits"])
        coeffs = tuple(
            (e["n"], real_from_str(e["value"], ctx)) for e in obj["coefficients"]
        )
        return cls(
            d=obj["d"],
            q=abs(obj["d"]),
            method=obj["method"],
            M=obj["M"],
            k=obj["k"],
            digits=obj["digits"],
            constrained=obj["constrained"],
            coefficients=coeffs,
            node_digest=obj["node_digest"],
        )


def _digest_nodes(nodes, digits: int) -> str:
    ctx = PrecisionContext(digits)
    h = hashlib.sha256()
    for t in nodes:
        h.update(real_to_str(t, ctx).encode())
    return h.hexdigest()[:16]


def assemble_approximant(
    system: InterpolationSystem, solution, char: RealPrimitiveCharacter
) -> Approximant:
    """Combine the frozen chi(n) values with the solved coefficients."""
    scheme = system.scheme
    n_free = len(scheme.retained)
    values = [solution[i] for i in range(n_free)]
    if len(values) != n_free:
        raise ValueError("solution length does not match the retained index count")
    with PrecisionContext(system.digits).working():
        coeffs = [(n, mpf(char(n))) for n in scheme.J]
        coeffs.extend((n, +mpf(v)) for n, v in zip(scheme.retained, values))
    coeffs.sort(key=lambda item: item[0])
    if scheme.constrained:
        for n, _ in coeffs:
            if gcd(n, scheme.q) != 1:
                raise AssertionError(f"support leaked a non-coprime index {n}")
    return Approximant(
        d=char.d,
        q=char.q,
        method=scheme.method,
        M=scheme.M,
        k=scheme.k,
        digits=system.digits,
        constrained=scheme.constrained,
        coefficients=tuple(coeffs),
        node_digest=_digest_nodes(system.nodes, system.digits),
    )


def evaluate(F: Approximant, s, ctx: PrecisionContext) -> mpc:
    """F(s) = sum a_n n^{-s}."""
    with ctx.working():
        ss = mpc(s)
        total = mp.fsum(
            (a * mp.exp(-ss * mp.log(mpf(n))) if n > 1 else mpc(a) for n, a in F.coefficients),
            absolute=False,
        )
    return ctx.rounded(total)


def evaluate_derivative(F: Approximant, s, ctx: PrecisionContext) -> mpc:
    """F'(s) = -sum a_n log(n) n^{-s}."""
    with ctx.working():
        ss = mpc(s)
        total = -mp.fsum(
            (
                a * mp.log(mpf(n)) * mp.exp(-ss * mp.log(mpf(n)))
                for n, a in F.coefficients
                if n > 1
            ),
            absolute=False,
        )
    return ctx.rounded(total)


def node_residuals(F: Approximant, system: InterpolationSystem, ctx: PrecisionContext):
    """Per-node violation of the interpolation conditions.

    Zero-node method: |F(1/2 + i x_m)| (the target value is 0 there);
    Gram-node method: |Im F(1/2 + i g_m)|.
    """
    out = []
    with ctx.working():
        half = mpf(1) / 2
        for t in system.nodes:
            v = evaluate(F, mpc(half, t), ctx)
            if system.method == "gram_imag":
                out.append(ctx.rounded(abs(v.imag)))
            else:
                out.append(ctx.rounded(abs(v)))
    return out


# ---------------------------------------------------------------------------
# Zero discovery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscoveredZero:
    label: str
    location: mpc
    offset: mpc | None  # versus the reference zero, when one is available
    converged: bool


def newton_zero(F: Approximant, seed, ctx: PrecisionContext, max_steps: int = 120):
    """Complex Newton iteration on F from the seed; (z, converged)."""
    with ctx.working():
        z = mpc(seed)
        z0 = z
        tol = ctx.eps(25)
        for _ in range(max_steps):
            dv = evaluate_derivative(F, z, ctx)
            if dv == 0:
                return z, False
            step = evaluate(F, z, ctx) / dv
            z = z - step
            if abs(z - z0) > 1:
                return z, False  # escaped the seed's basin
            if abs(step) < tol:
                return ctx.rounded(z), True
    return ctx.rounded(z), False


def discover_zeros(
    F: Approximant,
    char: RealPrimitiveCharacter,
    ctx: PrecisionContext,
    reference: ZeroTable | None = None,
    gram: GramTable | None = None,
):
    """Zeros of the approximant on the critical line.

    With a Gram table: scan the rotated approximant Re(e^{i theta} F) across
    the Gram intervals for sign changes, refine each to a real ordinate, and
    polish with complex Newton (discovery mode); offsets are attached where a
    reference zero lies within half a Gram gap.  With only a reference table:
    seed Newton directly at each reference zero (validation mode).
    """
    if gram is None and reference is None:
        raise ValueError("need a Gram table (scan) or a reference table (validation)")
    results = []
    half = mpf(1) / 2
    if gram is not None:
        scan_ctx = PrecisionContext(min(ctx.digits, 40))

        def rotated(t):
            with scan_ctx.working():
                v = exp_i(theta(char, t, scan_ctx), scan_ctx) * evaluate(
                    F, mpc(half, t), scan_ctx
                )
                return v.real

        with scan_ctx.working():
            grid = [mpf(g) for g in gram.values()]
            brackets = []
            fvals = [rotated(t) for t in grid]
            for i in range(len(grid) - 1):
                a, b, fa, fb = grid[i], grid[i + 1], fvals[i], fvals[i + 1]
                if (fa < 0) != (fb < 0):
                    brackets.append((a, b))
                else:
                    level = 16
                    while level <= 256:
                        pts = [a + (b - a) * j / level for j in range(level + 1)]
                        fs = [rotated(t) for t in pts]
                        found = [
                            (pts[j], pts[j + 1])
                            for j in range(level)
                            if (fs[j] < 0) != (fs[j + 1] < 0)
                        ]
                        if found:
                            brackets.extend(found)
                            break
                        level *= 2
            gap = (grid[-1] - grid[0]) / max(1, len(grid) - 1)
        refs = list(reference.values()) if reference is not None else []
        count = 0
        for a, b in sorted(brackets):
            t0 = refine_root(rotated, (a, b), target_digits=25)
            z, ok = newton_zero(F, mpc(half, t0), ctx)
            count += 1
            offset = None
            label = f"zero_{count}"
            if refs:
                with ctx.working():
                    nearest = min(refs, key=lambda g: abs(g - z.imag))
                    if abs(nearest - z.imag) < gap / 2:
                        offset = ctx.rounded(z - mpc(half, nearest))
                        label = f"rho_{refs.index(nearest) + 1}"
            results.append(
                DiscoveredZero(label=label, location=z, offset=offset, converged=ok)
            )
    else:
        for m, gamma, _ in reference.entries:
            with ctx.working():
                seed = mpc(half, gamma)
            z, ok = newton_zero(F, seed, ctx)
            with ctx.working():
                offset = ctx.rounded(z - seed)
            results.append(
                DiscoveredZero(label=f"rho_{m}", location=z, offset=offset, converged=ok)
            )
    return results


def character_for(d: int) -> RealPrimitiveCharacter:
    return character_from_discriminant(d)

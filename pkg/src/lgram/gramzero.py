"""Generalized Gram points and critical-line zeros of Z(t, chi).

The m-th Gram point g_m solves theta(t, chi) = m pi.  theta vanishes at
t = 0, dips negative, and increases without bound past its stationary point
near 2 pi / q; g_m is taken as the unique solution on the increasing branch,
which is the convention the anchor values fix.  Bracketing starts from the
double-precision inversion of the asymptotic theta(t) ~ (t/2) log(qt/(2 pi e))
and expands geometrically; refinement is bisection warm-up plus a bracketed
secant at full precision.

Zeros are located as sign changes of the Hardy Z-function.  The scan walks
the Gram intervals [g_m, g_{m+1}] at low precision, subdividing 16-fold with
doubling (up to 512) wherever an interval shows zero or more than one sign
change, then refines each bracket at full precision and certifies the result
with an explicit sign change across [gamma - delta, gamma + delta].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import mpmath as mp
from mpmath import mpf

from .characters import RealPrimitiveCharacter, character_from_discriminant
from .lref import hardy_z, theta
from .mpnum import PrecisionContext, PrecisionFault, pi, real_from_str, real_to_str

__all__ = [
    "BracketError",
    "ZeroCountError",
    "GramTable",
    "ZeroTable",
    "refine_root",
    "gram_point",
    "gram_table",
    "find_zeros",
]

SCAN_DIGITS = 30  # precision for bracketing scans; refinement reruns at full


class BracketError(ValueError):
    """A root bracket could not be established or has equal signs."""


class ZeroCountError(RuntimeError):
    """The number of located zeros below g_M fell short of M even after
    maximal subdivision (a close pair was probably missed)."""


def refine_root(f, bracket, target_digits: int, max_iter: int = 300) -> mpf:
    """Root of f in the bracket to ~10^-target_digits.

    Bisection warm-up, then secant steps confined to the bracket with
    bisection fallback whenever a secant iterate escapes.  f must change
    sign across the bracket.  The iteration arithmetic runs at its own
    working precision; f is responsible for its own.
    """
    with mp.workdps(target_digits + 12):
        return _refine_root_inner(f, bracket, target_digits, max_iter)


def _refine_root_inner(f, bracket, target_digits: int, max_iter: int) -> mpf:
    lo, hi = mpf(bracket[0]), mpf(bracket[1])
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo < 0) == (fhi < 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]")
    tol = mpf(10) ** (-target_digits)

    for _ in range(8):  # warm-up
        mid = (lo + hi) / 2
        fm = f(mid)
        if fm == 0:
            return mid
        if (flo < 0) != (fm < 0):
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm

    prev, fprev = lo, flo
    cur, fcur = hi, fhi
    for _ in range(max_iter):
        if fcur == fprev:
            nxt = (lo + hi) / 2
        else:
            nxt = cur - fcur * (cur - prev) / (fcur - fprev)
            if not (lo < nxt < hi):
                nxt = (lo + hi) / 2
        fnxt = f(nxt)
        if fnxt == 0:
            return nxt
        if (flo < 0) != (fnxt < 0):
            hi, fhi = nxt, fnxt
        else:
            lo, flo = nxt, fnxt
        step = abs(nxt - cur)
        prev, fprev = cur, fcur
        cur, fcur = nxt, fnxt
        # simple roots only: a sub-tol secant step certifies convergence
        if step < tol or abs(hi - lo) < tol:
            return cur
    raise RuntimeError(
        f"root refinement did not reach 1e-{target_digits} in {max_iter} steps"
    )


# ---------------------------------------------------------------------------
# Gram points
# ---------------------------------------------------------------------------


def _asymptotic_gram_guess(q: int, m: int) -> float:
    """Double-precision inversion of theta(t) ~ (t/2) log(qt/(2 pi e)) = m pi."""
    target = m * math.pi
    t = max(4 * math.pi / q, 2 * math.pi * (m + 1) / q)
    floor_t = 2 * math.pi * math.e / q * 1.02
    for _ in range(60):
        t = max(t, floor_t)
        phi = t / 2 * math.log(q * t / (2 * math.pi * math.e))
        dphi = 0.5 * math.log(q * t / (2 * math.pi))
        if dphi <= 0:
            break
        step = (phi - target) / dphi
        t -= step
        if abs(step) < 1e-9 * max(1.0, t):
            break
    return max(t, floor_t)


def _gram_point_full(char: RealPrimitiveCharacter, m: int, ctx: PrecisionContext):
    """(g_m, residual) at full precision."""
    if m < 0:
        raise ValueError("Gram index must be >= 0")
    scan = PrecisionContext(SCAN_DIGITS)
    with scan.working():
        mpi_scan = m * pi(scan)

        def f_scan(t):
            return theta(char, t, scan) - mpi_scan

        lo = mpf(2) * pi(scan) / char.q
        flo = f_scan(lo)
        halvings = 0
        while flo >= 0:
            lo /= 2
            flo = f_scan(lo)
            halvings += 1
            if halvings > 60:
                raise BracketError(f"no lower bracket for g_{m} of d={char.d}")
        hi = mpf(_asymptotic_gram_guess(char.q, m)) * mpf("1.05") + 2
        fhi = f_scan(hi)
        expansions = 0
        while fhi <= 0:
            hi *= mpf("1.4")
            fhi = f_scan(hi)
            expansions += 1
            if expansions > 200:
                raise BracketError(f"no upper bracket for g_{m} of d={char.d}")

        coarse = refine_root(f_scan, (lo, hi), target_digits=12)

    with ctx.working():
        mpi_full = m * pi(ctx)

        def f_full(t):
            return theta(char, t, ctx) - mpi_full

        width = mpf(10) ** -10
        blo, bhi = coarse - width, coarse + width
        for _ in range(20):
            if (f_full(blo) < 0) != (f_full(bhi) < 0):
                break
            width *= 16
            blo, bhi = coarse - width, coarse + width
        g = refine_root(f_full, (blo, bhi), target_digits=ctx.digits - 16)
        residual = abs(f_full(g))
        if residual > ctx.eps(20):
            raise RuntimeError(
                f"Gram point residual {residual} exceeds tolerance for m={m}, d={char.d}"
            )
        return ctx.rounded(g), ctx.rounded(residual)


def gram_point(char: RealPrimitiveCharacter, m: int, ctx: PrecisionContext) -> mpf:
    """The unique solution of theta(t, chi) = m pi on the increasing branch."""
    return _gram_point_full(char, m, ctx)[0]


@dataclass(frozen=True)
class GramTable:
    d: int
    digits: int
    entries: tuple  # of (m, g_m, residual)

    def values(self) -> list:
        return [g for (_, g, _) in self.entries]

    def value(self, m: int) -> mpf:
        first = self.entries[0][0]
        entry = self.entries[m - first]
        assert entry[0] == m
        return entry[1]

    def __len__(self) -> int:
        return len(self.entries)

    def to_json(self) -> dict:
        ctx = PrecisionContext(self.digits)
        return {
            "d": self.d,
            "digits": self.digits,
            "entries": [
                {"m": m, "value": real_to_str(g, ctx), "residual": real_to_str(r, ctx)}
                for (m, g, r) in self.entries
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "GramTable":
        if isinstance(obj, str):
            obj = json.loads(obj)
        ctx = PrecisionContext(obj["digits"])
        entries = tuple(
            (e["m"], real_from_str(e["value"], ctx), real_from_str(e["residual"], ctx))
            for e in obj["entries"]
        )
        return cls(d=obj["d"], digits=obj["digits"], entries=entries)


def gram_table(char: RealPrimitiveCharacter, M: int, ctx: PrecisionContext) -> GramTable:
    """Gram points g_0 .. g_{M-1} with their theta residuals."""
    if M < 1:
        raise ValueError("need at least one Gram point")
    entries = []
    prev = None
    for m in range(M):
        g, res = _gram_point_full(char, m, ctx)
        if prev is not None and not g > prev:
            raise RuntimeError(f"Gram points not increasing at m={m} for d={char.d}")
        prev = g
        entries.append((m, g, res))
    return GramTable(d=char.d, digits=ctx.digits, entries=tuple(entries))


# ---------------------------------------------------------------------------
# Zeros
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroTable:
    d: int
    digits: int
    entries: tuple  # of (m, gamma_m, achieved_digits), m starting at 1

    def values(self) -> list:
        return [g for (_, g, _) in self.entries]

    def gamma(self, m: int) -> mpf:
        entry = self.entries[m - 1]
        assert entry[0] == m
        return entry[1]

    def __len__(self) -> int:
        return len(self.entries)

    def to_json(self) -> dict:
        ctx = PrecisionContext(self.digits)
        return {
            "d": self.d,
            "digits": self.digits,
            "entries": [
                {"m": m, "value": real_to_str(g, ctx), "achieved_digits": a}
                for (m, g, a) in self.entries
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "ZeroTable":
        if isinstance(obj, str):
            obj = json.loads(obj)
        ctx = PrecisionContext(obj["digits"])
        entries = tuple(
            (e["m"], real_from_str(e["value"], ctx), e["achieved_digits"])
            for e in obj["entries"]
        )
        return cls(d=obj["d"], digits=obj["digits"], entries=entries)


def _scan_value(zfun, t, cache):
    if t not in cache:
        cache[t] = zfun(t)
    return cache[t]


def _brackets_in(zfun, a, b, fa, fb, cache, max_level=512):
    """Sign-change subintervals of [a, b], subdividing 16-fold with doubling."""
    if (fa < 0) != (fb < 0):
        return [(a, b, fa, fb)]
    level = 16
    while level <= max_level:
        pts = [a + (b - a) * j / level for j in range(level + 1)]
        fs = [fa] + [_scan_value(zfun, t, cache) for t in pts[1:-1]] + [fb]
        found = [
            (pts[j], pts[j + 1], fs[j], fs[j + 1])
            for j in range(level)
            if (fs[j] < 0) != (fs[j + 1] < 0)
        ]
        if found:
            return found
        level *= 2
    return []


def find_zeros(
    char: RealPrimitiveCharacter, M: int, ctx: PrecisionContext
) -> ZeroTable:
    """First M sign-change zeros of Z(t, chi) on (0, infinity).

    Scanning is done at reduced precision over the Gram intervals
    [g_m, g_{m+1}] up to g_M (plus the stretch below g_0); each bracket is
    re-refined at full precision to ctx.digits - 20 decimal places and
    certified by a sign change across [gamma - delta, gamma + delta].
    """
    if M < 1:
        raise ValueError("need at least one zero")
    scan = PrecisionContext(SCAN_DIGITS)
    cache: dict = {}

    def z_scan(t):
        return hardy_z(char, t, scan)

    with scan.working():
        grid = [gram_point(char, m, scan) for m in range(M + 1)]
        points = [grid[0] / 8] + grid
        # nudge grid points sitting numerically on a zero
        for i, t in enumerate(points):
            v = _scan_value(z_scan, t, cache)
            bumps = 0
            while abs(v) < mpf(10) ** -15 and bumps < 8:
                t += mpf(10) ** -3
                v = _scan_value(z_scan, t, cache)
                bumps += 1
            points[i] = t

        brackets = []
        for i in range(len(points) - 1):
            a, b = points[i], points[i + 1]
            fa, fb = _scan_value(z_scan, a, cache), _scan_value(z_scan, b, cache)
            if (fa < 0) != (fb < 0):
                brackets.append((a, b, fa, fb))
            else:
                brackets.extend(_brackets_in(z_scan, a, b, fa, fb, cache))
        if len(brackets) < M:
            # hunt for odd clusters hiding behind single sign changes
            extra = []
            for (a, b, fa, fb) in brackets:
                sub = _brackets_in(z_scan, a, b, fa, fb, {}, max_level=64)
                # a plain interval returns itself; clusters return more
                extra.extend(sub if len(sub) > 1 else [(a, b, fa, fb)])
            brackets = extra
        brackets.sort(key=lambda br: br[0])
        if len(brackets) < M:
            raise ZeroCountError(
                f"located {len(brackets)} zeros below g_{M} for d={char.d}, "
                f"expected {M}"
            )
        tights = [
            refine_root(z_scan, (a, b), target_digits=SCAN_DIGITS - 8)
            for (a, b, _, _) in brackets[:M]
        ]

    achieved = ctx.digits - 20

    def z_full(t):
        return hardy_z(char, t, ctx)

    entries = []
    prev = None
    with ctx.working():
        for idx, tight in enumerate(tights):
            width = mpf(10) ** -(SCAN_DIGITS - 12)
            blo, bhi = tight - width, tight + width
            for _ in range(12):
                if (z_full(blo) < 0) != (z_full(bhi) < 0):
                    break
                width *= 16
                blo, bhi = tight - width, tight + width
            gamma = refine_root(z_full, (blo, bhi), target_digits=achieved + 2)
            delta = mpf(10) ** (-achieved + 5)
            if not z_full(gamma - delta) * z_full(gamma + delta) < 0:
                raise PrecisionFault(
                    f"zero certificate failed at gamma={gamma} (d={char.d})"
                )
            gamma = ctx.rounded(gamma)
            if prev is not None and not gamma > prev:
                raise RuntimeError(f"zero ordinates not increasing at index {idx + 1}")
            prev = gamma
            entries.append((idx + 1, gamma, achieved))
    return ZeroTable(d=char.d, digits=ctx.digits, entries=tuple(entries))


def character_for(d: int) -> RealPrimitiveCharacter:
    """Convenience: the character belonging to a fundamental discriminant."""
    return character_from_discriminant(d)

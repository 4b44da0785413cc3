"""Ground-truth evaluation of L(s, chi), theta(t, chi) and the Hardy
Z-function, used for validation and node generation.

The backend is the Hurwitz zeta function evaluated by Euler-Maclaurin:

    zeta(s, x) = sum_{j=0}^{K-1} (j+x)^{-s}
               + (K+x)^{1-s} / (s-1)
               + (K+x)^{-s} / 2
               + sum_{r=1}^{R} B_{2r}/(2r)! * (s)_{2r-1} * (K+x)^{-s-2r+1}
               + remainder,

with (s)_m the rising factorial and the remainder rigorously bounded by the
first omitted term times |s + 2R + 1| / (sigma + 2R + 1).  The shift K grows
with both the precision and |Im s|, which keeps the series uniformly valid
on the whole strip at desk-scale heights.  L-values follow from

    L(s, chi) = q^{-s} sum_{r=1}^{q} chi(r) zeta(s, r/q),

entire for the non-principal characters used here; at s = 1 the Hurwitz
poles cancel (sum chi(r) = 0) and the deflated expansion is used instead.

The phase function and Hardy Z-function are

    theta(t, chi) = Im log Gamma(1/4 + a/2 + it/2) + (t/2) log(q/pi)
                    + (i/2) log eps(chi),
    Z(t, chi)     = e^{i theta(t, chi)} L(1/2 + it, chi),

real for real t; hardy_z enforces the realness numerically and treats a
violation as a precision fault.  The module's primary self-validation is the
completed-function identity xi(s) = eps(chi) xi(1-s) with

    xi(s) = (q/pi)^{(s+a)/2} Gamma((s+a)/2) L(s, chi).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
from mpmath import mpc, mpf

from .characters import RealPrimitiveCharacter, epsilon_factor
from .mpnum import (
    PrecisionContext,
    PrecisionFault,
    bernoulli_fraction,
    complex_log,
    exp_i,
    log_gamma,
)

__all__ = [
    "LValue",
    "hurwitz_zeta",
    "L_value",
    "theta",
    "hardy_z",
    "functional_equation_residual",
]

_MAX_TAIL_TERMS = 4000


@dataclass(frozen=True)
class LValue:
    s: mpc
    value: mpc
    achieved_digits: int


def _em_hurwitz(s: mpc, x: mpf, digits: int, deflate: bool = False) -> mpc:
    """Euler-Maclaurin zeta(s, x) at the current mpmath precision.

    With deflate=True, s must equal 1 and the value returned is
    lim_{s->1} [zeta(s, x) - 1/(s-1)].
    """
    K = max(digits, int(mp.ceil(abs(s.imag))))
    main = mp.fsum((mp.power(j + x, -s) for j in range(K)), absolute=False)
    Kx = K + x
    if deflate:
        res = main - mp.log(Kx) + 1 / (2 * Kx)
    else:
        res = main + mp.power(Kx, 1 - s) / (s - 1) + mp.power(Kx, -s) / 2

    target = mpf(10) ** (-(digits + 5))
    sigma = s.real
    rising = s  # (s)_{2r-1} for r = 1
    fact = mpf(2)  # (2r)!
    pw = mp.power(Kx, -s - 1)  # (K+x)^{-s-2r+1}
    Kx2 = Kx * Kx
    for r in range(1, _MAX_TAIL_TERMS):
        b = bernoulli_fraction(2 * r)
        res += (mpf(b.numerator) / b.denominator) / fact * rising * pw
        rising = rising * (s + 2 * r - 1) * (s + 2 * r)
        fact *= (2 * r + 1) * (2 * r + 2)
        pw /= Kx2
        b2 = bernoulli_fraction(2 * r + 2)
        nxt = abs(mpf(b2.numerator) / b2.denominator) / fact * abs(rising) * abs(pw)
        denom = sigma + 2 * r + 1
        if denom > 0 and nxt * abs(s + 2 * r + 1) / denom < target:
            return res
    raise RuntimeError(
        f"Euler-Maclaurin tail did not reach 1e-{digits + 5} for s={s}, x={x}"
    )


def _as_mpf_fraction(x) -> mpf:
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


def hurwitz_zeta(s, x, ctx: PrecisionContext) -> mpc:
    """zeta(s, x) for x in (0, 1]; s = 1 is a pole and rejected."""
    with ctx.working():
        ss = mpc(s)
        xx = _as_mpf_fraction(x)
        if not 0 < xx <= 1:
            raise ValueError(f"x must lie in (0, 1], got {x}")
        if ss == 1:
            raise ValueError("zeta(s, x) has a pole at s = 1")
        v = _em_hurwitz(ss, xx, ctx.digits)
    return ctx.rounded(v)


def L_value(char: RealPrimitiveCharacter, s, ctx: PrecisionContext) -> LValue:
    """L(s, chi) by character-weighted Hurwitz zetas; entire for these chi."""
    q = char.q
    with ctx.working():
        ss = mpc(s)
        deflate = ss == 1
        total = mpc(0)
        for r in range(1, q):
            c = char.values[r]
            if c:
                xr = mpf(r) / q
                total += c * _em_hurwitz(mpc(1) if deflate else ss, xr, ctx.digits,
                                         deflate=deflate)
        v = mp.exp(-ss * mp.log(mpf(q))) * total
    return LValue(s=ctx.rounded(ss), value=ctx.rounded(v),
                  achieved_digits=ctx.digits - 10)


def theta(char: RealPrimitiveCharacter, t, ctx: PrecisionContext) -> mpf:
    """Phase theta(t, chi) making e^{i theta} L(1/2 + it) real."""
    with ctx.working():
        tt = mpf(t)
        z = mpc(mpf(1) / 4 + mpf(char.parity) / 2, tt / 2)
        lg = log_gamma(z, ctx)
        main = lg.imag + tt / 2 * (mp.log(mpf(char.q)) - mp.log(mp.pi))
        # (i/2) log eps(chi): identically 0 for real primitive chi, kept for
        # generality; must come out real to rounding noise
        eps_term = mpc(0, 1) / 2 * complex_log(epsilon_factor(char, ctx), ctx)
        if abs(eps_term.imag) > ctx.eps(20):
            raise PrecisionFault(
                f"epsilon term of theta not real: {eps_term} for d={char.d}"
            )
        v = main + eps_term.real
    return ctx.rounded(v)


def hardy_z(char: RealPrimitiveCharacter, t, ctx: PrecisionContext) -> mpf:
    """Z(t, chi) = e^{i theta(t)} L(1/2 + it); real up to a precision fault."""
    with ctx.working():
        tt = mpf(t)
        rotated = exp_i(theta(char, tt, ctx), ctx) * L_value(
            char, mpc(mpf(1) / 2, tt), ctx
        ).value
        if abs(rotated.imag) > ctx.eps(20):
            raise PrecisionFault(
                f"rotated L-value has imaginary part {rotated.imag} at t={tt} "
                f"(d={char.d}, digits={ctx.digits})"
            )
    return ctx.rounded(rotated.real)


def _completed(char: RealPrimitiveCharacter, s: mpc, ctx: PrecisionContext) -> mpc:
    """xi(s) = (q/pi)^{(s+a)/2} Gamma((s+a)/2) L(s, chi).

    Gamma at Re(w) <= 0 goes through Gamma(w) = Gamma(w+k) / prod (w+j);
    the exponential of the shifted log-gamma makes branch constants moot.
    """
    w = (s + char.parity) / 2
    shift = max(0, int(mp.ceil(1 - w.real)))
    for j in range(shift):
        if abs(w + j) < ctx.eps(-ctx.digits // 2):
            raise PrecisionFault(f"xi evaluated too close to a Gamma pole: w={w}")
    lg = log_gamma(w + shift, ctx)
    log_prod = mp.fsum((mp.log(w + j) for j in range(shift)), absolute=False)
    lv = L_value(char, s, ctx).value
    return mp.exp(w * (mp.log(mpf(char.q)) - mp.log(mp.pi)) + lg - log_prod) * lv


def functional_equation_residual(
    char: RealPrimitiveCharacter, s, ctx: PrecisionContext
) -> mpf:
    """|xi(s) - eps(chi) xi(1-s)|, the module's primary self-check."""
    with ctx.working():
        ss = mpc(s)
        lhs = _completed(char, ss, ctx)
        rhs = epsilon_factor(char, ctx) * _completed(char, 1 - ss, ctx)
        v = abs(lhs - rhs)
    return ctx.rounded(v)

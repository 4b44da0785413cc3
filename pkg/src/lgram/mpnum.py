"""Arbitrary-precision real/complex scalar layer.

Everything downstream (L-values, theta, Gram points, interpolation systems)
runs through this module so that the precision policy lives in one place:

  * a ``PrecisionContext`` fixes the number of decimal digits a caller wants;
  * every public operation computes internally with ``digits + 15`` guard
    digits and rounds the result back to ``digits``, so results are accurate
    to within ``10**(-digits + g)`` for a small guard loss ``g <= 10``;
  * values are plain ``mpmath`` ``mpf``/``mpc`` scalars, immutable and safe
    to pass around.

The only special function needed is the principal-branch complex log-gamma,
implemented by the argument-shift recurrence

    log Gamma(z) = log Gamma(z + n) - sum_{j=0}^{n-1} log(z + j)

into a region where Stirling's series with an explicit Bernoulli-number tail
bound applies:

    log Gamma(w) ~ (w - 1/2) log w - w + log(2 pi)/2
                   + sum_{k>=1} B_{2k} / (2k (2k-1) w^{2k-1}),

with the remainder after the k = K term bounded by the first omitted term
times sec(arg(w)/2)^(2K+2) for Re(w) > 0.  The recurrence plus principal
logs yields the canonical branch, continuous along vertical lines in the
right half-plane, which is what the theta phase function requires.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp
from mpmath import mpc, mpf

__all__ = [
    "GUARD_DIGITS",
    "MIN_DIGITS",
    "PrecisionContext",
    "PrecisionFault",
    "pi",
    "log_gamma",
    "pow_int_neg_s",
    "exp_i",
    "complex_log",
    "bernoulli_fraction",
    "real_to_str",
    "real_from_str",
    "complex_to_json",
    "complex_from_json",
]

GUARD_DIGITS = 15
MIN_DIGITS = 30


class PrecisionFault(ArithmeticError):
    """A computed quantity violated a precision contract (e.g. a rotated
    L-value came out with a non-negligible imaginary part)."""


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision in decimal digits; immutable, passed explicitly."""

    digits: int = 120

    def __post_init__(self):
        if self.digits < MIN_DIGITS:
            raise ValueError(
                f"precision context needs >= {MIN_DIGITS} digits, got {self.digits}"
            )

    @property
    def working_dps(self) -> int:
        return self.digits + GUARD_DIGITS

    def working(self):
        """Context manager switching mpmath to the guarded working precision."""
        return mp.workdps(self.working_dps)

    def rounded(self, x):
        """Round a scalar to this context's nominal precision."""
        with mp.workdps(self.digits):
            return +x

    def eps(self, offset: int = 0) -> mpf:
        """10**(-digits + offset) as an mpf, for tolerance checks."""
        with self.working():
            return mpf(10) ** (-self.digits + offset)


# ---------------------------------------------------------------------------
# Bernoulli numbers, cached as exact rationals (shared with the Euler-
# Maclaurin machinery in lref).
# ---------------------------------------------------------------------------

_BERNOULLI_CACHE: dict[int, Fraction] = {}


def bernoulli_fraction(n: int) -> Fraction:
    """B_n as an exact Fraction (append-only cache)."""
    if n not in _BERNOULLI_CACHE:
        p, q = mp.bernfrac(n)
        _BERNOULLI_CACHE[n] = Fraction(int(p), int(q))
    return _BERNOULLI_CACHE[n]


# ---------------------------------------------------------------------------
# Elementary operations
# ---------------------------------------------------------------------------


def pi(ctx: PrecisionContext) -> mpf:
    with ctx.working():
        v = +mp.pi
    return ctx.rounded(v)


def exp_i(theta, ctx: PrecisionContext) -> mpc:
    """e^{i theta} for real theta."""
    with ctx.working():
        v = mp.expj(mpf(theta))
    return ctx.rounded(v)


def complex_log(z, ctx: PrecisionContext) -> mpc:
    """Principal-branch complex logarithm."""
    with ctx.working():
        zz = mpc(z)
        if zz == 0:
            raise ValueError("log of zero")
        v = mp.log(zz)
    return ctx.rounded(v)


def pow_int_neg_s(n: int, s, ctx: PrecisionContext) -> mpc:
    """n^{-s} = exp(-s log n) for a positive integer n."""
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    with ctx.working():
        if n == 1:
            return mpc(1)
        v = mp.exp(-mpc(s) * mp.log(mpf(n)))
    return ctx.rounded(v)


# ---------------------------------------------------------------------------
# Complex log-gamma
# ---------------------------------------------------------------------------


def log_gamma(z, ctx: PrecisionContext) -> mpc:
    """Principal-branch log Gamma(z) for Re(z) > 0."""
    with ctx.working():
        zz = mpc(z)
        if not zz.real > 0:
            raise ValueError(f"log_gamma requires Re(z) > 0, got {zz}")
        v = _log_gamma_raw(zz, ctx.digits)
    return ctx.rounded(v)


def _log_gamma_raw(z: mpc, digits: int) -> mpc:
    # Stirling tail target per the precision contract; the shift radius is
    # sized so the asymptotic series can reach it (min error ~ e^{-2 pi |w|}).
    target = mpf(10) ** (-(digits + 10))
    radius = mpf("0.38") * mp.mp.dps + 10
    while True:
        shift = mpc(0)
        w = z
        while abs(w) < radius:
            shift += mp.log(w)
            w += 1
        val = _stirling_series(w, target)
        if val is not None:
            return val - shift
        radius *= mpf("1.5")  # tail bound not reachable; shift further out


def _stirling_series(w: mpc, target: mpf):
    """Stirling series at w (Re(w) > 0); None if the tail bound stalls."""
    res = (w - mpf("0.5")) * mp.log(w) - w + mp.log(2 * mp.pi) / 2
    w2 = w * w
    invp = 1 / w  # w^{-(2k-1)}
    # sec(arg(w)/2)^2 = 2|w| / (|w| + Re w); remainder after the k-th term is
    # bounded by the first omitted term times sec(arg(w)/2)^(2k+2)
    aw = abs(w)
    sec2 = 2 * aw / (aw + w.real)
    bound_scale = sec2 * sec2
    prev_bound = mp.inf
    for k in range(1, 10_000):
        b = bernoulli_fraction(2 * k)
        term = (mpf(b.numerator) / b.denominator) / (2 * k * (2 * k - 1)) * invp
        invp /= w2
        b2 = bernoulli_fraction(2 * k + 2)
        bound = (
            abs(mpf(b2.numerator) / b2.denominator)
            / ((2 * k + 2) * (2 * k + 1))
            * abs(invp)
            * bound_scale
        )
        bound_scale *= sec2
        res += term
        if bound < target:
            return res
        if bound > prev_bound:
            return None  # asymptotic tail started diverging before target
        prev_bound = bound
    return None


# ---------------------------------------------------------------------------
# Decimal-string serialization.  Strings carry enough digits for an exact
# binary round-trip at the context's nominal precision.
# ---------------------------------------------------------------------------


def _io_digits(digits: int) -> int:
    prec = mp.libmp.libmpf.dps_to_prec(digits)
    return mp.libmp.libmpf.repr_dps(prec)


def real_to_str(x, ctx: PrecisionContext) -> str:
    with mp.workdps(ctx.digits):
        return mp.nstr(+mpf(x), _io_digits(ctx.digits))


def real_from_str(s: str, ctx: PrecisionContext) -> mpf:
    with mp.workdps(ctx.digits):
        return mpf(s)


def complex_to_json(z, ctx: PrecisionContext) -> dict:
    zz = mpc(z)
    return {"re": real_to_str(zz.real, ctx), "im": real_to_str(zz.imag, ctx)}


def complex_from_json(obj: dict, ctx: PrecisionContext) -> mpc:
    return mpc(real_from_str(obj["re"], ctx), real_from_str(obj["im"], ctx))

"""Closed forms over the two-radical field and exact asymptotic densities.

Every counting series in play lives in Q(z)[u, v] with

    u^2 = 1 - 4z          (terms: T = (1 - u)/(2z) - 1)
    v^2 = (1 - 3z - z^2 - z^3)/(1 - z)    (pure terms: P = (1 - z - v)/(2z))

and the level-k series is a sum of production monomials divided by
1 - z - 2 z P(z), which equals v exactly.  Writing a level's closed form as
(a0 + a2 v) + u (a1 + a3 v), the dominant singularity z = 1/4 comes only
from the u factor, so the limit density of k-step terms among all terms is
the u-part evaluated at 1/4 divided by the u-part of T there, which is -2:

    density(k) = -(a1(1/4) + a3(1/4) sqrt(11/48)) / 2

an algebraic number of the form p + q sqrt(33) with rational p, q.

Rational functions are kept with factored denominators c z^a (1-z)^b R^r
(R = 1 - 3z - z^2 - z^3); all arithmetic stays inside that family, and none
of the factors vanishes at z = 1/4, which is re-checked at evaluation time.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from decimal import Decimal, getcontext
from fractions import Fraction
from math import gcd
from typing import Optional

from .grammar import G, Pattern, ReductionGrammar, contains_nt
from .series import MonomialProfile, PowerSeries, profile_of

Poly = tuple[int, ...]  # little-endian integer coefficients, no trailing zeros

R_POLY: Poly = (1, -3, -1, -1)
OMZ_POLY: Poly = (1, -1)  # 1 - z
U2_POLY: Poly = (1, -4)  # 1 - 4z


class PoleAtSingularityError(RuntimeError):
    """A component that must be analytic at z = 1/4 has a pole there."""


def _trim(c: list[int]) -> Poly:
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def p_add(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def p_neg(a: Poly) -> Poly:
    return tuple(-x for x in a)


def p_scale(a: Poly, c: int) -> Poly:
    return () if c == 0 else tuple(c * x for x in a)


def p_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return tuple(out)


def p_pow(a: Poly, e: int) -> Poly:
    out: Poly = (1,)
    for _ in range(e):
        out = p_mul(out, a)
    return out


def p_eval(a: Poly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def p_divexact(a: Poly, b: Poly) -> Optional[Poly]:
    """a // b when the division is exact over the integers, else None."""
    if not a:
        return ()
    if len(a) < len(b):
        return None
    rem = list(a)
    out = [0] * (len(a) - len(b) + 1)
    lead = b[-1]
    for i in range(len(out) - 1, -1, -1):
        c = rem[i + len(b) - 1]
        if c % lead != 0:
            return None
        q = c // lead
        out[i] = q
        if q:
            for j, y in enumerate(b):
                rem[i + j] -= q * y
    if any(rem):
        return None
    return _trim(out)


def p_content(a: Poly) -> int:
    g = 0
    for c in a:
        g = gcd(g, c)
    return g


@dataclass(frozen=True)
class RatFunc:
    """num / (c * z^a * (1-z)^b * R^r) with positive integer c."""

    num: Poly
    c: int = 1
    a: int = 0
    b: int = 0
    r: int = 0

    @property
    def is_zero(self) -> bool:
        return not self.num


def rat(num: Poly, c: int = 1, a: int = 0, b: int = 0, r: int = 0) -> RatFunc:
    num = _trim(list(num))
    if not num:
        return RatFunc((), 1, 0, 0, 0)
    if c < 0:
        num, c = p_neg(num), -c
    while a > 0 and num[0] == 0:
        num = num[1:]
        a -= 1
    while b > 0:
        q = p_divexact(num, OMZ_POLY)
        if q is None:
            break
        num, b = q, b - 1
    while r > 0:
        q = p_divexact(num, R_POLY)
        if q is None:
            break
        num, r = q, r - 1
    shared = gcd(p_content(num), c)
    if shared > 1:
        num = tuple(x // shared for x in num)
        c //= shared
    return RatFunc(num, c, a, b, r)


RF_ZERO = rat(())
RF_ONE = rat((1,))


def rf_add(x: RatFunc, y: RatFunc) -> RatFunc:
    if x.is_zero:
        return y
    if y.is_zero:
        return x
    c = x.c * y.c // gcd(x.c, y.c)
    a, b, r = max(x.a, y.a), max(x.b, y.b), max(x.r, y.r)

    def lift(f: RatFunc) -> Poly:
        p = p_scale(f.num, c // f.c)
        if a - f.a:
            p = (0,) * (a - f.a) + p
        if b - f.b:
            p = p_mul(p, p_pow(OMZ_POLY, b - f.b))
        if r - f.r:
            p = p_mul(p, p_pow(R_POLY, r - f.r))
        return p

    return rat(p_add(lift(x), lift(y)), c, a, b, r)


def rf_neg(x: RatFunc) -> RatFunc:
    return RatFunc(p_neg(x.num), x.c, x.a, x.b, x.r)


def rf_sub(x: RatFunc, y: RatFunc) -> RatFunc:
    return rf_add(x, rf_neg(y))


def rf_mul(x: RatFunc, y: RatFunc) -> RatFunc:
    if x.is_zero or y.is_zero:
        return RF_ZERO
    return rat(p_mul(x.num, y.num), x.c * y.c, x.a + y.a, x.b + y.b, x.r + y.r)


def rf_scale(x: RatFunc, k: int) -> RatFunc:
    return rat(p_scale(x.num, k), x.c, x.a, x.b, x.r)


def rf_eval(x: RatFunc, at: Fraction) -> Fraction:
    den = Fraction(x.c) * at**x.a * p_eval(OMZ_POLY, at) ** x.b * p_eval(R_POLY, at) ** x.r
    if den == 0:
        raise ZeroDivisionError(f"pole at z = {at}")
    return p_eval(x.num, at) / den


U2_RF = rat(U2_POLY)
V2_RF = rat(R_POLY, b=1)  # R / (1 - z)
INV_V2_RF = rat(OMZ_POLY, r=1)  # (1 - z) / R


@dataclass(frozen=True)
class RadicalElement:
    """e0 + e1 u + e2 v + e3 uv over rational functions of z."""

    e0: RatFunc = RF_ZERO
    e1: RatFunc = RF_ZERO
    e2: RatFunc = RF_ZERO
    e3: RatFunc = RF_ZERO

    def __add__(self, other: "RadicalElement") -> "RadicalElement":
        return RadicalElement(
            rf_add(self.e0, other.e0),
            rf_add(self.e1, other.e1),
            rf_add(self.e2, other.e2),
            rf_add(self.e3, other.e3),
        )

    def __sub__(self, other: "RadicalElement") -> "RadicalElement":
        return RadicalElement(
            rf_sub(self.e0, other.e0),
            rf_sub(self.e1, other.e1),
            rf_sub(self.e2, other.e2),
            rf_sub(self.e3, other.e3),
        )

    def __mul__(self, other: "RadicalElement") -> "RadicalElement":
        a0, a1, a2, a3 = self.e0, self.e1, self.e2, self.e3
        b0, b1, b2, b3 = other.e0, other.e1, other.e2, other.e3
        u2v2 = rf_mul(U2_RF, V2_RF)
        c0 = rf_add(
            rf_add(rf_mul(a0, b0), rf_mul(rf_mul(a1, b1), U2_RF)),
            rf_add(rf_mul(rf_mul(a2, b2), V2_RF), rf_mul(rf_mul(a3, b3), u2v2)),
        )
        c1 = rf_add(
            rf_add(rf_mul(a0, b1), rf_mul(a1, b0)),
            rf_mul(rf_add(rf_mul(a2, b3), rf_mul(a3, b2)), V2_RF),
        )
        c2 = rf_add(
            rf_add(rf_mul(a0, b2), rf_mul(a2, b0)),
            rf_mul(rf_add(rf_mul(a1, b3), rf_mul(a3, b1)), U2_RF),
        )
        c3 = rf_add(
            rf_add(rf_mul(a0, b3), rf_mul(a3, b0)),
            rf_add(rf_mul(a1, b2), rf_mul(a2, b1)),
        )
        return RadicalElement(c0, c1, c2, c3)

    def scale_rf(self, f: RatFunc) -> "RadicalElement":
        return RadicalElement(
            rf_mul(self.e0, f), rf_mul(self.e1, f), rf_mul(self.e2, f), rf_mul(self.e3, f)
        )

    def scale(self, k: int) -> "RadicalElement":
        return RadicalElement(
            rf_scale(self.e0, k), rf_scale(self.e1, k), rf_scale(self.e2, k), rf_scale(self.e3, k)
        )

    def divide_by_v(self) -> "RadicalElement":
        """x / v = x * v * (1-z)/R."""
        return (self * V_ELEMENT).scale_rf(INV_V2_RF)


RE_ONE = RadicalElement(e0=RF_ONE)
V_ELEMENT = RadicalElement(e2=RF_ONE)

# closed forms of the base counting series
N_ELEMENT = RadicalElement(e0=rat((0, 1), b=1))  # z/(1-z)
T_ELEMENT = RadicalElement(
    e0=rat((1, -2), c=2, a=1),  # (1 - 2z)/(2z)
    e1=rat((-1,), c=2, a=1),  # -1/(2z)
)
S_ELEMENT = RadicalElement(
    e0=rat((1,), c=2, b=1),  # 1/(2(1-z))
    e1=rat((-1,), c=2, b=1),
)
PURE_ELEMENT = RadicalElement(
    e0=rat((1, -1), c=2, a=1),  # (1-z)/(2z)
    e2=rat((-1,), c=2, a=1),
)


def z_power_element(k: int) -> RadicalElement:
    return RadicalElement(e0=rat((0,) * k + (1,)))


# ---------------------------------------------------------------------------
# series expansions (used to cross-check closed forms against exact counting)


def _laurent_of_ratfunc(f: RatFunc, order: int) -> tuple[int, tuple[Fraction, ...]]:
    """(offset, coefficients) with value = sum coeff[i] z^(offset + i)."""
    if f.is_zero:
        return 0, (Fraction(0),) * (order + 1)
    length = order + f.a + 1
    pad = (Fraction(0),) * length
    num = PowerSeries((tuple(Fraction(x) for x in f.num) + pad)[:length])
    den_poly = p_scale(p_mul(p_pow(OMZ_POLY, f.b), p_pow(R_POLY, f.r)), f.c)
    den = PowerSeries((tuple(Fraction(x) for x in den_poly) + pad)[:length])
    series = num.divide(den)
    return -f.a, series.coeffs


def sqrt_u_series(order: int) -> PowerSeries:
    return PowerSeries(
        tuple(Fraction(c) for c in (1, -4)) + (Fraction(0),) * (order - 1)
    ).sqrt()


def sqrt_v_series(order: int) -> PowerSeries:
    pad = (Fraction(0),) * (order + 1)
    num = PowerSeries((tuple(Fraction(c) for c in R_POLY) + pad)[: order + 1])
    den = PowerSeries((tuple(Fraction(c) for c in OMZ_POLY) + pad)[: order + 1])
    return num.divide(den).sqrt()


def radical_series(el: RadicalElement, order: int) -> PowerSeries:
    """Power-series expansion of an element that is analytic at 0."""
    u = sqrt_u_series(order + 4)
    v = sqrt_v_series(order + 4)
    uv = u * v
    radicals = {0: None, 1: u, 2: v, 3: uv}
    acc: dict[int, Fraction] = {}
    for slot, comp in enumerate((el.e0, el.e1, el.e2, el.e3)):
        if comp.is_zero:
            continue
        offset, coeffs = _laurent_of_ratfunc(comp, order + 4)
        radical = radicals[slot]
        if radical is not None:
            conv = [Fraction(0)] * (len(coeffs))
            rc = radical.coeffs
            for i, x in enumerate(coeffs):
                if x:
                    for j in range(min(len(rc), len(coeffs) - i)):
                        if rc[j]:
                            conv[i + j] += x * rc[j]
            coeffs = tuple(conv)
        for i, x in enumerate(coeffs):
            if x:
                acc[offset + i] = acc.get(offset + i, Fraction(0)) + x
    for e, val in acc.items():
        if e < 0 and val != 0:
            raise ValueError(f"element is not analytic at 0 (z^{e} coefficient {val})")
    return PowerSeries(tuple(acc.get(i, Fraction(0)) for i in range(order + 1)))


# ---------------------------------------------------------------------------
# densities


@dataclass(frozen=True)
class DensityResult:
    """density = rational + root33 * sqrt(33), an algebraic number."""

    level: int
    rational: Fraction
    root33: Fraction
    value: Decimal

    def rounded(self, places: int = 5) -> Decimal:
        quantum = Decimal(1).scaleb(-places)
        return self.value.quantize(quantum)


_SQRT_11_48 = Fraction(11, 48)


def _decimal_sqrt33(digits: int) -> Decimal:
    ctx = getcontext().copy()
    ctx.prec = digits
    return ctx.sqrt(Decimal(33))


class ClosedFormCalculator:
    """Symbolic closed forms for every level of one grammar hierarchy."""

    def __init__(self, g: ReductionGrammar):
        self.g = g
        self._elements: list[RadicalElement] = [PURE_ELEMENT]
        self._powers: dict[tuple[str, int], RadicalElement] = {
            ("T", 1): T_ELEMENT,
            ("S", 1): S_ELEMENT,
            ("N", 1): N_ELEMENT,
            ("G0", 1): PURE_ELEMENT,
        }

    def _power(self, name: str, e: int) -> RadicalElement:
        key = (name, e)
        got = self._powers.get(key)
        if got is None:
            got = self._power(name, e - 1) * self._powers[(name, 1)]
            self._powers[key] = got
        return got

    def _monomial_element(self, prof: MonomialProfile) -> RadicalElement:
        el = z_power_element(prof.zeta)
        for name, e in (("T", prof.tau), ("S", prof.sigma), ("N", prof.nu)):
            if e:
                el = el * self._power(name, e)
        for i, e in enumerate(prof.rhos):
            if e:
                el = el * self._power(f"G{i}", e)
        return el

    def element(self, k: int) -> RadicalElement:
        """Closed form of the level-k counting series."""
        if not 0 <= k <= self.g.level:
            raise ValueError(f"level {k} not available (grammar level {self.g.level})")
        while len(self._elements) <= k:
            lvl = len(self._elements)
            profiles = Counter(
                profile_of(rhs, lvl)
                for rhs in self.g.g_rules[lvl]
                if not contains_nt(rhs, G(lvl))
            )
            numerator = RadicalElement()
            for prof, count in profiles.items():
                numerator = numerator + self._monomial_element(prof).scale(count)
            el = numerator.divide_by_v()
            self._elements.append(el)
            self._powers[(f"G{lvl}", 1)] = el
        return self._elements[k]

    def density(self, k: int, digits: int = 40) -> DensityResult:
        """Limit proportion of k-step terms among all terms (k >= 1)."""
        if k < 1:
            raise ValueError("densities are defined for k >= 1")
        el = self.element(k)
        quarter = Fraction(1, 4)
        try:
            a1 = rf_eval(el.e1, quarter)
            a3 = rf_eval(el.e3, quarter)
            rf_eval(el.e0, quarter)
            rf_eval(el.e2, quarter)
        except ZeroDivisionError as exc:
            raise PoleAtSingularityError(
                f"level-{k} closed form has a pole at z = 1/4: {exc}"
            ) from exc
        # u-part of T at 1/4 is -1/(2z) = -2;  v(1/4) = sqrt(11/48) = sqrt(33)/12
        rational = a1 / -2
        root33 = a3 / -24
        ctx = getcontext().copy()
        ctx.prec = digits
        rational_dec = ctx.divide(Decimal(rational.numerator), Decimal(rational.denominator))
        radical_dec = ctx.multiply(
            ctx.divide(Decimal(root33.numerator), Decimal(root33.denominator)),
            _decimal_sqrt33(digits + 10),
        )
        value = ctx.add(rational_dec, radical_dec)
        return DensityResult(level=k, rational=rational, root33=root33, value=value)


def density_exact(k: int, g: ReductionGrammar, digits: int = 40) -> DensityResult:
    return ClosedFormCalculator(g).density(k, digits=digits)


def dominant_root(digits: int = 40) -> Decimal:
    """Smallest positive real root of 1 - 3z - z^2 - z^3, by exact bisection."""

    def f(x: Fraction) -> Fraction:
        return p_eval(R_POLY, x)

    lo, hi = Fraction(1, 4), Fraction(1, 2)
    assert f(lo) > 0 > f(hi)
    eps = Fraction(1, 10 ** (digits + 5))
    while hi - lo > eps:
        mid = (lo + hi) / 2
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    mid = (lo + hi) / 2
    ctx = getcontext().copy()
    ctx.prec = digits
    return ctx.divide(Decimal(mid.numerator), Decimal(mid.denominator))

"""Exact counting series for terms, substitutions and every grammar level.

All counting coefficients are arbitrary-precision integers computed from the
unambiguous structural equations

    N = z + z N
    T = N + z T + z T^2 + z T S
    S = z T + z S + z
    P = N + z P + z P^2          (pure terms)

and, for level k >= 1,

    G_k = (sum over regular productions of their monomials) / (1 - z - 2 z G_0)

where a production's monomial is z^(constructor count) times one series
factor per nonterminal occurrence.  A float64 variant scaled by 4^-n backs
the asymptotic convergence checks at orders where exact integers get slow.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

import numpy as np

from .grammar import (
    G,
    NonTerminal,
    Pattern,
    PAbs,
    PApp,
    PClo,
    PLift,
    PShift,
    PSlash,
    PSucc,
    PZero,
    ReductionGrammar,
    contains_nt,
)

Coeff = Union[int, Fraction]


@dataclass(frozen=True)
class PowerSeries:
    """Truncated formal power series with exact coefficients."""

    coeffs: tuple

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> Coeff:
        return self.coeffs[n]

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        k = min(len(self.coeffs), len(other.coeffs))
        return PowerSeries(tuple(a + b for a, b in zip(self.coeffs[:k], other.coeffs[:k])))

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        k = min(len(self.coeffs), len(other.coeffs))
        return PowerSeries(tuple(a - b for a, b in zip(self.coeffs[:k], other.coeffs[:k])))

    def __mul__(self, other: "PowerSeries") -> "PowerSeries":
        k = min(len(self.coeffs), len(other.coeffs))
        a, b = self.coeffs, other.coeffs
        out = [0] * k
        for i in range(k):
            ai = a[i]
            if not ai:
                continue
            for j in range(k - i):
                if b[j]:
                    out[i + j] += ai * b[j]
        return PowerSeries(tuple(out))

    def scale(self, c: Coeff) -> "PowerSeries":
        return PowerSeries(tuple(c * a for a in self.coeffs))

    def shift(self, k: int) -> "PowerSeries":
        """Multiply by z^k."""
        return PowerSeries((0,) * k + self.coeffs[: len(self.coeffs) - k])

    def divide(self, den: "PowerSeries") -> "PowerSeries":
        """Exact division; the denominator needs a unit constant term."""
        k = min(len(self.coeffs), len(den.coeffs))
        d0 = den.coeffs[0]
        if d0 == 0:
            raise ZeroDivisionError("denominator has no constant term")
        out: list[Coeff] = []
        for n in range(k):
            acc = self.coeffs[n]
            for i in range(1, n + 1):
                di = den.coeffs[i]
                if di:
                    acc -= di * out[n - i]
            out.append(acc if d0 == 1 else Fraction(acc, d0))
        return PowerSeries(tuple(out))

    def sqrt(self) -> "PowerSeries":
        """Square root of a series with constant term 1."""
        if self.coeffs[0] != 1:
            raise ValueError("sqrt needs constant term 1")
        out: list[Coeff] = [Fraction(1)]
        for n in range(1, len(self.coeffs)):
            acc = self.coeffs[n]
            for i in range(1, n):
                acc -= out[i] * out[n - i]
            out.append(Fraction(acc, 2))
        return PowerSeries(tuple(out))


def zero_series(order: int) -> PowerSeries:
    return PowerSeries((0,) * (order + 1))


def monomial(order: int, c: Coeff, k: int) -> PowerSeries:
    coeffs = [0] * (order + 1)
    if k <= order:
        coeffs[k] = c
    return PowerSeries(tuple(coeffs))


@dataclass(frozen=True)
class BaseSeries:
    terms: PowerSeries
    substs: PowerSeries
    indices: PowerSeries
    pure: PowerSeries


def base_series(order: int) -> BaseSeries:
    """Counting series up to the given order, coefficient by coefficient."""
    if order < 1:
        raise ValueError("order must be at least 1")
    m = order + 1
    t = [0] * m
    s = [0] * m
    nn = [0] * m
    pure = [0] * m
    for n in range(1, m):
        nn[n] = 1
        tt = sum(t[i] * t[n - 1 - i] for i in range(1, n - 1))
        ts = sum(t[i] * s[n - 1 - i] for i in range(1, n - 1))
        t[n] = nn[n] + t[n - 1] + tt + ts
        s[n] = t[n - 1] + s[n - 1] + (1 if n == 1 else 0)
        pp = sum(pure[i] * pure[n - 1 - i] for i in range(1, n - 1))
        pure[n] = nn[n] + pure[n - 1] + pp
    return BaseSeries(
        terms=PowerSeries(tuple(t)),
        substs=PowerSeries(tuple(s)),
        indices=PowerSeries(tuple(nn)),
        pure=PowerSeries(tuple(pure)),
    )


@dataclass(frozen=True)
class MonomialProfile:
    """Exponent vector of a regular production's right-hand side."""

    zeta: int  # constructor occurrences, the z-exponent
    tau: int  # occurrences of T
    sigma: int  # occurrences of S
    nu: int  # occurrences of N
    rhos: tuple[int, ...]  # occurrences of G0..G(k-1)


def profile_of(p: Pattern, level: int) -> MonomialProfile:
    zeta = tau = sigma = nu = 0
    rhos = [0] * level

    def walk(q: Pattern) -> None:
        nonlocal zeta, tau, sigma, nu
        match q:
            case NonTerminal("T"):
                tau += 1
            case NonTerminal("S"):
                sigma += 1
            case NonTerminal("N"):
                nu += 1
            case NonTerminal("G", k):
                rhos[k] += 1
            case PAbs(body) | PSlash(body) | PSucc(body) | PLift(body):
                zeta += 1
                walk(body)
            case PApp(a, b) | PClo(a, b):
                zeta += 1
                walk(a)
                walk(b)
            case PShift() | PZero():
                zeta += 1

    walk(p)
    return MonomialProfile(zeta, tau, sigma, nu, tuple(rhos))


class _PowerCache:
    def __init__(self, order: int):
        self.order = order
        self.cache: dict[tuple[str, int], PowerSeries] = {}
        self.bases: dict[str, PowerSeries] = {}

    def power(self, name: str, e: int) -> PowerSeries:
        key = (name, e)
        got = self.cache.get(key)
        if got is None:
            if e == 1:
                got = self.bases[name]
            else:
                got = self.power(name, e - 1) * self.bases[name]
            self.cache[key] = got
        return got


def level_series(g: ReductionGrammar, order: int) -> list[PowerSeries]:
    """Exact coefficient series for G0..Gn of the grammar."""
    base = base_series(order)
    cache = _PowerCache(order)
    cache.bases["T"] = base.terms
    cache.bases["S"] = base.substs
    cache.bases["N"] = base.indices
    out: list[PowerSeries] = [base.pure]
    cache.bases["G0"] = base.pure
    one = monomial(order, 1, 0)
    den = one - monomial(order, 1, 1) - base.pure.shift(1).scale(2)
    for k in range(1, g.level + 1):
        num = zero_series(order)
        for rhs in g.g_rules[k]:
            if contains_nt(rhs, G(k)):
                continue
            prof = profile_of(rhs, k)
            if prof.zeta > order:
                continue
            term = monomial(order, 1, prof.zeta)
            for name, e in (("T", prof.tau), ("S", prof.sigma), ("N", prof.nu)):
                if e:
                    term = term * cache.power(name, e)
            for i, e in enumerate(prof.rhos):
                if e:
                    term = term * cache.power(f"G{i}", e)
            num = num + term
        gk = num.divide(den)
        out.append(gk)
        cache.bases[f"G{k}"] = gk
    return out


def grammar_series(g: ReductionGrammar, order: int) -> PowerSeries:
    """Counting series of the axiom: coefficient n is the number of size-n
    terms normalizing in exactly g.level steps."""
    return level_series(g, order)[g.level]


# ---------------------------------------------------------------------------
# float64 variant, scaled by 4^-n


def scaled_base_series(order: int) -> dict[str, np.ndarray]:
    m = order + 1
    t = np.zeros(m)
    s = np.zeros(m)
    nn = np.zeros(m)
    pure = np.zeros(m)
    quarter_pow = 1.0
    with np.errstate(under="ignore"):
        for n in range(1, m):
            quarter_pow *= 0.25
            nn[n] = quarter_pow
            tt = float(np.dot(t[1 : n - 1], t[n - 2 : 0 : -1])) if n >= 3 else 0.0
            ts = float(np.dot(t[1 : n - 1], s[n - 2 : 0 : -1])) if n >= 3 else 0.0
            t[n] = nn[n] + 0.25 * (t[n - 1] + tt + ts)
            s[n] = 0.25 * (t[n - 1] + s[n - 1]) + (0.25 if n == 1 else 0.0)
            pp = float(np.dot(pure[1 : n - 1], pure[n - 2 : 0 : -1])) if n >= 3 else 0.0
            pure[n] = nn[n] + 0.25 * (pure[n - 1] + pp)
    return {"T": t, "S": s, "N": nn, "G0": pure}


def scaled_level_series(g: ReductionGrammar, order: int) -> list[np.ndarray]:
    """float64 arrays holding [z^n]Gk / 4^n; cheap at large orders."""
    m = order + 1
    bases = scaled_base_series(order)
    out = [bases["G0"]]
    den = np.zeros(m)
    den[0] = 1.0
    den[1] = -0.25
    den[1:] -= 2 * 0.25 * bases["G0"][:-1]
    power_cache: dict[tuple[str, int], np.ndarray] = {}

    def power(name: str, e: int) -> np.ndarray:
        key = (name, e)
        got = power_cache.get(key)
        if got is None:
            got = bases[name] if e == 1 else np.convolve(power(name, e - 1), bases[name])[:m]
            power_cache[key] = got
        return got

    with np.errstate(under="ignore"):
        for k in range(1, g.level + 1):
            num = np.zeros(m)
            for rhs in g.g_rules[k]:
                if contains_nt(rhs, G(k)):
                    continue
                prof = profile_of(rhs, k)
                if prof.zeta > order:
                    continue
                term = np.zeros(m)
                term[prof.zeta] = 0.25**prof.zeta
                for name, e in (("T", prof.tau), ("S", prof.sigma), ("N", prof.nu)):
                    if e:
                        term = np.convolve(term, power(name, e))[:m]
                for i, e in enumerate(prof.rhos):
                    if e:
                        term = np.convolve(term, power(f"G{i}", e))[:m]
                num += term
            q = np.zeros(m)
            for n in range(m):
                q[n] = num[n] - float(np.dot(den[1 : n + 1], q[n - 1 :: -1][: n]))
            out.append(q)
            bases[f"G{k}"] = q
    return out


def density_numeric(k: int, n: int, g: ReductionGrammar) -> float:
    """Limit step-count density from exact coefficients at finite order.

    The coefficient asymptotics carry a 1/n correction on top of the
    4^n n^(-3/2) shape, so one Richardson step on the coefficient ratios at
    orders n/2 and n removes the leading error.
    """
    if k < 0 or k > g.level:
        raise ValueError(f"level {k} not available (grammar level {g.level})")
    if n < 4:
        raise ValueError("order too small")
    series = level_series(g, n)
    t = base_series(n).terms
    half = n // 2
    r_half = Fraction(series[k][half], t[half])
    r_full = Fraction(series[k][n], t[n])
    return float(2 * r_full - r_half)

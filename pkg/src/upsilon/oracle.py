"""Brute-force ground truth: exhaustive enumeration and a normalization census.

Everything here is independent of the grammar construction: terms are
enumerated straight from the constructor arities and sizes, and step counts
come from the reduction engine.  Grammars and generating-function
coefficients are then validated against these tables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .grammar import Matcher, ReductionGrammar, Sort
from .terms import (
    Abs,
    App,
    Closure,
    Index,
    Lift,
    Node,
    SHIFT,
    Slash,
    StepLimitExceeded,
    Subst,
    Term,
    normalize,
    show,
)

_TERM_POOL: dict[int, tuple[Term, ...]] = {}
_SUBST_POOL: dict[int, tuple[Subst, ...]] = {}


def terms_of_size(n: int) -> tuple[Term, ...]:
    """Every term of size exactly n, in a fixed deterministic order
    (index, abstractions, applications, closures; sub-sizes ascending)."""
    if n < 1:
        return ()
    cached = _TERM_POOL.get(n)
    if cached is not None:
        return cached
    out: list[Term] = [Index(n - 1)]
    if n >= 2:
        out.extend(Abs(b) for b in terms_of_size(n - 1))
        for i in range(1, n - 1):
            lefts = terms_of_size(i)
            rights = terms_of_size(n - 1 - i)
            out.extend(App(l, r) for l in lefts for r in rights)
        for i in range(1, n - 1):
            bodies = terms_of_size(i)
            subs = substs_of_size(n - 1 - i)
            out.extend(Closure(b, s) for b in bodies for s in subs)
    result = tuple(out)
    _TERM_POOL[n] = result
    return result


def substs_of_size(n: int) -> tuple[Subst, ...]:
    """Every substitution of size exactly n (slashes, lifts, shift)."""
    if n < 1:
        return ()
    cached = _SUBST_POOL.get(n)
    if cached is not None:
        return cached
    out: list[Subst] = []
    out.extend(Slash(b) for b in terms_of_size(n - 1))
    out.extend(Lift(s) for s in substs_of_size(n - 1))
    if n == 1:
        out.append(SHIFT)
    result = tuple(out)
    _SUBST_POOL[n] = result
    return result


def enumerate_by_size(n: int, sort: Sort = Sort.TERM) -> Iterator[Node]:
    """Stream of the ground objects of the given sort and size."""
    if sort == Sort.TERM:
        yield from terms_of_size(n)
    elif sort == Sort.SUBST:
        yield from substs_of_size(n)
    elif sort == Sort.INDEX:
        if n >= 1:
            yield Index(n - 1)
    else:
        raise ValueError(sort)


@dataclass
class CensusTable:
    """counts[n][k] = number of size-n terms normalizing in exactly k steps."""

    max_size: int
    max_steps: int
    counts: list[list[int]]
    overflow: list[int]

    def count(self, n: int, k: int) -> int:
        return self.counts[n][k]

    def row_total(self, n: int) -> int:
        return sum(self.counts[n]) + self.overflow[n]

    def steps_column(self, k: int) -> list[int]:
        return [self.counts[n][k] for n in range(self.max_size + 1)]

    def csv_rows(self) -> Iterator[tuple[str, str, str]]:
        for n in range(1, self.max_size + 1):
            for k in range(self.max_steps + 1):
                if self.counts[n][k]:
                    yield (str(n), str(k), str(self.counts[n][k]))
            if self.overflow[n]:
                yield (str(n), f">{self.max_steps}", str(self.overflow[n]))


def _census_one_size(args: tuple[int, int]) -> tuple[int, list[int], int]:
    n, max_steps = args
    row = [0] * (max_steps + 1)
    over = 0
    for t in terms_of_size(n):
        try:
            res = normalize(t, step_limit=max_steps)
        except StepLimitExceeded:
            over += 1
            continue
        row[res.steps] += 1
    return n, row, over


def census(max_size: int, max_steps: int = 64, jobs: int = 1) -> CensusTable:
    """Normalize every term of size <= max_size and tabulate step counts.

    Terms needing more than max_steps go to a per-size overflow bucket.
    With jobs > 1 the size buckets are processed by a process pool; the
    merge is order-independent.
    """
    table = CensusTable(
        max_size=max_size,
        max_steps=max_steps,
        counts=[[0] * (max_steps + 1) for _ in range(max_size + 1)],
        overflow=[0] * (max_size + 1),
    )
    work = [(n, max_steps) for n in range(1, max_size + 1)]
    if jobs > 1:
        import multiprocessing

        with multiprocessing.Pool(jobs) as pool:
            results = pool.map(_census_one_size, work)
    else:
        results = map(_census_one_size, work)
    for n, row, over in results:
        table.counts[n] = row
        table.overflow[n] = over
    return table


@dataclass
class VerifyReport:
    level: int
    max_size: int
    ok: bool
    rows: list[tuple[int, int, int, Optional[int]]]  # (size, census, member, series)
    first_mismatch: Optional[tuple[int, str]] = None  # (size, printed term)

    def __bool__(self) -> bool:
        return self.ok


def verify_grammar(
    g: ReductionGrammar,
    max_size: int,
    table: Optional[CensusTable] = None,
    series_coefficients: Optional[list[int]] = None,
) -> VerifyReport:
    """Check that census counts, grammar membership counts and (optionally)
    series coefficients agree for the grammar's level at every size."""
    k = g.level
    if table is None:
        table = census(max_size, max_steps=max(64, k + 1))
    matcher = Matcher(g)
    rows = []
    ok = True
    first: Optional[tuple[int, str]] = None
    for n in range(1, max_size + 1):
        member_count = sum(1 for t in terms_of_size(n) if matcher.level_member(t, k))
        census_count = table.count(n, k)
        series_count = series_coefficients[n] if series_coefficients else None
        rows.append((n, census_count, member_count, series_count))
        agreed = member_count == census_count and (
            series_count is None or series_count == census_count
        )
        if not agreed:
            ok = False
            if first is None:
                for t in terms_of_size(n):
                    in_grammar = matcher.level_member(t, k)
                    in_class = normalize(t, step_limit=table.max_steps).steps == k
                    if in_grammar != in_class:
                        first = (n, show(t))
                        break
                if first is None:
                    first = (n, "(coefficient mismatch only)")
    return VerifyReport(level=k, max_size=max_size, ok=ok, rows=rows, first_mismatch=first)


@dataclass
class AmbiguityReport:
    level: int
    max_size: int
    ok: bool
    witness: Optional[tuple[str, int]] = None  # (printed term, derivation count)

    def __bool__(self) -> bool:
        return self.ok


def verify_unambiguity(g: ReductionGrammar, max_size: int) -> AmbiguityReport:
    """Every ground term must have at most one derivation from the axiom."""
    matcher = Matcher(g)
    k = g.level
    for n in range(1, max_size + 1):
        for t in terms_of_size(n):
            c = matcher.derivations(t, k)
            if c > 1:
                return AmbiguityReport(k, max_size, False, (show(t), c))
    return AmbiguityReport(k, max_size, True)

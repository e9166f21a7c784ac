"""Finite intersection partitions of pattern languages.

``fip(a, b, g)`` returns a finite set of patterns with pairwise disjoint
languages whose union is L(a) & L(b).  The recursion mirrors sorted
unification: constructor against constructor splits into children (symbol
clash gives the empty partition), nonterminal against nonterminal takes the
meet in the sort poset, and a nonterminal against a constructor expands the
nonterminal's productions.  Termination relies on every self-referencing
production of the grammar being conservative; on grammars violating that,
the recursion would revisit an argument pair forever, which is detected and
reported instead.
"""

from __future__ import annotations

from itertools import product

from .grammar import (
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
    Sort,
    T,
    check_sorted,
    conservative_violations,
    is_simple,
    meet,
    pattern_sort,
)


class NonConservativeGrammarError(ValueError):
    """fip would diverge: the grammar has a non-conservative production."""


def _children(p: Pattern) -> tuple[Pattern, ...]:
    match p:
        case PAbs(body) | PSlash(body) | PSucc(body) | PLift(body):
            return (body,)
        case PApp(left, right):
            return (left, right)
        case PClo(body, sub):
            return (body, sub)
        case PShift() | PZero():
            return ()
    raise TypeError(f"not a constructor pattern: {p!r}")


def _rebuild(p: Pattern, children: tuple[Pattern, ...]) -> Pattern:
    match p:
        case PAbs():
            return PAbs(children[0])
        case PSlash():
            return PSlash(children[0])
        case PSucc():
            return PSucc(children[0])
        case PLift():
            return PLift(children[0])
        case PApp():
            return PApp(children[0], children[1])
        case PClo():
            return PClo(children[0], children[1])
    raise TypeError(f"not a constructor pattern: {p!r}")


def _engine(
    g: ReductionGrammar,
    a: Pattern,
    b: Pattern,
    active: set,
) -> tuple[Pattern, ...]:
    key = (a, b)
    memo = g._fip_memo
    if key in memo:
        return memo[key]
    if key in active:
        raise NonConservativeGrammarError(
            "intersection partition does not terminate; the grammar has a "
            "non-conservative self-referencing production"
        )
    active.add(key)
    try:
        result = _dispatch(g, a, b, active)
    finally:
        active.discard(key)
    memo[key] = result
    return result


def _dispatch(g, a, b, active):
    a_nt = isinstance(a, NonTerminal)
    b_nt = isinstance(b, NonTerminal)
    if not a_nt and not b_nt:
        if type(a) is not type(b):
            return ()  # symbol clash
        kids_a, kids_b = _children(a), _children(b)
        if not kids_a:
            return (a,)  # equal constants
        partitions = []
        for ka, kb in zip(kids_a, kids_b):
            parts = _engine(g, ka, kb, active)
            if not parts:
                return ()
            partitions.append(parts)
        return tuple(_rebuild(a, combo) for combo in product(*partitions))
    if a_nt and b_nt:
        m = meet(a, b)
        return (m,) if m is not None else ()
    if not a_nt:
        return _engine(g, b, a, active)  # flip arguments
    # nonterminal against constructor
    if a == T and pattern_sort(b) == Sort.TERM:
        return (b,)  # T absorbs any term-sorted pattern
    out: dict[Pattern, None] = {}
    for rhs in g.rules(a):
        for part in _engine(g, rhs, b, active):
            out[part] = None
    return tuple(out)


def _check_grammar(g: ReductionGrammar) -> None:
    simple = is_simple(g)
    if not simple:
        raise NonConservativeGrammarError(
            f"grammar is not simple: {simple.violations[0]}"
        )
    bad = conservative_violations(g)
    if bad:
        raise NonConservativeGrammarError(bad[0])


def fip(
    alpha: Pattern,
    beta: Pattern,
    g: ReductionGrammar,
    validate_grammar: bool = True,
) -> tuple[Pattern, ...]:
    """Finite intersection partition of L(alpha) and L(beta) within g.

    With validate_grammar=False the conservativeness precondition is not
    checked up front; divergence is then caught by the cycle detector, which
    raises the same NonConservativeGrammarError.
    """
    check_sorted(alpha, max_level=g.level)
    check_sorted(beta, max_level=g.level)
    if validate_grammar:
        _check_grammar(g)
    return _engine(g, alpha, beta, set())


def fip_check(
    alpha: Pattern,
    beta: Pattern,
    parts: tuple[Pattern, ...],
    bound: int,
    g: ReductionGrammar,
) -> bool:
    """Brute-force validation of a partition up to a size bound.

    Enumerates every ground term and substitution of size <= bound and
    checks that the parts are pairwise disjoint and cover exactly
    L(alpha) & L(beta).
    """
    from .grammar import Matcher
    from .oracle import substs_of_size, terms_of_size

    matcher = Matcher(g)
    for n in range(1, bound + 1):
        for pool in (terms_of_size(n), substs_of_size(n)):
            for x in pool:
                expected = 1 if (matcher.matches(x, alpha) and matcher.matches(x, beta)) else 0
                hits = sum(1 for p in parts if matcher.matches(x, p))
                if hits != expected:
                    return False
    return True

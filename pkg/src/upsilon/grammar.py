"""Sorted patterns and step-count reduction grammars.

A pattern is a tree over the lambda-upsilon constructors whose leaves may be
sorted nonterminals: T (all terms), S (all substitutions), N (de Bruijn
indices) and G0, G1, ... where Gk is meant to generate exactly the terms
that normalize in k leftmost-outermost steps.  De Bruijn indices appear in
patterns through the unary successor constructor over the zero constant, so
``succ N`` matches every index >= 1.

A ReductionGrammar bundles the fixed base productions for T, S and N with
one ordered production list per level G0..Gn.  The base productions are::

    T -> N | \\ T | T T | T[S]
    S -> T/ | +(S) | ^
    N -> 0 | succ N

Pattern syntax extends the term syntax with nonterminal names (``T``, ``S``,
``N``, ``G0``, ``G1``, ...) and the prefix ``succ``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import reduce
from typing import Iterator, Optional, Union

from .terms import (
    Abs,
    App,
    Closure,
    Index,
    Lift,
    Node,
    Shift,
    Slash,
    TermSyntaxError,
)


class Sort(Enum):
    TERM = "term"
    SUBST = "subst"
    INDEX = "index"


@dataclass(frozen=True, slots=True)
class NonTerminal:
    kind: str  # "T" | "S" | "N" | "G"
    level: int = -1

    def __str__(self) -> str:
        return self.kind if self.kind != "G" else f"G{self.level}"


T = NonTerminal("T")
S = NonTerminal("S")
N = NonTerminal("N")


def G(k: int) -> NonTerminal:
    if k < 0:
        raise ValueError("grammar levels are non-negative")
    return NonTerminal("G", k)


@dataclass(frozen=True, slots=True)
class PAbs:
    body: "Pattern"


@dataclass(frozen=True, slots=True)
class PApp:
    left: "Pattern"
    right: "Pattern"


@dataclass(frozen=True, slots=True)
class PClo:
    body: "Pattern"
    sub: "Pattern"


@dataclass(frozen=True, slots=True)
class PSlash:
    body: "Pattern"


@dataclass(frozen=True, slots=True)
class PLift:
    sub: "Pattern"


@dataclass(frozen=True, slots=True)
class PShift:
    pass


@dataclass(frozen=True, slots=True)
class PZero:
    pass


@dataclass(frozen=True, slots=True)
class PSucc:
    body: "Pattern"


Pattern = Union[NonTerminal, PAbs, PApp, PClo, PSlash, PLift, PShift, PZero, PSucc]

PSHIFT = PShift()
PZERO = PZero()


@dataclass(frozen=True, slots=True)
class Production:
    lhs: NonTerminal
    rhs: Pattern

    def __str__(self) -> str:
        return f"{self.lhs} -> {show_pattern(self.rhs)}"


class GrammarInvariantError(ValueError):
    """A constructed grammar violates a structural invariant."""


def pattern_sort(p: Pattern) -> Sort:
    match p:
        case NonTerminal("T") | NonTerminal("G"):
            return Sort.TERM
        case NonTerminal("S"):
            return Sort.SUBST
        case NonTerminal("N"):
            return Sort.INDEX
        case PAbs() | PApp() | PClo():
            return Sort.TERM
        case PSlash() | PLift() | PShift():
            return Sort.SUBST
        case PZero() | PSucc():
            return Sort.INDEX
    raise TypeError(f"not a pattern: {p!r}")


def sort_le(a: Sort, b: Sort) -> bool:
    """Sub-sorting: every index is a term."""
    return a == b or (a == Sort.INDEX and b == Sort.TERM)


def check_sorted(p: Pattern, max_level: Optional[int] = None) -> None:
    """Raise GrammarInvariantError unless p is well-sorted (and its G-levels
    do not exceed max_level, when given)."""

    def need(child: Pattern, sort: Sort) -> None:
        if not sort_le(pattern_sort(child), sort):
            raise GrammarInvariantError(
                f"ill-sorted pattern: {show_pattern(child)} used at sort {sort.value}"
            )
        walk(child)

    def walk(q: Pattern) -> None:
        match q:
            case NonTerminal("G", k) if max_level is not None and k > max_level:
                raise GrammarInvariantError(f"nonterminal G{k} exceeds level {max_level}")
            case NonTerminal():
                pass
            case PAbs(body):
                need(body, Sort.TERM)
            case PApp(left, right):
                need(left, Sort.TERM)
                need(right, Sort.TERM)
            case PClo(body, sub):
                need(body, Sort.TERM)
                need(sub, Sort.SUBST)
            case PSlash(body):
                need(body, Sort.TERM)
            case PLift(sub):
                need(sub, Sort.SUBST)
            case PShift() | PZero():
                pass
            case PSucc(body):
                need(body, Sort.INDEX)

    walk(p)


def pattern_of_term(x: Node) -> Pattern:
    """Embed a ground term as a (ground) pattern."""
    match x:
        case Index(n):
            p: Pattern = PZERO
            for _ in range(n):
                p = PSucc(p)
            return p
        case Abs(body):
            return PAbs(pattern_of_term(body))
        case App(left, right):
            return PApp(pattern_of_term(left), pattern_of_term(right))
        case Closure(body, sub):
            return PClo(pattern_of_term(body), pattern_of_term(sub))
        case Slash(body):
            return PSlash(pattern_of_term(body))
        case Lift(sub):
            return PLift(pattern_of_term(sub))
        case Shift():
            return PSHIFT
    raise TypeError(f"not a term: {x!r}")


def contains_nt(p: Pattern, nt: NonTerminal) -> bool:
    match p:
        case NonTerminal():
            return p == nt
        case PAbs(body) | PSlash(body) | PSucc(body) | PLift(body):
            return contains_nt(body, nt)
        case PApp(left, right):
            return contains_nt(left, nt) or contains_nt(right, nt)
        case PClo(body, sub):
            return contains_nt(body, nt) or contains_nt(sub, nt)
    return False


def nonterminals_of(p: Pattern) -> Iterator[NonTerminal]:
    match p:
        case NonTerminal():
            yield p
        case PAbs(body) | PSlash(body) | PSucc(body) | PLift(body):
            yield from nonterminals_of(body)
        case PApp(left, right):
            yield from nonterminals_of(left)
            yield from nonterminals_of(right)
        case PClo(body, sub):
            yield from nonterminals_of(body)
            yield from nonterminals_of(sub)


# ---------------------------------------------------------------------------
# sort poset


def poset_le(x: NonTerminal, y: NonTerminal) -> bool:
    """Language inclusion order: N below G0 below T, every Gk below T.

    S is comparable only to itself; distinct step counts are incomparable
    (their languages are disjoint since every term normalizes in a unique
    number of steps).
    """
    if x == y:
        return True
    if y == T:
        return x.kind in ("N", "G")
    if y == G(0):
        return x == N
    return False


def meet(x: NonTerminal, y: NonTerminal) -> Optional[NonTerminal]:
    """Greatest lower bound of comparable nonterminals; None if incomparable,
    which implies the two languages are disjoint."""
    if poset_le(x, y):
        return x
    if poset_le(y, x):
        return y
    return None


# ---------------------------------------------------------------------------
# closure spines


@dataclass(frozen=True)
class ClosureSplit:
    head: Pattern
    tail: tuple[Pattern, ...]

    @property
    def width(self) -> int:
        return len(self.tail)


def closure_split(p: Pattern) -> ClosureSplit:
    """Maximal decomposition p = head[tail_1]...[tail_w], head not a closure."""
    tail: list[Pattern] = []
    while isinstance(p, PClo):
        tail.append(p.sub)
        p = p.body
    tail.reverse()
    return ClosureSplit(p, tuple(tail))


def rebuild_closures(head: Pattern, tail: tuple[Pattern, ...]) -> Pattern:
    return reduce(PClo, tail, head)


# ---------------------------------------------------------------------------
# grammars

BASE_T: tuple[Pattern, ...] = (N, PAbs(T), PApp(T, T), PClo(T, S))
BASE_S: tuple[Pattern, ...] = (PSlash(T), PLift(S), PSHIFT)
BASE_N: tuple[Pattern, ...] = (PZERO, PSucc(N))

_ALLOWED_BASE_SELFREF = {
    "T": set(BASE_T[1:]),
    "S": {PLift(S)},
    "N": {PSucc(N)},
}


class ReductionGrammar:
    """Fixed base productions plus ordered production lists for G0..Gn.

    Instances are immutable after construction; predicates, membership and
    intersection partitions all cache on the instance.
    """

    def __init__(self, g_rules: tuple[tuple[Pattern, ...], ...]):
        if not g_rules:
            raise GrammarInvariantError("a reduction grammar has at least level 0")
        self.level = len(g_rules) - 1
        self.g_rules = tuple(tuple(rules) for rules in g_rules)
        for k, rules in enumerate(self.g_rules):
            for rhs in rules:
                check_sorted(rhs, max_level=self.level)
                if not sort_le(pattern_sort(rhs), Sort.TERM):
                    raise GrammarInvariantError(
                        f"G{k} production has non-term sort: {show_pattern(rhs)}"
                    )
                if isinstance(rhs, NonTerminal) and rhs.kind == "G":
                    raise GrammarInvariantError(
                        f"bare nonterminal production G{k} -> {rhs} is not supported"
                    )
        self._potentials: Optional[dict[NonTerminal, int]] = None
        self._fip_memo: dict = {}
        self._member_memo: dict = {}
        self._deriv_memo: dict = {}
        self._candidates: Optional[list[dict[str, tuple[Pattern, ...]]]] = None

    @property
    def axiom(self) -> NonTerminal:
        return G(self.level)

    def rules(self, nt: NonTerminal) -> tuple[Pattern, ...]:
        if nt.kind == "T":
            return BASE_T
        if nt.kind == "S":
            return BASE_S
        if nt.kind == "N":
            return BASE_N
        if nt.kind == "G" and 0 <= nt.level <= self.level:
            return self.g_rules[nt.level]
        raise KeyError(f"{nt} is not a nonterminal of this grammar (level {self.level})")

    def nonterminals(self) -> tuple[NonTerminal, ...]:
        return (T, S, N) + tuple(G(k) for k in range(self.level + 1))

    def productions(self) -> Iterator[Production]:
        for nt in self.nonterminals():
            for rhs in self.rules(nt):
                yield Production(nt, rhs)

    def level_grammar(self, k: int) -> "ReductionGrammar":
        """The truncation to levels 0..k (a simple grammar contains all its
        predecessors)."""
        if not 0 <= k <= self.level:
            raise ValueError(f"level {k} not in 0..{self.level}")
        if k == self.level:
            return self
        return ReductionGrammar(self.g_rules[: k + 1])

    def potential(self, nt: NonTerminal) -> int:
        if self._potentials is None:
            pot: dict[NonTerminal, int] = {}
            pot[N] = 1 + max(_potential(r, pot) for r in BASE_N if not contains_nt(r, N))
            pot[T] = 1 + max(_potential(r, pot) for r in BASE_T if not contains_nt(r, T))
            pot[S] = 1 + max(_potential(r, pot) for r in BASE_S if not contains_nt(r, S))
            best = 0
            for k in range(self.level + 1):
                regular = [r for r in self.g_rules[k] if not contains_nt(r, G(k))]
                if not regular:
                    raise GrammarInvariantError(f"G{k} has no regular production")
                best = max(best, max(_potential(r, pot) for r in regular))
                pot[G(k)] = 1 + best
            self._potentials = pot
        return self._potentials[nt]


def _potential(p: Pattern, nt_pot: dict[NonTerminal, int]) -> int:
    match p:
        case NonTerminal():
            return nt_pot[p]
        case PAbs(body) | PSlash(body) | PSucc(body) | PLift(body):
            return 1 + _potential(body, nt_pot)
        case PApp(left, right):
            return 1 + _potential(left, nt_pot) + _potential(right, nt_pot)
        case PClo(body, sub):
            return 1 + _potential(body, nt_pot) + _potential(sub, nt_pot)
        case PShift() | PZero():
            return 1
    raise TypeError(f"not a pattern: {p!r}")


def potential(p: Pattern, g: ReductionGrammar) -> int:
    """Inductive weight embedding patterns into a well-founded order.

    Constructors add one plus their children; a nonterminal weighs one more
    than the heaviest right-hand side among its regular productions (for Gk,
    among the regular productions of all levels up to k).
    """
    check_sorted(p, max_level=g.level)
    g.potential(T)  # force the nonterminal table
    return _potential(p, g._potentials)


def is_self_referencing(prod: Production) -> bool:
    return contains_nt(prod.rhs, prod.lhs)


@dataclass(frozen=True)
class CheckReport:
    ok: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def is_simple(g: ReductionGrammar) -> CheckReport:
    """Self-referencing productions are restricted to the base grammar forms
    and Gk -> \\ Gk | G0 Gk | Gk G0; regular Gk productions may reference
    only T, S, N and lower levels."""
    bad: list[str] = []
    for prod in g.productions():
        nt, rhs = prod.lhs, prod.rhs
        if is_self_referencing(prod):
            if nt.kind == "G":
                allowed = {PAbs(nt), PApp(G(0), nt), PApp(nt, G(0))}
                if rhs not in allowed:
                    bad.append(f"disallowed self-referencing production: {prod}")
            elif rhs not in _ALLOWED_BASE_SELFREF[nt.kind]:
                bad.append(f"disallowed self-referencing production: {prod}")
        elif nt.kind == "G":
            for ref in nonterminals_of(rhs):
                if ref.kind == "G" and ref.level >= nt.level:
                    bad.append(f"forward or same-level reference in {prod}")
                    break
    return CheckReport(not bad, tuple(bad))


def is_verbose(g: ReductionGrammar) -> CheckReport:
    """No production's right-hand side has a Gk at the head of its closure
    spine (such productions would not preserve closure width)."""
    bad = []
    for prod in g.productions():
        head = closure_split(prod.rhs).head
        if isinstance(head, NonTerminal) and head.kind == "G":
            bad.append(f"closure head is a step nonterminal: {prod}")
    return CheckReport(not bad, tuple(bad))


def is_conservative(prod: Production, g: ReductionGrammar) -> bool:
    """A self-referencing production is conservative when every immediate
    argument of its right-hand side that mentions the left-hand side weighs
    no more than the left-hand side itself.

    This is the bound the partition algorithm's termination rests on:
    expanding the production and peeling one constructor must not increase
    the total weight along the self-referencing branch.  Arguments free of
    the left-hand side shed weight through the other branch instead (their
    partner is a proper subpattern).
    """
    if not is_self_referencing(prod):
        raise ValueError(f"{prod} is not self-referencing")
    limit = potential(prod.lhs, g)
    match prod.rhs:
        case NonTerminal():
            args: tuple[Pattern, ...] = ()
        case PAbs(body) | PSlash(body) | PSucc(body) | PLift(body):
            args = (body,)
        case PApp(left, right):
            args = (left, right)
        case PClo(body, sub):
            args = (body, sub)
        case _:
            args = ()
    return all(
        potential(a, g) <= limit for a in args if contains_nt(a, prod.lhs)
    )


def conservative_violations(g: ReductionGrammar) -> tuple[str, ...]:
    return tuple(
        f"non-conservative self-referencing production: {prod}"
        for prod in g.productions()
        if is_self_referencing(prod) and not is_conservative(prod, g)
    )


def validate(g: ReductionGrammar) -> None:
    """Raise GrammarInvariantError naming the first offending production."""
    problems = list(is_simple(g).violations)
    problems += list(is_verbose(g).violations)
    problems += list(conservative_violations(g))
    if problems:
        raise GrammarInvariantError("; ".join(problems))


# ---------------------------------------------------------------------------
# membership

_TERM_KINDS = ("zero", "succ", "abs", "app", "clo")
_SUBST_KINDS = ("slash", "lift", "shift")


def _node_kind(x: Node) -> str:
    match x:
        case Index(0):
            return "zero"
        case Index(_):
            return "succ"
        case Abs():
            return "abs"
        case App():
            return "app"
        case Closure():
            return "clo"
        case Slash():
            return "slash"
        case Lift():
            return "lift"
        case Shift():
            return "shift"
    raise TypeError(f"not a term: {x!r}")


def _feasible_kinds(p: Pattern) -> tuple[str, ...]:
    match p:
        case NonTerminal("T") | NonTerminal("G"):
            return _TERM_KINDS
        case NonTerminal("S"):
            return _SUBST_KINDS
        case NonTerminal("N"):
            return ("zero", "succ")
        case PAbs():
            return ("abs",)
        case PApp():
            return ("app",)
        case PClo():
            return ("clo",)
        case PSlash():
            return ("slash",)
        case PLift():
            return ("lift",)
        case PShift():
            return ("shift",)
        case PZero():
            return ("zero",)
        case PSucc():
            return ("succ",)
    raise TypeError(f"not a pattern: {p!r}")


class Matcher:
    """Decides ground-term membership in pattern languages for one grammar.

    Membership of a term in L(Gk) is memoized per (term, level); T, S and N
    are decided by sort alone, which matches their fixed base productions.
    Derivation counting shares the machinery and is used by the
    unambiguity checks.
    """

    def __init__(self, g: ReductionGrammar):
        self.g = g
        if g._candidates is None:
            g._candidates = [
                _index_by_kind(rules) for rules in g.g_rules
            ]
        self.candidates = g._candidates
        self.member_memo = g._member_memo
        self.deriv_memo = g._deriv_memo

    def level_member(self, x: Node, k: int) -> bool:
        key = (x, k)
        cached = self.member_memo.get(key)
        if cached is not None:
            return cached
        result = False
        for rhs in self.candidates[k].get(_node_kind(x), ()):
            if self.matches(x, rhs):
                result = True
                break
        self.member_memo[key] = result
        return result

    def matches(self, x: Node, p: Pattern) -> bool:
        """x in L(p), by structural recursion."""
        match p:
            case NonTerminal("T"):
                return isinstance(x, (Index, Abs, App, Closure))
            case NonTerminal("S"):
                return isinstance(x, (Slash, Lift, Shift))
            case NonTerminal("N"):
                return isinstance(x, Index)
            case NonTerminal("G", k):
                return self.level_member(x, k)
            case PAbs(body):
                return isinstance(x, Abs) and self.matches(x.body, body)
            case PApp(left, right):
                return (
                    isinstance(x, App)
                    and self.matches(x.left, left)
                    and self.matches(x.right, right)
                )
            case PClo(body, sub):
                return (
                    isinstance(x, Closure)
                    and self.matches(x.body, body)
                    and self.matches(x.sub, sub)
                )
            case PSlash(body):
                return isinstance(x, Slash) and self.matches(x.body, body)
            case PLift(sub):
                return isinstance(x, Lift) and self.matches(x.sub, sub)
            case PShift():
                return isinstance(x, Shift)
            case PZero():
                return isinstance(x, Index) and x.n == 0
            case PSucc(body):
                return isinstance(x, Index) and x.n >= 1 and self.matches(Index(x.n - 1), body)
        raise TypeError(f"not a pattern: {p!r}")

    def derivations(self, x: Node, k: int) -> int:
        """Number of distinct derivations of x from Gk."""
        key = (x, k)
        cached = self.deriv_memo.get(key)
        if cached is not None:
            return cached
        total = 0
        for rhs in self.candidates[k].get(_node_kind(x), ()):
            total += self.match_count(x, rhs)
        self.deriv_memo[key] = total
        return total

    def match_count(self, x: Node, p: Pattern) -> int:
        match p:
            case NonTerminal("T"):
                # the base grammar is unambiguous: at most one derivation
                return 1 if isinstance(x, (Index, Abs, App, Closure)) else 0
            case NonTerminal("S"):
                return 1 if isinstance(x, (Slash, Lift, Shift)) else 0
            case NonTerminal("N"):
                return 1 if isinstance(x, Index) else 0
            case NonTerminal("G", k):
                return self.derivations(x, k)
            case PAbs(body):
                return self.match_count(x.body, body) if isinstance(x, Abs) else 0
            case PApp(left, right):
                if not isinstance(x, App):
                    return 0
                return self.match_count(x.left, left) * self.match_count(x.right, right)
            case PClo(body, sub):
                if not isinstance(x, Closure):
                    return 0
                return self.match_count(x.body, body) * self.match_count(x.sub, sub)
            case PSlash(body):
                return self.match_count(x.body, body) if isinstance(x, Slash) else 0
            case PLift(sub):
                return self.match_count(x.sub, sub) if isinstance(x, Lift) else 0
            case PShift():
                return 1 if isinstance(x, Shift) else 0
            case PZero():
                return 1 if isinstance(x, Index) and x.n == 0 else 0
            case PSucc(body):
                if isinstance(x, Index) and x.n >= 1:
                    return self.match_count(Index(x.n - 1), body)
                return 0
        raise TypeError(f"not a pattern: {p!r}")


def _index_by_kind(rules: tuple[Pattern, ...]) -> dict[str, tuple[Pattern, ...]]:
    buckets: dict[str, list[Pattern]] = {}
    for rhs in rules:
        for kind in _feasible_kinds(rhs):
            buckets.setdefault(kind, []).append(rhs)
    return {kind: tuple(rs) for kind, rs in buckets.items()}


def member(x: Node, p: Pattern, g: ReductionGrammar) -> bool:
    """Ground-term membership x in L(p) within grammar g."""
    check_sorted(p, max_level=g.level)
    return Matcher(g).matches(x, p)


# ---------------------------------------------------------------------------
# pattern syntax


def show_pattern(p: Pattern) -> str:
    ground = _ground_index(p)
    if ground is not None:
        return str(ground)
    match p:
        case NonTerminal():
            return str(p)
        case PAbs(body):
            return "\\ " + show_pattern(body)
        case PApp(left, right):
            ls = show_pattern(left)
            if isinstance(left, PAbs) or (isinstance(left, PSucc) and _ground_index(left) is None):
                ls = f"({ls})"
            rs = show_pattern(right)
            if not isinstance(right, (NonTerminal, PClo, PZero)) and _ground_index(right) is None:
                rs = f"({rs})"
            return f"{ls} {rs}"
        case PClo(body, sub):
            bs = show_pattern(body)
            if isinstance(body, (PAbs, PApp)) or (
                isinstance(body, PSucc) and _ground_index(body) is None
            ):
                bs = f"({bs})"
            return f"{bs}[{show_pattern(sub)}]"
        case PSlash(body):
            return show_pattern(body) + "/"
        case PLift(sub):
            return f"+({show_pattern(sub)})"
        case PShift():
            return "^"
        case PZero():
            return "0"
        case PSucc(body):
            bs = show_pattern(body)
            if not isinstance(body, (NonTerminal, PSucc, PZero)):
                bs = f"({bs})"
            return f"succ {bs}"
    raise TypeError(f"not a pattern: {p!r}")


def _ground_index(p: Pattern) -> Optional[int]:
    n = 0
    while isinstance(p, PSucc):
        n += 1
        p = p.body
    return n if isinstance(p, PZero) else None


_NT_TOKENS = {"T": T, "S": S, "N": N}


class _PatternParser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize_pattern(text)
        self.pos = 0

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def next(self) -> tuple[str, str, int]:
        if self.pos >= len(self.tokens):
            raise TermSyntaxError("unexpected end of input", len(self.text))
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> None:
        tok = self.next()
        if tok[0] != kind:
            raise TermSyntaxError(f"expected {kind!r}, found {tok[1]!r}", tok[2])

    def pattern(self) -> Pattern:
        if self.peek() == "\\":
            self.next()
            return PAbs(self.pattern())
        p = self.closed()
        while self.peek() in ("num", "(", "name", "succ"):
            p = PApp(p, self.closed())
        return p

    def closed(self) -> Pattern:
        p = self.atom()
        while self.peek() == "[":
            self.next()
            s = self.subst()
            self.expect("]")
            p = PClo(p, s)
        return p

    def atom(self) -> Pattern:
        kind, value, at = self.next()
        if kind == "num":
            p: Pattern = PZERO
            for _ in range(int(value)):
                p = PSucc(p)
            return p
        if kind == "name":
            if value in _NT_TOKENS:
                return _NT_TOKENS[value]
            return G(int(value[1:]))
        if kind == "succ":
            return PSucc(self.atom())
        if kind == "(":
            p = self.pattern()
            self.expect(")")
            return p
        raise TermSyntaxError(f"expected a pattern, found {value!r}", at)

    def subst(self) -> Pattern:
        if self.peek() == "^":
            self.next()
            return PSHIFT
        if self.peek() == "+":
            self.next()
            self.expect("(")
            s = self.subst()
            self.expect(")")
            return PLift(s)
        # a leading S can only be the substitution nonterminal itself; any
        # slash pattern starts with a term-sorted token
        if self.peek() == "name" and self.tokens[self.pos][1] == "S":
            self.next()
            return S
        p = self.pattern()
        self.expect("/")
        return PSlash(p)


def _tokenize_pattern(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(("num", text[i:j], i))
            i = j
        elif c in "\\()[]/+^":
            tokens.append((c, c, i))
            i += 1
        elif c.isalpha():
            j = i
            while j < len(text) and (text[j].isalnum()):
                j += 1
            word = text[i:j]
            if word == "succ":
                tokens.append(("succ", word, i))
            elif word in ("T", "S", "N") or (word[0] == "G" and word[1:].isdigit()):
                tokens.append(("name", word, i))
            else:
                raise TermSyntaxError(f"unknown name {word!r}", i)
            i = j
        else:
            raise TermSyntaxError(f"unexpected character {c!r}", i)
    return tokens


def parse_pattern(text: str) -> Pattern:
    p = _PatternParser(text)
    result = p.pattern() if p.peek() != "^" and p.peek() != "+" else p.subst()
    if p.peek() == "/":  # a lone trailing slash: the whole thing is a substitution
        p.next()
        result = PSlash(result)
    if p.peek() is not None:
        tok = p.tokens[p.pos]
        raise TermSyntaxError(f"trailing input {tok[1]!r}", tok[2])
    check_sorted(result)
    return result


# ---------------------------------------------------------------------------
# grammar text and JSON formats


def format_grammar(g: ReductionGrammar) -> str:
    """One production per line, base productions first."""
    return "\n".join(str(prod) for prod in g.productions()) + "\n"


def pattern_to_json(p: Pattern):
    match p:
        case NonTerminal():
            return str(p)
        case PAbs(body):
            return ["abs", pattern_to_json(body)]
        case PApp(left, right):
            return ["app", pattern_to_json(left), pattern_to_json(right)]
        case PClo(body, sub):
            return ["closure", pattern_to_json(body), pattern_to_json(sub)]
        case PSlash(body):
            return ["slash", pattern_to_json(body)]
        case PLift(sub):
            return ["lift", pattern_to_json(sub)]
        case PShift():
            return "shift"
        case PZero():
            return "zero"
        case PSucc(body):
            return ["succ", pattern_to_json(body)]
    raise TypeError(f"not a pattern: {p!r}")


def pattern_from_json(data) -> Pattern:
    if isinstance(data, str):
        if data == "shift":
            return PSHIFT
        if data == "zero":
            return PZERO
        if data in _NT_TOKENS:
            return _NT_TOKENS[data]
        if data.startswith("G") and data[1:].isdigit():
            return G(int(data[1:]))
        raise ValueError(f"bad pattern leaf: {data!r}")
    op, *args = data
    builders = {
        "abs": PAbs,
        "app": PApp,
        "closure": PClo,
        "slash": PSlash,
        "lift": PLift,
        "succ": PSucc,
    }
    return builders[op](*(pattern_from_json(a) for a in args))


def grammar_to_json(g: ReductionGrammar) -> dict:
    return {
        "level": g.level,
        "productions": [
            {"lhs": str(prod.lhs), "rhs": pattern_to_json(prod.rhs)}
            for prod in g.productions()
        ],
    }


def grammar_from_json(data: dict) -> ReductionGrammar:
    level = data["level"]
    rules: list[list[Pattern]] = [[] for _ in range(level + 1)]
    for item in data["productions"]:
        lhs = item["lhs"]
        if lhs in ("T", "S", "N"):
            continue  # base productions are fixed
        rules[int(lhs[1:])].append(pattern_from_json(item["rhs"]))
    return ReductionGrammar(tuple(tuple(rs) for rs in rules))


def parse_grammar(text: str) -> ReductionGrammar:
    """Parse the one-production-per-line text format."""
    rules: dict[int, list[Pattern]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "->" not in line:
            raise TermSyntaxError(f"line {lineno}: missing '->'", 0)
        lhs_text, rhs_text = line.split("->", 1)
        lhs_text = lhs_text.strip()
        rhs = parse_pattern(rhs_text.strip())
        if lhs_text in ("T", "S", "N"):
            continue
        if not (lhs_text.startswith("G") and lhs_text[1:].isdigit()):
            raise TermSyntaxError(f"line {lineno}: bad nonterminal {lhs_text!r}", 0)
        rules.setdefault(int(lhs_text[1:]), []).append(rhs)
    if not rules:
        raise GrammarInvariantError("no productions found")
    level = max(rules)
    return ReductionGrammar(
        tuple(tuple(rules.get(k, ())) for k in range(level + 1))
    )

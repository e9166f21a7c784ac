"""Lambda-upsilon terms and the normal-order upsilon-reduction engine.

The lambda-upsilon calculus extends the de Bruijn-indexed lambda calculus
with explicit substitutions.  A closure ``t[s]`` carries a pending
substitution ``s``, which is one of ``t/`` (substitute ``t`` for index 0),
``+(s)`` (lift ``s`` under a binder) or ``^`` (shift every free index up by
one).  Without the beta rule the system is terminating and its normal forms
are exactly the closure-free ("pure") terms.

Concrete syntax accepted by :func:`parse` and produced by :func:`show`::

    index         0, 1, 2, ...
    abstraction   \\ t          (body extends as far right as possible)
    application   t t           (juxtaposition, left-associative)
    closure       t[s]          (binds tighter than application, stacks
                                 left-to-right: t[s1][s2] = (t[s1])[s2])
    slash         t/
    lift          +(s)
    shift         ^

Reduction is leftmost-outermost: the contracted redex is the first node in
pre-order that matches a rule (a node before its children, children left to
right, and a closure body before its substitution).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union


class Rule(Enum):
    """The seven substitution-resolution rules (beta is out of scope)."""

    APP = "App"
    LAMBDA = "Lambda"
    FVAR = "FVar"
    RVAR = "RVar"
    FVARLIFT = "FVarLift"
    RVARLIFT = "RVarLift"
    VARSHIFT = "VarShift"


@dataclass(frozen=True, slots=True)
class Index:
    n: int


@dataclass(frozen=True, slots=True)
class Abs:
    body: "Term"


@dataclass(frozen=True, slots=True)
class App:
    left: "Term"
    right: "Term"


@dataclass(frozen=True, slots=True)
class Closure:
    body: "Term"
    sub: "Subst"


@dataclass(frozen=True, slots=True)
class Slash:
    body: "Term"


@dataclass(frozen=True, slots=True)
class Lift:
    sub: "Subst"


@dataclass(frozen=True, slots=True)
class Shift:
    pass


Term = Union[Index, Abs, App, Closure]
Subst = Union[Slash, Lift, Shift]
Node = Union[Term, Subst]

SHIFT = Shift()


class StepLimitExceeded(RuntimeError):
    """Raised when normalize hits its safety step limit."""


def size(x: Node) -> int:
    """Constructor count; an index counts as n + 1 (n successors plus zero)."""
    match x:
        case Index(n):
            return n + 1
        case Abs(body):
            return 1 + size(body)
        case App(left, right):
            return 1 + size(left) + size(right)
        case Closure(body, sub):
            return 1 + size(body) + size(sub)
        case Slash(body):
            return 1 + size(body)
        case Lift(sub):
            return 1 + size(sub)
        case Shift():
            return 1
    raise TypeError(f"not a term: {x!r}")


def is_pure(x: Node) -> bool:
    """True iff x contains no closure, i.e. is an upsilon-normal form."""
    match x:
        case Index():
            return True
        case Abs(body):
            return is_pure(body)
        case App(left, right):
            return is_pure(left) and is_pure(right)
        case Closure():
            return False
        case Slash(body):
            return is_pure(body)
        case Lift(sub):
            return is_pure(sub)
        case Shift():
            return True
    raise TypeError(f"not a term: {x!r}")


def closure_width(t: Term) -> int:
    """Length of the maximal closure spine t = head[s1]...[sw]."""
    w = 0
    while isinstance(t, Closure):
        w += 1
        t = t.body
    return w


def head_rule(t: Node) -> Optional[Rule]:
    """Rule matching the top of t, if the top is a redex."""
    if not isinstance(t, Closure):
        return None
    body, sub = t.body, t.sub
    match body:
        case App():
            return Rule.APP
        case Abs():
            return Rule.LAMBDA
        case Index(0):
            match sub:
                case Slash():
                    return Rule.FVAR
                case Lift():
                    return Rule.FVARLIFT
                case Shift():
                    return Rule.VARSHIFT
        case Index(_):
            match sub:
                case Slash():
                    return Rule.RVAR
                case Lift():
                    return Rule.RVARLIFT
                case Shift():
                    return Rule.VARSHIFT
    return None


def contract(t: Closure, rule: Rule) -> Term:
    """Contract the head redex of t according to rule."""
    body, sub = t.body, t.sub
    if rule is Rule.APP:
        return App(Closure(body.left, sub), Closure(body.right, sub))
    if rule is Rule.LAMBDA:
        return Abs(Closure(body.body, Lift(sub)))
    if rule is Rule.FVAR:
        return sub.body
    if rule is Rule.RVAR:
        return Index(body.n - 1)
    if rule is Rule.FVARLIFT:
        return Index(0)
    if rule is Rule.RVARLIFT:
        return Closure(Closure(Index(body.n - 1), sub.sub), SHIFT)
    if rule is Rule.VARSHIFT:
        return Index(body.n + 1)
    raise ValueError(rule)


def find_redex(t: Node) -> Optional[tuple[list[int], Rule]]:
    """Locate the leftmost-outermost redex.

    Returns the path of child indices from the root (Abs/Slash/Lift child is
    0; App left/right are 0/1; Closure body/sub are 0/1) and the matching
    rule, or None when t is a normal form.
    """
    rule = head_rule(t)
    if rule is not None:
        return [], rule
    children: tuple[Node, ...]
    match t:
        case Abs(body):
            children = (body,)
        case App(left, right):
            children = (left, right)
        case Closure(body, sub):
            children = (body, sub)
        case Slash(body):
            children = (body,)
        case Lift(sub):
            children = (sub,)
        case _:
            return None
    for i, child in enumerate(children):
        found = find_redex(child)
        if found is not None:
            path, rule = found
            return [i] + path, rule
    return None


def step(t: Node) -> Optional[tuple[Node, Rule]]:
    """Contract the leftmost-outermost redex; None iff t is normal."""
    rule = head_rule(t)
    if rule is not None:
        return contract(t, rule), rule
    match t:
        case Abs(body):
            if (res := step(body)) is not None:
                return Abs(res[0]), res[1]
        case App(left, right):
            if (res := step(left)) is not None:
                return App(res[0], right), res[1]
            if (res := step(right)) is not None:
                return App(left, res[0]), res[1]
        case Closure(body, sub):
            if (res := step(body)) is not None:
                return Closure(res[0], sub), res[1]
            if (res := step(sub)) is not None:
                return Closure(body, res[0]), res[1]
        case Slash(body):
            if (res := step(body)) is not None:
                return Slash(res[0]), res[1]
        case Lift(sub):
            if (res := step(sub)) is not None:
                return Lift(res[0]), res[1]
    return None


@dataclass(frozen=True)
class NormalizeResult:
    nf: Term
    steps: int
    trace: Optional[tuple[tuple[Term, Rule], ...]]


def normalize(
    t: Term,
    step_limit: Optional[int] = None,
    keep_trace: bool = False,
) -> NormalizeResult:
    """Reduce t to its upsilon-normal form, counting normal-order steps.

    The fragment is terminating, so step_limit is only a safety valve:
    exceeding it raises StepLimitExceeded and signals a bug (or a limit set
    too low for the input).
    """
    trace: list[tuple[Term, Rule]] = []
    steps = 0
    cur = t
    while (res := step(cur)) is not None:
        cur, rule = res
        steps += 1
        if step_limit is not None and steps > step_limit:
            raise StepLimitExceeded(f"no normal form within {step_limit} steps")
        if keep_trace:
            trace.append((cur, rule))
    return NormalizeResult(cur, steps, tuple(trace) if keep_trace else None)


def step_witness(n: int) -> Term:
    """A term normalizing in exactly n normal-order steps (n >= 1).

    The family starts from 0[+(^)] (one FVarLift step) and wraps with
    0[./], each wrap adding one FVar step.
    """
    if n < 1:
        raise ValueError("witness family starts at 1")
    t: Term = Closure(Index(0), Lift(SHIFT))
    for _ in range(n - 1):
        t = Closure(Index(0), Slash(t))
    return t


# ---------------------------------------------------------------------------
# concrete syntax


class TermSyntaxError(ValueError):
    """Malformed input; position is a 0-based offset into the source text."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


_PUNCT = set("\\()[]/+^")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
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
        elif c in _PUNCT:
            tokens.append((c, c, i))
            i += 1
        else:
            raise TermSyntaxError(f"unexpected character {c!r}", i)
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def next(self) -> tuple[str, str, int]:
        if self.pos >= len(self.tokens):
            raise TermSyntaxError("unexpected end of input", len(self.text))
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind:
            raise TermSyntaxError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def offset(self) -> int:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][2]
        return len(self.text)

    def term(self) -> Term:
        if self.peek() == "\\":
            self.next()
            return Abs(self.term())
        t = self.closed()
        while self.peek() in ("num", "("):
            t = App(t, self.closed())
        return t

    def closed(self) -> Term:
        t = self.atom()
        while self.peek() == "[":
            self.next()
            s = self.subst()
            self.expect("]")
            t = Closure(t, s)
        return t

    def atom(self) -> Term:
        kind, value, at = self.next()
        if kind == "num":
            return Index(int(value))
        if kind == "(":
            t = self.term()
            self.expect(")")
            return t
        raise TermSyntaxError(f"expected a term, found {value!r}", at)

    def subst(self) -> Subst:
        if self.peek() == "^":
            self.next()
            return SHIFT
        if self.peek() == "+":
            self.next()
            self.expect("(")
            s = self.subst()
            self.expect(")")
            return Lift(s)
        t = self.term()
        self.expect("/")
        return Slash(t)


def parse(text: str) -> Term:
    """Parse the concrete term syntax; raises TermSyntaxError on bad input."""
    p = _Parser(text)
    t = p.term()
    if p.peek() is not None:
        raise TermSyntaxError(f"trailing input {p.tokens[p.pos][1]!r}", p.offset())
    return t


def parse_subst(text: str) -> Subst:
    p = _Parser(text)
    s = p.subst()
    if p.peek() is not None:
        raise TermSyntaxError(f"trailing input {p.tokens[p.pos][1]!r}", p.offset())
    return s


def show(x: Node) -> str:
    """Canonical printing; parse(show(t)) == t for every term t."""
    match x:
        case Index(n):
            return str(n)
        case Abs(body):
            return "\\ " + show(body)
        case App(left, right):
            ls = show(left) if not isinstance(left, Abs) else f"({show(left)})"
            rs = show(right) if isinstance(right, (Index, Closure)) else f"({show(right)})"
            return f"{ls} {rs}"
        case Closure(body, sub):
            bs = show(body) if isinstance(body, (Index, Closure)) else f"({show(body)})"
            return f"{bs}[{show(sub)}]"
        case Slash(body):
            return show(body) + "/"
        case Lift(sub):
            return f"+({show(sub)})"
        case Shift():
            return "^"
    raise TypeError(f"not a term: {x!r}")

"""Construction of the step-count grammar hierarchy.

Level 0 generates the pure terms.  Level n+1 is built from level n by
matching every production of Gn against one template per rewriting rule and
turning each match (a pattern refining the rule's right-hand side) back into
the corresponding left-hand-side shape:

    rule        template        match                      new production
    App         T[S] (T[S])     a[t1] (b[t2]) [spine]      (a b)[t][spine] for t in fip(t1, t2)
    Lambda      \\ (T[+(S)])     \\ (a[+(s)]) [spine]        (\\ a)[s][spine]
    FVar        (prefixes)      Gn -> head[s1..sw]         0[head[s1..sd]/][s(d+1)..sw]
    RVar        N               a[spine]                   (succ a)[T/][spine]
    FVarLift    0               0[spine]                   0[+(S)][spine]
    RVarLift    N[S][^]         a[s][^][spine]             (succ a)[+(s)][spine]
    VarShift    succ N          (succ a)[spine]            a[^][spine]

Templates are padded with [S] closures to the closure width of the
production they are matched against; verbose grammars keep that width
meaningful.  The FVar rule does not preserve closure width, so it instead
enumerates every split of a production's closure spine; the full-spine
splits of all productions can optionally be merged into the single
production 0[Gn/] (same language, fewer productions).
"""

from __future__ import annotations

from typing import Callable, Optional

from .fip import fip
from .grammar import (
    G,
    GrammarInvariantError,
    N,
    NonTerminal,
    Pattern,
    PAbs,
    PApp,
    PClo,
    PLift,
    PShift,
    PSlash,
    PSucc,
    PSHIFT,
    PZERO,
    ReductionGrammar,
    S,
    T,
    closure_split,
    is_simple,
    is_verbose,
    rebuild_closures,
    show_pattern,
    validate,
)
from .terms import Rule

# templates in the scheme table's row order; FVar is handled by the prefix
# construction and carries the bare T template only for documentation
TEMPLATES: dict[Rule, Pattern] = {
    Rule.APP: PApp(PClo(T, S), PClo(T, S)),
    Rule.LAMBDA: PAbs(PClo(T, PLift(S))),
    Rule.FVAR: T,
    Rule.RVAR: N,
    Rule.FVARLIFT: PZERO,
    Rule.RVARLIFT: PClo(PClo(N, S), PSHIFT),
    Rule.VARSHIFT: PSucc(N),
}

SCHEME_ORDER = (
    Rule.APP,
    Rule.LAMBDA,
    Rule.FVAR,
    Rule.RVAR,
    Rule.FVARLIFT,
    Rule.RVARLIFT,
    Rule.VARSHIFT,
)

# record callbacks receive (level, rule, production rhs, padded template,
# partition); used by the brute-force partition audits
RecordFn = Callable[[int, Rule, Pattern, Pattern, tuple[Pattern, ...]], None]


def seed() -> ReductionGrammar:
    """Level 0: pure terms (no closures normalize in zero steps)."""
    g0 = (N, PAbs(G(0)), PApp(G(0), G(0)))
    return ReductionGrammar((g0,))


def pad_template(tmpl: Pattern, extra: int) -> Pattern:
    """Append extra [S] closures to a template's spine."""
    out = tmpl
    for _ in range(extra):
        out = PClo(out, S)
    return out


def phi_matchings(
    g: ReductionGrammar,
    rule: Rule,
    record: Optional[RecordFn] = None,
) -> tuple[Pattern, ...]:
    """Matches of the rule's template against the axiom's productions.

    Each production of width w is intersected with the template padded to
    width w; narrower productions contribute nothing.
    """
    if not (is_simple(g) and is_verbose(g)):
        raise GrammarInvariantError("phi-matchings need a simple, verbose grammar")
    tmpl = TEMPLATES[rule]
    d = closure_split(tmpl).width
    out: dict[Pattern, None] = {}
    for rhs in g.rules(g.axiom):
        w = closure_split(rhs).width
        if w < d:
            continue
        padded = pad_template(tmpl, w - d)
        parts = fip(rhs, padded, g, validate_grammar=False)
        if record is not None:
            record(g.level, rule, rhs, padded, parts)
        for p in parts:
            out[p] = None
    return tuple(out)


def _fvar_productions(g: ReductionGrammar, merge: bool) -> list[Pattern]:
    # a head FVar step prepends 0[./]; the slashed part may take any prefix
    # of the reduct's closure spine
    out: list[Pattern] = []
    for rhs in g.rules(g.axiom):
        split = closure_split(rhs)
        for d in range(split.width):
            inner = rebuild_closures(split.head, split.tail[:d])
            out.append(rebuild_closures(PClo(PZERO, PSlash(inner)), split.tail[d:]))
        if not merge:
            out.append(PClo(PZERO, PSlash(rhs)))
    if merge:
        out.append(PClo(PZERO, PSlash(g.axiom)))
    return out


def _lambda_output(match: Pattern) -> list[Pattern]:
    split = closure_split(match)
    head = split.head
    assert isinstance(head, PAbs) and isinstance(head.body, PClo), show_pattern(match)
    inner = head.body
    assert isinstance(inner.sub, PLift), show_pattern(match)
    core = PClo(PAbs(inner.body), inner.sub.sub)
    return [rebuild_closures(core, split.tail)]


def _app_outputs(match: Pattern, g: ReductionGrammar) -> list[Pattern]:
    split = closure_split(match)
    head = split.head
    assert isinstance(head, PApp), show_pattern(match)
    left, right = head.left, head.right
    assert isinstance(left, PClo) and isinstance(right, PClo), show_pattern(match)
    outs = []
    # both closures came from the same substitution of the contracted redex
    for tau in fip(left.sub, right.sub, g, validate_grammar=False):
        core = PClo(PApp(left.body, right.body), tau)
        outs.append(rebuild_closures(core, split.tail))
    return outs


def _rvar_output(match: Pattern) -> list[Pattern]:
    split = closure_split(match)
    core = PClo(PSucc(split.head), PSlash(T))  # the erased argument is any term
    return [rebuild_closures(core, split.tail)]


def _fvarlift_output(match: Pattern) -> list[Pattern]:
    split = closure_split(match)
    assert split.head == PZERO, show_pattern(match)
    core = PClo(PZERO, PLift(S))  # the ignored substitution is any one
    return [rebuild_closures(core, split.tail)]


def _rvarlift_output(match: Pattern) -> list[Pattern]:
    split = closure_split(match)
    assert split.width >= 2 and split.tail[1] == PSHIFT, show_pattern(match)
    core = PClo(PSucc(split.head), PLift(split.tail[0]))
    return [rebuild_closures(core, split.tail[2:])]


def _varshift_output(match: Pattern) -> list[Pattern]:
    split = closure_split(match)
    assert isinstance(split.head, PSucc), show_pattern(match)
    core = PClo(split.head.body, PSHIFT)
    return [rebuild_closures(core, split.tail)]


def apply_scheme(
    rule: Rule,
    g: ReductionGrammar,
    fvar_merge: bool = False,
    record: Optional[RecordFn] = None,
) -> tuple[Pattern, ...]:
    """Right-hand sides contributed to level n+1 by one rewriting rule."""
    if rule is Rule.FVAR:
        produced = _fvar_productions(g, fvar_merge)
    else:
        produced = []
        for match in phi_matchings(g, rule, record=record):
            if rule is Rule.APP:
                produced.extend(_app_outputs(match, g))
            elif rule is Rule.LAMBDA:
                produced.extend(_lambda_output(match))
            elif rule is Rule.RVAR:
                produced.extend(_rvar_output(match))
            elif rule is Rule.FVARLIFT:
                produced.extend(_fvarlift_output(match))
            elif rule is Rule.RVARLIFT:
                produced.extend(_rvarlift_output(match))
            elif rule is Rule.VARSHIFT:
                produced.extend(_varshift_output(match))
    return tuple(dict.fromkeys(produced))


def extend(
    g: ReductionGrammar,
    fvar_merge: bool = False,
    record: Optional[RecordFn] = None,
) -> ReductionGrammar:
    """Build level n+1 from level n.

    The new level consists of the predefined productions \\ G(n+1) and
    G(k) G(n+1-k) for 0 <= k <= n+1, followed by the scheme outputs in the
    table's row order.  The result is validated: simple, verbose, and all
    self-referencing productions conservative.
    """
    n1 = g.level + 1
    new_rules: list[Pattern] = [PAbs(G(n1))]
    new_rules += [PApp(G(k), G(n1 - k)) for k in range(n1 + 1)]
    for rule in SCHEME_ORDER:
        new_rules.extend(apply_scheme(rule, g, fvar_merge=fvar_merge, record=record))
    deduped = tuple(dict.fromkeys(new_rules))
    extended = ReductionGrammar(g.g_rules + (deduped,))
    validate(extended)
    return extended


def build_hierarchy(
    max_k: int,
    fvar_merge: bool = True,
    record: Optional[RecordFn] = None,
) -> list[ReductionGrammar]:
    """Levels 0..max_k; element k generates exactly the k-step terms.

    Deep builds default to the merged FVar form, which keeps production
    counts down without changing any generated language.
    """
    g = seed()
    out = [g]
    for _ in range(max_k):
        g = extend(g, fvar_merge=fvar_merge, record=record)
        out.append(g)
    return out

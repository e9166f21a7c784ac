"""Normal-order upsilon-reduction toolkit.

Reduction engine for the lambda-upsilon calculus, the hierarchy of grammars
classifying terms by their exact normal-order step count, exact counting
series, and asymptotic step-count densities, together with a brute-force
enumeration oracle that cross-checks every layer.
"""

from .build import apply_scheme, build_hierarchy, extend, phi_matchings, seed
from .closed_form import (
    ClosedFormCalculator,
    DensityResult,
    PoleAtSingularityError,
    density_exact,
    dominant_root,
)
from .fip import NonConservativeGrammarError, fip, fip_check
from .grammar import (
    G,
    GrammarInvariantError,
    N,
    NonTerminal,
    Production,
    ReductionGrammar,
    S,
    T,
    closure_split,
    is_conservative,
    is_simple,
    is_verbose,
    meet,
    member,
    parse_pattern,
    potential,
    show_pattern,
)
from .oracle import census, enumerate_by_size, verify_grammar, verify_unambiguity
from .series import (
    PowerSeries,
    base_series,
    density_numeric,
    grammar_series,
    level_series,
)
from .terms import (
    Rule,
    StepLimitExceeded,
    TermSyntaxError,
    find_redex,
    normalize,
    parse,
    show,
    size,
    step,
)

__version__ = "0.1.0"

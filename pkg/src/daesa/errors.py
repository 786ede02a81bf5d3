"""Exception hierarchy shared by the analysis modules.

Errors split into three families: input problems (bad source text, bad
arguments), verdicts that are legitimate analysis outcomes but make the
requested operation impossible (no complete matching, causality violation),
and internal contract violations that indicate a bug rather than a property
of the input.
"""

from __future__ import annotations


class StructuralAnalysisError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(StructuralAnalysisError):
    """Invalid model construction or model-level operation."""


class UnknownGuard(ModelError):
    """A mode assignment references, or omits, a declared guard inconsistently."""


class TooManyGuards(ModelError):
    """Mode enumeration refused because 2**n_guards would be unreasonable."""


class ParseError(StructuralAnalysisError):
    """Syntax or semantic error in a .dae source text.

    Carries a (line, column) pair, both 1-based, pointing at the offending
    token.
    """

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class MixedTimeDomain(ParseError):
    """der() used in a discrete model, or shift() in a continuous one."""


class UndeclaredVariable(ParseError):
    """An identifier was used as a variable without being declared."""


class MatchingError(StructuralAnalysisError):
    """A matching-related precondition failed."""


class NotCompleteMatching(MatchingError):
    """The supplied matching does not cover every equation and variable."""


class NoCompleteMatching(MatchingError):
    """The graph admits no matching covering all equations and all variables."""


class NoEquationCompleteMatching(MatchingError):
    """The graph admits no matching covering all equations (overconstrained)."""


class NonConvergence(StructuralAnalysisError):
    """Internal contract violation: a fixpoint iteration exceeded its bound."""


class InconsistentVariableUniverse(StructuralAnalysisError):
    """Models combined into an array do not share one variable universe."""


class NotDeterminedWithinBound(StructuralAnalysisError):
    """No array size up to the requested bound determines the unknowns."""


class CausalityViolation(StructuralAnalysisError):
    """A mode change conflict cannot be resolved without touching the past."""

"""Structural intermediate representation of equation system models.

A model is a flat list of equations over declared variables.  Only the
incidence structure is retained: for each equation we record which variables
occur and with which maximal differentiation degree (continuous models) or
shift degree (discrete models).  Expressions themselves are deliberately not
kept; every analysis in this package is structural.

Equations may carry a guard condition, a conjunction of literals over the
declared boolean guards.  Selecting a mode (one truth value per guard) keeps
exactly the equations whose condition is satisfied.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping

from .errors import ModelError, TooManyGuards, UnknownGuard

CONTINUOUS = "continuous"
DISCRETE = "discrete"

#: Variable kinds.  Ordinary signals are declared in the source text;
#: previous-value variables are introduced by ``prev(x)`` references and feed
#: guard definitions.
SIGNAL = "signal"
GUARD_INPUT = "guard-input"


@dataclass(frozen=True)
class Variable:
    """A declared variable.

    declaration_index is the position in the owning model's variable list;
    every scan and tie-break in the analysis modules uses it, which is what
    makes results reproducible run to run.
    """

    name: str
    kind: str = SIGNAL
    declaration_index: int = 0

    def __post_init__(self):
        if self.kind not in (SIGNAL, GUARD_INPUT):
            raise ModelError(f"unknown variable kind {self.kind!r}")


@dataclass(frozen=True, order=True)
class Incidence:
    """Occurrence of a variable in an equation at its maximal degree."""

    variable: str
    degree: int

    def __post_init__(self):
        if self.degree < 0:
            raise ModelError(f"negative degree on {self.variable!r}")


@dataclass(frozen=True)
class GuardCondition:
    """Conjunction of guard literals, e.g. ``g and not h``.

    literals is a tuple of (guard name, polarity) pairs in source order.
    """

    literals: tuple[tuple[str, bool], ...]

    def __post_init__(self):
        names = [name for name, _ in self.literals]
        if len(set(names)) != len(names):
            raise ModelError(f"guard repeated in condition: {names}")

    def satisfied(self, mode: Mapping[str, bool]) -> bool:
        return all(mode[name] == polarity for name, polarity in self.literals)

    def guards(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.literals)


def _collapse(incidences: Iterable[Incidence]) -> tuple[Incidence, ...]:
    """Keep one incidence per variable, at the maximal degree, name-sorted."""
    best: dict[str, int] = {}
    for inc in incidences:
        if inc.degree > best.get(inc.variable, -1):
            best[inc.variable] = inc.degree
    return tuple(Incidence(v, d) for v, d in sorted(best.items()))


@dataclass(frozen=True)
class Equation:
    """One equation: a name, an incidence set and an optional guard."""

    name: str
    incidences: tuple[Incidence, ...]
    guard: GuardCondition | None = None
    source_span: tuple[int, int] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "incidences", _collapse(self.incidences))

    @classmethod
    def of(
        cls,
        name: str,
        degrees: Mapping[str, int],
        guard: GuardCondition | None = None,
    ) -> "Equation":
        """Build an equation from a variable -> degree mapping."""
        return cls(name, tuple(Incidence(v, d) for v, d in degrees.items()), guard)

    def degree_of(self, variable: str) -> int | None:
        for inc in self.incidences:
            if inc.variable == variable:
                return inc.degree
        return None

    def variables(self) -> tuple[str, ...]:
        return tuple(inc.variable for inc in self.incidences)


def shift_equation(equation: Equation, k: int) -> Equation:
    """Shift (or differentiate) an equation k times.

    Every incidence degree is raised by k and the name gains one trailing
    quote per unit, so that shifting composes additively: shifting by a and
    then by b decorates and raises degrees exactly like shifting by a + b.
    """
    if k < 0:
        raise ModelError("shift count must be nonnegative")
    if k == 0:
        return equation
    base = equation.name.rstrip("'")
    quotes = len(equation.name) - len(base)
    return Equation(
        name=base + "'" * (quotes + k),
        incidences=tuple(
            Incidence(inc.variable, inc.degree + k) for inc in equation.incidences
        ),
        guard=equation.guard,
        source_span=equation.source_span,
    )


@dataclass(frozen=True)
class Model:
    """A guarded equation system over one time domain."""

    name: str
    time_domain: str
    variables: tuple[Variable, ...]
    equations: tuple[Equation, ...]
    guards: tuple[str, ...] = ()

    def __post_init__(self):
        if self.time_domain not in (CONTINUOUS, DISCRETE):
            raise ModelError(f"unknown time domain {self.time_domain!r}")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ModelError("duplicate variable declaration")
        for i, v in enumerate(self.variables):
            if v.declaration_index != i:
                raise ModelError(
                    f"variable {v.name!r} carries declaration index "
                    f"{v.declaration_index}, expected {i}"
                )
        eq_names = [e.name for e in self.equations]
        if len(set(eq_names)) != len(eq_names):
            raise ModelError("duplicate equation name")
        if len(set(self.guards)) != len(self.guards):
            raise ModelError("duplicate guard declaration")
        declared = set(names)
        if declared & set(self.guards):
            raise ModelError("a name cannot be both a variable and a guard")
        for eq in self.equations:
            for inc in eq.incidences:
                if inc.variable not in declared:
                    raise ModelError(
                        f"equation {eq.name!r} references undeclared "
                        f"variable {inc.variable!r}"
                    )
            if eq.guard is not None:
                for g in eq.guard.guards():
                    if g not in self.guards:
                        raise ModelError(
                            f"equation {eq.name!r} guarded by undeclared {g!r}"
                        )

    @classmethod
    def of(
        cls,
        name: str,
        time_domain: str,
        variables: Iterable[str],
        equations: Iterable,
        guards: Iterable[str] = (),
    ) -> "Model":
        """Build a model from plain names.

        Variables are given as strings (all signal kind).  Equations are
        given either as Equation objects or as (name, degrees) pairs, with
        an optional third guard element.
        """
        vars_ = tuple(
            Variable(v, SIGNAL, i) for i, v in enumerate(variables)
        )
        eqs = []
        for entry in equations:
            if isinstance(entry, Equation):
                eqs.append(entry)
            else:
                eqs.append(Equation.of(*entry))
        return cls(name, time_domain, vars_, tuple(eqs), tuple(guards))

    def variable_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def equation_names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.equations)

    def equation(self, name: str) -> Equation:
        for eq in self.equations:
            if eq.name == name:
                return eq
        raise KeyError(name)

    def leading_degrees(self) -> dict[str, int]:
        """Maximal degree of each variable over all equations (0 if unused)."""
        lead = {v.name: 0 for v in self.variables}
        for eq in self.equations:
            for inc in eq.incidences:
                if inc.degree > lead[inc.variable]:
                    lead[inc.variable] = inc.degree
        return lead


def restrict_to_mode(model: Model, mode: Mapping[str, bool]) -> Model:
    """Select the equations active in one mode and drop all guard structure.

    mode must assign a truth value to exactly the declared guards; anything
    else raises UnknownGuard.  The variable list is kept unchanged.
    """
    declared = set(model.guards)
    given = set(mode)
    if given != declared:
        extra = sorted(given - declared)
        missing = sorted(declared - given)
        detail = []
        if extra:
            detail.append(f"unknown guards {extra}")
        if missing:
            detail.append(f"missing guards {missing}")
        raise UnknownGuard("; ".join(detail))
    kept = tuple(
        replace(eq, guard=None)
        for eq in model.equations
        if eq.guard is None or eq.guard.satisfied(mode)
    )
    return Model(model.name, model.time_domain, model.variables, kept, ())


def euler_map(model: Model) -> Model:
    """Structural image of a continuous model under an explicit Euler scheme.

    Differentiation degrees map one for one to shift degrees, so the
    incidence pattern is preserved exactly and only the time domain changes.
    """
    if model.time_domain != CONTINUOUS:
        raise ModelError("euler_map expects a continuous model")
    return replace(model, time_domain=DISCRETE)


def enumerate_modes(model: Model, limit: int = 20) -> list[dict[str, bool]]:
    """All guard assignments, first declared guard most significant,
    False before True."""
    if len(model.guards) > limit:
        raise TooManyGuards(
            f"{len(model.guards)} guards would enumerate "
            f"{2 ** len(model.guards)} modes"
        )
    modes: list[dict[str, bool]] = [{}]
    for g in model.guards:
        modes = [dict(m, **{g: val}) for m in modes for val in (False, True)]
    return modes

"""Shifted arrays of equation systems.

Stacking a system F with its first k shifts (derivatives, for continuous
models) gives an array that can be read as one algebraic system over
variable instances: pairs (variable, degree) become independent unknowns.
Splitting the instances into the leading instances X of the original
system, the strictly later instances W brought in by shifting, and the
earlier instances Y fixed by the past turns index determination into an
existential quantification problem: the smallest k whose array determines X
uniquely given Y, after eliminating W, recovers the structural index.

Arrays over a cascade of different systems, one per instant, model mode
changes; rows then come from different models shifted by their position.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    InconsistentVariableUniverse,
    ModelError,
    NotDeterminedWithinBound,
)
from .existq import ExistQuantResult, IMMEDIATE, RolePartition, exist_quantif_eqn
from .model import (
    DISCRETE,
    GUARD_INPUT,
    SIGNAL,
    Equation,
    Incidence,
    Model,
    Variable,
    shift_equation,
)


def instance_name(base: str, degree: int) -> str:
    """Name of the (base, degree) instance; degree 0 keeps the base name."""
    if degree == 0:
        return base
    return f"{base}#{degree}"


@dataclass(frozen=True)
class ArrayRow:
    offset: int
    equations: tuple[Equation, ...]


@dataclass(frozen=True)
class ArraySystem:
    """An array of shifted equations viewed as an algebraic system.

    rows keeps the shifted source equations; system is the flattened
    algebraic model whose variables are instance names; instances maps each
    instance name back to its (base, degree) pair; roles partitions the
    instances for existential quantification.
    """

    rows: tuple[ArrayRow, ...]
    system: Model
    instances: dict[str, tuple[str, int]]
    roles: RolePartition

    def analyze(self, predecessors: str = IMMEDIATE) -> ExistQuantResult:
        return exist_quantif_eqn(self.system, self.roles, predecessors)


def _assemble(
    name: str,
    source_rows: list[tuple[int, tuple[Equation, ...]]],
    base_order: dict[str, int],
    leading: dict[str, int],
    given_bases: frozenset[str],
    roles: RolePartition | None,
) -> ArraySystem:
    rows = tuple(
        ArrayRow(j, tuple(shift_equation(eq, j) for eq in eqs))
        for j, eqs in source_rows
    )
    occurring: set[tuple[str, int]] = set()
    for row in rows:
        for eq in row.equations:
            for inc in eq.incidences:
                occurring.add((inc.variable, inc.degree))
    for base, degree in leading.items():
        occurring.add((base, degree))
    ordered = sorted(occurring, key=lambda bd: (base_order[bd[0]], bd[1]))
    instances = {instance_name(b, d): (b, d) for b, d in ordered}
    variables = tuple(
        Variable(
            instance_name(b, d),
            kind=GUARD_INPUT if b in given_bases else SIGNAL,
            declaration_index=i,
        )
        for i, (b, d) in enumerate(ordered)
    )
    equations = tuple(
        Equation(
            eq.name,
            tuple(
                Incidence(instance_name(inc.variable, inc.degree), 0)
                for inc in eq.incidences
            ),
        )
        for row in rows
        for eq in row.equations
    )
    system = Model(
        name=name,
        time_domain=DISCRETE,
        variables=variables,
        equations=equations,
        guards=(),
    )
    if roles is None:
        x_names, w_names, y_names = [], [], []
        for b, d in ordered:
            if b in given_bases:
                target = y_names
            else:
                lead = leading[b]
                target = (
                    x_names if d == lead else w_names if d > lead else y_names
                )
            target.append(instance_name(b, d))
        roles = RolePartition.of(x_names, w_names, y_names)
    roles.validate(system)
    return ArraySystem(rows, system, instances, roles)


def build_array(model: Model, k: int) -> ArraySystem:
    """Array of model and its first k shifts.

    X holds the leading instances of the model's own variables, W the
    strictly later instances created by shifting, Y the earlier instances
    (the given past).  Instances of declared inputs count as given at
    every degree.
    """
    if model.guards:
        raise ModelError("arrays need a guard-free model")
    if k < 0:
        raise ModelError("array size must be nonnegative")
    base_order = {v.name: i for i, v in enumerate(model.variables)}
    leading = model.leading_degrees()
    given = frozenset(v.name for v in model.variables if v.kind == GUARD_INPUT)
    source_rows = [(j, model.equations) for j in range(k + 1)]
    return _assemble(
        f"{model.name}_array{k}", source_rows, base_order, leading, given, None
    )


def build_timevarying_array(
    models: list[Model],
    roles: RolePartition | None = None,
) -> ArraySystem:
    """Array over a cascade of systems, models[j] shifted j times.

    All models must share one variable universe.  Default roles follow the
    first model of the cascade: its leading instances form X, so the
    analysis asks whether the first instant is determined by the past.  A
    cascade repeating one model is exactly build_array of that model.
    """
    if not models:
        raise ModelError("cascade must contain at least one model")
    first = models[0]
    for m in models[1:]:
        if m.variable_names() != first.variable_names():
            raise InconsistentVariableUniverse(
                f"{m.name!r} declares {m.variable_names()}, "
                f"{first.name!r} declares {first.variable_names()}"
            )
        if m.guards or first.guards:
            raise ModelError("arrays need guard-free models")
    if first.guards:
        raise ModelError("arrays need guard-free models")
    base_order = {v.name: i for i, v in enumerate(first.variables)}
    leading = first.leading_degrees()
    given = frozenset(v.name for v in first.variables if v.kind == GUARD_INPUT)
    source_rows = [(j, m.equations) for j, m in enumerate(models)]
    name = "_".join([m.name for m in models][:3]) + "_cascade"
    return _assemble(name, source_rows, base_order, leading, given, roles)


def determines_leading_instances(result: ExistQuantResult) -> bool:
    """Whether an array analysis pins down every X instance uniquely.

    This is weaker than result.success: the block-purity conditions on W
    reject some uniquely determined systems (a square block mixing X and
    W instances still determines both in the generic case, and a W
    instance pinned by its own block feeds X without harm), so the search
    for the determining array size relies on the two coarse conditions
    only.  An empty overdetermined part means consistent given values
    exist; an underdetermined part free of X means nothing structural is
    left open about the leading instances.
    """
    under = set(result.decomposition.under.variables)
    return result.b_over and not (under & result.roles.x_vars)


def array_index_search(
    model: Model,
    k_max: int | None = None,
    predecessors: str = IMMEDIATE,
) -> tuple[int, ArraySystem, ExistQuantResult]:
    """Smallest k whose array determines the leading instances.

    Arrays of size 0..k_max (the number of equations, by default) are
    analyzed in turn; the first one satisfying determines_leading_instances
    is returned, and every leading instance then sits in a determining
    block.
    """
    if k_max is None:
        k_max = len(model.equations)
    if k_max < 0:
        raise ModelError("search bound must be nonnegative")
    for k in range(k_max + 1):
        array = build_array(model, k)
        result = array.analyze(predecessors)
        if determines_leading_instances(result):
            determined = {
                x for block in result.f_sigma for x in block.variables
            }
            assert array.roles.x_vars <= determined, (
                "successful analysis must determine every leading instance"
            )
            return k, array, result
    raise NotDeterminedWithinBound(
        f"no array of size up to {k_max} determines the leading instances "
        f"of {model.name!r}"
    )

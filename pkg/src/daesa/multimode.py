"""Mode handling: per-mode analysis and mode-change conflict resolution.

A mode change is analyzed on a two-instant window.  Both modes are mapped
to the discrete domain, index-reduced, and instantiated: the leaving mode at
the previous instant (shift 0), the entering mode at the current instant
(shift 1).  The stacked equations form one algebraic system over the
leading instances of both instants; instances below the window are values
the past already fixed and do not take part.

If the entering mode imposes consistency constraints that the leaving mode
did not maintain, the window is overdetermined.  The causality principle,
that what the previous instant did cannot be undone, picks the resolution:
only consistency copies contributed by the entering mode may be discarded,
never previous-instant equations.  What remains must be structurally
nonsingular and yields the restart system for the new mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .arrays import instance_name
from .errors import CausalityViolation, ModelError, NoCompleteMatching
from .errors import NoEquationCompleteMatching
from .graph import (
    DmBlock,
    DmDecomposition,
    Matching,
    WeightedBipartiteGraph,
    direct_and_scc,
    dm_decompose,
)
from .model import (
    CONTINUOUS,
    DISCRETE,
    Equation,
    Incidence,
    Model,
    Variable,
    enumerate_modes,
    euler_map,
    restrict_to_mode,
    shift_equation,
)
from .sigma import (
    IndexReduction,
    OffsetSolution,
    find_offsets,
    find_offsets_nonsquare,
    index_reduce,
)

PREVIOUS = "previous"
CURRENT = "current"


@dataclass(frozen=True)
class ModeChange:
    """An instantaneous transition between two distinct modes."""

    prev_mode: Mapping[str, bool]
    next_mode: Mapping[str, bool]

    def __post_init__(self):
        if dict(self.prev_mode) == dict(self.next_mode):
            raise ModelError("mode change requires two distinct modes")


@dataclass(frozen=True)
class EquationOrigin:
    """Where an unfolded equation comes from.

    source is the mode equation name, shift its consistency copy index
    (0..c_f), instant the window instant it was instantiated at.
    consistency marks copies below the offset, the ones an entering mode
    may sacrifice during conflict resolution.
    """

    instant: str
    source: str
    shift: int
    consistency: bool


@dataclass(frozen=True)
class UnfoldedSystem:
    """Two-instant algebraic window of a mode change."""

    model: Model
    origins: dict[str, EquationOrigin]
    prev_leading: tuple[str, ...]
    cur_leading: tuple[str, ...]
    given: tuple[str, ...]
    settled: tuple[str, ...]
    change: ModeChange | None = None
    prev_reduction: IndexReduction | None = None
    next_reduction: IndexReduction | None = None


@dataclass(frozen=True)
class ConflictReport:
    """Outcome of resolving a mode-change window.

    conflict is the overdetermined part of the window before resolution,
    removed lists the discarded entering-mode consistency equations, and
    restart is the current-instant system over the current leading
    instances that determines the restart values.
    """

    unfolded: UnfoldedSystem
    conflict: DmBlock
    removed: tuple[str, ...]
    restart: Model
    remaining: Model
    given: tuple[str, ...]


def _instantiate(
    reduction: IndexReduction,
    equations: tuple[Equation, ...],
    instant: str,
    offset: int,
    dependent: set[tuple[str, int]],
) -> tuple[list[Equation], dict[str, EquationOrigin], set[str], list[str]]:
    """All reduced copies of one mode, placed at one window instant.

    Incidences onto instances outside the dependent window become given
    values and are dropped; equations losing every incidence are settled
    facts about the past and are dropped whole.
    """
    out: list[Equation] = []
    origins: dict[str, EquationOrigin] = {}
    given: set[str] = set()
    settled: list[str] = []
    c = reduction.offsets.c
    for eq in equations:
        for k in range(c[eq.name] + 1):
            copy = shift_equation(eq, k)
            name = f"{copy.name}@{'prev' if instant == PREVIOUS else 'cur'}"
            kept: list[Incidence] = []
            for inc in copy.incidences:
                absolute = inc.degree + offset
                if (inc.variable, absolute) in dependent:
                    kept.append(
                        Incidence(instance_name(inc.variable, absolute), 0)
                    )
                else:
                    given.add(instance_name(inc.variable, absolute))
            if not kept:
                settled.append(name)
                continue
            out.append(Equation(name, tuple(kept)))
            origins[name] = EquationOrigin(
                instant=instant,
                source=eq.name,
                shift=k,
                consistency=k < c[eq.name],
            )
    return out, origins, given, settled


def unfold_mode_change(model: Model, change: ModeChange) -> UnfoldedSystem:
    """Stack the leaving and entering modes on a two-instant window.

    The model must be continuous and guarded; both modes must be square
    with a complete matching, otherwise the per-mode reduction fails and
    its error propagates.
    """
    if model.time_domain != CONTINUOUS:
        raise ModelError("mode-change unfolding expects a continuous model")
    if not model.guards:
        raise ModelError("mode-change unfolding expects a guarded model")
    discrete = euler_map(model)
    prev_sys = restrict_to_mode(discrete, change.prev_mode)
    next_sys = restrict_to_mode(discrete, change.next_mode)
    prev_red = index_reduce(prev_sys)
    next_red = index_reduce(next_sys)

    base_order = {v.name: i for i, v in enumerate(model.variables)}
    prev_leading = {
        (x, prev_red.offsets.d[x]) for x in model.variable_names()
    }
    cur_leading = {
        (x, next_red.offsets.d[x] + 1) for x in model.variable_names()
    }
    dependent = prev_leading | cur_leading

    prev_eqs, prev_orig, given_p, settled_p = _instantiate(
        prev_red, prev_sys.equations, PREVIOUS, 0, dependent
    )
    cur_eqs, cur_orig, given_c, settled_c = _instantiate(
        next_red, next_sys.equations, CURRENT, 1, dependent
    )

    ordered = sorted(dependent, key=lambda bd: (base_order[bd[0]], bd[1]))
    variables = tuple(
        Variable(instance_name(b, d), declaration_index=i)
        for i, (b, d) in enumerate(ordered)
    )
    window = Model(
        name=f"{model.name}_change",
        time_domain=DISCRETE,
        variables=variables,
        equations=tuple(prev_eqs + cur_eqs),
        guards=(),
    )
    order_key = {v.name: i for i, v in enumerate(variables)}
    return UnfoldedSystem(
        model=window,
        origins={**prev_orig, **cur_orig},
        prev_leading=tuple(
            sorted(
                (instance_name(b, d) for b, d in prev_leading),
                key=order_key.__getitem__,
            )
        ),
        cur_leading=tuple(
            sorted(
                (instance_name(b, d) for b, d in cur_leading),
                key=order_key.__getitem__,
            )
        ),
        given=tuple(sorted(given_p | given_c)),
        settled=tuple(settled_p + settled_c),
        change=change,
        prev_reduction=prev_red,
        next_reduction=next_red,
    )


def resolve_conflicts(unfolded: UnfoldedSystem) -> ConflictReport:
    """Empty the overdetermined part of a mode-change window.

    Repeatedly discards the entering-mode consistency equations lying in
    the overdetermined part and re-decomposes.  If the part is still not
    empty once no such equation remains in it, the change would require
    undoing the previous instant and is rejected.
    """
    g = WeightedBipartiteGraph.from_model(unfolded.model)
    first = dm_decompose(g)
    conflict = first.over
    removed: list[str] = []
    dm = first
    while not dm.over.is_empty():
        removable = [
            f
            for f in dm.over.equations
            if unfolded.origins[f].instant == CURRENT
            and unfolded.origins[f].consistency
        ]
        if not removable:
            stuck = ", ".join(dm.over.equations)
            raise CausalityViolation(
                "the window stays overdetermined on equations that may not "
                f"be discarded: {stuck}"
            )
        removed.extend(removable)
        g = g.restrict(
            equations=[f for f in g.equations if f not in set(removed)]
        )
        dm = dm_decompose(g)

    kept = [
        eq for eq in unfolded.model.equations if eq.name not in set(removed)
    ]
    remaining = Model(
        name=unfolded.model.name + "_resolved",
        time_domain=DISCRETE,
        variables=unfolded.model.variables,
        equations=tuple(kept),
        guards=(),
    )

    cur_set = set(unfolded.cur_leading)
    order_key = {
        v.name: i for i, v in enumerate(unfolded.model.variables)
    }
    restart_vars = tuple(
        Variable(name, declaration_index=i)
        for i, name in enumerate(unfolded.cur_leading)
    )
    restart_eqs: list[Equation] = []
    given: set[str] = set(unfolded.given)
    for eq in kept:
        if unfolded.origins[eq.name].instant != CURRENT:
            continue
        body = [inc for inc in eq.incidences if inc.variable in cur_set]
        given |= {
            inc.variable for inc in eq.incidences if inc.variable not in cur_set
        }
        restart_eqs.append(Equation(eq.name, tuple(body)))
    restart = Model(
        name=unfolded.model.name + "_restart",
        time_domain=DISCRETE,
        variables=restart_vars,
        equations=tuple(restart_eqs),
        guards=(),
    )
    return ConflictReport(
        unfolded=unfolded,
        conflict=conflict,
        removed=tuple(removed),
        restart=restart,
        remaining=remaining,
        given=tuple(sorted(given, key=lambda n: (order_key.get(n, -1), n))),
    )


@dataclass(frozen=True)
class ModeAnalysis:
    """Structural summary of one mode."""

    mode: dict[str, bool]
    active: tuple[str, ...]
    n_equations: int
    n_variables: int
    square: bool
    offsets: OffsetSolution | None
    blocks: tuple[DmBlock, ...] | None
    nonsquare_solver: bool
    diagnosis: DmDecomposition | None

    @property
    def structurally_nonsingular(self) -> bool:
        return self.square and self.offsets is not None

    @property
    def index(self) -> int | None:
        return self.offsets.index if self.offsets is not None else None


def _leading_blocks(
    g: WeightedBipartiteGraph, solution: OffsetSolution
) -> tuple[DmBlock, ...]:
    """Block triangular form of the reduced system in its leading degrees."""
    tight = WeightedBipartiteGraph(
        g.equations,
        g.variables,
        {
            (f, x): 0
            for (f, x), w in g.edges.items()
            if solution.c[f] + w == solution.d[x]
        },
    )
    _, blocks, _ = direct_and_scc(tight, Matching(solution.witness))
    return blocks


def analyze_mode(model: Model, mode: Mapping[str, bool]) -> ModeAnalysis:
    """Offsets, index and blocks of one mode, or a decomposition diagnosis."""
    sub = restrict_to_mode(model, mode)
    g = WeightedBipartiteGraph.from_model(sub)
    square = g.is_square()
    offsets: OffsetSolution | None = None
    blocks: tuple[DmBlock, ...] | None = None
    diagnosis: DmDecomposition | None = None
    used_nonsquare = False
    if square:
        try:
            offsets = find_offsets(g)
            blocks = _leading_blocks(g, offsets)
        except NoCompleteMatching:
            diagnosis = dm_decompose(g)
    else:
        try:
            offsets, zdm = find_offsets_nonsquare(g)
            blocks = zdm.fine_blocks
            diagnosis = zdm
            used_nonsquare = True
        except NoEquationCompleteMatching:
            diagnosis = dm_decompose(g)
    return ModeAnalysis(
        mode=dict(mode),
        active=sub.equation_names(),
        n_equations=g.n_equations(),
        n_variables=g.n_variables(),
        square=square,
        offsets=offsets,
        blocks=blocks,
        nonsquare_solver=used_nonsquare,
        diagnosis=diagnosis,
    )


def analyze_all_modes(model: Model, limit: int = 20) -> tuple[ModeAnalysis, ...]:
    """Per-mode structural summary over every guard assignment."""
    return tuple(
        analyze_mode(model, mode) for mode in enumerate_modes(model, limit)
    )

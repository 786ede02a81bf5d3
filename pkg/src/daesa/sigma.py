"""Offset computation for square and non-square systems.

The weighted bipartite graph of a system admits a primal/dual pair of
problems: the primal asks for a heaviest complete assignment (a complete
matching on square systems, a subgraph covering every variable exactly once
and every equation at least once otherwise), the dual for integer offsets
c_f >= 0, d_x with d_x - c_f >= w(f, x) on every edge and equality on the
primal support.  The dual optimum of smallest Sum(d) - Sum(c) is attained at
a unique elementwise-smallest point, which a two-step fixpoint iteration
finds once a primal-optimal support is known.

The same offsets fall out of the classic graph-based index reduction that
repeatedly differentiates minimal structurally singular subsets; that
procedure is implemented here as well and the equivalence is exercised by
the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    NoCompleteMatching,
    NoEquationCompleteMatching,
    NonConvergence,
)
from .graph import (
    DmDecomposition,
    Matching,
    WeightedBipartiteGraph,
    dm_decompose,
    max_cardinality_matching,
)
from .model import Equation, Model, shift_equation


@dataclass(frozen=True)
class OffsetSolution:
    """Smallest dual offsets together with their primal certificate.

    c maps equations to differentiation (or shift) counts, d maps variables
    to leading degrees.  witness holds the support edges of the optimal
    primal solution: a complete matching for square systems, otherwise a
    subgraph covering every non-isolated variable exactly once and every
    equation at least once.  index is max(c), 0 for empty systems, and
    primal_weight the total weight of the witness.
    """

    c: dict[str, int]
    d: dict[str, int]
    witness: tuple[tuple[str, str], ...]
    index: int
    primal_weight: int

    def validate(self, g: WeightedBipartiteGraph) -> None:
        """Check feasibility, complementary slackness and strong duality.

        Violations are internal contract breaches, not input problems, so
        they raise AssertionError.
        """
        for f in g.equations:
            assert self.c.get(f, 0) >= 0, f"negative offset on {f!r}"
        for (f, x), w in g.edges.items():
            assert self.d[x] - self.c[f] >= w, (
                f"dual infeasible on edge ({f!r}, {x!r})"
            )
        for f, x in self.witness:
            assert (f, x) in g.edges, f"witness edge ({f!r}, {x!r}) not in graph"
            assert self.d[x] - self.c[f] == g.weight(f, x), (
                f"slack edge ({f!r}, {x!r}) in witness"
            )
        covered: dict[str, int] = {}
        for f, x in self.witness:
            covered[x] = covered.get(x, 0) + 1
        eq_cover: dict[str, int] = {}
        for f, _ in self.witness:
            eq_cover[f] = eq_cover.get(f, 0) + 1
        for x in g.variables:
            expected = 1 if g.var_eqs(x) else 0
            assert covered.get(x, 0) == expected, (
                f"variable {x!r} covered {covered.get(x, 0)} times"
            )
        for f in g.equations:
            assert eq_cover.get(f, 0) >= 1 or not g.equations, (
                f"equation {f!r} not covered by witness"
            )
        dual_value = sum(self.d.values()) - sum(self.c.values())
        assert dual_value == self.primal_weight, (
            f"duality gap: dual {dual_value}, primal {self.primal_weight}"
        )
        expected_index = max(self.c.values(), default=0)
        assert self.index == expected_index


def _ssp_equation_assignment(
    g: WeightedBipartiteGraph, cost: dict[tuple[str, str], int]
) -> dict[str, str] | None:
    """Minimum-cost matching covering every equation, by successive
    shortest augmenting paths (Bellman-Ford over the residual graph).

    Returns equation -> variable, or None when some equation cannot be
    covered.  Deterministic: relaxations scan declaration order and only a
    strict improvement rewrites a predecessor.
    """
    n = g.n_equations() + g.n_variables()
    big = 1 + (1 + max((abs(c) for c in cost.values()), default=0)) * (n + 1)
    match_eq: dict[str, str] = {}
    match_var: dict[str, str] = {}
    for _ in range(g.n_equations()):
        dist_eq = {f: (big if f in match_eq else 0) for f in g.equations}
        dist_var = {x: big for x in g.variables}
        pred_var: dict[str, str] = {}
        rounds = 0
        changed = True
        while changed:
            rounds += 1
            if rounds > n + 2:
                raise NonConvergence(
                    "negative cycle in assignment residual graph"
                )
            changed = False
            for f in g.equations:
                df = dist_eq[f]
                if df >= big:
                    continue
                skip = match_eq.get(f)
                for x in g.eq_vars(f):
                    if x == skip:
                        continue
                    nd = df + cost[(f, x)]
                    if nd < dist_var[x]:
                        dist_var[x] = nd
                        pred_var[x] = f
                        changed = True
            for x in g.variables:
                dx = dist_var[x]
                if dx >= big:
                    continue
                f = match_var.get(x)
                if f is None:
                    continue
                nd = dx - cost[(f, x)]
                if nd < dist_eq[f]:
                    dist_eq[f] = nd
                    changed = True
        target: str | None = None
        for x in g.variables:
            if x in match_var or dist_var[x] >= big:
                continue
            if target is None or dist_var[x] < dist_var[target]:
                target = x
        if target is None:
            return None
        x = target
        while True:
            f = pred_var[x]
            vacated = match_eq.get(f)
            match_eq[f] = x
            match_var[x] = f
            if vacated is None:
                break
            x = vacated
    return match_eq


def max_weight_complete_matching(g: WeightedBipartiteGraph) -> Matching:
    """Heaviest matching covering every equation and every variable."""
    if not g.is_square():
        raise NoCompleteMatching(
            f"graph is {g.n_equations()} x {g.n_variables()}, "
            "a complete matching needs a square graph"
        )
    cost = {e: -w for e, w in g.edges.items()}
    assignment = _ssp_equation_assignment(g, cost)
    if assignment is None or len(assignment) != g.n_variables():
        raise NoCompleteMatching(
            "no matching covers every equation and every variable"
        )
    return Matching(tuple((f, assignment[f]) for f in g.equations))


def _offsets_fixpoint(
    g: WeightedBipartiteGraph,
    support: tuple[tuple[str, str], ...],
    trace: list[dict[str, int]] | None = None,
) -> tuple[dict[str, int], dict[str, int]]:
    """Smallest dual offsets over a primal-optimal support.

    Starting from c = 0, alternate (a) d_x = max over edges of w + c_f and
    (b) c_f = max over support edges of d_x - w, until c stops changing.
    The c iterates are elementwise nondecreasing; non-termination within
    the defensive bound indicates a non-optimal support and is an internal
    error.
    """
    support_of: dict[str, list[tuple[str, int]]] = {f: [] for f in g.equations}
    for f, x in support:
        support_of[f].append((x, g.weight(f, x)))
    max_w = max(g.edges.values(), default=0)
    bound = g.n_equations() * (max_w + 1) + 2
    c = {f: 0 for f in g.equations}
    d: dict[str, int] = {}
    for _ in range(bound):
        d = {
            x: max((g.weight(f, x) + c[f] for f in g.var_eqs(x)), default=0)
            for x in g.variables
        }
        new_c = {
            f: max((d[x] - w for x, w in support_of[f]), default=0)
            for f in g.equations
        }
        if trace is not None:
            trace.append(dict(new_c))
        if new_c == c:
            return c, d
        c = new_c
    raise NonConvergence(
        "offset fixpoint did not stabilize; support is not primal-optimal"
    )


def find_offsets(
    g: WeightedBipartiteGraph,
    trace: list[dict[str, int]] | None = None,
) -> OffsetSolution:
    """Smallest offsets of a square system with a complete matching."""
    witness = max_weight_complete_matching(g)
    c, d = _offsets_fixpoint(g, witness.pairs, trace)
    solution = OffsetSolution(
        c=c,
        d=d,
        witness=witness.pairs,
        index=max(c.values(), default=0),
        primal_weight=witness.weight(g),
    )
    solution.validate(g)
    return solution


def find_offsets_nonsquare(
    g: WeightedBipartiteGraph,
    trace: list[dict[str, int]] | None = None,
) -> tuple[OffsetSolution, DmDecomposition]:
    """Smallest offsets of a system with more variables than equations.

    The primal support covers every equation at least once and every
    non-isolated variable exactly once.  It is found by splitting off, for
    each variable, its best solo attachment r_x: maximizing the support
    weight is then an ordinary assignment problem in the reduced weights
    w - r_x, and uncovered variables fall back to their best attachment.

    Returns the offsets together with the decomposition of the shifted
    system viewed as an algebraic system in the leading degrees d_x: its
    overdetermined part is always empty, and its underdetermined part
    exposes the freedom left by the missing equations.
    """
    if max_cardinality_matching(g).cardinality < g.n_equations():
        raise NoEquationCompleteMatching(
            "no matching covers every equation; "
            "the system is structurally overconstrained"
        )
    best: dict[str, tuple[str, int]] = {}
    for x in g.variables:
        for f in g.var_eqs(x):
            w = g.weight(f, x)
            if x not in best or w > best[x][1]:
                best[x] = (f, w)
    cost = {(f, x): best[x][1] - w for (f, x), w in g.edges.items()}
    assignment = _ssp_equation_assignment(g, cost)
    if assignment is None:
        raise NoEquationCompleteMatching(
            "no matching covers every equation; "
            "the system is structurally overconstrained"
        )
    matched_vars = set(assignment.values())
    support = [(f, x) for f, x in assignment.items()]
    for x in g.variables:
        if x not in matched_vars and x in best:
            support.append((best[x][0], x))
    support.sort(key=lambda fx: (g.eq_index(fx[0]), g.var_index(fx[1])))
    support_t = tuple(support)
    c, d = _offsets_fixpoint(g, support_t, trace)
    solution = OffsetSolution(
        c=c,
        d=d,
        witness=support_t,
        index=max(c.values(), default=0),
        primal_weight=sum(g.weight(f, x) for f, x in support_t),
    )
    solution.validate(g)
    tight = WeightedBipartiteGraph(
        g.equations,
        g.variables,
        {
            (f, x): 0
            for (f, x), w in g.edges.items()
            if c[f] + w == d[x]
        },
    )
    decomposition = dm_decompose(tight)
    assert decomposition.over.is_empty(), (
        "shifted system cannot be overdetermined in its leading degrees"
    )
    return solution, decomposition


@dataclass(frozen=True)
class IndexReduction:
    """Result of shifting every equation by its offset.

    sigma_system pairs each shifted equation with its shift count c_f; the
    graph of these equations restricted to the leading degrees d_x is
    structurally nonsingular.  consistency holds the lower shifts (f, k)
    for 0 <= k < c_f, which constrain initial values.
    """

    offsets: OffsetSolution
    sigma_system: tuple[tuple[Equation, int], ...]
    consistency: tuple[tuple[Equation, int], ...]

    def latent_names(self) -> tuple[str, ...]:
        return tuple(eq.name for eq, k in self.sigma_system if k > 0)


def index_reduce(model: Model) -> IndexReduction:
    """Offsets and shifted equations of a guard-free square model."""
    g = WeightedBipartiteGraph.from_model(model)
    solution = find_offsets(g)
    sigma_system = tuple(
        (shift_equation(eq, solution.c[eq.name]), solution.c[eq.name])
        for eq in model.equations
    )
    consistency = tuple(
        (shift_equation(eq, k), k)
        for eq in model.equations
        for k in range(solution.c[eq.name])
    )
    return IndexReduction(solution, sigma_system, consistency)


def _leading_pattern(
    g: WeightedBipartiteGraph, weights: dict[tuple[str, str], int]
) -> WeightedBipartiteGraph:
    """Subgraph of edges attaining the per-variable maximal weight."""
    dhat: dict[str, int] = {}
    for (f, x), w in weights.items():
        if x not in dhat or w > dhat[x]:
            dhat[x] = w
    edges = {(f, x): 0 for (f, x), w in weights.items() if w == dhat[x]}
    return WeightedBipartiteGraph(g.equations, g.variables, edges)


def _shrink_to_minimal(
    violator: set[str], pattern: WeightedBipartiteGraph
) -> list[str]:
    """Drop equations while the set stays structurally singular.

    Scans in declaration order and restarts after each removal; at the
    fixpoint the set has exactly one equation more than it has adjacent
    variables.
    """

    def adjacent(eqs: set[str]) -> set[str]:
        return {x for f in eqs for x in pattern.eq_vars(f)}

    assert len(adjacent(violator)) < len(violator)
    changed = True
    while changed:
        changed = False
        for f in sorted(violator, key=pattern.eq_index):
            trial = violator - {f}
            if trial and len(adjacent(trial)) < len(trial):
                violator = trial
                changed = True
                break
    return sorted(violator, key=pattern.eq_index)


def pantelides_offsets(
    g: WeightedBipartiteGraph,
    trace: list[tuple[tuple[str, ...], dict[str, int]]] | None = None,
) -> dict[str, int]:
    """Differentiation counts by repeated elimination of minimal
    structurally singular subsets.

    The leading pattern keeps, for every variable, the edges attaining its
    maximal weight.  While that pattern has no matching covering all
    equations, a minimal structurally singular subset is located from the
    first uncovered equation and all its equations are differentiated
    (every weight of theirs raised by one).  The final counts equal the
    equation offsets of find_offsets.

    trace, when given, records (subset, counts before differentiation) per
    step.
    """
    if max_cardinality_matching(g).cardinality < g.n_equations():
        raise NoEquationCompleteMatching(
            "no matching covers every equation; differentiation cannot fix "
            "a structurally overconstrained system"
        )
    counts = {f: 0 for f in g.equations}
    weights = dict(g.edges)
    max_w = max(weights.values(), default=0)
    cap = g.n_equations() * g.n_variables() * (max_w + 1) + g.n_equations() + 16
    for _ in range(cap):
        pattern = _leading_pattern(g, weights)
        m = max_cardinality_matching(pattern)
        if m.cardinality == g.n_equations():
            return counts
        matched = m.eq_to_var()
        uncovered = next(f for f in g.equations if f not in matched)
        reachable = {uncovered}
        stack = [uncovered]
        match_var = m.var_to_eq()
        seen_vars: set[str] = set()
        while stack:
            f = stack.pop()
            for x in pattern.eq_vars(f):
                if x in seen_vars:
                    continue
                seen_vars.add(x)
                owner = match_var.get(x)
                if owner is not None and owner not in reachable:
                    reachable.add(owner)
                    stack.append(owner)
        subset = _shrink_to_minimal(reachable, pattern)
        if trace is not None:
            trace.append((tuple(subset), dict(counts)))
        for f in subset:
            counts[f] += 1
            for x in g.eq_vars(f):
                weights[(f, x)] += 1
    raise NonConvergence("differentiation loop exceeded its defensive bound")

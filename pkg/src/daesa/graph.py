"""Bipartite structure of equation systems: matchings, coarse and fine
Dulmage-Mendelsohn decomposition, block triangular form.

Vertices are equation and variable names; construction from a Model adds one
edge per incidence, weighted by the incidence degree.  Every algorithm here
scans vertices in declaration order and breaks ties by lowest declaration
index, so outputs are reproducible and independent of hashing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ModelError, NotCompleteMatching
from .model import Model

Vertex = tuple[str, str]  # ("eq" | "var", name)


class WeightedBipartiteGraph:
    """A weighted bipartite graph between equations and variables.

    equations and variables are ordered name tuples; the position of a name
    is its declaration index.  edges maps (equation, variable) pairs to
    nonnegative integer weights.  Declared variables without any edge are
    legitimate isolated vertices.
    """

    def __init__(
        self,
        equations: Iterable[str],
        variables: Iterable[str],
        edges: Mapping[tuple[str, str], int],
    ):
        self.equations: tuple[str, ...] = tuple(equations)
        self.variables: tuple[str, ...] = tuple(variables)
        if len(set(self.equations)) != len(self.equations):
            raise ModelError("duplicate equation vertex")
        if len(set(self.variables)) != len(self.variables):
            raise ModelError("duplicate variable vertex")
        self._eq_index = {f: i for i, f in enumerate(self.equations)}
        self._var_index = {x: i for i, x in enumerate(self.variables)}
        self.edges: dict[tuple[str, str], int] = {}
        eq_adj: dict[str, list[str]] = {f: [] for f in self.equations}
        var_adj: dict[str, list[str]] = {x: [] for x in self.variables}
        for (f, x), w in edges.items():
            if f not in self._eq_index:
                raise ModelError(f"edge references unknown equation {f!r}")
            if x not in self._var_index:
                raise ModelError(f"edge references unknown variable {x!r}")
            if w < 0:
                raise ModelError(f"negative weight on edge ({f!r}, {x!r})")
            self.edges[(f, x)] = int(w)
        for f, x in self.edges:
            eq_adj[f].append(x)
            var_adj[x].append(f)
        self._eq_adj = {
            f: tuple(sorted(adj, key=self._var_index.__getitem__))
            for f, adj in eq_adj.items()
        }
        self._var_adj = {
            x: tuple(sorted(adj, key=self._eq_index.__getitem__))
            for x, adj in var_adj.items()
        }

    @classmethod
    def from_model(cls, model: Model) -> "WeightedBipartiteGraph":
        """Incidence graph of a model: an edge per occurrence, weighted by
        the maximal differentiation or shift degree of that occurrence."""
        edges = {
            (eq.name, inc.variable): inc.degree
            for eq in model.equations
            for inc in eq.incidences
        }
        return cls(model.equation_names(), model.variable_names(), edges)

    # -- plain queries ---------------------------------------------------

    def n_equations(self) -> int:
        return len(self.equations)

    def n_variables(self) -> int:
        return len(self.variables)

    def is_square(self) -> bool:
        return len(self.equations) == len(self.variables)

    def weight(self, f: str, x: str) -> int:
        return self.edges[(f, x)]

    def eq_vars(self, f: str) -> tuple[str, ...]:
        return self._eq_adj[f]

    def var_eqs(self, x: str) -> tuple[str, ...]:
        return self._var_adj[x]

    def eq_index(self, f: str) -> int:
        return self._eq_index[f]

    def var_index(self, x: str) -> int:
        return self._var_index[x]

    # -- derived graphs ----------------------------------------------------

    def restrict(
        self,
        equations: Iterable[str] | None = None,
        variables: Iterable[str] | None = None,
    ) -> "WeightedBipartiteGraph":
        """Subgraph induced on the given vertex subsets (declaration order
        is preserved)."""
        keep_eq = set(self.equations if equations is None else equations)
        keep_var = set(self.variables if variables is None else variables)
        eqs = tuple(f for f in self.equations if f in keep_eq)
        vars_ = tuple(x for x in self.variables if x in keep_var)
        edges = {
            (f, x): w
            for (f, x), w in self.edges.items()
            if f in keep_eq and x in keep_var
        }
        return WeightedBipartiteGraph(eqs, vars_, edges)

    def scaled(self, factor: int) -> "WeightedBipartiteGraph":
        """Same graph with every weight multiplied by factor."""
        if factor < 0:
            raise ModelError("scale factor must be nonnegative")
        return WeightedBipartiteGraph(
            self.equations,
            self.variables,
            {e: w * factor for e, w in self.edges.items()},
        )


@dataclass(frozen=True)
class Matching:
    """A set of vertex-disjoint (equation, variable) edges."""

    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        eqs = [f for f, _ in self.pairs]
        vars_ = [x for _, x in self.pairs]
        if len(set(eqs)) != len(eqs) or len(set(vars_)) != len(vars_):
            raise ModelError("matching reuses a vertex")

    @property
    def cardinality(self) -> int:
        return len(self.pairs)

    def eq_to_var(self) -> dict[str, str]:
        return dict(self.pairs)

    def var_to_eq(self) -> dict[str, str]:
        return {x: f for f, x in self.pairs}

    def covers_equations(self, g: WeightedBipartiteGraph) -> bool:
        return set(f for f, _ in self.pairs) == set(g.equations)

    def covers_variables(self, g: WeightedBipartiteGraph) -> bool:
        return set(x for _, x in self.pairs) == set(g.variables)

    def is_complete(self, g: WeightedBipartiteGraph) -> bool:
        return self.covers_equations(g) and self.covers_variables(g)

    def weight(self, g: WeightedBipartiteGraph) -> int:
        return sum(g.weight(f, x) for f, x in self.pairs)


def max_cardinality_matching(g: WeightedBipartiteGraph) -> Matching:
    """Maximum-cardinality matching by Hopcroft-Karp.

    Layered BFS from the unmatched equations, then depth-first augmentation
    along the layers.  Adjacency lists are in declaration order, so the
    matching produced is a deterministic function of the graph.
    """
    INF = len(g.equations) + len(g.variables) + 1
    match_eq: dict[str, str | None] = {f: None for f in g.equations}
    match_var: dict[str, str | None] = {x: None for x in g.variables}

    def bfs() -> bool:
        dist: dict[str, int] = {}
        queue: list[str] = []
        for f in g.equations:
            if match_eq[f] is None:
                dist[f] = 0
                queue.append(f)
        found = False
        head = 0
        while head < len(queue):
            f = queue[head]
            head += 1
            for x in g.eq_vars(f):
                nxt = match_var[x]
                if nxt is None:
                    found = True
                elif nxt not in dist:
                    dist[nxt] = dist[f] + 1
                    queue.append(nxt)
        bfs.dist = dist  # type: ignore[attr-defined]
        return found

    def dfs(f: str) -> bool:
        dist = bfs.dist  # type: ignore[attr-defined]
        for x in g.eq_vars(f):
            nxt = match_var[x]
            if nxt is None or (
                dist.get(nxt) == dist.get(f, INF) + 1 and dfs(nxt)
            ):
                match_eq[f] = x
                match_var[x] = f
                return True
        dist[f] = INF
        return False

    while bfs():
        for f in g.equations:
            if match_eq[f] is None:
                dfs(f)
    pairs = tuple(
        (f, match_eq[f]) for f in g.equations if match_eq[f] is not None
    )
    return Matching(pairs)  # type: ignore[arg-type]


def is_structurally_nonsingular(g: WeightedBipartiteGraph) -> bool:
    """True when the graph is square and admits a complete matching."""
    return (
        g.is_square()
        and max_cardinality_matching(g).cardinality == g.n_equations()
    )


@dataclass(frozen=True)
class DmBlock:
    """A set of equations together with a set of variables."""

    equations: tuple[str, ...]
    variables: tuple[str, ...]

    def is_empty(self) -> bool:
        return not self.equations and not self.variables


@dataclass(frozen=True)
class DmDecomposition:
    """Dulmage-Mendelsohn decomposition.

    under / enabled / over are the coarse parts: the underdetermined part
    (reachable by alternating paths from unmatched variables), the
    well-determined part and the overdetermined part (reachable from
    unmatched equations).  fine_blocks splits the well-determined part into
    its block triangular form, listed in a topological order; partial_order
    holds the immediate precedence edges (i, j) between fine block indices,
    meaning block i must be solved before block j.

    The decomposition does not depend on which maximum matching was used to
    compute it; `matching` records the one this instance was derived from.
    """

    under: DmBlock
    enabled: DmBlock
    over: DmBlock
    fine_blocks: tuple[DmBlock, ...]
    partial_order: frozenset[tuple[int, int]]
    matching: Matching

    def is_structurally_nonsingular(self) -> bool:
        return self.over.is_empty() and self.under.is_empty()


def _alternating_from_equations(
    g: WeightedBipartiteGraph,
    match_eq: dict[str, str],
    match_var: dict[str, str],
    starts: list[str],
) -> tuple[set[str], set[str]]:
    """Vertices reachable from unmatched equations: equations leave through
    any edge, variables only through their matching edge."""
    eqs, vars_ = set(starts), set()
    stack = list(starts)
    while stack:
        f = stack.pop()
        for x in g.eq_vars(f):
            if x in vars_ or match_eq.get(f) == x:
                continue
            vars_.add(x)
            owner = match_var.get(x)
            if owner is not None and owner not in eqs:
                eqs.add(owner)
                stack.append(owner)
    return eqs, vars_


def _alternating_from_variables(
    g: WeightedBipartiteGraph,
    match_eq: dict[str, str],
    match_var: dict[str, str],
    starts: list[str],
) -> tuple[set[str], set[str]]:
    """Vertices reachable from unmatched variables (the mirror image)."""
    eqs, vars_ = set(), set(starts)
    stack = list(starts)
    while stack:
        x = stack.pop()
        for f in g.var_eqs(x):
            if f in eqs or match_var.get(x) == f:
                continue
            eqs.add(f)
            partner = match_eq.get(f)
            if partner is not None and partner not in vars_:
                vars_.add(partner)
                stack.append(partner)
    return eqs, vars_


def _ordered_block(
    g: WeightedBipartiteGraph, eqs: set[str], vars_: set[str]
) -> DmBlock:
    return DmBlock(
        tuple(f for f in g.equations if f in eqs),
        tuple(x for x in g.variables if x in vars_),
    )


def dm_decompose(g: WeightedBipartiteGraph) -> DmDecomposition:
    """Coarse plus fine Dulmage-Mendelsohn decomposition of g."""
    m = max_cardinality_matching(g)
    match_eq = m.eq_to_var()
    match_var = m.var_to_eq()
    unmatched_eqs = [f for f in g.equations if f not in match_eq]
    unmatched_vars = [x for x in g.variables if x not in match_var]
    over_eqs, over_vars = _alternating_from_equations(
        g, match_eq, match_var, unmatched_eqs
    )
    under_eqs, under_vars = _alternating_from_variables(
        g, match_eq, match_var, unmatched_vars
    )
    enabled_eqs = set(g.equations) - over_eqs - under_eqs
    enabled_vars = set(g.variables) - over_vars - under_vars
    enabled_graph = g.restrict(enabled_eqs, enabled_vars)
    enabled_matching = Matching(
        tuple(
            (f, x)
            for f, x in m.pairs
            if f in enabled_eqs and x in enabled_vars
        )
    )
    _, blocks, order = direct_and_scc(enabled_graph, enabled_matching)
    return DmDecomposition(
        under=_ordered_block(g, under_eqs, under_vars),
        enabled=_ordered_block(g, enabled_eqs, enabled_vars),
        over=_ordered_block(g, over_eqs, over_vars),
        fine_blocks=blocks,
        partial_order=order,
        matching=m,
    )


def remove_overdetermined(g: WeightedBipartiteGraph) -> WeightedBipartiteGraph:
    """Drop the equations of the overdetermined part, keep all variables.

    The resulting graph has an empty overdetermined part."""
    dm = dm_decompose(g)
    keep = [f for f in g.equations if f not in set(dm.over.equations)]
    return g.restrict(keep, g.variables)


def direct_and_scc(
    g: WeightedBipartiteGraph, m: Matching
) -> tuple[
    dict[Vertex, tuple[Vertex, ...]],
    tuple[DmBlock, ...],
    frozenset[tuple[int, int]],
]:
    """Orient g along the complete matching m and condense into blocks.

    Matched edges point from the equation to its variable; all other edges
    point from the variable to the equation.  Each strongly connected
    component owning at least one equation yields a block whose variables
    are the matched partners of its equations.  Returns the oriented graph,
    the blocks in a topological order (earlier blocks feed later ones) and
    the immediate precedence edges between block indices.
    """
    if not m.is_complete(g):
        raise NotCompleteMatching(
            f"matching covers {m.cardinality} pairs, graph has "
            f"{g.n_equations()} equations and {g.n_variables()} variables"
        )
    match_eq = m.eq_to_var()
    match_var = m.var_to_eq()
    digraph: dict[Vertex, tuple[Vertex, ...]] = {}
    for f in g.equations:
        digraph[("eq", f)] = (("var", match_eq[f]),)
    for x in g.variables:
        digraph[("var", x)] = tuple(
            ("eq", f) for f in g.var_eqs(x) if f != match_var[x]
        )

    # SCCs of the contracted graph: one node per matched pair, an arc from
    # the pair owning a variable to every other equation using it.
    succ: dict[str, tuple[str, ...]] = {}
    for f in g.equations:
        x = match_eq[f]
        succ[f] = tuple(h for h in g.var_eqs(x) if h != f)
    sccs = _tarjan(list(g.equations), succ)

    block_of: dict[str, int] = {}
    for i, comp in enumerate(sccs):
        for f in comp:
            block_of[f] = i
    edges_between: set[tuple[int, int]] = set()
    for f in g.equations:
        for h in succ[f]:
            a, b = block_of[f], block_of[h]
            if a != b:
                edges_between.add((a, b))

    order = _topological(len(sccs), edges_between, sccs, g)
    position = {old: new for new, old in enumerate(order)}
    blocks = tuple(
        DmBlock(
            tuple(f for f in g.equations if block_of[f] == old),
            tuple(
                x
                for x in g.variables
                if block_of[match_var[x]] == old
            ),
        )
        for old in order
    )
    partial_order = frozenset(
        (position[a], position[b]) for a, b in edges_between
    )
    return digraph, blocks, partial_order


def _tarjan(nodes: list[str], succ: dict[str, tuple[str, ...]]) -> list[list[str]]:
    """Iterative Tarjan; components come out deterministically given the
    fixed node and successor order."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    sccs: list[list[str]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work: list[tuple[str, int]] = [(root, 0)]
        while work:
            node, child_i = work[-1]
            if child_i == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            advanced = False
            children = succ[node]
            while child_i < len(children):
                child = children[child_i]
                child_i += 1
                if child not in index:
                    work[-1] = (node, child_i)
                    work.append((child, 0))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                comp: list[str] = []
                while True:
                    top = stack.pop()
                    on_stack.discard(top)
                    comp.append(top)
                    if top == node:
                        break
                sccs.append(comp)
            if work:
                parent, _ = work[-1]
                low[parent] = min(low[parent], low[node])
    return sccs


def _topological(
    n: int,
    edges: set[tuple[int, int]],
    sccs: list[list[str]],
    g: WeightedBipartiteGraph,
) -> list[int]:
    """Kahn's algorithm over SCC indices; ties resolved by the smallest
    equation declaration index inside the component."""
    indeg = [0] * n
    out: dict[int, list[int]] = {i: [] for i in range(n)}
    for a, b in edges:
        indeg[b] += 1
        out[a].append(b)
    rank = [min(g.eq_index(f) for f in comp) for comp in sccs]
    ready = sorted((i for i in range(n) if indeg[i] == 0), key=rank.__getitem__)
    order: list[int] = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        changed = False
        for b in sorted(out[node]):
            indeg[b] -= 1
            if indeg[b] == 0:
                ready.append(b)
                changed = True
        if changed:
            ready.sort(key=rank.__getitem__)
    if len(order) != n:
        raise AssertionError("cycle across strongly connected components")
    return order

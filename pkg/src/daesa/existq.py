"""Structural analysis of existentially quantified systems.

Given F(X, W, Y) = 0 with designated roles (X the variables to determine,
W auxiliary variables to eliminate existentially, Y given context that is
assumed consistent), decide whether the system pins down X uniquely.

Two graphs are involved.  Overdetermination is judged on the full graph
with X, W and Y all dependent: an equation surplus that not even the free
Y can absorb means consistent Y values are not structurally guaranteed.
Uniqueness of X given Y is judged on the graph restricted to the unknowns
X and W:

  * rows whose incidences all fall in Y constrain given data only and are
    set aside as consistency content;
  * rows left unmatched over the unknowns are redundant on consistent
    data (the full graph absorbed them) and are dropped the same way;
  * no X variable may sit in the underdetermined part of what remains;
  * a fine block containing an X variable must contain no W variable.

Consuming a W variable from a preceding block is allowed: if that W were
itself underdetermined, the consuming block would already have been pulled
into the underdetermined part, so the only W values that can feed an X
block are uniquely determined ones.  The stricter reading that bans W
anywhere upstream of an X block is available as the "transitive" dialect;
the two dialects genuinely disagree on some inputs (switched equations
whose shifted copies pin auxiliary instances to constants), and callers
can compare them with variants_agree.

f_sigma collects the blocks holding X variables and f_consistency the
remaining blocks, followed by the set-aside rows as variable-less blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ModelError
from .graph import (
    DmBlock,
    DmDecomposition,
    WeightedBipartiteGraph,
    dm_decompose,
)
from .model import Model

IMMEDIATE = "immediate"
TRANSITIVE = "transitive"


@dataclass(frozen=True)
class RolePartition:
    """Disjoint roles covering all variables of a model."""

    x_vars: frozenset[str]
    w_vars: frozenset[str]
    y_vars: frozenset[str]

    @classmethod
    def of(cls, x=(), w=(), y=()) -> "RolePartition":
        return cls(frozenset(x), frozenset(w), frozenset(y))

    def validate(self, model: Model) -> None:
        if self.x_vars & self.w_vars or self.x_vars & self.y_vars or (
            self.w_vars & self.y_vars
        ):
            raise ModelError("variable roles overlap")
        declared = set(model.variable_names())
        union = self.x_vars | self.w_vars | self.y_vars
        if union != declared:
            missing = sorted(declared - union)
            extra = sorted(union - declared)
            raise ModelError(
                f"roles must cover the variables exactly; "
                f"missing {missing}, unknown {extra}"
            )


@dataclass(frozen=True)
class ExistQuantResult:
    """Verdicts and block partition of an existential quantification.

    f_sigma holds the fine blocks containing an X variable, f_consistency
    the remaining fine blocks followed by the set-aside rows (all-given
    and redundant ones) as variable-less blocks; both are populated even
    when a verdict is negative, so failed analyses stay inspectable.
    """

    b_over: bool
    b_under: bool
    f_sigma: tuple[DmBlock, ...]
    f_consistency: tuple[DmBlock, ...]
    decomposition: DmDecomposition
    roles: RolePartition

    @property
    def success(self) -> bool:
        return self.b_over and self.b_under


def exist_quantif_eqn(
    model: Model,
    roles: RolePartition,
    predecessors: str = IMMEDIATE,
) -> ExistQuantResult:
    """Decide whether F(X, W, Y) = 0 determines X given consistent Y."""
    if predecessors not in (IMMEDIATE, TRANSITIVE):
        raise ModelError(f"unknown predecessor dialect {predecessors!r}")
    if model.guards:
        raise ModelError("existential quantification needs a guard-free model")
    roles.validate(model)
    g_full = WeightedBipartiteGraph.from_model(model)
    b_over = dm_decompose(g_full).over.is_empty()

    unknowns = tuple(
        v for v in g_full.variables if v not in roles.y_vars
    )
    given_rows = tuple(
        f
        for f in g_full.equations
        if all(x in roles.y_vars for x in g_full.eq_vars(f))
    )
    given_set = set(given_rows)
    active = tuple(f for f in g_full.equations if f not in given_set)
    g_u = g_full.restrict(active, unknowns)
    dm = dm_decompose(g_u)
    matched = dm.matching.eq_to_var()
    redundant = tuple(f for f in dm.over.equations if f not in matched)
    if redundant:
        redundant_set = set(redundant)
        kept = tuple(f for f in active if f not in redundant_set)
        g_u = g_u.restrict(kept, unknowns)
        dm = dm_decompose(g_u)
    assert dm.over.is_empty(), "kept rows must all be matchable"

    cond_under = not (set(dm.under.variables) & roles.x_vars)

    blocks = dm.fine_blocks
    x_block_indices = [
        i
        for i, block in enumerate(blocks)
        if set(block.variables) & roles.x_vars
    ]
    cond_blocks = all(
        not (set(blocks[i].variables) & roles.w_vars) for i in x_block_indices
    )
    if cond_blocks and predecessors == TRANSITIVE:
        pred: dict[int, set[int]] = {i: set() for i in range(len(blocks))}
        for a, b in dm.partial_order:
            pred[b].add(a)
        for i in x_block_indices:
            seen: set[int] = set()
            stack = list(pred[i])
            while stack:
                j = stack.pop()
                if j in seen:
                    continue
                seen.add(j)
                stack.extend(pred[j])
            if any(set(blocks[j].variables) & roles.w_vars for j in seen):
                cond_blocks = False
                break

    b_under = cond_under and cond_blocks
    x_set = set(x_block_indices)
    f_sigma = tuple(blocks[i] for i in range(len(blocks)) if i in x_set)
    leftovers = sorted(set(redundant) | given_set, key=g_full.eq_index)
    f_consistency = tuple(
        blocks[i] for i in range(len(blocks)) if i not in x_set
    ) + tuple(DmBlock((f,), ()) for f in leftovers)
    return ExistQuantResult(
        b_over=b_over,
        b_under=b_under,
        f_sigma=f_sigma,
        f_consistency=f_consistency,
        decomposition=dm,
        roles=roles,
    )


def variants_agree(model: Model, roles: RolePartition) -> bool:
    """True when both condition-3 dialects yield the same verdicts."""
    a = exist_quantif_eqn(model, roles, IMMEDIATE)
    b = exist_quantif_eqn(model, roles, TRANSITIVE)
    return (a.b_over, a.b_under) == (b.b_over, b.b_under)

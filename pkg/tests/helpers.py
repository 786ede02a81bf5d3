"""Deterministic generators and small drivers shared by the test modules."""

from __future__ import annotations

import contextlib
import io

from daesa import (
    CONTINUOUS,
    Model,
    WeightedBipartiteGraph,
    enumerate_modes,
    parse,
    restrict_to_mode,
)
from daesa.cli import main as cli_main

from conftest import model_source

CORPUS_FILES = ("pendulum.dae", "clutch.dae", "rldc2.dae")


def corpus_mode_graphs() -> list[tuple[str, WeightedBipartiteGraph]]:
    """One square incidence graph per (model, mode) of the shipped corpus."""
    out = []
    for filename in CORPUS_FILES:
        model = parse(model_source(filename))
        for mode in enumerate_modes(model):
            sub = restrict_to_mode(model, mode)
            tag = ",".join(f"{g}={int(v)}" for g, v in mode.items()) or "-"
            out.append((f"{model.name}[{tag}]", WeightedBipartiteGraph.from_model(sub)))
    return out


def random_graph(rng, n_eq, n_var, density=0.4, max_weight=2):
    eqs = [f"f{i}" for i in range(n_eq)]
    xs = [f"x{j}" for j in range(n_var)]
    edges = {}
    for f in eqs:
        for x in xs:
            if rng.random() < density:
                edges[(f, x)] = rng.randint(0, max_weight)
    return WeightedBipartiteGraph(eqs, xs, edges)


def random_nonsingular_graph(rng, n, density=0.35, max_weight=2):
    """Square graph with a full diagonal, hence a complete matching."""
    eqs = [f"f{i}" for i in range(n)]
    xs = [f"x{j}" for j in range(n)]
    edges = {(eqs[i], xs[i]): rng.randint(0, max_weight) for i in range(n)}
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < density:
                edges[(eqs[i], xs[j])] = rng.randint(0, max_weight)
    return WeightedBipartiteGraph(eqs, xs, edges)


def random_square_model(rng, n, max_degree=2, density=0.45):
    """Continuous model with a full diagonal incidence."""
    names = [f"x{i}" for i in range(n)]
    equations = []
    for i in range(n):
        degrees = {names[i]: rng.randint(0, max_degree)}
        for j in range(n):
            if j != i and rng.random() < density:
                degrees[names[j]] = rng.randint(0, max_degree)
        equations.append((f"e{i}", degrees))
    return Model.of(f"random{n}", CONTINUOUS, names, equations)


def positional(g: WeightedBipartiteGraph):
    """Graph as bitmask rows plus a positional weight map (oracle form)."""
    rows = []
    weights = {}
    for i, f in enumerate(g.equations):
        mask = 0
        for x in g.eq_vars(f):
            j = g.var_index(x)
            mask |= 1 << j
            weights[(i, j)] = g.weight(f, x)
        rows.append(mask)
    return rows, weights


def named_pairs(g: WeightedBipartiteGraph, positional_pairs):
    return frozenset(
        (g.equations[i], g.variables[j]) for i, j in positional_pairs
    )


def run_cli(argv: list[str]) -> tuple[int, str, str]:
    """Run the CLI in-process, capturing stdout and stderr."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli_main(argv)
    return code, out.getvalue(), err.getvalue()

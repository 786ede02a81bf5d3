"""Command line driver.

One subcommand per analysis: parse, dm, btf, offsets, pantelides, existq,
array, modechange, modes.  Output formats: text (default), json (stable:
sorted keys, entity lists in declaration order, no timestamps or absolute
paths, so repeated runs are byte-identical) and dot for the graph-shaped
results.

Exit codes: 0 for a completed analysis, including negative verdicts such as
structural singularity; 1 for usage, file and parse errors; 2 for internal
contract violations.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .arrays import array_index_search, build_array
from .errors import (
    CausalityViolation,
    ModelError,
    NoCompleteMatching,
    NoEquationCompleteMatching,
    NonConvergence,
    NotDeterminedWithinBound,
    ParseError,
    StructuralAnalysisError,
    UnknownGuard,
)
from .existq import IMMEDIATE, TRANSITIVE, RolePartition, exist_quantif_eqn
from .graph import (
    DmBlock,
    DmDecomposition,
    Matching,
    WeightedBipartiteGraph,
    dm_decompose,
)
from .model import Model, restrict_to_mode
from .multimode import (
    ModeChange,
    analyze_all_modes,
    resolve_conflicts,
    unfold_mode_change,
)
from .parser import parse_source
from .sigma import (
    OffsetSolution,
    find_offsets,
    find_offsets_nonsquare,
    index_reduce,
    pantelides_offsets,
)


class _UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: A003 - argparse API
        raise _UsageError(message)


def _parse_mode(text: str) -> dict[str, bool]:
    mode: dict[str, bool] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise _UsageError(f"bad mode literal {part!r}, expected name=true|false")
        name, value = part.split("=", 1)
        value = value.strip().lower()
        if value not in ("true", "false"):
            raise _UsageError(f"bad guard value {value!r}, expected true or false")
        mode[name.strip()] = value == "true"
    return mode


def _parse_roles(text: str) -> RolePartition:
    buckets: dict[str, list[str]] = {"x": [], "w": [], "y": []}
    for section in text.split(";"):
        section = section.strip()
        if not section:
            continue
        if "=" not in section:
            raise _UsageError(f"bad role section {section!r}, expected x=v1,v2")
        key, names = section.split("=", 1)
        key = key.strip().lower()
        if key not in buckets:
            raise _UsageError(f"unknown role {key!r}, expected x, w or y")
        buckets[key].extend(
            n.strip() for n in names.split(",") if n.strip()
        )
    return RolePartition.of(buckets["x"], buckets["w"], buckets["y"])


# -- payload builders ---------------------------------------------------------


def _block_payload(block: DmBlock) -> dict:
    return {
        "equations": list(block.equations),
        "variables": list(block.variables),
    }


def _dm_payload(dm: DmDecomposition) -> dict:
    return {
        "under": _block_payload(dm.under),
        "enabled": _block_payload(dm.enabled),
        "over": _block_payload(dm.over),
        "fine_blocks": [_block_payload(b) for b in dm.fine_blocks],
        "partial_order": sorted([a, b] for a, b in dm.partial_order),
        "matching": [list(p) for p in dm.matching.pairs],
    }


def _offsets_payload(sol: OffsetSolution) -> dict:
    return {
        "c": dict(sol.c),
        "d": dict(sol.d),
        "index": sol.index,
        "primal_weight": sol.primal_weight,
        "witness": [list(p) for p in sol.witness],
    }


def _model_payload(model: Model) -> dict:
    return {
        "name": model.name,
        "time_domain": model.time_domain,
        "guards": list(model.guards),
        "variables": [
            {"name": v.name, "kind": v.kind} for v in model.variables
        ],
        "equations": [
            {
                "name": eq.name,
                "incidences": {
                    inc.variable: inc.degree for inc in eq.incidences
                },
                "guard": _guard_text(eq),
            }
            for eq in model.equations
        ],
    }


def _guard_text(eq) -> str | None:
    if eq.guard is None:
        return None
    return " and ".join(
        name if pol else f"not {name}" for name, pol in eq.guard.literals
    )


# -- text renderers -----------------------------------------------------------


def _text_block(block: DmBlock) -> str:
    eqs = ", ".join(block.equations) or "-"
    vars_ = ", ".join(block.variables) or "-"
    return f"{{{eqs}}} / {{{vars_}}}"


def _text_dm(dm: DmDecomposition, lines: list[str]) -> None:
    lines.append(f"underdetermined part: {_text_block(dm.under)}")
    lines.append("well-determined blocks (solve order):")
    if not dm.fine_blocks:
        lines.append("  (none)")
    for i, block in enumerate(dm.fine_blocks):
        lines.append(f"  [{i}] {_text_block(block)}")
    if dm.partial_order:
        deps = ", ".join(f"{a}<{b}" for a, b in sorted(dm.partial_order))
        lines.append(f"block precedences: {deps}")
    lines.append(f"overdetermined part: {_text_block(dm.over)}")


def _text_offsets(sol: OffsetSolution, lines: list[str]) -> None:
    lines.append(f"structural index (max equation offset): {sol.index}")
    lines.append("equation offsets c:")
    for f, v in sol.c.items():
        lines.append(f"  {f}: {v}")
    lines.append("variable offsets d:")
    for x, v in sol.d.items():
        lines.append(f"  {x}: {v}")
    pairs = ", ".join(f"{f}-{x}" for f, x in sol.witness)
    lines.append(f"support (weight {sol.primal_weight}): {pairs}")


# -- dot renderers ------------------------------------------------------------


def _dot_bipartite(
    g: WeightedBipartiteGraph,
    bold: set[tuple[str, str]],
    clusters: list[tuple[str, DmBlock]] | None = None,
) -> str:
    def eq_node(f: str) -> str:
        return f'"eq:{f}"'

    def var_node(x: str) -> str:
        return f'"var:{x}"'

    out = ["digraph structure {", "  rankdir=LR;", "  edge [dir=none];"]
    clustered_eqs: set[str] = set()
    clustered_vars: set[str] = set()
    if clusters:
        for i, (label, block) in enumerate(clusters):
            out.append(f"  subgraph cluster_{i} {{")
            out.append(f'    label="{label}";')
            for f in block.equations:
                out.append(f'    {eq_node(f)} [shape=box, label="{f}"];')
                clustered_eqs.add(f)
            for x in block.variables:
                out.append(f'    {var_node(x)} [shape=ellipse, label="{x}"];')
                clustered_vars.add(x)
            out.append("  }")
    for f in g.equations:
        if f not in clustered_eqs:
            out.append(f'  {eq_node(f)} [shape=box, label="{f}"];')
    for x in g.variables:
        if x not in clustered_vars:
            out.append(f'  {var_node(x)} [shape=ellipse, label="{x}"];')
    for (f, x), w in sorted(
        g.edges.items(), key=lambda e: (g.eq_index(e[0][0]), g.var_index(e[0][1]))
    ):
        attrs = [f'label="{w}"']
        if (f, x) in bold:
            attrs.append("style=bold")
        out.append(f"  {eq_node(f)} -> {var_node(x)} [{', '.join(attrs)}];")
    out.append("}")
    return "\n".join(out) + "\n"


def _dot_dm(g: WeightedBipartiteGraph, dm: DmDecomposition) -> str:
    clusters: list[tuple[str, DmBlock]] = []
    if not dm.under.is_empty():
        clusters.append(("underdetermined", dm.under))
    clusters.extend(
        (f"block {i}", block) for i, block in enumerate(dm.fine_blocks)
    )
    if not dm.over.is_empty():
        clusters.append(("overdetermined", dm.over))
    return _dot_bipartite(g, set(dm.matching.pairs), clusters)


# -- subcommand handlers -------------------------------------------------------

#: handler result: (payload, text lines, dot text or None)
Handled = tuple[dict, list[str], str | None]


def _restricted(model: Model, args) -> Model:
    mode = _parse_mode(args.mode) if args.mode else {}
    if model.guards or mode:
        try:
            return restrict_to_mode(model, mode)
        except UnknownGuard as exc:
            raise _UsageError(str(exc))
    return restrict_to_mode(model, {})


def _cmd_parse(model: Model, args) -> Handled:
    payload = {"model": _model_payload(model)}
    lines = [
        f"model {model.name} ({model.time_domain}), "
        f"{len(model.variables)} variables, "
        f"{len(model.equations)} equations, "
        f"{len(model.guards)} guards"
    ]
    for eq in model.equations:
        incs = ", ".join(
            f"{inc.variable}^{inc.degree}" if inc.degree else inc.variable
            for inc in eq.incidences
        )
        guard = _guard_text(eq)
        suffix = f"  [when {guard}]" if guard else ""
        lines.append(f"  {eq.name}: {{{incs}}}{suffix}")
    g = WeightedBipartiteGraph.from_model(model)
    return payload, lines, _dot_bipartite(g, set())


def _cmd_dm(model: Model, args) -> Handled:
    sub = _restricted(model, args)
    g = WeightedBipartiteGraph.from_model(sub)
    dm = dm_decompose(g)
    payload = {
        "dm": _dm_payload(dm),
        "structurally_nonsingular": dm.is_structurally_nonsingular(),
    }
    lines: list[str] = []
    _text_dm(dm, lines)
    return payload, lines, _dot_dm(g, dm)


def _cmd_btf(model: Model, args) -> Handled:
    sub = _restricted(model, args)
    g = WeightedBipartiteGraph.from_model(sub)
    dm = dm_decompose(g)
    if not dm.is_structurally_nonsingular():
        payload = {
            "verdict": "structurally-singular",
            "dm": _dm_payload(dm),
        }
        lines = ["structurally singular; no block triangular form"]
        _text_dm(dm, lines)
        return payload, lines, _dot_dm(g, dm)
    payload = {
        "verdict": "nonsingular",
        "blocks": [_block_payload(b) for b in dm.fine_blocks],
        "partial_order": sorted([a, b] for a, b in dm.partial_order),
    }
    lines = ["block triangular form (solve order):"]
    for i, block in enumerate(dm.fine_blocks):
        lines.append(f"  [{i}] {_text_block(block)}")
    return payload, lines, _dot_dm(g, dm)


def _cmd_offsets(model: Model, args) -> Handled:
    sub = _restricted(model, args)
    g = WeightedBipartiteGraph.from_model(sub)
    lines: list[str] = []
    if args.nonsquare:
        try:
            sol, zdm = find_offsets_nonsquare(g)
        except NoEquationCompleteMatching:
            dm = dm_decompose(g)
            payload = {
                "verdict": "structurally-overconstrained",
                "dm": _dm_payload(dm),
            }
            lines.append("no matching covers every equation")
            _text_dm(dm, lines)
            return payload, lines, _dot_dm(g, dm)
        payload = {
            "verdict": "offsets",
            **_offsets_payload(sol),
            "leading_dm": _dm_payload(zdm),
        }
        _text_offsets(sol, lines)
        lines.append("decomposition in the leading degrees:")
        _text_dm(zdm, lines)
        return payload, lines, _dot_bipartite(g, set(sol.witness))
    try:
        sol = find_offsets(g)
    except NoCompleteMatching:
        dm = dm_decompose(g)
        payload = {
            "verdict": "structurally-singular",
            "dm": _dm_payload(dm),
        }
        lines.append("no complete matching; diagnosis follows")
        _text_dm(dm, lines)
        return payload, lines, _dot_dm(g, dm)
    reduction = index_reduce(sub)
    payload = {
        "verdict": "offsets",
        **_offsets_payload(sol),
        "latent": [eq.name for eq, k in reduction.sigma_system if k > 0],
        "consistency": [eq.name for eq, _ in reduction.consistency],
    }
    _text_offsets(sol, lines)
    latent = ", ".join(payload["latent"]) or "-"
    lines.append(f"latent equations: {latent}")
    consistency = ", ".join(payload["consistency"]) or "-"
    lines.append(f"consistency constraints: {consistency}")
    return payload, lines, _dot_bipartite(g, set(sol.witness))


def _cmd_pantelides(model: Model, args) -> Handled:
    sub = _restricted(model, args)
    g = WeightedBipartiteGraph.from_model(sub)
    try:
        counts = pantelides_offsets(g)
    except NoEquationCompleteMatching:
        dm = dm_decompose(g)
        payload = {
            "verdict": "structurally-overconstrained",
            "dm": _dm_payload(dm),
        }
        lines = ["no matching covers every equation"]
        _text_dm(dm, lines)
        return payload, lines, None
    payload = {
        "verdict": "counts",
        "counts": dict(counts),
        "index": max(counts.values(), default=0),
    }
    lines = ["differentiation counts:"]
    for f, v in counts.items():
        lines.append(f"  {f}: {v}")
    return payload, lines, None


def _cmd_existq(model: Model, args) -> Handled:
    if args.roles is None:
        raise _UsageError("existq requires --roles x=...;w=...;y=...")
    sub = _restricted(model, args)
    roles = _parse_roles(args.roles)
    try:
        result = exist_quantif_eqn(sub, roles, args.predecessors)
        other = exist_quantif_eqn(
            sub,
            roles,
            TRANSITIVE if args.predecessors == IMMEDIATE else IMMEDIATE,
        )
    except ModelError as exc:
        raise _UsageError(str(exc))
    payload = {
        "b_over": result.b_over,
        "b_under": result.b_under,
        "success": result.success,
        "predecessors": args.predecessors,
        "f_sigma": [_block_payload(b) for b in result.f_sigma],
        "f_consistency": [_block_payload(b) for b in result.f_consistency],
        "dm": _dm_payload(result.decomposition),
    }
    diagnostics = []
    if (other.b_over, other.b_under) != (result.b_over, result.b_under):
        diagnostics.append(
            "predecessor dialects disagree on this input: "
            f"{args.predecessors} gives ({result.b_over}, {result.b_under})"
        )
    lines = [
        f"overdetermined part empty: {result.b_over}",
        f"unknowns determined: {result.b_under}",
        "determining blocks:",
    ]
    if not result.f_sigma:
        lines.append("  (none)")
    for block in result.f_sigma:
        lines.append(f"  {_text_block(block)}")
    lines.append("consistency blocks:")
    if not result.f_consistency:
        lines.append("  (none)")
    for block in result.f_consistency:
        lines.append(f"  {_text_block(block)}")
    payload["diagnostics"] = diagnostics
    return payload, lines + diagnostics, None


def _cmd_array(model: Model, args) -> Handled:
    sub = _restricted(model, args)
    try:
        k, array, result = array_index_search(sub, args.k, args.predecessors)
    except NotDeterminedWithinBound as exc:
        bound = args.k if args.k is not None else len(sub.equations)
        payload = {"verdict": "not-determined", "bound": bound}
        return payload, [str(exc)], None
    payload = {
        "verdict": "determined",
        "k": k,
        "b_over": result.b_over,
        "b_under": result.b_under,
        "x": sorted(array.roles.x_vars),
        "w": sorted(array.roles.w_vars),
        "y": sorted(array.roles.y_vars),
        "f_sigma": [_block_payload(b) for b in result.f_sigma],
        "f_consistency": [_block_payload(b) for b in result.f_consistency],
    }
    lines = [
        f"smallest determining array size: {k}",
        f"unknowns: {', '.join(payload['x'])}",
    ]
    lines.append("determining blocks:")
    for block in result.f_sigma:
        lines.append(f"  {_text_block(block)}")
    return payload, lines, None


def _cmd_modechange(model: Model, args) -> Handled:
    if not args.from_mode or not args.to_mode:
        raise _UsageError("modechange requires --from and --to")
    try:
        change = ModeChange(
            _parse_mode(args.from_mode), _parse_mode(args.to_mode)
        )
    except ModelError as exc:
        raise _UsageError(str(exc))
    try:
        unfolded = unfold_mode_change(model, change)
    except (UnknownGuard, ModelError) as exc:
        raise _UsageError(str(exc))
    except NoCompleteMatching as exc:
        payload = {"verdict": "mode-singular", "detail": str(exc)}
        return payload, [f"a mode is structurally singular: {exc}"], None
    window_payload = {
        "equations": [
            {
                "name": eq.name,
                "instant": unfolded.origins[eq.name].instant,
                "source": unfolded.origins[eq.name].source,
                "consistency": unfolded.origins[eq.name].consistency,
                "variables": [inc.variable for inc in eq.incidences],
            }
            for eq in unfolded.model.equations
        ],
        "prev_leading": list(unfolded.prev_leading),
        "cur_leading": list(unfolded.cur_leading),
        "given": list(unfolded.given),
        "settled": list(unfolded.settled),
    }
    try:
        report = resolve_conflicts(unfolded)
    except CausalityViolation as exc:
        g = WeightedBipartiteGraph.from_model(unfolded.model)
        dm = dm_decompose(g)
        payload = {
            "verdict": "causality-violation",
            "detail": str(exc),
            "window": window_payload,
            "conflict": _block_payload(dm.over),
        }
        lines = [
            "mode change rejected: the conflict cannot be resolved without "
            "undoing the previous instant",
            str(exc),
        ]
        return payload, lines, None
    payload = {
        "verdict": "resolved",
        "window": window_payload,
        "conflict": _block_payload(report.conflict),
        "removed": list(report.removed),
        "restart": _model_payload(report.restart),
        "given": list(report.given),
    }
    lines = [
        f"window: {len(unfolded.model.equations)} equations over "
        f"{len(unfolded.model.variables)} leading instances",
        f"conflict block: {_text_block(report.conflict)}",
        f"removed (entering-mode consistency): "
        f"{', '.join(report.removed) or '-'}",
        "restart system:",
    ]
    for eq in report.restart.equations:
        vars_ = ", ".join(inc.variable for inc in eq.incidences)
        lines.append(f"  {eq.name}: {{{vars_}}}")
    lines.append(
        f"restart unknowns: {', '.join(report.restart.variable_names())}"
    )
    lines.append(f"given by the past: {', '.join(report.given) or '-'}")
    return payload, lines, None


def _cmd_modes(model: Model, args) -> Handled:
    analyses = analyze_all_modes(model)
    entries = []
    lines = []
    for a in analyses:
        entry = {
            "mode": dict(a.mode),
            "active": list(a.active),
            "n_equations": a.n_equations,
            "n_variables": a.n_variables,
            "square": a.square,
            "structurally_nonsingular": a.structurally_nonsingular,
            "index": a.index,
            "offsets": None if a.offsets is None else _offsets_payload(a.offsets),
            "blocks": None
            if a.blocks is None
            else [_block_payload(b) for b in a.blocks],
            "diagnosis": None
            if a.diagnosis is None
            else _dm_payload(a.diagnosis),
        }
        entries.append(entry)
        mode_text = (
            ", ".join(
                f"{g}={'true' if v else 'false'}" for g, v in a.mode.items()
            )
            or "(no guards)"
        )
        status = (
            f"index {a.index}"
            if a.structurally_nonsingular
            else "nonsquare" if not a.square else "singular"
        )
        lines.append(
            f"mode [{mode_text}]: {a.n_equations} eqs / {a.n_variables} vars, "
            f"{status}"
        )
    return {"modes": entries}, lines, None


_HANDLERS = {
    "parse": _cmd_parse,
    "dm": _cmd_dm,
    "btf": _cmd_btf,
    "offsets": _cmd_offsets,
    "pantelides": _cmd_pantelides,
    "existq": _cmd_existq,
    "array": _cmd_array,
    "modechange": _cmd_modechange,
    "modes": _cmd_modes,
}


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(
        prog="daesa",
        description="structural analysis of (multimode) DAE and dAE systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _HANDLERS:
        p = sub.add_parser(name)
        p.add_argument("file", help="model source (.dae)")
        p.add_argument(
            "--format",
            choices=("text", "json", "dot"),
            default="text",
        )
        if name in ("dm", "btf", "offsets", "pantelides", "existq", "array"):
            p.add_argument(
                "--mode",
                default=None,
                help="guard assignment, e.g. g=true,h=false",
            )
        if name == "offsets":
            p.add_argument("--nonsquare", action="store_true")
        if name == "existq":
            p.add_argument("--roles", default=None, help="x=...;w=...;y=...")
        if name in ("existq", "array"):
            p.add_argument(
                "--predecessors",
                choices=(IMMEDIATE, TRANSITIVE),
                default=IMMEDIATE,
            )
        if name == "array":
            p.add_argument("--k", type=int, default=None)
        if name == "modechange":
            p.add_argument("--from", dest="from_mode", default=None)
            p.add_argument("--to", dest="to_mode", default=None)
    return parser


_DOT_COMMANDS = {"parse", "dm", "btf", "offsets"}


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.format == "dot" and args.command not in _DOT_COMMANDS:
        raise _UsageError(
            f"--format dot is not available for {args.command!r}"
        )
    path = Path(args.file)
    try:
        text = path.read_text()
    except OSError as exc:
        raise _UsageError(f"cannot read {args.file!r}: {exc}")
    source = parse_source(text)
    for diag in source.diagnostics:
        print(f"{path.name}:{diag}", file=sys.stderr)
    if source.model is None:
        return 1
    payload, lines, dot = _HANDLERS[args.command](source.model, args)
    if args.format == "dot":
        if dot is None:
            raise _UsageError(
                f"no graph output for this {args.command!r} result"
            )
        sys.stdout.write(dot)
        return 0
    if args.format == "json":
        report = {
            "schema": 1,
            "tool": "daesa",
            "version": __version__,
            "command": args.command,
            "input": {
                "file": path.name,
                "sha256": hashlib.sha256(text.encode()).hexdigest(),
            },
            "result": payload,
        }
        sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
        return 0
    for line in lines:
        print(line)
    return 0


def main(argv: list[str] | None = None) -> int:
    try:
        return run(argv)
    except _UsageError as exc:
        print(f"daesa: {exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"daesa: {exc}", file=sys.stderr)
        return 1
    except (NonConvergence, AssertionError) as exc:
        print(f"daesa: internal error: {exc}", file=sys.stderr)
        return 2
    except StructuralAnalysisError as exc:
        print(f"daesa: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

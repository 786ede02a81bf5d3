"""Parser: corpus shapes, error reporting, and pretty round-trips."""

import pytest
from hypothesis import given, strategies as st

from daesa import (
    CONTINUOUS,
    DISCRETE,
    GUARD_INPUT,
    SIGNAL,
    Equation,
    GuardCondition,
    MixedTimeDomain,
    Model,
    ParseError,
    UndeclaredVariable,
    Variable,
    parse,
    parse_source,
    pretty,
    restrict_to_mode,
)


def test_clutch_shape(clutch):
    assert clutch.name == "clutch"
    assert clutch.time_domain == CONTINUOUS
    assert clutch.variable_names() == ("w1", "w2", "t1", "t2")
    assert clutch.guards == ("g",)
    assert clutch.equation_names() == ("e1", "e2", "e3", "e4", "e5", "e6")
    assert clutch.equation("e1").degree_of("w1") == 1
    assert clutch.equation("e3").guard == GuardCondition((("g", True),))
    assert clutch.equation("e5").guard == GuardCondition((("g", False),))
    assert clutch.equation("e1").guard is None


def test_pendulum_shape(pendulum):
    assert pendulum.guards == ()
    assert pendulum.equation("p1").degree_of("x") == 2
    assert pendulum.equation("p3").degree_of("x") == 0
    assert pendulum.equation("p1").degree_of("lam") == 0


def test_rldc2_prev_becomes_guard_input(rldc2):
    kinds = {v.name: v.kind for v in rldc2.variables}
    assert kinds["s1_prev"] == GUARD_INPUT
    assert kinds["s2_prev"] == GUARD_INPUT
    assert kinds["s1"] == SIGNAL
    assert rldc2.equation("g1d").variables() == ("s1_prev",)
    assert rldc2.guards == ("g1", "g2")
    assert len(rldc2.equations) == 20
    one_mode = restrict_to_mode(rldc2, {"g1": True, "g2": True})
    assert len(one_mode.equations) == 16


def test_der_count_defaults_to_one():
    m = parse("continuous m;\nvar x;\ne: der(x) = der(x, 3);\n")
    assert m.equation("e").degree_of("x") == 3


def test_degree_is_max_over_occurrences():
    m = parse("continuous m;\nvar x;\ne: der(x, 2) + x = der(x);\n")
    assert m.equation("e").degree_of("x") == 2


def test_opaque_calls_scan_arguments():
    m = parse("continuous m;\nvar x, y;\ne: f(x, g(der(y))) = 0;\n")
    assert m.equation("e").degree_of("x") == 0
    assert m.equation("e").degree_of("y") == 1


def test_declarations_are_hoisted():
    m = parse("continuous m;\ne: x = 0;\nvar x;\n")
    assert m.equation("e").variables() == ("x",)


def test_unlabeled_equations_get_fresh_names():
    m = parse("discrete m;\nvar x;\nx = 0;\neq1: x = 1;\nx = 2;\n")
    names = m.equation_names()
    assert len(set(names)) == 3
    assert "eq1" in names


def test_shift_in_discrete_models():
    m = parse("discrete m;\nvar x;\ne: shift(x, 2) = x;\n")
    assert m.equation("e").degree_of("x") == 2


@pytest.mark.parametrize(
    "source,error",
    [
        ("var x;\n", ParseError),
        ("discrete m;\nvar x;\ne: der(x) = 0;\n", MixedTimeDomain),
        ("continuous m;\nvar x;\ne: shift(x) = 0;\n", MixedTimeDomain),
        ("continuous m;\ne: ghost = 0;\n", UndeclaredVariable),
        ("continuous m;\nvar x;\ne: g = x;\nguard g;\n", UndeclaredVariable),
        ("continuous m;\nvar x, x;\n", ParseError),
        ("continuous m;\nvar x;\nguard x;\n", ParseError),
        ("continuous m;\nvar x;\ne: x = 0;\ne: x = 1;\n", ParseError),
        ("continuous m;\nvar x;\nwhen g then\ne: x = 0;\nend\n", UndeclaredVariable),
        (
            "continuous m;\nvar x;\nguard g;\nwhen g and g then\ne: x = 0;\nend\n",
            ParseError,
        ),
        ("continuous m;\nvar x;\nguard g;\nwhen g then\nend\n", ParseError),
        ("continuous m;\nvar x;\nguard g;\nwhen g then\ne: x = 0;\n", ParseError),
        ("continuous m;\nvar x;\ne: (x = 0;\n", ParseError),
        ("continuous m;\nvar x;\ne: x + 1;\n", ParseError),
        ("continuous m;\nvar x;\ne: ;\n", ParseError),
        ("continuous m;\nvar x;\ne: der(x, 1.5) = 0;\n", ParseError),
        ("continuous m;\nvar x;\ne: prev(ghost) = 0;\n", UndeclaredVariable),
        ("continuous m;\nvar der;\n", ParseError),
        ("continuous m;\nvar x;\ne: x ? 0 = 0;\n", ParseError),
    ],
)
def test_parse_errors(source, error):
    with pytest.raises(error):
        parse(source)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as info:
        parse("continuous m;\nvar x;\ne: ghost = 0;\n")
    assert info.value.line == 3
    assert info.value.column == 4


def test_parse_source_collects_error_diagnostic():
    result = parse_source("continuous m;\nvar x;\ne: ghost = 0;\n")
    assert result.model is None
    assert len(result.diagnostics) == 1
    diag = result.diagnostics[0]
    assert diag.severity == "error"
    assert (diag.line, diag.column) == (3, 4)
    assert "ghost" in diag.message
    assert "3:4" in str(diag)


def test_parse_source_warns_on_variable_free_equation():
    result = parse_source("continuous m;\nvar x;\nc: 1 = 1;\ne: x = 0;\n")
    assert result.model is not None
    assert [d.severity for d in result.diagnostics] == ["warning"]
    assert result.model.equation("c").incidences == ()


def test_prev_introduces_one_shared_variable():
    m = parse(
        "continuous m;\nvar x, s;\n"
        "e1: der(x) = prev(s);\ne2: x = prev(s) + s;\n"
    )
    kinds = {v.name: v.kind for v in m.variables}
    assert kinds == {
        "x": SIGNAL,
        "s": SIGNAL,
        "s_prev": GUARD_INPUT,
    }
    assert m.equation("e1").degree_of("s_prev") == 0


def test_corpus_pretty_round_trip(clutch, pendulum, rldc2):
    for model in (clutch, pendulum, rldc2):
        again = parse(pretty(model))
        assert _structure(again) == _structure(model)


def _structure(model: Model):
    return (
        model.time_domain,
        frozenset((v.name, v.kind) for v in model.variables),
        frozenset(model.guards),
        tuple(
            (eq.name, eq.incidences, eq.guard) for eq in model.equations
        ),
    )


@st.composite
def models(draw):
    time_domain = draw(st.sampled_from([CONTINUOUS, DISCRETE]))
    n_vars = draw(st.integers(1, 4))
    names = [f"v{i}" for i in range(n_vars)]
    prev_bases = draw(
        st.lists(st.sampled_from(names), unique=True, max_size=2)
    )
    guards = [f"g{i}" for i in range(draw(st.integers(0, 2)))]
    n_eqs = draw(st.integers(1, 5))
    equations = []
    for e in range(n_eqs):
        degrees = draw(
            st.dictionaries(
                st.sampled_from(names), st.integers(0, 3), max_size=3
            )
        )
        guard = None
        if guards and draw(st.booleans()):
            chosen = draw(
                st.lists(
                    st.sampled_from(guards), unique=True, min_size=1
                )
            )
            guard = GuardCondition(
                tuple((g, draw(st.booleans())) for g in chosen)
            )
        equations.append((f"e{e}", degrees, guard))
    # Previous-value variables must occur somewhere, at degree 0, or the
    # printed form would not mention them.
    for i, base in enumerate(prev_bases):
        name, degrees, guard = equations[i % len(equations)]
        degrees = dict(degrees)
        degrees[f"{base}_prev"] = 0
        equations[i % len(equations)] = (name, degrees, guard)
    variables = tuple(
        Variable(n, SIGNAL, i) for i, n in enumerate(names)
    ) + tuple(
        Variable(f"{b}_prev", GUARD_INPUT, n_vars + i)
        for i, b in enumerate(prev_bases)
    )
    return Model(
        name="m",
        time_domain=time_domain,
        variables=variables,
        equations=tuple(
            Equation.of(name, degrees, guard)
            for name, degrees, guard in equations
        ),
        guards=tuple(guards),
    )


@given(models())
def test_pretty_round_trip(model):
    again = parse(pretty(model))
    assert _structure(again) == _structure(model)

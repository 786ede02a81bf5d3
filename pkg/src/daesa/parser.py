"""Parser for the small equation-system description language.

The concrete syntax is line-oriented free form with ``#`` comments::

    continuous clutch;
    var w1, w2, t1, t2;
    guard g;
    e1: der(w1) = f1(w1, t1);
    when g then
      e3: w1 - w2 = 0;
      e4: t1 + t2 = 0;
    end
    when not g then
      e5: t1 = 0;
      e6: t2 = 0;
    end

Only incidence structure is extracted from expressions.  ``der(x, k)`` marks
a k-th derivative occurrence (continuous models), ``shift(x, k)`` a k-step
shift (discrete models) and ``prev(x)`` a previous-value occurrence, which
introduces a distinct degree-0 variable named ``x_prev``.  Any other call,
``f1(w1, t1)`` say, is an opaque function whose arguments are scanned for
occurrences at degree 0.

Declarations may appear anywhere; they are hoisted before equations are
resolved, so equations may reference variables declared later in the file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import MixedTimeDomain, ParseError, UndeclaredVariable
from .model import (
    CONTINUOUS,
    DISCRETE,
    GUARD_INPUT,
    SIGNAL,
    Equation,
    GuardCondition,
    Incidence,
    Model,
    Variable,
    enumerate_modes,
)

__all__ = [
    "parse",
    "parse_source",
    "pretty",
    "enumerate_modes",
    "Diagnostic",
    "SourceModel",
]

KEYWORDS = {
    "continuous",
    "discrete",
    "var",
    "guard",
    "when",
    "then",
    "end",
    "not",
    "and",
}

BUILTIN_CALLS = ("der", "shift", "prev")

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>\d+(\.\d+)?([eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[;,:()=+\-*/])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "number" | "ident" | "punct" | "eof"
    text: str
    line: int
    column: int
    offset: int


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.line}:{self.column}: {self.message}"


@dataclass
class SourceModel:
    """Raw text together with the parsed model and collected diagnostics."""

    text: str
    model: Model | None
    diagnostics: list[Diagnostic] = field(default_factory=list)


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {text[pos]!r}",
                line,
                pos - line_start + 1,
            )
        kind = m.lastgroup or ""
        lexeme = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, lexeme, line, pos - line_start + 1, pos))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            line_start = pos + lexeme.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, len(text) - line_start + 1, len(text)))
    return tokens


class _TokenStream:
    def __init__(self, tokens: list[Token]):
        self._tokens = tokens
        self._index = 0

    @property
    def current(self) -> Token:
        return self._tokens[self._index]

    def advance(self) -> Token:
        token = self.current
        if token.kind != "eof":
            self._index += 1
        return token

    def check(self, text: str) -> bool:
        return self.current.text == text and self.current.kind != "eof"

    def check_ident(self) -> bool:
        return self.current.kind == "ident"

    def accept(self, text: str) -> bool:
        if self.check(text):
            self.advance()
            return True
        return False

    def expect(self, text: str, what: str | None = None) -> Token:
        if not self.check(text):
            found = self.current.text or "end of input"
            raise _error(
                self.current,
                f"expected {what or text!r}, found {found!r}",
            )
        return self.advance()

    def expect_ident(self, what: str) -> Token:
        token = self.current
        if token.kind != "ident" or token.text in KEYWORDS:
            found = token.text or "end of input"
            raise _error(token, f"expected {what}, found {found!r}")
        return self.advance()

    def peek_is_label(self) -> bool:
        cur = self.current
        nxt = self._tokens[min(self._index + 1, len(self._tokens) - 1)]
        return cur.kind == "ident" and cur.text not in KEYWORDS and nxt.text == ":"


def _error(token: Token, message: str, cls: type = ParseError) -> ParseError:
    return cls(message, token.line, token.column)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.ts = _TokenStream(_tokenize(text))
        self.time_domain = CONTINUOUS
        self.model_name = ""
        self.declared: dict[str, Token] = {}
        self.guards: dict[str, Token] = {}
        self.diagnostics: list[Diagnostic] = []
        # Raw equation bodies, resolved after all declarations are known.
        self.pending: list[tuple[Token | None, GuardCondition | None, int, int]] = []
        self.auto_prev: list[str] = []

    # -- first pass: structure ------------------------------------------------

    def run(self) -> Model:
        self._header()
        while self.ts.current.kind != "eof":
            if self.ts.check("var"):
                self._var_decl()
            elif self.ts.check("guard"):
                self._guard_decl()
            elif self.ts.check("when"):
                self._when_block()
            else:
                self._scan_equation(None)
        return self._resolve()

    def _header(self) -> None:
        token = self.ts.current
        if token.text == CONTINUOUS:
            self.time_domain = CONTINUOUS
        elif token.text == DISCRETE:
            self.time_domain = DISCRETE
        else:
            raise _error(token, "model must start with 'continuous' or 'discrete'")
        self.ts.advance()
        self.model_name = self.ts.expect_ident("model name").text
        self.ts.expect(";")

    def _var_decl(self) -> None:
        self.ts.expect("var")
        while True:
            token = self.ts.expect_ident("variable name")
            self._declare(token, self.declared, "variable")
            if not self.ts.accept(","):
                break
        self.ts.expect(";")

    def _guard_decl(self) -> None:
        self.ts.expect("guard")
        while True:
            token = self.ts.expect_ident("guard name")
            self._declare(token, self.guards, "guard")
            if not self.ts.accept(","):
                break
        self.ts.expect(";")

    def _declare(self, token: Token, table: dict[str, Token], what: str) -> None:
        if token.text in BUILTIN_CALLS:
            raise _error(token, f"{token.text!r} is a reserved name")
        if token.text in self.declared or token.text in self.guards:
            raise _error(token, f"{token.text!r} already declared")
        table[token.text] = token

    def _when_block(self) -> None:
        self.ts.expect("when")
        literals: list[tuple[Token, bool]] = []
        while True:
            polarity = not self.ts.accept("not")
            token = self.ts.expect_ident("guard name")
            literals.append((token, polarity))
            if not self.ts.accept("and"):
                break
        seen: set[str] = set()
        for token, _ in literals:
            if token.text not in self.guards:
                raise _error(
                    token,
                    f"guard {token.text!r} is not declared",
                    UndeclaredVariable,
                )
            if token.text in seen:
                raise _error(token, "guard repeated in when condition")
            seen.add(token.text)
        condition = GuardCondition(
            tuple((token.text, polarity) for token, polarity in literals)
        )
        self.ts.expect("then")
        count = 0
        while not self.ts.check("end"):
            if self.ts.current.kind == "eof":
                raise _error(self.ts.current, "unterminated when block")
            self._scan_equation(condition)
            count += 1
        if count == 0:
            raise _error(self.ts.current, "empty when block")
        self.ts.expect("end")

    def _scan_equation(self, guard: GuardCondition | None) -> None:
        """Record an equation's token span; bodies are resolved later."""
        label: Token | None = None
        if self.ts.peek_is_label():
            label = self.ts.advance()
            self.ts.expect(":")
        start = self.ts._index
        depth = 0
        while True:
            token = self.ts.current
            if token.kind == "eof":
                raise _error(token, "unterminated equation, expected ';'")
            if token.text == "(":
                depth += 1
            elif token.text == ")":
                depth -= 1
                if depth < 0:
                    raise _error(token, "unbalanced ')'")
            elif token.text == ";" and depth == 0:
                break
            self.ts.advance()
        end = self.ts._index
        self.ts.expect(";")
        if start == end:
            raise _error(self.ts.current, "empty equation")
        self.pending.append((label, guard, start, end))

    # -- second pass: equation bodies -----------------------------------------

    def _resolve(self) -> Model:
        equations: list[Equation] = []
        used_names: set[str] = set()
        for label, guard, start, end in self.pending:
            if label is not None:
                name = label.text
                if name in used_names:
                    raise _error(label, f"equation name {name!r} already used")
            else:
                ordinal = len(equations) + 1
                name = f"eq{ordinal}"
                while name in used_names or any(
                    lbl is not None and lbl.text == name
                    for lbl, _, _, _ in self.pending
                ):
                    ordinal += 1
                    name = f"eq{ordinal}"
            used_names.add(name)
            eof = self.ts._tokens[-1]
            body = _TokenStream(self.ts._tokens[start : end + 1] + [eof])
            degrees: dict[str, int] = {}
            span_start = self.ts._tokens[start].offset
            self._equation_body(body, degrees)
            span_end = self.ts._tokens[end].offset
            if not degrees:
                self.diagnostics.append(
                    Diagnostic(
                        "warning",
                        self.ts._tokens[start].line,
                        self.ts._tokens[start].column,
                        f"equation {name!r} involves no variables",
                    )
                )
            equations.append(
                Equation(
                    name=name,
                    incidences=tuple(Incidence(v, d) for v, d in degrees.items()),
                    guard=guard,
                    source_span=(span_start, span_end),
                )
            )
        variables = tuple(
            Variable(
                name,
                GUARD_INPUT if name in self.auto_prev else SIGNAL,
                i,
            )
            for i, name in enumerate(list(self.declared) + self.auto_prev)
        )
        return Model(
            name=self.model_name,
            time_domain=self.time_domain,
            variables=variables,
            equations=tuple(equations),
            guards=tuple(self.guards),
        )

    def _equation_body(self, body: _TokenStream, degrees: dict[str, int]) -> None:
        self._expr(body, degrees)
        if not body.accept("="):
            raise _error(body.current, "expected '=' in equation")
        self._expr(body, degrees)
        if body.current.text != ";":
            raise _error(body.current, f"unexpected {body.current.text!r}")

    def _expr(self, body: _TokenStream, degrees: dict[str, int]) -> None:
        self._term(body, degrees)
        while body.current.text in ("+", "-"):
            body.advance()
            self._term(body, degrees)

    def _term(self, body: _TokenStream, degrees: dict[str, int]) -> None:
        self._factor(body, degrees)
        while body.current.text in ("*", "/"):
            body.advance()
            self._factor(body, degrees)

    def _factor(self, body: _TokenStream, degrees: dict[str, int]) -> None:
        token = body.current
        if token.text == "-":
            body.advance()
            self._factor(body, degrees)
            return
        if token.text == "(":
            body.advance()
            self._expr(body, degrees)
            body.expect(")")
            return
        if token.kind == "number":
            body.advance()
            return
        if token.kind == "ident":
            name = token.text
            body.advance()
            if body.check("("):
                self._call(name, token, body, degrees)
            else:
                self._occurrence(token, 0, degrees)
            return
        found = token.text or "end of input"
        raise _error(token, f"expected expression, found {found!r}")

    def _call(
        self,
        name: str,
        name_token: Token,
        body: _TokenStream,
        degrees: dict[str, int],
    ) -> None:
        body.expect("(")
        if name in ("der", "shift"):
            if name == "der" and self.time_domain != CONTINUOUS:
                raise _error(
                    name_token, "der() only applies to continuous models",
                    MixedTimeDomain,
                )
            if name == "shift" and self.time_domain != DISCRETE:
                raise _error(
                    name_token, "shift() only applies to discrete models",
                    MixedTimeDomain,
                )
            arg = body.expect_ident(f"variable inside {name}()")
            k = 1
            if body.accept(","):
                num = body.current
                if num.kind != "number" or not num.text.isdigit():
                    raise _error(num, f"{name}() count must be an integer")
                body.advance()
                k = int(num.text)
            body.expect(")")
            self._occurrence(arg, k, degrees)
            return
        if name == "prev":
            arg = body.expect_ident("variable inside prev()")
            body.expect(")")
            if arg.text not in self.declared:
                raise _error(
                    arg,
                    f"variable {arg.text!r} is not declared",
                    UndeclaredVariable,
                )
            prev_name = arg.text + "_prev"
            if prev_name not in self.declared and prev_name not in self.auto_prev:
                self.auto_prev.append(prev_name)
            degrees[prev_name] = max(degrees.get(prev_name, 0), 0)
            return
        # Opaque function call: scan arguments for occurrences at degree 0.
        if body.check(")"):
            body.advance()
            return
        while True:
            self._expr(body, degrees)
            if not body.accept(","):
                break
        body.expect(")")

    def _occurrence(
        self, token: Token, degree: int, degrees: dict[str, int]
    ) -> None:
        name = token.text
        if name in self.guards:
            raise _error(
                token,
                f"guard {name!r} cannot occur in an equation",
                UndeclaredVariable,
            )
        if name not in self.declared:
            raise _error(
                token,
                f"variable {name!r} is not declared",
                UndeclaredVariable,
            )
        degrees[name] = max(degrees.get(name, 0), degree)


def parse_source(text: str) -> SourceModel:
    """Parse text into a SourceModel, collecting diagnostics.

    Errors are reported as a single error diagnostic with model = None;
    warnings (for instance an equation without any variable occurrence) are
    attached to a successful parse.
    """
    parser = None
    try:
        parser = _Parser(text)
        model = parser.run()
    except ParseError as exc:
        collected = list(parser.diagnostics) if parser is not None else []
        return SourceModel(
            text,
            None,
            collected + [Diagnostic("error", exc.line, exc.column, exc.message)],
        )
    return SourceModel(text, model, parser.diagnostics)


def parse(text: str) -> Model:
    """Parse text into a Model, raising ParseError on the first error."""
    parser = _Parser(text)
    return parser.run()


# -- pretty printing ----------------------------------------------------------


def _render_incidence(inc: Incidence, time_domain: str, prev_vars: set[str]) -> str:
    if inc.variable in prev_vars:
        assert inc.degree == 0
        return f"prev({inc.variable[: -len('_prev')]})"
    if inc.degree == 0:
        return inc.variable
    op = "der" if time_domain == CONTINUOUS else "shift"
    return f"{op}({inc.variable}, {inc.degree})"


def _render_guard(guard: GuardCondition) -> str:
    parts = [
        name if polarity else f"not {name}" for name, polarity in guard.literals
    ]
    return " and ".join(parts)


def pretty(model: Model) -> str:
    """Render a model back to source text.

    Printing is canonical: declarations first, then equations in order, each
    guarded equation in its own when block.  Reparsing the result yields a
    structurally equal model.
    """
    prev_vars = {v.name for v in model.variables if v.kind == GUARD_INPUT}
    lines = [f"{model.time_domain} {model.name};"]
    signal = [v.name for v in model.variables if v.kind == SIGNAL]
    if signal:
        lines.append(f"var {', '.join(signal)};")
    if model.guards:
        lines.append(f"guard {', '.join(model.guards)};")
    for eq in model.equations:
        terms = [
            _render_incidence(inc, model.time_domain, prev_vars)
            for inc in eq.incidences
        ]
        body = " + ".join(terms) if terms else "0"
        stmt = f"{eq.name}: {body} = 0;"
        if eq.guard is None:
            lines.append(stmt)
        else:
            lines.append(f"when {_render_guard(eq.guard)} then")
            lines.append(f"  {stmt}")
            lines.append("end")
    return "\n".join(lines) + "\n"

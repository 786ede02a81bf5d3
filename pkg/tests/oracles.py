"""Independent reference implementations used to check the package.

Everything here is deliberately written from scratch with different
algorithms than the package (exhaustive enumeration, bitmask reachability)
so that agreement between the two is meaningful evidence.

Graphs are given positionally: rows[i] is the bitmask of variable indices
incident to equation i, weights[(i, j)] the degree of variable j in
equation i.
"""

from __future__ import annotations

import itertools

FULL_CAP = 4


def bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def kuhn_max_matching(rows: list[int], n_var: int) -> dict[int, int]:
    """Maximum matching by repeated augmenting DFS; returns eq -> var."""
    match_var: dict[int, int] = {}

    def try_eq(i: int, seen: set[int]) -> bool:
        for j in bits(rows[i]):
            if j in seen:
                continue
            seen.add(j)
            if j not in match_var or try_eq(match_var[j], seen):
                match_var[j] = i
                return True
        return False

    for i in range(len(rows)):
        try_eq(i, set())
    return {i: j for j, i in match_var.items()}


def enumerate_maximum_matchings(rows: list[int], n_var: int):
    """Yield every maximum matching as a frozenset of (eq, var) pairs."""
    best = len(kuhn_max_matching(rows, n_var))
    n_eq = len(rows)
    out: list[frozenset[tuple[int, int]]] = []

    def rec(i: int, used: int, pairs: tuple[tuple[int, int], ...]):
        remaining = n_eq - i
        if len(pairs) + remaining < best:
            return
        if i == n_eq:
            if len(pairs) == best:
                out.append(frozenset(pairs))
            return
        rec(i + 1, used, pairs)
        for j in bits(rows[i] & ~used):
            rec(i + 1, used | (1 << j), pairs + ((i, j),))

    rec(0, 0, ())
    return out


def enumerate_complete_matchings(rows: list[int], n: int):
    """All perfect matchings of a square graph as frozensets of pairs."""
    out = []

    def rec(i: int, used: int, pairs: tuple[tuple[int, int], ...]):
        if i == n:
            out.append(frozenset(pairs))
            return
        for j in bits(rows[i] & ~used):
            rec(i + 1, used | (1 << j), pairs + ((i, j),))

    rec(0, 0, ())
    return out


def coarse_parts(
    rows: list[int], n_var: int, matching: frozenset[tuple[int, int]]
) -> tuple[frozenset[int], frozenset[int], frozenset[int], frozenset[int]]:
    """(over eqs, over vars, under eqs, under vars) via alternating reach.

    Overdetermined: reachable from unmatched equations, leaving equations
    through any edge and variables through their matching edge only.
    Underdetermined: the mirror image from unmatched variables.
    """
    n_eq = len(rows)
    eq_of = {j: i for i, j in matching}
    var_of = {i: j for i, j in matching}
    cols = [0] * n_var
    for i in range(n_eq):
        for j in bits(rows[i]):
            cols[j] |= 1 << i

    over_eq = {i for i in range(n_eq) if i not in var_of}
    over_var: set[int] = set()
    frontier = list(over_eq)
    while frontier:
        i = frontier.pop()
        for j in bits(rows[i]):
            if j in over_var:
                continue
            over_var.add(j)
            nxt = eq_of.get(j)
            if nxt is not None and nxt not in over_eq:
                over_eq.add(nxt)
                frontier.append(nxt)

    under_var = {j for j in range(n_var) if j not in eq_of}
    under_eq: set[int] = set()
    frontier = list(under_var)
    while frontier:
        j = frontier.pop()
        for i in bits(cols[j]):
            if i in under_eq:
                continue
            under_eq.add(i)
            nxt = var_of.get(i)
            if nxt is not None and nxt not in under_var:
                under_var.add(nxt)
                frontier.append(nxt)

    return (
        frozenset(over_eq),
        frozenset(over_var),
        frozenset(under_eq),
        frozenset(under_var),
    )


def brute_max_weight(rows: list[int], weights: dict[tuple[int, int], int],
                     n: int) -> int | None:
    """Maximum weight over all perfect matchings; None if none exists."""
    matchings = enumerate_complete_matchings(rows, n)
    if not matchings:
        return None
    return max(sum(weights[p] for p in m) for m in matchings)


def minimal_feasible_d(
    weights: dict[tuple[int, int], int], n_var: int, c: tuple[int, ...]
) -> list[int]:
    """Smallest d with d[j] - c[i] >= w[i][j] on every edge (0 if none)."""
    d = [0] * n_var
    for (i, j), w in weights.items():
        d[j] = max(d[j], w + c[i])
    return d


def brute_minimal_duals(
    rows: list[int],
    weights: dict[tuple[int, int], int],
    n: int,
    cap: int = FULL_CAP,
) -> tuple[list[int], list[int]]:
    """Elementwise minima over all optimal integer duals with entries <= cap.

    A dual (c, d) is feasible when d[j] - c[i] >= w[i][j] for every edge
    and optimal when sum(d) - sum(c) equals the primal optimum.  For fixed
    c the smallest feasible d is forced, and any optimal dual with that c
    must use exactly it (larger entries would break the optimal total), so
    scanning the c box suffices.
    """
    target = brute_max_weight(rows, weights, n)
    assert target is not None, "needs a perfect matching"
    cmin = [cap + 1] * n
    dmin = [cap + 1] * n
    found = False
    for c in itertools.product(range(cap + 1), repeat=n):
        d = minimal_feasible_d(weights, n, c)
        if max(d, default=0) > cap:
            continue
        if sum(d) - sum(c) != target:
            continue
        found = True
        for i in range(n):
            cmin[i] = min(cmin[i], c[i])
            dmin[i] = min(dmin[i], d[i])
    assert found, "no optimal dual inside the box"
    return cmin, dmin


def brute_cover_weight(
    rows: list[int], weights: dict[tuple[int, int], int], n_eq: int,
    n_var: int,
) -> int | None:
    """Best total weight over variable-exact, equation-covering subgraphs.

    Every variable picks exactly one incident equation; every equation
    must be picked at least once.  None when no such cover exists.
    """
    cols: list[list[int]] = [[] for _ in range(n_var)]
    for i in range(n_eq):
        for j in bits(rows[i]):
            cols[j].append(i)
    if any(not c for c in cols):
        return None
    best = None
    for pick in itertools.product(*cols):
        if len(set(pick)) < n_eq:
            continue
        total = sum(weights[(i, j)] for j, i in enumerate(pick))
        if best is None or total > best:
            best = total
    return best


def check_dot(text: str) -> None:
    """Minimal well-formedness check for emitted Graphviz text.

    Verifies the digraph wrapper, balanced braces and brackets, closed
    quoted identifiers, and that every edge operator joins two node ids.
    Raises AssertionError with a description otherwise.
    """
    assert text.startswith("digraph"), "must declare a digraph"
    assert text.rstrip().endswith("}"), "must close the top-level block"
    depth = 0
    bracket = 0
    in_quote = False
    prev = ""
    for ch in text:
        if in_quote:
            if ch == '"' and prev != "\\":
                in_quote = False
        elif ch == '"':
            in_quote = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            assert depth >= 0, "unbalanced braces"
        elif ch == "[":
            bracket += 1
        elif ch == "]":
            bracket -= 1
            assert bracket >= 0, "unbalanced brackets"
        prev = ch
    assert depth == 0, "unbalanced braces"
    assert bracket == 0, "unbalanced brackets"
    assert not in_quote, "unterminated quote"
    for line in text.splitlines():
        if "->" in line:
            head, _, tail = line.partition("->")
            assert head.strip(), f"edge without source: {line!r}"
            assert tail.strip(), f"edge without target: {line!r}"

"""Minimal recursive-descent DOT reader.

Covers the subset the renderer emits (digraph, node statements with
attribute lists, edges, nested subgraphs, quoted strings) so tests can
check that the output parses without reaching for an external tool.
"""

from __future__ import annotations


def _tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == '"':
            j = i + 1
            while j < n:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == '"':
                    break
                j += 1
            if j >= n:
                raise ValueError("unterminated quoted string")
            tokens.append(text[i : j + 1])
            i = j + 1
            continue
        if ch in "{}[];,=":
            tokens.append(ch)
            i += 1
            continue
        if text.startswith("->", i):
            tokens.append("->")
            i += 2
            continue
        j = i
        while j < n and (text[j].isalnum() or text[j] in "_."):
            j += 1
        if j == i:
            raise ValueError(f"unexpected character {ch!r}")
        tokens.append(text[i:j])
        i = j
    return tokens


class DotGraph:
    def __init__(self):
        self.nodes: set[str] = set()
        self.edges: list[tuple[str, str]] = []
        self.clusters: list[str] = []


def parse_dot(text: str) -> DotGraph:
    """Parse renderer-style DOT; raises ValueError on anything malformed."""
    tokens = _tokenize(text)
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def advance() -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of input")
        pos += 1
        return tokens[pos - 1]

    def expect(token: str) -> None:
        got = advance()
        if got != token:
            raise ValueError(f"expected {token!r}, got {got!r}")

    graph = DotGraph()

    def parse_attrs() -> None:
        expect("[")
        while True:
            if peek() == "]":
                advance()
                return
            advance()  # attr name
            expect("=")
            advance()  # attr value
            if peek() == ",":
                advance()

    def parse_body() -> None:
        expect("{")
        while True:
            tok = peek()
            if tok is None:
                raise ValueError("unterminated block")
            if tok == "}":
                advance()
                return
            if tok == "subgraph":
                advance()
                name = advance()
                graph.clusters.append(name)
                parse_body()
                continue
            first = advance()
            if peek() == "=":  # graph-level attribute
                advance()
                advance()
                if peek() == ";":
                    advance()
                continue
            if peek() == "->":
                advance()
                second = advance()
                graph.edges.append((first.strip('"'), second.strip('"')))
                if peek() == "[":
                    parse_attrs()
            else:
                graph.nodes.add(first.strip('"'))
                if peek() == "[":
                    parse_attrs()
            if peek() == ";":
                advance()

    if advance() != "digraph":
        raise ValueError("expected 'digraph'")
    if peek() != "{":
        advance()  # graph name
    parse_body()
    if peek() is not None:
        raise ValueError(f"trailing tokens: {peek()!r}")
    return graph

"""A tiny recursive-descent parser for the undirected DOT subset we emit.

Accepts exactly:

    graph <id> {
      <id>;
      <id> -- <id> [label="<text>"];
      ...
    }

and returns (graph_name, node_ids, edges) where edges are
(endpoint_a, endpoint_b, label) triples. Raises ValueError on anything
that does not fit, so tests can assert both structure and syntax.
"""

import re

_TOKEN = re.compile(
    r"\s*(?:(?P<id>[A-Za-z_][A-Za-z0-9_]*)"
    r'|(?P<quoted>"(?:[^"\\]|\\.)*")'
    r"|(?P<punct>\{|\}|;|\[|\]|=|--))"
)


def _tokenize(text):
    pos, out = 0, []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"unparseable DOT at offset {pos}: {text[pos:pos+20]!r}")
        if m.group("id"):
            out.append(("id", m.group("id")))
        elif m.group("quoted"):
            raw = m.group("quoted")[1:-1]
            out.append(("id", raw.replace('\\"', '"').replace("\\\\", "\\")))
        else:
            out.append(("punct", m.group("punct")))
        pos = m.end()
    return out


class _Stream:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def expect(self, kind, value=None):
        tok = self.peek()
        if tok is None or tok[0] != kind or (value is not None and tok[1] != value):
            raise ValueError(f"expected {value or kind}, got {tok}")
        self.pos += 1
        return tok[1]


def parse_dot(text):
    """Parse the emitted DOT dialect; returns (name, nodes, edges)."""
    s = _Stream(_tokenize(text))
    s.expect("id", "graph")
    name = s.expect("id")
    s.expect("punct", "{")
    nodes, edges = [], []
    while s.peek() != ("punct", "}"):
        first = s.expect("id")
        tok = s.peek()
        if tok == ("punct", "--"):
            s.expect("punct", "--")
            second = s.expect("id")
            s.expect("punct", "[")
            key = s.expect("id")
            if key != "label":
                raise ValueError(f"unexpected edge attribute {key!r}")
            s.expect("punct", "=")
            label = s.expect("id")
            s.expect("punct", "]")
            s.expect("punct", ";")
            edges.append((first, second, label))
        else:
            s.expect("punct", ";")
            nodes.append(first)
    s.expect("punct", "}")
    if s.peek() is not None:
        raise ValueError("trailing content after closing brace")
    return name, nodes, edges

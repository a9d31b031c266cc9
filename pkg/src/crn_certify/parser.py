"""Text format for reaction networks (``.crn`` files).

Grammar::

    network   := header* statement*
    header    := 'species' ':' ident (',' ident)*  |  'name' ':' text
    statement := complex ARROW complex ':' rate (',' rate)?
    complex   := '0' | term ('+' term)*
    term      := [coeff] ident
    ARROW     := '->' | '<->'

``#`` starts a comment. A reversible arrow takes two rates (forward,
backward) and is expanded into two reactions at parse time.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass

from .model import Complex, MassAction, NetworkError, Reaction, ReactionNetwork, format_complex

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<arrow><->|->)
  | (?P<num>[0-9]+(?:\.[0-9]*)?(?:[eE][+-]?[0-9]+)?|\.[0-9]+(?:[eE][+-]?[0-9]+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[+:,])
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(line: str, lineno: int) -> list[_Tok]:
    toks, pos = [], 0
    while pos < len(line):
        m = _TOKEN.match(line, pos)
        if m is None:
            raise ParseError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    return toks


class _Line:
    def __init__(self, toks: list[_Tok], lineno: int, length: int):
        self.toks, self.i, self.lineno, self.length = toks, 0, lineno, length

    def peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self, what: str) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise ParseError(f"expected {what}, found end of line", self.lineno, self.length + 1)
        self.i += 1
        return tok

    def error(self, tok: _Tok, msg: str) -> ParseError:
        return ParseError(msg, self.lineno, tok.col)


def parse(text: str, strict: bool = False) -> ReactionNetwork:
    """Parse DSL text into a validated network.

    Species are ordered by first appearance unless a ``species:`` header
    fixes the order, in which case undeclared species are an error.
    """
    declared: list[str] | None = None
    name = ""
    species: list[str] = []
    reactions: list[Reaction] = []
    rates: list[float] = []
    seen_statement = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        head = re.match(r"\s*(species|name)\s*:", line)
        if head:
            if seen_statement:
                raise ParseError("header after reaction statements", lineno, 1)
            body = line[head.end():]
            if head.group(1) == "name":
                name = body.strip()
                continue
            if declared is not None:
                raise ParseError("duplicate species header", lineno, 1)
            declared = []
            col = head.end() + 1
            for part in body.split(",") if body.strip() else []:
                ident = part.strip()
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", ident):
                    raise ParseError(f"invalid species name {ident!r}", lineno, col)
                if ident in declared:
                    raise ParseError(f"species {ident} declared twice", lineno, col)
                declared.append(ident)
                col += len(part) + 1
            species = list(declared)
            continue

        seen_statement = True
        ln = _Line(_tokenize(line, lineno), lineno, len(line))

        def species_index(tok: _Tok) -> int:
            if tok.text not in species:
                if declared is not None:
                    raise ln.error(tok, f"unknown species {tok.text} (not in species header)")
                species.append(tok.text)
            return species.index(tok.text)

        def parse_complex() -> Complex:
            tok = ln.peek()
            if tok is not None and tok.kind == "num" and tok.text == "0":
                after = ln.toks[ln.i + 1] if ln.i + 1 < len(ln.toks) else None
                if after is None or after.kind != "ident":
                    ln.i += 1
                    return Complex()
            coeffs: dict[int, int] = {}
            while True:
                tok = ln.next("species term")
                coeff = 1
                if tok.kind == "num":
                    if not tok.text.isdigit():
                        raise ln.error(tok, f"coefficient must be a non-negative integer, got {tok.text}")
                    coeff = int(tok.text)
                    tok = ln.next("species name")
                if tok.kind != "ident":
                    raise ln.error(tok, f"expected species name, got {tok.text!r}")
                idx = species_index(tok)
                coeffs[idx] = coeffs.get(idx, 0) + coeff
                nxt = ln.peek()
                if nxt is None or nxt.text != "+":
                    break
                ln.i += 1
            return Complex.from_mapping(coeffs)

        def parse_rate() -> float:
            tok = ln.next("rate")
            if tok.kind != "num":
                raise ln.error(tok, f"expected numeric rate, got {tok.text!r}")
            val = float(tok.text)
            if not val > 0:
                raise ln.error(tok, f"rate must be positive, got {tok.text}")
            return val

        lhs_tok = ln.peek()
        lhs = parse_complex()
        arrow = ln.next("arrow")
        if arrow.kind != "arrow":
            raise ln.error(arrow, f"expected '->' or '<->', got {arrow.text!r}")
        rhs = parse_complex()
        colon = ln.next("':'")
        if colon.text != ":":
            raise ln.error(colon, f"expected ':', got {colon.text!r}")
        k1 = parse_rate()
        k2 = None
        if ln.peek() is not None and ln.peek().text == ",":
            ln.i += 1
            k2 = parse_rate()
        extra = ln.peek()
        if extra is not None:
            raise ln.error(extra, f"unexpected {extra.text!r}")
        if lhs == rhs:
            raise ln.error(lhs_tok, "reactant equals product")
        if arrow.text == "->":
            if k2 is not None:
                raise ln.error(arrow, "irreversible reaction takes a single rate")
            reactions.append(Reaction(lhs, rhs))
            rates.append(k1)
        else:
            if k2 is None:
                raise ln.error(arrow, "reversible reaction needs forward and backward rates")
            reactions += [Reaction(lhs, rhs), Reaction(rhs, lhs)]
            rates += [k1, k2]

    if declared is None and not seen_statement:
        raise ParseError("empty network: no species header and no reactions", 1, 1)
    try:
        with warnings.catch_warnings(record=True):
            warnings.simplefilter("always")
            return ReactionNetwork.build(species, reactions, [MassAction(k) for k in rates], name=name, strict=strict)
    except NetworkError as exc:
        raise ParseError(str(exc), 1, 1) from exc


def parse_file(path, strict: bool = False) -> ReactionNetwork:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), strict=strict)


def serialize(network: ReactionNetwork) -> str:
    """Canonical text: header first, reactions sorted by (reactant, product)."""
    lines = []
    if network.name:
        lines.append(f"name: {network.name}")
    lines.append("species: " + ", ".join(network.species))
    d = network.d
    order = sorted(
        range(len(network.reactions)),
        key=lambda i: (network.reactions[i].reactant.key(d), network.reactions[i].product.key(d)),
    )
    for i in order:
        r = network.reactions[i]
        lines.append(
            f"{format_complex(r.reactant, network.species)} -> "
            f"{format_complex(r.product, network.species)} : {network.rate(i)!r}"
        )
    return "\n".join(lines) + "\n"

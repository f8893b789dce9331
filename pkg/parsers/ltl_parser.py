"""
Parsers for the two raw LTL transcriptions found in the datasets.

* prefix (Polish) notation, e.g. ``F & R F X``
* fully parenthesized infix, e.g. ``F ( blue_room & F ( yellow_room ) )``

Tokenization is strict whitespace splitting and case-sensitive. Error
positions are 1-based token indices; a missing token at the end of input is
reported at ``len(tokens) + 1``.

Infix precedence: a binary operator takes exactly two operands and a chain of
them must be parenthesized. Negation of a bare atom binds tighter than a
binary operator, so ``! a U b`` reads ``( ! a ) U b``. ``F`` and ``G`` with an
unparenthesized operand may not be followed by a binary operator: ``F a & b``
is rejected, write ``F ( a ) & b`` or ``F ( a & b )``.

Operators and parentheses may nest at most ``MAX_NESTING`` levels deep.
"""
from typing import Iterable, List, Optional, Union

from models.data_models import APSet, HOLE_TOKEN, Lexicon, TargetRepr
from models.errors import ConfigError, MalformedExpression, UnknownToken
from models.ltl import (
    Atom, BINARY_TYPES, Finally, Formula, Globally, Hole, MAX_NESTING, Not, TOKEN_OPERATORS,
)
from parsers.canonical_parser import from_canonical

ApNames = Optional[Union[APSet, Iterable[str]]]

BINARY_TOKENS = {tok for tok, cls in TOKEN_OPERATORS.items() if cls in BINARY_TYPES}
UNARY_TOKENS = {"!": Not, "F": Finally, "G": Globally}
TEMPORAL_TOKENS = {"F", "G"}


def tokenize(text: str) -> List[str]:
    return text.split()


def _name_set(aps: ApNames) -> Optional[set]:
    if aps is None:
        return None
    if isinstance(aps, APSet):
        return set(aps.names())
    return set(aps)


class _TokenStream:
    def __init__(self, text: str, aps: ApNames, allow_holes: bool):
        self.tokens = tokenize(text)
        self.pos = 0
        self.names = _name_set(aps)
        self.allow_holes = allow_holes

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> Optional[str]:
        tok = self.peek()
        if tok is not None:
            self.pos += 1
        return tok

    @property
    def position(self) -> int:
        """1-based index of the next token."""
        return self.pos + 1

    def leaf(self, tok: str, position: int) -> Formula:
        if self.allow_holes:
            m = HOLE_TOKEN.match(tok)
            if m:
                return Hole(int(m.group(1)))
        if tok in ("(", ")"):
            raise MalformedExpression("unexpected parenthesis", position, tok)
        if self.names is not None and tok not in self.names:
            raise UnknownToken(f"unknown token {tok!r}", position, tok)
        return Atom(tok)

    def enter(self, depth: int, position: int, tok: str) -> int:
        if depth > MAX_NESTING:
            raise MalformedExpression(f"formula nested deeper than {MAX_NESTING} levels", position, tok)
        return depth + 1


def parse_prefix(text: str, aps: ApNames = None, allow_holes: bool = False) -> Formula:
    stream = _TokenStream(text, aps, allow_holes)
    formula = _prefix_expr(stream)
    if stream.peek() is not None:
        raise MalformedExpression("unexpected trailing token", stream.position, stream.peek())
    return formula


def _prefix_expr(stream: _TokenStream, depth: int = 1) -> Formula:
    position = stream.position
    tok = stream.take()
    if tok is None:
        raise MalformedExpression("missing operand", position)
    if tok in UNARY_TOKENS:
        return UNARY_TOKENS[tok](_prefix_expr(stream, stream.enter(depth, position, tok)))
    if tok in BINARY_TOKENS:
        inner = stream.enter(depth, position, tok)
        left = _prefix_expr(stream, inner)
        right = _prefix_expr(stream, inner)
        return TOKEN_OPERATORS[tok](left, right)
    return stream.leaf(tok, position)


def parse_infix(text: str, aps: ApNames = None, allow_holes: bool = False) -> Formula:
    stream = _TokenStream(text, aps, allow_holes)
    formula = _infix_expr(stream)
    if stream.peek() is not None:
        raise MalformedExpression("unexpected trailing token", stream.position, stream.peek())
    return formula


def _infix_expr(stream: _TokenStream, depth: int = 1) -> Formula:
    left = _infix_operand(stream, depth)
    tok = stream.peek()
    if tok not in BINARY_TOKENS:
        return left
    stream.take()
    right = _infix_operand(stream, depth)
    if stream.peek() in BINARY_TOKENS:
        # a & b | c has no defined precedence; demand parentheses
        raise MalformedExpression("ambiguous operator chain, parenthesize", stream.position, stream.peek())
    return TOKEN_OPERATORS[tok](left, right)


def _infix_operand(stream: _TokenStream, depth: int) -> Formula:
    position = stream.position
    tok = stream.take()
    if tok is None:
        raise MalformedExpression("missing operand", position)
    if tok == "(":
        inner = _infix_expr(stream, stream.enter(depth, position, tok))
        closing = stream.position
        if stream.take() != ")":
            raise MalformedExpression("expected ')'", closing, stream.tokens[closing - 1] if closing <= len(stream.tokens) else None)
        return inner
    if tok in UNARY_TOKENS:
        bare = tok in TEMPORAL_TOKENS and stream.peek() != "("
        child = _infix_operand(stream, stream.enter(depth, position, tok))
        if bare and stream.peek() in BINARY_TOKENS:
            raise MalformedExpression(f"parenthesize the operand of {tok!r} before a binary operator",
                                      stream.position, stream.peek())
        return UNARY_TOKENS[tok](child)
    if tok in BINARY_TOKENS:
        raise MalformedExpression("binary operator without left operand", position, tok)
    return stream.leaf(tok, position)


def parse_skeleton(text: str, aps: ApNames = None) -> Formula:
    """Prefix notation with ``H1``..``Hk`` hole tokens allowed."""
    return parse_prefix(text, aps, allow_holes=True)


def parse_formula(text: str, notation: str = "prefix", aps: ApNames = None) -> Formula:
    if notation == "prefix":
        return parse_prefix(text, aps)
    if notation == "infix":
        return parse_infix(text, aps)
    raise ValueError(f"unknown notation {notation!r}")


def parse_target(label: str, representation: TargetRepr, aps: ApNames = None, lex: Optional[Lexicon] = None) -> Formula:
    """Inverse of ``render_target``."""
    representation = TargetRepr(representation)
    if representation is TargetRepr.RAW_PREFIX:
        return parse_prefix(label, aps)
    if representation is TargetRepr.RAW_INFIX:
        return parse_infix(label, aps)
    if lex is None:
        raise ConfigError("canonical labels need a lexicon")
    return from_canonical(label, lex)

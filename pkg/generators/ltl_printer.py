"""Printers for the raw prefix and infix transcriptions."""
from typing import List, Optional

from generators.canonical_generator import to_canonical
from models.data_models import Lexicon, TargetRepr
from models.errors import ConfigError
from models.ltl import (
    Atom, Formula, Hole, Not, OPERATOR_TOKENS, children, is_binary, is_leaf,
)

NOTATIONS = ("prefix", "infix")


def _leaf_token(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Hole):
        return f"H{f.index}"
    raise TypeError(f"not a leaf: {f!r}")


def print_prefix(f: Formula) -> str:
    out: List[str] = []
    stack = [f]
    while stack:
        node = stack.pop()
        if is_leaf(node):
            out.append(_leaf_token(node))
            continue
        out.append(OPERATOR_TOKENS[type(node)])
        stack.extend(reversed(children(node)))
    return " ".join(out)


def _operand_parts(f: Formula) -> list:
    return ["(", f, ")"] if is_binary(f) else [f]


def print_infix(f: Formula) -> str:
    """Binary children are wrapped in parentheses; F and G always parenthesize
    their operand; negation of an atom prints bare (``! C``)."""
    out: List[str] = []
    stack: list = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, str):
            out.append(node)
        elif is_leaf(node):
            out.append(_leaf_token(node))
        elif isinstance(node, Not) and is_leaf(node.child):
            out.append(f"{OPERATOR_TOKENS[Not]} {_leaf_token(node.child)}")
        elif is_binary(node):
            parts = _operand_parts(node.left) + [OPERATOR_TOKENS[type(node)]] + _operand_parts(node.right)
            stack.extend(reversed(parts))
        else:
            stack.extend(reversed([OPERATOR_TOKENS[type(node)], "(", node.child, ")"]))
    return " ".join(out)


def print_formula(f: Formula, notation: str = "prefix") -> str:
    if notation == "prefix":
        return print_prefix(f)
    if notation == "infix":
        return print_infix(f)
    raise ValueError(f"unknown notation {notation!r}, expected one of {NOTATIONS}")


def render_target(f: Formula, representation: TargetRepr, lex: Optional[Lexicon] = None) -> str:
    """Training label for ``f``: raw prefix, raw infix or canonical form."""
    representation = TargetRepr(representation)
    if representation is TargetRepr.RAW_PREFIX:
        return print_prefix(f)
    if representation is TargetRepr.RAW_INFIX:
        return print_infix(f)
    if lex is None:
        raise ConfigError("canonical labels need a lexicon")
    return to_canonical(f, lex)

"""
LTL formula abstract syntax tree.

Grammar (negation accepted on any subformula, see DESIGN.md):

    phi ::= p | !phi | phi & phi | phi | phi | G phi | F phi | phi U phi

``Hole`` nodes only appear inside structure skeletons (formula templates whose
atom positions are numbered slots). All nodes are frozen dataclasses, so
formulas are hashable and safe to share across threads.
"""
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Tuple, Type


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Hole(Formula):
    index: int


@dataclass(frozen=True)
class Not(Formula):
    child: Formula


@dataclass(frozen=True)
class Globally(Formula):
    child: Formula


@dataclass(frozen=True)
class Finally(Formula):
    child: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


UNARY_TYPES: Tuple[Type[Formula], ...] = (Not, Globally, Finally)
BINARY_TYPES: Tuple[Type[Formula], ...] = (And, Or, Until)

# Operator token used by both raw transcriptions (prefix and infix).
OPERATOR_TOKENS: Dict[Type[Formula], str] = {
    Not: "!",
    Globally: "G",
    Finally: "F",
    And: "&",
    Or: "|",
    Until: "U",
}
TOKEN_OPERATORS: Dict[str, Type[Formula]] = {tok: cls for cls, tok in OPERATOR_TOKENS.items()}

# Node-kind names, used as Lexicon operator_phrases keys.
NODE_KINDS: Dict[Type[Formula], str] = {
    Not: "Not",
    Globally: "Globally",
    Finally: "Finally",
    And: "And",
    Or: "Or",
    Until: "Until",
}
KIND_TYPES: Dict[str, Type[Formula]] = {kind: cls for cls, kind in NODE_KINDS.items()}

RESERVED_TOKENS = frozenset(list(TOKEN_OPERATORS) + ["(", ")"])

# Parsers reject deeper input; the tree helpers below recurse per level.
MAX_NESTING = 128


def is_unary(f: Formula) -> bool:
    return isinstance(f, UNARY_TYPES)


def is_binary(f: Formula) -> bool:
    return isinstance(f, BINARY_TYPES)


def is_leaf(f: Formula) -> bool:
    return isinstance(f, (Atom, Hole))


def children(f: Formula) -> Tuple[Formula, ...]:
    if is_unary(f):
        return (f.child,)
    if is_binary(f):
        return (f.left, f.right)
    return ()


def rebuild(f: Formula, new_children: Tuple[Formula, ...]) -> Formula:
    """Same node kind as ``f`` with the given children."""
    cls = type(f)
    if is_unary(f):
        return cls(new_children[0])
    if is_binary(f):
        return cls(new_children[0], new_children[1])
    return f


def depth(f: Formula) -> int:
    kids = children(f)
    if not kids:
        return 1
    return 1 + max(depth(k) for k in kids)


def size(f: Formula) -> int:
    return 1 + sum(size(k) for k in children(f))


def binary_count(f: Formula) -> int:
    return (1 if is_binary(f) else 0) + sum(binary_count(k) for k in children(f))


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal."""
    yield f
    for k in children(f):
        yield from walk(k)


def atoms(f: Formula) -> List[str]:
    """AP names in order of first appearance (pre-order)."""
    seen: List[str] = []
    for node in walk(f):
        if isinstance(node, Atom) and node.name not in seen:
            seen.append(node.name)
    return seen


def holes(f: Formula) -> List[int]:
    seen: List[int] = []
    for node in walk(f):
        if isinstance(node, Hole) and node.index not in seen:
            seen.append(node.index)
    return seen


def map_leaves(f: Formula, fn: Callable[[Formula], Formula]) -> Formula:
    if is_leaf(f):
        return fn(f)
    return rebuild(f, tuple(map_leaves(k, fn) for k in children(f)))


def structural_equal(a: Formula, b: Formula) -> bool:
    """Node-for-node identity. No commutativity or associativity rewriting."""
    return a == b


def abstract_structure(f: Formula) -> Formula:
    """Replace atoms by holes numbered in order of first appearance."""
    order = {name: i + 1 for i, name in enumerate(atoms(f))}
    return map_leaves(f, lambda leaf: Hole(order[leaf.name]) if isinstance(leaf, Atom) else leaf)

"""
Formula and trace generators for the property suites: seeded random ASTs and
exhaustive enumeration of small formulas and traces.
"""
import itertools
import random
from typing import FrozenSet, List, Sequence, Tuple

from models.ltl import Atom, BINARY_TYPES, Formula, UNARY_TYPES


def random_formula(rng: random.Random, aps: Sequence[str], max_depth: int = 6, leaf_prob: float = 0.3) -> Formula:
    """Random AST of depth ``<= max_depth`` over ``aps``."""
    if max_depth <= 1 or rng.random() < leaf_prob:
        return Atom(rng.choice(list(aps)))
    if rng.random() < 0.4:
        cls = rng.choice(UNARY_TYPES)
        return cls(random_formula(rng, aps, max_depth - 1, leaf_prob))
    cls = rng.choice(BINARY_TYPES)
    return cls(
        random_formula(rng, aps, max_depth - 1, leaf_prob),
        random_formula(rng, aps, max_depth - 1, leaf_prob),
    )


def all_formulas(aps: Sequence[str], max_depth: int) -> List[Formula]:
    """Every formula of depth ``<= max_depth`` (2 APs, depth 3 gives 1262)."""
    level: List[Formula] = [Atom(name) for name in aps]
    for _ in range(max_depth - 1):
        nxt: List[Formula] = [Atom(name) for name in aps]
        nxt.extend(cls(child) for cls in UNARY_TYPES for child in level)
        nxt.extend(cls(l, r) for cls in BINARY_TYPES for l in level for r in level)
        level = nxt
    return level


def all_traces(aps: Sequence[str], max_len: int) -> List[Tuple[FrozenSet[str], ...]]:
    """Every trace of length 1..max_len over the powerset of ``aps``."""
    steps = [frozenset(c) for r in range(len(aps) + 1) for c in itertools.combinations(aps, r)]
    traces = []
    for n in range(1, max_len + 1):
        traces.extend(itertools.product(steps, repeat=n))
    return traces

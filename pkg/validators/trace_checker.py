"""
Finite-trace satisfaction (LTLf-style) for the formula AST.

A trace is a non-empty sequence of steps, each the set of AP names true at that
step. ``F``/``G``/``U`` quantify over the positions of the remaining suffix;
there is no position past the last step.
"""
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from models.data_models import APSet
from models.errors import UnknownAtom
from models.ltl import And, Atom, Finally, Formula, Globally, Hole, Not, Or, Until, atoms

Trace = Tuple[FrozenSet[str], ...]


def make_trace(steps: Iterable[Iterable[str]], aps: Optional[APSet] = None) -> Trace:
    trace = tuple(frozenset(step) for step in steps)
    if not trace:
        raise ValueError("a trace needs at least one step")
    if aps is not None:
        for i, step in enumerate(trace):
            unknown = sorted(name for name in step if name not in aps)
            if unknown:
                raise UnknownAtom(f"step {i} names unknown APs {unknown}", {"step": i, "names": unknown})
    return trace


def _positions(f: Formula, trace: Trace) -> List[bool]:
    """Truth value of ``f`` at every position of ``trace``, computed right to left."""
    n = len(trace)
    if isinstance(f, Atom):
        return [f.name in step for step in trace]
    if isinstance(f, Hole):
        raise TypeError("cannot evaluate a structure skeleton; instantiate its holes first")
    if isinstance(f, Not):
        return [not v for v in _positions(f.child, trace)]
    if isinstance(f, (And, Or, Until)):
        left = _positions(f.left, trace)
        right = _positions(f.right, trace)
        if isinstance(f, And):
            return [a and b for a, b in zip(left, right)]
        if isinstance(f, Or):
            return [a or b for a, b in zip(left, right)]
        out = [False] * n
        later = False
        for i in range(n - 1, -1, -1):
            later = right[i] or (left[i] and later)
            out[i] = later
        return out
    child = _positions(f.child, trace)
    out = [False] * n
    if isinstance(f, Finally):
        acc = False
        for i in range(n - 1, -1, -1):
            acc = acc or child[i]
            out[i] = acc
        return out
    if isinstance(f, Globally):
        acc = True
        for i in range(n - 1, -1, -1):
            acc = acc and child[i]
            out[i] = acc
        return out
    raise TypeError(f"unsupported node {type(f).__name__}")


def evaluate_trace(f: Formula, trace: Sequence[Iterable[str]], aps: Optional[APSet] = None) -> bool:
    """True iff ``trace`` satisfies ``f`` at position 0.

    With ``aps`` given, every atom of ``f`` and every name in the trace must
    belong to it (``UnknownAtom`` otherwise).
    """
    steps = make_trace(trace, aps)
    if aps is not None:
        unknown = [name for name in atoms(f) if name not in aps]
        if unknown:
            raise UnknownAtom(f"formula uses unknown APs {unknown}", {"names": unknown})
    return _positions(f, steps)[0]

"""
Formula -> canonical English-like form.

    finally ( or ( go to the blue room , go to the red room ) )

Every operator node is its lexicon phrase followed by its parenthesized,
comma-separated arguments; atoms are replaced by their AP phrase.
"""
from typing import List

from models.data_models import Lexicon
from models.errors import MissingPhrase
from models.ltl import Atom, Formula, NODE_KINDS, is_binary, is_unary


def to_canonical(f: Formula, lex: Lexicon) -> str:
    out: List[str] = []
    stack: list = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, str):
            out.append(node)
        elif isinstance(node, Atom):
            phrase = lex.ap_phrases.get(node.name)
            if phrase is None:
                raise MissingPhrase(f"no phrase for AP {node.name!r}", {"ap": node.name})
            out.append(phrase)
        elif is_unary(node):
            stack.extend(reversed([lex.operator_phrases[NODE_KINDS[type(node)]], "(", node.child, ")"]))
        elif is_binary(node):
            op = lex.operator_phrases[NODE_KINDS[type(node)]]
            stack.extend(reversed([op, "(", node.left, ",", node.right, ")"]))
        else:
            raise TypeError(f"cannot canonicalize node {type(node).__name__}")
    return " ".join(out)

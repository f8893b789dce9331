"""
Canonical form -> Formula.

An operator phrase counts as an operator only when the next token is ``(``.
A leaf is the maximal token run up to the next ``,`` or ``)`` (or the end of
input) and must equal exactly one AP phrase of the lexicon. AP phrases never
contain those delimiters, so phrases that are prefixes of each other
("go to the blue room" / "go to the blue room with chair") stay unambiguous.
"""
from typing import Dict, List, Optional

from models.data_models import Lexicon
from models.errors import AmbiguousPhrase, UnparsableCanonical
from models.ltl import Atom, BINARY_TYPES, Formula, KIND_TYPES, MAX_NESTING

_DELIMITERS = {",", ")"}


class _CanonicalReader:
    def __init__(self, text: str, lex: Lexicon):
        self.tokens: List[str] = text.split()
        self.pos = 0
        self.operators: Dict[str, str] = {phrase: kind for kind, phrase in lex.operator_phrases.items()}
        self.leaves = lex.phrase_index()

    def peek(self, offset: int = 0) -> Optional[str]:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def expect(self, token: str) -> None:
        found = self.peek()
        if found != token:
            raise UnparsableCanonical(
                f"expected {token!r} at token {self.pos + 1}, found {found!r}",
                {"position": self.pos + 1, "expected": token, "found": found},
            )
        self.pos += 1

    def expr(self, depth: int = 1) -> Formula:
        tok = self.peek()
        if tok is None:
            raise UnparsableCanonical("unexpected end of canonical form", {"position": self.pos + 1})
        if tok in self.operators and self.peek(1) == "(":
            if depth > MAX_NESTING:
                raise UnparsableCanonical(
                    f"formula nested deeper than {MAX_NESTING} levels at token {self.pos + 1}", {"position": self.pos + 1}
                )
            cls = KIND_TYPES[self.operators[tok]]
            self.pos += 2
            first = self.expr(depth + 1)
            if cls in BINARY_TYPES:
                self.expect(",")
                second = self.expr(depth + 1)
                self.expect(")")
                return cls(first, second)
            self.expect(")")
            return cls(first)
        return self.leaf()

    def leaf(self) -> Formula:
        start = self.pos
        run: List[str] = []
        while self.peek() is not None and self.peek() not in _DELIMITERS:
            if self.peek() == "(":
                raise UnparsableCanonical(
                    f"unexpected '(' inside a leaf at token {self.pos + 1}", {"position": self.pos + 1}
                )
            run.append(self.peek())
            self.pos += 1
        if not run:
            raise UnparsableCanonical(f"empty argument at token {start + 1}", {"position": start + 1})
        phrase = " ".join(run)
        name = self.leaves.get(phrase)
        if name is None:
            raise AmbiguousPhrase(f"leaf {phrase!r} matches no AP phrase", {"phrase": phrase, "matches": 0})
        return Atom(name)


def from_canonical(text: str, lex: Lexicon) -> Formula:
    reader = _CanonicalReader(text, lex)
    formula = reader.expr()
    if reader.peek() is not None:
        raise UnparsableCanonical(
            f"trailing tokens from token {reader.pos + 1}", {"position": reader.pos + 1, "found": reader.peek()}
        )
    return formula

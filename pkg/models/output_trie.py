"""
Token trie over the set of valid target strings.

Edges are whitespace tokens of the target representation; a node is terminal
when the path to it spells a complete valid target. The trie is built once
and only read afterwards.
"""
from typing import Dict, Iterable, Iterator, List, Set

from models.errors import EmptyOutputSet

EOS = "</s>"
BOS = "<s>"


class TrieNode:
    __slots__ = ("children", "terminal")

    def __init__(self):
        self.children: Dict[str, "TrieNode"] = {}
        self.terminal = False

    def candidates(self) -> List[str]:
        """Legal next tokens: end-of-sequence first (terminal nodes only), then
        child tokens in lexicographic order."""
        tokens = sorted(self.children)
        return [EOS] + tokens if self.terminal else tokens


class OutputTrie:
    def __init__(self):
        self.root = TrieNode()
        self._size = 0

    def add(self, tokens: List[str]) -> None:
        if not tokens:
            raise ValueError("valid outputs must contain at least one token")
        if EOS in tokens or BOS in tokens:
            raise ValueError(f"{EOS!r} and {BOS!r} are reserved")
        node = self.root
        for tok in tokens:
            node = node.children.setdefault(tok, TrieNode())
        if not node.terminal:
            node.terminal = True
            self._size += 1

    def __len__(self) -> int:
        return self._size

    def __contains__(self, text: object) -> bool:
        if not isinstance(text, str):
            return False
        node = self.root
        for tok in text.split():
            node = node.children.get(tok)
            if node is None:
                return False
        return node.terminal and node is not self.root

    def walk(self, tokens: Iterable[str]) -> TrieNode:
        node = self.root
        for tok in tokens:
            node = node.children[tok]
        return node

    def accepted(self) -> Iterator[str]:
        """Every accepted string, depth-first in token order."""
        stack = [(self.root, [])]
        while stack:
            node, path = stack.pop()
            if node.terminal:
                yield " ".join(path)
            for tok in sorted(node.children, reverse=True):
                stack.append((node.children[tok], path + [tok]))

    def vocabulary(self) -> List[str]:
        vocab: Set[str] = set()
        stack = [self.root]
        while stack:
            node = stack.pop()
            vocab.update(node.children)
            stack.extend(node.children.values())
        return sorted(vocab)


def build_trie(valid_outputs: Iterable[str]) -> OutputTrie:
    trie = OutputTrie()
    for text in valid_outputs:
        trie.add(text.split())
    if len(trie) == 0:
        raise EmptyOutputSet("cannot build a trie from an empty output set")
    return trie

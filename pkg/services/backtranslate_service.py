# Ensure project root is in sys.path for standalone execution
import sys
from pathlib import Path
_project_root = Path(__file__).resolve().parent.parent
if str(_project_root) not in sys.path:
    sys.path.insert(0, str(_project_root))

import logging
from typing import Dict, List, Optional, Sequence, Tuple

from config import LOG_LEVEL
from generators.ltl_printer import print_prefix
from knowledge.backtranslation_rules import NEVER_RULE, OPERATOR_RULES, SENTENCE_DEPTH, SEQUENCE_RULE
from models.data_models import APSet, AnnotationTemplate, Lexicon, LtlStructure, PLACEHOLDER
from models.errors import LexiconError, MissingPhrase, MultipleMatchingStructures, NoMatchingStructure
from models.ltl import (
    And, Atom, Finally, Formula, Globally, Hole, NODE_KINDS, Not, children, depth, is_binary, map_leaves,
)

logger = logging.getLogger(__name__)
if not logger.handlers:
    handler = logging.StreamHandler()
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.setLevel(LOG_LEVEL)

BACKTRANSLATION_MODES = ("rule", "template", "annotated")


def _phrase(name: str, lex: Lexicon) -> str:
    phrase = lex.ap_phrases.get(name)
    if phrase is None:
        raise MissingPhrase(f"no phrase for AP {name!r}", {"ap": name})
    return phrase


def _render(f: Formula, lex: Lexicon) -> str:
    if isinstance(f, Atom):
        return _phrase(f.name, lex)
    if isinstance(f, Finally) and isinstance(f.child, And) and isinstance(f.child.right, Finally):
        return SEQUENCE_RULE.format(x=_render(f.child.left, lex), y=_render(f.child.right.child, lex))
    if isinstance(f, Globally) and isinstance(f.child, Not):
        return NEVER_RULE.format(x=_render(f.child.child, lex))
    rule = OPERATOR_RULES[NODE_KINDS[type(f)]]
    if is_binary(f):
        return rule.format(x=_render(f.left, lex), y=_render(f.right, lex))
    return rule.format(x=_render(f.child, lex))


def back_translate_rule(f: Formula, lex: Lexicon) -> str:
    """Structured English for ``f`` from the shipped surface rules, e.g.
    ``F B`` with B -> "visit the blue room" gives "eventually visit the blue room".
    """
    text = _render(f, lex)
    if depth(f) > SENTENCE_DEPTH:
        text = text[0].upper() + text[1:]
        if not text.endswith("."):
            text += "."
    return text


def instantiate(structure: LtlStructure, assignment: Dict[int, str]) -> Formula:
    missing = [k for k in range(1, structure.slot_count + 1) if k not in assignment]
    if missing:
        raise ValueError(f"structure {structure.id!r}: no AP bound to holes {missing}")
    return map_leaves(structure.skeleton, lambda leaf: Atom(assignment[leaf.index]) if isinstance(leaf, Hole) else leaf)


def _unify(skeleton: Formula, f: Formula, binding: Dict[int, str]) -> bool:
    if isinstance(skeleton, Hole):
        if not isinstance(f, Atom):
            return False
        bound = binding.setdefault(skeleton.index, f.name)
        return bound == f.name
    if isinstance(skeleton, Atom):
        return skeleton == f
    if type(skeleton) is not type(f):
        return False
    return all(_unify(s, g, binding) for s, g in zip(children(skeleton), children(f)))


def _admissible(structure: LtlStructure, binding: Dict[int, str]) -> bool:
    if structure.distinct_slots and len(set(binding.values())) != len(binding):
        return False
    return all(binding[k] in allowed for k, allowed in structure.slot_domains.items())


def match_structure(f: Formula, structures: Sequence[LtlStructure]) -> Tuple[str, Dict[int, str]]:
    """Unique (structure id, hole -> AP) unifier of ``f`` against ``structures``.

    A binding must respect the structure's ``distinct_slots`` flag and slot
    domains, so matching inverts ``instantiate`` exactly.
    """
    matches: List[Tuple[str, Dict[int, str]]] = []
    for structure in structures:
        binding: Dict[int, str] = {}
        if _unify(structure.skeleton, f, binding) and _admissible(structure, binding):
            matches.append((structure.id, dict(sorted(binding.items()))))
    if not matches:
        raise NoMatchingStructure(f"no structure matches {print_prefix(f)!r}", {"formula": print_prefix(f)})
    if len(matches) > 1:
        ids = [sid for sid, _ in matches]
        raise MultipleMatchingStructures(
            f"{print_prefix(f)!r} matches structures {ids}", {"formula": print_prefix(f), "structures": ids}
        )
    return matches[0]


def templates_from_lexicon(lex: Lexicon) -> List[AnnotationTemplate]:
    return [AnnotationTemplate(structure_id=sid, sentence=s) for sid, s in lex.structure_templates.items()]


def fill_template(sentence: str, binding: Dict[int, str], lex: Lexicon) -> str:
    return PLACEHOLDER.sub(lambda m: _phrase(binding[int(m.group(1))], lex), sentence)


def back_translate_template(
    f: Formula,
    structures: Sequence[LtlStructure],
    templates: Sequence[AnnotationTemplate],
    lex: Lexicon,
) -> str:
    structure_id, binding = match_structure(f, structures)
    for template in templates:
        if template.structure_id == structure_id:
            return fill_template(template.sentence, binding, lex)
    raise LexiconError(f"no sentence template for structure {structure_id!r}", {"structure": structure_id})


def back_translate_annotated(f: Formula, lex: Lexicon) -> str:
    """Hand-written sentence for ``f``, keyed by its prefix transcription."""
    key = print_prefix(f)
    sentence = lex.formula_annotations.get(key)
    if sentence is None:
        raise MissingPhrase(f"no annotation for formula {key!r}", {"formula": key})
    return sentence


def back_translate(
    f: Formula,
    lex: Lexicon,
    mode: str = "template",
    structures: Optional[Sequence[LtlStructure]] = None,
    templates: Optional[Sequence[AnnotationTemplate]] = None,
) -> str:
    if mode == "rule":
        return back_translate_rule(f, lex)
    if mode == "template":
        return back_translate_template(f, structures or [], templates or templates_from_lexicon(lex), lex)
    if mode == "annotated":
        return back_translate_annotated(f, lex)
    raise ValueError(f"unknown back-translation mode {mode!r}, expected one of {BACKTRANSLATION_MODES}")


def count_annotations(
    lex: Lexicon,
    aps: APSet,
    structures: Sequence[LtlStructure],
    templates: Optional[Sequence[AnnotationTemplate]] = None,
    mode: str = "template",
) -> int:
    """Human-supplied strings a config needs in ``mode``.

    template: one description per AP plus one sentence per structure.
    annotated: one sentence per formula.
    rule: one description per AP.
    """
    if mode == "annotated":
        return len(lex.formula_annotations)
    described = sum(1 for name in aps.names() if name in lex.ap_phrases)
    if mode == "rule":
        return described
    if mode == "template":
        templated = {t.structure_id for t in (templates if templates is not None else templates_from_lexicon(lex))}
        return described + sum(1 for s in structures if s.id in templated)
    raise ValueError(f"unknown back-translation mode {mode!r}")


def check_templates(structures: Sequence[LtlStructure], templates: Sequence[AnnotationTemplate]) -> None:
    """Every placeholder 1..slot_count appears exactly once per template."""
    by_id = {s.id: s for s in structures}
    for template in templates:
        structure = by_id.get(template.structure_id)
        if structure is None:
            raise LexiconError(f"template for unknown structure {template.structure_id!r}")
        found = sorted(template.placeholders())
        if found != list(range(1, structure.slot_count + 1)):
            raise LexiconError(
                f"template for {structure.id!r} has placeholders {found}, expected 1..{structure.slot_count}",
                {"structure": structure.id, "placeholders": found},
            )


if __name__ == "__main__":
    from parsers.ltl_parser import parse_prefix

    lex = Lexicon(ap_phrases={"B": "go to the blue room", "R": "go to the red room", "Y": "go to the yellow room"})
    for text in ("B", "F B", "F & | B R F Y", "G ! R"):
        logger.info(f"{text!r} -> {back_translate_rule(parse_prefix(text), lex)!r}")

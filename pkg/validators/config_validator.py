# Ensure project root is in sys.path for standalone execution
import sys
from pathlib import Path
_project_root = Path(__file__).resolve().parent.parent
if str(_project_root) not in sys.path:
    sys.path.insert(0, str(_project_root))

import logging
from typing import Dict, List, Optional, Sequence

from config import LOG_LEVEL
from models.data_models import APSet, AnnotationTemplate, DatasetStats, Lexicon, LtlStructure
from models.errors import ConfigError, LexiconError, StatMismatch
from models.ltl import Atom, walk
from services.backtranslate_service import check_templates

logger = logging.getLogger(__name__)
if not logger.handlers:
    handler = logging.StreamHandler()
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.setLevel(LOG_LEVEL)


class ConfigValidator:
    """
    Cross-file consistency checks for a dataset config: APSet, lexicon,
    structures and sentence templates.
    """

    def validate_lexicon(self, lex: Lexicon, aps: APSet) -> None:
        missing = [name for name in aps.names() if name not in lex.ap_phrases]
        if missing:
            raise LexiconError(f"lexicon has no phrase for APs {missing}", {"missing": missing})
        extra = sorted(set(lex.ap_phrases) - set(aps.names()))
        if extra:
            logger.warning(f"Lexicon describes APs outside the APSet: {extra}")

    def validate_structures(self, structures: Sequence[LtlStructure], aps: APSet) -> None:
        ids = [s.id for s in structures]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            raise ConfigError(f"duplicate structure ids {dupes}")
        for s in structures:
            concrete = [n.name for n in walk(s.skeleton) if isinstance(n, Atom) and n.name not in aps]
            if concrete:
                raise ConfigError(f"structure {s.id!r} names unknown APs {concrete}")
            for hole, domain in s.slot_domains.items():
                unknown = [name for name in domain if name not in aps]
                if unknown:
                    raise ConfigError(f"structure {s.id!r} hole {hole} domain names unknown APs {unknown}")

    def validate_templates(self, structures: Sequence[LtlStructure], templates: Sequence[AnnotationTemplate]) -> None:
        check_templates(structures, templates)
        missing = sorted({s.id for s in structures} - {t.structure_id for t in templates})
        if missing:
            logger.warning(f"No sentence template for structures {missing}; template back-translation will fail for them.")

    def validate_all(
        self,
        aps: APSet,
        lex: Lexicon,
        structures: Sequence[LtlStructure],
        templates: Optional[Sequence[AnnotationTemplate]] = None,
    ) -> None:
        self.validate_lexicon(lex, aps)
        self.validate_structures(structures, aps)
        if templates:
            self.validate_templates(structures, templates)
        logger.info(f"Config valid: {len(aps)} APs, {len(structures)} structures, {len(templates or [])} templates")


def compare_stats(declared: DatasetStats, computed: DatasetStats) -> List[str]:
    """Names of the declared statistics that disagree with the computed ones."""
    mismatched = []
    for field in DatasetStats.model_fields:
        want = getattr(declared, field)
        if want is not None and want != getattr(computed, field):
            mismatched.append(field)
    return mismatched


def check_stats(declared: DatasetStats, computed: DatasetStats, dataset: str = "") -> None:
    mismatched = compare_stats(declared, computed)
    if mismatched:
        diff: Dict[str, Dict[str, Optional[int]]] = {
            f: {"declared": getattr(declared, f), "computed": getattr(computed, f)} for f in mismatched
        }
        summary = ", ".join(f"{f} declared {d['declared']} computed {d['computed']}" for f, d in diff.items())
        raise StatMismatch(f"dataset {dataset!r}: {summary}", {"dataset": dataset, "mismatches": diff})

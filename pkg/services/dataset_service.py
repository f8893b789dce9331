# Ensure project root is in sys.path for standalone execution
import sys
from pathlib import Path
_project_root = Path(__file__).resolve().parent.parent
if str(_project_root) not in sys.path:
    sys.path.insert(0, str(_project_root))

import csv
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from pydantic import ValidationError

from config import LOG_LEVEL
from generators.ltl_printer import print_prefix
from knowledge.dataset_profiles import get_profile
from models.data_models import (
    APSet, AnnotationTemplate, AtomicProp, Dataset, DatasetAdapter, DatasetStats, Example, Lexicon,
    LtlStructure, Provenance, TargetRepr,
)
from models.errors import (
    ConfigError, FormulaSyntaxError, LexiconError, LtlPipelineError, NoMatchingStructure, ParseFailure,
)
from models.ltl import Formula, abstract_structure, atoms, holes
from parsers.ltl_parser import parse_formula, parse_prefix, parse_skeleton
from services.backtranslate_service import match_structure, templates_from_lexicon
from validators.config_validator import ConfigValidator, check_stats

logger = logging.getLogger(__name__)
if not logger.handlers:
    handler = logging.StreamHandler()
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.setLevel(LOG_LEVEL)


def _jsonl_records(path: Path) -> Iterator[Tuple[int, dict]]:
    if not path.exists():
        raise ConfigError(f"file not found: {path}")
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseFailure(f"invalid JSON in {path.name}: {e.msg}", lineno, {"file": str(path)})
            if not isinstance(record, dict):
                raise ParseFailure(f"expected a JSON object in {path.name}", lineno, {"file": str(path)})
            yield lineno, record


def load_apset(path) -> APSet:
    path = Path(path)
    props = []
    for lineno, record in _jsonl_records(path):
        try:
            props.append(AtomicProp(**record))
        except ValidationError as e:
            raise ParseFailure(f"bad AP record in {path.name}: {e.errors()[0]['msg']}", lineno, {"file": str(path)})
    try:
        return APSet(props=props)
    except ValidationError as e:
        raise ConfigError(f"invalid APSet {path}: {e.errors()[0]['msg']}")


def load_lexicon(path) -> Lexicon:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"file not found: {path}")
    try:
        return Lexicon(**json.loads(path.read_text(encoding="utf-8")))
    except json.JSONDecodeError as e:
        raise LexiconError(f"lexicon {path.name} is not valid JSON: {e.msg}", {"line": e.lineno})
    except ValidationError as e:
        raise LexiconError(f"invalid lexicon {path.name}: {e.errors()[0]['msg']}", {"errors": e.errors()[0]})


def load_structures(path, aps: Optional[APSet] = None) -> Tuple[List[LtlStructure], List[AnnotationTemplate]]:
    """Structures file: one JSON object per line with ``id``, ``skeleton``
    (prefix notation, holes ``H1``..``Hk``), optional ``distinct_slots``,
    ``slot_domains`` and ``template``."""
    path = Path(path)
    structures: List[LtlStructure] = []
    templates: List[AnnotationTemplate] = []
    for lineno, record in _jsonl_records(path):
        try:
            skeleton = parse_skeleton(record["skeleton"], aps)
            structure = LtlStructure(
                id=str(record["id"]),
                skeleton=skeleton,
                slot_count=len(holes(skeleton)),
                distinct_slots=record.get("distinct_slots", True),
                slot_domains={int(k): v for k, v in record.get("slot_domains", {}).items()},
            )
        except KeyError as e:
            raise ParseFailure(f"structure record missing field {e}", lineno, {"file": str(path)})
        except FormulaSyntaxError as e:
            raise ParseFailure(f"bad skeleton: {e.message}", lineno, {"file": str(path)})
        except ValidationError as e:
            raise ParseFailure(f"bad structure: {e.errors()[0]['msg']}", lineno, {"file": str(path)})
        structures.append(structure)
        if record.get("template"):
            templates.append(AnnotationTemplate(structure_id=structure.id, sentence=record["template"]))
    return structures, templates


@dataclass
class ConfigBundle:
    """APSet, lexicon, structures and sentence templates of one dataset config."""

    aps: APSet
    lexicon: Lexicon
    structures: List[LtlStructure] = field(default_factory=list)
    templates: List[AnnotationTemplate] = field(default_factory=list)


def load_config_bundle(apset_path, lexicon_path, structures_path=None) -> ConfigBundle:
    aps = load_apset(apset_path)
    lexicon = load_lexicon(lexicon_path)
    structures, templates = load_structures(structures_path, aps) if structures_path else ([], [])
    # sentence templates may live in the structures file or in the lexicon; the structures file wins
    covered = {t.structure_id for t in templates}
    templates += [t for t in templates_from_lexicon(lexicon) if t.structure_id not in covered]
    ConfigValidator().validate_all(aps, lexicon, structures, templates)
    return ConfigBundle(aps=aps, lexicon=lexicon, structures=structures, templates=templates)


def load_adapter(path) -> DatasetAdapter:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"adapter not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        adapter = DatasetAdapter(**data, base_dir=str(path.parent))
    except (json.JSONDecodeError, ValidationError, TypeError) as e:
        raise ConfigError(f"invalid adapter {path.name}: {e}")
    if adapter.profile:
        try:
            profile = get_profile(adapter.profile)
        except KeyError as e:
            raise ConfigError(str(e.args[0]))
        declared = DatasetStats(**{k: v for k, v in profile.items() if k in DatasetStats.model_fields})
        adapter = adapter.model_copy(update={"declared": declared})
    return adapter


def _rows(path: Path, adapter: DatasetAdapter) -> Iterator[Tuple[int, str, str]]:
    """(line number, text, raw target) triples."""
    if adapter.format == "jsonl":
        for lineno, record in _jsonl_records(path):
            try:
                yield lineno, str(record[adapter.text_field]), str(record[adapter.target_field])
            except KeyError as e:
                raise ParseFailure(f"record missing field {e}", lineno, {"file": str(path)})
        return
    if not path.exists():
        raise ConfigError(f"dataset file not found: {path}")
    if adapter.format in ("csv", "tsv"):
        delimiter = "," if adapter.format == "csv" else "\t"
        with path.open(encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh, delimiter=delimiter)
            header: Optional[List[str]] = None
            for row in reader:
                lineno = reader.line_num
                if not row or not any(cell.strip() for cell in row):
                    continue
                if adapter.has_header and header is None:
                    header = row
                    continue
                try:
                    if header is not None:
                        text = row[header.index(adapter.text_field)]
                        target = row[header.index(adapter.target_field)]
                    else:
                        text, target = row[int(adapter.text_field)], row[int(adapter.target_field)]
                except (ValueError, IndexError):
                    raise ParseFailure(
                        f"row lacks columns {adapter.text_field!r}/{adapter.target_field!r}", lineno, {"file": str(path)}
                    )
                yield lineno, text, target
        return
    # parallel: one command per line in ``path``, one formula per line in ``target_file``
    if not adapter.target_file:
        raise ConfigError("parallel adapters need target_file")
    target_path = Path(adapter.base_dir) / adapter.target_file
    if not target_path.exists():
        raise ConfigError(f"target file not found: {target_path}")
    texts = path.read_text(encoding="utf-8").splitlines()
    targets = target_path.read_text(encoding="utf-8").splitlines()
    if len(texts) != len(targets):
        raise ParseFailure(
            f"{path.name} has {len(texts)} lines but {target_path.name} has {len(targets)}",
            min(len(texts), len(targets)) + 1,
        )
    for lineno, (text, target) in enumerate(zip(texts, targets), start=1):
        if text.strip() or target.strip():
            yield lineno, text, target


def _rename(raw: str, ap_map: Dict[str, str]) -> str:
    if not ap_map:
        return raw
    return " ".join(ap_map.get(tok, tok) for tok in raw.split())


def compute_stats(formulas: List[Formula], n_commands: int, structures: Optional[List[LtlStructure]] = None) -> DatasetStats:
    """Dataset statistics.

    With structures: n_structures counts matched structures and n_aps counts
    the APs bound to their holes. Without: structures are the abstracted
    formula shapes and n_aps counts every atom.
    """
    distinct = list(dict.fromkeys(formulas))
    if structures:
        used, bound = set(), set()
        for f in distinct:
            try:
                sid, binding = match_structure(f, structures)
            except NoMatchingStructure:
                logger.warning(f"Formula {print_prefix(f)!r} matches none of the configured structures")
                continue
            used.add(sid)
            bound.update(binding.values())
        return DatasetStats(n_structures=len(used), n_formulas=len(distinct), n_aps=len(bound), n_commands=n_commands)
    shapes = {abstract_structure(f) for f in distinct}
    names = {name for f in distinct for name in atoms(f)}
    return DatasetStats(n_structures=len(shapes), n_formulas=len(distinct), n_aps=len(names), n_commands=n_commands)


def ingest(path, adapter: DatasetAdapter, check: bool = True) -> Dataset:
    """Read a golden dataset through ``adapter`` and validate its statistics."""
    path = Path(path)
    if adapter.format == "parallel" and path.is_dir():
        raise ConfigError("parallel adapters take the command file as path")
    aps = load_apset(Path(adapter.base_dir) / adapter.apset) if adapter.apset else None
    structures = None
    if adapter.structures:
        structures, _ = load_structures(Path(adapter.base_dir) / adapter.structures, aps)

    examples: List[Example] = []
    formulas: List[Formula] = []
    for lineno, text, raw in _rows(path, adapter):
        if not text.strip():
            raise ParseFailure("empty command text", lineno, {"file": str(path)})
        try:
            formula = parse_formula(_rename(raw, adapter.ap_map), adapter.notation, aps)
        except FormulaSyntaxError as e:
            raise ParseFailure(f"bad formula {raw.strip()!r}: {e.message}", lineno, {"file": str(path)})
        target = print_prefix(formula)
        formulas.append(formula)
        examples.append(Example(
            text=text,
            target=target,
            target_repr=TargetRepr.RAW_PREFIX,
            label=target,
            provenance=Provenance.GOLDEN,
            source_id=f"g{lineno:06d}",
        ))

    computed = compute_stats(formulas, len(examples), structures)
    dataset = Dataset(name=adapter.name, examples=examples, declared=adapter.declared, computed=computed)
    logger.info(f"Ingested {adapter.name}: {computed.model_dump()}")
    if check:
        check_stats(adapter.declared, computed, adapter.name)
    return dataset


def load_dataset(adapter_path, data_path=None, check: bool = True) -> Dataset:
    """Ingest using an adapter file; ``data_path`` defaults to the adapter's sibling ``golden.<format>``."""
    adapter = load_adapter(adapter_path)
    if data_path is None:
        suffix = {"csv": "csv", "tsv": "tsv", "jsonl": "jsonl", "parallel": "txt"}[adapter.format]
        data_path = Path(adapter.base_dir) / f"golden.{suffix}"
    return ingest(data_path, adapter, check=check)


def valid_targets(dataset: Dataset) -> List[Formula]:
    """Distinct gold formulas in first-appearance order."""
    return list(dict.fromkeys(parse_prefix(e.target) for e in dataset.examples))


if __name__ == "__main__":
    for name in ("cleanup", "pick", "drone"):
        adapter_path = _project_root / "data" / name / "adapter.json"
        try:
            ds = load_dataset(adapter_path, check=False)
            logger.info(f"{name}: declared={ds.declared.model_dump()} computed={ds.computed.model_dump()}")
        except LtlPipelineError as e:
            logger.error(json.dumps(e.to_dict()))

import hashlib
import json
import re
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, InstanceOf, field_validator, model_validator

from models.ltl import Formula, NODE_KINDS, RESERVED_TOKENS, holes

HOLE_TOKEN = re.compile(r"^H(\d+)$")
PLACEHOLDER = re.compile(r"\{(\d+)\}")

DEFAULT_OPERATOR_PHRASES: Dict[str, str] = {
    "Finally": "finally",
    "Globally": "globally",
    "Until": "until",
    "And": "and",
    "Or": "or",
    "Not": "not",
}


def stable_hash(payload: Any) -> str:
    blob = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


class TargetRepr(str, Enum):
    RAW_PREFIX = "raw-prefix"
    RAW_INFIX = "raw-infix"
    CANONICAL = "canonical"


class Provenance(str, Enum):
    GOLDEN = "golden"
    BACKTRANSLATED = "backtranslated"
    PARAPHRASED = "paraphrased"

    @property
    def rank(self) -> int:
        return list(Provenance).index(self)


class AtomicProp(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    description: str

    @field_validator("name")
    @classmethod
    def _check_name(cls, v: str) -> str:
        if not v or any(ch.isspace() for ch in v):
            raise ValueError(f"AP name must be non-empty and contain no whitespace: {v!r}")
        if v in RESERVED_TOKENS or HOLE_TOKEN.match(v):
            raise ValueError(f"AP name collides with a reserved token: {v!r}")
        return v

    @field_validator("description")
    @classmethod
    def _check_description(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("AP description must be non-empty")
        return v.strip()


class APSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    props: List[AtomicProp]

    @model_validator(mode="after")
    def _unique_names(self) -> "APSet":
        names = [p.name for p in self.props]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ValueError(f"duplicate AP names: {dupes}")
        return self

    def names(self) -> List[str]:
        return [p.name for p in self.props]

    def __contains__(self, name: object) -> bool:
        return any(p.name == name for p in self.props)

    def __len__(self) -> int:
        return len(self.props)

    def description(self, name: str) -> str:
        for p in self.props:
            if p.name == name:
                return p.description
        raise KeyError(name)

    def fingerprint(self) -> str:
        return stable_hash([p.model_dump() for p in self.props])


class Lexicon(BaseModel):
    """Operator phrases, AP phrases and per-structure sentence templates.

    ``formula_annotations`` optionally maps a prefix-notation formula to a
    hand-written sentence, for datasets annotated formula by formula.
    """

    model_config = ConfigDict(frozen=True)

    operator_phrases: Dict[str, str] = Field(default_factory=lambda: dict(DEFAULT_OPERATOR_PHRASES))
    ap_phrases: Dict[str, str]
    structure_templates: Dict[str, str] = Field(default_factory=dict)
    formula_annotations: Dict[str, str] = Field(default_factory=dict)

    @field_validator("operator_phrases")
    @classmethod
    def _check_operators(cls, v: Dict[str, str]) -> Dict[str, str]:
        missing = sorted(set(NODE_KINDS.values()) - set(v))
        if missing:
            raise ValueError(f"operator_phrases missing node kinds: {missing}")
        for kind, phrase in v.items():
            if not phrase or phrase != phrase.lower() or len(phrase.split()) != 1 or phrase in ("(", ")", ","):
                raise ValueError(f"operator phrase for {kind} must be one lowercase token, got {phrase!r}")
        if len(set(v.values())) != len(v):
            raise ValueError("operator phrases must be pairwise distinct")
        return v

    @field_validator("ap_phrases")
    @classmethod
    def _check_ap_phrases(cls, v: Dict[str, str]) -> Dict[str, str]:
        cleaned = {}
        for name, phrase in v.items():
            tokens = phrase.split()
            if not tokens:
                raise ValueError(f"empty phrase for AP {name!r}")
            if any(ch in phrase for ch in "(),"):
                raise ValueError(f"AP phrase for {name!r} contains parentheses or commas: {phrase!r}")
            cleaned[name] = " ".join(tokens)
        phrases = list(cleaned.values())
        dupes = sorted({p for p in phrases if phrases.count(p) > 1})
        if dupes:
            raise ValueError(f"AP phrases must be pairwise distinct, duplicated: {dupes}")
        return cleaned

    def phrase_index(self) -> Dict[str, str]:
        """Phrase → AP name."""
        return {phrase: name for name, phrase in self.ap_phrases.items()}

    def fingerprint(self) -> str:
        return stable_hash(self.model_dump())


class LtlStructure(BaseModel):
    """Formula template with numbered AP holes H1..Hk."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    id: str
    skeleton: InstanceOf[Formula]
    slot_count: int
    distinct_slots: bool = True
    slot_domains: Dict[int, List[str]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_holes(self) -> "LtlStructure":
        found = sorted(holes(self.skeleton))
        if found != list(range(1, self.slot_count + 1)):
            raise ValueError(
                f"structure {self.id!r}: holes {found} must be exactly 1..{self.slot_count}"
            )
        bad = sorted(set(self.slot_domains) - set(found))
        if bad:
            raise ValueError(f"structure {self.id!r}: slot_domains for unknown holes {bad}")
        return self

    def domain(self, hole: int, all_aps: List[str]) -> List[str]:
        return list(self.slot_domains.get(hole, all_aps))


class AnnotationTemplate(BaseModel):
    model_config = ConfigDict(frozen=True)

    structure_id: str
    sentence: str

    def placeholders(self) -> List[int]:
        return [int(m) for m in PLACEHOLDER.findall(self.sentence)]


class Example(BaseModel):
    """A (command, formula) pair.

    ``target`` is the formula in prefix notation; ``label`` is the same formula
    rendered in ``target_repr``, which is what a model is trained to emit.
    """

    model_config = ConfigDict(frozen=True)

    text: str
    target: str
    target_repr: TargetRepr = TargetRepr.RAW_PREFIX
    label: str
    provenance: Provenance
    source_id: str

    @field_validator("text")
    @classmethod
    def _non_empty(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("example text must be non-empty")
        return v.strip()


class CorpusFingerprint(BaseModel):
    apset_hash: str
    structures_hash: str
    lexicon_hash: str = ""
    paraphrase: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None


class Corpus(BaseModel):
    examples: List[Example]
    fingerprint: CorpusFingerprint

    def __len__(self) -> int:
        return len(self.examples)


class DatasetStats(BaseModel):
    n_structures: Optional[int] = None
    n_formulas: Optional[int] = None
    n_aps: Optional[int] = None
    n_commands: Optional[int] = None


class Dataset(BaseModel):
    name: str
    examples: List[Example]
    declared: DatasetStats = Field(default_factory=DatasetStats)
    computed: DatasetStats = Field(default_factory=DatasetStats)


class DatasetAdapter(BaseModel):
    """Declarative column mapping for one external dataset format.

    Paths (``target_file``, ``apset``, ``structures``) are relative to the
    adapter file.
    """

    name: str
    format: str = "jsonl"
    text_field: str = "text"
    target_field: str = "ltl"
    target_file: Optional[str] = None
    has_header: bool = True
    notation: str = "prefix"
    ap_map: Dict[str, str] = Field(default_factory=dict)
    profile: Optional[str] = None
    declared: DatasetStats = Field(default_factory=DatasetStats)
    apset: Optional[str] = None
    structures: Optional[str] = None
    base_dir: str = "."

    @field_validator("format")
    @classmethod
    def _format(cls, v: str) -> str:
        if v not in ("csv", "tsv", "jsonl", "parallel"):
            raise ValueError(f"format must be csv, tsv, jsonl or parallel, got {v!r}")
        return v

    @field_validator("notation")
    @classmethod
    def _notation(cls, v: str) -> str:
        if v not in ("prefix", "infix"):
            raise ValueError(f"notation must be prefix or infix, got {v!r}")
        return v


class Prediction(BaseModel):
    text: str
    gold: str
    predicted: str
    correct: bool
    fold: int = 0


class EvalReport(BaseModel):
    accuracy: float
    n_correct: int
    n_total: int
    fold_accuracies: List[float] = Field(default_factory=list)
    confusion: Dict[str, Dict[str, int]] = Field(default_factory=dict)
    predictions: List[Prediction] = Field(default_factory=list)
    config: Dict[str, Any] = Field(default_factory=dict)


class RunConfig(BaseModel):
    """Every knob of a run. Ablation flags map onto the two ablation rows of the
    accuracy table: ``no_constrained_decoding`` and ``no_augmentation``."""

    apset: Optional[str] = None
    structures: Optional[str] = None
    lexicon: Optional[str] = None
    corpus: Optional[str] = None
    dataset: Optional[str] = None
    model: Optional[str] = None

    representation: TargetRepr = TargetRepr.RAW_PREFIX
    scenario: str = "low-resource"
    backtranslation: str = "template"
    scorer: str = "lexical"
    paraphrase_backend: str = "fallback"

    no_constrained_decoding: bool = False
    no_augmentation: bool = False
    n_paraphrases: int = 10
    beam: int = 1
    k_folds: int = 5
    seed: int = 0
    workers: int = 1

    @field_validator("scenario")
    @classmethod
    def _scenario(cls, v: str) -> str:
        if v not in ("golden-cv", "low-resource"):
            raise ValueError(f"scenario must be golden-cv or low-resource, got {v!r}")
        return v

    @field_validator("backtranslation")
    @classmethod
    def _backtranslation(cls, v: str) -> str:
        if v not in ("rule", "template", "annotated"):
            raise ValueError(f"backtranslation must be rule, template or annotated, got {v!r}")
        return v

    @field_validator("scorer")
    @classmethod
    def _scorer(cls, v: str) -> str:
        if v not in ("lexical", "oracle", "remote"):
            raise ValueError(f"scorer must be lexical, oracle or remote, got {v!r}")
        return v

    @field_validator("paraphrase_backend")
    @classmethod
    def _backend(cls, v: str) -> str:
        if v not in ("service", "fallback"):
            raise ValueError(f"paraphrase_backend must be service or fallback, got {v!r}")
        return v

    @field_validator("n_paraphrases", "k_folds", "workers", "beam")
    @classmethod
    def _non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("must be non-negative")
        return v

    @property
    def effective_paraphrases(self) -> int:
        return 0 if self.no_augmentation else self.n_paraphrases


if __name__ == "__main__":
    aps = APSet(props=[AtomicProp(name="B", description="go to the blue room"),
                       AtomicProp(name="R", description="go to the red room")])
    print("APSet:", aps.model_dump_json(indent=2), "fingerprint", aps.fingerprint())
    print("RunConfig defaults:", RunConfig().model_dump_json(indent=2))

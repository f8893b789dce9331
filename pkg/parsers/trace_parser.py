"""Trace text format used on the command line: ``{} {B} {S,C}``."""
import re
from typing import List, Optional

from models.data_models import APSet
from validators.trace_checker import Trace, make_trace

_STEP = re.compile(r"\{([^{}]*)\}")


def parse_trace(text: str, aps: Optional[APSet] = None) -> Trace:
    steps: List[List[str]] = []
    pos = 0
    for m in _STEP.finditer(text):
        if text[pos:m.start()].strip():
            raise ValueError(f"unexpected text {text[pos:m.start()].strip()!r} in trace at offset {pos}")
        steps.append([name.strip() for name in m.group(1).split(",") if name.strip()])
        pos = m.end()
    if text[pos:].strip():
        raise ValueError(f"unexpected text {text[pos:].strip()!r} at end of trace")
    return make_trace(steps, aps)


def format_trace(trace: Trace) -> str:
    return " ".join("{" + ",".join(sorted(step)) + "}" for step in trace)

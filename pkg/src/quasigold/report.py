"""Report envelope with a repeatability block, and JSON/text/CSV rendering.

JSON is the canonical form; the text rendering is derived from the JSON
document so the two never disagree.
"""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
import os
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import __version__

NO_COLOR_ENV = "QUASIGOLD_NO_COLOR"
TIMESTAMP_FIELD = "timestamp"
PHRASE_SEMANTICS_NOTE = (
    "phrase matching is exact contiguous token sequences without stemming; "
    "database engines may match more loosely, so results approximate theirs"
)


def file_digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class PipelineRun:
    command: str
    argv: list[str]
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    query: str | None = None
    search_config: dict[str, Any] | None = None
    dedup_policy: dict[str, Any] | None = None
    deterministic: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "tool": "quasigold",
            "version": __version__,
            "command": self.command,
            "argv": list(self.argv),
            "inputs": [{"path": str(p), "sha256": file_digest(p)} for p in self.inputs],
            "outputs": [str(p) for p in self.outputs],
            "query": self.query,
            "search_config": self.search_config,
            "dedup_policy": self.dedup_policy,
            TIMESTAMP_FIELD: None
            if self.deterministic
            else _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        }


def envelope(run: PipelineRun, body: dict[str, Any]) -> dict[str, Any]:
    return {"pipeline_run": run.to_dict(), "report": body}


def comparable(document: dict[str, Any]) -> dict[str, Any]:
    """Copy of a report without the volatile timestamp, for equality checks."""
    doc = json.loads(json.dumps(document))
    doc.get("pipeline_run", {}).pop(TIMESTAMP_FIELD, None)
    return doc


def to_json(document: dict[str, Any]) -> str:
    return json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def use_color(stream: Any = None) -> bool:
    if os.environ.get(NO_COLOR_ENV):
        return False
    isatty = getattr(stream, "isatty", None)
    return bool(isatty and isatty())


_COLORS = {"accept": "\033[32m", "revise": "\033[31m"}
_RESET = "\033[0m"


def _scalar(value: Any, color: bool) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        text = f"{value:.4f}".rstrip("0").rstrip(".") if value != int(value) else f"{value:.1f}"
    else:
        text = str(value)
    if color and text in _COLORS:
        return f"{_COLORS[text]}{text}{_RESET}"
    return text


def _render(value: Any, indent: int, lines: list[str], color: bool, key: str | None = None) -> None:
    pad = "  " * indent
    prefix = f"{pad}{key}: " if key is not None else f"{pad}- "
    if isinstance(value, dict):
        if not value:
            lines.append(prefix + "{}")
            return
        lines.append(prefix.rstrip())
        for k, v in value.items():
            _render(v, indent + 1, lines, color, str(k))
    elif isinstance(value, list):
        if not value:
            lines.append(prefix + "[]")
        elif all(not isinstance(v, (dict, list)) for v in value):
            lines.append(prefix + ", ".join(_scalar(v, color) for v in value))
        else:
            lines.append(prefix.rstrip())
            for v in value:
                _render(v, indent + 1, lines, color)
    else:
        lines.append(prefix + _scalar(value, color))


def to_text(document: dict[str, Any], color: bool = False) -> str:
    """Human-readable rendering: the report body first, the run record after."""
    lines: list[str] = []
    body = document.get("report", document)
    for k, v in body.items():
        _render(v, 0, lines, color, k)
    if "pipeline_run" in document:
        lines.append("")
        _render(document["pipeline_run"], 0, lines, color, "pipeline_run")
    return "\n".join(lines) + "\n"


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else v for v in row])
    return buf.getvalue()

"""Attack intelligence: severity and ATT&CK mapping per action, and report enrichment."""

from __future__ import annotations

import dataclasses
import enum
import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Iterator

from iamvision.engine.report import VisionReport
from iamvision.errors import DuplicateAction, SchemaViolation

TECHNIQUE_RE = re.compile(r"T\d{4}(\.\d{3})?")
FIELDS = ("action", "severity", "tactic", "technique", "sub_technique", "abuse", "example_command")


class Severity(str, enum.Enum):
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"
    CRITICAL = "Critical"
    PRIV_ESC_VECTOR = "PrivEscVector"


@dataclass(frozen=True)
class ActionIntel:
    action: str
    severity: Severity
    tactic: str
    technique: str
    sub_technique: str | None
    abuse: str
    example_command: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "severity", Severity(self.severity))
        if not TECHNIQUE_RE.fullmatch(self.technique):
            raise ValueError(f"bad technique code {self.technique!r}")

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> ActionIntel:
        if not isinstance(raw, dict) or set(raw) != set(FIELDS):
            raise SchemaViolation(f"intel entry must have exactly the fields {FIELDS}")
        for key in FIELDS:
            value = raw[key]
            if not (isinstance(value, str) or (key == "sub_technique" and value is None)):
                raise SchemaViolation(f"intel field {key!r} has the wrong type")
        try:
            return cls(**raw)
        except ValueError as exc:
            raise SchemaViolation(str(exc)) from exc

    def annotation(self) -> dict[str, Any]:
        return {"known": True, **dataclasses.asdict(self), "severity": self.severity.value}


@dataclass(frozen=True)
class Unknown:
    """Lookup miss; carries the action back so it can still be reported."""

    action: str

    def annotation(self) -> dict[str, Any]:
        return {"known": False, "action": self.action}


class IntelCatalog:
    """Immutable index of intel entries, looked up case-insensitively by action name."""

    def __init__(self, entries: Iterable[ActionIntel] = ()) -> None:
        index: dict[str, ActionIntel] = {}
        for entry in entries:
            key = entry.action.lower()
            if key in index:
                raise DuplicateAction(entry.action)
            index[key] = entry
        self._index = index

    def __len__(self) -> int:
        return len(self._index)

    def __iter__(self) -> Iterator[ActionIntel]:
        return iter(sorted(self._index.values(), key=lambda e: e.action.lower()))

    def __contains__(self, action: object) -> bool:
        return isinstance(action, str) and action.lower() in self._index

    def get(self, action: str) -> ActionIntel | None:
        return self._index.get(action.lower())


def parse_catalog(text: str) -> IntelCatalog:
    entries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"line {lineno}: {exc}") from exc
        entries.append(ActionIntel.from_dict(raw))
    return IntelCatalog(entries)


def load_catalog(path: str | Path | None = None) -> IntelCatalog:
    """Load a JSON Lines intel file; the shipped seed catalog when ``path`` is omitted."""
    if path is None:
        return parse_catalog(resources.files("iamvision.data").joinpath("attack_intel.jsonl").read_text())
    return parse_catalog(Path(path).read_text())


def classify(catalog: IntelCatalog, action: str) -> ActionIntel | Unknown:
    if not isinstance(action, str):
        return Unknown(str(action))
    return catalog.get(action) or Unknown(action)


def _document_actions(doc: dict[str, Any] | None) -> Iterator[str]:
    if not doc:
        return
    statements = doc.get("Statement", [])
    if isinstance(statements, dict):
        statements = [statements]
    for st in statements:
        for key in ("Action", "NotAction"):
            value = st.get(key, [])
            yield from [value] if isinstance(value, str) else value


def report_actions(report: VisionReport) -> set[str]:
    """Every action named in the report's policy documents or allowed-sets."""
    found: set[str] = set()
    for ent in report.entities():
        for doc in ent.inline.values():
            found.update(_document_actions(doc))
        for pol in ent.attached:
            found.update(_document_actions(pol.document))
            for doc in pol.versions.values():
                found.update(_document_actions(doc))
    for view in report.simulation or ():
        found.update(view.allowed)
    found.update(report.fuzz_allowed or ())
    return found


def enrich(report: VisionReport, catalog: IntelCatalog) -> VisionReport:
    """A copy of ``report`` whose ``intel`` maps every action it mentions to an annotation."""
    actions = report_actions(report)
    if not actions:
        return dataclasses.replace(report)
    return dataclasses.replace(report, intel={a: classify(catalog, a).annotation() for a in sorted(actions)})

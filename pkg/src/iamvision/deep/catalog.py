"""Catalog of AWS actions used by simulation and read-only fuzz sweeps."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping

from iamvision.errors import SchemaViolation

NO_ARGS = "no-args"


@dataclass(frozen=True)
class CatalogEntry:
    action: str
    read_only: bool
    invocation: str | Mapping[str, str]

    @property
    def no_args(self) -> bool:
        return self.invocation == NO_ARGS


class ActionCatalog:
    def __init__(self, entries: Iterable[CatalogEntry]) -> None:
        self._entries: dict[str, CatalogEntry] = {}
        for e in entries:
            self._entries.setdefault(e.action.lower(), e)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[CatalogEntry]:
        return iter(sorted(self._entries.values(), key=lambda e: e.action.lower()))

    def __contains__(self, action: object) -> bool:
        return isinstance(action, str) and action.lower() in self._entries

    @property
    def actions(self) -> list[str]:
        return [e.action for e in self]

    def read_only_no_args(self) -> list[str]:
        return [e.action for e in self if e.read_only and e.no_args]

    def union(self, other: ActionCatalog) -> ActionCatalog:
        return ActionCatalog([*self, *other])

    @classmethod
    def from_jsonl(cls, text: str) -> ActionCatalog:
        entries = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(f"catalog line {lineno}: {exc}") from exc
            entries.append(_entry(raw, lineno))
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path | None = None) -> ActionCatalog:
        """Load a JSONL catalog; with no path, the shipped seed catalog."""
        if path is None:
            text = resources.files("iamvision.data").joinpath("actions.jsonl").read_text()
        else:
            text = Path(path).read_text()
        return cls.from_jsonl(text)

    @classmethod
    def for_documents(cls, documents: Iterable[Mapping[str, Any]],
                      reference: ActionCatalog | None = None) -> ActionCatalog:
        """Scenario-minimal catalog: every literal (non-wildcard) action named in the documents.

        ``List*``/``Describe*`` actions are marked read-only and callable without
        arguments, unless ``reference`` knows the action, in which case its entry wins.
        """
        ref = reference if reference is not None else cls([])
        seen: dict[str, CatalogEntry] = {}
        for doc in documents:
            stmts = doc.get("Statement", [])
            for stmt in [stmts] if isinstance(stmts, Mapping) else stmts:
                acts = stmt.get("Action", [])
                for a in [acts] if isinstance(acts, str) else acts:
                    if "*" in a or "?" in a or a.lower() in seen:
                        continue
                    if a in ref:
                        seen[a.lower()] = ref._entries[a.lower()]
                        continue
                    verb = a.split(":", 1)[-1]
                    read_only = verb.startswith(("List", "Describe", "Get", "BatchGet"))
                    no_args = verb.startswith(("List", "Describe"))
                    seen[a.lower()] = CatalogEntry(a, read_only, NO_ARGS if no_args else {"Target": "{target}"})
        return cls(seen.values())


def _entry(raw: Mapping[str, Any], lineno: int) -> CatalogEntry:
    action = raw.get("action")
    if not isinstance(action, str) or ":" not in action:
        raise SchemaViolation(f"catalog line {lineno}: 'action' must look like service:Name")
    if not isinstance(raw.get("read_only"), bool):
        raise SchemaViolation(f"catalog line {lineno}: 'read_only' must be a boolean")
    inv = raw.get("invocation")
    if inv != NO_ARGS and not isinstance(inv, Mapping):
        raise SchemaViolation(f"catalog line {lineno}: 'invocation' must be 'no-args' or a template object")
    return CatalogEntry(action, raw["read_only"], inv)

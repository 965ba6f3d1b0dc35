"""Privilege-level comparison of two policy documents.

Each document is expanded into (effect, action, resource) privileges. A
``NotAction`` or ``NotResource`` clause becomes a single complement term
covering the whole excluded set, since splitting it per element would change
its meaning.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, NamedTuple, Union

from iamvision.core.policy import PolicyDocument, PolicyStatement


@dataclass(frozen=True, order=True)
class Complement:
    """Everything except the listed patterns."""

    excluded: tuple[str, ...]

    def __str__(self) -> str:
        return "NOT(" + ",".join(self.excluded) + ")"


Term = Union[str, Complement]


class Privilege(NamedTuple):
    effect: str
    action: Term
    resource: Term

    def render(self) -> dict[str, str]:
        return {"effect": self.effect, "action": str(self.action), "resource": str(self.resource)}


def _normalize_action(action: str) -> str:
    # action names are case-insensitive; the service prefix is conventionally lowercase
    service, sep, name = action.partition(":")
    return f"{service.lower()}{sep}{name}"


def _action_terms(stmt: PolicyStatement) -> list[Term]:
    if stmt.actions:
        return sorted({_normalize_action(a) for a in stmt.actions})
    return [Complement(tuple(sorted({_normalize_action(a) for a in stmt.not_actions})))]


def _resource_terms(stmt: PolicyStatement) -> list[Term]:
    if stmt.resources:
        return sorted(set(stmt.resources))
    if stmt.not_resources:
        return [Complement(tuple(sorted(set(stmt.not_resources))))]
    return ["*"]


def expand(doc: PolicyDocument | Mapping[str, Any]) -> dict[Privilege, set[str]]:
    """Privilege -> set of JSON-encoded conditions attached to it (empty string for none)."""
    parsed = doc if isinstance(doc, PolicyDocument) else PolicyDocument.from_json(doc)
    out: dict[Privilege, set[str]] = {}
    for stmt in parsed.statements:
        cond = json.dumps(stmt.condition, sort_keys=True) if stmt.condition else ""
        for action in _action_terms(stmt):
            for resource in _resource_terms(stmt):
                out.setdefault(Privilege(stmt.effect, action, resource), set()).add(cond)
    return out


def _sort_key(p: Privilege) -> tuple[str, str, str]:
    return (p.effect, str(p.action), str(p.resource))


@dataclass
class VersionDiff:
    new: set[Privilege] = field(default_factory=set)
    kept: set[Privilege] = field(default_factory=set)
    removed: set[Privilege] = field(default_factory=set)
    condition_changed: set[Privilege] = field(default_factory=set)

    def to_dict(self) -> dict[str, list[dict[str, str]]]:
        return {
            name: [p.render() for p in sorted(getattr(self, name), key=_sort_key)]
            for name in ("new", "kept", "removed", "condition_changed")
        }


def diff_versions(baseline: PolicyDocument | Mapping[str, Any], candidate: PolicyDocument | Mapping[str, Any]) -> VersionDiff:
    base = expand(baseline)
    cand = expand(candidate)
    kept = base.keys() & cand.keys()
    return VersionDiff(
        new=set(cand.keys() - base.keys()),
        kept=set(kept),
        removed=set(base.keys() - cand.keys()),
        condition_changed={p for p in kept if base[p] != cand[p]},
    )

"""Policy documents and statements, with JSON round-tripping and canonical forms."""

from __future__ import annotations

import copy
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Mapping

from iamvision.errors import PolicyError

log = logging.getLogger(__name__)

EFFECTS = ("Allow", "Deny")


def _as_tuple(value: Any, key: str) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        return (value,)
    if isinstance(value, (list, tuple)) and all(isinstance(v, str) for v in value):
        return tuple(value)
    raise PolicyError(f"{key} must be a string or list of strings")


def _one_or_many(values: tuple[str, ...]) -> str | list[str]:
    return values[0] if len(values) == 1 else list(values)


@dataclass(frozen=True, eq=False)
class PolicyStatement:
    effect: str
    actions: tuple[str, ...] = ()
    not_actions: tuple[str, ...] = ()
    resources: tuple[str, ...] = ()
    not_resources: tuple[str, ...] = ()
    principal: Any = None
    not_principal: Any = None
    condition: Mapping[str, Any] | None = None
    sid: str | None = None

    def __post_init__(self) -> None:
        if self.effect not in EFFECTS:
            raise PolicyError(f"Effect must be Allow or Deny, got {self.effect!r}")
        if bool(self.actions) == bool(self.not_actions):
            raise PolicyError("exactly one of Action and NotAction must be non-empty")
        if self.resources and self.not_resources:
            raise PolicyError("Resource and NotResource are mutually exclusive")

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> PolicyStatement:
        if not isinstance(raw, Mapping):
            raise PolicyError("statement must be an object")
        return cls(
            effect=raw.get("Effect", ""),
            actions=_as_tuple(raw.get("Action"), "Action"),
            not_actions=_as_tuple(raw.get("NotAction"), "NotAction"),
            resources=_as_tuple(raw.get("Resource"), "Resource"),
            not_resources=_as_tuple(raw.get("NotResource"), "NotResource"),
            principal=copy.deepcopy(raw.get("Principal")),
            not_principal=copy.deepcopy(raw.get("NotPrincipal")),
            condition=copy.deepcopy(raw.get("Condition")),
            sid=raw.get("Sid"),
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        if self.sid is not None:
            out["Sid"] = self.sid
        out["Effect"] = self.effect
        if self.principal is not None:
            out["Principal"] = copy.deepcopy(self.principal)
        if self.not_principal is not None:
            out["NotPrincipal"] = copy.deepcopy(self.not_principal)
        if self.actions:
            out["Action"] = _one_or_many(self.actions)
        else:
            out["NotAction"] = _one_or_many(self.not_actions)
        if self.resources:
            out["Resource"] = _one_or_many(self.resources)
        elif self.not_resources:
            out["NotResource"] = _one_or_many(self.not_resources)
        if self.condition is not None:
            out["Condition"] = copy.deepcopy(dict(self.condition))
        return out

    def canonical(self) -> dict[str, Any]:
        """Order-insensitive form: list-valued fields sorted and always lists."""
        out: dict[str, Any] = {"Effect": self.effect}
        for key, values in (("Action", self.actions), ("NotAction", self.not_actions),
                            ("Resource", self.resources), ("NotResource", self.not_resources)):
            if values:
                out[key] = sorted(set(values))
        if self.principal is not None:
            out["Principal"] = _canonical_value(self.principal)
        if self.not_principal is not None:
            out["NotPrincipal"] = _canonical_value(self.not_principal)
        if self.condition:
            out["Condition"] = _canonical_value(self.condition)
        return out


def _canonical_value(value: Any) -> Any:
    if isinstance(value, Mapping):
        return {k: _canonical_value(v) for k, v in sorted(value.items())}
    if isinstance(value, (list, tuple)):
        items = [_canonical_value(v) for v in value]
        return sorted(items, key=lambda v: json.dumps(v, sort_keys=True))
    return value


@dataclass(frozen=True, eq=False)
class PolicyDocument:
    statements: tuple[PolicyStatement, ...]
    version: str = "2012-10-17"
    policy_id: str | None = None
    source: Mapping[str, Any] | None = field(default=None, repr=False)

    @classmethod
    def from_json(cls, raw: str | bytes | Mapping[str, Any]) -> PolicyDocument:
        if isinstance(raw, (str, bytes)):
            try:
                raw = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise PolicyError(f"policy is not valid JSON: {exc}") from exc
        if not isinstance(raw, Mapping):
            raise PolicyError("policy document must be a JSON object")
        body = raw.get("Statement")
        if body is None:
            raise PolicyError("policy document has no Statement")
        items = [body] if isinstance(body, Mapping) else body
        if not isinstance(items, list):
            raise PolicyError("Statement must be an object or a list")
        statements = tuple(PolicyStatement.from_dict(s) for s in items)
        return cls(statements, raw.get("Version", "2012-10-17"), raw.get("Id"), copy.deepcopy(dict(raw)))

    def to_dict(self) -> dict[str, Any]:
        if self.source is not None:
            return copy.deepcopy(dict(self.source))
        out: dict[str, Any] = {"Version": self.version}
        if self.policy_id is not None:
            out["Id"] = self.policy_id
        out["Statement"] = [s.to_dict() for s in self.statements]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def canonical(self) -> dict[str, Any]:
        stmts = sorted((s.canonical() for s in self.statements), key=lambda s: json.dumps(s, sort_keys=True))
        return {"Version": self.version, "Statement": stmts}

    def lint(self) -> list[str]:
        """Warnings for identity-policy statements that omit both Resource and NotResource."""
        return [
            f"statement {i} has no Resource; treated as '*'"
            for i, s in enumerate(self.statements)
            if not s.resources and not s.not_resources and s.principal is None
        ]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolicyDocument):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self) -> int:
        return hash(json.dumps(self.canonical(), sort_keys=True))


def canonical_document(raw: Mapping[str, Any] | PolicyDocument | None) -> dict[str, Any] | None:
    """Canonical form of a raw or parsed document; ``None`` passes through."""
    if raw is None:
        return None
    doc = raw if isinstance(raw, PolicyDocument) else PolicyDocument.from_json(raw)
    return doc.canonical()


def documents_equal(a: Mapping[str, Any] | PolicyDocument | None, b: Mapping[str, Any] | PolicyDocument | None) -> bool:
    return canonical_document(a) == canonical_document(b)

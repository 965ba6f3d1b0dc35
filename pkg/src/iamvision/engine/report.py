"""Per-principal permission report and its JSON form."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any

from iamvision.core.policy import canonical_document
from iamvision.deep.diff import diff_versions
from iamvision.engine.store import AMBIGUOUS, ENTITY_FACETS, EnvIamData, Facet

SCHEMA_VERSION = "1.0"


@dataclass
class AttachedPolicy:
    arn: str
    name: str
    default_version_id: str | None
    document: dict[str, Any] | None
    provenance: str
    version_provenance: str | None = None
    versions: dict[str, dict[str, Any]] = field(default_factory=dict)
    # privilege changes from each older known version to the default
    history: dict[str, dict[str, Any]] = field(default_factory=dict)


@dataclass
class EntityReport:
    kind: str
    name: str
    arn: str
    inline: dict[str, dict[str, Any] | None] = field(default_factory=dict)
    attached: list[AttachedPolicy] = field(default_factory=list)
    facet_status: dict[str, str] = field(default_factory=dict)
    # roles only: principal path from the reported user, and whether a session was obtained
    chain: list[str] | None = None
    assumed: bool | None = None

    def attached_by_arn(self) -> dict[str, AttachedPolicy]:
        return {p.arn: p for p in self.attached}


@dataclass
class SimulatedPolicy:
    source_type: str
    name: str
    owner: str
    arn: str | None
    actions: list[str]


@dataclass
class SimulationView:
    target_arn: str
    allowed: list[str]
    policies: list[SimulatedPolicy]


@dataclass
class VisionReport:
    principal_arn: str
    account_id: str
    mode: str
    user: EntityReport
    groups: list[EntityReport] = field(default_factory=list)
    roles: list[EntityReport] = field(default_factory=list)
    simulation: list[SimulationView] | None = None
    fuzz_allowed: list[str] | None = None
    intel: dict[str, dict[str, Any]] | None = None
    sessions: list[str] = field(default_factory=list)
    schema_version: str = SCHEMA_VERSION

    @property
    def in_scope_groups(self) -> list[str]:
        return [g.arn for g in self.groups]

    @property
    def in_scope_roles(self) -> list[str]:
        return [r.arn for r in self.roles]

    def entities(self) -> list[EntityReport]:
        return [self.user, *self.groups, *self.roles]

    def simulation_for(self, arn: str) -> SimulationView | None:
        for view in self.simulation or ():
            if view.target_arn == arn:
                return view
        return None

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self, pretty: bool = False) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2 if pretty else None)

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> VisionReport:
        def ent(e: dict[str, Any]) -> EntityReport:
            return EntityReport(**{**e, "attached": [AttachedPolicy(**p) for p in e.get("attached", [])]})

        sim = raw.get("simulation")
        return cls(
            principal_arn=raw["principal_arn"], account_id=raw["account_id"], mode=raw["mode"],
            user=ent(raw["user"]), groups=[ent(g) for g in raw.get("groups", [])],
            roles=[ent(r) for r in raw.get("roles", [])],
            simulation=None if sim is None else [
                SimulationView(v["target_arn"], v["allowed"], [SimulatedPolicy(**p) for p in v["policies"]])
                for v in sim],
            fuzz_allowed=raw.get("fuzz_allowed"), intel=raw.get("intel"), sessions=raw.get("sessions", []),
            schema_version=raw.get("schema_version", SCHEMA_VERSION),
        )

    def facets(self) -> dict[str, Any]:
        """Everything the report claims to know, without provenance or call bookkeeping."""
        def ent(e: EntityReport) -> dict[str, Any]:
            return {
                "inline": {n: canonical_document(d) for n, d in sorted(e.inline.items())},
                "attached": {p.arn: {"default": p.default_version_id, "document": canonical_document(p.document)}
                             for p in sorted(e.attached, key=lambda p: p.arn)},
                "status": dict(sorted(e.facet_status.items())),
            }

        return {
            "principal": self.principal_arn,
            "user": ent(self.user),
            "groups": {g.arn: ent(g) for g in self.groups},
            "roles": {r.arn: ent(r) for r in self.roles},
        }


def _attached_entries(env: EnvIamData, kind: str, name: str) -> list[AttachedPolicy]:
    out = []
    for arn, provenance in sorted(env.attachments(kind, name).items()):
        pv = env.policy_view(arn)
        assert pv is not None
        default = pv.default_version_id or (AMBIGUOUS if pv.ambiguous else None)
        document = pv.documents.get(pv.default_version_id) if pv.default_version_id else None
        history = {}
        if document is not None:
            for vid, doc in sorted(pv.documents.items()):
                if vid != pv.default_version_id:
                    history[vid] = diff_versions(doc, document).to_dict()
        out.append(AttachedPolicy(arn=arn, name=pv.name, default_version_id=default, document=document,
                                  provenance=provenance, version_provenance=pv.default_provenance,
                                  versions=dict(sorted(pv.documents.items())), history=history))
    return out


def entity_report(env: EnvIamData, kind: str, name: str, extra_facets: tuple[Facet, ...] = ()) -> EntityReport:
    view = env.view(kind, name)
    arn = view.arn if view else f"arn:aws:iam::{env.account_id}:{kind}/{name}"
    inline = dict(sorted(view.inline.items())) if view else {}
    status = {f.value: env.status(kind, name, f).label for f in (*ENTITY_FACETS, *extra_facets)}
    return EntityReport(kind, name, arn, inline, _attached_entries(env, kind, name), status)

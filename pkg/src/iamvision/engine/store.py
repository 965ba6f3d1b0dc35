"""Shared knowledge store that cooperating sessions merge their discoveries into.

All mutation goes through :meth:`EnvIamData.merge`, which appends the event to
an ordered log. Replaying that log into an empty store reproduces it exactly,
and merging an event twice has no further effect.
"""

from __future__ import annotations

import copy
import enum
import threading
from dataclasses import dataclass, field
from typing import Any, Iterable

from iamvision.core.arn import iam_arn
from iamvision.core.policy import PolicyDocument


class Facet(str, enum.Enum):
    INLINE_NAMES = "InlineNames"
    INLINE_DOCS = "InlineDocs"
    ATTACHED_LIST = "AttachedList"
    ATTACHED_VERSION = "AttachedVersion"
    ATTACHED_DOCS = "AttachedDocs"
    GROUP_MEMBERSHIP = "GroupMembership"
    ROLE_SCOPE = "RoleScope"


ENTITY_FACETS = (Facet.INLINE_NAMES, Facet.INLINE_DOCS, Facet.ATTACHED_LIST,
                 Facet.ATTACHED_VERSION, Facet.ATTACHED_DOCS)


class FacetStatus(enum.IntEnum):
    MISSING = 0
    NAMES = 1
    COMPLETE = 2

    @property
    def label(self) -> str:
        return {0: "Missing", 1: "Names", 2: "Complete"}[self.value]


class Provenance(str, enum.Enum):
    LISTED = "Listed"
    FUZZED = "Fuzzed"
    INVERSE = "Inverse"
    GAAD = "Gaad"


AMBIGUOUS = "ambiguous"


@dataclass
class EntityView:
    kind: str
    name: str
    arn: str
    inline: dict[str, dict[str, Any] | None] = field(default_factory=dict)
    inline_listed: bool = False
    listed_attachments: dict[str, str] = field(default_factory=dict)
    attached_listed: bool = False
    groups: set[str] = field(default_factory=set)
    groups_listed: bool = False
    members: set[str] | None = None
    trust: dict[str, Any] | None = None


@dataclass
class PolicyView:
    arn: str
    name: str
    default_version_id: str | None = None
    default_provenance: str | None = None
    ambiguous: bool = False
    version_ids: set[str] = field(default_factory=set)
    versions_listed: bool = False
    documents: dict[str, dict[str, Any]] = field(default_factory=dict)
    document_provenance: dict[str, str] = field(default_factory=dict)
    entities: dict[str, set[str]] | None = None


@dataclass(frozen=True)
class Merge:
    kind: str
    data: dict[str, Any]


def _parsed(doc: dict[str, Any] | None) -> dict[str, Any] | None:
    if doc is None:
        return None
    PolicyDocument.from_json(doc)
    return copy.deepcopy(doc)


class EnvIamData:
    """Thread-safe union of everything every session in a pool has learned about one account."""

    def __init__(self, account_id: str) -> None:
        self.account_id = account_id
        self.users: dict[str, EntityView] = {}
        self.groups: dict[str, EntityView] = {}
        self.roles: dict[str, EntityView] = {}
        self.policies: dict[str, PolicyView] = {}
        self.roles_listed = False
        self.groups_listed: set[str] | None = None
        self.policy_universe: set[str] | None = None
        self.events: list[Merge] = []
        self.revision = 0
        self._lock = threading.RLock()

    # -- merging ------------------------------------------------------------

    def merge(self, event: str, /, **data: Any) -> bool:
        """Apply one event; returns whether the store changed."""
        with self._lock:
            self.events.append(Merge(event, copy.deepcopy(data)))
            before = self._fingerprint()
            getattr(self, f"_apply_{event}")(**copy.deepcopy(data))
            changed = self._fingerprint() != before
            if changed:
                self.revision += 1
            return changed

    def replay(self, events: Iterable[Merge]) -> None:
        for event in events:
            self.merge(event.kind, **event.data)

    def _fingerprint(self) -> tuple[Any, ...]:
        # cheap change detector: sizes and flags of everything a merge can touch
        ents = tuple(
            (k, len(e.inline), sum(d is not None for d in e.inline.values()), e.inline_listed,
             len(e.listed_attachments), e.attached_listed, len(e.groups), e.groups_listed,
             None if e.members is None else len(e.members), e.trust is not None)
            for table in (self.users, self.groups, self.roles) for k, e in table.items()
        )
        pols = tuple(
            (a, p.default_version_id, p.ambiguous, len(p.version_ids), p.versions_listed, len(p.documents),
             None if p.entities is None else sum(len(v) for v in p.entities.values()))
            for a, p in self.policies.items()
        )
        return (len(self.users), len(self.groups), len(self.roles), ents, pols, self.roles_listed,
                None if self.groups_listed is None else len(self.groups_listed),
                None if self.policy_universe is None else len(self.policy_universe))

    def _table(self, kind: str) -> dict[str, EntityView]:
        return {"user": self.users, "group": self.groups, "role": self.roles}[kind]

    def _entity(self, kind: str, name: str, arn: str | None = None) -> EntityView:
        table = self._table(kind)
        if name not in table:
            table[name] = EntityView(kind, name, arn or iam_arn(self.account_id, kind, name))
        elif arn and table[name].arn != arn:
            table[name].arn = arn
        return table[name]

    def _policy(self, arn: str, name: str | None = None) -> PolicyView:
        if arn not in self.policies:
            self.policies[arn] = PolicyView(arn, name or arn.rsplit("/", 1)[-1])
        return self.policies[arn]

    def _apply_entity(self, kind: str, name: str, arn: str | None = None) -> None:
        self._entity(kind, name, arn)

    def _apply_trust(self, name: str, arn: str, document: dict[str, Any]) -> None:
        self._entity("role", name, arn).trust = _parsed(document)

    def _apply_roles_listed(self, roles: list[tuple[str, str]]) -> None:
        for name, arn in roles:
            self._entity("role", name, arn)
        self.roles_listed = True

    def _apply_groups_listed(self, groups: list[tuple[str, str]]) -> None:
        for name, arn in groups:
            self._entity("group", name, arn)
        self.groups_listed = (self.groups_listed or set()) | {n for n, _ in groups}

    def _apply_membership(self, user: str, groups: list[tuple[str, str]], complete: bool) -> None:
        view = self._entity("user", user)
        for name, arn in groups:
            self._entity("group", name, arn)
            view.groups.add(name)
        view.groups_listed = view.groups_listed or complete

    def _apply_group_members(self, group: str, users: list[tuple[str, str]]) -> None:
        gview = self._entity("group", group)
        gview.members = (gview.members or set()) | {n for n, _ in users}
        for name, arn in users:
            self._entity("user", name, arn).groups.add(group)

    def _apply_inline_names(self, kind: str, name: str, names: list[str]) -> None:
        view = self._entity(kind, name)
        for n in names:
            view.inline.setdefault(n, None)
        view.inline_listed = True

    def _apply_inline_doc(self, kind: str, name: str, policy_name: str, document: dict[str, Any]) -> None:
        view = self._entity(kind, name)
        if view.inline.get(policy_name) is None:
            view.inline[policy_name] = _parsed(document)

    def _apply_attached(self, kind: str, name: str, policies: list[tuple[str, str]], provenance: str,
                        complete: bool) -> None:
        view = self._entity(kind, name)
        for arn, pname in policies:
            self._policy(arn, pname)
            view.listed_attachments.setdefault(arn, provenance)
        view.attached_listed = view.attached_listed or complete

    def _apply_policy_default(self, arn: str, name: str | None, version_id: str, provenance: str) -> None:
        pv = self._policy(arn, name)
        if pv.default_version_id is None:
            pv.default_version_id = version_id
            pv.default_provenance = provenance
            pv.ambiguous = False
            pv.version_ids.add(version_id)

    def _apply_policy_ambiguous(self, arn: str) -> None:
        pv = self._policy(arn)
        if pv.default_version_id is None:
            pv.ambiguous = True

    def _apply_policy_versions(self, arn: str, version_ids: list[str], complete: bool) -> None:
        pv = self._policy(arn)
        pv.version_ids.update(version_ids)
        pv.versions_listed = pv.versions_listed or complete

    def _apply_policy_document(self, arn: str, version_id: str, document: dict[str, Any], provenance: str) -> None:
        pv = self._policy(arn)
        pv.version_ids.add(version_id)
        if version_id not in pv.documents:
            pv.documents[version_id] = _parsed(document)
            pv.document_provenance[version_id] = provenance

    def _apply_policy_entities(self, arn: str, users: list[str], groups: list[str], roles: list[str]) -> None:
        pv = self._policy(arn)
        if pv.entities is None:
            pv.entities = {"user": set(), "group": set(), "role": set()}
        for kind, names in (("user", users), ("group", groups), ("role", roles)):
            pv.entities[kind].update(names)
            for n in names:
                self._entity(kind, n)

    def _apply_policy_universe(self, policies: list[tuple[str, str]]) -> None:
        for arn, name in policies:
            self._policy(arn, name)
        self.policy_universe = (self.policy_universe or set()) | {a for a, _ in policies}

    # -- queries ------------------------------------------------------------

    def inverse_complete(self) -> bool:
        """True once every attached policy and all of its attachments are known."""
        with self._lock:
            return self.policy_universe is not None and all(
                self.policies[a].entities is not None for a in self.policy_universe)

    def attachments(self, kind: str, name: str) -> dict[str, str]:
        """Policy ARN -> provenance for everything known to be attached to an entity."""
        with self._lock:
            view = self._table(kind).get(name)
            out = dict(view.listed_attachments) if view else {}
            for arn in sorted(self.policies):
                ents = self.policies[arn].entities
                if ents and name in ents[kind]:
                    out.setdefault(arn, Provenance.INVERSE.value)
            return out

    def status(self, kind: str, name: str, facet: Facet) -> FacetStatus:
        with self._lock:
            view = self._table(kind).get(name)
            if facet is Facet.ROLE_SCOPE:
                return FacetStatus.COMPLETE if self.roles_listed else FacetStatus.MISSING
            if facet is Facet.GROUP_MEMBERSHIP:
                return self._membership_status(view)
            if view is None:
                if facet in (Facet.ATTACHED_LIST,) and self.inverse_complete():
                    return FacetStatus.COMPLETE
                return FacetStatus.MISSING
            if facet is Facet.INLINE_NAMES:
                return FacetStatus.COMPLETE if view.inline_listed else (
                    FacetStatus.NAMES if view.inline else FacetStatus.MISSING)
            if facet is Facet.INLINE_DOCS:
                known = sum(d is not None for d in view.inline.values())
                if view.inline_listed and known == len(view.inline):
                    return FacetStatus.COMPLETE
                return FacetStatus.NAMES if known else FacetStatus.MISSING
            attached = self.attachments(kind, name)
            list_done = view.attached_listed or self.inverse_complete()
            if facet is Facet.ATTACHED_LIST:
                if list_done:
                    return FacetStatus.COMPLETE
                return FacetStatus.NAMES if attached else FacetStatus.MISSING
            if facet is Facet.ATTACHED_VERSION:
                have = [self.policies[a].default_version_id is not None for a in attached]
            else:
                have = [self._default_document(a) is not None for a in attached]
            if list_done and all(have):
                return FacetStatus.COMPLETE
            return FacetStatus.NAMES if any(have) else FacetStatus.MISSING

    def _membership_status(self, view: EntityView | None) -> FacetStatus:
        if view is not None and view.groups_listed:
            return FacetStatus.COMPLETE
        if self.groups_listed is not None and all(
                self.groups[g].members is not None for g in self.groups_listed):
            return FacetStatus.COMPLETE
        return FacetStatus.NAMES if view is not None and view.groups else FacetStatus.MISSING

    def _default_document(self, arn: str) -> dict[str, Any] | None:
        pv = self.policies[arn]
        if pv.default_version_id is None:
            return None
        return pv.documents.get(pv.default_version_id)

    def view(self, kind: str, name: str) -> EntityView | None:
        with self._lock:
            return self._table(kind).get(name)

    def policy_view(self, arn: str) -> PolicyView | None:
        with self._lock:
            return self.policies.get(arn)

    def user_groups(self, user: str) -> list[str]:
        with self._lock:
            view = self.users.get(user)
            return sorted(view.groups) if view else []

    def trusts(self) -> dict[str, dict[str, Any]]:
        """Role ARN -> trust document for every role whose trust policy is known."""
        with self._lock:
            return {r.arn: r.trust for r in self.roles.values() if r.trust is not None}

    def role_name(self, arn: str) -> str | None:
        with self._lock:
            for r in self.roles.values():
                if r.arn == arn:
                    return r.name
            return None

    def snapshot(self) -> dict[str, Any]:
        """Plain-data view of the store, used for equality checks and debugging."""
        with self._lock:
            def ent(e: EntityView) -> dict[str, Any]:
                return {"arn": e.arn, "inline": e.inline, "inline_listed": e.inline_listed,
                        "listed_attachments": e.listed_attachments, "attached_listed": e.attached_listed,
                        "groups": sorted(e.groups), "groups_listed": e.groups_listed,
                        "members": None if e.members is None else sorted(e.members), "trust": e.trust}

            def pol(p: PolicyView) -> dict[str, Any]:
                return {"name": p.name, "default": p.default_version_id, "default_provenance": p.default_provenance,
                        "ambiguous": p.ambiguous, "version_ids": sorted(p.version_ids),
                        "versions_listed": p.versions_listed, "documents": p.documents,
                        "entities": None if p.entities is None else {k: sorted(v) for k, v in p.entities.items()}}

            return {
                "users": {k: ent(v) for k, v in sorted(self.users.items())},
                "groups": {k: ent(v) for k, v in sorted(self.groups.items())},
                "roles": {k: ent(v) for k, v in sorted(self.roles.items())},
                "policies": {k: pol(v) for k, v in sorted(self.policies.items())},
                "roles_listed": self.roles_listed,
                "groups_listed": None if self.groups_listed is None else sorted(self.groups_listed),
                "policy_universe": None if self.policy_universe is None else sorted(self.policy_universe),
            }

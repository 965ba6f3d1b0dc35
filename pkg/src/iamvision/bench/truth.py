"""Scenario fixtures and the ground truth derived mechanically from them."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from iamvision.backend.fixture import FixtureAccount, load_fixture
from iamvision.core.evaluate import allowed_actions, trust_admits
from iamvision.core.model import Account, effective_statements
from iamvision.core.policy import PolicyDocument
from iamvision.deep.catalog import ActionCatalog
from iamvision.errors import UnknownScenario

SCENARIO_IDS = tuple(range(1, 23))


@dataclass
class EntityTruth:
    kind: str
    name: str
    arn: str
    inline: dict[str, dict[str, Any]] = field(default_factory=dict)  # name -> canonical document
    # arn -> (default version id, canonical default document)
    attached: dict[str, tuple[str, dict[str, Any]]] = field(default_factory=dict)


@dataclass
class SimulatedTruth:
    """What a policy simulation of one principal must reveal: allow-sets per source policy."""

    target_arn: str
    inline: dict[tuple[str, str], frozenset[str]] = field(default_factory=dict)  # (owner, name) -> actions
    managed: dict[str, frozenset[str]] = field(default_factory=dict)  # policy arn -> actions


@dataclass
class UserTruth:
    user: EntityTruth
    groups: list[EntityTruth] = field(default_factory=list)
    roles: list[EntityTruth] = field(default_factory=list)
    simulation: dict[str, SimulatedTruth] | None = None


@dataclass
class GroundTruth:
    scenario_id: int
    kind: str  # standard | simulation | fuzz
    targets: list[str]
    users: dict[str, UserTruth] = field(default_factory=dict)
    expected_permissions: frozenset[str] | None = None

    def restrict(self, targets: list[str]) -> GroundTruth:
        """The same truth scored for a subset of the target users."""
        return GroundTruth(self.scenario_id, self.kind, list(targets), {t: self.users[t] for t in targets},
                           self.expected_permissions)


def scenario_text(scenario_id: int) -> str:
    if scenario_id not in SCENARIO_IDS:
        raise UnknownScenario(f"no scenario S{scenario_id}")
    return resources.files("iamvision.data").joinpath("scenarios", f"S{scenario_id}.json").read_text()


def load_scenario(scenario_id: int, catalog: ActionCatalog | None = None) -> tuple[FixtureAccount, GroundTruth]:
    """A fresh fixture account for the scenario and its ground truth."""
    account = load_fixture(json.loads(scenario_text(scenario_id)))
    return account, ground_truth(account, scenario_id, catalog)


def reachable_roles(account: Account, principal_arn: str) -> list[str]:
    """Roles reachable from ``principal_arn`` through trust policies, by naive fixed-point iteration."""
    reached: set[str] = set()
    frontier = {principal_arn}
    while True:
        new = {r.arn for r in account.roles.values() if r.arn not in reached
               and any(trust_admits(r.trust_policy, p) for p in frontier | reached)}
        new.discard(principal_arn)
        if not new:
            return sorted(reached)
        reached |= new
        frontier = new


def _canon(doc: PolicyDocument) -> dict[str, Any]:
    return doc.canonical()


def _entity_truth(account: Account, kind: str, name: str) -> EntityTruth:
    ent = {"user": account.users, "group": account.groups, "role": account.roles}[kind][name]
    attached = {}
    for arn in ent.attached_policies:
        pol = account.policies[arn]
        attached[arn] = (pol.default_version_id, _canon(pol.default_document))
    return EntityTruth(kind, name, ent.arn, {n: _canon(d) for n, d in ent.inline_policies.items()}, attached)


def _simulated(account: Account, principal_arn: str, owners: list[tuple[str, Any]], catalog: ActionCatalog) -> SimulatedTruth:
    actions = catalog.actions
    granted = allowed_actions(effective_statements(account, principal_arn), actions)
    out = SimulatedTruth(principal_arn)
    for owner_name, ent in owners:
        for pname, doc in ent.inline_policies.items():
            out.inline[(owner_name, pname)] = frozenset(allowed_actions(doc.statements, actions) & granted)
        for arn in ent.attached_policies:
            doc = account.policies[arn].default_document
            out.managed[arn] = frozenset(allowed_actions(doc.statements, actions) & granted)
    return out


def ground_truth(account: FixtureAccount, scenario_id: int, catalog: ActionCatalog | None = None) -> GroundTruth:
    meta = account.scenario or {}
    kind = meta.get("kind", "standard")
    targets = list(meta.get("targets") or sorted(account.users))
    gt = GroundTruth(scenario_id, kind, targets)
    for name in targets:
        user = account.users[name]
        roles = reachable_roles(account, user.arn)
        role_names = [account.entity_for(arn).name for arn in roles]
        ut = UserTruth(
            user=_entity_truth(account, "user", name),
            groups=[_entity_truth(account, "group", g) for g in sorted(user.groups)],
            roles=[_entity_truth(account, "role", r) for r in role_names],
        )
        if kind == "simulation":
            cat = catalog or ActionCatalog.load()
            ut.simulation = {user.arn: _simulated(account, user.arn, [(name, user)] + [
                (g, account.groups[g]) for g in user.groups], cat)}
            for r in role_names:
                role = account.roles[r]
                ut.simulation[role.arn] = _simulated(account, role.arn, [(r, role)], cat)
        gt.users[name] = ut
    if kind == "fuzz":
        granted: set[str] = set()
        for name in targets:
            for stmt in effective_statements(account, account.users[name].arn):
                if stmt.effect == "Allow":
                    granted.update(stmt.actions)
        gt.expected_permissions = frozenset(granted)
    return gt


def scenario_catalog(account: Account, targets: list[str]) -> ActionCatalog:
    """Catalog of the literal actions in the targets' effective policy documents."""
    docs = []
    for name in targets:
        user = account.users[name]
        owners = [user, *(account.groups[g] for g in user.groups)]
        for ent in owners:
            docs += [d.to_dict() for d in ent.inline_policies.values()]
            docs += [account.policies[a].default_document.to_dict() for a in ent.attached_policies]
    return ActionCatalog.for_documents(docs)

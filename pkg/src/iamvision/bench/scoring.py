"""Weight trees over ground-truth facets and coverage scoring of reports against them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable

from iamvision.bench.truth import EntityTruth, GroundTruth, UserTruth
from iamvision.core.policy import canonical_document
from iamvision.engine.report import EntityReport, VisionReport
from iamvision.errors import EmptyExpected, EmptyList

# (scope, facet) -> category weight. "scope" facets score which groups/roles are in scope.
STANDARD_WEIGHTS: dict[tuple[str, str], float] = {
    ("user", "inline_names"): 0.06, ("user", "inline_docs"): 0.06,
    ("user", "attached_list"): 0.06, ("user", "attached_version"): 0.06, ("user", "attached_docs"): 0.06,
    ("group", "scope"): 0.05,
    ("group", "inline_names"): 0.06, ("group", "inline_docs"): 0.06,
    ("group", "attached_list"): 0.06, ("group", "attached_version"): 0.06, ("group", "attached_docs"): 0.06,
    ("role", "scope"): 0.05,
    ("role", "inline_names"): 0.06, ("role", "inline_docs"): 0.06,
    ("role", "attached_list"): 0.06, ("role", "attached_version"): 0.06, ("role", "attached_docs"): 0.06,
}

# Simulation reveals allow-sets per source policy rather than documents; user and group
# managed policies are consolidated. Category weights are rescaled to sum to 1.
SIMULATION_WEIGHTS: dict[tuple[str, str], float] = {
    ("group", "scope"): 0.05,
    ("user", "inline_names"): 0.06, ("user", "inline_docs"): 0.06,
    ("group", "inline_names"): 0.06, ("group", "inline_docs"): 0.06,
    ("managed", "attached_list"): 0.12, ("managed", "attached_docs"): 0.12,
    ("role", "scope"): 0.05,
    ("role", "inline_names"): 0.06, ("role", "inline_docs"): 0.06,
    ("role", "attached_list"): 0.06, ("role", "attached_docs"): 0.06,
}

FACET_STATUS_KEY = {"inline_names": "InlineNames", "inline_docs": "InlineDocs", "attached_list": "AttachedList",
                    "attached_version": "AttachedVersion", "attached_docs": "AttachedDocs"}

EMPTY = None


@dataclass(frozen=True)
class Leaf:
    """One scored object. ``obj`` is ``None`` for the single leaf of an empty category."""

    user: str
    scope: str
    facet: str
    obj: Any
    weight: float

    @property
    def category(self) -> tuple[str, str]:
        return (self.scope, self.facet)


@dataclass
class WeightTree:
    scenario_id: int
    leaves: list[Leaf]
    category_weights: dict[tuple[str, str], float]
    users: int

    def total(self) -> float:
        return math.fsum(leaf.weight for leaf in self.leaves)

    def category_sum(self, user: str, category: tuple[str, str]) -> float:
        return math.fsum(leaf.weight for leaf in self.leaves if leaf.user == user and leaf.category == category)


@dataclass
class CoverageScore:
    scenario_id: int
    value: float
    hits: list[tuple[Leaf, bool]] = field(default_factory=list)

    def missed(self) -> list[Leaf]:
        return [leaf for leaf, hit in self.hits if not hit]


def _standard_objects(ut: UserTruth, scope: str, facet: str) -> list[Any]:
    if facet == "scope":
        return [e.arn for e in (ut.groups if scope == "group" else ut.roles)]
    owners = [ut.user] if scope == "user" else ut.groups if scope == "group" else ut.roles
    if facet.startswith("inline"):
        return [(e.arn, n) for e in owners for n in sorted(e.inline)]
    return [(e.arn, a) for e in owners for a in sorted(e.attached)]


def _simulation_objects(ut: UserTruth, scope: str, facet: str) -> list[Any]:
    if facet == "scope":
        return [e.arn for e in (ut.groups if scope == "group" else ut.roles)]
    assert ut.simulation is not None
    user_sim = ut.simulation[ut.user.arn]
    if scope == "managed":
        return [(ut.user.arn, a) for a in sorted(user_sim.managed)]
    if scope == "role":
        if facet.startswith("inline"):
            return [(r.arn, n) for r in ut.roles for n in sorted(r.inline)]
        return [(r.arn, a) for r in ut.roles for a in sorted(ut.simulation[r.arn].managed)]
    owners = [ut.user] if scope == "user" else ut.groups
    return [(e.arn, n) for e in owners for n in sorted(e.inline)]


def build_weight_tree(gt: GroundTruth) -> WeightTree:
    """Split each category's weight equally over its objects, then over the target users."""
    if gt.kind == "fuzz":
        raise ValueError("fuzz scenarios are scored with score_fuzz, not a weight tree")
    weights = SIMULATION_WEIGHTS if gt.kind == "simulation" else STANDARD_WEIGHTS
    objects = _simulation_objects if gt.kind == "simulation" else _standard_objects
    total = math.fsum(weights.values())
    users = len(gt.targets)
    leaves = []
    for user in gt.targets:
        ut = gt.users[user]
        for (scope, facet), w in weights.items():
            share = w / total / users
            objs = objects(ut, scope, facet)
            if not objs:
                leaves.append(Leaf(user, scope, facet, EMPTY, share))
                continue
            leaves += [Leaf(user, scope, facet, o, share / len(objs)) for o in objs]
    return WeightTree(gt.scenario_id, leaves, dict(weights), users)


# -- standard hits -------------------------------------------------------------


def _truth_entity(ut: UserTruth, arn: str) -> EntityTruth:
    for e in (ut.user, *ut.groups, *ut.roles):
        if e.arn == arn:
            return e
    raise KeyError(arn)


def _report_entity(rep: VisionReport, arn: str) -> EntityReport | None:
    for e in rep.entities():
        if e.arn == arn:
            return e
    return None


def _complete(ent: EntityReport | None, key: str) -> bool:
    return ent is not None and ent.facet_status.get(key) == "Complete"


def _facet_objects(ent: EntityReport, facet: str) -> set[str]:
    return set(ent.inline) if facet.startswith("inline") else {p.arn for p in ent.attached}


def _standard_hit(leaf: Leaf, ut: UserTruth, rep: VisionReport) -> bool:
    scope, facet = leaf.category
    if facet == "scope":
        if leaf.obj is EMPTY:
            key = "GroupMembership" if scope == "group" else "RoleScope"
            found = rep.in_scope_groups if scope == "group" else rep.in_scope_roles
            return _complete(rep.user, key) and not found
        return leaf.obj in (rep.in_scope_groups if scope == "group" else rep.in_scope_roles)
    status_key = FACET_STATUS_KEY[facet]
    if leaf.obj is EMPTY:
        owners = [ut.user] if scope == "user" else ut.groups if scope == "group" else ut.roles
        if scope != "user" and not _complete(rep.user, "GroupMembership" if scope == "group" else "RoleScope"):
            return False
        for owner in owners:
            ent = _report_entity(rep, owner.arn)
            if not _complete(ent, status_key) or _facet_objects(ent, facet):
                return False
        return True
    owner_arn, key = leaf.obj
    ent = _report_entity(rep, owner_arn)
    if ent is None:
        return False
    truth = _truth_entity(ut, owner_arn)
    if facet == "inline_names":
        return key in ent.inline
    if facet == "inline_docs":
        return ent.inline.get(key) is not None and canonical_document(ent.inline[key]) == truth.inline[key]
    pol = ent.attached_by_arn().get(key)
    if pol is None:
        return False
    if facet == "attached_list":
        return True
    version, doc = truth.attached[key]
    if facet == "attached_version":
        return pol.default_version_id == version
    return pol.document is not None and canonical_document(pol.document) == doc


# -- simulation hits -----------------------------------------------------------


def _simulated_sets(rep: VisionReport, target_arn: str) -> tuple[dict[tuple[str, str], frozenset[str]],
                                                                 dict[str, frozenset[str]]] | None:
    view = rep.simulation_for(target_arn)
    if view is None:
        return None
    inline: dict[tuple[str, str], set[str]] = {}
    managed: dict[str, set[str]] = {}
    for p in view.policies:
        if p.arn:
            managed.setdefault(p.arn, set()).update(p.actions)
        else:
            inline.setdefault((p.owner, p.name), set()).update(p.actions)
    return ({k: frozenset(v) for k, v in inline.items()}, {k: frozenset(v) for k, v in managed.items()})


def _owner_name(arn: str) -> str:
    return arn.rsplit("/", 1)[-1]


def _simulation_hit(leaf: Leaf, ut: UserTruth, rep: VisionReport) -> bool:
    assert ut.simulation is not None
    scope, facet = leaf.category
    user_sets = _simulated_sets(rep, ut.user.arn)
    if facet == "scope":
        if scope == "group":
            view = rep.simulation_for(ut.user.arn)
            if view is None:
                return False
            # every non-user owner of a contributing policy is a group the user belongs to
            owners = {p.owner for p in view.policies} - {ut.user.name}
            return not owners if leaf.obj is EMPTY else _owner_name(leaf.obj) in owners
        if leaf.obj is EMPTY:
            return _complete(rep.user, "RoleScope") and not rep.in_scope_roles
        return rep.simulation_for(leaf.obj) is not None
    if leaf.obj is EMPTY:
        if scope in ("user", "group", "managed"):
            if user_sets is None:
                return False
            if scope == "managed":
                return not user_sets[1]
            names = {_owner_name(e.arn) for e in ([ut.user] if scope == "user" else ut.groups)}
            return not any(owner in names for owner, _ in user_sets[0])
        for role in ut.roles:
            sets = _simulated_sets(rep, role.arn)
            if sets is None or (sets[0] if facet.startswith("inline") else sets[1]):
                return False
        return True
    owner_arn, key = leaf.obj
    if scope == "managed":
        sets, truth = user_sets, ut.simulation[ut.user.arn].managed[key]
    elif scope == "role" and facet.startswith("attached"):
        sets, truth = _simulated_sets(rep, owner_arn), ut.simulation[owner_arn].managed[key]
    else:
        target = owner_arn if scope == "role" else ut.user.arn
        sets = _simulated_sets(rep, target)
        truth = ut.simulation[target].inline[(_owner_name(owner_arn), key)]
    if sets is None:
        return False
    found = sets[1].get(key) if facet.startswith("attached") else sets[0].get((_owner_name(owner_arn), key))
    if found is None:
        return False
    return facet.endswith("names") or facet.endswith("list") or found == truth


def score(reports: Iterable[VisionReport], gt: GroundTruth, tree: WeightTree | None = None) -> CoverageScore:
    """C = sum of leaf weight times hit; a target without a report scores its leaves 0."""
    tree = tree or build_weight_tree(gt)
    by_user = {r.user.name: r for r in reports}
    hit_fn = _simulation_hit if gt.kind == "simulation" else _standard_hit
    hits = []
    for leaf in tree.leaves:
        rep = by_user.get(leaf.user)
        hits.append((leaf, rep is not None and hit_fn(leaf, gt.users[leaf.user], rep)))
    return CoverageScore(gt.scenario_id, math.fsum(leaf.weight for leaf, hit in hits if hit), hits)


def score_fuzz(discovered: Iterable[str], expected: Iterable[str]) -> float:
    """|discovered ∩ expected| / |expected|, comparing action names case-insensitively."""
    exp = {a.lower() for a in expected}
    if not exp:
        raise EmptyExpected("expected permission set is empty")
    return len({a.lower() for a in discovered} & exp) / len(exp)


def aggregate(scores: Iterable[float | CoverageScore]) -> float:
    values = [s.value if isinstance(s, CoverageScore) else float(s) for s in scores]
    if not values:
        raise EmptyList("no scores to aggregate")
    return math.fsum(values) / len(values)

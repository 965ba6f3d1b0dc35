"""Enumeration chains: the call sequences that reveal each facet.

Each function works for one agent against the shared store, skips anything
the store already holds, and merges whatever it learns.
"""

from __future__ import annotations

import logging
from typing import Any

from iamvision.core.arn import iam_arn
from iamvision.engine.agent import Agent
from iamvision.engine.store import EnvIamData, Facet, FacetStatus, Provenance

log = logging.getLogger(__name__)

_LIST_INLINE = {"user": ("ListUserPolicies", "UserName"), "group": ("ListGroupPolicies", "GroupName"),
                "role": ("ListRolePolicies", "RoleName")}
_GET_INLINE = {"user": "GetUserPolicy", "group": "GetGroupPolicy", "role": "GetRolePolicy"}
_LIST_ATTACHED = {"user": "ListAttachedUserPolicies", "group": "ListAttachedGroupPolicies",
                  "role": "ListAttachedRolePolicies"}


def discover_groups(agent: Agent, env: EnvIamData, user: str) -> FacetStatus:
    """Group membership of ``user``: ListGroupsForUser, else ListGroups + GetGroup per group."""
    if env.status("user", user, Facet.GROUP_MEMBERSHIP) is FacetStatus.COMPLETE:
        return FacetStatus.COMPLETE
    groups = agent.list("ListGroupsForUser", "Groups", UserName=user)
    if groups is not None:
        env.merge("membership", user=user, groups=[(g["GroupName"], g["Arn"]) for g in groups], complete=True)
        return env.status("user", user, Facet.GROUP_MEMBERSHIP)
    if env.groups_listed is None:
        listed = agent.list("ListGroups", "Groups")
        if listed is not None:
            env.merge("groups_listed", groups=[(g["GroupName"], g["Arn"]) for g in listed])
    for group in sorted(env.groups_listed or ()):
        if env.groups[group].members is not None:
            continue
        members = agent.list("GetGroup", "Users", GroupName=group)
        if members is None:
            break
        env.merge("group_members", group=group, users=[(u["UserName"], u["Arn"]) for u in members])
    return env.status("user", user, Facet.GROUP_MEMBERSHIP)


def enumerate_inline(agent: Agent, env: EnvIamData, kind: str, name: str) -> FacetStatus:
    """Inline policy names, then each document.

    Returns ``COMPLETE`` when every document is known, ``NAMES`` when only the
    names are, ``MISSING`` otherwise.
    """
    list_op, key = _LIST_INLINE[kind]
    if env.status(kind, name, Facet.INLINE_NAMES) is not FacetStatus.COMPLETE:
        names = agent.list(list_op, "PolicyNames", **{key: name})
        if names is not None:
            env.merge("inline_names", kind=kind, name=name, names=list(names))
    view = env.view(kind, name)
    pending = [n for n, d in sorted(view.inline.items()) if d is None] if view else []
    for policy_name in pending:
        payload = agent.get(_GET_INLINE[kind], **{key: name, "PolicyName": policy_name})
        if payload is None:
            break
        env.merge("inline_doc", kind=kind, name=name, policy_name=policy_name, document=payload["PolicyDocument"])
    docs = env.status(kind, name, Facet.INLINE_DOCS)
    if docs is FacetStatus.COMPLETE:
        return FacetStatus.COMPLETE
    return FacetStatus.NAMES if env.status(kind, name, Facet.INLINE_NAMES) is not FacetStatus.MISSING \
        else FacetStatus.MISSING


def enumerate_attached(agent: Agent, env: EnvIamData, kind: str, name: str) -> FacetStatus:
    """Attached managed policies, then the default version and its document for each."""
    _, key = _LIST_INLINE[kind]
    if env.status(kind, name, Facet.ATTACHED_LIST) is not FacetStatus.COMPLETE:
        attached = agent.list(_LIST_ATTACHED[kind], "AttachedPolicies", **{key: name})
        if attached is not None:
            env.merge("attached", kind=kind, name=name,
                      policies=[(p["PolicyArn"], p["PolicyName"]) for p in attached],
                      provenance=Provenance.LISTED.value, complete=True)
    for arn in sorted(env.attachments(kind, name)):
        resolve_policy(agent, env, arn)
    return env.status(kind, name, Facet.ATTACHED_DOCS)


def resolve_policy(agent: Agent, env: EnvIamData, arn: str) -> None:
    """Default version id (ListPolicyVersions, else GetPolicy), then its document."""
    pv = env.policy_view(arn)
    if pv is None:
        return
    if pv.default_version_id is None:
        versions = agent.list("ListPolicyVersions", "Versions", PolicyArn=arn)
        if versions is not None:
            ids = [v["VersionId"] for v in versions]
            env.merge("policy_versions", arn=arn, version_ids=ids, complete=True)
            for v in versions:
                if v.get("IsDefaultVersion"):
                    env.merge("policy_default", arn=arn, name=None, version_id=v["VersionId"],
                              provenance=Provenance.LISTED.value)
        if pv.default_version_id is None:
            payload = agent.get("GetPolicy", PolicyArn=arn)
            if payload is not None and payload["Policy"].get("DefaultVersionId"):
                env.merge("policy_default", arn=arn, name=payload["Policy"].get("PolicyName"),
                          version_id=payload["Policy"]["DefaultVersionId"], provenance=Provenance.LISTED.value)
    vid = pv.default_version_id
    if vid is not None and vid not in pv.documents:
        payload = agent.get("GetPolicyVersion", PolicyArn=arn, VersionId=vid)
        if payload is not None:
            env.merge("policy_document", arn=arn, version_id=vid, document=payload["PolicyVersion"]["Document"],
                      provenance=Provenance.LISTED.value)


def list_roles(agent: Agent, env: EnvIamData) -> bool:
    """Every role with its trust policy; needed to compute which roles are in scope."""
    if env.roles_listed:
        return True
    roles = agent.list("ListRoles", "Roles")
    if roles is None:
        return False
    for r in roles:
        env.merge("trust", name=r["RoleName"], arn=r["Arn"], document=r["AssumeRolePolicyDocument"])
    env.merge("roles_listed", roles=[(r["RoleName"], r["Arn"]) for r in roles])
    return True


def fetch_authorization_details(agent: Agent) -> dict[str, Any] | None:
    """GetAccountAuthorizationDetails with its pages concatenated."""
    merged: dict[str, list[Any]] = {}
    marker: str | None = None
    while True:
        page = agent.get("GetAccountAuthorizationDetails", **({"Marker": marker} if marker else {}))
        if page is None:
            return None
        for key in ("UserDetailList", "GroupDetailList", "RoleDetailList", "Policies"):
            merged.setdefault(key, []).extend(page.get(key, []))
        if not page.get("IsTruncated"):
            return merged
        marker = page["Marker"]


def merge_authorization_details(env: EnvIamData, details: dict[str, Any]) -> None:
    """Fold a full account dump into the store, marking every facet it covers as complete."""
    gaad = Provenance.GAAD.value
    groups = details.get("GroupDetailList", [])
    users = details.get("UserDetailList", [])
    env.merge("groups_listed", groups=[(g["GroupName"], g["Arn"]) for g in groups])
    group_arns = {g["GroupName"]: g["Arn"] for g in groups}
    for g in groups:
        members = [(u["UserName"], u["Arn"]) for u in users if g["GroupName"] in u.get("GroupList", [])]
        env.merge("group_members", group=g["GroupName"], users=members)
    for kind, items, name_key, list_key in (("user", users, "UserName", "UserPolicyList"),
                                            ("group", groups, "GroupName", "GroupPolicyList"),
                                            ("role", details.get("RoleDetailList", []), "RoleName", "RolePolicyList")):
        for item in items:
            name = item[name_key]
            env.merge("entity", kind=kind, name=name, arn=item["Arn"])
            if kind == "user":
                env.merge("membership", user=name, groups=[(g, group_arns.get(g) or iam_arn(env.account_id, "group", g))
                                                           for g in item.get("GroupList", [])], complete=True)
            if kind == "role":
                env.merge("trust", name=name, arn=item["Arn"], document=item["AssumeRolePolicyDocument"])
            inline = item.get(list_key, [])
            env.merge("inline_names", kind=kind, name=name, names=[p["PolicyName"] for p in inline])
            for p in inline:
                env.merge("inline_doc", kind=kind, name=name, policy_name=p["PolicyName"], document=p["PolicyDocument"])
            env.merge("attached", kind=kind, name=name,
                      policies=[(p["PolicyArn"], p["PolicyName"]) for p in item.get("AttachedManagedPolicies", [])],
                      provenance=gaad, complete=True)
    roles = details.get("RoleDetailList", [])
    env.merge("roles_listed", roles=[(r["RoleName"], r["Arn"]) for r in roles])
    for p in details.get("Policies", []):
        arn = p["Arn"]
        versions = p.get("PolicyVersionList", [])
        env.merge("policy_versions", arn=arn, version_ids=[v["VersionId"] for v in versions], complete=True)
        env.merge("policy_default", arn=arn, name=p.get("PolicyName"), version_id=p["DefaultVersionId"],
                  provenance=gaad)
        for v in versions:
            env.merge("policy_document", arn=arn, version_id=v["VersionId"], document=v["Document"], provenance=gaad)


def short_circuit_probe(agent: Agent, env: EnvIamData) -> bool:
    """Try the one-call account dump; on success the store holds everything."""
    agent.probed = True
    details = fetch_authorization_details(agent)
    if details is None:
        return False
    merge_authorization_details(env, details)
    return True

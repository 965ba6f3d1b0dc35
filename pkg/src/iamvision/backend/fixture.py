"""Offline IAM/STS backend that serves a JSON account fixture.

Every request is authorized against the fixture's own policies with the core
evaluator, and every attempt (allowed or not) lands in the call log.
"""

from __future__ import annotations

import copy
import hashlib
import json
import logging
import random
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

import jsonschema

from iamvision.backend.base import (
    MAX_ROLE_DEPTH,
    OPERATIONS,
    PAGE_SIZE,
    SIMULATION_BATCH_LIMIT,
    ApiRequest,
    ApiResponse,
    CallRecord,
    Credential,
    Session,
)
from iamvision.core.arn import iam_arn, parse_arn
from iamvision.core.evaluate import Decision, evaluate, statement_applies, trust_admits
from iamvision.core.model import Account, IamGroup, IamRole, IamUser, ManagedPolicy, sourced_statements
from iamvision.core.policy import PolicyDocument
from iamvision.errors import (
    AccessDenied,
    ApiError,
    BatchTooLarge,
    ChainDepthExceeded,
    DanglingReference,
    InvalidClientTokenId,
    MalformedArn,
    NoSuchEntity,
    PolicyError,
    SchemaViolation,
    Throttling,
    UnknownPrincipal,
    UnsupportedOperation,
)

log = logging.getLogger(__name__)

_POLICY_MAP = {"type": "object", "additionalProperties": {"type": "object"}}
_ENTITY = {
    "name": {"type": "string", "minLength": 1},
    "path": {"type": "string"},
    "inline_policies": _POLICY_MAP,
    "attached_policies": {"type": "array", "items": {"type": "string"}},
}
FIXTURE_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["account_id", "users", "groups", "roles", "managed_policies", "credentials"],
    "properties": {
        "account_id": {"type": "string", "pattern": r"^\d{12}$"},
        "users": {"type": "array", "items": {
            "type": "object", "required": ["name"],
            "properties": {**_ENTITY, "groups": {"type": "array", "items": {"type": "string"}}},
        }},
        "groups": {"type": "array", "items": {"type": "object", "required": ["name"], "properties": _ENTITY}},
        "roles": {"type": "array", "items": {
            "type": "object", "required": ["name", "trust_policy"],
            "properties": {**_ENTITY, "trust_policy": {"type": "object"}},
        }},
        "managed_policies": {"type": "array", "items": {
            "type": "object", "required": ["arn", "default_version_id", "versions"],
            "properties": {
                "arn": {"type": "string"}, "name": {"type": "string"}, "path": {"type": "string"},
                "default_version_id": {"type": "string"},
                "versions": {"type": "object", "minProperties": 1, "additionalProperties": {"type": "object"}},
            },
        }},
        "credentials": {"type": "array", "items": {
            "type": "object", "required": ["user", "access_key_id", "secret_access_key"],
            "properties": {"user": {"type": "string"}, "access_key_id": {"type": "string"},
                           "secret_access_key": {"type": "string"}},
        }},
        "options": {"type": "object"},
        "scenario": {"type": "object"},
    },
}


@dataclass
class FixtureOptions:
    throttle_rate: float = 0.0
    throttle_seed: int = 0
    omit_default_flag: bool = False
    max_role_depth: int = MAX_ROLE_DEPTH
    # operations the backend refuses outright, to mimic partial service support
    unsupported: tuple[str, ...] = ()


@dataclass
class FixtureAccount(Account):
    """An :class:`Account` plus the credentials and bookkeeping a fixture backend needs."""

    credentials: dict[str, tuple[str, str]] = field(default_factory=dict)
    options: FixtureOptions = field(default_factory=FixtureOptions)
    scenario: dict[str, Any] | None = None
    raw: dict[str, Any] = field(default_factory=dict, repr=False)
    call_log: list[CallRecord] = field(default_factory=list, repr=False)
    _log_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def credential_for(self, user_name: str) -> Credential:
        for key, (secret, owner) in self.credentials.items():
            if owner == user_name:
                return Credential(key, secret)
        raise UnknownPrincipal(user_name)

    def record(self, **fields: Any) -> CallRecord:
        with self._log_lock:
            rec = CallRecord(seq=len(self.call_log), **fields)
            self.call_log.append(rec)
            return rec

    def log_snapshot(self) -> list[CallRecord]:
        with self._log_lock:
            return list(self.call_log)


def _doc(raw: Mapping[str, Any], where: str) -> PolicyDocument:
    try:
        return PolicyDocument.from_json(raw)
    except PolicyError as exc:
        raise SchemaViolation(f"{where}: {exc}") from exc


def load_fixture(source: str | Path | Mapping[str, Any]) -> FixtureAccount:
    """Load and validate a fixture from a path or an already-parsed mapping."""
    if isinstance(source, Mapping):
        raw = copy.deepcopy(dict(source))
    else:
        try:
            raw = json.loads(Path(source).read_text())
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"{source}: not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(raw, FIXTURE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaViolation(f"fixture: {exc.message} at {list(exc.absolute_path)}") from exc

    acct = raw["account_id"]
    account = FixtureAccount(account_id=acct, raw=raw, scenario=raw.get("scenario"))
    opts = raw.get("options", {})
    account.options = FixtureOptions(
        throttle_rate=float(opts.get("throttle_rate", 0.0)),
        throttle_seed=int(opts.get("throttle_seed", 0)),
        omit_default_flag=bool(opts.get("omit_default_flag", False)),
        max_role_depth=int(opts.get("max_role_depth", MAX_ROLE_DEPTH)),
        unsupported=tuple(opts.get("unsupported", ())),
    )

    for p in raw["managed_policies"]:
        try:
            arn = parse_arn(p["arn"])
        except MalformedArn as exc:
            raise SchemaViolation(str(exc)) from exc
        versions = {vid: _doc(d, f"{p['arn']}@{vid}") for vid, d in p["versions"].items()}
        if p["default_version_id"] not in versions:
            raise DanglingReference(f"{p['arn']}: default version {p['default_version_id']} not present")
        account.policies[p["arn"]] = ManagedPolicy(
            p["arn"], p.get("name", arn.name), p["default_version_id"], versions, p.get("path", "/"))

    def inline(ent: Mapping[str, Any]) -> dict[str, PolicyDocument]:
        return {n: _doc(d, f"{ent['name']}/{n}") for n, d in ent.get("inline_policies", {}).items()}

    def attached(ent: Mapping[str, Any]) -> list[str]:
        arns = list(ent.get("attached_policies", []))
        for a in arns:
            if a not in account.policies:
                raise DanglingReference(f"{ent['name']}: attached policy {a} is not defined")
        return arns

    for g in raw["groups"]:
        path = g.get("path", "/")
        account.groups[g["name"]] = IamGroup(g["name"], iam_arn(acct, "group", g["name"], path),
                                             inline(g), attached(g), path)
    for u in raw["users"]:
        path = u.get("path", "/")
        for g in u.get("groups", []):
            if g not in account.groups:
                raise DanglingReference(f"{u['name']}: group {g} is not defined")
        account.users[u["name"]] = IamUser(u["name"], iam_arn(acct, "user", u["name"], path),
                                           inline(u), attached(u), list(u.get("groups", [])), path)
    for r in raw["roles"]:
        path = r.get("path", "/")
        account.roles[r["name"]] = IamRole(r["name"], iam_arn(acct, "role", r["name"], path),
                                           _doc(r["trust_policy"], f"{r['name']} trust"),
                                           inline(r), attached(r), path)
    for c in raw["credentials"]:
        if c["user"] not in account.users:
            raise DanglingReference(f"credential {c['access_key_id']} names unknown user {c['user']}")
        account.credentials[c["access_key_id"]] = (c["secret_access_key"], c["user"])
    return account


def _page(items: list[Any], key: str, params: Mapping[str, Any]) -> dict[str, Any]:
    start = int(params.get("Marker") or 0)
    size = max(1, min(int(params.get("MaxItems") or PAGE_SIZE), PAGE_SIZE))
    chunk = items[start:start + size]
    out: dict[str, Any] = {key: chunk, "IsTruncated": start + size < len(items)}
    if out["IsTruncated"]:
        out["Marker"] = str(start + size)
    return out


def _unique_id(prefix: str, arn: str) -> str:
    return prefix + hashlib.sha256(arn.encode()).hexdigest()[:17].upper()


@dataclass
class _TempCredential:
    secret: str
    token: str
    role_arn: str
    identity_arn: str
    chain: tuple[str, ...]


class FixtureBackend:
    """Implements the IAM/STS operation subset over a :class:`FixtureAccount`."""

    def __init__(self, account: FixtureAccount, *, retry_base_delay: float = 0.0) -> None:
        self.account = account
        self.retry_base_delay = retry_base_delay
        self._lock = threading.Lock()
        self._temp: dict[str, _TempCredential] = {}
        self._counter = 0
        self._rng = random.Random(account.options.throttle_seed)
        self._handlers: dict[str, Callable[[Session, Mapping[str, Any]], dict[str, Any]]] = {
            name: getattr(self, f"_op_{name}") for name in OPERATIONS
        }

    @property
    def call_log(self) -> list[CallRecord]:
        return self.account.call_log

    # -- session plumbing ---------------------------------------------------

    def _next_id(self) -> str:
        with self._lock:
            self._counter += 1
            return f"req-{self._counter:07d}"

    def _resolve(self, credential: Credential) -> tuple[str, str, tuple[str, ...]]:
        """Map a credential to (principal ARN, identity ARN, chain) or raise InvalidClientTokenId."""
        acct = self.account
        if credential.access_key_id in acct.credentials:
            secret, user = acct.credentials[credential.access_key_id]
            if secret == credential.secret_access_key and credential.session_token is None:
                arn = acct.users[user].arn
                return arn, arn, ()
        temp = self._temp.get(credential.access_key_id)
        if temp and temp.secret == credential.secret_access_key and temp.token == credential.session_token:
            return temp.role_arn, temp.identity_arn, temp.chain
        raise InvalidClientTokenId("the security token included in the request is invalid")

    def session_for(self, credential: Credential) -> Session:
        principal, identity, chain = self._resolve(credential)
        self.get_caller_identity_raw(credential)
        return Session(credential, principal, identity, self.account.account_id, self, chain,
                       retry_base_delay=self.retry_base_delay)

    def get_caller_identity_raw(self, credential: Credential) -> dict[str, Any]:
        principal, identity, chain = self._resolve(credential)
        cid = self._next_id()
        self.account.record(principal_arn=principal, operation="GetCallerIdentity",
                            action="sts:GetCallerIdentity", resource="*", decision=Decision.ALLOW.value,
                            outcome="ok", correlation_id=cid)
        return {"UserId": _unique_id("AIDA", principal), "Account": self.account.account_id, "Arn": identity}

    # -- dispatch -----------------------------------------------------------

    def call(self, session: Session, request: ApiRequest) -> ApiResponse:
        cid = request.correlation_id or self._next_id()
        spec = OPERATIONS.get(request.operation)
        principal, _, _ = self._resolve(session.credential)
        if spec is None or request.operation in self.account.options.unsupported:
            self.account.record(principal_arn=principal, operation=request.operation, action="",
                                resource="", decision="", outcome=UnsupportedOperation.code, correlation_id=cid)
            raise UnsupportedOperation(f"{request.operation} is not supported", correlation_id=cid)
        if self.account.options.throttle_rate > 0:
            with self._lock:
                throttled = self._rng.random() < self.account.options.throttle_rate
            if throttled:
                self.account.record(principal_arn=principal, operation=request.operation, action=spec.action,
                                    resource="", decision="", outcome=Throttling.code, correlation_id=cid)
                raise Throttling("rate exceeded", retry_after=0.0, correlation_id=cid)

        params = request.params
        if request.operation == "GetCallerIdentity":
            payload = self.get_caller_identity_raw(session.credential)
            return ApiResponse(request.operation, payload, cid)

        resource = self._resource_for(spec.resource, params)
        if request.operation == "AssumeRole":
            decision = self._trust_decision(principal, params)
        else:
            decision = evaluate(self._statements(principal), spec.action, resource)
        outcome = "ok"
        try:
            if decision is not Decision.ALLOW:
                raise AccessDenied(f"{principal} is not authorized to perform {spec.action} on {resource}",
                                   correlation_id=cid)
            payload = self._handlers[request.operation](session, params)
        except ApiError as exc:
            exc.correlation_id = exc.correlation_id or cid
            outcome = exc.code
            raise
        finally:
            self.account.record(principal_arn=principal, operation=request.operation, action=spec.action,
                                resource=resource, decision=decision.value, outcome=outcome, correlation_id=cid)
        return ApiResponse(request.operation, payload, cid)

    def _statements(self, principal: str):
        return [s.statement for s in sourced_statements(self.account, principal)]

    def _trust_decision(self, principal: str, params: Mapping[str, Any]) -> Decision:
        role = self._role_by_arn(params.get("RoleArn", ""), strict=False)
        if role is None:
            return Decision.IMPLICIT_DENY
        return Decision.ALLOW if trust_admits(role.trust_policy, principal) else Decision.IMPLICIT_DENY

    def _resource_for(self, kind: str, params: Mapping[str, Any]) -> str:
        acct = self.account
        if kind == "*":
            return "*"
        if kind.endswith("/*"):
            return f"arn:aws:iam::{acct.account_id}:{kind}"
        if kind == "role_arn":
            return str(params.get("RoleArn", ""))
        if kind == "policy":
            return str(params.get("PolicyArn", ""))
        if kind == "source":
            return str(params.get("PolicySourceArn", ""))
        name_key = {"user": "UserName", "group": "GroupName", "role": "RoleName"}[kind]
        name = str(params.get(name_key, ""))
        table = {"user": acct.users, "group": acct.groups, "role": acct.roles}[kind]
        entity = table.get(name)
        return entity.arn if entity else iam_arn(acct.account_id, kind, name)

    # -- lookups ------------------------------------------------------------

    def _user(self, params: Mapping[str, Any]) -> IamUser:
        user = self.account.users.get(params.get("UserName", ""))
        if user is None:
            raise NoSuchEntity(f"user {params.get('UserName')!r} cannot be found")
        return user

    def _group(self, params: Mapping[str, Any]) -> IamGroup:
        group = self.account.groups.get(params.get("GroupName", ""))
        if group is None:
            raise NoSuchEntity(f"group {params.get('GroupName')!r} cannot be found")
        return group

    def _role(self, params: Mapping[str, Any]) -> IamRole:
        role = self.account.roles.get(params.get("RoleName", ""))
        if role is None:
            raise NoSuchEntity(f"role {params.get('RoleName')!r} cannot be found")
        return role

    def _role_by_arn(self, arn: str, strict: bool = True) -> IamRole | None:
        for role in self.account.roles.values():
            if role.arn == arn:
                return role
        if strict:
            raise NoSuchEntity(f"role {arn} cannot be found")
        return None

    def _policy(self, params: Mapping[str, Any]) -> ManagedPolicy:
        policy = self.account.policies.get(params.get("PolicyArn", ""))
        if policy is None:
            raise NoSuchEntity(f"policy {params.get('PolicyArn')} does not exist or is not attachable")
        return policy

    def _group_summary(self, g: IamGroup) -> dict[str, Any]:
        return {"GroupName": g.name, "GroupId": _unique_id("AGPA", g.arn), "Arn": g.arn, "Path": g.path}

    def _user_summary(self, u: IamUser) -> dict[str, Any]:
        return {"UserName": u.name, "UserId": _unique_id("AIDA", u.arn), "Arn": u.arn, "Path": u.path}

    def _role_summary(self, r: IamRole) -> dict[str, Any]:
        return {"RoleName": r.name, "RoleId": _unique_id("AROA", r.arn), "Arn": r.arn, "Path": r.path,
                "AssumeRolePolicyDocument": r.trust_policy.to_dict()}

    def _attached(self, arns: list[str]) -> list[dict[str, str]]:
        return [{"PolicyName": self.account.policies[a].name, "PolicyArn": a} for a in arns]

    def _attachments(self, arn: str) -> tuple[list[IamUser], list[IamGroup], list[IamRole]]:
        acct = self.account
        return ([u for u in acct.users.values() if arn in u.attached_policies],
                [g for g in acct.groups.values() if arn in g.attached_policies],
                [r for r in acct.roles.values() if arn in r.attached_policies])

    def _policy_summary(self, p: ManagedPolicy) -> dict[str, Any]:
        users, groups, roles = self._attachments(p.arn)
        return {"PolicyName": p.name, "PolicyId": _unique_id("ANPA", p.arn), "Arn": p.arn, "Path": p.path,
                "DefaultVersionId": p.default_version_id, "AttachmentCount": len(users) + len(groups) + len(roles),
                "IsAttachable": True}

    def _version(self, p: ManagedPolicy, vid: str, with_document: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {"VersionId": vid}
        if with_document:
            out["Document"] = p.versions[vid].to_dict()
        if not self.account.options.omit_default_flag:
            out["IsDefaultVersion"] = vid == p.default_version_id
        return out

    # -- operations ---------------------------------------------------------

    def _op_GetCallerIdentity(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        return self.get_caller_identity_raw(session.credential)

    def _op_AssumeRole(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        role = self._role_by_arn(params.get("RoleArn", ""))
        assert role is not None
        principal, _, chain = self._resolve(session.credential)
        new_chain = chain + (principal,)
        if len(new_chain) > self.account.options.max_role_depth:
            raise ChainDepthExceeded(f"role chain longer than {self.account.options.max_role_depth}")
        name = params.get("RoleSessionName") or "session"
        identity = f"arn:aws:sts::{self.account.account_id}:assumed-role/{role.name}/{name}"
        with self._lock:
            n = len(self._temp) + 1
        key = f"ASIA{hashlib.sha256(f'{identity}#{n}'.encode()).hexdigest()[:16].upper()}"
        secret = hashlib.sha256(f"secret#{key}".encode()).hexdigest()[:40]
        token = hashlib.sha256(f"token#{key}".encode()).hexdigest()
        with self._lock:
            self._temp[key] = _TempCredential(secret, token, role.arn, identity, new_chain)
        return {
            "Credentials": {"AccessKeyId": key, "SecretAccessKey": secret, "SessionToken": token,
                            "Expiration": "2099-01-01T00:00:00Z"},
            "AssumedRoleUser": {"AssumedRoleId": f"{_unique_id('AROA', role.arn)}:{name}", "Arn": identity},
        }

    def _op_ListGroupsForUser(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        user = self._user(params)
        return _page([self._group_summary(self.account.groups[g]) for g in user.groups], "Groups", params)

    def _op_ListGroups(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        return _page([self._group_summary(g) for g in self.account.groups.values()], "Groups", params)

    def _op_GetGroup(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        group = self._group(params)
        out = _page([self._user_summary(u) for u in self.account.members_of(group.name)], "Users", params)
        out["Group"] = self._group_summary(group)
        return out

    def _op_ListUserPolicies(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        return _page(list(self._user(params).inline_policies), "PolicyNames", params)

    def _op_GetUserPolicy(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        user = self._user(params)
        name = params.get("PolicyName", "")
        if name not in user.inline_policies:
            raise NoSuchEntity(f"user policy {name!r} cannot be found")
        return {"UserName": user.name, "PolicyName": name, "PolicyDocument": user.inline_policies[name].to_dict()}

    def _op_ListAttachedUserPolicies(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        return _page(self._attached(self._user(params).attached_policies), "AttachedPolicies", params)

    def _op_ListGroupPolicies(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        return _page(list(self._group(params).inline_policies), "PolicyNames", params)

    def _op_GetGroupPolicy(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        group = self._group(params)
        name = params.get("PolicyName", "")
        if name not in group.inline_policies:
            raise NoSuchEntity(f"group policy {name!r} cannot be found")
        return {"GroupName": group.name, "PolicyName": name, "PolicyDocument": group.inline_policies[name].to_dict()}

    def _op_ListAttachedGroupPolicies(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        return _page(self._attached(self._group(params).attached_policies), "AttachedPolicies", params)

    def _op_ListRoles(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        return _page([self._role_summary(r) for r in self.account.roles.values()], "Roles", params)

    def _op_ListRolePolicies(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        return _page(list(self._role(params).inline_policies), "PolicyNames", params)

    def _op_GetRolePolicy(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        role = self._role(params)
        name = params.get("PolicyName", "")
        if name not in role.inline_policies:
            raise NoSuchEntity(f"role policy {name!r} cannot be found")
        return {"RoleName": role.name, "PolicyName": name, "PolicyDocument": role.inline_policies[name].to_dict()}

    def _op_ListAttachedRolePolicies(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        return _page(self._attached(self._role(params).attached_policies), "AttachedPolicies", params)

    def _op_ListPolicies(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        scope = params.get("Scope", "All")
        only_attached = bool(params.get("OnlyAttached", False))
        policies = []
        for p in self.account.policies.values():
            if scope == "AWS" and not p.is_aws_managed or scope == "Local" and p.is_aws_managed:
                continue
            summary = self._policy_summary(p)
            if only_attached and summary["AttachmentCount"] == 0:
                continue
            policies.append(summary)
        return _page(policies, "Policies", params)

    def _op_GetPolicy(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        return {"Policy": self._policy_summary(self._policy(params))}

    def _op_ListPolicyVersions(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        policy = self._policy(params)
        versions = [{"VersionId": v, "IsDefaultVersion": v == policy.default_version_id} for v in policy.versions]
        return _page(versions, "Versions", params)

    def _op_GetPolicyVersion(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        policy = self._policy(params)
        vid = params.get("VersionId", "")
        if vid not in policy.versions:
            raise NoSuchEntity(f"policy version {vid} does not exist")
        return {"PolicyVersion": self._version(policy, vid)}

    def _op_ListEntitiesForPolicy(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        users, groups, roles = self._attachments(self._policy(params).arn)
        return {
            "PolicyUsers": [{"UserName": u.name, "UserId": _unique_id("AIDA", u.arn)} for u in users],
            "PolicyGroups": [{"GroupName": g.name, "GroupId": _unique_id("AGPA", g.arn)} for g in groups],
            "PolicyRoles": [{"RoleName": r.name, "RoleId": _unique_id("AROA", r.arn)} for r in roles],
            "IsTruncated": False,
        }

    def _op_GetAccountAuthorizationDetails(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        acct = self.account
        return {
            "UserDetailList": [{
                **self._user_summary(u), "GroupList": list(u.groups),
                "UserPolicyList": [{"PolicyName": n, "PolicyDocument": d.to_dict()} for n, d in u.inline_policies.items()],
                "AttachedManagedPolicies": self._attached(u.attached_policies),
            } for u in acct.users.values()],
            "GroupDetailList": [{
                **self._group_summary(g),
                "GroupPolicyList": [{"PolicyName": n, "PolicyDocument": d.to_dict()} for n, d in g.inline_policies.items()],
                "AttachedManagedPolicies": self._attached(g.attached_policies),
            } for g in acct.groups.values()],
            "RoleDetailList": [{
                **self._role_summary(r),
                "RolePolicyList": [{"PolicyName": n, "PolicyDocument": d.to_dict()} for n, d in r.inline_policies.items()],
                "AttachedManagedPolicies": self._attached(r.attached_policies),
            } for r in acct.roles.values()],
            "Policies": [{
                **self._policy_summary(p),
                "PolicyVersionList": [{"Document": p.versions[v].to_dict(), "VersionId": v,
                                       "IsDefaultVersion": v == p.default_version_id} for v in p.versions],
            } for p in acct.policies.values()],
            "IsTruncated": False,
        }

    def _op_SimulatePrincipalPolicy(self, session: Session, params: Mapping[str, Any]) -> dict[str, Any]:
        actions = list(params.get("ActionNames", []))
        if len(actions) > SIMULATION_BATCH_LIMIT:
            raise BatchTooLarge(f"at most {SIMULATION_BATCH_LIMIT} actions per simulation request")
        target = str(params.get("PolicySourceArn", ""))
        try:
            sourced = sourced_statements(self.account, target)
        except UnknownPrincipal as exc:
            raise NoSuchEntity(f"principal {target} cannot be found") from exc
        resources = list(params.get("ResourceArns") or ["*"])
        results = []
        for action in actions:
            for resource in resources:
                matched = [s for s in sourced if statement_applies(s.statement, action, resource)]
                denies = [s for s in matched if s.statement.effect == "Deny"]
                if denies:
                    decision, shown = "explicitDeny", denies
                elif matched:
                    decision, shown = "allowed", matched
                else:
                    decision, shown = "implicitDeny", []
                results.append({
                    "EvalActionName": action, "EvalResourceName": resource, "EvalDecision": decision,
                    "MatchedStatements": [{"SourcePolicyId": s.policy_name, "SourcePolicyType": s.source_type,
                                           "SourcePolicyOwner": s.owner} for s in shown],
                })
        return {"EvaluationResults": results, "IsTruncated": False}

    # -- convenience wrappers ------------------------------------------------

    def get_caller_identity(self, session: Session) -> dict[str, Any]:
        return session.call("GetCallerIdentity")

    def assume_role(self, session: Session, role_arn: str, session_name: str | None = None) -> Session:
        name = session_name or f"iamvision-{parse_arn(role_arn).name}"[:64]
        payload = session.call("AssumeRole", RoleArn=role_arn, RoleSessionName=name)
        creds = payload["Credentials"]
        credential = Credential(creds["AccessKeyId"], creds["SecretAccessKey"], creds["SessionToken"])
        principal, identity, chain = self._resolve(credential)
        return Session(credential, principal, identity, self.account.account_id, self, chain,
                       retry_base_delay=self.retry_base_delay)

    def simulate_principal_policy(self, session: Session, target_arn: str, actions: list[str]) -> dict[str, Any]:
        return session.call("SimulatePrincipalPolicy", PolicySourceArn=target_arn, ActionNames=list(actions))

    def invoke_action(self, session: Session, action: str) -> dict[str, Any]:
        """Authorize an arbitrary (usually non-IAM) action against ``*`` and return an empty result."""
        principal, _, _ = self._resolve(session.credential)
        cid = self._next_id()
        decision = evaluate(self._statements(principal), action, "*")
        outcome = "ok" if decision is Decision.ALLOW else AccessDenied.code
        self.account.record(principal_arn=principal, operation="Invoke", action=action, resource="*",
                            decision=decision.value, outcome=outcome, correlation_id=cid)
        if decision is not Decision.ALLOW:
            raise AccessDenied(f"{principal} is not authorized to perform {action}", correlation_id=cid)
        return {"Action": action, "ResponseMetadata": {"RequestId": cid}}

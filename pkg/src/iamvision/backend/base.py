"""Types shared by every API backend: credentials, sessions, requests and the call log."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Protocol

from iamvision.core.arn import parse_arn
from iamvision.errors import SchemaViolation, Throttling

log = logging.getLogger(__name__)

PAGE_SIZE = 100
SIMULATION_BATCH_LIMIT = 100
MAX_ROLE_DEPTH = 8


@dataclass(frozen=True)
class OperationSpec:
    name: str
    action: str
    # how the authorized resource is derived: 'user', 'group', 'role', 'policy', 'source',
    # or a wildcard family such as 'role/*'
    resource: str
    service: str = "iam"
    paginated_key: str | None = None


OPERATIONS: dict[str, OperationSpec] = {
    spec.name: spec
    for spec in (
        OperationSpec("GetCallerIdentity", "sts:GetCallerIdentity", "*", "sts"),
        OperationSpec("AssumeRole", "sts:AssumeRole", "role_arn", "sts"),
        OperationSpec("ListGroupsForUser", "iam:ListGroupsForUser", "user", paginated_key="Groups"),
        OperationSpec("ListGroups", "iam:ListGroups", "group/*", paginated_key="Groups"),
        OperationSpec("GetGroup", "iam:GetGroup", "group", paginated_key="Users"),
        OperationSpec("ListUserPolicies", "iam:ListUserPolicies", "user", paginated_key="PolicyNames"),
        OperationSpec("GetUserPolicy", "iam:GetUserPolicy", "user"),
        OperationSpec("ListAttachedUserPolicies", "iam:ListAttachedUserPolicies", "user", paginated_key="AttachedPolicies"),
        OperationSpec("ListGroupPolicies", "iam:ListGroupPolicies", "group", paginated_key="PolicyNames"),
        OperationSpec("GetGroupPolicy", "iam:GetGroupPolicy", "group"),
        OperationSpec("ListAttachedGroupPolicies", "iam:ListAttachedGroupPolicies", "group", paginated_key="AttachedPolicies"),
        OperationSpec("ListRoles", "iam:ListRoles", "role/*", paginated_key="Roles"),
        OperationSpec("ListRolePolicies", "iam:ListRolePolicies", "role", paginated_key="PolicyNames"),
        OperationSpec("GetRolePolicy", "iam:GetRolePolicy", "role"),
        OperationSpec("ListAttachedRolePolicies", "iam:ListAttachedRolePolicies", "role", paginated_key="AttachedPolicies"),
        OperationSpec("ListPolicies", "iam:ListPolicies", "policy/*", paginated_key="Policies"),
        OperationSpec("GetPolicy", "iam:GetPolicy", "policy"),
        OperationSpec("ListPolicyVersions", "iam:ListPolicyVersions", "policy", paginated_key="Versions"),
        OperationSpec("GetPolicyVersion", "iam:GetPolicyVersion", "policy"),
        OperationSpec("ListEntitiesForPolicy", "iam:ListEntitiesForPolicy", "policy"),
        OperationSpec("GetAccountAuthorizationDetails", "iam:GetAccountAuthorizationDetails", "*"),
        OperationSpec("SimulatePrincipalPolicy", "iam:SimulatePrincipalPolicy", "source"),
    )
}


@dataclass(frozen=True)
class Credential:
    access_key_id: str
    secret_access_key: str = field(repr=False)
    session_token: str | None = field(default=None, repr=False)


@dataclass(frozen=True)
class ApiRequest:
    operation: str
    params: dict[str, Any] = field(default_factory=dict)
    correlation_id: str | None = None


@dataclass(frozen=True)
class ApiResponse:
    operation: str
    payload: dict[str, Any]
    correlation_id: str


@dataclass(frozen=True)
class CallRecord:
    """One entry of a backend's append-only call log."""

    seq: int
    principal_arn: str
    operation: str
    action: str
    resource: str
    decision: str
    outcome: str
    correlation_id: str


class ApiBackend(Protocol):
    def session_for(self, credential: Credential) -> Session: ...

    def call(self, session: Session, request: ApiRequest) -> ApiResponse: ...

    def get_caller_identity(self, session: Session) -> dict[str, Any]: ...

    def assume_role(self, session: Session, role_arn: str) -> Session: ...

    def simulate_principal_policy(self, session: Session, target_arn: str, actions: list[str]) -> dict[str, Any]: ...

    def invoke_action(self, session: Session, action: str) -> dict[str, Any]: ...


@dataclass(eq=False)
class Session:
    """An authenticated principal bound to a backend.

    ``principal_arn`` is always the IAM user or role ARN; for role sessions
    ``identity_arn`` is the ``assumed-role`` ARN the service reports.
    ``chain`` lists the principals that led to this session, oldest first.
    """

    credential: Credential
    principal_arn: str
    identity_arn: str
    account_id: str
    backend: ApiBackend = field(repr=False)
    chain: tuple[str, ...] = ()
    retry_attempts: int = 5
    retry_base_delay: float = 0.05

    @property
    def kind(self) -> str:
        return parse_arn(self.principal_arn).resource_type

    @property
    def name(self) -> str:
        return parse_arn(self.principal_arn).name

    def call(self, operation: str, **params: Any) -> dict[str, Any]:
        """Issue one request, retrying throttled calls with exponential backoff."""
        request = ApiRequest(operation, params)
        for attempt in range(self.retry_attempts):
            try:
                return self.backend.call(self, request).payload
            except Throttling as exc:
                if attempt == self.retry_attempts - 1:
                    raise
                delay = max(exc.retry_after, self.retry_base_delay * (2 ** attempt))
                log.debug("throttled on %s, retrying in %.3fs", operation, delay)
                time.sleep(delay)
        raise AssertionError("unreachable")

    def paginate(self, operation: str, key: str, **params: Any) -> Iterator[Any]:
        marker: str | None = None
        while True:
            page = self.call(operation, **params, **({"Marker": marker} if marker else {}))
            yield from page.get(key, [])
            if not page.get("IsTruncated"):
                return
            marker = page["Marker"]

    def list_all(self, operation: str, key: str, **params: Any) -> list[Any]:
        return list(self.paginate(operation, key, **params))


def parse_credentials(text: str) -> list[Credential]:
    """Parse ``AccessKey,SecretKey[,SessionToken]`` lines; blank lines and ``#`` comments are skipped."""
    out: list[Credential] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (2, 3) or not all(parts):
            raise SchemaViolation(f"credentials line {lineno}: expected AccessKey,SecretKey[,SessionToken]")
        out.append(Credential(*parts))
    return out


def load_credentials(path: str | Path) -> list[Credential]:
    return parse_credentials(Path(path).read_text())

"""In-memory IAM account model: users, groups, roles and managed policies."""

from __future__ import annotations

from dataclasses import dataclass, field

from iamvision.core.arn import iam_arn, parse_arn
from iamvision.core.policy import PolicyDocument, PolicyStatement
from iamvision.errors import MalformedArn, UnknownPrincipal


@dataclass
class ManagedPolicy:
    arn: str
    name: str
    default_version_id: str
    versions: dict[str, PolicyDocument]
    path: str = "/"

    @property
    def is_aws_managed(self) -> bool:
        return parse_arn(self.arn).is_aws_managed

    @property
    def default_document(self) -> PolicyDocument:
        return self.versions[self.default_version_id]


@dataclass
class IamUser:
    name: str
    arn: str
    inline_policies: dict[str, PolicyDocument] = field(default_factory=dict)
    attached_policies: list[str] = field(default_factory=list)
    groups: list[str] = field(default_factory=list)
    path: str = "/"


@dataclass
class IamGroup:
    name: str
    arn: str
    inline_policies: dict[str, PolicyDocument] = field(default_factory=dict)
    attached_policies: list[str] = field(default_factory=list)
    path: str = "/"


@dataclass
class IamRole:
    name: str
    arn: str
    trust_policy: PolicyDocument
    inline_policies: dict[str, PolicyDocument] = field(default_factory=dict)
    attached_policies: list[str] = field(default_factory=list)
    path: str = "/"


@dataclass
class Account:
    """A single AWS account's IAM configuration, keyed by entity name and policy ARN."""

    account_id: str
    users: dict[str, IamUser] = field(default_factory=dict)
    groups: dict[str, IamGroup] = field(default_factory=dict)
    roles: dict[str, IamRole] = field(default_factory=dict)
    policies: dict[str, ManagedPolicy] = field(default_factory=dict)

    def user_arn(self, name: str, path: str = "/") -> str:
        return iam_arn(self.account_id, "user", name, path)

    def members_of(self, group_name: str) -> list[IamUser]:
        return [u for u in self.users.values() if group_name in u.groups]

    def entity_for(self, principal_arn: str) -> IamUser | IamRole:
        """Resolve a user, role or assumed-role ARN to the owning entity."""
        try:
            arn = parse_arn(principal_arn)
        except MalformedArn as exc:
            raise UnknownPrincipal(principal_arn) from exc
        if arn.account_id != self.account_id:
            raise UnknownPrincipal(principal_arn)
        if arn.resource_type == "user" and arn.name in self.users:
            return self.users[arn.name]
        if arn.resource_type in ("role", "assumed-role") and arn.name in self.roles:
            return self.roles[arn.name]
        raise UnknownPrincipal(principal_arn)


@dataclass(frozen=True)
class SourcedStatement:
    """A statement together with the policy and entity it came from."""

    statement: PolicyStatement
    source_type: str  # user | group | role | aws-managed | user-managed
    policy_name: str
    owner: str
    policy_arn: str | None = None


def sourced_statements(account: Account, principal_arn: str) -> list[SourcedStatement]:
    """Every identity statement that applies to a user or role, tagged with its source.

    For a user: its inline and attached policies, then each group's inline and
    attached policies. For a role (or one of its sessions): the role's own.
    """
    entity = account.entity_for(principal_arn)
    owners: list[tuple[str, IamUser | IamGroup | IamRole]] = [
        ("user" if isinstance(entity, IamUser) else "role", entity)
    ]
    if isinstance(entity, IamUser):
        owners += [("group", account.groups[g]) for g in entity.groups]
    out: list[SourcedStatement] = []
    for kind, owner in owners:
        for name, doc in owner.inline_policies.items():
            out.extend(SourcedStatement(s, kind, name, owner.name) for s in doc.statements)
        for arn in owner.attached_policies:
            policy = account.policies[arn]
            kind_m = "aws-managed" if policy.is_aws_managed else "user-managed"
            out.extend(SourcedStatement(s, kind_m, policy.name, owner.name, arn)
                       for s in policy.default_document.statements)
    return out


def effective_statements(account: Account, principal_arn: str) -> list[PolicyStatement]:
    return [s.statement for s in sourced_statements(account, principal_arn)]

"""Identity-policy evaluation: explicit deny beats allow beats implicit deny."""

from __future__ import annotations

import enum
import logging
import re
from functools import lru_cache
from typing import Any, Iterable, Mapping

from iamvision.core.policy import PolicyDocument, PolicyStatement

log = logging.getLogger(__name__)


class Decision(str, enum.Enum):
    ALLOW = "Allow"
    EXPLICIT_DENY = "ExplicitDeny"
    IMPLICIT_DENY = "ImplicitDeny"

    @property
    def allowed(self) -> bool:
        return self is Decision.ALLOW


@lru_cache(maxsize=8192)
def _compile(pattern: str, ignore_case: bool) -> re.Pattern[str]:
    body = "".join(".*" if c == "*" else "." if c == "?" else re.escape(c) for c in pattern)
    flags = re.DOTALL | (re.IGNORECASE if ignore_case else 0)
    return re.compile(body, flags)


def pattern_match(pattern: str, value: str, *, ignore_case: bool = False) -> bool:
    """Glob match where ``*`` spans any run of characters and ``?`` exactly one."""
    return _compile(pattern, ignore_case).fullmatch(value) is not None


def action_matches(pattern: str, action: str) -> bool:
    return pattern_match(pattern, action, ignore_case=True)


def resource_matches(pattern: str, resource: str) -> bool:
    return pattern_match(pattern, resource)


def statement_applies(stmt: PolicyStatement, action: str, resource: str) -> bool:
    """Whether the statement's action and resource clauses cover the request.

    Conditions are carried but never evaluated, so they count as satisfied.
    """
    if stmt.actions:
        if not any(action_matches(p, action) for p in stmt.actions):
            return False
    elif any(action_matches(p, action) for p in stmt.not_actions):
        return False
    if stmt.resources:
        return any(resource_matches(p, resource) for p in stmt.resources)
    if stmt.not_resources:
        return not any(resource_matches(p, resource) for p in stmt.not_resources)
    return True


def evaluate(statements: Iterable[PolicyStatement], action: str, resource: str = "*") -> Decision:
    allowed = False
    for stmt in statements:
        if not statement_applies(stmt, action, resource):
            continue
        if stmt.effect == "Deny":
            return Decision.EXPLICIT_DENY
        allowed = True
    return Decision.ALLOW if allowed else Decision.IMPLICIT_DENY


def _principal_values(principal: Any) -> list[str]:
    if principal == "*":
        return ["*"]
    if isinstance(principal, Mapping):
        out: list[str] = []
        for value in principal.values():
            out.extend([value] if isinstance(value, str) else list(value))
        return out
    if isinstance(principal, str):
        return [principal]
    return []


def principal_admits(entry: str, principal_arn: str) -> bool:
    """Whether one trust-policy principal entry names ``principal_arn``.

    An entry admits the exact ARN, ``*``, or the principal's account (as a
    12-digit id or ``arn:...:root``).
    """
    if entry == "*" or entry == principal_arn:
        return True
    account = principal_arn.split(":")[4] if principal_arn.count(":") >= 5 else ""
    return bool(account) and entry in (account, f"arn:aws:iam::{account}:root")


def trust_admits(trust: PolicyDocument | None, principal_arn: str, action: str = "sts:AssumeRole") -> bool:
    """Evaluate a role trust policy for ``principal_arn`` (an IAM user or role ARN)."""
    if trust is None:
        return False
    allowed = False
    for stmt in trust.statements:
        if not any(action_matches(p, action) for p in stmt.actions) and not (
            stmt.not_actions and not any(action_matches(p, action) for p in stmt.not_actions)
        ):
            continue
        if not any(principal_admits(e, principal_arn) for e in _principal_values(stmt.principal)):
            continue
        if stmt.effect == "Deny":
            return False
        allowed = True
    return allowed


def allowed_actions(statements: Iterable[PolicyStatement], actions: Iterable[str], resource: str = "*") -> set[str]:
    stmts = list(statements)
    return {a for a in actions if evaluate(stmts, a, resource) is Decision.ALLOW}

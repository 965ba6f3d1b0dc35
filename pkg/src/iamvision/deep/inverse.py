"""Discover policy attachments from the policy side instead of the entity side."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Iterable, Protocol, Sequence

from iamvision.errors import NoSuchEntity

log = logging.getLogger(__name__)


class Caller(Protocol):
    """Anything that can issue a request and returns ``None`` when it is refused.

    Missing targets still raise :class:`NoSuchEntity`.
    """

    def call(self, operation: str, **params: Any) -> dict[str, Any] | None: ...

    def list(self, operation: str, key: str, **params: Any) -> list[Any] | None: ...


@dataclass
class InverseResult:
    # (arn, name, default version id) for every attached policy, when ListPolicies succeeded
    universe: list[tuple[str, str, str | None]] | None = None
    # policy arn -> {"user"|"group"|"role": [names]}
    entities: dict[str, dict[str, list[str]]] = field(default_factory=dict)
    missing: list[str] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return self.universe is not None and all(a in self.entities for a, _, _ in self.universe)


def vendor_policy_arns() -> list[str]:
    text = resources.files("iamvision.data").joinpath("vendor_policy_arns.txt").read_text()
    return [line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")]


def _first(callers: Sequence[Caller], fn) -> Any:
    for caller in callers:
        out = fn(caller)
        if out is not None:
            return out
    return None


def inverse_enumerate(
    callers: Caller | Sequence[Caller],
    known_arns: Iterable[str] = (),
    vendor_arns: Iterable[str] | None = None,
    skip: Iterable[str] = (),
    listed: Iterable[str] | None = None,
) -> InverseResult:
    """Map policies to the entities they are attached to.

    The primary path lists every attached permissions policy and asks each one
    for its entities. If listing is refused, only ``known_arns`` plus the
    shipped AWS-managed ARNs are asked, so attachments of unseen customer
    policies stay invisible. Each request is tried with the callers in order.
    Passing ``listed`` (a universe learned earlier) skips the listing call.
    """
    pool = [callers] if not isinstance(callers, Sequence) else list(callers)
    result = InverseResult()
    if listed is not None:
        candidates = list(listed)
    elif (page := _first(pool, lambda c: c.list("ListPolicies", "Policies", Scope="All", OnlyAttached=True,
                                                PolicyUsageFilter="PermissionsPolicy"))) is not None:
        result.universe = [(p["Arn"], p["PolicyName"], p.get("DefaultVersionId")) for p in page]
        candidates = [a for a, _, _ in result.universe]
    else:
        vendors = vendor_policy_arns() if vendor_arns is None else list(vendor_arns)
        candidates = list(dict.fromkeys([*sorted(known_arns), *vendors]))
        log.debug("ListPolicies refused; falling back to %d candidate ARNs", len(candidates))

    done = set(skip)
    for arn in candidates:
        if arn in done:
            continue
        try:
            payload = _first(pool, lambda c: c.call("ListEntitiesForPolicy", PolicyArn=arn))
        except NoSuchEntity:
            payload = None
        if payload is None:
            result.missing.append(arn)
            continue
        result.entities[arn] = {
            "user": [u["UserName"] for u in payload.get("PolicyUsers", [])],
            "group": [g["GroupName"] for g in payload.get("PolicyGroups", [])],
            "role": [r["RoleName"] for r in payload.get("PolicyRoles", [])],
        }
    return result

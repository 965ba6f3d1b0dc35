"""Recover managed-policy versions by probing sequential version ids."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

from iamvision.backend.base import Session
from iamvision.errors import AccessDenied, NoSuchEntity, Unfuzzable

log = logging.getLogger(__name__)

AMBIGUOUS = "ambiguous"
DEFAULT_MAX_VERSION = 10


@dataclass
class VersionProbeResult:
    policy_arn: str
    versions: dict[str, dict[str, Any]] = field(default_factory=dict)
    default_version_id: str | None = None
    probes: int = 0

    @property
    def ambiguous(self) -> bool:
        return self.default_version_id == AMBIGUOUS


def fuzz_versions(session: Session, policy_arn: str, max_numeric_id: int = DEFAULT_MAX_VERSION) -> VersionProbeResult:
    """Call GetPolicyVersion for ``v1`` .. ``v{max_numeric_id}`` and collect what exists.

    The default is read from ``IsDefaultVersion``; if no response carries that
    flag the default is reported as ``"ambiguous"``. A denial on the very
    first probe raises :class:`Unfuzzable`.
    """
    result = VersionProbeResult(policy_arn)
    flag_seen = False
    for n in range(1, max_numeric_id + 1):
        vid = f"v{n}"
        result.probes += 1
        try:
            payload = session.call("GetPolicyVersion", PolicyArn=policy_arn, VersionId=vid)
        except AccessDenied as exc:
            if n == 1:
                raise Unfuzzable(f"GetPolicyVersion denied for {policy_arn}") from exc
            log.debug("probe %s of %s denied; continuing", vid, policy_arn)
            continue
        except NoSuchEntity:
            continue
        version = payload["PolicyVersion"]
        result.versions[vid] = version["Document"]
        if "IsDefaultVersion" in version:
            flag_seen = True
            if version["IsDefaultVersion"]:
                result.default_version_id = vid
    if result.versions and not flag_seen:
        result.default_version_id = AMBIGUOUS
    return result

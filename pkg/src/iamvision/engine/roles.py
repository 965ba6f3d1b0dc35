"""Transitive closure of role trust: which roles a set of principals can reach."""

from __future__ import annotations

from collections import deque
from typing import Any, Iterable, Mapping

from iamvision.core.evaluate import trust_admits
from iamvision.core.policy import PolicyDocument


def role_closure(trusts: Mapping[str, Mapping[str, Any] | PolicyDocument], seeds: Iterable[str]) -> dict[str, tuple[str, ...]]:
    """Role ARN -> the principal path that reaches it, starting at a seed.

    A role is reachable if its trust policy admits a seed or another reachable
    role. Breadth-first in sorted order, so each role gets a shortest path and
    ties resolve to the lexically first predecessor.
    """
    parsed = {arn: doc if isinstance(doc, PolicyDocument) else PolicyDocument.from_json(doc)
              for arn, doc in trusts.items()}
    reached: dict[str, tuple[str, ...]] = {}
    queue = deque((s, (s,)) for s in sorted(set(seeds)))
    while queue:
        principal, path = queue.popleft()
        for role in sorted(parsed):
            if role in reached or role == principal:
                continue
            if trust_admits(parsed[role], principal):
                reached[role] = path
                queue.append((role, path + (role,)))
    return reached

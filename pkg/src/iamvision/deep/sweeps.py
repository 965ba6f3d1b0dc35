"""Action-level sweeps: policy simulation and read-only invocation."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from iamvision.backend.base import SIMULATION_BATCH_LIMIT, Session
from iamvision.deep.catalog import ActionCatalog
from iamvision.errors import AccessDenied, ApiError

log = logging.getLogger(__name__)

DEFAULT_FUZZ_WORKERS = 8


@dataclass(frozen=True)
class PolicySource:
    """A policy that contributed to at least one allowed simulated action."""

    source_type: str  # user | group | role | aws-managed | user-managed
    name: str
    owner: str

    def arn(self, account_id: str) -> str | None:
        if self.source_type == "aws-managed":
            return f"arn:aws:iam::aws:policy/{self.name}"
        if self.source_type == "user-managed":
            return f"arn:aws:iam::{account_id}:policy/{self.name}"
        return None


@dataclass
class SimulationResult:
    target_arn: str
    allowed: set[str] = field(default_factory=set)
    denied: set[str] = field(default_factory=set)
    sources: dict[PolicySource, set[str]] = field(default_factory=dict)


def _batches(items: Sequence[str], size: int) -> Iterable[list[str]]:
    for i in range(0, len(items), size):
        yield list(items[i:i + size])


def sweep_simulation(
    session: Session,
    targets: Iterable[str],
    catalog: ActionCatalog | Sequence[str],
    batch_size: int = SIMULATION_BATCH_LIMIT,
) -> dict[str, SimulationResult]:
    """Simulate every catalog action for each target, ``batch_size`` actions per request."""
    actions = catalog.actions if isinstance(catalog, ActionCatalog) else list(catalog)
    batch_size = min(batch_size, SIMULATION_BATCH_LIMIT)
    out: dict[str, SimulationResult] = {}
    for target in targets:
        res = SimulationResult(target)
        for batch in _batches(actions, batch_size):
            payload = session.backend.simulate_principal_policy(session, target, batch)
            for ev in payload.get("EvaluationResults", []):
                action = ev["EvalActionName"]
                if ev["EvalDecision"] != "allowed":
                    res.denied.add(action)
                    continue
                res.allowed.add(action)
                for m in ev.get("MatchedStatements", []):
                    src = PolicySource(m.get("SourcePolicyType", ""), m.get("SourcePolicyId", ""),
                                       m.get("SourcePolicyOwner", ""))
                    res.sources.setdefault(src, set()).add(action)
        out[target] = res
    return out


def sweep_readonly_fuzz(
    session: Session,
    catalog: ActionCatalog,
    workers: int = DEFAULT_FUZZ_WORKERS,
) -> set[str]:
    """Invoke every read-only, argument-free catalog action and keep those that succeed."""
    candidates = catalog.read_only_no_args()

    def attempt(action: str) -> str | None:
        try:
            session.backend.invoke_action(session, action)
        except AccessDenied:
            return None
        except ApiError as exc:
            log.debug("fuzz of %s failed: %s", action, exc)
            return None
        return action

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results: list[Any] = list(pool.map(attempt, candidates))
    return {a for a in results if a is not None}

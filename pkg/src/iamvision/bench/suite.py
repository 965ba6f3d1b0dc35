"""Run scenarios end to end against their fixtures and score the resulting reports."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from iamvision.backend.base import Credential
from iamvision.backend.fixture import FixtureAccount, FixtureBackend
from iamvision.bench.scoring import CoverageScore, aggregate, build_weight_tree, score, score_fuzz
from iamvision.bench.truth import SCENARIO_IDS, load_scenario, scenario_catalog
from iamvision.deep.catalog import ActionCatalog
from iamvision.engine.report import VisionReport
from iamvision.engine.runner import EnumerationMode, Mode, RunConfig, cluster_credentials, run

log = logging.getLogger(__name__)


@dataclass
class ScenarioRun:
    scenario_id: int
    kind: str
    mode: str
    value: float
    calls: int
    seconds: float
    reports: list[VisionReport] = field(default_factory=list)
    coverage: CoverageScore | None = None

    def row(self) -> dict[str, object]:
        return {"scenario": f"S{self.scenario_id}", "kind": self.kind, "mode": self.mode,
                "score": round(self.value, 6), "calls": self.calls}


def scenario_mode(kind: str, mode: Mode | str, short_circuit: bool = True, tcrem: bool = True) -> EnumerationMode:
    """Simulation and fuzz scenarios switch their sweep on whatever the pooling mode."""
    return EnumerationMode(mode, tcrem=tcrem, short_circuit=short_circuit,
                           simulation=kind == "simulation", fuzz=kind == "fuzz", force_sweeps=True)


def credentials_for(account: FixtureAccount, users: Iterable[str]) -> list[Credential]:
    return [account.credential_for(u) for u in users]


def run_scenario(
    scenario_id: int,
    mode: Mode | str = Mode.CROSS,
    *,
    acting: Sequence[str] | None = None,
    short_circuit: bool = True,
    tcrem: bool = True,
    workers: int = 1,
    seed: int | None = None,
) -> ScenarioRun:
    """Enumerate with the credentials of ``acting`` (default: every target) and score the result.

    The truth is restricted to the acting users, so a lone credential is judged
    on its own vision only.
    """
    start = time.perf_counter()
    account, gt = load_scenario(scenario_id)
    users = list(acting) if acting is not None else gt.targets
    truth = gt.restrict([u for u in users if u in gt.users])
    catalog = scenario_catalog(account, truth.targets) if gt.kind == "fuzz" else ActionCatalog.load()
    config = RunConfig(mode=scenario_mode(gt.kind, mode, short_circuit, tcrem), workers=workers, seed=seed,
                       catalog=catalog)
    backend = FixtureBackend(account)
    reports = run(config, cluster_credentials(backend, credentials_for(account, users)))
    coverage = None
    if gt.kind == "fuzz":
        found = {a for r in reports for a in (r.fuzz_allowed or ())}
        value = score_fuzz(found, truth.expected_permissions or ())
    else:
        coverage = score(reports, truth, build_weight_tree(truth))
        value = coverage.value
    return ScenarioRun(scenario_id, gt.kind, Mode(mode).value, value, len(account.call_log),
                       time.perf_counter() - start, reports, coverage)


def run_suite(ids: Iterable[int] = SCENARIO_IDS, mode: Mode | str = Mode.CROSS, **kwargs) -> list[ScenarioRun]:
    return [run_scenario(i, mode, **kwargs) for i in ids]


def format_table(runs: Sequence[ScenarioRun]) -> str:
    lines = [f"{'scenario':<9}{'kind':<12}{'mode':<10}{'score':>8}{'calls':>8}"]
    for r in runs:
        lines.append(f"{'S' + str(r.scenario_id):<9}{r.kind:<12}{r.mode:<10}{r.value:>8.3f}{r.calls:>8}")
    if runs:
        lines.append(f"{'mean':<31}{aggregate(r.value for r in runs):>8.3f}")
    return "\n".join(lines)


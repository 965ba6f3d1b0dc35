"""Run enumeration over one or more credentials and produce a report per user.

Sessions that share an account form a pool. Within a pool every session works
every target's facets against one shared store, in rounds, until a round
teaches nothing new. Only then does the pool escalate, one step at a time, to
costlier sources: inverse attachment discovery, version probing, and (when
short-circuiting is off) the account dump. Any progress drops back to the
ordinary chains.
"""

from __future__ import annotations

import enum
import logging
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from iamvision.backend.base import ApiBackend, Credential, Session
from iamvision.core.evaluate import trust_admits
from iamvision.core.policy import PolicyDocument
from iamvision.deep.catalog import ActionCatalog
from iamvision.deep.inverse import inverse_enumerate, vendor_policy_arns
from iamvision.deep.sweeps import DEFAULT_FUZZ_WORKERS, sweep_readonly_fuzz, sweep_simulation
from iamvision.deep.versions import AMBIGUOUS, DEFAULT_MAX_VERSION, fuzz_versions
from iamvision.engine import chains
from iamvision.engine.agent import Agent
from iamvision.engine.report import SimulatedPolicy, SimulationView, VisionReport, entity_report
from iamvision.engine.roles import role_closure
from iamvision.engine.store import ENTITY_FACETS, EnvIamData, Facet, FacetStatus, Provenance
from iamvision.errors import AccessDenied, ApiError, BadFlags, InvalidClientTokenId, Unfuzzable

log = logging.getLogger(__name__)


class Mode(str, enum.Enum):
    SINGLE = "single"
    SEPARATE = "separate"
    CROSS = "cross"


@dataclass(frozen=True)
class EnumerationMode:
    """Which principals cooperate and which optional techniques run.

    Simulation and fuzz sweeps default to on for ``single`` and off otherwise;
    turning them on for another mode also requires ``force_sweeps``.
    """

    mode: Mode = Mode.CROSS
    tcrem: bool = True
    simulation: bool | None = None
    fuzz: bool | None = None
    short_circuit: bool = True
    force_sweeps: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        single = self.mode is Mode.SINGLE
        for name in ("simulation", "fuzz"):
            value = getattr(self, name)
            if value is None:
                object.__setattr__(self, name, single)
            elif value and not single and not self.force_sweeps:
                raise BadFlags(f"{name} sweeps run only in single mode unless force_sweeps is set")


@dataclass
class RunConfig:
    mode: EnumerationMode = field(default_factory=EnumerationMode)
    workers: int = 1
    seed: int | None = None
    catalog: ActionCatalog | None = None
    max_version_probe: int = DEFAULT_MAX_VERSION
    vendor_arns: Sequence[str] | None = None
    fuzz_workers: int = DEFAULT_FUZZ_WORKERS


def cluster_credentials(backend: ApiBackend, credentials: Iterable[Credential],
                        diagnostics: list[str] | None = None) -> dict[str, list[Session]]:
    """Authenticate each credential and group the sessions by account, preserving input order.

    Rejected credentials are skipped; a line for each is appended to ``diagnostics``.
    """
    clusters: dict[str, list[Session]] = {}
    for cred in credentials:
        try:
            session = backend.session_for(cred)
        except InvalidClientTokenId as exc:
            log.warning("credential %s rejected; skipping", cred.access_key_id)
            if diagnostics is not None:
                diagnostics.append(f"{cred.access_key_id}: {exc.code}")
            continue
        clusters.setdefault(session.account_id, []).append(session)
    return clusters


class Pool:
    """Sessions of one account enumerating a set of target users together."""

    MAX_LEVEL = 3

    def __init__(self, sessions: Sequence[Session], config: RunConfig) -> None:
        if not sessions:
            raise ValueError("a pool needs at least one session")
        self.config = config
        self.account_id = sessions[0].account_id
        self.env = EnvIamData(self.account_id)
        self.cancel = threading.Event()
        self.agents = [Agent(s, i, self.cancel) for i, s in enumerate(sessions)]
        self.targets = [s.name for s in sessions if s.kind == "user"]
        self.target_arns = {s.name: s.principal_arn for s in sessions if s.kind == "user"}
        self.role_agents: dict[str, Agent] = {a.principal_arn: a for a in self.agents if a.session.kind == "role"}
        self.failed_roles: set[str] = set()
        self.inverse_done: set[str] = set()
        self.inverse_refused: set[str] = set()
        self._inverse_agents = 0
        self.fuzz_attempted: set[tuple[str, int]] = set()
        self._rng = random.Random(config.seed) if config.seed is not None else None

    # -- scope ----------------------------------------------------------------

    def closure(self, users: Iterable[str] | None = None) -> dict[str, tuple[str, ...]]:
        names = self.targets if users is None else list(users)
        return role_closure(self.env.trusts(), [self.target_arns[u] for u in names])

    def in_scope(self) -> list[tuple[str, str]]:
        out = [("user", u) for u in self.targets]
        groups = sorted({g for u in self.targets for g in self.env.user_groups(u)})
        out += [("group", g) for g in groups]
        for arn in sorted(self.closure()):
            name = self.env.role_name(arn)
            if name:
                out.append(("role", name))
        return out

    def complete(self) -> bool:
        env = self.env
        for u in self.targets:
            for facet in (Facet.GROUP_MEMBERSHIP, Facet.ROLE_SCOPE):
                if env.status("user", u, facet) is not FacetStatus.COMPLETE:
                    return False
        return all(env.status(k, n, f) is FacetStatus.COMPLETE for k, n in self.in_scope() for f in ENTITY_FACETS)

    def ordered(self) -> list[Agent]:
        agents = list(self.agents)
        if self._rng is not None:
            self._rng.shuffle(agents)
        return agents

    # -- rounds ---------------------------------------------------------------

    def step(self, agent: Agent) -> None:
        """One pass of every chain for one agent."""
        if self.cancel.is_set():
            return
        if self.config.mode.short_circuit and not agent.probed:
            if chains.short_circuit_probe(agent, self.env):
                log.info("%r obtained the account dump; cancelling remaining chains", agent)
                self.cancel.set()
                return
        chains.list_roles(agent, self.env)
        for user in self.targets:
            chains.discover_groups(agent, self.env, user)
        for kind, name in self.in_scope():
            if self.cancel.is_set():
                return
            chains.enumerate_inline(agent, self.env, kind, name)
            chains.enumerate_attached(agent, self.env, kind, name)

    def join_roles(self) -> None:
        """Assume every in-scope role not yet held, using the lowest-index admitted session."""
        if not self.config.mode.tcrem or self.cancel.is_set():
            return
        trusts = self.env.trusts()
        for role_arn, path in sorted(self.closure().items(), key=lambda kv: (len(kv[1]), kv[0])):
            if role_arn in self.role_agents or role_arn in self.failed_roles:
                continue
            trust = PolicyDocument.from_json(trusts[role_arn])
            for agent in list(self.agents):
                if not trust_admits(trust, agent.principal_arn):
                    continue
                try:
                    session = agent.session.backend.assume_role(agent.session, role_arn)
                except ApiError as exc:
                    log.debug("%r could not assume %s: %s", agent, role_arn, exc)
                    continue
                joined = Agent(session, len(self.agents), self.cancel)
                self.agents.append(joined)
                self.role_agents[role_arn] = joined
                log.info("joined %s via %s", role_arn, agent.principal_arn)
                break
            else:
                self.failed_roles.add(role_arn)

    def run_chains(self) -> None:
        agents = self.ordered()
        if self.config.workers > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                list(pool.map(self.step, agents))
        else:
            for agent in agents:
                self.step(agent)
        self.join_roles()

    def run_inverse(self) -> None:
        env = self.env
        if not any(env.status(k, n, Facet.ATTACHED_LIST) is not FacetStatus.COMPLETE for k, n in self.in_scope()):
            return
        known = [a for a in sorted(env.policies) if not a.startswith("arn:aws:iam::aws:")]
        vendors = self.config.vendor_arns if self.config.vendor_arns is not None else vendor_policy_arns()
        universe = sorted(env.policy_universe) if env.policy_universe is not None else None
        if len(self.agents) != self._inverse_agents:
            # new sessions may be allowed what the old ones were refused
            self.inverse_refused.clear()
            self._inverse_agents = len(self.agents)
        result = inverse_enumerate(self.ordered(), known, vendors, skip=self.inverse_done | self.inverse_refused,
                                   listed=universe)
        if result.universe is not None:
            env.merge("policy_universe", policies=[(a, n) for a, n, _ in result.universe])
            for arn, name, default in result.universe:
                if default:
                    env.merge("policy_default", arn=arn, name=name, version_id=default,
                              provenance=Provenance.LISTED.value)
        for arn, ents in sorted(result.entities.items()):
            env.merge("policy_entities", arn=arn, users=ents["user"], groups=ents["group"], roles=ents["role"])
        self.inverse_done |= set(result.entities)
        self.inverse_refused |= set(result.missing)

    def run_version_fuzz(self) -> None:
        env = self.env
        pending = sorted({a for k, n in self.in_scope() for a in env.attachments(k, n)
                          if env.policy_view(a).default_version_id is None and not env.policy_view(a).ambiguous})
        for arn in pending:
            for agent in self.ordered():
                if (arn, agent.index) in self.fuzz_attempted or not agent.can("GetPolicyVersion"):
                    continue
                self.fuzz_attempted.add((arn, agent.index))
                try:
                    probe = fuzz_versions(agent.session, arn, self.config.max_version_probe)
                except Unfuzzable:
                    agent.denied.add("GetPolicyVersion")
                    continue
                except ApiError as exc:
                    log.debug("version probing of %s by %r failed: %s", arn, agent, exc)
                    continue
                fuzzed = Provenance.FUZZED.value
                for vid, doc in sorted(probe.versions.items()):
                    env.merge("policy_document", arn=arn, version_id=vid, document=doc, provenance=fuzzed)
                if probe.default_version_id == AMBIGUOUS:
                    env.merge("policy_ambiguous", arn=arn)
                elif probe.default_version_id:
                    env.merge("policy_default", arn=arn, name=None, version_id=probe.default_version_id,
                              provenance=fuzzed)
                break

    def run_dump_fallback(self) -> None:
        for agent in self.ordered():
            details = chains.fetch_authorization_details(agent)
            if details is not None:
                chains.merge_authorization_details(self.env, details)
                return

    def escalate(self, level: int) -> None:
        if level == 1:
            self.run_inverse()
        elif level == 2:
            self.run_version_fuzz()
        elif level == 3 and not self.config.mode.short_circuit:
            self.run_dump_fallback()

    def enumerate(self) -> None:
        level = 0
        while not self.cancel.is_set():
            mark = (self.env.revision, len(self.agents))
            if level == 0:
                self.run_chains()
            else:
                self.escalate(level)
            progressed = (self.env.revision, len(self.agents)) != mark
            if progressed and level > 0:
                level = 0
                continue
            if progressed:
                continue
            if self.complete() or level >= self.MAX_LEVEL:
                break
            level += 1

    # -- sweeps and reports ---------------------------------------------------

    def _agents_for(self, user: str) -> list[Agent]:
        own = [a for a in self.agents if a.principal_arn == self.target_arns[user]]
        return own + [a for a in self.agents if a not in own]

    def simulate(self, user: str) -> list[SimulationView] | None:
        catalog = self.config.catalog or ActionCatalog.load()
        targets = [self.target_arns[user], *sorted(self.closure([user]))]
        for agent in self._agents_for(user):
            if "SimulatePrincipalPolicy" in agent.denied:
                continue
            try:
                results = sweep_simulation(agent.session, targets, catalog)
            except AccessDenied:
                agent.denied.add("SimulatePrincipalPolicy")
                continue
            except ApiError as exc:
                log.debug("simulation by %r failed: %s", agent, exc)
                continue
            views = []
            for target in targets:
                res = results[target]
                policies = [SimulatedPolicy(src.source_type, src.name, src.owner, src.arn(self.account_id),
                                            sorted(actions, key=str.lower))
                            for src, actions in sorted(res.sources.items(),
                                                       key=lambda kv: (kv[0].source_type, kv[0].owner, kv[0].name))]
                views.append(SimulationView(target, sorted(res.allowed, key=str.lower), policies))
            return views
        return None

    def fuzz(self, user: str) -> list[str] | None:
        catalog = self.config.catalog or ActionCatalog.load()
        own = self._agents_for(user)[0]
        try:
            found = sweep_readonly_fuzz(own.session, catalog, self.config.fuzz_workers)
        except ApiError as exc:
            log.warning("read-only fuzzing for %s failed: %s", user, exc)
            return None
        return sorted(found, key=str.lower)

    def report(self, user: str) -> VisionReport:
        env = self.env
        user_report = entity_report(env, "user", user, (Facet.GROUP_MEMBERSHIP, Facet.ROLE_SCOPE))
        groups = [entity_report(env, "group", g) for g in env.user_groups(user)]
        roles = []
        for arn, path in sorted(self.closure([user]).items()):
            name = env.role_name(arn)
            if name is None:
                continue
            r = entity_report(env, "role", name)
            r.chain = list(path)
            r.assumed = arn in self.role_agents
            roles.append(r)
        return VisionReport(principal_arn=self.target_arns[user], account_id=self.account_id,
                            mode=self.config.mode.mode.value, user=user_report, groups=groups, roles=roles,
                            sessions=[a.session.identity_arn for a in self.agents])

    def run(self) -> list[VisionReport]:
        self.enumerate()
        reports = []
        for user in self.targets:
            rep = self.report(user)
            simulated = None
            if self.config.mode.simulation:
                simulated = self.simulate(user)
                rep.simulation = simulated
            if self.config.mode.fuzz and simulated is None:
                rep.fuzz_allowed = self.fuzz(user)
            reports.append(rep)
        return reports


def run(config: RunConfig, clusters: dict[str, list[Session]]) -> list[VisionReport]:
    """Enumerate every cluster and return one report per user credential, in input order."""
    reports: list[VisionReport] = []
    mode = config.mode.mode
    for account_id in clusters:
        sessions = clusters[account_id]
        if mode is Mode.CROSS:
            pools = [Pool(sessions, config)]
        else:
            pools = [Pool([s], config) for s in sessions if s.kind == "user"]
        for pool in pools:
            reports.extend(pool.run())
    return reports

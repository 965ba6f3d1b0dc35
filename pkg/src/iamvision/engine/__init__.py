"""Cooperative enumeration engine: shared store, chains, role closure and reports."""

from iamvision.engine.agent import Agent
from iamvision.engine.report import (
    SCHEMA_VERSION,
    AttachedPolicy,
    EntityReport,
    SimulatedPolicy,
    SimulationView,
    VisionReport,
    entity_report,
)
from iamvision.engine.roles import role_closure
from iamvision.engine.runner import EnumerationMode, Mode, Pool, RunConfig, cluster_credentials, run
from iamvision.engine.store import ENTITY_FACETS, EnvIamData, Facet, FacetStatus, Merge, Provenance

__all__ = [
    "ENTITY_FACETS", "SCHEMA_VERSION", "Agent", "AttachedPolicy", "EntityReport", "EnumerationMode", "EnvIamData",
    "Facet", "FacetStatus", "Merge", "Mode", "Pool", "Provenance", "RunConfig", "SimulatedPolicy", "SimulationView",
    "VisionReport", "cluster_credentials", "entity_report", "role_closure", "run",
]

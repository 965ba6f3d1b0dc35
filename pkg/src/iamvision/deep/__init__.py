"""Deep enumeration: version probing, inverse attachment discovery, diffs and sweeps."""

from iamvision.deep.catalog import ActionCatalog, CatalogEntry
from iamvision.deep.diff import Complement, Privilege, VersionDiff, diff_versions, expand
from iamvision.deep.inverse import InverseResult, inverse_enumerate, vendor_policy_arns
from iamvision.deep.sweeps import PolicySource, SimulationResult, sweep_readonly_fuzz, sweep_simulation
from iamvision.deep.versions import AMBIGUOUS, VersionProbeResult, fuzz_versions

__all__ = [
    "AMBIGUOUS", "ActionCatalog", "CatalogEntry", "Complement", "InverseResult", "PolicySource", "Privilege",
    "SimulationResult", "VersionDiff", "VersionProbeResult", "diff_versions", "expand", "fuzz_versions",
    "inverse_enumerate", "sweep_readonly_fuzz", "sweep_simulation", "vendor_policy_arns",
]

"""Benchmark harness: scenario fixtures, ground truth, weight trees and coverage scores."""

from iamvision.bench.scoring import (
    SIMULATION_WEIGHTS,
    STANDARD_WEIGHTS,
    CoverageScore,
    Leaf,
    WeightTree,
    aggregate,
    build_weight_tree,
    score,
    score_fuzz,
)
from iamvision.bench.suite import ScenarioRun, format_table, run_scenario, run_suite, scenario_mode
from iamvision.bench.truth import (
    SCENARIO_IDS,
    EntityTruth,
    GroundTruth,
    SimulatedTruth,
    UserTruth,
    ground_truth,
    load_scenario,
    reachable_roles,
    scenario_catalog,
)

__all__ = [
    "SCENARIO_IDS", "SIMULATION_WEIGHTS", "STANDARD_WEIGHTS", "CoverageScore", "EntityTruth", "GroundTruth", "Leaf",
    "ScenarioRun", "SimulatedTruth", "UserTruth", "WeightTree", "aggregate", "build_weight_tree", "format_table",
    "ground_truth", "load_scenario", "reachable_roles", "run_scenario", "run_suite", "scenario_catalog", "score",
    "score_fuzz", "scenario_mode",
]

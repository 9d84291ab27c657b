"""
Deterministic discrete-event simulation of the worker group.
"""

from simKernel.audit import GroundTruth, audit_workers
from simKernel.events import EventKind, EventQueue, SimEvent
from simKernel.kernel import Simulation, simulate
from simKernel.network import DropReason, NetworkModel, NetworkParams, Transmission
from simKernel.rng import RngStreams
from simKernel.scenario import (
    CrashSpec,
    JoinSpec,
    PartitionSpec,
    Scenario,
    TreeSource,
    load_scenario,
    load_tree,
    read_document,
    scenario_from_dict,
    scenarios_for,
)

__all__ = [
    "GroundTruth",
    "audit_workers",
    "EventKind",
    "EventQueue",
    "SimEvent",
    "Simulation",
    "simulate",
    "DropReason",
    "NetworkModel",
    "NetworkParams",
    "Transmission",
    "RngStreams",
    "CrashSpec",
    "JoinSpec",
    "PartitionSpec",
    "Scenario",
    "TreeSource",
    "load_scenario",
    "load_tree",
    "read_document",
    "scenario_from_dict",
    "scenarios_for",
]

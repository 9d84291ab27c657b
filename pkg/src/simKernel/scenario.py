"""
Scenario documents: everything that determines one simulated run.

A scenario is read from JSON or YAML. Keys are order-insensitive and any key
not listed here is rejected. Example (YAML)::

    tree: {seed: 7, nodes: 2000}
    processes: 3
    seed: 11
    network: {base_latency_ms: 1.5, per_byte_ms: 0.005, loss_prob: 0.01}
    crashes:
      - {process: 1, fraction: 0.85}
      - {process: 2, fraction: 0.85}
"""

import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple, Type, TypeVar, Union

import yaml

from bnbEngine import SelectionRule
from errorException import ConfigurationError
from membership import MembershipParams
from protocol import ProtocolParams
from simKernel.network import NetworkParams
from trees import (
    BasicTree,
    GeneratorParams,
    gen_random_tree,
    load_basic_tree,
    scale_granularity,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")

_SECTIONS = frozenset(
    {"tree", "network", "protocol", "membership", "crashes", "joins", "partitions"}
)


@dataclass(frozen=True)
class TreeSource:
    """A tree file, or a generator seed and target size."""

    path: Optional[str] = None
    seed: Optional[int] = None
    nodes: Optional[int] = None
    generator: GeneratorParams = GeneratorParams()

    def __post_init__(self) -> None:
        generated = self.seed is not None or self.nodes is not None
        if (self.path is None) == (not generated):
            raise ConfigurationError(
                "tree needs either 'path' or 'seed' and 'nodes'", "tree"
            )
        if generated and (self.seed is None or self.nodes is None):
            raise ConfigurationError(
                "generated trees need both 'seed' and 'nodes'", "tree"
            )
        if self.nodes is not None and self.nodes < 1:
            raise ConfigurationError("nodes must be >= 1", "tree.nodes", self.nodes)


@dataclass(frozen=True)
class CrashSpec:
    process: int
    time: Optional[float] = None
    fraction: Optional[float] = None


@dataclass(frozen=True)
class PartitionSpec:
    groups: Tuple[Tuple[int, ...], ...] = ()
    time: Optional[float] = None
    fraction: Optional[float] = None


@dataclass(frozen=True)
class JoinSpec:
    process: int
    time: float


def _check_when(kind: str, time: Optional[float], fraction: Optional[float]) -> None:
    if (time is None) == (fraction is None):
        raise ConfigurationError(
            f"{kind} needs exactly one of 'time' or 'fraction'", kind
        )
    if time is not None and time < 0:
        raise ConfigurationError(f"{kind} time must be >= 0", f"{kind}.time", time)
    if fraction is not None and not 0.0 <= fraction <= 1.0:
        raise ConfigurationError(
            f"{kind} fraction must lie in [0, 1]", f"{kind}.fraction", fraction
        )


@dataclass(frozen=True)
class Scenario:
    """A fully determined run: same scenario, same result."""

    tree: TreeSource
    granularity: float = 1.0
    processes: int = 1
    seed: int = 0
    rule: SelectionRule = SelectionRule.DEPTH_FIRST
    pruning: bool = True
    network: NetworkParams = NetworkParams()
    crashes: Tuple[CrashSpec, ...] = ()
    partitions: Tuple[PartitionSpec, ...] = ()
    joins: Tuple[JoinSpec, ...] = ()
    membership: MembershipParams = MembershipParams()
    protocol: ProtocolParams = ProtocolParams()
    audit: bool = False
    trace: Optional[str] = None
    max_sim_time: Optional[float] = None
    expect_optimum: Optional[float] = None
    oracle_node_budget: int = 1_000_000
    base_dir: str = field(default=".", compare=False)

    def __post_init__(self) -> None:
        if self.processes < 1:
            raise ConfigurationError(
                "processes must be >= 1", "processes", self.processes
            )
        if self.seed < 0:
            raise ConfigurationError("seed must be >= 0", "seed", self.seed)
        if not self.granularity > 0:
            raise ConfigurationError(
                "granularity must be positive", "granularity", self.granularity
            )
        if self.max_sim_time is not None and not self.max_sim_time > 0:
            raise ConfigurationError(
                "max_sim_time must be positive", "max_sim_time", self.max_sim_time
            )

        join_ids = [join.process for join in self.joins]
        if join_ids and not self.membership.enabled:
            raise ConfigurationError("joins need membership enabled", "joins")
        reused = any(pid < self.processes for pid in join_ids)
        if reused or len(set(join_ids)) != len(join_ids):
            raise ConfigurationError(
                "joining processes need fresh ids >= processes", "joins", join_ids
            )
        for join in self.joins:
            if join.time < 0:
                raise ConfigurationError(
                    "join time must be >= 0", "joins.time", join.time
                )

        known = set(self.process_ids)
        for crash in self.crashes:
            _check_when("crashes", crash.time, crash.fraction)
            if crash.process not in known:
                raise ConfigurationError(
                    "crash of an unknown process", "crashes.process", crash.process
                )
        for cut in self.partitions:
            _check_when("partitions", cut.time, cut.fraction)
            members = [pid for group in cut.groups for pid in group]
            strangers = [pid for pid in members if pid not in known]
            if strangers:
                raise ConfigurationError(
                    "partition names an unknown process",
                    "partitions.groups",
                    strangers[0],
                )

        if self.membership.enabled:
            servers = set(self.membership.gossip_servers)
            if not servers <= set(range(self.processes)):
                raise ConfigurationError(
                    "gossip servers must be initial processes",
                    "membership.gossip_servers",
                    sorted(servers),
                )
            if servers <= {crash.process for crash in self.crashes}:
                raise ConfigurationError(
                    "at least one gossip server must never crash",
                    "membership.gossip_servers",
                )

    @property
    def process_ids(self) -> Tuple[int, ...]:
        return tuple(range(self.processes)) + tuple(join.process for join in self.joins)

    @property
    def needs_baseline(self) -> bool:
        """True when some fault time is a fraction of the fault-free runtime."""
        return any(c.fraction is not None for c in self.crashes) or any(
            p.fraction is not None for p in self.partitions
        )

    def fault_free(self) -> "Scenario":
        return replace(
            self, crashes=(), partitions=(), joins=(), trace=None, audit=False
        )

    def with_fault_times(self, completion_time: float) -> "Scenario":
        """Turn fractional fault times into absolute ones."""
        crashes = tuple(
            CrashSpec(c.process, time=c.fraction * completion_time)
            if c.fraction is not None
            else c
            for c in self.crashes
        )
        partitions = tuple(
            PartitionSpec(p.groups, time=p.fraction * completion_time)
            if p.fraction is not None
            else p
            for p in self.partitions
        )
        return replace(self, crashes=crashes, partitions=partitions)

    def to_dict(self) -> Dict[str, Any]:
        """Plain-data form, as printed in reproducibility headers."""
        data = asdict(self)
        data.pop("base_dir")
        data["rule"] = self.rule.value
        return json.loads(json.dumps(data))


def load_tree(scenario: Scenario) -> BasicTree:
    """Read or generate the scenario's tree and apply its granularity."""
    source = scenario.tree
    if source.path is not None:
        path = Path(source.path)
        if not path.is_absolute():
            path = Path(scenario.base_dir) / path
        tree = load_basic_tree(path)
    else:
        assert source.seed is not None and source.nodes is not None
        tree = gen_random_tree(source.seed, source.nodes, source.generator)
    return scale_granularity(tree, scenario.granularity)


def _build(cls: Type[T], section: str, data: Any, **overrides: Any) -> T:
    if not isinstance(data, Mapping):
        raise ConfigurationError(f"'{section}' must be a mapping", section, data)
    allowed = {f.name for f in fields(cls)}  # type: ignore[arg-type]
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigurationError(
            f"unknown key in '{section}'", f"{section}.{unknown[0]}", unknown
        )
    values = {**data, **overrides}
    try:
        return cls(**values)
    except TypeError as e:
        raise ConfigurationError(f"invalid '{section}' section: {e}", section) from e


def _build_list(cls: Type[T], section: str, data: Any) -> Tuple[T, ...]:
    if data is None:
        return ()
    if not isinstance(data, list):
        raise ConfigurationError(f"'{section}' must be a list", section, data)
    return tuple(_build(cls, section, item) for item in data)


def _groups(raw: Any) -> Tuple[Tuple[int, ...], ...]:
    if not isinstance(raw, list):
        raise ConfigurationError(
            "partition groups must be a list of lists", "partitions.groups", raw
        )
    return tuple(tuple(int(pid) for pid in group) for group in raw)


def scenario_from_dict(data: Any, base_dir: Union[str, Path] = ".") -> Scenario:
    """Validate a parsed document and build the scenario."""
    if not isinstance(data, Mapping):
        raise ConfigurationError("scenario document must be a mapping", "scenario")
    allowed = {f.name for f in fields(Scenario)} - {"base_dir"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigurationError("unknown scenario key", unknown[0], unknown)
    if "tree" not in data:
        raise ConfigurationError("scenario needs a 'tree' section", "tree")

    raw_tree = data["tree"]
    if not isinstance(raw_tree, Mapping):
        raise ConfigurationError("'tree' must be a mapping", "tree", raw_tree)
    tree = _build(
        TreeSource,
        "tree",
        raw_tree,
        generator=_build(
            GeneratorParams, "tree.generator", raw_tree.get("generator") or {}
        ),
    )

    values: Dict[str, Any] = {key: data[key] for key in data if key not in _SECTIONS}
    if "rule" in values:
        values["rule"] = SelectionRule.parse(values["rule"])
    if "network" in data:
        values["network"] = _build(NetworkParams, "network", data["network"])
    if "protocol" in data:
        values["protocol"] = _build(ProtocolParams, "protocol", data["protocol"])
    if "membership" in data:
        raw = data["membership"]
        servers = raw.get("gossip_servers") if isinstance(raw, Mapping) else None
        extra: Dict[str, Any] = {}
        if servers is not None:
            extra["gossip_servers"] = tuple(int(s) for s in servers)
        values["membership"] = _build(MembershipParams, "membership", raw, **extra)
    values["crashes"] = _build_list(CrashSpec, "crashes", data.get("crashes"))
    values["joins"] = _build_list(JoinSpec, "joins", data.get("joins"))
    partitions = _build_list(PartitionSpec, "partitions", data.get("partitions"))
    values["partitions"] = tuple(
        replace(p, groups=_groups(list(p.groups))) for p in partitions
    )

    try:
        return Scenario(tree=tree, base_dir=str(base_dir), **values)
    except TypeError as e:
        raise ConfigurationError(f"invalid scenario: {e}", "scenario") from e


def read_document(path: Union[str, Path]) -> Any:
    """Parse a JSON or YAML file, chosen by suffix."""
    document = Path(path)
    try:
        text = document.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(
            f"cannot read {document}: {e}", "scenario", str(document)
        ) from e
    try:
        if document.suffix.lower() == ".json":
            return json.loads(text)
        if document.suffix.lower() in (".yaml", ".yml"):
            return yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigurationError(
            f"cannot parse {document}: {e}", "scenario", str(document)
        ) from e
    raise ConfigurationError(
        "scenario files must end in .json, .yaml or .yml", "scenario", str(document)
    )


def load_scenario(path: Union[str, Path]) -> Scenario:
    scenario = scenario_from_dict(read_document(path), Path(path).parent)
    logger.debug("Loaded scenario", extra={"path": str(path), "seed": scenario.seed})
    return scenario


def scenarios_for(
    base: Scenario, processors: Iterable[int], seeds: Iterable[int]
) -> Tuple[Scenario, ...]:
    """The cross product of process counts and seeds over a base scenario."""
    return tuple(
        replace(base, processes=count, seed=seed)
        for count in processors
        for seed in seeds
    )

"""
The discrete-event simulation of a group of workers.

Each process is busy while it computes a node or pays for contraction.
Messages reaching a busy process wait in its inbox and are handled once the
current node is done; timers fire on time regardless. Ties between events at
the same instant are broken by enqueue order, so a scenario always produces
the same run.
"""

import logging
import math
from collections import Counter, deque
from typing import Deque, Dict, List, Optional, Set

from bnbEngine import PoolEntry, sequential_solve
from errorException import AuditViolationError, ConfigurationError, log_simulation_error
from membership import MembershipView
from metrics import Outcome, RunResult, TraceRecorder
from protocol import (
    HEADER_BYTES,
    Effect,
    Message,
    MessageKind,
    Timer,
    WorkerState,
    WorkerStatus,
)
from simKernel.audit import GroundTruth, audit_workers
from simKernel.events import EventKind, EventQueue, SimEvent
from simKernel.network import DropReason, NetworkModel
from simKernel.rng import RngStreams
from simKernel.scenario import Scenario, load_tree
from treecode import CompletedTable, ProblemCode, code_bytes, format_code
from trees import BasicTree

logger = logging.getLogger(__name__)

GUARD_FACTOR = 100.0
GUARD_FLOOR = 600.0


class Simulation:
    """One scenario, run on one tree."""

    def __init__(
        self,
        scenario: Scenario,
        tree: BasicTree,
        trace: Optional[TraceRecorder] = None,
    ) -> None:
        self.scenario = scenario
        self.tree = tree
        self.trace = trace
        self.streams = RngStreams(scenario.seed)
        self.network = NetworkModel(scenario.network, self.streams.stream("loss"))
        self.params = scenario.protocol.with_request_timeout(
            10 * scenario.network.latency(HEADER_BYTES)
        )
        self.guard = scenario.max_sim_time or max(
            GUARD_FACTOR * tree.total_cost, GUARD_FLOOR
        )
        self.truth = GroundTruth(tree)

        self.queue = EventQueue()
        self.now = 0.0
        self.events_processed = 0
        self.workers: Dict[int, WorkerState] = {}
        self._busy_until: Dict[int, float] = {}
        self._inbox: Dict[int, Deque[Message]] = {}
        self._started_at: Dict[int, float] = {}
        self._ended_at: Dict[int, float] = {}
        self._pending_joins = 0
        self._status_counts: Counter = Counter()
        self._started = False
        self._outcome: Optional[Outcome] = None

        # Codes carried by grants not yet handled by their receiver.
        self._grants: Counter = Counter()
        self._work_lost = False

        # Storage accounting over live processes.
        self._held: Dict[int, CompletedTable] = {}
        self._storage: Dict[int, int] = {}
        self._refcount: Counter = Counter()
        self._distinct_bytes = 0
        self._table_bytes = 0
        self._storage_total = 0
        self.storage_peak = 0
        self.redundant_at_peak = 0

    # -- observer hooks used by workers -------------------------------------

    def expanded(self, process: int, entry: PoolEntry, now: float) -> None:
        if not self.truth.note_expanded(entry.node_id):
            cost = self.tree.nodes[entry.node_id].time_cost
            self.workers[process].counters.redundant_work_time += cost
        if self.trace is not None:
            self.trace.record(now, process, "expand", code=format_code(entry.code))

    def eliminated(
        self, process: int, code: ProblemCode, node_id: int, now: float
    ) -> None:
        self.truth.note_eliminated(node_id)

    # -- setup ----------------------------------------------------------------

    def _schedule_faults(self) -> None:
        for crash in self.scenario.crashes:
            if crash.time is None:
                raise ConfigurationError(
                    "crash time still fractional; resolve it against a baseline run",
                    "crashes",
                )
            self.inject_crash(crash.process, crash.time)
        for cut in self.scenario.partitions:
            if cut.time is None:
                raise ConfigurationError(
                    "partition time still fractional; resolve it against a baseline",
                    "partitions",
                )
            self.queue.push(cut.time, EventKind.PARTITION, groups=cut.groups)
        for joiner in self.scenario.joins:
            self.queue.push(joiner.time, EventKind.JOIN, process=joiner.process)
            self._pending_joins += 1

    def inject_crash(self, process: int, time: float) -> None:
        """Schedule a halt of ``process`` at ``time``; crashing twice is a no-op."""
        if time < self.now:
            raise ConfigurationError(
                "crash time lies in the past", "crashes.time", time
            )
        self.queue.push(time, EventKind.CRASH, process=process)

    def _make_view(self, process: int, joining: bool) -> MembershipView:
        membership = self.scenario.membership
        if not membership.enabled:
            return MembershipView.static(process, range(self.scenario.processes))
        if joining:
            return MembershipView.seeded(process, membership.gossip_servers, self.now)
        return MembershipView.seeded(process, range(self.scenario.processes), self.now)

    def _start_worker(self, process: int, joining: bool = False) -> None:
        worker = WorkerState(
            process,
            self.tree,
            self.params,
            self._make_view(process, joining),
            self.streams.stream("targets", process),
            rule=self.scenario.rule,
            pruning=self.scenario.pruning,
            membership=self.scenario.membership,
            observer=self,
            holds_root=process == 0 and not joining,
            joining=joining,
        )
        self.workers[process] = worker
        self._busy_until[process] = self.now
        self._inbox[process] = deque()
        self._started_at[process] = self.now
        self._storage[process] = 0
        self._held[process] = CompletedTable()
        self._status_counts[WorkerStatus.RUNNING] += 1
        self._apply(worker, worker.start(self.now))
        self._advance(worker)

    def start(self) -> None:
        if self._started:
            return
        self._started = True
        logger.info(
            "Simulation starting",
            extra={
                "seed": self.scenario.seed,
                "processes": self.scenario.processes,
                "nodes": len(self.tree),
            },
        )
        self._schedule_faults()
        for process in range(self.scenario.processes):
            self._start_worker(process)

    # -- effects --------------------------------------------------------------

    def _send(self, msg: Message) -> None:
        sender = self.workers[msg.sender]
        sender.counters.count_message(msg.kind.value, msg.size_bytes)
        transmission = self.network.transmit(msg, self.now)
        if self.trace is not None:
            self.trace.record(
                self.now,
                msg.sender,
                "send",
                kind=msg.kind.value,
                size_bytes=msg.size_bytes,
            )
        if msg.kind is MessageKind.WORK_GRANT:
            self._grants.update(msg.codes)
        if transmission.dropped is not None:
            self._settle_grant(msg, lost=True)
            sender.counters.messages_dropped += 1
            if self.trace is not None:
                reason = transmission.dropped.value
                self.trace.record(self.now, msg.sender, "drop", kind=reason)
            return
        self.queue.push(
            transmission.deliver_at,  # type: ignore[arg-type]
            EventKind.DELIVER,
            process=msg.receiver,
            message=msg,
        )

    def _settle_grant(self, msg: Message, lost: bool = False) -> None:
        if msg.kind is not MessageKind.WORK_GRANT:
            return
        self._grants.subtract(msg.codes)
        for code in msg.codes:
            if self._grants[code] <= 0:
                self._grants.pop(code, None)
        if lost and msg.codes:
            self._work_lost = True

    def _apply(self, worker: WorkerState, effects: List[Effect]) -> None:
        for effect in effects:
            if isinstance(effect, Timer):
                self.queue.push(
                    effect.at, EventKind.TIMER, process=worker.id, timer=effect
                )
            else:
                self._send(effect)
        if worker.status is WorkerStatus.TERMINATED and worker.id not in self._ended_at:
            self._ended_at[worker.id] = self.now
            self._status_counts[WorkerStatus.RUNNING] -= 1
            self._status_counts[WorkerStatus.TERMINATED] += 1
            if self.trace is not None:
                self.trace.record(self.now, worker.id, "terminate")
        self._account_storage(worker)

    def _busy(self, worker: WorkerState) -> bool:
        return worker.current is not None or self._busy_until[worker.id] > self.now

    def _occupy(self, worker: WorkerState, duration: float) -> None:
        self._busy_until[worker.id] = self.now + duration
        self.queue.push(self.now + duration, EventKind.WAKE, process=worker.id)

    def _advance(self, worker: WorkerState) -> None:
        """Start the next node on a free worker, or let it act idle."""
        while worker.running and not self._busy(worker):
            entry = worker.begin_step(self.now)
            if entry is not None:
                cost = self.tree.nodes[entry.node_id].time_cost
                self._occupy(worker, cost + worker.take_overhead())
                return
            self._apply(worker, worker.flush(self.now))
            self._apply(worker, worker.idle_actions(self.now))
            if worker.pool:
                continue
            overhead = worker.take_overhead()
            if overhead > 0:
                self._occupy(worker, overhead)
            return

    # -- storage --------------------------------------------------------------

    def _account_storage(self, worker: WorkerState) -> None:
        process = worker.id
        crashed = worker.status is WorkerStatus.CRASHED
        table = CompletedTable() if crashed else worker.table
        storage = 0 if crashed else worker.storage_bytes
        held = self._held[process]
        if table is not held:
            for code in held.codes - table.codes:
                self._refcount[code] -= 1
                if self._refcount[code] == 0:
                    del self._refcount[code]
                    self._distinct_bytes -= code_bytes(code)
            for code in table.codes - held.codes:
                if self._refcount[code] == 0:
                    self._distinct_bytes += code_bytes(code)
                self._refcount[code] += 1
            self._table_bytes += table.size_bytes - held.size_bytes
            self._held[process] = table
        self._storage_total += storage - self._storage[process]
        self._storage[process] = storage
        if self._storage_total > self.storage_peak:
            self.storage_peak = self._storage_total
            self.redundant_at_peak = self._table_bytes - self._distinct_bytes
            self._note_shared_storage()

    def _note_shared_storage(self) -> None:
        """Record, per process, the table bytes it shares with another process."""
        for process, table in self._held.items():
            shared = sum(
                code_bytes(code) for code in table.codes if self._refcount[code] > 1
            )
            self.workers[process].counters.redundant_storage_bytes = shared

    # -- event dispatch -------------------------------------------------------

    def _trace_event(self, event: SimEvent) -> None:
        if self.trace is None:
            return
        kind = code = size = None
        if event.message is not None:
            kind = event.message.kind.value
            size = event.message.size_bytes
            if event.message.codes:
                code = format_code(event.message.codes[0])
        elif event.timer is not None:
            kind = event.timer.name.value
        self.trace.record(event.time, event.process, event.kind.value, kind, code, size)

    def _dispatch(self, event: SimEvent) -> None:
        kind = event.kind
        if kind is EventKind.PARTITION:
            groups = event.groups or ()
            self.network.set_partition(groups)
            logger.warning(
                "Network partition changed" if groups else "Network partition healed",
                extra={"sim_time": self.now, "groups": [list(g) for g in groups]},
            )
            return
        if kind is EventKind.JOIN:
            self._pending_joins -= 1
            if event.process not in self.workers:
                logger.info(
                    "Process joining",
                    extra={"worker": event.process, "sim_time": self.now},
                )
                assert event.process is not None
                self._start_worker(event.process, joining=True)
            return

        worker = self.workers.get(event.process)  # type: ignore[arg-type]
        if kind is EventKind.DELIVER and (
            worker is None or worker.status is WorkerStatus.CRASHED
        ):
            msg = event.message
            assert msg is not None
            self._settle_grant(msg, lost=True)
            self.workers[msg.sender].counters.messages_dropped += 1
            if self.trace is not None:
                reason = DropReason.DEAD_RECEIVER.value
                self.trace.record(self.now, msg.receiver, "drop", kind=reason)
            return
        if worker is None or worker.status is WorkerStatus.CRASHED:
            return

        if kind is EventKind.CRASH:
            self._crash(worker)
        elif kind is EventKind.DELIVER:
            assert event.message is not None
            if self._busy(worker):
                self._inbox[worker.id].append(event.message)
                return
            self._settle_grant(event.message)
            self._apply(worker, worker.handle(event.message, self.now))
            self._advance(worker)
        elif kind is EventKind.TIMER:
            assert event.timer is not None
            self._apply(worker, worker.on_timer(event.timer, self.now))
            if not self._busy(worker):
                self._advance(worker)
        elif kind is EventKind.WAKE:
            self._wake(worker)

    def _wake(self, worker: WorkerState) -> None:
        if self._busy_until[worker.id] > self.now:
            return
        # Expand, drain the inbox, then report and check termination.
        worker.expand(self.now)
        inbox = self._inbox[worker.id]
        while inbox and worker.running:
            msg = inbox.popleft()
            self._settle_grant(msg)
            self._apply(worker, worker.receive(msg, self.now))
        for msg in inbox:
            self._settle_grant(msg)
        inbox.clear()
        self._apply(worker, worker.flush(self.now))
        self._advance(worker)

    def _crash(self, worker: WorkerState) -> None:
        self._status_counts[worker.status] -= 1
        self._status_counts[WorkerStatus.CRASHED] += 1
        worker.crash()
        self._work_lost = True
        for msg in self._inbox[worker.id]:
            self._settle_grant(msg, lost=True)
        self._inbox[worker.id].clear()
        self._ended_at.setdefault(worker.id, self.now)
        self._account_storage(worker)
        logger.warning(
            "Process crashed", extra={"worker": worker.id, "sim_time": self.now}
        )

    # -- main loop ------------------------------------------------------------

    def _settled(self) -> Optional[Outcome]:
        if not self._started or self._status_counts[WorkerStatus.RUNNING] > 0:
            return None
        if self._status_counts[WorkerStatus.TERMINATED] > 0:
            return Outcome.TERMINATED
        if self._pending_joins:
            return None
        return Outcome.TOTAL_FAILURE

    def _process_next(self) -> None:
        event = self.queue.pop()
        self.now = event.time
        self.events_processed += 1
        self._trace_event(event)
        self._dispatch(event)
        if self.scenario.audit:
            try:
                in_flight = None if self._work_lost else list(self._grants)
                audit_workers(self.truth, self.workers.values(), self.now, in_flight)
            except AuditViolationError as error:
                log_simulation_error(error, {"seed": self.scenario.seed}, logger)
                raise

    def run_until(self, until: float) -> Optional[Outcome]:
        """Process every event up to ``until``; returns the outcome once settled."""
        self.start()
        while self._outcome is None:
            self._outcome = self._settled()
            if self._outcome is not None:
                break
            next_time = self.queue.peek_time()
            if next_time is None or next_time > until:
                break
            if next_time > self.guard:
                self._outcome = Outcome.TIMEOUT
                logger.warning(
                    "Simulation hit the time guard",
                    extra={"seed": self.scenario.seed, "guard": self.guard},
                )
                break
            self._process_next()
        return self._outcome

    def run(self) -> RunResult:
        """Run to termination, total failure or the time guard."""
        outcome = self.run_until(math.inf)
        if outcome is None:
            # Nothing left to happen and still not settled.
            outcome = self._outcome = Outcome.TIMEOUT
        if outcome is Outcome.TOTAL_FAILURE:
            logger.warning("All processes crashed", extra={"seed": self.scenario.seed})
        result = self._result(outcome)
        logger.info(
            "Simulation finished",
            extra={
                "seed": self.scenario.seed,
                "outcome": outcome.value,
                "optimum": result.optimum,
                "sim_time": result.execution_time,
            },
        )
        return result

    def _result(self, outcome: Outcome) -> RunResult:
        terminated = tuple(
            pid
            for pid, w in sorted(self.workers.items())
            if w.status is WorkerStatus.TERMINATED
        )
        if outcome is Outcome.TERMINATED:
            end = max(self._ended_at[pid] for pid in terminated)
            bests = [self.workers[pid].best.value for pid in terminated]
        else:
            end = self.now
            bests = [w.best.value for w in self.workers.values()]
        best = min(bests, default=math.inf)

        accounted_ids: Set[int] = set(terminated) if terminated else set(self.workers)
        accounted = 0.0
        for pid, worker in sorted(self.workers.items()):
            lifetime = self._ended_at.get(pid, end) - self._started_at[pid]
            counters = worker.counters
            busy = counters.bnb_time + counters.contraction_time
            counters.idle_time = max(lifetime - busy, 0.0)
            if pid in accounted_ids:
                accounted += lifetime

        return RunResult(
            outcome=outcome,
            optimum=None if math.isinf(best) else best,
            processes=self.scenario.processes,
            seed=self.scenario.seed,
            execution_time=end,
            accounted_time=accounted,
            storage_total_bytes=self.storage_peak,
            storage_redundant_bytes=self.redundant_at_peak,
            events_processed=self.events_processed,
            per_process={pid: w.counters for pid, w in sorted(self.workers.items())},
            terminated=terminated,
            trace_records=self.trace.count if self.trace is not None else 0,
        )


def simulate(
    scenario: Scenario,
    tree: Optional[BasicTree] = None,
    trace: Optional[TraceRecorder] = None,
) -> RunResult:
    """Run a scenario end to end, including the oracle check.

    Fractional fault times are resolved against a fault-free run of the same
    scenario first. The reference optimum comes from ``expect_optimum`` or,
    for trees within the node budget, from the sequential solver.
    """
    tree = tree if tree is not None else load_tree(scenario)
    if scenario.needs_baseline:
        baseline = Simulation(scenario.fault_free(), tree).run()
        if baseline.outcome is not Outcome.TERMINATED:
            raise ConfigurationError(
                "fault-free baseline did not terminate; cannot place fractional faults",
                "crashes",
                baseline.outcome.value,
            )
        scenario = scenario.with_fault_times(baseline.execution_time)
        logger.debug(
            "Resolved fractional fault times",
            extra={"baseline": baseline.execution_time, "seed": scenario.seed},
        )

    result = Simulation(scenario, tree, trace).run()
    if scenario.expect_optimum is not None:
        result.expected_optimum = scenario.expect_optimum
        result.oracle_checked = True
    elif len(tree) <= scenario.oracle_node_budget:
        oracle = sequential_solve(tree, scenario.rule, scenario.pruning)
        result.expected_optimum = oracle.optimum
        result.oracle_checked = True
    return result

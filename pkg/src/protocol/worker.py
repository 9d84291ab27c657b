"""
The per-process worker state machine.

A worker solves problems from its local pool, asks random peers for work when
the pool runs dry, gossips the codes it completes, and falls back to
recovering the sibling of a completed code when nobody hands out work. It
never touches the clock or the network: every handler returns effects
(messages to send, timers to arm) and the kernel delivers them.

Completion information is folded into ``table`` as soon as it is known;
``local_list`` only buffers the codes not yet reported.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Protocol, Set, Union

import numpy as np

from bnbEngine import (
    ActivePool,
    BestKnown,
    PoolEntry,
    SelectionRule,
    decompose,
    eliminate_check,
)
from membership import (
    MembershipParams,
    MembershipView,
    gossip_view,
    join,
    on_view,
    pick_member,
    suspect_failures,
)
from metrics.counters import MetricCounters
from protocol.messages import Message, MessageKind
from protocol.params import ProtocolParams
from treecode import (
    EMPTY_TABLE,
    ROOT,
    CompletedTable,
    ProblemCode,
    WorkMeter,
    format_code,
    merge_reports,
    parent,
    select_recovery,
    sibling,
    termination_detected,
)
from trees import BasicTree

logger = logging.getLogger(__name__)


class WorkerStatus(str, Enum):
    RUNNING = "running"
    TERMINATED = "terminated"
    CRASHED = "crashed"


class TimerName(str, Enum):
    REPORT = "report"
    TABLE = "table"
    REQUEST = "request"
    RETRY = "retry"
    MEMBER = "member"
    JOIN = "join"


@dataclass(frozen=True)
class Timer:
    """Ask the kernel to call ``on_timer`` back at ``at``."""

    name: TimerName
    at: float
    token: int = 0


Effect = Union[Message, Timer]


class WorkObserver(Protocol):
    """Hook the kernel uses to keep ground truth about the search."""

    def expanded(self, process: int, entry: PoolEntry, now: float) -> None:
        ...

    def eliminated(
        self, process: int, code: ProblemCode, node_id: int, now: float
    ) -> None:
        ...


class _NoObserver:
    def expanded(self, process: int, entry: PoolEntry, now: float) -> None:
        pass

    def eliminated(
        self, process: int, code: ProblemCode, node_id: int, now: float
    ) -> None:
        pass


class WorkerState:
    """One process of the decentralized branch-and-bound.

    Invariants kept after every handler:
        - no pool entry is covered by ``table``
        - ``status`` is TERMINATED only once ``table`` has contracted to the root
    """

    def __init__(
        self,
        process_id: int,
        tree: BasicTree,
        params: ProtocolParams,
        view: MembershipView,
        rng: np.random.Generator,
        rule: SelectionRule = SelectionRule.DEPTH_FIRST,
        pruning: bool = True,
        membership: Optional[MembershipParams] = None,
        observer: Optional[WorkObserver] = None,
        holds_root: bool = False,
        joining: bool = False,
    ) -> None:
        self.id = process_id
        self.tree = tree
        self.params = params
        self.view = view
        self.rng = rng
        self.pruning = pruning
        self.membership = membership or MembershipParams()
        self.observer: WorkObserver = observer or _NoObserver()
        self.holds_root = holds_root

        self.pool = ActivePool(rule)
        self.local_list: CompletedTable = EMPTY_TABLE
        self.table: CompletedTable = EMPTY_TABLE
        self.solved_marks: Set[ProblemCode] = set()
        self.best = BestKnown()
        self.status = WorkerStatus.RUNNING
        self.counters = MetricCounters()
        self.current: Optional[PoolEntry] = None
        self.last_completed: Optional[ProblemCode] = None

        self._meter = WorkMeter()
        self._overhead = 0.0
        self._last_list_update = 0.0
        self._last_evidence = 0.0
        self._open_request: Optional[int] = None
        self._request_seq = 0
        self._failures = 0
        self._retry_armed = False
        self._report_armed = False
        self._joined = not joining

    def __repr__(self) -> str:
        return (
            f"WorkerState(id={self.id}, status={self.status.value}, "
            f"pool={len(self.pool)}, table={len(self.table)}, best={self.best.value})"
        )

    @property
    def pending_requests(self) -> int:
        return 0 if self._open_request is None else 1

    @property
    def running(self) -> bool:
        return self.status is WorkerStatus.RUNNING

    @property
    def idle(self) -> bool:
        return self.running and self.current is None and not self.pool

    @property
    def storage_bytes(self) -> int:
        return self.table.size_bytes + self.local_list.size_bytes

    @property
    def root_patience(self) -> float:
        """Idle time without evidence of work after which the root is restarted."""
        scaled = self.params.root_patience * self.tree.mean_cost
        return max(scaled, 2 * self.params.t_report)

    @property
    def _report_due(self) -> float:
        # Same value the REPORT timer is armed at.
        return self._last_list_update + self.params.t_report

    def take_overhead(self) -> float:
        """Contraction time accumulated since the last call."""
        overhead, self._overhead = self._overhead, 0.0
        return overhead

    # -- lifecycle ---------------------------------------------------------

    def start(self, now: float) -> List[Effect]:
        """Arm the periodic timers; the root holder pools the root problem."""
        self._last_evidence = now
        self._last_list_update = now
        effects: List[Effect] = []
        if self.holds_root:
            self._adopt(ROOT, now, recovered=False)
        if self.params.gossip_tables:
            effects.append(Timer(TimerName.TABLE, now + self.params.t_table))
        if self.membership.enabled:
            effects.append(Timer(TimerName.MEMBER, now + self.membership.t_member))
            if not self._joined:
                effects.extend(join(self.id, self.membership.gossip_servers))
                effects.append(Timer(TimerName.JOIN, now + self.membership.join_retry))
        return effects + self.flush(now)

    def crash(self) -> None:
        self.status = WorkerStatus.CRASHED
        self.current = None

    # -- completion and reporting -------------------------------------------

    def complete_problem(self, code: ProblemCode, now: float) -> None:
        """Record a fathomed problem and propagate completion upwards."""
        self.solved_marks.discard(code)
        while code and self.table.covers(sibling(code)):
            code = parent(code)
            self.solved_marks.discard(code)

        self.local_list = merge_reports(self.local_list, [code], self._meter)
        self.last_completed = code
        self._last_list_update = now
        self._set_table(merge_reports(self.table, [code], self._meter))

    def maybe_emit_report(self, now: float) -> List[Message]:
        """Send the buffered codes to ``m`` random members when due."""
        if not self.local_list:
            return []
        due = len(self.local_list) >= self.params.c or now >= self._report_due
        if not due:
            return []
        codes, best = self.local_list.ordered, self.best.value
        self.local_list = EMPTY_TABLE
        return [
            Message(MessageKind.WORK_REPORT, self.id, target, codes=codes, best=best)
            for target in self._pick_targets(self.params.m)
        ]

    def on_work_report(self, msg: Message, now: float) -> None:
        """Merge reported (or gossiped) codes and the piggybacked incumbent."""
        self.best.offer(msg.best, msg.sender)
        if msg.codes:
            self._last_evidence = now
            self._set_table(merge_reports(self.table, msg.codes, self._meter))

    def gossip_table(self, now: float) -> Optional[Message]:
        """Send the whole table to one random member."""
        others = self.view.others()
        if not others:
            return None
        target = pick_member(others, self.rng)
        return Message(
            MessageKind.TABLE_GOSSIP,
            self.id,
            target,
            codes=self.table.ordered,
            best=self.best.value,
        )

    def check_termination(self, now: float) -> List[Message]:
        """Stop and tell every known member once the table is the root."""
        if not self.running or not termination_detected(self.table):
            return []
        self.status = WorkerStatus.TERMINATED
        self.local_list = EMPTY_TABLE
        logger.debug(
            "Termination detected",
            extra={"worker": self.id, "sim_time": now, "best": self.best.value},
        )
        best = self.best.value
        return [
            Message(
                MessageKind.TERMINATION_NOTICE, self.id, other, codes=(ROOT,), best=best
            )
            for other in self.view.others()
        ]

    # -- work sharing ---------------------------------------------------------

    def request_work(self, now: float) -> List[Effect]:
        """Ask one random member for work and arm the reply timeout."""
        if not self.idle or self._open_request is not None:
            return []
        others = self.view.others()
        if not others:
            return self.on_request_failed(now)
        target = pick_member(others, self.rng)
        self._request_seq += 1
        self._open_request = request_id = self._request_seq
        return [
            Message(MessageKind.WORK_REQUEST, self.id, target, request_id=request_id),
            Timer(TimerName.REQUEST, now + self.params.request_timeout, request_id),
        ]

    def on_work_request(self, msg: Message, now: float) -> Message:
        """Grant half the pool when it holds more than ``s_min`` entries."""
        if len(self.pool) > self.params.s_min:
            granted = self.pool.steal(math.ceil(len(self.pool) / 2))
            return Message(
                MessageKind.WORK_GRANT,
                self.id,
                msg.sender,
                codes=tuple(entry.code for entry in granted),
                best=self.best.value,
                request_id=msg.request_id,
            )
        return Message(
            MessageKind.WORK_DENIED,
            self.id,
            msg.sender,
            request_id=msg.request_id,
            busy=self.current is not None or bool(self.pool),
        )

    def on_work_grant(self, msg: Message, now: float) -> None:
        """Pool granted work, including grants whose request already timed out."""
        self.best.offer(msg.best, msg.sender)
        if msg.request_id == self._open_request:
            self._open_request = None
        self._failures = 0
        self._last_evidence = now
        for code in msg.codes:
            self._adopt(code, now, recovered=False)

    def on_work_denied(self, msg: Message, now: float) -> List[Effect]:
        if msg.busy:
            self._last_evidence = now
        if msg.request_id != self._open_request:
            return []
        self._open_request = None
        return self.on_request_failed(now)

    def on_request_failed(self, now: float) -> List[Effect]:
        """Count a failed attempt; recover lost work after ``k_fail`` in a row."""
        if not self.idle:
            return []
        self._failures += 1
        if self._failures >= self.params.k_fail and self._recover(now):
            self._failures = 0
            return []
        self._retry_armed = True
        return [Timer(TimerName.RETRY, now + self.params.retry_delay(self._failures))]

    def _recover(self, now: float) -> bool:
        while not termination_detected(self.table):
            code = select_recovery(self.table, self.last_completed)
            if code is None:
                if self.table or now - self._last_evidence < self.root_patience:
                    return False
                code = ROOT
                self._last_evidence = now
                self.counters.root_restarts += 1
            self.counters.recoveries += 1
            logger.debug(
                "Recovering uncompleted work",
                extra={"worker": self.id, "code": format_code(code), "sim_time": now},
            )
            self._adopt(code, now, recovered=True)
            if self.pool:
                return True
        return False

    # -- computation ----------------------------------------------------------

    def begin_step(self, now: float) -> Optional[PoolEntry]:
        """Select the next problem worth expanding, eliminating on the way.

        Returns the entry now being computed, or None when the pool drained.
        Call ``flush`` afterwards in the latter case.
        """
        if not self.running or self.current is not None:
            return self.current
        while self.pool:
            entry = self.pool.select_next()
            assert entry is not None
            if self.pruning and eliminate_check(entry.bound, self.best):
                self.observer.eliminated(self.id, entry.code, entry.node_id, now)
                self.complete_problem(entry.code, now)
                continue
            self.current = entry
            return entry
        return None

    def finish_step(self, now: float) -> List[Effect]:
        """Expand the problem picked by ``begin_step``, then flush."""
        self.expand(now)
        return self.flush(now)

    def expand(self, now: float) -> None:
        """Expand the problem picked by ``begin_step`` without reporting."""
        entry = self.current
        if entry is None:
            return
        self.current = None
        node = self.tree.nodes[entry.node_id]
        self.counters.nodes_expanded += 1
        self.counters.bnb_time += node.time_cost
        self.observer.expanded(self.id, entry, now)
        if node.feasible:
            self.best.offer(node.bound, self.id)

        children = decompose(self.tree, entry.code, entry.node_id)
        if not children:
            self.complete_problem(entry.code, now)
        else:
            self.solved_marks.add(entry.code)
            for code, kid in children:
                if self.table.covers(code):
                    continue
                if self.pruning and eliminate_check(kid.bound, self.best):
                    self.observer.eliminated(self.id, code, kid.node_id, now)
                    self.complete_problem(code, now)
                    continue
                self.pool.insert(
                    PoolEntry(code, kid.node_id, kid.bound, entry.recovered)
                )

    def step(self, now: float) -> List[Effect]:
        """Select and expand one problem without modelling its duration."""
        if self.begin_step(now) is None:
            return self.flush(now)
        return self.finish_step(now)

    # -- event entry points ---------------------------------------------------

    def handle(self, msg: Message, now: float) -> List[Effect]:
        """Process one delivered message, then flush."""
        if not self.running:
            return []
        return self.receive(msg, now) + self.flush(now)

    def receive(self, msg: Message, now: float) -> List[Effect]:
        """Process one delivered message; replies only, no report or termination."""
        if not self.running:
            return []
        effects: List[Effect] = []
        kind = msg.kind
        if kind is MessageKind.WORK_REQUEST:
            effects.append(self.on_work_request(msg, now))
        elif kind is MessageKind.WORK_GRANT:
            self.on_work_grant(msg, now)
        elif kind is MessageKind.WORK_DENIED:
            effects.extend(self.on_work_denied(msg, now))
        elif kind in (
            MessageKind.WORK_REPORT,
            MessageKind.TABLE_GOSSIP,
            MessageKind.TERMINATION_NOTICE,
        ):
            self.on_work_report(msg, now)
        elif kind in (MessageKind.JOIN, MessageKind.VIEW_GOSSIP):
            self._on_membership(msg, now)
        return effects

    def on_timer(self, timer: Timer, now: float) -> List[Effect]:
        if not self.running:
            return []
        effects: List[Effect] = []
        name = timer.name
        if name is TimerName.REQUEST:
            if timer.token == self._open_request:
                self._open_request = None
                effects.extend(self.on_request_failed(now))
        elif name is TimerName.RETRY:
            self._retry_armed = False
        elif name is TimerName.REPORT:
            self._report_armed = False
        elif name is TimerName.TABLE:
            gossip = self.gossip_table(now)
            if gossip is not None:
                effects.append(gossip)
            effects.append(Timer(TimerName.TABLE, now + self.params.t_table))
        elif name is TimerName.MEMBER:
            heartbeat = gossip_view(self.view, now, self.rng)
            if heartbeat is not None:
                effects.append(heartbeat)
            membership = self.membership
            suspect_failures(
                self.view, now, membership.fail_timeout, membership.cleanup_timeout
            )
            effects.append(Timer(TimerName.MEMBER, now + self.membership.t_member))
        elif name is TimerName.JOIN and not self._joined:
            effects.extend(join(self.id, self.membership.gossip_servers))
            effects.append(Timer(TimerName.JOIN, now + self.membership.join_retry))
        return effects + self.flush(now)

    def idle_actions(self, now: float) -> List[Effect]:
        """What an idle worker does next: request work unless already waiting."""
        if not self.idle or self._open_request is not None or self._retry_armed:
            return []
        return self.request_work(now)

    def flush(self, now: float) -> List[Effect]:
        """Emit a due report, re-arm the report timer and check termination."""
        effects: List[Effect] = []
        if self.running:
            effects.extend(self.maybe_emit_report(now))
            if self.local_list and not self._report_armed:
                self._report_armed = True
                effects.append(Timer(TimerName.REPORT, self._report_due))
            effects.extend(self.check_termination(now))
        self._charge_contraction()
        return effects

    # -- internals ------------------------------------------------------------

    def _adopt(self, code: ProblemCode, now: float, recovered: bool) -> None:
        """Take responsibility for ``code`` unless it is already settled."""
        if self.table.covers(code) or code in self.pool:
            return
        node_id = self.tree.resolve(code)
        node = self.tree.nodes[node_id]
        if self.pruning and eliminate_check(node.bound, self.best):
            self.observer.eliminated(self.id, code, node_id, now)
            self.complete_problem(code, now)
            return
        self.pool.insert(PoolEntry(code, node_id, node.bound, recovered))

    def _set_table(self, table: CompletedTable) -> None:
        if table is self.table:
            return
        self.table = table
        dropped = self.pool.discard_covered(table)
        if dropped:
            self.counters.interrupted_entries += len(dropped)
            logger.debug(
                "Interrupted covered work",
                extra={"worker": self.id, "dropped": len(dropped)},
            )
        if self.solved_marks:
            self.solved_marks = {
                code for code in self.solved_marks if not table.covers(code)
            }
        self.counters.note_storage(self.storage_bytes)

    def _charge_contraction(self) -> None:
        if self._meter.touched:
            cost = self.params.kappa * self._meter.touched
            self._meter.touched = 0
            self.counters.contraction_time += cost
            self._overhead += cost

    def _pick_targets(self, count: int) -> List[int]:
        others = self.view.others()
        if not others:
            return []
        size = min(count, len(others))
        chosen = self.rng.choice(len(others), size=size, replace=False)
        return [others[int(index)] for index in chosen]

    def _on_membership(self, msg: Message, now: float) -> None:
        if not self.membership.enabled:
            return
        on_view(self.view, msg, now)
        if msg.kind is MessageKind.VIEW_GOSSIP:
            self._joined = True

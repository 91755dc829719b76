"""Interactive simulation sessions.

A session executes a consistency-clean model one interval at a time. The
caller injects stimuli per interval; where several global branches are
enabled, one is chosen uniformly by the session's seeded PRNG, so a
(model, seed, stimulus script) triple fully determines the run. A client
may instead pass branch="ask" to receive the enabled branch list without
advancing, then re-issue the step with the chosen index.

Session creation is gated: any error-severity consistency finding on the
corpus rejects the session (completeness warnings do not).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .. import behavior as bh
from ..consistency import run_rules
from ..errors import FksError, SessionClosed, UnknownNetwork
from ..findings import Finding
from ..kernel import ChannelId, MessageValue, TimedStream, Valuation
from ..network import (
    ENV,
    MachineStep,
    NetEvent,
    NetworkConfig,
    NetworkDef,
    flatten,
    initial_network_config,
    step_network,
)
from ..speclang.ast import ModelDocument
from ..speclang.elaborate import Corpus
from ..traces import EventTrace, TraceEvent, canonical


class ModelRejected(FksError):
    """The corpus has consistency errors; carries the findings."""

    def __init__(self, findings: list[Finding]):
        super().__init__(f"{len(findings)} consistency error(s)")
        self.findings = findings


@dataclass(frozen=True)
class Stimulus:
    channel: str
    message: MessageValue


@dataclass(frozen=True)
class NodeDelta:
    instance: str
    fired: str  # transition label or "stutter"
    consumed: tuple[tuple[str, MessageValue], ...]
    emitted: tuple[tuple[str, MessageValue], ...]
    control_before: str
    control_after: str
    store_changes: tuple[tuple[str, MessageValue, MessageValue], ...]


@dataclass(frozen=True)
class SessionDelta:
    """Everything observable about one executed interval."""

    interval: int  # 0-based index of the interval that was executed
    nodes: tuple[NodeDelta, ...]
    external_outputs: tuple[tuple[str, tuple[MessageValue, ...]], ...]
    events: tuple[TraceEvent, ...]  # 1-based, as recorded
    branches: tuple[str, ...]
    branch_taken: int


@dataclass(frozen=True)
class BranchPrompt:
    """Returned for branch="ask" when more than one branch is enabled."""

    interval: int
    branches: tuple[str, ...]


@dataclass
class SimSession:
    id: str
    network_name: str
    model: NetworkDef  # flattened
    seed: int
    policy: str
    interval: int = 0
    config: NetworkConfig = None  # type: ignore[assignment]
    histories: dict[str, list[tuple[MessageValue, ...]]] = field(default_factory=dict)
    recorded: list[NetEvent] = field(default_factory=list)
    closed: bool = False
    machine_step: MachineStep = None  # type: ignore[assignment]
    _rng: random.Random = field(default_factory=random.Random)

    def __post_init__(self) -> None:
        if self.config is None:
            self.config = initial_network_config(self.model)
        if self.machine_step is None:
            self.machine_step = bh.step
        self._rng = random.Random(self.seed)
        for c in self.model.external_inputs + self.model.external_outputs:
            self.histories.setdefault(c.name, [])
        for w in self.model.wires:
            self.histories.setdefault(w.name, [])

    # -- helpers --

    def external_input(self, name: str) -> ChannelId:
        for c in self.model.external_inputs:
            if c.name == name:
                return c
        raise TypeError(f"{name!r} is not an external input of {self.network_name}")

    def _lane(self, name: str, index: int) -> None:
        lane = self.histories[name]
        while len(lane) <= index:
            lane.append(())

    def _require_open(self) -> None:
        if self.closed:
            raise SessionClosed(self.id)


def create_session(docs: Sequence[ModelDocument], network: str, seed: int = 0,
                   policy: str = "idle", session_id: str = "s1",
                   machine_step: MachineStep | None = None,
                   model_override: NetworkDef | None = None) -> SimSession:
    """Gate on consistency, then initialize interval 0 with empty buffers.

    Raises ModelRejected (with findings) or UnknownNetwork.
    """
    findings = [f for f in run_rules(docs) if f.severity == "error"]
    if findings:
        raise ModelRejected(findings)
    if model_override is not None:
        net = model_override
    else:
        corpus = Corpus(list(docs))
        if network not in corpus.networks:
            raise UnknownNetwork(network)
        net = corpus.network(network)
    return SimSession(id=session_id, network_name=network, model=flatten(net),
                      seed=seed, policy=policy,
                      machine_step=machine_step or bh.step)


def step(session: SimSession, stimuli: Sequence[Stimulus],
         branch: int | str | None = None) -> SessionDelta | BranchPrompt:
    """Execute one interval; see the module docstring for branch handling."""
    session._require_open()
    arrivals: dict[str, list[MessageValue]] = {}
    for s in stimuli:
        channel = session.external_input(s.channel)
        if not s.message.conforms(channel.msg_type):
            raise TypeError(
                f"stimulus {s.message.describe()} does not conform to "
                f"{channel.msg_type.describe()} on {s.channel}")
        arrivals.setdefault(s.channel, []).append(s.message)

    i = session.interval
    branches = step_network(session.model, session.config, arrivals, i,
                            session.policy, session.machine_step)
    labels = tuple(b.label for b in branches)
    if branch == "ask":
        if len(branches) > 1:
            return BranchPrompt(i, labels)
        branch = 0
    if branch is None:
        taken = session._rng.randrange(len(branches)) if len(branches) > 1 else 0
    else:
        if not isinstance(branch, int) or not 0 <= branch < len(branches):
            raise ValueError(f"branch {branch!r} out of range (0..{len(branches) - 1})")
        taken = branch
    chosen = branches[taken]

    before = dict(session.config.nodes)
    node_deltas = []
    for detail in chosen.details:
        cfg_before = before[detail.instance]
        cfg_after = dict(chosen.config.nodes)[detail.instance]
        assert isinstance(cfg_before, bh.MachineConfig)
        assert isinstance(cfg_after, bh.MachineConfig)
        store_before = dict(cfg_before.store)
        changes = tuple(
            (name, store_before[name], value)
            for name, value in cfg_after.store if store_before[name] != value)
        node_deltas.append(NodeDelta(
            detail.instance, detail.label, detail.consumed, detail.emitted,
            cfg_before.control, cfg_after.control, changes))

    for name, messages in arrivals.items():
        session._lane(name, i)
        session.histories[name][i] += tuple(messages)
    for e in chosen.events:
        if e.sender != ENV:
            session._lane(e.channel, e.interval)
            session.histories[e.channel][e.interval] += (e.message,)
    session.recorded.extend(chosen.events)
    session.config = chosen.config
    session.interval = i + 1

    outputs = []
    for c in session.model.external_outputs:
        session._lane(c.name, i)
        outputs.append((c.name, tuple(session.histories[c.name][i])))
    delta_events = tuple(
        TraceEvent(e.sender, e.receiver, e.channel, e.message, e.interval + 1)
        for e in sorted(chosen.events, key=lambda e: (e.interval, e.channel)))
    return SessionDelta(i, tuple(node_deltas), tuple(outputs), delta_events,
                        labels, taken)


@dataclass(frozen=True)
class NodeSnapshot:
    instance: str
    control: str
    store: tuple[tuple[str, MessageValue], ...]
    buffers: tuple[tuple[str, tuple[MessageValue, ...]], ...]


@dataclass(frozen=True)
class Snapshot:
    interval: int
    nodes: tuple[NodeSnapshot, ...]
    histories: tuple[tuple[str, tuple[tuple[MessageValue, ...], ...]], ...]
    inflight: tuple[tuple[str, tuple[MessageValue, ...]], ...]
    trace: EventTrace


def snapshot(session: SimSession) -> Snapshot:
    """Point-in-time observable state; equal calls between steps return equal values."""
    session._require_open()
    nodes = []
    for instance, cfg in session.config.nodes:
        assert isinstance(cfg, bh.MachineConfig)
        nodes.append(NodeSnapshot(
            instance, cfg.control, cfg.store,
            tuple((c.name, queue) for c, queue in cfg.buffers)))
    horizon = session.interval
    lanes = []
    for name in sorted(session.histories):
        lane = tuple(session.histories[name][:horizon])
        lane += ((),) * (horizon - len(lane))
        lanes.append((name, lane))
    return Snapshot(session.interval, tuple(nodes), tuple(lanes),
                    session.config.inflight, export_trace(session))


def export_trace(session: SimSession) -> EventTrace:
    """The recorded run as an event trace (events within the current horizon)."""
    session._require_open()
    events = tuple(
        TraceEvent(e.sender, e.receiver, e.channel, e.message, e.interval + 1)
        for e in sorted(session.recorded, key=lambda e: (e.interval, e.channel))
        if e.interval < session.interval)
    return canonical(EventTrace(events))


def close(session: SimSession) -> None:
    session.closed = True


def input_valuation(session: SimSession) -> Valuation:
    """The external input history injected so far (for membership replays)."""
    k = session.interval
    entries = []
    for c in session.model.external_inputs:
        lane = session.histories[c.name][:k]
        lane += [()] * (k - len(lane))
        entries.append((c, TimedStream(tuple(lane))))
    return Valuation(tuple(entries), k)

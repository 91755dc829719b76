"""Component networks: typed ports, directed wires, hierarchy, composition.

Wires are one-way, single-source, single-sink channels; fan-out is modeled
by explicit duplicator components, never by multi-sink wires. Wire
transport is instantaneous at interval granularity: the mandatory
one-interval delay lives in component processing, so a message emitted by
a step at interval i occupies its wire at interval i+1 and is consumable
by the sink in that same interval. Every wire therefore sees at most one
message per interval, and feedback loops are well-defined because each
cycle passes through at least one machine delay.

Unwired input ports read empty histories and unwired outputs are
discarded (with a warning at construction); strict wiring mode turns
either into a DanglingPort error.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterator, Mapping, Sequence, Union

from . import behavior as bh
from .errors import CyclicHierarchy, DanglingPort, InvalidModel
from .kernel import ChannelId, MessageValue, TimedStream, Valuation, enumerate_values, validate_typing

ENV = "env"


class UnwiredPortWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Endpoint:
    """A wire end: an instance port, or an environment channel (instance None)."""

    instance: str | None
    port: ChannelId


@dataclass(frozen=True)
class Wire:
    """A named, typed, directed connection between two endpoints."""

    name: str
    source: Endpoint
    sink: Endpoint


BehaviorRef = Union[bh.StateMachine, "NetworkDef"]


@dataclass(frozen=True)
class NetworkNode:
    instance: str
    behavior: BehaviorRef


def interface_of(ref: BehaviorRef) -> tuple[tuple[ChannelId, ...], tuple[ChannelId, ...]]:
    if isinstance(ref, bh.StateMachine):
        return ref.inputs, ref.outputs
    return ref.external_inputs, ref.external_outputs


@dataclass(frozen=True)
class NetworkDef:
    name: str
    external_inputs: tuple[ChannelId, ...]
    external_outputs: tuple[ChannelId, ...]
    nodes: tuple[NetworkNode, ...]
    wires: tuple[Wire, ...]

    def __post_init__(self) -> None:
        ext_names = [c.name for c in self.external_inputs + self.external_outputs]
        if len(set(ext_names)) != len(ext_names):
            raise InvalidModel(f"network {self.name}: duplicate external channel names")
        instances = [n.instance for n in self.nodes]
        if len(set(instances)) != len(instances) or ENV in instances:
            raise InvalidModel(f"network {self.name}: bad instance names {instances}")
        wire_names = [w.name for w in self.wires]
        if len(set(wire_names)) != len(wire_names):
            raise InvalidModel(f"network {self.name}: duplicate wire names {wire_names}")
        by_instance = {n.instance: n for n in self.nodes}
        ins = {c.name: c for c in self.external_inputs}
        outs = {c.name: c for c in self.external_outputs}
        used: set[tuple[str | None, str]] = set()
        for w in self.wires:
            where = f"network {self.name}, wire {w.name}"
            if w.source.instance is None and w.sink.instance is None:
                raise InvalidModel(f"{where}: environment feed-through is not allowed")
            if w.source.instance is None:
                if w.source.port.name not in ins:
                    raise InvalidModel(f"{where}: source {w.source.port.name} is not an external input")
            else:
                node = by_instance.get(w.source.instance)
                if node is None:
                    raise InvalidModel(f"{where}: unknown instance {w.source.instance}")
                _, node_outs = interface_of(node.behavior)
                if w.source.port not in node_outs:
                    raise InvalidModel(
                        f"{where}: source must be an output port of {w.source.instance}")
            if w.sink.instance is None:
                if w.sink.port.name not in outs:
                    raise InvalidModel(f"{where}: sink {w.sink.port.name} is not an external output")
            else:
                node = by_instance.get(w.sink.instance)
                if node is None:
                    raise InvalidModel(f"{where}: unknown instance {w.sink.instance}")
                node_ins, _ = interface_of(node.behavior)
                if w.sink.port not in node_ins:
                    raise InvalidModel(f"{where}: sink must be an input port of {w.sink.instance}")
            if w.source.port.msg_type != w.sink.port.msg_type:
                raise InvalidModel(f"{where}: endpoint types differ")
            for end in (w.source, w.sink):
                key = (end.instance, end.port.name)
                if key in used:
                    raise InvalidModel(f"{where}: endpoint {key} wired twice")
                used.add(key)
        dangling = self.unwired_ports()
        if dangling:
            warnings.warn(
                f"network {self.name}: unwired ports {dangling}", UnwiredPortWarning,
                stacklevel=2)

    def unwired_ports(self) -> list[tuple[str, str]]:
        wired = {(e.instance, e.port.name)
                 for w in self.wires for e in (w.source, w.sink)}
        missing = [(n.instance, c.name)
                   for n in self.nodes
                   for side in interface_of(n.behavior)
                   for c in side
                   if (n.instance, c.name) not in wired]
        missing += [(ENV, c.name)
                    for c in self.external_inputs + self.external_outputs
                    if (None, c.name) not in wired]
        return sorted(missing)

    def node(self, instance: str) -> NetworkNode:
        for n in self.nodes:
            if n.instance == instance:
                return n
        raise KeyError(instance)


def require_fully_wired(net: NetworkDef) -> None:
    dangling = net.unwired_ports()
    if dangling:
        raise DanglingPort(f"network {net.name}: unwired ports {dangling}")


# --- Flattening ---------------------------------------------------------------


def flatten(net: NetworkDef, wiring: str = "loose") -> NetworkDef:
    """Inline all sub-networks, leaving only machine nodes.

    Inlined instances and wires are renamed with their path (parent.child);
    wires crossing a hierarchy boundary keep the parent wire's name. The
    result denotes exactly the same stream function as the original.
    """
    return _flatten(net, wiring, seen=())


def _flatten(net: NetworkDef, wiring: str, seen: tuple[str, ...]) -> NetworkDef:
    if net.name in seen:
        raise CyclicHierarchy(" -> ".join(seen + (net.name,)))
    if wiring == "strict":
        require_fully_wired(net)
    nodes: list[NetworkNode] = []
    wires: list[Wire] = []
    # Where messages into (instance, port) should really go after inlining,
    # and where messages out of (instance, port) really come from.
    sink_map: dict[tuple[str, str], Endpoint | None] = {}
    source_map: dict[tuple[str, str], Endpoint] = {}
    for n in net.nodes:
        if isinstance(n.behavior, bh.StateMachine):
            nodes.append(n)
            continue
        inner = _flatten(n.behavior, wiring, seen + (net.name,))
        for sub in inner.nodes:
            nodes.append(NetworkNode(f"{n.instance}.{sub.instance}", sub.behavior))
        env_in = {w.source.port.name: w for w in inner.wires if w.source.instance is None}
        env_out = {w.sink.port.name: w for w in inner.wires if w.sink.instance is None}
        for c in inner.external_inputs:
            w = env_in.get(c.name)
            sink_map[(n.instance, c.name)] = (
                None if w is None
                else Endpoint(f"{n.instance}.{w.sink.instance}", w.sink.port))
        for c in inner.external_outputs:
            w = env_out.get(c.name)
            if w is not None:
                source_map[(n.instance, c.name)] = Endpoint(
                    f"{n.instance}.{w.source.instance}", w.source.port)
        for w in inner.wires:
            if w.source.instance is None or w.sink.instance is None:
                continue
            wires.append(Wire(
                f"{n.instance}.{w.name}",
                Endpoint(f"{n.instance}.{w.source.instance}", w.source.port),
                Endpoint(f"{n.instance}.{w.sink.instance}", w.sink.port)))
    for w in net.wires:
        source: Endpoint | None = w.source
        if w.source.instance is not None and (w.source.instance, w.source.port.name) in source_map:
            source = source_map[(w.source.instance, w.source.port.name)]
        sink: Endpoint | None = w.sink
        if w.sink.instance is not None and (w.sink.instance, w.sink.port.name) in sink_map:
            sink = sink_map[(w.sink.instance, w.sink.port.name)]
        if sink is None:
            # The child never reads this boundary port; messages vanish either way.
            continue
        wires.append(Wire(w.name, source, sink))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnwiredPortWarning)
        return NetworkDef(net.name, net.external_inputs, net.external_outputs,
                          tuple(nodes), tuple(wires))


# --- Synchronized execution ----------------------------------------------------


@dataclass(frozen=True)
class NetworkConfig:
    """Per-node configurations plus messages in flight on internal wires."""

    nodes: tuple[tuple[str, object], ...]  # MachineConfig | NetworkConfig
    inflight: tuple[tuple[str, tuple[MessageValue, ...]], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes)))
        object.__setattr__(self, "inflight", tuple(sorted(self.inflight)))

    def node_config(self, instance: str):
        return dict(self.nodes)[instance]


@dataclass(frozen=True)
class NetEvent:
    """A message occupying a wire: sender/receiver instances ("env" at the
    boundary), the wire's channel name, and the 0-based interval."""

    sender: str
    receiver: str
    channel: str
    message: MessageValue
    interval: int


@dataclass(frozen=True)
class NodeStep:
    """What one node did in one step (for deltas and inspection)."""

    instance: str
    label: str
    consumed: tuple[tuple[str, MessageValue], ...]
    emitted: tuple[tuple[str, MessageValue], ...]


@dataclass(frozen=True)
class NetBranch:
    config: NetworkConfig
    emissions: tuple[tuple[ChannelId, MessageValue], ...]
    events: tuple[NetEvent, ...]
    label: str = ""
    details: tuple[NodeStep, ...] = ()


def initial_network_config(net: NetworkDef) -> NetworkConfig:
    states: list[tuple[str, object]] = []
    for n in net.nodes:
        if isinstance(n.behavior, bh.StateMachine):
            states.append((n.instance, bh.initial_config(n.behavior)))
        else:
            states.append((n.instance, initial_network_config(n.behavior)))
    return NetworkConfig(tuple(states), ())


MachineStep = Callable[..., list[bh.Branch]]


def step_network(net: NetworkDef, cfg: NetworkConfig,
                 arrivals: Mapping[str, Sequence[MessageValue]],
                 interval: int, policy: str = "idle",
                 machine_step: MachineStep = bh.step) -> list[NetBranch]:
    """Step every node once; returns the ordered global branch list.

    Branches are the product of per-node branch lists, ordered by instance
    name then per-node branch order. `interval` is the 0-based index of the
    step being taken; events in the result carry absolute intervals.
    """
    env_in = {w.source.port.name: w for w in net.wires if w.source.instance is None}
    out_wire = {(w.source.instance, w.source.port.name): w
                for w in net.wires if w.source.instance is not None}
    sink_of = {w.name: w.sink for w in net.wires}

    deliveries: dict[str, dict[str, list[MessageValue]]] = {}
    base_events: list[NetEvent] = []
    for wire_name, messages in cfg.inflight:
        sink = sink_of[wire_name]
        assert sink.instance is not None
        deliveries.setdefault(sink.instance, {}).setdefault(
            sink.port.name, []).extend(messages)
    for name, messages in arrivals.items():
        wire = env_in.get(name)
        for value in messages:
            if wire is None:
                continue  # unwired external input: message vanishes
            assert wire.sink.instance is not None
            deliveries.setdefault(wire.sink.instance, {}).setdefault(
                wire.sink.port.name, []).append(value)
            base_events.append(NetEvent(ENV, wire.sink.instance, wire.name,
                                        value, interval))

    per_node: list[tuple[str, list]] = []
    for instance, node_cfg in cfg.nodes:
        node = net.node(instance)
        node_arrivals = deliveries.get(instance, {})
        if isinstance(node.behavior, bh.StateMachine):
            branches = machine_step(node.behavior, node_cfg, node_arrivals, policy)
            per_node.append((instance, [
                (b.config, b.emissions, (), b.describe(node.behavior),
                 (NodeStep(instance, b.describe(node.behavior),
                           tuple(sorted((c.name, v) for c, v in b.consumed)),
                           tuple(sorted((c.name, v) for c, v in b.emissions))),))
                for b in branches]))
        else:
            subs = step_network(node.behavior, node_cfg, node_arrivals,
                                interval, policy, machine_step)
            per_node.append((instance, [
                (s.config, s.emissions, _rescope(instance, s.events), s.label,
                 tuple(NodeStep(f"{instance}.{d.instance}", d.label, d.consumed,
                                d.emitted) for d in s.details))
                for s in subs]))

    results: list[NetBranch] = []
    for combo in product(*(choices for _, choices in per_node)):
        new_nodes: list[tuple[str, object]] = []
        inflight: dict[str, tuple[MessageValue, ...]] = {}
        external: list[tuple[ChannelId, MessageValue]] = []
        events = list(base_events)
        labels = []
        details: list[NodeStep] = []
        for (instance, _), (node_cfg, emissions, sub_events, label, steps) in \
                zip(per_node, combo):
            new_nodes.append((instance, node_cfg))
            events.extend(sub_events)
            details.extend(steps)
            if label and label != "stutter":
                labels.append(f"{instance}:{label}")
            for port, value in sorted(emissions, key=lambda e: e[0].name):
                wire = out_wire.get((instance, port.name))
                if wire is None:
                    continue  # unwired output: discarded
                if wire.sink.instance is None:
                    external.append((wire.sink.port, value))
                    events.append(NetEvent(instance, ENV, wire.name, value, interval + 1))
                else:
                    inflight[wire.name] = inflight.get(wire.name, ()) + (value,)
                    events.append(NetEvent(instance, wire.sink.instance, wire.name,
                                           value, interval + 1))
        results.append(NetBranch(
            NetworkConfig(tuple(new_nodes), tuple(inflight.items())),
            tuple(external), tuple(events), "; ".join(labels) or "stutter",
            tuple(details)))
    return results


def _rescope(instance: str, events: tuple[NetEvent, ...]) -> tuple[NetEvent, ...]:
    # Boundary pseudo-events of the child duplicate the parent's wire events.
    kept = []
    for e in events:
        if e.sender == ENV or e.receiver == ENV:
            continue
        kept.append(NetEvent(f"{instance}.{e.sender}", f"{instance}.{e.receiver}",
                             f"{instance}.{e.channel}", e.message, e.interval))
    return tuple(kept)


def _check_input(net: NetworkDef, x: Valuation, k: int) -> None:
    if x.horizon != k:
        raise ValueError(f"input horizon {x.horizon} != k {k}")
    violations = validate_typing(x, net.external_inputs)
    if violations:
        raise TypeError("; ".join(v.describe() for v in violations))


def denote_network(net: NetworkDef, x: Valuation, k: int, policy: str = "idle",
                   budget: int = bh.DEFAULT_BUDGET,
                   machine_step: MachineStep = bh.step) -> frozenset[Valuation]:
    """The set of external output histories over all k-interval runs."""
    _check_input(net, x, k)

    def stepper(cfg: object, interval: int):
        assert isinstance(cfg, NetworkConfig)
        branches = step_network(net, cfg, _arrivals(x, interval), interval, policy,
                                machine_step)
        return [(b.config, b.emissions) for b in branches]

    results = set()
    for run in bh.iterate_runs(stepper, initial_network_config(net), k, budget):
        results.add(bh.emissions_to_valuation(net.external_outputs, k, run))
    return frozenset(results)


def _arrivals(x: Valuation, interval: int) -> dict[str, tuple[MessageValue, ...]]:
    return {ch.name: s.intervals[interval] for ch, s in x.entries}


def enumerate_network_runs(net: NetworkDef, x: Valuation, k: int,
                           policy: str = "idle", budget: int = bh.DEFAULT_BUDGET,
                           machine_step: MachineStep = bh.step,
                           ) -> Iterator[tuple[Valuation, tuple[NetEvent, ...]]]:
    """All runs as (external output valuation, events); deterministic order.

    Events due at or beyond the horizon are excluded, matching the output
    truncation.
    """
    _check_input(net, x, k)

    def stepper(cfg: object, interval: int):
        assert isinstance(cfg, NetworkConfig)
        branches = step_network(net, cfg, _arrivals(x, interval), interval, policy,
                                machine_step)
        return [(b.config, (b.emissions, b.events)) for b in branches]

    for run in bh.iterate_runs(stepper, initial_network_config(net), k, budget):
        outputs = bh.emissions_to_valuation(
            net.external_outputs, k, [emissions for emissions, _ in run])
        events = tuple(e for _, evs in run for e in evs if e.interval < k)
        yield outputs, events


# --- Compositionality oracle ---------------------------------------------------


@dataclass(frozen=True)
class ComposeMismatch:
    x: Valuation
    only_network: tuple[Valuation, ...]
    only_oracle: tuple[Valuation, ...]


@dataclass(frozen=True)
class ComposeReport:
    equal: bool
    inputs_checked: int
    mismatch: ComposeMismatch | None = None


def compose_check(net: NetworkDef, k: int,
                  domains: Mapping[str, Sequence[MessageValue]] | None = None,
                  policy: str = "idle", budget: int = bh.DEFAULT_BUDGET) -> ComposeReport:
    """Verify denote_network against the brute-force fixpoint oracle.

    The oracle enumerates all channel valuations (external inputs from the
    given domains, every other channel from its own domain/default type) with
    at most one message per interval, keeps those consistent with every
    node's independent denotation, and projects onto the external outputs.
    Machines emit at most one message per channel per interval, so the grid
    covers every reachable history. Intended for nets of at most 3 machine
    nodes at tiny domains.
    """
    flat = flatten(net)
    if len(flat.nodes) > 3:
        raise ValueError(f"compose_check is a desk-scale oracle; {len(flat.nodes)} nodes > 3")
    inputs_checked = 0
    for x in bh.input_grid(flat.external_inputs, k, domains):
        inputs_checked += 1
        lhs = denote_network(net, x, k, policy, budget)
        rhs = _oracle_outputs(flat, x, k, domains, policy, budget)
        if lhs != rhs:
            return ComposeReport(False, inputs_checked, ComposeMismatch(
                x, tuple(sorted(lhs - rhs, key=repr)), tuple(sorted(rhs - lhs, key=repr))))
    return ComposeReport(True, inputs_checked)


def _oracle_outputs(flat: NetworkDef, x: Valuation, k: int,
                    domains: Mapping[str, Sequence[MessageValue]] | None,
                    policy: str, budget: int) -> frozenset[Valuation]:
    """Filter the channel-valuation grid by every node's independent denotation.

    Environment-input wires carry x; every other wire (internal and
    environment-output) is enumerated over its domain. A candidate is
    consistent with a node when the node's wired output histories appear
    together in some element of its denotation on the candidate's inputs.
    """
    env_in_wires = {w.name for w in flat.wires if w.source.instance is None}
    in_wire = {(w.sink.instance, w.sink.port.name): w
               for w in flat.wires if w.sink.instance is not None}
    out_wire = {(w.source.instance, w.source.port.name): w
                for w in flat.wires if w.source.instance is not None}
    order = [w.name for w in flat.wires if w.name not in env_in_wires]

    def stream_universe(wire: Wire) -> list[TimedStream]:
        values = (domains or {}).get(wire.name)
        if values is None:
            values = enumerate_values(wire.source.port.msg_type)
        per_interval = [((),) + tuple((v,) for v in values)] * k
        return [TimedStream(combo) for combo in product(*per_interval)]

    universes = {w.name: stream_universe(w) for w in flat.wires
                 if w.name not in env_in_wires}

    def wires_of(n: NetworkNode) -> set[str]:
        ins, outs = interface_of(n.behavior)
        touched = set()
        for c in ins:
            w = in_wire.get((n.instance, c.name))
            if w is not None and w.name not in env_in_wires:
                touched.add(w.name)
        for c in outs:
            w = out_wire.get((n.instance, c.name))
            if w is not None:
                touched.add(w.name)
        return touched

    needed = {n.instance: wires_of(n) for n in flat.nodes}
    denote_cache: dict[tuple[str, Valuation], frozenset[Valuation]] = {}

    def node_consistent(n: NetworkNode, assignment: Mapping[str, TimedStream]) -> bool:
        machine = n.behavior
        assert isinstance(machine, bh.StateMachine)
        entries = []
        for c in machine.inputs:
            w = in_wire.get((n.instance, c.name))
            if w is None:
                entries.append((c, TimedStream(((),) * k)))
            elif w.name in env_in_wires:
                entries.append((c, x.stream(w.source.port.name)))
            else:
                entries.append((c, assignment[w.name]))
        node_input = Valuation(tuple(entries), k)
        key = (n.instance, node_input)
        if key not in denote_cache:
            denote_cache[key] = bh.denote(machine, node_input, k, policy, budget)
        wired = [(c, out_wire[(n.instance, c.name)].name)
                 for c in machine.outputs if (n.instance, c.name) in out_wire]
        want = tuple(assignment[wname] for _, wname in wired)
        return any(tuple(d.stream(c.name) for c, _ in wired) == want
                   for d in denote_cache[key])

    ext_out_wire = {w.sink.port.name: w.name
                    for w in flat.wires if w.sink.instance is None}
    results: set[Valuation] = set()

    def advance(assignment: dict[str, TimedStream],
                checked: frozenset[str]) -> frozenset[str] | None:
        # Check every node whose touched wires just became fully assigned.
        for n in flat.nodes:
            if n.instance in checked:
                continue
            if needed[n.instance] <= assignment.keys():
                if not node_consistent(n, assignment):
                    return None
                checked = checked | {n.instance}
        return checked

    def assign(idx: int, assignment: dict[str, TimedStream], checked: frozenset[str]) -> None:
        if idx == len(order):
            entries = []
            for c in flat.external_outputs:
                wname = ext_out_wire.get(c.name)
                entries.append((c, assignment[wname] if wname else TimedStream(((),) * k)))
            results.add(Valuation(tuple(entries), k))
            return
        wire_name = order[idx]
        for candidate in universes[wire_name]:
            assignment[wire_name] = candidate
            now_checked = advance(assignment, checked)
            if now_checked is not None:
                assign(idx + 1, assignment, now_checked)
        assignment.pop(wire_name, None)

    start = advance({}, frozenset())
    if start is not None:
        assign(0, {}, start)
    return frozenset(results)

"""User-controlled cross-view consistency checking.

Rules operate on the abstract syntax of a set of documents; they judge
agreement between views (interfaces vs. automata, hierarchy levels, wires,
traces) and never execute behavior. Findings are data, the engine is
total, and the caller selects which rules to run. Severity policy:
cross-view mismatches are errors, incompleteness is warnings, so that
work-in-progress models lint clean enough to keep editing but cannot be
simulated until the error class is empty.

The shipped rule set is this toolkit's reconstruction; the codes are
stable identifiers:

  C-IF-01  automaton channels must appear in the owning component's
           interface with equal types and directions
  C-IF-02  every network node names a component with a defined behavior
           (an automaton or a decomposition network)
  C-HY-01  a decomposition network's external ports equal its component's
  C-TY-01  wire endpoint types are equal
  C-ET-01  trace events use channels of the bound network, well-typed
  C-ET-02  trace event senders/receivers exist in the bound network

Completeness warnings: W-CMP-01 component without behavior, W-NET-01
unwired port, W-DT-01 unreferenced datatype.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import UnknownRuleCode
from .findings import ERROR, WARNING, Finding, sort_findings
from .kernel import ChannelId, DataTypeDef, Enumeration, IntRange, MessageValue, RecordShape
from .speclang.ast import ModelDocument, NetworkDecl, TraceDecl


@dataclass(frozen=True)
class ConsistencyRule:
    code: str
    scope: tuple[str, ...]  # view kinds the rule reads
    description: str
    check: Callable[["_Context"], list[Finding]]


class _Context:
    """Merged name tables over the checked documents (first declaration wins)."""

    def __init__(self, docs: Sequence[ModelDocument]):
        self.docs = list(docs)
        self.components = {}
        self.component_doc = {}
        self.automata = {}
        self.networks = {}
        self.network_doc = {}
        for doc in self.docs:
            for comp in doc.components:
                self.components.setdefault(comp.name, comp)
                self.component_doc.setdefault(comp.name, doc.source)
            for auto in doc.automata:
                self.automata.setdefault(auto.name, auto)
            for net in doc.networks:
                self.networks.setdefault(net.name, net)
                self.network_doc.setdefault(net.name, doc.source)
        self.automaton_by_component = {}
        for doc in self.docs:
            for auto in doc.automata:
                if auto.for_component:
                    self.automaton_by_component.setdefault(auto.for_component, auto)

    def node_interface(self, net: NetworkDecl, instance: str,
                       ) -> tuple[tuple[ChannelId, ...], tuple[ChannelId, ...]] | None:
        node = next((n for n in net.nodes if n.instance == instance), None)
        if node is None:
            return None
        if node.component in self.networks and node.component != net.name:
            sub = self.networks[node.component]
            return sub.external_inputs, sub.external_outputs
        comp = self.components.get(node.component)
        if comp is None:
            return None
        return comp.inputs, comp.outputs

    def port_type(self, net: NetworkDecl, instance: str | None,
                  port: str, direction: str) -> DataTypeDef | None:
        if instance is None:
            pool = net.external_inputs if direction == "out" else net.external_outputs
            # env sources are external inputs, env sinks external outputs
            hit = next((c for c in pool if c.name == port), None)
            return hit.msg_type if hit else None
        interface = self.node_interface(net, instance)
        if interface is None:
            return None
        ins, outs = interface
        pool = outs if direction == "out" else ins
        hit = next((c for c in pool if c.name == port), None)
        return hit.msg_type if hit else None


def _check_if01(ctx: _Context) -> list[Finding]:
    findings = []
    for doc in ctx.docs:
        for auto in doc.automata:
            if not auto.for_component:
                continue
            comp = ctx.components.get(auto.for_component)
            path = f"automaton {auto.name}"
            if comp is None:
                findings.append(Finding(
                    "C-IF-01", ERROR, doc.source, path,
                    f"owning component {auto.for_component!r} is not declared"))
                continue
            iface = {("in", c.name): c.msg_type for c in comp.inputs}
            iface.update({("out", c.name): c.msg_type for c in comp.outputs})

            def check_channel(direction: str, ch: ChannelId, where: str) -> None:
                declared = iface.get((direction, ch.name))
                if declared is None:
                    findings.append(Finding(
                        "C-IF-01", ERROR, doc.source, where,
                        f"channel {ch.name!r} is not an {direction}-port of "
                        f"component {comp.name}"))
                elif declared != ch.msg_type:
                    findings.append(Finding(
                        "C-IF-01", ERROR, doc.source, where,
                        f"channel {ch.name!r} has type {ch.msg_type.describe()} "
                        f"but component {comp.name} declares {declared.describe()}"))

            for ch in auto.inputs:
                check_channel("in", ch, path)
            for ch in auto.outputs:
                check_channel("out", ch, path)
            for idx, t in enumerate(auto.transitions):
                tpath = f"{path}/transition {idx}"
                for p in t.patterns:
                    check_channel("in", p.channel, tpath)
                for e in t.emissions:
                    check_channel("out", e.channel, tpath)
    return findings


def _check_if02(ctx: _Context) -> list[Finding]:
    findings = []
    for doc in ctx.docs:
        for net in doc.networks:
            for node in net.nodes:
                path = f"network {net.name}/node {node.instance}"
                if node.component in ctx.networks and node.component != net.name:
                    continue
                comp = ctx.components.get(node.component)
                if comp is None:
                    findings.append(Finding(
                        "C-IF-02", ERROR, doc.source, path,
                        f"component {node.component!r} is not declared anywhere"))
                elif node.component not in ctx.automaton_by_component:
                    findings.append(Finding(
                        "C-IF-02", ERROR, doc.source, path,
                        f"component {node.component!r} has neither an automaton "
                        f"nor a decomposition network"))
    return findings


def _check_hy01(ctx: _Context) -> list[Finding]:
    findings = []
    for name, net in ctx.networks.items():
        comp = ctx.components.get(name)
        if comp is None:
            continue
        source = ctx.network_doc[name]
        path = f"network {name}"
        for side, net_ports, comp_ports in (
                ("input", net.external_inputs, comp.inputs),
                ("output", net.external_outputs, comp.outputs)):
            net_set = {(c.name, c.msg_type) for c in net_ports}
            comp_set = {(c.name, c.msg_type) for c in comp_ports}
            for cname, _ in sorted(net_set - comp_set):
                findings.append(Finding(
                    "C-HY-01", ERROR, source, path,
                    f"external {side} {cname!r} does not match any {side} port "
                    f"of component {name}"))
            for cname, _ in sorted(comp_set - net_set):
                findings.append(Finding(
                    "C-HY-01", ERROR, source, path,
                    f"component {side} port {cname!r} is missing from the "
                    f"decomposition network"))
    return findings


def _check_ty01(ctx: _Context) -> list[Finding]:
    findings = []
    for doc in ctx.docs:
        for net in doc.networks:
            for w in net.wires:
                src = ctx.port_type(net, w.source.instance, w.source.port, "out")
                snk = ctx.port_type(net, w.sink.instance, w.sink.port, "in")
                if src is not None and snk is not None and src != snk:
                    findings.append(Finding(
                        "C-TY-01", ERROR, doc.source, f"network {net.name}/wire {w.name}",
                        f"source carries {src.describe()} but sink expects "
                        f"{snk.describe()}"))
    return findings


def _trace_channel_type(ctx: _Context, net: NetworkDecl, channel: str,
                        ) -> DataTypeDef | None:
    ext = next((c for c in net.external_inputs + net.external_outputs
                if c.name == channel), None)
    if ext is not None:
        return ext.msg_type
    wire = next((w for w in net.wires if w.name == channel), None)
    if wire is None:
        return None
    return ctx.port_type(net, wire.source.instance, wire.source.port, "out")


def _check_et01(ctx: _Context) -> list[Finding]:
    findings = []
    for doc in ctx.docs:
        for tr in doc.traces:
            findings += _trace_channel_findings(ctx, doc, tr)
    return findings


def _trace_channel_findings(ctx: _Context, doc: ModelDocument,
                            tr: TraceDecl) -> list[Finding]:
    if not tr.for_network:
        return []
    findings = []
    net = ctx.networks.get(tr.for_network)
    if net is None:
        return [Finding("C-ET-01", ERROR, doc.source, f"trace {tr.name}",
                        f"bound network {tr.for_network!r} is not declared")]
    wire_names = {w.name for w in net.wires}
    ext_names = {c.name for c in net.external_inputs + net.external_outputs}
    for idx, e in enumerate(tr.trace.events):
        path = f"trace {tr.name}/event {idx}"
        if e.channel not in wire_names | ext_names:
            findings.append(Finding(
                "C-ET-01", ERROR, doc.source, path,
                f"channel {e.channel!r} is neither a wire nor an external "
                f"channel of {net.name}"))
            continue
        dtype = _trace_channel_type(ctx, net, e.channel)
        if dtype is not None and not e.message.conforms(dtype):
            findings.append(Finding(
                "C-ET-01", ERROR, doc.source, path,
                f"message {e.message.describe()} does not conform to "
                f"{dtype.describe()} on channel {e.channel}"))
    return findings


def _check_et02(ctx: _Context) -> list[Finding]:
    findings = []
    for doc in ctx.docs:
        for tr in doc.traces:
            if not tr.for_network:
                continue
            net = ctx.networks.get(tr.for_network)
            if net is None:
                continue  # C-ET-01 reports the dangling binding
            instances = {n.instance for n in net.nodes} | {"env"}
            for idx, e in enumerate(tr.trace.events):
                for role, who in (("sender", e.sender), ("receiver", e.receiver)):
                    if who not in instances:
                        findings.append(Finding(
                            "C-ET-02", ERROR, doc.source,
                            f"trace {tr.name}/event {idx}",
                            f"{role} {who!r} is not an instance of {net.name}"))
    return findings


RULES: dict[str, ConsistencyRule] = {
    rule.code: rule for rule in (
        ConsistencyRule("C-IF-01", ("automaton", "component"),
                        "automaton channels agree with the owning component",
                        _check_if01),
        ConsistencyRule("C-IF-02", ("network", "automaton", "component"),
                        "every node's component has a defined behavior",
                        _check_if02),
        ConsistencyRule("C-HY-01", ("network", "component"),
                        "decomposition networks match their component's ports",
                        _check_hy01),
        ConsistencyRule("C-TY-01", ("network", "component"),
                        "wire endpoint types are equal", _check_ty01),
        ConsistencyRule("C-ET-01", ("trace", "network"),
                        "trace channels exist and messages are well-typed",
                        _check_et01),
        ConsistencyRule("C-ET-02", ("trace", "network"),
                        "trace senders and receivers exist", _check_et02),
    )
}

ALL_CODES = tuple(sorted(RULES))


def run_rules(docs: Iterable[ModelDocument],
              selection: Iterable[str] | None = None) -> list[Finding]:
    """Run the selected consistency rules (default: all) over the documents.

    Deterministic output order (document, locus, code); the empty selection
    yields no findings. Unknown codes raise UnknownRuleCode.
    """
    codes = ALL_CODES if selection is None else tuple(selection)
    unknown = [c for c in codes if c not in RULES]
    if unknown:
        raise UnknownRuleCode(", ".join(sorted(unknown)))
    ordered = sorted(docs, key=lambda d: d.source)
    ctx = _Context(ordered)
    findings: list[Finding] = []
    for code in codes:
        findings += RULES[code].check(ctx)
    return sort_findings(findings)


# --- Completeness -------------------------------------------------------------


def completeness_report(docs: Iterable[ModelDocument]) -> list[Finding]:
    """Warnings for underspecified parts; never errors, never blocking."""
    ordered = sorted(docs, key=lambda d: d.source)
    ctx = _Context(ordered)
    findings: list[Finding] = []
    for doc in ordered:
        for comp in doc.components:
            if comp.name not in ctx.automaton_by_component \
                    and comp.name not in ctx.networks:
                findings.append(Finding(
                    "W-CMP-01", WARNING, doc.source, f"component {comp.name}",
                    "component has no automaton and no decomposition network"))
        for net in doc.networks:
            wired = {(w.source.instance, w.source.port) for w in net.wires}
            wired |= {(w.sink.instance, w.sink.port) for w in net.wires}
            for node in net.nodes:
                interface = ctx.node_interface(net, node.instance)
                if interface is None:
                    continue
                for c in interface[0] + interface[1]:
                    if (node.instance, c.name) not in wired:
                        findings.append(Finding(
                            "W-NET-01", WARNING, doc.source,
                            f"network {net.name}/node {node.instance}",
                            f"port {c.name!r} is not wired"))
            for c in net.external_inputs + net.external_outputs:
                if (None, c.name) not in wired:
                    findings.append(Finding(
                        "W-NET-01", WARNING, doc.source, f"network {net.name}",
                        f"external channel {c.name!r} is not wired"))
    findings += _unreferenced_datatypes(ordered)
    return sort_findings(findings)


def _referenced_types(docs: list[ModelDocument]) -> set[str]:
    used: set[str] = set()

    def visit(dtype: DataTypeDef) -> None:
        if dtype.name:
            if dtype.name in used:
                return
            used.add(dtype.name)
        shape = dtype.shape
        if isinstance(shape, RecordShape):
            for _, ftype in shape.fields:
                visit(ftype)

    for doc in docs:
        for comp in doc.components:
            for c in comp.inputs + comp.outputs:
                visit(c.msg_type)
        for auto in doc.automata:
            for c in auto.inputs + auto.outputs:
                visit(c.msg_type)
            for v in auto.variables:
                visit(v.dtype)
        for net in doc.networks:
            for c in net.external_inputs + net.external_outputs:
                visit(c.msg_type)
    return used


def _unreferenced_datatypes(docs: list[ModelDocument]) -> list[Finding]:
    used = _referenced_types(docs)
    findings = []
    for doc in docs:
        for dt in doc.datatypes:
            if dt.name not in used:
                findings.append(Finding(
                    "W-DT-01", WARNING, doc.source, f"datatype {dt.name}",
                    "datatype is never referenced"))
    return findings

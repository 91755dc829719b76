"""Canonical printer: parse_model(print_model(doc)) equals doc."""

from __future__ import annotations

from ..behavior import Transition
from ..errors import IllformedDocument
from ..expr import print_expr
from ..kernel import (
    DataTypeDef,
    Enumeration,
    IntRange,
    MessageValue,
    RecordShape,
)
from ..refinement import RefinementClaim
from .ast import (
    AutomatonDecl,
    ComponentDecl,
    IterRef,
    ModelDocument,
    NetworkDecl,
    ParRef,
    RefLeaf,
    SeqRef,
    TraceDecl,
    TraceExprRef,
    TraceSpecDecl,
)


def print_model(doc: ModelDocument) -> str:
    """Render a document in canonical form (stable under reparsing)."""
    blocks: list[str] = []
    for path in doc.imports:
        blocks.append(f'import "{path}"')
    for dt in doc.datatypes:
        if not dt.name:
            raise IllformedDocument("top-level datatypes need names")
        blocks.append(f"datatype {dt.name} = {type_text(dt, top=True)}")
    for comp in doc.components:
        blocks.append(_component(comp))
    for auto in doc.automata:
        blocks.append(_automaton(auto))
    for net in doc.networks:
        blocks.append(_network(net))
    for tr in doc.traces:
        blocks.append(_trace(tr))
    for spec in doc.tracespecs:
        binding = f" for {spec.for_network}" if spec.for_network else ""
        blocks.append(f"tracespec {spec.name}{binding} = {_trace_expr(spec.expr)}")
    for claim in doc.refinement_claims:
        blocks.append(_claim(claim))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def type_text(dt: DataTypeDef, top: bool = False) -> str:
    """A type in reference position: its name, or its inline shape if anonymous."""
    if dt.name and not top:
        return dt.name
    shape = dt.shape
    if isinstance(shape, IntRange):
        return f"int {shape.lo} .. {shape.hi}"
    if isinstance(shape, Enumeration):
        return "enum { %s }" % ", ".join(shape.literals)
    assert isinstance(shape, RecordShape)
    return "record { %s }" % ", ".join(
        f"{fname}: {type_text(ftype)}" for fname, ftype in shape.fields)


def literal_text(value: MessageValue) -> str:
    if isinstance(value.payload, tuple):
        inner = ", ".join(f"{n}: {literal_text(v)}" for n, v in value.payload)
        return "{%s}" % inner
    return str(value.payload)


def _ports(inputs, outputs) -> list[str]:
    lines = [f"  in {c.name}: {type_text(c.msg_type)}" for c in inputs]
    lines += [f"  out {c.name}: {type_text(c.msg_type)}" for c in outputs]
    return lines


def _component(comp: ComponentDecl) -> str:
    lines = [f"component {comp.name}"]
    lines += _ports(comp.inputs, comp.outputs)
    lines.append("end")
    return "\n".join(lines)


def _transition(t: Transition) -> str:
    parts = [f"  trans {t.source} -> {t.target}"]
    if t.patterns:
        parts.append("when " + ", ".join(f"{p.channel.name}?{p.var}" for p in t.patterns))
    if t.guard is not None:
        parts.append(f"if {print_expr(t.guard)}")
    if t.emissions:
        parts.append("emit " + ", ".join(f"{e.channel.name}!{print_expr(e.expr)}"
                                         for e in t.emissions))
    if t.updates:
        parts.append("set " + ", ".join(f"{u.var} = {print_expr(u.expr)}"
                                        for u in t.updates))
    return " ".join(parts)


def _automaton(auto: AutomatonDecl) -> str:
    binding = f" for {auto.for_component}" if auto.for_component else ""
    lines = [f"automaton {auto.name}{binding}"]
    lines += _ports(auto.inputs, auto.outputs)
    for v in auto.variables:
        lines.append(f"  var {v.name}: {type_text(v.dtype)} = {literal_text(v.init)}")
    for s in auto.states:
        lines.append(f"  state {s}" + (" initial" if s == auto.initial else ""))
    for t in auto.transitions:
        lines.append(_transition(t))
    lines.append("end")
    return "\n".join(lines)


def _network(net: NetworkDecl) -> str:
    lines = [f"network {net.name}"]
    lines += _ports(net.external_inputs, net.external_outputs)
    for node in net.nodes:
        lines.append(f"  node {node.instance}: {node.component}")
    for w in net.wires:
        prefix = "" if (w.source.instance is None or w.sink.instance is None) \
            else f"{w.name}: "
        lines.append(f"  wire {prefix}{w.source.describe()} -> {w.sink.describe()}")
    lines.append("end")
    return "\n".join(lines)


def _trace(tr: TraceDecl) -> str:
    binding = f" for {tr.for_network}" if tr.for_network else ""
    lines = [f"trace {tr.name}{binding}"]
    for e in tr.trace.events:
        lines.append(f"  event {e.sender} -> {e.receiver} {e.channel} "
                     f"{literal_text(e.message)} @ {e.interval}")
    lines.append("end")
    return "\n".join(lines)


def _trace_expr(node: TraceExprRef) -> str:
    if isinstance(node, RefLeaf):
        return node.trace
    if isinstance(node, SeqRef):
        return f"seq({_trace_expr(node.first)}, {_trace_expr(node.second)})"
    if isinstance(node, ParRef):
        return f"par({_trace_expr(node.left)}, {_trace_expr(node.right)})"
    assert isinstance(node, IterRef)
    return f"iter({_trace_expr(node.body)}, {node.max_repetitions})"


def _claim(claim: RefinementClaim) -> str:
    lines = [f"refinement {claim.name}",
             f"  kind {claim.kind}",
             f"  abstract {claim.abstract_ref}",
             f"  concrete {claim.concrete_ref}"]
    if claim.repr_ref:
        lines.append(f"  repr {claim.repr_ref}")
    if claim.abst_ref:
        lines.append(f"  abst {claim.abst_ref}")
    lines.append(f"  horizon {claim.horizon}")
    if claim.slack:
        lines.append(f"  slack {claim.slack}")
    lines.append(f"  policy {claim.policy}")
    for channel, values in claim.domains:
        values_text = ", ".join(literal_text(v) for v in values)
        lines.append(f"  domain {channel} = {{ {values_text} }}")
    lines.append("end")
    return "\n".join(lines)

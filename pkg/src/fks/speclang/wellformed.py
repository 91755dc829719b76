"""Single-document context conditions.

Produces findings, never raises: duplicate names, expression typing of
guards/emissions/updates, variable initial values, initial-state presence,
and port direction legality of wires (judged against interfaces declared
in the same document). Cross-view agreement lives in the consistency
module.

Finding codes: WF-DUP-01 duplicate name, WF-DUP-02 second automaton for a
component, WF-TY-01 expression type mismatch, WF-TY-02 bad initial value,
WF-ST-01 initial-state defect, WF-PT-01 illegal wire direction, WF-PT-02
endpoint wired twice, WF-TR-01 pattern/emission against channel direction.
"""

from __future__ import annotations

from .. import expr as ex
from ..findings import ERROR, Finding, sort_findings
from ..kernel import ChannelId
from .ast import AutomatonDecl, ModelDocument, NetworkDecl


def check_wellformedness(doc: ModelDocument) -> list[Finding]:
    findings: list[Finding] = []
    findings += _duplicates(doc)
    for auto in doc.automata:
        findings += _check_automaton(doc, auto)
    for net in doc.networks:
        findings += _check_network(doc, net)
    return sort_findings(findings)


def _find(doc: ModelDocument, code: str, path: str, message: str) -> Finding:
    return Finding(code, ERROR, doc.source, path, message)


def _duplicates(doc: ModelDocument) -> list[Finding]:
    findings = []
    spaces = [
        ("datatype", [d.name for d in doc.datatypes]),
        ("component", [c.name for c in doc.components]),
        ("automaton", [a.name for a in doc.automata]),
        ("network", [n.name for n in doc.networks]),
        ("trace", [t.name for t in doc.traces] + [s.name for s in doc.tracespecs]),
        ("refinement", [c.name for c in doc.refinement_claims]),
    ]
    for kind, names in spaces:
        seen: set[str] = set()
        for name in names:
            if name in seen:
                findings.append(_find(doc, "WF-DUP-01", f"{kind} {name}",
                                      f"duplicate {kind} name {name!r}"))
            seen.add(name)
    owners: set[str] = set()
    for auto in doc.automata:
        if auto.for_component:
            if auto.for_component in owners:
                findings.append(_find(
                    doc, "WF-DUP-02", f"automaton {auto.name}",
                    f"component {auto.for_component!r} already has an automaton"))
            owners.add(auto.for_component)
    return findings


def _check_automaton(doc: ModelDocument, auto: AutomatonDecl) -> list[Finding]:
    findings = []
    path = f"automaton {auto.name}"
    if not auto.states:
        findings.append(_find(doc, "WF-ST-01", path, "no control states declared"))
    elif not auto.initial:
        findings.append(_find(doc, "WF-ST-01", path, "no state is marked initial"))
    base_env = {}
    for v in auto.variables:
        if not v.init.conforms(v.dtype):
            findings.append(_find(
                doc, "WF-TY-02", f"{path}/var {v.name}",
                f"initial value {v.init.describe()} does not conform to "
                f"{v.dtype.describe()}"))
        base_env[v.name] = v.dtype
    inputs = {c.name for c in auto.inputs}
    outputs = {c.name for c in auto.outputs}
    for idx, t in enumerate(auto.transitions):
        tpath = f"{path}/transition {idx}"
        env = dict(base_env)
        for p in t.patterns:
            if p.channel.name not in inputs:
                findings.append(_find(
                    doc, "WF-TR-01", tpath,
                    f"pattern reads {p.channel.name!r}, which is not an input"))
            env[p.var] = p.channel.msg_type
        if t.guard is not None:
            findings += _type_findings(doc, tpath, "guard", t.guard, "bool", env)
        for e in t.emissions:
            if e.channel.name not in outputs:
                findings.append(_find(
                    doc, "WF-TR-01", tpath,
                    f"emission writes {e.channel.name!r}, which is not an output"))
            findings += _type_findings(doc, tpath, f"emission on {e.channel.name}",
                                       e.expr, ex.lift(e.channel.msg_type), env)
        var_types = {v.name: v.dtype for v in auto.variables}
        for u in t.updates:
            if u.var in var_types:
                findings += _type_findings(doc, tpath, f"update of {u.var}",
                                           u.expr, ex.lift(var_types[u.var]), env)
    return findings


def _type_findings(doc: ModelDocument, path: str, what: str, expr: ex.Expr,
                   expected: ex.ExprType, env: dict) -> list[Finding]:
    try:
        ex.check(expr, expected, env)
        return []
    except ex.ExprTypeError as err:
        return [_find(doc, "WF-TY-01", path, f"{what}: {err}")]


def _check_network(doc: ModelDocument, net: NetworkDecl) -> list[Finding]:
    findings = []
    path = f"network {net.name}"
    components = {c.name: c for c in doc.components}
    networks = {n.name: n for n in doc.networks}

    def port_direction(instance: str, port: str) -> str | None:
        # "in" | "out" | None when unknown in this document
        node = next((n for n in net.nodes if n.instance == instance), None)
        if node is None:
            return None
        ins: tuple[ChannelId, ...]
        if node.component in networks and node.component != net.name:
            sub = networks[node.component]
            ins, outs = sub.external_inputs, sub.external_outputs
        elif node.component in components:
            comp = components[node.component]
            ins, outs = comp.inputs, comp.outputs
        else:
            return None
        if any(c.name == port for c in ins):
            return "in"
        if any(c.name == port for c in outs):
            return "out"
        return "missing"

    used: set[tuple[str | None, str]] = set()
    ext_in = {c.name for c in net.external_inputs}
    for idx, w in enumerate(net.wires):
        wpath = f"{path}/wire {w.name}"
        if w.source.instance is None and w.sink.instance is None:
            findings.append(_find(doc, "WF-PT-01", wpath,
                                  "environment feed-through is not allowed"))
        if w.source.instance is None and w.source.port not in ext_in:
            findings.append(_find(doc, "WF-PT-01", wpath,
                                  f"source {w.source.port!r} is not an external input"))
        if w.sink.instance is None and w.sink.port in ext_in:
            findings.append(_find(doc, "WF-PT-01", wpath,
                                  f"sink {w.sink.port!r} is an external input"))
        for role, end, want in (("source", w.source, "out"), ("sink", w.sink, "in")):
            if end.instance is None:
                continue
            direction = port_direction(end.instance, end.port)
            if direction == "missing":
                findings.append(_find(
                    doc, "WF-PT-01", wpath,
                    f"{role} port {end.describe()} is not declared by its component"))
            elif direction is not None and direction != want:
                findings.append(_find(
                    doc, "WF-PT-01", wpath,
                    f"{role} {end.describe()} has direction {direction!r}, needs {want!r}"))
        for end in (w.source, w.sink):
            key = (end.instance, end.port)
            if key in used:
                findings.append(_find(doc, "WF-PT-02", wpath,
                                      f"endpoint {end.describe()} wired twice"))
            used.add(key)
    return findings

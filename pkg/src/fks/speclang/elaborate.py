"""Corpus loading and elaboration into semantic objects.

A corpus is an ordered set of parsed documents (one per file, imports
first). Elaboration resolves name references into the semantic types the
execution and checking engines consume: StateMachine for components with
automata, NetworkDef for structure views (recursively, with cycle
detection), TraceExpr for trace expressions, and (spec, spec) pairs for
refinement claims.

An automaton attached to a component is elaborated against the component's
interface (the automaton's own channel declarations must agree per rule
C-IF-01); standalone automata use their declared channels.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .. import traces as tr
from ..behavior import StateMachine, VarDecl
from ..errors import CyclicHierarchy, InvalidModel, UnknownNetwork
from ..kernel import ChannelId
from ..network import Endpoint, NetworkDef, NetworkNode, UnwiredPortWarning, Wire
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
    TraceSpecDecl,
)
from .parser import Diagnostic, ParseEnv, ParseReport, parse_model


@dataclass
class Corpus:
    """Documents plus merged name tables (first declaration wins)."""

    documents: list[ModelDocument]
    datatypes: dict[str, object] = field(default_factory=dict)
    components: dict[str, ComponentDecl] = field(default_factory=dict)
    automata: dict[str, AutomatonDecl] = field(default_factory=dict)
    automaton_by_component: dict[str, AutomatonDecl] = field(default_factory=dict)
    networks: dict[str, NetworkDecl] = field(default_factory=dict)
    traces: dict[str, TraceDecl] = field(default_factory=dict)
    tracespecs: dict[str, TraceSpecDecl] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for doc in self.documents:
            for dt in doc.datatypes:
                self.datatypes.setdefault(dt.name, dt)
            for comp in doc.components:
                self.components.setdefault(comp.name, comp)
            for auto in doc.automata:
                self.automata.setdefault(auto.name, auto)
                if auto.for_component:
                    self.automaton_by_component.setdefault(auto.for_component, auto)
            for net in doc.networks:
                self.networks.setdefault(net.name, net)
            for trace in doc.traces:
                self.traces.setdefault(trace.name, trace)
            for spec in doc.tracespecs:
                self.tracespecs.setdefault(spec.name, spec)

    def claims(self) -> list[RefinementClaim]:
        return [c for doc in self.documents for c in doc.refinement_claims]

    def claim(self, name: str) -> RefinementClaim:
        for c in self.claims():
            if c.name == name:
                return c
        raise InvalidModel(f"no refinement claim named {name!r}")

    # -- machines --

    def machine(self, name: str) -> StateMachine:
        """Elaborate the machine behind an automaton or component name."""
        auto = self.automata.get(name)
        interface: ComponentDecl | None = None
        if auto is None:
            interface = self.components.get(name)
            if interface is None:
                raise InvalidModel(f"no automaton or component named {name!r}")
            auto = self.automaton_by_component.get(name)
            if auto is None:
                raise InvalidModel(f"component {name!r} has no automaton")
        elif auto.for_component:
            interface = self.components.get(auto.for_component)
        inputs = interface.inputs if interface else auto.inputs
        outputs = interface.outputs if interface else auto.outputs
        return StateMachine(
            name=name,
            inputs=inputs,
            outputs=outputs,
            states=auto.states,
            initial=auto.initial,
            variables=tuple(VarDecl(v.name, v.dtype, v.init) for v in auto.variables),
            transitions=auto.transitions,
        )

    # -- networks --

    def network(self, name: str) -> NetworkDef:
        decl = self.networks.get(name)
        if decl is None:
            raise UnknownNetwork(name)
        return self._elaborate_network(decl, visiting=())

    def _behavior_for_node(self, component: str, visiting: tuple[str, ...]):
        if component in self.networks:
            return self._elaborate_network(self.networks[component], visiting)
        return self.machine(component)

    def _elaborate_network(self, decl: NetworkDecl,
                           visiting: tuple[str, ...]) -> NetworkDef:
        if decl.name in visiting:
            raise CyclicHierarchy(" -> ".join(visiting + (decl.name,)))
        nodes = []
        port_tables: dict[str, dict[str, ChannelId]] = {}
        for node in decl.nodes:
            behavior = self._behavior_for_node(node.component,
                                               visiting + (decl.name,))
            nodes.append(NetworkNode(node.instance, behavior))
            if isinstance(behavior, StateMachine):
                ins, outs = behavior.inputs, behavior.outputs
            else:
                ins, outs = behavior.external_inputs, behavior.external_outputs
            port_tables[node.instance] = {c.name: c for c in ins + outs}
        env_channels = {c.name: c for c in
                        decl.external_inputs + decl.external_outputs}
        wires = []
        for w in decl.wires:
            endpoints = []
            for ref in (w.source, w.sink):
                if ref.instance is None:
                    endpoints.append(Endpoint(None, env_channels[ref.port]))
                else:
                    port = port_tables[ref.instance].get(ref.port)
                    if port is None:
                        raise InvalidModel(
                            f"network {decl.name}: wire {w.name} references "
                            f"unknown port {ref.describe()}")
                    endpoints.append(Endpoint(ref.instance, port))
            wires.append(Wire(w.name, endpoints[0], endpoints[1]))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UnwiredPortWarning)
            return NetworkDef(decl.name, decl.external_inputs, decl.external_outputs,
                              tuple(nodes), tuple(wires))

    # -- refinement claim specs --

    def spec(self, name: str):
        """Resolve a claim reference: network first, then component/automaton."""
        if name in self.networks:
            return self.network(name)
        return self.machine(name)

    # -- trace expressions --

    def trace_expr(self, name: str) -> tr.TraceExpr:
        if name in self.traces:
            return tr.Leaf(self.traces[name].trace)
        spec = self.tracespecs.get(name)
        if spec is None:
            raise InvalidModel(f"no trace or tracespec named {name!r}")
        return self._elaborate_trace_expr(spec, visiting=())

    def _elaborate_trace_expr(self, spec: TraceSpecDecl,
                              visiting: tuple[str, ...]) -> tr.TraceExpr:
        if spec.name in visiting:
            raise CyclicHierarchy(" -> ".join(visiting + (spec.name,)))

        def walk(node) -> tr.TraceExpr:
            if isinstance(node, RefLeaf):
                if node.trace in self.traces:
                    return tr.Leaf(self.traces[node.trace].trace)
                inner = self.tracespecs.get(node.trace)
                if inner is None:
                    raise InvalidModel(f"no trace or tracespec named {node.trace!r}")
                return self._elaborate_trace_expr(inner, visiting + (spec.name,))
            if isinstance(node, SeqRef):
                return tr.Seq(walk(node.first), walk(node.second))
            if isinstance(node, ParRef):
                return tr.Par(walk(node.left), walk(node.right))
            assert isinstance(node, IterRef)
            return tr.Iter(walk(node.body), node.max_repetitions)

        return walk(spec.expr)


@dataclass(frozen=True)
class CorpusLoad:
    corpus: Corpus | None
    reports: tuple[tuple[str, ParseReport], ...]  # (path, report) in load order

    @property
    def ok(self) -> bool:
        return self.corpus is not None

    def diagnostics(self) -> list[tuple[str, Diagnostic]]:
        return [(path, d) for path, report in self.reports for d in report.diagnostics]


def load_corpus(paths: list[str | Path]) -> CorpusLoad:
    """Load files and their imports (depth-first, deduplicated, cycle-checked)."""
    reports: list[tuple[str, ParseReport]] = []
    loaded: set[Path] = set()
    exports: dict[Path, list[ModelDocument]] = {}
    order: list[ModelDocument] = []

    def load(path: Path, stack: tuple[Path, ...]) -> None:
        path = path.resolve()
        if path in loaded:
            return
        if path in stack:
            cycle = " -> ".join(str(p) for p in stack + (path,))
            reports.append((str(path), ParseReport(None, (
                Diagnostic("error", "E-IMP-01", f"import cycle: {cycle}", 1, 1),))))
            loaded.add(path)
            return
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as err:
            reports.append((str(path), ParseReport(None, (
                Diagnostic("error", "E-IMP-01", f"cannot read {path}: {err}", 1, 1),))))
            loaded.add(path)
            return
        # Two passes: first discover imports (without an env), then parse
        # for real with the transitively imported names in scope.
        probe = parse_model(text, ParseEnv(), str(path))
        if probe.document is not None:
            import_names = probe.document.imports
        else:
            import_names = _imports_only(text)
        visible: list[ModelDocument] = []
        for rel in import_names:
            target = (path.parent / rel)
            load(target, stack + (path,))
            for doc in exports.get(target.resolve(), []):
                if doc not in visible:
                    visible.append(doc)
        env = ParseEnv.from_documents(visible)
        report = parse_model(text, env, str(path))
        reports.append((str(path), report))
        loaded.add(path)
        if report.document is not None:
            exports[path] = [report.document] + visible
            order.append(report.document)

    for p in paths:
        load(Path(p), ())
    if any(report.document is None for _, report in reports):
        return CorpusLoad(None, tuple(reports))
    return CorpusLoad(Corpus(order), tuple(reports))


def _imports_only(text: str) -> tuple[str, ...]:
    """Best-effort import extraction from an otherwise broken file."""
    names = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("import") and '"' in stripped:
            names.append(stripped.split('"')[1])
    return tuple(names)

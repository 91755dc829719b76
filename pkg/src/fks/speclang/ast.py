"""Document-level abstract syntax.

Declarations are name-referenced (a network node names its component, a
trace names its channels) so that incomplete and inconsistent documents
remain representable; the elaborator turns a corpus of documents into the
fully resolved semantic objects (StateMachine, NetworkDef).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..behavior import Transition
from ..kernel import ChannelId, DataTypeDef, MessageValue
from ..refinement import RefinementClaim
from ..traces import EventTrace


@dataclass(frozen=True)
class ComponentDecl:
    """A component's syntactic interface as drawn in the structure view."""

    name: str
    inputs: tuple[ChannelId, ...]
    outputs: tuple[ChannelId, ...]


@dataclass(frozen=True)
class VarDef:
    name: str
    dtype: DataTypeDef
    init: MessageValue


@dataclass(frozen=True)
class AutomatonDecl:
    """A state transition diagram, optionally attached to a component.

    The automaton declares its own channel set; cross-view agreement with
    the owning component's interface is a consistency rule, not a parse
    condition.
    """

    name: str
    for_component: str  # "" when standalone
    inputs: tuple[ChannelId, ...]
    outputs: tuple[ChannelId, ...]
    states: tuple[str, ...]
    initial: str  # "" when no state is marked initial
    variables: tuple[VarDef, ...]
    transitions: tuple[Transition, ...]


@dataclass(frozen=True)
class EndpointRef:
    """A wire end at declaration level: env channel or instance.port name."""

    instance: str | None
    port: str

    def describe(self) -> str:
        return self.port if self.instance is None else f"{self.instance}.{self.port}"


@dataclass(frozen=True)
class WireDecl:
    name: str
    source: EndpointRef
    sink: EndpointRef


@dataclass(frozen=True)
class NodeDecl:
    instance: str
    component: str


@dataclass(frozen=True)
class NetworkDecl:
    name: str
    external_inputs: tuple[ChannelId, ...]
    external_outputs: tuple[ChannelId, ...]
    nodes: tuple[NodeDecl, ...]
    wires: tuple[WireDecl, ...]


@dataclass(frozen=True)
class TraceDecl:
    name: str
    for_network: str  # "" when unbound
    trace: EventTrace


@dataclass(frozen=True)
class RefLeaf:
    trace: str


@dataclass(frozen=True)
class SeqRef:
    first: "TraceExprRef"
    second: "TraceExprRef"


@dataclass(frozen=True)
class ParRef:
    left: "TraceExprRef"
    right: "TraceExprRef"


@dataclass(frozen=True)
class IterRef:
    body: "TraceExprRef"
    max_repetitions: int


TraceExprRef = Union[RefLeaf, SeqRef, ParRef, IterRef]


@dataclass(frozen=True)
class TraceSpecDecl:
    name: str
    for_network: str
    expr: TraceExprRef


@dataclass(frozen=True)
class ModelDocument:
    imports: tuple[str, ...] = ()
    datatypes: tuple[DataTypeDef, ...] = ()
    components: tuple[ComponentDecl, ...] = ()
    automata: tuple[AutomatonDecl, ...] = ()
    networks: tuple[NetworkDecl, ...] = ()
    traces: tuple[TraceDecl, ...] = ()
    tracespecs: tuple[TraceSpecDecl, ...] = ()
    refinement_claims: tuple[RefinementClaim, ...] = ()
    source: str = field(default="<memory>", compare=False)

    def is_empty(self) -> bool:
        return not any((self.imports, self.datatypes, self.components, self.automata,
                        self.networks, self.traces, self.tracespecs,
                        self.refinement_claims))

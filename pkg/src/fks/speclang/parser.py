"""Recursive-descent parser producing a ModelDocument plus diagnostics.

The parser is total: syntax errors and unresolved lexically-scoped names
become error diagnostics (each with a source position) and parsing resumes
at the next declaration. Cross-view references (a node's component, a
trace's channels, a claim's specs) stay name-based here; the consistency
engine and the elaborator judge them against a whole corpus.

Every diagnostic code is stable:

  E-LEX-01 lexical error               E-REF-01 unknown type name
  E-SYN-01 unexpected token            E-REF-02 unresolved channel
  E-SYN-03 internal wire needs a name  E-REF-03 unresolved name in expression
  E-SYN-04 env wire name mismatch      E-REF-04 unknown control state
  E-CLM-01 invalid refinement claim    E-REF-08 ambiguous enumeration literal
  E-VAL-01 invalid literal or type     E-IMP-01 import failure (loader)
  E-DUP-01 duplicate within one block
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import expr as ex
from ..behavior import Emission, Pattern, Transition, Update
from ..errors import InvalidModel
from ..kernel import (
    ChannelId,
    DataTypeDef,
    Enumeration,
    MessageValue,
    RecordShape,
    int_type,
)
from ..refinement import RefinementClaim
from ..traces import EventTrace, TraceEvent
from .ast import (
    AutomatonDecl,
    ComponentDecl,
    EndpointRef,
    IterRef,
    ModelDocument,
    NetworkDecl,
    NodeDecl,
    ParRef,
    RefLeaf,
    SeqRef,
    TraceDecl,
    TraceExprRef,
    TraceSpecDecl,
    VarDef,
    WireDecl,
)
from .lexer import LexError, Token, tokenize

TOP_KEYWORDS = ("import", "datatype", "component", "automaton", "network",
                "trace", "tracespec", "refinement")


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    message: str
    line: int
    col: int

    def describe(self) -> str:
        return f"{self.line}:{self.col}: {self.severity}[{self.code}] {self.message}"


@dataclass(frozen=True)
class ParseReport:
    document: ModelDocument | None
    diagnostics: tuple[Diagnostic, ...]

    @property
    def ok(self) -> bool:
        return self.document is not None

    def errors(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity == "error")


@dataclass
class ParseEnv:
    """Names exported by imported documents, available during parsing."""

    datatypes: dict[str, DataTypeDef] = field(default_factory=dict)

    @staticmethod
    def from_documents(docs: list[ModelDocument]) -> "ParseEnv":
        env = ParseEnv()
        for doc in docs:
            for dt in doc.datatypes:
                env.datatypes.setdefault(dt.name, dt)
        return env


class _Recover(Exception):
    """Internal: abandon the current declaration and resync."""


class _Parser:
    def __init__(self, tokens: list[Token], env: ParseEnv, source: str):
        self.tokens = tokens
        self.pos = 0
        self.env = env
        self.source = source
        self.diagnostics: list[Diagnostic] = []
        self.datatypes: dict[str, DataTypeDef] = {}

    # -- token plumbing --

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def at(self, kind: str, text: str | None = None) -> bool:
        return self.cur.kind == kind and (text is None or self.cur.text == text)

    def at_keyword(self, *words: str) -> bool:
        return self.cur.kind == "keyword" and self.cur.text in words

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, code: str, message: str, tok: Token | None = None) -> None:
        tok = tok or self.cur
        self.diagnostics.append(Diagnostic("error", code, message, tok.line, tok.col))

    def fail(self, code: str, message: str, tok: Token | None = None) -> None:
        self.error(code, message, tok)
        raise _Recover()

    def expect(self, kind: str, what: str) -> Token:
        if self.cur.kind != kind:
            self.fail("E-SYN-01", f"expected {what}, found {self.cur.describe()}")
        return self.advance()

    def expect_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            self.fail("E-SYN-01", f"expected {word!r}, found {self.cur.describe()}")
        return self.advance()

    def expect_ident(self, what: str) -> str:
        if self.cur.kind != "ident":
            self.fail("E-SYN-01", f"expected {what}, found {self.cur.describe()}")
        return self.advance().text

    def sync_to_top(self) -> None:
        while not (self.cur.kind == "eof" or self.at_keyword(*TOP_KEYWORDS)):
            self.advance()

    def sync_within(self, *item_words: str) -> None:
        while not (self.cur.kind == "eof"
                   or self.at_keyword("end")
                   or self.at_keyword(*item_words)
                   or self.at_keyword(*TOP_KEYWORDS)):
            self.advance()

    # -- document --

    def parse_document(self) -> ModelDocument:
        imports: list[str] = []
        datatypes: list[DataTypeDef] = []
        components: list[ComponentDecl] = []
        automata: list[AutomatonDecl] = []
        networks: list[NetworkDecl] = []
        traces: list[TraceDecl] = []
        tracespecs: list[TraceSpecDecl] = []
        claims: list[RefinementClaim] = []
        while self.cur.kind != "eof":
            try:
                if self.at_keyword("import"):
                    self.advance()
                    imports.append(self.expect("string", "file path").text)
                elif self.at_keyword("datatype"):
                    dt = self.parse_datatype()
                    datatypes.append(dt)
                    self.datatypes.setdefault(dt.name, dt)
                elif self.at_keyword("component"):
                    components.append(self.parse_component())
                elif self.at_keyword("automaton"):
                    automata.append(self.parse_automaton())
                elif self.at_keyword("network"):
                    networks.append(self.parse_network())
                elif self.at_keyword("trace"):
                    traces.append(self.parse_trace())
                elif self.at_keyword("tracespec"):
                    tracespecs.append(self.parse_tracespec())
                elif self.at_keyword("refinement"):
                    claims.append(self.parse_refinement())
                else:
                    self.fail("E-SYN-01",
                              f"expected a declaration, found {self.cur.describe()}")
            except _Recover:
                self.sync_to_top()
        return ModelDocument(
            imports=tuple(imports), datatypes=tuple(datatypes),
            components=tuple(components), automata=tuple(automata),
            networks=tuple(networks), traces=tuple(traces),
            tracespecs=tuple(tracespecs), refinement_claims=tuple(claims),
            source=self.source)

    # -- types --

    def lookup_type(self, name: str, tok: Token) -> DataTypeDef:
        dt = self.datatypes.get(name) or self.env.datatypes.get(name)
        if dt is None:
            self.fail("E-REF-01", f"unknown type {name!r}", tok)
        return dt

    def parse_datatype(self) -> DataTypeDef:
        self.expect_keyword("datatype")
        name = self.expect_ident("type name")
        self.expect("=", "'='")
        return self.parse_type_expr(name)

    def parse_type_expr(self, name: str = "") -> DataTypeDef:
        tok = self.cur
        try:
            if self.at_keyword("int"):
                self.advance()
                lo = self.parse_signed_int()
                self.expect("..", "'..'")
                hi = self.parse_signed_int()
                return int_type(lo, hi, name)
            if self.at_keyword("enum"):
                self.advance()
                self.expect("{", "'{'")
                literals = [self.expect_ident("enumeration literal")]
                while self.at(","):
                    self.advance()
                    literals.append(self.expect_ident("enumeration literal"))
                self.expect("}", "'}'")
                return DataTypeDef(name, Enumeration(tuple(literals)))
            if self.at_keyword("record"):
                self.advance()
                self.expect("{", "'{'")
                fields = [self.parse_record_field()]
                while self.at(","):
                    self.advance()
                    fields.append(self.parse_record_field())
                self.expect("}", "'}'")
                return DataTypeDef(name, RecordShape(tuple(fields)))
        except InvalidModel as err:
            self.fail("E-VAL-01", str(err), tok)
        if self.cur.kind == "ident":
            ref_tok = self.advance()
            referee = self.lookup_type(ref_tok.text, ref_tok)
            if name and name != referee.name:
                # A named alias shares the shape under the new name.
                return DataTypeDef(name, referee.shape)
            return referee
        self.fail("E-SYN-01", f"expected a type, found {self.cur.describe()}")
        raise AssertionError  # unreachable

    def parse_record_field(self) -> tuple[str, DataTypeDef]:
        fname = self.expect_ident("field name")
        self.expect(":", "':'")
        return fname, self.parse_type_expr()

    def parse_signed_int(self) -> int:
        negative = False
        if self.at("-"):
            self.advance()
            negative = True
        value = int(self.expect("int", "an integer").text)
        return -value if negative else value

    # -- literals --

    def parse_literal(self) -> MessageValue:
        if self.at("-") or self.cur.kind == "int":
            return MessageValue(self.parse_signed_int())
        if self.cur.kind == "ident":
            return MessageValue(self.advance().text)
        if self.at("{"):
            self.advance()
            fields = [self.parse_literal_field()]
            while self.at(","):
                self.advance()
                fields.append(self.parse_literal_field())
            self.expect("}", "'}'")
            names = [n for n, _ in fields]
            if len(set(names)) != len(names):
                self.fail("E-VAL-01", f"duplicate record fields {names}")
            return MessageValue(tuple(fields))
        self.fail("E-SYN-01", f"expected a literal, found {self.cur.describe()}")
        raise AssertionError

    def parse_literal_field(self) -> tuple[str, MessageValue]:
        fname = self.expect_ident("field name")
        self.expect(":", "':'")
        return fname, self.parse_literal()

    # -- ports --

    def parse_port(self, inputs: list[ChannelId], outputs: list[ChannelId]) -> None:
        is_input = self.at_keyword("in")
        self.advance()
        name_tok = self.cur
        name = self.expect_ident("channel name")
        self.expect(":", "':'")
        dtype = self.parse_type_expr()
        for existing in inputs + outputs:
            if existing.name == name:
                self.error("E-DUP-01", f"channel {name!r} declared twice", name_tok)
                return
        (inputs if is_input else outputs).append(ChannelId(name, dtype))

    # -- components --

    def parse_component(self) -> ComponentDecl:
        self.expect_keyword("component")
        name = self.expect_ident("component name")
        inputs: list[ChannelId] = []
        outputs: list[ChannelId] = []
        while not self.at_keyword("end"):
            if self.at_keyword("in", "out"):
                try:
                    self.parse_port(inputs, outputs)
                except _Recover:
                    self.sync_within("in", "out")
            elif self.cur.kind == "eof":
                self.fail("E-SYN-01", f"component {name}: missing 'end'")
            else:
                self.error("E-SYN-01",
                           f"expected a port declaration, found {self.cur.describe()}")
                self.sync_within("in", "out")
                if not (self.at_keyword("in", "out", "end")):
                    raise _Recover()
        self.expect_keyword("end")
        return ComponentDecl(name, tuple(inputs), tuple(outputs))

    # -- automata --

    def parse_automaton(self) -> AutomatonDecl:
        self.expect_keyword("automaton")
        name = self.expect_ident("automaton name")
        for_component = ""
        if self.at_keyword("for"):
            self.advance()
            for_component = self.expect_ident("component name")
        inputs: list[ChannelId] = []
        outputs: list[ChannelId] = []
        variables: list[VarDef] = []
        states: list[str] = []
        initial = ""
        transitions: list[Transition] = []
        item_words = ("in", "out", "var", "state", "trans")
        while not self.at_keyword("end"):
            try:
                if self.at_keyword("in", "out"):
                    self.parse_port(inputs, outputs)
                elif self.at_keyword("var"):
                    self.advance()
                    vname = self.expect_ident("variable name")
                    self.expect(":", "':'")
                    dtype = self.parse_type_expr()
                    self.expect("=", "'='")
                    init = self.parse_literal()
                    if any(v.name == vname for v in variables):
                        self.error("E-DUP-01", f"variable {vname!r} declared twice")
                    else:
                        variables.append(VarDef(vname, dtype, init))
                elif self.at_keyword("state"):
                    self.advance()
                    sname = self.expect_ident("state name")
                    if sname in states:
                        self.error("E-DUP-01", f"state {sname!r} declared twice")
                    else:
                        states.append(sname)
                    if self.at_keyword("initial"):
                        self.advance()
                        initial = initial or sname
                elif self.at_keyword("trans"):
                    transitions.append(self.parse_transition(
                        inputs + outputs, variables, states))
                elif self.cur.kind == "eof":
                    self.fail("E-SYN-01", f"automaton {name}: missing 'end'")
                else:
                    self.fail("E-SYN-01",
                              f"expected in/out/var/state/trans, found {self.cur.describe()}")
            except _Recover:
                self.sync_within(*item_words)
                if not (self.at_keyword(*item_words) or self.at_keyword("end")):
                    raise
        self.expect_keyword("end")
        return AutomatonDecl(name, for_component, tuple(inputs), tuple(outputs),
                             tuple(states), initial, tuple(variables),
                             tuple(transitions))

    def parse_transition(self, ports: list[ChannelId], variables: list[VarDef],
                         states: list[str]) -> Transition:
        self.expect_keyword("trans")
        src_tok = self.cur
        source = self.expect_ident("source state")
        if source not in states:
            self.error("E-REF-04", f"unknown state {source!r}", src_tok)
        self.expect("->", "'->'")
        tgt_tok = self.cur
        target = self.expect_ident("target state")
        if target not in states:
            self.error("E-REF-04", f"unknown state {target!r}", tgt_tok)
        port_table = {c.name: c for c in ports}
        scope: dict[str, DataTypeDef] = {v.name: v.dtype for v in variables}
        patterns: list[Pattern] = []
        if self.at_keyword("when"):
            self.advance()
            patterns.append(self.parse_pattern(port_table, scope))
            while self.at(","):
                self.advance()
                patterns.append(self.parse_pattern(port_table, scope))
        guard = None
        if self.at_keyword("if"):
            self.advance()
            guard = self.parse_expr(scope)
        emissions: list[Emission] = []
        if self.at_keyword("emit"):
            self.advance()
            emissions.append(self.parse_emission(port_table, scope))
            while self.at(","):
                self.advance()
                emissions.append(self.parse_emission(port_table, scope))
        updates: list[Update] = []
        if self.at_keyword("set"):
            self.advance()
            updates.append(self.parse_update(scope, variables))
            while self.at(","):
                self.advance()
                updates.append(self.parse_update(scope, variables))
        return Transition(source, target, tuple(patterns), guard,
                          tuple(emissions), tuple(updates))

    def parse_pattern(self, ports: dict[str, ChannelId],
                      scope: dict[str, DataTypeDef]) -> Pattern:
        ch_tok = self.cur
        ch_name = self.expect_ident("channel name")
        self.expect("?", "'?'")
        var = self.expect_ident("binding variable")
        channel = ports.get(ch_name)
        if channel is None:
            self.fail("E-REF-02", f"unresolved channel {ch_name!r}", ch_tok)
        scope[var] = channel.msg_type
        return Pattern(channel, var)

    def parse_emission(self, ports: dict[str, ChannelId],
                       scope: dict[str, DataTypeDef]) -> Emission:
        ch_tok = self.cur
        ch_name = self.expect_ident("channel name")
        self.expect("!", "'!'")
        value = self.parse_expr(scope)
        channel = ports.get(ch_name)
        if channel is None:
            self.fail("E-REF-02", f"unresolved channel {ch_name!r}", ch_tok)
        return Emission(channel, value)

    def parse_update(self, scope: dict[str, DataTypeDef],
                     variables: list[VarDef]) -> Update:
        var_tok = self.cur
        var = self.expect_ident("variable name")
        if not any(v.name == var for v in variables):
            self.error("E-REF-03", f"assignment to undeclared variable {var!r}", var_tok)
        self.expect("=", "'='")
        return Update(var, self.parse_expr(scope))

    # -- expressions --

    def parse_expr(self, scope: dict[str, DataTypeDef]) -> ex.Expr:
        return self.parse_or(scope)

    def parse_or(self, scope) -> ex.Expr:
        left = self.parse_and(scope)
        while self.at_keyword("or"):
            self.advance()
            left = ex.Binary("or", left, self.parse_and(scope))
        return left

    def parse_and(self, scope) -> ex.Expr:
        left = self.parse_not(scope)
        while self.at_keyword("and"):
            self.advance()
            left = ex.Binary("and", left, self.parse_not(scope))
        return left

    def parse_not(self, scope) -> ex.Expr:
        if self.at_keyword("not"):
            self.advance()
            return ex.Unary("not", self.parse_not(scope))
        return self.parse_comparison(scope)

    def parse_comparison(self, scope) -> ex.Expr:
        left = self.parse_additive(scope)
        while self.cur.kind in ("==", "!=", "<", "<=", ">", ">="):
            op = self.advance().kind
            left = ex.Binary(op, left, self.parse_additive(scope))
        return left

    def parse_additive(self, scope) -> ex.Expr:
        left = self.parse_multiplicative(scope)
        while self.cur.kind in ("+", "-"):
            op = self.advance().kind
            left = ex.Binary(op, left, self.parse_multiplicative(scope))
        return left

    def parse_multiplicative(self, scope) -> ex.Expr:
        left = self.parse_unary(scope)
        while self.at("*") or self.at_keyword("div", "mod"):
            op = self.advance().text
            left = ex.Binary(op, left, self.parse_unary(scope))
        return left

    def parse_unary(self, scope) -> ex.Expr:
        if self.at("-"):
            self.advance()
            return ex.Unary("-", self.parse_unary(scope))
        return self.parse_postfix(scope)

    def parse_postfix(self, scope) -> ex.Expr:
        node = self.parse_atom(scope)
        while self.at("."):
            self.advance()
            node = ex.FieldAccess(node, self.expect_ident("field name"))
        return node

    def parse_atom(self, scope) -> ex.Expr:
        if self.cur.kind == "int":
            return ex.IntLit(int(self.advance().text))
        if self.at_keyword("true"):
            self.advance()
            return ex.BoolLit(True)
        if self.at_keyword("false"):
            self.advance()
            return ex.BoolLit(False)
        if self.at("("):
            self.advance()
            node = self.parse_expr(scope)
            self.expect(")", "')'")
            return node
        if self.at("{"):
            self.advance()
            fields = [self.parse_expr_field(scope)]
            while self.at(","):
                self.advance()
                fields.append(self.parse_expr_field(scope))
            self.expect("}", "'}'")
            return ex.RecordLit(tuple(fields))
        if self.cur.kind == "ident":
            tok = self.advance()
            return self.resolve_name(tok, scope)
        self.fail("E-SYN-01", f"expected an expression, found {self.cur.describe()}")
        raise AssertionError

    def parse_expr_field(self, scope) -> tuple[str, ex.Expr]:
        fname = self.expect_ident("field name")
        self.expect(":", "':'")
        return fname, self.parse_expr(scope)

    def resolve_name(self, tok: Token, scope: dict[str, DataTypeDef]) -> ex.Expr:
        if tok.text in scope:
            return ex.VarRef(tok.text)
        owners = [dt for dt in list(self.datatypes.values()) + list(self.env.datatypes.values())
                  if isinstance(dt.shape, Enumeration) and tok.text in dt.shape.literals]
        unique = {dt.name: dt for dt in owners}
        if len(unique) == 1:
            return ex.EnumLit(tok.text, next(iter(unique.values())))
        if len(unique) > 1:
            self.fail("E-REF-08",
                      f"enumeration literal {tok.text!r} is declared by "
                      f"{sorted(unique)}; qualify via a variable comparison", tok)
        self.fail("E-REF-03", f"unresolved name {tok.text!r}", tok)
        raise AssertionError

    # -- networks --

    def parse_network(self) -> NetworkDecl:
        self.expect_keyword("network")
        name = self.expect_ident("network name")
        inputs: list[ChannelId] = []
        outputs: list[ChannelId] = []
        nodes: list[NodeDecl] = []
        wires: list[WireDecl] = []
        item_words = ("in", "out", "node", "wire")
        while not self.at_keyword("end"):
            try:
                if self.at_keyword("in", "out"):
                    self.parse_port(inputs, outputs)
                elif self.at_keyword("node"):
                    self.advance()
                    instance_tok = self.cur
                    instance = self.expect_ident("instance name")
                    self.expect(":", "':'")
                    component = self.expect_ident("component name")
                    if any(n.instance == instance for n in nodes):
                        self.error("E-DUP-01", f"instance {instance!r} declared twice",
                                   instance_tok)
                    else:
                        nodes.append(NodeDecl(instance, component))
                elif self.at_keyword("wire"):
                    wire = self.parse_wire(inputs, outputs, nodes)
                    if any(w.name == wire.name for w in wires):
                        self.error("E-DUP-01", f"wire {wire.name!r} declared twice")
                    else:
                        wires.append(wire)
                elif self.cur.kind == "eof":
                    self.fail("E-SYN-01", f"network {name}: missing 'end'")
                else:
                    self.fail("E-SYN-01",
                              f"expected in/out/node/wire, found {self.cur.describe()}")
            except _Recover:
                self.sync_within(*item_words)
                if not (self.at_keyword(*item_words) or self.at_keyword("end")):
                    raise
        self.expect_keyword("end")
        return NetworkDecl(name, tuple(inputs), tuple(outputs), tuple(nodes),
                           tuple(wires))

    def parse_wire(self, inputs: list[ChannelId], outputs: list[ChannelId],
                   nodes: list[NodeDecl]) -> WireDecl:
        self.expect_keyword("wire")
        explicit_name = ""
        name_tok = self.cur
        if self.cur.kind == "ident" and self.tokens[self.pos + 1].kind == ":":
            explicit_name = self.advance().text
            self.advance()  # ':'
        source = self.parse_endpoint(inputs + outputs, nodes)
        self.expect("->", "'->'")
        sink = self.parse_endpoint(inputs + outputs, nodes)
        if source.instance is None or sink.instance is None:
            env_name = source.port if source.instance is None else sink.port
            if explicit_name and explicit_name != env_name:
                self.error("E-SYN-04",
                           f"environment wire must be named after its channel "
                           f"({env_name!r})", name_tok)
            return WireDecl(env_name, source, sink)
        if not explicit_name:
            self.fail("E-SYN-03", "internal wires need a name (wire NAME: a.p -> b.q)",
                      name_tok)
        return WireDecl(explicit_name, source, sink)

    def parse_endpoint(self, env_channels: list[ChannelId],
                       nodes: list[NodeDecl]) -> EndpointRef:
        first_tok = self.cur
        first = self.expect_ident("channel or instance")
        if self.at("."):
            self.advance()
            port = self.expect_ident("port name")
            if not any(n.instance == first for n in nodes):
                self.fail("E-REF-03", f"unknown instance {first!r}", first_tok)
            return EndpointRef(first, port)
        if not any(c.name == first for c in env_channels):
            self.fail("E-REF-02",
                      f"unresolved channel {first!r} (not an external channel)",
                      first_tok)
        return EndpointRef(None, first)

    # -- traces --

    def parse_trace(self) -> TraceDecl:
        self.expect_keyword("trace")
        name = self.expect_ident("trace name")
        for_network = ""
        if self.at_keyword("for"):
            self.advance()
            for_network = self.expect_ident("network name")
        events: list[TraceEvent] = []
        block_tok = self.cur
        while not self.at_keyword("end"):
            try:
                if self.at_keyword("event"):
                    events.append(self.parse_event())
                elif self.cur.kind == "eof":
                    self.fail("E-SYN-01", f"trace {name}: missing 'end'")
                else:
                    self.fail("E-SYN-01",
                              f"expected 'event', found {self.cur.describe()}")
            except _Recover:
                self.sync_within("event")
                if not (self.at_keyword("event") or self.at_keyword("end")):
                    raise
        self.expect_keyword("end")
        try:
            trace = EventTrace(tuple(events))
        except InvalidModel as err:
            self.error("E-VAL-01", f"trace {name}: {err}", block_tok)
            trace = EventTrace(tuple(sorted(events, key=lambda e: e.interval)))
        return TraceDecl(name, for_network, trace)

    def parse_event(self) -> TraceEvent:
        self.expect_keyword("event")
        sender = self.expect_ident("sender")
        self.expect("->", "'->'")
        receiver = self.expect_ident("receiver")
        channel = self.expect_ident("channel name")
        message = self.parse_literal()
        self.expect("@", "'@'")
        tok = self.cur
        interval = int(self.expect("int", "an interval number").text)
        if interval < 1:
            self.fail("E-VAL-01", "intervals are numbered from 1", tok)
        return TraceEvent(sender, receiver, channel, message, interval)

    # -- trace expressions --

    def parse_tracespec(self) -> TraceSpecDecl:
        self.expect_keyword("tracespec")
        name = self.expect_ident("tracespec name")
        for_network = ""
        if self.at_keyword("for"):
            self.advance()
            for_network = self.expect_ident("network name")
        self.expect("=", "'='")
        return TraceSpecDecl(name, for_network, self.parse_trace_expr())

    def parse_trace_expr(self) -> TraceExprRef:
        tok = self.cur
        head = self.expect_ident("trace expression")
        if head in ("seq", "par", "iter") and self.at("("):
            self.advance()
            first = self.parse_trace_expr()
            self.expect(",", "','")
            if head == "iter":
                reps = int(self.expect("int", "a repetition bound").text)
                self.expect(")", "')'")
                return IterRef(first, reps)
            second = self.parse_trace_expr()
            self.expect(")", "')'")
            return SeqRef(first, second) if head == "seq" else ParRef(first, second)
        return RefLeaf(head)

    # -- refinement claims --

    def parse_refinement(self) -> RefinementClaim:
        start_tok = self.cur
        self.expect_keyword("refinement")
        name = self.expect_ident("claim name")
        fields: dict[str, object] = {"slack": 0, "policy": "idle",
                                     "repr_ref": "", "abst_ref": ""}
        domains: list[tuple[str, tuple[MessageValue, ...]]] = []
        while not self.at_keyword("end"):
            if self.cur.kind == "eof":
                self.fail("E-SYN-01", f"refinement {name}: missing 'end'")
            if self.at_keyword("kind"):
                self.advance()
                fields["kind"] = self.expect_ident("a refinement kind")
            elif self.at_keyword("abstract"):
                self.advance()
                fields["abstract_ref"] = self.expect_ident("a spec name")
            elif self.at_keyword("concrete"):
                self.advance()
                fields["concrete_ref"] = self.expect_ident("a spec name")
            elif self.at_keyword("horizon"):
                self.advance()
                fields["horizon"] = int(self.expect("int", "a horizon").text)
            elif self.at_keyword("slack"):
                self.advance()
                fields["slack"] = int(self.expect("int", "a slack").text)
            elif self.at_keyword("policy"):
                self.advance()
                fields["policy"] = self.expect_ident("idle or strict")
            elif self.at_keyword("repr"):
                self.advance()
                fields["repr_ref"] = self.expect_ident("a translator name")
            elif self.at_keyword("abst"):
                self.advance()
                fields["abst_ref"] = self.expect_ident("a translator name")
            elif self.at_keyword("domain"):
                self.advance()
                channel = self.expect_ident("channel name")
                self.expect("=", "'='")
                domains.append((channel, self.parse_domain_values()))
            else:
                self.fail("E-SYN-01",
                          f"expected a claim field, found {self.cur.describe()}")
        self.expect_keyword("end")
        missing = [key for key in ("kind", "abstract_ref", "concrete_ref", "horizon")
                   if key not in fields]
        if missing:
            self.fail("E-CLM-01", f"refinement {name}: missing {missing}", start_tok)
        try:
            return RefinementClaim(
                name=name, kind=fields["kind"],  # type: ignore[arg-type]
                abstract_ref=fields["abstract_ref"],  # type: ignore[arg-type]
                concrete_ref=fields["concrete_ref"],  # type: ignore[arg-type]
                horizon=fields["horizon"],  # type: ignore[arg-type]
                domains=tuple(domains), slack=fields["slack"],  # type: ignore[arg-type]
                policy=fields["policy"],  # type: ignore[arg-type]
                repr_ref=fields["repr_ref"], abst_ref=fields["abst_ref"],  # type: ignore[arg-type]
            )
        except InvalidModel as err:
            self.fail("E-CLM-01", str(err), start_tok)
            raise AssertionError

    def parse_domain_values(self) -> tuple[MessageValue, ...]:
        if self.at("{"):
            self.advance()
            values = [self.parse_literal()]
            while self.at(","):
                self.advance()
                values.append(self.parse_literal())
            self.expect("}", "'}'")
            return tuple(values)
        lo_tok = self.cur
        lo = self.parse_signed_int()
        self.expect("..", "'..'")
        hi = self.parse_signed_int()
        if lo > hi:
            self.fail("E-VAL-01", f"empty domain range {lo}..{hi}", lo_tok)
        return tuple(MessageValue(v) for v in range(lo, hi + 1))


def parse_model(text: str, env: ParseEnv | None = None,
                source: str = "<memory>") -> ParseReport:
    """Parse one document. Never raises; failures carry positioned diagnostics."""
    try:
        tokens = tokenize(text)
    except LexError as err:
        return ParseReport(None, (Diagnostic("error", "E-LEX-01", err.message,
                                             err.line, err.col),))
    parser = _Parser(tokens, env or ParseEnv(), source)
    document = parser.parse_document()
    diagnostics = tuple(parser.diagnostics)
    if any(d.severity == "error" for d in diagnostics):
        return ParseReport(None, diagnostics)
    return ParseReport(document, diagnostics)

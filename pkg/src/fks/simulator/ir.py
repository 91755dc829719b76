"""Compiled intermediate representation: enumerated transition tables.

compile_model turns a consistency-clean model into a self-contained,
versioned JSON artifact: the flattened network plus, per machine, a table
enumerating every (control state, store values, consumed heads) situation
in which a transition fires, with the concrete emissions and store
updates. Finite message domains make the enumeration exact, so a table
interpreter reproduces the live engine step for step: same seed, same
stimulus script, same deltas.
"""

from __future__ import annotations

import json
from typing import Mapping, Sequence

from .. import behavior as bh
from .. import expr as ex
from ..consistency import run_rules
from ..errors import ExplosionGuard, InvalidModel, StuckState, UnknownNetwork
from ..kernel import (
    ChannelId,
    DataTypeDef,
    Enumeration,
    IntRange,
    MessageValue,
    RecordShape,
    enumerate_values,
)
from ..network import NetworkDef, NetworkNode, Endpoint, Wire, flatten
from ..speclang.ast import ModelDocument
from ..speclang.elaborate import Corpus
from .session import ModelRejected

IR_FORMAT = "fks-ir"
IR_VERSION = 1

DEFAULT_TABLE_BUDGET = 10**5


# --- Value / type (de)serialization -------------------------------------------


def value_to_json(m: MessageValue):
    if isinstance(m.payload, tuple):
        return {name: value_to_json(v) for name, v in m.payload}
    return m.payload


def value_from_json(data) -> MessageValue:
    if isinstance(data, dict):
        return MessageValue(tuple((k, value_from_json(v)) for k, v in data.items()))
    if isinstance(data, bool) or not isinstance(data, (int, str)):
        raise InvalidModel(f"bad message value in IR: {data!r}")
    return MessageValue(data)


def type_to_json(dtype: DataTypeDef):
    shape = dtype.shape
    if isinstance(shape, IntRange):
        body = {"kind": "int", "lo": shape.lo, "hi": shape.hi}
    elif isinstance(shape, Enumeration):
        body = {"kind": "enum", "literals": list(shape.literals)}
    else:
        assert isinstance(shape, RecordShape)
        body = {"kind": "record",
                "fields": [{"name": n, "type": type_to_json(t)}
                           for n, t in shape.fields]}
    if dtype.name:
        body["name"] = dtype.name
    return body


def type_from_json(data) -> DataTypeDef:
    name = data.get("name", "")
    if data["kind"] == "int":
        return DataTypeDef(name, IntRange(data["lo"], data["hi"]))
    if data["kind"] == "enum":
        return DataTypeDef(name, Enumeration(tuple(data["literals"])))
    fields = tuple((f["name"], type_from_json(f["type"])) for f in data["fields"])
    return DataTypeDef(name, RecordShape(fields))


def _channel_to_json(c: ChannelId):
    return {"name": c.name, "type": type_to_json(c.msg_type)}


def _channel_from_json(data) -> ChannelId:
    return ChannelId(data["name"], type_from_json(data["type"]))


# --- Compilation ----------------------------------------------------------------


def _machine_table(m: bh.StateMachine, budget: int) -> list[dict]:
    """Enumerate every firing situation of every transition."""
    rows: list[dict] = []
    store_spaces = [(v.name, enumerate_values(v.dtype)) for v in m.variables]

    def store_combos():
        combo: list[tuple[str, MessageValue]] = []

        def rec(idx: int):
            if idx == len(store_spaces):
                yield tuple(combo)
                return
            name, values = store_spaces[idx]
            for v in values:
                combo.append((name, v))
                yield from rec(idx + 1)
                combo.pop()

        yield from rec(0)

    var_types = {v.name: v.dtype for v in m.variables}
    for t_idx, t in enumerate(m.transitions):
        head_spaces = [(p, enumerate_values(p.channel.msg_type)) for p in t.patterns]

        def head_combos():
            combo: list[tuple[bh.Pattern, MessageValue]] = []

            def rec(idx: int):
                if idx == len(head_spaces):
                    yield tuple(combo)
                    return
                pattern, values = head_spaces[idx]
                for v in values:
                    combo.append((pattern, v))
                    yield from rec(idx + 1)
                    combo.pop()

            yield from rec(0)

        for store in store_combos():
            base_env = {name: ex.to_value(v) for name, v in store}
            for heads in head_combos():
                env = dict(base_env)
                for pattern, value in heads:
                    env[pattern.var] = ex.to_value(value)
                base = {
                    "transition": t_idx,
                    "from": t.source,
                    "to": t.target,
                    "store": {name: value_to_json(v) for name, v in store},
                    "consumes": {p.channel.name: value_to_json(v)
                                 for p, v in heads},
                }
                try:
                    if t.guard is not None and not ex.evaluate(t.guard, env):
                        continue
                    new_store = dict(store)
                    for u in t.updates:
                        new_store[u.var] = ex.to_message(
                            ex.evaluate(u.expr, env), var_types[u.var])
                    base["sets"] = {name: value_to_json(v)
                                    for name, v in new_store.items()}
                    base["emits"] = {e.channel.name: value_to_json(ex.to_message(
                        ex.evaluate(e.expr, env), e.channel.msg_type))
                        for e in t.emissions}
                except ex.EvalError as err:
                    # The live engine faults if this situation ever fires;
                    # the row preserves that behavior instead of hiding it.
                    base["fault"] = str(err)
                rows.append(base)
                if len(rows) > budget:
                    raise ExplosionGuard(budget, len(rows), what="transition table")
    return rows


def compile_model(docs: Sequence[ModelDocument], network: str,
                  budget: int = DEFAULT_TABLE_BUDGET) -> dict:
    """Compile a consistent corpus into the versioned IR artifact (a JSON dict).

    Applies the same consistency gate as session creation.
    """
    findings = [f for f in run_rules(docs) if f.severity == "error"]
    if findings:
        raise ModelRejected(findings)
    corpus = Corpus(list(docs))
    if network not in corpus.networks:
        raise UnknownNetwork(network)
    flat = flatten(corpus.network(network))
    machines = {}
    node_entries = []
    for node in flat.nodes:
        m = node.behavior
        assert isinstance(m, bh.StateMachine)
        node_entries.append({"instance": node.instance, "machine": m.name})
        if m.name not in machines:
            machines[m.name] = {
                "inputs": [_channel_to_json(c) for c in m.inputs],
                "outputs": [_channel_to_json(c) for c in m.outputs],
                "states": list(m.states),
                "initial": m.initial,
                "variables": [{"name": v.name, "type": type_to_json(v.dtype),
                               "init": value_to_json(v.init)} for v in m.variables],
                "table": _machine_table(m, budget),
            }
    return {
        "format": IR_FORMAT,
        "version": IR_VERSION,
        "network": {
            "name": flat.name,
            "inputs": [_channel_to_json(c) for c in flat.external_inputs],
            "outputs": [_channel_to_json(c) for c in flat.external_outputs],
            "nodes": node_entries,
            "wires": [{
                "name": w.name,
                "source": {"instance": w.source.instance,
                           "port": _channel_to_json(w.source.port)},
                "sink": {"instance": w.sink.instance,
                         "port": _channel_to_json(w.sink.port)},
            } for w in flat.wires],
        },
        "machines": machines,
    }


def dump_ir(ir: dict) -> str:
    return json.dumps(ir, indent=2, sort_keys=True) + "\n"


# --- Interpretation --------------------------------------------------------------


def load_ir_network(ir: dict) -> tuple[NetworkDef, "TableIndex"]:
    """Rebuild the flattened network and a table-backed stepper from an IR dict."""
    if ir.get("format") != IR_FORMAT or ir.get("version") != IR_VERSION:
        raise InvalidModel(f"not a {IR_FORMAT} v{IR_VERSION} artifact")
    machines: dict[str, bh.StateMachine] = {}
    tables: dict[str, list[dict]] = {}
    for name, body in ir["machines"].items():
        machines[name] = bh.StateMachine(
            name=name,
            inputs=tuple(_channel_from_json(c) for c in body["inputs"]),
            outputs=tuple(_channel_from_json(c) for c in body["outputs"]),
            states=tuple(body["states"]),
            initial=body["initial"],
            variables=tuple(
                bh.VarDecl(v["name"], type_from_json(v["type"]),
                           value_from_json(v["init"]))
                for v in body["variables"]),
            transitions=(),
        )
        tables[name] = body["table"]
    netbody = ir["network"]
    nodes = tuple(NetworkNode(n["instance"], machines[n["machine"]])
                  for n in netbody["nodes"])

    def endpoint(data) -> Endpoint:
        return Endpoint(data["instance"], _channel_from_json(data["port"]))

    wires = tuple(Wire(w["name"], endpoint(w["source"]), endpoint(w["sink"]))
                  for w in netbody["wires"])
    net = NetworkDef(netbody["name"],
                     tuple(_channel_from_json(c) for c in netbody["inputs"]),
                     tuple(_channel_from_json(c) for c in netbody["outputs"]),
                     nodes, wires)
    return net, TableIndex(tables)


class TableIndex:
    """Per-machine transition tables, indexed for fast head matching."""

    def __init__(self, tables: Mapping[str, list[dict]]):
        self.rows: dict[str, list[dict]] = {}
        for name, rows in tables.items():
            decoded = []
            for row in rows:
                entry = {
                    "transition": row["transition"],
                    "from": row["from"],
                    "to": row["to"],
                    "store": tuple(sorted((k, value_from_json(v))
                                          for k, v in row["store"].items())),
                    "consumes": {k: value_from_json(v)
                                 for k, v in row["consumes"].items()},
                }
                if "fault" in row:
                    entry["fault"] = row["fault"]
                else:
                    entry["sets"] = tuple(sorted((k, value_from_json(v))
                                                 for k, v in row["sets"].items()))
                    entry["emits"] = {k: value_from_json(v)
                                      for k, v in row["emits"].items()}
                decoded.append(entry)
            self.rows[name] = decoded


def interpret_table_step(tables: TableIndex):
    """A machine stepper (behavior.step signature) driven by compiled tables."""

    def table_step(m: bh.StateMachine, cfg: bh.MachineConfig,
                   arrivals: Mapping[str, Sequence[MessageValue]],
                   policy: str = "idle") -> list[bh.Branch]:
        ins = {c.name: c for c in m.inputs}
        outs = {c.name: c for c in m.outputs}
        for name, messages in arrivals.items():
            if name not in ins:
                raise TypeError(f"arrival on {name!r}: not an input of {m.name}")
            for value in messages:
                if not value.conforms(ins[name].msg_type):
                    raise TypeError(f"ill-typed arrival on {name}")
        queued = {ch.name: queue + tuple(arrivals.get(ch.name, ()))
                  for ch, queue in cfg.buffers}
        branches: list[bh.Branch] = []
        for row in tables.rows[m.name]:
            if row["from"] != cfg.control or row["store"] != cfg.store:
                continue
            heads = row["consumes"]
            if any(not queued.get(chan) or queued[chan][0] != value
                   for chan, value in heads.items()):
                continue
            if "fault" in row:
                raise ex.EvalError(row["fault"])
            new_buffers = tuple(
                (ch, queued[ch.name][1:] if ch.name in heads else queued[ch.name])
                for ch, _ in cfg.buffers)
            emissions = tuple(sorted(
                ((outs[chan], value) for chan, value in row["emits"].items()),
                key=lambda e: e[0].name))
            consumed = tuple(sorted(
                ((ins[chan], value) for chan, value in heads.items()),
                key=lambda e: e[0].name))
            branches.append(bh.Branch(
                bh.MachineConfig(row["to"], row["sets"], new_buffers),
                emissions, row["transition"], consumed,
                bh.branch_label(row["from"], row["to"], emissions)))
        buffered = any(queued.values())
        if policy == "idle" or not branches:
            if policy == "strict" and not branches and buffered:
                raise StuckState(f"machine {m.name} stuck (table interpreter)")
            stutter = bh.MachineConfig(
                cfg.control, cfg.store,
                tuple((ch, queued[ch.name]) for ch, _ in cfg.buffers))
            branches.append(bh.Branch(stutter, (), None))
        return branches

    return table_step

"""Wire protocol service: one JSON object per line over a local socket.

Requests (field "op") and their parameters:

  create_session {model_file | model_files, network, seed?, policy?}
  step           {session, stimuli: [{channel, value}], branch?}
  snapshot       {session}
  export_trace   {session}
  close          {session}

Every response carries "session" and "interval"; failures carry an
"error" object {code, message, findings?} instead of a payload. Message
values are JSON: integers, enumeration literals as strings, records as
objects. step with branch="ask" returns {"pending": true, "branches":
[...]} without advancing; re-issue with branch=<index> to commit.

Sessions are serialized per session (one writer); distinct sessions are
independent. The same dispatcher also backs the optional WebSocket bridge.
"""

from __future__ import annotations

import json
import socketserver
import threading
from dataclasses import dataclass, field

from ..errors import FksError
from ..kernel import MessageValue
from ..speclang import load_corpus, print_model
from ..speclang.ast import ModelDocument, TraceDecl
from ..traces import EventTrace
from . import session as ss
from .ir import value_to_json

PROTOCOL_VERSION = 1


def json_to_value(data) -> MessageValue:
    if isinstance(data, bool):
        raise ValueError("boolean is not a message value")
    if isinstance(data, dict):
        return MessageValue(tuple((k, json_to_value(v)) for k, v in data.items()))
    if isinstance(data, (int, str)):
        return MessageValue(data)
    raise ValueError(f"bad message value {data!r}")


def _delta_to_json(delta: ss.SessionDelta) -> dict:
    return {
        "interval": delta.interval,
        "nodes": [{
            "instance": n.instance,
            "fired": n.fired,
            "consumed": [{"channel": c, "value": value_to_json(v)}
                         for c, v in n.consumed],
            "emitted": [{"channel": c, "value": value_to_json(v)}
                        for c, v in n.emitted],
            "control_before": n.control_before,
            "control_after": n.control_after,
            "store_changes": [{"var": name, "before": value_to_json(b),
                               "after": value_to_json(a)}
                              for name, b, a in n.store_changes],
        } for n in delta.nodes],
        "external_outputs": [{"channel": c, "values": [value_to_json(v) for v in vs]}
                             for c, vs in delta.external_outputs],
        "events": _events_to_json(delta.events),
        "branches": list(delta.branches),
        "branch_taken": delta.branch_taken,
    }


def _events_to_json(events) -> list[dict]:
    return [{"sender": e.sender, "receiver": e.receiver, "channel": e.channel,
             "value": value_to_json(e.message), "interval": e.interval}
            for e in events]


def _snapshot_to_json(snap: ss.Snapshot) -> dict:
    return {
        "interval": snap.interval,
        "nodes": [{
            "instance": n.instance,
            "control": n.control,
            "store": {name: value_to_json(v) for name, v in n.store},
            "buffers": {c: [value_to_json(v) for v in queue]
                        for c, queue in n.buffers},
        } for n in snap.nodes],
        "histories": {name: [[value_to_json(v) for v in interval]
                             for interval in lane]
                      for name, lane in snap.histories},
        "inflight": {wire: [value_to_json(v) for v in msgs]
                     for wire, msgs in snap.inflight},
        "trace": {"events": _events_to_json(snap.trace.events)},
    }


def trace_document_text(trace: EventTrace, network: str,
                        name: str = "exported") -> str:
    doc = ModelDocument(traces=(TraceDecl(name, network, trace),))
    return print_model(doc)


@dataclass
class _Entry:
    session: ss.SimSession
    lock: threading.Lock = field(default_factory=threading.Lock)


class Dispatcher:
    """Protocol state: sessions by id, plus the request handlers."""

    def __init__(self, base_dir: str = "."):
        self.base_dir = base_dir
        self.entries: dict[str, _Entry] = {}
        self.lock = threading.Lock()
        self.counter = 0

    def handle(self, request: dict) -> dict:
        if not isinstance(request, dict):
            return {"session": "", "interval": 0,
                    "error": {"code": "BadRequest",
                              "message": "request must be a JSON object"}}
        op = request.get("op")
        session_id = request.get("session", "")
        try:
            if op == "create_session":
                return self._create(request)
            if op not in ("step", "snapshot", "export_trace", "close"):
                raise ValueError(f"unknown op {op!r}")
            entry = self._entry(session_id)
            with entry.lock:
                if op == "step":
                    return self._step(entry.session, request)
                if op == "snapshot":
                    return self._snapshot(entry.session)
                if op == "export_trace":
                    return self._export(entry.session)
                return self._close(entry.session)
        except (FksError, ValueError, TypeError, KeyError, OSError) as err:
            payload = {"code": type(err).__name__, "message": str(err)}
            if isinstance(err, ss.ModelRejected):
                payload["findings"] = [{
                    "code": f.code, "severity": f.severity, "file": f.document,
                    "path": f.path, "message": f.message} for f in err.findings]
            interval = 0
            if session_id in self.entries:
                interval = self.entries[session_id].session.interval
            return {"session": session_id, "interval": interval, "error": payload}

    def _entry(self, session_id: str) -> _Entry:
        with self.lock:
            if session_id not in self.entries:
                raise KeyError(f"unknown session {session_id!r}")
            return self.entries[session_id]

    def _create(self, request: dict) -> dict:
        from pathlib import Path
        files = request.get("model_files") or [request["model_file"]]
        paths = [Path(self.base_dir) / f for f in files]
        result = load_corpus(paths)
        if not result.ok:
            details = "; ".join(d.describe() for _, r in result.reports
                                for d in r.errors())
            raise ValueError(f"model does not parse: {details}")
        with self.lock:
            self.counter += 1
            session_id = f"s{self.counter}"
        session = ss.create_session(
            result.corpus.documents, request["network"],
            seed=int(request.get("seed", 0)),
            policy=request.get("policy", "idle"),
            session_id=session_id)
        with self.lock:
            self.entries[session_id] = _Entry(session)
        model = session.model
        return {
            "session": session_id,
            "interval": 0,
            "protocol": PROTOCOL_VERSION,
            "model": {
                "name": model.name,
                "inputs": [{"name": c.name, "type": c.msg_type.describe()}
                           for c in model.external_inputs],
                "outputs": [{"name": c.name, "type": c.msg_type.describe()}
                            for c in model.external_outputs],
                "nodes": [n.instance for n in model.nodes],
                "wires": [w.name for w in model.wires],
            },
        }

    def _step(self, session: ss.SimSession, request: dict) -> dict:
        stimuli = [ss.Stimulus(s["channel"], json_to_value(s["value"]))
                   for s in request.get("stimuli", [])]
        branch = request.get("branch")
        outcome = ss.step(session, stimuli, branch)
        if isinstance(outcome, ss.BranchPrompt):
            return {"session": session.id, "interval": session.interval,
                    "pending": True, "branches": list(outcome.branches)}
        return {"session": session.id, "interval": session.interval,
                "delta": _delta_to_json(outcome)}

    def _snapshot(self, session: ss.SimSession) -> dict:
        return {"session": session.id, "interval": session.interval,
                "snapshot": _snapshot_to_json(ss.snapshot(session))}

    def _export(self, session: ss.SimSession) -> dict:
        trace = ss.export_trace(session)
        return {"session": session.id, "interval": session.interval,
                "trace": {
                    "events": _events_to_json(trace.events),
                    "text": trace_document_text(trace, session.network_name),
                }}

    def _close(self, session: ss.SimSession) -> dict:
        ss.close(session)
        return {"session": session.id, "interval": session.interval,
                "closed": True}


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        dispatcher: Dispatcher = self.server.dispatcher  # type: ignore[attr-defined]
        for raw in self.rfile:
            line = raw.decode("utf-8").strip()
            if not line:
                continue
            try:
                request = json.loads(line)
            except json.JSONDecodeError as err:
                response = {"session": "", "interval": 0,
                            "error": {"code": "BadRequest", "message": str(err)}}
            else:
                response = dispatcher.handle(request)
            self.wfile.write((json.dumps(response) + "\n").encode("utf-8"))
            self.wfile.flush()


class ProtocolServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, host: str, port: int, base_dir: str = "."):
        super().__init__((host, port), _Handler)
        self.dispatcher = Dispatcher(base_dir)


def serve(host: str = "127.0.0.1", port: int = 4711, base_dir: str = ".") -> None:
    with ProtocolServer(host, port, base_dir) as server:
        server.serve_forever()

"""Command-line interface.

Verbs: parse, fmt, check, lint, trace check, trace gen, refine, sim run,
sim serve, compile. Exit status convention: 0 clean, 1 findings/failures
present, 2 tool failure (bad arguments, unreadable files, crashes).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .consistency import ALL_CODES, completeness_report, run_rules
from .errors import FksError
from .findings import Finding
from .kernel import MessageValue, Valuation, TimedStream
from .refinement import (
    RefinementClaim,
    check_behavioral,
    check_inheritance,
    check_interface,
    check_structural,
)
from .simulator import Stimulus, compile_model, create_session
from .simulator.ir import dump_ir
from .simulator.server import trace_document_text
from .simulator import session as ss
from .speclang import check_wellformedness, load_corpus, parse_model, print_model
from .speclang.elaborate import Corpus
from .traces import generate_traces, membership

OK, FINDINGS, FAILURE = 0, 1, 2


def _load(paths: list[str], out) -> Corpus | None:
    result = load_corpus([Path(p) for p in paths])
    for path, report in result.reports:
        for d in report.diagnostics:
            print(f"{path}:{d.describe()}", file=out)
    return result.corpus


def cmd_parse(args, out) -> int:
    failed = False
    for path in args.files:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as err:
            print(f"{path}: {err}", file=out)
            return FAILURE
        report = parse_model(text, source=path)
        for d in report.diagnostics:
            print(f"{path}:{d.describe()}", file=out)
        if report.ok:
            doc = report.document
            print(f"{path}: ok ({len(doc.datatypes)} types, "
                  f"{len(doc.components)} components, {len(doc.automata)} automata, "
                  f"{len(doc.networks)} networks, {len(doc.traces)} traces)",
                  file=out)
        else:
            failed = True
    return FINDINGS if failed else OK


def cmd_fmt(args, out) -> int:
    corpus = _load(args.files, out)
    if corpus is None:
        return FINDINGS
    for doc in corpus.documents:
        if doc.source not in {str(Path(p).resolve()) for p in args.files}:
            continue
        text = print_model(doc)
        if args.write:
            Path(doc.source).write_text(text, encoding="utf-8")
            print(f"formatted {doc.source}", file=out)
        else:
            out.write(text)
    return OK


def cmd_check(args, out) -> int:
    corpus = _load(args.files, out)
    if corpus is None:
        return FINDINGS
    findings: list[Finding] = []
    for doc in corpus.documents:
        findings += check_wellformedness(doc)
    _emit_findings(findings, args.json, out)
    return FINDINGS if findings else OK


def _emit_findings(findings: list[Finding], as_json: bool, out) -> None:
    for f in findings:
        if as_json:
            print(json.dumps({"code": f.code, "severity": f.severity,
                              "file": f.document, "path": f.path,
                              "message": f.message}), file=out)
        else:
            print(f.line(), file=out)


def cmd_lint(args, out) -> int:
    corpus = _load(args.files, out)
    if corpus is None:
        return FINDINGS
    selection = None if args.rules == "all" else tuple(args.rules.split(","))
    try:
        findings = run_rules(corpus.documents, selection)
    except FksError as err:
        print(f"error: {err}", file=out)
        return FAILURE
    if args.completeness:
        findings = findings + completeness_report(corpus.documents)
    _emit_findings(findings, args.json, out)
    return FINDINGS if any(f.severity == "error" for f in findings) else OK


def _claim_bounds(claim: RefinementClaim):
    return {channel: list(values) for channel, values in claim.domains} or None


def run_claim(corpus: Corpus, claim: RefinementClaim):
    abstract = corpus.spec(claim.abstract_ref)
    concrete = corpus.spec(claim.concrete_ref)
    domains = _claim_bounds(claim)
    if claim.kind == "behavioral":
        return check_behavioral(abstract, concrete, claim.horizon, domains,
                                claim.policy)
    if claim.kind == "inheritance":
        return check_inheritance(concrete, abstract, claim.horizon, domains,
                                 claim.policy)
    if claim.kind == "structural":
        from .network import NetworkDef
        if not isinstance(concrete, NetworkDef):
            raise FksError(f"claim {claim.name}: concrete side must be a network")
        return check_structural(abstract, concrete, claim.horizon, domains,
                                claim.slack, claim.policy)
    assert claim.kind == "interface"
    return check_interface(abstract, concrete, corpus.machine(claim.repr_ref),
                           corpus.machine(claim.abst_ref), claim.horizon,
                           domains, claim.policy)


def cmd_refine(args, out) -> int:
    corpus = _load(args.files, out)
    if corpus is None:
        return FAILURE
    claims = corpus.claims()
    if args.claim:
        claims = [c for c in claims if c.name == args.claim]
        if not claims:
            print(f"error: no claim named {args.claim!r}", file=out)
            return FAILURE
    any_failed = False
    for claim in claims:
        verdict = run_claim(corpus, claim)
        if args.json:
            record = {"claim": claim.name, "kind": verdict.kind,
                      "holds": verdict.holds, "horizon": verdict.horizon,
                      "inputs_checked": verdict.inputs_checked}
            if verdict.delay is not None:
                record["delay"] = verdict.delay
            if verdict.witness:
                record["witness"] = verdict.witness.explanation
            print(json.dumps(record), file=out)
        else:
            print(f"{claim.name}: {verdict.summary()}", file=out)
        any_failed |= not verdict.holds
    return FINDINGS if any_failed else OK


def cmd_trace_check(args, out) -> int:
    corpus = _load(args.files, out)
    if corpus is None:
        return FAILURE
    selected = corpus.traces
    if args.trace:
        if args.trace not in selected:
            print(f"error: no trace named {args.trace!r}", file=out)
            return FAILURE
        selected = {args.trace: selected[args.trace]}
    any_failed = False
    checked = 0
    for name, decl in selected.items():
        network_name = args.network or decl.for_network
        if not network_name:
            print(f"{name}: skipped (no network binding)", file=out)
            continue
        net = corpus.network(network_name)
        horizon = args.horizon or decl.trace.span()
        verdict = membership(decl.trace, net, horizon, policy=args.policy)
        checked += 1
        if verdict.member:
            print(f"{name}: member of {network_name} at k={horizon}", file=out)
        else:
            any_failed = True
            where = verdict.divergence.describe() if verdict.divergence else "?"
            print(f"{name}: NOT a member of {network_name} at k={horizon}; "
                  f"diverges at [{where}] {verdict.detail}", file=out)
    if checked == 0:
        print("no bound traces to check", file=out)
    return FINDINGS if any_failed else OK


def _parse_cli_value(text: str) -> MessageValue:
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = text  # bare enumeration literal
    from .simulator.server import json_to_value
    return json_to_value(data)


def cmd_trace_gen(args, out) -> int:
    corpus = _load(args.files, out)
    if corpus is None:
        return FAILURE
    net = corpus.network(args.network)
    lanes = {c.name: [() for _ in range(args.horizon)] for c in net.external_inputs}
    for spec in args.input or []:
        try:
            channel, rest = spec.split("=", 1)
            value_text, interval_text = rest.rsplit("@", 1)
            interval = int(interval_text)
            value = _parse_cli_value(value_text)
        except (ValueError, KeyError) as err:
            print(f"error: bad --input {spec!r}: {err}", file=out)
            return FAILURE
        if channel not in lanes or not 1 <= interval <= args.horizon:
            print(f"error: bad --input {spec!r}: unknown channel or interval",
                  file=out)
            return FAILURE
        lanes[channel][interval - 1] = lanes[channel][interval - 1] + (value,)
    x = Valuation(tuple(
        (c, TimedStream(tuple(lanes[c.name]))) for c in net.external_inputs),
        args.horizon)
    traces = generate_traces(net, x, args.horizon, args.limit, policy=args.policy)
    for idx, trace in enumerate(traces, 1):
        out.write(trace_document_text(trace, args.network, f"generated{idx}"))
        out.write("\n")
    print(f"-- {len(traces)} trace(s) generated", file=out)
    return OK


def cmd_sim_run(args, out) -> int:
    corpus = _load(args.files, out)
    if corpus is None:
        return FAILURE
    script: list[list[Stimulus]] = []
    if args.script:
        for line in Path(args.script).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line:
                continue
            from .simulator.server import json_to_value
            script.append([Stimulus(s["channel"], json_to_value(s["value"]))
                           for s in json.loads(line)])
    script += [[] for _ in range(max(0, args.intervals - len(script)))]
    session = create_session(corpus.documents, args.network, seed=args.seed,
                             policy=args.policy)
    from .simulator.server import _delta_to_json
    for stimuli in script:
        delta = ss.step(session, stimuli)
        assert isinstance(delta, ss.SessionDelta)
        if args.json:
            print(json.dumps(_delta_to_json(delta)), file=out)
        else:
            outputs = ", ".join(
                f"{c}={'.'.join(v.describe() for v in vs)}"
                for c, vs in delta.external_outputs if vs)
            fired = ", ".join(f"{n.instance}:{n.fired}" for n in delta.nodes
                              if n.fired != "stutter")
            print(f"interval {delta.interval}: fired[{fired}] out[{outputs}]",
                  file=out)
    trace = ss.export_trace(session)
    if args.emit_trace:
        out.write(trace_document_text(trace, args.network))
    return OK


def cmd_sim_serve(args, out) -> int:
    if args.ws_port:
        from .simulator.server_ws import serve_ws
        print(f"cockpit bridge on ws://{args.host}:{args.ws_port}/ws", file=out)
        import threading

        from .simulator.server import serve
        tcp = threading.Thread(
            target=serve, args=(args.host, args.port, args.base_dir), daemon=True)
        tcp.start()
        serve_ws(args.host, args.ws_port, args.base_dir, args.static)
        return OK
    from .simulator.server import serve
    print(f"listening on {args.host}:{args.port}", file=out)
    serve(args.host, args.port, args.base_dir)
    return OK


def cmd_compile(args, out) -> int:
    corpus = _load(args.files, out)
    if corpus is None:
        return FAILURE
    ir = compile_model(corpus.documents, args.network)
    text = dump_ir(ir)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output}", file=out)
    else:
        out.write(text)
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fks", description="timed-stream modeling toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse documents and report diagnostics")
    p.add_argument("files", nargs="+")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("fmt", help="print documents in canonical form")
    p.add_argument("files", nargs="+")
    p.add_argument("-w", "--write", action="store_true",
                   help="rewrite files in place")
    p.set_defaults(fn=cmd_fmt)

    p = sub.add_parser("check", help="single-document wellformedness")
    p.add_argument("files", nargs="+")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("lint", help="cross-view consistency rules")
    p.add_argument("files", nargs="+")
    p.add_argument("--rules", default="all",
                   help=f"comma-separated codes or 'all' ({', '.join(ALL_CODES)})")
    p.add_argument("--completeness", action="store_true",
                   help="also report completeness warnings")
    p.add_argument("--json", action="store_true",
                   help="line-delimited JSON findings")
    p.set_defaults(fn=cmd_lint)

    trace = sub.add_parser("trace", help="event trace operations")
    tsub = trace.add_subparsers(dest="trace_command", required=True)
    p = tsub.add_parser("check", help="membership of traces against networks")
    p.add_argument("files", nargs="+")
    p.add_argument("--trace", help="check one named trace")
    p.add_argument("--network", help="override the trace's network binding")
    p.add_argument("--horizon", type=int, default=0)
    p.add_argument("--policy", default="idle", choices=["idle", "strict"])
    p.set_defaults(fn=cmd_trace_check)
    p = tsub.add_parser("gen", help="generate traces by simulation")
    p.add_argument("files", nargs="+")
    p.add_argument("--network", required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--limit", type=int, default=10)
    p.add_argument("--policy", default="idle", choices=["idle", "strict"])
    p.add_argument("--input", action="append",
                   help="stimulus Channel=value@interval (1-based), repeatable")
    p.set_defaults(fn=cmd_trace_gen)

    p = sub.add_parser("refine", help="check refinement claims")
    p.add_argument("files", nargs="+")
    p.add_argument("--claim", help="check one named claim")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_refine)

    sim = sub.add_parser("sim", help="simulation")
    simsub = sim.add_subparsers(dest="sim_command", required=True)
    p = simsub.add_parser("run", help="scripted batch run")
    p.add_argument("files", nargs="+")
    p.add_argument("--network", required=True)
    p.add_argument("--script", help="JSONL: one stimulus array per interval")
    p.add_argument("--intervals", type=int, default=0,
                   help="pad the script with idle intervals up to this count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", default="idle", choices=["idle", "strict"])
    p.add_argument("--json", action="store_true")
    p.add_argument("--emit-trace", action="store_true",
                   help="print the recorded trace as canonical text")
    p.set_defaults(fn=cmd_sim_run)
    p = simsub.add_parser("serve", help="cockpit backend (JSON lines over TCP)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=4711)
    p.add_argument("--ws-port", type=int, default=0,
                   help="also expose a WebSocket bridge (needs the ws extra)")
    p.add_argument("--static", help="static directory for the cockpit build")
    p.add_argument("--base-dir", default=".",
                   help="directory model_file paths are resolved against")
    p.set_defaults(fn=cmd_sim_serve)

    p = sub.add_parser("compile", help="compile to the transition-table IR")
    p.add_argument("files", nargs="+")
    p.add_argument("--network", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(fn=cmd_compile)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args, sys.stdout)
    except FksError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return FAILURE
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return FAILURE


if __name__ == "__main__":
    sys.exit(main())

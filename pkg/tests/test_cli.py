import io
import json
from pathlib import Path

import pytest

from fks.cli import build_parser, main

FIXTURES = Path(__file__).parent / "fixtures"
ALL = sorted(str(p) for p in FIXTURES.glob("*.fks"))


def run(argv):
    import contextlib
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = main(argv)
    return code, out.getvalue()


class TestParseFmtCheck:
    def test_parse_ok(self):
        code, out = run(["parse", str(FIXTURES / "squarer.fks")])
        assert code == 0 and "ok" in out

    def test_parse_reports_errors(self, tmp_path):
        bad = tmp_path / "bad.fks"
        bad.write_text("component ???")
        code, out = run(["parse", str(bad)])
        assert code == 1 and "E-SYN-01" in out

    def test_fmt_is_canonical(self, tmp_path):
        source = FIXTURES / "squarer.fks"
        code, out = run(["fmt", str(source)])
        assert code == 0
        assert "automaton SQBeh for SQ" in out
        # Formatting the formatted text is a fixpoint.
        f = tmp_path / "copy.fks"
        f.write_text(out)
        code2, out2 = run(["fmt", str(f)])
        assert code2 == 0 and out2 == out

    def test_check_clean(self):
        code, out = run(["check"] + ALL)
        assert code == 0 and out.strip() == ""

    def test_check_finds_type_error(self, tmp_path):
        text = (FIXTURES / "squarer.fks").read_text().replace(
            "Out!X * X", "Out!X + true")
        f = tmp_path / "bad.fks"
        f.write_text(text)
        code, out = run(["check", str(f)])
        assert code == 1 and "WF-TY-01" in out


class TestLint:
    def test_clean_corpus_exit_zero(self):
        code, out = run(["lint", "--rules", "all"] + ALL)
        assert code == 0

    def test_errors_exit_one_with_json_records(self, tmp_path):
        text = (FIXTURES / "squarer.fks").read_text().replace(
            "automaton SQBeh for SQ\n  in In: Val",
            "automaton SQBeh for SQ\n  in Aux: Val\n  in In: Val")
        f = tmp_path / "bad.fks"
        f.write_text(text)
        code, out = run(["lint", "--json", str(f)])
        assert code == 1
        records = [json.loads(line) for line in out.splitlines() if line.startswith("{")]
        assert any(r["code"] == "C-IF-01" for r in records)
        assert all({"code", "severity", "file", "path", "message"} <= set(r)
                   for r in records)

    def test_rule_selection(self):
        code, _ = run(["lint", "--rules", "C-TY-01,C-HY-01"] + ALL)
        assert code == 0

    def test_unknown_rule_is_tool_failure(self):
        code, _ = run(["lint", "--rules", "C-NO-99"] + ALL)
        assert code == 2

    def test_completeness_warnings_do_not_fail(self, tmp_path):
        f = tmp_path / "wip.fks"
        f.write_text("datatype T = int 0 .. 1\ncomponent C\n  in I: T\nend\n")
        code, out = run(["lint", "--completeness", str(f)])
        assert code == 0 and "W-CMP-01" in out


class TestRefine:
    def test_all_claims(self):
        code, out = run(["refine"] + ALL)
        assert code == 1  # the corpus deliberately contains a failing claim
        assert "SqRefinesNdup: behavioral: holds-at-bounds" in out
        assert "NdupRefinesSqFails: behavioral: FAILS" in out

    def test_single_claim_json(self):
        code, out = run(["refine", "--claim", "SqRefinesNdup", "--json"] + ALL)
        assert code == 0
        record = json.loads(out.splitlines()[-1])
        assert record["holds"] is True and record["kind"] == "behavioral"

    def test_structural_claims(self):
        code, out = run(["refine", "--claim", "PipeRefinesF4"] + ALL)
        assert code == 0 and "holds-at-bounds" in out
        code, out = run(["refine", "--claim", "PipeExactFails"] + ALL)
        assert code == 1 and "witness" in out

    def test_interface_claim(self):
        code, out = run(["refine", "--claim", "CodecRefines"] + ALL)
        assert code == 0 and "translator delay 2" in out


class TestTrace:
    def test_check_bound_traces(self):
        code, out = run(["trace", "check"] + ALL)
        assert code == 0
        assert "SqRun: member of SqNet at k=2" in out
        assert "PipeRun: member of Pipe at k=3" in out

    def test_check_detects_divergence(self, tmp_path):
        text = (FIXTURES / "squarer.fks").read_text().replace(
            "event sq -> env Out 9 @ 2", "event sq -> env Out 8 @ 2")
        f = tmp_path / "bad.fks"
        f.write_text(text)
        code, out = run(["trace", "check", "--trace", "SqRun", str(f)])
        assert code == 1 and "NOT a member" in out

    def test_gen_round_trip(self, tmp_path):
        code, out = run(["trace", "gen", "--network", "SqNet", "--horizon", "2",
                         "--policy", "strict", "--input", "In=3@1",
                         str(FIXTURES / "squarer.fks")])
        assert code == 0 and "1 trace(s) generated" in out
        generated = tmp_path / "gen.fks"
        generated.write_text(out.rsplit("--", 1)[0])
        code2, out2 = run(["trace", "check", str(generated),
                           str(FIXTURES / "squarer.fks")])
        assert code2 == 0 and "member of SqNet" in out2


class TestSimAndCompile:
    def test_sim_run_script(self, tmp_path):
        script = tmp_path / "script.jsonl"
        script.write_text('[{"channel": "In", "value": 3}]\n[]\n')
        code, out = run(["sim", "run", "--network", "SqNet", "--policy", "strict",
                         "--script", str(script), "--emit-trace",
                         str(FIXTURES / "squarer.fks")])
        assert code == 0
        assert "out[Out=9]" in out
        assert "event sq -> env Out 9 @ 2" in out

    def test_sim_run_json(self, tmp_path):
        script = tmp_path / "script.jsonl"
        script.write_text('[{"channel": "In", "value": 2}]\n[]\n')
        code, out = run(["sim", "run", "--network", "SqNet", "--policy", "strict",
                         "--script", str(script), "--json",
                         str(FIXTURES / "squarer.fks")])
        deltas = [json.loads(line) for line in out.splitlines() if line.startswith("{")]
        assert deltas[1]["external_outputs"] == [{"channel": "Out", "values": [4]}]

    def test_compile_writes_artifact(self, tmp_path):
        out_file = tmp_path / "sq.ir.json"
        code, _ = run(["compile", "--network", "SqNet", "-o", str(out_file),
                       str(FIXTURES / "squarer.fks")])
        assert code == 0
        ir = json.loads(out_file.read_text())
        assert ir["format"] == "fks-ir"

    def test_unknown_claim_is_failure(self):
        code, _ = run(["refine", "--claim", "Nope"] + ALL)
        assert code == 2


def test_parser_covers_all_verbs():
    parser = build_parser()
    for argv in (["parse", "x"], ["fmt", "x"], ["check", "x"],
                 ["lint", "x"], ["refine", "x"], ["compile", "x", "--network", "N"],
                 ["trace", "check", "x"], ["trace", "gen", "x", "--network", "N",
                  "--horizon", "2"], ["sim", "run", "x", "--network", "N"],
                 ["sim", "serve"]):
        assert parser.parse_args(argv)

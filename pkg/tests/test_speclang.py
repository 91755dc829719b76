from pathlib import Path

import pytest

from fks.errors import CyclicHierarchy, InvalidModel
from fks.kernel import msg
from fks.speclang import (
    ModelDocument,
    check_wellformedness,
    load_corpus,
    parse_model,
    print_model,
)
from fks.speclang.parser import ParseEnv

from fixtures_machines import pipe as semantic_pipe

FIXTURES = Path(__file__).parent / "fixtures"
ALL_FIXTURES = sorted(FIXTURES.glob("*.fks"))

SQUARER = (FIXTURES / "squarer.fks").read_text()


def load_all():
    result = load_corpus(ALL_FIXTURES)
    assert result.ok, [d.describe() for _, r in result.reports for d in r.errors()]
    return result.corpus


class TestParse:
    def test_squarer_fixture(self):
        report = parse_model(SQUARER)
        assert report.ok
        doc = report.document
        assert len(doc.components) == 1 and len(doc.automata) == 1
        assert doc.automata[0].for_component == "SQ"
        assert len(doc.networks) == 1 and len(doc.traces) == 1

    def test_empty_input(self):
        report = parse_model("")
        assert report.ok and report.document.is_empty()

    def test_unresolved_channel_is_a_diagnostic(self):
        bad = SQUARER.replace("emit Out!X * X", "emit Zap!X * X")
        report = parse_model(bad)
        assert not report.ok
        (diag,) = [d for d in report.errors() if d.code == "E-REF-02"]
        assert "Zap" in diag.message and diag.line > 0

    def test_parser_is_total_on_garbage(self):
        report = parse_model("component ???@@@\nnetwork 12 end\n}{")
        assert not report.ok
        assert all(d.line >= 1 and d.col >= 1 for d in report.diagnostics)

    def test_multiple_errors_collected(self):
        bad = SQUARER.replace("when In?X", "when Gone?X") + \
            "\nautomaton A2\n  state s initial\n  trans s -> nowhere\nend\n"
        report = parse_model(bad)
        codes = {d.code for d in report.errors()}
        assert "E-REF-02" in codes and "E-REF-04" in codes

    def test_unknown_type(self):
        report = parse_model("component C\n  in In: Mystery\nend")
        assert any(d.code == "E-REF-01" for d in report.errors())

    def test_internal_wire_needs_name(self):
        text = SQUARER.replace("wire In -> sq.In", "wire In -> sq.In") + """
network Two
  in In: Val
  node a: SQ
  node b: SQ
  wire In -> a.In
  wire a.Out -> b.In
end
"""
        report = parse_model(text)
        assert any(d.code == "E-SYN-03" for d in report.errors())

    def test_ambiguous_enum_literal(self):
        text = """
datatype A = enum { on, off }
datatype B = enum { on, halt }
component C
  in I: A
  out O: A
end
automaton CB for C
  in I: A
  out O: A
  state s initial
  trans s -> s when I?x if x == on emit O!x
end
"""
        report = parse_model(text)
        assert any(d.code == "E-REF-08" for d in report.errors())

    def test_lexical_error_position(self):
        report = parse_model("datatype X = int 0 .. 5\n\x01")
        assert not report.ok
        (diag,) = report.errors()
        assert diag.code == "E-LEX-01" and diag.line == 2


class TestRoundTrip:
    @pytest.mark.parametrize("path", ALL_FIXTURES, ids=lambda p: p.stem)
    def test_parse_print_parse_fixpoint(self, path):
        corpus = load_all()
        doc = next(d for d in corpus.documents if d.source == str(path.resolve()))
        env = ParseEnv.from_documents(corpus.documents)
        printed = print_model(doc)
        report = parse_model(printed, env)
        assert report.ok, [d.describe() for d in report.errors()]
        assert report.document == doc
        assert print_model(report.document) == printed

    def test_empty_document_round_trip(self):
        assert parse_model(print_model(ModelDocument())).document == ModelDocument()

    def test_two_networks_survive(self):
        text = SQUARER + """
network N2
  in In: Val
  out Out: Val
  node a: SQ
  wire In -> a.In
  wire a.Out -> Out
end
"""
        doc = parse_model(text).document
        assert len(doc.networks) == 2
        again = parse_model(print_model(doc)).document
        assert len(again.networks) == 2 and again == doc


class TestWellformedness:
    def test_clean_fixture(self):
        corpus = load_all()
        for doc in corpus.documents:
            assert check_wellformedness(doc) == [], doc.source

    def test_type_mismatch_finding(self):
        bad = SQUARER.replace("emit Out!X * X", "emit Out!X + true")
        report = parse_model(bad)
        assert report.ok  # parses; typing is a wellformedness concern
        findings = check_wellformedness(report.document)
        assert any(f.code == "WF-TY-01" for f in findings)

    def test_duplicate_component_finding(self):
        doubled = SQUARER + "\ncomponent SQ\n  in In: Val\n  out Out: Val\nend\n"
        findings = check_wellformedness(parse_model(doubled).document)
        assert any(f.code == "WF-DUP-01" and "SQ" in f.path for f in findings)

    def test_wire_direction_finding(self):
        bad = SQUARER.replace("wire In -> sq.In", "wire In -> sq.Out")
        findings = check_wellformedness(parse_model(bad).document)
        assert any(f.code == "WF-PT-01" for f in findings)

    def test_endpoint_wired_twice(self):
        bad = SQUARER.replace("wire sq.Out -> Out",
                              "wire sq.Out -> Out\n  wire w2: sq.Out -> sq.In")
        findings = check_wellformedness(parse_model(bad).document)
        assert any(f.code == "WF-PT-02" for f in findings)

    def test_missing_initial_state(self):
        bad = SQUARER.replace("state s0 initial", "state s0")
        findings = check_wellformedness(parse_model(bad).document)
        assert any(f.code == "WF-ST-01" for f in findings)

    def test_bad_variable_init(self):
        text = SQUARER.replace("state s0 initial",
                               "var count: Val = 42\n  state s0 initial")
        findings = check_wellformedness(parse_model(text).document)
        assert findings == []  # 42 fits 0..81
        text = SQUARER.replace("state s0 initial",
                               "var count: Val = 99999\n  state s0 initial")
        findings = check_wellformedness(parse_model(text).document)
        assert any(f.code == "WF-TY-02" for f in findings)


class TestElaboration:
    def test_pipe_matches_hand_built_semantics(self):
        corpus = load_all()
        assert corpus.network("Pipe") == semantic_pipe()

    def test_machine_takes_component_interface(self):
        corpus = load_all()
        machine = corpus.machine("SQ")
        assert machine.name == "SQ"
        assert [c.name for c in machine.inputs] == ["In"]

    def test_nested_network_elaborates(self):
        corpus = load_all()
        nest = corpus.network("Nest")
        assert nest.nodes[0].behavior == semantic_pipe()

    def test_hierarchy_cycle_detected(self):
        text = """
datatype T = int 0 .. 1
component A
  in I: T
  out O: T
end
network A
  in I: T
  out O: T
  node b: B
  wire I -> b.I
  wire b.O -> O
end
network B
  in I: T
  out O: T
  node a: A
  wire I -> a.I
  wire a.O -> O
end
"""
        report = parse_model(text)
        assert report.ok
        from fks.speclang.elaborate import Corpus
        with pytest.raises(CyclicHierarchy):
            Corpus([report.document]).network("A")

    def test_component_without_automaton(self):
        text = "datatype T = int 0 .. 1\ncomponent Silent\n  in I: T\nend"
        from fks.speclang.elaborate import Corpus
        corpus = Corpus([parse_model(text).document])
        with pytest.raises(InvalidModel):
            corpus.machine("Silent")

    def test_trace_expr_elaborates(self):
        corpus = load_all()
        expr = corpus.trace_expr("CountLoop")
        from fks.traces import Iter, Leaf
        assert isinstance(expr, Iter) and isinstance(expr.body, Leaf)


class TestImports:
    def test_import_cycle_reported(self, tmp_path):
        (tmp_path / "a.fks").write_text('import "b.fks"\n')
        (tmp_path / "b.fks").write_text('import "a.fks"\n')
        result = load_corpus([tmp_path / "a.fks"])
        assert not result.ok
        assert any(d.code == "E-IMP-01" for _, d in result.diagnostics())

    def test_missing_import_reported(self, tmp_path):
        (tmp_path / "a.fks").write_text('import "nowhere.fks"\n')
        result = load_corpus([tmp_path / "a.fks"])
        assert not result.ok

    def test_diamond_import_loads_once(self, tmp_path):
        (tmp_path / "base.fks").write_text("datatype T = int 0 .. 1\n")
        (tmp_path / "l.fks").write_text('import "base.fks"\n')
        (tmp_path / "r.fks").write_text('import "base.fks"\n')
        (tmp_path / "top.fks").write_text('import "l.fks"\nimport "r.fks"\n'
                                          "component C\n  in I: T\nend\n")
        result = load_corpus([tmp_path / "top.fks"])
        assert result.ok
        assert len(result.corpus.documents) == 4

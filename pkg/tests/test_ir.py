import json
import random
from dataclasses import replace
from pathlib import Path

import pytest

from fks.errors import ExplosionGuard, InvalidModel
from fks.kernel import msg
from fks.simulator import (
    ModelRejected,
    Stimulus,
    compile_model,
    create_session,
    interpret_table_step,
    load_ir_network,
)
from fks.simulator.ir import dump_ir
from fks.simulator.session import step
from fks.speclang import load_corpus

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="module")
def docs():
    result = load_corpus(sorted(FIXTURES.glob("*.fks")))
    assert result.ok
    return result.corpus.documents


@pytest.fixture(scope="module")
def sq_ir(docs):
    return compile_model(docs, "SqNet")


class TestCompile:
    def test_artifact_shape(self, sq_ir):
        assert sq_ir["format"] == "fks-ir" and sq_ir["version"] == 1
        assert sq_ir["network"]["name"] == "SqNet"
        table = sq_ir["machines"]["SQ"]["table"]
        assert len(table) == 82  # one row per input value of int 0..81
        row = next(r for r in table if r["consumes"] == {"In": 3})
        assert row["emits"] == {"Out": 9}

    def test_guarded_table_respects_guards(self, docs):
        ir = compile_model(docs, "CountNet")
        table = ir["machines"]["Counter"]["table"]
        # inc at level 3 must not take the increment transition (guard level < 3).
        assert not any(r["transition"] == 0 and r["store"] == {"level": 3}
                       for r in table)
        assert any(r["transition"] == 1 and r["store"] == {"level": 3}
                   for r in table)

    def test_json_round_trip(self, sq_ir):
        text = dump_ir(sq_ir)
        net, tables = load_ir_network(json.loads(text))
        assert net.name == "SqNet"
        assert "SQ" in tables.rows

    def test_inconsistent_corpus_rejected(self, docs):
        squarer = next(d for d in docs if d.source.endswith("squarer.fks"))
        from fks.kernel import ChannelId, int_type
        auto = squarer.automata[0]
        broken = replace(squarer, automata=(replace(
            auto, inputs=auto.inputs + (ChannelId("Aux", int_type(0, 1)),)),))
        mutated = [broken if d is squarer else d for d in docs]
        with pytest.raises(ModelRejected):
            compile_model(mutated, "SqNet")

    def test_table_budget(self, docs):
        with pytest.raises(ExplosionGuard):
            compile_model(docs, "SqNet", budget=10)

    def test_version_check(self, sq_ir):
        stale = dict(sq_ir)
        stale["version"] = 99
        with pytest.raises(InvalidModel):
            load_ir_network(stale)


def run_script(session, script):
    return [step(session, stimuli) for stimuli in script]


def ir_session(ir, network, seed, policy):
    net, tables = load_ir_network(json.loads(dump_ir(ir)))
    return create_session([], network, seed=seed, policy=policy,
                          session_id=f"ir{seed}", machine_step=interpret_table_step(tables),
                          model_override=net)


class TestDifferential:
    def test_direct_vs_interpreted_identical_deltas(self, docs):
        ir = compile_model(docs, "Pipe")
        rng = random.Random(42)
        for trial in range(50):
            seed = rng.randrange(10**6)
            script = []
            for _ in range(rng.randrange(1, 5)):
                stimuli = []
                if rng.random() < 0.7:
                    stimuli.append(Stimulus("In", msg(rng.randrange(0, 4))))
                script.append(stimuli)
            policy = rng.choice(["idle", "strict"])
            direct = create_session(docs, "Pipe", seed=seed, policy=policy,
                                    session_id=f"d{trial}")
            interp = ir_session(ir, "Pipe", seed, policy)
            assert run_script(direct, script) == run_script(interp, script), (
                seed, policy, script)

    def test_multi_output_machine_differential(self, docs):
        # CELL emits on two channels in one transition; ordering must agree.
        ir = compile_model(docs, "Loop")
        for seed in (1, 2, 3):
            script = [[Stimulus("In", msg(1))], [], [Stimulus("In", msg(0))], []]
            direct = create_session(docs, "Loop", seed=seed, policy="idle",
                                    session_id=f"l{seed}")
            interp = ir_session(ir, "Loop", seed, "idle")
            assert run_script(direct, script) == run_script(interp, script)

import pytest
from hypothesis import given, strategies as st

from fks.errors import ExplosionGuard, InvalidModel, PredicateTypeError
from fks.expr import Binary, BoolLit, IntLit, VarRef
from fks.kernel import Valuation, msg, stream
from fks.traces import (
    SATISFIED,
    VACUOUS,
    VIOLATED,
    ChannelPredicate,
    EventTrace,
    Iter,
    Leaf,
    PairedPredicate,
    Par,
    Seq,
    TraceEvent,
    check_assumption_commitment,
    generate_traces,
    language,
    membership,
)

from fixtures_machines import VAL, chan, single_node_net, squarer


def ev(sender, receiver, channel, value, interval):
    return TraceEvent(sender, receiver, channel, msg(value), interval)


def trace(*events):
    return EventTrace(tuple(events))


SQ_NET = single_node_net(squarer(), name="SqNet")
MEMBER = trace(ev("env", "m", "In", 3, 1), ev("m", "env", "Out", 9, 2))


class TestLanguage:
    def test_leaf_identity(self):
        t = trace(ev("a", "b", "c", 1, 1))
        assert language(Leaf(t), 1) == frozenset({t})
        assert language(Leaf(t), 0) == frozenset()

    def test_iter_zero_is_empty_trace(self):
        t = trace(ev("a", "b", "c", 1, 1))
        assert language(Iter(Leaf(t), 0), 5) == frozenset({trace()})

    def test_par_same_interval_orderings(self):
        a = trace(ev("p", "q", "A", 1, 1))
        b = trace(ev("r", "s", "B", 2, 1))
        got = language(Par(Leaf(a), Leaf(b)), 2)
        assert got == frozenset({
            trace(a.events[0], b.events[0]),
            trace(b.events[0], a.events[0]),
        })

    def test_par_respects_interval_order(self):
        a = trace(ev("p", "q", "A", 1, 1))
        b = trace(ev("r", "s", "B", 2, 2))
        got = language(Par(Leaf(a), Leaf(b)), 2)
        assert got == frozenset({trace(a.events[0], b.events[0])})

    def test_seq_shifts_past_first_span(self):
        a = trace(ev("p", "q", "A", 1, 2))
        b = trace(ev("r", "s", "B", 2, 1))
        (t,) = language(Seq(Leaf(a), Leaf(b)), 5)
        assert t.events[1].interval == 3

    def test_iter_unfolding_law(self):
        t = trace(ev("p", "q", "A", 1, 1))
        k = 5
        for n in range(3):
            lhs = language(Iter(Leaf(t), n + 1), k)
            rhs = language(Seq(Leaf(t), Iter(Leaf(t), n)), k) | language(Iter(Leaf(t), n), k)
            assert lhs == rhs

    def test_budget(self):
        t = trace(*(ev("p", "q", "A", 1, i + 1) for i in range(3)))
        with pytest.raises(ExplosionGuard):
            language(Par(Leaf(t), Leaf(t)), 10, budget=2)

    @given(st.lists(st.tuples(st.sampled_from("AB"), st.integers(1, 3)),
                    min_size=0, max_size=3),
           st.lists(st.tuples(st.sampled_from("CD"), st.integers(1, 3)),
                    min_size=0, max_size=3))
    def test_par_symmetry(self, left, right):
        a = trace(*(ev("p", "q", c, 0, i) for c, i in sorted(left, key=lambda e: e[1])))
        b = trace(*(ev("r", "s", c, 0, i) for c, i in sorted(right, key=lambda e: e[1])))
        assert language(Par(Leaf(a), Leaf(b)), 3) == language(Par(Leaf(b), Leaf(a)), 3)


class TestMembership:
    def test_member(self):
        assert membership(MEMBER, SQ_NET, 2).member

    def test_wrong_value_diverges(self):
        bad = trace(ev("env", "m", "In", 3, 1), ev("m", "env", "Out", 8, 2))
        verdict = membership(bad, SQ_NET, 2)
        assert not verdict.member
        assert verdict.divergence == bad.events[1]

    def test_empty_trace_is_member_of_idle_net(self):
        assert membership(trace(), SQ_NET, 2).member

    def test_empty_trace_not_member_under_strict_with_input(self):
        # Strict machines must fire; only the full exchange is a member.
        assert membership(MEMBER, SQ_NET, 2, policy="strict").member

    def test_unknown_channel(self):
        bad = trace(ev("env", "m", "Zap", 1, 1))
        verdict = membership(bad, SQ_NET, 2)
        assert not verdict.member and "Zap" in verdict.detail

    def test_event_beyond_horizon(self):
        late = trace(ev("env", "m", "In", 3, 5))
        verdict = membership(late, SQ_NET, 2)
        assert not verdict.member


class TestGenerate:
    def test_round_trip_all_generated_are_members(self):
        x = Valuation.of({chan("In"): stream([3], [])})
        for t in generate_traces(SQ_NET, x, 2, limit=100):
            assert membership(t, SQ_NET, 2).member, t

    def test_limit_zero(self):
        x = Valuation.of({chan("In"): stream([3], [])})
        assert generate_traces(SQ_NET, x, 2, limit=0) == []

    def test_strict_unique_run(self):
        x = Valuation.of({chan("In"): stream([3], [])})
        got = generate_traces(SQ_NET, x, 2, limit=10, policy="strict")
        assert got == [MEMBER]

    def test_includes_expected_member(self):
        x = Valuation.of({chan("In"): stream([3], [])})
        assert MEMBER in generate_traces(SQ_NET, x, 2, limit=10)


class TestAssumptionCommitment:
    ASSUME = ChannelPredicate((("In", Binary(">=", VarRef("x"), IntLit(0))),))
    COMMIT = PairedPredicate("In", "Out", Binary("==", VarRef("b"),
                                                 Binary("*", VarRef("a"), VarRef("a"))))

    def test_satisfied_on_member_trace(self):
        assert check_assumption_commitment(MEMBER, self.ASSUME, self.COMMIT) == SATISFIED

    def test_vacuous_when_assumption_fails(self):
        t = trace(ev("env", "m", "In", -1, 1))
        assert check_assumption_commitment(t, self.ASSUME, self.COMMIT) == VACUOUS

    def test_violated_commitment(self):
        commit = ChannelPredicate((("Out", BoolLit(False)),))
        assume = ChannelPredicate(())
        assert check_assumption_commitment(MEMBER, assume, commit) == VIOLATED

    def test_unmatched_output_violates_paired(self):
        t = trace(ev("m", "env", "Out", 9, 1))
        assert check_assumption_commitment(t, self.ASSUME, self.COMMIT) == VIOLATED

    def test_predicate_type_error(self):
        bad = ChannelPredicate((("In", Binary("+", VarRef("x"), BoolLit(True))),))
        with pytest.raises(PredicateTypeError):
            check_assumption_commitment(MEMBER, bad, self.COMMIT,
                                        channel_types={"In": VAL, "Out": VAL})


def test_interval_monotonicity_enforced():
    with pytest.raises(InvalidModel):
        trace(ev("a", "b", "c", 1, 2), ev("a", "b", "c", 1, 1))
    with pytest.raises(InvalidModel):
        ev("a", "b", "c", 1, 0)

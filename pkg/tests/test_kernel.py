import pytest
from hypothesis import given, strategies as st

from fks.errors import IndexBeyondHorizon, InvalidModel
from fks.kernel import (
    ChannelId,
    MessageValue,
    TimedStream,
    Valuation,
    concat,
    empty_stream,
    enum_type,
    enumerate_values,
    int_type,
    msg,
    prefix_through,
    record_type,
    stream,
    time_abstraction,
    validate_typing,
)


def letters(*intervals):
    return stream(*intervals)


class TestTimeAbstraction:
    def test_worked_stream(self):
        # a √ ab √ √ bca √ b: letters read off in order give aabbcab
        s = letters(["a"], ["a", "b"], [], ["b", "c", "a"], ["b"])
        assert time_abstraction(s) == tuple(msg(c) for c in "aabbcab")

    def test_empty_history(self):
        assert time_abstraction(letters([], [], [])) == ()

    def test_single_interval_identity(self):
        assert time_abstraction(letters(["x"])) == (msg("x"),)

    def test_length_equals_message_count(self):
        s = letters([1, 2], [], [3])
        assert len(time_abstraction(s)) == s.message_count() == 3

    @given(st.lists(st.lists(st.integers(0, 5), max_size=3), max_size=5),
           st.lists(st.lists(st.integers(0, 5), max_size=3), max_size=5))
    def test_distributes_over_concat(self, a, b):
        s1, s2 = stream(*a), stream(*b)
        assert time_abstraction(concat(s1, s2)) == time_abstraction(s1) + time_abstraction(s2)


class TestPrefixThrough:
    def test_definition(self):
        s = letters(["a"], ["b"], ["c"])
        assert prefix_through(s, 2) == letters(["a"], ["b"])

    def test_empty_prefix(self):
        assert prefix_through(letters(["a"], ["b"]), 0) == TimedStream(())

    def test_full_prefix_is_identity(self):
        s = letters(["a"], [], ["c"])
        assert prefix_through(s, s.horizon) == s

    def test_beyond_horizon(self):
        with pytest.raises(IndexBeyondHorizon):
            prefix_through(letters(["a"]), 2)

    @given(st.lists(st.lists(st.integers(0, 3), max_size=2), max_size=6),
           st.data())
    def test_monotone(self, ivs, data):
        s = stream(*ivs)
        i = data.draw(st.integers(0, s.horizon))
        j = data.draw(st.integers(i, s.horizon))
        shorter, longer = prefix_through(s, i), prefix_through(s, j)
        assert longer.intervals[:i] == shorter.intervals


class TestValuation:
    def test_uniform_horizon_enforced(self):
        a = ChannelId("A", int_type(0, 9))
        b = ChannelId("B", int_type(0, 9))
        with pytest.raises(InvalidModel):
            Valuation.of({a: stream([1]), b: stream([2], [3])})

    def test_entries_canonically_ordered(self):
        a = ChannelId("A", int_type(0, 9))
        b = ChannelId("B", int_type(0, 9))
        v1 = Valuation.of({a: stream([1]), b: stream([2])})
        v2 = Valuation.of({b: stream([2]), a: stream([1])})
        assert v1 == v2 and hash(v1) == hash(v2)

    def test_horizon_preserved_by_prefix_pad_restrict(self):
        a = ChannelId("A", int_type(0, 9))
        v = Valuation.of({a: stream([1], [2], [])})
        assert v.prefix(2).horizon == 2
        assert v.pad(5).horizon == 5
        assert v.restrict([a]).horizon == 3

    def test_empty_valuation_keeps_declared_horizon(self):
        v = Valuation((), 4)
        assert v.horizon == 4 and v.channels() == ()


class TestValidateTyping:
    def setup_method(self):
        self.chan = ChannelId("In", int_type(0, 9))

    def test_well_typed(self):
        v = Valuation.of({self.chan: stream([3], [])})
        assert validate_typing(v, [self.chan]) == []

    def test_out_of_range_message(self):
        v = Valuation.of({self.chan: stream([], [12])})
        (viol,) = validate_typing(v, [self.chan])
        assert (viol.channel, viol.interval, viol.position) == ("In", 1, 0)
        assert viol.expected == "int 0..9"

    def test_missing_declared_channel(self):
        out = ChannelId("Out", int_type(0, 9))
        v = Valuation.of({self.chan: stream([3])})
        (viol,) = validate_typing(v, [self.chan, out])
        assert viol.kind == "missing-channel" and viol.channel == "Out"

    def test_undeclared_channel(self):
        v = Valuation.of({self.chan: stream([3])})
        (viol,) = validate_typing(v, [])
        assert viol.kind == "undeclared-channel"


class TestTypes:
    def test_enum_conformance(self):
        color = enum_type(["red", "green"], "Color")
        assert msg("red").conforms(color)
        assert not msg("blue").conforms(color)
        assert not msg(1).conforms(color)

    def test_record_field_order_irrelevant(self):
        bit = int_type(0, 1, "Bit")
        pair = record_type({"hi": bit, "lo": bit}, "Pair")
        a = msg({"hi": 1, "lo": 0})
        b = MessageValue((("lo", msg(0)), ("hi", msg(1))))
        assert a == b and a.conforms(pair)

    def test_bool_payload_is_not_an_int(self):
        assert not msg(True).conforms(int_type(0, 1))  # type: ignore[arg-type]

    def test_enumerate_values(self):
        bit = int_type(0, 1, "Bit")
        pair = record_type({"hi": bit, "lo": bit}, "Pair")
        assert len(enumerate_values(pair)) == 4
        assert enumerate_values(enum_type(["a", "b"])) == (msg("a"), msg("b"))
        assert [m.payload for m in enumerate_values(int_type(2, 4))] == [2, 3, 4]

    def test_invalid_shapes_rejected(self):
        with pytest.raises(InvalidModel):
            int_type(5, 2)
        with pytest.raises(InvalidModel):
            enum_type([])
        with pytest.raises(InvalidModel):
            enum_type(["x", "x"])
        with pytest.raises(InvalidModel):
            record_type([("f", int_type(0, 1)), ("f", int_type(0, 1))])


def test_empty_stream_helper():
    assert empty_stream(3).intervals == ((), (), ())

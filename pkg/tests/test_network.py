import pytest

from fks.behavior import denote
from fks.errors import CyclicHierarchy, DanglingPort, InvalidModel
from fks.kernel import Valuation, msg, stream
from fks.network import (
    Endpoint,
    NetworkDef,
    NetworkNode,
    UnwiredPortWarning,
    Wire,
    compose_check,
    denote_network,
    enumerate_network_runs,
    flatten,
    require_fully_wired,
)

from fixtures_machines import (
    SIG,
    chan,
    feedback_net,
    nested_pipe,
    pipe,
    sig_chan,
    single_node_net,
    squarer,
)


def in_val(*intervals, horizon=None, ch=None):
    s = stream(*intervals)
    if horizon is not None:
        s = s.pad(horizon)
    return Valuation.of({ch or chan("In"): s})


def out_val(*intervals, ch=None):
    return Valuation.of({ch or chan("Out"): stream(*intervals)})


class TestInvariants:
    def test_feed_through_not_constructible(self):
        with pytest.raises(InvalidModel, match="feed-through"):
            NetworkDef("BAD", (chan("In"),), (chan("Out"),), (),
                       (Wire("w", Endpoint(None, chan("In")), Endpoint(None, chan("Out"))),))

    def test_direction_legality(self, sq):
        with pytest.raises(InvalidModel, match="output port"):
            NetworkDef("BAD", (chan("In"),), (chan("Out"),),
                       (NetworkNode("m", sq),),
                       (Wire("w", Endpoint("m", chan("In")), Endpoint(None, chan("Out"))),))

    def test_endpoint_types_must_match(self, sq):
        with pytest.raises(InvalidModel, match="types differ"):
            NetworkDef("BAD", (sig_chan("In"),), (), (NetworkNode("m", sq),),
                       (Wire("In", Endpoint(None, sig_chan("In")),
                             Endpoint("m", chan("In"))),))

    def test_port_wired_at_most_once(self, sq, nd):
        with pytest.raises(InvalidModel, match="wired twice"):
            NetworkDef("BAD", (chan("In"),), (),
                       (NetworkNode("a", sq), NetworkNode("b", nd)),
                       (Wire("w1", Endpoint(None, chan("In")), Endpoint("a", chan("In"))),
                        Wire("w2", Endpoint(None, chan("In")), Endpoint("b", chan("In")))))

    def test_unwired_ports_warn_and_strict_errors(self, sq):
        with pytest.warns(UnwiredPortWarning):
            net = NetworkDef("HALF", (chan("In"),), (), (NetworkNode("m", sq),),
                             (Wire("In", Endpoint(None, chan("In")),
                                   Endpoint("m", chan("In"))),))
        with pytest.raises(DanglingPort):
            require_fully_wired(net)


class TestFlatten:
    def test_single_child_inlining(self):
        flat = flatten(nested_pipe())
        assert sorted(n.instance for n in flat.nodes) == ["sub.first", "sub.second"]
        assert sorted(w.name for w in flat.wires) == ["In", "Out", "sub.mid"]
        wires = {w.name: w for w in flat.wires}
        assert wires["In"].source == Endpoint(None, chan("In"))
        assert wires["In"].sink == Endpoint("sub.first", chan("In"))
        assert wires["sub.mid"].source == Endpoint("sub.first", chan("Out"))
        assert wires["Out"].source == Endpoint("sub.second", chan("Out"))

    def test_flatten_of_flat_net_is_identity(self):
        net = pipe()
        assert flatten(net) == net

    def test_nested_pipe_flattens_to_expected_two_node_net(self):
        expected = NetworkDef(
            "Nest", (chan("In"),), (chan("Out"),),
            (NetworkNode("sub.first", squarer()), NetworkNode("sub.second", squarer())),
            (Wire("sub.mid", Endpoint("sub.first", chan("Out")),
                  Endpoint("sub.second", chan("In"))),
             Wire("In", Endpoint(None, chan("In")), Endpoint("sub.first", chan("In"))),
             Wire("Out", Endpoint("sub.second", chan("Out")), Endpoint(None, chan("Out")))))
        assert flatten(nested_pipe()) == expected

    def test_flatten_preserves_semantics(self):
        net, flat = nested_pipe(), flatten(nested_pipe())
        k = 4
        for values in ([2], [1], [0]):
            x = in_val(values, horizon=k)
            assert denote_network(net, x, k) == denote_network(flat, x, k)
            assert denote_network(net, x, k, policy="strict") == \
                denote_network(flat, x, k, policy="strict")

    def test_name_cycle_detected(self, sq):
        inner = single_node_net(sq, name="A")
        outer = NetworkDef(
            "A", (chan("In"),), (chan("Out"),),
            (NetworkNode("child", inner),),
            (Wire("In", Endpoint(None, chan("In")), Endpoint("child", chan("In"))),
             Wire("Out", Endpoint("child", chan("Out")), Endpoint(None, chan("Out")))))
        with pytest.raises(CyclicHierarchy):
            flatten(outer)


class TestDenoteNetwork:
    def test_pipe_strict_fourth_power_after_two_delays(self):
        # 2 -> 4 after the first machine's delay -> 16 after the second's.
        got = denote_network(pipe(), in_val([2], horizon=5), 5, policy="strict")
        assert got == frozenset({out_val([], [], [16], [], [])})

    def test_unit_composition_law(self, sq):
        net = single_node_net(sq)
        k = 3
        for values in ([3], [0]):
            x = in_val(values, horizon=k)
            assert denote_network(net, x, k) == denote(sq, x, k)
            assert denote_network(net, x, k, policy="strict") == \
                denote(sq, x, k, policy="strict")

    def test_feedback_net_nonempty_under_idle(self):
        x = Valuation.of({sig_chan("In"): stream([1], [], [])})
        got = denote_network(feedback_net(), x, 3)
        assert got
        # The echoed signal can come back out one loop later: 1@1 then 1@2.
        assert out_val([], [1], [1], ch=sig_chan("Out")) in got

    def test_events_enumeration(self):
        x = in_val([2], horizon=3)
        runs = list(enumerate_network_runs(pipe(), x, 3, policy="strict"))
        assert len(runs) == 1
        outputs, events = runs[0]
        assert outputs == out_val([], [], [16])
        names = [(e.sender, e.receiver, e.channel, e.message.payload, e.interval)
                 for e in events]
        assert ("env", "first", "In", 2, 0) in names
        assert ("first", "second", "mid", 4, 1) in names
        assert ("second", "env", "Out", 16, 2) in names


class TestComposeCheck:
    def test_pipe_matches_oracle(self):
        domains = {
            "In": [msg(0), msg(1), msg(2)],
            "mid": [msg(0), msg(1), msg(4)],
            "Out": [msg(0), msg(1), msg(16)],
        }
        report = compose_check(pipe(), 3, domains, policy="strict")
        assert report.equal and report.inputs_checked == 4 ** 3

    def test_feedback_matches_oracle(self):
        report = compose_check(feedback_net(), 3, policy="idle")
        assert report.equal

    def test_single_node_trivially_equal(self, sq):
        domains = {"In": [msg(0), msg(1)], "Out": [msg(v) for v in (0, 1)]}
        report = compose_check(single_node_net(sq), 2, domains)
        assert report.equal

    def test_node_budget_precondition(self, sq):
        nodes = tuple(NetworkNode(f"m{i}", squarer()) for i in range(4))
        wires = [Wire(f"w{i}", Endpoint(None, chan(f"I{i}")), Endpoint(f"m{i}", chan("In")))
                 for i in range(4)]
        with pytest.warns(UnwiredPortWarning):
            net = NetworkDef("WIDE", tuple(chan(f"I{i}") for i in range(4)), (),
                             nodes, tuple(wires))
        with pytest.raises(ValueError, match="3"):
            compose_check(net, 2)

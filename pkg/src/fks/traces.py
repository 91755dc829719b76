"""Extended event traces: exemplary runs, composition, conformance.

A trace is an ordered list of communication events. Event intervals are
1-based (the first time interval is 1), matching the concrete syntax;
the kernel's 0-indexed streams are converted at this module's boundary.

Composition operators: sequential (the second operand shifted past the
first's last interval), parallel (all order-preserving interleavings on a
common origin, keeping intervals non-decreasing), and bounded iteration
(union of sequential powers). Parallel composition constrains only each
operand's own event order plus interval monotonicity; events of a shared
instance are not further ordered across operands.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

from . import expr as ex
from .errors import ExplosionGuard, InvalidModel, PredicateTypeError
from .kernel import ChannelId, DataTypeDef, MessageValue, TimedStream, Valuation
from .network import ENV, NetworkDef, enumerate_network_runs

SATISFIED = "satisfied"
VIOLATED = "violated"
VACUOUS = "vacuous"


@dataclass(frozen=True)
class TraceEvent:
    sender: str
    receiver: str
    channel: str
    message: MessageValue
    interval: int  # 1-based

    def __post_init__(self) -> None:
        if self.interval < 1:
            raise InvalidModel(f"event interval {self.interval} must be >= 1")

    def describe(self) -> str:
        return (f"{self.sender} -> {self.receiver} {self.channel} "
                f"{self.message.describe()} @ {self.interval}")


@dataclass(frozen=True)
class EventTrace:
    events: tuple[TraceEvent, ...]

    def __post_init__(self) -> None:
        intervals = [e.interval for e in self.events]
        if intervals != sorted(intervals):
            raise InvalidModel("event intervals must be non-decreasing")

    def span(self) -> int:
        return self.events[-1].interval if self.events else 0

    def shifted(self, by: int) -> "EventTrace":
        return EventTrace(tuple(
            TraceEvent(e.sender, e.receiver, e.channel, e.message, e.interval + by)
            for e in self.events))

    def input_events(self) -> tuple[TraceEvent, ...]:
        return tuple(e for e in self.events if e.sender == ENV)


def canonical(t: EventTrace) -> EventTrace:
    """Stable-sort events by (interval, channel); per-channel order is preserved."""
    return EventTrace(tuple(sorted(t.events, key=lambda e: (e.interval, e.channel))))


# --- Composition -------------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    trace: EventTrace


@dataclass(frozen=True)
class Seq:
    first: "TraceExpr"
    second: "TraceExpr"


@dataclass(frozen=True)
class Par:
    left: "TraceExpr"
    right: "TraceExpr"


@dataclass(frozen=True)
class Iter:
    body: "TraceExpr"
    max_repetitions: int

    def __post_init__(self) -> None:
        if self.max_repetitions < 0:
            raise InvalidModel("iteration bound must be >= 0")


TraceExpr = Union[Leaf, Seq, Par, Iter]


def language(e: TraceExpr, k: int, budget: int = 10**5) -> frozenset[EventTrace]:
    """All traces the expression denotes, restricted to spans within horizon k."""
    counter = [0]

    def charge(n: int = 1) -> None:
        counter[0] += n
        if counter[0] > budget:
            raise ExplosionGuard(budget, counter[0], what="trace language")

    def seq_concat(a: EventTrace, b: EventTrace) -> EventTrace:
        return EventTrace(a.events + b.shifted(a.span()).events)

    def walk(node: TraceExpr) -> frozenset[EventTrace]:
        if isinstance(node, Leaf):
            charge()
            return frozenset({node.trace}) if node.trace.span() <= k else frozenset()
        if isinstance(node, Seq):
            out = set()
            for a in walk(node.first):
                for b in walk(node.second):
                    charge()
                    t = seq_concat(a, b)
                    if t.span() <= k:
                        out.add(t)
            return frozenset(out)
        if isinstance(node, Par):
            out = set()
            for a in walk(node.left):
                for b in walk(node.right):
                    for merged in _merges(a.events, b.events, charge):
                        out.add(EventTrace(merged))
            return frozenset(out)
        assert isinstance(node, Iter)
        body = walk(node.body)
        powers: frozenset[EventTrace] = frozenset({EventTrace(())})
        out = set(powers)
        for _ in range(node.max_repetitions):
            nxt = set()
            for a in powers:
                for b in body:
                    charge()
                    t = seq_concat(a, b)
                    if t.span() <= k:
                        nxt.add(t)
            powers = frozenset(nxt)
            out |= powers
            if not powers:
                break
        return frozenset(out)

    return walk(e)


def _merges(a: Sequence[TraceEvent], b: Sequence[TraceEvent], charge) -> \
        Iterable[tuple[TraceEvent, ...]]:
    """Order-preserving merges whose interval sequence stays non-decreasing."""

    def rec(i: int, j: int, last: int) -> Iterable[tuple[TraceEvent, ...]]:
        if i == len(a) and j == len(b):
            charge()
            yield ()
            return
        if i < len(a) and a[i].interval >= last:
            for rest in rec(i + 1, j, a[i].interval):
                yield (a[i],) + rest
        if j < len(b) and b[j].interval >= last:
            for rest in rec(i, j + 1, b[j].interval):
                yield (b[j],) + rest

    return rec(0, 0, 1)


# --- Conformance against network semantics ------------------------------------


@dataclass(frozen=True)
class MembershipVerdict:
    member: bool
    divergence: TraceEvent | None = None
    detail: str = ""


def _inputs_from_trace(t: EventTrace, n: NetworkDef, k: int) -> Valuation:
    by_name: dict[str, ChannelId] = {c.name: c for c in n.external_inputs}
    lanes: dict[str, list[tuple[MessageValue, ...]]] = {
        name: [() for _ in range(k)] for name in by_name}
    for e in t.input_events():
        if e.channel not in by_name:
            raise ValueError(f"trace sends on {e.channel!r}, not an external input of {n.name}")
        if e.interval > k:
            raise ValueError(f"trace event at interval {e.interval} beyond horizon {k}")
        idx = e.interval - 1
        lanes[e.channel][idx] = lanes[e.channel][idx] + (e.message,)
    return Valuation(tuple(
        (ch, TimedStream(tuple(lanes[name]))) for name, ch in by_name.items()), k)


def _run_trace(events, k: int) -> EventTrace:
    # Run events arrive in step order, which is already interval-sorted.
    converted = tuple(
        TraceEvent(e.sender, e.receiver, e.channel, e.message, e.interval + 1)
        for e in events)
    return canonical(EventTrace(converted))


def membership(t: EventTrace, n: NetworkDef, k: int, policy: str = "idle",
               budget: int = 10**6) -> MembershipVerdict:
    """Is t an observable run of n at horizon k?

    The trace's environment sends are supplied as external inputs; t is a
    member iff some run of the network produces exactly t's events (internal
    and outbound included) at the stated intervals. On failure the earliest
    divergence against the closest run is reported.
    """
    try:
        x = _inputs_from_trace(t, n, k)
    except ValueError as err:
        bad = next((e for e in t.input_events()
                    if e.interval > k or e.channel not in
                    {c.name for c in n.external_inputs}), None)
        return MembershipVerdict(False, bad, str(err))
    want = canonical(t)
    best_prefix = -1
    best_event: TraceEvent | None = None
    best_detail = ""
    for _, events in enumerate_network_runs(n, x, k, policy, budget):
        got = _run_trace(events, k)
        if got == want:
            return MembershipVerdict(True)
        common = 0
        for a, b in zip(want.events, got.events):
            if a != b:
                break
            common += 1
        if common > best_prefix:
            best_prefix = common
            if common < len(want.events):
                best_event = want.events[common]
                best_detail = (f"run produced {got.events[common].describe()}"
                               if common < len(got.events) else
                               "run has no further events")
            else:
                best_event = got.events[common]
                best_detail = "run produced events beyond the trace"
    return MembershipVerdict(False, best_event, best_detail)


def generate_traces(n: NetworkDef, x: Valuation, k: int, limit: int,
                    policy: str = "idle", budget: int = 10**6) -> list[EventTrace]:
    """Traces generated by simulation; every result satisfies membership.

    Deterministic order (run-tree order, duplicates dropped), at most
    `limit` traces.
    """
    seen: set[EventTrace] = set()
    out: list[EventTrace] = []
    if limit <= 0:
        return out
    for _, events in enumerate_network_runs(n, x, k, policy, budget):
        t = _run_trace(events, k)
        if t in seen:
            continue
        seen.add(t)
        out.append(t)
        if len(out) >= limit:
            break
    return out


# --- Assumption / commitment monitors -----------------------------------------


@dataclass(frozen=True)
class ChannelPredicate:
    """Pointwise predicate: per-channel boolean expression over the value `x`.

    Events on channels without an entry pass trivially.
    """

    channels: tuple[tuple[str, ex.Expr], ...]

    def applies(self, e: TraceEvent) -> ex.Expr | None:
        for name, pred in self.channels:
            if name == e.channel:
                return pred
        return None


@dataclass(frozen=True)
class PairedPredicate:
    """Index-paired predicate: the i-th message on `in_channel` (bound to `a`)
    against the i-th message on `out_channel` (bound to `b`).

    An output with no matching input violates the predicate; trailing inputs
    not yet answered within the trace pass.
    """

    in_channel: str
    out_channel: str
    expr: ex.Expr


Predicate = Union[ChannelPredicate, PairedPredicate]


def _typecheck_pointwise(p: ChannelPredicate,
                         channel_types: Mapping[str, DataTypeDef]) -> None:
    for name, pred in p.channels:
        if name not in channel_types:
            continue
        try:
            ex.check(pred, "bool", {"x": channel_types[name]})
        except ex.ExprTypeError as err:
            raise PredicateTypeError(f"predicate on {name}: {err}") from err


def check_assumption_commitment(t: EventTrace, assume: ChannelPredicate,
                                commit: Predicate,
                                channel_types: Mapping[str, DataTypeDef] | None = None,
                                ) -> str:
    """Evaluate an assumption/commitment pair on one trace.

    Vacuous if the assumption fails on any of the trace's input events;
    otherwise satisfied iff the commitment holds on the whole trace.
    """
    if channel_types is not None:
        _typecheck_pointwise(assume, channel_types)
        if isinstance(commit, ChannelPredicate):
            _typecheck_pointwise(commit, channel_types)
        else:
            env = {}
            if commit.in_channel in channel_types:
                env["a"] = channel_types[commit.in_channel]
            if commit.out_channel in channel_types:
                env["b"] = channel_types[commit.out_channel]
            try:
                ex.check(commit.expr, "bool", env)
            except ex.ExprTypeError as err:
                raise PredicateTypeError(str(err)) from err

    for e in t.input_events():
        pred = assume.applies(e)
        if pred is not None and not _eval_bool(pred, {"x": ex.to_value(e.message)}):
            return VACUOUS

    if isinstance(commit, ChannelPredicate):
        for e in t.events:
            pred = commit.applies(e)
            if pred is not None and not _eval_bool(pred, {"x": ex.to_value(e.message)}):
                return VIOLATED
        return SATISFIED

    ins = [e.message for e in t.events if e.channel == commit.in_channel]
    outs = [e.message for e in t.events if e.channel == commit.out_channel]
    for i, out_msg in enumerate(outs):
        if i >= len(ins):
            return VIOLATED
        env_vals = {"a": ex.to_value(ins[i]), "b": ex.to_value(out_msg)}
        if not _eval_bool(commit.expr, env_vals):
            return VIOLATED
    return SATISFIED


def _eval_bool(pred: ex.Expr, env: Mapping[str, ex.Value]) -> bool:
    value = ex.evaluate(pred, env)
    if not isinstance(value, bool):
        raise PredicateTypeError(f"predicate evaluated to non-boolean {value!r}")
    return value

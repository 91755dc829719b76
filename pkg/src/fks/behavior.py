"""State machines and their denotation as time-guarded stream functions.

A machine steps once per time interval. Arriving messages join unbounded
per-channel FIFO buffers; an enabled transition (patterns match buffer
heads, guard true) consumes the matched heads and schedules its emissions
for the NEXT interval, so processing always costs at least one tick and
time-guardedness holds by construction. Per interval at most one
transition fires, and a transition reads at most one message per channel.

Two idle policies exist:

* ``idle`` (default): every step also offers a stutter branch (consume
  nothing, emit nothing), modeling underspecified waiting and keeping
  denotations total and non-empty.
* ``strict``: stuttering is allowed only when no transition is enabled;
  if buffers are non-empty and nothing is enabled the machine is stuck.

Variable updates evaluate all right-hand sides in the pre-state
(simultaneous assignment). Emission and update values are range-checked
against the declared types when they cross the boundary; a violation is a
model bug and raises EvalError.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from . import expr as ex
from .errors import EvalError, ExplosionGuard, InvalidModel, StuckState
from .kernel import (
    ChannelId,
    DataTypeDef,
    MessageValue,
    TimedStream,
    Valuation,
    enumerate_values,
    validate_typing,
)

POLICIES = ("idle", "strict")

DEFAULT_BUDGET = 10**6


# --- Machine structure -------------------------------------------------------


@dataclass(frozen=True)
class VarDecl:
    name: str
    dtype: DataTypeDef
    init: MessageValue

    def __post_init__(self) -> None:
        if not self.init.conforms(self.dtype):
            raise InvalidModel(
                f"initial value {self.init.describe()} does not conform to "
                f"{self.dtype.describe()} for variable {self.name}")


@dataclass(frozen=True)
class Pattern:
    """Bind the head of an input channel's buffer to a variable."""

    channel: ChannelId
    var: str


@dataclass(frozen=True)
class Emission:
    channel: ChannelId
    expr: ex.Expr


@dataclass(frozen=True)
class Update:
    var: str
    expr: ex.Expr


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    patterns: tuple[Pattern, ...] = ()
    guard: ex.Expr | None = None
    emissions: tuple[Emission, ...] = ()
    updates: tuple[Update, ...] = ()


@dataclass(frozen=True)
class StateMachine:
    """A state transition diagram over a syntactic interface (inputs, outputs)."""

    name: str
    inputs: tuple[ChannelId, ...]
    outputs: tuple[ChannelId, ...]
    states: tuple[str, ...]
    initial: str
    variables: tuple[VarDecl, ...] = ()
    transitions: tuple[Transition, ...] = ()

    def __post_init__(self) -> None:
        if not self.states:
            raise InvalidModel(f"machine {self.name}: no control states")
        if self.initial not in self.states:
            raise InvalidModel(f"machine {self.name}: initial state {self.initial!r} undeclared")
        names = [c.name for c in self.inputs] + [c.name for c in self.outputs]
        if len(set(names)) != len(names):
            raise InvalidModel(f"machine {self.name}: duplicate channel names {names}")
        var_types = {v.name: v.dtype for v in self.variables}
        if len(var_types) != len(self.variables):
            raise InvalidModel(f"machine {self.name}: duplicate variable names")
        ins = {c.name: c for c in self.inputs}
        outs = {c.name: c for c in self.outputs}
        for idx, t in enumerate(self.transitions):
            where = f"machine {self.name}, transition {idx}"
            if t.source not in self.states or t.target not in self.states:
                raise InvalidModel(f"{where}: undeclared control state")
            seen_pat: set[str] = set()
            env = dict(var_types)
            for p in t.patterns:
                if p.channel.name not in ins:
                    raise InvalidModel(f"{where}: pattern channel {p.channel.name} is not an input")
                if p.channel.name in seen_pat:
                    raise InvalidModel(f"{where}: two patterns on channel {p.channel.name}")
                seen_pat.add(p.channel.name)
                env[p.var] = p.channel.msg_type
            try:
                if t.guard is not None:
                    ex.check(t.guard, "bool", env)
                seen_emit: set[str] = set()
                for e in t.emissions:
                    if e.channel.name not in outs:
                        raise InvalidModel(
                            f"{where}: emission channel {e.channel.name} is not an output")
                    if e.channel.name in seen_emit:
                        raise InvalidModel(f"{where}: two emissions on channel {e.channel.name}")
                    seen_emit.add(e.channel.name)
                    ex.check_against(e.expr, e.channel.msg_type, env)
                for u in t.updates:
                    if u.var not in var_types:
                        raise InvalidModel(f"{where}: update of undeclared variable {u.var}")
                    ex.check_against(u.expr, var_types[u.var], env)
            except ex.ExprTypeError as err:  # pragma: no cover - message passthrough
                raise InvalidModel(f"{where}: {err}") from err

    def input_named(self, name: str) -> ChannelId:
        for c in self.inputs:
            if c.name == name:
                return c
        raise KeyError(name)


# --- Configurations ----------------------------------------------------------


@dataclass(frozen=True)
class MachineConfig:
    """Control state, variable store, and pending input buffers (FIFO per channel)."""

    control: str
    store: tuple[tuple[str, MessageValue], ...]
    buffers: tuple[tuple[ChannelId, tuple[MessageValue, ...]], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "store", tuple(sorted(self.store)))
        object.__setattr__(self, "buffers",
                           tuple(sorted(self.buffers, key=lambda e: e[0].name)))

    def buffer(self, name: str) -> tuple[MessageValue, ...]:
        for ch, queue in self.buffers:
            if ch.name == name:
                return queue
        raise KeyError(name)

    def store_value(self, name: str) -> MessageValue:
        return dict(self.store)[name]


def initial_config(m: StateMachine) -> MachineConfig:
    return MachineConfig(
        control=m.initial,
        store=tuple((v.name, v.init) for v in m.variables),
        buffers=tuple((c, ()) for c in m.inputs),
    )


@dataclass(frozen=True)
class Branch:
    """One step outcome: successor config plus emissions for the next interval."""

    config: MachineConfig
    emissions: tuple[tuple[ChannelId, MessageValue], ...]
    transition: int | None = None  # index into machine.transitions; None = stutter
    consumed: tuple[tuple[ChannelId, MessageValue], ...] = ()
    label: str | None = None  # preformatted description (table interpreters)

    def describe(self, m: StateMachine) -> str:
        if self.label is not None:
            return self.label
        if self.transition is None:
            return "stutter"
        t = m.transitions[self.transition]
        return branch_label(t.source, t.target, self.emissions)


def branch_label(source: str, target: str,
                 emissions: Iterable[tuple[ChannelId, MessageValue]]) -> str:
    emitted = ", ".join(f"{c.name}!{v.describe()}"
                        for c, v in sorted(emissions, key=lambda e: e[0].name))
    return f"{source}->{target}" + (f" emit {emitted}" if emitted else "")


# --- Stepping ----------------------------------------------------------------


def step(m: StateMachine, cfg: MachineConfig,
         arrivals: Mapping[str, Sequence[MessageValue]],
         policy: str = "idle") -> list[Branch]:
    """One synchronous step: append arrivals, then branch over enabled transitions.

    Returns the deterministic branch list: enabled transitions in declaration
    order, then (policy permitting) the stutter branch. Emissions in a branch
    are due one interval after the step that produced them.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    ins = {c.name: c for c in m.inputs}
    for name, messages in arrivals.items():
        if name not in ins:
            raise TypeError(f"arrival on {name!r}: not an input of {m.name}")
        for value in messages:
            if not value.conforms(ins[name].msg_type):
                raise TypeError(
                    f"arrival {value.describe()} on {name} does not conform to "
                    f"{ins[name].msg_type.describe()}")

    queued = {ch.name: queue + tuple(arrivals.get(ch.name, ()))
              for ch, queue in cfg.buffers}
    store_values = {name: ex.to_value(value) for name, value in cfg.store}

    branches: list[Branch] = []
    for idx, t in enumerate(m.transitions):
        if t.source != cfg.control:
            continue
        env = dict(store_values)
        heads: dict[str, MessageValue] = {}
        for p in t.patterns:
            queue = queued[p.channel.name]
            if not queue:
                break
            heads[p.channel.name] = queue[0]
            env[p.var] = ex.to_value(queue[0])
        else:
            if t.guard is None or ex.evaluate(t.guard, env):
                branches.append(_fire(m, cfg, t, idx, queued, env, heads))
    total_buffered = any(queued.values())

    if policy == "idle" or not branches:
        if policy == "strict" and not branches and total_buffered:
            raise StuckState(
                f"machine {m.name} in state {cfg.control}: buffered input but "
                f"no enabled transition")
        stutter = MachineConfig(cfg.control, cfg.store,
                                tuple((ch, queued[ch.name]) for ch, _ in cfg.buffers))
        branches.append(Branch(stutter, (), None))
    return branches


def _fire(m: StateMachine, cfg: MachineConfig, t: Transition, idx: int,
          queued: Mapping[str, tuple[MessageValue, ...]],
          env: Mapping[str, ex.Value],
          heads: Mapping[str, MessageValue]) -> Branch:
    var_types = {v.name: v.dtype for v in m.variables}
    consumed_names = set(heads)
    new_buffers = tuple(
        (ch, queued[ch.name][1:] if ch.name in consumed_names else queued[ch.name])
        for ch, _ in cfg.buffers)
    new_store = dict(cfg.store)
    for u in t.updates:
        new_store[u.var] = ex.to_message(ex.evaluate(u.expr, env), var_types[u.var])
    emissions = tuple(
        (e.channel, ex.to_message(ex.evaluate(e.expr, env), e.channel.msg_type))
        for e in t.emissions)
    consumed = tuple((p.channel, heads[p.channel.name]) for p in t.patterns)
    return Branch(MachineConfig(t.target, tuple(new_store.items()), new_buffers),
                  emissions, idx, consumed)


# --- Run-tree enumeration ----------------------------------------------------

# A stepper maps (state, interval) to the ordered list of (state', payload)
# branch outcomes; the engine below is shared with network execution.
Stepper = Callable[[object, int], Sequence[tuple[object, object]]]


def iterate_runs(stepper: Stepper, init: object, horizon: int,
                 budget: int = DEFAULT_BUDGET) -> Iterator[tuple[object, ...]]:
    """Depth-first enumeration of all runs; yields each run's payload tuple.

    Raises ExplosionGuard once more than `budget` branch nodes have been
    expanded across the whole tree.
    """
    count = 0

    def walk(state: object, interval: int,
             payloads: tuple[object, ...]) -> Iterator[tuple[object, ...]]:
        nonlocal count
        if interval == horizon:
            yield payloads
            return
        for nxt, payload in stepper(state, interval):
            count += 1
            if count > budget:
                raise ExplosionGuard(budget, count)
            yield from walk(nxt, interval + 1, payloads + (payload,))

    return walk(init, 0, ())


def _arrivals_at(x: Valuation, interval: int) -> dict[str, tuple[MessageValue, ...]]:
    return {ch.name: s.intervals[interval] for ch, s in x.entries}


def emissions_to_valuation(outputs: Iterable[ChannelId], horizon: int,
                           per_step: Sequence[tuple[tuple[ChannelId, MessageValue], ...]],
                           ) -> Valuation:
    """Assemble per-step emissions (due one interval later) into an output valuation.

    per_step[i] holds the emissions produced by the step at interval i, which
    land at interval i+1; anything due at or beyond the horizon is dropped.
    """
    lanes: dict[str, list[tuple[MessageValue, ...]]] = {
        ch.name: [() for _ in range(horizon)] for ch in outputs}
    for i, emitted in enumerate(per_step):
        due = i + 1
        if due >= horizon:
            continue
        for ch, value in emitted:
            lanes[ch.name][due] = lanes[ch.name][due] + (value,)
    return Valuation(tuple(
        (ch, TimedStream(tuple(lanes[ch.name]))) for ch in outputs), horizon)


def denote(m: StateMachine, x: Valuation, k: int, policy: str = "idle",
           budget: int = DEFAULT_BUDGET) -> frozenset[Valuation]:
    """The set of output histories of all k-interval runs of m on input x."""
    if x.horizon != k:
        raise ValueError(f"input horizon {x.horizon} != k {k}")
    violations = validate_typing(x, m.inputs)
    if violations:
        raise TypeError("; ".join(v.describe() for v in violations))

    def stepper(cfg: object, interval: int):
        assert isinstance(cfg, MachineConfig)
        return [(b.config, b.emissions)
                for b in step(m, cfg, _arrivals_at(x, interval), policy)]

    results = set()
    for run in iterate_runs(stepper, initial_config(m), k, budget):
        results.add(emissions_to_valuation(m.outputs, k, run))
    return frozenset(results)


# --- Bounded input enumeration -----------------------------------------------


def input_grid(channels: Sequence[ChannelId], k: int,
               domains: Mapping[str, Sequence[MessageValue]] | None = None,
               ) -> Iterator[Valuation]:
    """All input valuations of horizon k with at most one message per channel
    per interval, drawn from each channel's domain (default: its full type).

    Enumeration order is lexicographic over (channel name, interval) slots
    with "no message" before domain values, so the first hit of any scan is
    the canonical smallest.
    """
    slots: list[list[tuple[MessageValue, ...]]] = []
    ordered = sorted(channels, key=lambda c: c.name)
    for ch in ordered:
        values = (domains or {}).get(ch.name)
        if values is None:
            values = enumerate_values(ch.msg_type)
        choices: list[tuple[MessageValue, ...]] = [()] + [(v,) for v in values]
        slots.extend([choices] * k)
    for combo in product(*slots):
        entries = []
        for pos, ch in enumerate(ordered):
            intervals = combo[pos * k:(pos + 1) * k]
            entries.append((ch, TimedStream(tuple(intervals))))
        yield Valuation(tuple(entries), k)


def prefix_set(valuations: Iterable[Valuation], count: int) -> frozenset[Valuation]:
    return frozenset(v.prefix(count) for v in valuations)


# --- Time-guardedness --------------------------------------------------------


@dataclass(frozen=True)
class GuardednessWitness:
    x: Valuation
    x_prime: Valuation
    agree_through: int
    detail: str


@dataclass(frozen=True)
class GuardednessReport:
    passed: bool
    pairs_checked: int
    witness: GuardednessWitness | None = None


def check_time_guardedness(m: StateMachine, k: int,
                           pairs: Iterable[tuple[Valuation, Valuation]],
                           policy: str = "idle",
                           denote_fn: Callable[..., frozenset[Valuation]] | None = None,
                           ) -> GuardednessReport:
    """Check that outputs through interval i+1 depend only on inputs through i.

    For every sampled pair (x, x') agreeing on their first i intervals, the
    prefix-through-(i+1) projections of the two denotation sets must be equal.
    The step rule enforces this structurally, so a failure indicates an engine
    bug; `denote_fn` exists so tests can inject a broken engine.
    """
    compute = denote_fn or denote
    cache: dict[Valuation, frozenset[Valuation]] = {}
    checked = 0
    for x, x_prime in pairs:
        checked += 1
        agree = 0
        while agree < min(x.horizon, x_prime.horizon) and \
                x.prefix(agree + 1) == x_prime.prefix(agree + 1):
            agree += 1
        upto = min(agree + 1, k)
        for v in (x, x_prime):
            if v not in cache:
                cache[v] = compute(m, v, k, policy)
        left = prefix_set(cache[x], upto)
        right = prefix_set(cache[x_prime], upto)
        if left != right:
            only_left = next(iter(left - right), None)
            only_right = next(iter(right - left), None)
            detail = (f"projections through interval {upto} differ; "
                      f"e.g. {_describe_val(only_left)} vs {_describe_val(only_right)}")
            return GuardednessReport(False, checked,
                                     GuardednessWitness(x, x_prime, agree, detail))
    return GuardednessReport(True, checked)


def _describe_val(v: Valuation | None) -> str:
    if v is None:
        return "-"
    return "; ".join(
        f"{ch.name}=" + "".join("[%s]" % ",".join(m.describe() for m in iv)
                                for iv in s.intervals)
        for ch, s in v.entries)


def all_input_pairs(m: StateMachine, k: int,
                    domains: Mapping[str, Sequence[MessageValue]] | None = None,
                    ) -> Iterator[tuple[Valuation, Valuation]]:
    """Exhaustive ordered pairs over the bounded input grid (for desk-scale checks)."""
    grid = list(input_grid(m.inputs, k, domains))
    for x in grid:
        for x_prime in grid:
            yield x, x_prime

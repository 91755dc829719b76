"""Messages, channels, timed streams, and channel valuations.

This is the semantic substrate of the toolkit. A timed stream is a finite
sequence of time intervals, each carrying a finite message sequence; the
tick that separates intervals is structural (the boundary between tuple
elements), never a message, so a "tick message" is unrepresentable. All
semantics in the toolkit are horizon-indexed: a stream of horizon k covers
intervals 0..k-1.

Message types are restricted to finite-domain shapes (bounded integers,
enumerations, finite records) so that exhaustive enumeration of message
domains and input histories stays decidable at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

from .errors import IndexBeyondHorizon, InvalidModel

# --- Data type definitions ---------------------------------------------------


@dataclass(frozen=True)
class IntRange:
    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise InvalidModel(f"empty integer range {self.lo}..{self.hi}")


@dataclass(frozen=True)
class Enumeration:
    literals: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.literals:
            raise InvalidModel("enumeration needs at least one literal")
        if len(set(self.literals)) != len(self.literals):
            raise InvalidModel(f"duplicate enumeration literals in {self.literals}")


@dataclass(frozen=True)
class RecordShape:
    fields: tuple[tuple[str, "DataTypeDef"], ...]

    def __post_init__(self) -> None:
        names = [name for name, _ in self.fields]
        if len(set(names)) != len(names):
            raise InvalidModel(f"duplicate record fields in {names}")
        if not self.fields:
            raise InvalidModel("record needs at least one field")

    def field_type(self, name: str) -> "DataTypeDef | None":
        for fname, ftype in self.fields:
            if fname == name:
                return ftype
        return None


TypeShape = Union[IntRange, Enumeration, RecordShape]


@dataclass(frozen=True)
class DataTypeDef:
    """A named (or anonymous, name == "") finite message type."""

    name: str
    shape: TypeShape

    def describe(self) -> str:
        if self.name:
            return self.name
        return describe_shape(self.shape)


def describe_shape(shape: TypeShape) -> str:
    if isinstance(shape, IntRange):
        return f"int {shape.lo}..{shape.hi}"
    if isinstance(shape, Enumeration):
        return "enum { %s }" % ", ".join(shape.literals)
    return "record { %s }" % ", ".join(
        f"{name}: {dtype.describe()}" for name, dtype in shape.fields
    )


def int_type(lo: int, hi: int, name: str = "") -> DataTypeDef:
    return DataTypeDef(name, IntRange(lo, hi))


def enum_type(literals: Iterable[str], name: str = "") -> DataTypeDef:
    return DataTypeDef(name, Enumeration(tuple(literals)))


def record_type(fields: Mapping[str, DataTypeDef] | Iterable[tuple[str, DataTypeDef]],
                name: str = "") -> DataTypeDef:
    items = fields.items() if isinstance(fields, Mapping) else fields
    return DataTypeDef(name, RecordShape(tuple(items)))


# --- Message values ----------------------------------------------------------

Payload = Union[int, str, tuple]


@dataclass(frozen=True)
class MessageValue:
    """One message: a bounded integer, an enumeration literal, or a record.

    Record payloads are stored as name-sorted (field, MessageValue) pairs so
    that structurally equal records compare and hash equal regardless of the
    order they were written in.
    """

    payload: Payload

    def __post_init__(self) -> None:
        if isinstance(self.payload, tuple):
            ordered = tuple(sorted(self.payload, key=lambda kv: kv[0]))
            object.__setattr__(self, "payload", ordered)

    def conforms(self, dtype: DataTypeDef) -> bool:
        shape = dtype.shape
        if isinstance(shape, IntRange):
            return (isinstance(self.payload, int)
                    and not isinstance(self.payload, bool)
                    and shape.lo <= self.payload <= shape.hi)
        if isinstance(shape, Enumeration):
            return isinstance(self.payload, str) and self.payload in shape.literals
        if not isinstance(self.payload, tuple):
            return False
        got = {name: value for name, value in self.payload}
        if set(got) != {name for name, _ in shape.fields}:
            return False
        return all(got[name].conforms(ftype) for name, ftype in shape.fields)

    def field(self, name: str) -> "MessageValue":
        if not isinstance(self.payload, tuple):
            raise InvalidModel(f"{self.describe()} has no fields")
        for fname, value in self.payload:
            if fname == name:
                return value
        raise InvalidModel(f"{self.describe()} has no field {name!r}")

    def describe(self) -> str:
        if isinstance(self.payload, tuple):
            inner = ", ".join(f"{n}: {v.describe()}" for n, v in self.payload)
            return "{%s}" % inner
        return str(self.payload)


def msg(value: int | str | Mapping[str, "MessageValue | int | str"]) -> MessageValue:
    """Convenience constructor; record fields may themselves be plain values."""
    if isinstance(value, Mapping):
        return MessageValue(tuple((k, v if isinstance(v, MessageValue) else msg(v))
                                  for k, v in value.items()))
    return MessageValue(value)


def enumerate_values(dtype: DataTypeDef) -> tuple[MessageValue, ...]:
    """All values of a finite type, in canonical order."""
    shape = dtype.shape
    if isinstance(shape, IntRange):
        return tuple(MessageValue(i) for i in range(shape.lo, shape.hi + 1))
    if isinstance(shape, Enumeration):
        return tuple(MessageValue(lit) for lit in shape.literals)
    combos: list[tuple[tuple[str, MessageValue], ...]] = [()]
    for fname, ftype in shape.fields:
        combos = [prior + ((fname, value),)
                  for prior in combos
                  for value in enumerate_values(ftype)]
    return tuple(MessageValue(combo) for combo in combos)


# --- Channels ----------------------------------------------------------------


@dataclass(frozen=True)
class ChannelId:
    """A named, typed channel. Names are unique within one interface scope."""

    name: str
    msg_type: DataTypeDef


# --- Timed streams -----------------------------------------------------------


@dataclass(frozen=True)
class TimedStream:
    """A finite-horizon communication history: one message tuple per interval."""

    intervals: tuple[tuple[MessageValue, ...], ...]

    @property
    def horizon(self) -> int:
        return len(self.intervals)

    def prefix(self, count: int) -> "TimedStream":
        if count < 0 or count > self.horizon:
            raise IndexBeyondHorizon(count, self.horizon)
        return TimedStream(self.intervals[:count])

    def drop(self, count: int) -> "TimedStream":
        if count < 0 or count > self.horizon:
            raise IndexBeyondHorizon(count, self.horizon)
        return TimedStream(self.intervals[count:])

    def pad(self, horizon: int) -> "TimedStream":
        if horizon < self.horizon:
            raise IndexBeyondHorizon(horizon, self.horizon)
        return TimedStream(self.intervals + ((),) * (horizon - self.horizon))

    def message_count(self) -> int:
        return sum(len(iv) for iv in self.intervals)


def stream(*intervals: Iterable[MessageValue | int | str]) -> TimedStream:
    """Build a stream from per-interval message lists; bare values are wrapped."""
    return TimedStream(tuple(
        tuple(m if isinstance(m, MessageValue) else msg(m) for m in interval)
        for interval in intervals
    ))


def empty_stream(horizon: int) -> TimedStream:
    return TimedStream(((),) * horizon)


def time_abstraction(s: TimedStream) -> tuple[MessageValue, ...]:
    """Concatenate all interval contents in order, discarding time structure."""
    out: list[MessageValue] = []
    for interval in s.intervals:
        out.extend(interval)
    return tuple(out)


def prefix_through(s: TimedStream, i: int) -> TimedStream:
    """The first i intervals of s; prefix_through(s, s.horizon) is s itself."""
    return s.prefix(i)


def concat(first: TimedStream, second: TimedStream) -> TimedStream:
    """Interval-wise concatenation: second's intervals follow first's."""
    return TimedStream(first.intervals + second.intervals)


# --- Channel valuations ------------------------------------------------------


@dataclass(frozen=True)
class Valuation:
    """An assignment of equal-horizon timed streams to a set of channels.

    Entries are kept name-sorted so valuations over the same domain compare
    and hash structurally; channel names must therefore be unique within the
    valuation's domain.
    """

    entries: tuple[tuple[ChannelId, TimedStream], ...]
    horizon: int = field(default=-1)

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.entries, key=lambda e: e[0].name))
        object.__setattr__(self, "entries", ordered)
        names = [ch.name for ch, _ in ordered]
        if len(set(names)) != len(names):
            raise InvalidModel(f"duplicate channel names in valuation: {names}")
        horizons = {s.horizon for _, s in ordered}
        if len(horizons) > 1:
            raise InvalidModel(f"valuation streams disagree on horizon: {sorted(horizons)}")
        if horizons:
            inferred = horizons.pop()
            if self.horizon >= 0 and inferred != self.horizon:
                raise InvalidModel(f"declared horizon {self.horizon} != streams' {inferred}")
            object.__setattr__(self, "horizon", inferred)
        else:
            object.__setattr__(self, "horizon", max(self.horizon, 0))

    @staticmethod
    def of(entries: Mapping[ChannelId, TimedStream], horizon: int | None = None) -> "Valuation":
        return Valuation(tuple(entries.items()), -1 if horizon is None else horizon)

    @staticmethod
    def empty(channels: Iterable[ChannelId], horizon: int) -> "Valuation":
        return Valuation(tuple((ch, empty_stream(horizon)) for ch in channels), horizon)

    def channels(self) -> tuple[ChannelId, ...]:
        return tuple(ch for ch, _ in self.entries)

    def stream(self, channel: ChannelId | str) -> TimedStream:
        name = channel if isinstance(channel, str) else channel.name
        for ch, s in self.entries:
            if ch.name == name:
                return s
        raise KeyError(name)

    def __contains__(self, channel: ChannelId | str) -> bool:
        name = channel if isinstance(channel, str) else channel.name
        return any(ch.name == name for ch, _ in self.entries)

    def __iter__(self) -> Iterator[tuple[ChannelId, TimedStream]]:
        return iter(self.entries)

    def prefix(self, count: int) -> "Valuation":
        return Valuation(tuple((ch, s.prefix(count)) for ch, s in self.entries), count)

    def drop(self, count: int) -> "Valuation":
        return Valuation(tuple((ch, s.drop(count)) for ch, s in self.entries),
                         self.horizon - count)

    def pad(self, horizon: int) -> "Valuation":
        return Valuation(tuple((ch, s.pad(horizon)) for ch, s in self.entries), horizon)

    def restrict(self, channels: Iterable[ChannelId]) -> "Valuation":
        keep = {ch.name for ch in channels}
        return Valuation(tuple((ch, s) for ch, s in self.entries if ch.name in keep),
                         self.horizon)


# --- Interface typing --------------------------------------------------------


@dataclass(frozen=True)
class TypeViolation:
    """One well-typedness defect of a valuation against a channel declaration.

    interval/position are None for domain mismatches (missing or undeclared
    channels); expected carries the human-readable type or channel description.
    """

    channel: str
    expected: str
    interval: int | None = None
    position: int | None = None
    kind: str = "message"

    def describe(self) -> str:
        if self.kind == "missing-channel":
            return f"declared channel {self.channel} missing from valuation"
        if self.kind == "undeclared-channel":
            return f"valuation carries undeclared channel {self.channel}"
        return (f"message at interval {self.interval}, position {self.position} "
                f"on {self.channel} does not conform to {self.expected}")


def validate_typing(v: Valuation, decl: Iterable[ChannelId]) -> list[TypeViolation]:
    """Check v against a channel declaration; an empty list means ok.

    The valuation's domain must equal the declared channel set exactly, and
    every message must conform to its channel's declared type.
    """
    declared = list(decl)
    declared_names = {ch.name for ch in declared}
    present_names = {ch.name for ch, _ in v.entries}
    violations = [TypeViolation(ch.name, ch.msg_type.describe(), kind="missing-channel")
                  for ch in declared if ch.name not in present_names]
    violations += [TypeViolation(ch.name, "", kind="undeclared-channel")
                   for ch, _ in v.entries if ch.name not in declared_names]
    by_name = {ch.name: ch for ch in declared}
    for ch, s in v.entries:
        target = by_name.get(ch.name)
        if target is None:
            continue
        for i, interval in enumerate(s.intervals):
            for p, value in enumerate(interval):
                if not value.conforms(target.msg_type):
                    violations.append(TypeViolation(
                        ch.name, target.msg_type.describe(), interval=i, position=p))
    return violations

"""Bounded exhaustive refinement checkers.

Refinement is checked as set inclusion over enumerated bounded
denotations: a verdict of "holds" is always holds-AT-BOUNDS (horizon k,
per-channel input domains, at most one message per channel per interval)
and makes no infinite claim. Failures carry a re-verified witness; the
lexicographically smallest failing input (in grid order) is reported, at
the smallest horizon that exhibits it.

The four checkers:

* behavioral  - same interface, concrete denotations a subset of abstract.
* interface   - translators bridge changed channel shapes: the composition
  repr ; concrete ; abst (built with the network module) must refine the
  abstract side at horizon k + d, where d = 2 is the translators' combined
  pipeline delay (one interval per translator machine).
* structural  - a network refines a component; a latency slack of s > 0
  compares time-abstracted message content with the network run s extra
  intervals, compensating per-component processing delays.
* inheritance - the subclass's behaviors, projected onto the superclass's
  channels, are a subset of the superclass's (extra input channels are fed
  empty histories).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from . import behavior as bh
from .errors import InterfaceMismatch, InvalidModel, NondeterministicTranslator
from .kernel import ChannelId, MessageValue, Valuation, empty_stream, time_abstraction
from .network import Endpoint, NetworkDef, NetworkNode, Wire, denote_network

Spec = Union[bh.StateMachine, NetworkDef]

KINDS = ("behavioral", "interface", "structural", "inheritance")

TRANSLATOR_DELAY = 2  # one processing interval per translator machine


@dataclass(frozen=True)
class RefinementClaim:
    """A named, name-referenced claim as written in a model document."""

    name: str
    kind: str
    abstract_ref: str
    concrete_ref: str
    horizon: int
    domains: tuple[tuple[str, tuple[MessageValue, ...]], ...] = ()
    slack: int = 0
    policy: str = "idle"
    repr_ref: str = ""
    abst_ref: str = ""

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise InvalidModel(f"claim {self.name}: unknown kind {self.kind!r}")
        if self.kind == "interface" and not (self.repr_ref and self.abst_ref):
            raise InvalidModel(f"claim {self.name}: interface kind needs repr and abst")
        if self.horizon < 0 or self.slack < 0:
            raise InvalidModel(f"claim {self.name}: negative bounds")

    def domain_map(self) -> dict[str, tuple[MessageValue, ...]]:
        return dict(self.domains)


@dataclass(frozen=True)
class Witness:
    input: Valuation
    offending_output: Valuation
    explanation: str
    horizon: int


@dataclass(frozen=True)
class Verdict:
    holds: bool
    kind: str
    horizon: int
    inputs_checked: int
    witness: Witness | None = None
    delay: int | None = None

    def summary(self) -> str:
        status = "holds-at-bounds" if self.holds else "FAILS"
        extra = f", translator delay {self.delay}" if self.delay is not None else ""
        text = f"{self.kind}: {status} (k={self.horizon}, {self.inputs_checked} inputs{extra})"
        if self.witness:
            text += f"\n  witness: {self.witness.explanation}"
        return text


def interface_of(spec: Spec) -> tuple[tuple[ChannelId, ...], tuple[ChannelId, ...]]:
    if isinstance(spec, bh.StateMachine):
        return spec.inputs, spec.outputs
    return spec.external_inputs, spec.external_outputs


def denotation(spec: Spec, x: Valuation, k: int, policy: str,
               budget: int) -> frozenset[Valuation]:
    if isinstance(spec, bh.StateMachine):
        return bh.denote(spec, x, k, policy, budget)
    return denote_network(spec, x, k, policy, budget)


def _same_channels(a: Sequence[ChannelId], b: Sequence[ChannelId]) -> bool:
    return {(c.name, c.msg_type) for c in a} == {(c.name, c.msg_type) for c in b}


def _contains_channels(sup: Sequence[ChannelId], sub: Sequence[ChannelId]) -> bool:
    return {(c.name, c.msg_type) for c in sub} <= {(c.name, c.msg_type) for c in sup}


def _val_key(v: Valuation):
    return tuple((ch.name, tuple(tuple(repr(m.payload) for m in iv) for iv in s.intervals))
                 for ch, s in v.entries)


def _describe_val(v: Valuation) -> str:
    return "; ".join(
        f"{ch.name}=" + "".join("[%s]" % ",".join(m.describe() for m in iv)
                                for iv in s.intervals)
        for ch, s in v.entries) or "(empty)"


# --- Behavioral ---------------------------------------------------------------


def check_behavioral(abstract: Spec, concrete: Spec, k: int,
                     domains: Mapping[str, Sequence[MessageValue]] | None = None,
                     policy: str = "idle", budget: int = bh.DEFAULT_BUDGET) -> Verdict:
    """Concrete eliminates underspecification: its behaviors are abstract's subset."""
    a_ins, a_outs = interface_of(abstract)
    c_ins, c_outs = interface_of(concrete)
    if not (_same_channels(a_ins, c_ins) and _same_channels(a_outs, c_outs)):
        raise InterfaceMismatch("behavioral refinement requires identical interfaces")
    checked = 0
    for x in bh.input_grid(c_ins, k, domains):
        checked += 1
        concrete_set = denotation(concrete, x, k, policy, budget)
        abstract_set = denotation(abstract, x, k, policy, budget)
        extra = concrete_set - abstract_set
        if extra:
            y = min(extra, key=_val_key)
            witness = _minimize(abstract, concrete, x, y, k, policy, budget)
            _verify_witness(abstract, concrete, witness, policy, budget)
            return Verdict(False, "behavioral", k, checked, witness)
    return Verdict(True, "behavioral", k, checked)


def _minimize(abstract: Spec, concrete: Spec, x: Valuation, y: Valuation,
              k: int, policy: str, budget: int) -> Witness:
    for k_prime in range(1, k + 1):
        x_p, y_p = x.prefix(k_prime), y.prefix(k_prime)
        abstract_set = denotation(abstract, x_p, k_prime, policy, budget)
        if y_p not in abstract_set:
            return Witness(x_p, y_p,
                           f"input {_describe_val(x_p)} admits concrete output "
                           f"{_describe_val(y_p)} outside the abstract set",
                           k_prime)
    raise AssertionError("offending output vanished during minimization")


def _verify_witness(abstract: Spec, concrete: Spec, w: Witness,
                    policy: str, budget: int) -> None:
    concrete_set = denotation(concrete, w.input, w.horizon, policy, budget)
    abstract_set = denotation(abstract, w.input, w.horizon, policy, budget)
    if w.offending_output not in concrete_set or w.offending_output in abstract_set:
        raise AssertionError("witness failed re-verification")


# --- Interface ----------------------------------------------------------------


def _pipeline(repr_m: bh.StateMachine, concrete: Spec,
              abst_m: bh.StateMachine, name: str) -> NetworkDef:
    c_ins, c_outs = interface_of(concrete)
    stages = (("r", repr_m), ("c", concrete), ("a", abst_m))
    nodes = tuple(NetworkNode(inst, behavior) for inst, behavior in stages)
    wires = [Wire(ch.name, Endpoint(None, ch), Endpoint("r", ch))
             for ch in repr_m.inputs]
    wires += [Wire(f"r.{ch.name}", Endpoint("r", ch), Endpoint("c", ch))
              for ch in c_ins]
    wires += [Wire(f"c.{ch.name}", Endpoint("c", ch), Endpoint("a", ch))
              for ch in c_outs]
    wires += [Wire(ch.name, Endpoint("a", ch), Endpoint(None, ch))
              for ch in abst_m.outputs]
    return NetworkDef(name, repr_m.inputs, abst_m.outputs, nodes, tuple(wires))


def check_interface(abstract: Spec, concrete: Spec,
                    repr_m: bh.StateMachine, abst_m: bh.StateMachine, k: int,
                    domains: Mapping[str, Sequence[MessageValue]] | None = None,
                    policy: str = "idle", budget: int = bh.DEFAULT_BUDGET) -> Verdict:
    """Refinement across changed channels, mediated by translator machines.

    repr maps abstract input histories to concrete ones, abst maps concrete
    output histories back. The composition repr;concrete;abst (one network)
    must behave within the abstract's bounded denotation at horizon k + d.
    """
    a_ins, a_outs = interface_of(abstract)
    c_ins, c_outs = interface_of(concrete)
    if not _same_channels(repr_m.inputs, a_ins):
        raise InterfaceMismatch("repr translator must consume the abstract inputs")
    if not _same_channels(repr_m.outputs, c_ins):
        raise InterfaceMismatch("repr translator must produce the concrete inputs")
    if not _same_channels(abst_m.inputs, c_outs):
        raise InterfaceMismatch("abst translator must consume the concrete outputs")
    if not _same_channels(abst_m.outputs, a_outs):
        raise InterfaceMismatch("abst translator must produce the abstract outputs")

    d = TRANSLATOR_DELAY
    big_k = k + d
    pipeline = _pipeline(repr_m, concrete, abst_m, f"{abst_m.name}:{repr_m.name}")
    checked = 0
    for x in bh.input_grid(a_ins, k, domains):
        checked += 1
        x_pad = x.pad(big_k)
        _require_deterministic(repr_m, x_pad, big_k, budget)
        pipe_set = denote_network(pipeline, x_pad, big_k, policy, budget)
        abstract_set = denotation(abstract, x_pad, big_k, policy, budget)
        _require_translator_image_deterministic(
            repr_m, concrete, abst_m, x_pad, big_k, policy, budget)
        extra = pipe_set - abstract_set
        if extra:
            y = min(extra, key=_val_key)
            witness = Witness(
                x, y,
                f"input {_describe_val(x)} maps through the translators to "
                f"{_describe_val(y)}, outside the abstract set at k+d={big_k}",
                big_k)
            return Verdict(False, "interface", k, checked, witness, delay=d)
    return Verdict(True, "interface", k, checked, delay=d)


def _require_deterministic(translator: bh.StateMachine, x: Valuation, k: int,
                           budget: int) -> None:
    image = bh.denote(translator, x, k, "strict", budget)
    if len(image) != 1:
        raise NondeterministicTranslator(
            f"translator {translator.name} produced {len(image)} behaviors "
            f"on {_describe_val(x)}")


def _require_translator_image_deterministic(repr_m: bh.StateMachine, concrete: Spec,
                                            abst_m: bh.StateMachine, x_pad: Valuation,
                                            big_k: int, policy: str, budget: int) -> None:
    (r_image,) = bh.denote(repr_m, x_pad, big_k, "strict", budget)
    for y in denotation(concrete, r_image, big_k, policy, budget):
        _require_deterministic(abst_m, y, big_k, budget)


# --- Structural ---------------------------------------------------------------


def _abstracted(v: Valuation) -> tuple[tuple[str, tuple[MessageValue, ...]], ...]:
    return tuple((ch.name, time_abstraction(s)) for ch, s in v.entries)


def check_structural(abstract: Spec, concrete_net: NetworkDef, k: int,
                     domains: Mapping[str, Sequence[MessageValue]] | None = None,
                     slack: int = 0, policy: str = "idle",
                     budget: int = bh.DEFAULT_BUDGET) -> Verdict:
    """A network refines a component, optionally with s intervals of latency slack.

    slack = 0 demands exact timed inclusion; slack s > 0 runs the network
    for k + s intervals and requires each network behavior's time-abstracted
    message content to equal that of some abstract behavior at horizon k.
    """
    a_ins, a_outs = interface_of(abstract)
    if not (_same_channels(concrete_net.external_inputs, a_ins)
            and _same_channels(concrete_net.external_outputs, a_outs)):
        raise InterfaceMismatch("structural refinement requires equal external interfaces")
    checked = 0
    for x in bh.input_grid(a_ins, k, domains):
        checked += 1
        if slack == 0:
            net_set = denote_network(concrete_net, x, k, policy, budget)
            abstract_set = denotation(abstract, x, k, policy, budget)
            extra = net_set - abstract_set
            if extra:
                y = min(extra, key=_val_key)
                witness = Witness(x, y,
                                  f"input {_describe_val(x)} lets the network produce "
                                  f"{_describe_val(y)}, outside the abstract set",
                                  k)
                return Verdict(False, "structural", k, checked, witness)
        else:
            net_set = denote_network(concrete_net, x.pad(k + slack), k + slack,
                                     policy, budget)
            abstract_set = denotation(abstract, x, k, policy, budget)
            contents = {_abstracted(a) for a in abstract_set}
            for y in sorted(net_set, key=_val_key):
                if _abstracted(y) not in contents:
                    witness = Witness(
                        x, y,
                        f"input {_describe_val(x)}: network content "
                        f"{_describe_val(y)} matches no abstract behavior "
                        f"even time-abstracted (slack {slack})",
                        k + slack)
                    return Verdict(False, "structural", k, checked, witness)
    return Verdict(True, "structural", k, checked)


# --- Inheritance ----------------------------------------------------------------


def check_inheritance(sub: Spec, super_spec: Spec, k: int,
                      domains: Mapping[str, Sequence[MessageValue]] | None = None,
                      policy: str = "idle", budget: int = bh.DEFAULT_BUDGET) -> Verdict:
    """Behavior-subset reading of inheritance: f_sub projected onto the
    superclass's channels is contained in f_super, for inputs that extend
    superclass inputs with empty histories on the new channels."""
    sub_ins, sub_outs = interface_of(sub)
    sup_ins, sup_outs = interface_of(super_spec)
    if not (_contains_channels(sub_ins, sup_ins)
            and _contains_channels(sub_outs, sup_outs)):
        raise InterfaceMismatch("subclass interface must extend the superclass's")
    checked = 0
    for x in bh.input_grid(sup_ins, k, domains):
        checked += 1
        extended = Valuation(
            x.entries + tuple((c, empty_stream(k))
                              for c in sub_ins if c.name not in x), k)
        sub_set = {v.restrict(sup_outs) for v in denotation(sub, extended, k, policy, budget)}
        sup_set = denotation(super_spec, x, k, policy, budget)
        extra = sub_set - sup_set
        if extra:
            y = min(extra, key=_val_key)
            witness = Witness(x, y,
                              f"superclass input {_describe_val(x)} lets the subclass "
                              f"produce {_describe_val(y)} (projected), outside the "
                              f"superclass set", k)
            return Verdict(False, "inheritance", k, checked, witness)
    return Verdict(True, "inheritance", k, checked)

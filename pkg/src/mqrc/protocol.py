"""Multiparty quantum remote control over a shared GHZ state.

Register layout after preparation is ``[a1, ..., aN, qb, B]``: one GHZ qubit per
controller, Bob's GHZ qubit ``qb`` and Bob's target ``B``.  The run proceeds as

1. Bob applies CNOT(qb -> B), measures B in Z and broadcasts the bit ``mr_b``;
2. controller i waits for ``mr_b`` and the cumulative type parity of controllers
   1..i-1, flips its qubit with X if that parity is 1, applies its operations
   (angle negated when ``mr_b`` is 1), measures in X, reports the sign to Bob and
   forwards the updated parity to controller i+1 (the last one sends it to Bob);
3. Bob picks a Pauli from ``(mr_b xor type parity, minus parity)`` and applies it
   to ``qb``, which then holds the remotely operated target.

Parties are small state machines; a single scheduler delivers classical messages
in FIFO order, so the transcript is a total order of everything that happened.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from functools import reduce
from operator import xor
from typing import Callable, Iterable, NamedTuple, Sequence

from .statevector import (
    NORM_TOL,
    Basis,
    Forced,
    OneQubitGate,
    Outcome,
    OutcomeSource,
    OutcomeStream,
    Pauli,
    Sampled,
    SimulationError,
    StateVector,
    apply_cnot,
    apply_one_qubit,
    measure,
    pauli,
    prepare_ghz,
    single_qubit,
    tensor,
    u0,
    u1,
)

BOB = "bob"


class Kind(enum.Enum):
    U0 = "U0"
    U1 = "U1"

    @property
    def bit(self) -> int:
        return 0 if self is Kind.U0 else 1


@dataclass(frozen=True)
class OperationSpec:
    kind: Kind
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        # u0/u1 reject non-finite angles
        self.gate()

    def gate(self, sign: int = 1) -> OneQubitGate:
        return (u0 if self.kind is Kind.U0 else u1)(sign * self.theta)


@dataclass(frozen=True)
class ControllerScript:
    party: int
    ops: tuple[OperationSpec, ...]

    def __post_init__(self):
        ops = tuple(op if isinstance(op, OperationSpec) else OperationSpec(*op) for op in self.ops)
        if not ops:
            raise SimulationError(
                f"controller {self.party} has no operations; use [U0(0)] for a no-op"
            )
        object.__setattr__(self, "ops", ops)

    @property
    def parity(self) -> int:
        return reduce(xor, (op.kind.bit for op in self.ops), 0)


@dataclass(frozen=True)
class ProtocolConfig:
    scripts: tuple[ControllerScript, ...]
    alpha: complex
    beta: complex
    outcomes: OutcomeSource = field(default_factory=Sampled)

    def __post_init__(self):
        scripts = tuple(self.scripts)
        if not scripts:
            raise SimulationError("at least one controller is required")
        for i, s in enumerate(scripts, 1):
            if s.party != i:
                raise SimulationError(f"script {i} belongs to controller {s.party}")
        object.__setattr__(self, "scripts", scripts)
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1) > NORM_TOL:
            raise SimulationError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")

    @classmethod
    def from_ops(
        cls,
        alpha: complex,
        beta: complex,
        ops: Sequence[Sequence[tuple[Kind | str, float]]],
        outcomes: OutcomeSource | None = None,
    ) -> ProtocolConfig:
        """Build a config from plain ``[(kind, theta), ...]`` lists, one per controller."""
        scripts = tuple(ControllerScript(i, tuple(s)) for i, s in enumerate(ops, 1))
        return cls(scripts, alpha, beta, outcomes if outcomes is not None else Sampled())

    @property
    def num_controllers(self) -> int:
        return len(self.scripts)

    @property
    def target(self) -> StateVector:
        return single_qubit(self.alpha, self.beta)


def controller_name(i: int) -> str:
    return f"A{i}"


def controller_qubit(i: int) -> str:
    return f"a{i}"


# --- classical messages -------------------------------------------------------


@dataclass(frozen=True)
class MrB:
    bit: int


@dataclass(frozen=True)
class ParityForward:
    src: int
    dst: int
    bit: int


@dataclass(frozen=True)
class MrReport:
    src: int
    sign: Outcome


@dataclass(frozen=True)
class ParityToBob:
    src: int
    bit: int


ClassicalMessage = MrB | ParityForward | MrReport | ParityToBob


# --- transcript events ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StateSnapshot:
    step: str
    state: StateVector


@dataclass(frozen=True)
class Measurement:
    party: str
    qubit: str
    basis: Basis
    outcome: Outcome
    probability: float


@dataclass(frozen=True)
class Correction:
    pauli: Pauli


Event = StateSnapshot | Measurement | Correction | ClassicalMessage


@dataclass(frozen=True, eq=False)
class Transcript:
    events: tuple[Event, ...]

    def __iter__(self):
        return iter(self.events)

    @property
    def measurements(self) -> list[Measurement]:
        return [e for e in self.events if isinstance(e, Measurement)]

    @property
    def messages(self) -> list[ClassicalMessage]:
        return [e for e in self.events if isinstance(e, (MrB, ParityForward, MrReport, ParityToBob))]

    def outcomes(self) -> Forced:
        """The outcome sequence that replays this run."""
        return Forced([m.outcome for m in self.measurements])

    def snapshot(self, step: str) -> StateVector:
        for e in self.events:
            if isinstance(e, StateSnapshot) and e.step == step:
                return e.state
        raise KeyError(step)

    @property
    def pre_correction(self) -> StateVector:
        """Bob's q_b after the last controller, before the Pauli correction."""
        last = [e for e in self.events if isinstance(e, StateSnapshot) and e.step != "final"]
        return last[-1].state


# --- correction -----------------------------------------------------------------


@dataclass(frozen=True)
class CorrectionKey:
    type_parity: int
    minus_parity: int

    @classmethod
    def from_bits(cls, mr_b: int, final_parity: int, signs: Iterable[Outcome]) -> CorrectionKey:
        minus = reduce(xor, (s.bit for s in signs), 0)
        return cls(mr_b ^ final_parity, minus)


_CORRECTIONS = {
    (0, 0): Pauli.I,
    (0, 1): Pauli.Z,
    (1, 0): Pauli.X,
    (1, 1): Pauli.IY,
}


def correction_lookup(key: CorrectionKey) -> Pauli:
    return _CORRECTIONS[key.type_parity, key.minus_parity]


Lookup = Callable[[CorrectionKey], Pauli]


# --- locality -------------------------------------------------------------------


class LocalityViolation(AssertionError):
    """A party touched a qubit it does not hold."""


def owned_qubits(party: str) -> frozenset[str]:
    if party == BOB:
        return frozenset({"qb", "B"})
    return frozenset({"a" + party[1:]})


def locate(state: StateVector, party: str, label: str) -> int:
    """Register position of ``label``, asserting that ``party`` holds it."""
    if label not in owned_qubits(party):
        raise LocalityViolation(f"{party} may not address qubit {label!r}")
    return state.index_of(label)


# --- protocol steps -------------------------------------------------------------


def bob_prepare(config: ProtocolConfig) -> StateVector:
    n = config.num_controllers
    ghz = prepare_ghz(n + 1).with_labels([controller_qubit(i) for i in range(1, n + 1)] + ["qb"])
    return tensor(ghz, config.target.with_labels(["B"]))


class BobMeasurement(NamedTuple):
    mr_b: int
    state: StateVector
    broadcast: MrB
    probability: float


def bob_cnot_measure(state: StateVector, source: OutcomeStream) -> BobMeasurement:
    state = apply_cnot(state, locate(state, BOB, "qb"), locate(state, BOB, "B"))
    m = measure(state, locate(state, BOB, "B"), Basis.Z, source)
    bit = m.outcome.bit
    return BobMeasurement(bit, m.post, MrB(bit), m.probability)


class ControllerStep(NamedTuple):
    sign: Outcome
    outgoing_parity: int
    state: StateVector
    probability: float


def controller_step(
    i: int,
    state: StateVector,
    mr_b: int,
    incoming_parity: int,
    script: ControllerScript,
    source: OutcomeStream,
) -> ControllerStep:
    party = controller_name(i)
    q = locate(state, party, controller_qubit(i))
    if incoming_parity:
        state = apply_one_qubit(state, pauli(Pauli.X), q)
    sign = -1 if mr_b else 1
    for op in script.ops:
        state = apply_one_qubit(state, op.gate(sign), q)
    m = measure(state, q, Basis.X, source)
    return ControllerStep(m.outcome, incoming_parity ^ script.parity, m.post, m.probability)


def bob_correct(
    state: StateVector, key: CorrectionKey, lookup: Lookup = correction_lookup
) -> StateVector:
    if state.num_qubits != 1:
        raise SimulationError(f"correction expects q_b alone, got {state.num_qubits} qubits")
    return apply_one_qubit(state, pauli(lookup(key)), locate(state, BOB, "qb"))


# --- party state machines -------------------------------------------------------


class _Network:
    """Shared quantum register plus the FIFO classical channel."""

    def __init__(self, state: StateVector, source: OutcomeStream):
        self.state = state
        self.source = source
        self.events: list[Event] = [StateSnapshot("prepare", state)]
        self.queue: deque[ClassicalMessage] = deque()

    def record(self, *events: Event) -> None:
        self.events.extend(events)

    def send(self, msg: ClassicalMessage) -> None:
        self.events.append(msg)
        self.queue.append(msg)


class _Bob:
    name = BOB

    def __init__(self, n: int, lookup: Lookup):
        self.n = n
        self.lookup = lookup
        self.mr_b: int | None = None
        self.signs: dict[int, Outcome] = {}
        self.final_parity: int | None = None
        self.key: CorrectionKey | None = None
        self.correction: Pauli | None = None

    def start(self, net: _Network) -> None:
        res = bob_cnot_measure(net.state, net.source)
        self.mr_b = res.mr_b
        net.state = res.state
        net.record(
            Measurement(BOB, "B", Basis.Z, Outcome.ONE if res.mr_b else Outcome.ZERO, res.probability),
            StateSnapshot("bob", res.state),
        )
        net.send(res.broadcast)

    def deliver(self, msg: ClassicalMessage, net: _Network) -> None:
        if isinstance(msg, MrReport):
            self.signs[msg.src] = msg.sign
        elif isinstance(msg, ParityToBob):
            self.final_parity = msg.bit
        if len(self.signs) == self.n and self.final_parity is not None:
            self.key = CorrectionKey.from_bits(
                self.mr_b, self.final_parity, (self.signs[i] for i in range(1, self.n + 1))
            )
            self.correction = self.lookup(self.key)
            net.state = bob_correct(net.state, self.key, self.lookup)
            net.record(Correction(self.correction), StateSnapshot("final", net.state))


class _Controller:
    def __init__(self, script: ControllerScript, n: int):
        self.script = script
        self.i = script.party
        self.name = controller_name(self.i)
        self.last = self.i == n
        self.mr_b: int | None = None
        self.incoming: int | None = 0 if self.i == 1 else None
        self.done = False

    def deliver(self, msg: ClassicalMessage, net: _Network) -> None:
        if isinstance(msg, MrB):
            self.mr_b = msg.bit
        elif isinstance(msg, ParityForward):
            self.incoming = msg.bit
        if self.done or self.mr_b is None or self.incoming is None:
            return
        res = controller_step(self.i, net.state, self.mr_b, self.incoming, self.script, net.source)
        self.done = True
        net.state = res.state
        net.record(
            Measurement(self.name, controller_qubit(self.i), Basis.X, res.sign, res.probability),
            StateSnapshot(self.name, res.state),
        )
        net.send(MrReport(self.i, res.sign))
        if self.last:
            net.send(ParityToBob(self.i, res.outgoing_parity))
        else:
            net.send(ParityForward(self.i, self.i + 1, res.outgoing_parity))


def _recipients(msg: ClassicalMessage, bob: _Bob, controllers: list[_Controller]):
    if isinstance(msg, MrB):
        return controllers
    if isinstance(msg, ParityForward):
        return [controllers[msg.dst - 1]]
    return [bob]


@dataclass(frozen=True, eq=False)
class RunResult:
    final_qb: StateVector
    correction: Pauli
    key: CorrectionKey
    transcript: Transcript


def run(config: ProtocolConfig, lookup: Lookup = correction_lookup) -> RunResult:
    n = config.num_controllers
    if isinstance(config.outcomes, Forced) and len(config.outcomes) != n + 1:
        raise SimulationError(
            f"{len(config.outcomes)} forced outcomes given, the run consumes exactly {n + 1}"
        )
    net = _Network(bob_prepare(config), config.outcomes.stream())
    bob = _Bob(n, lookup)
    controllers = [_Controller(s, n) for s in config.scripts]
    bob.start(net)
    while net.queue:
        msg = net.queue.popleft()
        for party in _recipients(msg, bob, controllers):
            party.deliver(msg, net)
    if bob.correction is None:
        raise RuntimeError("protocol stalled before Bob's correction")
    return RunResult(net.state, bob.correction, bob.key, Transcript(tuple(net.events)))


def check_causality(transcript: Transcript, n: int) -> None:
    """Raise AssertionError unless the event order respects the message dependencies."""
    pos = {}
    for k, e in enumerate(transcript.events):
        if isinstance(e, MrB):
            pos["mrb"] = k
        elif isinstance(e, ParityForward):
            pos["fwd", e.src, e.dst] = k
        elif isinstance(e, ParityToBob):
            pos["tobob"] = k
        elif isinstance(e, MrReport):
            pos["report", e.src] = k
        elif isinstance(e, Measurement) and e.party != BOB:
            pos["act", int(e.party[1:])] = k
        elif isinstance(e, Correction):
            pos["correct"] = k
    for i in range(1, n + 1):
        assert pos["mrb"] < pos["act", i], f"controller {i} acted before MrB"
        assert pos["act", i] < pos["report", i]
        if i > 1:
            assert pos["fwd", i - 1, i] < pos["act", i], f"controller {i} acted before parity"
        assert pos["report", i] < pos["correct"]
    assert pos["tobob"] < pos["correct"], "Bob corrected before the final parity"

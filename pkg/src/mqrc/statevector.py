"""Dense state-vector simulation for small registers.

Conventions:
- qubit 0 is the leftmost symbol in ket notation and basis indices are the
  big-endian integer of the bitstring, so |011> over three qubits is index 3;
- measured qubits are removed from the register;
- every value is immutable, operations return new objects.

Registers may carry string labels (``"a1"``, ``"qb"``, ``"B"``) so that callers
can address qubits by owner-visible names instead of positions that shift as
qubits are measured away.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

NORM_TOL = 1e-9
UNITARY_TOL = 1e-12
BRANCH_TOL = 1e-12

_SQRT1_2 = 1 / math.sqrt(2)


class SimulationError(ValueError):
    """Invalid input to a simulator operation."""


class Basis(enum.Enum):
    Z = "Z"
    X = "X"


class Outcome(enum.Enum):
    """Measurement outcome labels; values match the forced-outcome alphabet."""

    ZERO = "0"
    ONE = "1"
    PLUS = "+"
    MINUS = "-"

    @property
    def basis(self) -> Basis:
        return Basis.Z if self in (Outcome.ZERO, Outcome.ONE) else Basis.X

    @property
    def bit(self) -> int:
        """0 for ZERO/PLUS, 1 for ONE/MINUS."""
        return 0 if self in (Outcome.ZERO, Outcome.PLUS) else 1


BASIS_OUTCOMES = {
    Basis.Z: (Outcome.ZERO, Outcome.ONE),
    Basis.X: (Outcome.PLUS, Outcome.MINUS),
}


def _frozen(values, dtype=complex) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized amplitude vector over an ordered (optionally labelled) register."""

    amplitudes: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        n = amps.size.bit_length() - 1
        if amps.size == 0 or 1 << n != amps.size:
            raise SimulationError(f"amplitude count {amps.size} is not a power of two")
        norm = float(np.vdot(amps, amps).real)
        # any NaN/Inf amplitude makes the norm non-finite
        if not math.isfinite(norm):
            raise SimulationError("non-finite amplitude")
        if abs(norm - 1) > NORM_TOL:
            raise SimulationError(f"state not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", amps)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != n:
                raise SimulationError(f"{len(labels)} labels for {n} qubits")
            if len(set(labels)) != n:
                raise SimulationError(f"duplicate qubit labels {labels}")
            object.__setattr__(self, "labels", labels)

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    def index_of(self, label: str) -> int:
        if self.labels is None or label not in self.labels:
            raise SimulationError(f"no qubit labelled {label!r} in {self.labels}")
        return self.labels.index(label)

    def with_labels(self, labels: Sequence[str] | None) -> StateVector:
        return StateVector(self.amplitudes, None if labels is None else tuple(labels))

    def __len__(self) -> int:
        return self.amplitudes.size

    def __iter__(self) -> Iterator[complex]:
        return iter(self.amplitudes.tolist())

    def __repr__(self) -> str:
        terms = [
            f"({a:.6g})|{i:0{self.num_qubits}b}>"
            for i, a in enumerate(self.amplitudes)
            if abs(a) > 1e-12
        ]
        names = "" if self.labels is None else f" on {','.join(self.labels)}"
        return " + ".join(terms) + names


@dataclass(frozen=True, eq=False)
class OneQubitGate:
    """A 2x2 unitary; unitarity is checked on construction."""

    matrix: np.ndarray
    name: str = field(default="U", compare=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.shape != (2, 2):
            raise SimulationError(f"gate must be 2x2, got {m.shape}")
        (a, b), (c, d) = m.tolist()
        if not all(map(cmath.isfinite, (a, b, c, d))):
            raise SimulationError("non-finite gate entry")
        # entries of G^dagger G minus identity
        off = a.conjugate() * b + c.conjugate() * d
        diag = (abs(a) ** 2 + abs(c) ** 2 - 1, abs(b) ** 2 + abs(d) ** 2 - 1)
        if max(abs(off), *map(abs, diag)) > UNITARY_TOL:
            raise SimulationError(f"gate {self.name} is not unitary")
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other: OneQubitGate) -> OneQubitGate:
        return OneQubitGate(self.matrix @ other.matrix, f"{self.name}*{other.name}")

    def __repr__(self) -> str:
        return f"OneQubitGate({self.name}, {self.matrix.tolist()})"


def _check_angle(theta: float) -> float:
    theta = float(theta)
    if not math.isfinite(theta):
        raise SimulationError(f"angle must be finite, got {theta}")
    return theta


def u0(theta: float) -> OneQubitGate:
    """diag(e^{i theta}, e^{-i theta})."""
    theta = _check_angle(theta)
    p = complex(math.cos(theta), math.sin(theta))
    return OneQubitGate([[p, 0], [0, p.conjugate()]], f"U0({theta!r})")


def u1(theta: float) -> OneQubitGate:
    """[[0, e^{i theta}], [-e^{-i theta}, 0]], i.e. u0(theta) followed by the iY swap."""
    theta = _check_angle(theta)
    p = complex(math.cos(theta), math.sin(theta))
    return OneQubitGate([[0, p], [-p.conjugate(), 0]], f"U1({theta!r})")


class Pauli(enum.Enum):
    """Bob's correction set; values are the transcript spellings."""

    I = "I"  # noqa: E741
    Z = "Z"
    X = "X"
    IY = "iY"

    @property
    def display(self) -> str:
        return {"I": "I", "Z": "σz", "X": "σx", "iY": "iσy"}[self.value]


_PAULI_MATRICES = {
    Pauli.I: [[1, 0], [0, 1]],
    Pauli.Z: [[1, 0], [0, -1]],
    Pauli.X: [[0, 1], [1, 0]],
    Pauli.IY: [[0, 1], [-1, 0]],
}


_PAULI_GATES = {k: OneQubitGate(m, k.value) for k, m in _PAULI_MATRICES.items()}


def pauli(kind: Pauli | str) -> OneQubitGate:
    return _PAULI_GATES[Pauli(kind)]


def basis_state(num_qubits: int, bits: str) -> StateVector:
    if num_qubits < 1:
        raise SimulationError("register must have at least one qubit")
    if len(bits) != num_qubits or set(bits) - {"0", "1"}:
        raise SimulationError(f"bad bitstring {bits!r} for {num_qubits} qubits")
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[int(bits, 2)] = 1
    return StateVector(amps)


def single_qubit(alpha: complex, beta: complex) -> StateVector:
    """alpha|0> + beta|1>; must already be normalized."""
    return StateVector([alpha, beta])


def prepare_ghz(num_qubits: int) -> StateVector:
    if num_qubits < 2:
        raise SimulationError("GHZ state needs at least two qubits")
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[0] = amps[-1] = _SQRT1_2
    return StateVector(amps)


def tensor(left: StateVector, right: StateVector) -> StateVector:
    labels = None
    if left.labels is not None and right.labels is not None:
        labels = left.labels + right.labels
    return StateVector(np.kron(left.amplitudes, right.amplitudes), labels)


def _check_qubit(state: StateVector, q: int) -> int:
    if not 0 <= q < state.num_qubits:
        raise SimulationError(f"qubit {q} out of range for {state.num_qubits}-qubit register")
    return q


def _as_tensor(state: StateVector) -> np.ndarray:
    return state.amplitudes.reshape((2,) * state.num_qubits)


def apply_one_qubit(state: StateVector, gate: OneQubitGate, q: int) -> StateVector:
    _check_qubit(state, q)
    psi = state.amplitudes.reshape(1 << q, 2, -1)
    return StateVector((gate.matrix @ psi).reshape(-1), state.labels)


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    _check_qubit(state, control)
    _check_qubit(state, target)
    if control == target:
        raise SimulationError("CNOT control and target must differ")
    psi = _as_tensor(state).copy()
    hi = [slice(None)] * state.num_qubits
    hi[control] = 1
    sub = psi[tuple(hi)]
    # target axis index inside the control=1 slice
    t = target - (target > control)
    psi[tuple(hi)] = np.flip(sub, axis=t).copy()
    return StateVector(psi.reshape(-1), state.labels)


class OutcomeStream:
    """One-shot supplier of outcomes; created from an outcome source."""

    def choose(self, basis: Basis, probabilities: tuple[float, float]) -> Outcome:
        raise NotImplementedError


@dataclass(frozen=True)
class Sampled:
    """Born-rule sampling driven by numpy's PCG64 generator seeded with ``seed``.

    One uniform draw is consumed per measurement; the first outcome of the
    basis is chosen when the draw falls below its probability.
    """

    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise SimulationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    def stream(self) -> OutcomeStream:
        return _SampledStream(np.random.Generator(np.random.PCG64(self.seed)))


@dataclass(frozen=True)
class Forced:
    """Fixed outcome sequence, consumed in measurement order."""

    outcomes: tuple[Outcome, ...]

    def __init__(self, outcomes: Sequence[Outcome | str]):
        object.__setattr__(self, "outcomes", tuple(Outcome(o) for o in outcomes))

    @classmethod
    def parse(cls, text: str) -> Forced:
        try:
            return cls(list(text))
        except ValueError:
            raise SimulationError(f"bad forced-outcome string {text!r}") from None

    def __str__(self) -> str:
        return "".join(o.value for o in self.outcomes)

    def __len__(self) -> int:
        return len(self.outcomes)

    def stream(self) -> OutcomeStream:
        return _ForcedStream(self.outcomes)


OutcomeSource = Sampled | Forced


class _SampledStream(OutcomeStream):
    def __init__(self, rng: np.random.Generator):
        self._rng = rng

    def choose(self, basis, probabilities):
        first, second = BASIS_OUTCOMES[basis]
        return first if self._rng.random() < probabilities[0] else second


class _ForcedStream(OutcomeStream):
    def __init__(self, outcomes: tuple[Outcome, ...]):
        self._outcomes = outcomes
        self.consumed = 0

    @property
    def remaining(self) -> int:
        return len(self._outcomes) - self.consumed

    def choose(self, basis, probabilities):
        if self.remaining <= 0:
            raise SimulationError(
                f"forced outcomes exhausted after {self.consumed} measurements"
            )
        outcome = self._outcomes[self.consumed]
        if outcome.basis is not basis:
            raise SimulationError(
                f"forced outcome {outcome.value!r} is not a {basis.value}-basis label"
            )
        p = probabilities[BASIS_OUTCOMES[basis].index(outcome)]
        if p <= BRANCH_TOL:
            raise SimulationError(
                f"forced outcome {outcome.value!r} has probability {p!r}"
            )
        self.consumed += 1
        return outcome


@dataclass(frozen=True, eq=False)
class MeasurementResult:
    outcome: Outcome
    probability: float
    post: StateVector | complex


def measure(
    state: StateVector, q: int, basis: Basis, source: OutcomeStream
) -> MeasurementResult:
    """Projectively measure qubit ``q`` and drop it from the register.

    Measuring the last remaining qubit leaves a unit complex scalar as ``post``.
    """
    _check_qubit(state, q)
    psi = state.amplitudes.reshape(1 << q, 2, -1)
    lo, hi = psi[:, 0, :], psi[:, 1, :]
    if basis is Basis.Z:
        branches = (lo, hi)
    else:
        branches = ((lo + hi) * _SQRT1_2, (lo - hi) * _SQRT1_2)
    probs = tuple(float(np.vdot(b, b).real) for b in branches)
    outcome = source.choose(basis, probs)
    k = BASIS_OUTCOMES[basis].index(outcome)
    post = branches[k].reshape(-1) / math.sqrt(probs[k])
    if state.num_qubits == 1:
        return MeasurementResult(outcome, probs[k], complex(post[0]))
    labels = None
    if state.labels is not None:
        labels = state.labels[:q] + state.labels[q + 1 :]
    return MeasurementResult(outcome, probs[k], StateVector(post, labels))


def overlap(a: StateVector, b: StateVector) -> float:
    """|<a|b>|."""
    if a.num_qubits != b.num_qubits:
        raise SimulationError(
            f"cannot compare {a.num_qubits}-qubit and {b.num_qubits}-qubit states"
        )
    return abs(complex(np.vdot(a.amplitudes, b.amplitudes)))


def global_phase_equal(a: StateVector, b: StateVector, tol: float = NORM_TOL) -> bool:
    return overlap(a, b) >= 1 - tol

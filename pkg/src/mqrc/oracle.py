"""Ground truth for the remote-control protocol.

The oracle never runs the protocol's circuit.  It multiplies the requested
operations into one 2x2 matrix, applies that to the target directly and
compares every measurement branch of a protocol run against the result.  The
correction tables are rebuilt by searching the four Paulis, not by asking
``correction_lookup``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .protocol import (
    CorrectionKey,
    Kind,
    Lookup,
    ProtocolConfig,
    correction_lookup,
    run,
)
from .statevector import (
    NORM_TOL,
    Forced,
    OneQubitGate,
    Outcome,
    Pauli,
    SimulationError,
    StateVector,
    overlap,
    pauli,
)

MAX_PARTIES = 8


def compose_operations(scripts) -> OneQubitGate:
    """Product of every operation in chronological order, later ops on the left."""
    ops = [op for s in scripts for op in s.ops]
    if not ops:
        raise SimulationError("no operations to compose")
    total = OneQubitGate(np.eye(2), "I")
    for op in ops:
        total = op.gate() @ total
    return total


def oracle_state(config: ProtocolConfig) -> StateVector:
    amps = compose_operations(config.scripts).matrix @ config.target.amplitudes
    return StateVector(amps / np.linalg.norm(amps))


def matching_corrections(pre_correction: StateVector, expected: StateVector) -> tuple[Pauli, ...]:
    """Every Pauli that maps ``pre_correction`` onto ``expected`` up to global phase."""
    if pre_correction.num_qubits != 1 or expected.num_qubits != 1:
        raise SimulationError("correction search works on single-qubit states")
    return tuple(
        p for p in Pauli
        if abs(np.vdot(pauli(p).matrix @ pre_correction.amplitudes, expected.amplitudes))
        >= 1 - NORM_TOL
    )


@dataclass(frozen=True)
class BranchReport:
    outcomes: str
    key: CorrectionKey
    correction: Pauli
    overlap: float
    matches: tuple[Pauli, ...]

    @property
    def passed(self) -> bool:
        return self.overlap >= 1 - NORM_TOL

    @property
    def mr_b(self) -> int:
        return Outcome(self.outcomes[0]).bit


@dataclass(frozen=True)
class VerificationReport:
    config: ProtocolConfig
    branches: tuple[BranchReport, ...]

    @property
    def all_pass(self) -> bool:
        return all(b.passed for b in self.branches)

    @property
    def failures(self) -> list[BranchReport]:
        return [b for b in self.branches if not b.passed]


def all_branches(n: int) -> Iterator[Forced]:
    """Every outcome assignment for ``n`` controllers, in lexicographic order."""
    for mr_b in (Outcome.ZERO, Outcome.ONE):
        for signs in itertools.product((Outcome.PLUS, Outcome.MINUS), repeat=n):
            yield Forced((mr_b, *signs))


def exhaustive_verify(
    config: ProtocolConfig,
    max_parties: int = MAX_PARTIES,
    lookup: Lookup = correction_lookup,
) -> VerificationReport:
    n = config.num_controllers
    if n + 1 > max_parties:
        raise SimulationError(f"{n + 1} parties exceeds the enumeration bound {max_parties}")
    expected = oracle_state(config)
    reports = []
    for forced in all_branches(n):
        res = run(replace(config, outcomes=forced), lookup)
        reports.append(BranchReport(
            str(forced),
            res.key,
            res.correction,
            overlap(res.final_qb.with_labels(None), expected),
            matching_corrections(res.transcript.pre_correction, expected),
        ))
    return VerificationReport(config, tuple(reports))


# --- correction tables -----------------------------------------------------------


@dataclass(frozen=True)
class TableRow:
    kind_a: Kind
    kind_c: Kind
    mr_a: Outcome
    mr_c: Outcome
    correction: Pauli

    @property
    def key(self) -> tuple[int, int]:
        return (self.kind_a.bit ^ self.kind_c.bit, self.mr_a.bit ^ self.mr_c.bit)


def _row(a, c, ma, mc, p) -> TableRow:
    return TableRow(Kind(a), Kind(c), Outcome(ma), Outcome(mc), Pauli(p))


# transcribed from the published two-controller table (Bob's bit fixed at 0)
TABLE_1 = tuple(_row(*r) for r in [
    ("U0", "U0", "+", "+", "I"), ("U0", "U0", "+", "-", "Z"),
    ("U0", "U0", "-", "+", "Z"), ("U0", "U0", "-", "-", "I"),
    ("U0", "U1", "+", "+", "X"), ("U0", "U1", "+", "-", "iY"),
    ("U0", "U1", "-", "+", "iY"), ("U0", "U1", "-", "-", "X"),
    ("U1", "U0", "+", "+", "X"), ("U1", "U0", "+", "-", "iY"),
    ("U1", "U0", "-", "+", "iY"), ("U1", "U0", "-", "-", "X"),
    ("U1", "U1", "+", "+", "I"), ("U1", "U1", "+", "-", "Z"),
    ("U1", "U1", "-", "+", "Z"), ("U1", "U1", "-", "-", "I"),
])

TABLE_2 = {
    (0, 0): Pauli.I,
    (0, 1): Pauli.Z,
    (1, 0): Pauli.X,
    (1, 1): Pauli.IY,
}


def derive_table(seed: int = 2012) -> list[TableRow]:
    """Rebuild the two-controller table by Pauli search on the MR_B = 0 branches.

    Angles and a complex target are drawn from ``seed`` so that the four Pauli
    candidates are distinguishable.
    """
    rng = np.random.default_rng(seed)
    theta_a, theta_c = rng.uniform(-2 * math.pi, 2 * math.pi, 2)
    alpha, beta = random_target(rng, complex_amplitudes=True)
    rows = []
    for kind_a, kind_c in itertools.product(Kind, repeat=2):
        config = ProtocolConfig.from_ops(alpha, beta, [[(kind_a, theta_a)], [(kind_c, theta_c)]])
        expected = oracle_state(config)
        for mr_a, mr_c in itertools.product((Outcome.PLUS, Outcome.MINUS), repeat=2):
            forced = Forced((Outcome.ZERO, mr_a, mr_c))
            pre = run(replace(config, outcomes=forced)).transcript.pre_correction
            found = matching_corrections(pre, expected)
            if len(found) != 1:
                raise SimulationError(
                    f"branch {kind_a.value}/{kind_c.value}/{forced}: matching Paulis {found}"
                )
            rows.append(TableRow(kind_a, kind_c, mr_a, mr_c, found[0]))
    return rows


def collapse_table(rows) -> dict[tuple[int, int], Pauli]:
    """Group table rows by (type parity, minus parity); conflicting groups raise."""
    out: dict[tuple[int, int], Pauli] = {}
    for r in rows:
        if out.setdefault(r.key, r.correction) is not r.correction:
            raise SimulationError(f"rows with key {r.key} disagree: {out[r.key]} vs {r.correction}")
    return out


# --- randomized sweeps -----------------------------------------------------------


def random_target(rng: np.random.Generator, complex_amplitudes: bool) -> tuple[complex, complex]:
    if complex_amplitudes:
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        return complex(v[0]), complex(v[1])
    t = rng.uniform(0, 2 * math.pi)
    return complex(math.cos(t)), complex(math.sin(t))


def random_config(
    rng: np.random.Generator, n: int, ops: int, complex_amplitudes: bool
) -> ProtocolConfig:
    alpha, beta = random_target(rng, complex_amplitudes)
    scripts = [
        [(Kind.U1 if rng.integers(2) else Kind.U0, float(rng.uniform(-2 * math.pi, 2 * math.pi)))
         for _ in range(ops)]
        for _ in range(n)
    ]
    return ProtocolConfig.from_ops(alpha, beta, scripts)


@dataclass(frozen=True)
class ShapeSummary:
    controllers: int
    ops: int
    complex_target: bool
    configs: int
    branches: int
    failures: tuple[tuple[ProtocolConfig, BranchReport], ...]
    lookup_mismatches: int
    reports: tuple[VerificationReport, ...] = field(default=(), repr=False)

    @property
    def passed(self) -> bool:
        return not self.failures

    def describe(self) -> str:
        target = "complex" if self.complex_target else "real"
        status = "pass" if self.passed else f"FAIL ({len(self.failures)} branches)"
        return (f"N={self.controllers} ops={self.ops} target={target}: "
                f"{self.configs} configs, {self.branches} branches, {status}")


def sweep(
    max_controllers: int = 4,
    max_ops: int = 3,
    draws: int = 50,
    seed: int = 0,
    lookup: Lookup = correction_lookup,
) -> Iterator[ShapeSummary]:
    """Exhaustively verify ``draws`` random configs for every shape up to the bounds.

    A shape is (controllers, ops per controller, real or complex target).
    ``lookup_mismatches`` counts branches where the Pauli found by search differs
    from the one the lookup chose.
    """
    if max_controllers + 1 > MAX_PARTIES:
        raise SimulationError(f"{max_controllers + 1} parties exceeds the bound {MAX_PARTIES}")
    rng = np.random.default_rng(seed)
    for n in range(1, max_controllers + 1):
        for ops in range(1, max_ops + 1):
            for complex_target in (False, True):
                failures, branches, mismatches, reports = [], 0, 0, []
                for _ in range(draws):
                    config = random_config(rng, n, ops, complex_target)
                    report = exhaustive_verify(config, lookup=lookup)
                    reports.append(report)
                    branches += len(report.branches)
                    failures += [(config, b) for b in report.failures]
                    mismatches += sum(b.matches != (b.correction,) for b in report.branches)
                yield ShapeSummary(n, ops, complex_target, draws, branches,
                                   tuple(failures), mismatches, tuple(reports))

import cmath
from dataclasses import replace

import numpy as np
import pytest

from mqrc import oracle
from mqrc.oracle import (
    TABLE_1,
    TABLE_2,
    collapse_table,
    compose_operations,
    derive_table,
    exhaustive_verify,
    matching_corrections,
    oracle_state,
    sweep,
)
from mqrc.protocol import ControllerScript, CorrectionKey, Kind, ProtocolConfig, correction_lookup, run
from mqrc.statevector import Forced, Outcome, Pauli, SimulationError, StateVector

TA, TC = 0.3, 0.5


def scripts(*ops_per_controller):
    return tuple(ControllerScript(i, tuple(ops)) for i, ops in enumerate(ops_per_controller, 1))


def test_compose_u1_then_u0():
    g = compose_operations(scripts([("U1", TA)], [("U0", TC)])).matrix
    s = TA + TC
    want = np.array([[0, cmath.exp(1j * s)], [-cmath.exp(-1j * s), 0]])
    assert np.allclose(g, want, atol=1e-12)


def test_compose_u0_chain_is_u0_of_sum():
    g = compose_operations(scripts([("U0", 0.4), ("U0", -1.1)])).matrix
    assert np.allclose(g, np.diag([cmath.exp(-0.7j), cmath.exp(0.7j)]), atol=1e-12)


def test_compose_two_u1():
    g = compose_operations(scripts([("U1", TA)], [("U1", TC)])).matrix
    d = TC - TA
    want = np.array([[-cmath.exp(1j * d), 0], [0, -cmath.exp(-1j * d)]])
    assert np.allclose(g, want, atol=1e-12)


def test_compose_needs_an_operation():
    with pytest.raises(SimulationError):
        compose_operations(())


def test_oracle_state_single_u0():
    theta, alpha, beta = 1.3, 0.6, 0.8j
    got = oracle_state(ProtocolConfig.from_ops(alpha, beta, [[("U0", theta)]]))
    assert np.allclose(got.amplitudes, [alpha * cmath.exp(1j * theta), beta * cmath.exp(-1j * theta)])


def test_oracle_state_identity():
    got = oracle_state(ProtocolConfig.from_ops(0.6, 0.8, [[("U0", 0.0)]]))
    assert np.allclose(got.amplitudes, [0.6, 0.8])


def test_oracle_state_worked_example():
    s = TA + TC
    got = oracle_state(ProtocolConfig.from_ops(0.6, 0.8, [[("U1", TA)], [("U0", TC)]]))
    assert np.allclose(got.amplitudes, [0.8 * cmath.exp(1j * s), -0.6 * cmath.exp(-1j * s)], atol=1e-12)


def test_worked_example_all_branches_pass():
    report = exhaustive_verify(ProtocolConfig.from_ops(0.6, 0.8, [[("U1", TA)], [("U0", TC)]]))
    assert len(report.branches) == 8
    assert report.all_pass
    assert [b.outcomes for b in report.branches] == [
        "0++", "0+-", "0-+", "0--", "1++", "1+-", "1-+", "1--"
    ]


def test_identity_single_controller():
    report = exhaustive_verify(ProtocolConfig.from_ops(0.6, 0.8j, [[("U0", 0.0)]]))
    assert len(report.branches) == 4 and report.all_pass
    assert {b.correction for b in report.branches} <= set(Pauli)


def test_four_controllers_random_scripts():
    rng = np.random.default_rng(4)
    report = exhaustive_verify(oracle.random_config(rng, 4, 3, complex_amplitudes=True))
    assert len(report.branches) == 32 and report.all_pass


def test_enumeration_bound():
    cfg = ProtocolConfig.from_ops(1, 0, [[("U0", 0.0)]] * 8)
    with pytest.raises(SimulationError, match="bound"):
        exhaustive_verify(cfg)
    assert exhaustive_verify(cfg, max_parties=9).all_pass


def test_sabotaged_lookup_is_caught():
    def wrong(key):
        return Pauli.I

    report = exhaustive_verify(ProtocolConfig.from_ops(0.6, 0.8, [[("U1", TA)], [("U0", TC)]]), lookup=wrong)
    assert not report.all_pass
    assert report.failures


def test_branch_report_pass_threshold():
    b = oracle.BranchReport("0+", CorrectionKey(0, 0), Pauli.I, 1 - 2e-9, (Pauli.I,))
    assert not b.passed
    assert replace(b, overlap=1 - 5e-10).passed


def test_matching_corrections_unique_for_generic_state():
    rng = np.random.default_rng(8)
    for _ in range(50):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        target = StateVector(v / np.linalg.norm(v))
        for p in Pauli:
            moved = StateVector(np.linalg.inv(oracle.pauli(p).matrix) @ target.amplitudes)
            assert matching_corrections(moved, target) == (p,)


def test_matching_corrections_ambiguous_on_basis_state():
    # I and Z agree on |0> up to phase
    zero = StateVector([1, 0])
    assert set(matching_corrections(zero, zero)) == {Pauli.I, Pauli.Z}


def test_search_agrees_with_lookup_on_every_branch():
    rng = np.random.default_rng(12)
    for n in (1, 2, 3):
        report = exhaustive_verify(oracle.random_config(rng, n, 2, complex_amplitudes=True))
        for b in report.branches:
            assert b.matches == (b.correction,)
            assert correction_lookup(b.key) is b.correction


def test_derive_table_reproduces_published_rows():
    rows = derive_table()
    assert rows == list(TABLE_1)


@pytest.mark.parametrize("kinds, signs, pauli", [
    (("U0", "U0"), ("+", "-"), Pauli.Z),
    (("U1", "U1"), ("-", "-"), Pauli.I),
    (("U1", "U0"), ("+", "+"), Pauli.X),
    (("U0", "U1"), ("+", "+"), Pauli.X),
])
def test_derive_table_rows(kinds, signs, pauli):
    rows = {(r.kind_a.value, r.kind_c.value, r.mr_a.value, r.mr_c.value): r.correction
            for r in derive_table(seed=99)}
    assert rows[(*kinds, *signs)] is pauli


def test_collapse_table():
    assert collapse_table(derive_table()) == TABLE_2
    assert collapse_table(TABLE_1) == TABLE_2


def test_collapse_table_detects_conflict():
    bad = list(TABLE_1)
    bad[0] = replace(bad[0], correction=Pauli.X)
    with pytest.raises(SimulationError, match="disagree"):
        collapse_table(bad)


def test_table_rows_cover_all_branches():
    rows = derive_table()
    assert {(r.kind_a, r.kind_c) for r in rows} == {(a, c) for a in Kind for c in Kind}
    assert len({(r.kind_a, r.kind_c, r.mr_a, r.mr_c) for r in rows}) == 16


def test_sweep_shape_counts():
    shapes = list(sweep(max_controllers=1, max_ops=1, draws=1))
    assert len(shapes) == 2
    assert [s.branches for s in shapes] == [4, 4]
    assert all(s.passed and s.lookup_mismatches == 0 for s in shapes)


def test_sweep_is_reproducible():
    def summary(seed):
        rng = np.random.default_rng(seed)
        return oracle.random_config(rng, 2, 2, True)

    assert summary(5) == summary(5)


def test_sweep_bound():
    with pytest.raises(SimulationError):
        list(sweep(max_controllers=8, draws=1))


def test_random_targets_normalized():
    rng = np.random.default_rng(0)
    for flag in (False, True):
        a, b = oracle.random_target(rng, flag)
        assert abs(abs(a) ** 2 + abs(b) ** 2 - 1) < 1e-12
        if not flag:
            assert a.imag == 0 and b.imag == 0


def test_branches_run_via_forced_outcomes():
    cfg = ProtocolConfig.from_ops(0.6, 0.8, [[("U1", TA)], [("U0", TC)]])
    forced = list(oracle.all_branches(2))
    assert len(forced) == 8 and forced[0] == Forced("0++")
    res = run(replace(cfg, outcomes=forced[-1]))
    assert [m.outcome for m in res.transcript.measurements] == [Outcome.ONE, Outcome.MINUS, Outcome.MINUS]

"""Tests for the MMSE, the phase boundaries and the phase-diagram sweep."""

import math

import numpy as np
import pytest

import lib.theory.phase as phase
from lib.errors import ConsistencyError, InvalidArgumentError, ScanError
from lib.params import INFINITE, ModelParams
from lib.theory import (
    FixedPoint,
    MmseResult,
    PhaseTag,
    SePoint,
    SpinodalOutcome,
    mmse,
    mmse_curve,
    phase_diagram,
    phase_tag,
    pi_star,
    recovery_threshold,
    spinodal_pi,
    spinodal_scan,
)


def test_pi_star():
    assert pi_star(0.5, 0.2) == pytest.approx(5 / 3)
    assert [pi_star(0.5, rho) for rho in (0.1, 0.3, 0.4)] == pytest.approx([1.25, 2.5, 5.0])
    assert pi_star(0.5, 0.5) is None
    assert pi_star(0.3, 0.6) is None
    with pytest.raises(InvalidArgumentError):
        pi_star(0.5, 0.0)


def test_recovery_threshold():
    assert recovery_threshold(0.0) == 1e-8
    assert recovery_threshold(1e-3) == pytest.approx(1e-2)


def test_best_fixed_point_tie_breaks_on_smaller_error():
    a = FixedPoint(SePoint(0.1, 0.01), phi=1.0, basin="uninformative")
    b = FixedPoint(SePoint(1e-9, 1e-9), phi=1.0 + 5e-10, basin="informed")
    c = FixedPoint(SePoint(0.15, 0.01), phi=1.1, basin="custom")
    assert phase._pick_best([a, b]) is b
    assert phase._pick_best([b, a]) is b
    assert phase._pick_best([a, b, c]) is c


def test_noiseless_choice_follows_threshold():
    failed = FixedPoint(SePoint(0.25, 0.02), phi=0.4, basin="uninformative")
    exact = FixedPoint(SePoint(1e-11, 1e-11), phi=0.1, basin="informed")
    stuck = FixedPoint(SePoint(1e-5, 1e-5), phi=0.9, basin="custom", converged=False)
    params = ModelParams(alpha=0.5, pi=1.0, rho=0.2, delta=0.0, eta=1e-2)
    assert phase._choose([failed, exact], params.with_pi(1.7), 1e-12) is exact
    assert phase._choose([failed, exact], params.with_pi(1.6), 1e-12) is failed
    assert phase._choose([failed, stuck, exact], params.with_pi(1.6), 1e-12) is failed
    assert phase._choose([exact], params.with_pi(1.6), 1e-12) is exact
    assert phase._choose([failed, exact], ModelParams(alpha=0.5, pi=1.7, rho=0.2, delta=1e-3, eta=1e-2), 1e-12) is failed


@pytest.mark.parametrize(
    "pi, threshold, spinodal, outcome, expected",
    [
        (1.5, 5 / 3, 3.0, SpinodalOutcome.FOUND, PhaseTag.IMPOSSIBLE),
        (2.0, 5 / 3, 3.0, SpinodalOutcome.FOUND, PhaseTag.HARD),
        (3.0, 5 / 3, 3.0, SpinodalOutcome.FOUND, PhaseTag.TRACTABLE),
        (2.0, 5 / 3, None, SpinodalOutcome.NO_HARD_PHASE, PhaseTag.TRACTABLE),
        (2.0, 5 / 3, None, SpinodalOutcome.NO_RECOVERY, PhaseTag.HARD),
        (9.0, None, None, SpinodalOutcome.NO_THRESHOLD, PhaseTag.IMPOSSIBLE),
    ],
)
def test_phase_tag(pi, threshold, spinodal, outcome, expected):
    assert phase_tag(pi, threshold, spinodal, outcome) is expected


def test_mmse_below_and_above_threshold():
    params = ModelParams(alpha=0.5, pi=1.4, rho=0.2, delta=0.0, eta=1e-2)
    below = mmse(params)
    above = mmse(params.with_pi(10.0))
    assert below.E > 1e-3
    assert above.E <= 1e-8
    assert any(fp.point.E == above.E and fp.point.D == above.D for fp in above.candidates)


def test_mmse_curve_tags():
    params = ModelParams(alpha=0.5, pi=1.0, rho=0.2, delta=0.0, eta=1e-2)
    curve = mmse_curve(params, [1.4, 10.0], grid_size=10)
    assert [p.pi for p in curve] == [1.4, 10.0]
    assert [p.tag for p in curve] == [PhaseTag.IMPOSSIBLE, PhaseTag.TRACTABLE]


# --- spinodal search with a stubbed recovery predicate ------------------------------

def stub_recovery(monkeypatch, rule):
    monkeypatch.setattr(phase, "_recovers", lambda params, nodes, delta_floor, max_steps: rule(params.pi))


def test_spinodal_found(monkeypatch):
    stub_recovery(monkeypatch, lambda pi: pi >= 3.3)
    value, outcome = spinodal_scan(0.5, 0.2, 1e-2, 0.0, tol=1e-3)
    assert outcome is SpinodalOutcome.FOUND
    assert value == pytest.approx(3.3, abs=1e-3)
    assert spinodal_pi(0.5, 0.2, 1e-2, 0.0, tol=1e-3) == value


def test_spinodal_absent(monkeypatch):
    stub_recovery(monkeypatch, lambda pi: True)
    assert spinodal_scan(0.5, 0.2, 1e-2, 0.0) == (None, SpinodalOutcome.NO_HARD_PHASE)
    stub_recovery(monkeypatch, lambda pi: False)
    assert spinodal_scan(0.5, 0.2, 1e-2, 0.0) == (None, SpinodalOutcome.NO_RECOVERY)
    assert spinodal_scan(0.5, 0.6, 1e-2, 0.0) == (None, SpinodalOutcome.NO_THRESHOLD)
    assert spinodal_pi(0.5, 0.6, 1e-2, 0.0) is None


def test_spinodal_non_monotone_recovery(monkeypatch):
    stub_recovery(monkeypatch, lambda pi: 5.0 < pi < 10.0)
    with pytest.raises(ScanError) as info:
        spinodal_scan(0.5, 0.2, 1e-2, 0.0)
    assert len(info.value.samples) == phase.SPINODAL_SAMPLES
    assert info.value.exit_code == 4


def test_spinodal_invalid_tolerance():
    with pytest.raises(InvalidArgumentError):
        spinodal_scan(0.5, 0.2, 1e-2, 0.0, tol=0.0)


# --- phase diagram with stubbed cells ------------------------------------------------

def fake_mmse(failing_pi):
    def compute(params, nodes, grid_size, delta_floor):
        if params.pi == failing_pi:
            raise ConsistencyError("not stationary")
        return MmseResult(E=0.1, D=0.01, phi=-1.0, candidates=())
    return compute


def test_phase_diagram_marks_failed_cells(monkeypatch):
    monkeypatch.setattr(phase, "mmse", fake_mmse(2.0))
    records = phase_diagram(0.5, 0.0, 1e-2, rho_grid=[0.6], pi_grid=[1.0, 2.0])
    assert len(records) == 1
    record = records[0]
    assert record.pi_star is None
    assert record.spinodal_outcome is SpinodalOutcome.NO_THRESHOLD
    assert [p.tag for p in record.curve] == [PhaseTag.IMPOSSIBLE, PhaseTag.FAILED]
    assert math.isnan(record.curve[1].E)


def test_phase_diagram_survives_failed_scan(monkeypatch):
    def failing_scan(*args, **kwargs):
        raise ScanError("not monotone", [])

    monkeypatch.setattr(phase, "mmse", fake_mmse(None))
    monkeypatch.setattr(phase, "spinodal_scan", failing_scan)
    records = phase_diagram(0.5, 0.0, INFINITE, rho_grid=[0.2, 0.6], pi_grid=[1.5, 3.0])
    assert [r.rho for r in records] == [0.2, 0.6]
    assert [p.tag for p in records[0].curve] == [PhaseTag.IMPOSSIBLE, PhaseTag.FAILED]
    assert [p.tag for p in records[1].curve] == [PhaseTag.IMPOSSIBLE, PhaseTag.IMPOSSIBLE]


def test_phase_diagram_uses_spinodal(monkeypatch):
    stub_recovery(monkeypatch, lambda pi: pi >= 3.0)
    monkeypatch.setattr(phase, "mmse", fake_mmse(None))
    records = phase_diagram(0.5, 0.0, 1e-2, rho_grid=[0.2], pi_grid=[1.5, 2.0, 4.0], tol=1e-2)
    record = records[0]
    assert record.pi_spinodal == pytest.approx(3.0, abs=1e-2)
    assert [p.tag for p in record.curve] == [PhaseTag.IMPOSSIBLE, PhaseTag.HARD, PhaseTag.TRACTABLE]


def test_phase_diagram_needs_grids():
    with pytest.raises(InvalidArgumentError):
        phase_diagram(0.5, 0.0, 1e-2, rho_grid=[], pi_grid=[1.0])


# --- experiment-scale properties ----------------------------------------------------

@pytest.mark.slow
@pytest.mark.parametrize("eta", [1e-2, 1e-4, INFINITE])
@pytest.mark.parametrize("rho", [0.1, 0.2, 0.3, 0.4])
def test_exact_recovery_jumps_at_threshold(rho, eta):
    threshold = pi_star(0.5, rho)
    params = ModelParams(alpha=0.5, pi=threshold, rho=rho, delta=0.0, eta=eta)
    assert mmse(params.with_pi(threshold - 0.02)).E > 1e-3
    assert mmse(params.with_pi(threshold + 0.02)).E <= 1e-8
    assert mmse(params.with_pi(2.0 * threshold)).E <= 1e-8


@pytest.mark.slow
def test_spinodal_ordering():
    threshold = pi_star(0.5, 0.2)

    def effective(eta):
        value, outcome = spinodal_scan(0.5, 0.2, eta, 0.0, tol=1e-2)
        if outcome is SpinodalOutcome.NO_HARD_PHASE:
            return threshold * (1 + phase.SPINODAL_OFFSET), outcome
        if outcome is SpinodalOutcome.NO_RECOVERY:
            return math.inf, outcome
        return value, outcome

    learning, learning_outcome = effective(INFINITE)
    coarse, coarse_outcome = effective(1e-2)
    fine, _ = effective(1e-4)
    assert learning >= coarse - 1e-2
    assert coarse >= fine - 1e-2
    assert fine >= threshold
    assert learning_outcome is not SpinodalOutcome.NO_HARD_PHASE
    assert coarse_outcome is SpinodalOutcome.FOUND
    assert coarse > threshold


@pytest.mark.slow
def test_mmse_jumps_once_without_noise():
    eta = 1e-2
    params = ModelParams(alpha=0.5, pi=1.0, rho=0.2, delta=0.0, eta=eta)
    grid = list(np.round(np.arange(1.2, 3.01, 0.1), 12))
    curve = mmse_curve(params, grid)
    recovered = [p.E <= 1e-8 for p in curve]
    first = recovered.index(True)
    assert all(recovered[first:]) and not any(recovered[:first])
    assert curve[first].pi == pytest.approx(1.7)
    before = curve[first - 1]
    assert before.E > 1e-3
    assert before.D == pytest.approx(eta / (1 + eta), rel=0.2)


@pytest.mark.slow
def test_mmse_continuous_with_noise():
    params = ModelParams(alpha=0.5, pi=1.0, rho=0.2, delta=0.1, eta=1e-2)
    grid = list(np.round(np.arange(1.2, 3.01, 0.1), 12))
    errors = np.array([p.E for p in mmse_curve(params, grid)])
    steps = np.abs(np.diff(errors))
    k = int(np.argmax(steps))
    neighbours = [steps[j] for j in (k - 1, k + 1) if 0 <= j < len(steps)]
    assert steps[k] <= 3.0 * max(neighbours)

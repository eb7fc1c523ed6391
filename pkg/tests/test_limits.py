"""Extrapolation and experiment-driver tests.

The extrapolator is probed with synthetic sequences whose limits are known
exactly; the drivers get one cheap real run each plus their argument
guards.  The heavy multi-datum sweeps live in the acceptance suite.
"""

import numpy as np
import pytest

from smoothing_lab.errors import InvalidParameterError
from smoothing_lab.limits import (
    LimitEstimate,
    estimate_limit,
    verify_asymptotics,
    verify_flux,
    verify_identity,
    verify_sandwich,
    verify_smoothing_bound,
)
from smoothing_lab.model import packet, packet_sum
from smoothing_lab.weights import make_psi_eps

F_1D = packet_sum([packet(1.0, 1.0, [0.2], [0.3])])


# ---------------------------------------------------------------------------
# extrapolation on synthetic schedules
# ---------------------------------------------------------------------------

def test_power_law_limit_recovered():
    ps = 2.0 ** np.arange(7)
    vals = 3.7 + 2.1 * ps**-1.5
    est = estimate_limit(zip(ps, vals))
    assert est.converged
    assert est.value == pytest.approx(3.7, abs=1e-6)
    assert "alpha" in est.note


def test_power_law_with_negative_amplitude():
    ps = np.geomspace(1.0, 64.0, 7)
    vals = -0.8 - 5.0 * ps**-0.7
    est = estimate_limit(zip(ps, vals))
    assert est.converged
    assert est.value == pytest.approx(-0.8, abs=1e-5)


def test_raw_last_model():
    est = estimate_limit([(1, 2.0), (2, 2.5), (4, 2.75)], model="raw-last")
    assert est == LimitEstimate(2.75, 0.25, True, "raw-last")


def test_constant_sequence_short_circuits():
    est = estimate_limit([(1, 4.2), (2, 4.2), (4, 4.2)])
    assert est.converged
    assert est.value == 4.2
    assert est.error == 0.0
    assert "constant" in est.note


def test_alternating_tail_flagged():
    ps = 2.0 ** np.arange(6)
    vals = 1.0 + 0.1 * (-1.0) ** np.arange(6)
    est = estimate_limit(zip(ps, vals))
    assert not est.converged
    assert "alternate" in est.note
    assert est.value == vals[-1]


def test_schedule_guards():
    with pytest.raises(InvalidParameterError):
        estimate_limit([(1, 1.0), (2, 1.1)])
    with pytest.raises(InvalidParameterError):
        estimate_limit([(2, 1.0), (1, 1.1), (4, 1.2)])
    with pytest.raises(InvalidParameterError):
        estimate_limit([(1, 1.0), (2, 1.1), (4, 1.2)], model="pade")


# ---------------------------------------------------------------------------
# drivers: one cheap live run each, plus guards
# ---------------------------------------------------------------------------

def test_identity_report_fields():
    report = verify_identity(F_1D, make_psi_eps(1.0), [0.5])
    assert report.experiment == "identity"
    assert report.n == 1
    assert report.weight_id == "soft-abs-eps1"
    assert report.params.shape == report.lhs.shape == report.rhs.shape == (1,)
    assert report.floor > 0
    assert report.passed
    assert np.all(report.rel_residual <= report.tolerance)
    assert report.abs_residual.shape == (1,)


def test_asymptotics_smoke():
    report = verify_asymptotics(F_1D, [1.0, 4.0], final_ratio=0.5)
    assert report.passed
    assert report.lhs[1] < report.lhs[0]


def test_flux_rejects_nonpositive_times():
    with pytest.raises(InvalidParameterError):
        verify_flux(F_1D, make_psi_eps(1.0), [-1.0, 1.0])


def test_sandwich_rejects_bad_plateau_index():
    with pytest.raises(InvalidParameterError):
        verify_sandwich(F_1D, 0, [4.0, 8.0])


def test_zero_datum_smoothing_bound_passes():
    empty = packet_sum([], n=1)
    report = verify_smoothing_bound(empty, [1.0, 2.0, 4.0])
    assert report.passed
    assert np.all(report.lhs == 0.0)
    assert report.floor == 0.0

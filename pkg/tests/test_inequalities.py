import math

import numpy as np
import pytest

from seqwit.inequalities import (
    MERMIN_BOUND,
    MERMIN_TERMS,
    UFFINK_BOUND,
    ChainReport,
    MeasurementPlan,
    averaged_correlators,
    mermin_chain,
    percent_violation,
    single_charlie_threshold,
    uffink_chain,
    violation_window,
)
from seqwit.quantum_model import random_density, random_direction
from seqwit.sequential import chain_correlation


def _f(lam):
    return math.sqrt(1 - lam ** 2)


def test_sharp_symmetric_maxima(ghz):
    plan = MeasurementPlan.symmetric([1.0])
    assert mermin_chain(plan, ghz).values[0] == pytest.approx(4.0, abs=1e-9)
    assert uffink_chain(plan, ghz).values[0] == pytest.approx(16.0, abs=1e-9)


def test_ghz_is_the_default_initial_state():
    plan = MeasurementPlan.symmetric([0.74])
    assert mermin_chain(plan).values == mermin_chain(plan, None).values


def test_two_charlie_values(ghz):
    report = mermin_chain(MeasurementPlan.symmetric([0.74, 1.0]), ghz)
    assert report.values[0] == pytest.approx(2.96, abs=0.005)
    assert report.values[1] == pytest.approx(3.34, abs=0.01)
    assert report.verdicts == (True, True)
    assert report.bound == MERMIN_BOUND


@pytest.mark.parametrize("lam1", np.linspace(0.05, 1.0, 8))
@pytest.mark.parametrize("lam2", np.linspace(0.05, 1.0, 5))
def test_symmetric_closed_form(lam1, lam2, ghz):
    values = mermin_chain(MeasurementPlan.symmetric([lam1, lam2]), ghz).values
    assert values[0] == pytest.approx(4 * lam1, abs=1e-12)
    assert values[1] == pytest.approx(2 * lam2 * (1 + _f(lam1)), abs=1e-12)


def test_single_charlie_threshold():
    assert single_charlie_threshold() == pytest.approx(1 / math.sqrt(2), abs=1e-9)


def test_double_violation_window():
    low, high = violation_window()
    assert low == pytest.approx(1 / math.sqrt(2), abs=1e-9)
    assert high == pytest.approx(math.sqrt(1 - (math.sqrt(2) - 1) ** 2), abs=1e-9)
    assert round(low, 2) == 0.71 and round(high, 2) == 0.91


def test_sharp_tail_values_never_increase(rng, ghz):
    lambdas = list(rng.uniform(0.3, 1.0, size=5))
    previous = math.inf
    for m in range(1, 6):
        value = mermin_chain(MeasurementPlan.symmetric(lambdas[: m - 1] + [1.0]), ghz).values[-1]
        assert value <= previous + 1e-12
        previous = value


def test_fast_correlators_match_chain_correlation(rng, ghz):
    lambdas = [0.6, 0.85, 1.0]
    angles = list(rng.uniform(0, 2 * math.pi, size=8 + 4 * len(lambdas)))
    plan = MeasurementPlan.from_angles(angles, lambdas)
    corr = averaged_correlators(plan, ghz)
    stages = plan.stages()
    for m in range(1, 4):
        for i, j, k, _ in MERMIN_TERMS:
            direct = chain_correlation(ghz, stages, m, plan.alice[i], plan.bob[j], k)
            assert corr[m - 1, i, j, k] == pytest.approx(direct, abs=1e-12)


def test_from_angles_round_trip(rng):
    plan = MeasurementPlan.from_angles(list(rng.uniform(0, 2 * math.pi, size=12)), [0.9])
    again = MeasurementPlan.from_angles(plan.angles(), plan.sharpness)
    for d1, d2 in zip(plan.alice + plan.bob, again.alice + again.bob):
        np.testing.assert_allclose(d1.vector(), d2.vector(), atol=1e-12)
    with pytest.raises(ValueError, match="Expected 16 angles"):
        MeasurementPlan.from_angles([0.0] * 12, [0.9, 1.0])


def test_uffink_is_bounded_by_sixteen(rng):
    rho = random_density(rng)
    for _ in range(10):
        angles = [x for _ in range(6) for x in (random_direction(rng).theta, random_direction(rng).phi)]
        value = uffink_chain(MeasurementPlan.from_angles(angles, [1.0]), rho).values[0]
        assert 0 <= value <= 16 + 1e-9


def test_percent_violation():
    assert percent_violation(2.96, MERMIN_BOUND) == pytest.approx(100 * (2.96 / MERMIN_BOUND - 1))
    assert percent_violation(8.4, UFFINK_BOUND) == pytest.approx(5.0)
    assert percent_violation(-0.1, 0.0) is None


def test_chain_report_verdicts_follow_values():
    report = ChainReport.from_values("witness", [-0.1, 0.2], 0.0, violation_side="below")
    assert report.verdicts == (True, False)
    with pytest.raises(ValueError, match="Verdicts"):
        ChainReport(quantity="mermin", values=(3.0,), bound=MERMIN_BOUND, verdicts=(False,))


@pytest.mark.parametrize("lambdas", [[1.0], [0.74, 1.0], [0.72, 0.86, 1.0], [0.3, 0.5, 0.9, 0.95]])
def test_uffink_is_mermin_squared_at_symmetric_settings(lambdas, ghz):
    plan = MeasurementPlan.symmetric(lambdas)
    m = np.array(mermin_chain(plan, ghz).values)
    u = np.array(uffink_chain(plan, ghz).values)
    np.testing.assert_allclose(u, m ** 2, atol=1e-10)


def test_single_charlie_uffink_values(ghz):
    below = uffink_chain(MeasurementPlan.symmetric([0.70]), ghz)
    above = uffink_chain(MeasurementPlan.symmetric([0.7246]), ghz)
    assert below.values[0] == pytest.approx(7.84, abs=1e-9)
    assert below.verdicts == (False,)
    assert above.values[0] == pytest.approx(8.40, abs=1e-3)
    assert above.verdicts == (True,)

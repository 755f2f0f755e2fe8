import math

import numpy as np
import pytest

from seqwit.quantum_model import density_of, named_state
from seqwit.sequential import averaged_channel
from seqwit.thresholds import (
    CONVENTION,
    REFERENCE_MINIMA,
    ThresholdTable,
    bisection_threshold,
    permissible_ranges,
    reference_deviations,
    threshold_chain,
    threshold_sweep,
)
from seqwit.witnesses import WitnessKind, affine_coefficients, build_witness, witness_chain, witness_stage

GHZ_COMPUTED = [0.333, 0.347, 0.361, 0.378, 0.398, 0.421, 0.449, 0.483, 0.526, 0.583, 0.664, 0.795]


def test_w_chain():
    table = threshold_chain(WitnessKind.W)
    assert table.chain_length == 4
    assert table.minima == pytest.approx(REFERENCE_MINIMA[WitnessKind.W], abs=0.01)
    assert table.convention == CONVENTION
    assert table.diagnostic is None


def test_ghz_chain():
    table = threshold_chain("ghz")
    assert table.chain_length == 12
    assert table.minima == pytest.approx(GHZ_COMPUTED, abs=1e-3)
    assert table.minima[11] == pytest.approx(0.7952721781269085, abs=1e-8)
    assert table.diagnostic is None


def test_ghz_chain_against_published_table():
    deviations = reference_deviations(threshold_chain("ghz"))
    assert [m for m, _, _ in deviations] == list(range(1, 13))
    assert [ref for _, _, ref in deviations] == list(REFERENCE_MINIMA[WitnessKind.GHZ])
    for m, diff, _ in deviations[:11]:
        assert abs(diff) <= 0.01, m
    # stage 12 sits below the published 0.81
    m, diff, ref = deviations[11]
    assert ref == 0.81
    assert diff == pytest.approx(0.7953 - 0.81, abs=5e-4)


def test_w_chain_against_published_table():
    deviations = reference_deviations(threshold_chain("w"))
    assert len(deviations) == 4
    assert all(abs(diff) <= 0.01 for _, diff, _ in deviations)


def test_first_and_second_minima_are_exact():
    w = threshold_chain("w").minima
    g = threshold_chain("ghz").minima
    assert w[0] == pytest.approx(7 / 13, abs=1e-12)
    assert g[0] == pytest.approx(1 / 3, abs=1e-12)
    assert w[1] == pytest.approx(35 / (23 + 42 * math.sqrt(1 - w[0] ** 2)), abs=1e-10)
    assert g[1] == pytest.approx(1 / (1 + 2 * math.sqrt(1 - g[0] ** 2)), abs=1e-10)


@pytest.mark.parametrize("kind", list(WitnessKind))
def test_witness_vanishes_at_every_minimum(kind):
    table = threshold_chain(kind)
    values = witness_chain(kind, table.minima).values
    assert max(abs(v) for v in values) < 1e-12


@pytest.mark.parametrize("kind", list(WitnessKind))
def test_next_stage_cannot_detect(kind):
    table = threshold_chain(kind)
    report = witness_chain(kind, list(table.minima) + [1.0])
    assert report.values[-1] >= 0
    assert report.verdicts[-1] is False


def test_maximally_mixed_start_gives_empty_chain():
    table = threshold_chain("ghz", initial=np.eye(8) / 8)
    assert table.chain_length == 0
    assert "beta" in table.diagnostic
    assert affine_coefficients(build_witness("ghz"), np.eye(8) / 8).alpha == pytest.approx(3 / 8)


@pytest.mark.parametrize("kind", list(WitnessKind))
def test_bisection_cross_check(kind):
    spec = build_witness(kind)
    table = threshold_chain(kind)
    rho = density_of(named_state(spec.target_state))
    for lam in table.minima[:3]:
        assert bisection_threshold(spec, rho) == pytest.approx(lam, abs=2e-9)
        rho = averaged_channel(rho, witness_stage(spec, lam))


def test_bisection_without_sign_change():
    assert bisection_threshold(build_witness("ghz"), np.eye(8) / 8) is None


@pytest.mark.parametrize("kind", list(WitnessKind))
@pytest.mark.parametrize("epsilon", [0.01, 0.05])
def test_raising_earlier_sharpness_tightens_later_thresholds(kind, epsilon):
    base = threshold_chain(kind)
    perturbed = threshold_chain(kind, epsilon=epsilon)
    assert perturbed.epsilon == epsilon
    assert perturbed.minima[0] == pytest.approx(base.minima[0], abs=1e-15)
    assert perturbed.chain_length <= base.chain_length
    for lo, hi in zip(base.minima[1:], perturbed.minima[1:]):
        assert hi >= lo


def test_threshold_sweep_keeps_order():
    tables = threshold_sweep("w", [0.0, 0.02])
    assert [t.epsilon for t in tables] == [0.0, 0.02]
    assert tables[0].minima == threshold_chain("w").minima


def test_negative_epsilon_rejected():
    with pytest.raises(ValueError, match="epsilon"):
        threshold_chain("w", epsilon=-0.1)


def test_lambda_cap_shortens_chain():
    full = threshold_chain("ghz").minima
    assert threshold_chain("ghz", lambda_cap=0.5).chain_length == sum(x < 0.5 for x in full) == 8


def test_table_rejects_non_increasing_minima():
    with pytest.raises(ValueError, match="does not exceed"):
        ThresholdTable(witness_kind="w", minima=(0.5, 0.4), chain_length=2)
    with pytest.raises(ValueError, match="chain_length"):
        ThresholdTable(witness_kind="w", minima=(0.5,), chain_length=2)


def test_permissible_ranges():
    rows = permissible_ranges(threshold_chain("w"))
    assert [m for m, _, _ in rows] == [1, 2, 3, 4]
    assert all(hi == 1.0 and 0 < lo < 1 for _, lo, hi in rows)


def test_threshold_sweep_passes_initial_state():
    tables = threshold_sweep("ghz", [0.0, 0.01], initial=np.eye(8) / 8)
    assert [t.chain_length for t in tables] == [0, 0]

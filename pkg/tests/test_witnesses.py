import math

import numpy as np
import pytest

from seqwit.linalg import expectation, partial_trace, purity
from seqwit.quantum_model import GHZ_KET, W_KET, random_density
from seqwit.sequential import averaged_channel
from seqwit.witnesses import (
    Bipartition,
    WitnessKind,
    affine_coefficients,
    build_witness,
    charlie2_closed_forms,
    positivity_fuzz,
    resum,
    sample_biseparable,
    unsharp_expectation,
    unsharp_operator,
    witness_chain,
    witness_stage,
)

KET_000 = np.zeros((8, 8), dtype=complex)
KET_000[0, 0] = 1.0
GRID = np.linspace(0.05, 1.0, 20)


def test_sharp_operators():
    w = build_witness(WitnessKind.W)
    g = build_witness("ghz")
    np.testing.assert_allclose(w.sharp_operator, (2 / 3) * np.eye(8) - np.outer(W_KET, W_KET.conj()), atol=1e-14)
    np.testing.assert_allclose(g.sharp_operator, 0.5 * np.eye(8) - np.outer(GHZ_KET, GHZ_KET.conj()), atol=1e-14)
    assert len(w.correlation_settings) == 5
    assert len(g.correlation_settings) == 4
    assert w.biseparable_bound_constant == 0.25


@pytest.mark.parametrize("kind", list(WitnessKind))
def test_decomposition_resums(kind):
    spec = build_witness(kind)
    np.testing.assert_allclose(resum(spec.prefactor, spec.terms), spec.sharp_operator, atol=1e-12)
    np.testing.assert_allclose(unsharp_operator(spec, 1.0), spec.sharp_operator, atol=1e-14)


def test_sharp_values_on_target_states(ghz, w_state):
    assert expectation(build_witness("ghz").sharp_operator, ghz.density) == pytest.approx(-0.5)
    assert expectation(build_witness("w").sharp_operator, w_state.density) == pytest.approx(-1 / 3)
    assert expectation(build_witness("ghz").sharp_operator, KET_000) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("lam", [0.3, 0.54, 1.0])
def test_stage_one_closed_forms(lam, ghz, w_state):
    assert unsharp_expectation(build_witness("w"), w_state, lam) == pytest.approx((7 - 13 * lam) / 18, abs=1e-12)
    assert unsharp_expectation(build_witness("ghz"), ghz, lam) == pytest.approx((1 - 3 * lam) / 4, abs=1e-12)
    assert unsharp_expectation(build_witness("ghz"), KET_000, lam) == pytest.approx((1 - lam) / 4, abs=1e-12)


@pytest.mark.parametrize("lam", [0.0, -0.3, 1.01])
def test_sharpness_out_of_range(lam, ghz):
    with pytest.raises(ValueError):
        unsharp_expectation(build_witness("ghz"), ghz, lam)


def test_affine_coefficients(ghz, w_state):
    w = affine_coefficients(build_witness("w"), w_state)
    assert (w.alpha, w.beta) == pytest.approx((7 / 18, 13 / 18), abs=1e-12)
    g = affine_coefficients(build_witness("ghz"), ghz)
    assert (g.alpha, g.beta) == pytest.approx((0.25, 0.75), abs=1e-12)
    assert g.root() == pytest.approx(1 / 3, abs=1e-12)


def test_expectation_is_affine_in_lambda(rng):
    rho = random_density(rng)
    spec = build_witness("w")
    v = [unsharp_expectation(spec, rho, lam) for lam in (0.25, 0.5, 0.75)]
    assert v[1] - v[0] == pytest.approx(v[2] - v[1], abs=1e-12)
    coeffs = affine_coefficients(spec, rho)
    assert coeffs.value(0.5) == pytest.approx(v[1], abs=1e-12)


@pytest.mark.parametrize("kind", list(WitnessKind))
def test_charlie2_closed_forms_match_simulation(kind, ghz, w_state):
    spec = build_witness(kind)
    rho0 = w_state if kind is WitnessKind.W else ghz
    for lam1 in GRID:
        rho1 = averaged_channel(rho0, witness_stage(spec, lam1))
        for lam2 in GRID:
            simulated = unsharp_expectation(spec, rho1, lam2)
            assert simulated == pytest.approx(charlie2_closed_forms(kind, lam1, lam2), abs=1e-10)


def test_charlie2_sign_changes():
    assert abs(charlie2_closed_forms("w", 7 / 13, 0.60)) < 1e-3
    assert abs(charlie2_closed_forms("ghz", 1 / 3, 0.35)) < 5e-3
    # no disturbance: the stage-one threshold reappears
    assert abs(charlie2_closed_forms("w", 1e-9, 7 / 13)) < 1e-12


def test_witness_chain_matches_closed_forms(w_state):
    report = witness_chain("w", [0.6, 0.7])
    assert report.values[0] == pytest.approx((7 - 13 * 0.6) / 18, abs=1e-12)
    assert report.values[1] == pytest.approx(charlie2_closed_forms("w", 0.6, 0.7), abs=1e-12)
    assert report.bound == 0.0
    assert report.verdicts == tuple(v < 0 for v in report.values)
    assert report.percent_violations == [None, None]


@pytest.mark.parametrize("part", list(Bipartition))
def test_biseparable_samples_are_pure_products(part):
    rho = sample_biseparable(part, seed=11)
    assert np.trace(rho).real == pytest.approx(1.0)
    assert purity(rho) == pytest.approx(1.0)
    single = {"A|BC": "A", "B|AC": "B", "C|AB": "C"}[part.value]
    assert purity(partial_trace(rho, [single])) == pytest.approx(1.0, abs=1e-12)


def test_biseparable_sampling_is_seeded():
    np.testing.assert_array_equal(sample_biseparable("A|BC", 5), sample_biseparable("A|BC", 5))


@pytest.mark.parametrize("kind", list(WitnessKind))
def test_positivity_on_biseparable_samples(kind):
    report = positivity_fuzz(kind, samples=300, lambdas=np.linspace(0.1, 1.0, 10), seed=3)
    assert report.passed, (report.min_values, report.min_bound_gaps)
    assert len(report.min_values) == 10


@pytest.mark.slow
@pytest.mark.parametrize("kind", list(WitnessKind))
def test_positivity_full_fuzz(kind):
    report = positivity_fuzz(kind, samples=10_000, lambdas=np.linspace(0.1, 1.0, 10), seed=2020)
    assert report.passed


def test_unsharp_value_equals_interpolation_with_local_part(rng):
    # W^lambda = lambda W + (1 - lambda) W^0
    spec = build_witness("ghz")
    rho = random_density(rng)
    coeffs = affine_coefficients(spec, rho)
    lam = 0.4
    assert unsharp_expectation(spec, rho, lam) == pytest.approx(
        lam * expectation(spec.sharp_operator, rho) + (1 - lam) * coeffs.alpha, abs=1e-12
    )
    assert math.isclose(coeffs.value(1.0), expectation(spec.sharp_operator, rho), abs_tol=1e-12)

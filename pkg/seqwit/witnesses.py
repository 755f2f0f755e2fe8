# witnesses.py
"""Genuine-entanglement witnesses for the W and GHZ classes.

Each witness is carried as a sum of local correlation terms.  Charlie's
unsharp measurement multiplies every term with a nontrivial third factor by
the sharpness, so any expectation is affine in lambda.
"""
import math
from enum import Enum
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from seqwit.config import PSD_TOL
from seqwit.inequalities import ChainReport
from seqwit.linalg import I2, SX, SY, SZ, ComplexMatrix, expectation, kron_all
from seqwit.quantum_model import GHZ_KET, W_KET, Direction, StateKind, X_AXIS, Z_AXIS, density_of, haar_ket, named_state
from seqwit.sequential import CharlieStage, averaged_channel
from seqwit.utils import run_parallel

BISEPARABLE_BOUND_CONSTANT = 0.25

LOCAL_OPERATORS = {
    "I": I2,
    "X": SX,
    "Y": SY,
    "Z": SZ,
    "Z+X": SZ + SX,
    "Z-X": SZ - SX,
    "Z+Y": SZ + SY,
    "Z-Y": SZ - SY,
    "X+Y": SX + SY,
    "X-Y": SX - SY,
}

Term = Tuple[float, str, str, str]


def _w_terms() -> Tuple[Term, ...]:
    terms: List[Term] = [
        (13, "I", "I", "I"),
        (3, "Z", "I", "I"), (3, "I", "Z", "I"), (3, "I", "I", "Z"),
        (5, "Z", "Z", "I"), (5, "Z", "I", "Z"), (5, "I", "Z", "Z"),
        (7, "Z", "Z", "Z"),
    ]
    for d in ("Z+X", "Z-X", "Z+Y", "Z-Y"):
        terms += [
            (-1, "I", "I", d), (-1, "I", d, "I"), (-1, d, "I", "I"),
            (-1, "I", d, d), (-1, d, "I", d), (-1, d, d, "I"),
            (-1, d, d, d),
        ]
    return tuple(terms)


GHZ_TERMS: Tuple[Term, ...] = (
    (3, "I", "I", "I"),
    (-1, "I", "Z", "Z"), (-1, "Z", "I", "Z"), (-1, "Z", "Z", "I"),
    (-2, "X", "X", "X"),
    (0.5, "X+Y", "X+Y", "X+Y"),
    (0.5, "X-Y", "X-Y", "X-Y"),
)

_INV_SQRT2 = 1 / math.sqrt(2)


class WitnessKind(str, Enum):
    W = "w"
    GHZ = "ghz"


class WitnessSpec(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: WitnessKind
    sharp_operator: np.ndarray
    prefactor: float
    terms: Tuple[Term, ...]
    correlation_settings: Tuple[Direction, ...]
    biseparable_bound_constant: float = BISEPARABLE_BOUND_CONSTANT

    @property
    def target_state(self) -> StateKind:
        return StateKind(self.kind.value)


class AffineWitnessValue(BaseModel):
    """Tr[W^lambda rho] = alpha - beta * lambda."""
    model_config = ConfigDict(frozen=True)

    alpha: float
    beta: float

    def value(self, lam: float) -> float:
        return self.alpha - self.beta * lam

    def root(self) -> Optional[float]:
        return self.alpha / self.beta if self.beta > 0 else None


def resum(prefactor: float, terms: Sequence[Term], sharpness: float = 1.0) -> ComplexMatrix:
    op = np.zeros((8, 8), dtype=complex)
    for coef, a, b, c in terms:
        scale = 1.0 if c == "I" else sharpness
        op += coef * scale * kron_all(LOCAL_OPERATORS[a], LOCAL_OPERATORS[b], LOCAL_OPERATORS[c])
    return prefactor * op


@lru_cache(maxsize=None)
def build_witness(kind) -> WitnessSpec:
    kind = WitnessKind(kind)
    if kind is WitnessKind.W:
        sharp = (2 / 3) * np.eye(8) - np.outer(W_KET, W_KET.conj())
        prefactor, terms = 1 / 24, _w_terms()
        settings = (
            Z_AXIS,
            Direction.from_vector([_INV_SQRT2, 0, _INV_SQRT2]),
            Direction.from_vector([-_INV_SQRT2, 0, _INV_SQRT2]),
            Direction.from_vector([0, _INV_SQRT2, _INV_SQRT2]),
            Direction.from_vector([0, -_INV_SQRT2, _INV_SQRT2]),
        )
    else:
        sharp = 0.5 * np.eye(8) - np.outer(GHZ_KET, GHZ_KET.conj())
        prefactor, terms = 1 / 8, GHZ_TERMS
        settings = (
            Z_AXIS,
            X_AXIS,
            Direction.from_vector([_INV_SQRT2, _INV_SQRT2, 0]),
            Direction.from_vector([_INV_SQRT2, -_INV_SQRT2, 0]),
        )

    mismatch = float(np.max(np.abs(resum(prefactor, terms) - sharp)))
    if mismatch > 1e-12:
        raise ValueError(f"{kind.value} witness decomposition does not resum to the witness (off by {mismatch:.2e})")
    return WitnessSpec(
        kind=kind,
        sharp_operator=sharp.astype(complex),
        prefactor=prefactor,
        terms=terms,
        correlation_settings=settings,
    )


@lru_cache(maxsize=None)
def affine_operators(kind) -> Tuple[ComplexMatrix, ComplexMatrix]:
    """(W0, W1) with W^lambda = W0 + lambda * W1."""
    spec = build_witness(kind)
    local = tuple(t for t in spec.terms if t[3] == "I")
    charlie_side = tuple(t for t in spec.terms if t[3] != "I")
    return resum(spec.prefactor, local), resum(spec.prefactor, charlie_side)


def _check_sharpness(lam: float) -> float:
    if not 0 < lam <= 1:
        raise ValueError(f"Sharpness must lie in (0, 1], got {lam}")
    return float(lam)


def unsharp_operator(spec: WitnessSpec, lam: float) -> ComplexMatrix:
    w0, w1 = affine_operators(spec.kind)
    return w0 + _check_sharpness(lam) * w1


def unsharp_expectation(spec: WitnessSpec, rho, lam: float) -> float:
    return expectation(unsharp_operator(spec, lam), density_of(rho))


def affine_coefficients(spec: WitnessSpec, rho) -> AffineWitnessValue:
    w0, w1 = affine_operators(spec.kind)
    rho = density_of(rho)
    return AffineWitnessValue(alpha=expectation(w0, rho), beta=-expectation(w1, rho))


def charlie2_closed_forms(kind, lam1: float, lam2: float) -> float:
    """Stage-2 witness value after Charlie^1 measured the witness ensemble at lam1."""
    f1 = math.sqrt(1 - _check_sharpness(lam1) ** 2)
    lam2 = _check_sharpness(lam2)
    if WitnessKind(kind) is WitnessKind.W:
        return (35 - (23 + 42 * f1) * lam2) / 90
    return (1 - (1 + 2 * f1) * lam2) / 4


def witness_stage(spec: WitnessSpec, lam: float) -> CharlieStage:
    return CharlieStage.uniform(spec.correlation_settings, lam)


def witness_chain(kind, lambdas: Sequence[float], initial=None) -> ChainReport:
    """Witness value seen by each Charlie when all of them use the witness ensemble."""
    spec = build_witness(kind)
    rho = density_of(named_state(spec.target_state) if initial is None else initial)
    values = []
    for lam in lambdas:
        values.append(unsharp_expectation(spec, rho, lam))
        rho = averaged_channel(rho, witness_stage(spec, lam))
    return ChainReport.from_values(f"witness-{spec.kind.value}", values, 0.0, violation_side="below")


# ---------------------------
# Biseparable sampling
# ---------------------------
class Bipartition(str, Enum):
    A_BC = "A|BC"
    B_AC = "B|AC"
    C_AB = "C|AB"


def _biseparable_ket(bipartition, rng: np.random.Generator) -> np.ndarray:
    single = haar_ket(rng, 2)
    pair = haar_ket(rng, 4).reshape(2, 2)
    bipartition = Bipartition(bipartition)
    if bipartition is Bipartition.A_BC:
        psi = np.einsum("a,bc->abc", single, pair)
    elif bipartition is Bipartition.B_AC:
        psi = np.einsum("b,ac->abc", single, pair)
    else:
        psi = np.einsum("c,ab->abc", single, pair)
    return psi.reshape(8)


def sample_biseparable(bipartition, seed: int) -> ComplexMatrix:
    """Pure product state across the bipartition (Haar qubit x Haar two-qubit factor)."""
    psi = _biseparable_ket(bipartition, np.random.default_rng(seed))
    return np.outer(psi, psi.conj())


class PositivityReport(BaseModel):
    kind: WitnessKind
    samples_per_bipartition: int
    lambdas: Tuple[float, ...]
    min_values: Tuple[float, ...]
    min_bound_gaps: Tuple[float, ...]
    tolerance: float = PSD_TOL

    @property
    def passed(self) -> bool:
        return all(v >= -self.tolerance for v in self.min_values + self.min_bound_gaps)


def _fuzz_shard(kind, bipartition, seed: int, samples: int, lambdas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    spec = build_witness(kind)
    rng = np.random.default_rng([seed, list(Bipartition).index(Bipartition(bipartition))])
    mins = np.full(len(lambdas), np.inf)
    gaps = np.full(len(lambdas), np.inf)
    previous = None
    for _ in range(samples):
        psi = _biseparable_ket(bipartition, rng)
        rho = np.outer(psi, psi.conj())
        candidates = [rho]
        if previous is not None:
            p = rng.uniform()
            candidates.append(p * rho + (1 - p) * previous)
        previous = rho
        for state in candidates:
            coeffs = affine_coefficients(spec, state)
            sharp = coeffs.value(1.0)
            values = coeffs.alpha - coeffs.beta * lambdas
            lower = lambdas * sharp + (1 - lambdas) * spec.biseparable_bound_constant
            mins = np.minimum(mins, values)
            gaps = np.minimum(gaps, values - lower)
    return mins, gaps


def positivity_fuzz(kind, samples: int, lambdas: Sequence[float], seed: int) -> PositivityReport:
    """Minimum unsharp witness value over pure biseparable samples and their
    pairwise mixtures, for every bipartition."""
    grid = np.array([_check_sharpness(lam) for lam in lambdas])
    shards = run_parallel(
        lambda part: _fuzz_shard(kind, part, seed, samples, grid),
        list(Bipartition),
        desc=f"Biseparable samples ({WitnessKind(kind).value})",
    )
    mins = np.min([s[0] for s in shards], axis=0)
    gaps = np.min([s[1] for s in shards], axis=0)
    return PositivityReport(
        kind=WitnessKind(kind),
        samples_per_bipartition=samples,
        lambdas=tuple(float(x) for x in grid),
        min_values=tuple(float(x) for x in mins),
        min_bound_gaps=tuple(float(x) for x in gaps),
    )

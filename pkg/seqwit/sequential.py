# sequential.py
"""Sequential Charlie chain on qubit C.

Alice and Bob measure once and never update the shared state, so they enter
only through the correlation traces.  Each Charlie's outcome- and
setting-averaged Lueders map is precomposed into Kraus operators per stage.
"""
import math
from functools import lru_cache
from itertools import product
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from seqwit.config import ORACLE_BRANCH_CAP, ORACLE_TOL, PSD_TOL
from seqwit.linalg import PAULIS, ComplexMatrix, expectation, kron_all, min_eigenvalue
from seqwit.quantum_model import (
    OUTCOMES,
    Direction,
    UnsharpMeasurement,
    density_of,
    effect,
    observable,
    projector,
    random_density,
    random_direction,
    sqrt_effect,
)
from seqwit.utils import run_parallel

I4 = np.eye(4, dtype=complex)
PAULI_PRODUCTS = np.array([kron_all(p, q, r) for p in PAULIS for q in PAULIS for r in PAULIS])


class CharlieStage(BaseModel):
    model_config = ConfigDict(frozen=True)

    settings: Tuple[UnsharpMeasurement, ...] = Field(min_length=1)
    weights: Tuple[float, ...]

    @model_validator(mode="after")
    def _consistent(self) -> "CharlieStage":
        if len(self.weights) != len(self.settings):
            raise ValueError(f"{len(self.settings)} settings but {len(self.weights)} weights")
        if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1) > 1e-12:
            raise ValueError(f"Stage weights must be a probability vector, got {self.weights}")
        sharpness = {s.sharpness for s in self.settings}
        if len(sharpness) != 1:
            raise ValueError(f"All settings of a stage share one sharpness, got {sorted(sharpness)}")
        return self

    @property
    def sharpness(self) -> float:
        return self.settings[0].sharpness

    @classmethod
    def uniform(cls, directions: Sequence[Direction], sharpness: float) -> "CharlieStage":
        n = len(directions)
        return cls(
            settings=tuple(UnsharpMeasurement(direction=d, sharpness=sharpness) for d in directions),
            weights=tuple([1.0 / n] * n),
        )


class ChainState(BaseModel):
    """Averaged state handed to Charlie^(stage_index + 1)."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    stage_index: int = Field(ge=0)
    density: np.ndarray

    @model_validator(mode="after")
    def _valid_state(self) -> "ChainState":
        if abs(np.trace(self.density) - 1) > 1e-10:
            raise ValueError(f"Chain state at stage {self.stage_index} lost unit trace")
        if min_eigenvalue(self.density) < -PSD_TOL:
            raise ValueError(f"Chain state at stage {self.stage_index} is not positive")
        return self


# ---------------------------
# Maps
# ---------------------------
def _on_c(op: ComplexMatrix) -> ComplexMatrix:
    return kron_all(I4, op)


def luders_map(rho, u: UnsharpMeasurement, outcome: int) -> ComplexMatrix:
    """Unnormalized post-measurement state; its trace is the outcome probability."""
    k = _on_c(sqrt_effect(u, outcome))
    return k @ density_of(rho) @ k


@lru_cache(maxsize=512)
def stage_kraus(stage: CharlieStage) -> Tuple[ComplexMatrix, ...]:
    return tuple(
        math.sqrt(w) * _on_c(sqrt_effect(u, o))
        for u, w in zip(stage.settings, stage.weights)
        for o in OUTCOMES
    )


def averaged_channel(rho, stage: CharlieStage) -> ComplexMatrix:
    rho = density_of(rho)
    return sum(k @ rho @ k for k in stage_kraus(stage))


def bloch_contraction(directions: np.ndarray, sharpness: float, weights=None) -> np.ndarray:
    """3x3 action of the averaged channel on qubit C's Pauli components:
    r -> F r + (1 - F) sum_s w_s n_s (n_s . r)."""
    directions = np.atleast_2d(directions)
    weights = np.full(len(directions), 1.0 / len(directions)) if weights is None else np.asarray(weights)
    f = math.sqrt(1.0 - sharpness ** 2)
    return f * np.eye(3) + (1.0 - f) * np.einsum("s,si,sj->ij", weights, directions, directions)


def stage_bloch_contraction(stage: CharlieStage) -> np.ndarray:
    dirs = np.array([u.direction.vector() for u in stage.settings])
    return bloch_contraction(dirs, stage.sharpness, stage.weights)


def stage_states(initial, stages: Sequence[CharlieStage]) -> List[ComplexMatrix]:
    """States seen by Charlie^1 .. Charlie^n (the last stage's own map is not applied)."""
    rho = density_of(initial)
    states = [rho]
    for stage in stages[:-1]:
        rho = averaged_channel(rho, stage)
        states.append(rho)
    return states


def evolve(initial, stages: Sequence[CharlieStage]) -> ChainState:
    rho = density_of(initial)
    for stage in stages:
        rho = averaged_channel(rho, stage)
    return ChainState(stage_index=len(stages), density=rho)


# ---------------------------
# Correlations
# ---------------------------
def correlation(rho, a: Direction, b: Direction, c: UnsharpMeasurement) -> float:
    op = kron_all(observable(a), observable(b), observable(c.direction))
    return c.sharpness * expectation(op, density_of(rho))


def joint_probability(rho, a: Direction, b: Direction, c: UnsharpMeasurement,
                      outcomes: Tuple[int, int, int]) -> float:
    oa, ob, oc = outcomes
    op = kron_all(projector(a, oa), projector(b, ob), effect(c, oc))
    return expectation(op, density_of(rho))


def correlation_tensor(rho) -> np.ndarray:
    """T[i, j, k] = Tr[rho sigma_i (x) sigma_j (x) sigma_k] over x, y, z."""
    values = np.einsum("nij,ji->n", PAULI_PRODUCTS, density_of(rho))
    return np.real(values).reshape(3, 3, 3)


def tensor_correlation(tensor: np.ndarray, a: Direction, b: Direction, c: UnsharpMeasurement) -> float:
    return c.sharpness * float(np.einsum("ijk,i,j,k->", tensor, a.vector(), b.vector(), c.direction.vector()))


def _check_stage_args(stages: Sequence[CharlieStage], m: int, c_setting: int) -> None:
    if not 1 <= m <= len(stages):
        raise ValueError(f"Stage index m={m} outside 1..{len(stages)}")
    if not 0 <= c_setting < len(stages[m - 1].settings):
        raise ValueError(f"c_setting={c_setting} outside 0..{len(stages[m - 1].settings) - 1}")


def chain_correlation(initial, stages: Sequence[CharlieStage], m: int,
                      a: Direction, b: Direction, c_setting: int) -> float:
    _check_stage_args(stages, m, c_setting)
    rho = evolve(initial, stages[: m - 1]).density
    return correlation(rho, a, b, stages[m - 1].settings[c_setting])


def branch_oracle_correlation(initial, stages: Sequence[CharlieStage], m: int,
                              a: Direction, b: Direction, c_setting: int) -> float:
    """Same quantity as chain_correlation by explicit enumeration of every prior
    setting and outcome, summing a*b*c*P over joint outcome probabilities."""
    _check_stage_args(stages, m, c_setting)
    prior = stages[: m - 1]
    n_branches = math.prod(len(s.settings) for s in prior)
    if n_branches > ORACLE_BRANCH_CAP:
        raise ValueError(f"Branch enumeration of {n_branches} setting paths exceeds cap {ORACLE_BRANCH_CAP}")

    rho0 = density_of(initial)
    paths = [[(u, w, o) for u, w in zip(s.settings, s.weights) for o in OUTCOMES] for s in prior]
    branch_sum = np.zeros((8, 8), dtype=complex)
    for path in product(*paths):
        # unnormalized branch state, weighted by the setting probabilities
        rho = rho0
        weight = 1.0
        for u, w, o in path:
            rho = luders_map(rho, u, o)
            weight *= w
        branch_sum = branch_sum + weight * rho

    c = stages[m - 1].settings[c_setting]
    total = 0.0
    for oa, ob, oc in product(OUTCOMES, OUTCOMES, OUTCOMES):
        total += oa * ob * oc * joint_probability(branch_sum, a, b, c, (oa, ob, oc))
    return total


# ---------------------------
# Randomized differential check
# ---------------------------
class OracleCheckReport(BaseModel):
    instances: int
    max_abs_difference: float
    tolerance: float
    differences: Tuple[float, ...]

    @property
    def passed(self) -> bool:
        return self.max_abs_difference <= self.tolerance


def _random_instance(seed: Tuple[int, int], max_stages: int):
    rng = np.random.default_rng(list(seed))
    n_stages = int(rng.integers(1, max_stages + 1))
    stages = []
    for _ in range(n_stages):
        n_settings = int(rng.integers(1, 4))
        lam = float(rng.uniform(0.05, 1.0))
        raw = rng.uniform(0.1, 1.0, size=n_settings)
        stages.append(CharlieStage(
            settings=tuple(UnsharpMeasurement(direction=random_direction(rng), sharpness=lam) for _ in range(n_settings)),
            weights=tuple(float(x) for x in raw / raw.sum()),
        ))
    rho = random_density(rng, 8)
    m = int(rng.integers(1, n_stages + 1))
    c_setting = int(rng.integers(0, len(stages[m - 1].settings)))
    return rho, stages, m, random_direction(rng), random_direction(rng), c_setting


def oracle_check(instances: int, seed: int, max_stages: int = 4, tolerance: float = ORACLE_TOL) -> OracleCheckReport:
    def run_one(i: int) -> float:
        rho, stages, m, a, b, c_setting = _random_instance((seed, i), max_stages)
        fast = chain_correlation(rho, stages, m, a, b, c_setting)
        slow = branch_oracle_correlation(rho, stages, m, a, b, c_setting)
        return abs(fast - slow)

    diffs = run_parallel(run_one, list(range(instances)), desc="Oracle instances")
    return OracleCheckReport(
        instances=instances,
        max_abs_difference=max(diffs) if diffs else 0.0,
        tolerance=tolerance,
        differences=tuple(diffs),
    )

# inequalities.py
import math
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import brentq

from seqwit.quantum_model import Direction, StateKind, X_AXIS, Y_AXIS, named_state
from seqwit.sequential import CharlieStage, correlation_tensor, stage_states

MERMIN_BOUND = 2 * math.sqrt(2)
UFFINK_BOUND = 8.0

# (alice setting, bob setting, charlie setting, sign)
MERMIN_TERMS = ((1, 0, 0, 1.0), (0, 1, 0, 1.0), (0, 0, 1, 1.0), (1, 1, 1, -1.0))
UFFINK_SECOND_TERMS = ((1, 1, 0, 1.0), (0, 1, 1, 1.0), (1, 0, 1, 1.0), (0, 0, 0, -1.0))

# setting 0 along y, setting 1 along x for every party
SYMMETRIC_SETTINGS = (Y_AXIS, X_AXIS)


# ---------------------------
# Plans and reports
# ---------------------------
class CharlieSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    directions: Tuple[Direction, Direction]
    sharpness: float = Field(gt=0.0, le=1.0)


class MeasurementPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    alice: Tuple[Direction, Direction]
    bob: Tuple[Direction, Direction]
    charlies: Tuple[CharlieSettings, ...] = Field(min_length=1)

    def stages(self) -> List[CharlieStage]:
        return [CharlieStage.uniform(c.directions, c.sharpness) for c in self.charlies]

    @property
    def sharpness(self) -> Tuple[float, ...]:
        return tuple(c.sharpness for c in self.charlies)

    @classmethod
    def symmetric(cls, lambdas: Sequence[float]) -> "MeasurementPlan":
        return cls(
            alice=SYMMETRIC_SETTINGS,
            bob=SYMMETRIC_SETTINGS,
            charlies=tuple(CharlieSettings(directions=SYMMETRIC_SETTINGS, sharpness=lam) for lam in lambdas),
        )

    @classmethod
    def from_angles(cls, angles: Sequence[float], lambdas: Sequence[float]) -> "MeasurementPlan":
        """angles = (theta0, phi0, theta1, phi1) for Alice, Bob, then each Charlie."""
        expected = 8 + 4 * len(lambdas)
        if len(angles) != expected:
            raise ValueError(f"Expected {expected} angles for {len(lambdas)} Charlies, got {len(angles)}")
        pairs = [
            (Direction.canonical(angles[k], angles[k + 1]), Direction.canonical(angles[k + 2], angles[k + 3]))
            for k in range(0, expected, 4)
        ]
        return cls(
            alice=pairs[0],
            bob=pairs[1],
            charlies=tuple(CharlieSettings(directions=p, sharpness=lam) for p, lam in zip(pairs[2:], lambdas)),
        )

    def angles(self) -> List[float]:
        pairs = [self.alice, self.bob] + [c.directions for c in self.charlies]
        return [x for pair in pairs for d in pair for x in (d.theta, d.phi)]


def percent_violation(value: float, bound: float) -> Optional[float]:
    if bound == 0:
        return None
    return 100.0 * (value - bound) / bound


class ChainReport(BaseModel):
    quantity: str
    values: Tuple[float, ...]
    bound: float
    verdicts: Tuple[bool, ...]
    violation_side: Literal["above", "below"] = "above"

    @model_validator(mode="after")
    def _verdicts_follow_values(self) -> "ChainReport":
        expected = tuple(self._violates(v) for v in self.values)
        if self.verdicts != expected:
            raise ValueError(f"Verdicts {self.verdicts} do not match values against bound {self.bound}")
        return self

    def _violates(self, value: float) -> bool:
        return value > self.bound if self.violation_side == "above" else value < self.bound

    @classmethod
    def from_values(cls, quantity: str, values: Sequence[float], bound: float,
                    violation_side: str = "above") -> "ChainReport":
        values = tuple(float(v) for v in values)
        side_above = violation_side == "above"
        verdicts = tuple((v > bound) if side_above else (v < bound) for v in values)
        return cls(quantity=quantity, values=values, bound=bound, verdicts=verdicts, violation_side=violation_side)

    @property
    def percent_violations(self) -> List[Optional[float]]:
        return [percent_violation(v, self.bound) for v in self.values]


# ---------------------------
# Evaluation
# ---------------------------
def _initial_or_ghz(initial):
    return named_state(StateKind.GHZ) if initial is None else initial


def averaged_correlators(plan: MeasurementPlan, initial=None) -> np.ndarray:
    """C[m, i, j, k]: setting-averaged correlator seen by Charlie^(m+1)."""
    stages = plan.stages()
    alice = np.array([d.vector() for d in plan.alice])
    bob = np.array([d.vector() for d in plan.bob])
    out = np.empty((len(stages), 2, 2, 2))
    for m, (rho, charlie) in enumerate(zip(stage_states(_initial_or_ghz(initial), stages), plan.charlies)):
        charlie_dirs = np.array([d.vector() for d in charlie.directions])
        out[m] = charlie.sharpness * np.einsum("xyz,ix,jy,kz->ijk", correlation_tensor(rho), alice, bob, charlie_dirs)
    return out


def _bracket(correlators: np.ndarray, terms) -> np.ndarray:
    return sum(sign * correlators[:, i, j, k] for i, j, k, sign in terms)


def mermin_values(correlators: np.ndarray) -> np.ndarray:
    return np.abs(_bracket(correlators, MERMIN_TERMS))


def uffink_values(correlators: np.ndarray) -> np.ndarray:
    return _bracket(correlators, MERMIN_TERMS) ** 2 + _bracket(correlators, UFFINK_SECOND_TERMS) ** 2


def mermin_chain(plan: MeasurementPlan, initial=None) -> ChainReport:
    return ChainReport.from_values("mermin", mermin_values(averaged_correlators(plan, initial)), MERMIN_BOUND)


def uffink_chain(plan: MeasurementPlan, initial=None) -> ChainReport:
    return ChainReport.from_values("uffink", uffink_values(averaged_correlators(plan, initial)), UFFINK_BOUND)


def _symmetric_mermin(lambdas: Sequence[float], initial) -> np.ndarray:
    return mermin_values(averaged_correlators(MeasurementPlan.symmetric(lambdas), initial))


def single_charlie_threshold(initial=None) -> float:
    """Smallest lambda_1 at which a lone Charlie violates Mermin at symmetric settings."""
    initial = _initial_or_ghz(initial)
    return brentq(lambda lam: _symmetric_mermin([lam], initial)[0] - MERMIN_BOUND, 1e-6, 1.0, xtol=1e-14)


def violation_window(initial=None) -> Tuple[float, float]:
    """lambda_1 interval where Charlie^1 and a sharp Charlie^2 both violate Mermin."""
    initial = _initial_or_ghz(initial)
    low = brentq(lambda lam: _symmetric_mermin([lam, 1.0], initial)[0] - MERMIN_BOUND, 1e-6, 1.0, xtol=1e-14)
    high = brentq(lambda lam: _symmetric_mermin([lam, 1.0], initial)[1] - MERMIN_BOUND, low, 1.0, xtol=1e-14)
    return low, high

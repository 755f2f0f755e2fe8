# quantum_model.py
import math
from enum import Enum
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from seqwit.linalg import ComplexMatrix, I2, PAULIS, purity
from seqwit.utils import l2_normalize

Outcome = Literal[1, -1]
OUTCOMES = (1, -1)


class StateKind(str, Enum):
    GHZ = "ghz"
    W = "w"


# ---------------------------
# Directions and measurements
# ---------------------------
class Direction(BaseModel):
    """Spin measurement direction in spherical angles (radians)."""
    model_config = ConfigDict(frozen=True)

    theta: float = Field(ge=0.0, le=math.pi)
    phi: float = Field(ge=0.0, le=2 * math.pi)

    def vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])

    @classmethod
    def from_vector(cls, v) -> "Direction":
        n = l2_normalize(v)
        theta = math.acos(max(-1.0, min(1.0, float(n[2]))))
        phi = math.atan2(float(n[1]), float(n[0])) % (2 * math.pi)
        return cls(theta=theta, phi=phi)

    @classmethod
    def canonical(cls, theta: float, phi: float) -> "Direction":
        """Same unit vector as arbitrary real angles, mapped into the canonical ranges."""
        st = math.sin(theta)
        return cls.from_vector([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])


X_AXIS = Direction(theta=math.pi / 2, phi=0.0)
Y_AXIS = Direction(theta=math.pi / 2, phi=math.pi / 2)
Z_AXIS = Direction(theta=0.0, phi=0.0)


class UnsharpMeasurement(BaseModel):
    model_config = ConfigDict(frozen=True)

    direction: Direction
    sharpness: float = Field(gt=0.0, le=1.0)

    @property
    def quality_factor(self) -> float:
        """F = sqrt(1 - lambda^2): how much of the pre-measurement state survives."""
        return math.sqrt(1.0 - self.sharpness ** 2)

    @property
    def precision(self) -> float:
        return self.sharpness


def _check_outcome(outcome: int) -> int:
    if outcome not in OUTCOMES:
        raise ValueError(f"Outcome must be +1 or -1, got {outcome!r}")
    return int(outcome)


def observable(d: Direction) -> ComplexMatrix:
    return np.einsum("k,kij->ij", d.vector(), PAULIS)


def projector(d: Direction, outcome: Outcome) -> ComplexMatrix:
    return (I2 + _check_outcome(outcome) * observable(d)) / 2


def effect(u: UnsharpMeasurement, outcome: Outcome) -> ComplexMatrix:
    lam = u.sharpness
    return lam * projector(u.direction, outcome) + (1 - lam) * I2 / 2


def sqrt_effect(u: UnsharpMeasurement, outcome: Outcome) -> ComplexMatrix:
    # sqrt((1+l)/2) P_o + sqrt((1-l)/2) P_-o, exact for the two-projector spectral form
    lam = u.sharpness
    return (math.sqrt((1 + lam) / 2) * projector(u.direction, outcome)
            + math.sqrt((1 - lam) / 2) * projector(u.direction, -outcome))


# ---------------------------
# Named three-qubit states
# ---------------------------
def _ket(amplitudes: dict) -> np.ndarray:
    psi = np.zeros(8, dtype=complex)
    for bits, amp in amplitudes.items():
        psi[int(bits, 2)] = amp
    return psi


GHZ_KET = _ket({"000": 1 / math.sqrt(2), "111": 1 / math.sqrt(2)})
W_KET = _ket({"001": 1 / math.sqrt(3), "010": 1 / math.sqrt(3), "100": 1 / math.sqrt(3)})


class NamedState(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: StateKind
    density: np.ndarray

    @field_validator("density")
    @classmethod
    def _pure_density(cls, v: np.ndarray) -> np.ndarray:
        if v.shape != (8, 8):
            raise ValueError(f"Named states are 8x8, got {v.shape}")
        if abs(np.trace(v) - 1) > 1e-12 or abs(purity(v) - 1) > 1e-12:
            raise ValueError("Named state must be a pure, unit-trace density operator")
        return v


def named_state(kind) -> NamedState:
    kind = StateKind(kind)
    psi = GHZ_KET if kind is StateKind.GHZ else W_KET
    return NamedState(kind=kind, density=np.outer(psi, psi.conj()))


def density_of(state) -> ComplexMatrix:
    """Accept a NamedState or a raw density matrix."""
    if isinstance(state, NamedState):
        return state.density
    return np.asarray(state, dtype=complex)


# ---------------------------
# Random states
# ---------------------------
def haar_ket(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-random pure state from normalized complex Gaussian amplitudes."""
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def random_density(rng: np.random.Generator, dim: int = 8, rank: int = None) -> ComplexMatrix:
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_direction(rng: np.random.Generator) -> Direction:
    return Direction.from_vector(rng.normal(size=3))

from fractions import Fraction
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    WithJsonSchema,
    field_validator,
    model_validator,
)

from app.config import DEFAULT_DRIFT_BOUND, DEFAULT_PRECISION_BITS, DEFAULT_SEED

"""
RUN CONFIGURATIONS
- Exact inputs are fractions; JSON carries them as strings ("3/2") or numbers
- Validators enforce the domain invariants (positive masses, omega>0 or A>0, ...)
"""

RHO_NAMES = ("rho12", "rho13", "rho14", "rho23", "rho24", "rho34")


def _to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers here")
    if isinstance(value, float):
        return Fraction(str(value))
    try:
        return Fraction(value)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"not an exact number: {value!r}") from exc


ExactNumber = Annotated[
    Fraction,
    BeforeValidator(_to_fraction),
    PlainSerializer(str, return_type=str),
    WithJsonSchema({"type": "string", "examples": ["1", "3/2"]}),
]


class ExactModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class RhoPoint(ExactModel):
    rho12: ExactNumber
    rho13: ExactNumber
    rho14: ExactNumber
    rho23: ExactNumber
    rho24: ExactNumber
    rho34: ExactNumber

    @field_validator(*RHO_NAMES)
    @classmethod
    def _nonnegative(cls, value: Fraction) -> Fraction:
        if value < 0:
            raise ValueError("squared distances are nonnegative")
        return value

    def values(self) -> Tuple[Fraction, ...]:
        return tuple(getattr(self, name) for name in RHO_NAMES)

    def as_mapping(self) -> dict:
        return dict(zip(RHO_NAMES, self.values()))

    @classmethod
    def from_values(cls, values) -> "RhoPoint":
        return cls(**dict(zip(RHO_NAMES, values)))

    @classmethod
    def from_coordinates(cls, rows) -> "RhoPoint":
        """Four coordinate rows (any dimension) to squared distances."""
        if len(rows) != 4:
            raise ValueError("need exactly four points")
        pts = [[_to_fraction(x) for x in row] for row in rows]
        out = []
        for i in range(4):
            for j in range(i + 1, 4):
                out.append(sum((a - b) ** 2 for a, b in zip(pts[i], pts[j])))
        return cls.from_values(out)


class MassWeights(ExactModel):
    m1: ExactNumber = Fraction(1)
    m2: ExactNumber = Fraction(1)
    m3: ExactNumber = Fraction(1)
    m4: ExactNumber = Fraction(1)

    @field_validator("m1", "m2", "m3", "m4")
    @classmethod
    def _positive(cls, value: Fraction) -> Fraction:
        if value <= 0:
            raise ValueError("masses must be positive")
        return value

    def masses(self) -> Tuple[Fraction, ...]:
        return (self.m1, self.m2, self.m3, self.m4)

    @property
    def total(self) -> Fraction:
        return sum(self.masses(), Fraction(0))

    @property
    def product(self) -> Fraction:
        out = Fraction(1)
        for m in self.masses():
            out *= m
        return out

    def reduced(self, i: int, j: int) -> Fraction:
        """mu_ij for 1-based particle labels."""
        mi, mj = self.masses()[i - 1], self.masses()[j - 1]
        return mi * mj / (mi + mj)

    @classmethod
    def parse(cls, text: str) -> "MassWeights":
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if len(parts) != 4:
            raise ValueError("--masses needs four comma-separated values")
        return cls(m1=parts[0], m2=parts[1], m3=parts[2], m4=parts[3])


class QESConfig(ExactModel):
    gamma: ExactNumber = Fraction(0)
    omega: ExactNumber = Fraction(1)
    A: ExactNumber = Fraction(0)
    N: int = Field(0, ge=0)
    d: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _normalizable(self) -> "QESConfig":
        if self.omega < 0 or self.A < 0:
            raise ValueError("omega and A must be nonnegative")
        if self.omega == 0 and self.A == 0:
            raise ValueError("need omega > 0, or A > 0 when omega = 0")
        return self


class PhasePoint(BaseModel):
    position: List[float]
    momenta: List[float]
    time: float = 0.0

    @model_validator(mode="after")
    def _same_length(self) -> "PhasePoint":
        if len(self.position) != len(self.momenta):
            raise ValueError("position and momenta must have the same length")
        return self


class TrajectoryConfig(BaseModel):
    space: Literal["rho", "volume", "P"] = "rho"
    potential: Literal["harmonic", "es", "none", "custom"] = "harmonic"
    custom_potential: Optional[str] = None
    include_effective: bool = True
    d: int = Field(3, ge=1)
    omega: float = Field(1.0, ge=0)
    gamma: float = 0.0
    initial: PhasePoint
    method: Literal["rk4", "stormer-verlet"] = "rk4"
    dt: float = Field(1e-3, gt=0)
    steps: int = Field(1000, ge=1)
    drift_bound: Optional[float] = Field(DEFAULT_DRIFT_BOUND, gt=0)

    @model_validator(mode="after")
    def _dimension(self) -> "TrajectoryConfig":
        expected = {"rho": 6, "volume": 3, "P": 1}[self.space]
        if len(self.initial.position) != expected:
            raise ValueError(f"{self.space} space needs {expected} coordinates")
        if self.potential == "custom" and not self.custom_potential:
            raise ValueError("custom potential needs an expression")
        return self


class RunConfig(ExactModel):
    command: Literal["verify", "catalog", "spectrum", "potentials", "trajectory", "nbody-derive", "geometry"]
    d: Optional[int] = Field(None, ge=1)
    gamma: ExactNumber = Fraction(0)
    omega: ExactNumber = Fraction(1)
    A: ExactNumber = Fraction(0)
    N: int = Field(0, ge=0)
    masses: Optional[MassWeights] = None
    precision_bits: int = Field(DEFAULT_PRECISION_BITS, ge=53)
    seed: int = DEFAULT_SEED
    out: Optional[Path] = None
    config_file: Optional[Path] = None

    @field_validator("config_file")
    @classmethod
    def _exists(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and not value.exists():
            raise ValueError(f"{value} does not exist")
        return value

    def qes(self) -> QESConfig:
        return QESConfig(gamma=self.gamma, omega=self.omega, A=self.A, N=self.N, d=self.d)

from typing import Optional

from pydantic import BaseModel, Field

from app.config import DEFAULT_PRECISION_BITS
from app.schemas.configs import MassWeights, QESConfig, RhoPoint


class SpectrumRequest(QESConfig):
    precision_bits: int = Field(DEFAULT_PRECISION_BITS, ge=53)


class PotentialsRequest(QESConfig):
    point: Optional[RhoPoint] = None


class GeometryRequest(BaseModel):
    point: RhoPoint
    masses: Optional[MassWeights] = None


class VerifyRequest(BaseModel):
    seed: Optional[int] = None
    fast: bool = True

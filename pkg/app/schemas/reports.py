from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, computed_field, field_validator

from app.config import REPORT_SCHEMA_VERSION


def plain_witness(value: Any) -> Any:
    """JSON-safe copy; Fractions, ring elements and tuple keys become their text."""
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, dict):
        return {k if isinstance(k, str) else str(k): plain_witness(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        return [plain_witness(v) for v in value]
    return str(value)


class ResidualReport(BaseModel):
    """Outcome of a residual sweep (pushforward monomials, oracle trials)."""

    name: str
    passed: bool
    checked: int
    failures: List[str] = []


class IdentityResult(BaseModel):
    name: str
    passed: bool
    detail: Optional[str] = None
    witness: Optional[Any] = None
    elapsed_ms: Optional[float] = None

    @field_validator("witness", mode="before")
    @classmethod
    def _plain(cls, value: Any) -> Any:
        return plain_witness(value)


class Finding(BaseModel):
    """A measured value reported next to the printed one, never asserted."""

    name: str
    measured: str
    printed: str
    agrees: bool
    note: Optional[str] = None


class SuiteReport(BaseModel):
    schema_version: str = REPORT_SCHEMA_VERSION
    suite: str
    seed: int
    results: List[IdentityResult] = []
    findings: List[Finding] = []
    elapsed_ms: Optional[float] = None

    @computed_field
    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[IdentityResult]:
        return [r for r in self.results if not r.passed]


class CatalogSummary(BaseModel):
    identifier: str
    citation: str
    variables: List[str]
    parameters: List[str]
    order: int
    identities: List[str] = []


class CatalogDetail(CatalogSummary):
    operator: str
    determinant: Optional[str] = None
    certificate_constant: Optional[str] = None
    verified_by: List[str] = []


class SpectrumLevel(BaseModel):
    level: int
    eigenvalue_exact: Optional[str] = None
    eigenvalue: float
    multiplicity: int


class SpectrumReport(BaseModel):
    schema_version: str = REPORT_SCHEMA_VERSION
    gamma: str
    omega: str
    A: str
    N: int
    dimension: int
    ground_energy: str
    levels: List[SpectrumLevel]
    triangular: bool
    measured_spacing: Optional[str] = None
    printed_spacing: Optional[str] = None
    eigenvalues: List[float] = []
    crosscheck_gap: Optional[float] = None
    max_imaginary_ratio: Optional[float] = None
    elapsed_ms: Optional[float] = None


class PotentialsReport(BaseModel):
    schema_version: str = REPORT_SCHEMA_VERSION
    potentials: Dict[str, str]
    values: Dict[str, Optional[str]] = {}
    relative_identity: bool
    relative_free_of_F2: bool
    elapsed_ms: Optional[float] = None


class GeometryReport(BaseModel):
    schema_version: str = REPORT_SCHEMA_VERSION
    volume_sq: str
    S: str
    P: str
    F1: str
    F2: str
    F2_printed: str
    u: List[str]
    classification: str
    face_heron: List[str]
    masses: Optional[Dict[str, str]] = None
    elapsed_ms: Optional[float] = None


class NBodyTable(BaseModel):
    schema_version: str = REPORT_SCHEMA_VERSION
    n: int
    variables: List[str]
    slots: Dict[str, str]
    known_slots_match: Dict[str, bool]
    residual_degree: int
    residual_zero: bool
    undetermined: List[str] = []
    operator: str
    elapsed_ms: Optional[float] = None


class TrajectorySummary(BaseModel):
    schema_version: str = REPORT_SCHEMA_VERSION
    steps_taken: int
    terminated_at_boundary: bool
    max_relative_drift: float
    final_time: float
    csv_path: Optional[str] = None
    elapsed_ms: Optional[float] = None


class HealthResponse(BaseModel):
    status: str = "ok"
    catalog_entries: int
    suites: List[str] = Field(default_factory=list)


class EigenformVerdict(BaseModel):
    point: List[str]
    verdict: str
    max_residual: Optional[float] = None
    detail: Optional[str] = None


class OrthogonalityReport(BaseModel):
    schema_version: str = REPORT_SCHEMA_VERSION
    samples: int
    accepted: int
    labels: List[str]
    gram: List[List[float]]
    max_cross_level_ratio: Optional[float] = None
    elapsed_ms: Optional[float] = None

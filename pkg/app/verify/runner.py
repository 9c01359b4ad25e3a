import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from app.config import Settings, get_settings
from app.errors import Quad4Error
from app.schemas.reports import Finding, IdentityResult, ResidualReport

"""
IDENTITY RUNNER
A check is a callable taking the SuiteContext and returning one of
- bool
- ResidualReport, or a list of them (all must pass)
- (bool, detail) or (bool, detail, witness)
Quad4Error raised inside a check becomes a failed result carrying its witness.
Findings (measured vs printed, not asserted) are collected on the context.
"""

logger = logging.getLogger(__name__)

Outcome = Union[bool, ResidualReport, Sequence[ResidualReport], Tuple]
Check = Callable[["SuiteContext"], Outcome]

MAX_WITNESSES = 3


@dataclass
class SuiteContext:
    seed: int
    oracle_trials: int
    oracle_dimensions: Tuple[int, ...]
    pushforward_degree: int
    mc_samples: int
    precision_bits: int
    eigenform_points: int
    drift_bound: float
    fast: bool = False
    findings: List[Finding] = field(default_factory=list)

    @classmethod
    def from_settings(cls, settings: Optional[Settings] = None, fast: bool = False, **overrides) -> "SuiteContext":
        from app.config import DEFAULT_ORACLE_DIMENSIONS

        s = settings or get_settings()
        values = dict(
            seed=s.seed,
            oracle_trials=s.oracle_trials,
            oracle_dimensions=DEFAULT_ORACLE_DIMENSIONS,
            pushforward_degree=s.pushforward_degree,
            mc_samples=s.mc_samples,
            precision_bits=s.precision_bits,
            eigenform_points=s.eigenform_points,
            drift_bound=s.drift_bound,
            fast=fast,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def finding(self, name: str, measured: Any, printed: Any, note: Optional[str] = None) -> Finding:
        measured, printed = str(measured), str(printed)
        item = Finding(name=name, measured=measured, printed=printed, agrees=measured == printed, note=note)
        self.findings.append(item)
        level = logging.INFO if item.agrees else logging.WARNING
        logger.log(level, "[VERIFY] finding %s: measured %s, printed %s", name, measured, printed)
        return item


def _normalize(outcome: Outcome) -> Tuple[bool, Optional[str], Any]:
    if isinstance(outcome, bool):
        return outcome, None, None
    if isinstance(outcome, ResidualReport):
        outcome = [outcome]
    if isinstance(outcome, tuple):
        passed, detail, *rest = outcome
        return bool(passed), detail, rest[0] if rest else None
    reports = list(outcome)
    failures = [f"{r.name}: {f}" for r in reports for f in r.failures]
    detail = "; ".join(f"{r.name} ({r.checked} checked)" for r in reports)
    return all(r.passed for r in reports), detail, failures[:MAX_WITNESSES] or None


def run_check(name: str, check: Check, ctx: SuiteContext) -> IdentityResult:
    start = time.perf_counter()
    try:
        passed, detail, witness = _normalize(check(ctx))
    except Quad4Error as exc:
        passed, detail, witness = False, f"{type(exc).__name__}: {exc}", exc.witness
    elapsed = (time.perf_counter() - start) * 1000
    status = "PASS" if passed else "FAIL"
    logger.info("[VERIFY] %s %s (%.0f ms)", status, name, elapsed)
    return IdentityResult(name=name, passed=passed, detail=detail, witness=witness, elapsed_ms=round(elapsed, 2))


def run_checks(checks: Dict[str, Check], ctx: SuiteContext) -> List[IdentityResult]:
    return [run_check(name, check, ctx) for name, check in checks.items()]

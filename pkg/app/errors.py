"""
ERROR HIERARCHY
Every failure the toolkit raises on purpose derives from Quad4Error so the
CLI and the HTTP layer can map it to an exit code / status in one place.
"""

from typing import Any, Optional


class Quad4Error(Exception):
    """Base class; `witness` carries a serializable counterexample when one exists."""

    def __init__(self, message: str, witness: Optional[Any] = None):
        super().__init__(message)
        self.witness = witness


class ConfigError(Quad4Error):
    pass


class RegistryMismatchError(Quad4Error):
    pass


class BoundaryError(Quad4Error):
    """A denominator vanished at an evaluation point, or a point left the configuration space."""


class DegenerateMetricError(Quad4Error):
    pass


class FactorizationError(Quad4Error):
    pass


class InvarianceError(Quad4Error):
    """An operator image escaped the polynomial space it should preserve."""


class AnsatzError(Quad4Error):
    pass


class EnergyDriftError(Quad4Error):
    def __init__(self, message: str, step: int, drift: float):
        super().__init__(message, witness={"step": step, "drift": drift})
        self.step = step
        self.drift = drift


class ConvergenceError(Quad4Error):
    pass


class UnknownEntryError(Quad4Error):
    pass


class NotAnEigenvectorError(Quad4Error):
    pass


class UnverifiedEntryError(Quad4Error):
    """A catalog entry failed one of its attached identities and is not served."""

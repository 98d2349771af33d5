"""Module for verification reports: named residual checks measured against a tolerance."""
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Tuple


@dataclass(frozen=True)
class CheckResult:
    """Maximal residual observed for one named identity.

    With ``lower_bound`` set the value is a quantity that must exceed tol
    (a smallest singular value, say) rather than a residual bounded by it.
    """

    name: str
    residual: float
    tol: float
    lower_bound: bool = False

    @property
    def passed(self) -> bool:
        # NaN compares False either way and therefore fails.
        if self.lower_bound:
            return self.residual > self.tol
        return self.residual <= self.tol

    @property
    def violation(self) -> float:
        """A residual that exceeds tol exactly when the check fails."""
        if self.lower_bound:
            return 1.0 / max(self.residual, 1e-300)
        return self.residual


@dataclass(frozen=True)
class VerificationReport:
    checks: Tuple[CheckResult, ...]

    @classmethod
    def from_residuals(cls, residuals: Dict[str, float], tol: float) -> "VerificationReport":
        """Build a report from check names mapped to their maximal residuals, keeping insertion order."""
        return cls(tuple(CheckResult(name, float(value), tol) for name, value in residuals.items()))

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def first_failure(self) -> Optional[CheckResult]:
        for check in self.checks:
            if not check.passed:
                return check
        return None

    def residual(self, name: str) -> float:
        for check in self.checks:
            if check.name == name:
                return check.residual
        raise KeyError(name)

    def merged(self, others: Iterable["VerificationReport"]) -> "VerificationReport":
        checks = list(self.checks)
        for other in others:
            checks.extend(other.checks)
        return VerificationReport(tuple(checks))

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": {
                check.name: {"min_value" if check.lower_bound else "max_residual": json_number(check.residual),
                             "tol": check.tol, "passed": check.passed}
                for check in self.checks
            },
        }


class ResidualTracker:
    """Accumulate the maximum residual per check name across trials."""

    def __init__(self, *names: str) -> None:
        self._residuals: Dict[str, float] = {name: 0.0 for name in names}

    def record(self, name: str, value: float) -> None:
        current = self._residuals.get(name, 0.0)
        # max() would drop a NaN that arrives second
        if value != value or value > current:
            self._residuals[name] = float(value)
        else:
            self._residuals.setdefault(name, current)

    def report(self, tol: float) -> VerificationReport:
        return VerificationReport.from_residuals(self._residuals, tol)


def json_number(value: float) -> Optional[float]:
    """Return the value, or None where JSON has no literal for it (NaN and the infinities)."""
    return float(value) if math.isfinite(value) else None

"""Shared parameter types, run configuration, and config validation.

Every computation path (closed forms, grid oracles, Fock-basis simulation)
consumes the same small set of immutable value types defined here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class FeasibilityError(ValueError):
    """Raised when a formula or oracle is evaluated outside its validity domain.

    The CHSH optimizer treats points that raise this as infeasible rather
    than as fatal errors.
    """


class ResourceKind(str, Enum):
    SPLIT_SQUEEZED_VACUUM = "split-squeezed-vacuum"
    SPLIT_SQUEEZED_THERMAL = "split-squeezed-thermal"
    TWO_MODE_SQUEEZED_VACUUM = "two-mode-squeezed-vacuum"


class RotationKind(str, Enum):
    IDEAL = "ideal"
    PHYSICAL = "physical"


# Brute-force (oracle) paths need a strictly positive squeezing: at r -> 0 the
# +/- coherent-pair basis degenerates and the idealized rotation is undefined.
ORACLE_MIN_SQUEEZING = 0.05


@dataclass(frozen=True)
class ResourceSpec:
    """Which two-mode Gaussian resource to test, plus its parameters.

    ``v`` (thermal variance, V = 2*nbar + 1 >= 1) and ``center`` (real
    phase-space displacement of the thermal weight) apply only to the
    split-squeezed-thermal kind and must be None otherwise.
    """

    kind: ResourceKind
    r: float
    v: float | None = None
    center: float | None = None


@dataclass(frozen=True)
class RotationSpec:
    """Local rotation family: idealized two-state rotations or the physical
    Kerr + displacement + Kerr composition.

    ``d`` sets the displacement amplitude i*theta/d of the physical rotation
    and must be None for the ideal kind.
    """

    kind: RotationKind
    d: float | None = None


@dataclass(frozen=True)
class AngleQuad:
    """The four CHSH measurement angles (theta_a, theta_b, theta_a', theta_b')."""

    theta_a: float
    theta_b: float
    theta_a2: float
    theta_b2: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.theta_a, self.theta_b, self.theta_a2, self.theta_b2)


@dataclass(frozen=True)
class ConfigError:
    """One violated invariant: a machine-readable code plus a human message."""

    code: str
    message: str


def _finite(value: float | None) -> bool:
    return value is not None and math.isfinite(value)


def validate_config(resource: ResourceSpec, rotation: RotationSpec, eta: float) -> list[ConfigError]:
    """Check every invariant of a run configuration.

    Returns the full list of violations (empty list means valid). Never
    raises: this function is total so callers can report all problems at once.
    """
    errors: list[ConfigError] = []

    if not _finite(resource.r):
        errors.append(ConfigError("r.nonfinite", "squeezing parameter r must be finite"))
    elif resource.r < 0:
        errors.append(ConfigError("r.negative", f"squeezing parameter r must be >= 0, got {resource.r}"))

    if resource.kind is ResourceKind.SPLIT_SQUEEZED_THERMAL:
        if resource.v is None:
            errors.append(ConfigError("v.missing", "thermal resource requires a thermal variance V"))
        elif not _finite(resource.v):
            errors.append(ConfigError("v.nonfinite", "thermal variance V must be finite"))
        elif resource.v < 1.0:
            errors.append(ConfigError("v.too-small", f"thermal variance must satisfy V >= 1, got {resource.v}"))
        if resource.center is not None and not _finite(resource.center):
            errors.append(ConfigError("center.nonfinite", "thermal center must be finite"))
    else:
        if resource.v is not None:
            errors.append(ConfigError("v.unexpected", "thermal variance only applies to the split-squeezed-thermal resource"))
        if resource.center is not None:
            errors.append(ConfigError("center.unexpected", "thermal center only applies to the split-squeezed-thermal resource"))

    if rotation.kind is RotationKind.PHYSICAL:
        if rotation.d is None:
            errors.append(ConfigError("d.missing", "physical rotation requires a displacement scale d"))
        elif not _finite(rotation.d):
            errors.append(ConfigError("d.nonfinite", "displacement scale d must be finite"))
        elif rotation.d <= 0:
            errors.append(ConfigError("d.nonpositive", f"d must be positive, got {rotation.d}"))
    else:
        if rotation.d is not None:
            errors.append(ConfigError("d.unexpected", "displacement scale only applies to the physical rotation"))

    if not _finite(eta):
        errors.append(ConfigError("eta.nonfinite", "detection efficiency eta must be finite"))
    elif not 0.0 < eta <= 1.0:
        errors.append(ConfigError("eta.range", f"detection efficiency must satisfy 0 < eta <= 1, got {eta}"))

    return errors

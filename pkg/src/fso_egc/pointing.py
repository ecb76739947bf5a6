"""Zero-boresight pointing-error model.

The misalignment gain ``y`` of one aperture has density
``xi^2 / A0^(xi^2) * y^(xi^2 - 1)`` on ``[0, A0]``.  ``xi = inf`` is the
no-pointing-error limit, a point mass at ``y = A0 = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def a0_from_geometry(r: float, w_z: float) -> float:
    """Pointing-loss constant ``A0 = erf(sqrt(pi) r / (sqrt(2) w_z))^2``."""
    if not (r > 0 and w_z > 0):
        raise DomainError(f"aperture radius and beam waist must be positive, got r={r!r}, w_z={w_z!r}")
    return math.erf(math.sqrt(math.pi) * r / (math.sqrt(2.0) * w_z)) ** 2


@dataclass(frozen=True)
class PointingModel:
    xi: float
    a0: float

    def __post_init__(self):
        if not self.xi > 0:
            raise DomainError(f"xi must be positive, got {self.xi!r}")
        if math.isinf(self.xi):
            object.__setattr__(self, "a0", 1.0)
        elif not 0 < self.a0 <= 1:
            raise DomainError(f"a0 must lie in (0, 1], got {self.a0!r}")

    @classmethod
    def from_geometry(cls, xi: float, r: float, w_z: float) -> "PointingModel":
        return cls(xi, a0_from_geometry(r, w_z))

    @classmethod
    def none(cls) -> "PointingModel":
        """No pointing error: ``xi = inf``, ``A0 = 1``."""
        return cls(math.inf, 1.0)

    @property
    def is_degenerate(self) -> bool:
        return math.isinf(self.xi)

    @property
    def xi2(self) -> float:
        return self.xi * self.xi

    def mean(self) -> float:
        if self.is_degenerate:
            return self.a0
        return self.a0 * self.xi2 / (self.xi2 + 1.0)

    def to_dict(self) -> dict:
        xi = "inf" if self.is_degenerate else self.xi
        return {"xi": xi, "a0": self.a0}

    @classmethod
    def from_dict(cls, doc: dict) -> "PointingModel":
        """Accepts ``{"xi", "a0"}`` or ``{"xi", "r", "wz"}``."""
        try:
            xi = float(doc["xi"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"pointing block needs a numeric 'xi': {exc}") from None
        if math.isinf(xi):
            return cls.none()
        if "a0" in doc:
            return cls(xi, float(doc["a0"]))
        if "r" in doc and "wz" in doc:
            return cls.from_geometry(xi, float(doc["r"]), float(doc["wz"]))
        raise DomainError("pointing block needs 'a0' or both 'r' and 'wz'")


def pointing_pdf(pm: PointingModel, y: float) -> float:
    """Density of the misalignment gain; zero outside ``[0, A0]``.

    The degenerate model has no density and returns 0 everywhere.
    """
    if pm.is_degenerate or not 0 <= y <= pm.a0:
        return 0.0
    k = pm.xi2
    if y == 0:
        return math.inf if k < 1 else (1.0 / pm.a0 if k == 1 else 0.0)
    return k / pm.a0 * (y / pm.a0) ** (k - 1.0)


def pointing_cdf(pm: PointingModel, y: float) -> float:
    if y < 0:
        return 0.0
    if y >= pm.a0:
        return 1.0
    if pm.is_degenerate:
        return 0.0
    return (y / pm.a0) ** pm.xi2


def sample_pointing(pm: PointingModel, u):
    """Inverse-CDF map ``u -> A0 u^(1/xi^2)``; vectorized over ``u``."""
    u = np.asarray(u, dtype=float)
    if pm.is_degenerate:
        out = np.full(u.shape, pm.a0)
    else:
        out = np.minimum(pm.a0 * u ** (1.0 / pm.xi2), pm.a0)
    return out if out.ndim else float(out)

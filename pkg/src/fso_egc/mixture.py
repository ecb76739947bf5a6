"""Mixture-Gamma (MG) turbulence fading and its Gamma-Gamma fit.

A mixture-Gamma density is ``f(x) = sum_i a_i x^(b_i - 1) exp(-c_i x)``.
The Gamma-Gamma fit writes the irradiance density as an integral of a
Gamma(α) kernel over a Gamma(β)-distributed mean and discretizes that
integral with a Gauss-Laguerre rule.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
from scipy import special

from . import specfun
from .errors import DomainError

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class GammaGammaParams:
    """Shapes of the two unit-mean Gamma factors of the irradiance."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise DomainError(f"Gamma-Gamma shapes must be positive, got ({self.alpha}, {self.beta})")

    @property
    def min_shape(self) -> float:
        return min(self.alpha, self.beta)

    def scintillation_index(self) -> float:
        a, b = self.alpha, self.beta
        return 1.0 / a + 1.0 / b + 1.0 / (a * b)


@dataclass(frozen=True)
class MixtureGamma:
    """A finite list of ``(a_i, b_i, c_i)`` terms.

    ``source`` records the Gamma-Gamma parameters when the mixture came from
    :func:`fit_gamma_gamma`; it is informational and is not serialized into
    the terms themselves.
    """

    a: tuple[float, ...]
    b: tuple[float, ...]
    c: tuple[float, ...]
    source: Optional[GammaGammaParams] = field(default=None, compare=False)

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        b = tuple(float(v) for v in self.b)
        c = tuple(float(v) for v in self.c)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        if not (len(a) == len(b) == len(c)) or not a:
            raise DomainError("a mixture needs L >= 1 terms with matching a, b, c")
        if any(not bi > 0 for bi in b) or any(not ci > 0 for ci in c):
            raise DomainError("mixture shapes b_i and rates c_i must be positive")
        err = abs(self.total_mass() - 1.0)
        if not err <= NORMALIZATION_TOL:
            raise DomainError(f"mixture is not normalized: |mass - 1| = {err:.3e}")

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[float, float, float]], source=None) -> "MixtureGamma":
        a, b, c = zip(*terms)
        return cls(a, b, c, source)

    def __len__(self) -> int:
        return len(self.a)

    @property
    def terms(self) -> list[tuple[float, float, float]]:
        return list(zip(self.a, self.b, self.c))

    def term_masses(self) -> np.ndarray:
        """Probability carried by each term, ``a_i Gamma(b_i) c_i^-b_i``."""
        return np.array([
            math.exp(math.log(ai) + math.lgamma(bi) - bi * math.log(ci)) if ai > 0 else 0.0
            for ai, bi, ci in zip(self.a, self.b, self.c)
        ])

    def total_mass(self) -> float:
        return math.fsum(self.term_masses())

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        return {"terms": [{"a": a, "b": b, "c": c} for a, b, c in self.terms]}

    @classmethod
    def from_dict(cls, doc: dict) -> "MixtureGamma":
        try:
            terms = [(float(t["a"]), float(t["b"]), float(t["c"])) for t in doc["terms"]]
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed mixture document: {exc}") from None
        return cls.from_terms(terms)

    def to_json(self) -> str:
        # repr-precision floats round-trip bit-exactly
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MixtureGamma":
        return cls.from_dict(json.loads(text))


def fit_gamma_gamma(gg: GammaGammaParams, L: int = 10, order: str = "min-shape") -> MixtureGamma:
    """Fit a mixture-Gamma density to a Gamma-Gamma channel.

    Parameters
    ----------
    gg : GammaGammaParams
        Target channel.
    L : int
        Number of mixture terms (Gauss-Laguerre nodes), ``1 <= L <= 64``.
    order : {"min-shape", "as-given"}
        The Gamma-Gamma law is symmetric in its two shapes, so either can be
        the Gamma kernel shape ``b_i``.  ``"min-shape"`` uses
        ``min(alpha, beta)``, which reproduces the ``x^(min-1)`` behaviour
        of the true density near zero; ``"as-given"`` uses ``alpha``.

    Returns
    -------
    MixtureGamma
        ``b_i = shape``, ``c_i = alpha*beta/t_i`` and
        ``a_i ∝ w_i t_i^(other-1-shape) (alpha*beta)^shape / (Gamma(shape) Gamma(other))``,
        rescaled to unit total mass.
    """
    if order not in ("min-shape", "as-given"):
        raise ValueError(f"unknown order {order!r}")
    t, w = specfun.gauss_laguerre(L)
    shape, other = gg.alpha, gg.beta
    if order == "min-shape" and other < shape:
        shape, other = other, shape
    ab = gg.alpha * gg.beta
    log_a = (
        np.log(w) + (other - 1.0 - shape) * np.log(t) + shape * math.log(ab)
        - math.lgamma(shape) - math.lgamma(other)
    )
    b = np.full(L, shape)
    c = ab / t
    log_mass = log_a + math.lgamma(shape) - shape * np.log(c)
    log_a = log_a - math.log(math.fsum(np.exp(log_mass)))
    return MixtureGamma(tuple(np.exp(log_a)), tuple(b), tuple(c), source=gg)


def mg_pdf(mg: MixtureGamma, x: float) -> float:
    """Mixture-Gamma density at ``x > 0``."""
    if not x > 0:
        raise DomainError(f"mg_pdf requires x > 0, got {x!r}")
    lx = math.log(x)
    return math.fsum(
        math.exp(math.log(a) + (b - 1.0) * lx - c * x)
        for a, b, c in zip(mg.a, mg.b, mg.c) if a > 0
    )


def mg_cdf(mg: MixtureGamma, x):
    """Mixture-Gamma CDF; vectorized over ``x``."""
    x = np.asarray(x, dtype=float)
    masses = mg.term_masses()
    out = np.zeros(x.shape)
    for mass, b, c in zip(masses, mg.b, mg.c):
        out = out + mass * special.gammainc(b, c * np.clip(x, 0.0, None))
    return out if out.ndim else float(out)


def mg_moment(mg: MixtureGamma, n: float) -> float:
    """Raw moment ``E[X^n] = sum_i a_i Gamma(b_i + n) c_i^-(b_i + n)``."""
    if not n >= 0:
        raise DomainError(f"mg_moment requires n >= 0, got {n!r}")
    return math.fsum(
        math.exp(math.log(a) + math.lgamma(b + n) - (b + n) * math.log(c))
        for a, b, c in zip(mg.a, mg.b, mg.c) if a > 0
    )


def gamma_gamma_pdf(gg: GammaGammaParams, x):
    """Exact Gamma-Gamma density, ``2 (ab)^((a+b)/2) x^((a+b)/2-1) K_(a-b)(2 sqrt(ab x)) / (G(a) G(b))``."""
    a, b = gg.alpha, gg.beta
    x = np.asarray(x, dtype=float)
    log_pref = math.log(2.0) + 0.5 * (a + b) * math.log(a * b) - math.lgamma(a) - math.lgamma(b)
    arg = 2.0 * np.sqrt(a * b * x)
    # kve = kv * e^arg keeps large arguments finite
    return np.exp(log_pref + (0.5 * (a + b) - 1.0) * np.log(x) - arg) * special.kve(a - b, arg)

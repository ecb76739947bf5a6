"""N-branch equal-gain-combining statistics and performance metrics.

The combined amplitude is ``z = sum_j x_j y_j`` (mixture-Gamma fading
``x_j``, pointing gain ``y_j``) and the SNR is ``g = (gbar * z)^2``.  Every
closed form here is a sum over the multi-index ``(i_1, ..., i_N)`` of one
mixture term per branch; branch 0 carries the incomplete-Gamma factor and
branches ``1..N-1`` contribute through the pointing integral
``int y^(xi^2 - b - 1) dy``.

For ``N >= 2`` the family follows the printed derivation, whose two-branch
convolution step is exact only when the two conditional Gamma rates
coincide; :func:`appendix_convolution_check` compares that step against the
exact convolution.  The resulting PDF does not integrate to one for
``N >= 2``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np
from scipy import integrate

from . import specfun
from ._parallel import map_ordered
from .errors import DomainError, ValidityError
from .mixture import GammaGammaParams, MixtureGamma, fit_gamma_gamma
from .pointing import PointingModel

log = logging.getLogger(__name__)

NEAR_POLE = 1e-8
_LN2 = math.log(2.0)
_LN_SQRT_PI = 0.5 * math.log(math.pi)


@dataclass(frozen=True)
class ModulationParams:
    """Conditional BER ``Gamma(p, q*g) / (2 Gamma(p))``."""

    p: float
    q: float

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise DomainError(f"modulation parameters must be positive, got ({self.p}, {self.q})")


BPSK = ModulationParams(0.5, 1.0)


class TermIndex(NamedTuple):
    """Zero-based mixture-term choice per branch."""

    indices: tuple[int, ...]


class _Term(NamedTuple):
    log_coef: float
    s: float        # sum_{j>=1} b_j + xi^2
    nu: float       # b_0 - xi^2
    c1: float       # rate of the branch-0 term
    btot: float     # sum_j b_j


@dataclass(frozen=True)
class EgcLink:
    """N receive branches sharing one pointing model.

    ``strict=True`` applies the ``xi^2 > b`` condition to branch 0 as well.
    """

    branches: tuple[MixtureGamma, ...]
    pointing: PointingModel
    strict: bool = False

    def __post_init__(self):
        branches = tuple(self.branches)
        object.__setattr__(self, "branches", branches)
        if not branches:
            raise DomainError("an EGC link needs at least one branch")
        if self.pointing.is_degenerate:
            return
        xi2 = self.pointing.xi2
        first = 0 if self.strict else 1
        for j in range(first, len(branches)):
            for b in branches[j].b:
                if not xi2 > b:
                    raise ValidityError(xi2, b, j)

    @classmethod
    def gamma_gamma(cls, gg, n_branches: int, pointing: PointingModel, L: int = 10,
                    order: str = "min-shape", strict: bool = False) -> "EgcLink":
        """Identical (or per-branch, if ``gg`` is a sequence) Gamma-Gamma branches."""
        if isinstance(gg, GammaGammaParams):
            ggs = [gg] * n_branches
        else:
            ggs = list(gg)
            if len(ggs) != n_branches:
                raise DomainError(f"expected {n_branches} Gamma-Gamma parameter sets, got {len(ggs)}")
        return cls(tuple(fit_gamma_gamma(g, L, order) for g in ggs), pointing, strict)

    @property
    def n(self) -> int:
        return len(self.branches)

    def term_indices(self) -> Iterator[TermIndex]:
        """Lexicographic, branch-major enumeration of all ``prod L_j`` terms."""
        for idx in itertools.product(*(range(len(br)) for br in self.branches)):
            yield TermIndex(idx)

    @cached_property
    def _terms(self) -> tuple[_Term, ...]:
        return tuple(_build_term(self, t) for t in self.term_indices())


def _log_psi_factor(xi2: float, b: float, ln_a0: float) -> float:
    # ln(A0^t / t) with t = xi^2 - b; exact in the log domain, even as t -> 0+
    t = xi2 - b
    if t < NEAR_POLE:
        log.debug("pointing factor near its pole: xi^2 - b = %.3e", t)
    return t * ln_a0 - math.log(t)


def _build_term(link: EgcLink, t: TermIndex) -> _Term:
    pm = link.pointing
    idx = t.indices
    a = [link.branches[j].a[i] for j, i in enumerate(idx)]
    b = [link.branches[j].b[i] for j, i in enumerate(idx)]
    c1 = link.branches[0].c[idx[0]]
    n = len(idx)
    log_coef = math.fsum(math.log(v) for v in a)
    acc = b[0]
    for j in range(1, n):
        log_coef += specfun.ln_beta(acc, b[j])
        acc += b[j]
    btot = acc
    if pm.is_degenerate:
        return _Term(log_coef, math.nan, math.nan, c1, btot)
    xi2 = pm.xi2
    ln_a0 = math.log(pm.a0)
    for j in range(1, n):
        if not xi2 - b[j] > 0:
            raise ValidityError(xi2, b[j], j)
        log_coef += _log_psi_factor(xi2, b[j], ln_a0)
    log_coef += n * math.log(xi2) + (xi2 - b[0]) * math.log(c1) - n * xi2 * ln_a0
    s = btot - b[0] + xi2
    return _Term(log_coef, s, b[0] - xi2, c1, btot)


def term_log_coefficient(link: EgcLink, t: TermIndex) -> tuple[float, int]:
    """Log-magnitude and sign of the multi-index prefactor.

    ``prod a * prod B(sum b, b) * xi^(2N) c_1^(xi^2 - b_1) Psi[A0] / A0^(N xi^2)``;
    under the validity condition every factor is positive.
    """
    if link.pointing.is_degenerate:
        raise DomainError("the prefactor is undefined without pointing errors")
    return _build_term(link, t).log_coef, 1


def _check_gbar(gbar: float) -> float:
    if not gbar > 0:
        raise DomainError(f"mean SNR must be positive, got {gbar!r}")
    return math.log(gbar)


def _fsum_exp(logs) -> float:
    return math.fsum(math.exp(v) for v in logs if v != -math.inf)


# ---------------------------------------------------------------------------
# SNR statistics
# ---------------------------------------------------------------------------

def snr_pdf(link: EgcLink, gbar: float, g: float) -> float:
    """Density of the combined SNR at ``g > 0``."""
    lgb = _check_gbar(gbar)
    if not g > 0:
        raise DomainError(f"snr_pdf requires g > 0, got {g!r}")
    lg = math.log(g)
    sg = math.sqrt(g)
    pm = link.pointing
    if pm.is_degenerate:
        return _fsum_exp(
            t.log_coef + (0.5 * t.btot - 1.0) * lg - t.c1 * sg / gbar - _LN2 - t.btot * lgb
            for t in link._terms
        )

    def one(t: _Term) -> float:
        x = t.c1 * sg / (gbar * pm.a0)
        return (t.log_coef - _LN2 - t.s * lgb + (0.5 * t.s - 1.0) * lg
                + specfun.ln_upper_inc_gamma(t.nu, x))

    return _fsum_exp(map_ordered(one, link._terms))


def _cdf_spec(t: _Term) -> specfun.MeijerSpec:
    return specfun.MeijerSpec(2, 1, 2, 3, (1.0 - t.s, 1.0), (0.0, t.nu, -t.s))


def snr_cdf_raw(link: EgcLink, gbar: float, g: float) -> float:
    """Unclamped term sum of the CDF."""
    lgb = _check_gbar(gbar)
    if g < 0:
        raise DomainError(f"snr_cdf requires g >= 0, got {g!r}")
    if g == 0:
        return 0.0
    lg = math.log(g)
    sg = math.sqrt(g)
    pm = link.pointing
    if pm.is_degenerate:
        return math.fsum(
            math.exp(t.log_coef - t.btot * math.log(t.c1))
            * specfun.lower_inc_gamma(t.btot, t.c1 * sg / gbar)
            for t in link._terms
        )

    def one(t: _Term) -> float:
        x = t.c1 * sg / (gbar * pm.a0)
        return (t.log_coef - t.s * lgb + 0.5 * t.s * lg
                + specfun.log_meijer_g(_cdf_spec(t), x))

    return _fsum_exp(map_ordered(one, link._terms))


def snr_cdf(link: EgcLink, gbar: float, g: float) -> float:
    """CDF of the combined SNR, clamped to ``[0, 1]`` after summation."""
    raw = snr_cdf_raw(link, gbar, g)
    value = min(max(raw, 0.0), 1.0)
    if value != raw:
        log.debug("snr_cdf clamped raw value %r at gbar=%r, g=%r", raw, gbar, g)
    return value


def snr_moment(link: EgcLink, gbar: float, n: float) -> float:
    """``n``-th raw moment of the SNR, ``E[g^n]``.

    Each term is ``coef * gbar^-s * Gamma(sum b + 2n) / ((s + 2n) k^(s + 2n))``
    with ``k = c_1 / (gbar A0)``: the exact Mellin transform of the PDF terms.
    """
    lgb = _check_gbar(gbar)
    if not n >= 0:
        raise DomainError(f"snr_moment requires n >= 0, got {n!r}")
    pm = link.pointing
    if pm.is_degenerate:
        return _fsum_exp(
            t.log_coef + 2 * n * lgb + math.lgamma(t.btot + 2 * n) - (t.btot + 2 * n) * math.log(t.c1)
            for t in link._terms
        )
    ln_a0 = math.log(pm.a0)
    return _fsum_exp(
        t.log_coef - t.s * lgb + math.lgamma(t.btot + 2 * n) - math.log(t.s + 2 * n)
        - (t.s + 2 * n) * (math.log(t.c1) - lgb - ln_a0)
        for t in link._terms
    )


# ---------------------------------------------------------------------------
# Performance metrics
# ---------------------------------------------------------------------------

def scintillation_index(link: EgcLink, gbar: float = 1.0) -> float:
    m1 = snr_moment(link, gbar, 1)
    m2 = snr_moment(link, gbar, 2)
    return m2 / (m1 * m1) - 1.0


def outage_probability(link: EgcLink, gbar: float, g_th: float) -> float:
    return snr_cdf(link, gbar, g_th)


def _aber_spec(t: _Term, p: float) -> specfun.MeijerSpec:
    hs = 0.5 * t.s
    return specfun.MeijerSpec(
        3, 2, 3, 4, (1.0 - p - hs, 1.0 - hs, 1.0),
        (0.0, 0.5 * t.nu, 0.5 * (t.nu + 1.0), -hs),
    )


def aber(link: EgcLink, gbar: float, mod: ModulationParams = BPSK) -> float:
    """Average bit-error rate.

    Without pointing errors the Laplace-type integral of the CDF is
    evaluated by adaptive quadrature instead of a Meijer G closed form.
    """
    lgb = _check_gbar(gbar)
    pm = link.pointing
    p, q = mod.p, mod.q
    if pm.is_degenerate:
        return aber_by_quadrature(link, gbar, mod)
    ln_a0 = math.log(pm.a0)
    lead = -_LN_SQRT_PI - math.lgamma(p)

    def one(t: _Term) -> float:
        lx = 2.0 * math.log(t.c1) - math.log(4.0 * q) - 2.0 * lgb - 2.0 * ln_a0
        return (t.log_coef + lead + (t.nu - 3.0) * _LN2
                - 0.5 * t.s * (2.0 * lgb + math.log(q))
                + specfun.log_meijer_g(_aber_spec(t, p), math.exp(lx)))

    return _fsum_exp(map_ordered(one, link._terms))


def aber_by_quadrature(link: EgcLink, gbar: float, mod: ModulationParams = BPSK,
                       epsrel: float = 1e-10) -> float:
    """``q^p / (2 Gamma(p)) * int g^(p-1) e^(-q g) F(g) dg`` by adaptive quadrature."""
    p, q = mod.p, mod.q
    lead = math.exp(p * math.log(q) - _LN2 - math.lgamma(p))

    # g = v^2 removes the g^(p-1) endpoint behaviour of the weight
    def integrand(v):
        if v <= 0:
            return 0.0
        g = v * v
        return 2.0 * v ** (2.0 * p - 1.0) * math.exp(-q * g) * snr_cdf_raw(link, gbar, g)

    vmax = math.sqrt(60.0 / q)
    knots = [vmax * f for f in (1e-4, 1e-3, 1e-2, 0.05, 0.2, 0.5)]
    total, _ = integrate.quad(integrand, 0.0, vmax, points=knots, limit=400,
                              epsabs=0.0, epsrel=epsrel)
    return lead * total


def _asymptotic_pair(t: _Term, nu: float) -> tuple[float, float]:
    """Weights of ``x^0`` and ``x^nu`` in the small-argument CDF expansion."""
    phi = (0.0, nu, -t.s)
    zeta = (1.0 - t.s, 1.0)
    out = []
    for h in range(2):
        num = 1.0
        for j in range(2):
            if j != h:
                num *= math.gamma(phi[j] - phi[h])
        num *= math.gamma(1.0 + phi[h] - zeta[0])
        den = math.gamma(1.0 + phi[h] - phi[2]) * math.gamma(zeta[1] - phi[h])
        out.append(num / den)
    return out[0], out[1]


def outage_asymptotic(link: EgcLink, gbar: float, g_th: float) -> float:
    """High-SNR outage: the two leading residues of each CDF term."""
    lgb = _check_gbar(gbar)
    if not g_th > 0:
        raise DomainError(f"threshold must be positive, got {g_th!r}")
    pm = link.pointing
    lg = math.log(g_th)
    if pm.is_degenerate:
        return _fsum_exp(
            t.log_coef - math.log(t.btot) + 0.5 * t.btot * lg - t.btot * lgb for t in link._terms
        )
    ln_a0 = math.log(pm.a0)

    def evaluate(t: _Term, nu: float) -> float:
        w0, w1 = _asymptotic_pair(t, nu)
        coef = math.exp(t.log_coef)
        total = 0.0
        for w, ph in ((w0, 0.0), (w1, nu)):
            total += w * coef * math.exp(
                ph * (math.log(t.c1) - ln_a0) + 0.5 * (t.s + ph) * lg - (t.s + ph) * lgb
            )
        return total

    parts = []
    for t in link._terms:
        if abs(t.nu - round(t.nu)) < 1e-9:
            # both weights have a simple pole here; the symmetric mean of
            # nu +/- eps cancels it and leaves the finite part to O(eps^2)
            eps = specfun.PERTURBATION
            parts.append(0.5 * (evaluate(t, t.nu + eps) + evaluate(t, t.nu - eps)))
        else:
            parts.append(evaluate(t, t.nu))
    return math.fsum(parts)


def diversity_order(link: EgcLink) -> float:
    """High-SNR outage slope magnitude.

    Sums ``min(alpha, beta)`` over branches fitted from Gamma-Gamma channels
    (the smallest mixture shape otherwise).  When pointing errors are more
    severe than the first branch's fading (``xi^2`` below its shape) the
    slope saturates at ``xi^2 + sum_{j>=1} shape_j``.
    """
    shapes = [
        br.source.min_shape if br.source is not None else min(br.b)
        for br in link.branches
    ]
    d = math.fsum(shapes)
    if not link.pointing.is_degenerate:
        d = min(d, link.pointing.xi2 + math.fsum(shapes[1:]))
    return d


# ---------------------------------------------------------------------------
# Two-branch conditional convolution
# ---------------------------------------------------------------------------

def _conditional_terms(mg: MixtureGamma, y: float):
    for a, b, c in zip(mg.a, mg.b, mg.c):
        yield a * y ** (-b), b, c / y


def conditional_pdf(mg: MixtureGamma, y: float, x: float) -> float:
    """Density of ``h = x y`` given ``y``: ``sum a/y^b x^(b-1) e^(-c x / y)``."""
    return math.fsum(a * x ** (b - 1.0) * math.exp(-r * x) for a, b, r in _conditional_terms(mg, y))


def two_branch_conditional_closed(branch1: MixtureGamma, branch2: MixtureGamma,
                                  y1: float, y2: float, z: float) -> float:
    """Exact density of ``h_1 + h_2`` given ``(y_1, y_2)``.

    Each term pair is ``a1 a2 / (y1^b1 y2^b2) B(b1, b2) z^(b1+b2-1)`` times
    ``e^(-r2 z) 1F1(b1; b1+b2; -(r1-r2) z)``, ``r = c / y``; the Kummer
    factor is 1 when the two rates agree.
    """
    if not (y1 > 0 and y2 > 0 and z > 0):
        raise DomainError("y1, y2 and z must be positive")
    lz = math.log(z)
    logs = []
    for a1, b1, r1 in _conditional_terms(branch1, y1):
        for a2, b2, r2 in _conditional_terms(branch2, y2):
            if r1 >= r2:
                kummer = -r1 * z + specfun.ln_kummer_m(b2, b1 + b2, (r1 - r2) * z)
            else:
                kummer = -r2 * z + specfun.ln_kummer_m(b1, b1 + b2, (r2 - r1) * z)
            logs.append(math.log(a1) + math.log(a2) + specfun.ln_beta(b1, b2)
                        + (b1 + b2 - 1.0) * lz + kummer)
    return _fsum_exp(logs)


def two_branch_conditional_printed(branch1: MixtureGamma, branch2: MixtureGamma,
                                   y1: float, y2: float, z: float) -> float:
    """The printed two-branch step: exponential ``e^(-c_1 z / y_1)`` only."""
    logs = []
    lz = math.log(z)
    for a1, b1, r1 in _conditional_terms(branch1, y1):
        for a2, b2, _ in _conditional_terms(branch2, y2):
            logs.append(math.log(a1) + math.log(a2) + specfun.ln_beta(b1, b2)
                        + (b1 + b2 - 1.0) * lz - r1 * z)
    return _fsum_exp(logs)


def two_branch_conditional_numeric(branch1: MixtureGamma, branch2: MixtureGamma,
                                   y1: float, y2: float, z: float,
                                   epsrel: float = 1e-12) -> float:
    """Brute-force convolution ``int_0^z f_{h1|y1}(x) f_{h2|y2}(z - x) dx``."""
    e1 = min(branch1.b) - 1.0
    e2 = min(branch2.b) - 1.0
    t1 = list(_conditional_terms(branch1, y1))
    t2 = list(_conditional_terms(branch2, y2))

    # the algebraic endpoint factors x^e1 (z-x)^e2 go into the QAWS weight
    def smooth(x):
        u = z - x
        f1 = math.fsum(a * x ** (b - 1.0 - e1) * math.exp(-r * x) for a, b, r in t1)
        f2 = math.fsum(a * u ** (b - 1.0 - e2) * math.exp(-r * u) for a, b, r in t2)
        return f1 * f2

    value, _ = integrate.quad(smooth, 0.0, z, weight="alg", wvar=(e1, e2),
                              epsabs=0.0, epsrel=epsrel, limit=200)
    return value


def appendix_convolution_check(branch1: MixtureGamma, branch2: MixtureGamma,
                               y1: float, y2: float, z: float) -> tuple[float, float]:
    """Closed-form and brute-force conditional two-branch densities."""
    closed = two_branch_conditional_closed(branch1, branch2, y1, y2, z)
    numeric = two_branch_conditional_numeric(branch1, branch2, y1, y2, z)
    return closed, numeric


def transmit_diversity(n_tx: int, n_rx: int, gbar: float) -> tuple[int, float]:
    """Map ``M`` transmit and ``N`` receive apertures onto the single-transmitter model.

    The link is analysed as ``M*N`` branches with the SNR scale divided by
    ``M^2``.  Since ``g = (gbar z)^2`` here, that is ``gbar / M``; returns
    ``(branches, gbar)``.
    """
    if n_tx < 1 or n_rx < 1:
        raise DomainError("aperture counts must be >= 1")
    return n_tx * n_rx, gbar / n_tx

"""Special-function kernel.

Real-argument Gamma/Beta/erf wrappers, the upper incomplete Gamma function
for arbitrary real order, Gauss-Laguerre rules, a positive-argument Kummer
function, and a Meijer G evaluator restricted to the three parameter classes
the EGC closed forms use.

The Meijer G evaluator has two routes.  Small arguments use the residue
(Slater) expansion: a sum over the ``m`` families of right-half-plane poles,
each family a ``pFq-1`` power series.  For larger arguments that series
suffers catastrophic cancellation, so the Mellin-Barnes integral is
evaluated directly along a vertical line placed at the real saddle of the
integrand, with a ``sinh`` change of variable and the trapezoidal rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import loggamma as _cloggamma

from .errors import DomainError, NonConvergence, PoleCollision

EULER_GAMMA = 0.57721566490153286060651209
_EPS = np.finfo(float).eps
_FPMIN = 1e-300
DEFAULT_MAX_TERMS = 10_000
PERTURBATION = 1e-6

SUPPORTED_CLASSES = frozenset({(2, 0, 1, 2), (2, 1, 2, 3), (3, 2, 3, 4)})


# ---------------------------------------------------------------------------
# Gamma, Beta, erf
# ---------------------------------------------------------------------------

def ln_gamma(x: float) -> float:
    """Natural log of the Gamma function for ``x > 0``."""
    if not x > 0:
        raise DomainError(f"ln_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def ln_beta(a: float, b: float) -> float:
    """``ln B(a, b)`` for positive arguments."""
    if not (a > 0 and b > 0):
        raise DomainError(f"beta requires positive arguments, got ({a!r}, {b!r})")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def beta(a: float, b: float) -> float:
    """Beta function, evaluated in the log domain."""
    return math.exp(ln_beta(a, b))


def erf(x: float) -> float:
    """Error function."""
    return math.erf(x)


def _is_nonpositive_integer(z: float, tol: float = 0.0) -> bool:
    r = round(z)
    return r <= 0 and abs(z - r) <= tol


def _rgamma(z: float) -> float:
    """``1/Gamma(z)``, zero at the poles."""
    if _is_nonpositive_integer(z):
        return 0.0
    if z > 171.0:
        return math.exp(-math.lgamma(z))
    return 1.0 / math.gamma(z)


# ---------------------------------------------------------------------------
# Upper incomplete Gamma function
# ---------------------------------------------------------------------------

def _lower_series(s: float, x: float, max_terms: int) -> float:
    # gamma(s, x) = x^s e^-x sum_n x^n / (s (s+1) ... (s+n)),  s > 0
    term = 1.0 / s
    total = term
    ap = s
    for _ in range(max_terms):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + s * math.log(x))
    raise NonConvergence(f"lower incomplete gamma series: s={s}, x={x}")


def _ln_upper_cf(s: float, x: float, max_terms: int) -> float:
    # Legendre continued fraction, modified Lentz; valid for any real s, x > 0.
    b = x + 1.0 - s
    c = 1.0 / _FPMIN
    d = 1.0 / b if abs(b) > _FPMIN else 1.0 / _FPMIN
    h = d
    for i in range(1, max_terms + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return -x + s * math.log(x) + math.log(h)
    raise NonConvergence(f"upper incomplete gamma continued fraction: s={s}, x={x}")


def _e1_series(x: float, max_terms: int) -> float:
    total = 0.0
    term = 1.0
    for k in range(1, max_terms + 1):
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < _EPS * abs(total):
            return -EULER_GAMMA - math.log(x) - total
    raise NonConvergence(f"E1 series: x={x}")


def upper_inc_gamma(s: float, x: float, max_terms: int = DEFAULT_MAX_TERMS) -> float:
    """Upper incomplete Gamma function ``Gamma(s, x)`` for real ``s``.

    Parameters
    ----------
    s : float
        Order; negative and non-integer values are allowed.
    x : float
        Lower integration limit, ``x > 0`` (``x == 0`` only when ``s > 0``).

    Notes
    -----
    For ``s > 0`` the lower series is used below ``x = s + 1`` and the
    continued fraction above it.  For ``s <= 0`` the continued fraction is
    used when ``x >= 1``; otherwise ``Gamma(s, x) = (Gamma(s+1, x) -
    x^s e^-x) / s`` is applied downward from the anchor
    ``s + ceil(|s|) + 1``.
    """
    if x == 0.0 and s > 0:
        return math.gamma(s) if s < 171.0 else math.inf
    if not x > 0:
        raise DomainError(f"upper_inc_gamma requires x > 0 (or x == 0 with s > 0), got s={s!r}, x={x!r}")
    if s > 0:
        if x < s + 1.0:
            return math.gamma(s) - _lower_series(s, x, max_terms)
        return math.exp(_ln_upper_cf(s, x, max_terms))
    if x >= 1.0:
        return math.exp(_ln_upper_cf(s, x, max_terms))
    if _is_nonpositive_integer(s):
        value = _e1_series(x, max_terms)
        order = 0.0
    else:
        k = math.ceil(abs(s)) + 1
        order = s + k
        value = math.gamma(order) - _lower_series(order, x, max_terms)
    ex = math.exp(-x)
    while order > s + 0.5:
        order -= 1.0
        value = (value - x**order * ex) / order
    return value


def ln_upper_inc_gamma(s: float, x: float, max_terms: int = DEFAULT_MAX_TERMS) -> float:
    """``ln Gamma(s, x)``; stays finite where ``Gamma(s, x)`` underflows."""
    if x > 0 and ((s > 0 and x >= s + 1.0) or (s <= 0 and x >= 1.0)):
        return _ln_upper_cf(s, x, max_terms)
    return math.log(upper_inc_gamma(s, x, max_terms))


def lower_inc_gamma(s: float, x: float, max_terms: int = DEFAULT_MAX_TERMS) -> float:
    """Lower incomplete Gamma function ``gamma(s, x)`` for ``s > 0``, ``x >= 0``."""
    if not (s > 0 and x >= 0):
        raise DomainError(f"lower_inc_gamma requires s > 0 and x >= 0, got s={s!r}, x={x!r}")
    if x == 0.0:
        return 0.0
    if x < s + 1.0:
        return _lower_series(s, x, max_terms)
    return math.gamma(s) - math.exp(_ln_upper_cf(s, x, max_terms))


# ---------------------------------------------------------------------------
# Kummer confluent hypergeometric function, non-negative argument
# ---------------------------------------------------------------------------

def ln_kummer_m(a: float, b: float, x: float) -> float:
    """``ln 1F1(a; b; x)`` for ``a, b > 0`` and ``x >= 0``.

    All series terms are positive, so the sum is accumulated with a
    log-sum-exp and never cancels.
    """
    if not (a > 0 and b > 0 and x >= 0):
        raise DomainError(f"ln_kummer_m requires a, b > 0 and x >= 0, got ({a}, {b}, {x})")
    if x == 0.0:
        return 0.0
    n_terms = int(x + 40.0 * math.sqrt(x + 1.0) + a + 60.0)
    while True:
        k = np.arange(n_terms, dtype=float)
        log_ratio = np.log((a + k) * x / ((b + k) * (k + 1.0)))
        log_terms = np.concatenate(([0.0], np.cumsum(log_ratio)))
        peak = log_terms.max()
        if log_ratio[-1] < 0 and log_terms[-1] < peak - 45.0:
            return float(peak + math.log(np.exp(log_terms - peak).sum()))
        n_terms *= 2
        if n_terms > 50 * DEFAULT_MAX_TERMS + 4 * x:
            raise NonConvergence(f"Kummer series: a={a}, b={b}, x={x}")


# ---------------------------------------------------------------------------
# Gauss-Laguerre quadrature
# ---------------------------------------------------------------------------

def gauss_laguerre(L: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``L``-point Gauss-Laguerre rule.

    Roots of the Laguerre polynomial are found by Newton iteration from the
    usual asymptotic starting guesses; weights integrate against ``e^-x``
    and therefore sum to one.
    """
    if isinstance(L, bool) or int(L) != L or not 1 <= L <= 64:
        raise DomainError(f"gauss_laguerre requires 1 <= L <= 64, got {L!r}")
    n = int(L)
    nodes = np.empty(n)
    weights = np.empty(n)
    z = 0.0
    for i in range(n):
        if i == 0:
            z = 3.0 / (1.0 + 2.4 * n)
        elif i == 1:
            z += 15.0 / (1.0 + 2.5 * n)
        else:
            ai = i - 1
            z += (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
        prev = math.inf
        for _ in range(100):
            p1, p2 = 1.0, 0.0
            for j in range(1, n + 1):
                p3 = p2
                p2 = p1
                p1 = ((2 * j - 1 - z) * p2 - (j - 1) * p3) / j
            pp = (n * p1 - n * p2) / z
            step = p1 / pp
            z -= step
            # stop at the tolerance, or once steps stall at rounding level
            if abs(step) <= 1e-14 * abs(z) or (abs(step) <= 1e-12 * abs(z) and abs(step) >= prev):
                break
            prev = abs(step)
        else:
            raise NonConvergence(f"Laguerre root {i} of L={n} did not converge")
        # Christoffel form w = 1 / sum_k L_k(z)^2: smooth in z, so unlike the
        # derivative form it does not amplify rounding error in the root
        p1, p2 = 1.0, 0.0
        squares = [1.0]
        for j in range(1, n):
            p3 = p2
            p2 = p1
            p1 = ((2 * j - 1 - z) * p2 - (j - 1) * p3) / j
            squares.append(p1 * p1)
        nodes[i] = z
        weights[i] = 1.0 / math.fsum(squares)
    return nodes, weights


# ---------------------------------------------------------------------------
# Meijer G
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeijerSpec:
    """Parameter block of ``G^{m,n}_{p,q}[x | a; b]``."""

    m: int
    n: int
    p: int
    q: int
    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if (self.m, self.n, self.p, self.q) not in SUPPORTED_CLASSES:
            raise DomainError(f"unsupported Meijer G class {(self.m, self.n, self.p, self.q)}")
        if len(self.a) != self.p or len(self.b) != self.q:
            raise DomainError(
                f"expected {self.p} upper and {self.q} lower parameters, "
                f"got {len(self.a)} and {len(self.b)}"
            )


def _near_integer(v: float, tol: float = 1e-9) -> bool:
    return abs(v - round(v)) <= tol


def _hyper_series(upper, lower, z, max_terms):
    """Sum of ``pF(q-1)`` with the largest term magnitude seen."""
    total = 1.0
    term = 1.0
    biggest = 1.0
    for k in range(max_terms):
        num = 1.0
        for u in upper:
            num *= u + k
        den = float(k + 1)
        for v in lower:
            den *= v + k
        ratio = num * z / den
        term *= ratio
        total += term
        biggest = max(biggest, abs(term))
        if term == 0.0:
            return total, biggest
        # tail bounded by a geometric series once |ratio| < 1/2 and shrinking
        if abs(ratio) < 0.5 and abs(term) <= 1e-16 * abs(total):
            k1 = k + 1
            nxt = 1.0
            for u in upper:
                nxt *= u + k1
            dn = float(k1 + 1)
            for v in lower:
                dn *= v + k1
            if abs(nxt * z / dn) <= abs(ratio):
                return total, biggest
    raise NonConvergence(f"hypergeometric series exceeded {max_terms} terms (z={z})")


def _slater_once(spec: MeijerSpec, x: float, b: tuple[float, ...], max_terms: int):
    a, m, n, p, q = spec.a, spec.m, spec.n, spec.p, spec.q
    sign = -1.0 if (p - m - n) % 2 else 1.0
    total = 0.0
    magnitude = 0.0
    for h in range(m):
        bh = b[h]
        pref = 1.0
        for j in range(m):
            if j != h:
                pref *= math.gamma(b[j] - bh)
        for j in range(n):
            pref *= math.gamma(1.0 + bh - a[j])
        for j in range(m, q):
            pref *= _rgamma(1.0 + bh - b[j])
        for j in range(n, p):
            pref *= _rgamma(a[j] - bh)
        if pref == 0.0:
            continue
        upper = [1.0 + bh - a[j] for j in range(p)]
        lower = [1.0 + bh - b[j] for j in range(q) if j != h]
        series, biggest = _hyper_series(upper, lower, sign * x, max_terms)
        scale = pref * x**bh
        total += scale * series
        magnitude += abs(scale) * biggest
    return total, magnitude


def _degenerate(b, m, tol=1e-9) -> bool:
    # coincident poles inside the first m slots, or a pFq lower parameter
    # hitting a non-positive integer
    for h in range(m):
        for j in range(len(b)):
            if j == h:
                continue
            if j < m and _near_integer(b[j] - b[h], tol):
                return True
            if j >= m and _is_nonpositive_integer(1.0 + b[h] - b[j], tol):
                return True
    return False


def _slater(spec: MeijerSpec, x: float, max_terms: int) -> tuple[float, float]:
    """Residue expansion; returns (value, condition estimate)."""
    a, b, m, n = spec.a, spec.b, spec.m, spec.n
    for h in range(m):
        for j in range(n):
            if _is_nonpositive_integer(1.0 + b[h] - a[j], 1e-12):
                raise PoleCollision(
                    f"pole of Gamma(b_{h}-t) meets pole of Gamma(1-a_{j}+t): b={b}, a={a}"
                )
    degenerate = _degenerate(b, m)
    if not degenerate:
        value, mag = _slater_once(spec, x, b, max_terms)
        return value, (mag / abs(value) if value else math.inf)
    # logarithmic case: split coincident poles and Richardson-extrapolate
    results = []
    for eps in (PERTURBATION, PERTURBATION / 2):
        shifted = tuple(bj + j * eps for j, bj in enumerate(b))
        if _degenerate(shifted, m, 1e-12):
            raise PoleCollision(f"perturbation could not separate poles: b={b}")
        results.append(_slater_once(spec, x, shifted, max_terms))
    (v1, m1), (v2, m2) = results
    value = 2.0 * v2 - v1
    cond = (m1 + 2 * m2) / abs(value) if value else math.inf
    return value, cond


class _StripEmpty(Exception):
    pass


def _log_phi(spec: MeijerSpec, t):
    a, b, m, n = spec.a, spec.b, spec.m, spec.n
    out = 0.0
    for j in range(m):
        out = out + _cloggamma(b[j] - t)
    for j in range(n):
        out = out + _cloggamma(1.0 - a[j] + t)
    for j in range(m, spec.q):
        out = out - _cloggamma(1.0 - b[j] + t)
    for j in range(n, spec.p):
        out = out - _cloggamma(a[j] - t)
    return out


def _mellin_barnes_log(spec: MeijerSpec, x: float) -> tuple[float, float]:
    """Vertical-line Mellin-Barnes quadrature.

    Returns ``(log_scale, mantissa)`` with ``G = exp(log_scale) * mantissa``.
    """
    a, b, m, n = spec.a, spec.b, spec.m, spec.n
    right = min(b[:m])
    left = max(a[j] - 1.0 for j in range(n)) if n else -math.inf
    if not left < right:
        raise _StripEmpty
    lx = math.log(x)
    lo = left if n else right - (2.0 * abs(x) + 30.0)
    width = right - lo
    pad = 1e-9 * max(1.0, width)
    lo_b, hi_b = lo + pad, right - pad

    def h(c):
        val = c * lx + float(np.real(_log_phi(spec, complex(c, 0.0))))
        return val if math.isfinite(val) else math.inf

    grid = np.linspace(lo_b, hi_b, 41)
    vals = grid * lx + np.real(_log_phi(spec, grid + 0j))
    vals = np.where(np.isfinite(vals), vals, np.inf)
    k = int(np.argmin(vals))
    sub_lo = grid[max(k - 1, 0)]
    sub_hi = grid[min(k + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(
        h, bounds=(sub_lo, sub_hi), method="bounded",
        options={"xatol": 1e-10 * max(1.0, width)},
    )
    c = float(res.x)
    h0 = h(c)
    dist = min(c - lo, right - c) if n else right - c
    delta = min(1e-3, 0.05 * dist)
    curv = (h(c + delta) - 2.0 * h0 + h(c - delta)) / delta**2
    w = 1.0 / math.sqrt(curv) if curv > 0 and math.isfinite(curv) else max(dist, 1e-3)
    if dist > 0:
        w = min(w, dist)

    # x^{i tau} limits the strip |Im u| < a in which the integrand stays
    # decaying; the step keeps the trapezoid error below ~e^-40.
    decay = spec.m + spec.n - 0.5 * (spec.p + spec.q)
    a_strip = math.atan(math.pi * decay / (abs(lx) + 2.0))
    hu = min(0.08, 2.0 * math.pi * a_strip / 40.0)
    chunk = 128
    total = 0.0 + 0.0j
    peak = 0.0
    start = 0
    while True:
        u = hu * np.arange(start, start + chunk)
        tau = w * np.sinh(u)
        t = c + 1j * tau
        f = np.exp(_log_phi(spec, t) + t * lx - h0) * (w * np.cosh(u))
        f = np.where(np.isfinite(f), f, 0.0)
        if start == 0:
            f[0] *= 0.5
        total += f.sum()
        peak = max(peak, float(np.abs(f).max()))
        start += chunk
        if float(np.abs(f[-16:]).max()) <= 1e-18 * peak or u[-1] > 30.0:
            break
    mantissa = hu * total.real / math.pi
    return h0, mantissa


def _mellin_barnes(spec: MeijerSpec, x: float) -> float:
    h0, mant = _mellin_barnes_log(spec, x)
    return math.exp(h0) * mant


def meijer_g(spec: MeijerSpec, x: float, *, method: str = "auto",
             max_terms: int = DEFAULT_MAX_TERMS) -> float:
    """Evaluate ``G^{m,n}_{p,q}[x | spec.a; spec.b]`` for real ``x > 0``.

    Parameters
    ----------
    spec : MeijerSpec
        One of the supported parameter classes.
    x : float
        Positive real argument.
    method : {"auto", "slater", "contour"}
        ``"auto"`` takes the residue series for ``x <= 1`` when it is well
        conditioned and the contour integral otherwise.
    max_terms : int
        Term budget of each hypergeometric series.

    Raises
    ------
    NonConvergence
        A residue series failed its tail test within ``max_terms``.
    PoleCollision
        Poles could not be separated.
    """
    return _meijer_dispatch(spec, x, method, max_terms, log=False)


def log_meijer_g(spec: MeijerSpec, x: float, *, method: str = "auto",
                 max_terms: int = DEFAULT_MAX_TERMS) -> float:
    """``ln G`` for a positive G value; avoids overflow in the scale factor."""
    return _meijer_dispatch(spec, x, method, max_terms, log=True)


def _meijer_dispatch(spec, x, method, max_terms, log):
    if not x > 0:
        raise DomainError(f"meijer_g requires x > 0, got {x!r}")
    if method not in ("auto", "slater", "contour"):
        raise ValueError(f"unknown method {method!r}")

    def finish(value):
        if not log:
            return value
        if not value > 0:
            raise DomainError(f"log_meijer_g: non-positive value {value!r}")
        return math.log(value)

    if method == "slater":
        return finish(_slater(spec, x, max_terms)[0])
    if method == "auto" and x <= 1.0:
        try:
            value, cond = _slater(spec, x, max_terms)
        except (NonConvergence, OverflowError):
            value, cond = math.nan, math.inf
        if cond < 1e5:
            return finish(value)
    try:
        h0, mant = _mellin_barnes_log(spec, x)
    except _StripEmpty:
        if method == "contour":
            raise PoleCollision(f"no vertical contour separates the poles: a={spec.a}, b={spec.b}")
        return finish(_slater(spec, x, max_terms)[0])
    if log:
        if not mant > 0:
            raise DomainError(f"log_meijer_g: non-positive value {mant!r}")
        return h0 + math.log(mant)
    return math.exp(h0) * mant

"""Seeded Monte Carlo simulation of the EGC link.

Samples are generated in fixed blocks of :data:`BLOCK` draws, and every
block has its own counter-based (Philox) stream keyed by ``(seed, block)``.
Block sums are reduced in block order with :func:`math.fsum`, so results
depend only on ``(seed, n_samples)`` and not on ``chunk_size`` or on the
number of worker threads.  One set of channel draws is shared by every
point of the mean-SNR grid (common random numbers).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np
from scipy import special

from ._parallel import map_ordered
from .egc import BPSK, EgcLink, ModulationParams
from .errors import DomainError
from .mixture import GammaGammaParams, MixtureGamma
from .pointing import PointingModel, sample_pointing

BLOCK = 1 << 16
Z95 = 1.959963984540054

Branch = Union[GammaGammaParams, MixtureGamma]


@dataclass(frozen=True)
class SimConfig:
    n_samples: int
    seed: int = 1
    chunk_size: int = 4 * BLOCK
    gbar_grid: tuple[float, ...] = (1.0,)
    g_th: float = 1.0
    mod: ModulationParams = BPSK

    def __post_init__(self):
        object.__setattr__(self, "gbar_grid", tuple(float(v) for v in self.gbar_grid))
        if self.n_samples < 1:
            raise DomainError("n_samples must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if self.chunk_size < 1:
            raise DomainError("chunk_size must be >= 1")
        if not self.gbar_grid or any(not g > 0 for g in self.gbar_grid):
            raise DomainError("gbar_grid needs at least one positive value")
        if not self.g_th > 0:
            raise DomainError("g_th must be positive")

    def blocks(self) -> list[tuple[int, int]]:
        """``(block index, size)`` pairs covering exactly ``n_samples``."""
        full, rest = divmod(self.n_samples, BLOCK)
        out = [(k, BLOCK) for k in range(full)]
        if rest:
            out.append((full, rest))
        return out

    def chunks(self) -> list[list[tuple[int, int]]]:
        """Blocks grouped into work units of about ``chunk_size`` samples."""
        per = max(1, round(self.chunk_size / BLOCK))
        blocks = self.blocks()
        return [blocks[i:i + per] for i in range(0, len(blocks), per)]


@dataclass(frozen=True)
class SimRecord:
    gbar_db: float
    outage: float
    outage_ci: float
    aber: float
    aber_ci: float
    si: float
    m1: float
    m2: float
    n: int


COLUMNS = tuple(SimRecord.__dataclass_fields__)


@dataclass(frozen=True)
class SimResult:
    records: tuple[SimRecord, ...]
    seed: int = 0
    g_th: float = 1.0

    def to_csv(self, metadata: Sequence[str] = ()) -> str:
        buf = io.StringIO()
        for line in metadata:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.records:
            w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"seed": self.seed, "g_th": self.g_th, "records": [asdict(r) for r in self.records]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc: dict) -> "SimResult":
        return cls(tuple(SimRecord(**r) for r in doc["records"]), doc.get("seed", 0), doc.get("g_th", 1.0))


def _fmt(v) -> str:
    return str(v) if isinstance(v, int) else repr(float(v))


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------

def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def sample_gamma_gamma(gg: GammaGammaParams, rng: np.random.Generator, size: int) -> np.ndarray:
    """Product of unit-mean Gamma(alpha) and Gamma(beta) variates.

    numpy's ``standard_gamma`` uses Marsaglia-Tsang rejection, with the
    ``U^(1/k)`` boost for shapes below one.
    """
    x = rng.standard_gamma(gg.alpha, size) / gg.alpha
    return x * (rng.standard_gamma(gg.beta, size) / gg.beta)


def sample_mixture(mg: MixtureGamma, rng: np.random.Generator, size: int) -> np.ndarray:
    """Direct draws from the mixture: pick a term by its mass, then a Gamma."""
    masses = mg.term_masses()
    cum = np.cumsum(masses / masses.sum())
    k = np.minimum(np.searchsorted(cum, rng.random(size), side="right"), len(mg) - 1)
    b = np.asarray(mg.b)[k]
    c = np.asarray(mg.c)[k]
    return rng.standard_gamma(b) / c


def _sample_branch(br: Branch, rng, size):
    if isinstance(br, GammaGammaParams):
        return sample_gamma_gamma(br, rng, size)
    return sample_mixture(br, rng, size)


def sample_amplitude(branches: Sequence[Branch], pointing: PointingModel,
                     rng: np.random.Generator, size: int) -> np.ndarray:
    """``z = sum_j x_j y_j``."""
    z = np.zeros(size)
    for br in branches:
        x = _sample_branch(br, rng, size)
        if not pointing.is_degenerate:
            x *= sample_pointing(pointing, rng.random(size))
        z += x
    return z


def _block_sums(branches, pointing, cfg: SimConfig, block: int, size: int) -> np.ndarray:
    rng = block_rng(cfg.seed, block)
    z2 = sample_amplitude(branches, pointing, rng, size) ** 2
    p, q = cfg.mod.p, cfg.mod.q
    out = np.empty((len(cfg.gbar_grid), 5))
    for i, gb in enumerate(cfg.gbar_grid):
        g = (gb * gb) * z2
        if p == 0.5:
            ber = 0.5 * special.erfc(np.sqrt(q * g))
        else:
            ber = 0.5 * special.gammaincc(p, q * g)
        out[i] = (np.count_nonzero(g < cfg.g_th), ber.sum(), (ber * ber).sum(), g.sum(), (g * g).sum())
    return out


def simulate_egc(branches: Union[EgcLink, Sequence[Branch]], pointing: PointingModel = None,
                 cfg: SimConfig = None, fading: str = "gamma-gamma") -> SimResult:
    """Monte Carlo estimates over ``cfg.gbar_grid``.

    Parameters
    ----------
    branches
        Per-branch :class:`GammaGammaParams` or :class:`MixtureGamma`, or an
        :class:`EgcLink` (its pointing model is then used).
    fading : {"gamma-gamma", "mixture"}
        Only used with an :class:`EgcLink`: sample the Gamma-Gamma channel
        each branch was fitted from, or the mixture itself.
    """
    if cfg is None:
        raise DomainError("a SimConfig is required")
    if isinstance(branches, EgcLink):
        link = branches
        pointing = link.pointing
        if fading == "mixture":
            branches = list(link.branches)
        elif fading == "gamma-gamma":
            if any(br.source is None for br in link.branches):
                raise DomainError("gamma-gamma sampling needs branches fitted from Gamma-Gamma")
            branches = [br.source for br in link.branches]
        else:
            raise ValueError(f"unknown fading {fading!r}")
    if pointing is None:
        raise DomainError("a pointing model is required")
    branches = list(branches)

    def run_chunk(chunk):
        return [_block_sums(branches, pointing, cfg, k, size) for k, size in chunk]

    per_block = [s for part in map_ordered(run_chunk, cfg.chunks(), min_items=2) for s in part]
    n = cfg.n_samples
    records = []
    for i, gb in enumerate(cfg.gbar_grid):
        tot = [math.fsum(s[i, col] for s in per_block) for col in range(5)]
        pout = tot[0] / n
        ab = tot[1] / n
        # unbiased sample variance of the conditional BER
        ab_var = max(tot[2] - n * ab * ab, 0.0) / max(n - 1, 1)
        m1 = tot[3] / n
        m2 = tot[4] / n
        records.append(SimRecord(
            gbar_db=10.0 * math.log10(gb),
            outage=pout,
            outage_ci=wilson_halfwidth(pout, n),
            aber=ab,
            aber_ci=Z95 * math.sqrt(ab_var / n),
            si=m2 / (m1 * m1) - 1.0,
            m1=m1,
            m2=m2,
            n=n,
        ))
    return SimResult(tuple(records), cfg.seed, cfg.g_th)


def wilson_halfwidth(p: float, n: int, z: float = Z95) -> float:
    """Largest distance from ``p`` to the Wilson score interval bounds.

    Unlike the Wald width ``z sqrt(p (1 - p) / n)`` this stays positive when
    every (or no) sample is in outage.
    """
    z2 = z * z
    centre = (p + z2 / (2 * n)) / (1 + z2 / n)
    half = z / (1 + z2 / n) * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n))
    return max(p - (centre - half), (centre + half) - p)


def sample_snr(branches: Sequence[Branch], pointing: PointingModel, gbar: float,
               n_samples: int, seed: int = 1) -> np.ndarray:
    """Raw SNR draws ``(gbar z)^2``, block-seeded like :func:`simulate_egc`."""
    parts = []
    full, rest = divmod(n_samples, BLOCK)
    sizes = [BLOCK] * full + ([rest] if rest else [])
    for k, size in enumerate(sizes):
        parts.append((gbar * sample_amplitude(list(branches), pointing, block_rng(seed, k), size)) ** 2)
    return np.concatenate(parts) if parts else np.empty(0)


class Histogram(NamedTuple):
    edges: np.ndarray
    density: np.ndarray
    stderr: np.ndarray
    counts: np.ndarray


def empirical_pdf(samples, bins=50) -> Histogram:
    """Density histogram with binomial standard errors per bin.

    The density integrates to one over the sample range.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 1000:
        raise DomainError(f"empirical_pdf needs at least 1000 samples, got {x.size}")
    if np.all(x == x[0]):
        raise DomainError("all samples are equal; the histogram range is degenerate")
    counts, edges = np.histogram(x, bins=bins)
    n = x.size
    width = np.diff(edges)
    p = counts / n
    return Histogram(edges, p / width, np.sqrt(p * (1.0 - p) / n) / width, counts)

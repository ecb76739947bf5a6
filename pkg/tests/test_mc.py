import json
import math

import numpy as np
import pytest
from scipy import special, stats

from fso_egc.egc import EgcLink, ModulationParams, outage_probability
from fso_egc.errors import DomainError
from fso_egc.mc import (
    BLOCK,
    SimConfig,
    SimResult,
    block_rng,
    empirical_pdf,
    sample_amplitude,
    sample_gamma_gamma,
    sample_mixture,
    simulate_egc,
)
from fso_egc.mixture import GammaGammaParams, fit_gamma_gamma, mg_cdf
from fso_egc.pointing import PointingModel

PM = PointingModel.from_geometry(1.8, 0.1, 1.0)


def gg_draws(gg, n, seed=7):
    full, rest = divmod(n, BLOCK)
    sizes = [BLOCK] * full + ([rest] if rest else [])
    return np.concatenate([sample_gamma_gamma(gg, block_rng(seed, k), s) for k, s in enumerate(sizes)])


@pytest.mark.parametrize("gg", [(2.1, 1.5), (0.5, 2.0)])
def test_gamma_gamma_moments(gg):
    p = GammaGammaParams(*gg)
    x = gg_draws(p, 10**7)
    assert np.all(x > 0)
    assert abs(x.mean() - 1) <= 3 * x.std() / math.sqrt(x.size)
    si = x.var() / x.mean() ** 2
    assert si == pytest.approx(p.scintillation_index(), rel=0.02)


def test_gamma_gamma_vs_fitted_mixture_ks():
    gg = GammaGammaParams(4.2, 1.4)
    mg = fit_gamma_gamma(gg, 10)
    x = gg_draws(gg, 10**6)
    assert stats.kstest(x, lambda v: mg_cdf(mg, v)).statistic <= 0.01


def test_mixture_sampler_matches_cdf():
    mg = fit_gamma_gamma(GammaGammaParams(2.1, 1.5), 10)
    x = sample_mixture(mg, block_rng(1, 0), 200_000)
    assert stats.kstest(x, lambda v: mg_cdf(mg, v)).statistic <= 0.005


def test_pointing_gains_bounded():
    rng = block_rng(2, 0)
    z = sample_amplitude([GammaGammaParams(2.1, 1.5)], PM, rng, 100_000)
    x = sample_gamma_gamma(GammaGammaParams(2.1, 1.5), block_rng(2, 0), 100_000)
    # same stream: the first draws are the fading, then the pointing gains
    assert np.all(z <= x * PM.a0 + 1e-15) and np.all(z > 0)


def test_bpsk_conditional_ber_identity():
    g = np.geomspace(1e-4, 50, 200)
    assert np.allclose(0.5 * special.gammaincc(0.5, g), 0.5 * special.erfc(np.sqrt(g)), rtol=1e-13, atol=0)


def test_blocks_cover_samples():
    cfg = SimConfig(3 * BLOCK + 17, chunk_size=BLOCK)
    assert sum(s for _, s in cfg.blocks()) == cfg.n_samples
    assert sum(len(c) for c in cfg.chunks()) == len(cfg.blocks())


def test_chunk_size_does_not_change_results():
    link = EgcLink.gamma_gamma(GammaGammaParams(2.1, 1.5), 2, PM)
    grid = (10.0, 100.0, 1000.0)
    a = simulate_egc(link, cfg=SimConfig(300_000, seed=9, chunk_size=BLOCK, gbar_grid=grid))
    b = simulate_egc(link, cfg=SimConfig(300_000, seed=9, chunk_size=2 * BLOCK, gbar_grid=grid))
    c = simulate_egc(link, cfg=SimConfig(300_000, seed=10, chunk_size=BLOCK, gbar_grid=grid))
    assert a == b and a != c


def test_thread_count_does_not_change_results(monkeypatch):
    link = EgcLink.gamma_gamma(GammaGammaParams(0.5, 2.0), 2, PointingModel(1.0, PM.a0))
    cfg = SimConfig(5 * BLOCK, seed=3, chunk_size=BLOCK, gbar_grid=(50.0,))
    monkeypatch.setenv("FSO_EGC_THREADS", "1")
    a = simulate_egc(link, cfg=cfg, fading="mixture")
    monkeypatch.setenv("FSO_EGC_THREADS", "3")
    b = simulate_egc(link, cfg=cfg, fading="mixture")
    assert a == b


def test_two_branch_outage_brackets_closed_form():
    link = EgcLink.gamma_gamma(GammaGammaParams(2.1, 1.5), 2, PM)
    gbar = 100.0
    rec = simulate_egc(link, cfg=SimConfig(10**6, seed=1, gbar_grid=(gbar,)), fading="mixture").records[0]
    assert abs(rec.outage - outage_probability(link, gbar, 1.0)) <= rec.outage_ci


def test_ci_calibration():
    link = EgcLink.gamma_gamma(GammaGammaParams(2.1, 1.5), 1, PM)
    gbar = 10 ** 2.4
    exact = outage_probability(link, gbar, 1.0)
    inside = 0
    for seed in range(100):
        rec = simulate_egc(link, cfg=SimConfig(50_000, seed=seed, gbar_grid=(gbar,)), fading="mixture").records[0]
        inside += abs(rec.outage - exact) <= rec.outage_ci
    assert inside >= 90


def test_result_serialization():
    link = EgcLink.gamma_gamma(GammaGammaParams(2.1, 1.5), 1, PM)
    res = simulate_egc(link, cfg=SimConfig(10_000, seed=4, gbar_grid=(10.0, 1000.0),
                                           mod=ModulationParams(1.0, 0.5)))
    text = res.to_csv(["meta"])
    lines = text.splitlines()
    assert lines[0] == "# meta"
    assert lines[1] == "gbar_db,outage,outage_ci,aber,aber_ci,si,m1,m2,n"
    assert len(lines) == 4
    assert SimResult.from_dict(json.loads(res.to_json())) == res
    for r in res.records:
        assert 0 <= r.outage <= 1 and 0 <= r.aber <= 0.5
        assert r.outage_ci >= 0 and r.aber_ci >= 0 and r.n == 10_000


def test_sim_config_validation():
    with pytest.raises(DomainError):
        SimConfig(0)
    with pytest.raises(DomainError):
        SimConfig(10, seed=-1)
    with pytest.raises(DomainError):
        SimConfig(10, gbar_grid=())


def test_empirical_pdf_exponential():
    x = np.random.default_rng(5).exponential(size=10**6)
    h = empirical_pdf(x, bins=np.linspace(0, 5, 26))
    widths = np.diff(h.edges)
    expect = np.exp(-h.edges[:-1]) - np.exp(-h.edges[1:])
    assert np.all(np.abs(h.density * widths - expect) <= 3 * h.stderr * widths + 1e-12)
    full = empirical_pdf(x)
    assert math.fsum(full.density * np.diff(full.edges)) == pytest.approx(1.0, abs=1e-12)


def test_empirical_pdf_errors():
    with pytest.raises(DomainError):
        empirical_pdf(np.ones(5000))
    with pytest.raises(DomainError):
        empirical_pdf(np.arange(10.0))


def test_wilson_halfwidth():
    from fso_egc.mc import Z95, wilson_halfwidth

    assert wilson_halfwidth(1.0, 10**7) > 0 and wilson_halfwidth(0.0, 10**7) > 0
    wald = Z95 * math.sqrt(0.25 / 10**7)
    assert wilson_halfwidth(0.5, 10**7) == pytest.approx(wald, rel=1e-4)

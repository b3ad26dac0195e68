import math
import random

import spikegh as sg


def test_import():
    assert sg.__version__ == "0.1.0"


def test_default_fit_artifact():
    fit = sg.load_default_fit()
    p = fit.nu_N
    assert p.alpha > abs(p.beta)
    assert fit.fit_sample_count > 0
    nu_x, mixing = sg.scale_gh_prior(fit.nu_N, 1.7)
    for x in (0.1, 0.8, 2.4):
        assert math.isfinite(sg.gh_log_pdf(nu_x, x))
    assert mixing.delta == fit.nu_N.delta * 1.7


def test_fit_save_load_roundtrip(tmp_path):
    fit = sg.load_default_fit()
    path = tmp_path / "fit.json"
    sg.save_gh_fit(fit, str(path))
    back = sg.load_gh_fit(str(path))
    assert back.nu_N.lam == fit.nu_N.lam
    assert back.nu_N.alpha == fit.nu_N.alpha
    assert back.nu_N.delta == fit.nu_N.delta
    assert back.fit_kl_estimate == fit.fit_kl_estimate
    assert back.fit_seed == fit.fit_seed


def test_scenario_generation_deterministic():
    sc = sg.Scenario()
    sc.seed = 3
    a = sg.generate_scenario(sc)
    b = sg.generate_scenario(sc)
    assert a.obs.n == 84 and a.obs.m == 64
    assert list(a.obs.y) == list(b.obs.y)
    assert sum(a.truth.q) == sc.spike_count
    assert all(x >= 0.0 for x in a.truth.x)
    sc.seed = 4
    c = sg.generate_scenario(sc)
    assert list(a.obs.y) != list(c.obs.y)


def test_distribution_samplers():
    gig = sg.GigParams(-0.5, 1.0, 1.0)
    n = 20000
    draws = sg.gig_sample(gig, n, 42)
    mean = sum(draws) / n
    m1 = sg.gig_moment(gig, 1)
    var = sg.gig_moment(gig, 2) - m1 * m1
    assert abs(mean - m1) < 4.0 * math.sqrt(var / n)
    assert all(d > 0 for d in draws)

    trunc = sg.truncnorm_sample(0.4, 1.3, 5000, 7)
    assert all(t >= 0 for t in trunc)

    gh = sg.GhParams(-0.5, 2.0, 0.6, 0.9, 0.15)
    xs = sg.gh_sample(gh, 1000, 11)
    assert all(math.isfinite(sg.gh_log_pdf(gh, x)) for x in xs)


def test_short_chain_and_posterior_mean():
    fit = sg.load_default_fit()
    sc = sg.Scenario()
    sc.seed = 5
    gen = sg.generate_scenario(sc)

    chains = []
    for j in range(2):
        cfg = sg.SamplerConfig()
        cfg.iterations = 400
        cfg.seed = 100 + j
        cfg.sample_scale = True
        init = sg.random_state(gen.obs, gen.hp, fit.nu_N, 0.25, 900 + j)
        chains.append(sg.run_chain(cfg, gen.obs, init, gen.hp, fit.nu_N,
                                   sg.SamplerKind.BGH))

    pm = sg.posterior_mean(chains[0], 200)
    assert len(pm.mean_x) == gen.obs.m
    assert len(pm.inclusion) == gen.obs.m
    assert all(math.isfinite(v) for v in pm.mean_x)
    assert all(0.0 <= v <= 1.0 for v in pm.inclusion)

    metrics = sg.reconstruction_metrics(pm.mean_x, pm.inclusion, gen.truth, 1)
    assert 0.0 <= metrics.recall <= 1.0
    assert metrics.rmse >= 0.0

    trace = sg.mpsrf_trace(sg.q_monitors(chains), 100)
    assert len(trace) == 4
    assert all(t.r >= 0.9 for t in trace)


def test_btg_chain_runs():
    fit = sg.load_default_fit()
    sc = sg.Scenario()
    sc.seed = 5
    gen = sg.generate_scenario(sc)
    cfg = sg.SamplerConfig()
    cfg.iterations = 300
    cfg.seed = 17
    init = sg.random_state(gen.obs, gen.hp, fit.nu_N, 0.25, 18)
    ch = sg.run_chain(cfg, gen.obs, init, gen.hp, fit.nu_N, sg.SamplerKind.BTG)
    assert len(ch.q_hist) == 300
    assert ch.counters.amp_var_proposed == 300


def test_mpsrf_null_and_separated():
    rng = random.Random(123)
    null = [[[rng.gauss(0.0, 1.0) for _ in range(3)] for _ in range(4000)]
            for _ in range(4)]
    r = sg.mpsrf(null)
    assert 0.95 < r < 1.1

    apart = [[[rng.gauss(10.0 * j, 1.0)] for _ in range(1000)]
             for j in range(2)]
    assert sg.mpsrf(apart) > 10.0

    trace = sg.mpsrf_trace(null, 1000)
    conv = sg.convergence_iteration(trace, 1.2)
    assert conv == 1000


def test_log_marginal_finite():
    fit = sg.load_default_fit()
    sc = sg.Scenario()
    sc.seed = 2
    gen = sg.generate_scenario(sc)
    state = sg.random_state(gen.obs, gen.hp, fit.nu_N, 0.25, 99)
    w_full = [1.0] * gen.obs.m
    for site, w in zip(state.active, state.w):
        w_full[site] = w
    lm = sg.log_marginal(state.q, w_full, gen.obs, gen.hp, fit.nu_N)
    lj = sg.log_joint(state, gen.obs, gen.hp, fit.nu_N)
    assert math.isfinite(lm) and math.isfinite(lj)

import numpy as np
import pytest

from hestonfx.errors import HorizonMismatch, InvalidParameters
from hestonfx.model import HestonParams, MarketEnv, VanillaOption
from hestonfx.montecarlo import Scheme, SimConfig, boundary_stats, mc_price, mc_prices, sample_mean, simulate
from hestonfx.variance import TermParams, cir_moments

from conftest import REF_ENV, REF_PARAMS

VIOLATING = HestonParams(kappa=0.5, theta=0.01, sigma=0.3, rho=0.0, v0=0.01)


@pytest.fixture(scope="module")
def one_year_qe():
    return simulate(REF_PARAMS, REF_ENV, SimConfig(n_paths=1_000_000, horizon=1.0, seed=7))


@pytest.mark.parametrize(
    "kwargs",
    [dict(n_paths=1), dict(n_paths=11), dict(n_steps=0), dict(horizon=0.0), dict(scheme="milstein")],
)
def test_config_validation(kwargs):
    with pytest.raises((InvalidParameters, ValueError)):
        SimConfig(**kwargs)


def test_step_count_per_year_or_total():
    assert SimConfig(n_steps=100, horizon=2.5).total_steps == 250
    assert SimConfig(n_steps=30, steps_per_year=False, horizon=2.5).total_steps == 30


def test_same_seed_is_bit_identical():
    cfg = SimConfig(n_paths=20_000, horizon=0.5, seed=99, keep_paths=True)
    a = simulate(REF_PARAMS, REF_ENV, cfg)
    b = simulate(REF_PARAMS, REF_ENV, cfg)
    assert np.array_equal(a.spot_paths, b.spot_paths) and np.array_equal(a.var_paths, b.var_paths)


def test_output_independent_of_worker_count():
    cfg = SimConfig(n_paths=40_000, horizon=0.25, seed=3)
    a = simulate(REF_PARAMS, REF_ENV, cfg, workers=1)
    b = simulate(REF_PARAMS, REF_ENV, cfg, workers=3)
    assert np.array_equal(a.spot_paths, b.spot_paths) and np.array_equal(a.zero_hits, b.zero_hits)


def test_different_seeds_differ():
    a = simulate(REF_PARAMS, REF_ENV, SimConfig(n_paths=1000, seed=1))
    b = simulate(REF_PARAMS, REF_ENV, SimConfig(n_paths=1000, seed=2))
    assert not np.array_equal(a.terminal_spot, b.terminal_spot)


def test_antithetic_layout():
    p = REF_PARAMS.with_(sigma=1e-12)
    paths = simulate(p, REF_ENV, SimConfig(n_paths=10, horizon=1.0, seed=0, scheme="euler_absorbing"))
    x = np.log(paths.terminal_spot / REF_ENV.spot)
    # deterministic variance: row i and row i + n/2 mirror around the drift
    drift = (REF_ENV.mu - 0.5 * p.theta) * 1.0
    np.testing.assert_allclose(x[:5] + x[5:], 2 * drift, atol=1e-12)
    assert np.all(x[:5] != x[5:])


def test_keep_paths_shapes():
    paths = simulate(REF_PARAMS, REF_ENV, SimConfig(n_paths=100, n_steps=12, horizon=0.5, keep_paths=True))
    assert paths.spot_paths.shape == (100, 7) and paths.var_paths.shape == (100, 7)
    np.testing.assert_allclose(paths.time_grid, np.linspace(0, 0.5, 7))
    assert np.all(paths.spot_paths[:, 0] == REF_ENV.spot)


@pytest.mark.parametrize("scheme", list(Scheme))
def test_degenerate_vol_of_vol(scheme):
    p = REF_PARAMS.with_(sigma=1e-12)
    cfg = SimConfig(scheme=scheme, n_paths=200_000, horizon=1.0, seed=5, antithetic=False, keep_paths=True)
    paths = simulate(p, REF_ENV, cfg)
    assert np.max(np.abs(paths.var_paths - p.theta)) < 1e-8
    r = np.log(paths.terminal_spot / REF_ENV.spot)
    n = r.size
    var = r.var(ddof=1)
    assert abs(var - p.theta * 1.0) < 3 * var * np.sqrt(2.0 / (n - 1))
    assert boundary_stats(paths).zero_fraction == 0.0


def test_terminal_variance_mean_matches_cir(one_year_qe):
    mean, _, _ = cir_moments(TermParams.constant(2.0, 0.04, 0.3), REF_PARAMS.v0, 1.0)
    m, se = sample_mean(one_year_qe, one_year_qe.terminal_var)
    assert abs(m - mean) < 3 * se


def test_discounted_forward_is_martingale(one_year_qe):
    m, se = sample_mean(one_year_qe, one_year_qe.terminal_spot * np.exp(-REF_ENV.mu))
    assert abs(m - REF_ENV.spot) < 3 * se


def test_tiny_strike_call_is_forward_value(one_year_qe):
    price, se = mc_price(one_year_qe, VanillaOption(1e-8, 1.0), REF_ENV)
    want = REF_ENV.spot * np.exp(-REF_ENV.rf) - 1e-8 * np.exp(-REF_ENV.rd)
    assert abs(price - want) < 3 * se


def test_parity_on_common_paths(one_year_qe):
    env, k = REF_ENV, 4.3
    c, _ = mc_price(one_year_qe, VanillaOption(k, 1.0, 1), env)
    q, _ = mc_price(one_year_qe, VanillaOption(k, 1.0, -1), env)
    _, se = sample_mean(one_year_qe, np.exp(-env.rd) * (one_year_qe.terminal_spot - k))
    assert abs((c - q) - (env.spot * np.exp(-env.rf) - k * np.exp(-env.rd))) < 3 * se


def test_ladder_pricing_matches_single(one_year_qe):
    prices, ses = mc_prices(one_year_qe, [3.8, 4.2], 1.0, REF_ENV)
    p, s = mc_price(one_year_qe, VanillaOption(4.2, 1.0), REF_ENV)
    assert prices[1] == pytest.approx(p, rel=1e-12) and ses[1] == pytest.approx(s, rel=1e-9)


def test_horizon_mismatch():
    paths = simulate(REF_PARAMS, REF_ENV, SimConfig(n_paths=100, horizon=1.0))
    with pytest.raises(HorizonMismatch):
        mc_price(paths, VanillaOption(4.0, 0.5), REF_ENV)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_qe_rarely_hits_zero_when_feller_holds(seed):
    paths = simulate(REF_PARAMS, REF_ENV, SimConfig(n_paths=100_000, horizon=1.0, seed=seed))
    assert boundary_stats(paths).zero_fraction < 1e-4


def test_absorbing_euler_hits_zero_when_feller_fails():
    paths = simulate(VIOLATING, REF_ENV, SimConfig(scheme="euler_absorbing", n_paths=20_000, seed=1))
    stats = boundary_stats(paths)
    assert stats.zero_fraction > 0 and stats.min_var_quantiles["0.0"] == 0.0


def test_reflecting_euler_never_sits_at_zero():
    paths = simulate(VIOLATING, REF_ENV, SimConfig(scheme="euler_reflecting", n_paths=20_000, seed=1))
    assert boundary_stats(paths).zero_fraction == 0.0


@pytest.mark.parametrize("scheme", list(Scheme))
def test_variance_non_negative_and_spot_positive(scheme):
    p = HestonParams(0.3, 0.02, 1.0, -0.7, 0.02)
    paths = simulate(p, REF_ENV, SimConfig(scheme=scheme, n_paths=4000, horizon=2.0, seed=4, keep_paths=True))
    assert paths.var_paths.min() >= 0.0
    assert paths.spot_paths.min() > 0.0 and np.all(np.isfinite(paths.spot_paths))


def test_driver_correlation_is_realised():
    # drivers are recovered exactly from Euler increments while the variance stays positive
    p = HestonParams(2.0, 0.04, 0.3, -0.5, 0.04)
    env = REF_ENV
    cfg = SimConfig(scheme="euler_absorbing", n_paths=20_000, n_steps=50, seed=8, antithetic=False, keep_paths=True)
    paths = simulate(p, env, cfg)
    dt = paths.time_grid[1]
    v0, v1 = paths.var_paths[:, :-1], paths.var_paths[:, 1:]
    x = np.log(paths.spot_paths)
    with np.errstate(divide="ignore", invalid="ignore"):
        zs = (np.diff(x, axis=1) - (env.mu - 0.5 * v0) * dt) / np.sqrt(v0 * dt)
        zv = (v1 - v0 - p.kappa * (p.theta - v0) * dt) / (p.sigma * np.sqrt(v0 * dt))
    ok = (v0 > 0) & (v1 > 0)
    r = np.corrcoef(zs[ok], zv[ok])[0, 1]
    assert abs(r - p.rho) < 3 / np.sqrt(ok.sum())


def test_schemes_agree_on_fine_grids():
    opt = VanillaOption(4.0, 1.0)
    results = {}
    for scheme in Scheme:
        cfg = SimConfig(scheme=scheme, n_paths=200_000, n_steps=10 * 2**4, horizon=1.0, seed=21)
        results[scheme] = mc_price(simulate(REF_PARAMS, REF_ENV, cfg), opt, REF_ENV)
    prices = np.array([v[0] for v in results.values()])
    ses = np.array([v[1] for v in results.values()])
    i, j = np.argmax(prices), np.argmin(prices)
    assert prices[i] - prices[j] < 3 * np.hypot(ses[i], ses[j])


def test_stationary_initial_variance():
    cfg = SimConfig(n_paths=200_000, n_steps=1, steps_per_year=False, horizon=0.01, seed=2,
                    stationary_v0=True, keep_paths=True)
    paths = simulate(REF_PARAMS, REF_ENV, cfg)
    v0 = paths.var_paths[:, 0]
    m, se = sample_mean(paths, v0)
    assert abs(m - REF_PARAMS.theta) < 3 * se
    half = v0.size // 2
    assert np.array_equal(v0[:half], v0[half:])


def test_thread_cap_from_environment(monkeypatch):
    from hestonfx.montecarlo import worker_count

    monkeypatch.setenv("HESTON_FX_THREADS", "2")
    assert worker_count() == 2
    monkeypatch.setenv("HESTON_FX_THREADS", "junk")
    assert worker_count() >= 1


def test_degenerate_market_rejected():
    with pytest.raises(InvalidParameters):
        simulate(REF_PARAMS, MarketEnv(-1.0, 0.0, 0.0), SimConfig(n_paths=10))

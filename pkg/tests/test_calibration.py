import numpy as np
import pytest

from hestonfx import garman_kohlhagen as gk
from hestonfx.analytic import vanilla_price
from hestonfx.calibration import (
    DEFAULT_PILLARS,
    SmileQuote,
    SmileSlice,
    calibrate_slice,
    calibrate_surface,
    implied_vol,
    model_smile,
    read_smile_csv,
    strike_from_delta,
    synthetic_slice,
    write_smile_csv,
)
from hestonfx.errors import DegenerateSlice, DeltaOutOfRange, InvalidParameters, NoConvergence, PriceOutOfBand
from hestonfx.model import HestonParams, MarketEnv, VanillaOption

from conftest import REF_ENV, REF_PARAMS, SMILE_ENV, SMILE_PARAMS


@pytest.fixture(scope="module")
def smile():
    return synthetic_slice(SMILE_PARAMS, SMILE_ENV, 0.5)


def test_strike_from_delta_hand_value():
    assert strike_from_delta(MarketEnv(1.0, 0.0, 0.0), 1.0, 0.5, 0.2) == pytest.approx(np.exp(0.02), rel=1e-15)


@pytest.mark.parametrize("delta", [-0.25, -0.1, 0.1, 0.25, 0.5, 0.9])
def test_strike_from_delta_round_trip(delta):
    env, tau, vol = MarketEnv(1.3, 0.03, 0.015), 0.75, 0.1
    k = strike_from_delta(env, tau, delta, vol)
    got = gk.spot_delta(env.spot, k, tau, env.rd, env.rf, vol, 1 if delta > 0 else -1)
    assert got == pytest.approx(delta, abs=1e-12)


def test_delta_saturation_and_range():
    env, tau = MarketEnv(1.0, 0.02, 0.04), 1.0
    cap = np.exp(-env.rf * tau)
    assert strike_from_delta(env, tau, cap * (1 - 1e-12), 0.2) < 0.4
    with pytest.raises(DeltaOutOfRange):
        strike_from_delta(env, tau, cap, 0.2)
    with pytest.raises(DeltaOutOfRange):
        strike_from_delta(env, tau, -0.99, 0.2)


def test_implied_vol_round_trip():
    env = REF_ENV
    for k, phi in [(3.5, -1), (4.0, 1), (4.8, 1)]:
        price = gk.price(env.spot, k, 0.5, env.rd, env.rf, 0.2, phi)
        vol = implied_vol(env, VanillaOption(k, 0.5, phi), price)
        assert vol == pytest.approx(0.2, abs=1e-8)
        assert gk.price(env.spot, k, 0.5, env.rd, env.rf, vol, phi) == pytest.approx(price, abs=1e-10)


def test_implied_vol_rejects_arbitrage():
    env = REF_ENV
    opt = VanillaOption(3.0, 0.5)
    intrinsic = env.spot * np.exp(-env.rf * 0.5) - 3.0 * np.exp(-env.rd * 0.5)
    with pytest.raises(PriceOutOfBand):
        implied_vol(env, opt, intrinsic - 1e-6)
    with pytest.raises(PriceOutOfBand):
        implied_vol(env, opt, env.spot)


def test_heston_atm_implied_vol_near_long_run_level():
    price = vanilla_price(REF_PARAMS, REF_ENV, VanillaOption(4.0, 0.5))
    assert implied_vol(REF_ENV, VanillaOption(4.0, 0.5), price) == pytest.approx(0.2, abs=0.02)


def test_flat_smile_without_vol_of_vol():
    p = HestonParams(1.5, 0.04, 1e-6, 0.0, 0.04)
    _, vols = model_smile(p, SMILE_ENV, 0.5, DEFAULT_PILLARS, [0.2] * 5)
    np.testing.assert_allclose(vols, 0.2, atol=1e-4)


def _summary(p, env=SMILE_ENV, tau=0.5):
    """(25d put, ATM, 25d call) vols of a self-consistent model smile."""
    sl = synthetic_slice(p, env, tau, (-0.25, 0.5, 0.25))
    return sl.vols


def test_vol_of_vol_raises_convexity():
    conv = []
    for s in (0.1, 0.2, 0.3, 0.4):
        put, atm, call = _summary(SMILE_PARAMS.with_(sigma=s))
        conv.append(put + call - 2 * atm)
    assert np.all(np.diff(conv) > 0)


def test_positive_correlation_lifts_call_wing():
    call_pos = _summary(SMILE_PARAMS.with_(rho=0.3))[2]
    call_zero = _summary(SMILE_PARAMS.with_(rho=0.0))[2]
    assert call_pos > call_zero


def test_round_trip_recovery(smile):
    res = calibrate_slice(smile, SMILE_ENV, fixed_v0=0.01, fixed_kappa=1.5, initial_guess=(0.3, 0.02, 0.0))
    assert res.converged
    assert abs(res.sigma - 0.2) < 1e-3 and abs(res.theta - 0.015) < 1e-5 and abs(res.rho - 0.05) < 1e-3
    assert res.sse < 1e-12


def test_result_bookkeeping(smile):
    res = calibrate_slice(smile, SMILE_ENV, fixed_v0=0.01)
    assert res.sse == float(np.sum(res.per_pillar_errors**2))
    np.testing.assert_array_equal(res.per_pillar_errors, res.market_vols - res.model_vols)
    assert all(b <= a for a, b in zip(res.trace, res.trace[1:]))
    assert res.sse <= res.trace[0]
    for d, k, v in zip(res.deltas, res.strikes, res.market_vols):
        got = gk.spot_delta(SMILE_ENV.spot, k, 0.5, SMILE_ENV.rd, SMILE_ENV.rf, v, 1 if d > 0 else -1)
        assert got == pytest.approx(d, abs=1e-12)
    d = res.as_dict()
    assert d["feller"]["alpha_dim"] == pytest.approx(4 * 1.5 * res.theta / res.sigma**2)


def test_default_v0_is_atm_variance(smile):
    res = calibrate_slice(smile, SMILE_ENV, max_evals=5)
    assert res.v0 == smile.atm_vol**2 and res.kappa == 1.5


def test_flat_smile_fit():
    sl = SmileSlice.from_pairs(0.5, DEFAULT_PILLARS, [0.2] * 5)
    res = calibrate_slice(sl, SMILE_ENV, fixed_v0=0.04)
    assert res.sigma < 0.05
    assert res.sse < 5 * 1e-8


def test_skewed_smile_recovers_negative_correlation():
    p = SMILE_PARAMS.with_(rho=-0.35, sigma=0.4, theta=0.02)
    sl = synthetic_slice(p, SMILE_ENV, 0.5)
    res = calibrate_slice(sl, SMILE_ENV, fixed_v0=p.v0)
    assert res.rho < -0.2


def test_feller_failure_recommends_rerun():
    p = SMILE_PARAMS.with_(sigma=0.6)
    sl = synthetic_slice(p, SMILE_ENV, 0.5)
    res = calibrate_slice(sl, SMILE_ENV, fixed_v0=p.v0, initial_guess=(0.5, 0.015, 0.0))
    assert not res.feller.satisfied and res.recommended_kappa == 3.0


def test_weights_hook(smile):
    w = np.array([0.0, 1.0, 4.0, 1.0, 0.0])
    res = calibrate_slice(smile, SMILE_ENV, fixed_v0=0.01, weights=w, max_evals=50)
    assert res.sse == pytest.approx(float(np.sum(w * res.per_pillar_errors**2)), rel=1e-14)
    with pytest.raises(InvalidParameters):
        calibrate_slice(smile, SMILE_ENV, weights=[1.0, 2.0])


def test_degenerate_slice():
    sl = SmileSlice.from_pairs(0.5, [-0.25, 0.25], [0.11, 0.1])
    with pytest.raises(DegenerateSlice):
        calibrate_slice(sl, SMILE_ENV)


def test_budget_exhaustion(smile):
    res = calibrate_slice(smile, SMILE_ENV, fixed_v0=0.01, max_evals=10)
    assert not res.converged
    with pytest.raises(NoConvergence):
        calibrate_slice(smile, SMILE_ENV, fixed_v0=0.01, max_evals=10, raise_on_failure=True)


def test_slice_validation():
    with pytest.raises(InvalidParameters):
        SmileQuote(1.2, 0.1)
    with pytest.raises(InvalidParameters):
        SmileSlice.from_pairs(0.5, [0.25, 0.25], [0.1, 0.1])
    with pytest.raises(InvalidParameters):
        SmileSlice(0.5, ())


def test_surface_same_generating_model(smile):
    other = synthetic_slice(SMILE_PARAMS, SMILE_ENV, 1.0)
    surf = calibrate_surface([smile, other], SMILE_ENV, fixed_v0=0.01)
    a, b = surf.results
    assert (a.sigma, a.theta, a.rho) == pytest.approx((b.sigma, b.theta, b.rho), rel=1e-5)
    fwd = surf.forwards[0]
    assert fwd["forward_sigma"] == pytest.approx(b.sigma, rel=1e-4)
    assert fwd["forward_rho"] == b.rho


def test_surface_rising_vol_of_vol():
    p1, p2 = SMILE_PARAMS.with_(sigma=0.3), SMILE_PARAMS.with_(sigma=0.5)
    slices = [synthetic_slice(p1, SMILE_ENV, 0.5), synthetic_slice(p2, SMILE_ENV, 1.0)]
    surf = calibrate_surface(slices, SMILE_ENV, fixed_v0=0.01)
    assert [r.sigma for r in surf.results] == pytest.approx([0.3, 0.5], abs=1e-3)
    assert surf.forwards[0]["forward_sigma"] > 0.5


def test_surface_single_slice_and_errors(smile):
    bad = SmileSlice.from_pairs(2.0, [-0.25, 0.25], [0.11, 0.1])
    surf = calibrate_surface([smile, bad], SMILE_ENV, fixed_v0=0.01, max_evals=50)
    assert len(surf.results) == 1 and surf.forwards == []
    assert surf.errors["2.0"]["error"] == "DegenerateSlice"
    with pytest.raises(InvalidParameters):
        calibrate_surface([bad, smile], SMILE_ENV)


def test_smile_csv_round_trip(tmp_path, smile):
    path = tmp_path / "smile.csv"
    write_smile_csv(path, [smile, SmileSlice(1.0, smile.quotes)])
    assert path.read_text().splitlines()[0] == "tenor_years,delta,quote_vol"
    back = read_smile_csv(path)
    assert back[0] == smile and back[1].tau == 1.0
    bad = tmp_path / "bad.csv"
    bad.write_text("tenor,delta,vol\n0.5,0.25,0.1\n")
    with pytest.raises(InvalidParameters):
        read_smile_csv(bad)

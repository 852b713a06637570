import json
import math

import pytest

from hestonfx.errors import InvalidParameters
from hestonfx.model import (
    HestonParams,
    MarketEnv,
    VanillaOption,
    dump_document,
    from_document,
    load_document,
    to_document,
    validate_all,
    validate_params,
)


def names(exc):
    return [n for n, _ in exc.value.violations]


def test_valid_set_passes(ref):
    p, env = ref
    validate_all(p, env, VanillaOption(4.0, 0.5))


def test_all_violations_are_reported():
    p = HestonParams(kappa=-1.0, theta=0.0, sigma=-0.1, rho=1.0, v0=-0.01)
    with pytest.raises(InvalidParameters) as exc:
        validate_params(p)
    assert set(names(exc)) >= {"NonPositiveKappa", "NonPositiveTheta", "NonPositiveSigma",
                               "CorrelationOutOfRange", "NegativeV0"}


def test_market_and_option_violations(ref):
    p, _ = ref
    with pytest.raises(InvalidParameters) as exc:
        validate_all(p, MarketEnv(0.0, 0.05, math.nan), VanillaOption(-1.0, 0.0, 2))
    got = set(names(exc))
    assert {"NonPositiveSpot", "NonPositiveStrike", "NonPositiveTau", "InvalidOptionSign"} <= got


def test_zero_v0_is_allowed():
    validate_params(HestonParams(2.0, 0.04, 0.3, 0.0, 0.0))


def test_document_round_trip(tmp_path, ref):
    p, env = ref
    path = tmp_path / "p.json"
    dump_document(path, p, env)
    doc = load_document(path)
    assert set(doc) == {"kappa", "theta", "sigma", "rho", "v0", "lambda", "spot", "rd", "rf"}
    assert from_document(doc) == (p, env)
    assert to_document(p, env) == doc


def test_unknown_key_rejected():
    with pytest.raises(InvalidParameters) as exc:
        from_document({"kappa": 1, "volvol": 2})
    assert names(exc) == ["UnknownKey"]


def test_non_object_document(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps([1, 2]))
    with pytest.raises(InvalidParameters):
        load_document(path)


def test_error_report_is_machine_readable():
    with pytest.raises(InvalidParameters) as exc:
        validate_params(HestonParams(0.0, 0.04, 0.3, 0.0, 0.04))
    d = exc.value.to_dict()
    assert d["error"] == "InvalidParameters" and d["violations"] == ["NonPositiveKappa"]

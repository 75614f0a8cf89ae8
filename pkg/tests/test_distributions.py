import math

import numpy as np
import pytest

from trunctail import burr, frechet, pareto, parse_model
from trunctail.distributions import HeavyTailModel


def test_burr_survival_frozen_value():
    # (1 + 1^4)^(-0.25/0.6) = 2^(-5/12)
    model = burr(0.25, 0.6)
    assert model.survival(1.0) == pytest.approx(2.0 ** (-5.0 / 12.0), rel=1e-14)
    assert model.survival(1.0) == pytest.approx(0.7491535384383408, rel=1e-12)


def test_burr_quantile_frozen_value():
    model = burr(0.25, 0.6)
    # ((1 - 0.5)^(-0.6/0.25) - 1)^0.25, evaluated independently
    direct = (0.5 ** (-2.4) - 1.0) ** 0.25
    assert model.quantile(0.5) == pytest.approx(direct, rel=1e-14)
    assert model.quantile(0.5) == pytest.approx(1.4381725596178896, rel=1e-12)


def test_pareto_frozen_values():
    model = pareto(0.5)
    assert model.survival(4.0) == pytest.approx(0.0625, abs=1e-15)
    assert model.quantile(0.75) == pytest.approx(2.0, rel=1e-14)
    assert model.survival(0.5) == 1.0
    assert model.df(0.5) == 0.0


def test_frechet_df_matches_definition():
    model = frechet(0.8)
    for x in (0.3, 1.0, 5.0):
        assert model.df(x) == pytest.approx(math.exp(-x ** (-1.25)), rel=1e-14)
    assert model.df(0.0) == 0.0
    assert model.survival(0.0) == 1.0


@pytest.mark.parametrize("model", [burr(0.25, 0.6), burr(2.0, 1.1),
                                   pareto(0.5), frechet(0.8)])
def test_quantile_df_round_trip(model):
    u = np.linspace(0.01, 0.99, 25)
    back = model.df(model.quantile(u))
    assert np.allclose(back, u, rtol=1e-11, atol=1e-12)


@pytest.mark.parametrize("model", [burr(0.25, 0.6), pareto(0.5), frechet(0.8)])
def test_survival_plus_df_is_one(model):
    x = np.geomspace(0.1, 1e6, 30) if model.family != "pareto" else np.geomspace(1.0, 1e6, 30)
    total = model.survival(x) + model.df(x)
    assert np.allclose(total, 1.0, rtol=0, atol=1e-12)


def test_survival_is_nonincreasing():
    for model in (burr(0.25, 0.6), pareto(1.5), frechet(0.8)):
        x = np.geomspace(1e-3, 1e8, 200)
        s = model.survival(x)
        assert np.all(np.diff(s) <= 1e-15)
        assert np.all((0.0 <= s) & (s <= 1.0))


def test_tail_decay_matches_index():
    # survival(x) ~ x^(-1/gamma): the log-log slope between two far points
    for model in (burr(0.25, 0.6), pareto(0.7), frechet(1.2)):
        s4, s6 = model.survival(1e4), model.survival(1e6)
        slope = (math.log(s6) - math.log(s4)) / (math.log(1e6) - math.log(1e4))
        assert slope == pytest.approx(-1.0 / model.tail_index, rel=1e-3)


def test_sample_reproducible_and_distributed():
    model = burr(0.25, 0.6)
    a = model.sample(500, seed=42)
    b = model.sample(500, seed=42)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, model.sample(500, seed=43))
    # Kolmogorov-Smirnov style bound, comfortably above the 1% point
    for seed in (7, 19, 101):
        draw = np.sort(model.sample(2000, seed=seed))
        ecdf_hi = np.arange(1, 2001) / 2000.0
        ecdf_lo = np.arange(0, 2000) / 2000.0
        fx = model.df(draw)
        gap = max(np.max(np.abs(fx - ecdf_hi)), np.max(np.abs(fx - ecdf_lo)))
        assert gap < 1.7 / math.sqrt(2000)


def test_second_order_tau_burr_numeric():
    # U(t) = quantile(1 - 1/t); h(t) = U(2t)/U(t) - 2^gamma decays like t^tau
    model = burr(0.25, 0.6)
    u = lambda t: model.quantile(1.0 - 1.0 / t)
    t1, t2 = 10.0 ** 1.5, 10.0 ** 3
    h1 = u(2 * t1) / u(t1) - 2.0 ** model.tail_index
    h2 = u(2 * t2) / u(t2) - 2.0 ** model.tail_index
    slope = math.log(abs(h2) / abs(h1)) / math.log(t2 / t1)
    assert model.second_order_tau() == pytest.approx(-0.6 / 0.25, abs=1e-12)
    assert slope == pytest.approx(-2.4, abs=0.02)


def test_second_order_tau_frechet_numeric():
    model = frechet(0.8)
    u = lambda t: model.quantile(1.0 - 1.0 / t)
    t1, t2 = 1e2, 1e4
    h1 = u(2 * t1) / u(t1) - 2.0 ** model.tail_index
    h2 = u(2 * t2) / u(t2) - 2.0 ** model.tail_index
    slope = math.log(abs(h2) / abs(h1)) / math.log(t2 / t1)
    assert model.second_order_tau() == -1.0
    assert slope == pytest.approx(-1.0, abs=0.01)


def test_second_order_tau_pareto_sentinel():
    assert pareto(0.5).second_order_tau() == float("-inf")


def test_constructor_validation():
    with pytest.raises(ValueError):
        HeavyTailModel("cauchy", 1.0)
    with pytest.raises(ValueError):
        burr(0.25, -0.6)
    with pytest.raises(ValueError):
        burr(0.0, 0.6)
    with pytest.raises(ValueError):
        HeavyTailModel("pareto", 0.5, delta=0.25)
    with pytest.raises(ValueError):
        pareto(1.0).quantile(1.0)
    with pytest.raises(ValueError):
        pareto(1.0).quantile(0.0)
    with pytest.raises(ValueError):
        pareto(1.0).survival(-1.0)


def test_parse_model_round_trip():
    for model in (burr(0.25, 0.6), pareto(0.5), frechet(0.8)):
        again = parse_model(model.spec_string())
        assert again == model
    assert parse_model("burr:delta=0.25,gamma=0.6") == burr(0.25, 0.6)
    assert parse_model(" PARETO:gamma=1.5 ") == pareto(1.5)


def test_parse_model_rejects_malformed():
    for text in ("burr", "burr:delta=0.25", "pareto:gamma=x",
                 "weibull:gamma=1", "pareto:gamma=1,delta=2"):
        with pytest.raises(ValueError):
            parse_model(text)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from xurllc.channel import GammaSinrModel
from xurllc.errors import DomainError, NumericError
from xurllc.montecarlo import service_draws
from xurllc.snc import (QosSpec, ServiceModel, arrival_mgf, gamma_laplace,
                        min_deconv_closed_form, min_deconv_mgf, service_inv_mgf,
                        stability_edge, ub_sdvp_at_theta, ub_sdvp_inf)
from xurllc.validation import laplace_quadrature

MODEL = GammaSinrModel(8.0, 0.3)


@pytest.mark.parametrize("theta", [1e-3, 5e-3, 2e-2])
def test_exact_inverse_mgf_matches_simulation(theta):
    service = ServiceModel.fixed_eps(MODEL, 1e-2, 150, laplace=False)
    x = np.exp(-theta * service_draws(service, 200_000, seed=1))
    se = x.std() / math.sqrt(x.size)
    assert abs(service_inv_mgf(service, theta) - x.mean()) <= 3 * se


@pytest.mark.parametrize("theta", [1e-3, 2e-2, 0.2])
def test_fixed_rate_inverse_mgf_matches_simulation(theta):
    service = ServiceModel.fixed_rate(0.2, 0.1, 170)
    x = np.exp(-theta * service_draws(service, 200_000, seed=2))
    se = max(x.std() / math.sqrt(x.size), 1e-12)
    assert abs(service_inv_mgf(service, theta) - x.mean()) <= 3 * se


def test_arrival_mgf_matches_poisson_moments():
    rng = np.random.default_rng(5)
    a = rng.poisson(40.0, 400_000)
    x = np.exp(0.01 * a)
    assert arrival_mgf(40.0, 0.01) == pytest.approx(x.mean(), abs=3 * x.std() / math.sqrt(x.size))


def test_arrival_mgf_overflow_raises():
    with pytest.raises(NumericError):
        arrival_mgf(1e3, 10.0)


@given(st.floats(1.0, 60.0), st.floats(0.01, 10.0), st.floats(0.01, 10.0))
def test_laplace_identity(mu, nu, big_theta):
    g = GammaSinrModel(mu, nu)
    exact = gamma_laplace(g, big_theta)
    assert laplace_quadrature(g, big_theta) == pytest.approx(exact, rel=1e-8)


@given(st.floats(0.0, 0.99), st.floats(0.01, 0.99), st.integers(0, 30), st.integers(0, 30))
def test_closed_form_bounds_direct_sum(frac, ms, s, t):
    ma = 1.0 + frac * (1.0 / ms - 1.0)   # any stable pair with ma >= 1
    direct = min_deconv_mgf(lambda _: ma, lambda _: ms, 0.1, s, t)
    assert direct <= min_deconv_closed_form(ma, ms, s, t) * (1 + 1e-12)


def test_closed_form_unstable_is_infinite():
    assert min_deconv_closed_form(2.0, 0.6, 3, 1) == math.inf


def _service():
    return ServiceModel.fixed_eps(GammaSinrModel(40.0, 0.5), 1e-3, 200)


@given(st.integers(0, 40))
def test_bound_decreasing_in_delay(d):
    s = _service()
    b0 = ub_sdvp_at_theta(QosSpec(0.05, 200, d, 40.0), s)
    b1 = ub_sdvp_at_theta(QosSpec(0.05, 200, d + 1, 40.0), s)
    assert b1.value <= b0.value and 0 <= b1.value <= 1


@given(st.floats(0.0, 60.0), st.floats(0.0, 20.0))
def test_bound_increasing_in_arrival_rate(lam, extra):
    s = _service()
    lo = ub_sdvp_at_theta(QosSpec(0.05, 200, 4, lam), s).value
    hi = ub_sdvp_at_theta(QosSpec(0.05, 200, 4, lam + extra), s).value
    assert lo <= hi * (1 + 1e-12)


def test_no_arrivals_reduces_to_service_geometric():
    s = _service()
    ms = service_inv_mgf(s, 0.05)
    b = ub_sdvp_at_theta(QosSpec(0.05, 200, 3, 0.0), s)
    assert b.value == pytest.approx(ms ** 3 / (1 - ms), rel=1e-12)


def test_unstable_bound_is_one():
    s = ServiceModel.fixed_rate(0.2, 0.5, 170)   # mean service 17 bits
    b = ub_sdvp_at_theta(QosSpec(0.2, 170, 5, 40.0), s)
    assert b.value == 1.0 and not b.stable


def test_inf_matches_dense_grid():
    s = ServiceModel.fixed_rate(0.2, 0.05, 170)
    lam, d = 25.0, 6
    inf_b = ub_sdvp_inf(s, lam, d)
    grid = np.logspace(-6, 2, 1000)
    vals = [ub_sdvp_at_theta(QosSpec(t, 170, d, lam), s).value for t in grid]
    best = min(vals)
    assert inf_b.value <= best * (1 + 1e-4)
    assert inf_b.value >= best * (1 - 1e-2)


def test_stability_edge_separates_regions():
    s = ServiceModel.fixed_rate(0.2, 0.05, 170)
    lam = 25.0
    edge = stability_edge(s, lam)
    below, above = 10 ** (edge - 1e-3), 10 ** (edge + 1e-3)
    assert arrival_mgf(lam, below) * service_inv_mgf(s, below) < 1
    assert arrival_mgf(lam, above) * service_inv_mgf(s, above) >= 1


def test_inverse_mgf_edges():
    s = _service()
    assert service_inv_mgf(s, 0.0) == 1.0
    assert service_inv_mgf(ServiceModel.fixed_eps(MODEL, 1.0, 100), 0.3) == 1.0
    with pytest.raises(DomainError):
        service_inv_mgf(s, -0.1)
    with pytest.raises(DomainError):
        QosSpec(0.0, 100, 1, 1.0)

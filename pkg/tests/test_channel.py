import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as si
from scipy.optimize import brentq

from xurllc.channel import (GammaSinrModel, SystemConfig, derive_large_scale, fit_all,
                            fit_gamma_sinr, sinr_cdf, sinr_pdf)
from xurllc.errors import DomainError
from xurllc.montecarlo import empirical_sinr


def oracle_large_scale(cfg):
    d = np.linspace(cfg.d_min, cfg.d_max, cfg.n_ues)
    lam = cfg.pathloss_const * (d / cfg.d_min) ** -cfg.pathloss_exp
    rho = cfg.tx_power / cfg.noise_power
    n = cfg.pilot_len
    delta = rho * n * lam / (rho * n * lam + 1)
    omega = 1 / (np.sum(lam / (rho * n * lam + 1)) + 1 / rho)
    return lam, delta, omega


def oracle_fit(cfg, m):
    """Shape/scale via a bracketing root solve of the psi equation as written,
    N_T w l (1 - (M-1)/N_T + (M-1)/N_T psi) + 1, then kappa from its linear equation."""
    lam, delta, omega = oracle_large_scale(cfg)
    nt, big_m = cfg.n_antennas, cfg.n_ues
    lh = lam * delta
    a = np.delete(omega * lh, m)

    def den(p):
        return nt * a * (1 - (big_m - 1) / nt + (big_m - 1) / nt * p) + 1

    psi = brentq(lambda p: p - np.sum(1 / den(p)) / (big_m - 1), 0.0, 1.0, xtol=1e-15)
    d2 = den(psi) ** 2
    kappa = np.sum((a * psi + 1 / (big_m - 1)) / d2) / (1 + np.sum(a / d2))
    b = nt - big_m + 1
    return ((b + (big_m - 1) * psi) ** 2 / (b + (big_m - 1) * kappa),
            (b + (big_m - 1) * kappa) / (b + (big_m - 1) * psi) * omega * lh[m])


# Frozen from oracle_fit on the default configuration.
FROZEN_FIT = {
    0: (41.46297983561397, 1.0449261899706086),
    5: (41.335580755888294, 0.2391834431749878),
    11: (41.09464151493098, 0.0768257765888019),
}


@pytest.mark.parametrize("m", sorted(FROZEN_FIT))
def test_frozen_gamma_parameters(default_config, m):
    g = fit_gamma_sinr(default_config, derive_large_scale(default_config), m)
    assert g.shape == pytest.approx(FROZEN_FIT[m][0], rel=1e-10)
    assert g.scale == pytest.approx(FROZEN_FIT[m][1], rel=1e-10)


@given(n_t=st.integers(12, 120), n_ue=st.integers(2, 12), pilot=st.integers(12, 150),
       rho=st.floats(0.01, 2.0), m=st.integers(0, 11))
def test_fit_matches_root_solve(n_t, n_ue, pilot, rho, m):
    m = m % n_ue
    cfg = SystemConfig(n_antennas=max(n_t, n_ue), n_ues=n_ue, pilot_len=pilot, tx_power=rho)
    g = fit_gamma_sinr(cfg, derive_large_scale(cfg), m)
    shape, scale = oracle_fit(cfg, m)
    assert g.shape == pytest.approx(shape, rel=1e-9)
    assert g.scale == pytest.approx(scale, rel=1e-9)
    assert 0 < g.psi <= 1 and g.kappa > 0


def test_large_scale_matches_oracle(default_config):
    ls = derive_large_scale(default_config)
    lam, delta, omega = oracle_large_scale(default_config)
    np.testing.assert_allclose(ls.pathloss, lam, rtol=1e-14)
    np.testing.assert_allclose(ls.delta, delta, rtol=1e-14)
    assert ls.omega == pytest.approx(omega, rel=1e-14)


@given(st.integers(12, 300))
def test_estimate_quality_grows_with_pilots(n):
    lo = derive_large_scale(SystemConfig(pilot_len=12, bandwidth=1e6))
    hi = derive_large_scale(SystemConfig(pilot_len=n, bandwidth=1e6))
    assert np.all((hi.delta >= lo.delta) & (hi.delta < 1) & (hi.delta > 0))


def test_single_ue_reduces_to_scaled_chi_square():
    cfg = SystemConfig(n_ues=1, pilot_len=10)
    ls = derive_large_scale(cfg)
    g = fit_gamma_sinr(cfg, ls, 0)
    assert g.shape == cfg.n_antennas
    assert g.scale == pytest.approx(ls.omega * ls.composite[0])


@pytest.mark.parametrize("shape,scale", [(0.7, 2.0), (1.0, 0.5), (41.0, 0.08)])
def test_pdf_normalised_and_cdf_consistent(shape, scale):
    g = GammaSinrModel(shape, scale)
    total, _ = si.quad(lambda x: sinr_pdf(g, x), 0, np.inf, limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)
    x = 1.3 * g.mean
    part, _ = si.quad(lambda t: sinr_pdf(g, t), 0, x, limit=200)
    assert sinr_cdf(g, x) == pytest.approx(part, rel=1e-8)


def test_monte_carlo_mean_within_ten_percent(default_config):
    ls = derive_large_scale(default_config)
    samples = empirical_sinr(default_config, ls, 2000, seed=3)
    for m, g in enumerate(fit_all(default_config, ls)):
        assert abs(samples[:, m].mean() - g.mean) / g.mean < 0.10


@pytest.mark.parametrize("kwargs", [
    dict(n_antennas=10),            # fewer antennas than UEs
    dict(pilot_len=5),              # fewer pilots than UEs
    dict(pilot_len=240),            # no data symbols left
    dict(tx_power=0.0),
    dict(amp_eff=1.5),
    dict(distances=(40.0, 50.0)),
])
def test_config_rejects_invalid(kwargs):
    with pytest.raises(DomainError):
        SystemConfig(**kwargs)


def test_gamma_model_rejects_nonpositive():
    with pytest.raises(DomainError):
        GammaSinrModel(0.0, 1.0)
    with pytest.raises(DomainError):
        sinr_pdf(GammaSinrModel(2.0, 1.0), -1.0)

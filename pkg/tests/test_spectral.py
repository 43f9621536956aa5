import math

import numpy as np
import pytest
from scipy import stats

from artifact import numtheory, peaksim, spectral
from artifact.params import desk_params, table_params

MOD = peaksim.moderate_params()


@pytest.fixture(scope="module")
def desk_model():
    return spectral.build_model(desk_params(15), 2, 15)


@pytest.fixture(scope="module")
def mod_model():
    return spectral.build_model(MOD, 2, 15)


def test_build_model_tables():
    m = spectral.build_model(MOD, 1, 15)
    assert m.r == 1 and m.ind == {1: 0}
    m = spectral.build_model(MOD, 2, 15)
    assert set(m.rem) == {1, 2, 4, 8} and m.ind[8] == 3
    for k, i in m.ind.items():
        assert pow(2, i, 15) == k
    assert m.c_phi ** 2 >= 0.25
    with pytest.raises(ValueError):
        spectral.build_model(MOD, 5, 15)


def test_c_phi_brute_force(mod_model):
    # |c|^-2 = sum over (y, z) with y = z mod r of eta(y) eta(z) exp(-(y - z)^2 / (4 Delta^2))
    from artifact import gkpmath
    k, D, r = MOD.kappa_A, MOD.delta_A, 4
    z = np.arange(-3000, 3001)
    e = gkpmath.eta_kappa(z, k)
    total = 0.0
    for d in range(-8 * r, 8 * r + 1, r):
        total += math.exp(-d * d / (4 * D * D)) * float(np.sum(e * gkpmath.eta_kappa(z - d, k)))
    assert mod_model.c_phi == pytest.approx(1 / math.sqrt(total), rel=1e-12)


def test_theta_far_from_peaks(mod_model):
    peak = spectral.theta_hat_abs(mod_model, 1, 0.0)
    far = spectral.theta_hat_abs(mod_model, 1, 0.125)  # halfway between lattice points, 8 kappa away
    assert far <= 1e-20 * peak


def test_theta_lower_bound_lattice(desk_model, mod_model):
    for m in (desk_model, mod_model):
        for k in m.rem:
            for mm in range(-3 * m.r, 3 * m.r + 1):
                for om in (m.kappa_A / 4, m.kappa_A / 3, m.kappa_A / 2):
                    assert spectral.theta_lower_bound(m, k, mm, om).satisfied


def test_theta_zcut_stable():
    base = spectral.build_model(MOD, 7, 15)
    wide = spectral.build_model(MOD, 7, 15, z_cut=16.0)
    w = np.linspace(-0.3, 0.3, 101)
    for k in base.rem:
        a, b = spectral.theta_hat_abs(base, k, w), spectral.theta_hat_abs(wide, k, w)
        big = a > 1e-6 * a.max()
        assert np.max(np.abs(a[big] - b[big]) / b[big]) < 1e-12


def test_pdf_matches_direct_sum(mod_model, desk_model):
    for m in (mod_model, desk_model):
        w = np.linspace(-1.3, 1.3, 2001)
        a, b = spectral.pdf(m, w), spectral.pdf_direct(m, w)
        assert np.all(a >= 0)
        assert np.max(np.abs(a - b)) <= 1e-10 * np.max(b)


def test_pdf_integrates_to_one(mod_model):
    assert spectral.total_mass(mod_model) == pytest.approx(1.0, abs=1e-3)
    # brute-force trapezoid over the whole support
    w = np.arange(-70, 70, mod_model.kappa_A / 200)
    assert float(np.trapezoid(spectral.pdf(mod_model, w), w)) == pytest.approx(1.0, abs=1e-3)


def test_pdf_peak_families(mod_model):
    w = np.linspace(0, 1, 64001)[:-1]
    p = spectral.pdf(mod_model, w)
    is_max = (p > np.roll(p, 1)) & (p >= np.roll(p, -1)) & (p > 1e-6 * p.max())
    peaks = w[is_max]
    assert len(peaks) == 4
    assert np.allclose(peaks * 4, np.round(peaks * 4), atol=1e-4)


def test_comb_periodicity(mod_model, desk_model):
    for m in (mod_model, desk_model):
        w = np.linspace(-0.5, 0.5, 513)
        g = spectral.comb_power(m, w)
        assert np.max(np.abs(spectral.comb_power(m, w + 1 / m.r) - g)) <= 1e-10 * g.max()


def test_gamma_masses(desk_model):
    masses = spectral.gamma_masses(desk_model)
    bound = spectral.gamma_bound(desk_model)
    assert all(desk_model.preconditions.values())
    assert bound == pytest.approx(math.exp(-math.pi ** 2) / 64 / 4)
    assert all(v >= bound for v in masses.values())
    assert sum(masses.values()) <= 1 + 1e-9


def _interval_mass_trapezoid(model, center, n_per=4001):
    # independent oracle: dense trapezoid over every interval j + center +- 1/(2q), j over the envelope support
    half = 1 / (2 * model.q)
    jmax = int(math.sqrt(36 * math.log(10)) / (2 * math.pi * model.delta_A)) + 2
    total = 0.0
    t = np.linspace(-half, half, n_per)
    for j0 in range(-jmax, jmax + 1, 200):
        js = np.arange(j0, min(j0 + 200, jmax + 1))
        x = js[:, None] + center + t[None, :]
        total += float(np.trapezoid(spectral.pdf(model, x.ravel()).reshape(x.shape), t, axis=1).sum())
    return total


def test_gamma_mass_quadrature_oracle(desk_model):
    for d in (1, 2):
        ref = _interval_mass_trapezoid(desk_model, d / desk_model.r)
        assert spectral.gamma_mass(desk_model, d) == pytest.approx(ref, rel=1e-6)


def test_gamma_trivial_period():
    m = spectral.build_model(desk_params(15), 1, 15)
    ref = _interval_mass_trapezoid(m, 0.0)
    assert spectral.gamma_mass(m, 0) == pytest.approx(ref, rel=1e-6)
    assert ref == pytest.approx(1.0, abs=1e-3)


def test_sampler_deterministic(mod_model):
    s = spectral.Sampler(mod_model)
    a = s.sample(np.random.default_rng(42), 1000)
    b = s.sample(np.random.default_rng(42), 1000)
    assert np.array_equal(a, b)


def test_sampler_site_frequencies(desk_model):
    n = 100_000
    w = spectral.Sampler(desk_model).sample(np.random.default_rng(2024), n)
    q, r = desk_model.q, desk_model.r
    frac = w - np.floor(w)
    for d, mass in spectral.gamma_masses(desk_model).items():
        dist = np.abs(frac - d / r)
        dist = np.minimum(dist, 1 - dist)
        k = int(np.sum(dist <= 1 / (2 * q)))
        sigma = math.sqrt(n * mass * (1 - mass))
        assert abs(k - n * mass) <= 3 * sigma, (d, k, n * mass)


def test_sampler_ks(mod_model):
    x, cdf, _ = spectral.dense_cdf(mod_model)
    w = np.sort(spectral.Sampler(mod_model).sample(np.random.default_rng(7), 100_000))
    res = stats.kstest(w, lambda t: np.interp(t, x, cdf))
    assert res.statistic < 0.02


def test_fractional_sampler_table_params():
    m = spectral.build_model(table_params(15), 2, 15)
    s = spectral.Sampler(m)
    assert s.fractional
    v = s.sample(np.random.default_rng(1), 2000)
    assert np.all((v >= 0) & (v < 1))
    # at kappa = 2^-64 every draw sits on a lattice point d/4 to double precision
    assert np.max(np.abs(v * 4 - np.round(v * 4))) < 1e-12
    assert {numtheory.discretize(x, m.q) for x in v} <= {0, 64, 128, 192}
    with pytest.raises(ValueError):
        spectral.dense_cdf(m)

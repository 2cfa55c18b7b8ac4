import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bubblelab.conformal_radius import (MCEstimate, RadiusSample, adaptive_shell, moment_exponent, moment_pipeline,
                                        polygon_distance, psi_prime_abs, wos_log_radius, write_moment_csv)
from bubblelab.errors import BiasError, ClearanceError, DomainError, NonconvergenceError
from bubblelab.liouville_constants import LiouvilleParams

P = LiouvilleParams(math.sqrt(8 / 3))


def circle(r, c=0j, n=4000):
    return c + r * np.exp(2j * np.pi * np.arange(n) / n)


def box(h, c=0j):
    return c + np.array([-h - 1j * h, h - 1j * h, h + 1j * h, -h + 1j * h])


class TestWalkOnSpheres:
    @pytest.mark.parametrize("r", [0.5, 1.0, 3.0])
    def test_disk(self, r):
        s = wos_log_radius(circle(r), 0j, 2048, rng_seed=1)
        # every exit is on the circle, so the estimate is exact up to the shell
        assert s.log_radius_mean == pytest.approx(math.log(r), abs=1e-3)

    def test_disk_off_center(self):
        # Rad(D_r, z) = (r^2 - |z|^2)/r
        r, z = 1.0, 0.5 + 0j
        s = wos_log_radius(circle(r), z, 8192, rng_seed=2)
        exact = math.log((r * r - abs(z) ** 2) / r)
        assert abs(s.log_radius_mean - exact) < 4 * s.log_radius_se + 2e-3

    def test_square(self):
        # square of side 2 at its center, from the Schwarz-Christoffel map: 8 sqrt(pi) / Gamma(1/4)^2
        exact = 8 * math.sqrt(math.pi) / math.gamma(0.25) ** 2
        s = wos_log_radius(box(1.0), 0j, 8192, rng_seed=3)
        assert abs(s.log_radius_mean - math.log(exact)) < 4 * s.log_radius_se + 2e-3

    def test_large_box_approximates_half_plane(self):
        # Rad(H, i) = 2, so psi' = 1 for the identity map
        h = 50.0
        poly = np.array([-h, h, h + 2j * h, -h + 2j * h])
        s = wos_log_radius(poly, 1j, 4096, adaptive_shell(poly, 1j), rng_seed=4)
        assert s.log_radius_mean == pytest.approx(math.log(2), rel=0.02)
        assert psi_prime_abs(math.exp(s.log_radius_mean)) == pytest.approx(1.0, rel=0.02)

    def test_translation_invariance(self):
        a = wos_log_radius(box(1.0), 0.2 + 0.1j, 512, rng_seed=5)
        b = wos_log_radius(box(1.0, 7 - 3j), 7.2 - 2.9j, 512, rng_seed=5)
        assert a.log_radius_mean == pytest.approx(b.log_radius_mean, abs=1e-9)

    def test_inner_walk_doubling_halves_variance(self):
        se = [wos_log_radius(box(1.0), 0.3j, n, rng_seed=6).log_radius_se for n in (1024, 2048, 4096)]
        assert se[0] / se[1] == pytest.approx(math.sqrt(2), rel=0.15)
        assert se[1] / se[2] == pytest.approx(math.sqrt(2), rel=0.15)

    def test_clearance(self):
        with pytest.raises(ClearanceError):
            wos_log_radius(circle(1.0), 0.99999 + 0j, 64, shell=1e-4)

    def test_outside(self):
        with pytest.raises(ClearanceError):
            wos_log_radius(circle(1.0), 2.0 + 0j, 64)

    def test_step_budget(self):
        with pytest.raises(NonconvergenceError):
            wos_log_radius(circle(1.0), 0j, 64, shell=1e-12, step_budget=3)

    def test_few_walks(self):
        with pytest.raises(DomainError):
            wos_log_radius(circle(1.0), 0j, 8)

    def test_polygon_distance(self):
        assert polygon_distance(box(1.0), 0.5 + 0j) == pytest.approx(0.5)

    def test_adaptive_shell(self):
        poly = circle(1.0)
        assert adaptive_shell(poly, 0j) == pytest.approx(2e-4)
        near = 0.99 + 0j
        assert adaptive_shell(poly, near) == pytest.approx(0.01 * polygon_distance(poly, near))
        wos_log_radius(poly, near, 64, adaptive_shell(poly, near), rng_seed=1)


class TestPsi:
    @pytest.mark.parametrize("rad,expected", [(2.0, 1.0), (1.0, 0.5), (0.3, 0.15)])
    def test_examples(self, rad, expected):
        assert psi_prime_abs(rad) == expected

    def test_nonpositive(self):
        with pytest.raises(DomainError):
            psi_prime_abs(0.0)


class TestMomentPipeline:
    def test_gamma_exponent_is_zero(self):
        assert moment_exponent(P, P.gamma) == 0.0
        est = moment_pipeline(P, [P.gamma], [RadiusSample(0.1, 0.01, 256)])[0]
        assert est.value == 1.0 and est.std_error == 0.0

    @pytest.mark.parametrize("p", [-1.0, 0.5, 1.5])
    def test_lognormal_debias(self, p):
        # log radii m_i ~ N(mu, tau^2) observed with walk noise of sd s: the debiased
        # estimator recovers E[exp(p (m - log 2))] = exp(p (mu - log 2) + p^2 tau^2 / 2)
        # small gamma so that positive exponents are reachable
        par = LiouvilleParams(0.5)
        rng = np.random.default_rng(7)
        mu, tau, s, n = 0.4, 0.2, 0.15, 20000
        alpha = next(a for a in np.linspace(0.2, 4.0, 40001) if abs(moment_exponent(par, a) - p) < 2e-4)
        p_eff = moment_exponent(par, alpha)
        true = mu + tau * rng.standard_normal(n)
        obs = true + s * rng.standard_normal(n)
        samples = [RadiusSample(float(x), s, 256) for x in obs]
        est = moment_pipeline(par, [alpha], samples, n_boot=200, bias_limit=1.0)[0]
        exact = math.exp(p_eff * (mu - math.log(2)) + 0.5 * p_eff**2 * tau**2)
        assert abs(est.value - exact) < 3 * est.std_error
        naive = np.mean(np.exp(p_eff * (obs - math.log(2))))
        assert abs(naive - exact) > abs(est.value - exact)

    def test_q_scale(self):
        s = [RadiusSample(math.log(0.6), 0.0, 256)]
        a = next(a for a in np.linspace(0.3, 3.0, 10) if moment_exponent(P, a) != 0)
        est = moment_pipeline(P, [a], s, q_scale=0.3, n_boot=0)[0]
        assert est.value == pytest.approx(1.0)

    def test_bias_guard(self):
        s = [RadiusSample(0.0, 1.0, 256)]
        with pytest.raises(BiasError):
            moment_pipeline(P, [0.5], s)

    def test_empty(self):
        with pytest.raises(DomainError):
            moment_pipeline(P, [0.5], [])

    def test_csv(self, tmp_path):
        alphas = [0.5, P.gamma]
        samples = [RadiusSample(0.1 * k, 0.01, 256) for k in range(10)]
        est = moment_pipeline(P, alphas, samples, n_boot=50)
        path = tmp_path / "m.csv"
        write_moment_csv(path, P, alphas, est, [1.0, 1.0])
        rows = list(csv.DictReader(path.open()))
        assert list(rows[0]) == ["alpha", "p", "mc_value", "mc_se", "exact_value", "z_score"]
        assert float(rows[1]["mc_value"]) == 1.0


class TestRecords:
    def test_negative_se(self):
        with pytest.raises(DomainError):
            MCEstimate(1.0, -1.0, 3)

    def test_z_score(self):
        assert MCEstimate(1.2, 0.1, 10).z_score(1.0) == pytest.approx(2.0)
        assert MCEstimate(1.0, 0.0, 10).z_score(1.0) == 0.0

    @settings(max_examples=30)
    @given(m=st.floats(-5, 5), se=st.floats(0, 1), n=st.integers(64, 4096))
    def test_radius_sample_valid(self, m, se, n):
        RadiusSample(m, se, n)

    def test_radius_sample_min_walks(self):
        with pytest.raises(DomainError):
            RadiusSample(0.0, 0.1, 32)

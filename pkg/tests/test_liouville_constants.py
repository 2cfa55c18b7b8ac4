import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import gamma as G

from bubblelab.errors import RangeError
from bubblelab.liouville_constants import (
    CosmologicalPair,
    InsertionSpec,
    LiouvilleParams,
    beta_of_weight,
    bulk_boundary_assemble,
    cr_moment_general,
    cr_moment_general_direct,
    cr_moment_w2,
    cr_moment_w2_corrected,
    cr_moment_w2_from_structure,
    cr_renormalized,
    disk2_joint_density,
    fzz_s,
    lf_laplace,
    lf_length_density,
    reflection,
    reflection_bar,
    scaling_dimension,
    seiberg_check,
    structure_g_bar,
    thin_disk_laplace,
    u0_bar,
    u_fzz,
    weight_of_beta,
)
from bubblelab.liouville_constants import _d_refl_line
from bubblelab.special_functions import DEFAULT_CFG
from oracles import mp_log_double_sine, mp_log_gamma_b

KAPPA_83 = LiouvilleParams.from_kappa(8 / 3)
P1 = LiouvilleParams(1.0)
P12 = LiouvilleParams(1.2)


def _rbar_oracle(gamma, beta, mu1, mu2):
    # factor-by-factor product with mpmath special functions
    Q = 2 / gamma + gamma / 2
    b = gamma / 2
    e = (2 / gamma) * (Q - beta)
    pref = ((2 * math.pi) ** (e - 0.5) * (2 / gamma) ** ((gamma / 2) * (Q - beta) - 0.5)
            / ((Q - beta) * float(mpmath.gamma(1 - gamma**2 / 4)) ** e))
    s1 = Q / 2 - 1j * math.log(mu1) / (math.pi * gamma)
    s2 = Q / 2 - 1j * math.log(mu2) / (math.pi * gamma)
    lv = (mp_log_gamma_b(beta - gamma / 2, b) - mp_log_gamma_b(Q - beta, b)
          - mp_log_double_sine(beta / 2 + s2 - s1, b) - mp_log_double_sine(beta / 2 + s1 - s2, b))
    return (pref * cmath.exp(lv) * cmath.exp(1j * math.pi * (s1 + s2 - Q) * (Q - beta))).real


class TestParams:
    def test_derived_fields(self):
        p = LiouvilleParams(1.3)
        assert p.q_coef == 2 / 1.3 + 1.3 / 2
        assert p.kappa == 1.3 * 1.3

    @pytest.mark.parametrize("g", [0.0, 2.0, -1.0])
    def test_rejects(self, g):
        with pytest.raises(RangeError):
            LiouvilleParams(g)

    def test_kappa_cannot_disagree(self):
        p = LiouvilleParams.from_kappa(8 / 3)
        assert abs(p.kappa - 8 / 3) < 1e-15
        assert p.q_coef == 2 / p.gamma + p.gamma / 2


class TestWeights:
    def test_w2(self):
        assert beta_of_weight(P12, 2) == P12.gamma

    def test_threshold(self):
        assert abs(beta_of_weight(P12, P12.kappa / 2) - P12.q_coef) < 1e-15

    def test_arith(self):
        assert abs(beta_of_weight(LiouvilleParams(1.5), 4) - (1.5 - 2 / 1.5)) < 1e-15
        assert abs(beta_of_weight(LiouvilleParams(1.5), 4) - 0.16666666666666666) < 1e-15

    @pytest.mark.parametrize("w", np.linspace(0.1, 8, 17))
    def test_round_trip(self, w):
        assert abs(weight_of_beta(P12, beta_of_weight(P12, w)) - w) < 1e-14

    @pytest.mark.parametrize("g", [0.5, 1.2, 1.9])
    def test_beta_2w2(self, g):
        p = LiouvilleParams(g)
        for w in (0.1, 0.7, 2.0):
            assert abs(beta_of_weight(p, 2 * w + 2) - (g - 2 * w / g)) < 1e-14

    def test_insertion_spec(self):
        ins = InsertionSpec.from_weight(P12, 0.4, 2.1)
        assert ins.beta == beta_of_weight(P12, 0.4)
        assert ins.dim == scaling_dimension(P12, 2.1)


class TestScalingDimension:
    def test_zero(self):
        assert scaling_dimension(P12, 0) == 0

    @pytest.mark.parametrize("g", [0.4, 1.0, 1.7])
    def test_gamma_is_one(self, g):
        p = LiouvilleParams(g)
        assert abs(scaling_dimension(p, g) - 1) < 1e-14

    def test_max(self):
        assert abs(scaling_dimension(P12, P12.q_coef) - P12.q_coef**2 / 4) < 1e-14


class TestCosmologicalPair:
    def test_sigma_relation(self):
        c = CosmologicalPair.from_mus(P12, 0.3, 4.0)
        for mu, s in ((c.mu1, c.sigma1), (c.mu2, c.sigma2)):
            assert s.real == P12.q_coef / 2
            assert abs(cmath.exp(1j * math.pi * P12.gamma * (s - P12.q_coef / 2)) - mu) < 1e-12

    def test_both_zero(self):
        with pytest.raises(RangeError):
            CosmologicalPair.from_mus(P12, 0, 0)


class TestReflection:
    def test_homogeneity_example(self):
        lam = 2.5
        r1 = reflection_bar(P12, 1.0, (1.0, 2.0))
        r2 = reflection_bar(P12, 1.0, (lam, 2 * lam))
        assert r2 / r1 == pytest.approx(lam ** ((2 / 1.2) * (P12.q_coef - 1.0)), rel=1e-10)

    def test_symmetry(self):
        assert reflection_bar(P1, 1.8, (1, 3)) == pytest.approx(reflection_bar(P1, 1.8, (3, 1)), rel=1e-12)

    def test_oracle_equal_mus(self):
        val = reflection_bar(P1, 1.8, (1, 1))
        assert val > 0 and math.isfinite(val)
        assert val == pytest.approx(_rbar_oracle(1.0, 1.8, 1.0, 1.0), rel=1e-10)

    def test_oracle_unequal_mus(self):
        assert reflection_bar(P12, 2.0, (0.4, 1.7)) == pytest.approx(_rbar_oracle(1.2, 2.0, 0.4, 1.7), rel=1e-10)

    @settings(max_examples=10, deadline=None)
    @given(g=st.floats(0.6, 1.8), frac=st.floats(0.05, 0.95), lam=st.floats(0.1, 10),
           m1=st.floats(0.05, 20), m2=st.floats(0.05, 20))
    def test_homogeneity_random(self, g, frac, lam, m1, m2):
        p = LiouvilleParams(g)
        beta = g / 2 + frac * (p.q_coef + g / 2 - g / 2)  # inside (gamma/2, Q + gamma/2)
        if abs(beta - p.q_coef) < 1e-3:
            return
        r1 = reflection_bar(p, beta, (m1, m2))
        r2 = reflection_bar(p, beta, (lam * m1, lam * m2))
        assert r2 / r1 == pytest.approx(lam ** ((2 / g) * (p.q_coef - beta)), rel=1e-8)

    def test_thin_positive(self):
        assert thin_disk_laplace(P12, 0.5, 1.0, 1.0) > 0
        beta = beta_of_weight(P12, 0.5)
        assert P12.q_coef < beta < P12.q_coef + P12.gamma / 2
        assert -P12.gamma / (2 * (beta - P12.q_coef)) * reflection(P12, beta, (1, 1)) > 0

    def test_one_sided(self):
        # closed-form mu2 = 0 branch against the two-sided formula at tiny mu2
        one = reflection(P1, 2.3, (1, 0))
        assert np.isfinite(one)
        assert reflection(P1, 2.3, (1, 1e-9)) == pytest.approx(one, rel=1e-7)
        # and against the mpmath factor oracle of the one-sided product
        Q, g = P1.q_coef, 1.0
        e = 2 * (Q - 2.3)
        pref = ((2 * math.pi) ** (e - 0.5) * 2.0 ** ((Q - 2.3) / 2 - 0.5)
                / ((Q - 2.3) * math.gamma(0.75) ** e))
        lv = mp_log_gamma_b(2.3 - 0.5, 0.5) - mp_log_gamma_b(Q - 2.3, 0.5)
        oracle = -math.gamma(1 - e) * pref * cmath.exp(lv).real
        assert one == pytest.approx(oracle, rel=1e-10)

    def test_lambda_homogeneity_of_r(self):
        r1 = reflection(P12, 2.0, (1.0, 1.0))
        r2 = reflection(P12, 2.0, (3.0, 3.0))
        assert r2 / r1 == pytest.approx(3.0 ** ((2 / 1.2) * (P12.q_coef - 2.0)), rel=1e-10)


class TestThinDisk:
    def test_monotone(self):
        vals = [thin_disk_laplace(P12, 0.5, m, 1.0) for m in (0.5, 1, 2)]
        assert vals[0] > vals[1] > vals[2] > 0

    def test_symmetry(self):
        assert thin_disk_laplace(P12, 0.5, 0.3, 2.0) == pytest.approx(thin_disk_laplace(P12, 0.5, 2.0, 0.3), rel=1e-12)

    def test_oracle(self):
        beta = beta_of_weight(P1, 0.4)
        oracle = -1.0 / (2 * (beta - P1.q_coef)) * -math.gamma(1 - 2 * (P1.q_coef - beta)) * _rbar_oracle(1.0, beta, 1.0, 1.0)
        val = thin_disk_laplace(P1, 0.4, 1.0, 1.0)
        assert val > 0
        assert val == pytest.approx(oracle, rel=1e-10)

    def test_thick_rejected(self):
        with pytest.raises(RangeError):
            thin_disk_laplace(P12, 1.0, 1, 1)


class TestStructureConstant:
    @pytest.mark.parametrize("g", [0.8, 1.0, 1.3])
    def test_beta_zero_is_u0(self, g):
        # with beta = 0 the defining GMC moment is the one defining u0_bar
        p = LiouvilleParams(g)
        for a in (g / 2 + 0.3, 2 / g, p.q_coef - 0.1):
            assert structure_g_bar(p, a, 0.0) == pytest.approx(u0_bar(p, a), rel=1e-11)

    def test_positivity_grid(self):
        Q = P1.q_coef
        for a in np.linspace(0.7, 3.0, 6):
            for beta in np.linspace(-1.0, 2.4, 6):
                if beta < Q and 0.5 - a < beta / 2 < a:
                    assert structure_g_bar(P1, a, beta) > 0

    def test_range(self):
        with pytest.raises(RangeError):
            structure_g_bar(P1, 0.2, 0.0)

    @staticmethod
    def _displayed_shift_ratio(k, a):
        g = math.sqrt(k)
        return ((k / 4) * G(1 - k / 4) ** (4 / k) / ((2 * math.pi) ** (4 / k) * 2 ** (1 - 8 / k))
                * G(2 * a / g - 1) * G(4 / k) ** 2 / (G(8 / k - 1) * G(4 / k - 1) * G(2 * a / g - 4 / k)))

    def test_shift_ratio_alpha_dependence(self):
        # The alpha dependence of the shift identity is reproduced exactly.
        p, g = KAPPA_83, KAPPA_83.gamma
        ratios = [structure_g_bar(p, a, g) / structure_g_bar(p, a, g - 4 / g) / self._displayed_shift_ratio(8 / 3, a)
                  for a in (1.3, 1.9, 2.6)]
        assert max(ratios) / min(ratios) - 1 < 1e-10

    def test_shift_ratio_identity(self):
        p, g = KAPPA_83, KAPPA_83.gamma
        lhs = structure_g_bar(p, 1.9, g) / structure_g_bar(p, 1.9, g - 4 / g)
        assert lhs == pytest.approx(self._displayed_shift_ratio(8 / 3, 1.9), rel=1e-8)


class TestOnePoint:
    def test_u0_at_2_over_gamma(self):
        for g in (0.7, 1.0, 1.6):
            p = LiouvilleParams(g)
            assert abs(u0_bar(p, 2 / g) - math.pi) < 1e-12

    def test_u0_at_q(self):
        assert u0_bar(P12, P12.q_coef) == pytest.approx(1.0, abs=1e-14)

    def test_u0_g2_value(self):
        expected = (2 ** -0.75 * 2 * math.pi / math.gamma(0.75)) ** 2 * math.gamma(0.5)
        assert u0_bar(P1, 1.5) == pytest.approx(expected, rel=1e-13)

    def test_u0_range(self):
        with pytest.raises(RangeError):
            u0_bar(P1, 0.5)

    def test_fzz_branch_continuity(self):
        p = P12
        mu = 1.0
        mb_star = 1 / math.sqrt(math.sin(math.pi * p.kappa / 4))
        lo = u_fzz(p, 2.0, mu, mb_star * (1 - 1e-10))
        hi = u_fzz(p, 2.0, mu, mb_star * (1 + 1e-10))
        assert fzz_s(p, mu, mb_star * (1 - 1e-10)).imag == 0
        assert fzz_s(p, mu, mb_star * (1 + 1e-10)).real == 0
        assert lo == pytest.approx(hi, rel=1e-8)

    def test_fzz_mu_b_zero(self):
        s = fzz_s(P12, 2.0, 0.0)
        assert s.real == pytest.approx(1 / 1.2, rel=1e-14)
        g, Q, a = 1.2, P12.q_coef, 2.0
        inner = math.pi * 2.0 / 2 ** (g * a) * math.gamma(g * g / 4) / math.gamma(1 - g * g / 4)
        expected = ((4 / g) * 2 ** (-a * a / 2) * inner ** ((Q - a) / g) * math.gamma(g * a / 2 - g * g / 4)
                    * math.gamma(2 * a / g - 4 / g**2 - 1) * math.cos((a - Q) * math.pi / g))
        assert u_fzz(P12, a, 2.0, 0.0) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("mb", [0.3, 2.0])
    def test_fzz_scaling(self, mb):
        lam = 3.7
        a = 2.1
        lhs = u_fzz(P12, a, lam * 1.5, math.sqrt(lam) * mb)
        assert lhs == pytest.approx(lam ** ((P12.q_coef - a) / 1.2) * u_fzz(P12, a, 1.5, mb), rel=1e-12)

    def test_fzz_range(self):
        with pytest.raises(RangeError):
            u_fzz(P12, 1.0, 1.0, 1.0)


class TestDisk2:
    def test_scaling(self):
        lam = 2.3
        e = -4 / P12.kappa - 1
        assert disk2_joint_density(P12, lam * 0.4, lam * 1.1) == pytest.approx(lam**e * disk2_joint_density(P12, 0.4, 1.1), rel=1e-13)

    def test_symmetry(self):
        assert disk2_joint_density(P12, 0.4, 1.1) == disk2_joint_density(P12, 1.1, 0.4)

    def test_sqrt2(self):
        assert disk2_joint_density(LiouvilleParams(math.sqrt(2)), 1, 1) == pytest.approx(0.5, rel=1e-14)


class TestLengthLaw:
    A, B = 2.2, 1.0  # Q - alpha < beta/2 < alpha at gamma = 1

    def test_q_i(self):
        ratio = lf_length_density(P1, self.A, self.B, 1j, 0.7) / (
            2 ** (-self.A**2 / 2) * 0.7 ** (2 * (self.B / 2 + self.A - P1.q_coef) - 1) * 2 * structure_g_bar(P1, self.A, self.B))
        assert ratio == pytest.approx(1.0, rel=1e-14)

    def test_l_scaling(self):
        e = 2 * (self.B / 2 + self.A - P1.q_coef) - 1
        r = lf_length_density(P1, self.A, self.B, 1j, 2.0) / lf_length_density(P1, self.A, self.B, 1j, 1.0)
        assert r == pytest.approx(2**e, rel=1e-13)

    def test_laplace_matches_density(self):
        mu = 1.0
        f = lambda l: math.exp(-mu * l) * lf_length_density(P1, self.A, self.B, 1j, l)
        num = integrate.quad(f, 0, 1, epsrel=1e-12)[0] + integrate.quad(f, 1, np.inf, epsrel=1e-12)[0]
        assert lf_laplace(P1, self.A, self.B, 1j, mu) == pytest.approx(num, rel=1e-6)

    def test_listed_point_is_on_the_boundary(self):
        # at alpha = 2, beta = 1 the Gamma factor sits at its pole 0
        with pytest.raises(RangeError):
            lf_laplace(P1, 2.0, 1.0, 1j, 1.0)

    def test_mu_scaling(self):
        e = 2 * (P1.q_coef - self.A - self.B / 2)
        r = lf_laplace(P1, self.A, self.B, 1j, 4.0) / lf_laplace(P1, self.A, self.B, 1j, 1.0)
        assert r == pytest.approx(4**e, rel=1e-13)

    def test_q_ratio(self):
        db, da = scaling_dimension(P1, self.B), scaling_dimension(P1, self.A)
        r = lf_laplace(P1, self.A, self.B, 2j, 1.0) / lf_laplace(P1, self.A, self.B, 1j, 1.0)
        assert r == pytest.approx(2 ** (-2 * db) * 2 ** (db - 2 * da), rel=1e-13)


class TestCRW2:
    def test_zeroth_moment(self):
        assert abs(cr_moment_w2(KAPPA_83, KAPPA_83.gamma) - 1) < 1e-12

    def test_value(self):
        a = 1.5 * KAPPA_83.gamma / 2
        assert cr_moment_w2(KAPPA_83, a) == pytest.approx(math.gamma(1.5) * math.gamma(2.5) / math.gamma(2), rel=1e-13)
        assert cr_moment_w2(KAPPA_83, a) == pytest.approx(1.17810, abs=5e-6)

    @pytest.mark.parametrize("x", [1.6, 1.75, 2.25, 2.8, 3.5])
    def test_structure_route(self, x):
        # CR_2(alpha)/CR_2(gamma) from double gamma functions
        a = x * KAPPA_83.gamma / 2
        assert cr_moment_w2_from_structure(KAPPA_83, a) == pytest.approx(cr_moment_w2_corrected(KAPPA_83, a), rel=1e-10)

    def test_log_convex(self):
        g = KAPPA_83.gamma
        xs = np.linspace(1.05, 3.95, 40)
        lv = np.log([cr_moment_w2(KAPPA_83, x * g / 2) for x in xs])
        assert np.all(np.diff(lv, 2) > 0)

    def test_range(self):
        with pytest.raises(RangeError):
            cr_moment_w2(KAPPA_83, KAPPA_83.gamma / 2)


W_THIN = 0.4


class TestCRGeneral:
    def test_ratio_sanity(self):
        assert cr_moment_general(P12, P12.gamma, W_THIN) == 1.0
        v = cr_renormalized(P12, 2.1, W_THIN)
        assert v / cr_renormalized(P12, 2.1, W_THIN) == 1.0

    def test_two_routes(self):
        assert cr_moment_general(P12, 2.1, W_THIN) == pytest.approx(cr_moment_general_direct(P12, 2.1, W_THIN), rel=1e-6)

    def test_listed_alpha_outside_range(self):
        # alpha = 1.9 is below Q - beta_{2W+2}/2 = 2 for gamma = 1.2, w = 0.4
        with pytest.raises(RangeError):
            cr_moment_general(P12, 1.9, W_THIN)

    def test_integrand_decay(self):
        beta = beta_of_weight(P12, W_THIN)
        a = (2 / 1.2) * (P12.q_coef - 2.1)
        f = lambda m: m**a * _d_refl_line(1.2, beta, m, DEFAULT_CFG)
        assert abs(f(1e-6)) < abs(f(1e-3)) < abs(f(1.0))
        assert abs(f(1e8)) < abs(f(1e4)) < abs(f(1.0))
        assert abs(f(1e-6)) < 1e-2 and abs(f(1e8)) < 1e-4

    def test_grid(self):
        alphas = np.linspace(2.02, 2.84, 6)
        vals = [cr_moment_general(P12, a, W_THIN) for a in alphas]
        assert all(np.isfinite(vals)) and all(v > 0 for v in vals)
        assert np.max(np.abs(np.diff(vals))) < 0.1


class TestSeiberg:
    def test_direct(self):
        Q = P1.q_coef
        assert seiberg_check(P1, Q - 0.1, 0.5) == (Q - 0.1 + 0.25 > Q)

    def test_alpha_q(self):
        assert not seiberg_check(P1, P1.q_coef, 1.0)

    def test_true_case(self):
        assert seiberg_check(P1, 2.3, 1.0)


class TestBulkBoundary:
    A = 2.1

    def test_zero(self):
        assert bulk_boundary_assemble(P12, self.A, W_THIN, 1.0, 1.0, 0.0) == 0.0

    def test_linear(self):
        cr = cr_renormalized(P12, self.A, W_THIN)
        one = bulk_boundary_assemble(P12, self.A, W_THIN, 1.0, 1.0, 0.3, cr_value=cr)
        two = bulk_boundary_assemble(P12, self.A, W_THIN, 1.0, 1.0, 0.6, cr_value=cr)
        assert two == pytest.approx(2 * one, rel=1e-14)

    def test_prefactor_limit(self):
        a = P12.q_coef - 1e-6
        r = (bulk_boundary_assemble(P12, a, W_THIN, 5.0, 1.0, 1.0, cr_value=1.0)
             / bulk_boundary_assemble(P12, a, W_THIN, 0.2, 1.0, 1.0, cr_value=1.0))
        assert r == pytest.approx(1.0, abs=1e-5)

    def test_range(self):
        with pytest.raises(RangeError):
            bulk_boundary_assemble(P12, P12.q_coef, W_THIN, 1.0, 1.0, 1.0)

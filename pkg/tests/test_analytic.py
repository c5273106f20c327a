"""Closed-form generating functions and moment formulas vs exact recursions."""

import math

import numpy as np
import pytest

from dqwalk import analytic, pure
from dqwalk.exact import WalkParams, moments, position_distribution, renewal_evolve

REF_K, REF_Z, REF_P = 0.7, 0.3 + 0.2j, 0.4


@pytest.fixture(scope="module")
def pure_table():
    return pure.pure_probability_table(210)


@pytest.fixture(scope="module")
def renewal_p05_t100():
    return renewal_evolve(0.5, 100)


@pytest.fixture(scope="module")
def renewal_p03_t300():
    return renewal_evolve(0.3, 300)


def _sigma_series(table, k, z, p, T=200):
    """Defining series: sigma_i = sum_t p q^(t-1) [part of What_11/What_12](k,t) z^t."""
    q = 1.0 - p
    out = np.zeros(4, dtype=complex)
    for t in range(1, T + 1):
        what = pure.pure_char(table, np.array([k]), t)[0]
        w = p * q ** (t - 1) * z**t
        out += w * np.array(
            [what[0, 0].real, what[0, 1].real, what[0, 0].imag, what[0, 1].imag]
        )
    return out


def _taylor(f, t_max, r=0.95, n=1 << 14):
    """Minimal local contour extraction (the real tooling lives in dqwalk.series)."""
    nodes = r * np.exp(2j * np.pi * np.arange(n) / n)
    c = np.fft.fft(f(nodes)) / n
    return c[: t_max + 1] / r ** np.arange(t_max + 1)


class TestSigma:
    def test_frozen_reference_point(self):
        sv = analytic.sigma_eval(REF_K, REF_Z, WalkParams(REF_P))
        np.testing.assert_allclose(
            [sv.sigma1, sv.sigma2, sv.sigma3, sv.sigma4, sv.E],
            [
                0.04886353996983487 + 0.041873322950387315j,
                0.04931221992116048 + 0.03926783365957201j,
                0.04049575657587677 + 0.035731590719410275j,
                -0.041535109854433455 - 0.033074840017414495j,
                0.8718193613579514 - 0.07383099315827973j,
            ],
            rtol=1e-13,
        )

    def test_matches_defining_series(self, pure_table):
        for k, z, p in [
            (REF_K, REF_Z, REF_P),
            (1.3, -0.25 + 0.55j, 0.15),
            (0.0, 0.6, 0.5),
            (2.9, 0.48j, 0.85),
        ]:
            sv = analytic.sigma_eval(k, z, WalkParams(p))
            ser = _sigma_series(pure_table, k, z, p)
            np.testing.assert_allclose(list(sv)[:4], ser, atol=1e-10)

    def test_classical_limit_single_term(self):
        # at p=1 only the one-step term of each series survives
        k, z = 0.9, 0.3 + 0.1j
        sv = analytic.sigma_eval(k, z, WalkParams(1.0))
        assert sv.E == 1.0
        assert abs(sv.sigma1 - z * math.cos(k) / 2) == 0.0
        assert abs(sv.sigma2 - z * math.cos(k) / 2) == 0.0
        assert abs(sv.sigma3 - z * math.sin(k) / 2) < 1e-16
        assert abs(sv.sigma4 + z * math.sin(k) / 2) < 1e-16

    def test_k_zero_odd_parts_vanish(self):
        q, z = 0.7, 0.5 + 0.2j
        sv = analytic.sigma_eval(0.0, z, WalkParams(0.3))
        assert sv.sigma3 == 0.0 and sv.sigma4 == 0.0
        assert abs(sv.E - (1 - q * z) * np.sqrt(1 + (q * z) ** 2)) < 1e-15

    def test_rejects_outside_convergence_disk(self):
        with pytest.raises(ValueError, match="diverges"):
            analytic.sigma_eval(0.5, 1.3 + 0j, WalkParams(0.2))

    def test_accepts_array_z(self):
        z = np.array([0.1, 0.2 + 0.3j, -0.4j])
        sv = analytic.sigma_eval(0.5, z, WalkParams(0.5))
        assert sv.sigma1.shape == (3,)


class TestGeneratingFunctions:
    def test_frozen_reference_point(self):
        par = WalkParams(REF_P)
        assert abs(
            analytic.phat_symmetric(REF_K, REF_Z, par)
            - (1.2507818172351353 + 0.24712937134005433j)
        ) < 1e-13
        assert abs(
            analytic.phat_right(REF_K, REF_Z, par)
            - (1.2437428921586156 + 0.24359702115972667j)
        ) < 1e-13

    def test_normalization_at_k_zero(self):
        # phat(0, z) is the generating function of 1, 1, 1, ...
        par = WalkParams(0.37)
        z = 0.95 * np.exp(2j * np.pi * np.arange(64) / 64) * np.linspace(0.2, 1.0, 64)
        np.testing.assert_allclose(
            analytic.phat_symmetric(0.0, z, par), 1.0 / (1.0 - z), atol=1e-12
        )

    def test_two_algebraic_routes_agree(self):
        ks = np.linspace(0.0, math.pi, 16)
        rad = np.linspace(0.05, 0.8, 16)
        ang = np.linspace(0.0, 2 * math.pi, 16, endpoint=False)
        z = rad[:, None] * np.exp(1j * ang[None, :])
        for p in (0.1, 0.5, 0.9, 1.0):
            par = WalkParams(p)
            for k in ks:
                np.testing.assert_allclose(
                    analytic.phat_symmetric(k, z, par),
                    analytic.phat_symmetric_assembled(k, z, par),
                    atol=1e-10,
                )

    def test_value_at_origin_is_one(self):
        val = analytic.phat_symmetric(0.8, 1e-12 + 0j, WalkParams(0.5))
        assert abs(val - 1.0) < 1e-9

    def test_conjugate_symmetry(self):
        # probabilities are real, so phat(-k, conj z) = conj phat(k, z)
        par = WalkParams(0.35)
        for k, z in [(0.7, 0.4 + 0.3j), (2.1, -0.2 + 0.5j)]:
            assert abs(
                analytic.phat_symmetric(-k, np.conj(z), par)
                - np.conj(analytic.phat_symmetric(k, z, par))
            ) < 1e-12
            assert abs(
                analytic.phat_right(-k, np.conj(z), par)
                - np.conj(analytic.phat_right(k, z, par))
            ) < 1e-12

    def test_taylor_coefficients_match_renewal_symmetric(self, renewal_p05_t100):
        k, par = 0.5, WalkParams(0.5)
        coeff = _taylor(lambda z: analytic.phat_symmetric(k, z, par), 100)
        exact = np.array(
            [
                complex(position_distribution(renewal_p05_t100, "symmetric", t).char(np.array([k]))[0])
                for t in range(101)
            ]
        )
        np.testing.assert_allclose(coeff, exact, atol=1e-8)

    def test_taylor_coefficients_match_renewal_right(self, renewal_p05_t100):
        k, par = 0.5, WalkParams(0.5, "right")
        coeff = _taylor(lambda z: analytic.phat_right(k, z, par), 100)
        exact = np.array(
            [
                complex(position_distribution(renewal_p05_t100, "right", t).char(np.array([k]))[0])
                for t in range(101)
            ]
        )
        np.testing.assert_allclose(coeff, exact, atol=1e-8)

    def test_right_start_equals_symmetric_at_k_zero(self):
        par = WalkParams(0.4)
        z = 0.3 + 0.55j
        assert analytic.phat_right(0.0, z, par) == analytic.phat_symmetric(0.0, z, par)

    def test_right_start_slope_in_k_at_zero(self):
        # d/dk phat_tilde(0, z) = i z (sqrt(1+q^2 z^2) - 1) / ((1-z)(pz + (1-z) sqrt(1+q^2 z^2)))
        p = 0.5
        par = WalkParams(p, "right")
        h = 1e-5
        for z in (0.3, 0.62):
            fd = (analytic.phat_right(h, z, par) - analytic.phat_right(-h, z, par)) / (2 * h)
            root = math.sqrt(1 + ((1 - p) * z) ** 2)
            slope = 1j * z * (root - 1) / ((1 - z) * (p * z + (1 - z) * root))
            assert abs(fd - slope) < 1e-9

    def test_pole_proximity_signal(self):
        with pytest.raises(ValueError, match="pole"):
            analytic.phat_symmetric(0.0, 1.0 - 1e-15, WalkParams(0.5))

    def test_gf_point_bundle(self):
        par = WalkParams(0.3)
        pt = analytic.gf_point(0.0, 0.4 + 0.1j, par)
        assert isinstance(pt.phat, complex) and isinstance(pt.sigma1, complex)
        assert pt.sigma3 == 0.0 and pt.sigma4 == 0.0
        assert abs(pt.phat - 1.0 / (1.0 - pt.z)) < 1e-12
        assert pt.phat_tilde == pt.phat


class TestMomentFormulas:
    def test_limit_variance_values(self):
        assert analytic.limit_variance(1.0) == 1.0
        assert abs(analytic.limit_variance(0.5) - 1.4721359549995796) < 1e-15

    def test_limit_variance_strictly_decreasing(self):
        grid = np.linspace(0.01, 1.0, 100)
        vals = [analytic.limit_variance(p) for p in grid]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_longterm_variance_classical_is_exactly_t(self):
        for t in (1, 7, 300):
            assert analytic.longterm_variance(1.0, t) == float(t)

    def test_longterm_variance_matches_exact_recursion(self, renewal_p03_t300):
        var = moments(position_distribution(renewal_p03_t300, "symmetric", 300)).variance
        assert abs(var - analytic.longterm_variance(0.3, 300)) < 1e-6
        assert abs(analytic.longterm_variance(0.3, 300) - 732.6495335746755) < 1e-10

    def test_longterm_mean_right_matches_exact_recursion(self, renewal_p03_t300):
        mean = moments(position_distribution(renewal_p03_t300, "right", 300)).mean
        assert abs(mean - analytic.longterm_mean_right(0.3)) < 1e-6

    def test_longterm_mean_right_endpoints(self):
        assert analytic.longterm_mean_right(1.0) == 0.0
        assert analytic.longterm_mean_right(1e-3) > analytic.longterm_mean_right(1e-2)

    def test_rejects_bad_p(self):
        for fn in (
            analytic.limit_variance,
            analytic.longterm_mean_right,
            analytic.pseudoquantum_time,
            analytic.second_root_estimate,
        ):
            with pytest.raises(ValueError):
                fn(0.0)
            with pytest.raises(ValueError):
                fn(1.2)

    def test_moment_report_fields(self):
        rep = analytic.moment_report(0.3, 300, "right")
        assert rep.q == 0.7 and rep.t == 300
        assert rep.mean_formula == analytic.longterm_mean_right(0.3)
        assert rep.variance_formula == analytic.longterm_variance(0.3, 300)
        assert rep.limit_variance_v > 1.0 and rep.t0 > 3.0
        sym = analytic.moment_report(0.3, 300)
        assert sym.mean_formula == 0.0
        left = analytic.moment_report(0.3, 300, "left")
        assert left.mean_formula == -rep.mean_formula

    def test_moment_report_classical_equalities(self):
        rep = analytic.moment_report(1.0, 50)
        assert rep.limit_variance_v == 1.0 and rep.t0 == 3.0


class TestPseudoquantumTime:
    def test_reference_values(self):
        assert abs(analytic.pseudoquantum_time(0.01) - 247.3) < 0.05
        assert analytic.pseudoquantum_time(1.0) == 3.0

    def test_matches_brute_force_argmin(self):
        # t0 minimizes the gap between quadratic t^2/6 growth and linear growth
        ts = np.arange(1, 10001, dtype=float)
        for p in (0.05, 0.1, 0.5, 1.0):
            gap = ts**2 / 6.0 - np.array([analytic.longterm_variance(p, t) for t in ts])
            assert abs(ts[np.argmin(gap)] - analytic.pseudoquantum_time(p)) <= 1.0


class TestPureVariance:
    def test_small_t_exact_values(self):
        got = [analytic.pure_variance_exact(t) for t in range(1, 7)]
        assert got == [1.0, 2.0, 3.0, 5.0, 8.0, 11.25]
        assert analytic.pure_variance_exact(10) == 29.953125

    def test_matches_evolved_walk_to_t50(self):
        amps = pure.initial_state("symmetric")[None, :]
        for t in range(1, 51):
            amps = pure.hadamard_step(amps)
            w = pure.born_weights(amps).sum(axis=1)
            x = np.arange(-t, t + 1, dtype=float)
            var = float((x * x) @ w) - float(x @ w) ** 2
            assert abs(var - analytic.pure_variance_exact(t)) < 1e-10

    def test_quadratic_growth_constant(self):
        ratio = analytic.pure_variance_exact(1000) / 1000.0**2
        assert abs(ratio - (1.0 - 1.0 / math.sqrt(2.0))) < 0.01

    def test_rejects_nonpositive_t(self):
        with pytest.raises(ValueError):
            analytic.pure_variance_exact(0)


class TestVarianceGeneratingFunction:
    def test_coefficients_are_exact_variances(self, renewal_p05_t100):
        coeff = _taylor(lambda z: analytic.second_deriv_gf(z, 0.5), 100).real
        exact = [
            moments(position_distribution(renewal_p05_t100, "symmetric", t)).variance
            for t in range(101)
        ]
        np.testing.assert_allclose(coeff, exact, atol=1e-8)

    def test_matches_finite_difference_of_phat(self):
        par = WalkParams(0.5)
        h = 1e-4
        for z in (0.3 + 0.0j, 0.2 + 0.4j):
            fd = -(
                analytic.phat_symmetric(h, z, par)
                - 2.0 * analytic.phat_symmetric(0.0, z, par)
                + analytic.phat_symmetric(-h, z, par)
            ) / h**2
            assert abs(fd - analytic.second_deriv_gf(z, 0.5)) < 1e-6

    def test_small_p_limit_form(self):
        # as p -> 0 the closed form tends to the measurement-free expression
        z = 0.37 + 0.21j
        v0 = z / (1 - z) ** 2 + (2 * z * z / (1 - z) ** 3) * (1 - 1 / np.sqrt(1 + z * z))
        assert abs(analytic.second_deriv_gf(z, 1e-9) - v0) < 1e-8

    def test_domain_guards(self):
        with pytest.raises(ValueError, match="pole"):
            analytic.second_deriv_gf(1.0 - 1e-14, 0.5)
        with pytest.raises(ValueError):
            analytic.second_deriv_gf(1.2 + 0j, 0.5)


def test_gaussian_limit_cf():
    assert analytic.gaussian_limit_cf(0.0, 0.7) == 1.0
    assert abs(analytic.gaussian_limit_cf(1.3, 1.0) - math.exp(-1.3**2 / 2)) < 1e-15
    assert abs(analytic.gaussian_limit_cf(1.2, 0.5) - 0.34647733020035437) < 1e-15


class TestSecondRoot:
    def test_residual_at_root(self):
        for p in (0.01, 0.1, 0.5, 0.9, 0.99):
            q = 1.0 - p
            r = analytic.second_root_estimate(p)
            assert abs(p * r + (1 - r) * math.hypot(1.0, q * r)) < 1e-12

    def test_small_p_expansion(self):
        p = 0.01
        assert abs(analytic.second_root_estimate(p) - analytic.second_root_expansion(p)) < 3 * p**3

    def test_root_outside_unit_disk(self):
        for p in np.linspace(0.01, 0.99, 25):
            assert analytic.second_root_estimate(float(p)) > 1.0

    def test_no_root_in_classical_limit(self):
        with pytest.raises(RuntimeError, match="no sign change"):
            analytic.second_root_estimate(1.0)

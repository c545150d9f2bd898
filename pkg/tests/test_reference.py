import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm as scipy_norm

from wass1d.reference import (
    DISTRIBUTION_NAMES,
    Laplace,
    StandardNormal,
    StudentT,
    Uniform01,
    approx_error_bound,
    by_name,
    discretize,
    error_bound_table,
    sample,
)
from wass1d.wasserstein import wp_quantile

ALL_DISTS = [by_name(name) for name in DISTRIBUTION_NAMES]


def tail_moment_oracle(dist, t, p):
    """Independent quadrature of int_t^inf (x - t)^p dP0."""
    val, _ = quad(lambda x: (x - t) ** p * float(dist.pdf(x)), t, np.inf,
                  epsabs=1e-12, epsrel=1e-12, limit=300)
    return val


class TestRegistry:
    def test_names_resolve(self):
        for name in DISTRIBUTION_NAMES:
            assert by_name(name).name == name

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown distribution"):
            by_name("cauchy")

    def test_student_df_parsing(self):
        assert by_name("t5").df == 5.0
        assert by_name("t10").df == 10.0


class TestQuantileCdf:
    @pytest.mark.parametrize("dist", ALL_DISTS, ids=lambda d: d.name)
    def test_round_trip(self, dist):
        xs = np.asarray(dist.quantile(np.linspace(1e-6, 1.0 - 1e-6, 201)))
        back = np.asarray(dist.quantile(np.clip(dist.cdf(xs), 1e-300, 1 - 1e-16)))
        np.testing.assert_allclose(back, xs, atol=1e-9, rtol=1e-9)

    @pytest.mark.parametrize("dist", ALL_DISTS, ids=lambda d: d.name)
    def test_quantile_rejects_endpoints(self, dist):
        for u in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(ValueError):
                dist.quantile(u)

    def test_uniform_identity(self):
        u = Uniform01()
        assert float(u.quantile(0.3)) == 0.3
        assert float(u.cdf(0.3)) == 0.3

    def test_normal_against_scipy_stats(self):
        n = StandardNormal()
        for u in (0.01, 0.25, 0.5, 0.75, 0.999):
            assert float(n.quantile(u)) == pytest.approx(scipy_norm.ppf(u), abs=1e-12)

    def test_laplace_closed_form(self):
        lap = Laplace()
        assert float(lap.quantile(0.75)) == pytest.approx(math.log(2.0), abs=1e-15)
        assert float(lap.quantile(0.25)) == pytest.approx(-math.log(2.0), abs=1e-15)

    @pytest.mark.parametrize("dist", ALL_DISTS, ids=lambda d: d.name)
    def test_pdf_integrates_to_one(self, dist):
        val, _ = quad(lambda x: float(dist.pdf(x)), -np.inf, np.inf, limit=300)
        assert val == pytest.approx(1.0, abs=1e-8)


class TestTruncatedMoment:
    @pytest.mark.parametrize("dist", ALL_DISTS, ids=lambda d: d.name)
    @pytest.mark.parametrize("p", [1.0, 2.0])
    def test_closed_forms_match_quadrature(self, dist, p):
        if isinstance(dist, StudentT) and p >= dist.df:
            return
        for t in (0.1, 0.7, 1.3, 2.5):
            got = dist.truncated_upper_moment(t, p)
            assert got == pytest.approx(tail_moment_oracle(dist, t, p), abs=1e-8)

    def test_student_divergence_is_exact(self):
        t5 = StudentT(5)
        assert t5.truncated_upper_moment(3.0, 5.0) == math.inf
        assert t5.truncated_upper_moment(3.0, 8.0) == math.inf
        assert math.isfinite(t5.truncated_upper_moment(3.0, 4.0))

    def test_uniform_below_support(self):
        u = Uniform01()
        # t < 0 integrates (x - t)^1 over the full support
        assert u.truncated_upper_moment(-1.0, 1.0) == pytest.approx(1.5, abs=1e-14)


class TestDiscretize:
    def test_normal_m4(self):
        qm = discretize(StandardNormal(), 4)
        q75 = scipy_norm.ppf(0.75)
        np.testing.assert_allclose(qm.atoms, [-q75, 0.0, q75], atol=1e-12)
        np.testing.assert_allclose(qm.weights, [0.25, 0.5, 0.25], atol=1e-15)

    def test_uniform_m4(self):
        qm = discretize(Uniform01(), 4)
        np.testing.assert_allclose(qm.atoms, [0.25, 0.5, 0.75], atol=1e-15)
        np.testing.assert_allclose(qm.weights, [0.25, 0.5, 0.25], atol=1e-15)

    @pytest.mark.parametrize("dist", ALL_DISTS, ids=lambda d: d.name)
    def test_mass_accounting(self, dist):
        qm = discretize(dist, 64)
        assert qm.n_atoms == 63
        assert math.fsum(qm.weights.tolist()) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("dist", ALL_DISTS, ids=lambda d: d.name)
    def test_symmetry_about_median(self, dist):
        qm = discretize(dist, 32)
        c = dist.median
        np.testing.assert_allclose(qm.atoms + qm.atoms[::-1], 2.0 * c, atol=1e-12)
        np.testing.assert_allclose(qm.weights, qm.weights[::-1], atol=1e-15)

    def test_rejects_odd_or_tiny_m(self):
        with pytest.raises(ValueError):
            discretize(Uniform01(), 5)
        with pytest.raises(ValueError):
            discretize(Uniform01(), 2)

    def test_refinement_is_cauchy(self):
        # stand-in for convergence of Q_M to the truth as M grows
        dist = StandardNormal()
        gaps = [
            wp_quantile(discretize(dist, M), discretize(dist, 2 * M), 1.0)
            for M in (64, 256, 1024)
        ]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 1e-2


class TestApproxErrorBound:
    def test_student5_p8_divergent(self):
        assert approx_error_bound(by_name("t5"), 64, 8.0) == math.inf

    def test_normal_p1_m4_value(self):
        # closed form: 2 [phi(q) - q/4] + 2 q with q the 3/4 quantile
        q = scipy_norm.ppf(0.75)
        expect = 2.0 * (scipy_norm.pdf(q) - q * 0.25) + 2.0 * q
        got = approx_error_bound(StandardNormal(), 4, 1.0)
        assert got == pytest.approx(expect, abs=1e-12)
        assert got == pytest.approx(1.647, abs=1e-3)

    def test_uniform_vanishes_with_m(self):
        u = Uniform01()
        values = [approx_error_bound(u, M, 1.0) for M in (16, 64, 256, 1024)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] < 1e-2

    @pytest.mark.parametrize("dist", ALL_DISTS, ids=lambda d: d.name)
    @pytest.mark.parametrize("p", [1.0, 2.0])
    def test_non_increasing_in_m(self, dist, p):
        ms = [2 ** k for k in range(4, 11)]
        values = [approx_error_bound(dist, M, p) for M in ms]
        for a, b in zip(values, values[1:]):
            assert b <= a * (1 + 1e-12)

    def test_table_rows(self):
        rows = error_bound_table(["uniform", "t5"], [1.0, 8.0], [16, 32])
        assert len(rows) == 8
        by_key = {(r["dist"], r["p"], r["M"]): r["error_bound"] for r in rows}
        assert by_key[("t5", 8.0, 16)] == math.inf
        assert by_key[("uniform", 1.0, 32)] < by_key[("uniform", 1.0, 16)]


class TestSampling:
    def test_deterministic(self):
        a = sample(StandardNormal(), 100, seed=7)
        b = sample(StandardNormal(), 100, seed=7)
        assert a.values.tolist() == b.values.tolist()

    def test_single_draw(self):
        s = sample(StandardNormal(), 1, seed=3)
        assert s.n == 1

    def test_uniform_support(self):
        s = sample(Uniform01(), 2000, seed=11)
        assert s.values[0] > 0.0
        assert s.values[-1] < 1.0

    def test_normal_clt(self):
        s = sample(StandardNormal(), 100_000, seed=5)
        assert abs(float(s.values.mean())) < 0.02
        assert abs(float(s.values.std(ddof=1)) - 1.0) < 0.02

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            sample(Uniform01(), 0, seed=1)

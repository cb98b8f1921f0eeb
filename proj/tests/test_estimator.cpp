#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "fsv/errors.hpp"
#include "fsv/estimator.hpp"
#include "fsv/iv_moments.hpp"
#include "fsv/kernel.hpp"
#include "fsv/linalg.hpp"
#include "fsv/simulate.hpp"
#include "fsv/stats.hpp"

namespace {

const fsv::FsvParams kPanelB{0.0225, 0.01, 0.75, 0.1};
const fsv::FsvParams kPanelD{0.0225, 0.035, 0.3, 0.5};

fsv::VolSeries make_series(std::vector<double> values) {
    fsv::VolSeries s;
    s.values = std::move(values);
    return s;
}

std::vector<double> ar1_path(double rho, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> x(n);
    x[0] = normal(rng) / std::sqrt(1.0 - rho * rho);
    for (std::size_t t = 1; t < n; ++t) x[t] = rho * x[t - 1] + normal(rng);
    return x;
}

fsv::Matrix column_matrix(const std::vector<double>& x) {
    fsv::Matrix m(x.size(), 1);
    for (std::size_t t = 0; t < x.size(); ++t) m(t, 0) = x[t];
    return m;
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("sample moments use divisor T at every lag") {
    fsv::MomentSpec spec;
    spec.lags = {0, 1};

    const auto flat = fsv::sample_moment_vector(make_series({2.0, 2.0, 2.0, 2.0}), spec);
    CHECK(flat.values[0] == 2.0);
    CHECK(flat.values[1] == 4.0);
    CHECK(flat.values[2] == 3.0);  // 3 pairs over divisor 4

    const auto ramp = fsv::sample_moment_vector(make_series({1.0, 2.0, 3.0}), spec);
    CHECK(ramp.values[0] == 2.0);
    CHECK(ramp.values[1] == doctest::Approx(14.0 / 3.0).epsilon(1e-15));
    CHECK(ramp.values[2] == doctest::Approx(8.0 / 3.0).epsilon(1e-15));

    spec.lags = {0, 5};
    CHECK_THROWS_AS(fsv::sample_moment_vector(make_series({1.0, 2.0, 3.0}), spec),
                    fsv::DataError);
}

TEST_CASE("scaling-law initializer recovers H and nu on exact fBm log-volatility") {
    const double nu = 0.5;
    const double hurst = 0.3;
    const auto dbh = fsv::fgn_increments(hurst, 100000, 1.0, 17);
    fsv::VolSeries series;
    series.values.resize(dbh.size());
    double bh = 0.0;
    for (std::size_t t = 0; t < dbh.size(); ++t) {
        bh += dbh[t];
        series.values[t] = std::exp(nu * bh);
    }
    const fsv::FsvParams init = fsv::initial_values(series);
    CHECK(std::abs(init.hurst - hurst) < 0.02);
    CHECK(std::abs(init.nu - nu) / nu < 0.05);
    CHECK(init.xi ==
          std::min(std::max(fsv::mean(series.values), 1e-8), 10.0));
    // An fBm log proxy is the lambda -> 0 limit, so the matched rate is tiny.
    CHECK(init.lambda < 0.01);
}

TEST_CASE("initializer rejects unusable series") {
    CHECK_THROWS_AS(fsv::initial_values(make_series(std::vector<double>(100, 3.0))),
                    fsv::DataError);  // flat log series
    CHECK_THROWS_AS(fsv::initial_values(make_series({1.0, 2.0, 0.0, 1.0, 2.0, 1.0,
                                                     2.0, 1.0, 2.0, 1.0})),
                    fsv::DataError);  // nonpositive value
    CHECK_THROWS_AS(fsv::initial_values(make_series({1.0, 2.0, 3.0})),
                    fsv::DataError);  // too short for m = 6
    const auto ok = make_series({1.0, 2.0, 1.5, 2.5, 1.2, 2.2, 1.7, 2.7, 1.3, 2.3});
    CHECK_THROWS_AS(fsv::initial_values(ok, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(fsv::initial_values(ok, 2.0, 1), std::invalid_argument);
}

TEST_CASE("initializer lands in the documented band on model IV data") {
    fsv::SimConfig config{kPanelB, 4000, 780, 78, 2024, false, 0.0};
    const fsv::SimOutput out = fsv::simulate_fsv(config);
    const fsv::FsvParams init = fsv::initial_values(out.iv);
    // Within-day averaging smooths the rough path, biasing the scaling slope
    // up from H = 0.1; the iterated GMM is what removes this.
    CHECK(init.hurst > 0.20);
    CHECK(init.hurst < 0.40);
    CHECK(init.xi == doctest::Approx(0.0225).epsilon(0.15));
}

TEST_CASE("gmm objective is the weighted squared moment distance") {
    fsv::MomentSpec spec;
    spec.lags = {0, 1};
    const fsv::VolSeries series = make_series({0.02, 0.03, 0.025, 0.021, 0.028});
    const auto sample = fsv::sample_moment_vector(series, spec).values;
    const auto model =
        fsv::model_moment_vector(fsv::CovKernel::fsv(kPanelD), kPanelD.xi, spec).values;

    fsv::Matrix w(3, 3);
    w(0, 0) = 2.0;
    w(1, 1) = 3.0;
    w(2, 2) = 4.0;
    double expected = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double d = sample[i] - model[i];
        expected += w(i, i) * d * d;
    }
    CHECK(fsv::gmm_objective(series, kPanelD, w, spec) ==
          doctest::Approx(expected).epsilon(1e-14));

    CHECK_THROWS_AS(fsv::gmm_objective(series, kPanelD, fsv::Matrix(2, 2), spec),
                    std::invalid_argument);
}

TEST_CASE("gmm objective scales linearly in the weight matrix") {
    fsv::MomentSpec spec;
    spec.lags = {0, 1, 2};
    fsv::SimConfig config{kPanelB, 300, 390, 78, 5, false, 0.0};
    const fsv::VolSeries series = fsv::simulate_fsv(config).iv;
    const fsv::Matrix w = fsv::Matrix::identity(4);
    fsv::Matrix w5 = w;
    for (double& x : w5.data) x *= 5.0;

    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const fsv::FsvParams theta(0.01 + 0.04 * u(rng), 0.005 + 0.1 * u(rng),
                                   0.2 + 1.0 * u(rng), 0.05 + 0.9 * u(rng));
        const double base = fsv::gmm_objective(series, theta, w, spec);
        const double scaled = fsv::gmm_objective(series, theta, w5, spec);
        CHECK(scaled == doctest::Approx(5.0 * base).epsilon(1e-12));
    }
}

TEST_CASE("parzen and bartlett kernel weights") {
    CHECK(fsv::detail::parzen_weight(0.0) == 1.0);
    CHECK(fsv::detail::parzen_weight(0.3) == doctest::Approx(0.622).epsilon(1e-15));
    CHECK(fsv::detail::parzen_weight(0.5) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(fsv::detail::parzen_weight(0.75) == doctest::Approx(0.03125).epsilon(1e-15));
    CHECK(fsv::detail::parzen_weight(1.0) == 0.0);
    CHECK(fsv::detail::parzen_weight(1.2) == 0.0);
    CHECK(fsv::detail::parzen_weight(-0.3) == fsv::detail::parzen_weight(0.3));

    CHECK(fsv::detail::bartlett_weight(0.0) == 1.0);
    CHECK(fsv::detail::bartlett_weight(0.5) == 0.5);
    CHECK(fsv::detail::bartlett_weight(1.0) == 0.0);
    CHECK(fsv::detail::bartlett_weight(-0.25) == 0.75);
}

TEST_CASE("HAC with bandwidth 1 is the outer-product covariance") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal;
    fsv::Matrix r(10, 2);
    for (double& x : r.data) x = normal(rng);

    fsv::HacConfig hac;
    hac.bandwidth = fsv::BandwidthRule::Fixed;
    hac.fixed_bandwidth = 1;
    const fsv::Matrix s = fsv::hac_covariance(r, hac);
    const fsv::Matrix gamma0 = fsv::matmul(fsv::transpose(r), r);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(s(i, j) == doctest::Approx(gamma0(i, j) / 10.0).epsilon(1e-14));
        }
    }

    hac.fixed_bandwidth = 2;
    const fsv::Matrix s2 = fsv::hac_covariance(r, hac);
    fsv::Matrix g1(2, 2);
    for (std::size_t t = 0; t + 1 < 10; ++t) {
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < 2; ++j) g1(i, j) += r(t, i) * r(t + 1, j);
        }
    }
    const double w1 = fsv::detail::parzen_weight(0.5);
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            const double expected =
                gamma0(i, j) / 10.0 + w1 * (g1(i, j) + g1(j, i)) / 10.0;
            CHECK(s2(i, j) == doctest::Approx(expected).epsilon(1e-14));
        }
    }

    hac.fixed_bandwidth = 0;
    CHECK_THROWS_AS(fsv::hac_covariance(r, hac), std::invalid_argument);
    hac.fixed_bandwidth = 10;
    CHECK_THROWS_AS(fsv::hac_covariance(r, hac), std::invalid_argument);
}

TEST_CASE("HAC input validation") {
    CHECK_THROWS_AS(fsv::hac_covariance(fsv::Matrix(1, 2), fsv::HacConfig{}),
                    std::invalid_argument);
    fsv::Matrix bad(4, 1);
    bad(2, 0) = std::nan("");
    CHECK_THROWS_AS(fsv::hac_covariance(bad, fsv::HacConfig{}), std::invalid_argument);
    CHECK_THROWS_AS(fsv::hac_covariance(fsv::Matrix(5, 2), fsv::HacConfig{}),
                    fsv::NumericError);  // all-zero residuals
}

TEST_CASE("HAC on i.i.d. data stays close to the short-run covariance") {
    std::mt19937_64 rng(44);
    std::normal_distribution<double> normal;
    fsv::Matrix r(100000, 2);
    for (double& x : r.data) x = normal(rng);

    const fsv::Matrix s = fsv::hac_covariance(r, fsv::HacConfig{});
    fsv::HacConfig short_run;
    short_run.bandwidth = fsv::BandwidthRule::Fixed;
    short_run.fixed_bandwidth = 1;
    const fsv::Matrix g0 = fsv::hac_covariance(r, short_run);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < s.data.size(); ++k) {
        num += (s.data[k] - g0.data[k]) * (s.data[k] - g0.data[k]);
        den += g0.data[k] * g0.data[k];
    }
    CHECK(std::sqrt(num / den) < 0.05);
}

TEST_CASE("HAC recovers the AR(1) long-run variance") {
    const auto x = ar1_path(0.5, 100000, 99);
    const fsv::Matrix s = fsv::hac_covariance(column_matrix(x), fsv::HacConfig{});
    CHECK(s(0, 0) == doctest::Approx(4.0).epsilon(0.10));
}

TEST_CASE("HAC estimates are positive semidefinite") {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> normal;
    fsv::Matrix r(200, 3);
    for (double& x : r.data) x = normal(rng);
    const fsv::Matrix s = fsv::hac_covariance(r, fsv::HacConfig{});
    const auto eig = fsv::sym_eigenvalues(s);
    CHECK(eig.front() >= -1e-10 * fsv::trace(s));
}

TEST_CASE("ARMA(1,1) conditional least squares") {
    std::mt19937_64 rng(123);
    std::normal_distribution<double> normal;
    const std::size_t n = 20000;
    std::vector<double> x(n);
    double prev_eps = normal(rng);
    x[0] = prev_eps;
    for (std::size_t t = 1; t < n; ++t) {
        const double eps = normal(rng);
        x[t] = 0.6 * x[t - 1] + eps + 0.3 * prev_eps;
        prev_eps = eps;
    }
    const fsv::detail::Arma11 fit = fsv::detail::arma11_css(x);
    CHECK(fit.rho == doctest::Approx(0.6).epsilon(0.09));
    CHECK(std::abs(fit.psi - 0.3) < 0.05);
    CHECK(fit.sigma2 == doctest::Approx(1.0).epsilon(0.05));

    const std::vector<double> tiny{1.0, 2.0, 0.5, 1.5, 0.8};
    const fsv::detail::Arma11 fallback = fsv::detail::arma11_css(tiny);
    CHECK(fallback.rho == 0.0);
    CHECK(fallback.psi == 0.0);
    CHECK(fallback.sigma2 == fsv::variance(tiny));
}

TEST_CASE("Andrews bandwidth: plug-in value, floor, and cap") {
    const auto x = ar1_path(0.5, 100000, 7);
    const double st = fsv::detail::andrews_bandwidth(x, fsv::HacKernel::Parzen, x.size());
    // alpha_2 = 16 for rho = 0.5, so 2.6614 (16 T)^{1/5} ~ 46.3.
    CHECK(st == doctest::Approx(46.3).epsilon(0.20));

    std::mt19937_64 rng(10);
    std::normal_distribution<double> normal;
    std::vector<double> iid(5000);
    for (double& v : iid) v = normal(rng);
    const double st_iid =
        fsv::detail::andrews_bandwidth(iid, fsv::HacKernel::Parzen, iid.size());
    CHECK(st_iid >= 1.0);
    CHECK(st_iid < 5.0);

    const auto sticky = ar1_path(0.95, 500, 21);
    const double st_cap =
        fsv::detail::andrews_bandwidth(sticky, fsv::HacKernel::Parzen, sticky.size());
    CHECK(st_cap == std::floor(std::pow(500.0, 0.45)));

    const std::vector<double> flat(100, 2.5);
    CHECK(fsv::detail::andrews_bandwidth(flat, fsv::HacKernel::Parzen, 100) == 1.0);
}

TEST_CASE("standard errors: efficient pairing, sandwich, and 1/T scaling") {
    std::mt19937_64 rng(55);
    std::normal_distribution<double> normal;
    const std::size_t p = 6;
    fsv::Matrix a(p, p);
    for (double& x : a.data) x = normal(rng);
    fsv::Matrix sigma = fsv::matmul(fsv::transpose(a), a);
    for (std::size_t i = 0; i < p; ++i) sigma(i, i) += 1.0;
    fsv::Matrix jac(p, 4);
    for (double& x : jac.data) x = normal(rng);

    const fsv::Matrix w_eff = fsv::spd_inverse(sigma);
    const fsv::StdErrors eff = fsv::standard_errors(w_eff, sigma, jac, 1000);
    const fsv::Matrix b =
        fsv::matmul(fsv::matmul(fsv::transpose(jac), w_eff), jac);
    const fsv::Matrix expected_eff = fsv::spd_inverse(b);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(eff.vcov(i, j) ==
                  doctest::Approx(expected_eff(i, j) / 1000.0).epsilon(1e-10));
        }
    }

    const fsv::Matrix w_id = fsv::Matrix::identity(p);
    const fsv::StdErrors sand = fsv::standard_errors(w_id, sigma, jac, 1000);
    const fsv::Matrix jtj_inv = fsv::spd_inverse(fsv::matmul(fsv::transpose(jac), jac));
    const fsv::Matrix meat =
        fsv::matmul(fsv::matmul(fsv::transpose(jac), sigma), jac);
    const fsv::Matrix expected_sand =
        fsv::matmul(fsv::matmul(jtj_inv, meat), jtj_inv);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(sand.vcov(i, j) ==
                  doctest::Approx(expected_sand(i, j) / 1000.0).epsilon(1e-10));
        }
        CHECK(sand.se[i] == doctest::Approx(std::sqrt(sand.vcov(i, i))).epsilon(1e-14));
    }

    const fsv::StdErrors twice = fsv::standard_errors(w_id, sigma, jac, 2000);
    for (std::size_t k = 0; k < twice.vcov.data.size(); ++k) {
        CHECK(twice.vcov.data[k] ==
              doctest::Approx(0.5 * sand.vcov.data[k]).epsilon(1e-14));
    }
}

TEST_CASE("standard errors reject an unidentified Jacobian") {
    fsv::Matrix sigma = fsv::Matrix::identity(6);
    fsv::Matrix jac(6, 4);
    std::mt19937_64 rng(66);
    std::normal_distribution<double> normal;
    for (std::size_t i = 0; i < 6; ++i) {
        jac(i, 0) = normal(rng);
        jac(i, 1) = normal(rng);
        jac(i, 2) = jac(i, 1);  // nu column == lambda column
        jac(i, 3) = normal(rng);
    }
    bool threw = false;
    try {
        fsv::standard_errors(fsv::Matrix::identity(6), sigma, jac, 100);
    } catch (const fsv::NumericError& e) {
        threw = true;
        CHECK(std::string(e.what()).find("identified") != std::string::npos);
    }
    CHECK(threw);
    CHECK_THROWS_AS(fsv::standard_errors(fsv::Matrix::identity(5), sigma, jac, 100),
                    std::invalid_argument);
}

TEST_CASE("J-test statistic, dof, and frozen p-value") {
    const fsv::JTest jt = fsv::j_test(9.4877 / 1000.0, 1000, 8, 4);
    CHECK(jt.stat == doctest::Approx(9.4877).epsilon(1e-12));
    CHECK(jt.dof == 4);
    CHECK(jt.pvalue == doctest::Approx(0.05).epsilon(2e-4));
    CHECK(std::abs(jt.pvalue - 0.05) < 1e-5);

    CHECK_THROWS_AS(fsv::j_test(0.1, 100, 4, 4), std::invalid_argument);
    const fsv::JTest floor = fsv::j_test(-1e-9, 100, 6, 4);
    CHECK(floor.stat == 0.0);
    CHECK(floor.pvalue == 1.0);
}

TEST_CASE("log-scale Hurst confidence interval") {
    const auto [lo, hi] = fsv::hurst_ci_log(0.05, 0.01, 0.90);
    CHECK(lo == doctest::Approx(0.035983).epsilon(5e-4));
    CHECK(hi == doctest::Approx(0.069477).epsilon(5e-4));
    CHECK(lo * hi == doctest::Approx(0.05 * 0.05).epsilon(1e-14));
    CHECK(lo > 0.0);

    const auto [same_lo, same_hi] = fsv::hurst_ci_log(0.05, 0.0, 0.90);
    CHECK(same_lo == 0.05);
    CHECK(same_hi == 0.05);
    CHECK_THROWS_AS(fsv::hurst_ci_log(0.0, 0.01, 0.9), std::invalid_argument);
    CHECK_THROWS_AS(fsv::hurst_ci_log(0.05, 0.01, 1.0), std::invalid_argument);
}

TEST_CASE("quadratic form is invariant under consistent reordering") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal;
    fsv::Matrix a(4, 4);
    for (double& x : a.data) x = normal(rng);
    fsv::Matrix w = fsv::matmul(fsv::transpose(a), a);
    const std::vector<double> x{0.3, -1.2, 0.8, 2.1};
    const std::vector<std::size_t> perm{2, 0, 3, 1};

    std::vector<double> xp(4);
    fsv::Matrix wp(4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        xp[i] = x[perm[i]];
        for (std::size_t j = 0; j < 4; ++j) wp(i, j) = w(perm[i], perm[j]);
    }
    CHECK(fsv::quad_form(xp, wp, xp) ==
          doctest::Approx(fsv::quad_form(x, w, x)).epsilon(1e-13));
}

TEST_CASE("fit_gmm honors explicit starting values") {
    fsv::SimConfig sim{kPanelD, 300, 390, 78, 9, false, 0.0};
    const fsv::VolSeries series = fsv::simulate_fsv(sim).iv;

    fsv::GmmConfig config;
    config.spec.lags = {0, 1, 2, 3, 5};
    config.max_iterations = 1;
    config.tol = 1e9;  // accept any step, so the fit reports the start point
    config.init_overrides = kPanelD;
    const fsv::GmmFit fit = fsv::fit_gmm(series, config);
    CHECK(fit.theta.xi == kPanelD.xi);
    CHECK(fit.theta.lambda == kPanelD.lambda);
    CHECK(fit.theta.nu == kPanelD.nu);
    CHECK(fit.theta.hurst == kPanelD.hurst);
    CHECK(fit.converged);

    config.init_overrides = fsv::FsvParams(20.0, 0.05, 0.4, 0.5);
    const fsv::GmmFit clamped = fsv::fit_gmm(series, config);
    CHECK(clamped.theta.xi == 10.0);  // clamped to the upper bound
}

TEST_CASE("fit_gmm input validation") {
    fsv::GmmConfig config;
    CHECK_THROWS_AS(fsv::fit_gmm(make_series({1.0, 2.0, 3.0}), config), fsv::DataError);
    std::vector<double> with_zero(100, 0.02);
    with_zero[40] = 0.0;
    fsv::GmmConfig short_lags;
    short_lags.spec.lags = {0, 1};
    CHECK_THROWS_AS(fsv::fit_gmm(make_series(with_zero), short_lags), fsv::DataError);
    config.max_iterations = 0;
    CHECK_THROWS_AS(fsv::fit_gmm(make_series(std::vector<double>(100, 0.02)), config),
                    std::invalid_argument);
}

TEST_CASE("fit_gmm is deterministic and reports NaN J below identification") {
    fsv::SimConfig sim{kPanelD, 300, 390, 78, 14, false, 0.0};
    const fsv::VolSeries series = fsv::simulate_fsv(sim).iv;
    fsv::GmmConfig config;
    config.spec.lags = {0, 1, 2};  // 4 conditions, 4 parameters
    const fsv::GmmFit a = fsv::fit_gmm(series, config);
    const fsv::GmmFit b = fsv::fit_gmm(series, config);
    CHECK(a.theta.xi == b.theta.xi);
    CHECK(a.theta.lambda == b.theta.lambda);
    CHECK(a.theta.nu == b.theta.nu);
    CHECK(a.theta.hurst == b.theta.hurst);
    CHECK(a.j_dof == 0);
    CHECK(std::isnan(a.j_stat));
    CHECK(std::isnan(a.j_pvalue));
}

TEST_CASE("fit_gmm recovers rough-panel parameters from model IV data") {
    // The rough panel pins hurst well even at this length; the smooth panels
    // leave it weakly identified (sampling sd ~0.15 at 2000 days).
    fsv::SimConfig sim{kPanelB, 2000, 390, 78, 1009, false, 0.0};
    const fsv::VolSeries series = fsv::simulate_fsv(sim).iv;
    fsv::GmmConfig config;
    const fsv::GmmFit fit = fsv::fit_gmm(series, config);

    CHECK(fit.converged);
    CHECK(fit.j_dof == 4);
    CHECK(std::abs(fit.theta.hurst - 0.1) < 0.1);
    CHECK(fit.theta.xi == doctest::Approx(0.0225).epsilon(0.15));
    CHECK(fit.j_pvalue >= 0.0);
    CHECK(fit.j_pvalue <= 1.0);
    CHECK(fit.objective_trace.size() >= 1);
    CHECK(fit.objective_trace.size() <= 3);

    REQUIRE(fit.weight_matrix.rows == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 8; ++j) {
            CHECK(fit.weight_matrix(i, j) ==
                  doctest::Approx(fit.weight_matrix(j, i)).epsilon(1e-9));
        }
    }
    const auto eig = fsv::sym_eigenvalues(fit.vcov);
    CHECK(eig.front() >= -1e-10 * fsv::trace(fit.vcov));
    for (double se : fit.se) CHECK(se >= 0.0);
}

}  // TEST_SUITE

#include <cmath>

#include "doctest.h"
#include "fsv/errors.hpp"
#include "fsv/quadrature.hpp"
#include "oracles.hpp"

TEST_SUITE("quadrature") {

TEST_CASE("polynomial and smooth integrands to near machine precision") {
    auto sq = [](double x) { return x * x; };
    const fsv::QuadResult r1 = fsv::integrate(sq, 0.0, 1.0, 1e-12, 0.0);
    CHECK(std::abs(r1.value - 1.0 / 3.0) < 1e-14);
    CHECK(r1.panels >= 1);

    const fsv::QuadResult r2 = fsv::integrate([](double x) { return std::sin(x); }, 0.0, M_PI,
                                              1e-12, 0.0);
    CHECK(std::abs(r2.value - 2.0) < 1e-12);

    const fsv::QuadResult r3 =
        fsv::integrate([](double x) { return std::exp(x); }, 0.0, 1.0, 0.0, 1e-12);
    CHECK(std::abs(r3.value - std::expm1(1.0)) < 1e-12);
}

TEST_CASE("degenerate and reversed intervals") {
    auto f = [](double x) { return std::cos(x); };
    CHECK(fsv::integrate(f, 2.0, 2.0, 1e-10, 0.0).value == 0.0);
    const double fwd = fsv::integrate(f, 0.0, 1.5, 1e-13, 0.0).value;
    const double rev = fsv::integrate(f, 1.5, 0.0, 1e-13, 0.0).value;
    CHECK(std::abs(fwd + rev) < 1e-14);
    CHECK(std::abs(fwd - std::sin(1.5)) < 1e-13);
}

TEST_CASE("error estimate bounds the true error on an oscillatory integrand") {
    auto f = [](double x) { return std::cos(40.0 * x); };
    const fsv::QuadResult r = fsv::integrate(f, 0.0, 1.0, 1e-11, 0.0);
    const double truth = std::sin(40.0) / 40.0;
    CHECK(std::abs(r.value - truth) <= std::max(r.error, 1e-13));
    CHECK(r.error <= 1e-11);
}

TEST_CASE("left cusp substitution integrates x^0.1 exactly enough") {
    auto f = [](double x) { return std::pow(x, 0.1); };
    const fsv::QuadResult r = fsv::integrate_left_cusp(f, 0.0, 1.0, 0.1, 1e-12, 0.0);
    CHECK(std::abs(r.value - 1.0 / 1.1) < 1e-12);
}

TEST_CASE("left cusp substitution handles an inverse square root endpoint") {
    auto f = [](double x) { return 1.0 / std::sqrt(x); };
    const fsv::QuadResult r = fsv::integrate_left_cusp(f, 0.0, 1.0, 0.5, 1e-12, 0.0);
    CHECK(std::abs(r.value - 2.0) < 1e-12);
}

TEST_CASE("right cusp mirrors the left cusp") {
    auto left = [](double x) { return std::pow(x, 0.2) * std::cos(x); };
    auto right = [](double x) { return std::pow(1.0 - x, 0.2) * std::cos(1.0 - x); };
    const double a = fsv::integrate_left_cusp(left, 0.0, 1.0, 0.2, 1e-12, 0.0).value;
    const double b = fsv::integrate_right_cusp(right, 0.0, 1.0, 0.2, 1e-12, 0.0).value;
    CHECK(std::abs(a - b) < 1e-13);
}

TEST_CASE("cusped exponential agrees with the graded brute-force oracle") {
    // exp(-x^{0.2}) mimics exp(kappa) near 0 at H = 0.1.
    auto f = [](double x) { return std::exp(-std::pow(x, 0.2)); };
    const double adaptive = fsv::integrate_left_cusp(f, 0.0, 1.0, 0.2, 0.0, 1e-11).value;
    const double brute = oracle::prefix_graded(f, 1.0);
    CHECK(std::abs(adaptive - brute) < 1e-9 * std::abs(brute));
}

TEST_CASE("oracle sanity: graded and composite Gauss-Legendre hit known values") {
    CHECK(std::abs(oracle::gl16([](double x) { return x * x; }, 0.0, 1.0) - 1.0 / 3.0) < 1e-15);
    CHECK(std::abs(oracle::gl16_composite([](double x) { return std::exp(x); }, 0.0, 2.0, 4) -
                   std::expm1(2.0)) < 1e-13);
    // 1/sqrt(x) is value-singular, the worst case for the graded scheme: the
    // innermost panel leaves ~0.05 * 2^{-levels/2} behind.
    CHECK(std::abs(oracle::prefix_graded([](double x) { return 1.0 / std::sqrt(x); }, 1.0) -
                   2.0) < 1e-7);
    CHECK(std::abs(oracle::prefix_graded([](double x) { return 1.0 / std::sqrt(x); }, 1.0, 80) -
                   2.0) < 1e-12);
    // band2d over [0,1]^2 of |t-s| = 1/3.
    CHECK(std::abs(oracle::band2d([](double x) { return x; }, 1) - 1.0 / 3.0) < 1e-12);
    // band2d with constant integrand = cell area at any offset.
    CHECK(std::abs(oracle::band2d([](double) { return 1.0; }, 4) - 1.0) < 1e-12);
}

TEST_CASE("tolerance failure raises QuadratureError with the achieved estimate") {
    auto f = [](double x) { return std::sin(1e4 * x); };
    bool threw = false;
    try {
        fsv::integrate(f, 0.0, 1.0, 1e-300, 0.0, 8);
    } catch (const fsv::QuadratureError& e) {
        threw = true;
        CHECK(e.achieved > e.requested);
    }
    CHECK(threw);
}

}  // TEST_SUITE

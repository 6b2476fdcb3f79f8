#include "rkbs/kernels.hpp"

#include <doctest.h>

#include <cmath>

using namespace rkbs;

namespace {
Eigen::VectorXd pt1(double x) { return Eigen::VectorXd::Constant(1, x); }
}  // namespace

TEST_CASE("SpectralKernel validates parameters") {
    CHECK_THROWS_AS(SpectralKernel(0.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(SpectralKernel(-1.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(SpectralKernel(1.0, 0.5, 1), std::invalid_argument);  // n = d/2
    CHECK_THROWS_AS(SpectralKernel(1.0, 1.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(SpectralKernel(1.0, 0.9, 2), std::invalid_argument);
    CHECK_NOTHROW(SpectralKernel(1.0, 0.51, 1));
}

TEST_CASE("spectral_density closed form") {
    CHECK(spectral_density(SpectralKernel(1, 1, 1), pt1(0)) == doctest::Approx(1.0));
    CHECK(spectral_density(SpectralKernel(2, 3, 1), pt1(0)) == doctest::Approx(1.0 / 64.0));
    CHECK(spectral_density(SpectralKernel(1, 2, 1), pt1(1)) == doctest::Approx(0.25));
    CHECK_THROWS_AS(spectral_density(SpectralKernel(1, 2, 2), pt1(1)),
                    std::invalid_argument);
}

TEST_CASE("spectral_density is radial") {
    SpectralKernel k(0.7, 2.5, 2);
    Eigen::VectorXd a(2), b(2);
    a << 3.0, 4.0;
    b << 5.0, 0.0;  // same norm
    CHECK(spectral_density(k, a) == doctest::Approx(spectral_density(k, b)).epsilon(1e-15));
}

TEST_CASE("matern_evaluate matches the d=1 exponential closed forms") {
    // n = 1: G(x) = e^{-theta|x|} / (2 theta)
    SpectralKernel k1(1.0, 1.0, 1);
    CHECK(matern_evaluate(k1, pt1(1.0)) == doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-12));
    CHECK(matern_evaluate(k1, pt1(0.0)) == doctest::Approx(0.5).epsilon(1e-14));
    for (double theta : {0.5, 1.0, 2.0})
        for (double x : {0.1, 0.7, 2.3}) {
            SpectralKernel k(theta, 1.0, 1);
            CHECK(matern_evaluate(k, pt1(x)) ==
                  doctest::Approx(std::exp(-theta * x) / (2.0 * theta)).epsilon(1e-12));
        }
    // n = 2: G(x) = e^{-t}(1 + t) / (4 theta^3), t = theta|x|
    for (double theta : {0.5, 1.0, 2.0})
        for (double x : {0.1, 0.7, 2.3}) {
            SpectralKernel k(theta, 2.0, 1);
            const double t = theta * x;
            CHECK(matern_evaluate(k, pt1(x)) ==
                  doctest::Approx(std::exp(-t) * (1.0 + t) /
                                  (4.0 * theta * theta * theta)).epsilon(1e-12));
        }
}

TEST_CASE("matern_evaluate is even, positive, and maximal at 0") {
    SpectralKernel k(1.3, 2.7, 2);
    Eigen::VectorXd x(2);
    x << 0.4, -1.1;
    CHECK(matern_evaluate(k, x) == doctest::Approx(matern_evaluate(k, (-x).eval())));
    CHECK(matern_evaluate(k, x) > 0.0);
    CHECK(matern_evaluate(k, x) < matern_at_zero(k));
}

TEST_CASE("matern_at_zero is the limit of the closed form") {
    for (double n : {1.0, 2.0, 3.5}) {
        SpectralKernel k(1.4, n, 1);
        CHECK(matern_evaluate(k, pt1(1e-8)) ==
              doctest::Approx(matern_at_zero(k)).epsilon(1e-6));
    }
}

TEST_CASE("matern_evaluate reports Bessel underflow instead of flushing") {
    SpectralKernel k(1.0, 1.0, 1);
    CHECK_THROWS_AS(matern_evaluate(k, pt1(1000.0)), std::range_error);
}

TEST_CASE("density power semigroup: density^(p-1) equals the lifted density") {
    // Fourier-side statement behind the multipoint expansion; must hold to
    // machine epsilon since both sides are pure powers.
    for (double theta : {0.5, 1.0, 2.0})
        for (double n : {1.0, 2.0})
            for (int p : {2, 4, 6}) {
                SpectralKernel base(theta, n, 1);
                SpectralKernel lifted(theta, (p - 1) * n, 1);
                for (double w : {0.0, 0.3, 1.0, 7.5, 40.0}) {
                    const double lhs = std::pow(spectral_density(base, pt1(w)), p - 1);
                    const double rhs = spectral_density(lifted, pt1(w));
                    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
                }
            }
}

TEST_CASE("MultipointKernelSpec validates arity and effective degree") {
    SpectralKernel base(1.0, 2.0, 1);
    CHECK_THROWS_AS(MultipointKernelSpec(base, 2), std::invalid_argument);
    CHECK_THROWS_AS(MultipointKernelSpec(base, 0), std::invalid_argument);
    CHECK_NOTHROW(MultipointKernelSpec(base, 1));
    CHECK_NOTHROW(MultipointKernelSpec(base, 3));
    // (p-1) n must exceed d/2: n = 0.6, d = 3 fails even for arity 1... the
    // base itself requires n > d/2, so the lifted degree can only grow; check
    // the lifted kernel is the expected one instead.
    CHECK(MultipointKernelSpec(base, 3).effective_degree == doctest::Approx(6.0));
    CHECK(MultipointKernelSpec(base, 3).lifted().degree == doctest::Approx(6.0));
}

TEST_CASE("multipoint_evaluate reduces to the lifted kernel at the alternating offset") {
    SpectralKernel base(1.0, 2.0, 1);
    MultipointKernelSpec spec(base, 3);  // p = 4
    Eigen::MatrixXd ys(1, 3);
    ys << 0.5, 0.1, -0.2;
    const double got = multipoint_evaluate(spec, pt1(0.0), ys);
    SpectralKernel lifted(1.0, 6.0, 1);
    CHECK(got == doctest::Approx(matern_evaluate(lifted, pt1(-0.2))).epsilon(1e-14));

    Eigen::MatrixXd bad(1, 2);
    bad.setZero();
    CHECK_THROWS_AS(multipoint_evaluate(spec, pt1(0.0), bad), std::invalid_argument);
}

TEST_CASE("alternating offset signs are -,+,-,...") {
    Eigen::VectorXd x = pt1(1.0);
    Eigen::MatrixXd ys(1, 3);
    ys << 0.5, 0.1, -0.2;
    CHECK(alternating_offset(x, ys)(0) == doctest::Approx(1.0 - 0.5 + 0.1 + 0.2));
}

TEST_CASE("canonical scale ties the closed form to the spectral convention") {
    CHECK(canonical_scale(1) == doctest::Approx(std::sqrt(2.0 * M_PI)));
    CHECK(canonical_scale(2) == doctest::Approx(2.0 * M_PI));
    SpectralKernel k(1.0, 2.0, 1);
    CHECK(canonical_evaluate(k, pt1(0.3)) ==
          doctest::Approx(canonical_scale(1) * matern_evaluate(k, pt1(0.3))));
}

TEST_CASE("integrability condition nq/p > d/2") {
    CHECK(integrability_condition(SpectralKernel(1.0, 2.0, 1), 4.0));   // 2/3 > 1/2
    CHECK(integrability_condition(SpectralKernel(1.0, 1.0, 1), 2.0));   // 1 > 1/2
    CHECK_FALSE(integrability_condition(SpectralKernel(1.0, 1.1, 2), 4.0));  // 0.37 < 1
    CHECK(integrability_condition(SpectralKernel(1.0, 4.0, 2), 4.0));   // 4/3 > 1
}

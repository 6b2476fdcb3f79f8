#include "rkbs/finite_rkbs.hpp"

#include <doctest.h>

#include <complex>
#include <random>

using namespace rkbs;

namespace {

Eigen::MatrixXcd random_hpd(Eigen::Index n, std::mt19937& rng) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXcd b(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) b(i, j) = {nd(rng), nd(rng)};
    Eigen::MatrixXcd a = b * b.adjoint();
    a += 0.5 * a.norm() / static_cast<double>(n) * Eigen::MatrixXcd::Identity(n, n);
    return a;
}

Eigen::VectorXcd random_cvec(Eigen::Index n, std::mt19937& rng) {
    std::normal_distribution<double> nd;
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = {nd(rng), nd(rng)};
    return v;
}

}  // namespace

TEST_CASE("constructor validation") {
    std::mt19937 rng(1);
    Eigen::MatrixXcd a = random_hpd(3, rng);
    CHECK_NOTHROW(FiniteRkbs(a, 2.0));
    CHECK_THROWS_AS(FiniteRkbs(a, 1.0), std::invalid_argument);

    Eigen::MatrixXcd nh = a;
    nh(0, 1) += std::complex<double>(0.0, 1.0);
    CHECK_THROWS_AS(FiniteRkbs(nh, 2.0), std::invalid_argument);

    Eigen::MatrixXcd npd = a - 2.0 * a.norm() * Eigen::MatrixXcd::Identity(3, 3);
    CHECK_THROWS_AS(FiniteRkbs(npd, 2.0), std::invalid_argument);

    Eigen::MatrixXcd rect(2, 3);
    rect.setZero();
    CHECK_THROWS_AS(FiniteRkbs(rect, 2.0), std::invalid_argument);

    Eigen::MatrixXcd ill = Eigen::MatrixXcd::Identity(2, 2);
    ill(1, 1) = 1e-10;
    CHECK_THROWS_AS(FiniteRkbs(ill, 2.0), std::invalid_argument);
}

TEST_CASE("p = 2 norm is the A^{-1} quadratic form") {
    std::mt19937 rng(2);
    Eigen::MatrixXcd a = random_hpd(4, rng);
    FiniteRkbs space(a, 2.0);
    for (int t = 0; t < 20; ++t) {
        const Eigen::VectorXcd f = random_cvec(4, rng);
        const double quad = (f.adjoint() * a.inverse() * f)(0).real();
        CHECK(space.b_norm(f) == doctest::Approx(std::sqrt(quad)).epsilon(1e-10));
    }
}

TEST_CASE("dual pairing matches the dense-inverse oracle") {
    std::mt19937 rng(3);
    for (int n : {2, 4, 6}) {
        Eigen::MatrixXcd a = random_hpd(n, rng);
        FiniteRkbs space(a, 4.0);
        const Eigen::MatrixXcd ainv = a.inverse();
        for (int t = 0; t < 20; ++t) {
            const Eigen::VectorXcd f = random_cvec(n, rng);
            const Eigen::VectorXcd g = random_cvec(n, rng);
            const std::complex<double> direct = (g.adjoint() * ainv * f)(0);
            CHECK(std::abs(space.dual_pairing(f, g) - direct) <=
                  1e-10 * (std::abs(direct) + 1.0));
        }
    }
}

TEST_CASE("Hoelder inequality between the paired norms") {
    std::mt19937 rng(4);
    for (double p : {4.0 / 3.0, 2.0, 4.0}) {
        Eigen::MatrixXcd a = random_hpd(5, rng);
        FiniteRkbs space(a, p);
        for (int t = 0; t < 50; ++t) {
            const Eigen::VectorXcd f = random_cvec(5, rng);
            const Eigen::VectorXcd g = random_cvec(5, rng);
            CHECK(std::abs(space.dual_pairing(f, g)) <=
                  space.b_norm(f) * space.dual_norm(g) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("two-sided reproduction") {
    std::mt19937 rng(5);
    for (double p : {4.0 / 3.0, 2.0, 4.0})
        for (int n : {1, 3, 8}) {
            FiniteRkbs space(random_hpd(n, rng), p);
            CHECK(space.reproduction_check(20) <= 1e-10);
        }
}

TEST_CASE("min-norm interpolation: argument validation and zero data") {
    std::mt19937 rng(6);
    FiniteRkbs space(random_hpd(4, rng), 4.0);
    Eigen::VectorXcd y(2);
    y << 1.0, -1.0;
    CHECK_THROWS_AS(space.min_norm_interpolate({0, 0}, y), std::invalid_argument);
    CHECK_THROWS_AS(space.min_norm_interpolate({}, Eigen::VectorXcd()),
                    std::invalid_argument);
    CHECK(space.min_norm_interpolate({0, 2}, Eigen::VectorXcd::Zero(2)).norm() == 0.0);
}

TEST_CASE("min-norm interpolation interpolates and reduces to the p = 2 formula") {
    std::mt19937 rng(7);
    for (double p : {4.0 / 3.0, 2.0, 4.0}) {
        Eigen::MatrixXcd a = random_hpd(5, rng);
        FiniteRkbs space(a, p);
        const std::vector<Eigen::Index> j_set{1, 3};
        const Eigen::VectorXcd y = random_cvec(2, rng);
        const Eigen::VectorXcd s = space.min_norm_interpolate(j_set, y);
        CHECK(std::abs(s[1] - y[0]) <= 1e-8 * (1.0 + y.norm()));
        CHECK(std::abs(s[3] - y[1]) <= 1e-8 * (1.0 + y.norm()));

        if (p == 2.0) {
            // classical kernel interpolant: c = (A_JJ)^{-1} y, s = A_{:,J} c
            Eigen::MatrixXcd ajj(2, 2);
            Eigen::MatrixXcd acols(5, 2);
            for (int r = 0; r < 2; ++r) {
                acols.col(r) = a.col(j_set[r]);
                for (int c = 0; c < 2; ++c) ajj(r, c) = a(j_set[r], j_set[c]);
            }
            const Eigen::VectorXcd classical = acols * ajj.inverse() * y;
            CHECK((s - classical).norm() <= 1e-8 * (classical.norm() + 1.0));
        }
    }
}

TEST_CASE("min-norm interpolation is minimal along interpolating perturbations") {
    std::mt19937 rng(8);
    for (double p : {4.0 / 3.0, 4.0}) {
        Eigen::MatrixXcd a = random_hpd(3, rng);
        FiniteRkbs space(a, p);
        const std::vector<Eigen::Index> j_set{0, 2};
        Eigen::VectorXcd y(2);
        y << std::complex<double>(1.0, 0.3), std::complex<double>(-0.5, 0.8);
        const Eigen::VectorXcd s = space.min_norm_interpolate(j_set, y);
        const double base = space.b_norm(s);
        // all interpolants form s + t * z with z zero on the constrained indices
        Eigen::VectorXcd z = Eigen::VectorXcd::Zero(3);
        z[1] = 1.0;
        for (double tr : {-0.5, -0.1, 0.1, 0.5})
            for (double ti : {-0.3, 0.0, 0.3}) {
                const std::complex<double> t{tr, ti};
                CHECK(space.b_norm((s + t * z).eval()) >= base * (1.0 - 1e-8));
            }
    }
}

#include "rkbs/lp_space.hpp"

#include <doctest.h>

#include <complex>
#include <random>

using namespace rkbs;

namespace {

WeightedSequenceSpace make_space(int m, double p, unsigned seed = 3) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ud(0.2, 2.0);
    Eigen::MatrixXd nodes(1, m);
    Eigen::VectorXd w(m);
    for (int i = 0; i < m; ++i) {
        nodes(0, i) = i;
        w[i] = ud(rng);
    }
    return WeightedSequenceSpace(nodes, w, p);
}

SpectralVector random_vec(int m, std::mt19937& rng) {
    std::normal_distribution<double> nd;
    SpectralVector v(m);
    for (int i = 0; i < m; ++i) v[i] = {nd(rng), nd(rng)};
    return v;
}

}  // namespace

TEST_CASE("WeightedSequenceSpace validation") {
    Eigen::MatrixXd nodes(1, 2);
    nodes << 0.0, 1.0;
    Eigen::VectorXd w(2);
    w << 1.0, 1.0;
    CHECK_NOTHROW(WeightedSequenceSpace(nodes, w, 2.0));
    CHECK_THROWS_AS(WeightedSequenceSpace(nodes, w, 1.0), std::invalid_argument);
    Eigen::VectorXd bad = w;
    bad[1] = 0.0;
    CHECK_THROWS_AS(WeightedSequenceSpace(nodes, bad, 2.0), std::invalid_argument);
    Eigen::VectorXd w3(3);
    w3.setOnes();
    CHECK_THROWS_AS(WeightedSequenceSpace(nodes, w3, 2.0), std::invalid_argument);
}

TEST_CASE("conjugate space swaps the exponent") {
    auto s = make_space(4, 4.0);
    CHECK(s.conjugate_exponent() == doctest::Approx(4.0 / 3.0));
    CHECK(s.conjugate_space().exponent == doctest::Approx(4.0 / 3.0));
    CHECK(s.conjugate_space().conjugate_space().exponent == doctest::Approx(4.0));
}

TEST_CASE("lp_norm agrees with the weighted Euclidean norm at p = 2") {
    auto s = make_space(6, 2.0);
    std::mt19937 rng(11);
    const SpectralVector f = random_vec(6, rng);
    double acc = 0.0;
    for (int i = 0; i < 6; ++i) acc += s.weights[i] * std::norm(f[i]);
    CHECK(lp_norm(s, f) == doctest::Approx(std::sqrt(acc)).epsilon(1e-14));
}

TEST_CASE("semi-inner-product axioms") {
    std::mt19937 rng(5);
    for (double p : {4.0 / 3.0, 2.0, 3.0, 4.0}) {
        auto s = make_space(5, p);
        for (int trial = 0; trial < 50; ++trial) {
            const SpectralVector f = random_vec(5, rng);
            const SpectralVector g = random_vec(5, rng);
            const SpectralVector h = random_vec(5, rng);
            const std::complex<double> a{0.7, -1.2};

            // additivity and homogeneity in the first slot
            const auto lin = semi_inner(s, (a * g + h).eval(), f);
            const auto split = a * semi_inner(s, g, f) + semi_inner(s, h, f);
            CHECK(std::abs(lin - split) <= 1e-12 * (std::abs(split) + 1.0));

            // conjugate homogeneity in the second slot
            const auto scaled = semi_inner(s, g, (a * f).eval());
            CHECK(std::abs(scaled - std::conj(a) * semi_inner(s, g, f)) <=
                  1e-12 * (std::abs(scaled) + 1.0));

            // [f, f] = ||f||^2
            const double nf = lp_norm(s, f);
            CHECK(std::abs(semi_inner(s, f, f) - nf * nf) <= 1e-12 * (nf * nf + 1.0));

            // Cauchy-Schwarz in squared form
            const double lhs = std::norm(semi_inner(s, g, f));
            const double rhs =
                semi_inner(s, f, f).real() * semi_inner(s, g, g).real();
            CHECK(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
        }
    }
}

TEST_CASE("zero-vector conventions") {
    auto s = make_space(4, 4.0);
    const SpectralVector z = SpectralVector::Zero(4);
    std::mt19937 rng(9);
    const SpectralVector g = random_vec(4, rng);
    CHECK(semi_inner(s, g, z) == std::complex<double>(0.0, 0.0));
    CHECK(dual_element(s, z).norm() == 0.0);
    CHECK(lp_norm(s, z) == 0.0);
}

TEST_CASE("dual element preserves the norm and pairs to the norm squared") {
    std::mt19937 rng(17);
    for (double p : {4.0 / 3.0, 2.0, 4.0}) {
        auto s = make_space(6, p);
        auto sq = s.conjugate_space();
        for (int trial = 0; trial < 100; ++trial) {
            const SpectralVector f = random_vec(6, rng);
            const SpectralVector fstar = dual_element(s, f);
            const double nf = lp_norm(s, f);
            CHECK(lp_norm(sq, fstar) == doctest::Approx(nf).epsilon(1e-12));
            // sum_i w_i f_i conj(f*_i) = ||f||^2
            std::complex<double> pairing{0.0, 0.0};
            for (int i = 0; i < 6; ++i)
                pairing += s.weights[i] * f[i] * std::conj(fstar[i]);
            CHECK(std::abs(pairing - nf * nf) <= 1e-12 * (nf * nf + 1.0));
        }
    }
}

TEST_CASE("p = 2 dual element is the identity") {
    auto s = make_space(5, 2.0);
    std::mt19937 rng(23);
    const SpectralVector f = random_vec(5, rng);
    CHECK((dual_element(s, f) - f).norm() <= 1e-14 * f.norm());
}

TEST_CASE("orthogonality detection") {
    auto s = make_space(4, 3.0);
    SpectralVector f = SpectralVector::Zero(4), g = SpectralVector::Zero(4);
    f[0] = {1.0, 0.5};
    f[1] = -2.0;
    g[2] = 3.0;
    g[3] = {0.0, 1.0};
    // disjoint supports: [g, f] = 0 exactly
    const auto res = is_orthogonal(s, f, g);
    CHECK(res.orthogonal);
    CHECK(res.residual == doctest::Approx(0.0));
    // f is never normal to itself
    CHECK_FALSE(is_orthogonal(s, f, f).orthogonal);
}

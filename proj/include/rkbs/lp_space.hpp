#pragma once

// Semi-inner-products, norms and duality maps on discrete weighted
// sequence surrogates of L_p(R^d; mu).

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>

namespace rkbs {

using SpectralVector = Eigen::VectorXcd;

/// Finite quadrature surrogate for L_p(R^d; mu): nodes with strictly
/// positive weights and an exponent p > 1.
struct WeightedSequenceSpace {
    Eigen::MatrixXd nodes;    // d x M, kept for provenance only
    Eigen::VectorXd weights;  // M strictly positive weights
    double exponent;          // p

    WeightedSequenceSpace(Eigen::MatrixXd nodes_, Eigen::VectorXd weights_, double p)
        : nodes(std::move(nodes_)), weights(std::move(weights_)), exponent(p) {
        if (weights.size() < 1 || nodes.cols() != weights.size())
            throw std::invalid_argument("WeightedSequenceSpace: node/weight mismatch");
        if ((weights.array() <= 0.0).any())
            throw std::invalid_argument("WeightedSequenceSpace: weights must be positive");
        if (!(exponent > 1.0))
            throw std::invalid_argument("WeightedSequenceSpace: exponent must exceed 1");
    }

    double conjugate_exponent() const { return exponent / (exponent - 1.0); }

    /// Same nodes and weights with the conjugate exponent; hosts dual elements.
    WeightedSequenceSpace conjugate_space() const {
        return WeightedSequenceSpace(nodes, weights, conjugate_exponent());
    }

    Eigen::Index size() const { return weights.size(); }

    void check(const SpectralVector& f) const {
        if (f.size() != weights.size())
            throw std::invalid_argument("WeightedSequenceSpace: vector size mismatch");
    }
};

/// (sum_i w_i |f_i|^p)^{1/p}
inline double lp_norm(const WeightedSequenceSpace& s, const SpectralVector& f) {
    s.check(f);
    const double p = s.exponent;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i)
        acc += s.weights[i] * std::pow(std::abs(f[i]), p);
    return std::pow(acc, 1.0 / p);
}

/// [g, f] = ||f||^{2-p} sum_i w_i g_i conj(f_i) |f_i|^{p-2}.
/// [g, 0] := 0 by continuity.
inline std::complex<double> semi_inner(const WeightedSequenceSpace& s,
                                       const SpectralVector& g,
                                       const SpectralVector& f) {
    s.check(g);
    s.check(f);
    const double nf = lp_norm(s, f);
    if (nf == 0.0) return {0.0, 0.0};
    const double p = s.exponent;
    std::complex<double> acc{0.0, 0.0};
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        const double a = std::abs(f[i]);
        if (a == 0.0) continue;
        acc += s.weights[i] * g[i] * std::conj(f[i]) * std::pow(a, p - 2.0);
    }
    return std::pow(nf, 2.0 - p) * acc;
}

/// Normalized-duality-mapping element f* = f |f|^{p-2} / ||f||^{p-2},
/// an element of the conjugate space. 0* := 0.
inline SpectralVector dual_element(const WeightedSequenceSpace& s, const SpectralVector& f) {
    s.check(f);
    const double nf = lp_norm(s, f);
    SpectralVector out = SpectralVector::Zero(f.size());
    if (nf == 0.0) return out;
    const double p = s.exponent;
    const double scale = std::pow(nf, 2.0 - p);
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        const double a = std::abs(f[i]);
        if (a == 0.0) continue;
        out[i] = scale * f[i] * std::pow(a, p - 2.0);
    }
    return out;
}

struct OrthogonalityResult {
    double residual;  // |[g, f]|
    bool orthogonal;
};

/// f normal to g: [g, f] = 0 up to a scale-aware threshold.
inline OrthogonalityResult is_orthogonal(const WeightedSequenceSpace& s,
                                         const SpectralVector& f,
                                         const SpectralVector& g,
                                         double rel_tol = 1e-10) {
    const double r = std::abs(semi_inner(s, g, f));
    const double scale = lp_norm(s, f) * lp_norm(s, g);
    return {r, r <= rel_tol * (scale + 1.0)};
}

}  // namespace rkbs

#pragma once

// Matern (Sobolev-spline) positive definite functions, their spectral
// densities and the multipoint kernels used by even-p expansions.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace rkbs {

/// Matern family G_{theta,n} on R^d with spectral density
/// (theta^2 + |w|^2)^{-n}. Requires n > d/2 for positive definiteness.
struct SpectralKernel {
    double theta;   // shape parameter, > 0
    double degree;  // n, > d/2
    int dim;        // d, >= 1

    SpectralKernel(double theta_, double degree_, int dim_)
        : theta(theta_), degree(degree_), dim(dim_) {
        if (!(theta > 0.0))
            throw std::invalid_argument("SpectralKernel: theta must be positive");
        if (dim < 1)
            throw std::invalid_argument("SpectralKernel: dim must be >= 1");
        if (!(degree > 0.5 * dim))
            throw std::invalid_argument("SpectralKernel: degree must exceed dim/2");
    }
};

/// Spectral density (theta^2 + |w|^2)^{-n}. Radial and strictly positive.
inline double spectral_density(const SpectralKernel& k, const Eigen::VectorXd& w) {
    if (w.size() != k.dim)
        throw std::invalid_argument("spectral_density: dimension mismatch");
    return std::pow(k.theta * k.theta + w.squaredNorm(), -k.degree);
}

/// Value of the Matern closed form at the origin (analytic limit).
inline double matern_at_zero(const SpectralKernel& k) {
    const double d = static_cast<double>(k.dim);
    return std::pow(2.0, -d) * std::pow(M_PI, -d / 2.0) *
           std::tgamma(k.degree - d / 2.0) / std::tgamma(k.degree) *
           std::pow(k.theta, d - 2.0 * k.degree);
}

/// Matern closed form
///   G(x) = 2^{1-n-d/2} / (pi^{d/2} Gamma(n) theta^{2n-d})
///          (theta|x|)^{n-d/2} K_{d/2-n}(theta|x|).
/// Even, strictly positive, finite at 0 since n > d/2.
inline double matern_evaluate(const SpectralKernel& k, const Eigen::VectorXd& x) {
    if (x.size() != k.dim)
        throw std::invalid_argument("matern_evaluate: dimension mismatch");
    const double d = static_cast<double>(k.dim);
    const double nu = k.degree - d / 2.0;  // > 0
    const double t = k.theta * x.norm();
    if (t == 0.0) return matern_at_zero(k);
    if (t > 690.0)
        throw std::range_error("matern_evaluate: Bessel underflow at theta*|x| = " +
                               std::to_string(t));
    // For tiny arguments the leading term of K_nu dominates to O(t^2); the
    // direct product would mix huge and tiny factors for large nu.
    if (t < 1e-6 && nu >= 2.0) return matern_at_zero(k);
    const double pref = std::pow(2.0, 1.0 - k.degree - d / 2.0) /
                        (std::pow(M_PI, d / 2.0) * std::tgamma(k.degree) *
                         std::pow(k.theta, 2.0 * k.degree - d));
    const double val = pref * std::pow(t, nu) * std::cyl_bessel_k(nu, t);
    if (!std::isfinite(val))
        throw std::range_error("matern_evaluate: non-finite Bessel evaluation");
    return val;
}

/// Scale relating the closed form above to the inverse Fourier transform of
/// the spectral density under the (2pi)^{-d/2} convention:
///   Phi(x) = canonical_scale(d) * matern_evaluate(x).
inline double canonical_scale(int dim) {
    return std::pow(2.0 * M_PI, 0.5 * dim);
}

/// The position-space kernel paired with spectral_density, used by every
/// Gram matrix / tensor in the function space.
inline double canonical_evaluate(const SpectralKernel& k, const Eigen::VectorXd& x) {
    return canonical_scale(k.dim) * matern_evaluate(k, x);
}

/// Multipoint kernel Ker_{theta,(p-1)n}(x, y_1, ..., y_{p-1})
///   = G_{theta,(p-1)n}(x - y_1 + y_2 - ... - y_{p-1}),   p even.
struct MultipointKernelSpec {
    SpectralKernel base;
    int arity;                // p - 1, odd
    double effective_degree;  // (p-1) n

    MultipointKernelSpec(const SpectralKernel& base_, int arity_)
        : base(base_), arity(arity_), effective_degree(arity_ * base_.degree) {
        if (arity < 1 || arity % 2 == 0)
            throw std::invalid_argument("MultipointKernelSpec: arity must be odd and >= 1");
        if (!(effective_degree > 0.5 * base.dim))
            throw std::invalid_argument("MultipointKernelSpec: (p-1)n must exceed d/2");
    }

    SpectralKernel lifted() const {
        return SpectralKernel(base.theta, effective_degree, base.dim);
    }
};

/// Alternating-sign offset x - y_1 + y_2 - ... for one multipoint argument.
/// `ys` holds the p-1 translate points as columns.
inline Eigen::VectorXd alternating_offset(const Eigen::VectorXd& x,
                                          const Eigen::MatrixXd& ys) {
    Eigen::VectorXd arg = x;
    for (Eigen::Index i = 0; i < ys.cols(); ++i)
        arg += ((i % 2 == 0) ? -1.0 : 1.0) * ys.col(i);
    return arg;
}

inline double multipoint_evaluate(const MultipointKernelSpec& spec,
                                  const Eigen::VectorXd& x,
                                  const Eigen::MatrixXd& ys) {
    if (ys.cols() != spec.arity)
        throw std::invalid_argument("multipoint_evaluate: expected " +
                                    std::to_string(spec.arity) + " translate points");
    if (ys.rows() != spec.base.dim || x.size() != spec.base.dim)
        throw std::invalid_argument("multipoint_evaluate: dimension mismatch");
    return matern_evaluate(spec.lifted(), alternating_offset(x, ys));
}

inline double canonical_multipoint_evaluate(const MultipointKernelSpec& spec,
                                            const Eigen::VectorXd& x,
                                            const Eigen::MatrixXd& ys) {
    return canonical_scale(spec.base.dim) * multipoint_evaluate(spec, x, ys);
}

/// Integrability precondition of the B^p_Phi construction: nq/p > d/2
/// with q the conjugate exponent of p.
inline bool integrability_condition(const SpectralKernel& k, double p) {
    const double q = p / (p - 1.0);
    return k.degree * q / p > 0.5 * k.dim;
}

}  // namespace rkbs

#pragma once

// The function space B^p_Phi(R^d): training data, coefficient vectors,
// precomputed multipoint Gram tensors, the phi-map, the B^p_Phi norm and
// even-p closed-form evaluation.

#include "rkbs/kernels.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <complex>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rkbs {

struct TrainingSet {
    Eigen::MatrixXd points;   // d x N, pairwise distinct
    Eigen::VectorXcd values;  // N

    TrainingSet(Eigen::MatrixXd pts, Eigen::VectorXcd vals)
        : points(std::move(pts)), values(std::move(vals)) {
        if (points.cols() != values.size() || points.cols() == 0)
            throw std::invalid_argument("TrainingSet: point/value count mismatch");
        for (Eigen::Index a = 0; a < points.cols(); ++a)
            for (Eigen::Index b = a + 1; b < points.cols(); ++b)
                if ((points.col(a) - points.col(b)).cwiseAbs().maxCoeff() < 1e-12)
                    throw std::invalid_argument(
                        "TrainingSet: data points must be pairwise distinct");
    }

    static TrainingSet from_real(const Eigen::MatrixXd& pts, const Eigen::VectorXd& vals) {
        return TrainingSet(pts, vals.cast<std::complex<double>>());
    }

    Eigen::Index size() const { return points.cols(); }
    int dim() const { return static_cast<int>(points.rows()); }
};

struct CoefficientVector {
    Eigen::VectorXcd entries;
    bool real_mode = false;

    CoefficientVector() = default;
    CoefficientVector(Eigen::VectorXcd c, bool real)
        : entries(std::move(c)), real_mode(real) {
        if (real_mode)
            for (Eigen::Index i = 0; i < entries.size(); ++i)
                if (entries[i].imag() != 0.0)
                    throw std::invalid_argument(
                        "CoefficientVector: real_mode requires zero imaginary parts");
    }
};

/// Dense tensor of canonical multipoint kernel values
///   T[j, k_1, ..., k_{p-1}] = Phi_{p-1}(x_j - x_{k_1} + x_{k_2} - ...),
/// where Phi_{p-1} is the inverse transform of the density power. For
/// p = 2 this is the ordinary N x N Gram matrix.
class GramTensor {
public:
    GramTensor(int order, Eigen::Index n, std::vector<double> values)
        : order_(order), n_(n), values_(std::move(values)) {
        std::size_t expect = 1;
        for (int i = 0; i <= order_; ++i) expect *= static_cast<std::size_t>(n_);
        if (values_.size() != expect)
            throw std::invalid_argument("GramTensor: value count mismatch");
    }

    int order() const { return order_; }
    Eigen::Index axis() const { return n_; }

    double operator()(Eigen::Index j, const std::vector<Eigen::Index>& ks) const {
        std::size_t idx = static_cast<std::size_t>(j);
        for (Eigen::Index k : ks) idx = idx * n_ + static_cast<std::size_t>(k);
        return values_[idx];
    }

    const std::vector<double>& raw() const { return values_; }

    /// p = 2 view.
    Eigen::MatrixXd as_matrix() const {
        if (order_ != 1) throw std::logic_error("GramTensor: not a matrix");
        return Eigen::Map<const Eigen::MatrixXd>(values_.data(), n_, n_).transpose();
    }

private:
    int order_;
    Eigen::Index n_;
    std::vector<double> values_;  // row-major over (j, k_1, ..., k_order)
};

inline int worker_threads() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RKBS_SVM_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < hw) hw = static_cast<unsigned>(cap);
    }
    return static_cast<int>(hw);
}

inline void check_even_p(int p) {
    if (p < 2 || p % 2 != 0)
        throw std::invalid_argument("closed-form path requires even p >= 2, got " +
                                    std::to_string(p));
}

/// Odometer increment over {0..n-1}^len; returns false after wrap-around.
inline bool next_multi_index(std::vector<Eigen::Index>& k, Eigen::Index n) {
    for (std::size_t pos = k.size(); pos-- > 0;) {
        if (++k[pos] < n) return true;
        k[pos] = 0;
    }
    return false;
}

inline GramTensor build_gram(const SpectralKernel& kernel, const Eigen::MatrixXd& centers,
                             int p, std::size_t entry_cap = 10'000'000) {
    check_even_p(p);
    const Eigen::Index n = centers.cols();
    const int order = p - 1;
    double per_j = std::pow(static_cast<double>(n), order);
    if (per_j > static_cast<double>(entry_cap))
        throw std::runtime_error("build_gram: tensor with N=" + std::to_string(n) +
                                 ", p=" + std::to_string(p) +
                                 " exceeds the entry cap of " + std::to_string(entry_cap));
    const std::size_t per_lead = static_cast<std::size_t>(per_j);
    std::vector<double> values(per_lead * static_cast<std::size_t>(n));

    const SpectralKernel lifted(kernel.theta, order * kernel.degree, kernel.dim);
    const double scale = canonical_scale(kernel.dim);

    const auto fill_lead = [&](Eigen::Index j) {
        std::vector<Eigen::Index> k(order, 0);
        std::size_t idx = static_cast<std::size_t>(j) * per_lead;
        do {
            Eigen::VectorXd arg = centers.col(j);
            for (int pos = 0; pos < order; ++pos)
                arg += ((pos % 2 == 0) ? -1.0 : 1.0) * centers.col(k[pos]);
            values[idx++] = scale * matern_evaluate(lifted, arg);
        } while (next_multi_index(k, n));
    };

    const int nthreads = std::min<int>(worker_threads(), static_cast<int>(n));
    if (nthreads <= 1 || n < 4) {
        for (Eigen::Index j = 0; j < n; ++j) fill_lead(j);
    } else {
        std::vector<std::thread> pool;
        std::atomic<Eigen::Index> next{0};
        for (int t = 0; t < nthreads; ++t)
            pool.emplace_back([&] {
                for (Eigen::Index j = next.fetch_add(1); j < n; j = next.fetch_add(1))
                    fill_lead(j);
            });
        for (auto& th : pool) th.join();
    }
    return GramTensor(order, n, std::move(values));
}

/// A trained (or in-training) SVM in B^p_Phi: even exponent, kernel,
/// centers and coefficients, with an optional cached Gram tensor.
struct RkbsModel {
    int p;
    SpectralKernel kernel;
    Eigen::MatrixXd centers;  // d x N
    CoefficientVector coefficients;
    std::shared_ptr<const GramTensor> gram;

    RkbsModel(int p_, const SpectralKernel& k, Eigen::MatrixXd centers_,
              CoefficientVector c, std::shared_ptr<const GramTensor> gram_ = nullptr)
        : p(p_), kernel(k), centers(std::move(centers_)),
          coefficients(std::move(c)), gram(std::move(gram_)) {
        check_even_p(p);
        if (!integrability_condition(kernel, p))
            throw std::invalid_argument("RkbsModel: nq/p > d/2 violated");
        if (centers.cols() != coefficients.entries.size())
            throw std::invalid_argument("RkbsModel: center/coefficient count mismatch");
        if (static_cast<int>(centers.rows()) != kernel.dim)
            throw std::invalid_argument("RkbsModel: center dimension mismatch");
    }

    double q() const { return static_cast<double>(p) / (p - 1.0); }

    const GramTensor& gram_tensor() const {
        if (!gram)
            const_cast<RkbsModel*>(this)->gram = std::make_shared<GramTensor>(
                build_gram(kernel, centers, p));
        return *gram;
    }
};

/// Coefficient product Prod_{odd slots} c  Prod_{even slots} conj(c) over a
/// multi-index (slots are 1-based as in the expansion).
inline std::complex<double> coefficient_product(const Eigen::VectorXcd& c,
                                                const std::vector<Eigen::Index>& k) {
    std::complex<double> w{1.0, 0.0};
    for (std::size_t pos = 0; pos < k.size(); ++pos)
        w *= (pos % 2 == 0) ? c[k[pos]] : std::conj(c[k[pos]]);
    return w;
}

/// phi_j(c) = sum over multi-indices of coefficient products times tensor
/// entries; for p = 2 this is Gram * c.
inline Eigen::VectorXcd phi_from_gram(const GramTensor& t, const Eigen::VectorXcd& c) {
    const Eigen::Index n = t.axis();
    if (c.size() != n) throw std::invalid_argument("phi_from_gram: size mismatch");
    Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(n);
    std::vector<Eigen::Index> k(t.order(), 0);
    do {
        const std::complex<double> w = coefficient_product(c, k);
        if (w == std::complex<double>(0.0)) continue;
        for (Eigen::Index j = 0; j < n; ++j) phi[j] += w * t(j, k);
    } while (next_multi_index(k, n));
    return phi;
}

inline Eigen::VectorXcd phi_map(const RkbsModel& m) {
    return phi_from_gram(m.gram_tensor(), m.coefficients.entries);
}

/// Wirtinger Jacobian d phi_j / d c_k: (p/2) sums with the first odd slot
/// pinned to k (the odd slots are exchangeable).
inline Eigen::MatrixXcd dphi_dc(const GramTensor& t, const Eigen::VectorXcd& c) {
    const Eigen::Index n = t.axis();
    const int order = t.order();
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(n, n);
    const double mult = 0.5 * (order + 1);  // p/2
    std::vector<Eigen::Index> full(order, 0);
    if (order == 1) {
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < n; ++k) {
                full[0] = k;
                b(j, k) = t(j, full);
            }
        return b;
    }
    std::vector<Eigen::Index> rest(order - 1, 0);
    do {
        // weight of slots 2..order given slot 1 is pinned (and its factor dropped)
        std::complex<double> w{1.0, 0.0};
        for (std::size_t pos = 0; pos < rest.size(); ++pos)
            w *= (pos % 2 == 0) ? std::conj(c[rest[pos]]) : c[rest[pos]];
        if (w == std::complex<double>(0.0)) continue;
        for (Eigen::Index k = 0; k < n; ++k) {
            full[0] = k;
            for (std::size_t pos = 0; pos < rest.size(); ++pos) full[pos + 1] = rest[pos];
            for (Eigen::Index j = 0; j < n; ++j) b(j, k) += mult * w * t(j, full);
        }
    } while (next_multi_index(rest, n));
    return b;
}

/// Conjugate Wirtinger Jacobian d phi_j / d conj(c_k): (p-2)/2 sums with the
/// first even slot pinned to k. Zero when p = 2.
inline Eigen::MatrixXcd dphi_dcbar(const GramTensor& t, const Eigen::VectorXcd& c) {
    const Eigen::Index n = t.axis();
    const int order = t.order();
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
    if (order == 1) return a;
    const double mult = 0.5 * (order - 1);  // (p-2)/2
    std::vector<Eigen::Index> full(order, 0);
    std::vector<Eigen::Index> rest(order - 1, 0);
    do {
        // slot 2 pinned; remaining slots are 1,3,4,...: odd slots carry c,
        // even slots conj(c)
        std::complex<double> w{1.0, 0.0};
        w *= c[rest[0]];  // slot 1
        for (std::size_t pos = 1; pos < rest.size(); ++pos)
            w *= (pos % 2 == 0) ? std::conj(c[rest[pos]]) : c[rest[pos]];
        if (w == std::complex<double>(0.0)) continue;
        for (Eigen::Index k = 0; k < n; ++k) {
            full[0] = rest[0];
            full[1] = k;
            for (std::size_t pos = 1; pos < rest.size(); ++pos) full[pos + 1] = rest[pos];
            for (Eigen::Index j = 0; j < n; ++j) a(j, k) += mult * w * t(j, full);
        }
    } while (next_multi_index(rest, n));
    return a;
}

/// ||s_c||^q = c* phi(c); real and nonnegative up to round-off.
inline double norm_power(const RkbsModel& m, const Eigen::VectorXcd& phi) {
    const std::complex<double> z = m.coefficients.entries.dot(phi);
    const double scale = std::abs(z) + 1e-300;
    if (std::abs(z.imag()) > 1e-10 * scale)
        throw std::runtime_error("rkbs_norm: c* phi(c) has non-negligible imaginary part");
    if (z.real() < -1e-10 * scale)
        throw std::runtime_error("rkbs_norm: c* phi(c) is negative");
    return std::max(0.0, z.real());
}

inline double rkbs_norm(const RkbsModel& m) {
    return std::pow(norm_power(m, phi_map(m)), 1.0 / m.q());
}

/// Closed-form evaluation of s_c at an arbitrary point (multipoint kernels
/// computed on the fly; agrees with phi_map at the centers).
inline std::complex<double> evaluate(const RkbsModel& m, const Eigen::VectorXd& x) {
    const Eigen::VectorXcd& c = m.coefficients.entries;
    const Eigen::Index n = c.size();
    const int order = m.p - 1;
    const SpectralKernel lifted(m.kernel.theta, order * m.kernel.degree, m.kernel.dim);
    const double scale = canonical_scale(m.kernel.dim);
    std::complex<double> acc{0.0, 0.0};
    std::vector<Eigen::Index> k(order, 0);
    do {
        const std::complex<double> w = coefficient_product(c, k);
        if (w == std::complex<double>(0.0)) continue;
        Eigen::VectorXd arg = x;
        for (int pos = 0; pos < order; ++pos)
            arg += ((pos % 2 == 0) ? -1.0 : 1.0) * m.centers.col(k[pos]);
        acc += w * scale * matern_evaluate(lifted, arg);
    } while (next_multi_index(k, n));
    return acc;
}

/// Dual-side view: coefficients b_k = c_k / ||s||^{q-2} of
/// s*(x) = sum b_k Phi(x - x_k). Zero model gives b = 0.
struct DualView {
    Eigen::VectorXcd b;
    SpectralKernel kernel;  // degree n kernel of the space itself

    std::complex<double> operator()(const Eigen::VectorXd& x,
                                    const Eigen::MatrixXd& centers) const {
        std::complex<double> acc{0.0, 0.0};
        for (Eigen::Index k = 0; k < b.size(); ++k)
            acc += b[k] * canonical_evaluate(kernel, (x - centers.col(k)).eval());
        return acc;
    }
};

inline DualView dual_view(const RkbsModel& m) {
    const double nrm = rkbs_norm(m);
    if (nrm == 0.0) return {Eigen::VectorXcd::Zero(m.coefficients.entries.size()), m.kernel};
    return {m.coefficients.entries / std::pow(nrm, m.q() - 2.0), m.kernel};
}

}  // namespace rkbs

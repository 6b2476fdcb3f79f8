#pragma once

// Finite-dimensional two-sided RKBS built from a Hermitian positive
// definite matrix A = V D V*: norms through the eigenbasis, the exact
// dual pairing <f,g> = g* A^{-1} f, and minimal-norm interpolation.

#include <Eigen/Dense>

#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

namespace rkbs {

class FiniteRkbs {
public:
    FiniteRkbs(const Eigen::MatrixXcd& a, double p) : a_(a), p_(p) {
        if (a.rows() != a.cols())
            throw std::invalid_argument("FiniteRkbs: matrix must be square");
        if (!(p > 1.0))
            throw std::invalid_argument("FiniteRkbs: exponent must exceed 1");
        if ((a - a.adjoint()).norm() > 1e-12 * (a.norm() + 1.0))
            throw std::invalid_argument("FiniteRkbs: matrix must be Hermitian");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("FiniteRkbs: eigendecomposition failed");
        v_ = es.eigenvectors();
        d_ = es.eigenvalues();
        if ((d_.array() <= 0.0).any())
            throw std::invalid_argument("FiniteRkbs: matrix must be positive definite");
        const double recon =
            (v_ * d_.asDiagonal() * v_.adjoint() - a).norm() / a.norm();
        if (recon > 1e-10)
            throw std::runtime_error("FiniteRkbs: eigendecomposition reconstruction error");
        if (d_.maxCoeff() / d_.minCoeff() > 1e8)
            throw std::invalid_argument("FiniteRkbs: condition number above 1e8");
        ldlt_.compute(a);
    }

    Eigen::Index size() const { return a_.rows(); }
    double exponent() const { return p_; }
    double conjugate_exponent() const { return p_ / (p_ - 1.0); }
    const Eigen::MatrixXcd& matrix() const { return a_; }
    const Eigen::MatrixXcd& eigvecs() const { return v_; }
    const Eigen::VectorXd& eigvals() const { return d_; }

    /// ||f||_B = ||D^{-1/q} V* f||_q  (primal space carries the exponent q)
    double b_norm(const Eigen::VectorXcd& f) const {
        return weighted_norm(f, conjugate_exponent());
    }

    /// ||g||_B' = ||D^{-1/p} V* g||_p
    double dual_norm(const Eigen::VectorXcd& g) const {
        return weighted_norm(g, p_);
    }

    /// <f, g>_B = g* A^{-1} f, computed through a factorization.
    std::complex<double> dual_pairing(const Eigen::VectorXcd& f,
                                      const Eigen::VectorXcd& g) const {
        check(f);
        check(g);
        Eigen::VectorXcd z = ldlt_.solve(f);
        return g.dot(z);
    }

    /// Max residual of the two-sided reproduction identities over `trials`
    /// random vectors and all indices.
    double reproduction_check(int trials = 100, unsigned seed = 7) const {
        std::mt19937 rng(seed);
        std::normal_distribution<double> nd;
        const Eigen::Index n = size();
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            Eigen::VectorXcd f(n), g(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                f[i] = {nd(rng), nd(rng)};
                g[i] = {nd(rng), nd(rng)};
            }
            for (Eigen::Index k = 0; k < n; ++k) {
                // right: <f, K(.,k)> = <f, A e_k> = f_k
                const std::complex<double> right = dual_pairing(f, a_.col(k));
                worst = std::max(worst, std::abs(right - f[k]));
                // left: <conj(K(k,.)), g> = conj(g_k); conj of row k is A e_k
                const std::complex<double> left = dual_pairing(a_.col(k), g);
                worst = std::max(worst, std::abs(left - std::conj(g[k])));
            }
        }
        return worst;
    }

    /// Minimizer of b_norm subject to s_j = y_j for j in J. The dual element
    /// is parameterized in span{A e_j : j in J} and the resulting
    /// |J|-dimensional nonlinear system is solved by damped Newton.
    Eigen::VectorXcd min_norm_interpolate(const std::vector<Eigen::Index>& j_set,
                                          const Eigen::VectorXcd& y) const {
        const Eigen::Index m = static_cast<Eigen::Index>(j_set.size());
        if (m == 0 || y.size() != m)
            throw std::invalid_argument("min_norm_interpolate: bad index/value sizes");
        for (std::size_t a = 0; a < j_set.size(); ++a)
            for (std::size_t b = a + 1; b < j_set.size(); ++b)
                if (j_set[a] == j_set[b])
                    throw std::invalid_argument("min_norm_interpolate: duplicate indices");
        if (y.norm() == 0.0) return Eigen::VectorXcd::Zero(size());

        const double q = conjugate_exponent();
        // In coordinates u = D^{-1/q} V* f the space is plain l_q and
        // f_j = (M u)_j with M the selected rows of V D^{1/q}.
        Eigen::MatrixXcd vdq = v_ * d_.array().pow(1.0 / q).matrix().asDiagonal();
        Eigen::MatrixXcd mrows(m, size());
        for (Eigen::Index r = 0; r < m; ++r) mrows.row(r) = vdq.row(j_set[r]);

        // Stationarity of min (1/q)||u||_q^q s.t. Mu = y gives
        // u = J_p(M* lam) with J_p(z) = z |z|^{p-2}; solve M J_p(M* lam) = y.
        const auto jmap = [this](const Eigen::VectorXcd& z) {
            Eigen::VectorXcd u(z.size());
            for (Eigen::Index i = 0; i < z.size(); ++i) {
                const double a = std::abs(z[i]);
                u[i] = (a == 0.0) ? std::complex<double>(0.0)
                                  : z[i] * std::pow(a, p_ - 2.0);
            }
            return u;
        };
        const auto residual = [&](const Eigen::VectorXcd& lam) {
            return (mrows * jmap(mrows.adjoint() * lam) - y).eval();
        };

        // p = 2 start: M M* lam = y.
        Eigen::VectorXcd lam =
            (mrows * mrows.adjoint()).ldlt().solve(y);

        Eigen::VectorXcd res = residual(lam);
        for (int iter = 0; iter < 400 && res.norm() > 1e-13 * (1.0 + y.norm()); ++iter) {
            // finite-difference Jacobian in real coordinates
            const Eigen::Index nr = 2 * m;
            Eigen::MatrixXd jac(nr, nr);
            Eigen::VectorXd res_r = realify(res);
            const double h = 1e-7 * (1.0 + lam.norm());
            for (Eigen::Index k = 0; k < nr; ++k) {
                Eigen::VectorXcd lp = lam, lm = lam;
                perturb(lp, k, h);
                perturb(lm, k, -h);
                jac.col(k) = (realify(residual(lp)) - realify(residual(lm))) / (2.0 * h);
            }
            Eigen::VectorXd step =
                jac.colPivHouseholderQr().solve(-res_r);
            double alpha = 1.0;
            const double base = res.norm();
            for (int bt = 0; bt < 60; ++bt) {
                Eigen::VectorXcd trial = lam;
                for (Eigen::Index k = 0; k < m; ++k)
                    trial[k] += alpha * std::complex<double>(step[2 * k], step[2 * k + 1]);
                Eigen::VectorXcd tres = residual(trial);
                if (tres.norm() < base * (1.0 - 1e-4 * alpha)) {
                    lam = trial;
                    res = tres;
                    break;
                }
                alpha *= 0.5;
                if (bt == 59)
                    throw std::runtime_error("min_norm_interpolate: line search stalled");
            }
        }
        if (res.norm() > 1e-9 * (1.0 + y.norm()))
            throw std::runtime_error("min_norm_interpolate: Newton did not converge");
        return vdq * jmap(mrows.adjoint() * lam);
    }

private:
    void check(const Eigen::VectorXcd& f) const {
        if (f.size() != a_.rows())
            throw std::invalid_argument("FiniteRkbs: vector size mismatch");
    }

    double weighted_norm(const Eigen::VectorXcd& x, double r) const {
        check(x);
        Eigen::VectorXcd w =
            d_.array().pow(-1.0 / r).matrix().asDiagonal() * (v_.adjoint() * x);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < w.size(); ++i)
            acc += std::pow(std::abs(w[i]), r);
        return std::pow(acc, 1.0 / r);
    }

    static Eigen::VectorXd realify(const Eigen::VectorXcd& z) {
        Eigen::VectorXd r(2 * z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            r[2 * i] = z[i].real();
            r[2 * i + 1] = z[i].imag();
        }
        return r;
    }

    static void perturb(Eigen::VectorXcd& z, Eigen::Index real_coord, double h) {
        if (real_coord % 2 == 0)
            z[real_coord / 2] += h;
        else
            z[real_coord / 2] += std::complex<double>(0.0, h);
    }

    Eigen::MatrixXcd a_;
    Eigen::MatrixXcd v_;
    Eigen::VectorXd d_;
    Eigen::LDLT<Eigen::MatrixXcd> ldlt_;
    double p_;
};

}  // namespace rkbs

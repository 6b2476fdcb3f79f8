#pragma once

// Losses, regularizers, the empirical-risk objective T(c), its Wirtinger
// gradient and the damped fixed-point iteration, plus the exact p = 2
// kernel-ridge path.
//
// Gradient convention used module-wide: for real-valued T of complex c,
//   grad_k = dT/d Re(c_k) + i dT/d Im(c_k) = 2 dT/d conj(c_k),
// so that c <- c - eta * grad is plain steepest descent and real inputs
// reduce to the ordinary real gradient. The fixed-point map
// F(c) = c - grad T(c) has the stationary points of T as its fixed points.

#include "rkbs/function_space.hpp"
#include "rkbs/kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

namespace rkbs {

enum class LossKind { squared, logistic, squared_hinge };

struct LossSpec {
    LossKind kind = LossKind::squared;
};

inline void check_classification_label(std::complex<double> y) {
    if (y.imag() != 0.0 || (y.real() != 1.0 && y.real() != -1.0))
        throw std::invalid_argument("loss: classification labels must be +1 or -1");
}

/// Value and Wirtinger derivative dL/dt at prediction t with label y.
inline std::pair<double, std::complex<double>> loss_value_and_derivative(
    const LossSpec& spec, std::complex<double> y, std::complex<double> t) {
    switch (spec.kind) {
        case LossKind::squared: {
            const std::complex<double> r = t - y;
            return {std::norm(r), std::conj(r)};
        }
        case LossKind::logistic: {
            check_classification_label(y);
            const double u = y.real() * t.real();
            // log(1 + e^{-u}) evaluated stably
            const double value = (u > 0) ? std::log1p(std::exp(-u))
                                         : -u + std::log1p(std::exp(u));
            const double sig = 1.0 / (1.0 + std::exp(u));  // sigma(-u)
            return {value, std::complex<double>(-0.5 * y.real() * sig, 0.0)};
        }
        case LossKind::squared_hinge: {
            check_classification_label(y);
            const double margin = 1.0 - y.real() * t.real();
            const double m = std::max(0.0, margin);
            return {m * m, std::complex<double>(-y.real() * m, 0.0)};
        }
    }
    throw std::logic_error("loss_value_and_derivative: unknown kind");
}

enum class RegularizerKind { lambda_t_squared, lambda_t_power };

struct RegularizerSpec {
    RegularizerKind kind = RegularizerKind::lambda_t_squared;
    double lambda = 1.0;
    double power = 2.0;  // only for lambda_t_power

    void validate() const {
        if (!(lambda > 0.0))
            throw std::invalid_argument("RegularizerSpec: lambda must be positive");
        if (kind == RegularizerKind::lambda_t_power && !(power > 1.0))
            throw std::invalid_argument("RegularizerSpec: power must exceed 1");
    }

    double value(double t) const {
        return (kind == RegularizerKind::lambda_t_squared) ? lambda * t * t
                                                           : lambda * std::pow(t, power);
    }
    double derivative(double t) const {
        return (kind == RegularizerKind::lambda_t_squared)
                   ? 2.0 * lambda * t
                   : lambda * power * std::pow(t, power - 1.0);
    }
};

struct SolverConfig {
    double step = 1.0;
    int max_iters = 5000;
    double grad_tol = 1e-8;
    double backtracking = 0.5;  // in (0,1)
    double min_step = 1e-14;

    void validate() const {
        if (!(step > 0.0) || !(grad_tol > 0.0) || !(min_step > 0.0) || max_iters < 1 ||
            !(backtracking > 0.0 && backtracking < 1.0))
            throw std::invalid_argument("SolverConfig: invalid parameters");
    }
};

/// Everything the objective needs: data, kernel, exponent, loss,
/// regularizer and the cached Gram tensor.
struct Problem {
    TrainingSet data;
    SpectralKernel kernel;
    int p;
    LossSpec loss;
    RegularizerSpec reg;
    std::shared_ptr<const GramTensor> gram;

    Problem(TrainingSet d, const SpectralKernel& k, int p_, LossSpec l, RegularizerSpec r)
        : data(std::move(d)), kernel(k), p(p_), loss(l), reg(r) {
        check_even_p(p);
        reg.validate();
        if (!integrability_condition(kernel, p))
            throw std::invalid_argument("Problem: nq/p > d/2 violated");
        gram = std::make_shared<GramTensor>(build_gram(kernel, data.points, p));
    }

    double q() const { return static_cast<double>(p) / (p - 1.0); }
};

/// T(c) = sum_j L(x_j, y_j, phi_j(c)) + R((c* phi(c))^{1/q})
inline double objective(const Problem& pr, const Eigen::VectorXcd& c) {
    const Eigen::VectorXcd phi = phi_from_gram(*pr.gram, c);
    double acc = 0.0;
    for (Eigen::Index j = 0; j < c.size(); ++j)
        acc += loss_value_and_derivative(pr.loss, pr.data.values[j], phi[j]).first;
    const double rho = std::max(0.0, c.dot(phi).real());  // ||s_c||^q
    return acc + pr.reg.value(std::pow(rho, 1.0 / pr.q()));
}

/// Wirtinger gradient of T under the module convention (see header note).
inline Eigen::VectorXcd gradient(const Problem& pr, const Eigen::VectorXcd& c) {
    const GramTensor& t = *pr.gram;
    const Eigen::Index n = c.size();
    const Eigen::VectorXcd phi = phi_from_gram(t, c);
    const Eigen::MatrixXcd b = dphi_dc(t, c);     // d phi_j / d c_k
    const Eigen::MatrixXcd a = dphi_dcbar(t, c);  // d phi_j / d conj(c_k)

    // loss part: dT/dcbar_k = sum_j [ L'_j A_jk + conj(L'_j B_jk) ]
    Eigen::VectorXcd lphi(n);
    for (Eigen::Index j = 0; j < n; ++j)
        lphi[j] = loss_value_and_derivative(pr.loss, pr.data.values[j], phi[j]).second;
    Eigen::VectorXcd g = a.transpose() * lphi + (b.transpose() * lphi).conjugate();

    // regularizer part: R'(rho^{1/q}) (1/q) rho^{1/q - 1} d rho / d cbar_k,
    // with d rho / d cbar_k = phi_k + sum_j conj(c_j) A_jk; zero at c = 0.
    const double rho = std::max(0.0, c.dot(phi).real());
    if (rho > 0.0) {
        const double q = pr.q();
        const double rder = pr.reg.derivative(std::pow(rho, 1.0 / q));
        const Eigen::VectorXcd drho = phi + a.transpose() * c.conjugate();
        g += (rder / q * std::pow(rho, 1.0 / q - 1.0)) * drho;
    }
    return 2.0 * g;
}

struct SolveDiagnostics {
    int iterations = 0;
    double gradient_norm = 0.0;
    std::vector<double> objective_trace;
    bool converged = false;
    bool used_complex_retry = false;
};

struct SolveResult {
    Eigen::VectorXcd c;
    SolveDiagnostics diagnostics;
};

/// Thrown when the iteration stalls or exhausts its budget before reaching
/// grad_tol; `best` carries the best iterate found and its diagnostics.
struct NonConvergenceError : std::runtime_error {
    SolveResult best;
    explicit NonConvergenceError(SolveResult r)
        : std::runtime_error("fixed_point_solve: gradient norm " +
                             std::to_string(r.diagnostics.gradient_norm) +
                             " above tolerance after " +
                             std::to_string(r.diagnostics.iterations) + " iterations"),
          best(std::move(r)) {}
};

/// Classical kernel ridge: p = 2, squared loss, R(t) = lambda t^2.
/// Stationarity of ||Gc - y||^2 + lambda c*Gc gives (G + lambda I) c = y.
inline Eigen::VectorXcd solve_p2_closed_form(const TrainingSet& data,
                                             const SpectralKernel& kernel,
                                             double lambda) {
    GramTensor t = build_gram(kernel, data.points, 2);
    Eigen::MatrixXd g = t.as_matrix();
    Eigen::MatrixXd sys = g + lambda * Eigen::MatrixXd::Identity(g.rows(), g.cols());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys);
    const double emin = es.eigenvalues().minCoeff();
    const double emax = es.eigenvalues().maxCoeff();
    if (emin <= 0.0 || emax / emin > 1e14)
        throw std::runtime_error(
            "solve_p2_closed_form: system numerically singular, condition estimate " +
            std::to_string(emax / std::max(emin, 1e-300)));
    return sys.ldlt().solve(data.values.eval());
}

namespace detail {

inline Eigen::VectorXcd project_real(const Eigen::VectorXcd& v) {
    return v.real().cast<std::complex<double>>();
}

/// Terminal phase used once Armijo steps stop resolving in the objective
/// (the remaining decrease is below floating-point rounding): undamped
/// Barzilai-Borwein steps chase the gradient norm directly. The iteration is
/// intentionally nonmonotone in the gradient; any step that would move the
/// objective above its entry value by more than a few ulps is rejected and
/// retried shorter. The best-gradient iterate seen wins.
inline void polish(const Problem& pr, Eigen::VectorXcd& c, double obj,
                   const SolverConfig& cfg, bool real_mode, SolveResult& out) {
    const double slack = 64.0 * 1e-16 * (std::abs(obj) + 1.0);
    Eigen::VectorXcd g = gradient(pr, c);
    if (real_mode) g = project_real(g);
    Eigen::VectorXcd best_c = c;
    double best_gn = g.norm();
    double eta = cfg.step;
    Eigen::VectorXcd prev_c, prev_g;
    bool have_prev = false;
    for (int iter = out.diagnostics.iterations;
         iter < cfg.max_iters && best_gn > cfg.grad_tol; ++iter) {
        out.diagnostics.iterations = iter;
        if (have_prev) {
            const Eigen::VectorXcd dc = c - prev_c;
            const Eigen::VectorXcd dg = g - prev_g;
            const double denom = dg.squaredNorm();
            const double num = dg.dot(dc).real();
            if (denom > 0.0 && num > 0.0) eta = num / denom;
        }
        prev_c = c;
        prev_g = g;
        have_prev = true;
        bool moved = false;
        for (int bt = 0; bt < 50 && eta >= cfg.min_step; ++bt) {
            Eigen::VectorXcd trial = c - eta * g;
            if (real_mode) trial = project_real(trial);
            if (objective(pr, trial) <= obj + slack) {
                c = std::move(trial);
                moved = true;
                break;
            }
            eta *= cfg.backtracking;
        }
        if (!moved) break;
        g = gradient(pr, c);
        if (real_mode) g = project_real(g);
        if (g.norm() < best_gn) {
            best_gn = g.norm();
            best_c = c;
        }
    }
    c = best_c;
    out.diagnostics.gradient_norm = best_gn;
    out.diagnostics.converged = best_gn <= cfg.grad_tol;
}

inline SolveResult descend(const Problem& pr, Eigen::VectorXcd c,
                           const SolverConfig& cfg, bool real_mode) {
    if (real_mode) c = project_real(c);
    SolveResult out;
    double obj = objective(pr, c);
    out.diagnostics.objective_trace.push_back(obj);
    double eta = cfg.step;
    Eigen::VectorXcd prev_c, prev_g;
    bool have_prev = false;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        Eigen::VectorXcd g = gradient(pr, c);
        if (real_mode) g = project_real(g);
        const double gn = g.norm();
        out.diagnostics.gradient_norm = gn;
        out.diagnostics.iterations = iter;
        if (gn <= cfg.grad_tol) {
            out.diagnostics.converged = true;
            break;
        }
        // Barzilai-Borwein trial step (spectral estimate of the local
        // curvature); backtracking below keeps the trace monotone.
        if (have_prev) {
            const Eigen::VectorXcd dc = c - prev_c;
            const Eigen::VectorXcd dg = g - prev_g;
            const double denom = dg.squaredNorm();
            const double num = dg.dot(dc).real();
            if (denom > 0.0 && num > 0.0)
                eta = std::clamp(num / denom, cfg.min_step, 1e8 * cfg.step);
        }
        prev_c = c;
        prev_g = g;
        have_prev = true;
        // once the best-case Armijo decrease is below the rounding
        // granularity of the objective, hand over to the terminal phase
        if (1e-4 * eta * gn * gn < 8.0 * 1e-16 * (std::abs(obj) + 1.0)) break;
        bool accepted = false;
        while (eta >= cfg.min_step) {
            Eigen::VectorXcd trial = c - eta * g;
            if (real_mode) trial = project_real(trial);
            const double tobj = objective(pr, trial);
            const double wanted = 1e-4 * eta * gn * gn;
            if (tobj <= obj - wanted) {
                c = trial;
                obj = tobj;
                out.diagnostics.objective_trace.push_back(obj);
                accepted = true;
                break;
            }
            eta *= cfg.backtracking;
        }
        if (!accepted) break;  // objective flat to rounding (or genuinely stuck)
    }
    if (!out.diagnostics.converged) polish(pr, c, obj, cfg, real_mode, out);
    out.c = std::move(c);
    return out;
}

}  // namespace detail

/// Initial iterate: the p = 2 ridge solution scaled to unit B^p_Phi norm,
/// falling back to a small seeded perturbation when ridge is unusable.
inline Eigen::VectorXcd initial_coefficients(const Problem& pr, unsigned seed = 12345) {
    Eigen::VectorXcd c0;
    try {
        c0 = solve_p2_closed_form(pr.data, pr.kernel, pr.reg.lambda);
    } catch (const std::runtime_error&) {
        c0.resize(pr.data.size());
        std::mt19937 rng(seed);
        std::normal_distribution<double> nd(0.0, 1e-2);
        for (Eigen::Index i = 0; i < c0.size(); ++i) c0[i] = {nd(rng), nd(rng)};
        return c0;
    }
    if (pr.p == 2) return c0;
    const Eigen::VectorXcd phi = phi_from_gram(*pr.gram, c0);
    const double rho = std::max(0.0, c0.dot(phi).real());
    if (rho > 1e-300) c0 *= std::pow(rho, -1.0 / pr.p);  // unit rkbs norm
    return c0;
}

/// Damped relaxation c <- c - eta grad T with backtracking; any fixed point
/// coincides with a fixed point of F(c) = c + grad T(c). In real mode a
/// stalled run is retried in full complex arithmetic.
inline SolveResult fixed_point_solve(const Problem& pr, const SolverConfig& cfg,
                                     bool real_mode = false,
                                     const Eigen::VectorXcd* init = nullptr) {
    cfg.validate();
    Eigen::VectorXcd c0 = init ? *init : initial_coefficients(pr);
    SolveResult res = detail::descend(pr, c0, cfg, real_mode);
    if (!res.diagnostics.converged && real_mode) {
        SolveResult retry = detail::descend(pr, res.c, cfg, false);
        retry.diagnostics.used_complex_retry = true;
        if (retry.diagnostics.converged ||
            retry.diagnostics.objective_trace.back() <
                res.diagnostics.objective_trace.back())
            res = std::move(retry);
    }
    if (!res.diagnostics.converged) throw NonConvergenceError(std::move(res));
    return res;
}

/// Predictions at query points; classify via the sign of the real part.
inline Eigen::VectorXcd predict(const RkbsModel& model, const Eigen::MatrixXd& xs) {
    Eigen::VectorXcd out(xs.cols());
    for (Eigen::Index i = 0; i < xs.cols(); ++i) out[i] = evaluate(model, xs.col(i));
    return out;
}

}  // namespace rkbs

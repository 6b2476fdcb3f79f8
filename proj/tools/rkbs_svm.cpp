// Command-line surface: train / predict / verify / bench.
//
// Exit codes: 0 success, 2 input error, 3 nonconvergence (the model is
// still written, flagged converged=false).

#include "rkbs/oracle.hpp"
#include "rkbs/serialization.hpp"
#include "rkbs/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNonconvergence = 3;

struct RunConfig {
    int p = 2;
    double theta = 1.0;
    double n = 2.0;
    rkbs::LossSpec loss;
    double lambda = 1.0;
    rkbs::SolverConfig solver;
    long seed = 0;
    bool real_mode = false;
    // bench section
    int bench_train_size = 0;
    int bench_test_size = 0;
    // verify section (grid; defaults documented in README)
    double verify_half_width = 40.0;
    int verify_nodes = 1 << 14;
};

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::runtime_error("config: unknown field '" + it.key() + "' in " + where);
}

rkbs::LossKind parse_loss(const std::string& s) {
    if (s == "squared") return rkbs::LossKind::squared;
    if (s == "logistic") return rkbs::LossKind::logistic;
    if (s == "squared_hinge") return rkbs::LossKind::squared_hinge;
    throw std::runtime_error("config: unknown loss '" + s + "'");
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("config: malformed JSON: " + std::string(e.what()));
    }
    reject_unknown(j, {"p", "theta", "n", "loss", "lambda", "solver", "seed", "real_mode",
                       "bench", "verify"},
                   "top level");
    RunConfig cfg;
    cfg.p = j.at("p").get<int>();
    cfg.theta = j.at("theta").get<double>();
    cfg.n = j.at("n").get<double>();
    cfg.loss.kind = parse_loss(j.at("loss").get<std::string>());
    cfg.lambda = j.at("lambda").get<double>();
    cfg.seed = j.at("seed").get<long>();
    cfg.real_mode = j.at("real_mode").get<bool>();
    if (j.contains("solver")) {
        const nlohmann::json& s = j["solver"];
        reject_unknown(s, {"step", "max_iters", "grad_tol", "backtracking", "min_step"},
                       "solver");
        if (s.contains("step")) cfg.solver.step = s["step"].get<double>();
        if (s.contains("max_iters")) cfg.solver.max_iters = s["max_iters"].get<int>();
        if (s.contains("grad_tol")) cfg.solver.grad_tol = s["grad_tol"].get<double>();
        if (s.contains("backtracking"))
            cfg.solver.backtracking = s["backtracking"].get<double>();
        if (s.contains("min_step")) cfg.solver.min_step = s["min_step"].get<double>();
    }
    if (j.contains("bench")) {
        const nlohmann::json& b = j["bench"];
        reject_unknown(b, {"train_size", "test_size"}, "bench");
        cfg.bench_train_size = b.at("train_size").get<int>();
        cfg.bench_test_size = b.at("test_size").get<int>();
    }
    if (j.contains("verify")) {
        const nlohmann::json& v = j["verify"];
        reject_unknown(v, {"half_width", "nodes"}, "verify");
        if (v.contains("half_width")) cfg.verify_half_width = v["half_width"].get<double>();
        if (v.contains("nodes")) cfg.verify_nodes = v["nodes"].get<int>();
    }
    // re-validate everything a module would
    rkbs::check_even_p(cfg.p);
    cfg.solver.validate();
    rkbs::SpectralKernel probe(cfg.theta, cfg.n, 1);  // theta/n sanity
    (void)probe;
    if (!(cfg.lambda > 0.0)) throw std::runtime_error("config: lambda must be positive");
    return cfg;
}

rkbs::Problem make_problem(const RunConfig& cfg, const rkbs::Dataset& ds) {
    rkbs::SpectralKernel kernel(cfg.theta, cfg.n, static_cast<int>(ds.points.rows()));
    rkbs::RegularizerSpec reg;
    reg.lambda = cfg.lambda;
    return rkbs::Problem(rkbs::TrainingSet::from_real(ds.points, ds.labels), kernel,
                         cfg.p, cfg.loss, reg);
}

struct TrainedModel {
    rkbs::RkbsModel model;
    rkbs::SolveDiagnostics diagnostics;
    double objective_value;
    bool converged;
};

TrainedModel run_training(const RunConfig& cfg, const rkbs::Dataset& ds, long seed) {
    rkbs::Problem pr = make_problem(cfg, ds);
    rkbs::SolveResult res;
    bool converged = true;
    const Eigen::VectorXcd init = rkbs::initial_coefficients(pr, static_cast<unsigned>(seed));
    try {
        res = rkbs::fixed_point_solve(pr, cfg.solver, cfg.real_mode, &init);
    } catch (const rkbs::NonConvergenceError& e) {
        res = e.best;
        converged = false;
    }
    Eigen::VectorXcd c = res.c;
    const bool store_real = cfg.real_mode && !res.diagnostics.used_complex_retry;
    if (store_real) c = c.real().cast<std::complex<double>>();
    rkbs::RkbsModel model(cfg.p, pr.kernel, pr.data.points,
                          rkbs::CoefficientVector(c, store_real), pr.gram);
    return {std::move(model), res.diagnostics, rkbs::objective(pr, res.c), converged};
}

int cmd_train(const std::string& config_path, const std::string& data_path,
              const std::string& out_path, std::optional<long> seed_override) {
    const RunConfig cfg = load_config(config_path);
    const rkbs::Dataset ds = rkbs::load_csv(data_path);
    const long seed = seed_override.value_or(cfg.seed);
    TrainedModel tm = run_training(cfg, ds, seed);
    rkbs::save_model(tm.model, out_path, tm.converged);
    std::cout << "objective " << tm.objective_value << "\n"
              << "gradient_norm " << tm.diagnostics.gradient_norm << "\n"
              << "iterations " << tm.diagnostics.iterations << "\n"
              << "rkbs_norm " << rkbs::rkbs_norm(tm.model) << "\n"
              << "converged " << (tm.converged ? "true" : "false") << "\n";
    return tm.converged ? kExitOk : kExitNonconvergence;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path) {
    const rkbs::ModelDocument doc = rkbs::load_model(model_path);
    // accept feature-only CSVs as well as labelled ones (label column ignored)
    const Eigen::MatrixXd cols = rkbs::load_csv_columns(data_path);
    const int d = doc.model.kernel.dim;
    Eigen::MatrixXd xs;
    if (static_cast<int>(cols.rows()) == d)
        xs = cols;
    else if (static_cast<int>(cols.rows()) == d + 1)
        xs = cols.topRows(d);
    else
        throw std::runtime_error("predict: feature dimension mismatch");
    const Eigen::VectorXcd values = rkbs::predict(doc.model, xs);
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i].real()) || !std::isfinite(values[i].imag()))
            throw std::runtime_error("predict: non-finite prediction");
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("predict: cannot open " + out_path);
    out.precision(17);
    out << "prediction_re,prediction_im,sign\n";
    for (Eigen::Index i = 0; i < values.size(); ++i)
        out << values[i].real() << "," << values[i].imag() << ","
            << (values[i].real() >= 0.0 ? 1 : -1) << "\n";
    return kExitOk;
}

int cmd_verify(const std::string& config_path) {
    const RunConfig cfg = load_config(config_path);
    const int p = (cfg.p >= 2 && cfg.p % 2 == 0) ? cfg.p : 4;
    const rkbs::SpectralKernel kernel(cfg.theta, cfg.n, 1);
    const rkbs::QuadratureGrid grid(cfg.verify_half_width * cfg.theta, cfg.verify_nodes);
    int warnings = 0;
    bool failed = false;
    const auto report = [&](const std::string& name, bool ok, double value,
                            bool conclusive = true) {
        if (!conclusive) {
            std::cout << "[warn] " << name << " inconclusive (value " << value
                      << "); refine the grid\n";
            ++warnings;
            return;
        }
        std::cout << (ok ? "[ok]   " : "[FAIL] ") << name << " (" << value << ")\n";
        if (!ok) failed = true;
    };

    // normalization audit
    const rkbs::PairCheckResult pc = rkbs::canonical_pair_check(kernel, grid);
    report("spectral/closed-form normalization", pc.discrepancy <= 1e-6, pc.discrepancy,
           pc.conclusive);

    // small fixed model for the quadrature agreement checks
    Eigen::MatrixXd centers(1, 3);
    centers << -0.6, 0.2, 0.9;
    std::mt19937 rng(static_cast<unsigned>(cfg.seed) + 1);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    Eigen::VectorXcd c(3);
    for (int i = 0; i < 3; ++i) c[i] = ud(rng);
    rkbs::RkbsModel model(p, kernel, centers, rkbs::CoefficientVector(c, false));

    double worst_eval = 0.0, worst_delta = 0.0;
    for (double x : {-1.3, -0.25, 0.4, 1.1, 2.0}) {
        const auto quantity = [&](const rkbs::QuadratureGrid& g) {
            return rkbs::quad_evaluate(g, kernel, p, centers, c, x);
        };
        const std::complex<double> quad = quantity(grid);
        worst_eval = std::max(
            worst_eval,
            std::abs(quad - rkbs::evaluate(model, Eigen::VectorXd::Constant(1, x))));
        worst_delta = std::max(worst_delta, rkbs::refinement_delta(quantity, grid));
    }
    report("closed-form vs spectral integral", worst_eval <= 1e-4, worst_eval,
           worst_delta < 0.5e-4);

    double worst_rep = 0.0;
    for (double y : {-0.9, 0.1, 1.4})
        worst_rep = std::max(worst_rep, rkbs::quad_reproduction(grid, kernel, p, model, y));
    report("reproduction pairing", worst_rep <= 1e-4, worst_rep);

    // gradient vs central finite differences
    rkbs::RegularizerSpec reg;
    reg.lambda = cfg.lambda;
    rkbs::Problem pr(rkbs::TrainingSet(centers, Eigen::VectorXcd::Ones(3)), kernel, p,
                     cfg.loss, reg);
    Eigen::VectorXcd cg(3);
    for (int i = 0; i < 3; ++i) cg[i] = {ud(rng), ud(rng)};
    const Eigen::VectorXcd analytic = rkbs::gradient(pr, cg);
    const Eigen::VectorXcd fd = rkbs::finite_difference_gradient(
        [&](const Eigen::VectorXcd& z) { return rkbs::objective(pr, z); }, cg, 1e-5);
    const double grad_err = (analytic - fd).norm() / (fd.norm() + 1e-12);
    report("analytic vs finite-difference gradient", grad_err <= 1e-5, grad_err);

    // representer check: an extra non-data center must not help
    if (p == 4) {
        Eigen::MatrixXd pts(1, 2);
        pts << -0.4, 0.5;
        Eigen::VectorXcd ys(2);
        ys << 1.0, -1.0;
        rkbs::Problem base(rkbs::TrainingSet(pts, ys), kernel, p,
                           rkbs::LossSpec{rkbs::LossKind::squared}, reg);
        rkbs::SolverConfig scfg;
        scfg.grad_tol = 1e-9;
        scfg.max_iters = 20000;
        try {
            const rkbs::SolveResult sol = rkbs::fixed_point_solve(base, scfg, true);
            Eigen::MatrixXd aug_centers(1, 3);
            aug_centers << -0.4, 0.5, 1.3;
            rkbs::GramTensor aug_gram = rkbs::build_gram(kernel, aug_centers, p);
            // same loss on the first two points, third center carries no datum
            const auto aug_obj = [&](const Eigen::VectorXcd& z) {
                const Eigen::VectorXcd phi = rkbs::phi_from_gram(aug_gram, z);
                double acc = 0.0;
                for (int jj = 0; jj < 2; ++jj)
                    acc += rkbs::loss_value_and_derivative(base.loss, ys[jj], phi[jj]).first;
                const double rho = std::max(0.0, z.dot(phi).real());
                return acc + reg.value(std::pow(rho, 0.75));
            };
            Eigen::VectorXd center(3);
            center << sol.c[0].real(), sol.c[1].real(), 0.0;
            const Eigen::VectorXd lo = center.array() - 1.5;
            const Eigen::VectorXd hi = center.array() + 1.5;
            const rkbs::BruteForceResult bf = rkbs::brute_force_minimize(
                [&](const Eigen::VectorXd& v) {
                    return aug_obj(v.cast<std::complex<double>>());
                },
                lo, hi, 500000);
            const double improvement =
                sol.diagnostics.objective_trace.back() - bf.value;
            report("representer property (extra center useless)", improvement < 1e-6,
                   improvement);
        } catch (const rkbs::NonConvergenceError&) {
            std::cout << "[warn] representer check skipped: base solve stalled\n";
            ++warnings;
        }
    }

    if (warnings > 0)
        std::cout << warnings << " inconclusive check(s); rerun with a finer verify grid\n";
    return failed ? kExitNonconvergence : kExitOk;
}

/// Two well-separated Gaussian blobs in the plane with labels -1 / +1.
rkbs::Dataset two_gaussians(int count, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd(0.0, 0.45);
    rkbs::Dataset ds;
    ds.points.resize(2, count);
    ds.labels.resize(count);
    for (int i = 0; i < count; ++i) {
        const int label = (i % 2 == 0) ? 1 : -1;
        const double cx = (label == 1) ? 1.0 : -1.0;
        ds.points(0, i) = cx + nd(rng);
        ds.points(1, i) = cx + nd(rng);
        ds.labels[i] = label;
    }
    return ds;
}

double accuracy(const rkbs::RkbsModel& model, const rkbs::Dataset& ds) {
    const Eigen::VectorXcd preds = rkbs::predict(model, ds.points);
    int hits = 0;
    for (Eigen::Index i = 0; i < preds.size(); ++i)
        if ((preds[i].real() >= 0.0 ? 1.0 : -1.0) == ds.labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(preds.size());
}

int cmd_bench(const std::string& config_path, const std::string& out_path,
              std::optional<long> seed_override) {
    RunConfig cfg = load_config(config_path);
    if (cfg.bench_train_size <= 0 || cfg.bench_test_size <= 0)
        throw std::runtime_error("bench: train_size and test_size must be positive");
    if (!(cfg.n > 3.0))  // n > 3d/2 with d = 2, needed by the p = 4 space
        throw std::runtime_error("bench: requires degree n > 3d/2 (here n > 3 for d = 2)");
    if (cfg.loss.kind == rkbs::LossKind::squared)
        throw std::runtime_error("bench: use a classification loss (logistic/squared_hinge)");
    const long seed = seed_override.value_or(cfg.seed);
    const rkbs::Dataset train = two_gaussians(cfg.bench_train_size,
                                              static_cast<unsigned>(seed));
    const rkbs::Dataset test = two_gaussians(cfg.bench_test_size,
                                             static_cast<unsigned>(seed) + 1);

    nlohmann::json report;
    report["seed"] = seed;
    report["train_size"] = cfg.bench_train_size;
    report["test_size"] = cfg.bench_test_size;
    for (int p : {2, 4}) {
        RunConfig run = cfg;
        run.p = p;
        const auto t0 = std::chrono::steady_clock::now();
        TrainedModel tm = run_training(run, train, seed);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        nlohmann::json entry;
        entry["train_accuracy"] = accuracy(tm.model, train);
        entry["test_accuracy"] = accuracy(tm.model, test);
        entry["objective"] = tm.objective_value;
        entry["runtime_seconds"] = secs;
        entry["converged"] = tm.converged;
        report["p" + std::to_string(p)] = entry;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("bench: cannot open " + out_path);
    out << report.dump(2) << "\n";
    std::cout << "p2 test accuracy " << report["p2"]["test_accuracy"].get<double>() << "\n"
              << "p4 test accuracy " << report["p4"]["test_accuracy"].get<double>() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SVM training and verification in B^p kernel Banach spaces"};
    app.require_subcommand(1);

    std::string config_path, data_path, model_path, out_path;
    long seed_override_value = 0;
    bool has_seed_override = false;
    app.add_flag_callback("--version", [] {
        std::cout << "rkbs_svm 1.0\n";
        std::exit(0);
    });

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed-override", seed_override_value, "override the config seed")
            ->each([&](const std::string&) { has_seed_override = true; });
    };

    CLI::App* train = app.add_subcommand("train", "fit a model");
    train->add_option("--config", config_path)->required();
    train->add_option("--data", data_path)->required();
    train->add_option("--out", out_path)->required();
    add_seed(train);

    CLI::App* predict = app.add_subcommand("predict", "evaluate a model on points");
    predict->add_option("--model", model_path)->required();
    predict->add_option("--data", data_path)->required();
    predict->add_option("--out", out_path)->required();

    CLI::App* verify = app.add_subcommand("verify", "run the independent-check suite");
    verify->add_option("--config", config_path)->required();

    CLI::App* bench = app.add_subcommand("bench", "p=2 vs p=4 benchmark report");
    bench->add_option("--config", config_path)->required();
    bench->add_option("--out", out_path)->required();
    add_seed(bench);

    CLI11_PARSE(app, argc, argv);

    const std::optional<long> seed_override =
        has_seed_override ? std::optional<long>(seed_override_value) : std::nullopt;

    try {
        if (train->parsed()) return cmd_train(config_path, data_path, out_path, seed_override);
        if (predict->parsed()) return cmd_predict(model_path, data_path, out_path);
        if (verify->parsed()) return cmd_verify(config_path);
        if (bench->parsed()) return cmd_bench(config_path, out_path, seed_override);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}

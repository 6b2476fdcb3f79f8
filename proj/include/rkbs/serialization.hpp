#pragma once

// Model document I/O (JSON) and CSV dataset ingestion.
//
// Model document fields:
//   {p, theta, n, d, centers, coefficients_re, coefficients_im, real_mode, norm}
// centers is a row-major list of d-vectors. Doubles are serialized with
// shortest round-trip precision, so save/load reproduces values to the bit
// and identical models produce byte-identical documents.

#include "rkbs/function_space.hpp"
#include "rkbs/kernels.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rkbs {

struct ModelDocument {
    RkbsModel model;
    bool converged = true;  // training outcome flag carried alongside the model
};

inline nlohmann::json model_to_json(const RkbsModel& model, bool converged = true) {
    nlohmann::json j;
    j["p"] = model.p;
    j["theta"] = model.kernel.theta;
    j["n"] = model.kernel.degree;
    j["d"] = model.kernel.dim;
    const Eigen::Index n = model.centers.cols();
    std::vector<std::vector<double>> centers(n);
    for (Eigen::Index i = 0; i < n; ++i)
        centers[i].assign(model.centers.col(i).data(),
                          model.centers.col(i).data() + model.centers.rows());
    j["centers"] = centers;
    std::vector<double> re(n), im(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        re[i] = model.coefficients.entries[i].real();
        im[i] = model.coefficients.entries[i].imag();
    }
    j["coefficients_re"] = re;
    j["coefficients_im"] = im;
    j["real_mode"] = model.coefficients.real_mode;
    j["norm"] = rkbs_norm(model);
    j["converged"] = converged;
    return j;
}

inline void save_model(const RkbsModel& model, const std::string& path,
                       bool converged = true) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_model: cannot open " + path);
    out << model_to_json(model, converged).dump(2) << "\n";
}

inline ModelDocument model_from_json(const nlohmann::json& j) {
    for (const char* key :
         {"p", "theta", "n", "d", "centers", "coefficients_re", "coefficients_im",
          "real_mode", "norm"})
        if (!j.contains(key))
            throw std::runtime_error(std::string("model document: missing field ") + key);
    const int p = j.at("p").get<int>();
    const int d = j.at("d").get<int>();
    SpectralKernel kernel(j.at("theta").get<double>(), j.at("n").get<double>(), d);
    const auto centers_in = j.at("centers").get<std::vector<std::vector<double>>>();
    const auto re = j.at("coefficients_re").get<std::vector<double>>();
    const auto im = j.at("coefficients_im").get<std::vector<double>>();
    if (re.size() != centers_in.size() || im.size() != centers_in.size())
        throw std::runtime_error("model document: centers/coefficients size mismatch");
    Eigen::MatrixXd centers(d, static_cast<Eigen::Index>(centers_in.size()));
    for (std::size_t i = 0; i < centers_in.size(); ++i) {
        if (static_cast<int>(centers_in[i].size()) != d)
            throw std::runtime_error("model document: center dimension mismatch");
        for (int r = 0; r < d; ++r) centers(r, static_cast<Eigen::Index>(i)) = centers_in[i][r];
    }
    CoefficientVector c;
    c.real_mode = j.at("real_mode").get<bool>();
    c.entries.resize(static_cast<Eigen::Index>(re.size()));
    for (std::size_t i = 0; i < re.size(); ++i)
        c.entries[static_cast<Eigen::Index>(i)] = {re[i], c.real_mode ? 0.0 : im[i]};
    ModelDocument doc{RkbsModel(p, kernel, centers, c),
                      j.value("converged", true)};
    return doc;
}

inline ModelDocument load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_model: malformed JSON: " + std::string(e.what()));
    }
    return model_from_json(j);
}

/// CSV: d feature columns then one label column; header row optional
/// (detected by failing to parse the first row as numbers).
struct Dataset {
    Eigen::MatrixXd points;  // d x N
    Eigen::VectorXd labels;  // N
};

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const auto a = cell.find_first_not_of(" \t\r");
        const auto b = cell.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
    }
    return out;
}

inline bool parse_row(const std::vector<std::string>& cells, std::vector<double>& vals) {
    vals.clear();
    for (const std::string& cell : cells) {
        if (cell.empty()) return false;
        std::size_t pos = 0;
        double v;
        try {
            v = std::stod(cell, &pos);
        } catch (...) {
            return false;
        }
        if (pos != cell.size()) return false;
        vals.push_back(v);
    }
    return !vals.empty();
}

}  // namespace detail

/// Numeric rows as a (columns x rows) matrix; header row skipped if present.
inline Eigen::MatrixXd load_csv_columns(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> vals;
        if (!detail::parse_row(detail::split_csv_row(line), vals)) {
            if (first) {  // header row
                first = false;
                continue;
            }
            throw std::runtime_error("load_csv: non-numeric row: " + line);
        }
        first = false;
        if (width == 0) width = vals.size();
        if (vals.size() != width)
            throw std::runtime_error("load_csv: inconsistent column count");
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw std::runtime_error("load_csv: no data rows");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(width),
                        static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t r = 0; r < width; ++r)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = rows[i][r];
    return out;
}

inline Dataset load_csv(const std::string& path) {
    const Eigen::MatrixXd cols = load_csv_columns(path);
    if (cols.rows() < 2)
        throw std::runtime_error("load_csv: need at least one feature and a label");
    Dataset ds;
    ds.points = cols.topRows(cols.rows() - 1);
    ds.labels = cols.bottomRows(1).transpose();
    return ds;
}

}  // namespace rkbs

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "rheat/convergence.hpp"
#include "rheat/fbm.hpp"
#include "rheat/rough.hpp"
#include "rheat/schemes.hpp"

namespace rheat {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Shortest-unambiguous is not wanted here: data files carry 17 significant
/// digits so any consumer reconstructs the exact double.
inline std::string format_double17(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw IoError("cannot parse floating-point field '" + std::string(s) + "'");
    return v;
}

/// RFC-4180 writer: header row, CRLF records. Fields here are numeric or
/// simple identifiers, so no quoting is ever required.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot open '" + path + "' for writing");
        path_ = path;
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << "\r\n";
    }

    void close() {
        out_.close();
        if (!out_) throw IoError("write failure on '" + path_ + "'");
    }

private:
    std::ofstream out_;
    std::string path_;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

/// Columns: t, x^1..x^m. Full double precision for cross-tool validation.
inline void write_driver_csv(const std::string& path, const DriverPath& p) {
    CsvWriter csv(path);
    std::vector<std::string> header{"t"};
    for (int i = 1; i <= p.components; ++i) header.push_back("x" + std::to_string(i));
    csv.row(header);
    for (int k = 0; k <= p.mesh; ++k) {
        std::vector<std::string> row{format_double17(p.time(k))};
        for (int i = 0; i < p.components; ++i) row.push_back(format_double17(p.value(k, i)));
        csv.row(row);
    }
    csv.close();
}

/// Inverse of write_driver_csv. The Hurst index is metadata the CSV does not
/// carry; the caller supplies it.
inline DriverPath read_driver_csv(const std::string& path, double hurst) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    if (!std::getline(in, line)) throw IoError("driver CSV '" + path + "' is empty");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "t") throw IoError("driver CSV '" + path + "': bad header");
    const int m = static_cast<int>(header.size()) - 1;
    DriverPath p;
    p.components = m;
    p.hurst = hurst;
    std::vector<double> flat;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != m + 1) throw IoError("driver CSV '" + path + "': ragged row");
        for (int i = 1; i <= m; ++i) flat.push_back(parse_double(fields[static_cast<std::size_t>(i)]));
        ++rows;
    }
    if (rows < 2) throw IoError("driver CSV '" + path + "': need at least two rows");
    p.mesh = rows - 1;
    p.samples = std::move(flat);
    if (!p.all_finite()) throw IoError("driver CSV '" + path + "': non-finite sample");
    return p;
}

enum class TrajectoryView { spectral, grid };

/// Spectral view: t, y1..yN. Grid view: t, xi_1..xi_Ng with Ng = modes.
inline void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                                 TrajectoryView view = TrajectoryView::spectral) {
    CsvWriter csv(path);
    const int n = traj.states.front().dim();
    std::vector<std::string> header{"t"};
    if (view == TrajectoryView::spectral) {
        for (int l = 1; l <= n; ++l) header.push_back("y" + std::to_string(l));
    } else {
        for (int g = 1; g <= n; ++g) header.push_back("xi" + std::to_string(g));
    }
    csv.row(header);
    SineTransform transform(n, n);
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        std::vector<std::string> row{format_double17(traj.times[k])};
        if (view == TrajectoryView::spectral) {
            for (double c : traj.states[k].coeffs) row.push_back(format_double17(c));
        } else {
            transform.synthesize(traj.states[k].coeffs, grid);
            for (double v : grid) row.push_back(format_double17(v));
        }
        csv.row(row);
    }
    csv.close();
}

inline nlohmann::json scheme_config_to_json(const SchemeConfig& cfg) {
    nlohmann::json j;
    j["scheme"] = to_string(cfg.scheme);
    j["time_mesh"] = cfg.time_mesh;
    j["steps"] = cfg.steps();
    j["modes"] = cfg.modes;
    j["hurst"] = cfg.hurst;
    j["gamma"] = cfg.gamma;
    j["gamma_prime"] = cfg.gamma_prime;
    j["kappa"] = cfg.kappa;
    j["nonlinearity"] = cfg.nonlinearity.label;
    j["seed"] = cfg.seed;
    j["oversample"] = cfg.oversample;
    j["initial_condition"] = cfg.initial_condition.coeffs;
    return j;
}

inline nlohmann::json study_plan_to_json(const StudyPlan& plan) {
    nlohmann::json j;
    j["scheme"] = to_string(plan.scheme);
    j["hurst"] = plan.hurst;
    j["gamma"] = plan.gamma;
    j["gamma_prime"] = plan.gamma_prime;
    j["beta"] = plan.beta;
    j["lambda"] = plan.lambda;
    j["mesh_ladder"] = plan.mesh_ladder;
    j["mode_ladder"] = plan.mode_ladder;
    j["mesh_ref"] = plan.mesh_ref;
    j["modes_ref"] = plan.modes_ref;
    j["replications"] = plan.replications;
    j["seed"] = plan.base_seed;
    j["kappa"] = plan.kappa;
    j["forcing"] = plan.forcing;
    j["oversample"] = plan.oversample;
    j["fit_tolerance"] = plan.fit_tolerance;
    j["drop_finest"] = plan.drop_finest;
    j["initial_condition"] = plan.initial_condition.coeffs;
    return j;
}

inline nlohmann::json rate_fit_to_json(const RateFit& fit) {
    nlohmann::json j;
    j["valid"] = fit.valid;
    if (!fit.valid) {
        j["reason"] = fit.reason;
        return j;
    }
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["residual"] = fit.residual;
    j["seed_spread"] = fit.seed_spread;
    j["resolutions"] = fit.resolutions;
    j["medians"] = fit.medians;
    j["targets"] = nlohmann::json::array();
    for (const auto& t : fit.targets) {
        nlohmann::json tj;
        tj["name"] = t.name;
        tj["rate"] = t.rate;
        tj["pass"] = t.pass;
        j["targets"].push_back(tj);
    }
    return j;
}

inline nlohmann::json convergence_report_to_json(const ConvergenceReport& report) {
    nlohmann::json j;
    j["plan"] = study_plan_to_json(report.plan);
    j["plan_digest"] = report.plan.digest();
    j["mesh_fit"] = rate_fit_to_json(report.mesh_fit);
    j["mode_fit"] = rate_fit_to_json(report.mode_fit);
    j["medians"] = nlohmann::json::array();
    for (const auto& m : report.medians) {
        nlohmann::json mj;
        mj["mesh"] = m.mesh;
        mj["modes"] = m.modes;
        mj["median_error"] = m.median_error;
        mj["failures"] = m.failures;
        j["medians"].push_back(mj);
    }
    return j;
}

/// Long format: scheme, H, M, N, seed, error (failed cells carry an empty
/// error field and failed=1).
inline void write_convergence_csv(const std::string& path, const ConvergenceReport& report) {
    CsvWriter csv(path);
    csv.row({"scheme", "H", "M", "N", "seed", "error", "failed"});
    for (const auto& r : report.rows) {
        csv.row({to_string(report.plan.scheme), format_double17(report.plan.hurst), std::to_string(r.mesh),
                 std::to_string(r.modes), std::to_string(r.replication),
                 r.failed ? std::string() : format_double17(r.error), r.failed ? "1" : "0"});
    }
    csv.close();
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    out.close();
    if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace rheat

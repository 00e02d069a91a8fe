#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rheat/schemes.hpp"

namespace rheat {

namespace detail {

template <class F>
inline void parallel_for(int n, int threads, F&& body) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid) - 1, v.end());
    return 0.5 * (hi + v[mid - 1]);
}

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS of fit residuals
};

inline OlsFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    OlsFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        rss += r * r;
    }
    f.residual = std::sqrt(rss / static_cast<double>(n));
    return f;
}

}  // namespace detail

/// Default initial condition: psi = (1/2) sin(pi xi) + (3/5) sin(3 pi xi)
/// expressed in the orthonormal basis.
inline SpectralState default_initial_condition() {
    SpectralState psi = SpectralState::zero(3);
    psi.coeffs[0] = 0.5 / std::numbers::sqrt2;
    psi.coeffs[2] = 0.6 / std::numbers::sqrt2;
    return psi;
}

/// One convergence study: ladders of resolutions run against a nested
/// fine-resolution reference, aggregated over independent replications.
/// Mesh entries are actual step counts (the Milstein dyadic exponent is
/// derived internally).
struct StudyPlan {
    SchemeKind scheme = SchemeKind::euler;
    double hurst = 0.6;
    double gamma = 0.55;
    double gamma_prime = 0.48;
    double beta = 0.0;    // Milstein time-rate target
    double lambda = 0.0;  // Milstein space-rate target
    std::vector<int> mesh_ladder{16, 32, 64, 128, 256, 512};
    std::vector<int> mode_ladder{4, 8, 16, 32, 64};
    int mesh_ref = 4096;
    int modes_ref = 128;
    int replications = 20;
    std::uint64_t base_seed = 1;
    double kappa = 100.0;
    NonlinKind nonlinearity_kind = NonlinKind::rational;
    double forcing = 1.0;  // parameter of the nonlinearity family
    int oversample = 1;
    double fit_tolerance = 0.15;
    bool drop_finest = true;
    SpectralState initial_condition = default_initial_condition();

    static StudyPlan defaults(SchemeKind scheme) {
        StudyPlan p;
        p.scheme = scheme;
        if (scheme == SchemeKind::milstein) {
            p.hurst = 0.4;
            p.gamma = 0.38;
            p.gamma_prime = 0.65;
            // strict inequalities: beta < min(gamma+gamma'-1, gamma-gamma'+1/2),
            // lambda < gamma+gamma'-1
            p.beta = 0.02;
            p.lambda = 0.02;
        }
        return p;
    }

    void validate() const {
        auto fail = [](const std::string& msg) { throw std::invalid_argument("StudyPlan: " + msg); };
        if (!(hurst > 1.0 / 3.0 && hurst < 1.0)) fail("hurst must lie in (1/3,1)");
        if (mesh_ladder.empty() || mode_ladder.empty()) fail("ladders must be nonempty");
        if (replications < 1) fail("replications must be >= 1");
        if (mesh_ref < 1 || modes_ref < 1) fail("reference resolution must be positive");
        for (int m : mesh_ladder) {
            if (m < 1 || mesh_ref % m != 0) fail("every ladder mesh must divide mesh_ref");
            if (scheme == SchemeKind::milstein && (m & (m - 1)) != 0) fail("milstein meshes must be powers of two");
        }
        if (scheme == SchemeKind::milstein && (mesh_ref & (mesh_ref - 1)) != 0)
            fail("milstein mesh_ref must be a power of two");
        for (int n : mode_ladder)
            if (n < 1 || n > modes_ref) fail("every ladder mode count must be <= modes_ref");
        if (scheme == SchemeKind::milstein) {
            const double time_cap = std::min(gamma + gamma_prime - 1.0, gamma - gamma_prime + 0.5);
            if (!(beta > 0.0 && beta < time_cap))
                fail("beta must satisfy 0 < beta < min(gamma+gamma_prime-1, gamma-gamma_prime+1/2)");
            if (!(lambda > 0.0 && lambda < gamma + gamma_prime - 1.0))
                fail("lambda must satisfy 0 < lambda < gamma+gamma_prime-1");
        }
        if (oversample < 1) fail("oversample must be >= 1");
        if (kappa <= 0.0) fail("kappa must be > 0");
        if (!initial_condition.all_finite()) fail("initial condition must be finite");
    }

    std::vector<std::string> warnings() const { return base_config(mesh_ladder.front(), mode_ladder.front()).hypothesis_warnings(); }

    SchemeConfig base_config(int steps, int modes) const {
        SchemeConfig cfg;
        cfg.scheme = scheme;
        cfg.time_mesh = scheme == SchemeKind::euler ? steps : std::countr_zero(static_cast<unsigned>(steps));
        cfg.modes = modes;
        cfg.hurst = hurst;
        cfg.gamma = gamma;
        cfg.gamma_prime = gamma_prime;
        cfg.kappa = kappa;
        cfg.nonlinearity = Nonlinearity::paper_family(forcing);
        cfg.initial_condition = initial_condition;
        cfg.seed = base_seed;
        cfg.oversample = oversample;
        return cfg;
    }

    std::uint64_t replication_seed(int replication) const {
        return CounterRng::mix(base_seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(replication + 1));
    }

    std::uint64_t digest() const {
        std::ostringstream os;
        os << to_string(scheme) << '|' << hurst << '|' << gamma << '|' << gamma_prime << '|' << beta << '|' << lambda
           << '|' << mesh_ref << '|' << modes_ref << '|' << replications << '|' << base_seed << '|' << kappa << '|'
           << forcing << '|' << oversample << '|' << fit_tolerance << '|' << drop_finest;
        for (int m : mesh_ladder) os << 'M' << m;
        for (int n : mode_ladder) os << 'N' << n;
        for (double c : initial_condition.coeffs) os << 'c' << c;
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : os.str()) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return h;
    }
};

struct CellResult {
    int mesh = 0;
    int modes = 0;
    int replication = 0;
    double error = 0.0;
    bool failed = false;
    std::string message;
};

struct RateTarget {
    std::string name;
    double rate = 0.0;  // expected decay exponent (positive)
    bool pass = false;  // fitted slope <= -(rate - tolerance)
};

struct RateFit {
    bool valid = false;
    std::string reason;
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    double seed_spread = 0.0;  // stddev of per-replication slopes
    std::vector<double> resolutions;
    std::vector<double> medians;
    std::vector<RateTarget> targets;
};

struct MedianRow {
    int mesh = 0;
    int modes = 0;
    double median_error = 0.0;
    int failures = 0;
};

struct ConvergenceReport {
    StudyPlan plan;
    std::vector<CellResult> rows;
    std::vector<MedianRow> medians;
    RateFit mesh_fit;
    RateFit mode_fit;
};

/// sup over the run's grid times of the truncated B_{gamma'} distance to the
/// nested reference (modes up to the reference resolution; missing modes
/// compare against zero).
inline double sup_bnorm_error(const Trajectory& reference, const Trajectory& run, double gamma_prime) {
    const int steps = run.n_steps();
    const int ref_steps = reference.n_steps();
    if (ref_steps % steps != 0)
        throw std::invalid_argument("sup_bnorm_error: reference mesh must be a multiple of the run mesh");
    const int stride = ref_steps / steps;
    const int n_ref = reference.states.front().dim();
    std::vector<double> w(static_cast<std::size_t>(n_ref));
    for (int l = 1; l <= n_ref; ++l)
        w[static_cast<std::size_t>(l - 1)] = std::pow(Eigensystem::lambda(l), 2.0 * gamma_prime);
    double worst = 0.0;
    for (int k = 0; k <= steps; ++k) {
        const auto& a = reference.states[static_cast<std::size_t>(k) * stride].coeffs;
        const auto& b = run.states[static_cast<std::size_t>(k)].coeffs;
        double acc = 0.0;
        for (int l = 0; l < n_ref; ++l) {
            const double d = a[static_cast<std::size_t>(l)] -
                             (l < static_cast<int>(b.size()) ? b[static_cast<std::size_t>(l)] : 0.0);
            acc += w[static_cast<std::size_t>(l)] * d * d;
        }
        worst = std::max(worst, acc);
    }
    return std::sqrt(worst);
}

/// Fine driver for one replication; every ladder run restricts this path.
inline DriverPath study_driver(const StudyPlan& plan, int replication) {
    return sample_fbm(plan.hurst, plan.mesh_ref, 1, plan.replication_seed(replication));
}

/// Reference run at (mesh_ref, modes_ref). The true solution is not
/// computable; the finest nested run stands in for it.
inline Trajectory reference_solution(const StudyPlan& plan, int replication) {
    const DriverPath driver = study_driver(plan, replication);
    return run_scheme(plan.base_config(plan.mesh_ref, plan.modes_ref), driver);
}

/// Errors of every ladder cell for one replication against a precomputed
/// reference. Blow-ups mark the cell failed; the study continues.
inline std::vector<CellResult> error_curve(const StudyPlan& plan, int replication, const DriverPath& fine,
                                           const Trajectory& reference) {
    std::vector<CellResult> rows;
    rows.reserve(plan.mesh_ladder.size() * plan.mode_ladder.size());
    for (int mesh : plan.mesh_ladder) {
        const DriverPath coarse = restrict_mesh(fine, mesh);
        for (int modes : plan.mode_ladder) {
            CellResult cell;
            cell.mesh = mesh;
            cell.modes = modes;
            cell.replication = replication;
            try {
                const Trajectory run = run_scheme(plan.base_config(mesh, modes), coarse);
                cell.error = sup_bnorm_error(reference, run, plan.gamma_prime);
            } catch (const BlowUpError& e) {
                cell.failed = true;
                cell.message = e.what();
            }
            rows.push_back(std::move(cell));
        }
    }
    return rows;
}

namespace detail {

inline RateFit fit_curve(const std::vector<CellResult>& rows, bool along_mesh, int fixed_other,
                         const StudyPlan& plan) {
    RateFit fit;
    std::vector<int> ladder = along_mesh ? plan.mesh_ladder : plan.mode_ladder;
    std::sort(ladder.begin(), ladder.end());
    if (plan.drop_finest && ladder.size() > 1) ladder.pop_back();

    std::vector<double> lx, ly;
    for (int res : ladder) {
        std::vector<double> errs;
        for (const auto& r : rows) {
            const int axis = along_mesh ? r.mesh : r.modes;
            const int other = along_mesh ? r.modes : r.mesh;
            if (axis == res && other == fixed_other && !r.failed) errs.push_back(r.error);
        }
        if (errs.empty()) continue;
        const double med = median(errs);
        if (med == 0.0) {
            fit.reason = "a median error is exactly zero";
            return fit;
        }
        fit.resolutions.push_back(static_cast<double>(res));
        fit.medians.push_back(med);
        lx.push_back(std::log(static_cast<double>(res)));
        ly.push_back(std::log(med));
    }
    if (lx.size() < 4) {
        fit.reason = "need at least 4 ladder points with nonzero errors";
        return fit;
    }

    const OlsFit f = ols(lx, ly);
    fit.valid = true;
    fit.slope = f.slope;
    fit.intercept = f.intercept;
    fit.residual = f.residual;

    // spread of per-replication slopes
    std::vector<double> seed_slopes;
    for (int rep = 0; rep < plan.replications; ++rep) {
        std::vector<double> sx, sy;
        for (std::size_t i = 0; i < fit.resolutions.size(); ++i) {
            const int res = static_cast<int>(fit.resolutions[i]);
            for (const auto& r : rows) {
                const int axis = along_mesh ? r.mesh : r.modes;
                const int other = along_mesh ? r.modes : r.mesh;
                if (axis == res && other == fixed_other && r.replication == rep && !r.failed && r.error > 0.0) {
                    sx.push_back(std::log(static_cast<double>(res)));
                    sy.push_back(std::log(r.error));
                }
            }
        }
        if (sx.size() == fit.resolutions.size()) seed_slopes.push_back(ols(sx, sy).slope);
    }
    if (seed_slopes.size() > 1) {
        double mean = 0.0;
        for (double s : seed_slopes) mean += s;
        mean /= static_cast<double>(seed_slopes.size());
        double var = 0.0;
        for (double s : seed_slopes) var += (s - mean) * (s - mean);
        fit.seed_spread = std::sqrt(var / static_cast<double>(seed_slopes.size() - 1));
    }

    auto add_target = [&fit, &plan](const std::string& name, double rate) {
        RateTarget t;
        t.name = name;
        t.rate = rate;
        t.pass = fit.slope <= -(rate - plan.fit_tolerance);
        fit.targets.push_back(std::move(t));
    };
    if (along_mesh) {
        if (plan.scheme == SchemeKind::euler) {
            add_target("gamma+gamma_prime-1", plan.gamma + plan.gamma_prime - 1.0);
            add_target("H-gamma", plan.hurst - plan.gamma);
        } else {
            add_target("beta", plan.beta);
        }
    } else if (plan.scheme == SchemeKind::milstein) {
        add_target("2*lambda", 2.0 * plan.lambda);
    }
    return fit;
}

}  // namespace detail

/// Least-squares slopes of log median error against log resolution, with the
/// theoretical exponents attached as (informational) verdicts. Refuses to
/// fit degenerate ladders or curves containing an exact zero.
inline std::pair<RateFit, RateFit> fit_rates(const std::vector<CellResult>& rows, const StudyPlan& plan) {
    const int top_modes = *std::max_element(plan.mode_ladder.begin(), plan.mode_ladder.end());
    const int top_mesh = *std::max_element(plan.mesh_ladder.begin(), plan.mesh_ladder.end());
    return {detail::fit_curve(rows, true, top_modes, plan), detail::fit_curve(rows, false, top_mesh, plan)};
}

/// Full study: replications run as independent work items; aggregation is a
/// deterministic fold in fixed order, so the report does not depend on the
/// thread count.
inline ConvergenceReport run_study(const StudyPlan& plan, int threads = 1) {
    plan.validate();
    ConvergenceReport report;
    report.plan = plan;

    std::vector<std::vector<CellResult>> slots(static_cast<std::size_t>(plan.replications));
    detail::parallel_for(plan.replications, threads, [&](int rep) {
        try {
            const DriverPath fine = study_driver(plan, rep);
            const Trajectory ref = run_scheme(plan.base_config(plan.mesh_ref, plan.modes_ref), fine);
            slots[static_cast<std::size_t>(rep)] = error_curve(plan, rep, fine, ref);
        } catch (const BlowUpError& e) {
            // reference itself blew up: every cell of this replication fails
            std::vector<CellResult> rows;
            for (int mesh : plan.mesh_ladder)
                for (int modes : plan.mode_ladder)
                    rows.push_back(CellResult{mesh, modes, rep, 0.0, true, std::string("reference: ") + e.what()});
            slots[static_cast<std::size_t>(rep)] = std::move(rows);
        }
    });
    for (auto& s : slots)
        for (auto& row : s) report.rows.push_back(std::move(row));

    for (int mesh : plan.mesh_ladder)
        for (int modes : plan.mode_ladder) {
            MedianRow mr;
            mr.mesh = mesh;
            mr.modes = modes;
            std::vector<double> errs;
            for (const auto& r : report.rows)
                if (r.mesh == mesh && r.modes == modes) {
                    if (r.failed) ++mr.failures;
                    else errs.push_back(r.error);
                }
            mr.median_error = detail::median(errs);
            report.medians.push_back(mr);
        }

    auto [mesh_fit, mode_fit] = fit_rates(report.rows, plan);
    report.mesh_fit = std::move(mesh_fit);
    report.mode_fit = std::move(mode_fit);
    return report;
}

}  // namespace rheat

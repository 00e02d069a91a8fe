#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rheat/fbm.hpp"
#include "rheat/kernels.hpp"
#include "rheat/nonlinearity.hpp"
#include "rheat/spectral.hpp"

namespace rheat {

enum class SchemeKind { euler, milstein };

inline const char* to_string(SchemeKind s) { return s == SchemeKind::euler ? "euler" : "milstein"; }

/// All resolution, regularity and model parameters for one solver run.
/// time_mesh follows the scheme convention: the Euler scheme takes M steps,
/// the Milstein scheme runs on the dyadic partition with 2^time_mesh steps.
struct SchemeConfig {
    SchemeKind scheme = SchemeKind::euler;
    int time_mesh = 1;
    int modes = 1;
    double hurst = 0.5;
    double gamma = 0.45;
    double gamma_prime = 0.48;
    double kappa = 1.0;
    Nonlinearity nonlinearity = Nonlinearity::zero();
    SpectralState initial_condition = SpectralState::zero(1);
    std::uint64_t seed = 0;
    int oversample = 1;

    int steps() const {
        if (scheme == SchemeKind::euler) return time_mesh;
        if (time_mesh < 0 || time_mesh > 30) throw std::invalid_argument("SchemeConfig: dyadic exponent out of range");
        return 1 << time_mesh;
    }

    /// Regularity-window checks from the convergence theory. Violations do
    /// not make the iteration ill-defined, so they warn instead of reject.
    std::vector<std::string> hypothesis_warnings() const {
        std::vector<std::string> w;
        std::ostringstream os;
        if (scheme == SchemeKind::euler) {
            if (hurst <= 0.5)
                w.push_back("euler scheme: hurst <= 1/2; first-order convergence is not guaranteed");
            const double lo = std::max(1.0 - gamma, gamma / 2.0);
            if (!(gamma > 0.5 && gamma < 1.0))
                w.push_back("euler scheme: gamma outside (1/2,1)");
            if (!(gamma_prime > lo && gamma_prime < 0.5)) {
                os << "euler scheme: gamma_prime=" << gamma_prime << " outside (max(1-gamma,gamma/2),1/2)=("
                   << lo << ",0.5)";
                w.push_back(os.str());
            }
        } else {
            if (!(gamma > 1.0 / 3.0 && gamma < 0.5))
                w.push_back("milstein scheme: gamma outside (1/3,1/2)");
            if (!(gamma_prime > 1.0 - gamma && gamma_prime <= 2.0 * gamma)) {
                os << "milstein scheme: gamma_prime=" << gamma_prime << " outside (1-gamma,2*gamma]=("
                   << 1.0 - gamma << "," << 2.0 * gamma << "]";
                w.push_back(os.str());
            }
        }
        return w;
    }
};

/// Raised when a coefficient leaves the finite range; downstream code never
/// sees NaNs.
struct BlowUpError : std::runtime_error {
    int step;
    double max_coeff;
    BlowUpError(int step_, double max_coeff_)
        : std::runtime_error("scheme blow-up at step " + std::to_string(step_) +
                             " (max |coefficient| " + std::to_string(max_coeff_) + ")"),
          step(step_), max_coeff(max_coeff_) {}
};

struct Trajectory {
    std::vector<double> times;
    std::vector<SpectralState> states;
    SchemeConfig config;
    std::uint64_t driver_digest = 0;

    int n_steps() const { return static_cast<int>(times.size()) - 1; }
};

namespace detail {

// Shared collocation machinery: one sine table per run, scratch reused
// across steps.
struct Collocation {
    SineTransform transform;
    int modes;

    Collocation(int modes_, int oversample, int state_dim)
        : transform(oversample * std::max(modes_, state_dim), std::max(modes_, state_dim)), modes(modes_) {}

    int grid() const { return transform.grid_size(); }
};

inline void check_finite_or_throw(const std::vector<double>& y, int step) {
    double maxc = 0.0;
    bool bad = false;
    for (double c : y) {
        if (!std::isfinite(c)) bad = true;
        else maxc = std::max(maxc, std::abs(c));
    }
    if (bad) throw BlowUpError(step, maxc);
}

}  // namespace detail

/// P_N applied to the spectral transform of xi -> f_i(y(xi)): synthesize on
/// the (oversampled) collocation grid, apply f_i pointwise, analyze back.
inline SpectralState eval_nonlinearity(const SpectralState& y, const Nonlinearity& f, int i, int n_modes,
                                       int oversample = 1) {
    if (oversample < 1) throw std::invalid_argument("eval_nonlinearity: oversample must be >= 1");
    detail::Collocation col(n_modes, oversample, y.dim());
    std::vector<double> grid_y(static_cast<std::size_t>(col.grid()));
    col.transform.synthesize(y.coeffs, grid_y);
    for (auto& v : grid_y) v = f.eval(i, v);
    SpectralState out = SpectralState::zero(n_modes);
    col.transform.analyze(grid_y, out.coeffs);
    return out;
}

/// P_N [ f_i'(y) . (P_N f_j(y)) ] with the inner projection applied before
/// the pointwise product. Collocation replaces the literal O(N^3) double sum
/// but computes the same quantity.
inline SpectralState eval_milstein_product(const SpectralState& y, const Nonlinearity& f, int i, int j, int n_modes,
                                           int oversample = 1) {
    if (oversample < 1) throw std::invalid_argument("eval_milstein_product: oversample must be >= 1");
    detail::Collocation col(n_modes, oversample, y.dim());
    const std::size_t ng = static_cast<std::size_t>(col.grid());
    std::vector<double> grid_y(ng), grid_f(ng), grid_g(ng);
    col.transform.synthesize(y.coeffs, grid_y);

    for (std::size_t n = 0; n < ng; ++n) grid_f[n] = f.eval(j, grid_y[n]);
    std::vector<double> fj_coeffs(static_cast<std::size_t>(n_modes));
    col.transform.analyze(grid_f, fj_coeffs);
    col.transform.synthesize(fj_coeffs, grid_g);

    for (std::size_t n = 0; n < ng; ++n) grid_g[n] *= f.eval_prime(i, grid_y[n]);
    SpectralState out = SpectralState::zero(n_modes);
    col.transform.analyze(grid_g, out.coeffs);
    return out;
}

namespace detail {

inline Trajectory run_scheme_impl(const SchemeConfig& cfg, const DriverPath& driver) {
    const int steps = cfg.steps();
    const int n = cfg.modes;
    const int m = cfg.nonlinearity.size();
    if (n < 1) throw std::invalid_argument("run_scheme: modes must be >= 1");
    if (driver.mesh != steps)
        throw std::invalid_argument("run_scheme: driver mesh must equal the scheme step count");
    if (driver.components != m)
        throw std::invalid_argument("run_scheme: driver components must match the nonlinearity");
    if (cfg.scheme == SchemeKind::milstein && !driver.dyadic())
        throw std::invalid_argument("run_scheme: milstein scheme requires a dyadic driver");
    if (cfg.kappa <= 0.0) throw std::invalid_argument("run_scheme: kappa must be > 0");
    const bool second_order = cfg.scheme == SchemeKind::milstein;

    const double h = 1.0 / steps;
    const KernelWeights kw = KernelWeights::compute(Eigensystem{n, cfg.kappa}, h);
    Collocation col(n, cfg.oversample, n);
    const std::size_t ng = static_cast<std::size_t>(col.grid());

    // Y_0 = P_N psi, stored with exactly N coefficients.
    std::vector<double> y(static_cast<std::size_t>(n), 0.0);
    for (int l = 0; l < std::min(n, cfg.initial_condition.dim()); ++l)
        y[static_cast<std::size_t>(l)] = cfg.initial_condition.coeffs[static_cast<std::size_t>(l)];
    check_finite_or_throw(y, 0);

    Trajectory traj;
    traj.config = cfg;
    traj.driver_digest = driver.digest();
    traj.times.reserve(static_cast<std::size_t>(steps) + 1);
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(SpectralState(y));

    std::vector<double> grid_y(ng), grid_f(ng), grid_g(ng), fp(second_order ? ng * m : 0);
    std::vector<double> forcing(static_cast<std::size_t>(m) * n);
    std::vector<double> product(second_order ? static_cast<std::size_t>(m) * m * n : 0);
    std::vector<double> ynext(static_cast<std::size_t>(n));

    for (int k = 0; k < steps; ++k) {
        col.transform.synthesize(y, grid_y);

        for (int i = 0; i < m; ++i) {
            for (std::size_t g = 0; g < ng; ++g) grid_f[g] = cfg.nonlinearity.eval(i, grid_y[g]);
            col.transform.analyze(grid_f, std::span<double>(forcing.data() + static_cast<std::size_t>(i) * n,
                                                            static_cast<std::size_t>(n)));
        }

        if (second_order) {
            for (int i = 0; i < m; ++i)
                for (std::size_t g = 0; g < ng; ++g)
                    fp[static_cast<std::size_t>(i) * ng + g] = cfg.nonlinearity.eval_prime(i, grid_y[g]);
            for (int j = 0; j < m; ++j) {
                col.transform.synthesize(std::span<const double>(forcing.data() + static_cast<std::size_t>(j) * n,
                                                                 static_cast<std::size_t>(n)),
                                         grid_g);
                for (int i = 0; i < m; ++i) {
                    for (std::size_t g = 0; g < ng; ++g)
                        grid_f[g] = grid_g[g] * fp[static_cast<std::size_t>(i) * ng + g];
                    col.transform.analyze(
                        grid_f, std::span<double>(product.data() + (static_cast<std::size_t>(i) * m + j) * n,
                                                  static_cast<std::size_t>(n)));
                }
            }
        }

        for (int l = 0; l < n; ++l) {
            double first = 0.0;
            for (int i = 0; i < m; ++i)
                first += driver.increment(k, i) * forcing[static_cast<std::size_t>(i) * n + l];
            double acc = kw.decay[static_cast<std::size_t>(l)] * y[static_cast<std::size_t>(l)] +
                         kw.w1[static_cast<std::size_t>(l)] * first;
            if (second_order) {
                double second = 0.0;
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j)
                        second += driver.increment(k, i) * driver.increment(k, j) *
                                  product[(static_cast<std::size_t>(i) * m + j) * n + l];
                acc += kw.w2[static_cast<std::size_t>(l)] * second;
            }
            ynext[static_cast<std::size_t>(l)] = acc;
        }

        check_finite_or_throw(ynext, k + 1);
        y = ynext;
        traj.times.push_back(static_cast<double>(k + 1) * h);
        traj.states.push_back(SpectralState(y));
    }
    return traj;
}

}  // namespace detail

/// First-order spectral iteration
///   Y^l_{k+1} = e^{-kappa lambda_l h} Y^l_k
///             + w1(lambda_l, kappa h) sum_i dx^i_k <f_i(Y_k), e_l>_N.
inline Trajectory euler_run(const SchemeConfig& cfg, const DriverPath& driver) {
    if (cfg.scheme != SchemeKind::euler) throw std::invalid_argument("euler_run: config.scheme must be euler");
    return detail::run_scheme_impl(cfg, driver);
}

/// Second-order spectral iteration: adds
///   w2(lambda_l, kappa h) sum_{i,j} dx^i_k dx^j_k <P_N f_j(Y_k) . f_i'(Y_k), e_l>_N
/// on the dyadic partition t_k = k / 2^time_mesh.
inline Trajectory milstein_run(const SchemeConfig& cfg, const DriverPath& driver) {
    if (cfg.scheme != SchemeKind::milstein) throw std::invalid_argument("milstein_run: config.scheme must be milstein");
    return detail::run_scheme_impl(cfg, driver);
}

inline Trajectory run_scheme(const SchemeConfig& cfg, const DriverPath& driver) {
    return detail::run_scheme_impl(cfg, driver);
}

}  // namespace rheat

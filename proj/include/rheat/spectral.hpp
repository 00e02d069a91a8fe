#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace rheat {

inline constexpr double pi = std::numbers::pi;

/// Coefficients of a function in the orthonormal Dirichlet sine basis
/// e_n(xi) = sqrt(2) sin(n pi xi), n = 1..dim.
struct SpectralState {
    std::vector<double> coeffs;

    SpectralState() = default;
    explicit SpectralState(std::vector<double> c) : coeffs(std::move(c)) {}

    int dim() const { return static_cast<int>(coeffs.size()); }

    static SpectralState zero(int n) {
        if (n < 1) throw std::invalid_argument("SpectralState: dim must be >= 1");
        return SpectralState(std::vector<double>(static_cast<std::size_t>(n), 0.0));
    }

    /// Basis vector e_n embedded in dimension dim (1-based mode index).
    static SpectralState basis(int n, int dim) {
        if (n < 1 || n > dim) throw std::invalid_argument("SpectralState::basis: need 1 <= n <= dim");
        auto y = zero(dim);
        y.coeffs[static_cast<std::size_t>(n - 1)] = 1.0;
        return y;
    }

    bool all_finite() const {
        for (double c : coeffs)
            if (!std::isfinite(c)) return false;
        return true;
    }
};

/// Values of a function at the interior grid points xi_n = n/(Ng+1), n = 1..Ng.
/// Boundary values at xi = 0, 1 are implicitly zero (Dirichlet).
struct GridFunction {
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(std::vector<double> v) : values(std::move(v)) {}

    int grid_size() const { return static_cast<int>(values.size()); }

    /// Coordinate of the n-th interior point (0-based index into values).
    double xi(int n) const { return static_cast<double>(n + 1) / (grid_size() + 1); }
};

/// Dirichlet Laplacian eigensystem on (0,1): lambda_n = pi^2 n^2, plus the
/// time_scale multiplier kappa applied to the semigroup clock.
struct Eigensystem {
    int dim = 1;
    double time_scale = 1.0;

    static double lambda(int n) { return pi * pi * static_cast<double>(n) * static_cast<double>(n); }

    std::vector<double> eigenvalues() const {
        std::vector<double> ev(static_cast<std::size_t>(dim));
        for (int n = 1; n <= dim; ++n) ev[static_cast<std::size_t>(n - 1)] = lambda(n);
        return ev;
    }
};

/// Fractional Sobolev norm sqrt( sum_n lambda_n^{2 kappa} (y^n)^2 ).
/// kappa = 0 gives the L^2 norm; negative kappa is allowed (finite sums).
inline double sobolev_norm(const SpectralState& y, double kappa) {
    double acc = 0.0;
    for (int n = 1; n <= y.dim(); ++n) {
        double c = y.coeffs[static_cast<std::size_t>(n - 1)];
        if (kappa == 0.0) {
            acc += c * c;
        } else {
            acc += std::pow(Eigensystem::lambda(n), 2.0 * kappa) * c * c;
        }
    }
    return std::sqrt(acc);
}

/// Galerkin projection P_n: zero every coefficient beyond mode n.
/// The stored dimension is unchanged; idempotent and linear.
inline SpectralState project(const SpectralState& y, int n) {
    if (n < 1) throw std::invalid_argument("project: n must be >= 1");
    SpectralState out = y;
    for (int l = n + 1; l <= out.dim(); ++l) out.coeffs[static_cast<std::size_t>(l - 1)] = 0.0;
    return out;
}

/// Heat semigroup action: y^n -> exp(-kappa lambda_n t) y^n.
/// Underflow to exact zero is the correct limit for large arguments.
inline SpectralState semigroup_apply(const SpectralState& y, double t, const Eigensystem& sys) {
    if (t < 0.0) throw std::invalid_argument("semigroup_apply: t must be >= 0");
    SpectralState out = y;
    for (int n = 1; n <= out.dim(); ++n)
        out.coeffs[static_cast<std::size_t>(n - 1)] *= std::exp(-sys.time_scale * Eigensystem::lambda(n) * t);
    return out;
}

/// Discrete sine transform (DST-I) on the interior grid xi_n = n/(Ng+1).
///
/// With this grid the basis functions are exactly orthogonal under the
/// quadrature sum, so analyze(synthesize(y)) recovers y to rounding for
/// any state with dim <= Ng. The sine table is precomputed once; both
/// directions stream over contiguous rows.
class SineTransform {
public:
    SineTransform(int grid_size, int max_modes)
        : ng_(grid_size), lmax_(max_modes),
          table_(static_cast<std::size_t>(grid_size) * static_cast<std::size_t>(max_modes)) {
        if (grid_size < 1 || max_modes < 1)
            throw std::invalid_argument("SineTransform: grid_size and max_modes must be >= 1");
        if (max_modes > grid_size)
            throw std::invalid_argument("SineTransform: max_modes must not exceed grid_size");
        const double step = pi / (grid_size + 1);
        for (int l = 1; l <= max_modes; ++l) {
            double* row = row_ptr(l);
            for (int n = 1; n <= grid_size; ++n) row[n - 1] = std::sin(step * l * n);
        }
    }

    int grid_size() const { return ng_; }
    int max_modes() const { return lmax_; }

    /// g(xi_n) = sqrt(2) sum_l y^l sin(l pi xi_n). Exact synthesis.
    void synthesize(std::span<const double> coeffs, std::span<double> grid) const {
        const int nl = static_cast<int>(coeffs.size());
        if (nl > lmax_ || static_cast<int>(grid.size()) != ng_)
            throw std::invalid_argument("SineTransform::synthesize: size mismatch");
        for (int n = 0; n < ng_; ++n) grid[static_cast<std::size_t>(n)] = 0.0;
        constexpr double sqrt2 = std::numbers::sqrt2;
        for (int l = 1; l <= nl; ++l) {
            const double c = sqrt2 * coeffs[static_cast<std::size_t>(l - 1)];
            if (c == 0.0) continue;
            const double* row = row_ptr(l);
            for (int n = 0; n < ng_; ++n) grid[static_cast<std::size_t>(n)] += c * row[n];
        }
    }

    /// y^l = (1/(Ng+1)) sum_n g(xi_n) sqrt(2) sin(l pi xi_n), sine-I quadrature.
    void analyze(std::span<const double> grid, std::span<double> coeffs) const {
        const int nl = static_cast<int>(coeffs.size());
        if (nl > lmax_ || static_cast<int>(grid.size()) != ng_)
            throw std::invalid_argument("SineTransform::analyze: size mismatch");
        const double scale = std::numbers::sqrt2 / (ng_ + 1);
        for (int l = 1; l <= nl; ++l) {
            const double* row = row_ptr(l);
            double acc = 0.0;
            for (int n = 0; n < ng_; ++n) acc += row[n] * grid[static_cast<std::size_t>(n)];
            coeffs[static_cast<std::size_t>(l - 1)] = scale * acc;
        }
    }

private:
    double* row_ptr(int l) { return table_.data() + static_cast<std::size_t>(l - 1) * ng_; }
    const double* row_ptr(int l) const { return table_.data() + static_cast<std::size_t>(l - 1) * ng_; }

    int ng_;
    int lmax_;
    std::vector<double> table_;
};

/// Sine-I quadrature of a grid function. Rejects n_modes > grid_size:
/// aliasing would silently corrupt the coefficients.
inline SpectralState grid_to_spectral(const GridFunction& g, int n_modes) {
    if (n_modes < 1) throw std::invalid_argument("grid_to_spectral: n_modes must be >= 1");
    if (n_modes > g.grid_size())
        throw std::invalid_argument("grid_to_spectral: n_modes must not exceed grid_size");
    SineTransform t(g.grid_size(), n_modes);
    SpectralState y = SpectralState::zero(n_modes);
    t.analyze(g.values, y.coeffs);
    return y;
}

/// Exact synthesis onto a grid with at least dim interior points.
inline GridFunction spectral_to_grid(const SpectralState& y, int grid_size) {
    if (y.dim() < 1) throw std::invalid_argument("spectral_to_grid: empty state");
    if (grid_size < y.dim())
        throw std::invalid_argument("spectral_to_grid: grid_size must be >= dim");
    SineTransform t(grid_size, y.dim());
    GridFunction g(std::vector<double>(static_cast<std::size_t>(grid_size)));
    t.synthesize(y.coeffs, g.values);
    return g;
}

/// Point evaluation y(xi) = sqrt(2) sum_l y^l sin(l pi xi).
inline double evaluate_at(const SpectralState& y, double xi) {
    double acc = 0.0;
    for (int l = 1; l <= y.dim(); ++l)
        acc += y.coeffs[static_cast<std::size_t>(l - 1)] * std::sin(l * pi * xi);
    return std::numbers::sqrt2 * acc;
}

}  // namespace rheat

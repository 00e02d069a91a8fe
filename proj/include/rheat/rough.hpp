#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "rheat/fbm.hpp"

namespace rheat {

/// Levy areas of a piecewise-linear path over its own grid. Stored as prefix
/// areas A^{ij}(k) = area over [0, t_k]; any pair (s,t) is assembled through
/// the Chen relation
///   area_{ts} = A(t) - A(s) - (x^i_t - x^i_s) x^j_s,
/// which is exact for the stored grid.
struct LevyArea {
    int mesh = 0;
    int components = 1;
    double gamma = 0.0;
    std::vector<double> path;    // copy of the generating samples
    std::vector<double> prefix;  // (mesh+1) * m * m, row-major in (k, i, j)

    double path_value(int k, int i) const {
        return path[static_cast<std::size_t>(k) * components + static_cast<std::size_t>(i)];
    }
    double prefix_value(int k, int i, int j) const {
        return prefix[(static_cast<std::size_t>(k) * components + static_cast<std::size_t>(i)) * components +
                      static_cast<std::size_t>(j)];
    }

    /// area^{ij} over [t_s, t_t] for grid indices s < t.
    double value(int s, int t, int i, int j) const {
        return prefix_value(t, i, j) - prefix_value(s, i, j) -
               (path_value(t, i) - path_value(s, i)) * path_value(s, j);
    }
};

/// Levy area of the piecewise-linear interpolation: over one elementary
/// interval the area is (1/2) dx^i dx^j exactly.
inline LevyArea levy_area_linear(const DriverPath& p, double gamma = 0.0) {
    LevyArea a;
    a.mesh = p.mesh;
    a.components = p.components;
    a.gamma = gamma;
    a.path = p.samples;
    const int m = p.components;
    a.prefix.assign(static_cast<std::size_t>(p.mesh + 1) * m * m, 0.0);
    for (int k = 0; k < p.mesh; ++k) {
        for (int i = 0; i < m; ++i) {
            const double dxi = p.increment(k, i);
            for (int j = 0; j < m; ++j) {
                const std::size_t prev = (static_cast<std::size_t>(k) * m + static_cast<std::size_t>(i)) * m +
                                         static_cast<std::size_t>(j);
                const std::size_t next = (static_cast<std::size_t>(k + 1) * m + static_cast<std::size_t>(i)) * m +
                                         static_cast<std::size_t>(j);
                a.prefix[next] = a.prefix[prev] + 0.5 * dxi * p.increment(k, j) + dxi * p.value(k, j);
            }
        }
    }
    return a;
}

namespace detail {

// (d / mesh)^{-2 gamma} for lags d = 1..mesh; uniform grids make the pair
// scan a table lookup instead of a pow per pair.
inline std::vector<double> lag_weights(int mesh, double two_gamma) {
    std::vector<double> w(static_cast<std::size_t>(mesh) + 1, 0.0);
    for (int d = 1; d <= mesh; ++d)
        w[static_cast<std::size_t>(d)] = std::pow(static_cast<double>(d) / mesh, -two_gamma);
    return w;
}

}  // namespace detail

/// Discrete gamma-Hoelder seminorm over all pairs of a uniform grid on [0,1]:
/// sup_{s<t} |y_t - y_s| / |t-s|^gamma, Euclidean norm over components.
/// O(M^2) and exact for the stored grid.
inline double holder_norm_grid(std::span<const double> samples, int npts, int m, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("holder_norm_grid: gamma must be in (0,1]");
    if (npts < 2) return 0.0;
    const int mesh = npts - 1;
    const auto w = detail::lag_weights(mesh, 2.0 * gamma);
    double best = 0.0;
    for (int s = 0; s < mesh; ++s) {
        const double* xs = samples.data() + static_cast<std::size_t>(s) * m;
        for (int t = s + 1; t <= mesh; ++t) {
            const double* xt = samples.data() + static_cast<std::size_t>(t) * m;
            double d2 = 0.0;
            for (int i = 0; i < m; ++i) {
                const double d = xt[i] - xs[i];
                d2 += d * d;
            }
            const double r = d2 * w[static_cast<std::size_t>(t - s)];
            if (r > best) best = r;
        }
    }
    return std::sqrt(best);
}

inline double holder_norm(const DriverPath& p, double gamma) {
    return holder_norm_grid(p.samples, p.mesh + 1, p.components, gamma);
}

/// Approximation-quality statistics of a coarse interpolation against the
/// finest available path.
struct RoughnessReport {
    double holder_norm = 0.0;  // N[x; C_1^gamma] of the fine path
    double u = 0.0;            // Hoelder distance path vs. coarse interpolation
    double v = 0.0;            // u plus the 2gamma-distance of the Levy areas
    double gamma = 0.0;
};

/// u_M and v_M for the linear interpolation at coarse_mesh, measured on the
/// fine grid. The reference area is the fine-mesh interpolation area, so v
/// is relative to the finest resolution available rather than to the
/// (non-constructive) limit object.
inline RoughnessReport approximation_errors(const DriverPath& fine, int coarse_mesh, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("approximation_errors: gamma must be in (0,1)");
    if (coarse_mesh < 1 || fine.mesh % coarse_mesh != 0)
        throw std::invalid_argument("approximation_errors: coarse mesh must divide the fine mesh");

    const int m = fine.components;
    const int mesh = fine.mesh;
    const int stride = mesh / coarse_mesh;
    const std::size_t npts = static_cast<std::size_t>(mesh) + 1;

    // Coarse interpolation sampled at fine grid times. Within one coarse
    // interval the sub-segments are collinear, so re-interpolating through
    // these points reproduces the coarse interpolation exactly.
    std::vector<double> interp(npts * m);
    for (int k = 0; k <= mesh; ++k) {
        const int c = k / stride;
        const int r = k - c * stride;
        for (int i = 0; i < m; ++i) {
            double vv = fine.value(c * stride, i);
            if (r != 0)
                vv += (static_cast<double>(r) / stride) * (fine.value((c + 1) * stride, i) - fine.value(c * stride, i));
            interp[static_cast<std::size_t>(k) * m + static_cast<std::size_t>(i)] = vv;
        }
    }

    DriverPath interp_path;
    interp_path.mesh = mesh;
    interp_path.components = m;
    interp_path.hurst = fine.hurst;
    interp_path.samples = interp;

    const LevyArea area_fine = levy_area_linear(fine, gamma);
    const LevyArea area_coarse = levy_area_linear(interp_path, gamma);

    const auto w2g = detail::lag_weights(mesh, 2.0 * gamma);
    const auto w4g = detail::lag_weights(mesh, 4.0 * gamma);

    double best_path = 0.0;
    double best_diff = 0.0;
    double best_area = 0.0;
    for (int s = 0; s < mesh; ++s) {
        const double* fs = fine.samples.data() + static_cast<std::size_t>(s) * m;
        const double* cs = interp.data() + static_cast<std::size_t>(s) * m;
        for (int t = s + 1; t <= mesh; ++t) {
            const double* ft = fine.samples.data() + static_cast<std::size_t>(t) * m;
            const double* ct = interp.data() + static_cast<std::size_t>(t) * m;
            double dpath = 0.0;
            double ddiff = 0.0;
            for (int i = 0; i < m; ++i) {
                const double df = ft[i] - fs[i];
                const double dd = df - (ct[i] - cs[i]);
                dpath += df * df;
                ddiff += dd * dd;
            }
            double darea = 0.0;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    const double d = area_fine.value(s, t, i, j) - area_coarse.value(s, t, i, j);
                    darea += d * d;
                }
            const double wp = w2g[static_cast<std::size_t>(t - s)];
            const double wa = w4g[static_cast<std::size_t>(t - s)];
            if (dpath * wp > best_path) best_path = dpath * wp;
            if (ddiff * wp > best_diff) best_diff = ddiff * wp;
            if (darea * wa > best_area) best_area = darea * wa;
        }
    }

    RoughnessReport rep;
    rep.gamma = gamma;
    rep.holder_norm = std::sqrt(best_path);
    rep.u = std::sqrt(best_diff);
    rep.v = rep.u + std::sqrt(best_area);
    return rep;
}

}  // namespace rheat

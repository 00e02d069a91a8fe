#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rheat/fft.hpp"
#include "rheat/rng.hpp"

namespace rheat {

/// Sampled multi-component rough signal on the uniform partition t_k = k/mesh,
/// k = 0..mesh. Paths start at zero. Row-major storage: samples[k*components + i].
struct DriverPath {
    std::vector<double> samples;
    int mesh = 0;
    int components = 1;
    double hurst = 0.5;
    std::uint64_t seed = 0;

    double value(int k, int i) const {
        return samples[static_cast<std::size_t>(k) * components + static_cast<std::size_t>(i)];
    }
    double increment(int k, int i) const { return value(k + 1, i) - value(k, i); }
    double time(int k) const { return static_cast<double>(k) / mesh; }
    bool dyadic() const { return mesh >= 1 && (mesh & (mesh - 1)) == 0; }

    bool all_finite() const {
        for (double x : samples)
            if (!std::isfinite(x)) return false;
        return true;
    }

    std::uint64_t digest() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto absorb = [&h](std::uint64_t v) {
            for (int b = 0; b < 8; ++b) {
                h ^= (v >> (8 * b)) & 0xff;
                h *= 0x100000001b3ULL;
            }
        };
        absorb(static_cast<std::uint64_t>(mesh));
        absorb(static_cast<std::uint64_t>(components));
        absorb(std::bit_cast<std::uint64_t>(hurst));
        for (double x : samples) absorb(std::bit_cast<std::uint64_t>(x));
        return h;
    }
};

namespace detail {

// Autocovariance of fractional Gaussian noise at grid spacing 1/mesh:
// gamma(k) = (1/2) (1/mesh)^{2H} (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}).
inline std::vector<double> fgn_autocov(double hurst, int mesh, int max_lag) {
    std::vector<double> g(static_cast<std::size_t>(max_lag) + 1);
    const double scale = std::pow(1.0 / mesh, 2.0 * hurst);
    g[0] = scale;
    for (int k = 1; k <= max_lag; ++k) {
        const double a = std::pow(static_cast<double>(k + 1), 2.0 * hurst);
        const double b = std::pow(static_cast<double>(k), 2.0 * hurst);
        const double c = std::pow(static_cast<double>(k - 1), 2.0 * hurst);
        g[static_cast<std::size_t>(k)] = 0.5 * scale * (a - 2.0 * b + c);
    }
    return g;
}

// Exact fGn sample of length M via circulant embedding (Davies-Harte).
// Returns false if the embedding of the given half-length is not
// nonnegative-definite; the caller retries with a doubled embedding.
inline bool fgn_circulant_try(double hurst, int mesh, int m_out, std::size_t half,
                              CounterRng& rng, std::vector<double>& out) {
    const std::size_t len = 2 * half;
    const auto gamma = fgn_autocov(hurst, mesh, static_cast<int>(half));

    std::vector<std::complex<double>> c(len);
    for (std::size_t j = 0; j <= half; ++j) c[j] = gamma[j];
    for (std::size_t j = 1; j < half; ++j) c[len - j] = gamma[j];
    fft_inplace(c);

    double max_eig = 0.0;
    double min_eig = 0.0;
    for (const auto& e : c) {
        max_eig = std::max(max_eig, e.real());
        min_eig = std::min(min_eig, e.real());
    }
    if (min_eig < -1e-8 * max_eig) return false;

    std::vector<std::complex<double>> w(len);
    const double inv_len = 1.0 / static_cast<double>(len);
    w[0] = std::sqrt(std::max(0.0, c[0].real()) * inv_len) * rng.normal();
    for (std::size_t j = 1; j < half; ++j) {
        const double s = std::sqrt(std::max(0.0, c[j].real()) * inv_len * 0.5);
        const double a = rng.normal();
        const double b = rng.normal();
        w[j] = std::complex<double>(s * a, s * b);
        w[len - j] = std::conj(w[j]);
    }
    w[half] = std::sqrt(std::max(0.0, c[half].real()) * inv_len) * rng.normal();

    fft_inplace(w);
    out.resize(static_cast<std::size_t>(m_out));
    for (int k = 0; k < m_out; ++k) out[static_cast<std::size_t>(k)] = w[static_cast<std::size_t>(k)].real();
    return true;
}

// Dense Cholesky of the fGn covariance. O(M^3); always valid. Only reached
// if every circulant embedding attempt fails.
inline std::vector<double> fgn_cholesky(double hurst, int mesh, int m_out, CounterRng& rng) {
    const std::size_t n = static_cast<std::size_t>(m_out);
    const auto gamma = fgn_autocov(hurst, mesh, m_out - 1);
    std::vector<double> chol(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = gamma[i - j];
            for (std::size_t k = 0; k < j; ++k) s -= chol[i * n + k] * chol[j * n + k];
            if (i == j) {
                if (s <= 0.0) throw std::runtime_error("fgn_cholesky: covariance not positive definite");
                chol[i * n + i] = std::sqrt(s);
            } else {
                chol[i * n + j] = s / chol[j * n + j];
            }
        }
    }
    std::vector<double> z(n);
    for (auto& v : z) v = rng.normal();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j <= i; ++j) s += chol[i * n + j] * z[j];
        out[i] = s;
    }
    return out;
}

inline std::vector<double> fgn_sample(double hurst, int mesh, int m_out, CounterRng& rng) {
    std::size_t half = std::bit_ceil(static_cast<std::size_t>(m_out));
    std::vector<double> out;
    for (int attempt = 0; attempt < 4; ++attempt) {
        if (fgn_circulant_try(hurst, mesh, m_out, half, rng, out)) return out;
        half *= 2;
    }
    return fgn_cholesky(hurst, mesh, m_out, rng);
}

}  // namespace detail

/// Sample an m-component fractional Brownian motion on t_k = k/mesh with the
/// exact covariance  E[x_s x_t] = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2.
/// Deterministic given (seed, component): each component owns a keyed stream.
inline DriverPath sample_fbm(double hurst, int mesh, int components, std::uint64_t seed) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("sample_fbm: hurst must be in (0,1)");
    if (mesh < 1) throw std::invalid_argument("sample_fbm: mesh must be >= 1");
    if (components < 1) throw std::invalid_argument("sample_fbm: components must be >= 1");

    DriverPath p;
    p.mesh = mesh;
    p.components = components;
    p.hurst = hurst;
    p.seed = seed;
    p.samples.assign(static_cast<std::size_t>(mesh + 1) * components, 0.0);
    for (int i = 0; i < components; ++i) {
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        const auto incr = detail::fgn_sample(hurst, mesh, mesh, rng);
        double acc = 0.0;
        for (int k = 0; k < mesh; ++k) {
            acc += incr[static_cast<std::size_t>(k)];
            p.samples[static_cast<std::size_t>(k + 1) * components + static_cast<std::size_t>(i)] = acc;
        }
    }
    return p;
}

/// Exact restriction of a path to a nested coarser mesh.
inline DriverPath restrict_mesh(const DriverPath& fine, int coarse_mesh) {
    if (coarse_mesh < 1 || fine.mesh % coarse_mesh != 0)
        throw std::invalid_argument("restrict_mesh: coarse mesh must divide the fine mesh");
    const int stride = fine.mesh / coarse_mesh;
    DriverPath p;
    p.mesh = coarse_mesh;
    p.components = fine.components;
    p.hurst = fine.hurst;
    p.seed = fine.seed;
    p.samples.resize(static_cast<std::size_t>(coarse_mesh + 1) * fine.components);
    for (int k = 0; k <= coarse_mesh; ++k)
        for (int i = 0; i < fine.components; ++i)
            p.samples[static_cast<std::size_t>(k) * fine.components + static_cast<std::size_t>(i)] =
                fine.value(k * stride, i);
    return p;
}

/// Piecewise-linear interpolation x^M_t; exact at grid points.
inline std::vector<double> interpolate(const DriverPath& p, double t) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("interpolate: t must lie in [0,1]");
    std::vector<double> out(static_cast<std::size_t>(p.components));
    if (t >= 1.0) {
        for (int i = 0; i < p.components; ++i) out[static_cast<std::size_t>(i)] = p.value(p.mesh, i);
        return out;
    }
    const double scaled = t * p.mesh;
    const int k = static_cast<int>(scaled);
    const double frac = scaled - k;
    for (int i = 0; i < p.components; ++i)
        out[static_cast<std::size_t>(i)] = p.value(k, i) + frac * (p.value(k + 1, i) - p.value(k, i));
    return out;
}

}  // namespace rheat

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rheat/spectral.hpp"

namespace rheat {

namespace detail {

// Both weights are functions of z = lambda * h alone:
//   w1(z) = (1 - e^{-z}) / z         = (1/h) int_0^h e^{-lambda (h-v)} dv
//   w2(z) = (z - 1 + e^{-z}) / z^2   = (1/h^2) int_0^h e^{-lambda (h-v)} v dv
// The closed forms cancel catastrophically as z -> 0; below the threshold a
// 5-term Taylor series is used instead.
inline constexpr double kernel_series_threshold = 1e-4;

inline double w1_of_z(double z) {
    if (z < kernel_series_threshold) {
        return 1.0 + z * (-1.0 / 2.0 + z * (1.0 / 6.0 + z * (-1.0 / 24.0 + z * (1.0 / 120.0))));
    }
    return -std::expm1(-z) / z;
}

inline double w2_of_z(double z) {
    if (z < kernel_series_threshold) {
        return 1.0 / 2.0 + z * (-1.0 / 6.0 + z * (1.0 / 24.0 + z * (-1.0 / 120.0 + z * (1.0 / 720.0))));
    }
    return (z + std::expm1(-z)) / (z * z);
}

}  // namespace detail

/// First-order weight: the mode-l diagonal of M int_{t_k}^{t_{k+1}} S_{t_{k+1} u} du,
/// normalized by the step. Limit 1 as lambda h -> 0.
inline double weight1(double lambda, double h) {
    if (lambda < 0.0 || h <= 0.0) throw std::invalid_argument("weight1: need lambda >= 0, h > 0");
    return detail::w1_of_z(lambda * h);
}

/// Second-order weight: the mode-l diagonal of
/// M^2 int_{t_k}^{t_{k+1}} S_{t_{k+1} u} du (u - t_k). Limit 1/2 as lambda h -> 0.
inline double weight2(double lambda, double h) {
    if (lambda < 0.0 || h <= 0.0) throw std::invalid_argument("weight2: need lambda >= 0, h > 0");
    return detail::w2_of_z(lambda * h);
}

/// Per-mode exponential-integrator coefficients for one (h, N, kappa) triple.
/// The kappa time-rescaling is folded into the step before evaluation
/// (step = kappa * h), so a table is valid for exactly one clock.
struct KernelWeights {
    std::vector<double> decay;  // e^{-lambda_l * step}
    std::vector<double> w1;
    std::vector<double> w2;
    double step = 0.0;          // kappa-rescaled time step
    int dim = 0;

    static KernelWeights compute(const Eigensystem& sys, double h) {
        if (h <= 0.0) throw std::invalid_argument("KernelWeights: h must be > 0");
        KernelWeights k;
        k.dim = sys.dim;
        k.step = sys.time_scale * h;
        k.decay.resize(static_cast<std::size_t>(sys.dim));
        k.w1.resize(static_cast<std::size_t>(sys.dim));
        k.w2.resize(static_cast<std::size_t>(sys.dim));
        for (int l = 1; l <= sys.dim; ++l) {
            const double z = Eigensystem::lambda(l) * k.step;
            k.decay[static_cast<std::size_t>(l - 1)] = std::exp(-z);
            k.w1[static_cast<std::size_t>(l - 1)] = detail::w1_of_z(z);
            k.w2[static_cast<std::size_t>(l - 1)] = detail::w2_of_z(z);
        }
        return k;
    }
};

}  // namespace rheat

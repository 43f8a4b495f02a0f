#pragma once

// Test-only reference implementation of the leave-one-out conditional ISE:
// explicit loops, trapezoid quadrature on a fine grid, no sharing with the
// library's evaluation path.

#include <cmath>
#include <cstddef>
#include <vector>

#include "ecopf/kernel.hpp"

namespace ecopf::testsupport {

inline double beta_kernel_ref(double z, double u, double h) {
    const double a = u / h + 1.0;
    const double b = (1.0 - u) / h + 1.0;
    return std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    (a - 1.0) * std::log(z) + (b - 1.0) * std::log(1.0 - z));
}

/// Unnormalized conditional accumulator at target coordinate u, optionally
/// leaving one sample out.
inline double raw_conditional_ref(const CopulaData& data, const Bandwidths& h, double u,
                                  const std::vector<double>& cond, std::ptrdiff_t skip) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.rows; ++i) {
        if (static_cast<std::ptrdiff_t>(i) == skip) continue;
        double prod = beta_kernel_ref(data.at(i, 0), u, h.h[0]);
        for (std::size_t j = 0; j + 1 < data.cols; ++j) {
            prod *= beta_kernel_ref(data.at(i, j + 1), cond[j], h.h[j + 1]);
        }
        total += prod;
    }
    return total;
}

inline double trapezoid(const std::vector<double>& f) {
    const std::size_t n = f.size();
    double acc = 0.5 * (f.front() + f.back());
    for (std::size_t k = 1; k + 1 < n; ++k) acc += f[k];
    return acc / static_cast<double>(n - 1);
}

/// Reference ISE objective with `fine` trapezoid knots on [eps, 1-eps].
inline double ise_objective_ref(const Bandwidths& h, const CopulaData& data,
                                const std::vector<double>& conditioning, std::size_t fine) {
    const std::size_t m = data.rows;
    const double eps = 1e-9; // avoid the open-interval endpoints

    const auto knot = [&](std::size_t k) {
        return eps + (1.0 - 2.0 * eps) * static_cast<double>(k) / static_cast<double>(fine - 1);
    };

    // first term: normalized squared density at the forecast conditioning
    std::vector<double> raw(fine), raw_sq(fine);
    for (std::size_t k = 0; k < fine; ++k) {
        raw[k] = raw_conditional_ref(data, h, knot(k), conditioning, -1);
    }
    const double z = trapezoid(raw);
    for (std::size_t k = 0; k < fine; ++k) {
        const double c = raw[k] / z;
        raw_sq[k] = c * c;
    }
    const double term1 = trapezoid(raw_sq);

    // second term: average leave-one-out density at the held-out coordinates
    double loo = 0.0;
    std::vector<double> raw_i(fine);
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> cond_i(data.cols - 1);
        for (std::size_t j = 0; j + 1 < data.cols; ++j) cond_i[j] = data.at(i, j + 1);
        for (std::size_t k = 0; k < fine; ++k) {
            raw_i[k] = raw_conditional_ref(data, h, knot(k), cond_i,
                                           static_cast<std::ptrdiff_t>(i));
        }
        const double z_i = trapezoid(raw_i);
        if (z_i > 0.0) {
            loo += raw_conditional_ref(data, h, data.at(i, 0), cond_i,
                                       static_cast<std::ptrdiff_t>(i)) /
                   z_i;
        }
    }
    return term1 - 2.0 / static_cast<double>(m) * loo;
}

} // namespace ecopf::testsupport

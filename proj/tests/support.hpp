#pragma once

#include <cmath>
#include <vector>

#include "ecopf/kernel.hpp"
#include "ecopf/ranking.hpp"
#include "ecopf/rng.hpp"

namespace ecopf::testsupport {

/// Pseudo-observations from independent uniforms, one rank set per column.
inline CopulaData independent_copula(std::size_t m, std::size_t dims, std::uint64_t seed) {
    std::vector<std::vector<double>> columns(dims);
    for (std::size_t j = 0; j < dims; ++j) {
        const CounterRng rng(seed, j + 1);
        std::vector<double> raw(m);
        for (std::size_t i = 0; i < m; ++i) raw[i] = rng.uniform_at(i);
        columns[j] = rank_transform(raw);
    }
    return CopulaData::from_columns(columns);
}

/// Dependent sample: every column is a noisy copy of a shared latent factor;
/// noise=0 gives a perfectly comonotone copula.
inline CopulaData dependent_copula(std::size_t m, std::size_t dims, double noise,
                                   std::uint64_t seed) {
    const CounterRng latent(seed, 0);
    std::vector<double> factor(m);
    for (std::size_t i = 0; i < m; ++i) factor[i] = latent.uniform_at(i);

    std::vector<std::vector<double>> columns(dims);
    for (std::size_t j = 0; j < dims; ++j) {
        const CounterRng rng(seed, 100 + j);
        std::vector<double> raw(m);
        for (std::size_t i = 0; i < m; ++i) {
            raw[i] = factor[i] + noise * (rng.uniform_at(i) - 0.5);
        }
        columns[j] = rank_transform(raw);
    }
    return CopulaData::from_columns(columns);
}

/// Direct scalar transcription of the beta-density formula (test oracle).
inline double beta_pdf_reference(double z, double a, double b) {
    return std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b)) * std::pow(z, a - 1.0) *
           std::pow(1.0 - z, b - 1.0);
}

} // namespace ecopf::testsupport

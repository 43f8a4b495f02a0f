#pragma once

#include <cstddef>
#include <vector>

namespace ecopf {

/// Per-dimension smoothing scale of the beta kernels, in rank space.
struct Bandwidths {
    std::vector<double> h;

    std::size_t dims() const { return h.size(); }
    static Bandwidths uniform(std::size_t d, double value) {
        return Bandwidths{std::vector<double>(d, value)};
    }
};

/// m x D matrix of rank-space pseudo-observations, row-major.
/// Every entry must lie strictly inside (0,1).
struct CopulaData {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> entries;

    double at(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
    static CopulaData from_columns(const std::vector<std::vector<double>>& columns);
};

/// Density evaluated at the L midpoints u_l = (l - 0.5)/L of (0,1),
/// normalized so the midpoint-rule integral equals 1.
struct GridDensity {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double point(std::size_t l) const {
        return (static_cast<double>(l) + 0.5) / static_cast<double>(values.size());
    }
    /// Midpoint-rule integral (1 after normalization).
    double integral() const;
    /// Rank-space quantile of the grid CDF, piecewise linear within cells.
    double quantile(double alpha) const;
    /// Grid CDF evaluated at rank u.
    double cdf(double u) const;
};

/// Joint density on the D-dimensional tensor grid (first index slowest).
struct GridTensor {
    std::size_t dims = 0;
    std::size_t grid_size = 0;
    std::vector<double> values;

    double at(const std::vector<std::size_t>& idx) const;
};

/// Result of conditional density estimation with the underflow diagnostic.
struct ConditionalResult {
    GridDensity density;
    bool underflow_fallback = false;
};

/// Beta density with shape parameters alpha, beta > 0, computed in log space.
double beta_pdf(double z, double alpha, double beta);
double beta_log_pdf(double z, double alpha, double beta);

/// Step-function copula estimate C(u) = (1/m) sum_i prod_j 1{r_ij <= u_j}.
double empirical_copula_cdf(const CopulaData& data, const std::vector<double>& u);

/// Beta-kernel estimate of the joint copula density on the tensor grid,
/// renormalized so the midpoint-rule integral over the unit cube is 1.
/// Restricted to D <= 3; the cost grows as L^D * m * D.
GridTensor joint_density(const CopulaData& data, const Bandwidths& h, std::size_t grid_size);

/// Beta-kernel estimate of the density of the first variable given fixed
/// rank-space values of the remaining D-1 variables. When the conditioning
/// point is so far from all samples that every weight underflows, falls back
/// to the unconditional density of the target column and flags it.
ConditionalResult conditional_density(const CopulaData& data, const Bandwidths& h,
                                      const std::vector<double>& fixed, std::size_t grid_size);

/// Unnormalized kernel sum over the grid (true scale). Linear in the data:
/// concatenating two samples adds their accumulators. Exposed for testing;
/// extreme bandwidths may underflow the true scale.
std::vector<double> conditional_accumulator(const CopulaData& data, const Bandwidths& h,
                                            const std::vector<double>& fixed,
                                            std::size_t grid_size);

} // namespace ecopf

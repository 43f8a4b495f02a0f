#pragma once

#include <cstddef>
#include <vector>

namespace ecopf {

/// One variable's link between physical space and rank (copula) space.
/// Stores the ascending physical values; the implicit rank of the i-th
/// sorted value is (i+1)/(m+1), so the rank knots never need storing.
struct RankColumn {
    std::vector<double> physical_sorted;

    std::size_t size() const { return physical_sorted.size(); }
    /// Rank knot of the k-th sorted value (k is 0-based).
    double rank_at(std::size_t k) const {
        return static_cast<double>(k + 1) / static_cast<double>(physical_sorted.size() + 1);
    }
};

/// Normalized ordinal ranks rank(x_i)/(m+1) in input order. Ties are broken
/// by first occurrence, so the output is always a permutation of
/// {1/(m+1), ..., m/(m+1)}.
std::vector<double> rank_transform(const std::vector<double>& values);

/// Build the sorted back-reference column for a physical sample.
RankColumn make_rank_column(const std::vector<double>& values);

/// Empirical-CDF position of a fresh physical value among the column's
/// historical values, linearly interpolated between adjacent rank knots and
/// clamped to [1/(m+1), m/(m+1)].
double pseudo_rank(double new_value, const RankColumn& column);

/// Piecewise-linear empirical quantile: interpolates physical values between
/// the rank knots i/(m+1); flat beyond the extremes.
double inverse_rank(double u, const RankColumn& column);

} // namespace ecopf

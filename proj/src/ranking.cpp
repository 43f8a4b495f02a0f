#include "ecopf/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecopf/errors.hpp"

namespace ecopf {

namespace {

void check_finite(const std::vector<double>& values) {
    for (double v : values) {
        if (!std::isfinite(v)) throw DataError("non-finite input");
    }
}

} // namespace

std::vector<double> rank_transform(const std::vector<double>& values) {
    const std::size_t m = values.size();
    if (m == 0) throw DataError("empty sample");
    check_finite(values);

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    // stable sort on value keeps first occurrence of a tie at the lower rank
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(m);
    const double denom = static_cast<double>(m + 1);
    for (std::size_t pos = 0; pos < m; ++pos) {
        ranks[order[pos]] = static_cast<double>(pos + 1) / denom;
    }
    return ranks;
}

RankColumn make_rank_column(const std::vector<double>& values) {
    if (values.empty()) throw DataError("empty sample");
    check_finite(values);
    RankColumn col;
    col.physical_sorted = values;
    std::sort(col.physical_sorted.begin(), col.physical_sorted.end());
    return col;
}

double pseudo_rank(double new_value, const RankColumn& column) {
    if (column.size() == 0) throw DataError("empty sample");
    if (!std::isfinite(new_value)) throw DataError("non-finite input");

    const auto& xs = column.physical_sorted;
    const std::size_t m = xs.size();

    if (new_value <= xs.front()) return column.rank_at(0);
    if (new_value >= xs.back()) {
        // exact match with the last value still maps to its own knot
        auto it = std::lower_bound(xs.begin(), xs.end(), new_value);
        if (it != xs.end() && *it == new_value) {
            return column.rank_at(static_cast<std::size_t>(it - xs.begin()));
        }
        return column.rank_at(m - 1);
    }

    auto it = std::lower_bound(xs.begin(), xs.end(), new_value);
    const std::size_t k = static_cast<std::size_t>(it - xs.begin());
    if (*it == new_value) return column.rank_at(k);

    // strictly between xs[k-1] and xs[k]
    const double x_lo = xs[k - 1];
    const double x_hi = xs[k];
    const double r_lo = column.rank_at(k - 1);
    const double r_hi = column.rank_at(k);
    const double t = (new_value - x_lo) / (x_hi - x_lo);
    return r_lo + t * (r_hi - r_lo);
}

double inverse_rank(double u, const RankColumn& column) {
    if (column.size() == 0) throw DataError("empty sample");
    if (!(u > 0.0 && u < 1.0)) throw DataError("rank outside (0,1)");

    const auto& xs = column.physical_sorted;
    const std::size_t m = xs.size();
    const double denom = static_cast<double>(m + 1);

    const double pos = u * denom; // knot index + 1 in continuous coordinates

    // exact knot hit: return the stored physical value bit-for-bit, so
    // inverse_rank(pseudo_rank(v)) round-trips unique historical values
    const long j = std::lround(pos) - 1;
    if (j >= 0 && j < static_cast<long>(m) && u == column.rank_at(static_cast<std::size_t>(j))) {
        return xs[static_cast<std::size_t>(j)];
    }

    if (pos <= 1.0) return xs.front();
    if (pos >= static_cast<double>(m)) return xs.back();

    const auto k = static_cast<std::size_t>(pos); // 1-based index of the lower knot
    const double t = pos - static_cast<double>(k);
    return xs[k - 1] + t * (xs[k] - xs[k - 1]);
}

} // namespace ecopf

#include "ecopf/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ecopf/errors.hpp"

namespace ecopf {

namespace {

constexpr double kLogTrueZero = -708.0; // below this, exp() underflows to 0

void validate_bandwidths(const Bandwidths& h, std::size_t expected_dims) {
    if (h.dims() != expected_dims) throw DataError("bandwidth dimension mismatch");
    for (double v : h.h) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DataError("bandwidth must be positive");
    }
}

void validate_data(const CopulaData& data) {
    if (data.rows == 0 || data.cols == 0) throw DataError("empty sample");
    for (double v : data.entries) {
        if (!(v > 0.0 && v < 1.0)) throw DataError("pseudo-observation outside (0,1)");
    }
}

/// Per-dimension beta-kernel table: shape parameters depend only on the
/// evaluation point u, so lgamma terms are shared across samples.
struct BetaKernelDim {
    double inv_h = 0.0;
    double lg_sum = 0.0; // lgamma(1/h + 2), constant along the dimension

    explicit BetaKernelDim(double h) : inv_h(1.0 / h), lg_sum(std::lgamma(1.0 / h + 2.0)) {}

    /// log K(z, u/h + 1, (1-u)/h + 1)
    double log_kernel(double z, double u) const {
        const double a = u * inv_h + 1.0;
        const double b = (1.0 - u) * inv_h + 1.0;
        return lg_sum - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(z) +
               (b - 1.0) * std::log1p(-z);
    }
};

/// log-kernel matrix of the target dimension over the grid: lk[l*m + i].
std::vector<double> target_log_kernels(const CopulaData& data, double h, std::size_t L) {
    const std::size_t m = data.rows;
    const BetaKernelDim dim(h);

    std::vector<double> log_z(m), log_1mz(m);
    for (std::size_t i = 0; i < m; ++i) {
        log_z[i] = std::log(data.at(i, 0));
        log_1mz[i] = std::log1p(-data.at(i, 0));
    }

    std::vector<double> lk(L * m);
    for (std::size_t l = 0; l < L; ++l) {
        const double u = (static_cast<double>(l) + 0.5) / static_cast<double>(L);
        const double a = u * dim.inv_h + 1.0;
        const double b = (1.0 - u) * dim.inv_h + 1.0;
        const double lg = dim.lg_sum - std::lgamma(a) - std::lgamma(b);
        for (std::size_t i = 0; i < m; ++i) {
            lk[l * m + i] = lg + (a - 1.0) * log_z[i] + (b - 1.0) * log_1mz[i];
        }
    }
    return lk;
}

/// Per-sample log weight from the conditioning dimensions (columns 1..D-1).
std::vector<double> conditioning_log_weights(const CopulaData& data, const Bandwidths& h,
                                             const std::vector<double>& fixed) {
    const std::size_t m = data.rows;
    std::vector<double> lw(m, 0.0);
    for (std::size_t j = 0; j < fixed.size(); ++j) {
        if (!(fixed[j] > 0.0 && fixed[j] < 1.0)) {
            throw DataError("conditioning value outside (0,1)");
        }
        const BetaKernelDim dim(h.h[j + 1]);
        for (std::size_t i = 0; i < m; ++i) {
            lw[i] += dim.log_kernel(data.at(i, j + 1), fixed[j]);
        }
    }
    return lw;
}

/// Shift-stable grid sums: out[l] = sum_i exp(lw[i] + lk[l*m+i] - shift).
/// Summation order over samples is fixed (i = 0..m-1) so results do not
/// depend on parallelism.
std::vector<double> accumulate_shifted(const std::vector<double>& lw, const std::vector<double>& lk,
                                       std::size_t L, std::size_t m, double shift) {
    std::vector<double> out(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        double acc = 0.0;
        const double* row = lk.data() + l * m;
        for (std::size_t i = 0; i < m; ++i) {
            acc += std::exp(lw[i] + row[i] - shift);
        }
        out[l] = acc;
    }
    return out;
}

double max_exponent(const std::vector<double>& lw, const std::vector<double>& lk, std::size_t L,
                    std::size_t m) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < L; ++l) {
        const double* row = lk.data() + l * m;
        for (std::size_t i = 0; i < m; ++i) {
            best = std::max(best, lw[i] + row[i]);
        }
    }
    return best;
}

GridDensity normalize_midpoint(std::vector<double> raw) {
    const std::size_t L = raw.size();
    double sum = 0.0;
    for (double v : raw) sum += v;
    if (!(sum > 0.0) || !std::isfinite(sum)) {
        throw NumericalError("density normalizer is zero or non-finite");
    }
    const double scale = static_cast<double>(L) / sum;
    for (double& v : raw) v *= scale;
    return GridDensity{std::move(raw)};
}

/// Unconditional marginal of the target column (no conditioning weights).
GridDensity marginal_density(const CopulaData& data, double h, std::size_t L) {
    const std::vector<double> lk = target_log_kernels(data, h, L);
    const std::vector<double> lw(data.rows, 0.0);
    const double shift = max_exponent(lw, lk, L, data.rows);
    if (!std::isfinite(shift)) throw NumericalError("marginal density underflow");
    return normalize_midpoint(accumulate_shifted(lw, lk, L, data.rows, shift));
}

} // namespace

CopulaData CopulaData::from_columns(const std::vector<std::vector<double>>& columns) {
    if (columns.empty() || columns.front().empty()) throw DataError("empty sample");
    CopulaData data;
    data.rows = columns.front().size();
    data.cols = columns.size();
    data.entries.resize(data.rows * data.cols);
    for (std::size_t j = 0; j < data.cols; ++j) {
        if (columns[j].size() != data.rows) throw DataError("ragged column lengths");
        for (std::size_t i = 0; i < data.rows; ++i) {
            data.entries[i * data.cols + j] = columns[j][i];
        }
    }
    return data;
}

double GridDensity::integral() const {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double GridDensity::quantile(double alpha) const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DataError("quantile level outside [0,1]");
    const std::size_t L = values.size();
    const double cell = 1.0 / static_cast<double>(L);
    double cum = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        const double mass = values[l] * cell;
        if (cum + mass >= alpha || l + 1 == L) {
            const double within = mass > 0.0 ? (alpha - cum) / mass : 0.5;
            const double t = std::clamp(within, 0.0, 1.0);
            return (static_cast<double>(l) + t) * cell;
        }
        cum += mass;
    }
    return 1.0 - 0.5 * cell; // unreachable
}

double GridDensity::cdf(double u) const {
    const std::size_t L = values.size();
    const double cell = 1.0 / static_cast<double>(L);
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const auto full = static_cast<std::size_t>(u * static_cast<double>(L));
    double cum = 0.0;
    for (std::size_t l = 0; l < full; ++l) cum += values[l] * cell;
    if (full < L) cum += values[full] * (u - static_cast<double>(full) * cell);
    return std::min(cum, 1.0);
}

double GridTensor::at(const std::vector<std::size_t>& idx) const {
    std::size_t flat = 0;
    for (std::size_t d = 0; d < dims; ++d) flat = flat * grid_size + idx[d];
    return values[flat];
}

double beta_log_pdf(double z, double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw DataError("beta shape parameters must be positive");
    if (!(z >= 0.0 && z <= 1.0)) throw DataError("beta evaluation point outside [0,1]");
    const double lg = std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta);
    if (z == 0.0) {
        if (alpha > 1.0) return -std::numeric_limits<double>::infinity();
        if (alpha == 1.0) return lg;
        return std::numeric_limits<double>::infinity();
    }
    if (z == 1.0) {
        if (beta > 1.0) return -std::numeric_limits<double>::infinity();
        if (beta == 1.0) return lg;
        return std::numeric_limits<double>::infinity();
    }
    return lg + (alpha - 1.0) * std::log(z) + (beta - 1.0) * std::log1p(-z);
}

double beta_pdf(double z, double alpha, double beta) {
    return std::exp(beta_log_pdf(z, alpha, beta));
}

double empirical_copula_cdf(const CopulaData& data, const std::vector<double>& u) {
    validate_data(data);
    if (u.size() != data.cols) throw DataError("dimension mismatch");
    std::size_t count = 0;
    for (std::size_t i = 0; i < data.rows; ++i) {
        bool inside = true;
        for (std::size_t j = 0; j < data.cols; ++j) {
            if (data.at(i, j) > u[j]) {
                inside = false;
                break;
            }
        }
        count += inside ? 1 : 0;
    }
    return static_cast<double>(count) / static_cast<double>(data.rows);
}

GridTensor joint_density(const CopulaData& data, const Bandwidths& h, std::size_t grid_size) {
    validate_data(data);
    validate_bandwidths(h, data.cols);
    const std::size_t D = data.cols;
    const std::size_t m = data.rows;
    const std::size_t L = grid_size;
    if (D > 3) throw DataError("joint density restricted to D <= 3");
    if (L == 0) throw DataError("grid size must be positive");

    // per-dimension L x m log-kernel tables
    std::vector<std::vector<double>> lk(D);
    for (std::size_t j = 0; j < D; ++j) {
        const BetaKernelDim dim(h.h[j]);
        lk[j].resize(L * m);
        for (std::size_t l = 0; l < L; ++l) {
            const double u = (static_cast<double>(l) + 0.5) / static_cast<double>(L);
            for (std::size_t i = 0; i < m; ++i) {
                lk[j][l * m + i] = dim.log_kernel(data.at(i, j), u);
            }
        }
    }

    std::size_t cells = 1;
    for (std::size_t j = 0; j < D; ++j) cells *= L;

    GridTensor tensor;
    tensor.dims = D;
    tensor.grid_size = L;
    tensor.values.assign(cells, 0.0);

    // log(1/A) with A = m * prod h_j; the constant cancels in the final
    // renormalization but keeps intermediate values near the estimator scale
    double log_inv_a = -std::log(static_cast<double>(m));
    for (std::size_t j = 0; j < D; ++j) log_inv_a -= std::log(h.h[j]);

    std::vector<std::size_t> idx(D, 0);
    double total = 0.0;
    for (std::size_t flat = 0; flat < cells; ++flat) {
        double shift = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            double e = 0.0;
            for (std::size_t j = 0; j < D; ++j) e += lk[j][idx[j] * m + i];
            shift = std::max(shift, e);
        }
        double acc = 0.0;
        if (std::isfinite(shift)) {
            for (std::size_t i = 0; i < m; ++i) {
                double e = 0.0;
                for (std::size_t j = 0; j < D; ++j) e += lk[j][idx[j] * m + i];
                acc += std::exp(e - shift);
            }
            const double log_value = log_inv_a + shift + std::log(acc);
            acc = log_value > kLogTrueZero ? std::exp(log_value) : 0.0;
        }
        tensor.values[flat] = acc;
        total += acc;

        for (std::size_t j = D; j-- > 0;) {
            if (++idx[j] < L) break;
            idx[j] = 0;
        }
    }

    if (!(total > 0.0) || !std::isfinite(total)) {
        throw NumericalError("joint density normalizer is zero or non-finite");
    }
    const double scale = static_cast<double>(cells) / total;
    for (double& v : tensor.values) v *= scale;
    return tensor;
}

ConditionalResult conditional_density(const CopulaData& data, const Bandwidths& h,
                                      const std::vector<double>& fixed, std::size_t grid_size) {
    validate_data(data);
    validate_bandwidths(h, data.cols);
    if (fixed.size() + 1 != data.cols) throw DataError("conditioning dimension mismatch");
    if (grid_size == 0) throw DataError("grid size must be positive");

    const std::size_t m = data.rows;
    const std::size_t L = grid_size;

    const std::vector<double> lw = conditioning_log_weights(data, h, fixed);
    const double max_lw = *std::max_element(lw.begin(), lw.end());

    // all conditioning weights underflow in true scale: the conditioning
    // point carries no usable information, use the unconditional marginal
    if (max_lw < kLogTrueZero) {
        return ConditionalResult{marginal_density(data, h.h[0], L), true};
    }

    const std::vector<double> lk = target_log_kernels(data, h.h[0], L);
    const double shift = max_exponent(lw, lk, L, m);
    if (!std::isfinite(shift)) {
        return ConditionalResult{marginal_density(data, h.h[0], L), true};
    }
    return ConditionalResult{normalize_midpoint(accumulate_shifted(lw, lk, L, m, shift)), false};
}

std::vector<double> conditional_accumulator(const CopulaData& data, const Bandwidths& h,
                                            const std::vector<double>& fixed,
                                            std::size_t grid_size) {
    validate_data(data);
    validate_bandwidths(h, data.cols);
    if (fixed.size() + 1 != data.cols) throw DataError("conditioning dimension mismatch");

    const std::size_t m = data.rows;
    const std::size_t L = grid_size;
    const std::vector<double> lw = conditioning_log_weights(data, h, fixed);
    const std::vector<double> lk = target_log_kernels(data, h.h[0], L);

    std::vector<double> raw(L, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            acc += std::exp(lw[i] + lk[l * m + i]);
        }
        raw[l] = acc;
    }
    return raw;
}

} // namespace ecopf

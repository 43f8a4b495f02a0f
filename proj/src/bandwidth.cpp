#include "ecopf/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include "ecopf/errors.hpp"
#include "ecopf/metrics.hpp"
#include "ecopf/optimize.hpp"

namespace ecopf {

namespace {

constexpr double kLogTrueZero = -708.0;
constexpr double kUnderflowPenalty = 1e100; // degenerate h: true ISE diverges

double logsumexp(const std::vector<double>& terms) {
    double shift = -std::numeric_limits<double>::infinity();
    for (double t : terms) shift = std::max(shift, t);
    if (!std::isfinite(shift)) return shift;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - shift);
    return shift + std::log(acc);
}

/// Per-dimension tables for kernels evaluated at every sample's own rank:
/// lg[i] carries the shape-parameter terms of evaluation point data(i,dim),
/// so log K(data(j,dim); data(i,dim)) = lg[i] + (a[i]-1)lz[j] + (b[i]-1)l1z[j].
struct PairwiseKernelDim {
    std::vector<double> a, b, lg, lz, l1z;

    PairwiseKernelDim(const CopulaData& data, std::size_t dim, double h) {
        const std::size_t m = data.rows;
        const double inv_h = 1.0 / h;
        const double lg_sum = std::lgamma(inv_h + 2.0);
        a.resize(m);
        b.resize(m);
        lg.resize(m);
        lz.resize(m);
        l1z.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double u = data.at(i, dim);
            a[i] = u * inv_h + 1.0;
            b[i] = (1.0 - u) * inv_h + 1.0;
            lg[i] = lg_sum - std::lgamma(a[i]) - std::lgamma(b[i]);
            lz[i] = std::log(u);
            l1z[i] = std::log1p(-u);
        }
    }

    double log_kernel(std::size_t z_idx, std::size_t at_idx) const {
        return lg[at_idx] + (a[at_idx] - 1.0) * lz[z_idx] + (b[at_idx] - 1.0) * l1z[z_idx];
    }
};

std::string now_iso8601() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

} // namespace

std::string to_string(BandwidthMethod method) {
    switch (method) {
        case BandwidthMethod::ise: return "ise";
        case BandwidthMethod::rule_of_thumb: return "rule_of_thumb";
        case BandwidthMethod::ql: return "ql";
    }
    return "ise";
}

BandwidthMethod bandwidth_method_from_string(const std::string& name) {
    if (name == "ise") return BandwidthMethod::ise;
    if (name == "rule_of_thumb" || name == "rot") return BandwidthMethod::rule_of_thumb;
    if (name == "ql") return BandwidthMethod::ql;
    throw ConfigError("unknown bandwidth method: " + name);
}

void BandwidthConfig::validate() const {
    if (!(lower > 0.0) || !(lower < initial_guess) || !(initial_guess < upper)) {
        throw ConfigError("bandwidth bounds must satisfy 0 < lower < initial_guess < upper");
    }
    if (max_iterations < 1 || restarts < 1) {
        throw ConfigError("bandwidth iteration counts must be positive");
    }
}

bool WeekdayBandwidths::complete() const {
    for (const auto& h : per_weekday) {
        if (!h.has_value()) return false;
    }
    return true;
}

const Bandwidths& WeekdayBandwidths::for_day(std::int64_t day,
                                             const HolidayCalendar& calendar) const {
    // holidays behave like Sundays, the closest demand regime
    const Weekday w = cluster_of_day(day, calendar) == DayCluster::holiday
                          ? Weekday::sun
                          : weekday_of_day(day);
    const auto& slot = per_weekday[static_cast<std::size_t>(w)];
    if (!slot.has_value()) {
        throw ConfigError("no trained bandwidths for weekday " + to_string(w));
    }
    return *slot;
}

double rule_of_thumb_factor(std::size_t dims, std::size_t samples) {
    if (dims < 1 || samples < 1) throw DataError("rule of thumb requires D >= 1 and m >= 1");
    const double d = static_cast<double>(dims);
    const double m = static_cast<double>(samples);
    return std::pow(4.0 / (d + 2.0), 1.0 / (d + 4.0)) * std::pow(m, -1.0 / (d + 4.0));
}

Bandwidths rule_of_thumb(std::size_t dims, std::size_t samples, double sigma) {
    if (!(sigma > 0.0)) throw DataError("rule of thumb requires a positive sigma");
    return Bandwidths::uniform(dims, rule_of_thumb_factor(dims, samples) * sigma);
}

Bandwidths rule_of_thumb(std::size_t dims, std::size_t samples) {
    if (samples < 1) throw DataError("rule of thumb requires m >= 1");
    // the rank-transformed column is always {1/(m+1),...,m/(m+1)}, so its
    // spread depends only on m (about 0.29 for large samples)
    double sigma = std::sqrt(1.0 / 12.0);
    if (samples >= 2) {
        const double m = static_cast<double>(samples);
        double ss = 0.0;
        for (std::size_t i = 1; i <= samples; ++i) {
            const double u = static_cast<double>(i) / (m + 1.0);
            ss += (u - 0.5) * (u - 0.5);
        }
        sigma = std::sqrt(ss / (m - 1.0));
    }
    return rule_of_thumb(dims, samples, sigma);
}

double ise_objective(const Bandwidths& h, const CopulaData& data,
                     const std::vector<double>& conditioning, std::size_t grid_size) {
    const std::size_t m = data.rows;
    const std::size_t D = data.cols;
    const std::size_t L = grid_size;
    if (m < 2) throw DataError("leave-one-out requires m >= 2");
    if (h.dims() != D || conditioning.size() + 1 != D) {
        throw DataError("ise_objective dimension mismatch");
    }

    // first term: squared conditional density at the forecast conditioning
    const ConditionalResult cond = conditional_density(data, h, conditioning, L);
    if (cond.underflow_fallback) return kUnderflowPenalty;
    double sq = 0.0;
    for (const double v : cond.density.values) sq += v * v;
    sq /= static_cast<double>(L);

    // pairwise conditioning weights lw[i][j] = log prod_k K(r_kj; r_ki)
    std::vector<double> lw(m * m, 0.0);
    for (std::size_t dim = 1; dim < D; ++dim) {
        const PairwiseKernelDim table(data, dim, h.h[dim]);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                lw[i * m + j] += table.log_kernel(j, i);
            }
        }
    }

    // grid means S[j] = (1/L) sum_l K(r_0j; u_l) for the left-out
    // estimators' own-grid normalization
    std::vector<double> log_s(m);
    {
        const double inv_h = 1.0 / h.h[0];
        const double lg_sum = std::lgamma(inv_h + 2.0);
        std::vector<double> lz(m), l1z(m);
        for (std::size_t j = 0; j < m; ++j) {
            lz[j] = std::log(data.at(j, 0));
            l1z[j] = std::log1p(-data.at(j, 0));
        }
        std::vector<double> acc(m, 0.0);
        for (std::size_t l = 0; l < L; ++l) {
            const double u = (static_cast<double>(l) + 0.5) / static_cast<double>(L);
            const double a = u * inv_h + 1.0;
            const double b = (1.0 - u) * inv_h + 1.0;
            const double lg = lg_sum - std::lgamma(a) - std::lgamma(b);
            for (std::size_t j = 0; j < m; ++j) {
                acc[j] += std::exp(lg + (a - 1.0) * lz[j] + (b - 1.0) * l1z[j]);
            }
        }
        for (std::size_t j = 0; j < m; ++j) {
            log_s[j] = std::log(acc[j] / static_cast<double>(L));
        }
    }

    const PairwiseKernelDim target(data, 0, h.h[0]);

    double loo_sum = 0.0;
    std::vector<double> num_terms(m - 1), den_terms(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t n = 0;
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            const double w = lw[i * m + j];
            num_terms[n] = w + target.log_kernel(j, i);
            den_terms[n] = w + log_s[j];
            ++n;
        }
        const double log_num = logsumexp(num_terms);
        const double log_den = logsumexp(den_terms);
        if (std::isfinite(log_num) && std::isfinite(log_den)) {
            const double log_ratio = log_num - log_den;
            if (log_ratio > kLogTrueZero) loo_sum += std::exp(log_ratio);
        }
    }

    return sq - 2.0 / static_cast<double>(m) * loo_sum;
}

OptimizeOutcome optimize_ise(const CopulaData& data, const std::vector<double>& conditioning,
                             const BandwidthConfig& config, std::size_t grid_size) {
    config.validate();
    const std::size_t D = data.cols;

    OptimizeOutcome outcome;
    outcome.h = Bandwidths::uniform(D, config.initial_guess);

    const auto objective = [&](const std::vector<double>& log_h) {
        Bandwidths h;
        h.h.resize(D);
        for (std::size_t j = 0; j < D; ++j) h.h[j] = std::exp(log_h[j]);
        return ise_objective(h, data, conditioning, grid_size);
    };

    // log-space search keeps the box well conditioned across the h range
    const std::vector<double> lo(D, std::log(config.lower));
    const std::vector<double> hi(D, std::log(config.upper));
    const std::vector<double> x0(D, std::log(config.initial_guess));

    BoxMinimizeOptions options;
    options.max_iterations = config.max_iterations;
    try {
        const BoxMinimizeResult result = minimize_box(objective, x0, lo, hi, options);
        for (std::size_t j = 0; j < D; ++j) {
            outcome.h.h[j] = std::clamp(std::exp(result.x[j]), config.lower, config.upper);
        }
        outcome.objective = result.fx;
        outcome.evaluations = result.evaluations;
    } catch (const std::exception&) {
        outcome.warning = true; // keep the initial guess
        outcome.objective = ise_objective(outcome.h, data, conditioning, grid_size);
    }
    return outcome;
}

double ql_objective(const Bandwidths& h, const SeriesFrame& frame,
                    const HolidayCalendar& calendar, const EngineConfig& engine,
                    std::int64_t training_day, std::uint64_t seed) {
    const BandwidthFn fixed = [&](const DesignMatrix&, std::int64_t) { return h; };
    const CombinedForecast forecast =
        day_ahead_forecast(frame, calendar, engine, fixed, training_day, seed);

    double total = 0.0;
    const std::vector<double> levels = quantile_levels();
    for (std::size_t j = 0; j < forecast.steps.size(); ++j) {
        const std::int64_t idx = frame.index_of(training_day, static_cast<int>(j));
        if (idx < 0 || idx >= static_cast<std::int64_t>(frame.power.size()) ||
            std::isnan(frame.power[static_cast<std::size_t>(idx)])) {
            throw DataError("missing realization for training day " + format_date(training_day));
        }
        const double y = frame.power[static_cast<std::size_t>(idx)];
        for (std::size_t q = 0; q < levels.size(); ++q) {
            total += quantile_loss(levels[q], forecast.steps[j].quantiles[q], y);
        }
    }
    return total;
}

WeekdayBandwidths optimize_ql(const SeriesFrame& frame, const HolidayCalendar& calendar,
                              const EngineConfig& engine, std::int64_t week_start,
                              const BandwidthConfig& config, std::uint64_t seed) {
    config.validate();
    WeekdayBandwidths trained;

    for (int offset = 0; offset < 7; ++offset) {
        const std::int64_t day = week_start + offset;
        const Weekday weekday = weekday_of_day(day);

        const std::size_t D = engine.lags.dims();
        const auto objective = [&](const std::vector<double>& log_h) {
            Bandwidths h;
            h.h.resize(D);
            for (std::size_t j = 0; j < D; ++j) h.h[j] = std::exp(log_h[j]);
            return ql_objective(h, frame, calendar, engine, day, seed);
        };

        const std::vector<double> lo(D, std::log(config.lower));
        const std::vector<double> hi(D, std::log(config.upper));
        BoxMinimizeOptions options;
        options.max_iterations = config.max_iterations;
        options.max_evaluations = 60 * static_cast<int>(D) + 40;

        // deterministic restart ladder around the configured guess; the QL
        // surface has local minima, so keep the best of all starts
        static constexpr double kRestartScale[] = {1.0, 10.0, 0.1, 100.0, 0.01};
        double best_f = std::numeric_limits<double>::infinity();
        Bandwidths best_h = Bandwidths::uniform(D, config.initial_guess);
        for (int r = 0; r < config.restarts && r < 5; ++r) {
            const double guess = std::clamp(config.initial_guess * kRestartScale[r],
                                            config.lower * 1.0000001, config.upper * 0.9999999);
            const std::vector<double> x0(D, std::log(guess));
            const BoxMinimizeResult result = minimize_box(objective, x0, lo, hi, options);
            const bool better =
                result.fx < best_f ||
                (result.fx == best_f &&
                 std::lexicographical_compare(result.x.begin(), result.x.end(), best_h.h.begin(),
                                              best_h.h.end()));
            if (better) {
                best_f = result.fx;
                for (std::size_t j = 0; j < D; ++j) {
                    best_h.h[j] = std::clamp(std::exp(result.x[j]), config.lower, config.upper);
                }
            }
        }

        trained.per_weekday[static_cast<std::size_t>(weekday)] = best_h;
        trained.objective[static_cast<std::size_t>(weekday)] = best_f;
    }
    return trained;
}

void save_bandwidths(const std::vector<BandwidthRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write bandwidth file: " + path);
    char buf[32];
    for (const auto& rec : records) {
        out << "method = " << to_string(rec.method) << '\n';
        out << "weekday = " << (rec.weekday ? to_string(*rec.weekday) : std::string("all"))
            << '\n';
        out << "h =";
        for (const double v : rec.h.h) {
            std::snprintf(buf, sizeof buf, " %.17g", v);
            out << buf;
        }
        out << '\n';
        std::snprintf(buf, sizeof buf, "%.17g", rec.objective);
        out << "objective = " << buf << '\n';
        out << "timestamp = " << (rec.timestamp.empty() ? now_iso8601() : rec.timestamp) << '\n';
        out << '\n';
    }
}

std::vector<BandwidthRecord> load_bandwidths(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open bandwidth file: " + path);

    std::vector<BandwidthRecord> records;
    BandwidthRecord current;
    bool any_key = false;
    std::string line;
    const auto flush = [&] {
        if (any_key) {
            if (current.h.h.empty()) throw DataError("bandwidth block missing h: " + path);
            records.push_back(current);
            current = BandwidthRecord{};
            any_key = false;
        }
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("bad bandwidth line: " + line);
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        const auto trim = [](std::string& s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
        };
        trim(key);
        trim(value);
        any_key = true;
        if (key == "method") {
            current.method = bandwidth_method_from_string(value);
        } else if (key == "weekday") {
            if (value == "all") {
                current.weekday.reset();
            } else {
                current.weekday = weekday_from_string(value);
            }
        } else if (key == "h") {
            std::istringstream iss(value);
            double v = 0.0;
            current.h.h.clear();
            while (iss >> v) current.h.h.push_back(v);
        } else if (key == "objective") {
            current.objective = std::stod(value);
        } else if (key == "timestamp") {
            current.timestamp = value;
        } else {
            throw DataError("unknown bandwidth key: " + key);
        }
    }
    flush();
    return records;
}

} // namespace ecopf

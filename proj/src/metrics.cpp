#include "ecopf/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "ecopf/errors.hpp"

namespace ecopf {

std::vector<double> quantile_levels() {
    std::vector<double> levels(99);
    for (int k = 0; k < 99; ++k) levels[k] = static_cast<double>(k + 1) / 100.0;
    return levels;
}

double quantile_loss(double alpha, double y_hat, double y) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DataError("quantile level outside (0,1)");
    return y_hat <= y ? alpha * (y - y_hat) : (1.0 - alpha) * (y_hat - y);
}

double average_ql(const std::vector<std::vector<double>>& forecast_quantiles,
                  const std::vector<double>& realized) {
    if (forecast_quantiles.size() != realized.size()) {
        throw DataError("forecast/realization length mismatch");
    }
    if (realized.empty()) throw DataError("empty evaluation window");

    double total = 0.0;
    for (std::size_t j = 0; j < realized.size(); ++j) {
        if (forecast_quantiles[j].size() != 99) {
            throw DataError("forecast step must carry 99 quantiles");
        }
        for (std::size_t k = 0; k < 99; ++k) {
            const double alpha = static_cast<double>(k + 1) / 100.0;
            total += quantile_loss(alpha, forecast_quantiles[j][k], realized[j]);
        }
    }
    return total / (99.0 * static_cast<double>(realized.size()));
}

double picp(const std::vector<double>& lower, const std::vector<double>& upper,
            const std::vector<double>& y) {
    if (lower.size() != y.size() || upper.size() != y.size()) {
        throw DataError("band/realization length mismatch");
    }
    if (y.empty()) throw DataError("empty evaluation window");
    std::size_t inside = 0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        if (lower[j] <= y[j] && y[j] <= upper[j]) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(y.size());
}

double pinaw(const std::vector<double>& lower, const std::vector<double>& upper,
             const std::vector<double>& y) {
    if (lower.size() != y.size() || upper.size() != y.size()) {
        throw DataError("band/realization length mismatch");
    }
    if (y.empty()) throw DataError("empty evaluation window");
    const auto [min_it, max_it] = std::minmax_element(y.begin(), y.end());
    const double range = *max_it - *min_it;
    if (!(range > 0.0)) throw NumericalError("zero range normalizer");
    double width = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) width += upper[j] - lower[j];
    return width / (static_cast<double>(y.size()) * range);
}

EvaluationReport evaluate_forecast(const std::vector<std::vector<double>>& forecast_quantiles,
                                   const std::vector<double>& realized) {
    EvaluationReport report;
    report.steps = realized.size();
    report.avg_ql = average_ql(forecast_quantiles, realized);

    const auto band = [&](double lo_level, double hi_level, double& picp_out, double& pinaw_out) {
        const auto lo_idx = static_cast<std::size_t>(lo_level * 100.0 + 0.5) - 1;
        const auto hi_idx = static_cast<std::size_t>(hi_level * 100.0 + 0.5) - 1;
        std::vector<double> lo(realized.size()), hi(realized.size());
        for (std::size_t j = 0; j < realized.size(); ++j) {
            lo[j] = forecast_quantiles[j][lo_idx];
            hi[j] = forecast_quantiles[j][hi_idx];
        }
        picp_out = picp(lo, hi, realized);
        pinaw_out = pinaw(lo, hi, realized);
    };
    band(0.05, 0.95, report.picp_5_95, report.pinaw_5_95);
    band(0.10, 0.90, report.picp_10_90, report.pinaw_10_90);
    return report;
}

EvaluationReport average_reports(const std::vector<EvaluationReport>& reports) {
    if (reports.empty()) throw DataError("no reports to average");
    EvaluationReport avg;
    avg.days = reports.size();
    for (const auto& r : reports) {
        avg.avg_ql += r.avg_ql;
        avg.picp_5_95 += r.picp_5_95;
        avg.picp_10_90 += r.picp_10_90;
        avg.pinaw_5_95 += r.pinaw_5_95;
        avg.pinaw_10_90 += r.pinaw_10_90;
        avg.steps += r.steps;
    }
    const double n = static_cast<double>(reports.size());
    avg.avg_ql /= n;
    avg.picp_5_95 /= n;
    avg.picp_10_90 /= n;
    avg.pinaw_5_95 /= n;
    avg.pinaw_10_90 /= n;
    return avg;
}

void write_report_csv(const std::vector<std::pair<std::string, EvaluationReport>>& rows,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write report: " + path);
    out << "model,ql,picp_5_95,picp_10_90,pinaw_5_95,pinaw_10_90\n";
    char buf[160];
    for (const auto& [name, r] : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.6g,%.6g,%.6g,%.6g,%.6g", name.c_str(), r.avg_ql,
                      r.picp_5_95, r.picp_10_90, r.pinaw_5_95, r.pinaw_10_90);
        out << buf << '\n';
    }
}

void write_report_keyvalue(const EvaluationReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write report: " + path);
    char buf[64];
    const auto line = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%.6g", v);
        out << key << " = " << buf << '\n';
    };
    line("ql", report.avg_ql);
    line("picp_5_95", report.picp_5_95);
    line("picp_10_90", report.picp_10_90);
    line("pinaw_5_95", report.pinaw_5_95);
    line("pinaw_10_90", report.pinaw_10_90);
    out << "steps = " << report.steps << '\n';
    out << "days = " << report.days << '\n';
}

} // namespace ecopf

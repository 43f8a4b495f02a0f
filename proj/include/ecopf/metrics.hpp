#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace ecopf {

/// The 99 quantile levels 0.01..0.99 used throughout.
std::vector<double> quantile_levels();

/// Pinball loss of a single quantile forecast.
double quantile_loss(double alpha, double y_hat, double y);

/// Mean pinball loss over the 99-quantile table: forecast[j][k] is the
/// quantile at level (k+1)/100 for step j.
double average_ql(const std::vector<std::vector<double>>& forecast_quantiles,
                  const std::vector<double>& realized);

/// Fraction of steps with lower_j <= y_j <= upper_j (both bounds inclusive).
double picp(const std::vector<double>& lower, const std::vector<double>& upper,
            const std::vector<double>& y);

/// Mean interval width normalized by the realized range max(y)-min(y).
double pinaw(const std::vector<double>& lower, const std::vector<double>& upper,
             const std::vector<double>& y);

/// Quantile bands evaluated in the reports.
constexpr std::array<std::pair<double, double>, 2> kReportBands = {{{0.05, 0.95}, {0.10, 0.90}}};

struct EvaluationReport {
    double avg_ql = 0.0;
    double picp_5_95 = 0.0;
    double picp_10_90 = 0.0;
    double pinaw_5_95 = 0.0;
    double pinaw_10_90 = 0.0;
    std::size_t steps = 0;
    std::size_t days = 1;
};

/// Evaluate one contiguous window of forecast quantiles against realizations.
EvaluationReport evaluate_forecast(const std::vector<std::vector<double>>& forecast_quantiles,
                                   const std::vector<double>& realized);

/// Equal-weight average of per-day reports (PINAW normalizers differ per
/// day, so days are scored first and averaged after).
EvaluationReport average_reports(const std::vector<EvaluationReport>& reports);

void write_report_csv(const std::vector<std::pair<std::string, EvaluationReport>>& rows,
                      const std::string& path);
void write_report_keyvalue(const EvaluationReport& report, const std::string& path);

} // namespace ecopf

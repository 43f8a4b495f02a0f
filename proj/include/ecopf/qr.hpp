#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "ecopf/calendar.hpp"

namespace ecopf {

struct QrFitOptions {
    double ridge = 1e-8;           // applied only when the design is degenerate
    double smoothing_floor = 1e-8; // final annealed smoothing parameter
    int max_iterations = 400;
};

struct QrFit {
    std::vector<double> weights;
    double objective = 0.0; // summed pinball loss at the solution
    int iterations = 0;
    bool ridge_applied = false;
};

/// Linear quantile regression by iteratively reweighted least squares on a
/// smoothed pinball loss, with the smoothing parameter annealed to
/// `smoothing_floor`. X rows must include the intercept column explicitly.
QrFit fit_quantile_regression(const std::vector<std::vector<double>>& X,
                              const std::vector<double>& y, double alpha,
                              const QrFitOptions& options = {});

/// Pinball objective sum_i ql_alpha(x_i . w, y_i).
double qr_objective(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                    const std::vector<double>& weights, double alpha);

/// Benchmark model: one weight triple (intercept, week-lag power,
/// temperature) per quantile level and cluster.
struct QrModel {
    std::map<DayCluster, std::vector<std::vector<double>>> weights; // [cluster][99][3]
    std::size_t crossing_pairs = 0; // accumulated over predictions
};

/// Training rows (p_{t-672}, T_t, p_t).
struct QrRow {
    double lag_power = 0.0;
    double temperature = 0.0;
    double target = 0.0;
};

/// Fit all 99 quantile levels for one cluster.
std::vector<std::vector<double>> fit_qr(const std::vector<QrRow>& rows,
                                        const QrFitOptions& options = {});

/// Per-level predictions theta_alpha . (1, lag_power, temperature). Outputs
/// are reported as fitted: crossings are counted, never re-sorted.
std::vector<double> predict_qr(const QrModel& model, DayCluster cluster, double lag_power,
                               double temperature, std::size_t* crossing_count = nullptr);

} // namespace ecopf

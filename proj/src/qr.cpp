#include "ecopf/qr.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "ecopf/errors.hpp"
#include "ecopf/metrics.hpp"

namespace ecopf {

double qr_objective(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                    const std::vector<double>& weights, double alpha) {
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double fit = 0.0;
        for (std::size_t k = 0; k < weights.size(); ++k) fit += X[i][k] * weights[k];
        total += quantile_loss(alpha, fit, y[i]);
    }
    return total;
}

QrFit fit_quantile_regression(const std::vector<std::vector<double>>& X,
                              const std::vector<double>& y, double alpha,
                              const QrFitOptions& options) {
    const std::size_t m = y.size();
    if (m < 3 || X.size() != m) throw DataError("quantile regression needs at least 3 rows");
    const std::size_t p = X.front().size();
    if (!(alpha > 0.0 && alpha < 1.0)) throw DataError("quantile level outside (0,1)");

    Eigen::MatrixXd design(m, p);
    Eigen::VectorXd target(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (X[i].size() != p) throw DataError("ragged design matrix");
        for (std::size_t k = 0; k < p; ++k) {
            if (!std::isfinite(X[i][k])) throw DataError("non-finite feature");
            design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = X[i][k];
        }
        if (!std::isfinite(y[i])) throw DataError("non-finite target");
        target(static_cast<Eigen::Index>(i)) = y[i];
    }

    QrFit fit;
    fit.weights.assign(p, 0.0);

    // start from least squares
    Eigen::VectorXd theta =
        (design.transpose() * design +
         1e-12 * design.squaredNorm() * Eigen::MatrixXd::Identity(p, p))
            .ldlt()
            .solve(design.transpose() * target);

    const Eigen::VectorXd col_sums = design.colwise().sum();
    const double skew = 2.0 * alpha - 1.0;

    // majorize |r| by r^2/(2(eps+|r|)) and anneal eps toward the floor;
    // each stage is a sequence of closed-form weighted least squares steps
    double scale = std::abs(target.mean()) + target.norm() / std::sqrt(static_cast<double>(m));
    if (!(scale > 0.0)) scale = 1.0;
    int iterations = 0;
    for (double eps = 1e-2 * scale; eps >= options.smoothing_floor * 0.99; eps *= 0.1) {
        double prev = std::numeric_limits<double>::infinity();
        for (int it = 0; it < options.max_iterations; ++it) {
            ++iterations;
            const Eigen::VectorXd residual = target - design * theta;
            Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(p, p);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
            for (std::size_t i = 0; i < m; ++i) {
                const auto row = design.row(static_cast<Eigen::Index>(i));
                const double w = 1.0 / (eps + std::abs(residual(static_cast<Eigen::Index>(i))));
                normal.noalias() += w * row.transpose() * row;
                rhs.noalias() += w * target(static_cast<Eigen::Index>(i)) * row.transpose();
            }
            rhs += skew * col_sums;

            Eigen::VectorXd next = normal.ldlt().solve(rhs);
            if (!next.allFinite()) {
                // collinear design: stabilize with a tiny ridge and flag it
                fit.ridge_applied = true;
                const double ridge = options.ridge * (1.0 + normal.trace());
                next = (normal + ridge * Eigen::MatrixXd::Identity(p, p)).ldlt().solve(rhs);
                if (!next.allFinite()) throw NumericalError("quantile regression solve failed");
            }
            theta = next;

            double objective = 0.0;
            const Eigen::VectorXd r = target - design * theta;
            for (std::size_t i = 0; i < m; ++i) {
                const double ri = r(static_cast<Eigen::Index>(i));
                objective += ri >= 0.0 ? alpha * ri : (alpha - 1.0) * ri;
            }
            if (std::abs(prev - objective) <= 1e-12 * (1.0 + objective)) {
                prev = objective;
                break;
            }
            prev = objective;
        }
    }

    for (std::size_t k = 0; k < p; ++k) fit.weights[k] = theta(static_cast<Eigen::Index>(k));
    fit.objective = qr_objective(X, y, fit.weights, alpha);
    fit.iterations = iterations;
    return fit;
}

std::vector<std::vector<double>> fit_qr(const std::vector<QrRow>& rows,
                                        const QrFitOptions& options) {
    std::vector<std::vector<double>> X(rows.size());
    std::vector<double> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        X[i] = {1.0, rows[i].lag_power, rows[i].temperature};
        y[i] = rows[i].target;
    }
    std::vector<std::vector<double>> weights;
    weights.reserve(99);
    for (const double alpha : quantile_levels()) {
        weights.push_back(fit_quantile_regression(X, y, alpha, options).weights);
    }
    return weights;
}

std::vector<double> predict_qr(const QrModel& model, DayCluster cluster, double lag_power,
                               double temperature, std::size_t* crossing_count) {
    const auto it = model.weights.find(cluster);
    if (it == model.weights.end()) throw DataError("no QR weights for cluster " + to_string(cluster));
    const auto& per_level = it->second;
    std::vector<double> out(per_level.size());
    for (std::size_t k = 0; k < per_level.size(); ++k) {
        out[k] = per_level[k][0] + per_level[k][1] * lag_power + per_level[k][2] * temperature;
    }
    if (crossing_count != nullptr) {
        for (std::size_t k = 1; k < out.size(); ++k) {
            if (out[k] < out[k - 1]) ++*crossing_count;
        }
    }
    return out;
}

} // namespace ecopf

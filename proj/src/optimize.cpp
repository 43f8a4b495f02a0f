#include "ecopf/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ecopf/errors.hpp"

namespace ecopf {

namespace {

std::vector<double> project(std::vector<double> x, const std::vector<double>& lo,
                            const std::vector<double>& hi) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace

BoxMinimizeResult minimize_box(const std::function<double(const std::vector<double>&)>& f,
                               std::vector<double> x0, const std::vector<double>& lower,
                               const std::vector<double>& upper,
                               const BoxMinimizeOptions& options) {
    const std::size_t n = x0.size();
    if (n == 0 || lower.size() != n || upper.size() != n) {
        throw DataError("minimize_box: inconsistent dimensions");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(lower[i] < upper[i])) throw DataError("minimize_box: empty box");
    }

    BoxMinimizeResult result;
    int evals = 0;
    const auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };

    std::vector<double> x = project(std::move(x0), lower, upper);
    double fx = eval(x);
    const double f_start = fx;
    std::vector<double> best_x = x;
    double best_f = fx;

    const auto gradient = [&](const std::vector<double>& at) {
        std::vector<double> g(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double step = options.rel_fd_step * std::max(std::abs(at[i]), 1e-8);
            double xp = std::min(at[i] + step, upper[i]);
            double xm = std::max(at[i] - step, lower[i]);
            if (xp == xm) {
                g[i] = 0.0;
                continue;
            }
            std::vector<double> t = at;
            t[i] = xp;
            const double fp = eval(t);
            t[i] = xm;
            const double fm = eval(t);
            g[i] = (fp - fm) / (xp - xm);
        }
        return g;
    };

    // inverse-Hessian approximation, reset to identity on bad curvature
    std::vector<std::vector<double>> H(n, std::vector<double>(n, 0.0));
    const auto reset_h = [&] {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) H[i][j] = (i == j) ? 1.0 : 0.0;
        }
    };
    reset_h();

    std::vector<double> g = gradient(x);

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        if (evals >= options.max_evaluations) break;

        std::vector<double> d(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) d[i] -= H[i][j] * g[j];
        }
        double slope = 0.0;
        for (std::size_t i = 0; i < n; ++i) slope += d[i] * g[i];
        if (!(slope < 0.0)) {
            // not a descent direction: fall back to steepest descent
            for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
            reset_h();
            slope = -norm2(g) * norm2(g);
            if (!(slope < 0.0)) break; // zero gradient
        }

        // backtracking line search on the projected step
        double t = 1.0;
        std::vector<double> x_new;
        double f_new = fx;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            std::vector<double> cand(n);
            for (std::size_t i = 0; i < n; ++i) cand[i] = x[i] + t * d[i];
            cand = project(std::move(cand), lower, upper);
            const double fc = eval(cand);
            if (fc < fx - 1e-4 * t * std::abs(slope) || fc < fx - 1e-14 * (1.0 + std::abs(fx))) {
                x_new = std::move(cand);
                f_new = fc;
                accepted = true;
                break;
            }
            t *= 0.5;
            if (evals >= options.max_evaluations) break;
        }
        if (!accepted) break;

        const std::vector<double> g_new = gradient(x_new);

        // BFGS update
        std::vector<double> s(n), y(n);
        double sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
            sy += s[i] * y[i];
        }
        if (sy > 1e-12 * norm2(s) * norm2(y) && sy > 0.0) {
            std::vector<double> hy(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) hy[i] += H[i][j] * y[j];
            }
            double yhy = 0.0;
            for (std::size_t i = 0; i < n; ++i) yhy += y[i] * hy[i];
            const double c1 = (sy + yhy) / (sy * sy);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    H[i][j] += c1 * s[i] * s[j] - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        } else {
            reset_h();
        }

        const double improvement = fx - f_new;
        x = std::move(x_new);
        fx = f_new;
        g = g_new;
        if (fx < best_f) {
            best_f = fx;
            best_x = x;
        }
        if (improvement < options.rel_tol * (1.0 + std::abs(fx))) {
            result.converged = true;
            break;
        }
    }

    // compass polish from the best point; keeps strict monotone descent
    std::vector<double> step(n);
    for (std::size_t i = 0; i < n; ++i) step[i] = 0.05 * (upper[i] - lower[i]);
    while (evals < options.max_evaluations) {
        bool moved = false;
        for (std::size_t i = 0; i < n; ++i) {
            for (const double sgn : {+1.0, -1.0}) {
                std::vector<double> cand = best_x;
                cand[i] = std::clamp(cand[i] + sgn * step[i], lower[i], upper[i]);
                if (cand[i] == best_x[i]) continue;
                const double fc = eval(cand);
                if (fc < best_f) {
                    best_f = fc;
                    best_x = std::move(cand);
                    moved = true;
                    break;
                }
                if (evals >= options.max_evaluations) break;
            }
            if (evals >= options.max_evaluations) break;
        }
        if (!moved) {
            double max_step = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                step[i] *= 0.5;
                max_step = std::max(max_step, step[i] / (upper[i] - lower[i]));
            }
            if (max_step < 1e-7) {
                result.converged = true;
                break;
            }
        }
    }

    result.x = std::move(best_x);
    result.fx = best_f;
    result.evaluations = evals;
    result.improved = best_f < f_start;
    return result;
}

} // namespace ecopf

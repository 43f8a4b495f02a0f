#pragma once

#include <functional>
#include <vector>

namespace ecopf {

struct BoxMinimizeOptions {
    int max_iterations = 200;
    double rel_fd_step = 1e-6;   // relative finite-difference step
    double rel_tol = 1e-9;       // relative improvement stopping threshold
    int max_evaluations = 4000;
};

struct BoxMinimizeResult {
    std::vector<double> x;
    double fx = 0.0;
    int evaluations = 0;
    bool improved = false; // strictly better than the starting point
    bool converged = false;
};

/// Deterministic bound-constrained local minimizer: BFGS on the projected
/// iterates with central finite-difference gradients, followed by a compass
/// (coordinate pattern) polish. Always returns the best point seen, so the
/// result is never worse than the start.
BoxMinimizeResult minimize_box(const std::function<double(const std::vector<double>&)>& f,
                               std::vector<double> x0, const std::vector<double>& lower,
                               const std::vector<double>& upper,
                               const BoxMinimizeOptions& options = {});

} // namespace ecopf

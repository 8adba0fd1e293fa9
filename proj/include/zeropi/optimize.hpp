#pragma once

#include "zeropi/linalg.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace zeropi::optimize {

struct Bounds {
    RVector lower;
    RVector upper;

    void validate(const RVector& x0) const;
    RVector clamp(const RVector& x) const;
};

struct Result {
    RVector x;
    double f = 0.0;  // objective (sum of squares for least squares)
    int evaluations = 0;
    int iterations = 0;
    bool converged = false;
    std::string status;
    std::vector<double> trace;  // best objective after each iteration
};

using Objective = std::function<double(const RVector&)>;
using Residuals = std::function<RVector(const RVector&)>;

// Simplex search in box-normalised coordinates with adaptive coefficients.
struct NelderMeadOptions {
    int max_evaluations = 2000;
    double f_tol = 1e-14;          // spread of simplex values
    double x_tol = 1e-9;           // simplex diameter in normalised units
    double initial_step = 0.05;    // normalised
    int restarts = 2;
    std::uint64_t seed = 1;
};

Result nelder_mead(const Objective& f, const RVector& x0, const Bounds& bounds, const NelderMeadOptions& opt = {});

struct LevenbergMarquardtOptions {
    int max_iterations = 100;
    double fd_step = 1e-6;    // relative to the parameter scale
    double f_tol = 1e-15;     // relative decrease in cost
    double x_tol = 1e-12;     // relative step
    double lambda = 1e-3;
};

// Forward-difference Jacobian; steps are projected onto the bounds when given.
Result levenberg_marquardt(const Residuals& r, const RVector& x0, const std::optional<Bounds>& bounds,
                           const LevenbergMarquardtOptions& opt = {});

}  // namespace zeropi::optimize

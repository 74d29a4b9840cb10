#pragma once

// Damped Gauss-Newton (Levenberg-Marquardt) least squares.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace homodyne {

struct FitParameter {
  std::string name;
  double value = 0.0;
  bool positive = false;  // optimized as the square of an internal variable
  bool fixed = false;
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<double> std_errs;  // 0 for fixed parameters
  std::vector<bool> fixed;
  double residual_norm = 0.0;    // sum of squared residuals
  double gradient_norm = 0.0;    // infinity norm in scaled coordinates
  bool converged = false;
  int n_iter = 0;

  std::size_t index(std::string_view name) const;  // throws invalid_argument
  double value(std::string_view name) const { return params[index(name)]; }
  double error(std::string_view name) const { return std_errs[index(name)]; }
};

struct LeastSquaresOptions {
  double initial_damping = 1e-3;
  double damping_increase = 10.0;
  double damping_decrease = 10.0;
  // Convergence when ||J^T r||_inf < gradient_tol * (1 + sum r^2), in coordinates
  // scaled by the initial parameter magnitudes.
  double gradient_tol = 1e-10;
  int max_iterations = 200;
};

// r(p) for the full parameter vector (fixed entries included).
using ResidualFunction = std::function<void(std::span<const double> params, std::span<double> residuals)>;
// Row-major n_residuals x n_params dr/dp. Optional; central differences otherwise.
using JacobianFunction = std::function<void(std::span<const double> params, std::span<double> jacobian)>;

// Standard errors come from the local quadratic approximation, s^2 (J^T J)^-1 with
// s^2 = RSS / (n - p_free), evaluated in the natural parameters. Throws rank_deficient
// when J has dependent columns, invalid_argument on too few residuals or non-finite
// start values. Failure to converge is reported through `converged`, not thrown.
FitResult least_squares(const ResidualFunction& residuals, std::size_t n_residuals,
                        std::vector<FitParameter> params, const LeastSquaresOptions& options = {},
                        const JacobianFunction& jacobian = {});

enum class Weighting {
  none,                // r = y - m
  relative_to_model,   // r = (y - m) / m, constant fractional noise
  logarithmic,         // r = ln(y / m), multiplicative noise; needs y > 0
};

using CurveModel = std::function<double(double x, std::span<const double> params)>;
using CurveGradient = std::function<void(double x, std::span<const double> params, std::span<double> grad)>;

FitResult fit_curve(const CurveModel& model, std::span<const double> x, std::span<const double> y,
                    std::vector<FitParameter> params, Weighting weighting = Weighting::none,
                    const CurveGradient& gradient = {}, const LeastSquaresOptions& options = {});

}  // namespace homodyne

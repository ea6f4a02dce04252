#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

// Small bounded optimisers shared by the interference and spectral fits.
namespace afc::opt {

using Objective = std::function<double(std::span<const double>)>;
/// Writes the residual vector for parameters `x` into `r`.
using Residuals = std::function<void(std::span<const double> x, std::span<double> r)>;

struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  void validate(std::size_t dimension) const;
  void clamp(std::span<double> x) const;
};

struct Options {
  int max_iterations = 400;
  double gradient_tolerance = 1e-9;
  double cost_tolerance = 1e-12;  ///< relative change between accepted steps
  double step_tolerance = 1e-12;  ///< infinity norm, in parameter units
  double fd_step = 1e-6;          ///< relative finite-difference step
};

struct Result {
  std::vector<double> x;
  double cost = 0.0;
  double initial_cost = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string status;
  std::vector<double> cost_history;  ///< cost after every accepted step
};

/// Central differences, one-sided where a bound is within one step.
std::vector<double> gradient(const Objective& f, std::span<const double> x, const Box& box, double rel_step);
/// Symmetric central-difference Hessian, row-major.
std::vector<double> hessian(const Objective& f, std::span<const double> x, const Box& box, double rel_step);

/// Projected BFGS with Armijo backtracking along the projected path. Only
/// steps that do not increase the cost are accepted.
Result minimize_bfgs(const Objective& f, std::vector<double> x0, const Box& box, const Options& options = {});

/// Nelder-Mead simplex with vertices clamped to the box.
Result minimize_nelder_mead(const Objective& f, std::vector<double> x0, const Box& box,
                            const Options& options = {});

struct LeastSquaresResult {
  Result fit;                       ///< cost = sum of squared residuals
  std::vector<double> residuals;
  std::vector<double> jacobian;     ///< row-major, residuals x parameters
  std::vector<double> covariance;   ///< s^2 (J^T J)^-1, row-major; empty if singular
};

/// Levenberg-Marquardt with Marquardt scaling and a forward-difference
/// Jacobian; parameters are clamped to the box after every step.
LeastSquaresResult levenberg_marquardt(const Residuals& f, std::size_t residual_count, std::vector<double> x0,
                                       const Box& box, const Options& options = {});

/// Condition number (largest / smallest singular value) of a symmetric
/// row-major matrix; infinity when singular.
double condition_number(std::span<const double> matrix, std::size_t n);
/// Inverse of a symmetric positive-definite row-major matrix; empty on failure.
std::vector<double> inverse_spd(std::span<const double> matrix, std::size_t n);

}  // namespace afc::opt

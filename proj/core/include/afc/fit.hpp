#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "afc/spectrum.hpp"
#include "afc/units.hpp"

// Fits of the forward spectral model to measured optical-depth spectra.
namespace afc {

struct ResidualSubtraction {
  Spectrum spectrum;
  std::size_t clamped_points = 0;
  /// Detuning intervals (rad/s) where the subtraction went negative.
  std::vector<std::pair<double, double>> clamped_regions;
};

/// od - fraction * od_thermal, clamped at zero. `thermal_model` is
/// interpolated linearly onto the measured grid when the grids differ.
ResidualSubtraction subtract_residual(const Spectrum& measured, const Spectrum& thermal_model, double fraction);

struct ThermalFitOptions {
  double min_temperature = 280.0;  ///< K
  double max_temperature = 360.0;  ///< K
  double cell_length = 0.0;        ///< m; 0 takes the spectrum's
  std::vector<double> weights;     ///< inverse variances, empty for uniform
  unsigned threads = 1;
};

struct ThermalFit {
  double temperature = 0.0;  ///< K
  double uncertainty = 0.0;  ///< K, from the cost curvature
  double cost = 0.0;
  int evaluations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// One-parameter fit: the density follows the temperature through the
/// saturated vapour pressure.
ThermalFit fit_thermal(const Spectrum& measured, const ThermalFitOptions& options = {});

/// Inputs of the prepared-comb forward model. The pump is taken as ideal
/// (every class emptied into F=1) before the pump-back stage.
struct AfcModelParameters {
  double temperature = 300.05;     ///< K
  double center_velocity = -36.0;  ///< m/s, carrier class of the pump-back
  double velocity_spacing = 106.0; ///< m/s between sideband classes
  double power = 0.494e-3;         ///< W
  double duration = 1.67e-6;       ///< s
  double sideband_sigma = 1.48;
  double sideband_alpha = -0.0764;
  double linewidth = units::two_pi * 30.5e6;  ///< rad/s, FWHM
  double residual_fraction = 0.0;  ///< thermal OD added back

  static const std::vector<std::string>& names();
  double get(const std::string& name) const;
  void set(const std::string& name, double value);
};

struct AfcModelSettings {
  double cell_length = 0.1;  ///< m
  double beam_radius = 1e-3; ///< m
  int sideband_min = -3;
  int sideband_max = 3;
  std::size_t velocity_points = 401;
  double velocity_sigmas = 4.0;
  unsigned threads = 1;
};

Spectrum afc_model_spectrum(const AfcModelParameters& parameters, const AfcModelSettings& settings,
                            std::span<const double> detunings);

struct FreeParameter {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  bool log_scale = false;  ///< optimise log(value); needs lower > 0
};

struct FitProblem {
  Spectrum measured;
  std::vector<double> weights;  ///< inverse variances, empty for uniform
  AfcModelParameters initial;   ///< start and values of fixed parameters
  std::vector<FreeParameter> free;
  AfcModelSettings settings;
  std::size_t starts = 4;       ///< the first start is `initial`
  std::uint64_t seed = 1;
  int max_iterations = 200;
  unsigned threads = 1;         ///< starts run in parallel

  /// Power and linewidth in log space, the rest linear, with the bounds
  /// used for the published parameter set.
  static std::vector<FreeParameter> default_free_parameters();
};

struct StartReport {
  std::vector<double> start;  ///< physical values of the free parameters
  double cost = 0.0;
  int iterations = 0;
  std::string method;
  std::string status;
};

struct FitResult {
  std::map<std::string, double> best_parameters;
  AfcModelParameters model;
  double cost = 0.0;
  double initial_cost = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string status;
  std::map<std::string, double> uncertainties;
  double condition_number = 0.0;
  std::vector<std::string> warnings;
  std::vector<StartReport> starts;
  std::size_t best_start = 0;
};

/// Weighted least squares over the free parameters: projected BFGS from
/// every start, Nelder-Mead where BFGS fails. Deterministic for a given
/// problem and seed, whatever the thread count.
FitResult fit_afc(const FitProblem& problem);

/// Weighted sum of squared residuals of `model` against `problem.measured`.
double fit_cost(const FitProblem& problem, const AfcModelParameters& model);

std::string to_json(const FitResult& result);
std::string to_json(const ThermalFit& result);

}  // namespace afc

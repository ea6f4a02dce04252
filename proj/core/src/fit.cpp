#include "afc/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "afc/errors.hpp"
#include "afc/optimize.hpp"
#include "afc/parallel.hpp"
#include "afc/pumping.hpp"

namespace afc {

namespace {

using nlohmann::json;

bool same_detunings(const Spectrum& a, const Spectrum& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a.detunings[i] - b.detunings[i]) > 1e-9 * std::max(1.0, std::abs(a.detunings[i]))) return false;
  }
  return true;
}

double weighted_sse(std::span<const double> model, std::span<const double> data, std::span<const double> weights) {
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = model[i] - data[i];
    sum += (weights.empty() ? 1.0 : weights[i]) * r * r;
  }
  return sum;
}

void check_weights(const std::vector<double>& weights, std::size_t n) {
  if (weights.empty()) return;
  if (weights.size() != n) throw ConfigError(fmt::format("{} weights for {} samples", weights.size(), n));
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("weights must be finite and non-negative");
  }
}

// Trapezoidal area of od over [lo, hi] on a sorted grid.
double area(const Spectrum& s, double lo, double hi) {
  double sum = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double a = std::max(s.detunings[i - 1], lo);
    const double b = std::min(s.detunings[i], hi);
    if (b <= a) continue;
    sum += 0.5 * (s.od[i - 1] + s.od[i]) * (b - a);
  }
  return sum;
}

// Maps the unit box onto physical parameter values.
struct Transform {
  const std::vector<FreeParameter>& free;

  double to_physical(std::size_t i, double u) const {
    const auto& p = free[i];
    return p.log_scale ? p.lower * std::pow(p.upper / p.lower, u) : p.lower + u * (p.upper - p.lower);
  }
  double to_unit(std::size_t i, double x) const {
    const auto& p = free[i];
    const double u = p.log_scale ? std::log(x / p.lower) / std::log(p.upper / p.lower)
                                 : (x - p.lower) / (p.upper - p.lower);
    return std::clamp(u, 0.0, 1.0);
  }
  /// dx/du
  double slope(std::size_t i, double u) const {
    const auto& p = free[i];
    return p.log_scale ? to_physical(i, u) * std::log(p.upper / p.lower) : p.upper - p.lower;
  }
  AfcModelParameters apply(AfcModelParameters base, std::span<const double> u) const {
    for (std::size_t i = 0; i < free.size(); ++i) base.set(free[i].name, to_physical(i, u[i]));
    return base;
  }
};

void validate_problem(const FitProblem& problem) {
  problem.measured.validate();
  check_weights(problem.weights, problem.measured.size());
  if (problem.free.empty()) throw ConfigError("fit has no free parameters");
  if (problem.starts == 0) throw ConfigError("fit needs at least one start");
  if (problem.measured.size() <= problem.free.size()) throw ConfigError("fewer samples than free parameters");
  for (std::size_t i = 0; i < problem.free.size(); ++i) {
    const auto& p = problem.free[i];
    problem.initial.get(p.name);  // rejects unknown names
    if (!(std::isfinite(p.lower) && std::isfinite(p.upper) && p.lower < p.upper)) {
      throw ConfigError(fmt::format("parameter '{}' needs finite bounds with lower < upper", p.name));
    }
    if (p.log_scale && !(p.lower > 0.0)) throw ConfigError(fmt::format("log-scaled '{}' needs lower > 0", p.name));
    const double x = problem.initial.get(p.name);
    if (x < p.lower || x > p.upper) {
      throw ConfigError(fmt::format("initial {} = {} lies outside [{}, {}]", p.name, x, p.lower, p.upper));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (problem.free[j].name == p.name) throw ConfigError(fmt::format("parameter '{}' listed twice", p.name));
    }
  }
}

}  // namespace

ResidualSubtraction subtract_residual(const Spectrum& measured, const Spectrum& thermal_model, double fraction) {
  if (!(fraction >= 0.0)) throw DomainError("residual fraction must be non-negative");
  measured.validate();
  thermal_model.validate();
  const Spectrum thermal = same_detunings(measured, thermal_model) ? thermal_model
                                                                   : resample(thermal_model, measured.detunings);
  ResidualSubtraction out;
  out.spectrum = measured;
  bool in_region = false;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    double od = measured.od[i] - fraction * thermal.od[i];
    out.spectrum.transfer_phase[i] = measured.transfer_phase[i] - fraction * thermal.transfer_phase[i];
    const bool clamped = od < 0.0;
    if (clamped) {
      od = 0.0;
      ++out.clamped_points;
      if (!in_region) out.clamped_regions.emplace_back(measured.detunings[i], measured.detunings[i]);
      out.clamped_regions.back().second = measured.detunings[i];
    }
    in_region = clamped;
    out.spectrum.od[i] = od;
  }
  return out;
}

ThermalFit fit_thermal(const Spectrum& measured, const ThermalFitOptions& options) {
  measured.validate();
  check_weights(options.weights, measured.size());
  if (measured.size() < 3) throw ConfigError("thermal fit needs at least three samples");
  if (!(options.min_temperature < options.max_temperature)) throw ConfigError("temperature bounds are inverted");
  const double length = options.cell_length > 0.0 ? options.cell_length : measured.cell_length;
  if (!(length > 0.0)) throw ConfigError("thermal fit needs the cell length");
  const auto& scheme = rb87_level_scheme();

  ThermalFit out;
  auto model = [&](double t, std::span<const double> detunings) {
    return thermal_spectrum(scheme, t, vapor_number_density(t, scheme), detunings, length, options.threads);
  };
  auto cost = [&](double t) {
    ++out.evaluations;
    return weighted_sse(model(t, measured.detunings).od, measured.od, options.weights);
  };

  std::uintmax_t max_iter = 200;
  const auto [t_best, c_best] =
      boost::math::tools::brent_find_minima(cost, options.min_temperature, options.max_temperature, 40, max_iter);
  out.temperature = t_best;
  out.cost = c_best;
  out.converged = max_iter < 200;
  if (!out.converged) throw FitError("temperature fit did not converge within 200 iterations");

  const double h = 1e-2;
  const double lo = std::max(options.min_temperature, t_best - h);
  const double hi = std::min(options.max_temperature, t_best + h);
  const double mid = 0.5 * (lo + hi);
  const double step = 0.5 * (hi - lo);
  const double curvature = (cost(hi) - 2.0 * cost(mid) + cost(lo)) / (step * step);
  const double s2 = c_best / static_cast<double>(measured.size() - 1);
  out.uncertainty = curvature > 0.0 ? std::sqrt(2.0 * s2 / curvature) : std::numeric_limits<double>::infinity();

  if (t_best - options.min_temperature < 1e-3 || options.max_temperature - t_best < 1e-3) {
    out.warnings.push_back(fmt::format("temperature {:.3f} K sits on the search bound", t_best));
  }
  // Coverage of the F=2 absorption: with only part of the line the density
  // and the Doppler width trade off against each other.
  const double fwhm = units::hz_to_angular(doppler_fwhm(t_best, scheme.wavelength(Line::D2), scheme));
  const double left = scheme.transition_frequency(Line::D2, 2, 1) - scheme.transition_frequency(Line::D2, 2, 3);
  const auto wide = model(t_best, detuning_grid(left - 2.0 * fwhm, 2.0 * fwhm, 4001));
  const double total = area(wide, wide.detunings.front(), wide.detunings.back());
  const double covered = area(wide, measured.detunings.front(), measured.detunings.back());
  if (total > 0.0 && covered / total < 0.5) {
    out.warnings.push_back(fmt::format(
        "spectrum covers {:.0f}% of the absorption line; density and Doppler width are degenerate",
        100.0 * covered / total));
  }
  return out;
}

const std::vector<std::string>& AfcModelParameters::names() {
  static const std::vector<std::string> list{"temperature",    "center_velocity", "velocity_spacing",
                                             "power",          "duration",        "sideband_sigma",
                                             "sideband_alpha", "linewidth",       "residual_fraction"};
  return list;
}

double AfcModelParameters::get(const std::string& name) const {
  if (name == "temperature") return temperature;
  if (name == "center_velocity") return center_velocity;
  if (name == "velocity_spacing") return velocity_spacing;
  if (name == "power") return power;
  if (name == "duration") return duration;
  if (name == "sideband_sigma") return sideband_sigma;
  if (name == "sideband_alpha") return sideband_alpha;
  if (name == "linewidth") return linewidth;
  if (name == "residual_fraction") return residual_fraction;
  throw ConfigError(fmt::format("unknown model parameter '{}'", name));
}

void AfcModelParameters::set(const std::string& name, double value) {
  if (name == "temperature") temperature = value;
  else if (name == "center_velocity") center_velocity = value;
  else if (name == "velocity_spacing") velocity_spacing = value;
  else if (name == "power") power = value;
  else if (name == "duration") duration = value;
  else if (name == "sideband_sigma") sideband_sigma = value;
  else if (name == "sideband_alpha") sideband_alpha = value;
  else if (name == "linewidth") linewidth = value;
  else if (name == "residual_fraction") residual_fraction = value;
  else throw ConfigError(fmt::format("unknown model parameter '{}'", name));
}

Spectrum afc_model_spectrum(const AfcModelParameters& p, const AfcModelSettings& settings,
                            std::span<const double> detunings) {
  if (!(p.power >= 0.0) || !(p.duration >= 0.0)) throw DomainError("pump-back power and duration must be >= 0");
  if (!(p.linewidth > 0.0) || !(p.sideband_sigma > 0.0) || !(p.velocity_spacing > 0.0)) {
    throw DomainError("linewidth, sideband width and velocity spacing must be positive");
  }
  if (!(p.residual_fraction >= 0.0)) throw DomainError("residual fraction must be non-negative");
  if (settings.velocity_points < 3 || !(settings.cell_length > 0.0)) {
    throw ConfigError("model needs at least 3 velocity points and a positive cell length");
  }
  const auto& scheme = rb87_level_scheme();
  const auto rates = RateModel::rb87_d1(scheme);
  const auto grid = VelocityGrid::thermal(p.temperature, scheme, settings.velocity_sigmas, settings.velocity_points);
  const auto thermal =
      PopulationState::thermal(grid, p.temperature, vapor_number_density(p.temperature, scheme), scheme);

  const double w0 = rates.ae.resonant_frequency;
  const double c = units::speed_of_light;
  OpticalMode pump_back;
  pump_back.role = ModeRole::pump_back;
  pump_back.center_frequency = w0 * (1.0 + p.center_velocity / c);
  pump_back.power = p.power;
  pump_back.beam_radius = settings.beam_radius;
  pump_back.linewidth = p.linewidth;
  pump_back.sidebands = SidebandSpec{w0 * p.velocity_spacing / c, settings.sideband_min, settings.sideband_max,
                                     p.sideband_sigma, p.sideband_alpha};
  IntegratorOptions integrator;
  integrator.method = IntegratorMethod::exponential;
  const auto prepared = evolve_populations(ideal_pump(thermal), rates, std::span(&pump_back, 1), p.duration,
                                           std::max(p.duration, 1e-12), integrator);

  auto out = od_spectrum(prepared, scheme, detunings, settings.cell_length, settings.threads);
  if (p.residual_fraction > 0.0) {
    const auto background = od_spectrum(thermal, scheme, detunings, settings.cell_length, settings.threads);
    for (std::size_t i = 0; i < out.size(); ++i) {
      out.od[i] += p.residual_fraction * background.od[i];
      out.transfer_phase[i] += p.residual_fraction * background.transfer_phase[i];
    }
  }
  return out;
}

std::vector<FreeParameter> FitProblem::default_free_parameters() {
  return {{"temperature", 295.0, 305.0, false},
          {"center_velocity", -100.0, 30.0, false},
          {"velocity_spacing", 80.0, 130.0, false},
          {"power", 0.05e-3, 5e-3, true},
          {"duration", 0.2e-6, 10e-6, false},
          {"sideband_sigma", 0.3, 5.0, false},
          {"sideband_alpha", -3.0, 3.0, false},
          {"linewidth", units::two_pi * 3e6, units::two_pi * 100e6, true},
          {"residual_fraction", 0.0, 0.5, false}};
}

double fit_cost(const FitProblem& problem, const AfcModelParameters& model) {
  const auto s = afc_model_spectrum(model, problem.settings, problem.measured.detunings);
  return weighted_sse(s.od, problem.measured.od, problem.weights);
}

FitResult fit_afc(const FitProblem& problem) {
  validate_problem(problem);
  const std::size_t n = problem.free.size();
  const Transform transform{problem.free};
  const opt::Box unit_box{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};
  const opt::Objective objective = [&](std::span<const double> u) {
    try {
      return fit_cost(problem, transform.apply(problem.initial, u));
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  // Start 0 is the supplied guess; the rest are drawn from the seed.
  std::vector<std::vector<double>> starts(problem.starts, std::vector<double>(n));
  std::mt19937_64 rng(problem.seed);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  for (std::size_t i = 0; i < n; ++i) starts[0][i] = transform.to_unit(i, problem.initial.get(problem.free[i].name));
  for (std::size_t s = 1; s < starts.size(); ++s) {
    for (auto& u : starts[s]) u = unit(rng);
  }

  opt::Options options;
  options.max_iterations = problem.max_iterations;
  options.gradient_tolerance = 1e-7;
  options.cost_tolerance = 1e-9;
  options.step_tolerance = 1e-9;
  // Absolute optical frequencies resolve to ~0.5 rad/s in double precision,
  // so smaller steps only see rounding noise.
  options.fd_step = 1e-4;

  std::vector<opt::Result> runs(starts.size());
  std::vector<std::string> methods(starts.size());
  parallel_for(starts.size(), problem.threads, [&](std::size_t s) {
    auto r = opt::minimize_bfgs(objective, starts[s], unit_box, options);
    methods[s] = "bfgs";
    if (!r.converged || !std::isfinite(r.cost)) {
      auto nm = opt::minimize_nelder_mead(objective, starts[s], unit_box, options);
      nm.evaluations += r.evaluations;
      if (std::isfinite(nm.cost) && !(nm.cost > r.cost && r.converged)) {
        r = std::move(nm);
        methods[s] = "nelder-mead";
      }
    }
    runs[s] = std::move(r);
  });

  FitResult out;
  out.initial_cost = runs[0].initial_cost;
  std::vector<std::string> diagnostics;
  for (std::size_t s = 0; s < runs.size(); ++s) {
    StartReport report;
    for (std::size_t i = 0; i < n; ++i) report.start.push_back(transform.to_physical(i, starts[s][i]));
    report.cost = runs[s].cost;
    report.iterations = runs[s].iterations;
    report.method = methods[s];
    report.status = runs[s].status;
    out.starts.push_back(report);
    out.evaluations += runs[s].evaluations;
    diagnostics.push_back(fmt::format("start {}: {} cost {:.4e} ({})", s, methods[s], runs[s].cost, runs[s].status));
    if (std::isfinite(runs[s].cost) && runs[s].cost < runs[out.best_start].cost) out.best_start = s;
  }
  const auto& best = runs[out.best_start];
  if (!std::isfinite(best.cost)) {
    throw FitError(fmt::format("every fit start failed: {}", fmt::join(diagnostics, "; ")));
  }

  out.model = transform.apply(problem.initial, best.x);
  for (const auto& p : problem.free) out.best_parameters[p.name] = out.model.get(p.name);
  out.cost = best.cost;
  out.iterations = best.iterations;
  out.converged = best.converged;
  out.status = best.status;
  if (!out.converged) out.warnings.push_back("best start stopped before convergence: " + best.status);

  for (std::size_t i = 0; i < n; ++i) {
    if (best.x[i] <= 1e-6 || best.x[i] >= 1.0 - 1e-6) {
      out.warnings.push_back(fmt::format("{} is at its bound", problem.free[i].name));
    }
  }

  // Local quadratic approximation in the unit box, Gauss-Newton form
  // H = 2 J^T W J with a central-difference residual Jacobian; cov_u = 2 s^2 H^-1.
  const std::size_t m = problem.measured.size();
  auto residuals = [&](std::span<const double> u) {
    const auto s = afc_model_spectrum(transform.apply(problem.initial, u), problem.settings,
                                      problem.measured.detunings);
    std::vector<double> r(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double w = problem.weights.empty() ? 1.0 : std::sqrt(problem.weights[k]);
      r[k] = w * (s.od[k] - problem.measured.od[k]);
    }
    return r;
  };
  std::vector<double> jac(m * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double h = 1e-4;
    auto up = best.x;
    auto down = best.x;
    up[i] = std::min(1.0, best.x[i] + h);
    down[i] = std::max(0.0, best.x[i] - h);
    const auto ru = residuals(up);
    const auto rd = residuals(down);
    for (std::size_t k = 0; k < m; ++k) jac[k * n + i] = (ru[k] - rd[k]) / (up[i] - down[i]);
  }
  out.evaluations += static_cast<int>(2 * n);
  std::vector<double> hess(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      double sum = 0.0;
      for (std::size_t k = 0; k < m; ++k) sum += jac[k * n + a] * jac[k * n + b];
      hess[a * n + b] = 2.0 * sum;
    }
  }
  out.condition_number = opt::condition_number(hess, n);
  if (!(out.condition_number <= 1e6)) {
    out.warnings.push_back(fmt::format(
        "cost Hessian condition number {:.3g} exceeds 1e6; parameters are degenerate", out.condition_number));
  }
  const auto inverse = opt::inverse_spd(hess, n);
  if (inverse.empty()) {
    out.warnings.push_back("cost Hessian is not positive definite; no uncertainties reported");
  } else {
    const double dof = static_cast<double>(problem.measured.size() - n);
    const double s2 = best.cost / dof;
    for (std::size_t i = 0; i < n; ++i) {
      const double var_u = 2.0 * s2 * inverse[i * n + i];
      out.uncertainties[problem.free[i].name] = std::abs(transform.slope(i, best.x[i])) * std::sqrt(std::max(var_u, 0.0));
    }
  }
  return out;
}

std::string to_json(const FitResult& r) {
  json j;
  j["parameters"] = r.best_parameters;
  j["uncertainties"] = r.uncertainties;
  j["cost"] = r.cost;
  j["initial_cost"] = r.initial_cost;
  j["iterations"] = r.iterations;
  j["evaluations"] = r.evaluations;
  j["converged"] = r.converged;
  j["status"] = r.status;
  j["condition_number"] = std::isfinite(r.condition_number) ? json(r.condition_number) : json(nullptr);
  j["warnings"] = r.warnings;
  j["best_start"] = r.best_start;
  json model;
  for (const auto& name : AfcModelParameters::names()) model[name] = r.model.get(name);
  j["model"] = model;
  j["starts"] = json::array();
  for (const auto& s : r.starts) {
    j["starts"].push_back({{"start", s.start}, {"cost", std::isfinite(s.cost) ? json(s.cost) : json(nullptr)},
                           {"iterations", s.iterations}, {"method", s.method}, {"status", s.status}});
  }
  return j.dump(2);
}

std::string to_json(const ThermalFit& r) {
  json j;
  j["temperature_K"] = r.temperature;
  j["temperature_C"] = units::kelvin_to_celsius(r.temperature);
  j["uncertainty_K"] = std::isfinite(r.uncertainty) ? json(r.uncertainty) : json(nullptr);
  j["cost"] = r.cost;
  j["evaluations"] = r.evaluations;
  j["converged"] = r.converged;
  j["warnings"] = r.warnings;
  return j.dump(2);
}

}  // namespace afc

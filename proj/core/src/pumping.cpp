#include "afc/pumping.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "afc/errors.hpp"
#include "afc/io.hpp"
#include "afc/parallel.hpp"
#include "afc/units.hpp"

namespace afc {

namespace {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(units::two_pi); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Area-normalised Lorentzian with full width `fwhm`.
double lorentzian(double detuning, double fwhm) {
  const double half = 0.5 * fwhm;
  return half / (units::pi * (detuning * detuning + half * half));
}

Vec3 mat_vec(const Mat3& m, const Vec3& y) {
  return {m[0] * y[0] + m[1] * y[1] + m[2] * y[2], m[3] * y[0] + m[4] * y[1] + m[5] * y[2],
          m[6] * y[0] + m[7] * y[1] + m[8] * y[2]};
}

Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[3 * i + j] += a[3 * i + k] * b[3 * k + j];
  return c;
}

Vec3 rk4_step(const Mat3& m, const Vec3& y, double h) {
  auto axpy = [](const Vec3& a, double s, const Vec3& b) {
    return Vec3{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]};
  };
  const Vec3 k1 = mat_vec(m, y);
  const Vec3 k2 = mat_vec(m, axpy(y, 0.5 * h, k1));
  const Vec3 k3 = mat_vec(m, axpy(y, 0.5 * h, k2));
  const Vec3 k4 = mat_vec(m, axpy(y, h, k3));
  Vec3 out;
  for (int i = 0; i < 3; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

// exp(m * t) by scaling and squaring of a truncated Taylor series.
Mat3 expm(const Mat3& m, double t) {
  double norm = 0.0;
  for (int i = 0; i < 3; ++i) {
    double row = 0.0;
    for (int j = 0; j < 3; ++j) row += std::abs(m[3 * i + j]) * t;
    norm = std::max(norm, row);
  }
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const double scale = t / std::ldexp(1.0, squarings);
  Mat3 a;
  for (int i = 0; i < 9; ++i) a[i] = m[i] * scale;
  Mat3 result{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Mat3 term = result;
  for (int k = 1; k <= 18; ++k) {
    term = multiply(term, a);
    for (double& x : term) x /= k;
    for (int i = 0; i < 9; ++i) result[i] += term[i];
  }
  for (int s = 0; s < squarings; ++s) result = multiply(result, result);
  return result;
}

void check_negativity(const Vec3& y, double total, double tolerance, double velocity) {
  const double floor = -tolerance * total;
  if (y[0] < floor || y[1] < floor || y[2] < floor) {
    throw IntegrationError(fmt::format(
        "negative population in velocity class {:.3f} m/s; the integration step is too large",
        velocity));
  }
}

Vec3 integrate_class(const Mat3& m, Vec3 y, double duration, double dt, const IntegratorOptions& opt,
                     double velocity) {
  const double total = y[0] + y[1] + y[2];
  if (total <= 0.0 || duration == 0.0) return y;

  switch (opt.method) {
    case IntegratorMethod::exponential: {
      y = mat_vec(expm(m, duration), y);
      check_negativity(y, total, opt.negativity_tolerance, velocity);
      return y;
    }
    case IntegratorMethod::fixed_rk4: {
      double t = 0.0;
      while (t < duration) {
        const double h = std::min(dt, duration - t);
        y = rk4_step(m, y, h);
        check_negativity(y, total, opt.negativity_tolerance, velocity);
        t += h;
      }
      return y;
    }
    case IntegratorMethod::adaptive_rk45: {
      double t = 0.0;
      double h = dt;
      int rejected = 0;
      while (t < duration) {
        const bool last = h >= duration - t;
        const double step = last ? duration - t : h;
        const Vec3 full = rk4_step(m, y, step);
        const Vec3 half = rk4_step(m, rk4_step(m, y, 0.5 * step), 0.5 * step);
        double err = 0.0;
        for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(half[i] - full[i]));
        err /= 15.0 * total;
        const double factor =
            err > 0.0 ? 0.9 * std::pow(opt.tolerance / err, 0.2) : 4.0;
        if (err <= opt.tolerance) {
          for (int i = 0; i < 3; ++i) y[i] = half[i] + (half[i] - full[i]) / 15.0;
          check_negativity(y, total, opt.negativity_tolerance, velocity);
          t = last ? duration : t + step;
          h = std::min(dt, step * std::min(4.0, factor));
          rejected = 0;
        } else {
          h = step * std::max(0.1, factor);
          if (++rejected > 200) {
            throw IntegrationError(fmt::format(
                "step size underflow in velocity class {:.3f} m/s", velocity));
          }
        }
      }
      return y;
    }
  }
  return y;
}

void check_addresses(const OpticalMode& mode, const TransitionData& transition, std::string_view what) {
  // Anything beyond a few Doppler widths addresses a different transition.
  const double window = units::hz_to_angular(2.0 * units::GHz);
  if (std::abs(mode.center_frequency - transition.resonant_frequency) > window) {
    throw ConfigError(fmt::format(
        "{} must be tuned to D1 F={} -> F'={} (offset {:.1f} MHz exceeds 2 GHz)", what,
        transition.lower, transition.upper,
        units::angular_to_mhz(mode.center_frequency - transition.resonant_frequency)));
  }
}

}  // namespace

std::vector<double> sideband_weights(const SidebandSpec& spec) {
  if (!(spec.width_sigma > 0.0)) throw DomainError("sideband envelope width sigma must be positive");
  if (spec.n_min > spec.n_max) throw DomainError("sideband index range is empty");
  std::vector<double> w;
  double sum = 0.0;
  for (int n = spec.n_min; n <= spec.n_max; ++n) {
    const double x = n / spec.width_sigma;
    w.push_back(2.0 * normal_pdf(x) * normal_cdf(spec.skew_alpha * x));
    sum += w.back();
  }
  if (!(sum > 0.0)) throw DomainError("sideband envelope vanishes on the index range");
  for (double& x : w) x /= sum;
  return w;
}

double OpticalMode::total_intensity() const { return power / (units::pi * beam_radius * beam_radius); }

std::vector<SpectralLine> OpticalMode::lines() const {
  if (!sidebands) return {{center_frequency, 1.0}};
  const auto w = sideband_weights(*sidebands);
  std::vector<SpectralLine> out;
  for (int n = sidebands->n_min; n <= sidebands->n_max; ++n) {
    out.push_back({center_frequency + n * sidebands->rf_frequency,
                   w[static_cast<std::size_t>(n - sidebands->n_min)]});
  }
  return out;
}

void OpticalMode::validate() const {
  if (!(power >= 0.0)) throw ConfigError("optical mode power must be non-negative");
  if (!(beam_radius > 0.0)) throw ConfigError("optical mode beam radius must be positive");
  if (!(linewidth > 0.0)) throw ConfigError("optical mode linewidth must be positive");
  if (sidebands) sideband_weights(*sidebands);
}

double mode_spectral_intensity(const OpticalMode& mode, double omega) {
  const double total = mode.total_intensity();
  double sum = 0.0;
  for (const auto& line : mode.lines()) sum += line.weight * lorentzian(omega - line.frequency, mode.linewidth);
  return total * sum;
}

double spectral_overlap(const OpticalMode& mode, double velocity, const TransitionData& transition) {
  const double w0 = transition.resonant_frequency;
  const double doppler = w0 * velocity / units::speed_of_light;
  const double width = mode.linewidth + transition.linewidth;
  double sum = 0.0;
  for (const auto& line : mode.lines()) {
    sum += line.weight * lorentzian((line.frequency - w0) - doppler, width);
  }
  return mode.total_intensity() * sum;
}

VelocityGrid VelocityGrid::uniform(double v_min, double v_max, std::size_t points) {
  if (points < 2 || !(v_max > v_min)) throw DomainError("velocity grid needs v_max > v_min and >= 2 points");
  VelocityGrid g;
  g.spacing = (v_max - v_min) / static_cast<double>(points - 1);
  g.velocities.resize(points);
  for (std::size_t i = 0; i < points; ++i) g.velocities[i] = v_min + g.spacing * static_cast<double>(i);
  return g;
}

VelocityGrid VelocityGrid::thermal(double temperature, const LevelScheme& scheme, double sigmas,
                                   std::size_t points) {
  const double span = sigmas * thermal_velocity_sigma(temperature, scheme);
  return uniform(-span, span, points);
}

void VelocityGrid::validate() const {
  if (velocities.size() < 2) throw ConfigError("velocity grid needs at least two classes");
  for (std::size_t i = 1; i < velocities.size(); ++i) {
    const double d = velocities[i] - velocities[i - 1];
    if (!(d > 0.0) || std::abs(d - spacing) > 1e-9 * std::max(1.0, std::abs(spacing))) {
      throw ConfigError("velocity grid must be strictly increasing and uniform");
    }
  }
}

PopulationState PopulationState::thermal(const VelocityGrid& grid, double temperature,
                                         double total_density, const LevelScheme& scheme) {
  grid.validate();
  if (!(total_density >= 0.0)) throw DomainError("total density must be non-negative");
  PopulationState s;
  s.grid = grid;
  s.temperature = temperature;
  s.total_density = total_density;
  const auto n = grid.size();
  s.n_g.resize(n);
  s.n_a.resize(n);
  s.n_e.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double bin = total_density * maxwell_boltzmann_density(temperature, grid.velocities[i], scheme) *
                       grid.spacing;
    s.n_g[i] = bin * 5.0 / 8.0;
    s.n_a[i] = bin * 3.0 / 8.0;
  }
  return s;
}

RateModel RateModel::rb87_d1(const LevelScheme& scheme) {
  return {scheme.transition(Line::D1, 2, 2), scheme.transition(Line::D1, 1, 2)};
}

ClassRates class_rates(const RateModel& model, std::span<const OpticalMode> modes, double velocity) {
  ClassRates r;
  const double c = units::speed_of_light;
  for (const auto& mode : modes) {
    if (mode.role == ModeRole::pump) {
      const double density = spectral_overlap(mode, velocity, model.ge) / c;
      r.pump_absorption += model.ge.einstein_b_absorption * density;
      r.pump_emission += model.ge.einstein_b_emission * density;
    } else {
      const double density = spectral_overlap(mode, velocity, model.ae) / c;
      r.pump_back_absorption += model.ae.einstein_b_absorption * density;
      r.pump_back_emission += model.ae.einstein_b_emission * density;
    }
  }
  return r;
}

std::array<double, 9> rate_matrix(const RateModel& model, const ClassRates& r) {
  const double a_g = model.ge.einstein_a;
  const double a_a = model.ae.einstein_a;
  // Columns sum to zero: the three-level system is closed.
  return {-r.pump_absorption, 0.0, r.pump_emission + a_g,
          0.0, -r.pump_back_absorption, r.pump_back_emission + a_a,
          r.pump_absorption, r.pump_back_absorption,
          -(r.pump_emission + r.pump_back_emission + a_g + a_a)};
}

PopulationState evolve_populations(const PopulationState& state, const RateModel& model,
                                   std::span<const OpticalMode> modes, double duration, double dt,
                                   const IntegratorOptions& options) {
  if (!(duration >= 0.0)) throw DomainError("evolve_populations: duration must be non-negative");
  if (!(dt > 0.0)) throw DomainError("evolve_populations: dt must be positive");
  for (const auto& mode : modes) mode.validate();

  PopulationState out = state;
  parallel_for(state.size(), options.threads, [&](std::size_t i) {
    const double v = state.grid.velocities[i];
    const auto m = rate_matrix(model, class_rates(model, modes, v));
    Vec3 y{state.n_g[i], state.n_a[i], state.n_e[i]};
    y = integrate_class(m, y, duration, dt, options, v);
    out.n_g[i] = std::max(0.0, y[0]);
    out.n_a[i] = std::max(0.0, y[1]);
    out.n_e[i] = std::max(0.0, y[2]);
  });
  return out;
}

PopulationState ideal_pump(const PopulationState& state) {
  PopulationState out = state;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.n_a[i] = state.class_total(i);
    out.n_g[i] = 0.0;
    out.n_e[i] = 0.0;
  }
  return out;
}

PopulationState prepare_populations(const PopulationState& initial, const RateModel& model,
                                    const OpticalMode& pump, const OpticalMode& pump_back,
                                    const PumpSchedule& schedule) {
  if (pump.role != ModeRole::pump || pump_back.role != ModeRole::pump_back) {
    throw ConfigError("pump and pump-back modes have mismatched roles");
  }
  if (!schedule.ideal_pump) check_addresses(pump, model.ge, "pump");
  check_addresses(pump_back, model.ae, "pump-back");

  PopulationState state = initial;
  if (schedule.ideal_pump) {
    state = ideal_pump(state);
  } else if (schedule.pump_duration > 0.0) {
    const OpticalMode modes[] = {pump};
    state = evolve_populations(state, model, modes, schedule.pump_duration, schedule.max_step,
                               schedule.integrator);
  }

  if (schedule.concurrent && !schedule.ideal_pump) {
    const OpticalMode modes[] = {pump, pump_back};
    return evolve_populations(state, model, modes, schedule.pump_back_duration, schedule.max_step,
                              schedule.integrator);
  }
  const OpticalMode modes[] = {pump_back};
  return evolve_populations(state, model, modes, schedule.pump_back_duration, schedule.max_step,
                            schedule.integrator);
}

OpticalMode pump_back_for_design(const RateModel& model, const CombDesign& design,
                                 const OpticalMode& pump_back) {
  if (design.velocity_classes.empty()) throw ConfigError("comb design has no velocity classes");
  check_addresses(pump_back, model.ae, "pump-back");
  const double w0 = model.ae.resonant_frequency;
  const double c = units::speed_of_light;

  OpticalMode mode = pump_back;
  mode.role = ModeRole::pump_back;
  mode.center_frequency = w0 * (1.0 + design.center_velocity / c);
  if (design.velocity_classes.size() == 1) {
    mode.center_frequency = w0 * (1.0 + design.velocity_classes.front() / c);
    mode.sidebands.reset();
    return mode;
  }
  SidebandSpec sb;
  if (pump_back.sidebands) {
    sb.width_sigma = pump_back.sidebands->width_sigma;
    sb.skew_alpha = pump_back.sidebands->skew_alpha;
  } else {
    sb.width_sigma = 1e6;  // flat envelope
  }
  sb.rf_frequency = w0 * design.velocity_step / c;
  sb.n_min = design.first_index;
  sb.n_max = design.first_index + static_cast<int>(design.velocity_classes.size()) - 1;
  mode.sidebands = sb;
  return mode;
}

PopulationState prepare_afc(const PopulationState& initial, const RateModel& model,
                            const CombDesign& design, const OpticalMode& pump,
                            const OpticalMode& pump_back, const PumpSchedule& schedule) {
  return prepare_populations(initial, model, pump, pump_back_for_design(model, design, pump_back),
                             schedule);
}

std::string population_csv(const PopulationState& state) {
  io::CsvTable t;
  t.add_column("v", state.grid.velocities);
  t.add_column("n_g", state.n_g);
  t.add_column("n_a", state.n_a);
  t.add_column("n_e", state.n_e);
  return t.to_string();
}

}  // namespace afc

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afc/atomic_data.hpp"

namespace afc {

/// RF sidebands of a modulated laser with a skewed-Gaussian envelope,
/// w_n ∝ 2 phi(n / sigma) Phi(alpha n / sigma), n in [n_min, n_max].
struct SidebandSpec {
  double rf_frequency = 0.0;  ///< rad/s
  int n_min = 0;
  int n_max = 0;
  double width_sigma = 1.0;
  double skew_alpha = 0.0;
};

/// Normalised weights; element k belongs to sideband n_min + k.
std::vector<double> sideband_weights(const SidebandSpec& spec);

enum class ModeRole { pump, pump_back };

struct SpectralLine {
  double frequency = 0.0;  ///< rad/s, absolute
  double weight = 0.0;     ///< fraction of total intensity
};

/// A CW laser mode with a Lorentzian line (FWHM `linewidth`) at the carrier
/// and at every sideband. The intensity convention is flat-top:
/// I_total = power / (pi r^2).
struct OpticalMode {
  double center_frequency = 0.0;  ///< rad/s, absolute
  double power = 0.0;             ///< W
  double beam_radius = 1e-3;      ///< m
  double linewidth = 0.0;         ///< rad/s, FWHM
  std::optional<SidebandSpec> sidebands;
  ModeRole role = ModeRole::pump;

  double total_intensity() const;
  std::vector<SpectralLine> lines() const;
  void validate() const;
};

/// Spectral intensity I(w) in W m^-2 per rad/s.
double mode_spectral_intensity(const OpticalMode& mode, double omega);

/// Overlap of the mode spectrum with the Doppler-shifted natural line of
/// `transition` for atoms moving at `velocity` along the beam. The
/// Lorentzian-Lorentzian convolution is evaluated in closed form.
double spectral_overlap(const OpticalMode& mode, double velocity, const TransitionData& transition);

struct VelocityGrid {
  std::vector<double> velocities;  ///< m/s, strictly increasing, uniform
  double spacing = 0.0;

  static VelocityGrid uniform(double v_min, double v_max, std::size_t points);
  /// +/- `sigmas` thermal standard deviations.
  static VelocityGrid thermal(double temperature, const LevelScheme& scheme, double sigmas = 4.0,
                              std::size_t points = 801);
  std::size_t size() const { return velocities.size(); }
  void validate() const;
};

/// Densities per velocity bin (1/m^3 in each bin) of the three levels
/// g = F=2, a = F=1 and e = D1 F'=2.
struct PopulationState {
  VelocityGrid grid;
  std::vector<double> n_g;
  std::vector<double> n_a;
  std::vector<double> n_e;
  double temperature = 0.0;
  double total_density = 0.0;

  /// Maxwell-Boltzmann populations split 5:3 between F=2 and F=1.
  static PopulationState thermal(const VelocityGrid& grid, double temperature, double total_density,
                                 const LevelScheme& scheme);
  double class_total(std::size_t i) const { return n_g[i] + n_a[i] + n_e[i]; }
  std::size_t size() const { return grid.size(); }
};

/// Constants of the closed g/a/e system driven on the D1 line.
struct RateModel {
  TransitionData ge;  ///< F=2 -> F'=2, addressed by the pump
  TransitionData ae;  ///< F=1 -> F'=2, addressed by the pump-back

  static RateModel rb87_d1(const LevelScheme& scheme);
  double total_decay() const { return ge.einstein_a + ae.einstein_a; }
};

/// Per-class first-order rates (1/s) produced by a set of modes.
struct ClassRates {
  double pump_absorption = 0.0;      ///< g -> e
  double pump_emission = 0.0;        ///< e -> g (stimulated)
  double pump_back_absorption = 0.0; ///< a -> e
  double pump_back_emission = 0.0;   ///< e -> a (stimulated)
};

ClassRates class_rates(const RateModel& model, std::span<const OpticalMode> modes, double velocity);

/// Generator M of d(n_g, n_a, n_e)/dt = M (n_g, n_a, n_e), row-major 3x3.
std::array<double, 9> rate_matrix(const RateModel& model, const ClassRates& rates);

enum class IntegratorMethod {
  adaptive_rk45,  ///< RK4 with step doubling and local extrapolation
  fixed_rk4,      ///< classical RK4 with the caller's dt
  exponential,    ///< exact propagator exp(M t) for constant rates
};

struct IntegratorOptions {
  IntegratorMethod method = IntegratorMethod::adaptive_rk45;
  double tolerance = 1e-10;             ///< local error per class, relative to class total
  double negativity_tolerance = 1e-12;  ///< relative to class total
  unsigned threads = 1;
};

/// Integrates the rate equations independently for every velocity class
/// with all `modes` active for `duration`. `dt` is the (maximum) step.
PopulationState evolve_populations(const PopulationState& state, const RateModel& model,
                                   std::span<const OpticalMode> modes, double duration, double dt,
                                   const IntegratorOptions& options = {});

struct PumpSchedule {
  double pump_duration = 0.0;
  double pump_back_duration = 0.0;
  bool ideal_pump = false;  ///< empty F=2 completely instead of simulating the pump
  bool concurrent = false;  ///< keep the pump on during the pump-back stage
  double max_step = 1e-9;
  IntegratorOptions integrator;
};

/// Moves every atom of every class into F=1.
PopulationState ideal_pump(const PopulationState& state);

/// Pump stage followed by the pump-back stage (or pump + pump-back
/// together when `schedule.concurrent`).
PopulationState prepare_populations(const PopulationState& initial, const RateModel& model,
                                    const OpticalMode& pump, const OpticalMode& pump_back,
                                    const PumpSchedule& schedule);

/// Pump-back mode addressing the design's velocity classes on D1 F=1 -> F'=2.
/// Power, radius, linewidth and sideband envelope come from `pump_back`;
/// carrier and RF are derived from the design.
OpticalMode pump_back_for_design(const RateModel& model, const CombDesign& design,
                                 const OpticalMode& pump_back);

PopulationState prepare_afc(const PopulationState& initial, const RateModel& model,
                            const CombDesign& design, const OpticalMode& pump,
                            const OpticalMode& pump_back, const PumpSchedule& schedule);

/// CSV with columns v, n_g, n_a, n_e.
std::string population_csv(const PopulationState& state);

}  // namespace afc

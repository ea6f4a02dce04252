#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "afc/atomic_data.hpp"
#include "afc/io.hpp"
#include "afc/pumping.hpp"

namespace afc {

/// D2 probe observables on a detuning grid. Detuning zero is the
/// F=2 -> F'=3 resonance of the zero-velocity class.
struct Spectrum {
  std::vector<double> detunings;       ///< rad/s, sorted ascending
  std::vector<double> od;              ///< -ln T
  std::vector<double> transfer_phase;  ///< rad, dispersion partner of -od/2
  double cell_length = 0.0;            ///< m, 0 when unknown (imported data)

  std::size_t size() const { return detunings.size(); }
  void validate() const;
};

/// `points` evenly spaced detunings in [min, max] (rad/s).
std::vector<double> detuning_grid(double min, double max, std::size_t points);
/// +/- 1.5 GHz with 2^14 points.
std::vector<double> default_probe_grid();

/// Optical depth of the F=2 population probed on all three D2 components.
/// Each velocity class contributes a complex Lorentzian, so od and
/// transfer_phase are exact Kramers-Kronig partners.
Spectrum od_spectrum(const PopulationState& state, const LevelScheme& scheme,
                     std::span<const double> detunings, double cell_length, unsigned threads = 1);

/// Unpumped vapour at `temperature` with the given total density. Classes
/// are spaced so the D2 Doppler step is a quarter of the natural linewidth.
PopulationState thermal_state(const LevelScheme& scheme, double temperature, double total_density);
Spectrum thermal_spectrum(const LevelScheme& scheme, double temperature, double total_density,
                          std::span<const double> detunings, double cell_length, unsigned threads = 1);

/// H(w) = exp(-od/2 + i phase), sample by sample.
std::vector<std::complex<double>> complex_response(const Spectrum& spectrum);

/// Comb of Gaussian teeth on a flat background. The phase is the causal
/// partner of the teeth (Dawson function); the flat background carries none.
struct GaussianCombSpec {
  double spacing = 0.0;     ///< rad/s
  double tooth_fwhm = 0.0;  ///< rad/s
  double peak_od = 0.0;     ///< tooth height above background
  double background_od = 0.0;
  double center = 0.0;      ///< rad/s, detuning of tooth 0
  int min_tooth = -10;
  int max_tooth = 10;
};
Spectrum synthetic_gaussian_comb(const GaussianCombSpec& spec, std::span<const double> detunings,
                                 double cell_length = 0.0);

struct CombMetrics {
  double peak_od = 0.0;           ///< mean tooth height above background (d)
  double peak_od_absolute = 0.0;  ///< mean tooth maximum including background
  double background_od = 0.0;     ///< median OD between teeth (d0)
  double tooth_fwhm = 0.0;        ///< rad/s, mean over teeth
  double spacing_measured = 0.0;  ///< rad/s, median tooth separation
  double finesse = 0.0;
  std::vector<double> tooth_positions;  ///< rad/s
  std::vector<double> tooth_heights;    ///< absolute OD at the refined maxima
};

struct CombMetricsOptions {
  /// Peaks whose topographic prominence is below this fraction of the OD
  /// range are ignored.
  double min_prominence = 0.2;
  /// Optional analysis window (rad/s); ignored when min >= max.
  double window_min = 0.0;
  double window_max = 0.0;
};

/// Throws AnalysisError when fewer than three teeth are found.
CombMetrics comb_metrics(const Spectrum& spectrum, const CombMetricsOptions& options = {});

/// eta = dt^2 exp(-dt) exp(-7/F^2) exp(-d0) with dt = d / F.
double analytic_efficiency(double peak_od, double finesse, double background_od);

/// Columns detuning_MHz, od, phase_rad.
io::CsvTable spectrum_table(const Spectrum& spectrum);
/// Accepts the same schema; phase_rad is optional.
Spectrum spectrum_from_table(const io::CsvTable& table);

/// Linear interpolation of od and phase onto `detunings`; outside the
/// source range both are zero.
Spectrum resample(const Spectrum& spectrum, std::span<const double> detunings);

}  // namespace afc

#pragma once

#include <complex>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "afc/io.hpp"
#include "afc/spectrum.hpp"

namespace afc {

/// Uniform time grid t_j = start + j dt.
struct TimeGrid {
  double dt = 25e-12;
  std::size_t points = 1u << 16;
  double start = -20e-9;
};

/// Complex field envelope. The carrier detuning (relative to the spectrum
/// zero) is included in the envelope, so the envelope's transform is the
/// field spectrum on the detuning axis.
struct Pulse {
  std::vector<double> times;  ///< s
  std::vector<std::complex<double>> envelope;
  double carrier_detuning = 0.0;   ///< rad/s
  double nominal_bandwidth = 0.0;  ///< Hz, intensity-spectrum FWHM

  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
  /// sum |a|^2 dt
  double energy() const;
  void validate() const;
};

/// Intensity FWHM duration of a transform-limited Gaussian with the given
/// intensity-spectrum FWHM (Hz): 2 ln2 / (pi B).
double gaussian_duration(double fwhm_bandwidth);

/// Transform-limited Gaussian pulses centred at `centers` (s) with equal
/// amplitude; total energy 1. Throws ConfigError if the grid cannot carry
/// the pulse spectrum.
Pulse gaussian_pulse(double fwhm_bandwidth, double carrier_detuning, const TimeGrid& grid,
                     std::span<const double> centers = std::span<const double>{});

/// Detunings (rad/s, ascending) of the pulse's discrete spectrum.
std::vector<double> frequency_grid(const Pulse& pulse);

struct EchoWindow {
  double center = 0.0;  ///< s
  double width = 0.0;   ///< s
  int mode = 0;
  int order = 0;        ///< 0 = transmitted pulse
};

struct EchoOptions {
  double echo_time = 0.0;               ///< s, 2 pi / comb spacing
  int orders = 2;                       ///< echo orders to window
  double window_width = 3e-9;           ///< s
  std::vector<double> mode_offsets{0.0};  ///< s, centre of every input mode
};

struct EchoResult {
  Pulse input;
  Pulse output;
  EchoOptions options;
  std::vector<EchoWindow> windows;
  std::vector<double> window_energies;        ///< output energy per window
  std::vector<double> input_window_energies;  ///< input energy per mode (order-0 window)
  std::vector<double> absorption;             ///< per mode
  std::vector<std::vector<double>> echo_efficiencies;  ///< [mode][order - 1]
  std::vector<std::string> warnings;
};

/// Linear filtering of `pulse` by exp(-od/2 + i phase). If `spectrum` is
/// not sampled on frequency_grid(pulse) it is interpolated, with zero od
/// and phase outside its range; ConfigError if more than 1e-6 of the pulse
/// spectral energy falls outside.
EchoResult propagate(const Pulse& pulse, const Spectrum& spectrum, const EchoOptions& options);

/// Recomputes window energies and efficiencies with another width.
EchoResult windowed_efficiency(const EchoResult& result, double window_width);

/// Energy of the output in [center - width/2, center + width/2], with
/// fractional weights for partially covered samples.
double window_energy(const Pulse& pulse, double center, double width);

/// Window centre (s) maximising the output energy of a window of the
/// result's width within +/- half an echo time of the nominal echo time,
/// narrowed to half the distance to the nearest other input mode.
double echo_peak_time(const EchoResult& result, int order, int mode = 0);

/// 4 sin^2(m phi) for odd m, 4 cos^2(m phi) for even m, phi = 2 pi d / hf.
double interference_intensity(int order, double detuning, double hyperfine_splitting);

struct ScanPoint {
  double detuning = 0.0;  ///< rad/s, relative to the spectrum zero
  double absorption = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
};

struct DetuningScan {
  std::vector<ScanPoint> points;
  double max_absorption_detuning = 0.0;  ///< rad/s, refined location of the absorption maximum
};

struct PulseSpec {
  double fwhm_bandwidth = 500e6;  ///< Hz
  TimeGrid grid;
};

/// One scan sample: a pulse with carrier `detuning` through `spectrum`.
ScanPoint dual_comb_echo(const Spectrum& spectrum, const PulseSpec& pulse, double detuning,
                         const EchoOptions& options);

/// Carrier-detuning scan. `spectrum` should cover every pulse band; each
/// sample is independent and the result does not depend on `threads`.
DetuningScan detuning_scan(const Spectrum& spectrum, const PulseSpec& pulse, std::span<const double> detunings,
                           const EchoOptions& options, unsigned threads = 1);

struct InterferenceFitResult {
  double amplitude = 0.0;
  double envelope_sigma = 0.0;        ///< rad/s
  double phase_offset = 0.0;          ///< rad
  double offset = 0.0;
  double hyperfine_splitting_fit = 0.0;  ///< rad/s
  double visibility = 0.0;
  std::map<std::string, double> uncertainties;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string status;
};

/// eta(d) = A exp(-d^2 / 2 sigma^2) (sin^2(2 pi d / hf + phi0) + c).
double interference_model(double detuning, double amplitude, double sigma, double phase, double offset,
                          double hyperfine_splitting);

/// Least-squares fit of interference_model. `weights` are 1/sigma_i of
/// each sample (empty for uniform). Needs >= 8 samples.
InterferenceFitResult fit_interference(std::span<const double> detunings, std::span<const double> efficiencies,
                                       std::span<const double> weights = std::span<const double>{});

/// Columns t_ns, intensity, re, im.
io::CsvTable trace_table(const Pulse& pulse);
/// Columns detuning_MHz, detuning_from_max_absorption_MHz, absorption, eta1, eta2.
io::CsvTable scan_table(const DetuningScan& scan);

}  // namespace afc

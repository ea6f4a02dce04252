#include "afc/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <gsl/gsl_sf_dawson.h>

#include "afc/errors.hpp"
#include "afc/parallel.hpp"
#include "afc/units.hpp"

namespace afc {

namespace {

struct LineTerm {
  double amplitude;  // L n_g B hbar / c
  double center;     // detuning of the Doppler-shifted resonance
};

double median(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

double interpolate(std::span<const double> x, std::span<const double> y, double at) {
  const auto it = std::upper_bound(x.begin(), x.end(), at);
  if (it == x.begin()) return y.front();
  if (it == x.end()) return y.back();
  const auto i = static_cast<std::size_t>(it - x.begin());
  const double t = (at - x[i - 1]) / (x[i] - x[i - 1]);
  return y[i - 1] + t * (y[i] - y[i - 1]);
}

// Crossing of `level` walking from `start` in direction `step`; NaN if the
// curve does not drop below `level` before `limit`.
double crossing(const Spectrum& s, std::size_t start, int step, double level, double limit) {
  auto i = static_cast<std::ptrdiff_t>(start);
  const auto n = static_cast<std::ptrdiff_t>(s.size());
  while (true) {
    const auto j = i + step;
    if (j < 0 || j >= n) return std::nan("");
    const auto uj = static_cast<std::size_t>(j);
    const auto ui = static_cast<std::size_t>(i);
    if (step < 0 ? s.detunings[uj] < limit : s.detunings[uj] > limit) return std::nan("");
    if (s.od[uj] <= level) {
      const double t = (s.od[ui] - level) / (s.od[ui] - s.od[uj]);
      return s.detunings[ui] + t * (s.detunings[uj] - s.detunings[ui]);
    }
    i = j;
  }
}

}  // namespace

void Spectrum::validate() const {
  if (detunings.size() < 2) throw ConfigError("spectrum needs at least two samples");
  if (od.size() != detunings.size() || transfer_phase.size() != detunings.size()) {
    throw ConfigError("spectrum columns have different lengths");
  }
  for (std::size_t i = 1; i < detunings.size(); ++i) {
    if (!(detunings[i] > detunings[i - 1])) throw ConfigError("spectrum detunings must be strictly increasing");
  }
  for (std::size_t i = 0; i < od.size(); ++i) {
    if (!std::isfinite(od[i]) || !std::isfinite(transfer_phase[i])) {
      throw ConfigError(fmt::format("spectrum sample {} is not finite", i));
    }
  }
}

std::vector<double> detuning_grid(double min, double max, std::size_t points) {
  if (points < 2 || !(max > min)) throw DomainError("detuning grid needs max > min and >= 2 points");
  std::vector<double> g(points);
  const double step = (max - min) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) g[i] = min + step * static_cast<double>(i);
  return g;
}

std::vector<double> default_probe_grid() {
  const double span = units::hz_to_angular(1.5 * units::GHz);
  return detuning_grid(-span, span, 1u << 14);
}

Spectrum od_spectrum(const PopulationState& state, const LevelScheme& scheme,
                     std::span<const double> detunings, double cell_length, unsigned threads) {
  if (!(cell_length > 0.0)) throw DomainError("cell length must be positive");
  const double c = units::speed_of_light;
  const double reference = scheme.transition_frequency(Line::D2, 2, 3);
  const double half_width = 0.5 * scheme.linewidth(Line::D2);

  std::vector<LineTerm> terms;
  for (int fp : {1, 2, 3}) {
    const auto t = scheme.transition(Line::D2, 2, fp);
    const double offset = t.resonant_frequency - reference;
    const double scale = cell_length * t.einstein_b_absorption * units::hbar / c;
    for (std::size_t i = 0; i < state.size(); ++i) {
      if (state.n_g[i] == 0.0) continue;
      terms.push_back({scale * state.n_g[i], offset + t.resonant_frequency * state.grid.velocities[i] / c});
    }
  }

  Spectrum out;
  out.detunings.assign(detunings.begin(), detunings.end());
  out.od.assign(detunings.size(), 0.0);
  out.transfer_phase.assign(detunings.size(), 0.0);
  out.cell_length = cell_length;
  const double a2 = half_width * half_width;
  parallel_for(detunings.size(), threads, [&](std::size_t k) {
    const double omega = reference + detunings[k];
    double re = 0.0;
    double im = 0.0;
    for (const auto& term : terms) {
      const double d = detunings[k] - term.center;
      const double w = term.amplitude / (units::pi * (a2 + d * d));
      re += w * half_width;
      im -= w * d;
    }
    out.od[k] = omega * re;
    out.transfer_phase[k] = -0.5 * omega * im;
  });
  return out;
}

PopulationState thermal_state(const LevelScheme& scheme, double temperature, double total_density) {
  const double sigma = thermal_velocity_sigma(temperature, scheme);
  const double probe = scheme.transition_frequency(Line::D2, 2, 3);
  const double dv = 0.25 * scheme.linewidth(Line::D2) * units::speed_of_light / probe;
  const double span = 5.0 * sigma;
  const auto points = static_cast<std::size_t>(std::ceil(2.0 * span / dv)) + 1;
  return PopulationState::thermal(VelocityGrid::uniform(-span, span, points), temperature, total_density,
                                  scheme);
}

Spectrum thermal_spectrum(const LevelScheme& scheme, double temperature, double total_density,
                          std::span<const double> detunings, double cell_length, unsigned threads) {
  return od_spectrum(thermal_state(scheme, temperature, total_density), scheme, detunings, cell_length,
                     threads);
}

std::vector<std::complex<double>> complex_response(const Spectrum& spectrum) {
  std::vector<std::complex<double>> h(spectrum.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    h[i] = std::exp(std::complex<double>(-0.5 * spectrum.od[i], spectrum.transfer_phase[i]));
  }
  return h;
}

Spectrum synthetic_gaussian_comb(const GaussianCombSpec& spec, std::span<const double> detunings,
                                 double cell_length) {
  if (!(spec.spacing > 0.0) || !(spec.tooth_fwhm > 0.0)) {
    throw DomainError("synthetic comb needs positive spacing and tooth width");
  }
  if (spec.peak_od < 0.0 || spec.background_od < 0.0) throw DomainError("synthetic comb OD must be non-negative");
  const double scale = std::sqrt(2.0) * spec.tooth_fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  Spectrum out;
  out.detunings.assign(detunings.begin(), detunings.end());
  out.od.assign(detunings.size(), spec.background_od);
  out.transfer_phase.assign(detunings.size(), 0.0);
  out.cell_length = cell_length;
  for (std::size_t i = 0; i < detunings.size(); ++i) {
    for (int k = spec.min_tooth; k <= spec.max_tooth; ++k) {
      const double x = (detunings[i] - spec.center - k * spec.spacing) / scale;
      out.od[i] += spec.peak_od * std::exp(-x * x);
      out.transfer_phase[i] += spec.peak_od * gsl_sf_dawson(x) / std::sqrt(units::pi);
    }
  }
  return out;
}

CombMetrics comb_metrics(const Spectrum& input, const CombMetricsOptions& options) {
  input.validate();
  Spectrum s = input;
  if (options.window_max > options.window_min) {
    Spectrum w;
    for (std::size_t i = 0; i < input.size(); ++i) {
      if (input.detunings[i] < options.window_min || input.detunings[i] > options.window_max) continue;
      w.detunings.push_back(input.detunings[i]);
      w.od.push_back(input.od[i]);
      w.transfer_phase.push_back(input.transfer_phase[i]);
    }
    s = std::move(w);
    if (s.size() < 3) throw AnalysisError("comb analysis window contains fewer than three samples");
  }
  const std::size_t n = s.size();
  const auto [lo_it, hi_it] = std::minmax_element(s.od.begin(), s.od.end());
  const double range = *hi_it - *lo_it;
  if (!(range > 0.0)) throw AnalysisError("flat spectrum: no comb teeth found");

  // Local maxima filtered by topographic prominence.
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(s.od[i] > s.od[i - 1] && s.od[i] >= s.od[i + 1])) continue;
    double left_min = s.od[i];
    for (std::size_t j = i; j-- > 0;) {
      if (s.od[j] > s.od[i]) break;
      left_min = std::min(left_min, s.od[j]);
    }
    double right_min = s.od[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (s.od[j] > s.od[i]) break;
      right_min = std::min(right_min, s.od[j]);
    }
    if (s.od[i] - std::max(left_min, right_min) >= options.min_prominence * range) peaks.push_back(i);
  }
  if (peaks.size() < 3) {
    throw AnalysisError(fmt::format("found {} comb teeth, need at least 3", peaks.size()));
  }

  CombMetrics m;
  for (const auto i : peaks) {
    // Parabola through the three samples around the maximum.
    const double y0 = s.od[i - 1];
    const double y1 = s.od[i];
    const double y2 = s.od[i + 1];
    const double denom = y0 - 2.0 * y1 + y2;
    double shift = 0.0;
    if (denom < 0.0) shift = std::clamp(0.5 * (y0 - y2) / denom, -0.5, 0.5);
    const double h = s.detunings[i + 1] - s.detunings[i];
    m.tooth_positions.push_back(s.detunings[i] + shift * h);
    m.tooth_heights.push_back(y1 - 0.25 * (y0 - y2) * shift);
  }

  std::vector<double> gaps;
  for (std::size_t k = 1; k < m.tooth_positions.size(); ++k) {
    gaps.push_back(m.tooth_positions[k] - m.tooth_positions[k - 1]);
  }
  m.spacing_measured = median(gaps);

  std::vector<double> between;
  for (std::size_t k = 1; k < m.tooth_positions.size(); ++k) {
    between.push_back(interpolate(s.detunings, s.od, 0.5 * (m.tooth_positions[k] + m.tooth_positions[k - 1])));
  }
  m.background_od = std::max(0.0, median(between));

  double width_sum = 0.0;
  double height_sum = 0.0;
  double absolute_sum = 0.0;
  int widths = 0;
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    const double height = m.tooth_heights[k] - m.background_od;
    height_sum += height;
    absolute_sum += m.tooth_heights[k];
    const double level = m.background_od + 0.5 * height;
    const double left = crossing(s, peaks[k], -1, level, m.tooth_positions[k] - m.spacing_measured);
    const double right = crossing(s, peaks[k], +1, level, m.tooth_positions[k] + m.spacing_measured);
    if (std::isnan(left) || std::isnan(right)) continue;
    width_sum += right - left;
    ++widths;
  }
  if (widths == 0) throw AnalysisError("no comb tooth has a resolvable half-maximum width");
  const auto teeth = static_cast<double>(peaks.size());
  m.tooth_fwhm = width_sum / widths;
  m.peak_od = height_sum / teeth;
  m.peak_od_absolute = absolute_sum / teeth;
  m.finesse = m.spacing_measured / m.tooth_fwhm;
  return m;
}

double analytic_efficiency(double peak_od, double finesse, double background_od) {
  if (!(finesse > 0.0)) throw DomainError("comb finesse must be positive");
  if (peak_od < 0.0 || background_od < 0.0) throw DomainError("optical depths must be non-negative");
  const double effective = peak_od / finesse;
  return effective * effective * std::exp(-effective) * std::exp(-7.0 / (finesse * finesse)) *
         std::exp(-background_od);
}

io::CsvTable spectrum_table(const Spectrum& spectrum) {
  io::CsvTable t;
  std::vector<double> mhz(spectrum.size());
  std::transform(spectrum.detunings.begin(), spectrum.detunings.end(), mhz.begin(), units::angular_to_mhz);
  t.add_column("detuning_MHz", std::move(mhz));
  t.add_column("od", spectrum.od);
  t.add_column("phase_rad", spectrum.transfer_phase);
  return t;
}

Spectrum spectrum_from_table(const io::CsvTable& table) {
  Spectrum s;
  const auto& mhz = table.column("detuning_MHz");
  s.detunings.resize(mhz.size());
  std::transform(mhz.begin(), mhz.end(), s.detunings.begin(), units::mhz_to_angular);
  s.od = table.column("od");
  s.transfer_phase = table.has("phase_rad") ? table.column("phase_rad") : std::vector<double>(mhz.size(), 0.0);
  s.validate();
  return s;
}

Spectrum resample(const Spectrum& spectrum, std::span<const double> detunings) {
  spectrum.validate();
  Spectrum out;
  out.detunings.assign(detunings.begin(), detunings.end());
  out.cell_length = spectrum.cell_length;
  out.od.resize(detunings.size());
  out.transfer_phase.resize(detunings.size());
  const double lo = spectrum.detunings.front();
  const double hi = spectrum.detunings.back();
  for (std::size_t i = 0; i < detunings.size(); ++i) {
    const double x = detunings[i];
    if (x < lo || x > hi) {
      out.od[i] = 0.0;
      out.transfer_phase[i] = 0.0;
      continue;
    }
    out.od[i] = interpolate(spectrum.detunings, spectrum.od, x);
    out.transfer_phase[i] = interpolate(spectrum.detunings, spectrum.transfer_phase, x);
  }
  return out;
}

}  // namespace afc

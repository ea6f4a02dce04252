#include "afc/echo.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <optional>

#include <boost/math/tools/minima.hpp>
#include <fftw3.h>
#include <fmt/format.h>

#include "afc/errors.hpp"
#include "afc/optimize.hpp"
#include "afc/parallel.hpp"
#include "afc/units.hpp"

namespace afc {

namespace {

using cplx = std::complex<double>;

// FFTW planning is not thread-safe; execution on new arrays is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPlan {
public:
  FftPlan(std::size_t n, int sign) : n_(n) {
    std::vector<cplx> scratch(n);
    auto* data = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), data, data, sign, FFTW_ESTIMATE);
    if (!plan_) throw Error("FFTW could not create a plan");
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void operator()(std::vector<cplx>& data) const {
    // FFTW_ESTIMATE plans carry no alignment assumption beyond the default
    // allocator's, which std::vector<complex<double>> meets.
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan_, p, p);
  }
  std::size_t size() const { return n_; }

private:
  std::size_t n_;
  fftw_plan plan_ = nullptr;
};

double bin_frequency(std::size_t k, std::size_t n, double dw) {
  return k < n / 2 ? static_cast<double>(k) * dw : (static_cast<double>(k) - static_cast<double>(n)) * dw;
}

bool same_grid(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  const double tol = 1e-9 * std::abs(a.back() - a.front());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol) return false;
  }
  return true;
}

void check_band(const std::vector<cplx>& pulse_spectrum, double dw, double lo, double hi) {
  const std::size_t n = pulse_spectrum.size();
  double outside = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = bin_frequency(k, n, dw);
    const double e = std::norm(pulse_spectrum[k]);
    total += e;
    if (w < lo || w > hi) outside += e;
  }
  if (total > 0.0 && outside > 1e-6 * total) {
    throw ConfigError(fmt::format(
        "pulse spectrum extends beyond the spectrum grid [{:.1f}, {:.1f}] MHz ({:.2e} of its energy)",
        units::angular_to_mhz(lo), units::angular_to_mhz(hi), outside / total));
  }
}

// Transfer function sampled in FFT bin order.
std::vector<cplx> transfer_in_bin_order(const Pulse& pulse, const Spectrum& spectrum,
                                        const std::vector<cplx>& pulse_spectrum) {
  const auto grid = frequency_grid(pulse);
  const std::size_t n = grid.size();
  Spectrum on_grid;
  if (same_grid(grid, spectrum.detunings)) {
    on_grid = spectrum;
  } else {
    check_band(pulse_spectrum, grid[1] - grid[0], spectrum.detunings.front(), spectrum.detunings.back());
    on_grid = resample(spectrum, grid);
  }
  const auto h_sorted = complex_response(on_grid);
  std::vector<cplx> h(n);
  for (std::size_t k = 0; k < n; ++k) h[k] = h_sorted[(k + n / 2) % n];
  return h;
}

void fill_windows(EchoResult& r) {
  const auto& opt = r.options;
  if (opt.window_width <= 0.0) throw ConfigError("echo window width must be positive");
  if (opt.orders > 0 && !(opt.echo_time > 0.0)) throw ConfigError("echo time must be positive");
  if (opt.mode_offsets.empty()) throw ConfigError("at least one input mode is required");
  const double t_lo = r.output.times.front() - 0.5 * r.output.dt();
  const double t_hi = r.output.times.back() + 0.5 * r.output.dt();

  r.windows.clear();
  r.window_energies.clear();
  r.input_window_energies.clear();
  r.absorption.clear();
  r.echo_efficiencies.clear();
  r.warnings.clear();
  for (std::size_t mode = 0; mode < opt.mode_offsets.size(); ++mode) {
    for (int m = 0; m <= opt.orders; ++m) {
      const EchoWindow w{opt.mode_offsets[mode] + m * opt.echo_time, opt.window_width, static_cast<int>(mode), m};
      if (w.center - 0.5 * w.width < t_lo || w.center + 0.5 * w.width > t_hi) {
        throw ConfigError(fmt::format("window of mode {} order {} at {:.3f} ns lies outside the trace", mode, m,
                                      w.center / units::ns));
      }
      r.windows.push_back(w);
      r.window_energies.push_back(window_energy(r.output, w.center, w.width));
    }
  }
  for (std::size_t a = 0; a < r.windows.size(); ++a) {
    for (std::size_t b = a + 1; b < r.windows.size(); ++b) {
      if (std::abs(r.windows[a].center - r.windows[b].center) < opt.window_width) {
        r.warnings.push_back(fmt::format(
            "windows (mode {}, order {}) and (mode {}, order {}) overlap", r.windows[a].mode, r.windows[a].order,
            r.windows[b].mode, r.windows[b].order));
      }
    }
  }
  const std::size_t per_mode = static_cast<std::size_t>(opt.orders) + 1;
  for (std::size_t mode = 0; mode < opt.mode_offsets.size(); ++mode) {
    const double e_in = window_energy(r.input, opt.mode_offsets[mode], opt.window_width);
    if (!(e_in > 0.0)) throw AnalysisError(fmt::format("input window of mode {} holds no energy", mode));
    r.input_window_energies.push_back(e_in);
    r.absorption.push_back(std::clamp(1.0 - r.window_energies[mode * per_mode] / e_in, 0.0, 1.0));
    std::vector<double> eff;
    for (int m = 1; m <= opt.orders; ++m) {
      eff.push_back(r.window_energies[mode * per_mode + static_cast<std::size_t>(m)] / e_in);
    }
    r.echo_efficiencies.push_back(std::move(eff));
  }
}

double refine_parabola(std::span<const double> x, std::span<const double> y, std::size_t i) {
  if (i == 0 || i + 1 >= y.size()) return x[i];
  const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
  if (!(denom < 0.0)) return x[i];
  const double shift = std::clamp(0.5 * (y[i - 1] - y[i + 1]) / denom, -0.5, 0.5);
  return x[i] + shift * (x[i + 1] - x[i]);
}

}  // namespace

double Pulse::energy() const {
  double e = 0.0;
  for (const auto& a : envelope) e += std::norm(a);
  return e * dt();
}

void Pulse::validate() const {
  if (times.size() < 2 || times.size() != envelope.size()) throw ConfigError("pulse needs matching time and envelope arrays");
  const double step = dt();
  if (!(step > 0.0)) throw ConfigError("pulse time grid must be increasing");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - times[i - 1] - step) > 1e-6 * step) throw ConfigError("pulse time grid must be uniform");
  }
  if (!std::isfinite(energy())) throw ConfigError("pulse energy is not finite");
}

double gaussian_duration(double fwhm_bandwidth) {
  if (!(fwhm_bandwidth > 0.0)) throw DomainError("pulse bandwidth must be positive");
  return 2.0 * std::log(2.0) / (units::pi * fwhm_bandwidth);
}

Pulse gaussian_pulse(double fwhm_bandwidth, double carrier_detuning, const TimeGrid& grid,
                     std::span<const double> centers) {
  const double duration = gaussian_duration(fwhm_bandwidth);
  if (!(grid.dt > 0.0) || grid.points < 16) throw ConfigError("time grid needs dt > 0 and at least 16 points");
  if (grid.points & (grid.points - 1)) throw ConfigError("time grid size must be a power of two");
  const double field_sigma = duration / (2.0 * std::sqrt(std::log(2.0)));
  const double spectral_sigma = 1.0 / (std::sqrt(2.0) * field_sigma);  // intensity spectrum, rad/s
  const double nyquist = units::pi / grid.dt;
  if (std::abs(carrier_detuning) + 8.0 * spectral_sigma > nyquist) {
    throw ConfigError(fmt::format("time step {:.1f} ps aliases a {:.0f} MHz pulse at {:.0f} MHz detuning",
                                  grid.dt / units::ps, fwhm_bandwidth / units::MHz,
                                  units::angular_to_mhz(carrier_detuning)));
  }
  const std::vector<double> default_center{0.0};
  if (centers.empty()) centers = default_center;
  const double t_end = grid.start + grid.dt * static_cast<double>(grid.points - 1);
  for (double c : centers) {
    if (c - 6.0 * duration < grid.start || c + 6.0 * duration > t_end) {
      throw ConfigError(fmt::format("pulse centred at {:.3f} ns does not fit in the time grid", c / units::ns));
    }
  }

  Pulse p;
  p.carrier_detuning = carrier_detuning;
  p.nominal_bandwidth = fwhm_bandwidth;
  p.times.resize(grid.points);
  p.envelope.resize(grid.points);
  for (std::size_t j = 0; j < grid.points; ++j) {
    const double t = grid.start + grid.dt * static_cast<double>(j);
    p.times[j] = t;
    double a = 0.0;
    for (double c : centers) a += std::exp(-0.5 * (t - c) * (t - c) / (field_sigma * field_sigma));
    p.envelope[j] = a * std::polar(1.0, carrier_detuning * t);
  }
  const double scale = 1.0 / std::sqrt(p.energy());
  for (auto& a : p.envelope) a *= scale;
  return p;
}

std::vector<double> frequency_grid(const Pulse& pulse) {
  const std::size_t n = pulse.times.size();
  const double dw = units::two_pi / (static_cast<double>(n) * pulse.dt());
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = (static_cast<double>(k) - static_cast<double>(n / 2)) * dw;
  return w;
}

EchoResult propagate(const Pulse& pulse, const Spectrum& spectrum, const EchoOptions& options) {
  pulse.validate();
  spectrum.validate();
  const std::size_t n = pulse.times.size();
  if (n & (n - 1)) throw ConfigError("pulse grid size must be a power of two");

  std::vector<cplx> field(pulse.envelope);
  FftPlan(n, FFTW_FORWARD)(field);
  const auto h = transfer_in_bin_order(pulse, spectrum, field);
  for (std::size_t k = 0; k < n; ++k) field[k] *= h[k] / static_cast<double>(n);
  FftPlan(n, FFTW_BACKWARD)(field);

  EchoResult r;
  r.input = pulse;
  r.output = pulse;
  r.output.envelope = std::move(field);
  r.options = options;
  fill_windows(r);
  return r;
}

EchoResult windowed_efficiency(const EchoResult& result, double window_width) {
  EchoResult r = result;
  r.options.window_width = window_width;
  fill_windows(r);
  return r;
}

double window_energy(const Pulse& pulse, double center, double width) {
  const double dt = pulse.dt();
  const double lo = center - 0.5 * width;
  const double hi = center + 0.5 * width;
  const double t0 = pulse.times.front();
  const auto first = static_cast<std::ptrdiff_t>(std::floor((lo - t0) / dt));
  const auto last = static_cast<std::ptrdiff_t>(std::ceil((hi - t0) / dt));
  double e = 0.0;
  for (auto j = std::max<std::ptrdiff_t>(first, 0);
       j <= std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(pulse.times.size()) - 1); ++j) {
    const auto u = static_cast<std::size_t>(j);
    const double a = pulse.times[u] - 0.5 * dt;
    const double b = pulse.times[u] + 0.5 * dt;
    const double overlap = std::max(0.0, std::min(b, hi) - std::max(a, lo));
    e += std::norm(pulse.envelope[u]) * overlap;
  }
  return e;
}

double echo_peak_time(const EchoResult& result, int order, int mode) {
  const auto& opt = result.options;
  if (mode < 0 || static_cast<std::size_t>(mode) >= opt.mode_offsets.size()) throw DomainError("no such input mode");
  const double nominal = opt.mode_offsets[static_cast<std::size_t>(mode)] + order * opt.echo_time;
  double reach = order > 0 ? 0.5 * opt.echo_time : 2.0 * opt.window_width;
  // Keep clear of the same order of the other modes.
  for (std::size_t k = 0; k < opt.mode_offsets.size(); ++k) {
    const double gap = std::abs(opt.mode_offsets[k] - opt.mode_offsets[static_cast<std::size_t>(mode)]);
    if (gap > 0.0) reach = std::min(reach, 0.5 * gap);
  }
  const auto& times = result.output.times;
  std::vector<double> centers;
  std::vector<double> energies;
  for (double t : times) {
    if (t < nominal - reach || t > nominal + reach) continue;
    if (t - 0.5 * opt.window_width < times.front() || t + 0.5 * opt.window_width > times.back()) continue;
    centers.push_back(t);
    energies.push_back(window_energy(result.output, t, opt.window_width));
  }
  if (centers.size() < 3) throw AnalysisError("echo search range lies outside the trace");
  // Interior maxima only: the edges of the range sit on the tails of
  // neighbouring orders.
  std::optional<std::size_t> best;
  for (std::size_t i = 1; i + 1 < energies.size(); ++i) {
    if (energies[i] > energies[i - 1] && energies[i] >= energies[i + 1] && (!best || energies[i] > energies[*best])) {
      best = i;
    }
  }
  if (!best) throw AnalysisError(fmt::format("no echo of order {} found near {:.3f} ns", order, nominal / units::ns));
  return refine_parabola(centers, energies, *best);
}

double interference_intensity(int order, double detuning, double hyperfine_splitting) {
  if (order < 1) throw DomainError("echo order must be at least 1");
  if (!(hyperfine_splitting > 0.0)) throw DomainError("hyperfine splitting must be positive");
  const double phi = units::two_pi * detuning / hyperfine_splitting;
  const double s = order % 2 ? std::sin(order * phi) : std::cos(order * phi);
  return 4.0 * s * s;
}

ScanPoint dual_comb_echo(const Spectrum& spectrum, const PulseSpec& spec, double detuning,
                         const EchoOptions& options) {
  const auto pulse = gaussian_pulse(spec.fwhm_bandwidth, detuning, spec.grid, options.mode_offsets);
  const auto r = propagate(pulse, spectrum, options);
  ScanPoint p;
  p.detuning = detuning;
  p.absorption = r.absorption.front();
  p.eta1 = options.orders >= 1 ? r.echo_efficiencies.front()[0] : 0.0;
  p.eta2 = options.orders >= 2 ? r.echo_efficiencies.front()[1] : 0.0;
  return p;
}

DetuningScan detuning_scan(const Spectrum& spectrum, const PulseSpec& spec, std::span<const double> detunings,
                           const EchoOptions& options, unsigned threads) {
  if (detunings.empty()) throw ConfigError("detuning scan needs at least one point");
  // Every pulse shares one time grid, so resample the spectrum once.
  const auto probe = gaussian_pulse(spec.fwhm_bandwidth, detunings.front(), spec.grid, options.mode_offsets);
  const auto grid = frequency_grid(probe);
  const Spectrum shared = same_grid(grid, spectrum.detunings) ? spectrum : resample(spectrum, grid);

  DetuningScan scan;
  scan.points.resize(detunings.size());
  const bool resampled = !same_grid(grid, spectrum.detunings);
  parallel_for(detunings.size(), threads, [&](std::size_t i) {
    if (resampled) {
      const auto pulse = gaussian_pulse(spec.fwhm_bandwidth, detunings[i], spec.grid, options.mode_offsets);
      std::vector<cplx> field(pulse.envelope);
      FftPlan(field.size(), FFTW_FORWARD)(field);
      check_band(field, grid[1] - grid[0], spectrum.detunings.front(), spectrum.detunings.back());
    }
    scan.points[i] = dual_comb_echo(shared, spec, detunings[i], options);
  });

  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : scan.points) {
    x.push_back(p.detuning);
    y.push_back(p.absorption);
  }
  const auto best = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  scan.max_absorption_detuning = refine_parabola(x, y, best);
  return scan;
}

double interference_model(double detuning, double amplitude, double sigma, double phase, double offset,
                          double hyperfine_splitting) {
  const double s = std::sin(units::two_pi * detuning / hyperfine_splitting + phase);
  return amplitude * std::exp(-0.5 * detuning * detuning / (sigma * sigma)) * (s * s + offset);
}

InterferenceFitResult fit_interference(std::span<const double> x, std::span<const double> y,
                                       std::span<const double> weights) {
  const std::size_t n = x.size();
  if (n < 8 || y.size() != n) throw DomainError("interference fit needs at least 8 samples");
  if (!weights.empty() && weights.size() != n) throw DomainError("weights must match the samples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  const double span = x[order.back()] - x[order.front()];
  if (!(span > 0.0)) throw DomainError("interference fit needs distinct detunings");

  // Envelope from weighted moments of the data.
  double sum = 0.0;
  double first = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::max(y[i], 0.0);
    sum += w;
    first += w * x[i];
    peak = std::max(peak, y[i]);
  }
  if (!(sum > 0.0)) throw FitError("interference data carry no signal");
  const double centre = first / sum;
  double second = 0.0;
  for (std::size_t i = 0; i < n; ++i) second += std::max(y[i], 0.0) * (x[i] - centre) * (x[i] - centre);
  const double sigma0 = std::clamp(std::sqrt(second / sum), span / 50.0, 10.0 * span);

  // Oscillation period from a periodogram of the envelope-normalised data.
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < n; ++i) {
    const double env = std::exp(-0.5 * (x[i] - centre) * (x[i] - centre) / (sigma0 * sigma0));
    if (env < 0.1) continue;
    xs.push_back(x[i]);
    ys.push_back(y[i] / env);
  }
  if (xs.size() < 4) {
    xs.assign(x.begin(), x.end());
    ys.assign(y.begin(), y.end());
  }
  const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double min_gap = span;
  for (std::size_t i = 1; i < n; ++i) {
    const double gap = x[order[i]] - x[order[i - 1]];
    if (gap > 0.0) min_gap = std::min(min_gap, gap);
  }
  const double f_lo = 1.0 / span;
  const double f_hi = 0.5 / min_gap;
  double best_f = f_lo;
  cplx best_s = 0.0;
  for (int k = 0; k <= 4000; ++k) {
    const double f = f_lo + (f_hi - f_lo) * k / 4000.0;
    cplx s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (ys[i] - mean) * std::polar(1.0, -units::two_pi * f * xs[i]);
    if (std::abs(s) > std::abs(best_s)) {
      best_s = s;
      best_f = f;
    }
  }
  const double hf0 = 2.0 / best_f;
  const double phase0 = 0.5 * std::arg(-best_s);
  const double offset0 = 0.1;
  const double amp0 = peak / (1.0 + offset0);

  const opt::Box box{{0.0, span / 100.0, -units::two_pi, 0.0, 2.0 * min_gap},
                     {20.0 * std::max(peak, 1e-300) + 1e-300, 100.0 * span, units::two_pi, 50.0, 4.0 * span}};
  auto residuals = [&](std::span<const double> p, std::span<double> r) {
    for (std::size_t i = 0; i < n; ++i) {
      const double w = weights.empty() ? 1.0 : weights[i];
      r[i] = w * (y[i] - interference_model(x[i], p[0], p[1], p[2], p[3], p[4]));
    }
  };

  opt::Options options;
  options.max_iterations = 500;
  std::optional<opt::LeastSquaresResult> best;
  std::vector<std::string> diagnostics;
  for (double dphi : {0.0, 0.25 * units::pi, -0.25 * units::pi, 0.5 * units::pi}) {
    for (double scale : {1.0, 0.98, 1.02}) {
      std::vector<double> start{amp0, sigma0, phase0 + dphi, offset0, hf0 * scale};
      box.clamp(start);
      try {
        auto fit = opt::levenberg_marquardt(residuals, n, start, box, options);
        diagnostics.push_back(fmt::format("start phi0={:.3f}: cost {:.4e}, {}", start[2], fit.fit.cost, fit.fit.status));
        if (!best || fit.fit.cost < best->fit.cost) best = std::move(fit);
      } catch (const FitError& e) {
        diagnostics.push_back(fmt::format("start phi0={:.3f}: {}", start[2], e.what()));
      }
    }
  }
  if (!best || !best->fit.converged) {
    throw FitError(fmt::format("interference fit did not converge: {}", fmt::join(diagnostics, "; ")));
  }

  const auto& p = best->fit.x;
  InterferenceFitResult out;
  out.amplitude = p[0];
  out.envelope_sigma = p[1];
  // sin^2 has period pi in its argument.
  out.phase_offset = std::remainder(p[2], units::pi);
  out.offset = p[3];
  out.hyperfine_splitting_fit = p[4];
  out.residual_norm = std::sqrt(best->fit.cost);
  out.iterations = best->fit.iterations;
  out.converged = best->fit.converged;
  out.status = best->fit.status;
  const char* names[] = {"amplitude", "envelope_sigma", "phase_offset", "offset", "hyperfine_splitting"};
  if (!best->covariance.empty()) {
    for (std::size_t i = 0; i < 5; ++i) out.uncertainties[names[i]] = std::sqrt(std::max(0.0, best->covariance[i * 5 + i]));
  }

  // Visibility from the adjacent maximum/minimum nearest zero at positive detuning.
  auto model = [&](double d) { return interference_model(d, p[0], p[1], p[2], p[3], p[4]); };
  const double reach = p[4];
  const int samples = 4000;
  std::vector<double> grid(samples + 1);
  std::vector<double> vals(samples + 1);
  for (int i = 0; i <= samples; ++i) {
    grid[static_cast<std::size_t>(i)] = reach * i / samples;
    vals[static_cast<std::size_t>(i)] = model(grid[static_cast<std::size_t>(i)]);
  }
  std::vector<std::pair<std::size_t, bool>> extrema;  // index, is_max
  for (std::size_t i = 1; i < grid.size() - 1; ++i) {
    if (vals[i] > vals[i - 1] && vals[i] >= vals[i + 1]) extrema.emplace_back(i, true);
    if (vals[i] < vals[i - 1] && vals[i] <= vals[i + 1]) extrema.emplace_back(i, false);
    if (extrema.size() == 2) break;
  }
  if (extrema.size() == 2) {
    const double h = reach / samples;
    auto refine = [&](std::size_t i, bool is_max) {
      auto f = [&](double d) { return is_max ? -model(d) : model(d); };
      const auto r = boost::math::tools::brent_find_minima(f, grid[i] - h, grid[i] + h, 52);
      return is_max ? -r.second : r.second;
    };
    const double a = refine(extrema[0].first, extrema[0].second);
    const double b = refine(extrema[1].first, extrema[1].second);
    const double hi = std::max(a, b);
    const double lo = std::max(std::min(a, b), 0.0);
    out.visibility = hi + lo > 0.0 ? std::clamp((hi - lo) / (hi + lo), 0.0, 1.0) : 0.0;
  }
  return out;
}

io::CsvTable trace_table(const Pulse& pulse) {
  io::CsvTable t;
  std::vector<double> tn;
  std::vector<double> intensity;
  std::vector<double> re;
  std::vector<double> im;
  for (std::size_t i = 0; i < pulse.times.size(); ++i) {
    tn.push_back(pulse.times[i] / units::ns);
    intensity.push_back(std::norm(pulse.envelope[i]));
    re.push_back(pulse.envelope[i].real());
    im.push_back(pulse.envelope[i].imag());
  }
  t.add_column("t_ns", std::move(tn));
  t.add_column("intensity", std::move(intensity));
  t.add_column("re", std::move(re));
  t.add_column("im", std::move(im));
  return t;
}

io::CsvTable scan_table(const DetuningScan& scan) {
  io::CsvTable t;
  std::vector<double> d;
  std::vector<double> d_max;
  std::vector<double> a;
  std::vector<double> e1;
  std::vector<double> e2;
  for (const auto& p : scan.points) {
    d.push_back(units::angular_to_mhz(p.detuning));
    d_max.push_back(units::angular_to_mhz(p.detuning - scan.max_absorption_detuning));
    a.push_back(p.absorption);
    e1.push_back(p.eta1);
    e2.push_back(p.eta2);
  }
  t.add_column("detuning_MHz", std::move(d));
  t.add_column("detuning_from_max_absorption_MHz", std::move(d_max));
  t.add_column("absorption", std::move(a));
  t.add_column("eta1", std::move(e1));
  t.add_column("eta2", std::move(e2));
  return t;
}

}  // namespace afc

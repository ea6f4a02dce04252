// One line per acceptance criterion; exit status 1 if any fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include <afc/atomic_data.hpp>
#include <afc/echo.hpp>
#include <afc/errors.hpp>
#include <afc/fit.hpp>
#include <afc/io.hpp>
#include <afc/metrics.hpp>
#include <afc/pumping.hpp>
#include <afc/spectrum.hpp>
#include <afc/units.hpp>

#include "benchmark_fidelity.hpp"
#include "commands.hpp"
#include "rate_oracle.hpp"

using namespace afc;
using units::angular_to_mhz;
using units::mhz_to_angular;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

const LevelScheme& rb() { return rb87_level_scheme(); }

constexpr double cell_temperature = units::celsius_to_kelvin(26.9);
constexpr double cell_length = 0.1;

unsigned hardware_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// Thermal vapour, F=2 emptied, classes of `design` pumped back as in the
// three-class figure configs.
PopulationState prepared_comb(const CombDesign& design) {
  const auto model = RateModel::rb87_d1(rb());
  const auto thermal =
      thermal_state(rb(), cell_temperature, vapor_number_density(cell_temperature, rb()));
  OpticalMode pump;
  pump.role = ModeRole::pump;
  pump.center_frequency = model.ge.resonant_frequency;
  pump.linewidth = mhz_to_angular(1.0);
  OpticalMode back;
  back.role = ModeRole::pump_back;
  back.center_frequency = model.ae.resonant_frequency;
  back.power = 0.1e-3;
  back.beam_radius = 1e-3;
  back.linewidth = mhz_to_angular(1.0);
  PumpSchedule schedule;
  schedule.ideal_pump = true;
  schedule.pump_back_duration = 1e-6;
  schedule.integrator.method = IntegratorMethod::exponential;
  schedule.integrator.threads = hardware_threads();
  return prepare_afc(thermal, model, design, pump, back, schedule);
}

TimeGrid echo_grid() { return {25e-12, 1u << 14, -20e-9}; }

// ---------------------------------------------------------------- 1

Verdict metrics_rows() {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / fmt::format("afc-acceptance-{}", ::getpid());
  fs::create_directories(dir);
  io::write_text(dir / "table1.csv", "mu_in,eta_afc,sbr\n0.024,0.0438,15.1\n0.017,0.026,3.2\n");
  afcsim::RunOptions options;
  options.input = dir / "table1.csv";
  options.out = dir / "out";
  std::ostringstream quiet;
  auto* saved = std::cout.rdbuf(quiet.rdbuf());
  const int code = afcsim::guarded([&] { afcsim::run_metrics(options); }, std::cerr);
  std::cout.rdbuf(saved);
  if (code != 0) return {false, fmt::format("metrics command exited with {}", code)};
  const auto report = nlohmann::json::parse(io::read_text(dir / "out" / "metrics.json"));
  fs::remove_all(dir);

  struct Expect {
    const char* field;
    double value[2];
    double half_unit[2];
  };
  const Expect expected[] = {{"f_classical", {0.690, 0.694}, {0.0005, 0.0005}},
                             {"f_qubit", {0.94, 0.81}, {0.005, 0.005}},
                             {"g2_out", {0.120, 0.42}, {0.0005, 0.005}},
                             {"g2_in_threshold", {0.432, 0.14}, {0.0005, 0.005}},
                             {"g2_im_limit", {16.1, 4.2}, {0.05, 0.05}},
                             {"g2_si_threshold", {2.14, 2.91}, {0.005, 0.005}}};
  bool ok = report["rows"].size() == 2;
  std::string worst;
  double worst_ratio = 0.0;
  for (std::size_t r = 0; ok && r < 2; ++r) {
    for (const auto& e : expected) {
      const auto& node = report["rows"][r][e.field];
      const double got = node.is_object() ? node["value"].get<double>() : node.get<double>();
      const double ratio = std::abs(got - e.value[r]) / e.half_unit[r];
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        worst = fmt::format("{} row {} = {:.5g}", e.field, r + 1, got);
      }
      ok = ok && ratio <= 1.0;
    }
  }
  return {ok, fmt::format("12 values; largest deviation {:.2f} half-units ({})", worst_ratio, worst)};
}

// ---------------------------------------------------------------- 2

Verdict analytic() {
  const double eta = analytic_efficiency(1.25, 4.37, 0.3);
  return {std::abs(eta - 0.032) <= 0.001, fmt::format("eta = {:.3f} % (target 3.2 +/- 0.1 %)", 100.0 * eta)};
}

// ---------------------------------------------------------------- 3

struct EchoTiming {
  double window_peak = 0.0;
  double intensity_peak = 0.0;
  double nominal = 0.0;
  double seconds = 0.0;
};

EchoTiming echo_timing(int n) {
  const auto start = std::chrono::steady_clock::now();
  const auto design = design_comb(rb(), {2, 3}, n, -1, 1);
  const auto pulse = gaussian_pulse(430e6, 0.0, echo_grid());
  const auto spectrum =
      od_spectrum(prepared_comb(design), rb(), frequency_grid(pulse), cell_length, hardware_threads());
  EchoOptions o;
  o.echo_time = design.echo_time;
  o.orders = 1;
  o.window_width = 3e-9;
  const auto r = propagate(pulse, spectrum, o);
  EchoTiming t;
  t.nominal = design.echo_time;
  t.window_peak = echo_peak_time(r, 1);
  double best = -1.0;
  for (std::size_t j = 0; j < r.output.times.size(); ++j) {
    const double time = r.output.times[j];
    if (std::abs(time - t.nominal) > 0.5 * t.nominal) continue;
    const double intensity = std::norm(r.output.envelope[j]);
    if (intensity > best) {
      best = intensity;
      t.intensity_peak = time;
    }
  }
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return t;
}

Verdict echo_time_check() {
  const double dt = echo_grid().dt;
  bool ok = true;
  std::string detail;
  for (int n : {1, 2}) {
    const auto t = echo_timing(n);
    const bool within = std::abs(t.window_peak - t.nominal) <= dt && t.seconds < 10.0;
    ok = ok && within;
    detail += fmt::format("{}n={}: energy max {:.3f} ns vs {:.3f} ns (intensity max {:.3f} ns, {:.1f} s)",
                          detail.empty() ? "" : "; ", n, t.window_peak / units::ns, t.nominal / units::ns,
                          t.intensity_peak / units::ns, t.seconds);
  }
  return {ok, fmt::format("{}; tolerance {:.0f} ps", detail, dt / units::ps)};
}

// ---------------------------------------------------------------- 4

Verdict interference() {
  const double hf = rb().excited_splitting(Line::D2, 2, 3);
  const auto design = design_comb(rb(), {2, 3}, 1, -1, 1);
  PulseSpec spec;
  spec.fwhm_bandwidth = 500e6;
  spec.grid = echo_grid();
  const auto probe = gaussian_pulse(spec.fwhm_bandwidth, 0.0, spec.grid);
  const auto spectrum =
      od_spectrum(prepared_comb(design), rb(), frequency_grid(probe), cell_length, hardware_threads());
  EchoOptions o;
  o.echo_time = design.echo_time;
  o.orders = 2;
  o.window_width = 3e-9;
  const std::size_t points = 64;
  const auto detunings = detuning_grid(-hf, hf, points);
  const double step = detunings[1] - detunings[0];
  const auto scan = detuning_scan(spectrum, spec, detunings, o, hardware_threads());

  std::vector<double> eta1;
  std::vector<double> eta2;
  for (const auto& p : scan.points) {
    eta1.push_back(p.eta1);
    eta2.push_back(p.eta2);
  }
  std::vector<double> minima;
  for (std::size_t i = 1; i + 1 < points; ++i) {
    if (eta1[i] < eta1[i - 1] && eta1[i] <= eta1[i + 1]) minima.push_back(detunings[i]);
  }
  double worst_minimum = 0.0;
  for (double d : minima) worst_minimum = std::max(worst_minimum, std::abs(std::remainder(d, 0.5 * hf)));
  const bool minima_ok = !minima.empty() && worst_minimum <= step;
  const auto second_max = std::max_element(eta2.begin(), eta2.end()) - eta2.begin();
  const double second_at = detunings[static_cast<std::size_t>(second_max)];
  const bool second_ok = std::abs(second_at) <= step;

  double hf_fit = std::nan("");
  std::string fit_note;
  try {
    const auto fit = fit_interference(detunings, eta1);
    hf_fit = fit.hyperfine_splitting_fit;
    fit_note = fmt::format("visibility {:.3f}", fit.visibility);
  } catch (const Error& e) {
    const std::string what = e.what();
    fit_note = what.substr(0, what.find(':'));
  }
  const bool fit_ok = std::isfinite(hf_fit) && std::abs(hf_fit - hf) <= 0.01 * hf;
  return {minima_ok && second_ok && fit_ok,
          fmt::format("{} first-echo minima, worst {:.1f} MHz from k*hf/2 (step {:.1f}); second-echo max at "
                      "{:.1f} MHz; fitted spacing {:.2f} MHz vs {:.2f} ({})",
                      minima.size(), angular_to_mhz(worst_minimum), angular_to_mhz(step), angular_to_mhz(second_at),
                      angular_to_mhz(hf_fit), angular_to_mhz(hf), fit_note)};
}

// ---------------------------------------------------------------- 5

std::vector<double> peak_positions(const Spectrum& s, double floor) {
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s.od[i] > s.od[i - 1] && s.od[i] >= s.od[i + 1] && s.od[i] > floor) {
      const double a = s.od[i - 1];
      const double b = s.od[i];
      const double c = s.od[i + 1];
      const double shift = 0.5 * (a - c) / (a - 2.0 * b + c);
      peaks.push_back(s.detunings[i] + shift * (s.detunings[1] - s.detunings[0]));
    }
  }
  return peaks;
}

Verdict spectral_structure() {
  const auto grid = detuning_grid(mhz_to_angular(-1500.0), mhz_to_angular(1500.0), 12001);

  const auto single = design_comb(rb(), {2, 3}, 1, 0, 0);
  const auto one = od_spectrum(prepared_comb(single), rb(), grid, cell_length, hardware_threads());
  const double top = *std::max_element(one.od.begin(), one.od.end());
  const auto peaks = peak_positions(one, 1e-4 * top);
  const double expected[] = {-423.6, -266.65, 0.0};
  bool three_ok = peaks.size() == 3;
  double worst = 0.0;
  std::string where;
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    const double rel = angular_to_mhz(peaks[k] - peaks.back());
    where += fmt::format("{}{:.2f}", k ? ", " : "", rel);
    if (three_ok) worst = std::max(worst, std::abs(rel - expected[k]));
  }
  three_ok = three_ok && worst <= 1.0;

  const auto design = design_comb(rb(), {2, 3}, 1, -1, 1);
  const auto comb = od_spectrum(prepared_comb(design), rb(), grid, cell_length, hardware_threads());
  const auto metrics = comb_metrics(comb);
  double worst_gap = 0.0;
  for (std::size_t k = 1; k < metrics.tooth_positions.size(); ++k) {
    const double gap = angular_to_mhz(metrics.tooth_positions[k] - metrics.tooth_positions[k - 1]);
    worst_gap = std::max(worst_gap, std::abs(gap - 133.33));
  }
  const bool comb_ok = metrics.tooth_positions.size() >= 3 && worst_gap <= 1.0;
  return {three_ok && comb_ok,
          fmt::format("single class: {} peaks at [{}] MHz (worst {:.2f} MHz off); comb: {} teeth, worst spacing "
                      "error {:.2f} MHz",
                      peaks.size(), where, worst, metrics.tooth_positions.size(), worst_gap)};
}

// ---------------------------------------------------------------- 6

Verdict conservation() {
  const auto model = RateModel::rb87_d1(rb());
  const auto grid = VelocityGrid::uniform(-150.0, 150.0, 21);
  auto s0 = PopulationState::thermal(grid, 300.0, 1e16, rb());
  for (std::size_t i = 0; i < grid.size(); ++i) s0.n_e[i] = 0.05 * s0.n_a[i];
  auto mode = [&](ModeRole role, double power, double detuning_mhz) {
    OpticalMode m;
    m.role = role;
    m.center_frequency =
        (role == ModeRole::pump ? model.ge : model.ae).resonant_frequency + mhz_to_angular(detuning_mhz);
    m.power = power;
    m.beam_radius = 2e-3;
    m.linewidth = mhz_to_angular(2.0);
    return m;
  };
  const OpticalMode modes[] = {mode(ModeRole::pump, 200e-6, 20.0), mode(ModeRole::pump_back, 100e-6, -35.0)};
  const double duration = 200e-9;
  const double dt = 1e-9;
  const auto out = evolve_populations(s0, model, modes, duration, dt);

  double drift = 0.0;
  double deviation = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double total = s0.class_total(i);
    drift = std::max(drift, std::abs(out.class_total(i) - total) / total);
    const auto r = class_rates(model, modes, grid.velocities[i]);
    const auto ref = oracle::euler_rate_equations(
        {s0.n_g[i], s0.n_a[i], s0.n_e[i]},
        {r.pump_absorption, r.pump_emission, r.pump_back_absorption, r.pump_back_emission}, model.ge.einstein_a,
        model.ae.einstein_a, duration, dt / 100.0);
    deviation = std::max({deviation, std::abs(out.n_g[i] - ref[0]) / total, std::abs(out.n_a[i] - ref[1]) / total,
                          std::abs(out.n_e[i] - ref[2]) / total});
  }

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> log_mu(std::log(1e-3), std::log(2.0));
  std::uniform_real_distribution<double> eta(1e-3, 1.0);
  double fidelity_error = 0.0;
  for (int k = 0; k < 500; ++k) {
    const double mu = std::exp(log_mu(rng));
    const double e = eta(rng);
    fidelity_error =
        std::max(fidelity_error, std::abs(classical_benchmark_fidelity(mu, e) - oracle::benchmark_fidelity(mu, e)));
  }
  return {drift <= 1e-9 && deviation <= 1e-6 && fidelity_error <= 1e-12,
          fmt::format("population drift {:.1e} (<= 1e-9), Euler dt/100 deviation {:.1e} (<= 1e-6), F_c oracle "
                      "error {:.1e} (<= 1e-12) over 500 draws",
                      drift, deviation, fidelity_error)};
}

// ---------------------------------------------------------------- 7

Verdict fit_round_trips() {
  std::mt19937_64 rng(5);

  const auto grid = detuning_grid(mhz_to_angular(-1500.0), mhz_to_angular(1000.0), 1001);
  const double truth_t = units::celsius_to_kelvin(26.90);
  auto thermal = thermal_spectrum(rb(), truth_t, vapor_number_density(truth_t, rb()), grid, cell_length);
  const double sigma_t = 0.005 * *std::max_element(thermal.od.begin(), thermal.od.end());
  std::normal_distribution<double> noise_t(0.0, sigma_t);
  for (double& od : thermal.od) od += noise_t(rng);
  const auto tfit = fit_thermal(thermal);
  const double t_error = std::abs(tfit.temperature - truth_t);

  AfcModelParameters truth;
  AfcModelSettings settings;
  const auto afc_grid = detuning_grid(mhz_to_angular(-1200.0), mhz_to_angular(600.0), 801);
  auto data = afc_model_spectrum(truth, settings, afc_grid);
  const double sigma = 0.01;
  std::normal_distribution<double> noise(0.0, sigma);
  double floor = 0.0;
  for (double& od : data.od) {
    const double n = noise(rng);
    od += n;
    floor += n * n / (sigma * sigma);
  }

  FitProblem problem;
  problem.measured = data;
  problem.weights.assign(data.size(), 1.0 / (sigma * sigma));
  problem.initial = truth;
  problem.initial.temperature = 301.0;
  problem.initial.center_velocity = -25.0;
  problem.initial.velocity_spacing = 98.0;
  problem.initial.power = 0.6e-3;
  problem.initial.duration = 1.4e-6;
  problem.initial.sideband_sigma = 1.8;
  problem.initial.sideband_alpha = 0.2;
  problem.initial.linewidth = mhz_to_angular(25.0);
  problem.initial.residual_fraction = 0.02;
  problem.free = FitProblem::default_free_parameters();
  problem.settings = settings;
  problem.starts = 4;
  problem.seed = 17;
  problem.threads = hardware_threads();
  const auto start = std::chrono::steady_clock::now();
  const auto fit = fit_afc(problem);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double spacing = fit.model.velocity_spacing;
  const double spacing_error = std::abs(spacing - truth.velocity_spacing) / truth.velocity_spacing;

  const bool ok = t_error <= 0.1 && fit.cost <= 1.5 * floor && spacing_error <= 0.1 && seconds < 300.0;
  return {ok, fmt::format("thermal {:.3f} degC ({:.3f} K off); afc cost {:.1f} vs floor {:.1f} (ratio {:.3f}), "
                          "spacing {:.2f} m/s ({:.2f} % off), {} free parameters, {:.1f} s",
                          units::kelvin_to_celsius(tfit.temperature), t_error, fit.cost, floor, fit.cost / floor,
                          spacing, 100.0 * spacing_error, problem.free.size(), seconds)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget;  // s
    std::function<Verdict()> run;
  };
  const Criterion criteria[] = {
      {1, "benchmark metrics", 1.0, metrics_rows},
      {2, "analytic efficiency", 0.1, analytic},
      {3, "echo timing", 20.0, echo_time_check},
      {4, "interference parity", 120.0, interference},
      {5, "spectral structure", 30.0, spectral_structure},
      {6, "conservation and oracles", 60.0, conservation},
      {7, "fit round trips", 300.0, fit_round_trips},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, fmt::format("threw: {}", e.what())};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > c.budget) {
      v.pass = false;
      v.detail += fmt::format("; over the {:.1f} s budget", c.budget);
    }
    if (!v.pass) ++failed;
    std::cout << fmt::format("criterion {} {}: {} [{:.2f} s] {}", c.id, c.name, v.pass ? "PASS" : "FAIL", seconds,
                             v.detail)
              << std::endl;
  }
  std::cout << fmt::format("{} of 7 criteria passed", 7 - failed) << std::endl;
  return failed == 0 ? 0 : 1;
}

#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>
#include <yaml-cpp/exceptions.h>

#include <afc/atomic_data.hpp>
#include <afc/echo.hpp>
#include <afc/errors.hpp>
#include <afc/fit.hpp>
#include <afc/io.hpp>
#include <afc/metrics.hpp>
#include <afc/pumping.hpp>
#include <afc/spectrum.hpp>
#include <afc/units.hpp>

#include "config.hpp"

#ifndef AFC_VERSION
#define AFC_VERSION "unknown"
#endif

namespace afcsim {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
namespace units = afc::units;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Collects output files and stage timings for the run manifest.
class Run {
public:
  Run(std::string command, const RunOptions& options, std::optional<ExperimentConfig> config)
      : command_(std::move(command)), options_(options), config_(std::move(config)) {
    if (options.out) {
      out_ = *options.out;
    } else if (config_) {
      out_ = config_->resolve(config_->output);
    } else {
      out_ = "afcsim-out";
    }
    seed_ = options.seed ? *options.seed : (config_ ? config_->seed : 1);
  }

  const ExperimentConfig& config() const { return *config_; }
  std::uint64_t seed() const { return seed_; }
  unsigned threads() const { return options_.threads; }

  template <class Fn>
  auto timed(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record(stage, start);
    } else {
      auto result = fn();
      record(stage, start);
      return result;
    }
  }

  void write(const std::string& name, std::string_view text) {
    afc::io::write_text(out_ / name, text);
    outputs_.push_back(name);
  }

  void input(const std::string& role, const fs::path& path) { inputs_[role] = path.string(); }

  void warn(const std::string& message) {
    std::cerr << "warning: " << message << '\n';
    warnings_.push_back(message);
  }

  void finish() {
    json m;
    m["tool"] = "afcsim";
    m["version"] = AFC_VERSION;
    m["command"] = command_;
    std::string rerun = "afcsim " + command_;
    if (config_) {
      m["config_path"] = config_->source.string();
      m["config"] = config_->text;
      rerun += " --config " + config_->source.string();
    }
    for (const auto& [role, path] : inputs_) {
      m["inputs"][role] = path;
      rerun += fmt::format(" --{} {}", role, path);
    }
    rerun += fmt::format(" --seed {} --threads {} --out {}", seed_, options_.threads, out_.string());
    m["seed"] = seed_;
    m["threads"] = options_.threads;
    m["rerun"] = rerun;
    m["outputs"] = outputs_;
    m["warnings"] = warnings_;
    m["timings_s"] = timings_;
#if defined(__VERSION__)
    m["compiler"] = __VERSION__;
#endif
    afc::io::write_text(out_ / "manifest.json", m.dump(2) + "\n");
    for (const auto& name : outputs_) std::cout << (out_ / name).string() << '\n';
  }

private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    timings_[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

  std::string command_;
  RunOptions options_;
  std::optional<ExperimentConfig> config_;
  fs::path out_;
  std::uint64_t seed_ = 1;
  std::vector<std::string> outputs_;
  std::vector<std::string> warnings_;
  std::map<std::string, std::string> inputs_;
  json timings_ = json::object();
};

ExperimentConfig require_config(const RunOptions& options, const char* command) {
  if (!options.config) throw afc::ConfigError(fmt::format("{} needs --config", command));
  return load_config(*options.config);
}

afc::LevelScheme load_scheme(const ExperimentConfig& c) {
  if (c.scheme == "rb87") return afc::rb87_level_scheme();
  return afc::load_level_scheme(c.resolve(c.scheme));
}

double cell_density(const ExperimentConfig& c, const afc::LevelScheme& scheme) {
  return c.cell.density ? *c.cell.density : afc::vapor_number_density(c.cell.temperature, scheme);
}

struct Preparation {
  afc::PopulationState thermal;
  std::optional<afc::PopulationState> prepared;
  std::optional<afc::CombDesign> design;
};

afc::PopulationState initial_state(const ExperimentConfig& c, const afc::LevelScheme& scheme) {
  const double density = cell_density(c, scheme);
  if (c.velocity_grid.points == 0) return afc::thermal_state(scheme, c.cell.temperature, density);
  const auto grid =
      afc::VelocityGrid::thermal(c.cell.temperature, scheme, c.velocity_grid.sigmas, c.velocity_grid.points);
  return afc::PopulationState::thermal(grid, c.cell.temperature, density, scheme);
}

std::optional<afc::CombDesign> comb_design(const ExperimentConfig& c, const afc::LevelScheme& scheme) {
  if (!c.comb) return std::nullopt;
  return afc::design_comb(scheme, c.comb->pair, c.comb->n, c.comb->min_index, c.comb->max_index,
                          c.comb->center_velocity);
}

afc::OpticalMode pump_mode(const ExperimentConfig& c, const afc::RateModel& model) {
  afc::OpticalMode mode;
  mode.role = afc::ModeRole::pump;
  mode.center_frequency = model.ge.resonant_frequency;
  mode.linewidth = units::hz_to_angular(1e6);
  if (c.pump) {
    mode.center_frequency += units::hz_to_angular(c.pump->detuning);
    mode.power = c.pump->ideal ? 0.0 : c.pump->power;
    mode.linewidth = units::hz_to_angular(c.pump->linewidth);
    mode.beam_radius = c.pump->beam_radius;
  }
  return mode;
}

afc::OpticalMode pump_back_mode(const ExperimentConfig& c, const afc::RateModel& model,
                                const std::optional<afc::CombDesign>& design) {
  const auto& pb = *c.pump_back;
  afc::OpticalMode mode;
  mode.role = afc::ModeRole::pump_back;
  mode.center_frequency = model.ae.resonant_frequency;
  mode.power = pb.power;
  mode.beam_radius = pb.beam_radius;
  mode.linewidth = units::hz_to_angular(pb.linewidth);
  if (pb.sidebands) mode.sidebands = afc::SidebandSpec{0.0, pb.sidebands->n_min, pb.sidebands->n_max,
                                                       pb.sidebands->sigma, pb.sidebands->alpha};
  if (design) return afc::pump_back_for_design(model, *design, mode);

  const double w0 = model.ae.resonant_frequency;
  mode.center_frequency = w0 * (1.0 + *pb.center_velocity / units::speed_of_light);
  if (mode.sidebands) mode.sidebands->rf_frequency = w0 * *pb.velocity_spacing / units::speed_of_light;
  return mode;
}

Preparation prepare(Run& run, const afc::LevelScheme& scheme) {
  const auto& c = run.config();
  Preparation p{initial_state(c, scheme), std::nullopt, comb_design(c, scheme)};
  if (!c.pump_back) {
    if (c.pump) run.warn("pump block ignored without a pump_back block; writing the thermal spectrum");
    return p;
  }
  const auto model = afc::RateModel::rb87_d1(scheme);
  afc::PumpSchedule schedule;
  schedule.ideal_pump = c.pump && c.pump->ideal;
  schedule.pump_duration = c.pump && !c.pump->ideal ? c.pump->duration : 0.0;
  schedule.pump_back_duration = c.pump_back->duration;
  schedule.concurrent = c.concurrent;
  schedule.max_step = c.max_step;
  schedule.integrator.method = c.integrator;
  schedule.integrator.threads = run.threads();
  const auto pump = pump_mode(c, model);
  const auto pump_back = pump_back_mode(c, model, p.design);
  p.prepared = run.timed("pumping", [&] {
    return afc::prepare_populations(p.thermal, model, pump, pump_back, schedule);
  });
  return p;
}

const afc::PopulationState& probed_state(const Preparation& p) { return p.prepared ? *p.prepared : p.thermal; }

json comb_json(const afc::CombMetrics& m) {
  json j;
  j["peak_od"] = m.peak_od;
  j["peak_od_absolute"] = m.peak_od_absolute;
  j["background_od"] = m.background_od;
  j["tooth_fwhm_MHz"] = units::angular_to_mhz(m.tooth_fwhm);
  j["spacing_MHz"] = units::angular_to_mhz(m.spacing_measured);
  j["finesse"] = m.finesse;
  std::vector<double> positions;
  for (double w : m.tooth_positions) positions.push_back(units::angular_to_mhz(w));
  j["tooth_positions_MHz"] = positions;
  j["tooth_heights"] = m.tooth_heights;
  j["analytic_efficiency"] = number_or_null(afc::analytic_efficiency(m.peak_od, m.finesse, m.background_od));
  return j;
}

json design_json(const afc::CombDesign& d) {
  json j;
  j["upper_levels"] = {d.hyperfine_pair.first, d.hyperfine_pair.second};
  j["n"] = d.divisor_n;
  j["spacing_MHz"] = units::angular_to_mhz(d.spacing);
  j["echo_time_ns"] = d.echo_time / units::ns;
  j["velocity_step_m_per_s"] = d.velocity_step;
  j["velocity_classes_m_per_s"] = d.velocity_classes;
  return j;
}

std::vector<double> weights_for(double sigma, std::size_t n) {
  if (!(sigma > 0.0)) return {};
  return std::vector<double>(n, 1.0 / (sigma * sigma));
}

afc::io::CsvTable overlay_table(const afc::Spectrum& data, const afc::Spectrum& model) {
  afc::io::CsvTable t;
  std::vector<double> mhz;
  std::vector<double> residual;
  for (std::size_t i = 0; i < data.size(); ++i) {
    mhz.push_back(units::angular_to_mhz(data.detunings[i]));
    residual.push_back(data.od[i] - model.od[i]);
  }
  t.add_column("detuning_MHz", std::move(mhz));
  t.add_column("data", data.od);
  t.add_column("model", model.od);
  t.add_column("residual", std::move(residual));
  return t;
}

}  // namespace

void run_spectrum(const RunOptions& options) {
  Run run("spectrum", options, require_config(options, "spectrum"));
  const auto& c = run.config();
  const auto scheme = load_scheme(c);
  const auto p = prepare(run, scheme);
  const auto detunings =
      afc::detuning_grid(units::hz_to_angular(c.probe.min), units::hz_to_angular(c.probe.max), c.probe.points);

  auto spectrum = run.timed("spectrum", [&] {
    return afc::od_spectrum(probed_state(p), scheme, detunings, c.cell.length, run.threads());
  });
  if (c.od_noise && *c.od_noise > 0.0) {
    std::mt19937_64 rng(run.seed());
    std::normal_distribution<double> noise(0.0, *c.od_noise);
    for (double& od : spectrum.od) od += noise(rng);
  }
  run.write("spectrum.csv", afc::spectrum_table(spectrum).to_string());

  if (p.prepared) {
    const auto thermal = afc::od_spectrum(p.thermal, scheme, detunings, c.cell.length, run.threads());
    run.write("thermal.csv", afc::spectrum_table(thermal).to_string());
    run.write("populations.csv", afc::population_csv(*p.prepared));
  }
  if (p.prepared) {
    json j;
    j["design"] = p.design ? design_json(*p.design) : json(nullptr);
    try {
      j["metrics"] = comb_json(afc::comb_metrics(spectrum));
    } catch (const afc::AnalysisError& e) {
      if (!p.design || p.design->velocity_classes.size() >= 3) {
        run.warn(fmt::format("comb metrics unavailable: {}", e.what()));
      }
      j["metrics"] = nullptr;
    }
    run.write("comb.json", j.dump(2) + "\n");
  }
  run.finish();
}

void run_echo(const RunOptions& options) {
  Run run("echo", options, require_config(options, "echo"));
  const auto& c = run.config();
  if (!c.pulse) throw afc::ConfigError(fmt::format("{}: echo needs a pulse block", c.source.string()));
  const auto scheme = load_scheme(c);
  const auto p = prepare(run, scheme);

  afc::EchoOptions echo;
  if (c.echo.echo_time) {
    echo.echo_time = *c.echo.echo_time;
  } else if (p.design) {
    echo.echo_time = p.design->echo_time;
  } else {
    throw afc::ConfigError(fmt::format("{}: echo time unknown; add a comb block or echo.echo_time",
                                       c.source.string()));
  }
  echo.orders = c.echo.orders;
  echo.window_width = c.echo.window;
  echo.mode_offsets = c.pulse->centers;

  const auto pulse = afc::gaussian_pulse(c.pulse->bandwidth, units::hz_to_angular(c.pulse->carrier),
                                         c.pulse->grid, c.pulse->centers);
  const auto spectrum = run.timed("spectrum", [&] {
    return afc::od_spectrum(probed_state(p), scheme, afc::frequency_grid(pulse), c.cell.length, run.threads());
  });
  const auto result = run.timed("propagation", [&] { return afc::propagate(pulse, spectrum, echo); });
  for (const auto& w : result.warnings) run.warn(w);

  run.write("input.csv", afc::trace_table(result.input).to_string());
  run.write("trace.csv", afc::trace_table(result.output).to_string());

  json j;
  j["echo_time_ns"] = echo.echo_time / units::ns;
  j["window_ns"] = echo.window_width / units::ns;
  json windows = json::array();
  for (std::size_t i = 0; i < result.windows.size(); ++i) {
    const auto& w = result.windows[i];
    windows.push_back({{"mode", w.mode},
                       {"order", w.order},
                       {"center_ns", w.center / units::ns},
                       {"width_ns", w.width / units::ns},
                       {"energy", result.window_energies[i]}});
  }
  j["windows"] = windows;
  j["input_window_energies"] = result.input_window_energies;
  j["absorption"] = result.absorption;
  j["echo_efficiencies"] = result.echo_efficiencies;
  json peaks = json::array();
  for (std::size_t mode = 0; mode < c.pulse->centers.size(); ++mode) {
    json row = json::array();
    for (int order = 1; order <= echo.orders; ++order) {
      try {
        row.push_back(afc::echo_peak_time(result, order, static_cast<int>(mode)) / units::ns);
      } catch (const afc::AnalysisError& e) {
        run.warn(e.what());
        row.push_back(nullptr);
      }
    }
    peaks.push_back(row);
  }
  j["echo_peak_times_ns"] = peaks;
  j["warnings"] = result.warnings;
  if (p.design) j["design"] = design_json(*p.design);
  run.write("efficiency.json", j.dump(2) + "\n");

  if (c.scan) {
    afc::PulseSpec spec{c.pulse->bandwidth, c.pulse->grid};
    const auto detunings =
        afc::detuning_grid(units::hz_to_angular(c.scan->min), units::hz_to_angular(c.scan->max), c.scan->steps);
    afc::EchoOptions scan_options = echo;
    scan_options.mode_offsets = {c.pulse->centers.front()};
    const auto scan = run.timed("scan", [&] {
      return afc::detuning_scan(spectrum, spec, detunings, scan_options, run.threads());
    });
    run.write("scan.csv", afc::scan_table(scan).to_string());

    std::vector<double> relative;
    std::vector<double> eta1;
    for (const auto& point : scan.points) {
      relative.push_back(point.detuning - scan.max_absorption_detuning);
      eta1.push_back(point.eta1);
    }
    const auto fit = run.timed("interference_fit", [&] { return afc::fit_interference(relative, eta1); });
    json f;
    f["max_absorption_detuning_MHz"] = units::angular_to_mhz(scan.max_absorption_detuning);
    f["hyperfine_splitting_MHz"] = units::angular_to_mhz(fit.hyperfine_splitting_fit);
    f["amplitude"] = fit.amplitude;
    f["envelope_sigma_MHz"] = units::angular_to_mhz(fit.envelope_sigma);
    f["phase_offset_rad"] = fit.phase_offset;
    f["offset"] = fit.offset;
    f["visibility"] = fit.visibility;
    json u = json::object();
    for (const auto& [name, value] : fit.uncertainties) {
      const bool angular = name == "hyperfine_splitting" || name == "envelope_sigma";
      u[angular ? name + "_MHz" : name] = number_or_null(angular ? units::angular_to_mhz(value) : value);
    }
    f["uncertainties"] = u;
    f["residual_norm"] = fit.residual_norm;
    f["iterations"] = fit.iterations;
    f["converged"] = fit.converged;
    f["status"] = fit.status;
    run.write("interference.json", f.dump(2) + "\n");
  }
  run.finish();
}

void run_metrics(const RunOptions& options) {
  std::optional<ExperimentConfig> config;
  if (options.config) config = load_config(*options.config);
  fs::path input;
  if (options.input) {
    input = *options.input;
  } else if (config && config->metrics_input) {
    input = config->resolve(*config->metrics_input);
  } else {
    throw afc::ConfigError("metrics needs --input or a metrics.input entry in the config");
  }
  Run run("metrics", options, std::move(config));
  run.input("input", input);

  const auto table = afc::io::read_csv(input);
  json rows = json::array();
  afc::io::CsvTable out;
  if (table.rows() > 0 || !table.header.empty()) {
    for (const char* name : {"mu_in", "eta_afc", "sbr"}) {
      if (!table.has(name)) throw afc::ConfigError(fmt::format("{}: missing column '{}'", input.string(), name));
    }
  }
  const bool with_errors = table.has("mu_in_err") || table.has("eta_afc_err") || table.has("sbr_err");
  auto column_or_zero = [&](const char* name, std::size_t r) { return table.has(name) ? table.column(name)[r] : 0.0; };

  std::vector<std::size_t> bad_rows;
  std::vector<std::string> reasons;
  std::vector<afc::QuantumReport> reports;
  std::vector<afc::MemoryMetrics> inputs;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    afc::MemoryMetrics m{table.column("mu_in")[r], table.column("eta_afc")[r], table.column("sbr")[r]};
    std::optional<afc::MetricsUncertainty> u;
    if (with_errors) {
      u = afc::MetricsUncertainty{column_or_zero("mu_in_err", r), column_or_zero("eta_afc_err", r),
                                  column_or_zero("sbr_err", r)};
    }
    try {
      reports.push_back(afc::full_report(m, u));
      inputs.push_back(m);
    } catch (const afc::DomainError& e) {
      bad_rows.push_back(r + 1);
      reasons.push_back(fmt::format("row {}: {}", r + 1, e.what()));
    }
  }
  if (!bad_rows.empty()) {
    throw afc::ConfigError(fmt::format("{}: invalid rows {} ({})", input.string(), fmt::join(bad_rows, ", "),
                                       fmt::join(reasons, "; ")));
  }

  std::vector<std::vector<double>> cols(9);
  for (std::size_t r = 0; r < reports.size(); ++r) {
    const auto& q = reports[r];
    const auto& m = inputs[r];
    json row;
    row["row"] = r + 1;
    row["mu_in"] = m.mu_in;
    row["eta_afc"] = m.eta_afc;
    row["sbr"] = m.sbr;
    row["f_classical"] = number_or_null(q.f_classical);
    row["f_qubit"] = q.f_qubit;
    row["g2_out"] = q.g2_out;
    row["g2_in_threshold"] = {{"value", number_or_null(q.g2_in_threshold.value)},
                              {"status", afc::to_string(q.g2_in_threshold.status)}};
    row["g2_im_limit"] = q.g2_im_limit;
    row["g2_im_is_limit"] = q.g2_im_is_limit;
    row["g2_si_threshold"] = {{"value", number_or_null(q.g2_si_threshold.value)},
                              {"status", afc::to_string(q.g2_si_threshold.status)}};
    json u = json::object();
    for (const auto& [name, value] : q.uncertainties) u[name] = number_or_null(value);
    row["uncertainties"] = u;
    rows.push_back(row);
    const double values[] = {m.mu_in, m.eta_afc, m.sbr, q.f_classical, q.f_qubit, q.g2_out,
                             q.g2_in_threshold.value, q.g2_im_limit, q.g2_si_threshold.value};
    for (std::size_t k = 0; k < 9; ++k) cols[k].push_back(values[k]);
  }
  const char* names[] = {"mu_in", "eta_afc", "sbr", "f_classical", "f_qubit", "g2_out",
                         "g2_in_threshold", "g2_im_limit", "g2_si_threshold"};
  for (std::size_t k = 0; k < 9; ++k) out.add_column(names[k], std::move(cols[k]));

  json report;
  report["rows"] = rows;
  run.write("metrics.json", report.dump(2) + "\n");
  run.write("metrics.csv", out.to_string());
  run.finish();
}

void run_fit(const RunOptions& options) {
  Run run("fit", options, require_config(options, "fit"));
  const auto& c = run.config();
  if (!c.fit) throw afc::ConfigError(fmt::format("{}: fit needs a fit block", c.source.string()));
  const auto& f = *c.fit;
  fs::path measured_path;
  if (options.measured) {
    measured_path = *options.measured;
  } else if (!f.measured.empty()) {
    measured_path = c.resolve(f.measured);
  } else {
    throw afc::ConfigError("fit needs --measured or a fit.measured entry in the config");
  }
  run.input("measured", measured_path);
  auto measured = afc::spectrum_from_table(afc::io::read_csv(measured_path));
  measured.cell_length = c.cell.length;
  const auto scheme = load_scheme(c);

  if (f.mode == "thermal") {
    afc::ThermalFitOptions o;
    o.min_temperature = f.min_temperature;
    o.max_temperature = f.max_temperature;
    o.cell_length = c.cell.length;
    o.weights = weights_for(f.noise_sigma, measured.size());
    o.threads = run.threads();
    const auto result = run.timed("fit", [&] { return afc::fit_thermal(measured, o); });
    for (const auto& w : result.warnings) run.warn(w);
    auto j = json::parse(afc::to_json(result));
    j["temperature_C"] = units::kelvin_to_celsius(result.temperature);
    run.write("fit.json", j.dump(2) + "\n");
    const auto model = afc::thermal_spectrum(scheme, result.temperature,
                                             afc::vapor_number_density(result.temperature, scheme),
                                             measured.detunings, c.cell.length, run.threads());
    run.write("overlay.csv", overlay_table(measured, model).to_string());
    run.finish();
    return;
  }

  if (!c.pump_back) throw afc::ConfigError(fmt::format("{}: an afc fit needs a pump_back block", c.source.string()));
  const auto& pb = *c.pump_back;
  const auto design = comb_design(c, scheme);
  afc::FitProblem problem;
  problem.initial.temperature = c.cell.temperature;
  problem.initial.center_velocity = design ? design->center_velocity : *pb.center_velocity;
  problem.initial.velocity_spacing = design ? design->velocity_step : *pb.velocity_spacing;
  problem.initial.power = pb.power;
  problem.initial.duration = pb.duration;
  problem.initial.linewidth = units::hz_to_angular(pb.linewidth);
  // Without sidebands the envelope is never evaluated off n = 0.
  problem.initial.sideband_sigma = pb.sidebands ? pb.sidebands->sigma : 1.0;
  problem.initial.sideband_alpha = pb.sidebands ? pb.sidebands->alpha : 0.0;
  problem.initial.residual_fraction = f.residual_fraction;
  problem.settings.cell_length = c.cell.length;
  problem.settings.beam_radius = pb.beam_radius;
  if (design) {
    problem.settings.sideband_min = design->first_index;
    problem.settings.sideband_max = design->first_index + static_cast<int>(design->velocity_classes.size()) - 1;
  } else if (pb.sidebands) {
    problem.settings.sideband_min = pb.sidebands->n_min;
    problem.settings.sideband_max = pb.sidebands->n_max;
  } else {
    problem.settings.sideband_min = problem.settings.sideband_max = 0;
  }
  problem.settings.velocity_points = f.velocity_points;
  problem.settings.threads = 1;
  problem.free = f.free.empty() ? afc::FitProblem::default_free_parameters() : f.free;
  problem.starts = f.starts;
  problem.seed = run.seed();
  problem.max_iterations = f.max_iterations;
  problem.threads = run.threads();

  if (f.subtract_fraction) {
    const auto thermal = afc::thermal_spectrum(scheme, c.cell.temperature, cell_density(c, scheme),
                                               measured.detunings, c.cell.length, run.threads());
    const auto sub = afc::subtract_residual(measured, thermal, *f.subtract_fraction);
    if (sub.clamped_points > 0) {
      run.warn(fmt::format("residual subtraction clamped {} points in {} regions", sub.clamped_points,
                           sub.clamped_regions.size()));
    }
    measured = sub.spectrum;
    measured.cell_length = c.cell.length;
  }
  problem.measured = measured;
  problem.weights = weights_for(f.noise_sigma, measured.size());

  const auto result = run.timed("fit", [&] { return afc::fit_afc(problem); });
  for (const auto& w : result.warnings) run.warn(w);
  run.write("fit.json", afc::to_json(result) + "\n");
  const auto model = afc::afc_model_spectrum(result.model, problem.settings, measured.detunings);
  run.write("overlay.csv", overlay_table(measured, model).to_string());
  run.finish();
}

int guarded(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return exit_success;
  } catch (const afc::ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const afc::DomainError& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const YAML::Exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_numerical;
  }
}

}  // namespace afcsim

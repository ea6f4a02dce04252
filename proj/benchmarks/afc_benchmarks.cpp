#include <benchmark/benchmark.h>

#include <afc/atomic_data.hpp>
#include <afc/echo.hpp>
#include <afc/fit.hpp>
#include <afc/metrics.hpp>
#include <afc/pumping.hpp>
#include <afc/spectrum.hpp>
#include <afc/units.hpp>

using namespace afc;

namespace {

const LevelScheme& rb() { return rb87_level_scheme(); }

PopulationState thermal_cell(double kelvin = 300.0) {
  return thermal_state(rb(), kelvin, vapor_number_density(kelvin, rb()));
}

void od_spectrum_points(benchmark::State& state) {
  const auto cell = thermal_cell();
  const auto grid = detuning_grid(units::mhz_to_angular(-1500.0), units::mhz_to_angular(1500.0),
                                  static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(od_spectrum(cell, rb(), grid, 0.1, 1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(od_spectrum_points)->Arg(1024)->Arg(4096);

void pump_back_evolution(benchmark::State& state) {
  const auto model = RateModel::rb87_d1(rb());
  const auto grid = VelocityGrid::uniform(-400.0, 400.0, static_cast<std::size_t>(state.range(0)));
  auto start = PopulationState::thermal(grid, 300.0, 1e16, rb());
  OpticalMode back;
  back.role = ModeRole::pump_back;
  back.center_frequency = model.ae.resonant_frequency;
  back.power = 0.1e-3;
  back.beam_radius = 1e-3;
  back.linewidth = units::mhz_to_angular(1.0);
  const OpticalMode modes[] = {back};
  for (auto _ : state) benchmark::DoNotOptimize(evolve_populations(start, model, modes, 1e-6, 10e-9));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(pump_back_evolution)->Arg(101)->Arg(401);

void echo_propagation(benchmark::State& state) {
  const TimeGrid grid{25e-12, static_cast<std::size_t>(state.range(0)), -20e-9};
  const auto pulse = gaussian_pulse(430e6, 0.0, grid);
  const auto design = design_comb(rb(), {2, 3}, 1, -1, 1);
  const auto spectrum = od_spectrum(thermal_cell(), rb(), frequency_grid(pulse), 0.1, 1);
  EchoOptions o;
  o.echo_time = design.echo_time;
  for (auto _ : state) benchmark::DoNotOptimize(propagate(pulse, spectrum, o));
}
BENCHMARK(echo_propagation)->Arg(1 << 12)->Arg(1 << 14);

void afc_forward_model(benchmark::State& state) {
  AfcModelParameters p;
  AfcModelSettings settings;
  const auto grid = detuning_grid(units::mhz_to_angular(-1200.0), units::mhz_to_angular(600.0), 801);
  for (auto _ : state) benchmark::DoNotOptimize(afc_model_spectrum(p, settings, grid));
}
BENCHMARK(afc_forward_model)->Unit(benchmark::kMillisecond);

void benchmark_fidelity(benchmark::State& state) {
  double mu = 0.024;
  for (auto _ : state) {
    benchmark::DoNotOptimize(classical_benchmark_fidelity(mu, 0.0438));
    mu = mu < 1.0 ? mu * 1.001 : 0.024;
  }
}
BENCHMARK(benchmark_fidelity);

}  // namespace

// The packaged benchmark_main archive carries LTO bytecode from another compiler release.
BENCHMARK_MAIN();

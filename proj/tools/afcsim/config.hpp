#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <afc/atomic_data.hpp>
#include <afc/echo.hpp>
#include <afc/fit.hpp>
#include <afc/pumping.hpp>

namespace afcsim {

enum class Dimension { frequency, time, power, length, temperature, velocity, density };

/// "133.33 MHz" -> 1.3333e8 in SI (Hz, s, W, m, K, m/s, 1/m^3). The unit
/// is mandatory. Throws afc::ConfigError.
double parse_quantity(std::string_view text, Dimension dimension);

struct CellConfig {
  double length = 0.1;                ///< m
  double temperature = 300.0;         ///< K
  std::optional<double> density;      ///< 1/m^3, saturated vapour if unset
};

struct VelocityGridConfig {
  std::size_t points = 0;  ///< 0: step of a quarter natural linewidth
  double sigmas = 4.0;
};

struct PumpConfig {
  bool ideal = true;
  double power = 80e-3;        ///< W
  double duration = 10e-6;     ///< s
  double detuning = 0.0;       ///< Hz from D1 F=2 -> F'=2
  double linewidth = 1e6;      ///< Hz
  double beam_radius = 3e-3;   ///< m
};

struct SidebandConfig {
  int n_min = -1;
  int n_max = 1;
  double sigma = 1e6;
  double alpha = 0.0;
};

struct PumpBackConfig {
  double power = 1.4e-3;       ///< W
  double duration = 1e-6;      ///< s
  double linewidth = 1e6;      ///< Hz
  double beam_radius = 1e-3;   ///< m
  std::optional<double> center_velocity;   ///< m/s; without a comb block
  std::optional<double> velocity_spacing;  ///< m/s; without a comb block
  std::optional<SidebandConfig> sidebands;
};

struct CombConfig {
  afc::LevelPair pair{2, 3};
  int n = 1;
  int min_index = -1;
  int max_index = 1;
  double center_velocity = 0.0;  ///< m/s
};

struct ProbeConfig {
  double min = -1.5e9;  ///< Hz
  double max = 1.5e9;   ///< Hz
  std::size_t points = 4096;
};

struct PulseConfig {
  double bandwidth = 500e6;  ///< Hz, intensity FWHM
  double carrier = 0.0;      ///< Hz
  std::vector<double> centers{0.0};  ///< s
  afc::TimeGrid grid;
};

struct EchoConfig {
  int orders = 2;
  double window = 3e-9;             ///< s
  std::optional<double> echo_time;  ///< s, from the comb if unset
};

struct ScanConfig {
  double min = 0.0;  ///< Hz
  double max = 0.0;  ///< Hz
  std::size_t steps = 64;
};

struct FitConfig {
  std::string mode = "afc";  ///< afc | thermal
  std::filesystem::path measured;
  double noise_sigma = 0.0;  ///< OD; 0 for unweighted
  std::size_t starts = 4;
  int max_iterations = 200;
  std::size_t velocity_points = 401;
  double residual_fraction = 0.0;
  std::optional<double> subtract_fraction;  ///< thermal OD removed before an afc fit
  double min_temperature = 280.0;
  double max_temperature = 360.0;
  std::vector<afc::FreeParameter> free;  ///< empty: defaults
};

struct ExperimentConfig {
  std::filesystem::path source;
  std::string text;  ///< verbatim config document
  std::string name;
  std::uint64_t seed = 1;
  std::filesystem::path output = "afcsim-out";
  std::string scheme = "rb87";  ///< built-in or a level-data path
  afc::IntegratorMethod integrator = afc::IntegratorMethod::adaptive_rk45;
  double max_step = 1e-9;  ///< s
  bool concurrent = false;

  CellConfig cell;
  VelocityGridConfig velocity_grid;
  std::optional<PumpConfig> pump;
  std::optional<PumpBackConfig> pump_back;
  std::optional<CombConfig> comb;
  ProbeConfig probe;
  std::optional<double> od_noise;  ///< Gaussian OD noise added to the output spectrum
  std::optional<PulseConfig> pulse;
  EchoConfig echo;
  std::optional<ScanConfig> scan;
  std::optional<std::filesystem::path> metrics_input;
  std::optional<FitConfig> fit;

  /// Paths in the config are relative to the config file.
  std::filesystem::path resolve(const std::filesystem::path& path) const;
};

/// Parses and validates a config document. Errors are afc::ConfigError
/// prefixed with "source:line:column".
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& source);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace afcsim

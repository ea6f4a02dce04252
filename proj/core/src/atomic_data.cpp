#include "afc/atomic_data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "afc/errors.hpp"
#include "afc/units.hpp"

namespace afc {

namespace {

constexpr int kSupportedSchema = 1;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view text, std::string_view where) {
  auto parse_plain = [&](std::string_view t) {
    double value = 0.0;
    t = trim(t);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
      throw ConfigError(fmt::format("{}: cannot parse number '{}'", where, t));
    }
    return value;
  };
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const double den = parse_plain(text.substr(slash + 1));
    if (den == 0.0) throw ConfigError(fmt::format("{}: zero denominator", where));
    return parse_plain(text.substr(0, slash)) / den;
  }
  return parse_plain(text);
}

int excited_j2_plus_1(Line line) { return line == Line::D1 ? 2 : 4; }

}  // namespace

double LevelScheme::excited_splitting(Line line, int fa, int fb) const {
  if (fa >= fb) throw DomainError(fmt::format("excited splitting needs F'a < F'b, got ({}, {})", fa, fb));
  const auto& table = line == Line::D1 ? d1_splittings : d2_splittings;
  double sum = 0.0;
  for (int f = fa; f < fb; ++f) {
    const auto it = table.find({f, f + 1});
    if (it == table.end()) {
      throw DomainError(fmt::format("no excited level pair ({}, {}) on this line", f, f + 1));
    }
    sum += it->second;
  }
  return sum;
}

std::vector<int> LevelScheme::excited_levels(Line line) const {
  return line == Line::D1 ? std::vector<int>{1, 2} : std::vector<int>{0, 1, 2, 3};
}

double LevelScheme::linewidth(Line line) const {
  return line == Line::D1 ? d1_linewidth : d2_linewidth;
}

double LevelScheme::wavelength(Line line) const {
  return line == Line::D1 ? d1_wavelength : d2_wavelength;
}

double LevelScheme::line_frequency(Line line) const {
  return units::two_pi * units::speed_of_light / wavelength(line);
}

double LevelScheme::ground_level_offset(int f) const {
  // Centre of gravity with weights 2F+1: 3 * E1 + 5 * E2 = 0.
  if (f == 1) return -5.0 / 8.0 * ground_splitting;
  if (f == 2) return 3.0 / 8.0 * ground_splitting;
  throw DomainError(fmt::format("ground level F={} does not exist", f));
}

double LevelScheme::excited_level_offset(Line line, int fp) const {
  const auto levels = excited_levels(line);
  if (fp < levels.front() || fp > levels.back()) {
    throw DomainError(fmt::format("excited level F'={} does not exist on this line", fp));
  }
  // Position of each level above the lowest one, then shift so that the
  // degeneracy-weighted mean vanishes.
  double weighted = 0.0;
  double weights = 0.0;
  for (int f : levels) {
    const double above = f == levels.front() ? 0.0 : excited_splitting(line, levels.front(), f);
    weighted += (2 * f + 1) * above;
    weights += 2 * f + 1;
  }
  const double above = fp == levels.front() ? 0.0 : excited_splitting(line, levels.front(), fp);
  return above - weighted / weights;
}

double LevelScheme::transition_frequency(Line line, int f, int fp) const {
  return line_frequency(line) + excited_level_offset(line, fp) - ground_level_offset(f);
}

TransitionData LevelScheme::transition(Line line, int f, int fp) const {
  TransitionData t;
  t.lower = f;
  t.upper = fp;
  t.line = line;
  t.resonant_frequency = transition_frequency(line, f, fp);
  t.linewidth = linewidth(line);

  const auto it = strengths.find({line, f, fp});
  t.relative_strength = it == strengths.end() ? 0.0 : it->second;
  if (std::abs(f - fp) > 1) t.relative_strength = 0.0;

  // Branching of F' into F follows from S_FF' and the degeneracies:
  // A(F'->F) = Gamma * (2F+1)(2J'+1) / ((2F'+1)(2J+1)) * S_FF'.
  const double gl = t.lower_degeneracy();
  const double gu = t.upper_degeneracy();
  t.einstein_a = t.linewidth * gl * excited_j2_plus_1(line) / (gu * 2.0) * t.relative_strength;

  const double w = t.resonant_frequency;
  const double c = units::speed_of_light;
  t.einstein_b_emission = units::pi * units::pi * c * c * c * t.einstein_a / (units::hbar * w * w * w);
  t.einstein_b_absorption = gu / gl * t.einstein_b_emission;
  return t;
}

LevelScheme parse_level_scheme(std::string_view text, std::string_view source) {
  std::map<std::string, double, std::less<>> values;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = fmt::format("{}:{}", source, line_no);
    if (eq == std::string_view::npos) throw ConfigError(fmt::format("{}: expected 'key = value'", where));
    const auto key = std::string(trim(line.substr(0, eq)));
    if (values.contains(key)) throw ConfigError(fmt::format("{}: duplicate key '{}'", where, key));
    values[key] = parse_number(line.substr(eq + 1), where);
  }

  std::set<std::string, std::less<>> used;
  auto take = [&](std::string_view key) {
    const auto it = values.find(key);
    if (it == values.end()) throw ConfigError(fmt::format("{}: missing key '{}'", source, key));
    used.insert(std::string(key));
    return it->second;
  };

  LevelScheme s;
  s.schema_version = static_cast<int>(take("schema_version"));
  if (s.schema_version != kSupportedSchema) {
    throw ConfigError(fmt::format("{}: unsupported schema_version {} (expected {})", source,
                                  s.schema_version, kSupportedSchema));
  }
  using units::mhz_to_angular;
  s.atomic_mass = take("atomic_mass");
  s.ground_splitting = mhz_to_angular(take("ground_splitting"));
  s.d1_wavelength = take("d1_wavelength") * units::nm;
  s.d2_wavelength = take("d2_wavelength") * units::nm;
  s.d1_linewidth = mhz_to_angular(take("d1_linewidth"));
  s.d2_linewidth = mhz_to_angular(take("d2_linewidth"));
  s.d1_splittings[{1, 2}] = mhz_to_angular(take("d1_splitting.1.2"));
  s.d2_splittings[{0, 1}] = mhz_to_angular(take("d2_splitting.0.1"));
  s.d2_splittings[{1, 2}] = mhz_to_angular(take("d2_splitting.1.2"));
  s.d2_splittings[{2, 3}] = mhz_to_angular(take("d2_splitting.2.3"));

  for (const auto& [key, value] : values) {
    if (!key.starts_with("strength.")) continue;
    int f = 0;
    int fp = 0;
    char line_name[3] = {};
    if (std::sscanf(key.c_str(), "strength.%2[a-z0-9].%d.%d", line_name, &f, &fp) != 3) {
      throw ConfigError(fmt::format("{}: malformed strength key '{}'", source, key));
    }
    const std::string_view ln = line_name;
    if (ln != "d1" && ln != "d2") throw ConfigError(fmt::format("{}: unknown line in '{}'", source, key));
    if (value < 0.0) throw ConfigError(fmt::format("{}: negative strength '{}'", source, key));
    s.strengths[{ln == "d1" ? Line::D1 : Line::D2, f, fp}] = value;
    used.insert(key);
  }

  s.vapor.solid_a = take("vapor.solid.a");
  s.vapor.solid_b = take("vapor.solid.b");
  s.vapor.liquid_a = take("vapor.liquid.a");
  s.vapor.liquid_b = take("vapor.liquid.b");
  s.vapor.melting_point = take("vapor.melting_point");
  s.vapor.valid_min = take("vapor.valid_min");
  s.vapor.valid_max = take("vapor.valid_max");

  for (const auto& [key, value] : values) {
    if (!used.contains(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", source, key));
  }

  for (const auto* table : {&s.d1_splittings, &s.d2_splittings}) {
    for (const auto& [pair, value] : *table) {
      if (!(value > 0.0)) throw ConfigError(fmt::format("{}: splittings must be positive", source));
    }
  }
  const auto& d2 = s.d2_splittings;
  if (!(d2.at({0, 1}) < d2.at({1, 2}) && d2.at({1, 2}) < d2.at({2, 3}))) {
    throw ConfigError(fmt::format("{}: D2 splittings must increase with F'", source));
  }
  return s;
}

LevelScheme load_level_scheme(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open level data file '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_level_scheme(ss.str(), path.string());
}

const LevelScheme& rb87_level_scheme() {
  static const LevelScheme scheme = parse_level_scheme(bundled_rb87_data(), "rb87.dat");
  return scheme;
}

double comb_spacing(const LevelScheme& scheme, LevelPair pair, int n) {
  if (pair != LevelPair{1, 2} && pair != LevelPair{2, 3}) {
    throw DomainError(fmt::format("comb hyperfine pair must be (1,2) or (2,3), got ({},{})",
                                  pair.first, pair.second));
  }
  if (n < 0) throw DomainError(fmt::format("comb divisor n must be non-negative, got {}", n));
  return scheme.excited_splitting(Line::D2, pair.first, pair.second) / (n + 1);
}

double echo_time(double spacing) {
  if (!(spacing > 0.0)) throw DomainError("echo_time: comb spacing must be positive");
  return units::two_pi / spacing;
}

double thermal_velocity_sigma(double temperature, const LevelScheme& scheme) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  return std::sqrt(units::boltzmann * temperature / scheme.atomic_mass);
}

double maxwell_boltzmann_density(double temperature, double velocity, const LevelScheme& scheme) {
  const double sigma = thermal_velocity_sigma(temperature, scheme);
  const double x = velocity / sigma;
  return std::exp(-0.5 * x * x) / (sigma * std::sqrt(units::two_pi));
}

double doppler_fwhm(double temperature, double wavelength, const LevelScheme& scheme) {
  if (!(temperature > 0.0)) throw DomainError("doppler_fwhm: temperature must be positive");
  if (!(wavelength > 0.0)) throw DomainError("doppler_fwhm: wavelength must be positive");
  return std::sqrt(8.0 * std::numbers::ln2 * units::boltzmann * temperature / scheme.atomic_mass) /
         wavelength;
}

double vapor_pressure(double temperature, const LevelScheme& scheme) {
  const auto& v = scheme.vapor;
  if (!(temperature > v.valid_min && temperature < v.valid_max)) {
    throw DomainError(fmt::format("vapour-pressure correlation valid for {} K < T < {} K, got {} K",
                                  v.valid_min, v.valid_max, temperature));
  }
  const bool solid = temperature < v.melting_point;
  const double a = solid ? v.solid_a : v.liquid_a;
  const double b = solid ? v.solid_b : v.liquid_b;
  return units::atmosphere * std::pow(10.0, a - b / temperature);
}

double vapor_number_density(double temperature, const LevelScheme& scheme) {
  return vapor_pressure(temperature, scheme) / (units::boltzmann * temperature);
}

CombDesign design_comb(const LevelScheme& scheme, LevelPair pair, int n, int min_index,
                       int max_index, double center_velocity) {
  if (min_index > max_index) throw DomainError("design_comb: empty class index range");
  CombDesign d;
  d.hyperfine_pair = pair;
  d.divisor_n = n;
  d.spacing = comb_spacing(scheme, pair, n);
  d.echo_time = echo_time(d.spacing);
  d.center_velocity = center_velocity;
  const double probe = scheme.transition_frequency(Line::D2, 2, 3);
  d.velocity_step = d.spacing * units::speed_of_light / probe;
  d.first_index = min_index;
  for (int k = min_index; k <= max_index; ++k) {
    d.velocity_classes.push_back(center_velocity + k * d.velocity_step);
  }
  return d;
}

}  // namespace afc

#include "config.hpp"

#include <charconv>
#include <map>
#include <set>
#include <utility>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <afc/errors.hpp>
#include <afc/io.hpp>
#include <afc/units.hpp>

namespace afcsim {

namespace {

using afc::ConfigError;

const std::map<std::string, double, std::less<>>& unit_table(Dimension dimension) {
  static const std::map<std::string, double, std::less<>> frequency{
      {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
  static const std::map<std::string, double, std::less<>> time{
      {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}};
  static const std::map<std::string, double, std::less<>> power{{"W", 1.0}, {"mW", 1e-3}, {"uW", 1e-6}};
  static const std::map<std::string, double, std::less<>> length{
      {"m", 1.0}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}};
  static const std::map<std::string, double, std::less<>> temperature{{"K", 1.0}, {"degC", 1.0}};
  static const std::map<std::string, double, std::less<>> velocity{{"m/s", 1.0}, {"km/s", 1e3}};
  static const std::map<std::string, double, std::less<>> density{{"m^-3", 1.0}, {"cm^-3", 1e6}};
  switch (dimension) {
    case Dimension::frequency: return frequency;
    case Dimension::time: return time;
    case Dimension::power: return power;
    case Dimension::length: return length;
    case Dimension::temperature: return temperature;
    case Dimension::velocity: return velocity;
    case Dimension::density: return density;
  }
  return frequency;
}

std::string unit_list(Dimension dimension) {
  std::string out;
  for (const auto& [name, factor] : unit_table(dimension)) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

/// A YAML mapping plus the keys read from it so far.
class Section {
public:
  Section(YAML::Node node, std::string path, const std::string* source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    if (!node_.IsMap()) fail(node_, fmt::format("'{}' must be a mapping", path_));
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& message) const {
    const auto mark = at.Mark();
    if (mark.is_null()) throw ConfigError(fmt::format("{}: {}", *source_, message));
    throw ConfigError(fmt::format("{}:{}:{}: {}", *source_, mark.line + 1, mark.column + 1, message));
  }

  bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

  YAML::Node get(const std::string& key) {
    used_.insert(key);
    const YAML::Node n = node_[key];
    if (!n) fail(node_, fmt::format("missing key '{}'", qualified(key)));
    return n;
  }

  std::string scalar(const std::string& key) {
    const auto n = get(key);
    if (!n.IsScalar()) fail(n, fmt::format("'{}' must be a scalar", qualified(key)));
    return n.Scalar();
  }

  double quantity(const std::string& key, Dimension dimension) {
    const auto n = get(key);
    return quantity_of(n, key, dimension);
  }
  double quantity(const std::string& key, Dimension dimension, double fallback) {
    return has(key) ? quantity(key, dimension) : (used_.insert(key), fallback);
  }

  double number(const std::string& key) {
    const auto n = get(key);
    return number_of(n, key);
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : (used_.insert(key), fallback); }

  long long integer(const std::string& key) {
    const auto n = get(key);
    const auto text = n.IsScalar() ? n.Scalar() : std::string{};
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
      fail(n, fmt::format("'{}' must be an integer, got '{}'", qualified(key), text));
    }
    return v;
  }
  long long integer(const std::string& key, long long fallback) {
    return has(key) ? integer(key) : (used_.insert(key), fallback);
  }
  std::size_t count(const std::string& key, std::size_t fallback, std::size_t minimum) {
    if (!has(key)) return fallback;
    const auto v = integer(key);
    if (v < static_cast<long long>(minimum)) {
      fail(node_[key], fmt::format("'{}' must be at least {}", qualified(key), minimum));
    }
    return static_cast<std::size_t>(v);
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto n = get(key);
    bool v = false;
    if (!n.IsScalar() || !YAML::convert<bool>::decode(n, v)) {
      fail(n, fmt::format("'{}' must be true or false", qualified(key)));
    }
    return v;
  }

  std::string text(const std::string& key, const std::string& fallback) { return has(key) ? scalar(key) : fallback; }

  std::vector<double> quantities(const std::string& key, Dimension dimension) {
    const auto n = get(key);
    if (!n.IsSequence()) fail(n, fmt::format("'{}' must be a list", qualified(key)));
    std::vector<double> out;
    for (const auto& item : n) out.push_back(quantity_of(item, key, dimension));
    return out;
  }

  std::vector<long long> integers(const std::string& key) {
    const auto n = get(key);
    if (!n.IsSequence()) fail(n, fmt::format("'{}' must be a list", qualified(key)));
    std::vector<long long> out;
    for (const auto& item : n) {
      long long v = 0;
      if (!item.IsScalar() || !YAML::convert<long long>::decode(item, v)) {
        fail(item, fmt::format("'{}' must list integers", qualified(key)));
      }
      out.push_back(v);
    }
    return out;
  }

  Section section(const std::string& key) { return Section(get(key), qualified(key), source_); }
  std::optional<Section> optional_section(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return section(key);
  }
  std::vector<Section> sections(const std::string& key) {
    const auto n = get(key);
    if (!n.IsSequence()) fail(n, fmt::format("'{}' must be a list", qualified(key)));
    std::vector<Section> out;
    std::size_t i = 0;
    for (const auto& item : n) out.emplace_back(item, fmt::format("{}[{}]", qualified(key), i++), source_);
    return out;
  }

  /// Rejects every key that was never read.
  void finish() const {
    for (const auto& entry : node_) {
      const auto key = entry.first.Scalar();
      if (!used_.contains(key)) fail(entry.first, fmt::format("unknown key '{}'", qualified(key)));
    }
  }

  const YAML::Node& node() const { return node_; }

private:
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double quantity_of(const YAML::Node& n, const std::string& key, Dimension dimension) const {
    if (!n.IsScalar()) fail(n, fmt::format("'{}' must be a quantity with a unit", qualified(key)));
    try {
      return parse_quantity(n.Scalar(), dimension);
    } catch (const ConfigError& e) {
      fail(n, fmt::format("'{}': {}", qualified(key), e.what()));
    }
  }

  double number_of(const YAML::Node& n, const std::string& key) const {
    const auto text = n.IsScalar() ? n.Scalar() : std::string{};
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
      fail(n, fmt::format("'{}' must be a plain number, got '{}'", qualified(key), text));
    }
    return v;
  }

  YAML::Node node_;
  std::string path_;
  const std::string* source_;
  std::set<std::string> used_;
};

void positive(Section& s, const std::string& key, double value) {
  if (!(value > 0.0)) s.fail(s.node()[key] ? s.node()[key] : s.node(), fmt::format("'{}' must be positive", key));
}

afc::IntegratorMethod parse_integrator(Section& s) {
  if (!s.has("integrator")) return afc::IntegratorMethod::adaptive_rk45;
  const auto name = s.scalar("integrator");
  if (name == "adaptive") return afc::IntegratorMethod::adaptive_rk45;
  if (name == "rk4") return afc::IntegratorMethod::fixed_rk4;
  if (name == "exponential") return afc::IntegratorMethod::exponential;
  s.fail(s.node()["integrator"], fmt::format("unknown integrator '{}' (adaptive, rk4, exponential)", name));
}

CellConfig parse_cell(Section s) {
  CellConfig c;
  c.length = s.quantity("length", Dimension::length);
  c.temperature = s.quantity("temperature", Dimension::temperature);
  if (s.has("density")) c.density = s.quantity("density", Dimension::density);
  positive(s, "length", c.length);
  positive(s, "temperature", c.temperature);
  s.finish();
  return c;
}

VelocityGridConfig parse_velocity_grid(Section s) {
  VelocityGridConfig g;
  g.points = s.count("points", 0, 3);
  g.sigmas = s.number("sigmas", 4.0);
  positive(s, "sigmas", g.sigmas);
  s.finish();
  return g;
}

PumpConfig parse_pump(Section s) {
  PumpConfig p;
  p.ideal = s.flag("ideal", false);
  if (!p.ideal) {
    p.power = s.quantity("power", Dimension::power);
    p.duration = s.quantity("duration", Dimension::time);
  }
  p.detuning = s.quantity("detuning", Dimension::frequency, 0.0);
  p.linewidth = s.quantity("linewidth", Dimension::frequency, p.linewidth);
  p.beam_radius = s.quantity("beam_radius", Dimension::length, p.beam_radius);
  s.finish();
  return p;
}

SidebandConfig parse_sidebands(Section s) {
  SidebandConfig sb;
  sb.n_min = static_cast<int>(s.integer("n_min", sb.n_min));
  sb.n_max = static_cast<int>(s.integer("n_max", sb.n_max));
  sb.sigma = s.number("sigma", sb.sigma);
  sb.alpha = s.number("alpha", sb.alpha);
  if (sb.n_min > sb.n_max) s.fail(s.node(), "'pump_back.sidebands': n_min exceeds n_max");
  positive(s, "sigma", sb.sigma);
  s.finish();
  return sb;
}

PumpBackConfig parse_pump_back(Section s) {
  PumpBackConfig p;
  p.power = s.quantity("power", Dimension::power);
  p.duration = s.quantity("duration", Dimension::time);
  p.linewidth = s.quantity("linewidth", Dimension::frequency, p.linewidth);
  p.beam_radius = s.quantity("beam_radius", Dimension::length, p.beam_radius);
  if (s.has("center_velocity")) p.center_velocity = s.quantity("center_velocity", Dimension::velocity);
  if (s.has("velocity_spacing")) p.velocity_spacing = s.quantity("velocity_spacing", Dimension::velocity);
  if (auto sb = s.optional_section("sidebands")) p.sidebands = parse_sidebands(std::move(*sb));
  positive(s, "beam_radius", p.beam_radius);
  s.finish();
  return p;
}

CombConfig parse_comb(Section s) {
  CombConfig c;
  if (s.has("upper_levels")) {
    const auto levels = s.integers("upper_levels");
    if (levels.size() != 2) s.fail(s.node()["upper_levels"], "'comb.upper_levels' needs two excited levels");
    c.pair = {static_cast<int>(levels[0]), static_cast<int>(levels[1])};
  }
  c.n = static_cast<int>(s.integer("n", c.n));
  c.min_index = static_cast<int>(s.integer("min_index", c.min_index));
  c.max_index = static_cast<int>(s.integer("max_index", c.max_index));
  c.center_velocity = s.quantity("center_velocity", Dimension::velocity, 0.0);
  if (c.n < 0) s.fail(s.node()["n"], "'comb.n' must be non-negative");
  if (c.min_index > c.max_index) s.fail(s.node(), "'comb': min_index exceeds max_index");
  s.finish();
  return c;
}

ProbeConfig parse_probe(Section s) {
  ProbeConfig p;
  p.min = s.quantity("min", Dimension::frequency);
  p.max = s.quantity("max", Dimension::frequency);
  p.points = s.count("points", p.points, 2);
  if (!(p.min < p.max)) s.fail(s.node(), "'probe': min must be below max");
  s.finish();
  return p;
}

PulseConfig parse_pulse(Section s) {
  PulseConfig p;
  p.bandwidth = s.quantity("bandwidth", Dimension::frequency);
  p.carrier = s.quantity("carrier", Dimension::frequency, 0.0);
  if (s.has("centers")) p.centers = s.quantities("centers", Dimension::time);
  p.grid.dt = s.quantity("dt", Dimension::time, p.grid.dt);
  p.grid.points = s.count("points", p.grid.points, 16);
  p.grid.start = s.quantity("start", Dimension::time, p.grid.start);
  positive(s, "bandwidth", p.bandwidth);
  positive(s, "dt", p.grid.dt);
  if (p.centers.empty()) s.fail(s.node()["centers"], "'pulse.centers' is empty");
  s.finish();
  return p;
}

EchoConfig parse_echo(Section s) {
  EchoConfig e;
  e.orders = static_cast<int>(s.integer("orders", e.orders));
  e.window = s.quantity("window", Dimension::time, e.window);
  if (s.has("echo_time")) e.echo_time = s.quantity("echo_time", Dimension::time);
  if (e.orders < 1) s.fail(s.node()["orders"], "'echo.orders' must be at least 1");
  positive(s, "window", e.window);
  s.finish();
  return e;
}

ScanConfig parse_scan(Section s) {
  ScanConfig c;
  c.min = s.quantity("min", Dimension::frequency);
  c.max = s.quantity("max", Dimension::frequency);
  c.steps = s.count("steps", c.steps, 8);
  if (!(c.min < c.max)) s.fail(s.node(), "'scan': min must be below max");
  s.finish();
  return c;
}

Dimension parameter_dimension(const std::string& name, bool& unitless) {
  unitless = false;
  if (name == "temperature") return Dimension::temperature;
  if (name == "center_velocity" || name == "velocity_spacing") return Dimension::velocity;
  if (name == "power") return Dimension::power;
  if (name == "duration") return Dimension::time;
  if (name == "linewidth") return Dimension::frequency;
  unitless = true;
  return Dimension::frequency;
}

afc::FreeParameter parse_free_parameter(Section s) {
  afc::FreeParameter p;
  p.name = s.scalar("name");
  const auto& names = afc::AfcModelParameters::names();
  if (std::find(names.begin(), names.end(), p.name) == names.end()) {
    s.fail(s.node()["name"], fmt::format("unknown fit parameter '{}'", p.name));
  }
  bool unitless = false;
  const auto dimension = parameter_dimension(p.name, unitless);
  if (unitless) {
    p.lower = s.number("lower");
    p.upper = s.number("upper");
  } else {
    p.lower = s.quantity("lower", dimension);
    p.upper = s.quantity("upper", dimension);
  }
  if (p.name == "linewidth") {
    p.lower *= afc::units::two_pi;
    p.upper *= afc::units::two_pi;
  }
  p.log_scale = s.flag("log", false);
  if (!(p.lower < p.upper)) s.fail(s.node(), fmt::format("fit parameter '{}': lower must be below upper", p.name));
  if (p.log_scale && !(p.lower > 0.0)) {
    s.fail(s.node(), fmt::format("fit parameter '{}': log scale needs a positive lower bound", p.name));
  }
  s.finish();
  return p;
}

FitConfig parse_fit(Section s) {
  FitConfig f;
  f.mode = s.text("mode", f.mode);
  if (f.mode != "afc" && f.mode != "thermal") {
    s.fail(s.node()["mode"], fmt::format("unknown fit mode '{}' (afc, thermal)", f.mode));
  }
  if (s.has("measured")) f.measured = s.scalar("measured");
  f.noise_sigma = s.number("noise_sigma", 0.0);
  f.starts = s.count("starts", f.starts, 1);
  f.max_iterations = static_cast<int>(s.count("max_iterations", 200, 1));
  f.velocity_points = s.count("velocity_points", f.velocity_points, 3);
  f.residual_fraction = s.number("residual_fraction", 0.0);
  if (s.has("subtract_fraction")) f.subtract_fraction = s.number("subtract_fraction");
  f.min_temperature = s.quantity("min_temperature", Dimension::temperature, f.min_temperature);
  f.max_temperature = s.quantity("max_temperature", Dimension::temperature, f.max_temperature);
  if (s.has("free")) {
    for (auto& item : s.sections("free")) f.free.push_back(parse_free_parameter(std::move(item)));
  }
  if (f.noise_sigma < 0.0) s.fail(s.node()["noise_sigma"], "'fit.noise_sigma' must be non-negative");
  s.finish();
  return f;
}

}  // namespace

double parse_quantity(std::string_view text, Dimension dimension) {
  const auto s = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr == s.data()) throw ConfigError(fmt::format("'{}' is not a number with a unit", text));
  const auto unit = trim(std::string_view(ptr, static_cast<std::size_t>(s.data() + s.size() - ptr)));
  if (unit.empty()) {
    throw ConfigError(fmt::format("'{}' has no unit (expected one of {})", text, unit_list(dimension)));
  }
  const auto& table = unit_table(dimension);
  const auto it = table.find(unit);
  if (it == table.end()) {
    throw ConfigError(fmt::format("unknown unit '{}' (expected one of {})", unit, unit_list(dimension)));
  }
  if (dimension == Dimension::temperature && unit == "degC") return afc::units::celsius_to_kelvin(value);
  return value * it->second;
}

std::filesystem::path ExperimentConfig::resolve(const std::filesystem::path& path) const {
  if (path.empty() || path.is_absolute()) return path;
  return source.parent_path() / path;
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& source) {
  const std::string source_name = source.string();
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}:{}:{}: {}", source_name, e.mark.line + 1, e.mark.column + 1, e.msg));
  }
  if (!root || root.IsNull()) throw ConfigError(fmt::format("{}: empty config", source_name));

  ExperimentConfig c;
  c.source = source;
  c.text = std::string(text);
  Section s(root, "", &source_name);
  c.name = s.text("name", source.stem().string());
  c.seed = static_cast<std::uint64_t>(s.integer("seed", 1));
  if (s.has("output")) c.output = s.scalar("output");
  c.scheme = s.text("scheme", c.scheme);
  c.integrator = parse_integrator(s);
  c.max_step = s.quantity("max_step", Dimension::time, c.max_step);
  c.concurrent = s.flag("concurrent", false);
  if (s.has("cell")) c.cell = parse_cell(s.section("cell"));
  if (s.has("velocity_grid")) c.velocity_grid = parse_velocity_grid(s.section("velocity_grid"));
  if (s.has("pump")) c.pump = parse_pump(s.section("pump"));
  if (s.has("pump_back")) c.pump_back = parse_pump_back(s.section("pump_back"));
  if (s.has("comb")) c.comb = parse_comb(s.section("comb"));
  if (s.has("probe")) c.probe = parse_probe(s.section("probe"));
  if (auto noise = s.optional_section("noise")) {
    c.od_noise = noise->number("od_sigma");
    if (*c.od_noise < 0.0) noise->fail(noise->node()["od_sigma"], "'noise.od_sigma' must be non-negative");
    noise->finish();
  }
  if (s.has("pulse")) c.pulse = parse_pulse(s.section("pulse"));
  if (s.has("echo")) c.echo = parse_echo(s.section("echo"));
  if (s.has("scan")) c.scan = parse_scan(s.section("scan"));
  if (auto metrics = s.optional_section("metrics")) {
    c.metrics_input = metrics->scalar("input");
    metrics->finish();
  }
  if (s.has("fit")) c.fit = parse_fit(s.section("fit"));
  s.finish();

  if (c.pump_back && !c.comb && !(c.pump_back->center_velocity && c.pump_back->velocity_spacing)) {
    throw ConfigError(fmt::format(
        "{}: pump_back needs either a comb block or center_velocity and velocity_spacing", source_name));
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(afc::io::read_text(path), path);
}

}  // namespace afcsim

#include <doctest.h>

#include <sstream>
#include <string>

#include <afc/errors.hpp>
#include <afc/units.hpp>

#include "commands.hpp"
#include "config.hpp"

using namespace afcsim;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "exp.yaml");
  } catch (const afc::ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("quantities carry explicit units") {
  CHECK(parse_quantity("133.33 MHz", Dimension::frequency) == doctest::Approx(133.33e6));
  CHECK(parse_quantity("1.5 GHz", Dimension::frequency) == doctest::Approx(1.5e9));
  CHECK(parse_quantity("10cm", Dimension::length) == doctest::Approx(0.1));
  CHECK(parse_quantity("26.9 degC", Dimension::temperature) == doctest::Approx(300.05));
  CHECK(parse_quantity("300 K", Dimension::temperature) == 300.0);
  CHECK(parse_quantity("1.67 us", Dimension::time) == doctest::Approx(1.67e-6));
  CHECK(parse_quantity("25 ps", Dimension::time) == doctest::Approx(25e-12));
  CHECK(parse_quantity("0.494 mW", Dimension::power) == doctest::Approx(0.494e-3));
  CHECK(parse_quantity("-36 m/s", Dimension::velocity) == -36.0);
  CHECK(parse_quantity("1.5e16 m^-3", Dimension::density) == doctest::Approx(1.5e16));
  CHECK(parse_quantity("1e10 cm^-3", Dimension::density) == doctest::Approx(1e16));

  CHECK_THROWS_AS(parse_quantity("10", Dimension::length), afc::ConfigError);
  CHECK_THROWS_AS(parse_quantity("10 furlongs", Dimension::length), afc::ConfigError);
  CHECK_THROWS_AS(parse_quantity("10 MHz", Dimension::time), afc::ConfigError);
  CHECK_THROWS_AS(parse_quantity("MHz", Dimension::frequency), afc::ConfigError);
}

TEST_CASE("config errors are anchored to a line") {
  const std::string base = "name: t\ncell:\n  length: 10 cm\n  temperature: 300 K\n";
  CHECK(error_of(base).empty());

  const auto unknown = error_of(base + "  lenght: 10 cm\n");
  CHECK(unknown.find("exp.yaml:5:") != std::string::npos);
  CHECK(unknown.find("unknown key 'cell.lenght'") != std::string::npos);

  const auto top = error_of(base + "colour: blue\n");
  CHECK(top.find("exp.yaml:5:1") != std::string::npos);

  const auto bad_unit = error_of("cell:\n  length: 10 parsecs\n  temperature: 300 K\n");
  CHECK(bad_unit.find("exp.yaml:2:") != std::string::npos);
  CHECK(bad_unit.find("parsecs") != std::string::npos);

  const auto no_unit = error_of("cell:\n  length: 0.1\n  temperature: 300 K\n");
  CHECK(no_unit.find("no unit") != std::string::npos);

  const auto missing = error_of("probe:\n  max: 1 GHz\n");
  CHECK(missing.find("exp.yaml:2:") != std::string::npos);
  CHECK(missing.find("'probe.min'") != std::string::npos);

  const auto syntax = error_of("cell: [1, 2\n");
  CHECK(syntax.find("exp.yaml:") != std::string::npos);

  CHECK(error_of("pulse:\n  bandwidth: 1 GHz\n  points: 1.5\n").find("integer") != std::string::npos);
  CHECK(error_of("comb:\n  min_index: 2\n  max_index: 1\n").find("min_index") != std::string::npos);
  CHECK(error_of("integrator: euler\n").find("unknown integrator") != std::string::npos);
  CHECK(!error_of("pump_back:\n  power: 1 mW\n  duration: 1 us\n").empty());
}

TEST_CASE("fit blocks") {
  const std::string head = "cell:\n  length: 10 cm\n  temperature: 300 K\nfit:\n";
  const auto c = parse_config(head +
                                  "  mode: afc\n  free:\n"
                                  "    - {name: power, lower: 0.1 mW, upper: 2 mW, log: true}\n"
                                  "    - {name: linewidth, lower: 5 MHz, upper: 50 MHz}\n"
                                  "    - {name: sideband_alpha, lower: -1, upper: 1}\n",
                              "exp.yaml");
  REQUIRE(c.fit);
  REQUIRE(c.fit->free.size() == 3);
  CHECK(c.fit->free[0].log_scale);
  CHECK(c.fit->free[0].upper == doctest::Approx(2e-3));
  CHECK(c.fit->free[1].lower == doctest::Approx(afc::units::two_pi * 5e6));
  CHECK(c.fit->free[2].lower == -1.0);

  CHECK(error_of(head + "  free:\n    - {name: mass, lower: 1, upper: 2}\n").find("unknown fit parameter") !=
        std::string::npos);
  CHECK(error_of(head + "  free:\n    - {name: sideband_alpha, lower: -1, upper: 1, log: true}\n")
            .find("positive lower bound") != std::string::npos);
  CHECK(error_of(head + "  free:\n    - {name: power, lower: 1, upper: 2}\n").find("no unit") != std::string::npos);
  CHECK(error_of(head + "  mode: bayes\n").find("unknown fit mode") != std::string::npos);
}

TEST_CASE("relative paths resolve against the config file") {
  const auto c = parse_config("metrics:\n  input: rows.csv\n", "/data/run/exp.yaml");
  REQUIRE(c.metrics_input);
  CHECK(c.resolve(*c.metrics_input) == std::filesystem::path("/data/run/rows.csv"));
  CHECK(c.resolve("/abs.csv") == std::filesystem::path("/abs.csv"));
  CHECK(c.name == "exp");
}

TEST_CASE("shipped configs parse") {
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(AFC_CONFIG_DIR)) {
    if (entry.path().extension() != ".yaml") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()));
    ++count;
  }
  CHECK(count >= 7);
}

TEST_CASE("exit codes follow the error category") {
  std::ostringstream err;
  CHECK(guarded([] {}, err) == exit_success);
  CHECK(guarded([] { throw afc::ConfigError("c"); }, err) == exit_config);
  CHECK(guarded([] { throw afc::DomainError("d"); }, err) == exit_config);
  CHECK(guarded([] { throw afc::FitError("f"); }, err) == exit_numerical);
  CHECK(guarded([] { throw afc::IntegrationError("i"); }, err) == exit_numerical);
  CHECK(guarded([] { throw afc::AnalysisError("a"); }, err) == exit_numerical);
  CHECK(err.str().find("error: f") != std::string::npos);
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "afc/atomic_data.hpp"
#include "afc/errors.hpp"
#include "afc/units.hpp"
#include "quadrature.hpp"

using namespace afc;
using units::mhz_to_angular;

namespace {
const LevelScheme& rb() { return rb87_level_scheme(); }
}  // namespace

TEST_CASE("bundled level scheme carries the D-line constants") {
  CHECK(rb().schema_version == 1);
  CHECK(rb().d2_splittings.at({2, 3}) == doctest::Approx(mhz_to_angular(266.650)).epsilon(1e-12));
  CHECK(rb().d2_splittings.at({1, 2}) == doctest::Approx(mhz_to_angular(156.947)).epsilon(1e-12));
  CHECK(rb().d2_splittings.at({0, 1}) == doctest::Approx(mhz_to_angular(72.218)).epsilon(1e-12));
  CHECK(rb().d1_splittings.at({1, 2}) == doctest::Approx(mhz_to_angular(816.656)).epsilon(1e-12));
  CHECK(units::angular_to_hz(rb().ground_splitting) / 1e9 == doctest::Approx(6.835).epsilon(1e-4));
  CHECK(rb().d1_linewidth == doctest::Approx(mhz_to_angular(5.7)));
  CHECK(rb().d2_linewidth == doctest::Approx(mhz_to_angular(6.1)));
}

TEST_CASE("composite splittings obey the sum rule and ordering") {
  const auto& s = rb();
  const double d01 = s.excited_splitting(Line::D2, 0, 1);
  const double d12 = s.excited_splitting(Line::D2, 1, 2);
  const double d23 = s.excited_splitting(Line::D2, 2, 3);
  CHECK(d01 < d12);
  CHECK(d12 < d23);
  CHECK(s.excited_splitting(Line::D2, 0, 2) == doctest::Approx(d01 + d12).epsilon(1e-15));
  CHECK(s.excited_splitting(Line::D2, 0, 3) == doctest::Approx(d01 + d12 + d23).epsilon(1e-15));
  CHECK_THROWS_AS(s.excited_splitting(Line::D2, 3, 2), DomainError);
  CHECK_THROWS_AS(s.excited_splitting(Line::D1, 0, 1), DomainError);
}

TEST_CASE("level offsets sit on the hyperfine centre of gravity") {
  const auto& s = rb();
  // Sum of (2F'+1) E_F' vanishes for both lines.
  for (Line line : {Line::D1, Line::D2}) {
    double weighted = 0.0;
    for (int fp : s.excited_levels(line)) weighted += (2 * fp + 1) * s.excited_level_offset(line, fp);
    CHECK(std::abs(weighted) < 1e-6 * s.ground_splitting);
  }
  CHECK(units::angular_to_mhz(s.excited_level_offset(Line::D2, 0)) == doctest::Approx(-302.074).epsilon(1e-5));
  CHECK(s.ground_level_offset(1) == doctest::Approx(-5.0 / 8.0 * s.ground_splitting));
  CHECK(s.ground_level_offset(2) == doctest::Approx(3.0 / 8.0 * s.ground_splitting));
  const double d2_23 = s.transition_frequency(Line::D2, 2, 3) - s.transition_frequency(Line::D2, 2, 2);
  CHECK(d2_23 == doctest::Approx(mhz_to_angular(266.650)).epsilon(1e-9));
}

TEST_CASE("transition data: selection rules and detailed balance") {
  const auto& s = rb();
  CHECK_FALSE(s.transition(Line::D2, 2, 0).allowed());
  CHECK_FALSE(s.transition(Line::D2, 1, 3).allowed());
  CHECK(s.transition(Line::D2, 2, 0).einstein_a == 0.0);
  CHECK_THROWS_AS(s.transition(Line::D2, 3, 3), DomainError);
  CHECK_THROWS_AS(s.transition(Line::D1, 2, 3), DomainError);
  for (Line line : {Line::D1, Line::D2}) {
    for (int f : {1, 2}) {
      double branching = 0.0;
      for (int fp : s.excited_levels(line)) {
        const auto t = s.transition(line, f, fp);
        CHECK(t.einstein_a >= 0.0);
        if (!t.allowed()) continue;
        CHECK(t.lower_degeneracy() * t.einstein_b_absorption ==
              doctest::Approx(t.upper_degeneracy() * t.einstein_b_emission).epsilon(1e-14));
        // B_em = pi^2 c^3 A / (hbar w^3)
        const double c = units::speed_of_light;
        const double w = t.resonant_frequency;
        CHECK(t.einstein_b_emission ==
              doctest::Approx(units::pi * units::pi * c * c * c * t.einstein_a / (units::hbar * w * w * w)));
        branching += t.relative_strength;
      }
      CHECK(branching == doctest::Approx(1.0).epsilon(1e-12));
    }
    // Every excited level decays with the full natural rate.
    for (int fp : s.excited_levels(line)) {
      double total = 0.0;
      for (int f : {1, 2}) {
        if (std::abs(f - fp) <= 1) total += s.transition(line, f, fp).einstein_a;
      }
      CHECK(total == doctest::Approx(s.linewidth(line)).epsilon(1e-12));
    }
  }
}

TEST_CASE("comb spacing and echo time") {
  const auto& s = rb();
  CHECK(units::angular_to_mhz(comb_spacing(s, {2, 3}, 1)) == doctest::Approx(133.325).epsilon(1e-9));
  CHECK(units::angular_to_mhz(comb_spacing(s, {2, 3}, 0)) == doctest::Approx(266.650).epsilon(1e-12));
  CHECK(units::angular_to_mhz(comb_spacing(s, {2, 3}, 2)) == doctest::Approx(88.883).epsilon(1e-5));
  CHECK(echo_time(comb_spacing(s, {2, 3}, 1)) / units::ns == doctest::Approx(7.5006).epsilon(1e-4));
  CHECK(echo_time(comb_spacing(s, {2, 3}, 2)) / units::ns == doctest::Approx(11.25).epsilon(1e-3));
  CHECK(echo_time(units::two_pi) == doctest::Approx(1.0));
  CHECK_THROWS_AS(comb_spacing(s, {0, 1}, 1), DomainError);
  CHECK_THROWS_AS(comb_spacing(s, {2, 3}, -1), DomainError);
  CHECK_THROWS_AS(echo_time(0.0), DomainError);
  CHECK_THROWS_AS(echo_time(-1.0), DomainError);

  for (LevelPair pair : {LevelPair{1, 2}, LevelPair{2, 3}}) {
    const double full = s.excited_splitting(Line::D2, pair.first, pair.second);
    for (int n = 0; n <= 10; ++n) {
      const double spacing = comb_spacing(s, pair, n);
      CHECK(spacing * (n + 1) == doctest::Approx(full).epsilon(1e-15));
      CHECK(echo_time(spacing) * spacing == doctest::Approx(units::two_pi).epsilon(1e-15));
    }
  }
}

TEST_CASE("comb design maps one velocity step to one comb spacing") {
  const auto& s = rb();
  const auto d = design_comb(s, {2, 3}, 1, -1, 1);
  REQUIRE(d.velocity_classes.size() == 3);
  CHECK(d.velocity_classes[1] == 0.0);
  const double probe = s.transition_frequency(Line::D2, 2, 3);
  for (std::size_t k = 1; k < d.velocity_classes.size(); ++k) {
    const double dv = d.velocity_classes[k] - d.velocity_classes[k - 1];
    CHECK(probe * dv / units::speed_of_light == doctest::Approx(d.spacing).epsilon(1e-12));
  }
  CHECK(d.velocity_step == doctest::Approx(104.0).epsilon(0.01));
  CHECK_THROWS_AS(design_comb(s, {2, 3}, 1, 2, 1), DomainError);
}

TEST_CASE("Maxwell-Boltzmann density") {
  const auto& s = rb();
  const double sigma = std::sqrt(units::boltzmann * 300.0 / s.atomic_mass);
  CHECK(maxwell_boltzmann_density(300.0, 0.0, s) ==
        doctest::Approx(1.0 / (sigma * std::sqrt(units::two_pi))).epsilon(1e-14));
  CHECK(thermal_velocity_sigma(300.0, s) == doctest::Approx(169.4).epsilon(1e-3));
  const double norm = oracle::simpson([&](double v) { return maxwell_boltzmann_density(300.0, v, s); },
                                      -6.0 * sigma, 6.0 * sigma, 2000);
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-6));
  for (double v : {1.0, 50.0, 170.0, 500.0}) {
    CHECK(maxwell_boltzmann_density(300.05, v, s) == maxwell_boltzmann_density(300.05, -v, s));
  }
  CHECK_THROWS_AS(maxwell_boltzmann_density(0.0, 0.0, s), DomainError);
  CHECK_THROWS_AS(maxwell_boltzmann_density(-5.0, 0.0, s), DomainError);
}

TEST_CASE("Doppler width") {
  const auto& s = rb();
  // Reference values from the closed form with CODATA constants and m = 86.909180520 u.
  const double mass = 86.909180520 * 1.66053906660e-27;
  auto reference = [&](double t, double lambda) {
    return std::sqrt(8.0 * std::log(2.0) * 1.380649e-23 * t / mass) / lambda;
  };
  CHECK(doppler_fwhm(300.0, 780e-9, s) == doctest::Approx(reference(300.0, 780e-9)).epsilon(1e-6));
  CHECK(doppler_fwhm(300.0, 780e-9, s) / 1e6 == doctest::Approx(511.3).epsilon(1e-3));
  CHECK(doppler_fwhm(300.0, 795e-9, s) / 1e6 == doctest::Approx(501.8).epsilon(1e-3));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> temp(50.0, 600.0);
  std::uniform_real_distribution<double> wl(300e-9, 1500e-9);
  for (int i = 0; i < 50; ++i) {
    const double t = temp(rng);
    const double l = wl(rng);
    CHECK(doppler_fwhm(4.0 * t, l, s) / doppler_fwhm(t, l, s) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(doppler_fwhm(t, 2.0 * l, s) / doppler_fwhm(t, l, s) == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK_THROWS_AS(doppler_fwhm(0.0, 780e-9, s), DomainError);
  CHECK_THROWS_AS(doppler_fwhm(300.0, 0.0, s), DomainError);
}

TEST_CASE("vapour number density") {
  const auto& s = rb();
  const double t = units::celsius_to_kelvin(26.9);
  // Solid-branch vapour-pressure fit evaluated by hand: 10^(4.857 - 4215/T) atm.
  const double p = std::pow(10.0, 4.857 - 4215.0 / t) * 101325.0;
  CHECK(vapor_number_density(t, s) == doctest::Approx(p / (1.380649e-23 * t)).epsilon(1e-12));
  CHECK(vapor_number_density(t, s) == doctest::Approx(1.577e16).epsilon(2e-3));
  CHECK(vapor_number_density(units::celsius_to_kelvin(27.9), s) / vapor_number_density(t, s) > 1.05);
  double last = 0.0;
  for (double k = 251.0; k < 400.0; k += 1.0) {
    const double n = vapor_number_density(k, s);
    CHECK(n > last);
    last = n;
  }
  CHECK_THROWS_AS(vapor_number_density(250.0, s), DomainError);
  CHECK_THROWS_AS(vapor_number_density(400.0, s), DomainError);
}

TEST_CASE("level-scheme parser validates its input") {
  const std::string text(bundled_rb87_data());
  CHECK_NOTHROW(parse_level_scheme(text));
  CHECK_THROWS_AS(parse_level_scheme(text + "\nbogus_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_level_scheme(text + "\natomic_mass = 1\n"), ConfigError);
  std::string broken = text;
  broken.replace(broken.find("schema_version"), 14, "schema_versiom");
  CHECK_THROWS_AS(parse_level_scheme(broken), ConfigError);
  CHECK_THROWS_AS(load_level_scheme("/nonexistent/rb87.dat"), ConfigError);
}

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "afc/errors.hpp"
#include "afc/metrics.hpp"
#include "benchmark_fidelity.hpp"

using namespace afc;

TEST_CASE("qubit fidelity") {
  CHECK(qubit_fidelity(15.1) == doctest::Approx(0.9415).epsilon(1e-4));
  CHECK(qubit_fidelity(3.2) == doctest::Approx(0.8077).epsilon(1e-4));
  CHECK(qubit_fidelity(0.0) == 0.5);
  CHECK_THROWS_AS(qubit_fidelity(-1.0), DomainError);
}

TEST_CASE("benchmark fidelity of the measured rows") {
  CHECK(std::abs(classical_benchmark_fidelity(0.024, 0.0438) - 0.690) < 0.0005);
  CHECK(std::abs(classical_benchmark_fidelity(0.017, 0.026) - 0.694) < 0.0005);
  CHECK_THROWS_AS(classical_benchmark_fidelity(0.02, 0.0), DomainError);
  CHECK_THROWS_AS(classical_benchmark_fidelity(0.02, 1.5), DomainError);
  CHECK_THROWS_AS(classical_benchmark_fidelity(0.0, 0.5), DomainError);
}

TEST_CASE("benchmark fidelity matches explicit enumeration") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> log_mu(std::log(1e-4), std::log(5.0));
  std::uniform_real_distribution<double> eta(1e-4, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double m = std::exp(log_mu(rng));
    const double e = eta(rng);
    CHECK(classical_benchmark_fidelity(m, e) == doctest::Approx(oracle::benchmark_fidelity(m, e)).epsilon(1e-12));
  }
  CHECK(classical_benchmark_fidelity(0.3, 1.0) == doctest::Approx(oracle::benchmark_fidelity(0.3, 1.0)).epsilon(1e-12));
}

TEST_CASE("benchmark fidelity stays in the single-photon band for weak inputs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mu(1e-5, 0.999);
  std::uniform_real_distribution<double> eta(1e-5, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double f = classical_benchmark_fidelity(mu(rng), eta(rng));
    CHECK(f >= 2.0 / 3.0 - 1e-12);
    CHECK(f < 1.0);
  }
  CHECK(classical_benchmark_fidelity(1e-6, 0.01) == doctest::Approx(2.0 / 3.0).epsilon(1e-5));
  CHECK(classical_benchmark_fidelity(1e-6, 1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("heralded autocorrelation and its threshold") {
  CHECK(std::abs(heralded_g2_out(15.1, 0.0) - 0.120) < 0.0005);
  CHECK(std::abs(heralded_g2_out(3.2, 0.0) - 0.42) < 0.005);
  for (double s : {0.0, 0.5, 3.0, 40.0}) CHECK(heralded_g2_out(s, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(g2_in_threshold(15.1).value - 0.432) < 0.0005);
  CHECK(std::abs(g2_in_threshold(3.2).value - 0.139) < 0.0005);
  CHECK(g2_in_threshold(1.0 + std::sqrt(2.0)).value == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(g2_in_threshold(1.0).status == ThresholdStatus::unachievable);
  CHECK(g2_in_threshold(0.0).status == ThresholdStatus::unachievable);
  CHECK(std::isnan(g2_in_threshold(0.0).value));
  CHECK_THROWS_AS(heralded_g2_out(1.0, -0.1), DomainError);
}

TEST_CASE("cross-correlation and its threshold") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(cross_correlation_out(15.1, inf) == doctest::Approx(16.1));
  CHECK(cross_correlation_out(3.2, inf) == doctest::Approx(4.2));
  for (double s : {0.0, 0.5, 3.0, 40.0}) CHECK(cross_correlation_out(s, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(g2_si_threshold(15.1).value - 2.142) < 0.0005);
  CHECK(std::abs(g2_si_threshold(3.2).value - 2.91) < 0.005);
  CHECK(g2_si_threshold(1e9).value == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(g2_si_threshold(1.0).status == ThresholdStatus::unachievable);
  CHECK(g2_si_threshold(0.3).status == ThresholdStatus::unachievable);
  CHECK_THROWS_AS(cross_correlation_out(2.0, 0.5), DomainError);
}

TEST_CASE("threshold consistency identities") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> log_sbr(std::log(1.001), std::log(1e4));
  for (int i = 0; i < 500; ++i) {
    const double s = std::exp(log_sbr(rng));
    CHECK(std::abs(cross_correlation_out(s, g2_si_threshold(s).value) - 2.0) < 1e-12);
    const auto t = g2_in_threshold(s);
    if (t.status == ThresholdStatus::achievable) CHECK(std::abs(heralded_g2_out(s, t.value) - 0.5) < 1e-12);
    else CHECK(s < 1.0 + std::sqrt(2.0));
  }
}

TEST_CASE("monotonicity in the signal-to-background ratio") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> sbr(0.0, 200.0);
  for (int i = 0; i < 500; ++i) {
    double a = sbr(rng);
    double b = sbr(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const auto ra = full_report({0.02, 0.05, a});
    const auto rb = full_report({0.02, 0.05, b});
    CHECK(ra.f_qubit < rb.f_qubit);
    CHECK(ra.g2_im_limit < rb.g2_im_limit);
    CHECK(ra.g2_out > rb.g2_out);
  }
}

TEST_CASE("full report reproduces both measured rows") {
  const auto top = full_report({0.024, 0.0438, 15.1});
  CHECK(std::abs(top.f_classical - 0.690) < 0.0005);
  CHECK(std::abs(top.f_qubit - 0.94) < 0.005);
  CHECK(std::abs(top.g2_out - 0.120) < 0.0005);
  CHECK(std::abs(top.g2_in_threshold.value - 0.432) < 0.0005);
  CHECK(top.g2_im_limit == 15.1 + 1.0);
  CHECK(top.g2_im_is_limit);
  CHECK(std::abs(top.g2_si_threshold.value - 2.142) < 0.0005);
  CHECK(top.uncertainties.empty());

  const auto bottom = full_report({0.017, 0.026, 3.2});
  CHECK(std::abs(bottom.f_classical - 0.694) < 0.0005);
  CHECK(std::abs(bottom.f_qubit - 0.81) < 0.005);
  CHECK(std::abs(bottom.g2_out - 0.42) < 0.005);
  CHECK(std::abs(bottom.g2_in_threshold.value - 0.14) < 0.005);
  CHECK(std::abs(bottom.g2_im_limit - 4.2) < 0.05);
  CHECK(std::abs(bottom.g2_si_threshold.value - 2.91) < 0.005);

  const auto dark = full_report({0.02, 0.05, 0.0});
  CHECK(dark.f_qubit == 0.5);
  CHECK(dark.g2_out == 1.0);
  CHECK(dark.g2_im_limit == 1.0);
  CHECK(dark.g2_si_threshold.status == ThresholdStatus::unachievable);
}

TEST_CASE("first-order uncertainties") {
  const auto r = full_report({0.024, 0.0438, 15.1}, MetricsUncertainty{0.001, 0.0003, 0.2});
  // d/ds of s + 1 is one; of (s+1)/(s+2) it is 1/(s+2)^2.
  CHECK(r.uncertainties.at("g2_im_limit") == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(r.uncertainties.at("f_qubit") == doctest::Approx(0.2 / (17.1 * 17.1)).epsilon(1e-6));
  CHECK(r.uncertainties.at("g2_si_threshold") == doctest::Approx(0.2 * 2.0 / (14.1 * 14.1)).epsilon(1e-6));
  CHECK(r.uncertainties.at("f_classical") > 0.0);
  CHECK(r.uncertainties.at("f_classical") < 0.01);

  const auto only_sbr = full_report({0.024, 0.0438, 15.1}, MetricsUncertainty{0.0, 0.0, 0.2});
  CHECK(only_sbr.uncertainties.count("f_classical") == 1);
  CHECK(only_sbr.uncertainties.at("f_classical") == 0.0);
}

TEST_CASE("report rejects invalid inputs") {
  CHECK_THROWS_AS(full_report({0.02, 1.2, 3.0}), DomainError);
  CHECK_THROWS_AS(full_report({0.02, 0.1, -3.0}), DomainError);
}

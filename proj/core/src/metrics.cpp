#include "afc/metrics.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include <fmt/format.h>

#include "afc/errors.hpp"

namespace afc {

namespace {

// sum_{N >= first} P(mu, N) and sum_{N >= first} w(N) P(mu, N), summed
// until a term drops below 1e-18 of the partial sum.
std::pair<double, double> poisson_tail(double mu, int first, const std::function<double(int)>& weight) {
  double term = poisson(mu, first);
  double sum = 0.0;
  double weighted = 0.0;
  for (int n = first;; ++n) {
    sum += term;
    weighted += weight(n) * term;
    if (term < 1e-18 * sum || term == 0.0) break;
    term *= mu / (n + 1);
  }
  return {sum, weighted};
}

double fock_fidelity(int n) { return (n + 1.0) / (n + 2.0); }

void check_sbr(double sbr) {
  if (!(sbr >= 0.0)) throw DomainError(fmt::format("SBR must be non-negative, got {}", sbr));
}

}  // namespace

double poisson(double mu, int n) {
  if (n < 0) return 0.0;
  if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
}

double qubit_fidelity(double sbr) {
  check_sbr(sbr);
  return (sbr + 1.0) / (sbr + 2.0);
}

double classical_benchmark_fidelity(double mu_in, double eta) {
  if (!(mu_in > 0.0)) throw DomainError(fmt::format("mean photon number must be positive, got {}", mu_in));
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError(fmt::format("efficiency must lie in (0, 1], got {}", eta));
  const double target = (1.0 - poisson(mu_in, 0)) * eta;
  const auto weight = [](int n) { return fock_fidelity(n); };
  int n_min = 0;
  auto tail = poisson_tail(mu_in, 1, weight);
  while (tail.first > target) {
    ++n_min;
    tail = poisson_tail(mu_in, n_min + 1, weight);
  }
  const double gamma = target - tail.first;
  return (fock_fidelity(n_min) * gamma + tail.second) / (gamma + tail.first);
}

double heralded_g2_out(double sbr, double g2_in) {
  check_sbr(sbr);
  if (!(g2_in >= 0.0)) throw DomainError("g2_in must be non-negative");
  return (sbr * sbr * g2_in + 2.0 * sbr + 1.0) / ((sbr + 1.0) * (sbr + 1.0));
}

Threshold g2_in_threshold(double sbr) {
  check_sbr(sbr);
  if (sbr == 0.0) return {std::numeric_limits<double>::quiet_NaN(), ThresholdStatus::unachievable};
  const double value = (0.5 * (sbr + 1.0) * (sbr + 1.0) - 2.0 * sbr - 1.0) / (sbr * sbr);
  return {value, value < 0.0 ? ThresholdStatus::unachievable : ThresholdStatus::achievable};
}

double cross_correlation_out(double sbr, double g2_si) {
  check_sbr(sbr);
  if (std::isinf(g2_si) && g2_si > 0.0) return sbr + 1.0;
  if (!(g2_si >= 1.0)) throw DomainError("g2_si must be at least 1");
  return g2_si * (sbr + 1.0) / (g2_si + sbr);
}

Threshold g2_si_threshold(double sbr) {
  check_sbr(sbr);
  if (sbr <= 1.0) return {std::numeric_limits<double>::quiet_NaN(), ThresholdStatus::unachievable};
  return {2.0 * sbr / (sbr - 1.0), ThresholdStatus::achievable};
}

QuantumReport full_report(const MemoryMetrics& m, const std::optional<MetricsUncertainty>& uncertainty) {
  if (!(m.eta_afc >= 0.0 && m.eta_afc <= 1.0)) throw DomainError("efficiency must lie in [0, 1]");
  check_sbr(m.sbr);
  auto compute = [](const MemoryMetrics& x) {
    QuantumReport r;
    r.f_classical = x.eta_afc > 0.0 ? classical_benchmark_fidelity(x.mu_in, x.eta_afc)
                                    : std::numeric_limits<double>::quiet_NaN();
    r.f_qubit = qubit_fidelity(x.sbr);
    r.g2_out = heralded_g2_out(x.sbr, 0.0);
    r.g2_in_threshold = g2_in_threshold(x.sbr);
    r.g2_im_limit = x.sbr + 1.0;
    r.g2_si_threshold = g2_si_threshold(x.sbr);
    return r;
  };
  QuantumReport report = compute(m);
  if (!uncertainty) return report;

  // First-order propagation with central differences, inputs independent.
  const std::pair<double MemoryMetrics::*, double> inputs[] = {
      {&MemoryMetrics::mu_in, uncertainty->mu_in},
      {&MemoryMetrics::eta_afc, uncertainty->eta_afc},
      {&MemoryMetrics::sbr, uncertainty->sbr}};
  const std::pair<const char*, double (*)(const QuantumReport&)> outputs[] = {
      {"f_classical", [](const QuantumReport& r) { return r.f_classical; }},
      {"f_qubit", [](const QuantumReport& r) { return r.f_qubit; }},
      {"g2_out", [](const QuantumReport& r) { return r.g2_out; }},
      {"g2_in_threshold", [](const QuantumReport& r) { return r.g2_in_threshold.value; }},
      {"g2_im_limit", [](const QuantumReport& r) { return r.g2_im_limit; }},
      {"g2_si_threshold", [](const QuantumReport& r) { return r.g2_si_threshold.value; }}};
  std::map<std::string, double> variance;
  for (const auto& [field, sigma] : inputs) {
    if (!(sigma > 0.0)) continue;
    const double h = 1e-4 * sigma;
    MemoryMetrics up = m;
    MemoryMetrics down = m;
    up.*field += h;
    down.*field = std::max(0.0, down.*field - h);
    const double step = up.*field - down.*field;
    const auto ru = compute(up);
    const auto rd = compute(down);
    for (const auto& [name, get] : outputs) {
      const double d = (get(ru) - get(rd)) / step;
      if (std::isfinite(d)) variance[name] += d * d * sigma * sigma;
    }
  }
  for (const auto& [name, v] : variance) report.uncertainties[name] = std::sqrt(v);
  return report;
}

std::string to_string(ThresholdStatus status) {
  return status == ThresholdStatus::achievable ? "achievable" : "unachievable";
}

}  // namespace afc

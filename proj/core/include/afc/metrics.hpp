#pragma once

#include <map>
#include <optional>
#include <string>

// Quantum-performance figures of a memory characterised by its input mean
// photon number, efficiency and signal-to-background ratio.
namespace afc {

struct MemoryMetrics {
  double mu_in = 0.0;
  double eta_afc = 0.0;
  double sbr = 0.0;
};

/// One-sigma uncertainties of the inputs; zero entries are ignored.
struct MetricsUncertainty {
  double mu_in = 0.0;
  double eta_afc = 0.0;
  double sbr = 0.0;
};

enum class ThresholdStatus { achievable, unachievable };

struct Threshold {
  double value = 0.0;  ///< NaN when no finite value exists
  ThresholdStatus status = ThresholdStatus::achievable;
};

struct QuantumReport {
  double f_classical = 0.0;
  double f_qubit = 0.0;
  double g2_out = 0.0;  ///< at g2_in = 0
  Threshold g2_in_threshold;
  double g2_im_limit = 0.0;  ///< g2_si -> infinity
  bool g2_im_is_limit = true;
  Threshold g2_si_threshold;
  std::map<std::string, double> uncertainties;  ///< first-order, by field name
};

/// Poisson probability e^-mu mu^N / N!.
double poisson(double mu, int n);

double qubit_fidelity(double sbr);
/// Benchmark fidelity of a measure-and-prepare strategy for weak coherent
/// inputs of mean photon number `mu_in` and memory efficiency `eta`.
double classical_benchmark_fidelity(double mu_in, double eta);
double heralded_g2_out(double sbr, double g2_in);
Threshold g2_in_threshold(double sbr);
double cross_correlation_out(double sbr, double g2_si);
Threshold g2_si_threshold(double sbr);

QuantumReport full_report(const MemoryMetrics& metrics,
                          const std::optional<MetricsUncertainty>& uncertainty = std::nullopt);

std::string to_string(ThresholdStatus status);

}  // namespace afc

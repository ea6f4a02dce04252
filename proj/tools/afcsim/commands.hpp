#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace afcsim {

struct RunOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::optional<std::filesystem::path> measured;  ///< fit
  std::optional<std::filesystem::path> input;     ///< metrics
};

void run_spectrum(const RunOptions& options);
void run_echo(const RunOptions& options);
void run_metrics(const RunOptions& options);
void run_fit(const RunOptions& options);

inline constexpr int exit_success = 0;
inline constexpr int exit_config = 2;     ///< config or input error
inline constexpr int exit_numerical = 3;  ///< numerical or fit failure

/// Runs `body`, reports any exception on `err` and maps it to an exit code.
int guarded(const std::function<void()>& body, std::ostream& err);

}  // namespace afcsim

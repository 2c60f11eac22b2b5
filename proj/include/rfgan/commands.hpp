#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace rfgan {

inline constexpr const char* kReportSchema = "rfgan-report/1";

/// Process exit statuses.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitNotConverged = 2,
  kExitInternal = 3,
};

struct CommandOptions {
  /// Overrides the instance seed when set.
  std::optional<std::uint64_t> seed;
};

/// A finished command: the report document (already serialized), a
/// human-readable table and, for tabular results, CSV text.
struct CommandOutput {
  std::string report;
  std::string table;
  std::string csv;
  int exit_code = kExitOk;
};

CommandOutput cmd_check_generator(const std::string& name, const CommandOptions& opts = {});
CommandOutput cmd_divergence(const std::string& instance, const std::string& p, const std::string& q,
                             const std::string& mode, const CommandOptions& opts = {});
CommandOutput cmd_primal(const std::string& instance, const CommandOptions& opts = {});
CommandOutput cmd_dual(const std::string& instance, const CommandOptions& opts = {});
CommandOutput cmd_gap(const std::string& instance, const CommandOptions& opts = {});
/// An empty estimator falls back to the instance's choice.
CommandOutput cmd_fit(const std::string& instance, const std::string& estimator, const CommandOptions& opts = {});
CommandOutput cmd_verify_suite(const std::string& suite, std::uint64_t seed, std::size_t count);

/// Writes `text` to a temporary file beside `path`, then renames it over
/// `path`.
void write_atomic(const std::string& path, const std::string& text);

/// Report for a command that failed before producing results.
std::string error_report(const std::string& command, const std::string& error_code, const std::string& message,
                         int exit_code);

/// Rounds to 12 significant digits; the report number format.
double round12(double v);

}  // namespace rfgan

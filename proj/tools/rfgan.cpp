#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rfgan/commands.hpp"
#include "rfgan/error.hpp"

namespace {

struct Common {
  std::string out;
  bool csv = false;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Report path (default: <command>.report.json)");
  cmd->add_flag("--csv", c.csv, "Also write tabular results next to the report as CSV");
  cmd->add_option("--seed", c.seed, "Seed for every random choice (overrides the instance)");
}

std::string csv_path(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension(".csv");
  return p.string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Restricted f-divergences, their duals and linear f-GAN estimators on finite spaces"};
  app.require_subcommand(1);
  Common common;
  std::string name, instance, p, q, mode = "closed", estimator, suite;
  std::size_t count = 50;

  auto* check = app.add_subcommand("check-generator", "Numeric sanity checks for a builtin generator");
  check->add_option("name", name, "Generator name")->required();
  auto* div = app.add_subcommand("divergence", "Closed-form or variational f-divergence");
  div->add_option("--instance", instance, "Instance file")->required();
  div->add_option("--p", p, "Name of P in the instance")->required();
  div->add_option("--q", q, "Name of Q in the instance")->required();
  div->add_option("--mode", mode, "closed or variational")->check(CLI::IsMember({"closed", "variational"}));
  auto* primal = app.add_subcommand("primal", "Restricted divergence as a supremum over discriminators");
  primal->add_option("--instance", instance, "Instance file")->required();
  auto* dual = app.add_subcommand("dual", "Restricted divergence as an infimum over intermediate distributions");
  dual->add_option("--instance", instance, "Instance file")->required();
  auto* gap = app.add_subcommand("gap", "Primal and dual values and their gap");
  gap->add_option("--instance", instance, "Instance file")->required();
  auto* fitc = app.add_subcommand("fit", "Fit a generator family with mle, gmm or fgan");
  fitc->add_option("--instance", instance, "Instance file")->required();
  fitc->add_option("--estimator", estimator, "mle, gmm or fgan (default: the instance's)");
  auto* verify = app.add_subcommand("verify-suite", "Run a seeded property suite");
  verify->add_option("--suite", suite, "Suite name")->required();
  verify->add_option("--count", count, "Number of instances");
  for (auto* c : {check, div, primal, dual, gap, fitc, verify}) add_common(c, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? rfgan::kExitOk : rfgan::kExitValidation;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  const std::string out = common.out.empty() ? command + ".report.json" : common.out;
  const rfgan::CommandOptions opts{common.seed};

  auto fail = [&](const std::string& code, const std::string& message, int exit_code) {
    std::cerr << "rfgan " << command << ": " << message << "\n";
    try {
      rfgan::write_atomic(out, rfgan::error_report(command, code, message, exit_code));
    } catch (const std::exception&) {
    }
    return exit_code;
  };

  try {
    rfgan::CommandOutput result;
    if (chosen == check) result = rfgan::cmd_check_generator(name, opts);
    else if (chosen == div) result = rfgan::cmd_divergence(instance, p, q, mode, opts);
    else if (chosen == primal) result = rfgan::cmd_primal(instance, opts);
    else if (chosen == dual) result = rfgan::cmd_dual(instance, opts);
    else if (chosen == gap) result = rfgan::cmd_gap(instance, opts);
    else if (chosen == fitc) result = rfgan::cmd_fit(instance, estimator, opts);
    else result = rfgan::cmd_verify_suite(suite, common.seed.value_or(0), count);

    rfgan::write_atomic(out, result.report);
    if (common.csv) rfgan::write_atomic(csv_path(out), result.csv);
    std::cout << result.table;
    std::cout << "report: " << out << "\n";
    return result.exit_code;
  } catch (const rfgan::Error& e) {
    const std::string code = rfgan::to_string(e.code());
    std::string message = e.what();
    if (message.rfind(code + ": ", 0) == 0) message.erase(0, code.size() + 2);
    return fail(code, message, rfgan::kExitValidation);
  } catch (const std::exception& e) {
    return fail("InternalError", e.what(), rfgan::kExitInternal);
  }
}

// Command-line front end for the squeezed-light quantum filtering library.
//
// The tool is a pure client of the C API in sqfilter/sqfilter.h: scenario
// configs are parsed and validated by the library, results come back as CSV
// files plus JSON summaries, and every error surfaces through sqf_last_error.
//
// Subcommands:
//   simulate --config FILE [--seed N] [--backend NAME] [--out DIR]
//   verify   [SUITE...] [--report FILE]
//   sweep    --config FILE --parameter KEY --values V... [--out DIR]
//
// stdout carries machine-readable JSON; progress and human-readable check
// lines go to stderr. Exit status: 0 success, 1 failed verification checks,
// 2 usage or runtime errors.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sqfilter/sqfilter.h"

namespace {

// RAII wrappers for the C handles so early returns cannot leak.
struct ConfigHandle {
  sqf_config* cfg = nullptr;
  ConfigHandle() = default;
  ConfigHandle(const ConfigHandle&) = delete;
  ConfigHandle& operator=(const ConfigHandle&) = delete;
  ~ConfigHandle() { sqf_config_free(cfg); }
};

struct StringHandle {
  char* s = nullptr;
  StringHandle() = default;
  StringHandle(const StringHandle&) = delete;
  StringHandle& operator=(const StringHandle&) = delete;
  ~StringHandle() { sqf_string_free(s); }
};

int report_error(const std::string& stage) {
  std::fprintf(stderr, "error (%s): %s\n", stage.c_str(), sqf_last_error());
  return 2;
}

// Parses the config file and applies the CLI overrides; returns 0 or an
// exit code. The full validation pass runs after the overrides so --seed /
// --backend values go through the same checks as file values.
int load_config(ConfigHandle& handle, const std::string& path,
                const std::string& seed, const std::string& backend) {
  handle.cfg = sqf_config_parse_file(path.c_str());
  if (handle.cfg == nullptr) return report_error("parse " + path);
  if (!seed.empty() &&
      sqf_config_set(handle.cfg, "run.seed", seed.c_str()) != SQF_OK) {
    return report_error("--seed");
  }
  if (!backend.empty() &&
      sqf_config_set(handle.cfg, "run.backend", backend.c_str()) != SQF_OK) {
    return report_error("--backend");
  }
  if (sqf_config_validate(handle.cfg) != SQF_OK) {
    return report_error("validate " + path);
  }
  return 0;
}

int run_simulate(const std::string& config_path, const std::string& seed,
                 const std::string& backend, const std::string& out_dir) {
  ConfigHandle cfg;
  if (int rc = load_config(cfg, config_path, seed, backend); rc != 0) {
    return rc;
  }
  StringHandle summary;
  if (sqf_simulate(cfg.cfg, out_dir.c_str(), &summary.s) != SQF_OK) {
    return report_error("simulate");
  }
  std::fprintf(stderr, "wrote outputs to %s\n", out_dir.c_str());
  std::printf("%s\n", summary.s);
  return 0;
}

int run_sweep(const std::string& config_path, const std::string& seed,
              const std::string& backend, const std::string& parameter,
              const std::vector<std::string>& values,
              const std::string& out_dir) {
  ConfigHandle cfg;
  if (int rc = load_config(cfg, config_path, seed, backend); rc != 0) {
    return rc;
  }
  std::vector<const char*> value_ptrs;
  value_ptrs.reserve(values.size());
  for (const auto& v : values) value_ptrs.push_back(v.c_str());
  StringHandle summary;
  if (sqf_sweep(cfg.cfg, parameter.c_str(), value_ptrs.data(),
                static_cast<int>(value_ptrs.size()), out_dir.c_str(),
                &summary.s) != SQF_OK) {
    return report_error("sweep");
  }
  std::fprintf(stderr, "wrote sweep outputs to %s\n", out_dir.c_str());
  std::printf("%s\n", summary.s);
  return 0;
}

std::vector<std::string> all_suite_names() {
  std::vector<std::string> names;
  std::string current;
  for (const char* p = sqf_verify_suites(); *p != '\0'; ++p) {
    if (*p == '\n') {
      if (!current.empty()) names.push_back(current);
      current.clear();
    } else {
      current.push_back(*p);
    }
  }
  if (!current.empty()) names.push_back(current);
  return names;
}

// Prints per-check lines for one suite report to stderr and returns the
// number of failed checks.
int print_suite_report(const nlohmann::json& report) {
  int failed = 0;
  const std::string suite = report.value("suite", "?");
  for (const auto& check : report.at("checks")) {
    const bool ok = check.at("passed").get<bool>();
    if (!ok) ++failed;
    std::fprintf(stderr, "[%s] %s/%s  margin=%.6g tol=%.6g\n",
                 ok ? "PASS" : "FAIL", suite.c_str(),
                 check.at("name").get<std::string>().c_str(),
                 check.at("margin").get<double>(),
                 check.at("tolerance").get<double>());
    if (!ok) {
      const std::string details = check.value("details", "");
      if (!details.empty()) std::fprintf(stderr, "       %s\n", details.c_str());
    }
  }
  return failed;
}

int run_verify(const std::vector<std::string>& requested,
               const std::string& report_path) {
  const std::vector<std::string> suites =
      requested.empty() ? all_suite_names() : requested;

  nlohmann::json reports = nlohmann::json::array();
  int failed_checks = 0;
  for (const auto& suite : suites) {
    StringHandle json_text;
    const sqf_status status =
        sqf_verify(suite.c_str(), nullptr, &json_text.s);
    if (status != SQF_OK && status != SQF_ERR_VERIFY_FAILED) {
      return report_error("verify " + suite);
    }
    nlohmann::json report = nlohmann::json::parse(json_text.s);
    failed_checks += print_suite_report(report);
    reports.push_back(std::move(report));
  }

  const nlohmann::json& out = reports.size() == 1 ? reports.front() : reports;
  if (!report_path.empty()) {
    std::ofstream file(report_path, std::ios::binary);
    if (!file.good()) {
      std::fprintf(stderr, "error: cannot open %s for write\n",
                   report_path.c_str());
      return 2;
    }
    file << out.dump(2) << '\n';
  }
  std::printf("%s\n", out.dump(2).c_str());

  if (failed_checks > 0) {
    std::fprintf(stderr, "verification FAILED (%d check%s)\n", failed_checks,
                 failed_checks == 1 ? "" : "s");
    return 1;
  }
  std::fprintf(stderr, "verification passed\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Conditional-dynamics simulator for open quantum systems driven by "
      "squeezed light: operator-valued and closed-form Gaussian filters."};
  app.set_version_flag("--version", std::string(sqf_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::string seed;
  std::string backend;
  std::string out_dir = "out";
  std::string report_path;
  std::string parameter;
  std::vector<std::string> values;
  std::vector<std::string> suites;

  CLI::App* simulate =
      app.add_subcommand("simulate", "Run one scenario and write CSV output");
  simulate->add_option("--config", config_path, "Scenario config file")
      ->required();
  simulate->add_option("--seed", seed, "Override run.seed");
  simulate->add_option("--backend", backend,
                       "Override run.backend (gaussian|general|both)");
  simulate->add_option("--out", out_dir, "Output directory (default: out)");

  CLI::App* verify = app.add_subcommand(
      "verify", "Run built-in verification suites (all when none named)");
  verify->add_option("suites", suites, "Suite names");
  verify->add_option("--report", report_path, "Write the JSON report here");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Re-run a scenario across values of one config key");
  sweep->add_option("--config", config_path, "Scenario config file")
      ->required();
  sweep->add_option("--parameter", parameter, "Dotted config key to vary")
      ->required();
  sweep->add_option("--values", values, "Values for the swept key");
  sweep->add_option("--seed", seed, "Override run.seed");
  sweep->add_option("--backend", backend,
                    "Override run.backend (gaussian|general|both)");
  sweep->add_option("--out", out_dir, "Output directory (default: out)");

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) {
    return run_simulate(config_path, seed, backend, out_dir);
  }
  if (verify->parsed()) {
    return run_verify(suites, report_path);
  }
  if (sweep->parsed()) {
    return run_sweep(config_path, seed, backend, parameter, values, out_dir);
  }
  return 2;
}

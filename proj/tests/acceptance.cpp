// Acceptance gate: one line per criterion, nonzero exit on any failure.
//
// Criteria 1-7 are evaluated through the library's verification suites
// (each suite re-derives its expected values from closed forms or
// independent integrators); criterion 8 exercises the public C API
// end to end and byte-compares the outputs across runs and thread counts.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sqfilter/sqfilter.h"
#include "verify.hpp"

namespace fs = std::filesystem;

namespace {

struct SuiteRun {
  sqf::verify::Report report;
  double seconds = 0.0;
  std::string error;  // non-empty if the suite itself threw
};

SuiteRun run_suite_timed(const std::string& name) {
  SuiteRun run;
  const auto start = std::chrono::steady_clock::now();
  try {
    run.report = sqf::verify::run_suite(name);
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  run.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return run;
}

// Returns an empty string when every named check passed; otherwise a
// description of what failed.
std::string failing_checks(const SuiteRun& run,
                           const std::vector<std::string>& names) {
  if (!run.error.empty()) {
    return "suite aborted: " + run.error;
  }
  std::ostringstream out;
  for (const auto& name : names) {
    const auto it = std::find_if(
        run.report.checks.begin(), run.report.checks.end(),
        [&](const sqf::verify::Check& c) { return c.name == name; });
    if (it == run.report.checks.end()) {
      out << " [missing check " << name << "]";
    } else if (!it->passed) {
      out << " [" << name << ": margin " << it->margin << " vs tolerance "
          << it->tolerance;
      if (!it->details.empty()) out << "; " << it->details;
      out << "]";
    }
  }
  return out.str();
}

int g_failures = 0;

void report(int id, const std::string& label, const std::string& failure) {
  if (failure.empty()) {
    std::printf("PASS criterion %d: %s\n", id, label.c_str());
  } else {
    ++g_failures;
    std::printf("FAIL criterion %d: %s —%s\n", id, label.c_str(),
                failure.c_str());
  }
  std::fflush(stdout);
}

// ---- criterion 8 helpers ----------------------------------------------

const char* kDeterminismConfig =
    "[scenario]\n"
    "type = mixed_cavity\n"
    "dim = 12\n"
    "kappa = 1.0\n"
    "omega = 0.5\n"
    "phi = 0.1\n"
    "[squeezing]\n"
    "n = 0.3\n"
    "m_re = 0.2\n"
    "[initial]\n"
    "coherent_re = 0.4\n"
    "[grid]\n"
    "t_end = 0.2\n"
    "dt = 0.001\n"
    "[run]\n"
    "seed = 42\n"
    "trajectories = 6\n"
    "backend = both\n"
    "output_stride = 10\n"
    "save_trajectories = 1\n";

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Runs the determinism scenario with the given thread count and collects
// {basename -> bytes} for every CSV the summary lists. Returns false and
// fills `error` if anything in the C API pipeline fails.
bool run_csvs(const std::string& dir, const char* threads,
              std::map<std::string, std::string>& csvs, std::string& error) {
  csvs.clear();
  fs::remove_all(dir);
  fs::create_directories(dir);
  sqf_config* cfg = sqf_config_parse_text(kDeterminismConfig, "acceptance");
  if (cfg == nullptr) {
    error = std::string("config parse failed: ") + sqf_last_error();
    return false;
  }
  if (sqf_config_set(cfg, "run.threads", threads) != SQF_OK) {
    error = std::string("thread override failed: ") + sqf_last_error();
    sqf_config_free(cfg);
    return false;
  }
  char* summary_text = nullptr;
  const sqf_status rc = sqf_simulate(cfg, dir.c_str(), &summary_text);
  sqf_config_free(cfg);
  if (rc != SQF_OK) {
    error = std::string("simulate failed: ") + sqf_last_error();
    return false;
  }
  const auto summary = nlohmann::json::parse(summary_text);
  sqf_string_free(summary_text);
  for (const auto& f : summary.at("files")) {
    // Summary entries are file names relative to the output directory.
    const fs::path name = f.get<std::string>();
    if (name.extension() != ".csv") continue;
    const fs::path p = fs::path(dir) / name;
    if (!fs::exists(p)) {
      error = "listed file missing: " + p.string();
      return false;
    }
    csvs[name.string()] = slurp(p);
  }
  if (csvs.empty()) {
    error = "simulation produced no CSV files";
    return false;
  }
  return true;
}

std::string compare_csvs(const std::map<std::string, std::string>& a,
                         const std::map<std::string, std::string>& b,
                         const std::string& label) {
  if (a.size() != b.size()) {
    return " [" + label + ": file sets differ (" + std::to_string(a.size()) +
           " vs " + std::to_string(b.size()) + ")]";
  }
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    if (it == b.end()) return " [" + label + ": missing " + name + "]";
    if (it->second != bytes) {
      return " [" + label + ": byte mismatch in " + name + "]";
    }
  }
  return "";
}

std::string check_determinism() {
  std::map<std::string, std::string> serial, parallel, repeat;
  std::string error;
  if (!run_csvs("acceptance_det_serial", "1", serial, error)) {
    return " [" + error + "]";
  }
  if (!run_csvs("acceptance_det_parallel", "4", parallel, error)) {
    return " [" + error + "]";
  }
  if (!run_csvs("acceptance_det_repeat", "4", repeat, error)) {
    return " [" + error + "]";
  }
  // Expect per-trajectory files for both backends plus the two ensembles.
  if (serial.size() < 14) {
    return " [expected at least 14 CSVs, saw " +
           std::to_string(serial.size()) + "]";
  }
  std::string failure = compare_csvs(serial, parallel, "1 vs 4 threads");
  if (failure.empty()) {
    failure = compare_csvs(parallel, repeat, "4-thread repeat");
  }
  return failure;
}

}  // namespace

int main() {
  // Criteria 1-2: closed-form covariance checks, with a wall-clock budget.
  {
    const SuiteRun riccati = run_suite_timed("riccati_oracles");
    std::string f1 = failing_checks(riccati, {"mixed_vacuum_logistic"});
    std::string f2 = failing_checks(
        riccati, {"mixed_fixed_point_origin", "direct_fixed_point_thermal"});
    if (riccati.seconds >= 1.0) {
      std::ostringstream t;
      t << " [suite took " << riccati.seconds << " s, budget 1 s]";
      f1 += t.str();
      f2 += t.str();
    }
    report(1, "vacuum covariance follows the logistic closed form to 1e-7 "
              "in under a second", f1);
    report(2, "covariance fixed points stay pinned to 1e-12", f2);
  }

  // Criteria 3-4: pathwise agreement of the two filters on shared records.
  {
    const SuiteRun pathwise = run_suite_timed("pathwise");
    report(3, "mixed detection: operator and closed-form filters agree "
              "pathwise with first-order step scaling",
           failing_checks(pathwise, {"mixed_gap_dt_1e-4", "mixed_gap_slope"}));
    report(4, "direct detection: same agreement, and the misnormalized gain "
              "variant is rejected",
           failing_checks(pathwise,
                          {"direct_gap_dt_1e-4", "direct_gap_slope",
                           "direct_wrong_normalization_fails"}));
  }

  // Criterion 5: conditional ensemble average vs master equation.
  {
    const SuiteRun ensemble = run_suite_timed("ensemble_vs_lindblad");
    report(5, "2000-trajectory ensemble mean photon number tracks the "
              "unconditional relaxation within 3 standard errors",
           failing_checks(ensemble, {"ensemble_mean_photon_number_3se"}));
  }

  // Criteria 6-7: structural invariants and innovation statistics.
  {
    const SuiteRun invariants = run_suite_timed("invariants");
    report(6, "trace, positivity, uncertainty, and correlation-matrix "
              "invariants hold",
           failing_checks(invariants,
                          {"trace_residual_second_order",
                           "positivity_min_eigenvalue", "heisenberg_inequality",
                           "k_matrices_positive_definite",
                           "general_k_matches_beamsplitter_form",
                           "noncommuting_observations_rejected"}));
    report(7, "innovation increments are centered with covariance K dt",
           failing_checks(invariants,
                          {"innovations_mean_mixed", "innovations_cov_mixed",
                           "innovations_mean_direct",
                           "innovations_cov_direct"}));
  }

  // Criterion 8: byte-identical outputs for identical (config, seed).
  report(8, "identical configs and seeds reproduce byte-identical CSVs "
            "across thread counts",
         check_determinism());

  if (g_failures > 0) {
    std::printf("%d of 8 criteria failed\n", g_failures);
    return 1;
  }
  std::printf("all 8 criteria passed\n");
  return 0;
}

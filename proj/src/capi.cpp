#include "sqfilter/sqfilter.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "common.hpp"
#include "config.hpp"
#include "output.hpp"
#include "runner.hpp"
#include "verify.hpp"

struct sqf_config {
  sqf::config::RawConfig raw;
};

namespace {

thread_local std::string g_last_error;

sqf_status map_code(sqf::ErrorCode code) {
  switch (code) {
    case sqf::ErrorCode::invalid_argument:
      return SQF_ERR_INVALID_ARGUMENT;
    case sqf::ErrorCode::parse:
      return SQF_ERR_PARSE;
    case sqf::ErrorCode::physicality:
      return SQF_ERR_PHYSICALITY;
    case sqf::ErrorCode::dimension:
      return SQF_ERR_DIMENSION;
    case sqf::ErrorCode::noncommuting_observations:
      return SQF_ERR_NONCOMMUTING_OBSERVATIONS;
    case sqf::ErrorCode::singular_noise:
      return SQF_ERR_SINGULAR_NOISE;
    case sqf::ErrorCode::step_size:
      return SQF_ERR_STEP_SIZE;
    case sqf::ErrorCode::leakage:
      return SQF_ERR_LEAKAGE;
    case sqf::ErrorCode::io:
      return SQF_ERR_IO;
    case sqf::ErrorCode::unsupported:
      return SQF_ERR_UNSUPPORTED;
    case sqf::ErrorCode::internal:
      return SQF_ERR_INTERNAL;
  }
  return SQF_ERR_INTERNAL;
}

template <typename Fn>
sqf_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    return fn();
  } catch (const sqf::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SQF_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SQF_ERR_INTERNAL;
  }
}

char* alloc_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Accepts either the INI-style scenario format or a run manifest (JSON
// object with a "config" echo), detected by the first non-space character.
sqf::config::RawConfig parse_any(const std::string& text,
                                 const std::string& name) {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json manifest;
    try {
      manifest = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      sqf::fail(sqf::ErrorCode::parse,
                name + ": invalid manifest JSON: " + e.what());
    }
    sqf::require(manifest.is_object() && manifest.contains("config"),
                 sqf::ErrorCode::parse,
                 name + ": manifest JSON carries no \"config\" object");
    return sqf::output::raw_config_from_json(manifest.at("config"), name);
  }
  return sqf::config::parse_raw_text(text, name);
}

}  // namespace

extern "C" {

const char* sqf_version(void) { return sqf::runner::library_version(); }

const char* sqf_last_error(void) { return g_last_error.c_str(); }

void sqf_string_free(char* s) { std::free(s); }

sqf_config* sqf_config_parse_file(const char* path) {
  sqf_config* handle = nullptr;
  guarded([&]() -> sqf_status {
    sqf::require(path != nullptr, sqf::ErrorCode::invalid_argument,
                 "config path is NULL");
    std::ifstream in(path, std::ios::binary);
    sqf::require(static_cast<bool>(in), sqf::ErrorCode::io,
                 std::string("cannot open config file: ") + path);
    std::ostringstream text;
    text << in.rdbuf();
    handle = new sqf_config{parse_any(text.str(), path)};
    return SQF_OK;
  });
  return handle;
}

sqf_config* sqf_config_parse_text(const char* text, const char* name) {
  sqf_config* handle = nullptr;
  guarded([&]() -> sqf_status {
    sqf::require(text != nullptr, sqf::ErrorCode::invalid_argument,
                 "config text is NULL");
    const std::string label = (name != nullptr) ? name : "<text>";
    handle = new sqf_config{parse_any(text, label)};
    return SQF_OK;
  });
  return handle;
}

sqf_status sqf_config_set(sqf_config* cfg, const char* dotted_key,
                          const char* value) {
  return guarded([&]() -> sqf_status {
    sqf::require(cfg != nullptr && dotted_key != nullptr && value != nullptr,
                 sqf::ErrorCode::invalid_argument,
                 "sqf_config_set requires non-NULL arguments");
    sqf::config::set_raw(cfg->raw, dotted_key, value);
    return SQF_OK;
  });
}

sqf_status sqf_config_validate(const sqf_config* cfg) {
  return guarded([&]() -> sqf_status {
    sqf::require(cfg != nullptr, sqf::ErrorCode::invalid_argument,
                 "config handle is NULL");
    (void)sqf::config::build(sqf::config::interpret(cfg->raw));
    return SQF_OK;
  });
}

void sqf_config_free(sqf_config* cfg) { delete cfg; }

sqf_status sqf_simulate(const sqf_config* cfg, const char* out_dir,
                        char** summary_json) {
  return guarded([&]() -> sqf_status {
    sqf::require(cfg != nullptr && out_dir != nullptr,
                 sqf::ErrorCode::invalid_argument,
                 "sqf_simulate requires a config and an output directory");
    const auto built = sqf::config::build(sqf::config::interpret(cfg->raw));
    const auto result = sqf::runner::simulate(built, cfg->raw, out_dir);
    if (summary_json != nullptr) {
      const nlohmann::json summary = {{"files", result.files},
                                      {"invariant_log", result.invariant_log},
                                      {"margins", result.margins}};
      *summary_json = alloc_string(summary.dump(2));
    }
    return SQF_OK;
  });
}

const char* sqf_verify_suites(void) {
  static const std::string names = [] {
    std::string joined;
    for (const auto& name : sqf::verify::suite_names()) {
      if (!joined.empty()) joined += '\n';
      joined += name;
    }
    return joined;
  }();
  return names.c_str();
}

sqf_status sqf_verify(const char* suite, const char* report_path,
                      char** report_json) {
  return guarded([&]() -> sqf_status {
    sqf::require(suite != nullptr, sqf::ErrorCode::invalid_argument,
                 "verify suite name is NULL");
    const auto report = sqf::verify::run_suite(suite);
    const std::string dump = report.to_json().dump(2);
    if (report_path != nullptr) {
      std::ofstream out(report_path, std::ios::binary);
      sqf::require(static_cast<bool>(out), sqf::ErrorCode::io,
                   std::string("cannot write report file: ") + report_path);
      out << dump << "\n";
      sqf::require(static_cast<bool>(out), sqf::ErrorCode::io,
                   std::string("failed writing report file: ") + report_path);
    }
    if (report_json != nullptr) {
      *report_json = alloc_string(dump);
    }
    if (!report.passed()) {
      g_last_error = "verify suite '" + report.suite + "' has failing checks";
      return SQF_ERR_VERIFY_FAILED;
    }
    return SQF_OK;
  });
}

sqf_status sqf_sweep(const sqf_config* cfg, const char* parameter,
                     const char* const* values, int n_values,
                     const char* out_dir, char** summary_json) {
  return guarded([&]() -> sqf_status {
    sqf::require(cfg != nullptr && parameter != nullptr && out_dir != nullptr,
                 sqf::ErrorCode::invalid_argument,
                 "sqf_sweep requires a config, a parameter, and an output "
                 "directory");
    sqf::require(n_values >= 0 && (values != nullptr || n_values == 0),
                 sqf::ErrorCode::invalid_argument,
                 "sweep values array is NULL");
    std::vector<std::string> vals;
    vals.reserve(static_cast<std::size_t>(n_values));
    for (int i = 0; i < n_values; ++i) {
      sqf::require(values[i] != nullptr, sqf::ErrorCode::invalid_argument,
                   "sweep value entry is NULL");
      vals.emplace_back(values[i]);
    }
    const auto result = sqf::runner::sweep(cfg->raw, parameter, vals, out_dir);
    if (summary_json != nullptr) {
      const nlohmann::json summary = {{"files", result.files},
                                      {"rows", result.rows}};
      *summary_json = alloc_string(summary.dump(2));
    }
    return SQF_OK;
  });
}

}  // extern "C"

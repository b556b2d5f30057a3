#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gaussian_filter.hpp"
#include "models.hpp"
#include "sde.hpp"

namespace sqf::config {

// ---------------------------------------------------------------------------
// Raw layer: a flat INI-style text format ("[section]" headers, "key = value"
// entries, '#' comments). Keys keep their source line for field-level error
// messages; overrides (CLI flags, C-API setters) mutate this layer before the
// typed interpretation runs.
// ---------------------------------------------------------------------------

struct RawEntry {
  std::string value;
  int line = 0;
};

struct RawConfig {
  std::string name;  // file path or synthetic name, used in messages
  std::map<std::string, std::map<std::string, RawEntry>> sections;
};

RawConfig parse_raw_text(const std::string& text, const std::string& name);
RawConfig parse_raw_file(const std::string& path);

// Sets "section.key" to value (creating the section/key as needed).
void set_raw(RawConfig& raw, const std::string& dotted_key,
             const std::string& value);

// ---------------------------------------------------------------------------
// Typed layer.
// ---------------------------------------------------------------------------

enum class ScenarioType { mixed_cavity, direct_cavity, custom_slh };
enum class Backend { gaussian, general, both };

const char* to_string(ScenarioType type);
const char* to_string(Backend backend);

// One complex input-mean channel, constant (single knot at -inf) or
// right-continuous piecewise constant.
struct MeanTable {
  std::vector<double> knots;    // empty => constant
  std::vector<Complex> values;  // constant: exactly one entry

  bool is_constant() const { return knots.empty(); }
  static MeanTable constant(Complex value) { return {{}, {value}}; }
};

// Operators for the custom scenario, already assembled into matrices.
struct CustomSlhConfig {
  Eigen::Index n_fock = 0;
  Eigen::Index n_sq = 0;
  Matrix h_op;                 // dim x dim
  std::vector<Matrix> l_ops;   // n_fock entries
  std::vector<Matrix> r_ops;   // n_sq entries
  Complex s_scalar{1.0, 0.0};  // unimodular phase on the single Fock block
  Matrix t_mat;                // n_obs x n_fock
  Matrix u_mat;                // n_obs x n_sq
};

struct ScenarioConfig {
  ScenarioType scenario = ScenarioType::mixed_cavity;
  Eigen::Index dim = 20;

  double rate = 1.0;   // [scenario] kappa (mixed) or gamma (direct)
  double omega = 0.0;  // [scenario] omega
  double angle = 0.0;  // [scenario] phi (mixed) or theta (direct)

  noise::ScalarSqueezing squeeze;  // [squeezing] n, m_re, m_im

  MeanTable alpha = MeanTable::constant({0.0, 0.0});  // squeezed channel
  MeanTable beta = MeanTable::constant({0.0, 0.0});   // Fock channel

  Complex coherent_amplitude{0.0, 0.0};  // [initial]
  double v0 = 0.0;                       // gaussian backend covariances
  Complex w0{0.0, 0.0};

  double t_end = 1.0;  // [grid]
  double dt = 1e-3;

  std::uint64_t seed = 0;  // [run]
  Eigen::Index trajectories = 1;
  Backend backend = Backend::general;
  Eigen::Index output_stride = 1;
  Eigen::Index spectrum_every = 0;
  double leakage_tol = 1e-6;       // top-Fock-level population abort threshold
  Eigen::Index threads = 1;        // ensemble worker count
  bool save_trajectories = false;  // per-trajectory CSVs for ensembles

  std::optional<CustomSlhConfig> custom;  // [slh], custom_slh only
};

// Typed parse with defaults; rejects unknown sections/keys and malformed
// values with "name:line section.key: ..." messages (ErrorCode::parse).
ScenarioConfig interpret(const RawConfig& raw);

// ---------------------------------------------------------------------------
// Build layer: constructs every model object the run needs so that all
// module-level validation fires at load time (model physicality, observation
// rank, squeezing physicality, grid consistency, gaussian-backend
// restrictions such as complex m with the mixed scenario).
// ---------------------------------------------------------------------------

struct BuiltConfig {
  ScenarioConfig cfg;
  models::BuiltScenario scenario;  // model + observations + mean schedules
  sde::IntegrationGrid grid;
  Matrix rho0;  // initial coherent density matrix (truncated)
  gaussian_filter::GaussianFilterState gaussian_init;
  std::optional<gaussian_filter::MixedScenario> gaussian_mixed;
  std::optional<gaussian_filter::DirectScenario> gaussian_direct;

  bool wants_general() const {
    return cfg.backend == Backend::general || cfg.backend == Backend::both;
  }
  bool wants_gaussian() const {
    return cfg.backend == Backend::gaussian || cfg.backend == Backend::both;
  }
};

BuiltConfig build(const ScenarioConfig& cfg);

// Convenience: parse + interpret + build.
BuiltConfig load_file(const std::string& path);
BuiltConfig load_text(const std::string& text, const std::string& name);

}  // namespace sqf::config

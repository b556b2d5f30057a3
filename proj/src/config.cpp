#include "config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hilbert.hpp"

namespace sqf::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void parse_fail(const std::string& name, int line,
                             const std::string& what) {
  std::ostringstream msg;
  msg << name << ":" << line << ": " << what;
  fail(ErrorCode::parse, msg.str());
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Field-aware accessor over one RawConfig: tracks which keys were consumed
// so leftovers can be reported as unknown, and prefixes every error with
// "name:line section.key".
class Reader {
 public:
  explicit Reader(const RawConfig& raw) : raw_(raw) {}

  bool has(const std::string& section, const std::string& key) const {
    auto sec = raw_.sections.find(section);
    return sec != raw_.sections.end() &&
           sec->second.find(key) != sec->second.end();
  }

  std::optional<std::string> take(const std::string& section,
                                  const std::string& key) {
    auto sec = raw_.sections.find(section);
    if (sec == raw_.sections.end()) return std::nullopt;
    auto it = sec->second.find(key);
    if (it == sec->second.end()) return std::nullopt;
    consumed_.insert(section + "." + key);
    last_line_ = it->second.line;
    return it->second.value;
  }

  [[noreturn]] void fail_at(const std::string& section, const std::string& key,
                            const std::string& what) const {
    std::ostringstream msg;
    msg << raw_.name << ":" << last_line_ << ": " << section << "." << key
        << ": " << what;
    fail(ErrorCode::parse, msg.str());
  }

  double take_double(const std::string& section, const std::string& key,
                     double fallback) {
    auto v = take(section, key);
    if (!v) return fallback;
    return parse_double(section, key, *v);
  }

  double parse_double(const std::string& section, const std::string& key,
                      const std::string& text) const {
    try {
      std::size_t pos = 0;
      const double value = std::stod(text, &pos);
      if (pos != text.size()) throw std::invalid_argument("trailing text");
      if (!std::isfinite(value)) throw std::invalid_argument("not finite");
      return value;
    } catch (const std::exception&) {
      fail_at(section, key, "expected a real number, got '" + text + "'");
    }
  }

  long long take_int(const std::string& section, const std::string& key,
                     long long fallback) {
    auto v = take(section, key);
    if (!v) return fallback;
    try {
      std::size_t pos = 0;
      const long long value = std::stoll(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("trailing text");
      return value;
    } catch (const std::exception&) {
      fail_at(section, key, "expected an integer, got '" + *v + "'");
    }
  }

  std::uint64_t take_u64(const std::string& section, const std::string& key,
                         std::uint64_t fallback) {
    auto v = take(section, key);
    if (!v) return fallback;
    try {
      std::size_t pos = 0;
      const std::uint64_t value = std::stoull(*v, &pos);
      if (pos != v->size()) throw std::invalid_argument("trailing text");
      return value;
    } catch (const std::exception&) {
      fail_at(section, key, "expected a nonnegative integer, got '" + *v + "'");
    }
  }

  std::string take_enum(const std::string& section, const std::string& key,
                        const std::string& fallback,
                        const std::set<std::string>& allowed) {
    auto v = take(section, key);
    const std::string value = v.value_or(fallback);
    if (allowed.count(value) == 0) {
      std::ostringstream what;
      what << "expected one of {";
      bool first = true;
      for (const auto& a : allowed) {
        if (!first) what << ", ";
        what << a;
        first = false;
      }
      what << "}, got '" << value << "'";
      fail_at(section, key, what.str());
    }
    return value;
  }

  // "RE IM" pair.
  Complex parse_complex(const std::string& section, const std::string& key,
                        const std::string& text) const {
    const auto toks = split_ws(text);
    if (toks.size() != 2) {
      fail_at(section, key, "expected 'RE IM', got '" + text + "'");
    }
    return {parse_double(section, key, toks[0]),
            parse_double(section, key, toks[1])};
  }

  void check_all_consumed() const {
    for (const auto& [section, entries] : raw_.sections) {
      for (const auto& [key, entry] : entries) {
        if (consumed_.count(section + "." + key) == 0) {
          parse_fail(raw_.name, entry.line,
                     "unknown key '" + section + "." + key + "'");
        }
      }
    }
  }

  const RawConfig& raw() const { return raw_; }

 private:
  const RawConfig& raw_;
  std::set<std::string> consumed_;
  mutable int last_line_ = 0;
};

// Constant ("RE IM") or table ("T RE IM ; T RE IM ; ...") mean channel.
MeanTable take_mean(Reader& reader, const std::string& section,
                    const std::string& channel) {
  const std::string table_key = channel + "_table";
  auto constant = reader.take(section, channel);
  auto table = reader.take(section, table_key);
  if (constant && table) {
    reader.fail_at(section, table_key,
                   "give either '" + channel + "' or '" + table_key +
                       "', not both");
  }
  if (constant) {
    return MeanTable::constant(
        reader.parse_complex(section, channel, *constant));
  }
  if (!table) return MeanTable::constant({0.0, 0.0});

  MeanTable out;
  for (const std::string& piece : split_on(*table, ';')) {
    const auto toks = split_ws(piece);
    if (toks.empty()) continue;
    if (toks.size() != 3) {
      reader.fail_at(section, table_key,
                     "each entry must be 'T RE IM', got '" + trim(piece) + "'");
    }
    out.knots.push_back(reader.parse_double(section, table_key, toks[0]));
    out.values.emplace_back(reader.parse_double(section, table_key, toks[1]),
                            reader.parse_double(section, table_key, toks[2]));
  }
  if (out.knots.empty()) {
    reader.fail_at(section, table_key, "table must have at least one entry");
  }
  for (std::size_t i = 0; i + 1 < out.knots.size(); ++i) {
    if (!(out.knots[i] < out.knots[i + 1])) {
      reader.fail_at(section, table_key, "knots must be strictly increasing");
    }
  }
  return out;
}

// Sparse operator entries: "ROW COL RE IM ; ..." with 0-based indices.
Matrix take_operator(Reader& reader, const std::string& section,
                     const std::string& key, Eigen::Index dim,
                     bool required) {
  auto text = reader.take(section, key);
  if (!text) {
    if (required) {
      std::ostringstream what;
      what << "missing required operator '" << section << "." << key << "'";
      fail(ErrorCode::parse, what.str());
    }
    return Matrix::Zero(dim, dim);
  }
  Matrix op = Matrix::Zero(dim, dim);
  for (const std::string& piece : split_on(*text, ';')) {
    const auto toks = split_ws(piece);
    if (toks.empty()) continue;
    if (toks.size() != 4) {
      reader.fail_at(section, key,
                     "each entry must be 'ROW COL RE IM', got '" +
                         trim(piece) + "'");
    }
    const double row_d = reader.parse_double(section, key, toks[0]);
    const double col_d = reader.parse_double(section, key, toks[1]);
    const auto row = static_cast<Eigen::Index>(row_d);
    const auto col = static_cast<Eigen::Index>(col_d);
    if (row < 0 || row >= dim || col < 0 || col >= dim ||
        row_d != static_cast<double>(row) ||
        col_d != static_cast<double>(col)) {
      reader.fail_at(section, key, "indices must be integers in [0, dim)");
    }
    op(row, col) += Complex(reader.parse_double(section, key, toks[2]),
                            reader.parse_double(section, key, toks[3]));
  }
  return op;
}

// Row of complex pairs: "RE IM RE IM ...".
Vector take_row(Reader& reader, const std::string& section,
                const std::string& key, Eigen::Index expected) {
  auto text = reader.take(section, key);
  if (!text) {
    std::ostringstream what;
    what << "missing required row '" << section << "." << key << "'";
    fail(ErrorCode::parse, what.str());
  }
  const auto toks = split_ws(*text);
  if (static_cast<Eigen::Index>(toks.size()) != 2 * expected) {
    std::ostringstream what;
    what << "expected " << expected << " complex pair(s) (" << 2 * expected
         << " numbers), got " << toks.size();
    reader.fail_at(section, key, what.str());
  }
  Vector row(expected);
  for (Eigen::Index j = 0; j < expected; ++j) {
    row(j) = Complex(
        reader.parse_double(section, key, toks[static_cast<std::size_t>(2 * j)]),
        reader.parse_double(section, key,
                            toks[static_cast<std::size_t>(2 * j + 1)]));
  }
  return row;
}

CustomSlhConfig take_custom(Reader& reader, Eigen::Index dim) {
  CustomSlhConfig custom;
  custom.n_fock =
      static_cast<Eigen::Index>(reader.take_int("slh", "n_fock", 0));
  custom.n_sq = static_cast<Eigen::Index>(reader.take_int("slh", "n_sq", 0));
  if (custom.n_fock < 0 || custom.n_fock > 1 || custom.n_sq < 0 ||
      custom.n_sq > 1 || custom.n_fock + custom.n_sq == 0) {
    fail(ErrorCode::parse,
         "slh.n_fock/slh.n_sq: the custom scenario supports at most one Fock "
         "and one squeezed channel, with at least one channel present");
  }
  custom.h_op = take_operator(reader, "slh", "h", dim, false);
  if (custom.n_fock == 1) {
    custom.l_ops.push_back(take_operator(reader, "slh", "l1", dim, true));
  }
  if (custom.n_sq == 1) {
    custom.r_ops.push_back(take_operator(reader, "slh", "r1", dim, true));
  }
  if (auto s = reader.take("slh", "s")) {
    custom.s_scalar = reader.parse_complex("slh", "s", *s);
  }

  // Observation rows t_row1/u_row1, t_row2/u_row2, ... (n_obs inferred).
  Eigen::Index n_obs = 0;
  while (reader.has("slh", "t_row" + std::to_string(n_obs + 1)) ||
         reader.has("slh", "u_row" + std::to_string(n_obs + 1))) {
    ++n_obs;
  }
  require(n_obs >= 1, ErrorCode::parse,
          "slh: at least one observation row (t_row1/u_row1) is required");
  custom.t_mat = Matrix::Zero(n_obs, custom.n_fock);
  custom.u_mat = Matrix::Zero(n_obs, custom.n_sq);
  for (Eigen::Index a = 0; a < n_obs; ++a) {
    const std::string t_key = "t_row" + std::to_string(a + 1);
    const std::string u_key = "u_row" + std::to_string(a + 1);
    if (custom.n_fock == 1) {
      custom.t_mat.row(a) = take_row(reader, "slh", t_key, custom.n_fock);
    } else if (reader.has("slh", t_key)) {
      reader.take("slh", t_key);
      reader.fail_at("slh", t_key, "t rows need a Fock channel (n_fock = 1)");
    }
    if (custom.n_sq == 1) {
      custom.u_mat.row(a) = take_row(reader, "slh", u_key, custom.n_sq);
    } else if (reader.has("slh", u_key)) {
      reader.take("slh", u_key);
      reader.fail_at("slh", u_key,
                     "u rows need a squeezed channel (n_sq = 1)");
    }
  }
  return custom;
}

Vector single(Complex value) {
  Vector v(1);
  v(0) = value;
  return v;
}

models::MeanSchedule to_schedule(const MeanTable& table, Eigen::Index size) {
  if (size == 0) {
    return models::MeanSchedule::constant(Vector::Zero(0));
  }
  if (table.is_constant()) {
    return models::MeanSchedule::constant(single(table.values.front()));
  }
  std::vector<Vector> values;
  values.reserve(table.values.size());
  for (Complex v : table.values) values.push_back(single(v));
  return models::MeanSchedule::piecewise(table.knots, values);
}

bool mean_is_zero(const MeanTable& table) {
  for (Complex v : table.values) {
    if (v != Complex(0.0, 0.0)) return false;
  }
  return true;
}

}  // namespace

RawConfig parse_raw_text(const std::string& text, const std::string& name) {
  RawConfig raw;
  raw.name = name;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        parse_fail(name, line_no, "unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        parse_fail(name, line_no, "empty section name");
      }
      raw.sections[section];  // allow empty sections
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      parse_fail(name, line_no, "expected 'key = value' or '[section]'");
    }
    if (section.empty()) {
      parse_fail(name, line_no, "key outside any [section]");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) parse_fail(name, line_no, "empty key");
    auto [it, inserted] = raw.sections[section].insert(
        {key, RawEntry{value, line_no}});
    if (!inserted) {
      parse_fail(name, line_no,
                 "duplicate key '" + section + "." + key + "' (first at line " +
                     std::to_string(it->second.line) + ")");
    }
  }
  return raw;
}

RawConfig parse_raw_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  require(!in.bad(), ErrorCode::io, "error reading config file '" + path + "'");
  return parse_raw_text(buffer.str(), path);
}

void set_raw(RawConfig& raw, const std::string& dotted_key,
             const std::string& value) {
  const std::size_t dot = dotted_key.find('.');
  require(dot != std::string::npos && dot > 0 && dot + 1 < dotted_key.size(),
          ErrorCode::invalid_argument,
          "override key must look like 'section.key'");
  const std::string section = dotted_key.substr(0, dot);
  const std::string key = dotted_key.substr(dot + 1);
  raw.sections[section][key] = RawEntry{trim(value), 0};
}

const char* to_string(ScenarioType type) {
  switch (type) {
    case ScenarioType::mixed_cavity:
      return "mixed_cavity";
    case ScenarioType::direct_cavity:
      return "direct_cavity";
    case ScenarioType::custom_slh:
      return "custom_slh";
  }
  return "?";
}

const char* to_string(Backend backend) {
  switch (backend) {
    case Backend::gaussian:
      return "gaussian";
    case Backend::general:
      return "general";
    case Backend::both:
      return "both";
  }
  return "?";
}

ScenarioConfig interpret(const RawConfig& raw) {
  Reader reader(raw);
  ScenarioConfig cfg;

  const std::string type =
      reader.take_enum("scenario", "type", "mixed_cavity",
                       {"mixed_cavity", "direct_cavity", "custom_slh"});
  if (type == "mixed_cavity") cfg.scenario = ScenarioType::mixed_cavity;
  if (type == "direct_cavity") cfg.scenario = ScenarioType::direct_cavity;
  if (type == "custom_slh") cfg.scenario = ScenarioType::custom_slh;

  cfg.dim = static_cast<Eigen::Index>(reader.take_int("scenario", "dim", 20));
  if (cfg.dim < 2) {
    fail(ErrorCode::parse, "scenario.dim: must be at least 2");
  }

  // Rate and angle names depend on the scenario; reject the wrong pair so a
  // config written for one scenario cannot silently drive another.
  const bool mixed = cfg.scenario == ScenarioType::mixed_cavity;
  const bool direct = cfg.scenario == ScenarioType::direct_cavity;
  const char* rate_key = mixed ? "kappa" : "gamma";
  const char* angle_key = mixed ? "phi" : "theta";
  const char* wrong_rate = mixed ? "gamma" : "kappa";
  const char* wrong_angle = mixed ? "theta" : "phi";
  if (mixed || direct) {
    if (reader.has("scenario", wrong_rate)) {
      reader.take("scenario", wrong_rate);
      reader.fail_at("scenario", wrong_rate,
                     std::string("this scenario's rate is named '") +
                         rate_key + "'");
    }
    if (reader.has("scenario", wrong_angle)) {
      reader.take("scenario", wrong_angle);
      reader.fail_at("scenario", wrong_angle,
                     std::string("this scenario's angle is named '") +
                         angle_key + "'");
    }
    cfg.rate = reader.take_double("scenario", rate_key, 1.0);
    cfg.angle = reader.take_double("scenario", angle_key, 0.0);
  }
  cfg.omega = reader.take_double("scenario", "omega", 0.0);

  cfg.squeeze.n = reader.take_double("squeezing", "n", 0.0);
  cfg.squeeze.m = Complex(reader.take_double("squeezing", "m_re", 0.0),
                          reader.take_double("squeezing", "m_im", 0.0));

  cfg.alpha = take_mean(reader, "means", "alpha");
  cfg.beta = take_mean(reader, "means", "beta");

  cfg.coherent_amplitude =
      Complex(reader.take_double("initial", "coherent_re", 0.0),
              reader.take_double("initial", "coherent_im", 0.0));
  cfg.v0 = reader.take_double("initial", "v0", 0.0);
  cfg.w0 = Complex(reader.take_double("initial", "w0_re", 0.0),
                   reader.take_double("initial", "w0_im", 0.0));

  cfg.t_end = reader.take_double("grid", "t_end", 1.0);
  cfg.dt = reader.take_double("grid", "dt", 1e-3);

  cfg.seed = reader.take_u64("run", "seed", 0);
  cfg.trajectories =
      static_cast<Eigen::Index>(reader.take_int("run", "trajectories", 1));
  if (cfg.trajectories < 1) {
    fail(ErrorCode::parse, "run.trajectories: must be at least 1");
  }
  const std::string backend = reader.take_enum(
      "run", "backend", "general", {"gaussian", "general", "both"});
  if (backend == "gaussian") cfg.backend = Backend::gaussian;
  if (backend == "general") cfg.backend = Backend::general;
  if (backend == "both") cfg.backend = Backend::both;
  cfg.output_stride =
      static_cast<Eigen::Index>(reader.take_int("run", "output_stride", 1));
  if (cfg.output_stride < 1) {
    fail(ErrorCode::parse, "run.output_stride: must be at least 1");
  }
  cfg.spectrum_every =
      static_cast<Eigen::Index>(reader.take_int("run", "spectrum_every", 0));
  if (cfg.spectrum_every < 0) {
    fail(ErrorCode::parse, "run.spectrum_every: must be nonnegative");
  }
  cfg.leakage_tol = reader.take_double("run", "leakage_tol", 1e-6);
  if (!(cfg.leakage_tol > 0.0)) {
    fail(ErrorCode::parse, "run.leakage_tol: must be positive");
  }
  cfg.threads = static_cast<Eigen::Index>(reader.take_int("run", "threads", 1));
  if (cfg.threads < 1) {
    fail(ErrorCode::parse, "run.threads: must be at least 1");
  }
  const long long save = reader.take_int("run", "save_trajectories", 0);
  if (save != 0 && save != 1) {
    fail(ErrorCode::parse, "run.save_trajectories: must be 0 or 1");
  }
  cfg.save_trajectories = save == 1;

  if (cfg.scenario == ScenarioType::custom_slh) {
    cfg.custom = take_custom(reader, cfg.dim);
  } else if (raw.sections.count("slh") != 0 &&
             !raw.sections.at("slh").empty()) {
    fail(ErrorCode::parse,
         "slh: the [slh] section applies only to scenario type custom_slh");
  }

  reader.check_all_consumed();
  return cfg;
}

BuiltConfig build(const ScenarioConfig& cfg) {
  BuiltConfig built;
  built.cfg = cfg;
  built.grid = sde::make_grid(0.0, cfg.t_end, cfg.dt);

  switch (cfg.scenario) {
    case ScenarioType::mixed_cavity: {
      models::CavityMixedParams params;
      params.dim = cfg.dim;
      params.kappa = cfg.rate;
      params.omega = cfg.omega;
      params.phi = cfg.angle;
      params.squeeze = cfg.squeeze;
      built.scenario = models::cavity_mixed_model(params);
      built.scenario.means.alpha = to_schedule(cfg.alpha, 1);
      built.scenario.means.beta = to_schedule(cfg.beta, 1);
      break;
    }
    case ScenarioType::direct_cavity: {
      models::CavityDirectParams params;
      params.dim = cfg.dim;
      params.gamma = cfg.rate;
      params.omega = cfg.omega;
      params.theta = cfg.angle;
      params.squeeze = cfg.squeeze;
      built.scenario = models::cavity_direct_model(params);
      built.scenario.means.alpha = to_schedule(cfg.alpha, 1);
      built.scenario.means.beta = to_schedule(cfg.beta, 0);
      if (!mean_is_zero(cfg.beta)) {
        fail(ErrorCode::invalid_argument,
             "means.beta: the direct scenario has no Fock channel to drive");
      }
      break;
    }
    case ScenarioType::custom_slh: {
      require(cfg.custom.has_value(), ErrorCode::invalid_argument,
              "custom scenario needs [slh] operators");
      const CustomSlhConfig& custom = *cfg.custom;
      models::SLHModel model;
      model.dim = cfg.dim;
      model.n_fock = custom.n_fock;
      model.n_sq = custom.n_sq;
      model.h_op = custom.h_op;
      model.l_ops = custom.l_ops;
      model.r_ops = custom.r_ops;
      model.s_mat = custom.s_scalar *
                    Matrix::Identity(custom.n_fock * cfg.dim,
                                     custom.n_fock * cfg.dim);
      model.squeeze =
          custom.n_sq == 1
              ? noise::SqueezingSpec::scalar(cfg.squeeze.n, cfg.squeeze.m)
              : noise::SqueezingSpec::vacuum(0);
      models::ObservationSpec obs{custom.t_mat, custom.u_mat};
      built.scenario.model = std::move(model);
      built.scenario.obs = std::move(obs);
      built.scenario.means.alpha = to_schedule(cfg.alpha, custom.n_sq);
      built.scenario.means.beta = to_schedule(cfg.beta, custom.n_fock);
      if (custom.n_sq == 0 && !mean_is_zero(cfg.alpha)) {
        fail(ErrorCode::invalid_argument,
             "means.alpha: no squeezed channel to drive");
      }
      if (custom.n_sq == 0 &&
          (cfg.squeeze.n != 0.0 || cfg.squeeze.m != Complex(0.0, 0.0))) {
        fail(ErrorCode::invalid_argument,
             "squeezing: no squeezed channel to apply n/m to");
      }
      if (custom.n_fock == 0 && !mean_is_zero(cfg.beta)) {
        fail(ErrorCode::invalid_argument,
             "means.beta: no Fock channel to drive");
      }
      break;
    }
  }

  // Fire every module-level validation now, so bad configs are load-time
  // errors rather than step-42 surprises.
  models::validate_model(built.scenario.model);
  models::validate_observations(built.scenario.obs, built.scenario.model);
  noise::build_general_K(built.scenario.obs.t_mat, built.scenario.obs.u_mat,
                         built.scenario.model.squeeze);

  built.rho0 = hilbert::pure_density(
      hilbert::coherent_state(cfg.coherent_amplitude, cfg.dim));
  built.gaussian_init.mean = cfg.coherent_amplitude;
  built.gaussian_init.v_cov = cfg.v0;
  built.gaussian_init.w_cov = cfg.w0;

  if (built.wants_general() && (cfg.v0 != 0.0 || cfg.w0 != Complex(0.0, 0.0))) {
    fail(ErrorCode::invalid_argument,
         "initial.v0/w0: the general backend starts from the coherent state "
         "(v0 = 0, w0 = 0); explicit covariances apply to the gaussian "
         "backend only");
  }

  if (built.wants_gaussian()) {
    gaussian_filter::validate_covariances(cfg.v0, cfg.w0);
    switch (cfg.scenario) {
      case ScenarioType::mixed_cavity: {
        gaussian_filter::MixedScenario scenario;
        // Complex m is rejected here at load time for the closed-form path.
        scenario.coeffs = gaussian_filter::MixedCoefficients::make(
            cfg.rate, cfg.omega, cfg.angle, cfg.squeeze);
        scenario.means = built.scenario.means;
        built.gaussian_mixed = std::move(scenario);
        break;
      }
      case ScenarioType::direct_cavity: {
        gaussian_filter::DirectScenario scenario;
        scenario.coeffs = gaussian_filter::DirectCoefficients::make(
            cfg.rate, cfg.omega, cfg.angle, cfg.squeeze);
        scenario.means = built.scenario.means;
        built.gaussian_direct = std::move(scenario);
        break;
      }
      case ScenarioType::custom_slh:
        fail(ErrorCode::invalid_argument,
             "run.backend: the gaussian backend needs a cavity scenario "
             "(mixed_cavity or direct_cavity)");
    }
  }

  return built;
}

BuiltConfig load_file(const std::string& path) {
  return build(interpret(parse_raw_file(path)));
}

BuiltConfig load_text(const std::string& text, const std::string& name) {
  return build(interpret(parse_raw_text(text, name)));
}

}  // namespace sqf::config

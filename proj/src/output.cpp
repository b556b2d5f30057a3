#include "output.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

namespace sqf::output {

namespace {

// Emitted rows are point indices 0, stride, 2*stride, ..., plus the final
// point if the stride does not land on it.
std::vector<Eigen::Index> emitted_rows(Eigen::Index n_points,
                                       Eigen::Index stride) {
  require(stride >= 1, ErrorCode::invalid_argument,
          "output stride must be at least 1");
  std::vector<Eigen::Index> rows;
  for (Eigen::Index k = 0; k < n_points; k += stride) rows.push_back(k);
  if (rows.back() != n_points - 1) rows.push_back(n_points - 1);
  return rows;
}

void kahan_add(double& sum, double& comp, double value) {
  const double y = value - comp;
  const double t = sum + y;
  comp = (t - sum) - y;
  sum = t;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    require(out_.good(), ErrorCode::io, "cannot open '" + path + "' for write");
    path_ = path;
  }

  void header(const std::vector<std::string>& columns) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i > 0) out_ << ',';
      out_ << columns[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i > 0) out_ << ',';
      out_ << format_double(values[i]);
    }
    out_ << '\n';
  }

  void finish() {
    out_.flush();
    require(out_.good(), ErrorCode::io, "error writing '" + path_ + "'");
  }

 private:
  std::ofstream out_;
  std::string path_;
};

// Shared body of the two trajectory writers; extra_columns appends the
// gaussian covariance cells for a given point index.
template <typename ExtraHeader, typename ExtraCells>
void write_trajectory_impl(const std::string& path, const Trajectory& traj,
                           Eigen::Index stride, const ExtraHeader& extra_header,
                           const ExtraCells& extra_cells) {
  const auto n_points = static_cast<Eigen::Index>(traj.points.size());
  require(n_points >= 1, ErrorCode::invalid_argument, "empty trajectory");
  const Eigen::Index n_obs = traj.record.n_obs();
  require(traj.record.n_steps() == n_points - 1, ErrorCode::dimension,
          "record length does not match the trajectory");

  CsvWriter csv(path);
  std::vector<std::string> columns = {"t",        "re_pi_a",  "im_pi_a",
                                      "pi_n",     "re_pi_a2", "im_pi_a2",
                                      "trace_residual"};
  for (Eigen::Index a = 0; a < n_obs; ++a) {
    columns.push_back("dI_" + std::to_string(a + 1));
  }
  for (Eigen::Index a = 0; a < n_obs; ++a) {
    columns.push_back("dY_" + std::to_string(a + 1));
  }
  extra_header(columns);
  csv.header(columns);

  const auto rows = emitted_rows(n_points, stride);
  Eigen::Index prev = 0;
  for (Eigen::Index k : rows) {
    const TrajectoryPoint& p = traj.points[static_cast<std::size_t>(k)];
    std::vector<double> cells = {p.t,
                                 p.pi_a.real(),
                                 p.pi_a.imag(),
                                 p.pi_n,
                                 p.pi_a2.real(),
                                 p.pi_a2.imag(),
                                 p.trace_residual};
    for (Eigen::Index a = 0; a < n_obs; ++a) {
      // Point k sits after record step k-1; sum the window (prev, k].
      double di = 0.0;
      for (Eigen::Index s = prev; s < k; ++s) di += traj.record.di(a, s);
      cells.push_back(di);
    }
    for (Eigen::Index a = 0; a < n_obs; ++a) {
      double dy = 0.0;
      for (Eigen::Index s = prev; s < k; ++s) dy += traj.record.dy(a, s);
      cells.push_back(dy);
    }
    extra_cells(cells, k);
    csv.row(cells);
    prev = k;
  }
  csv.finish();
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          Eigen::Index stride) {
  write_trajectory_impl(
      path, traj, stride, [](std::vector<std::string>&) {},
      [](std::vector<double>&, Eigen::Index) {});
}

void write_gaussian_csv(const std::string& path,
                        const gaussian_filter::GaussianTrajectory& traj,
                        Eigen::Index stride) {
  require(traj.v.size() == traj.base.points.size() &&
              traj.w.size() == traj.base.points.size(),
          ErrorCode::dimension, "covariance series length mismatch");
  write_trajectory_impl(
      path, traj.base, stride,
      [](std::vector<std::string>& columns) {
        columns.push_back("v_cov");
        columns.push_back("re_w_cov");
        columns.push_back("im_w_cov");
      },
      [&traj](std::vector<double>& cells, Eigen::Index k) {
        cells.push_back(traj.v[static_cast<std::size_t>(k)]);
        cells.push_back(traj.w[static_cast<std::size_t>(k)].real());
        cells.push_back(traj.w[static_cast<std::size_t>(k)].imag());
      });
}

EnsembleAccumulator::EnsembleAccumulator(std::vector<double> times)
    : times_(std::move(times)) {
  const auto n = static_cast<Eigen::Index>(times_.size());
  require(n >= 1, ErrorCode::invalid_argument, "accumulator needs rows");
  sum_ = RealMatrix::Zero(n, 5);
  comp_ = RealMatrix::Zero(n, 5);
  sum_sq_ = RealMatrix::Zero(n, 5);
  comp_sq_ = RealMatrix::Zero(n, 5);
}

void EnsembleAccumulator::add(const RealMatrix& rows) {
  require(rows.rows() == sum_.rows() && rows.cols() == 5,
          ErrorCode::dimension, "observable rows shape mismatch");
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) {
      kahan_add(sum_(i, j), comp_(i, j), rows(i, j));
      kahan_add(sum_sq_(i, j), comp_sq_(i, j), rows(i, j) * rows(i, j));
    }
  }
  ++count_;
}

RealMatrix EnsembleAccumulator::mean() const {
  require(count_ >= 1, ErrorCode::invalid_argument, "no trajectories added");
  return sum_ / static_cast<double>(count_);
}

RealMatrix EnsembleAccumulator::sem() const {
  require(count_ >= 2, ErrorCode::invalid_argument,
          "standard errors need at least 2 trajectories");
  const double n = static_cast<double>(count_);
  const RealMatrix mean_sq = (sum_ / n).array().square().matrix();
  // Sample variance via sum of squares; clamp tiny negatives from roundoff.
  RealMatrix var = (sum_sq_ / n - mean_sq) * (n / (n - 1.0));
  var = var.array().max(0.0).matrix();
  return (var / n).array().sqrt().matrix();
}

RealMatrix observable_rows(const Trajectory& traj, Eigen::Index stride) {
  const auto n_points = static_cast<Eigen::Index>(traj.points.size());
  const auto rows = emitted_rows(n_points, stride);
  RealMatrix out(static_cast<Eigen::Index>(rows.size()), 5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TrajectoryPoint& p = traj.points[static_cast<std::size_t>(rows[i])];
    out(static_cast<Eigen::Index>(i), 0) = p.pi_a.real();
    out(static_cast<Eigen::Index>(i), 1) = p.pi_a.imag();
    out(static_cast<Eigen::Index>(i), 2) = p.pi_n;
    out(static_cast<Eigen::Index>(i), 3) = p.pi_a2.real();
    out(static_cast<Eigen::Index>(i), 4) = p.pi_a2.imag();
  }
  return out;
}

void write_ensemble_csv(const std::string& path,
                        const EnsembleAccumulator& acc) {
  CsvWriter csv(path);
  csv.header({"t", "mean_re_pi_a", "sem_re_pi_a", "mean_im_pi_a",
              "sem_im_pi_a", "mean_pi_n", "sem_pi_n", "mean_re_pi_a2",
              "sem_re_pi_a2", "mean_im_pi_a2", "sem_im_pi_a2"});
  const RealMatrix mean = acc.mean();
  const RealMatrix sem = acc.sem();
  for (Eigen::Index i = 0; i < mean.rows(); ++i) {
    csv.row({acc.times()[static_cast<std::size_t>(i)], mean(i, 0), sem(i, 0),
             mean(i, 1), sem(i, 1), mean(i, 2), sem(i, 2), mean(i, 3),
             sem(i, 3), mean(i, 4), sem(i, 4)});
  }
  csv.finish();
}

nlohmann::json raw_config_to_json(const config::RawConfig& raw) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [section, entries] : raw.sections) {
    nlohmann::json sec = nlohmann::json::object();
    for (const auto& [key, entry] : entries) sec[key] = entry.value;
    j[section] = std::move(sec);
  }
  return j;
}

config::RawConfig raw_config_from_json(const nlohmann::json& manifest_config,
                                       const std::string& name) {
  require(manifest_config.is_object(), ErrorCode::parse,
          "manifest config must be an object of sections");
  config::RawConfig raw;
  raw.name = name;
  for (const auto& [section, entries] : manifest_config.items()) {
    require(entries.is_object(), ErrorCode::parse,
            "manifest config section '" + section + "' must be an object");
    for (const auto& [key, value] : entries.items()) {
      require(value.is_string(), ErrorCode::parse,
              "manifest config value '" + section + "." + key +
                  "' must be a string");
      raw.sections[section][key] =
          config::RawEntry{value.get<std::string>(), 0};
    }
  }
  return raw;
}

void write_manifest(const std::string& path, const ManifestData& data) {
  nlohmann::json j;
  j["config"] = data.config;
  j["seed"] = data.seed;
  j["version"] = data.version;
  j["started_at"] = data.started_at;
  j["invariant_log"] = data.invariant_log;
  j["margins"] = data.margins;
  j["files"] = data.files;
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io, "cannot open '" + path + "' for write");
  out << j.dump(2) << '\n';
  out.flush();
  require(out.good(), ErrorCode::io, "error writing '" + path + "'");
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace sqf::output

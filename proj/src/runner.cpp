#include "runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "general_filter.hpp"
#include "output.hpp"

#ifndef SQFILTER_VERSION
#define SQFILTER_VERSION "0.0.0"
#endif

namespace sqf::runner {

namespace {

namespace fs = std::filesystem;

// Runs work(0..n-1) on `threads` workers and feeds the results to
// consume(i, result) strictly in index order, so floating-point reductions
// and output lists are independent of scheduling.
template <typename Result, typename Work, typename Consume>
void parallel_indexed(Eigen::Index n, Eigen::Index threads, const Work& work,
                      const Consume& consume) {
  if (threads <= 1 || n <= 1) {
    for (Eigen::Index i = 0; i < n; ++i) consume(i, work(i));
    return;
  }
  std::mutex mu;
  std::condition_variable cv;
  std::map<Eigen::Index, Result> ready;
  std::exception_ptr error;
  std::atomic<Eigen::Index> next{0};
  std::atomic<bool> stop{false};

  auto body = [&]() {
    while (!stop.load(std::memory_order_relaxed)) {
      const Eigen::Index i = next.fetch_add(1);
      if (i >= n) break;
      try {
        Result r = work(i);
        std::lock_guard<std::mutex> lock(mu);
        ready.emplace(i, std::move(r));
        cv.notify_all();
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        stop.store(true);
        cv.notify_all();
        break;
      }
    }
  };

  const Eigen::Index n_workers = std::min<Eigen::Index>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (Eigen::Index w = 0; w < n_workers; ++w) pool.emplace_back(body);

  {
    std::unique_lock<std::mutex> lock(mu);
    for (Eigen::Index expected = 0; expected < n; ++expected) {
      cv.wait(lock, [&] {
        return error != nullptr || ready.count(expected) != 0;
      });
      if (error) break;
      Result r = std::move(ready.at(expected));
      ready.erase(expected);
      lock.unlock();
      consume(expected, std::move(r));
      lock.lock();
    }
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string traj_file_name(Eigen::Index index, const char* kind) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "traj_%06lld_%s.csv",
                static_cast<long long>(index), kind);
  return buf;
}

struct TrajResult {
  RealMatrix rows_general;   // 0x5 when the backend skips the general filter
  RealMatrix rows_gaussian;  // 0x5 likewise
  double max_abs_residual = 0.0;
  double gap = 0.0;  // both-backend max |pi_a difference| at full resolution
  std::vector<std::string> files;
};

gaussian_filter::GaussianTrajectory run_gaussian_backend(
    const config::BuiltConfig& built, const sde::IntegrationGrid& grid,
    sde::RngStream* rng, const MeasurementRecord* record) {
  if (built.gaussian_mixed.has_value()) {
    if (record != nullptr) {
      return gaussian_filter::run_mixed_on_record(
          *built.gaussian_mixed, built.gaussian_init, grid, *record);
    }
    return gaussian_filter::run_mixed_synthesized(
        *built.gaussian_mixed, built.gaussian_init, grid, *rng);
  }
  require(built.gaussian_direct.has_value(), ErrorCode::internal,
          "gaussian backend requested without a gaussian scenario");
  if (record != nullptr) {
    return gaussian_filter::run_direct_on_record(
        *built.gaussian_direct, built.gaussian_init, grid, *record);
  }
  return gaussian_filter::run_direct_synthesized(
      *built.gaussian_direct, built.gaussian_init, grid, *rng);
}

}  // namespace

const char* library_version() { return SQFILTER_VERSION; }

SimulateResult simulate(const config::BuiltConfig& built,
                        const config::RawConfig& raw,
                        const std::string& out_dir) {
  const config::ScenarioConfig& cfg = built.cfg;
  fs::create_directories(out_dir);

  const std::string started_at = output::utc_timestamp();
  const sde::IntegrationGrid& grid = built.grid;
  const bool ensemble = cfg.trajectories > 1;
  const bool write_per_traj = !ensemble || cfg.save_trajectories;

  general_filter::RunOptions opts;
  opts.spectrum_every = cfg.spectrum_every;
  opts.leakage_tol = cfg.leakage_tol;

  std::vector<double> emitted_times;
  for (Eigen::Index k = 0; k <= grid.n_steps; k += cfg.output_stride) {
    emitted_times.push_back(grid.time_at(k));
  }
  if (emitted_times.back() != grid.time_at(grid.n_steps)) {
    emitted_times.push_back(grid.time_at(grid.n_steps));
  }

  auto run_one = [&](Eigen::Index i) -> TrajResult {
    TrajResult result;
    sde::RngStream rng =
        sde::derive_stream(cfg.seed, static_cast<std::uint64_t>(i));

    std::optional<Trajectory> general_traj;
    std::optional<gaussian_filter::GaussianTrajectory> gaussian_traj;

    if (built.wants_general()) {
      general_traj = general_filter::run_filter_synthesized(
          built.scenario, built.rho0, grid, rng, opts);
      if (cfg.backend == config::Backend::both) {
        gaussian_traj =
            run_gaussian_backend(built, grid, nullptr, &general_traj->record);
        double gap = 0.0;
        for (std::size_t k = 0; k < general_traj->points.size(); ++k) {
          gap = std::max(gap, std::abs(general_traj->points[k].pi_a -
                                       gaussian_traj->base.points[k].pi_a));
        }
        result.gap = gap;
      }
    } else {
      gaussian_traj = run_gaussian_backend(built, grid, &rng, nullptr);
    }

    if (general_traj.has_value()) {
      result.rows_general =
          output::observable_rows(*general_traj, cfg.output_stride);
      for (const auto& p : general_traj->points) {
        result.max_abs_residual =
            std::max(result.max_abs_residual, std::abs(p.trace_residual));
      }
      if (write_per_traj) {
        const std::string name =
            ensemble ? traj_file_name(i, "general") : "trajectory_general.csv";
        output::write_trajectory_csv((fs::path(out_dir) / name).string(),
                                     *general_traj, cfg.output_stride);
        result.files.push_back(name);
      }
    }
    if (gaussian_traj.has_value()) {
      result.rows_gaussian =
          output::observable_rows(gaussian_traj->base, cfg.output_stride);
      if (write_per_traj) {
        const std::string name = ensemble
                                     ? traj_file_name(i, "gaussian")
                                     : "trajectory_gaussian.csv";
        output::write_gaussian_csv((fs::path(out_dir) / name).string(),
                                   *gaussian_traj, cfg.output_stride);
        result.files.push_back(name);
      }
    }
    return result;
  };

  SimulateResult out;
  output::EnsembleAccumulator acc_general(emitted_times);
  output::EnsembleAccumulator acc_gaussian(emitted_times);
  double max_abs_residual = 0.0;
  double max_gap = 0.0;

  parallel_indexed<TrajResult>(
      cfg.trajectories, cfg.threads, run_one,
      [&](Eigen::Index, TrajResult r) {
        if (r.rows_general.rows() > 0) acc_general.add(r.rows_general);
        if (r.rows_gaussian.rows() > 0) acc_gaussian.add(r.rows_gaussian);
        max_abs_residual = std::max(max_abs_residual, r.max_abs_residual);
        max_gap = std::max(max_gap, r.gap);
        for (auto& f : r.files) out.files.push_back(std::move(f));
      });

  if (ensemble) {
    if (built.wants_general()) {
      const std::string name = "ensemble_general.csv";
      output::write_ensemble_csv((fs::path(out_dir) / name).string(),
                                 acc_general);
      out.files.push_back(name);
    }
    if (built.wants_gaussian()) {
      const std::string name = "ensemble_gaussian.csv";
      output::write_ensemble_csv((fs::path(out_dir) / name).string(),
                                 acc_gaussian);
      out.files.push_back(name);
    }
  }

  out.invariant_log = nlohmann::json::object();
  out.invariant_log["trajectories"] = cfg.trajectories;
  out.invariant_log["steps_per_trajectory"] = grid.n_steps;
  if (built.wants_general()) {
    out.invariant_log["max_abs_trace_residual"] = max_abs_residual;
    out.invariant_log["renorm_tolerance"] = opts.renorm_tol;
    out.invariant_log["leakage_tolerance"] = opts.leakage_tol;
  }
  out.margins = nlohmann::json::object();
  if (cfg.backend == config::Backend::both) {
    out.margins["pathwise_max_pi_a_gap"] = max_gap;
  }

  output::ManifestData manifest;
  manifest.config = output::raw_config_to_json(raw);
  manifest.seed = cfg.seed;
  manifest.version = library_version();
  manifest.started_at = started_at;
  manifest.invariant_log = out.invariant_log;
  manifest.margins = out.margins;
  manifest.files = out.files;
  output::write_manifest((fs::path(out_dir) / "manifest.json").string(),
                         manifest);
  out.files.push_back("manifest.json");
  return out;
}

SweepResult sweep(const config::RawConfig& raw, const std::string& parameter,
                  const std::vector<std::string>& values,
                  const std::string& out_dir) {
  require(!values.empty(), ErrorCode::invalid_argument,
          "sweep needs at least one parameter value");
  fs::create_directories(out_dir);
  const std::string started_at = output::utc_timestamp();

  SweepResult out;
  out.rows = nlohmann::json::array();

  std::ofstream csv((fs::path(out_dir) / "sweep.csv").string(),
                    std::ios::binary);
  require(csv.good(), ErrorCode::io, "cannot open sweep.csv for write");
  csv << "value,v_end,re_w_end,im_w_end,mean_pi_n_end\n";

  for (const std::string& value : values) {
    config::RawConfig point = raw;
    config::set_raw(point, parameter, value);
    const config::BuiltConfig built = config::build(config::interpret(point));
    require(built.wants_gaussian(), ErrorCode::invalid_argument,
            "sweep summarizes the closed-form covariances; set run.backend "
            "to gaussian or both");

    // Covariances are a pure ODE; one synthesized trajectory provides the
    // stochastic summary statistics.
    sde::RngStream rng = sde::derive_stream(built.cfg.seed, 0);
    const gaussian_filter::GaussianTrajectory traj =
        run_gaussian_backend(built, built.grid, &rng, nullptr);
    const double v_end = traj.v.back();
    const Complex w_end = traj.w.back();
    const double pi_n_end = traj.base.points.back().pi_n;

    csv << value << ',' << output::format_double(v_end) << ','
        << output::format_double(w_end.real()) << ','
        << output::format_double(w_end.imag()) << ','
        << output::format_double(pi_n_end) << '\n';

    nlohmann::json row;
    row["value"] = value;
    row["v_end"] = v_end;
    row["re_w_end"] = w_end.real();
    row["im_w_end"] = w_end.imag();
    row["mean_pi_n_end"] = pi_n_end;
    const noise::CorrelationMatrix corr = noise::build_general_K(
        built.scenario.obs.t_mat, built.scenario.obs.u_mat,
        built.scenario.model.squeeze);
    nlohmann::json k_entries = nlohmann::json::array();
    for (Eigen::Index r = 0; r < corr.k_mat.rows(); ++r) {
      for (Eigen::Index c = 0; c < corr.k_mat.cols(); ++c) {
        k_entries.push_back(corr.k_mat(r, c));
      }
    }
    row["k_matrix_row_major"] = std::move(k_entries);
    out.rows.push_back(std::move(row));
  }
  csv.flush();
  require(csv.good(), ErrorCode::io, "error writing sweep.csv");
  out.files.push_back("sweep.csv");

  output::ManifestData manifest;
  manifest.config = output::raw_config_to_json(raw);
  manifest.seed = 0;
  manifest.version = library_version();
  manifest.started_at = started_at;
  manifest.invariant_log = nlohmann::json::object();
  manifest.margins = nlohmann::json::object();
  manifest.margins["sweep_parameter"] = parameter;
  manifest.margins["rows"] = out.rows;
  manifest.files = out.files;
  output::write_manifest((fs::path(out_dir) / "manifest.json").string(),
                         manifest);
  out.files.push_back("manifest.json");
  return out;
}

}  // namespace sqf::runner

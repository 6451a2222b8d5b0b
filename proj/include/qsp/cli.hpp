#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qsp/analysis.hpp"
#include "qsp/common.hpp"
#include "qsp/config.hpp"
#include "qsp/ensemble.hpp"
#include "qsp/homogenize.hpp"
#include "qsp/lindblad.hpp"
#include "qsp/models.hpp"

// Command implementations behind the batch front end:
//   validate - structural model diagnostics, exit 0 iff hard checks pass;
//   run      - one ensemble, written as observables.csv / norms.csv /
//              rho.json / summary.json;
//   sweep    - correlation-time sweep against the master reference,
//              written as sweep.csv / fit.json;
//   compare  - several regimes side by side with pairwise trace distances,
//              written as observables_<regime>.csv / norms_<regime>.csv /
//              compare.csv / compare_summary.json.
// All CSV numbers use 17 significant digits, so reruns with the same
// config and seed are byte-identical regardless of worker count.

namespace qsp::cli {

using json = nlohmann::json;

struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
};

namespace detail {

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw io_error("cannot create output directory '" + dir +
                   "': " + ec.message());
  if (!std::filesystem::is_directory(dir))
    throw io_error("output path '" + dir + "' is not a directory");
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);  // byte-stable newlines everywhere
  if (!out) throw io_error("cannot open output file: " + p.string());
  return out;
}

inline void close_out(std::ofstream& out, const std::filesystem::path& p) {
  out.flush();
  if (!out) throw io_error("write failure on: " + p.string());
}

inline config::ExperimentConfig load_with_overrides(const CliOptions& opts) {
  config::ExperimentConfig cfg = config::load_config(opts.config_path);
  if (opts.seed) cfg.master_seed = *opts.seed;
  if (opts.workers) cfg.workers = *opts.workers;
  return cfg;
}

inline void require_valid_model(const models::ModelSpec& model) {
  const models::ModelDiagnostics diag = models::validate(model);
  if (!diag.hard_pass())
    throw config_error("model validation failed: " + diag.errors.front() +
                       (diag.errors.size() > 1
                            ? " (+" + std::to_string(diag.errors.size() - 1) +
                                  " more; see the validate command)"
                            : ""));
}

inline void write_observables_csv(const std::filesystem::path& p,
                                  const ensemble::EnsembleResult& r) {
  std::ofstream out = open_out(p);
  out << "time,observable_name,mean,stderr\n";
  for (std::size_t t = 0; t < r.times.size(); ++t)
    for (std::size_t o = 0; o < r.observable_names.size(); ++o)
      out << fmt(r.times[t]) << ',' << r.observable_names[o] << ','
          << fmt(r.obs_mean[t][o]) << ',' << fmt(r.obs_stderr[t][o]) << '\n';
  close_out(out, p);
}

inline void write_norms_csv(const std::filesystem::path& p,
                            const ensemble::EnsembleResult& r) {
  std::ofstream out = open_out(p);
  out << "time,mean_norm2,stderr\n";
  for (std::size_t t = 0; t < r.times.size(); ++t)
    out << fmt(r.times[t]) << ',' << fmt(r.norm2_mean[t]) << ','
        << fmt(r.norm2_stderr[t]) << '\n';
  close_out(out, p);
}

inline json rho_to_json(const hilbert::Matrix& rho) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < rho.cols(); ++c)
      row.push_back({rho(r, c).real(), rho(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void write_rho_json(const std::filesystem::path& p,
                           const ensemble::EnsembleResult& r) {
  json doc;
  doc["dimension"] = r.mean_rho.empty() ? 0 : r.mean_rho.front().rows();
  doc["times"] = r.times;
  json rhos = json::array();
  for (const auto& rho : r.mean_rho) rhos.push_back(rho_to_json(rho));
  doc["rho"] = std::move(rhos);
  std::ofstream out = open_out(p);
  out << doc.dump(2) << '\n';
  close_out(out, p);
}

inline void write_json(const std::filesystem::path& p, const json& doc) {
  std::ofstream out = open_out(p);
  out << doc.dump(2) << '\n';
  close_out(out, p);
}

/// Derive the model to run for a requested compare regime from the
/// config's base model.
inline models::ModelSpec derive_regime(const models::ModelSpec& base,
                                       models::Regime target) {
  if (target == base.regime) return base;
  switch (target) {
    case models::Regime::Colored:
      throw config_error(
          "compare: cannot derive a colored model from a white-noise config");
    case models::Regime::StratonovichWhite:
    case models::Regime::ItoWhite:
      return homogenize::to_markovian(base, target);
    case models::Regime::NaiveItoWhite: {
      models::ModelSpec m =
          base.regime == models::Regime::Colored
              ? homogenize::to_markovian(
                    base, models::Regime::StratonovichWhite)
              : base;
      m.regime = models::Regime::NaiveItoWhite;
      return m;
    }
  }
  throw config_error("compare: unsupported regime");
}

}  // namespace detail

inline int cmd_validate(const CliOptions& opts) {
  const config::ExperimentConfig cfg = detail::load_with_overrides(opts);
  const models::ModelDiagnostics diag = models::validate(cfg.model);

  std::cout << "dimension: " << cfg.dimension << '\n'
            << "regime: " << models::to_string(cfg.model.regime) << '\n'
            << "channels: " << cfg.model.channels.size() << '\n'
            << "H hermiticity residual: " << diag.h_hermiticity << '\n';
  for (std::size_t k = 0; k < diag.op_hermiticity.size(); ++k)
    std::cout << "channel " << k
              << " hermiticity residual: " << diag.op_hermiticity[k] << '\n';
  if (cfg.model.channels.size() > 1)
    std::cout << "max pairwise commutator: " << diag.max_commutator << '\n';
  if (models::is_markovian(cfg.model.regime))
    std::cout << "fluctuation-dissipation relation (A = gamma^2): "
              << (diag.fd_ok ? "ok" : "off") << '\n';
  for (const std::string& w : diag.warnings)
    std::cout << "WARNING: " << w << '\n';
  for (const std::string& e : diag.errors) std::cout << "ERROR: " << e << '\n';
  std::cout << "validation: " << (diag.hard_pass() ? "PASS" : "FAIL")
            << std::endl;
  return diag.hard_pass() ? 0 : 1;
}

inline int cmd_run(const CliOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const config::ExperimentConfig cfg = detail::load_with_overrides(opts);
  detail::require_valid_model(cfg.model);

  const ensemble::EnsembleResult result = ensemble::run(
      cfg.model, cfg.initial_state, cfg.integration, cfg.observables,
      cfg.trajectories, cfg.master_seed, cfg.workers);

  detail::ensure_out_dir(opts.out_dir);
  const std::filesystem::path dir(opts.out_dir);
  detail::write_observables_csv(dir / "observables.csv", result);
  detail::write_norms_csv(dir / "norms.csv", result);
  detail::write_rho_json(dir / "rho.json", result);

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  json summary;
  summary["command"] = "run";
  summary["config"] = cfg.raw;
  summary["config_path"] = opts.config_path;
  summary["regime"] = models::to_string(cfg.model.regime);
  summary["trajectories"] = result.trajectories;
  summary["master_seed"] = result.master_seed;
  summary["workers"] = cfg.workers;
  summary["times"] = result.times;
  summary["wall_time_seconds"] = wall;
  detail::write_json(dir / "summary.json", summary);
  return 0;
}

inline int cmd_sweep(const CliOptions& opts) {
  const config::ExperimentConfig cfg = detail::load_with_overrides(opts);
  if (!cfg.has_sweep)
    throw config_error("sweep: config has no 'sweep' section");
  if (cfg.model.regime != models::Regime::Colored)
    throw config_error("sweep: config must use the colored regime");
  detail::require_valid_model(cfg.model);

  // The sweep's white-noise reference: channel gammas are the targets.
  lindblad::GkslSpec reference;
  reference.H = cfg.model.H;
  for (const models::NoiseChannel& ch : cfg.model.channels)
    reference.jumps.push_back({ch.op, ch.gamma});

  sde::IntegrationConfig base = cfg.integration;
  if (!cfg.sweep_times.empty()) base.sample_times = cfg.sweep_times;

  const analysis::SweepResult sw = analysis::tau_sweep(
      cfg.model, cfg.sweep_taus, reference, cfg.initial_state, base,
      cfg.sweep_dt_factor, cfg.trajectories, cfg.master_seed, cfg.workers,
      cfg.sweep_master_dt);

  detail::ensure_out_dir(opts.out_dir);
  const std::filesystem::path dir(opts.out_dir);
  const std::filesystem::path csv = dir / "sweep.csv";
  std::ofstream out = detail::open_out(csv);
  out << "tau,B,gamma_eff,time,trace_distance,stderr\n";
  for (const analysis::SweepRow& row : sw.rows)
    out << detail::fmt(row.tau) << ',' << detail::fmt(row.B) << ','
        << detail::fmt(row.gamma_eff) << ',' << detail::fmt(row.time) << ','
        << detail::fmt(row.distance) << ',' << detail::fmt(row.stderr_)
        << '\n';
  detail::close_out(out, csv);

  json fit;
  fit["valid"] = sw.order_valid;
  if (sw.order_valid) {
    fit["order"] = sw.fitted_order;
    fit["residuals"] = sw.order_residuals;
  } else {
    fit["order"] = nullptr;
    fit["residuals"] = json::array();
  }
  detail::write_json(dir / "fit.json", fit);
  return 0;
}

inline int cmd_compare(const CliOptions& opts) {
  const config::ExperimentConfig cfg = detail::load_with_overrides(opts);
  if (!cfg.has_compare)
    throw config_error("compare: config has no 'compare' section");
  detail::require_valid_model(cfg.model);

  std::vector<models::ModelSpec> specs;
  std::vector<std::string> names;
  for (models::Regime r : cfg.compare_regimes) {
    specs.push_back(detail::derive_regime(cfg.model, r));
    names.push_back(models::to_string(r));
  }

  std::vector<ensemble::EnsembleResult> results;
  results.reserve(specs.size());
  for (const models::ModelSpec& m : specs)
    results.push_back(ensemble::run(m, cfg.initial_state, cfg.integration,
                                    cfg.observables, cfg.trajectories,
                                    cfg.master_seed, cfg.workers));

  detail::ensure_out_dir(opts.out_dir);
  const std::filesystem::path dir(opts.out_dir);
  for (std::size_t i = 0; i < results.size(); ++i) {
    detail::write_observables_csv(dir / ("observables_" + names[i] + ".csv"),
                                  results[i]);
    detail::write_norms_csv(dir / ("norms_" + names[i] + ".csv"), results[i]);
  }

  const std::filesystem::path csv = dir / "compare.csv";
  std::ofstream out = detail::open_out(csv);
  out << "time,regime_a,regime_b,trace_distance,stderr\n";
  for (std::size_t i = 0; i < results.size(); ++i)
    for (std::size_t j = i + 1; j < results.size(); ++j) {
      const std::vector<double> se =
          ensemble::paired_distance_stderr(results[i], results[j]);
      for (std::size_t t = 0; t < results[i].times.size(); ++t)
        out << detail::fmt(results[i].times[t]) << ',' << names[i] << ','
            << names[j] << ','
            << detail::fmt(hilbert::trace_distance(
                   results[i].mean_rho[t], results[j].mean_rho[t]))
            << ',' << detail::fmt(se[t]) << '\n';
    }
  detail::close_out(out, csv);

  json summary;
  summary["command"] = "compare";
  summary["config"] = cfg.raw;
  summary["regimes"] = names;
  summary["master_seed"] = cfg.master_seed;
  summary["trajectories"] = cfg.trajectories;
  summary["renormalize"] = cfg.integration.renormalize;
  summary["naive_norm_growth"] = nullptr;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].regime != models::Regime::NaiveItoWhite) continue;
    const ensemble::EnsembleResult& r = results[i];
    double expected_rate = 0.0;
    for (const models::NoiseChannel& ch : specs[i].channels)
      expected_rate += ch.gamma * ch.gamma *
                       hilbert::variance(ch.op, cfg.initial_state);
    json naive;
    naive["expected_initial_rate"] = expected_rate;
    naive["final_mean_norm2"] = r.norm2_mean.back();
    naive["final_stderr"] = r.norm2_stderr.back();
    if (!cfg.integration.renormalize && r.times.size() >= 2) {
      const double window = std::max(std::min(0.05, cfg.integration.t_end),
                                     r.times[1]);
      naive["fitted_initial_rate"] =
          analysis::fit_log_slope(r.times, r.norm2_mean, window);
      naive["flagged"] =
          r.norm2_mean.back() > 1.0 + 3.0 * r.norm2_stderr.back();
    } else {
      naive["fitted_initial_rate"] = nullptr;
      naive["flagged"] = nullptr;
    }
    summary["naive_norm_growth"] = std::move(naive);
  }
  detail::write_json(dir / "compare_summary.json", summary);
  return 0;
}

}  // namespace qsp::cli

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "qsp/common.hpp"
#include "qsp/hilbert.hpp"
#include "qsp/homogenize.hpp"
#include "qsp/lindblad.hpp"
#include "qsp/models.hpp"
#include "qsp/sde.hpp"

// Monte Carlo orchestration. Trajectories are grouped into contiguous
// batches (20 when M allows); workers pull whole batches from an atomic
// queue and accumulate private partial sums, which are then combined
// pairwise in fixed batch order. The result is bit-identical for any
// worker count, and the batch structure doubles as the error-bar
// machinery: standard errors from batch means, trace-distance errors by
// jackknife over batches.

namespace qsp::ensemble {

using hilbert::Matrix;
using hilbert::Vector;

struct Observable {
  std::string name;
  Matrix op;
};

struct EnsembleResult {
  std::vector<double> times;
  std::vector<Matrix> mean_rho;                    // [time]
  std::vector<std::vector<Matrix>> batch_rho_sum;  // [batch][time], raw sums
  std::vector<std::size_t> batch_sizes;
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> obs_mean;    // [time][observable]
  std::vector<std::vector<double>> obs_stderr;  // [time][observable]
  std::vector<double> norm2_mean;               // pre-normalization norm^2
  std::vector<double> norm2_stderr;
  std::vector<double> norm2_variance;
  std::size_t trajectories = 0;
  std::uint64_t master_seed = 0;
};

namespace detail {

struct BatchPartial {
  std::vector<Matrix> rho_sum;               // [time]
  std::vector<std::vector<double>> obs_sum;  // [time][observable]
  std::vector<double> norm2_sum;             // [time]
  std::vector<double> norm2_sumsq;           // [time]
  std::size_t count = 0;

  static BatchPartial zero(std::size_t n_times, Eigen::Index dim,
                           std::size_t n_obs) {
    BatchPartial p;
    p.rho_sum.assign(n_times, Matrix::Zero(dim, dim));
    p.obs_sum.assign(n_times, std::vector<double>(n_obs, 0.0));
    p.norm2_sum.assign(n_times, 0.0);
    p.norm2_sumsq.assign(n_times, 0.0);
    return p;
  }

  void add(const BatchPartial& other) {
    for (std::size_t t = 0; t < rho_sum.size(); ++t) {
      rho_sum[t] += other.rho_sum[t];
      for (std::size_t o = 0; o < obs_sum[t].size(); ++o)
        obs_sum[t][o] += other.obs_sum[t][o];
      norm2_sum[t] += other.norm2_sum[t];
      norm2_sumsq[t] += other.norm2_sumsq[t];
    }
    count += other.count;
  }
};

/// Combine partials[lo..hi) pairwise, in index order.
inline BatchPartial pairwise_total(const std::vector<BatchPartial>& partials,
                                   std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return partials[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  BatchPartial left = pairwise_total(partials, lo, mid);
  left.add(pairwise_total(partials, mid, hi));
  return left;
}

/// Batch-means standard error; near-equal batch sizes assumed (they differ
/// by at most one trajectory).
inline double batch_stderr(const std::vector<double>& batch_means,
                           double grand_mean) {
  const std::size_t nb = batch_means.size();
  if (nb < 2) return 0.0;
  double ss = 0.0;
  for (double bm : batch_means) ss += (bm - grand_mean) * (bm - grand_mean);
  return std::sqrt(ss / (static_cast<double>(nb) * (nb - 1)));
}

}  // namespace detail

/// Run M independent trajectories and aggregate. Deterministic for fixed
/// (model, psi0, cfg, observables, M, master_seed) regardless of workers.
inline EnsembleResult run(const models::ModelSpec& model, const Vector& psi0,
                          const sde::IntegrationConfig& cfg,
                          const std::vector<Observable>& observables,
                          std::size_t M, std::uint64_t master_seed,
                          unsigned workers = 1) {
  if (M < 1) throw config_error("ensemble: at least one trajectory required");
  const Eigen::Index dim = model.dim();
  for (const Observable& obs : observables) {
    if (obs.op.rows() != dim || obs.op.cols() != dim)
      throw config_error("ensemble: observable '" + obs.name +
                         "' has wrong dimension");
    if (!hilbert::is_hermitian(obs.op))
      throw config_error("ensemble: observable '" + obs.name +
                         "' is not Hermitian");
  }

  const grid::TimeGrid g =
      grid::make_time_grid(cfg.dt, cfg.t_end, cfg.sample_times);
  const std::size_t n_times = g.sample_times.size();
  const std::size_t n_obs = observables.size();

  const std::size_t n_batches = std::min<std::size_t>(20, M);
  const std::size_t base = M / n_batches;
  const std::size_t rem = M % n_batches;
  std::vector<std::size_t> batch_begin(n_batches + 1, 0);
  for (std::size_t b = 0; b < n_batches; ++b)
    batch_begin[b + 1] = batch_begin[b] + base + (b < rem ? 1 : 0);

  std::vector<detail::BatchPartial> partials(
      n_batches, detail::BatchPartial::zero(n_times, dim, n_obs));
  std::vector<std::exception_ptr> failures(n_batches);
  std::atomic<std::size_t> next_batch{0};

  auto process_batch = [&](std::size_t b) {
    detail::BatchPartial& p = partials[b];
    for (std::size_t i = batch_begin[b]; i < batch_begin[b + 1]; ++i) {
      sde::Trajectory traj;
      try {
        traj = sde::integrate(model, psi0, cfg, master_seed, i);
      } catch (const config_error& e) {
        throw config_error("trajectory " + std::to_string(i) + ": " +
                           e.what());
      } catch (const numerical_error& e) {
        throw numerical_error("trajectory " + std::to_string(i) + ": " +
                              e.what());
      }
      for (std::size_t t = 0; t < n_times; ++t) {
        const Vector& psi = traj.states[t];
        const double nrm2 = psi.squaredNorm();
        p.rho_sum[t] += psi * psi.adjoint();
        for (std::size_t o = 0; o < n_obs; ++o)
          p.obs_sum[t][o] +=
              psi.dot(observables[o].op * psi).real() / nrm2;
        p.norm2_sum[t] += traj.norm2[t];
        p.norm2_sumsq[t] += traj.norm2[t] * traj.norm2[t];
      }
      ++p.count;
    }
  };

  auto worker_loop = [&]() {
    for (;;) {
      const std::size_t b = next_batch.fetch_add(1);
      if (b >= n_batches) return;
      try {
        process_batch(b);
      } catch (...) {
        failures[b] = std::current_exception();
      }
    }
  };

  const unsigned n_workers = std::max(
      1u, std::min<unsigned>(workers, static_cast<unsigned>(n_batches)));
  if (n_workers == 1) {
    worker_loop();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker_loop);
    for (std::thread& th : pool) th.join();
  }
  for (std::size_t b = 0; b < n_batches; ++b)
    if (failures[b]) std::rethrow_exception(failures[b]);

  const detail::BatchPartial total =
      detail::pairwise_total(partials, 0, n_batches);

  EnsembleResult res;
  res.times = g.sample_times;
  res.trajectories = M;
  res.master_seed = master_seed;
  res.batch_sizes.reserve(n_batches);
  res.batch_rho_sum.reserve(n_batches);
  for (const auto& p : partials) {
    res.batch_sizes.push_back(p.count);
    res.batch_rho_sum.push_back(p.rho_sum);
  }
  for (const Observable& obs : observables)
    res.observable_names.push_back(obs.name);

  const double inv_m = 1.0 / static_cast<double>(M);
  res.mean_rho.reserve(n_times);
  res.obs_mean.assign(n_times, std::vector<double>(n_obs, 0.0));
  res.obs_stderr.assign(n_times, std::vector<double>(n_obs, 0.0));
  res.norm2_mean.assign(n_times, 0.0);
  res.norm2_stderr.assign(n_times, 0.0);
  res.norm2_variance.assign(n_times, 0.0);
  std::vector<double> batch_means(n_batches);
  for (std::size_t t = 0; t < n_times; ++t) {
    res.mean_rho.push_back(total.rho_sum[t] * inv_m);
    for (std::size_t o = 0; o < n_obs; ++o) {
      const double grand = total.obs_sum[t][o] * inv_m;
      res.obs_mean[t][o] = grand;
      for (std::size_t b = 0; b < n_batches; ++b)
        batch_means[b] = partials[b].obs_sum[t][o] / partials[b].count;
      res.obs_stderr[t][o] = detail::batch_stderr(batch_means, grand);
    }
    const double nmean = total.norm2_sum[t] * inv_m;
    res.norm2_mean[t] = nmean;
    res.norm2_variance[t] =
        std::max(0.0, total.norm2_sumsq[t] * inv_m - nmean * nmean);
    for (std::size_t b = 0; b < n_batches; ++b)
      batch_means[b] = partials[b].norm2_sum[t] / partials[b].count;
    res.norm2_stderr[t] = detail::batch_stderr(batch_means, nmean);
  }
  return res;
}

struct MasterComparison {
  std::vector<double> times;
  std::vector<Matrix> master_rho;
  std::vector<double> distance;  // trace distance ensemble mean vs master
  std::vector<double> stderr_;   // jackknife over batches
};

/// Trace distance between the ensemble mean and the master-equation
/// reference at each sample time. Errors by leave-one-batch-out jackknife.
inline MasterComparison compare_to_master(const EnsembleResult& result,
                                          const lindblad::GkslSpec& spec,
                                          const Matrix& rho0,
                                          double master_dt = 1e-4) {
  if (result.times.empty())
    throw config_error("compare_to_master: empty ensemble result");
  if (spec.H.rows() != result.mean_rho.front().rows())
    throw config_error("compare_to_master: dimension mismatch");

  MasterComparison cmp;
  cmp.times = result.times;
  cmp.master_rho = lindblad::integrate_master(
      spec, rho0, master_dt, result.times.back(), result.times);

  const std::size_t n_batches = result.batch_rho_sum.size();
  const double m_total = static_cast<double>(result.trajectories);
  for (std::size_t t = 0; t < result.times.size(); ++t) {
    cmp.distance.push_back(
        hilbert::trace_distance(result.mean_rho[t], cmp.master_rho[t]));
    if (n_batches < 2) {
      cmp.stderr_.push_back(0.0);
      continue;
    }
    // jackknife: recompute the distance with each batch left out
    Matrix total_sum = result.mean_rho[t] * m_total;
    std::vector<double> loo(n_batches);
    double loo_mean = 0.0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      const Matrix rest = (total_sum - result.batch_rho_sum[b][t]) /
                          (m_total - result.batch_sizes[b]);
      loo[b] = hilbert::trace_distance(rest, cmp.master_rho[t]);
      loo_mean += loo[b];
    }
    loo_mean /= n_batches;
    double ss = 0.0;
    for (double d : loo) ss += (d - loo_mean) * (d - loo_mean);
    cmp.stderr_.push_back(std::sqrt(ss * (n_batches - 1) /
                                    static_cast<double>(n_batches)));
  }
  return cmp;
}

/// Jackknife standard errors for the per-time trace distance between two
/// ensembles that share the same batch layout (same M, same seed policy):
/// each batch is left out of both ensembles at once.
inline std::vector<double> paired_distance_stderr(const EnsembleResult& a,
                                                  const EnsembleResult& b) {
  const std::size_t n_batches = a.batch_rho_sum.size();
  if (b.batch_rho_sum.size() != n_batches ||
      a.trajectories != b.trajectories || a.times.size() != b.times.size())
    throw config_error(
        "paired_distance_stderr: ensembles have different layouts");
  std::vector<double> out;
  const double m_total = static_cast<double>(a.trajectories);
  for (std::size_t t = 0; t < a.times.size(); ++t) {
    if (n_batches < 2) {
      out.push_back(0.0);
      continue;
    }
    const Matrix sum_a = a.mean_rho[t] * m_total;
    const Matrix sum_b = b.mean_rho[t] * m_total;
    std::vector<double> loo(n_batches);
    double loo_mean = 0.0;
    for (std::size_t k = 0; k < n_batches; ++k) {
      const double rest = m_total - a.batch_sizes[k];
      loo[k] = hilbert::trace_distance(
          (sum_a - a.batch_rho_sum[k][t]) / rest,
          (sum_b - b.batch_rho_sum[k][t]) / rest);
      loo_mean += loo[k];
    }
    loo_mean /= n_batches;
    double ss = 0.0;
    for (double d : loo) ss += (d - loo_mean) * (d - loo_mean);
    out.push_back(
        std::sqrt(ss * (n_batches - 1) / static_cast<double>(n_batches)));
  }
  return out;
}

struct PairedReport {
  std::vector<double> times;
  std::vector<double> distance;           // trace distance of ensemble means
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> z;     // [time][observable]
};

/// Run two Markovian models with identical per-trajectory noise streams
/// and report how far their ensembles drift apart: trace distance of the
/// mean density matrices plus per-observable z-scores (difference over
/// combined standard error).
inline PairedReport paired_convention_test(
    const models::ModelSpec& model_a, const models::ModelSpec& model_b,
    const Vector& psi0, const sde::IntegrationConfig& cfg,
    const std::vector<Observable>& observables, std::size_t M,
    std::uint64_t master_seed, unsigned workers = 1) {
  if (!models::is_markovian(model_a.regime) ||
      !models::is_markovian(model_b.regime))
    throw config_error("paired_convention_test: both models must be "
                       "white-noise regimes");
  if (model_a.dim() != model_b.dim())
    throw config_error("paired_convention_test: dimension mismatch");
  if (!homogenize::fd_check(model_a) || !homogenize::fd_check(model_b))
    throw config_error(
        "paired_convention_test: A = D = gamma^2 must hold on both models");

  const EnsembleResult ra =
      run(model_a, psi0, cfg, observables, M, master_seed, workers);
  const EnsembleResult rb =
      run(model_b, psi0, cfg, observables, M, master_seed, workers);

  PairedReport rep;
  rep.times = ra.times;
  rep.observable_names = ra.observable_names;
  rep.z.assign(ra.times.size(),
               std::vector<double>(observables.size(), 0.0));
  for (std::size_t t = 0; t < ra.times.size(); ++t) {
    rep.distance.push_back(
        hilbert::trace_distance(ra.mean_rho[t], rb.mean_rho[t]));
    for (std::size_t o = 0; o < observables.size(); ++o) {
      const double diff = ra.obs_mean[t][o] - rb.obs_mean[t][o];
      const double se = std::hypot(ra.obs_stderr[t][o], rb.obs_stderr[t][o]);
      if (se > 0.0)
        rep.z[t][o] = diff / se;
      else
        rep.z[t][o] =
            diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
  }
  return rep;
}

}  // namespace qsp::ensemble

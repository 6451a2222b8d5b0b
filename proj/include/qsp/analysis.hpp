#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qsp/common.hpp"
#include "qsp/ensemble.hpp"
#include "qsp/homogenize.hpp"
#include "qsp/lindblad.hpp"
#include "qsp/models.hpp"
#include "qsp/sde.hpp"

// Statistical post-processing: autocorrelation and decay-time fits for
// noise paths, log-log order fits for convergence studies, and the
// correlation-time sweep that demonstrates the white-noise limit at fixed
// effective coupling D (B grows as 1/sqrt(tau) so D stays constant - the
// scaling under which the limit holds).

namespace qsp::analysis {

using hilbert::Matrix;
using hilbert::Vector;

/// Least-squares line fit; returns {slope, intercept}.
inline std::pair<double, double> fit_line(const std::vector<double>& xs,
                                          const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  if (n != ys.size() || n < 2)
    throw config_error("fit_line: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw config_error("fit_line: degenerate abscissae");
  const double slope = (n * sxy - sx * sy) / denom;
  return {slope, (sy - slope * sx) / n};
}

/// Fitted slope of log(y) against log(x): the empirical order of y ~ x^p.
inline double fit_loglog_order(const std::vector<double>& xs,
                               const std::vector<double>& ys) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
      throw config_error("fit_loglog_order: positive values required");
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
  }
  return fit_line(lx, ly).first;
}

/// Fitted slope of log(y) against t, restricted to t <= t_max. Used for
/// initial growth/decay rates of ensemble series.
inline double fit_log_slope(const std::vector<double>& times,
                            const std::vector<double>& values, double t_max) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] > t_max + 1e-12) continue;
    if (!(values[i] > 0.0))
      throw config_error("fit_log_slope: values must be positive");
    xs.push_back(times[i]);
    ys.push_back(std::log(values[i]));
  }
  return fit_line(xs, ys).first;
}

/// Mean-removed autocovariance at lags 0..max_lag, biased normalization
/// (divide by the full sample count at every lag).
inline std::vector<double> autocorrelation(const std::vector<double>& path,
                                           double dt, double max_lag) {
  if (!(dt > 0.0)) throw config_error("autocorrelation: dt must be positive");
  if (!(max_lag >= 0.0))
    throw config_error("autocorrelation: max_lag must be >= 0");
  const std::int64_t lags = std::llround(max_lag / dt);
  const std::int64_t n = static_cast<std::int64_t>(path.size());
  if (n < 100 * std::max<std::int64_t>(lags, 1))
    throw config_error(
        "autocorrelation: insufficient data (need >= 100 samples per lag)");
  double mean = 0.0;
  for (double x : path) mean += x;
  mean /= n;
  std::vector<double> acov(lags + 1, 0.0);
  for (std::int64_t k = 0; k <= lags; ++k) {
    double s = 0.0;
    for (std::int64_t i = 0; i + k < n; ++i)
      s += (path[i] - mean) * (path[i + k] - mean);
    acov[k] = s / n;
  }
  return acov;
}

/// Exponential decay time from an autocovariance series: least-squares
/// slope of log(acf) over the leading lags where acf > 0.1 acf[0];
/// returns -1/slope.
inline double fit_decay_time(const std::vector<double>& acf, double dt) {
  if (acf.empty() || !(acf[0] > 0.0))
    throw config_error("fit_decay_time: acf[0] must be positive");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < acf.size(); ++k) {
    if (!(acf[k] > 0.1 * acf[0])) break;
    xs.push_back(k * dt);
    ys.push_back(std::log(acf[k]));
  }
  if (xs.size() < 3)
    throw config_error("fit_decay_time: fewer than 3 usable lags");
  const double slope = fit_line(xs, ys).first;
  if (!(slope < 0.0))
    throw config_error("fit_decay_time: series does not decay");
  return -1.0 / slope;
}

struct SweepRow {
  double tau;
  double B;          // first channel's colored coupling for this row
  double gamma_eff;  // first channel's effective sqrt(D), constant by design
  double time;
  double distance;   // trace distance to the master reference
  double stderr_;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool order_valid = false;  // needs >= 2 tau values with positive distance
  double fitted_order = 0.0; // slope of log(distance) vs log(tau), last time
  std::vector<double> order_residuals;
};

/// Correlation-time sweep at fixed effective coupling. The template's
/// channel gammas define the target D_k = gamma_k^2; each row sets tau and
/// recomputes B_k = sqrt(D_k / (2 E[xi^2] tau)), then integrates the
/// colored ensemble with dt = tau * dt_factor and measures the trace
/// distance to the master reference at the configured sample times.
inline SweepResult tau_sweep(const models::ModelSpec& colored_template,
                             const std::vector<double>& taus,
                             const lindblad::GkslSpec& reference,
                             const Vector& psi0,
                             const sde::IntegrationConfig& base_cfg,
                             double dt_factor, std::size_t M,
                             std::uint64_t master_seed, unsigned workers = 1,
                             double master_dt = 1e-4) {
  if (colored_template.regime != models::Regime::Colored)
    throw config_error("tau_sweep: template must be a colored-regime model");
  if (taus.empty()) throw config_error("tau_sweep: no tau values given");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > 0.0))
      throw config_error("tau_sweep: tau values must be positive");
    if (i > 0 && !(taus[i] < taus[i - 1]))
      throw config_error("tau_sweep: tau values must be strictly descending");
  }
  if (!(dt_factor > 0.0))
    throw config_error("tau_sweep: dt_factor must be positive");
  if (colored_template.channels.empty())
    throw config_error("tau_sweep: template has no noise channels");

  const Matrix rho0 = (psi0 * psi0.adjoint()) / psi0.squaredNorm();
  SweepResult out;
  std::vector<double> last_time_tau, last_time_distance;
  for (double tau : taus) {
    models::ModelSpec model = colored_template;
    for (models::NoiseChannel& ch : model.channels) {
      const double d_target = ch.gamma * ch.gamma;
      ch.tau = tau;
      ch.B = d_target == 0.0
                 ? 0.0
                 : std::sqrt(d_target /
                             (2.0 * noise::stationary_second_moment(ch.kind) *
                              tau));
    }
    sde::IntegrationConfig cfg = base_cfg;
    cfg.dt = tau * dt_factor;

    const ensemble::EnsembleResult result =
        ensemble::run(model, psi0, cfg, {}, M, master_seed, workers);
    const ensemble::MasterComparison cmp =
        ensemble::compare_to_master(result, reference, rho0, master_dt);

    const models::NoiseChannel& ch0 = model.channels.front();
    const double gamma_eff =
        ch0.B == 0.0 ? 0.0
                     : homogenize::effective_coupling(ch0.kind, ch0.B, tau)
                           .gamma;
    for (std::size_t t = 0; t < cmp.times.size(); ++t) {
      out.rows.push_back({tau, ch0.B, gamma_eff, cmp.times[t],
                          cmp.distance[t], cmp.stderr_[t]});
      if (t + 1 == cmp.times.size() && cmp.distance[t] > 0.0) {
        last_time_tau.push_back(tau);
        last_time_distance.push_back(cmp.distance[t]);
      }
    }
  }

  if (last_time_tau.size() >= 2) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < last_time_tau.size(); ++i) {
      lx.push_back(std::log(last_time_tau[i]));
      ly.push_back(std::log(last_time_distance[i]));
    }
    const auto [slope, intercept] = fit_line(lx, ly);
    out.fitted_order = slope;
    out.order_valid = true;
    for (std::size_t i = 0; i < lx.size(); ++i)
      out.order_residuals.push_back(ly[i] - (slope * lx[i] + intercept));
  }
  return out;
}

}  // namespace qsp::analysis

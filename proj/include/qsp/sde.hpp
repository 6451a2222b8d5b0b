#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qsp/common.hpp"
#include "qsp/grid.hpp"
#include "qsp/hilbert.hpp"
#include "qsp/models.hpp"
#include "qsp/noise.hpp"
#include "qsp/rng.hpp"

// Time-stepping engines, one per regime:
//   Colored            - Heun (explicit trapezoidal) on the per-path ODE,
//                        with noise values at step start and step end;
//   ItoWhite/NaiveIto  - Euler-Maruyama;
//   StratonovichWhite  - Heun predictor-corrector, same Brownian increment
//                        in both stages.
// Every regime draws exactly one normal per channel per step, so two
// regimes run with the same (master seed, trajectory) consume identical
// noise sequences - the basis of paired-convention comparisons.

namespace qsp::sde {

using hilbert::Vector;

struct IntegrationConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  std::vector<double> sample_times;  // empty means {t_end}
  bool renormalize = true;
  bool record_norm_drift = false;    // keep per-step pre-normalization norms
};

struct Trajectory {
  std::vector<double> times;            // snapped sample times
  std::vector<Vector> states;           // state at each sample time
  std::vector<double> norm2;            // pre-normalization ||psi||^2 there
  std::vector<double> step_times;       // per-step diagnostics, optional
  std::vector<double> step_norm2;
  std::vector<double> final_noise;      // colored regime: xi at t_end
};

/// One Heun step of the colored-regime ODE. Advances the noise values in
/// place (one sampler draw per channel) and returns the raw new state; the
/// vector field is evaluated with the noise at step start and step end.
inline Vector step_colored(const models::ModelSpec& model, const Vector& psi,
                           std::vector<double>& xi, double dt,
                           std::vector<rng::RngStream>& rngs) {
  const std::vector<double> xi_start = xi;
  for (std::size_t k = 0; k < model.channels.size(); ++k) {
    const models::NoiseChannel& ch = model.channels[k];
    xi[k] = ch.kind == noise::NoiseKind::OU
                ? noise::ou_step(xi[k], dt, ch.tau, rngs[k])
                : noise::sbm_step(xi[k], dt, ch.tau, rngs[k]);
  }
  const Vector k1 = models::colored_rhs(model, psi, xi_start);
  const Vector predictor = psi + dt * k1;
  const Vector k2 = models::colored_rhs(model, predictor, xi);
  return psi + (0.5 * dt) * (k1 + k2);
}

/// One Euler-Maruyama step: psi + a dt + sum_k b_k dW_k. Used for both the
/// corrected Ito regime and the deliberately wrong naive reading.
inline Vector step_ito(const models::ModelSpec& model, const Vector& psi,
                       double dt, std::vector<rng::RngStream>& rngs) {
  const models::RhsPair rhs = models::markovian_rhs(model, psi);
  Vector out = psi + dt * rhs.drift;
  for (std::size_t k = 0; k < rhs.diffusions.size(); ++k)
    out += noise::white_increment(dt, rngs[k]) * rhs.diffusions[k];
  return out;
}

/// One Heun predictor-corrector step for the Stratonovich regime; the same
/// Brownian increments feed predictor and corrector.
inline Vector step_strat(const models::ModelSpec& model, const Vector& psi,
                         double dt, std::vector<rng::RngStream>& rngs) {
  const models::RhsPair rhs = models::strat_rhs(model, psi);
  std::vector<double> dw(rhs.diffusions.size());
  Vector predictor = psi + dt * rhs.drift;
  for (std::size_t k = 0; k < dw.size(); ++k) {
    dw[k] = noise::white_increment(dt, rngs[k]);
    predictor += dw[k] * rhs.diffusions[k];
  }
  const models::RhsPair rhs2 = models::strat_rhs(model, predictor);
  Vector out = psi + (0.5 * dt) * (rhs.drift + rhs2.drift);
  for (std::size_t k = 0; k < dw.size(); ++k)
    out += (0.5 * dw[k]) * (rhs.diffusions[k] + rhs2.diffusions[k]);
  return out;
}

/// Integrate one trajectory. RNG streams derive from (master_seed,
/// trajectory, channel), so results are reproducible under any scheduling.
/// Colored channels start from a stationary noise draw and must satisfy
/// dt <= tau/10. States recorded at sample times are renormalized when the
/// policy says so; the pre-normalization norm^2 is always recorded.
inline Trajectory integrate(const models::ModelSpec& model, const Vector& psi0,
                            const IntegrationConfig& cfg,
                            std::uint64_t master_seed,
                            std::uint64_t trajectory = 0) {
  const grid::TimeGrid g =
      grid::make_time_grid(cfg.dt, cfg.t_end, cfg.sample_times);
  const bool colored = model.regime == models::Regime::Colored;
  if (colored) {
    for (std::size_t k = 0; k < model.channels.size(); ++k) {
      const double tau = model.channels[k].tau;
      if (!(tau > 0.0))
        throw config_error("integrate: colored channel " + std::to_string(k) +
                           " requires tau > 0");
      if (cfg.dt > tau / 10.0 + 1e-15 * tau)
        throw numerical_error("integrate: dt exceeds tau/10 for channel " +
                              std::to_string(k));
    }
  }

  std::vector<rng::RngStream> rngs;
  rngs.reserve(model.channels.size());
  for (std::size_t k = 0; k < model.channels.size(); ++k)
    rngs.emplace_back(master_seed, trajectory, static_cast<std::uint64_t>(k));

  std::vector<double> xi;
  if (colored) {
    xi.resize(model.channels.size());
    for (std::size_t k = 0; k < xi.size(); ++k)
      xi[k] = noise::sample_stationary(model.channels[k].kind, rngs[k]);
  }

  Trajectory traj;
  Vector psi = psi0;
  double pre_norm2 = psi.squaredNorm();
  std::size_t next_sample = 0;
  auto record_at = [&](std::int64_t step) {
    while (next_sample < g.sample_steps.size() &&
           g.sample_steps[next_sample] == step) {
      traj.times.push_back(g.sample_times[next_sample]);
      traj.states.push_back(psi);
      traj.norm2.push_back(pre_norm2);
      ++next_sample;
    }
  };

  record_at(0);
  for (std::int64_t step = 0; step < g.n_steps; ++step) {
    switch (model.regime) {
      case models::Regime::Colored:
        psi = step_colored(model, psi, xi, cfg.dt, rngs);
        break;
      case models::Regime::StratonovichWhite:
        psi = step_strat(model, psi, cfg.dt, rngs);
        break;
      case models::Regime::ItoWhite:
      case models::Regime::NaiveItoWhite:
        psi = step_ito(model, psi, cfg.dt, rngs);
        break;
    }
    pre_norm2 = psi.squaredNorm();
    if (!std::isfinite(pre_norm2) || pre_norm2 < 1e-12)
      throw numerical_error(
          "integrate: state norm collapsed or diverged at t = " +
          std::to_string((step + 1) * cfg.dt));
    if (cfg.record_norm_drift) {
      traj.step_times.push_back((step + 1) * cfg.dt);
      traj.step_norm2.push_back(pre_norm2);
    }
    if (cfg.renormalize) psi /= std::sqrt(pre_norm2);
    record_at(step + 1);
  }
  traj.final_noise = xi;
  return traj;
}

}  // namespace qsp::sde

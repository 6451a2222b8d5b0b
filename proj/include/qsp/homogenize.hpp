#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qsp/common.hpp"
#include "qsp/hilbert.hpp"
#include "qsp/lindblad.hpp"
#include "qsp/models.hpp"
#include "qsp/noise.hpp"

// The white-noise limit as executable formulas: effective couplings
// D = 2 E[xi^2] B^2 tau, the colored -> Markovian model map (gamma = sqrt(D)),
// the Stratonovich-to-Ito correction operator, and the
// fluctuation-dissipation check A = D = gamma^2 that makes the corrected
// Ito process norm-preserving.

namespace qsp::homogenize {

using hilbert::Matrix;
using hilbert::Vector;

inline constexpr double kFdRelTol = 1e-12;

struct EffectiveCoupling {
  double D = 0.0;      // effective diffusion, units 1/time
  double gamma = 0.0;  // sqrt(D)
  // provenance
  noise::NoiseKind kind = noise::NoiseKind::OU;
  double B = 0.0;
  double tau = 0.0;
  double xi2 = 0.0;    // stationary second moment used
};

/// D = 2 E_infinity[xi^2] B^2 tau, from the analytic stationary moment.
inline EffectiveCoupling effective_coupling(noise::NoiseKind kind, double B,
                                            double tau) {
  if (kind == noise::NoiseKind::White)
    throw config_error("effective_coupling: white noise has no tau");
  if (!(tau > 0.0))
    throw config_error("effective_coupling: tau must be positive");
  EffectiveCoupling eff;
  eff.kind = kind;
  eff.B = B;
  eff.tau = tau;
  eff.xi2 = noise::stationary_second_moment(kind);
  eff.D = 2.0 * eff.xi2 * B * B * tau;
  eff.gamma = std::sqrt(eff.D);
  return eff;
}

inline bool fd_holds(double A, double gamma) {
  const double d = gamma * gamma;
  return std::abs(A - d) <= kFdRelTol * std::max(1.0, d);
}

/// True iff A_k = gamma_k^2 for every channel (relative tolerance 1e-12;
/// the relation is imposed by construction, not measured).
inline bool fd_check(const models::ModelSpec& model) {
  for (const models::NoiseChannel& ch : model.channels)
    if (!fd_holds(ch.A, ch.gamma)) return false;
  return true;
}

/// Map a colored model onto its white-noise limit: gamma_k = sqrt(D_k) with
/// D_k from effective_coupling, A_k carried through unchanged, regime set
/// to the target. An already-Markovian input keeps its couplings (the map
/// is idempotent on Markovian coefficients). The ItoWhite target demands
/// the fluctuation-dissipation relation: the corrected Ito process is only
/// norm-preserving with A_k = D_k = gamma_k^2.
inline models::ModelSpec to_markovian(const models::ModelSpec& model,
                                      models::Regime target) {
  if (target != models::Regime::StratonovichWhite &&
      target != models::Regime::ItoWhite)
    throw config_error(
        "to_markovian: target must be stratonovich_white or ito_white");
  models::ModelSpec out = model;
  if (model.regime == models::Regime::Colored) {
    for (models::NoiseChannel& ch : out.channels)
      ch.gamma =
          ch.B == 0.0 ? 0.0 : effective_coupling(ch.kind, ch.B, ch.tau).gamma;
  }
  out.regime = target;
  if (target == models::Regime::ItoWhite) {
    for (std::size_t k = 0; k < out.channels.size(); ++k)
      if (!fd_holds(out.channels[k].A, out.channels[k].gamma))
        throw config_error(
            "to_markovian: ito_white target requires A = D = gamma^2 "
            "(violated by channel " +
            std::to_string(k) + ")");
  }
  return out;
}

/// Stratonovich correction operator applied to the state:
/// C psi = sum_k D_k (1/2 D2_k - <D2_k>) psi, with D_k = gamma_k^2.
/// Adding this to the Stratonovich drift yields the corrected Ito drift.
inline Vector correction(const models::ModelSpec& model, const Vector& psi) {
  if (!models::is_markovian(model.regime))
    throw config_error(
        "correction: undefined before the white-noise limit is taken");
  Vector out = Vector::Zero(psi.size());
  for (const models::NoiseChannel& ch : model.channels) {
    const double d = ch.gamma * ch.gamma;
    if (d == 0.0) continue;
    const auto act = models::detail::channel_action(ch.op, psi);
    out += d * (0.5 * act.delta2 - act.variance * psi);
  }
  return out;
}

/// The GKSL generator this model unravels: jump couplings are the
/// channel gammas (Markovian regimes) or the effective sqrt(D) (colored).
inline lindblad::GkslSpec gksl_limit(const models::ModelSpec& model) {
  lindblad::GkslSpec spec;
  spec.H = model.H;
  for (const models::NoiseChannel& ch : model.channels) {
    double gamma = ch.gamma;
    if (model.regime == models::Regime::Colored)
      gamma =
          ch.B == 0.0 ? 0.0 : effective_coupling(ch.kind, ch.B, ch.tau).gamma;
    spec.jumps.push_back({ch.op, gamma});
  }
  return spec;
}

}  // namespace qsp::homogenize

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qsp/common.hpp"
#include "qsp/hilbert.hpp"
#include "qsp/noise.hpp"

// Model assembly: Hamiltonian plus noise channels, and the right-hand
// sides of each dynamical regime. Drifts and diffusions are returned as
// explicit vectors so the integrators stay convention-agnostic.
//
// Expectations inside the nonlinear coefficients are normalized,
// <O> = <psi|O|psi> / <psi|psi>, which coincides with the plain quantum
// expectation on the unit sphere and keeps the coefficients meaningful
// when renormalization is switched off (the norm-violation diagnostic).

namespace qsp::models {

using hilbert::Complex;
using hilbert::Matrix;
using hilbert::Vector;

enum class Regime { Colored, StratonovichWhite, ItoWhite, NaiveItoWhite };

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::Colored:
      return "colored";
    case Regime::StratonovichWhite:
      return "stratonovich_white";
    case Regime::ItoWhite:
      return "ito_white";
    case Regime::NaiveItoWhite:
      return "naive_ito_white";
  }
  return "?";
}

inline bool is_markovian(Regime r) { return r != Regime::Colored; }

struct NoiseChannel {
  Matrix op;                                   // Hermitian coupling operator
  noise::NoiseKind kind = noise::NoiseKind::White;
  double tau = 0.0;    // correlation time (colored kinds)
  double A = 0.0;      // deterministic drift coefficient, units 1/time
  double B = 0.0;      // colored coupling, units 1/time
  double gamma = 0.0;  // Markovian coupling, units 1/sqrt(time)
};

struct ModelSpec {
  Matrix H;
  std::vector<NoiseChannel> channels;
  Regime regime = Regime::ItoWhite;

  Eigen::Index dim() const { return H.rows(); }
};

/// Drift field a(psi) plus one diffusion field b_k(psi) per channel.
struct RhsPair {
  Vector drift;
  std::vector<Vector> diffusions;
};

namespace detail {

/// Per-channel action on the current state: mean, centered applications,
/// and variance, all under the normalized expectation.
struct ChannelAction {
  double mean;       // <O>
  Vector delta;      // (O - <O>) psi
  Vector delta2;     // (O - <O>)^2 psi
  double variance;   // <Delta^2>
};

inline ChannelAction channel_action(const Matrix& op, const Vector& psi) {
  const double nrm2 = psi.squaredNorm();
  if (!(nrm2 > 0.0))
    throw numerical_error("channel_action: state collapsed to zero");
  ChannelAction act;
  const Vector op_psi = op * psi;
  act.mean = psi.dot(op_psi).real() / nrm2;
  act.delta = op_psi - act.mean * psi;
  act.delta2 = op * act.delta - act.mean * act.delta;
  act.variance = psi.dot(act.delta2).real() / nrm2;
  return act;
}

inline void require_regime(const ModelSpec& model, Regime expected,
                           const char* what) {
  if (model.regime != expected)
    throw config_error(std::string(what) + ": model regime is " +
                       to_string(model.regime) + ", expected " +
                       to_string(expected));
}

}  // namespace detail

/// Colored-regime vector field at given noise values (one per channel):
/// dpsi/dt = -i H psi + sum_k [ -A_k (D2_k - <D2_k>) + B_k xi_k D_k ] psi,
/// an ordinary per-path ODE since the colored noise is continuous in time.
inline Vector colored_rhs(const ModelSpec& model, const Vector& psi,
                          const std::vector<double>& noise_values) {
  detail::require_regime(model, Regime::Colored, "colored_rhs");
  if (noise_values.size() != model.channels.size())
    throw config_error("colored_rhs: one noise value per channel required");
  Vector out = Complex(0, -1) * (model.H * psi);
  for (std::size_t k = 0; k < model.channels.size(); ++k) {
    const NoiseChannel& ch = model.channels[k];
    const auto act = detail::channel_action(ch.op, psi);
    if (ch.A != 0.0) out -= ch.A * (act.delta2 - act.variance * psi);
    if (ch.B != 0.0) out += (ch.B * noise_values[k]) * act.delta;
  }
  return out;
}

/// Corrected Ito white-noise process:
/// drift = -i H psi - sum_k (gamma_k^2/2) D2_k psi; diffusion_k = gamma_k D_k psi.
inline RhsPair ito_rhs(const ModelSpec& model, const Vector& psi) {
  detail::require_regime(model, Regime::ItoWhite, "ito_rhs");
  RhsPair rhs;
  rhs.drift = Complex(0, -1) * (model.H * psi);
  rhs.diffusions.reserve(model.channels.size());
  for (const NoiseChannel& ch : model.channels) {
    const auto act = detail::channel_action(ch.op, psi);
    rhs.drift -= (0.5 * ch.gamma * ch.gamma) * act.delta2;
    rhs.diffusions.push_back(ch.gamma * act.delta);
  }
  return rhs;
}

namespace detail {

/// Shared coefficient assembly for the Stratonovich form: drift uses A_k,
/// diffusion uses gamma_k (= sqrt(D_k) under the fluctuation-dissipation
/// configuration).
inline RhsPair strat_form_rhs(const ModelSpec& model, const Vector& psi) {
  RhsPair rhs;
  rhs.drift = Complex(0, -1) * (model.H * psi);
  rhs.diffusions.reserve(model.channels.size());
  for (const NoiseChannel& ch : model.channels) {
    const auto act = channel_action(ch.op, psi);
    if (ch.A != 0.0) rhs.drift -= ch.A * (act.delta2 - act.variance * psi);
    rhs.diffusions.push_back(ch.gamma * act.delta);
  }
  return rhs;
}

}  // namespace detail

/// Stratonovich white-noise process:
/// drift = -i H psi - sum_k A_k (D2_k - <D2_k>) psi; diffusion_k = sqrt(D_k) D_k psi.
inline RhsPair strat_rhs(const ModelSpec& model, const Vector& psi) {
  detail::require_regime(model, Regime::StratonovichWhite, "strat_rhs");
  return detail::strat_form_rhs(model, psi);
}

/// Deliberately wrong regime: the Stratonovich coefficients read under the
/// Ito convention. The integrator contracts it as Ito, producing the
/// norm-violating process with mean norm^2 growth rate sum_k D_k <D2_k>.
inline RhsPair naive_ito_rhs(const ModelSpec& model, const Vector& psi) {
  detail::require_regime(model, Regime::NaiveItoWhite, "naive_ito_rhs");
  return detail::strat_form_rhs(model, psi);
}

/// Dispatch to the regime's Markovian (drift, diffusions) form.
inline RhsPair markovian_rhs(const ModelSpec& model, const Vector& psi) {
  switch (model.regime) {
    case Regime::ItoWhite:
      return ito_rhs(model, psi);
    case Regime::StratonovichWhite:
      return strat_rhs(model, psi);
    case Regime::NaiveItoWhite:
      return naive_ito_rhs(model, psi);
    case Regime::Colored:
      break;
  }
  throw config_error("markovian_rhs: colored regime has no (a, b) form");
}

/// Ito norm-square balance 2 Re<psi|a> + sum_k ||b_k||^2 of an (a, b) pair.
/// Zero for the corrected Ito process; sum_k D_k <D2_k> ||psi||^2 for the
/// naive one.
inline double ito_norm_rate(const RhsPair& rhs, const Vector& psi) {
  double rate = 2.0 * psi.dot(rhs.drift).real();
  for (const Vector& b : rhs.diffusions) rate += b.squaredNorm();
  return rate;
}

struct ModelDiagnostics {
  double h_hermiticity = 0.0;            // max |H - H^dag| entry
  std::vector<double> op_hermiticity;    // same per channel operator
  double max_commutator = 0.0;           // worst pairwise [O_j, O_k] entry
  bool commuting = true;
  bool dims_ok = true;
  bool coefficients_ok = true;
  bool fd_ok = true;                     // |A_k - gamma_k^2| small, advisory
  std::vector<std::string> errors;       // hard failures
  std::vector<std::string> warnings;     // advisory notes

  bool hard_pass() const { return errors.empty(); }
};

/// Structural validation: Hermiticity, mutual commutation, dimensions,
/// coefficient signs. The fluctuation-dissipation relation is reported as
/// a warning only; it is a modeling choice, not a structural requirement.
inline ModelDiagnostics validate(const ModelSpec& model,
                                 double tol = hilbert::kDefaultTol) {
  ModelDiagnostics diag;
  const Eigen::Index n = model.H.rows();
  if (model.H.cols() != n || n < 2) {
    diag.dims_ok = false;
    diag.errors.push_back("Hamiltonian must be square with dimension >= 2");
  }
  diag.h_hermiticity = hilbert::hermiticity_residual(model.H);
  if (diag.h_hermiticity > tol)
    diag.errors.push_back("Hamiltonian is not Hermitian within tolerance");

  std::vector<Matrix> ops;
  for (std::size_t k = 0; k < model.channels.size(); ++k) {
    const NoiseChannel& ch = model.channels[k];
    const std::string tag = "channel " + std::to_string(k);
    if (ch.op.rows() != n || ch.op.cols() != n) {
      diag.dims_ok = false;
      diag.errors.push_back(tag + ": operator dimension mismatch");
      continue;
    }
    const double res = hilbert::hermiticity_residual(ch.op);
    diag.op_hermiticity.push_back(res);
    if (res > tol)
      diag.errors.push_back(tag + ": operator is not Hermitian");
    ops.push_back(ch.op);

    if (ch.A < 0.0) {
      diag.coefficients_ok = false;
      diag.errors.push_back(tag + ": A must be >= 0");
    }
    if (ch.gamma < 0.0) {
      diag.coefficients_ok = false;
      diag.errors.push_back(tag + ": gamma must be >= 0");
    }
    if (model.regime == Regime::Colored) {
      if (ch.kind == noise::NoiseKind::White) {
        diag.coefficients_ok = false;
        diag.errors.push_back(tag +
                              ": colored regime requires an ou or sbm kind");
      } else if (!(ch.tau > 0.0)) {
        diag.coefficients_ok = false;
        diag.errors.push_back(tag + ": colored kind requires tau > 0");
      }
    }
    if (is_markovian(model.regime)) {
      const double d = ch.gamma * ch.gamma;
      if (std::abs(ch.A - d) > 1e-12 * std::max(1.0, d)) {
        diag.fd_ok = false;
        diag.warnings.push_back(
            tag + ": A != gamma^2 (fluctuation-dissipation relation off)");
      }
    }
  }

  if (ops.size() > 1) {
    diag.max_commutator = hilbert::max_pairwise_commutator(ops);
    diag.commuting = diag.max_commutator <= tol;
    if (!diag.commuting)
      diag.errors.push_back("channel operators do not mutually commute");
  }
  return diag;
}

}  // namespace qsp::models

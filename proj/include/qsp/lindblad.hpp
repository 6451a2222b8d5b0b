#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qsp/common.hpp"
#include "qsp/grid.hpp"
#include "qsp/hilbert.hpp"

// Deterministic reference dynamics: the GKSL master equation integrated
// with classical RK4, plus the closed-form qubit dephasing solution. Every
// stochastic unraveling in this project is judged against these.

namespace qsp::lindblad {

using hilbert::Complex;
using hilbert::Matrix;

struct JumpTerm {
  Matrix op;     // Hermitian jump operator
  double gamma;  // coupling, units 1/sqrt(time)
};

struct GkslSpec {
  Matrix H;
  std::vector<JumpTerm> jumps;

  Eigen::Index dim() const { return H.rows(); }
};

/// L[rho] = -i[H, rho] + sum_k gamma_k^2 (O_k rho O_k - 1/2 {O_k^2, rho}).
/// Hermitian and traceless for Hermitian inputs.
inline Matrix gksl_rhs(const GkslSpec& spec, const Matrix& rho) {
  const Eigen::Index n = spec.H.rows();
  if (rho.rows() != n || rho.cols() != n)
    throw numerical_error("gksl_rhs: dimension mismatch");
  Matrix out = Complex(0, -1) * (spec.H * rho - rho * spec.H);
  for (const JumpTerm& j : spec.jumps) {
    if (j.op.rows() != n || j.op.cols() != n)
      throw numerical_error("gksl_rhs: jump operator dimension mismatch");
    const double g2 = j.gamma * j.gamma;
    if (g2 == 0.0) continue;
    const Matrix op2 = j.op * j.op;
    out += g2 * (j.op * rho * j.op - 0.5 * (op2 * rho + rho * op2));
  }
  return out;
}

namespace detail {

inline void check_density(const Matrix& rho, double t) {
  const std::string at = " at t = " + std::to_string(t);
  if (!rho.allFinite())
    throw numerical_error("master equation: non-finite density matrix" + at);
  const double trace_err = std::abs(rho.trace() - Complex(1.0, 0.0));
  if (trace_err > 1e-9)
    throw numerical_error("master equation: trace deviates from 1 by " +
                          std::to_string(trace_err) + at);
  if (hilbert::hermiticity_residual(rho) > 1e-10)
    throw numerical_error("master equation: Hermiticity loss" + at);
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -1e-8)
    throw numerical_error("master equation: negative eigenvalue " +
                          std::to_string(min_eig) + at);
}

}  // namespace detail

/// Fixed-step RK4 on gksl_rhs. Density-matrix sanity (trace, Hermiticity,
/// positivity) is checked at every sample point and never silently
/// repaired: a breach means the step size is wrong and must surface.
inline std::vector<Matrix> integrate_master(
    const GkslSpec& spec, const Matrix& rho0, double dt, double t_end,
    const std::vector<double>& sample_times) {
  const Eigen::Index n = spec.H.rows();
  if (rho0.rows() != n || rho0.cols() != n)
    throw config_error("master equation: initial state dimension mismatch");
  if (std::abs(rho0.trace() - Complex(1.0, 0.0)) > 1e-8 ||
      hilbert::hermiticity_residual(rho0) > 1e-8)
    throw config_error(
        "master equation: initial state is not a unit-trace Hermitian "
        "density matrix");

  const grid::TimeGrid g = grid::make_time_grid(dt, t_end, sample_times);
  std::vector<Matrix> out;
  out.reserve(g.sample_steps.size());

  Matrix rho = rho0;
  std::size_t next_sample = 0;
  auto record_at = [&](std::int64_t step) {
    while (next_sample < g.sample_steps.size() &&
           g.sample_steps[next_sample] == step) {
      detail::check_density(rho, g.sample_times[next_sample]);
      out.push_back(rho);
      ++next_sample;
    }
  };

  record_at(0);
  for (std::int64_t step = 0; step < g.n_steps; ++step) {
    const Matrix k1 = gksl_rhs(spec, rho);
    const Matrix k2 = gksl_rhs(spec, rho + (0.5 * dt) * k1);
    const Matrix k3 = gksl_rhs(spec, rho + (0.5 * dt) * k2);
    const Matrix k4 = gksl_rhs(spec, rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    record_at(step + 1);
  }
  return out;
}

/// Closed-form qubit dephasing (H = 0, O = sigma_z): diagonal untouched,
/// off-diagonal entries multiplied by e^{-2 gamma^2 t}.
inline Matrix analytic_dephasing(const Matrix& rho0, double gamma, double t) {
  if (rho0.rows() != 2 || rho0.cols() != 2)
    throw config_error("analytic_dephasing: qubit (2x2) input required");
  if (!(t >= 0.0)) throw config_error("analytic_dephasing: t must be >= 0");
  Matrix rho = rho0;
  const double decay = std::exp(-2.0 * gamma * gamma * t);
  rho(0, 1) *= decay;
  rho(1, 0) *= decay;
  return rho;
}

/// tr(rho^2); equals 1 exactly on pure states.
inline double purity(const Matrix& rho) { return (rho * rho).trace().real(); }

}  // namespace qsp::lindblad

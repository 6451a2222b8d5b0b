#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "qsp/hilbert.hpp"
#include "qsp/models.hpp"

// Independent reference implementations used only by the tests. Everything
// here is deliberately computed by a different route than the library under
// test: eigensolve-based matrix exponentials, quadrature instead of Monte
// Carlo, brute-force loops instead of vectorized identities.

namespace oracles {

using qsp::hilbert::Complex;
using qsp::hilbert::Matrix;
using qsp::hilbert::Vector;

// --- matrix functions ------------------------------------------------------

/// exp(i s H) for Hermitian H, via the spectral decomposition.
inline Matrix expi_hermitian(const Matrix& H, double s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  const auto& lam = es.eigenvalues();
  const Matrix& V = es.eigenvectors();
  Matrix D = Matrix::Zero(H.rows(), H.cols());
  for (Eigen::Index k = 0; k < lam.size(); ++k)
    D(k, k) = std::exp(Complex(0.0, s * lam[k]));
  return V * D * V.adjoint();
}

/// exp(s H) for Hermitian H.
inline Matrix exp_hermitian(const Matrix& H, double s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  const auto& lam = es.eigenvalues();
  const Matrix& V = es.eigenvectors();
  Matrix D = Matrix::Zero(H.rows(), H.cols());
  for (Eigen::Index k = 0; k < lam.size(); ++k)
    D(k, k) = std::exp(s * lam[k]);
  return V * D * V.adjoint();
}

// --- Gauss-Hermite quadrature ----------------------------------------------

struct Quadrature {
  std::vector<double> nodes;    // roots of the (physicists') Hermite poly
  std::vector<double> weights;  // sum(weights) = sqrt(pi)
};

/// Nodes and weights via the Golub-Welsch symmetric tridiagonal eigensolve
/// (off-diagonal entries sqrt(k/2)).
inline Quadrature gauss_hermite(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(k / 2.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  const double sqrt_pi = std::sqrt(std::acos(-1.0));
  for (int k = 0; k < n; ++k) {
    q.nodes[k] = es.eigenvalues()[k];
    const double v0 = es.eigenvectors()(0, k);
    q.weights[k] = sqrt_pi * v0 * v0;
  }
  return q;
}

/// E[f(Z)] for Z ~ Normal(0, variance), by Gauss-Hermite quadrature.
inline double gaussian_mean(const std::function<double(double)>& f,
                            double variance, int n_nodes = 21) {
  const Quadrature q = gauss_hermite(n_nodes);
  const double scale = std::sqrt(2.0 * variance);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::acos(-1.0));
  double acc = 0.0;
  for (int k = 0; k < n_nodes; ++k)
    acc += q.weights[k] * f(scale * q.nodes[k]);
  return inv_sqrt_pi * acc;
}

// --- random model generators ------------------------------------------------

inline Complex random_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  return {n01(rng), n01(rng)};
}

inline Matrix random_matrix(Eigen::Index n, std::mt19937_64& rng) {
  Matrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = random_complex(rng);
  return m;
}

inline Matrix random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
  const Matrix m = random_matrix(n, rng);
  return 0.5 * (m + m.adjoint());
}

inline Vector random_unit_state(Eigen::Index n, std::mt19937_64& rng) {
  Vector v(n);
  for (Eigen::Index k = 0; k < n; ++k) v[k] = random_complex(rng);
  return v / v.norm();
}

/// Random unitary from the QR decomposition of a complex Ginibre matrix.
inline Matrix random_unitary(Eigen::Index n, std::mt19937_64& rng) {
  const Matrix m = random_matrix(n, rng);
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix Q = qr.householderQ();
  // Fix the phase convention so Q is haar-ish; irrelevant for the tests,
  // but keeps repeated draws well spread.
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex d = R(k, k);
    const double a = std::abs(d);
    if (a > 0.0) Q.col(k) *= d / a;
  }
  return Q;
}

/// A family of mutually commuting Hermitian operators O_k = U D_k U^dagger
/// with a shared random eigenbasis and independent real spectra.
inline std::vector<Matrix> random_commuting_family(Eigen::Index n,
                                                   std::size_t count,
                                                   std::mt19937_64& rng) {
  const Matrix U = random_unitary(n, rng);
  std::normal_distribution<double> n01;
  std::vector<Matrix> ops;
  for (std::size_t k = 0; k < count; ++k) {
    Matrix D = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) D(j, j) = n01(rng);
    ops.push_back(U * D * U.adjoint());
  }
  return ops;
}

// --- finite-difference Taylor step for ODE oracles --------------------------

/// Second-order Taylor step psi + dt f(psi) + dt^2/2 (Df)(psi) f(psi) with a
/// central finite-difference directional derivative of f.
inline Vector taylor2_step(const std::function<Vector(const Vector&)>& f,
                           const Vector& psi, double dt, double fd_eps = 1e-6) {
  const Vector f0 = f(psi);
  const Vector jf =
      (f(psi + fd_eps * f0) - f(psi - fd_eps * f0)) / (2.0 * fd_eps);
  return psi + dt * f0 + 0.5 * dt * dt * jf;
}

// --- model builders ----------------------------------------------------------

/// Single-channel qubit dephasing model in the requested regime.
inline qsp::models::ModelSpec qubit_dephasing(qsp::models::Regime regime,
                                              double gamma,
                                              const Matrix& H = Matrix()) {
  qsp::models::ModelSpec m;
  m.H = H.size() ? H : Matrix::Zero(2, 2);
  m.regime = regime;
  qsp::models::NoiseChannel ch;
  ch.op = qsp::hilbert::pauli_z();
  ch.gamma = gamma;
  ch.A = gamma * gamma;
  m.channels.push_back(ch);
  return m;
}

/// Single-channel colored qubit dephasing with explicit (kind, tau, A, B).
inline qsp::models::ModelSpec qubit_colored(qsp::noise::NoiseKind kind,
                                            double tau, double A, double B,
                                            const Matrix& H = Matrix()) {
  qsp::models::ModelSpec m;
  m.H = H.size() ? H : Matrix::Zero(2, 2);
  m.regime = qsp::models::Regime::Colored;
  qsp::models::NoiseChannel ch;
  ch.op = qsp::hilbert::pauli_z();
  ch.kind = kind;
  ch.tau = tau;
  ch.A = A;
  ch.B = B;
  ch.gamma = std::sqrt(2.0 * qsp::noise::stationary_second_moment(kind) * B *
                       B * tau);
  m.channels.push_back(ch);
  return m;
}

}  // namespace oracles

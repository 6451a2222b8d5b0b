#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "qsp/common.hpp"

// Finite-dimensional complex linear algebra for pure states and Hermitian
// operators: expectations, centered operators, variances, density matrices,
// trace distance. Everything here is a pure function on small (N <= ~16)
// dense Eigen objects.

namespace qsp::hilbert {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kDefaultTol = 1e-10;

inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline Vector basis_state(Eigen::Index dim, Eigen::Index k) {
  if (dim < 2) throw config_error("Hilbert dimension must be >= 2");
  if (k < 0 || k >= dim) throw config_error("basis index out of range");
  Vector v = Vector::Zero(dim);
  v(k) = 1.0;
  return v;
}

/// (|0> + |1>)/sqrt(2), the running qubit example.
inline Vector plus_state() {
  Vector v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return v;
}

inline double hermiticity_residual(const Matrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& m, double tol = kDefaultTol) {
  return m.rows() == m.cols() && hermiticity_residual(m) <= tol;
}

inline void require_hermitian(const Matrix& m, const std::string& what,
                              double tol = kDefaultTol) {
  if (m.rows() != m.cols())
    throw numerical_error(what + ": matrix is not square");
  if (hermiticity_residual(m) > tol)
    throw numerical_error(what + ": Hermiticity violation above tolerance");
}

inline void require_same_dim(const Matrix& op, const Vector& psi,
                             const std::string& what) {
  if (op.rows() != op.cols() || op.rows() != psi.size())
    throw numerical_error(what + ": dimension mismatch");
}

inline double norm2(const Vector& psi) { return psi.squaredNorm(); }

inline Vector normalized(const Vector& psi) {
  double n = psi.norm();
  if (!(n > 0.0)) throw numerical_error("cannot normalize a zero state");
  return psi / n;
}

/// <psi|O|psi> for Hermitian O. The raw inner product's imaginary part is
/// checked against `tol` and then discarded.
inline double expectation(const Matrix& op, const Vector& psi,
                          double tol = kDefaultTol) {
  require_same_dim(op, psi, "expectation");
  require_hermitian(op, "expectation", tol);
  const Complex raw = psi.dot(op * psi);
  if (std::abs(raw.imag()) > tol * std::max(1.0, std::abs(raw.real())))
    throw numerical_error("expectation: imaginary part above tolerance");
  return raw.real();
}

/// (O - <O>) |psi>, the centered operator applied to the state.
inline Vector apply_delta(const Matrix& op, const Vector& psi,
                          double tol = kDefaultTol) {
  require_same_dim(op, psi, "apply_delta");
  require_hermitian(op, "apply_delta", tol);
  const Complex raw = psi.dot(op * psi);
  if (std::abs(raw.imag()) > tol * std::max(1.0, std::abs(raw.real())))
    throw numerical_error("apply_delta: imaginary part above tolerance");
  return op * psi - raw.real() * psi;
}

/// <O^2> - <O>^2. Computed from the two expectations, not from
/// ||apply_delta||^2, so the identity between the two routes stays testable.
inline double variance(const Matrix& op, const Vector& psi,
                       double tol = kDefaultTol) {
  require_same_dim(op, psi, "variance");
  require_hermitian(op, "variance", tol);
  const Vector op_psi = op * psi;
  const double mean = psi.dot(op_psi).real();
  const double second = op_psi.squaredNorm();  // <psi|O^2|psi> for Hermitian O
  return second - mean * mean;
}

/// True iff max-norm of every pairwise commutator is within tol.
inline bool check_commuting(const std::vector<Matrix>& ops,
                            double tol = kDefaultTol) {
  for (std::size_t i = 0; i < ops.size(); ++i)
    for (std::size_t j = i + 1; j < ops.size(); ++j) {
      if (ops[i].rows() != ops[j].rows())
        throw numerical_error("check_commuting: dimension mismatch");
      const Matrix comm = ops[i] * ops[j] - ops[j] * ops[i];
      if (comm.cwiseAbs().maxCoeff() > tol) return false;
    }
  return true;
}

inline double max_pairwise_commutator(const std::vector<Matrix>& ops) {
  double worst = 0.0;
  for (std::size_t i = 0; i < ops.size(); ++i)
    for (std::size_t j = i + 1; j < ops.size(); ++j) {
      const Matrix comm = ops[i] * ops[j] - ops[j] * ops[i];
      worst = std::max(worst, comm.cwiseAbs().maxCoeff());
    }
  return worst;
}

inline Matrix outer(const Vector& psi) { return psi * psi.adjoint(); }

/// Trace distance (1/2) sum |eig(a - b)| between two density matrices.
inline double trace_distance(const Matrix& a, const Matrix& b,
                             double tol = 1e-8) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw numerical_error("trace_distance: dimension mismatch");
  require_hermitian(a, "trace_distance", tol);
  require_hermitian(b, "trace_distance", tol);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a - b,
                                           Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Eigenvalues of a Hermitian matrix, ascending.
inline Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace qsp::hilbert

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qsp/common.hpp"
#include "qsp/ensemble.hpp"
#include "qsp/hilbert.hpp"
#include "qsp/lindblad.hpp"
#include "qsp/models.hpp"
#include "support/oracles.hpp"

using namespace qsp;
using hilbert::Matrix;
using hilbert::Vector;
using models::ModelSpec;
using models::Regime;

namespace {

const std::vector<ensemble::Observable>& qubit_observables() {
  static const std::vector<ensemble::Observable> obs = {
      {"sigma_x", hilbert::pauli_x()},
      {"sigma_y", hilbert::pauli_y()},
      {"sigma_z", hilbert::pauli_z()}};
  return obs;
}

}  // namespace

TEST_CASE("a single deterministic trajectory reproduces unitary evolution",
          "[ensemble]") {
  std::mt19937_64 rng(70);
  ModelSpec m;
  m.H = oracles::random_hermitian(2, rng);
  m.regime = Regime::StratonovichWhite;
  models::NoiseChannel ch;
  ch.op = hilbert::pauli_z();
  m.channels.push_back(ch);  // zero couplings: deterministic Heun path

  const Vector psi0 = oracles::random_unit_state(2, rng);
  sde::IntegrationConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;
  const auto result = ensemble::run(m, psi0, cfg, qubit_observables(), 1, 9);

  const Matrix U = oracles::expi_hermitian(m.H, -1.0);
  const Matrix want = hilbert::outer(Vector(U * psi0));
  CHECK(hilbert::trace_distance(result.mean_rho.back(), want) <= 1e-5);
  CHECK(result.norm2_stderr.back() == 0.0);  // single batch: no spread
}

TEST_CASE("ensemble means are deterministic and worker-count independent",
          "[ensemble]") {
  const ModelSpec m = oracles::qubit_dephasing(Regime::ItoWhite, 1.0);
  sde::IntegrationConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.1;
  cfg.sample_times = {0.05, 0.1};

  const auto a =
      ensemble::run(m, hilbert::plus_state(), cfg, qubit_observables(), 300,
                    1234, /*workers=*/1);
  const auto b =
      ensemble::run(m, hilbert::plus_state(), cfg, qubit_observables(), 300,
                    1234, /*workers=*/3);
  const auto c =
      ensemble::run(m, hilbert::plus_state(), cfg, qubit_observables(), 300,
                    1234, /*workers=*/7);

  for (std::size_t t = 0; t < a.times.size(); ++t) {
    CHECK((a.mean_rho[t] - b.mean_rho[t]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.mean_rho[t] - c.mean_rho[t]).cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t o = 0; o < 3; ++o) {
      CHECK(a.obs_mean[t][o] == b.obs_mean[t][o]);
      CHECK(a.obs_stderr[t][o] == b.obs_stderr[t][o]);
      CHECK(a.obs_mean[t][o] == c.obs_mean[t][o]);
    }
    CHECK(a.norm2_mean[t] == b.norm2_mean[t]);
  }

  const auto d =
      ensemble::run(m, hilbert::plus_state(), cfg, qubit_observables(), 300,
                    999, 1);
  CHECK(a.obs_mean.back()[0] != d.obs_mean.back()[0]);
}

TEST_CASE("mean density matrices are Hermitian, unit-trace, and positive",
          "[ensemble]") {
  const ModelSpec m = oracles::qubit_dephasing(Regime::ItoWhite, 1.0);
  sde::IntegrationConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  cfg.sample_times = {0.1, 0.3, 0.5};
  const auto result = ensemble::run(m, hilbert::plus_state(), cfg,
                                    qubit_observables(), 1000, 77);
  for (const Matrix& rho : result.mean_rho) {
    CHECK(hilbert::hermiticity_residual(rho) <= 1e-10);
    CHECK(std::abs(rho.trace().real() - 1.0) <= 1e-10);
    // Averages of outer products of unit vectors are positive
    // semidefinite up to roundoff - far inside the 3-standard-error
    // allowance for Monte Carlo estimates.
    CHECK(hilbert::hermitian_eigenvalues(rho).minCoeff() >= -1e-12);
  }
}

TEST_CASE("standard errors scale as one over the square root of the "
          "trajectory count", "[ensemble]") {
  const ModelSpec m = oracles::qubit_dephasing(Regime::ItoWhite, 1.0);
  sde::IntegrationConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.2;
  cfg.sample_times = {0.05, 0.1, 0.15, 0.2};

  std::vector<double> avg_se;
  for (std::size_t M : {1000u, 4000u, 16000u}) {
    const auto r = ensemble::run(m, hilbert::plus_state(), cfg,
                                 qubit_observables(), M, 31);
    double acc = 0.0;
    int n = 0;
    for (std::size_t t = 0; t < r.times.size(); ++t)
      for (std::size_t o = 0; o < 3; ++o)
        if (r.obs_stderr[t][o] > 0.0) {
          acc += r.obs_stderr[t][o];
          ++n;
        }
    avg_se.push_back(acc / n);
  }
  CHECK(avg_se[0] / avg_se[1] == Catch::Approx(2.0).margin(0.4));
  CHECK(avg_se[1] / avg_se[2] == Catch::Approx(2.0).margin(0.4));
}

TEST_CASE("ensemble argument checks", "[ensemble]") {
  const ModelSpec m = oracles::qubit_dephasing(Regime::ItoWhite, 1.0);
  sde::IntegrationConfig cfg;
  cfg.t_end = 0.01;
  CHECK_THROWS_AS(
      ensemble::run(m, hilbert::plus_state(), cfg, {}, 0, 1),
      config_error);

  std::vector<ensemble::Observable> wrong_dim = {
      {"big", Matrix::Identity(3, 3)}};
  CHECK_THROWS_AS(
      ensemble::run(m, hilbert::plus_state(), cfg, wrong_dim, 10, 1),
      config_error);

  Matrix skew = Matrix::Zero(2, 2);
  skew(0, 1) = 1.0;
  std::vector<ensemble::Observable> non_hermitian = {{"skew", skew}};
  CHECK_THROWS_AS(
      ensemble::run(m, hilbert::plus_state(), cfg, non_hermitian, 10, 1),
      config_error);
}

TEST_CASE("integrator failures surface with the trajectory index",
          "[ensemble]") {
  ModelSpec m = oracles::qubit_colored(noise::NoiseKind::SBM, 0.05, 1.0, 1.0);
  sde::IntegrationConfig cfg;
  cfg.dt = 0.01;  // violates dt <= tau/10
  cfg.t_end = 0.1;
  try {
    ensemble::run(m, hilbert::plus_state(), cfg, {}, 10, 1);
    FAIL("expected a numerical_error");
  } catch (const numerical_error& e) {
    CHECK(std::string(e.what()).find("trajectory") != std::string::npos);
  }
}

TEST_CASE("ensemble mean converges to the master equation", "[ensemble]") {
  const ModelSpec m = oracles::qubit_dephasing(Regime::ItoWhite, 1.0);
  sde::IntegrationConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  cfg.sample_times = {0.1, 0.25, 0.5};
  const auto result = ensemble::run(m, hilbert::plus_state(), cfg,
                                    qubit_observables(), 4000, 20240);

  lindblad::GkslSpec spec;
  spec.H = Matrix::Zero(2, 2);
  spec.jumps.push_back({hilbert::pauli_z(), 1.0});
  const auto cmp = ensemble::compare_to_master(
      result, spec, hilbert::outer(hilbert::plus_state()));
  for (std::size_t t = 0; t < cmp.times.size(); ++t) {
    CHECK(cmp.distance[t] <= 0.05);
    CHECK(cmp.stderr_[t] > 0.0);
  }
}

TEST_CASE("the norm-violating regime departs from the master equation",
          "[ensemble]") {
  const ModelSpec m = oracles::qubit_dephasing(Regime::NaiveItoWhite, 1.0);
  sde::IntegrationConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.5;
  const auto result = ensemble::run(m, hilbert::plus_state(), cfg,
                                    qubit_observables(), 2000, 11);

  lindblad::GkslSpec spec;
  spec.H = Matrix::Zero(2, 2);
  spec.jumps.push_back({hilbert::pauli_z(), 1.0});
  const auto cmp = ensemble::compare_to_master(
      result, spec, hilbert::outer(hilbert::plus_state()));
  CHECK(cmp.distance.back() > 3.0 * cmp.stderr_.back());
}

TEST_CASE("paired convention runs agree and degenerate pairs coincide",
          "[ensemble]") {
  // Zero-coupling pair: identical deterministic trajectories, distance 0.
  ModelSpec strat0 = oracles::qubit_dephasing(Regime::StratonovichWhite, 0.0);
  ModelSpec ito0 = oracles::qubit_dephasing(Regime::ItoWhite, 0.0);
  sde::IntegrationConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.1;
  const auto degenerate = ensemble::paired_convention_test(
      strat0, ito0, hilbert::plus_state(), cfg, qubit_observables(), 50, 8);
  for (std::size_t t = 0; t < degenerate.times.size(); ++t) {
    CHECK(degenerate.distance[t] <= 1e-12);
    for (double z : degenerate.z[t]) CHECK(z == 0.0);
  }

  // FD violation is rejected up front.
  ModelSpec bad = oracles::qubit_dephasing(Regime::StratonovichWhite, 1.0);
  bad.channels[0].A = 2.0;
  const ModelSpec good = oracles::qubit_dephasing(Regime::ItoWhite, 1.0);
  CHECK_THROWS_AS(
      ensemble::paired_convention_test(bad, good, hilbert::plus_state(), cfg,
                                       qubit_observables(), 50, 8),
      config_error);
}

TEST_CASE("paired distance standard errors require matching batch layouts",
          "[ensemble]") {
  const ModelSpec m = oracles::qubit_dephasing(Regime::ItoWhite, 1.0);
  sde::IntegrationConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.1;
  const auto a = ensemble::run(m, hilbert::plus_state(), cfg, {}, 100, 1);
  const auto b = ensemble::run(m, hilbert::plus_state(), cfg, {}, 100, 2);
  const auto se = ensemble::paired_distance_stderr(a, b);
  REQUIRE(se.size() == a.times.size());
  CHECK(se.back() >= 0.0);

  const auto c = ensemble::run(m, hilbert::plus_state(), cfg, {}, 60, 2);
  CHECK_THROWS_AS(ensemble::paired_distance_stderr(a, c), config_error);
}

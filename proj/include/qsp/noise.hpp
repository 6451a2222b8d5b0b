#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qsp/common.hpp"
#include "qsp/rng.hpp"

// Driving-noise processes: the Ornstein-Uhlenbeck process (Gaussian,
// stationary variance 1), spherical Brownian motion on [-1,1] (uniform
// stationary law), and plain white-noise increments. Also the analytic
// side: stationary moments and the backward generator acting on
// polynomials, used to validate the samplers against exact facts.

namespace qsp::noise {

enum class NoiseKind { OU, SBM, White };

inline std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::OU:
      return "ou";
    case NoiseKind::SBM:
      return "sbm";
    case NoiseKind::White:
      return "white";
  }
  return "?";
}

/// OU transition over dt, exact in distribution:
/// xi' = xi e^{-dt/tau} + sqrt(1 - e^{-2 dt/tau}) N(0,1).
/// Being exact, the noise path accuracy is independent of dt.
inline double ou_step(double xi, double dt, double tau, rng::RngStream& rng) {
  if (!(dt > 0.0)) throw config_error("ou_step: dt must be positive");
  if (!(tau > 0.0)) throw config_error("ou_step: tau must be positive");
  const double decay = std::exp(-dt / tau);
  return xi * decay + std::sqrt(1.0 - decay * decay) * rng.normal();
}

/// SBM step by Strang splitting of the Stratonovich form
///   dxi = -xi/(2 tau) dt + sqrt((1 - xi^2)/tau) o dW.
/// Both sub-flows are exact: the drift half-flow is xi -> xi e^{-dt/(4
/// tau)}, and the noise flow is xi -> sin(asin(xi) + sqrt(dt/tau) N) --
/// in the angle variable the Stratonovich noise acts additively, and the
/// sine's fold at +-pi/2 is precisely the mirror reflection at +-1. The
/// chain therefore stays inside [-1,1] by construction, uses one normal
/// draw per step, and carries only the O(dt^2) weak splitting error; a
/// plain Euler step with reflection leaves an O(dt) boundary-layer bias
/// in the stationary law that violates the desired moment accuracy.
inline double sbm_step(double xi, double dt, double tau, rng::RngStream& rng) {
  if (!(dt > 0.0)) throw config_error("sbm_step: dt must be positive");
  if (!(tau > 0.0)) throw config_error("sbm_step: tau must be positive");
  if (dt > tau / 10.0 + 1e-15 * tau)
    throw numerical_error("sbm_step: dt exceeds tau/10 resolution guard");
  if (std::abs(xi) > 1.0)
    throw numerical_error("sbm_step: state outside [-1,1]");
  const double half = std::exp(-0.25 * dt / tau);
  const double mid =
      std::sin(std::asin(xi * half) + std::sqrt(dt / tau) * rng.normal());
  return mid * half;
}

/// Brownian increment: N(0, dt).
inline double white_increment(double dt, rng::RngStream& rng) {
  if (!(dt > 0.0)) throw config_error("white_increment: dt must be positive");
  return std::sqrt(dt) * rng.normal();
}

/// E_infinity[xi^2] under the stationary law. Enters the effective
/// coupling D = 2 E[xi^2] B^2 tau, so it must be the analytic constant,
/// never a sampled estimate.
inline double stationary_second_moment(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::OU:
      return 1.0;
    case NoiseKind::SBM:
      return 1.0 / 3.0;
    case NoiseKind::White:
      throw config_error(
          "stationary_second_moment: undefined for white noise");
  }
  throw config_error("stationary_second_moment: unknown noise kind");
}

/// Analytic stationary moment E_infinity[xi^n].
/// OU: standard normal moments (n-1)!! for even n; SBM: uniform on [-1,1],
/// 1/(n+1) for even n. Odd moments vanish for both.
inline double stationary_moment(NoiseKind kind, int n) {
  if (n < 0) throw config_error("stationary_moment: negative order");
  if (n % 2 == 1) return 0.0;
  switch (kind) {
    case NoiseKind::OU: {
      double m = 1.0;
      for (int k = n - 1; k > 0; k -= 2) m *= k;
      return m;
    }
    case NoiseKind::SBM:
      return 1.0 / (n + 1);
    case NoiseKind::White:
      throw config_error("stationary_moment: undefined for white noise");
  }
  throw config_error("stationary_moment: unknown noise kind");
}

/// Draw from the stationary law: N(0,1) for OU, uniform on [-1,1] for SBM.
inline double sample_stationary(NoiseKind kind, rng::RngStream& rng) {
  switch (kind) {
    case NoiseKind::OU:
      return rng.normal();
    case NoiseKind::SBM:
      return rng.uniform_symmetric();
    case NoiseKind::White:
      throw config_error("sample_stationary: undefined for white noise");
  }
  throw config_error("sample_stationary: unknown noise kind");
}

/// Real polynomial in xi, coefficients ascending: c[0] + c[1] xi + ...
using Polynomial = std::vector<double>;

inline Polynomial poly_derivative(const Polynomial& p) {
  if (p.size() <= 1) return {};
  Polynomial d(p.size() - 1);
  for (std::size_t k = 1; k < p.size(); ++k)
    d[k - 1] = static_cast<double>(k) * p[k];
  return d;
}

inline double poly_eval(const Polynomial& p, double x) {
  double acc = 0.0;
  for (std::size_t k = p.size(); k-- > 0;) acc = acc * x + p[k];
  return acc;
}

inline void poly_accumulate(Polynomial& dst, const Polynomial& src,
                            double scale, std::size_t shift) {
  if (dst.size() < src.size() + shift) dst.resize(src.size() + shift, 0.0);
  for (std::size_t k = 0; k < src.size(); ++k) dst[k + shift] += scale * src[k];
}

inline void poly_trim(Polynomial& p) {
  while (!p.empty() && p.back() == 0.0) p.pop_back();
}

/// Backward generator acting on a polynomial:
///   (L p)(xi) = -xi p'(xi) + (g^2(xi)/2) p''(xi),
/// with g^2/2 = 1 for OU and (1 - xi^2)/2 for SBM. Exact coefficient
/// arithmetic; degree capped at 8 to keep this in its validated range.
inline Polynomial apply_generator(NoiseKind kind, const Polynomial& poly) {
  if (kind == NoiseKind::White)
    throw config_error("apply_generator: undefined for white noise");
  if (poly.size() > 9)
    throw config_error("apply_generator: polynomial degree above 8");
  const Polynomial d1 = poly_derivative(poly);
  const Polynomial d2 = poly_derivative(d1);
  Polynomial out;
  poly_accumulate(out, d1, -1.0, 1);  // -xi p'
  if (kind == NoiseKind::OU) {
    poly_accumulate(out, d2, 1.0, 0);  // g^2/2 = 1
  } else {
    poly_accumulate(out, d2, 0.5, 0);   // (1 - xi^2)/2 p''
    poly_accumulate(out, d2, -0.5, 2);
  }
  poly_trim(out);
  return out;
}

/// E_infinity[p(xi)] by analytic moments, exact for polynomial input.
inline double stationary_polynomial_mean(NoiseKind kind,
                                         const Polynomial& poly) {
  double acc = 0.0;
  for (std::size_t k = 0; k < poly.size(); ++k)
    if (poly[k] != 0.0)
      acc += poly[k] * stationary_moment(kind, static_cast<int>(k));
  return acc;
}

}  // namespace qsp::noise

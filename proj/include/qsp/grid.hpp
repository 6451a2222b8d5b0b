#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qsp/common.hpp"

// Uniform time grid shared by the trajectory and master-equation
// integrators. t_end must be a whole number of steps; requested sample
// times are snapped to the nearest grid point, and the snapped values are
// what integrators report back.

namespace qsp::grid {

struct TimeGrid {
  double dt = 0.0;
  std::int64_t n_steps = 0;
  std::vector<std::int64_t> sample_steps;  // ascending, one per requested time
  std::vector<double> sample_times;        // snapped: step * dt
};

inline TimeGrid make_time_grid(double dt, double t_end,
                               std::vector<double> sample_times) {
  if (!(dt > 0.0)) throw config_error("time grid: dt must be positive");
  if (!(t_end >= 0.0)) throw config_error("time grid: t_end must be >= 0");

  TimeGrid g;
  g.dt = dt;
  if (t_end == 0.0) {
    g.n_steps = 0;
  } else {
    g.n_steps = std::llround(t_end / dt);
    if (g.n_steps < 1 || std::abs(g.n_steps * dt - t_end) > 1e-6 * dt)
      throw config_error(
          "time grid: t_end must be a whole number of dt steps");
  }

  if (sample_times.empty()) sample_times.push_back(t_end);
  std::int64_t prev = -1;
  for (double t : sample_times) {
    if (t < -1e-12 || t > t_end + 1e-6 * dt)
      throw config_error("time grid: sample time " + std::to_string(t) +
                         " outside [0, t_end]");
    std::int64_t s = std::llround(t / dt);
    if (s < 0) s = 0;
    if (s > g.n_steps) s = g.n_steps;
    if (s < prev)
      throw config_error("time grid: sample times must be sorted ascending");
    prev = s;
    g.sample_steps.push_back(s);
    g.sample_times.push_back(static_cast<double>(s) * dt);
  }
  return g;
}

}  // namespace qsp::grid

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fastmc/error.hpp"
#include "fastmc/sde_sim.hpp"

namespace fastmc {

/// Random response function: maps one disturbance path (layout [(k * m) + i]
/// on `grid`) to a scalar. Anything satisfying this contract can stand in for
/// the built-in frequency model; the engine only sees the returned scalar.
using ResponseFunction = std::function<double(std::span<const double> path, const TimeGrid& grid)>;

/// Aggregate single-area frequency model with a first-order governor:
///   2H dw/dt     = P_wind(t) - P_loss(t) + P_gov - D w
///   Tg dP_gov/dt = -P_gov - w / R
/// All quantities in per unit of Pbase; w is the per-unit frequency deviation.
struct FrequencyModel {
  double inertia = 5.0;        // H, s
  double damping = 1.0;        // D
  double droop = 0.05;         // R
  double governor_time = 0.5;  // Tg, s
  double base_power = 10000.0; // MW
  double wind_base = 3000.0;   // MW
  double schedule = 0.0;       // scheduled wind output, pu of wind_base

  void validate() const {
    if (!(inertia > 0.0)) throw InputError("frequency model: H must be positive");
    if (!(governor_time > 0.0)) throw InputError("frequency model: Tg must be positive");
    if (!(droop > 0.0)) throw InputError("frequency model: R must be positive");
    if (!(damping >= 0.0)) throw InputError("frequency model: D must be non-negative");
    if (!(base_power > 0.0)) throw InputError("frequency model: Pbase must be positive");
    if (!std::isfinite(wind_base) || !std::isfinite(schedule)) throw InputError("frequency model: non-finite wind data");
  }
};

/// Step loss of generation (pu of Pbase) from `time` onward.
struct TripEvent {
  double time = 1.0;
  double lost_power = 0.08;
};

struct ResponseTrajectory {
  TimeGrid grid;
  std::vector<double> freq_deviation;
};

/// Integrates the frequency model by RK4 on the grid, starting from zero
/// deviation. The scalar disturbance is linearly interpolated at half steps.
/// The lost power is held constant over each step and switches on for the
/// first step starting at or after the trip time, so the jump never lands
/// inside an RK4 step.
inline ResponseTrajectory simulate_response(const FrequencyModel& model, std::span<const double> disturbance,
                                            const TripEvent& event, const TimeGrid& grid) {
  model.validate();
  if (disturbance.size() != grid.points()) {
    throw InputError("simulate_response: disturbance has " + std::to_string(disturbance.size()) +
                     " samples, grid has " + std::to_string(grid.points()));
  }
  if (!(event.time >= 0.0)) throw InputError("simulate_response: trip time must be >= 0");

  const double wind_scale = model.wind_base / model.base_power;
  const double two_h = 2.0 * model.inertia;
  auto deriv = [&](double p_loss, double wind, double w, double gov, double& dw, double& dgov) {
    const double p_wind = (wind - model.schedule) * wind_scale;
    dw = (p_wind - p_loss + gov - model.damping * w) / two_h;
    dgov = (-gov - w / model.droop) / model.governor_time;
  };

  ResponseTrajectory out{grid, std::vector<double>(grid.points(), 0.0)};
  double w = 0.0, gov = 0.0;
  const double h = grid.step();
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double p_loss = grid.time(k) >= event.time - 1e-9 * h ? event.lost_power : 0.0;
    const double d0 = disturbance[k];
    const double d1 = disturbance[k + 1];
    const double dm = 0.5 * (d0 + d1);
    double a1, b1, a2, b2, a3, b3, a4, b4;
    deriv(p_loss, d0, w, gov, a1, b1);
    deriv(p_loss, dm, w + 0.5 * h * a1, gov + 0.5 * h * b1, a2, b2);
    deriv(p_loss, dm, w + 0.5 * h * a2, gov + 0.5 * h * b2, a3, b3);
    deriv(p_loss, d1, w + h * a3, gov + h * b3, a4, b4);
    w += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    gov += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    if (!std::isfinite(w) || !std::isfinite(gov)) {
      throw NumericalError("simulate_response: non-finite state at step " + std::to_string(k + 1));
    }
    out.freq_deviation[k + 1] = w;
  }
  return out;
}

/// Root mean square of the deviation over the grid points inside
/// [t_a, t_b], with trapezoidal weights.
inline double rrf_rms(const ResponseTrajectory& traj, double t_a, double t_b) {
  const TimeGrid& grid = traj.grid;
  const double slack = 1e-9 * grid.step();
  if (!(t_a <= t_b)) throw InputError("rrf_rms: window start exceeds end");
  if (t_a < grid.t0() - slack || t_b > grid.horizon() + slack) {
    throw InputError("rrf_rms: window lies outside the trajectory span");
  }
  std::size_t first = grid.points(), last = 0;
  for (std::size_t k = 0; k < grid.points(); ++k) {
    const double t = grid.time(k);
    if (t >= t_a - slack && t <= t_b + slack) {
      first = std::min(first, k);
      last = k;
    }
  }
  if (first == grid.points()) throw InputError("rrf_rms: window contains no grid points");
  const auto& d = traj.freq_deviation;
  if (first == last) return std::abs(d[first]);
  double integral = 0.0;
  for (std::size_t k = first; k < last; ++k) integral += 0.5 * (d[k] * d[k] + d[k + 1] * d[k + 1]);
  return std::sqrt(integral / static_cast<double>(last - first));
}

/// Built-in response: RMS frequency deviation over a window after a trip,
/// driven by component `component` of the disturbance path.
struct FrequencyRrf {
  FrequencyModel model;
  TripEvent event;
  double window_start = 0.0;
  double window_end = 60.0;
  std::size_t component = 0;

  double operator()(std::span<const double> path, const TimeGrid& grid) const {
    const std::size_t m = path.size() / grid.points();
    if (m == 0 || path.size() != m * grid.points() || component >= m) {
      throw InputError("frequency rrf: path layout does not match the grid");
    }
    std::vector<double> wind(grid.points());
    for (std::size_t k = 0; k < grid.points(); ++k) wind[k] = path[k * m + component];
    return rrf_rms(simulate_response(model, wind, event, grid), window_start, window_end);
  }
};

/// Value of one component at the final grid point.
struct EndpointRrf {
  std::size_t component = 0;

  double operator()(std::span<const double> path, const TimeGrid& grid) const {
    const std::size_t m = path.size() / grid.points();
    if (m == 0 || component >= m) throw InputError("endpoint rrf: path layout does not match the grid");
    return path[(grid.points() - 1) * m + component];
  }
};

}  // namespace fastmc

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fastmc/error.hpp"
#include "fastmc/ito_model.hpp"
#include "fastmc/parallel.hpp"
#include "fastmc/rng.hpp"

namespace fastmc {

/// Uniform time grid t_k = t0 + k h, k = 0..steps.
class TimeGrid {
 public:
  TimeGrid(double t0, double horizon, double step) : t0_(t0), horizon_(horizon), step_(step) {
    if (!(std::isfinite(t0) && std::isfinite(horizon) && std::isfinite(step))) {
      throw InputError("time grid: values must be finite");
    }
    if (!(step > 0.0)) throw InputError("time grid: step must be positive");
    if (!(horizon > t0)) throw InputError("time grid: horizon must exceed t0");
    const double ratio = (horizon - t0) / step;
    const double rounded = std::round(ratio);
    const double ulp = std::nextafter(rounded, std::numeric_limits<double>::infinity()) - rounded;
    if (std::abs(ratio - rounded) > 4.0 * ulp || rounded < 1.0) {
      throw InputError("time grid: (T - t0)/h = " + std::to_string(ratio) + " is not a positive integer");
    }
    steps_ = static_cast<std::size_t>(rounded);
  }

  double t0() const { return t0_; }
  double horizon() const { return horizon_; }
  double step() const { return step_; }
  double duration() const { return horizon_ - t0_; }
  std::size_t steps() const { return steps_; }
  std::size_t points() const { return steps_ + 1; }
  double time(std::size_t k) const { return k == steps_ ? horizon_ : t0_ + static_cast<double>(k) * step_; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double t0_;
  double horizon_;
  double step_;
  std::size_t steps_ = 1;
};

enum class PathOrigin { euler_maruyama, spectral };

inline const char* origin_name(PathOrigin origin) {
  return origin == PathOrigin::spectral ? "spectral" : "euler_maruyama";
}

/// Ensemble of discretized trajectories. values[(p * points + k) * dim + i].
struct PathSet {
  TimeGrid grid;
  std::size_t dim = 1;
  std::size_t count = 0;
  PathOrigin origin = PathOrigin::euler_maruyama;
  std::vector<double> values;

  std::span<const double> path(std::size_t p) const {
    const std::size_t stride = grid.points() * dim;
    return std::span<const double>(values).subspan(p * stride, stride);
  }
  double value(std::size_t p, std::size_t k, std::size_t i) const {
    return values[(p * grid.points() + k) * dim + i];
  }
};

namespace detail {

inline void check_finite_state(std::span<const double> xi, const std::string& where) {
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (!std::isfinite(xi[i])) {
      throw NumericalError(where + ": non-finite value in component " + std::to_string(i));
    }
  }
}

/// In-place EM update; scratch must hold m + m*n doubles.
inline void em_update(const ItoModel& model, std::span<double> xi, double h, std::span<const double> zeta,
                      std::span<double> scratch) {
  const std::size_t m = model.dim();
  const std::size_t n = model.noise_dim();
  auto mu = scratch.first(m);
  auto sigma = scratch.subspan(m, m * n);
  model.drift_into(xi, mu);
  model.diffusion_into(xi, sigma);
  const double sqrt_h = std::sqrt(h);
  for (std::size_t i = 0; i < m; ++i) {
    double noise = 0.0;
    for (std::size_t k = 0; k < n; ++k) noise += sigma[i * n + k] * zeta[k];
    xi[i] += h * mu[i] + sqrt_h * noise;
  }
}

}  // namespace detail

/// One Euler-Maruyama step xi + h mu(xi) + sigma(xi) sqrt(h) zeta, followed by
/// the model's boundary policy.
inline std::vector<double> em_step(const ItoModel& model, std::span<const double> xi, double /*t*/, double h,
                                   std::span<const double> zeta) {
  if (!(h > 0.0)) throw InputError("em_step: step must be positive");
  if (xi.size() != model.dim()) throw InputError("em_step: state dimension mismatch");
  if (zeta.size() != model.noise_dim()) throw InputError("em_step: noise dimension mismatch");
  std::vector<double> next(xi.begin(), xi.end());
  std::vector<double> scratch(model.dim() * (1 + model.noise_dim()));
  detail::em_update(model, next, h, zeta, scratch);
  detail::check_finite_state(next, "em_step");
  model.apply_boundary(next);
  return next;
}

/// Path `index` of the EM ensemble keyed by `seed`: a pure function of
/// (model, grid, xi0, seed, index). Layout [(k * m) + i].
inline std::vector<double> simulate_em_path(const ItoModel& model, const TimeGrid& grid, std::span<const double> xi0,
                                            std::uint64_t seed, std::size_t index) {
  const std::size_t m = model.dim();
  const std::size_t n = model.noise_dim();
  if (xi0.size() != m) throw InputError("simulate_em_paths: initial state dimension mismatch");
  detail::check_finite_state(xi0, "simulate_em_paths: initial state");

  std::vector<double> out(grid.points() * m);
  std::vector<double> state(xi0.begin(), xi0.end());
  std::vector<double> zeta(n);
  std::vector<double> scratch(m * (1 + n));
  std::copy(state.begin(), state.end(), out.begin());
  const double h = grid.step();
  for (std::size_t k = 1; k <= grid.steps(); ++k) {
    CounterStream stream(seed, StreamTag::euler_maruyama, static_cast<std::uint32_t>(index),
                         static_cast<std::uint32_t>(k));
    for (auto& z : zeta) z = stream.normal();
    detail::em_update(model, state, h, zeta, scratch);
    for (std::size_t i = 0; i < m; ++i) {
      if (!std::isfinite(state[i])) {
        throw NumericalError("simulate_em_paths: non-finite value at path " + std::to_string(index) + ", step " +
                             std::to_string(k) + ", component " + std::to_string(i));
      }
    }
    model.apply_boundary(state);
    std::copy(state.begin(), state.end(), out.begin() + static_cast<std::ptrdiff_t>(k * m));
  }
  return out;
}

inline PathSet simulate_em_paths(const ItoModel& model, const TimeGrid& grid, std::span<const double> xi0,
                                 std::size_t n_paths, std::uint64_t seed, std::size_t workers = 1) {
  if (n_paths < 1) throw InputError("simulate_em_paths: n_paths must be >= 1");
  PathSet set{grid, model.dim(), n_paths, PathOrigin::euler_maruyama, {}};
  const std::size_t stride = grid.points() * model.dim();
  set.values.resize(n_paths * stride);
  parallel_for(n_paths, workers, [&](std::size_t p) {
    const auto path = simulate_em_path(model, grid, xi0, seed, p);
    std::copy(path.begin(), path.end(), set.values.begin() + static_cast<std::ptrdiff_t>(p * stride));
  });
  return set;
}

}  // namespace fastmc

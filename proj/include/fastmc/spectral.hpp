#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fastmc/error.hpp"
#include "fastmc/ito_model.hpp"
#include "fastmc/sde_sim.hpp"

namespace fastmc {

/// Truncated Karhunen-Loeve expansion of an n-dimensional Wiener process on [0, T].
/// Coefficients are flattened row-major: index i * K + j for Wiener component i
/// and basis function j + 1.
struct KleConfig {
  std::size_t order = 6;  // K
  double horizon = 1.0;   // T
  std::size_t noise_dim = 1;

  std::size_t coefficient_count() const { return noise_dim * order; }

  void validate() const {
    if (order < 1) throw InputError("kle config: truncation order K must be >= 1");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InputError("kle config: horizon T must be positive");
    if (noise_dim < 1) throw InputError("kle config: Wiener dimension must be >= 1");
  }
};

namespace detail {

inline double kle_basis_unchecked(std::size_t j, double t, double horizon) {
  if (j == 1) return std::sqrt(1.0 / horizon);
  return std::sqrt(2.0 / horizon) * std::cos(static_cast<double>(j - 1) * std::numbers::pi * t / horizon);
}

}  // namespace detail

/// Orthonormal cosine basis on [0, T]: sqrt(1/T) for j = 1,
/// sqrt(2/T) cos((j-1) pi t / T) for j >= 2.
inline double kle_basis(std::size_t j, double t, double horizon) {
  if (j < 1) throw InputError("kle_basis: index j must be >= 1");
  if (!(horizon > 0.0)) throw InputError("kle_basis: horizon must be positive");
  if (!(t >= 0.0 && t <= horizon)) throw InputError("kle_basis: t outside [0, T]");
  return detail::kle_basis_unchecked(j, t, horizon);
}

/// White-noise surrogate sum_j zeta_j m_j(t) for one Wiener component.
inline double reconstruct_wiener_rate(std::span<const double> zeta_row, double t, const KleConfig& cfg) {
  cfg.validate();
  if (zeta_row.size() != cfg.order) {
    throw InputError("reconstruct_wiener_rate: expected " + std::to_string(cfg.order) + " coefficients, got " +
                     std::to_string(zeta_row.size()));
  }
  if (!(t >= 0.0 && t <= cfg.horizon)) throw InputError("reconstruct_wiener_rate: t outside [0, T]");
  double sum = 0.0;
  for (std::size_t j = 0; j < cfg.order; ++j) sum += zeta_row[j] * detail::kle_basis_unchecked(j + 1, t, cfg.horizon);
  return sum;
}

/// Reconstructed Wiener path W(t_k), t_k = k T / n_steps, from closed-form
/// antiderivatives of the basis.
inline std::vector<double> wiener_bridge_check(std::span<const double> zeta_row, const KleConfig& cfg,
                                               std::size_t n_steps) {
  cfg.validate();
  if (n_steps < 1) throw InputError("wiener_bridge_check: n_steps must be >= 1");
  if (zeta_row.size() != cfg.order) throw InputError("wiener_bridge_check: coefficient count mismatch");
  const double T = cfg.horizon;
  std::vector<double> w(n_steps + 1, 0.0);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double t = T * static_cast<double>(k) / static_cast<double>(n_steps);
    double sum = zeta_row[0] * t / std::sqrt(T);
    for (std::size_t j = 2; j <= cfg.order; ++j) {
      const double freq = static_cast<double>(j - 1) * std::numbers::pi / T;
      sum += zeta_row[j - 1] * std::sqrt(2.0 / T) * std::sin(freq * t) / freq;
    }
    w[k] = sum;
  }
  return w;
}

struct SpectralOptions {
  /// Integrate the Stratonovich-corrected drift so that, as K grows, paths
  /// converge to the Ito process rather than to its Stratonovich counterpart.
  /// Has no effect for additive noise.
  bool ito_correction = true;
};

/// Integrates d xi/dt = mu(xi) + sigma(xi) r(t), r_i(t) = sum_j zeta_{i,j} m_j(t - t0),
/// by classical RK4 on the grid. Returns [(k * m) + i].
inline std::vector<double> spectral_path(const ItoModel& model, std::span<const double> zeta, const TimeGrid& grid,
                                         const KleConfig& cfg, std::span<const double> xi0,
                                         const SpectralOptions& options = {}) {
  cfg.validate();
  const std::size_t m = model.dim();
  const std::size_t n = model.noise_dim();
  const std::size_t K = cfg.order;
  if (cfg.noise_dim != n) throw InputError("spectral_path: KLE Wiener dimension differs from the model's");
  if (zeta.size() != n * K) {
    throw InputError("spectral_path: expected " + std::to_string(n * K) + " coefficients, got " +
                     std::to_string(zeta.size()));
  }
  if (std::abs(grid.duration() - cfg.horizon) > 1e-12 * std::max(1.0, cfg.horizon)) {
    throw InputError("spectral_path: grid duration differs from the KLE horizon");
  }
  if (xi0.size() != m) throw InputError("spectral_path: initial state dimension mismatch");
  for (double z : zeta) {
    if (!std::isfinite(z)) throw InputError("spectral_path: non-finite coefficient");
  }
  detail::check_finite_state(xi0, "spectral_path: initial state");

  const bool correct = options.ito_correction && !model.additive_noise();
  const double T = cfg.horizon;
  auto rate_at = [&](double tau, std::span<double> out) {
    tau = std::min(std::max(tau, 0.0), T);
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < K; ++j) sum += zeta[i * K + j] * detail::kle_basis_unchecked(j + 1, tau, T);
      out[i] = sum;
    }
  };

  std::vector<double> mu(m), sigma(m * n), corr(m);
  auto rhs = [&](std::span<const double> x, std::span<const double> rate, std::span<double> out) {
    model.drift_into(x, mu);
    model.diffusion_into(x, sigma);
    if (correct) model.stratonovich_correction_into(x, sigma, corr);
    for (std::size_t i = 0; i < m; ++i) {
      double v = mu[i] - (correct ? corr[i] : 0.0);
      for (std::size_t k = 0; k < n; ++k) v += sigma[i * n + k] * rate[k];
      out[i] = v;
    }
  };

  std::vector<double> out(grid.points() * m);
  std::vector<double> x(xi0.begin(), xi0.end()), tmp(m), k1(m), k2(m), k3(m), k4(m);
  std::vector<double> r0(n), rmid(n), r1(n);
  std::copy(x.begin(), x.end(), out.begin());
  const double h = grid.step();
  rate_at(0.0, r0);
  for (std::size_t s = 0; s < grid.steps(); ++s) {
    const double tau = static_cast<double>(s) * h;
    rate_at(tau + 0.5 * h, rmid);
    rate_at(s + 1 == grid.steps() ? T : tau + h, r1);
    rhs(x, r0, k1);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    rhs(tmp, rmid, k2);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    rhs(tmp, rmid, k3);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = x[i] + h * k3[i];
    rhs(tmp, r1, k4);
    for (std::size_t i = 0; i < m; ++i) {
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(x[i])) {
        throw NumericalError("spectral_path: non-finite state at step " + std::to_string(s + 1) + ", component " +
                             std::to_string(i));
      }
    }
    model.apply_boundary(x);
    std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>((s + 1) * m));
    r0.swap(r1);
  }
  return out;
}

}  // namespace fastmc

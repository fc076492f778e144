#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fastmc/error.hpp"
#include "fastmc/polynomial.hpp"

namespace fastmc {

/// Per-component policy that keeps simulated states inside a domain.
struct Boundary {
  enum class Kind { none, reflect, clamp };

  Kind kind = Kind::none;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  static Boundary none() { return {}; }
  static Boundary reflect(double lo, double hi) { return checked({Kind::reflect, lo, hi}); }
  static Boundary clamp(double lo, double hi) { return checked({Kind::clamp, lo, hi}); }

  double apply(double x) const {
    switch (kind) {
      case Kind::none:
        return x;
      case Kind::clamp:
        return std::min(std::max(x, lo), hi);
      case Kind::reflect: {
        // Fold repeatedly; a finite interval needs at most a few folds for sane steps.
        for (int i = 0; i < 64 && (x < lo || x > hi); ++i) {
          if (x < lo) x = 2.0 * lo - x;
          if (x > hi) x = 2.0 * hi - x;
        }
        return std::min(std::max(x, lo), hi);
      }
    }
    return x;
  }

 private:
  static Boundary checked(Boundary b) {
    if (std::isnan(b.lo) || std::isnan(b.hi) || !(b.lo < b.hi)) {
      throw InputError("boundary interval must be nonempty (lo < hi)");
    }
    return b;
  }
};

/// m-dimensional Ito process d xi = mu(xi) dt + sigma(xi) dW with an
/// n-dimensional standard Wiener process W.
class ItoModel {
 public:
  ItoModel(PolynomialMap drift, PolynomialMap diffusion, std::vector<Boundary> boundary = {})
      : drift_(std::move(drift)), diffusion_(std::move(diffusion)), boundary_(std::move(boundary)) {
    const std::size_t m = drift_.input_dim();
    if (drift_.rows() != m || drift_.cols() != 1) {
      throw InputError("ito model: drift must map R^m to R^m (output " + std::to_string(drift_.rows()) +
                       "x" + std::to_string(drift_.cols()) + ", m=" + std::to_string(m) + ")");
    }
    if (diffusion_.input_dim() != m || diffusion_.rows() != m) {
      throw InputError("ito model: diffusion must map R^m to R^(m x n)");
    }
    if (boundary_.empty()) boundary_.assign(m, Boundary::none());
    if (boundary_.size() != m) throw InputError("ito model: one boundary policy per component required");
  }

  std::size_t dim() const { return drift_.input_dim(); }
  std::size_t noise_dim() const { return diffusion_.cols(); }
  const PolynomialMap& drift() const { return drift_; }
  const PolynomialMap& diffusion() const { return diffusion_; }
  const std::vector<Boundary>& boundary() const { return boundary_; }

  void drift_into(std::span<const double> xi, std::span<double> out) const { drift_.evaluate(xi, out); }
  void diffusion_into(std::span<const double> xi, std::span<double> out) const { diffusion_.evaluate(xi, out); }

  void apply_boundary(std::span<double> xi) const {
    for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = boundary_[i].apply(xi[i]);
  }

  /// True when every diffusion entry is a constant, i.e. the noise is additive.
  bool additive_noise() const {
    for (const auto& entry : diffusion_.entries()) {
      if (!entry.abs_terms.empty()) return false;
      for (const auto& mono : entry.monomials) {
        for (int e : mono.exponents) {
          if (e != 0) return false;
        }
      }
    }
    return true;
  }

  /// Drift correction c_i = 1/2 sum_k sum_j sigma_jk d_j sigma_ik relating the
  /// Ito and Stratonovich forms of the same process.
  void stratonovich_correction_into(std::span<const double> xi, std::span<const double> sigma,
                                    std::span<double> out) const {
    const std::size_t m = dim();
    const std::size_t n = noise_dim();
    for (std::size_t i = 0; i < m; ++i) {
      double c = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < m; ++j) {
          const double s = sigma[j * n + k];
          if (s != 0.0) c += s * diffusion_.partial(i, k, xi, j);
        }
      }
      out[i] = 0.5 * c;
    }
  }

 private:
  PolynomialMap drift_;
  PolynomialMap diffusion_;
  std::vector<Boundary> boundary_;
};

inline std::vector<double> eval_drift(const ItoModel& model, std::span<const double> xi, double /*t*/) {
  if (xi.size() != model.dim()) {
    throw InputError("eval_drift: state has dimension " + std::to_string(xi.size()) + ", model has " +
                     std::to_string(model.dim()));
  }
  std::vector<double> out(model.dim());
  model.drift_into(xi, out);
  return out;
}

/// Row-major m x n diffusion matrix. The sign is not normalized.
inline std::vector<double> eval_diffusion(const ItoModel& model, std::span<const double> xi, double /*t*/) {
  if (xi.size() != model.dim()) {
    throw InputError("eval_diffusion: state has dimension " + std::to_string(xi.size()) + ", model has " +
                     std::to_string(model.dim()));
  }
  std::vector<double> out(model.dim() * model.noise_dim());
  model.diffusion_into(xi, out);
  return out;
}

// ---------------------------------------------------------------------------
// One-dimensional presets with known stationary laws.

struct DistributionPreset {
  enum class Kind { gaussian, beta, gamma, laplace };

  Kind kind = Kind::gaussian;
  double a = 0.0;
  double b = 1.0;
};

inline constexpr double kGammaFloor = 1e-9;

inline std::string_view preset_name(DistributionPreset::Kind kind) {
  switch (kind) {
    case DistributionPreset::Kind::gaussian: return "gaussian";
    case DistributionPreset::Kind::beta: return "beta";
    case DistributionPreset::Kind::gamma: return "gamma";
    case DistributionPreset::Kind::laplace: return "laplace";
  }
  return "?";
}

inline std::optional<DistributionPreset::Kind> parse_preset_kind(std::string_view name) {
  using K = DistributionPreset::Kind;
  if (name == "gaussian") return K::gaussian;
  if (name == "beta") return K::beta;
  if (name == "gamma") return K::gamma;
  if (name == "laplace") return K::laplace;
  return std::nullopt;
}

inline void validate_preset(const DistributionPreset& p) {
  using K = DistributionPreset::Kind;
  const bool finite = std::isfinite(p.a) && std::isfinite(p.b);
  bool ok = finite && p.b > 0.0;
  if (p.kind == K::beta || p.kind == K::gamma) ok = ok && p.a > 0.0;
  if (!ok) {
    throw InputError("invalid parameters for " + std::string(preset_name(p.kind)) + " preset: a=" +
                     std::to_string(p.a) + ", b=" + std::to_string(p.b));
  }
}

/// Builds the Ito model whose stationary law is the preset distribution.
/// Diffusions are stored as sqrt(sigma^2(xi)).
inline ItoModel make_preset(const DistributionPreset& p) {
  validate_preset(p);
  using K = DistributionPreset::Kind;
  double center = p.a;
  MapEntry diffusion;
  Boundary boundary = Boundary::none();
  switch (p.kind) {
    case K::gaussian:
      diffusion = univariate_entry({2.0 * p.b}, true);
      break;
    case K::beta: {
      center = p.a / (p.a + p.b);
      const double s = 2.0 / (p.a + p.b);
      diffusion = univariate_entry({0.0, s, -s}, true);
      boundary = Boundary::reflect(0.0, 1.0);
      break;
    }
    case K::gamma:
      center = p.a / p.b;
      diffusion = univariate_entry({0.0, 2.0 / p.b}, true);
      boundary = Boundary::clamp(kGammaFloor, std::numeric_limits<double>::infinity());
      break;
    case K::laplace:
      diffusion = univariate_entry({2.0 * p.b * p.b}, true);
      diffusion.abs_terms.push_back({0, p.a, 2.0 * p.b});
      break;
  }
  PolynomialMap drift(1, 1, 1, {univariate_entry({center, -1.0})});
  PolynomialMap sigma(1, 1, 1, {diffusion});
  return ItoModel(std::move(drift), std::move(sigma), {boundary});
}

/// Analytic stationary density. Zero outside the support.
inline double stationary_pdf(const DistributionPreset& p, double x) {
  validate_preset(p);
  using K = DistributionPreset::Kind;
  switch (p.kind) {
    case K::gaussian:
      return std::exp(-(x - p.a) * (x - p.a) / (2.0 * p.b)) / std::sqrt(2.0 * std::numbers::pi * p.b);
    case K::beta: {
      if (x < 0.0 || x > 1.0) return 0.0;
      const double log_norm = std::lgamma(p.a + p.b) - std::lgamma(p.a) - std::lgamma(p.b);
      if ((x == 0.0 && p.a < 1.0) || (x == 1.0 && p.b < 1.0)) return std::numeric_limits<double>::infinity();
      const double la = (p.a == 1.0) ? 0.0 : (p.a - 1.0) * std::log(x);
      const double lb = (p.b == 1.0) ? 0.0 : (p.b - 1.0) * std::log1p(-x);
      return std::exp(log_norm + la + lb);
    }
    case K::gamma: {
      if (x < 0.0) return 0.0;
      if (x == 0.0) {
        if (p.a < 1.0) return std::numeric_limits<double>::infinity();
        return p.a == 1.0 ? p.b : 0.0;
      }
      return std::exp(p.a * std::log(p.b) - std::lgamma(p.a) + (p.a - 1.0) * std::log(x) - p.b * x);
    }
    case K::laplace:
      return std::exp(-std::abs(x - p.a) / p.b) / (2.0 * p.b);
  }
  return 0.0;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

inline Moments stationary_moments(const DistributionPreset& p) {
  validate_preset(p);
  using K = DistributionPreset::Kind;
  switch (p.kind) {
    case K::gaussian: return {p.a, p.b};
    case K::beta: {
      const double s = p.a + p.b;
      return {p.a / s, p.a * p.b / (s * s * (s + 1.0))};
    }
    case K::gamma: return {p.a / p.b, p.a / (p.b * p.b)};
    case K::laplace: return {p.a, 2.0 * p.b * p.b};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Offshore wind-farm power (per unit) model:
//   dP = [0.0535 - 0.0899 P + 0.0349 P^2] dt + [-0.410 + 0.919 P - 0.505 P^2] dW
// The bracketed diffusion is sigma itself, not sigma^2.

inline ItoModel wind_power_model() {
  PolynomialMap drift(1, 1, 1, {univariate_entry({0.0535, -0.0899, 0.0349})});
  PolynomialMap sigma(1, 1, 1, {univariate_entry({-0.410, 0.919, -0.505})});
  return ItoModel(std::move(drift), std::move(sigma));
}

/// Stable equilibrium of the wind drift polynomial (the smaller root).
inline double wind_power_equilibrium() {
  constexpr double a = 0.0349, b = -0.0899, c = 0.0535;
  return (-b - std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
}

/// Newton iteration for a zero of the drift, starting at `guess`.
inline std::vector<double> drift_equilibrium(const ItoModel& model, std::vector<double> guess,
                                             int max_iter = 100) {
  const std::size_t m = model.dim();
  if (guess.size() != m) throw InputError("drift_equilibrium: guess has wrong dimension");
  std::vector<double> f(m), jac(m * m);
  for (int it = 0; it < max_iter; ++it) {
    model.drift_into(guess, f);
    double norm = 0.0;
    for (double v : f) norm = std::max(norm, std::abs(v));
    if (norm < 1e-14) return guess;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) jac[i * m + j] = model.drift().partial(i, 0, guess, j);
    }
    // Gaussian elimination with partial pivoting on the small Jacobian.
    std::vector<double> a = jac, rhs = f;
    for (std::size_t col = 0; col < m; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < m; ++r) {
        if (std::abs(a[r * m + col]) > std::abs(a[piv * m + col])) piv = r;
      }
      if (std::abs(a[piv * m + col]) < 1e-300) throw NumericalError("drift_equilibrium: singular Jacobian");
      if (piv != col) {
        for (std::size_t k = 0; k < m; ++k) std::swap(a[piv * m + k], a[col * m + k]);
        std::swap(rhs[piv], rhs[col]);
      }
      for (std::size_t r = col + 1; r < m; ++r) {
        const double factor = a[r * m + col] / a[col * m + col];
        for (std::size_t k = col; k < m; ++k) a[r * m + k] -= factor * a[col * m + k];
        rhs[r] -= factor * rhs[col];
      }
    }
    for (std::size_t r = m; r-- > 0;) {
      double s = rhs[r];
      for (std::size_t k = r + 1; k < m; ++k) s -= a[r * m + k] * rhs[k];
      rhs[r] = s / a[r * m + r];
    }
    for (std::size_t i = 0; i < m; ++i) guess[i] -= rhs[i];
  }
  throw NumericalError("drift_equilibrium: Newton iteration did not converge; set the initial state explicitly");
}

}  // namespace fastmc

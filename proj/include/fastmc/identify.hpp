#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fastmc/dataset.hpp"
#include "fastmc/error.hpp"
#include "fastmc/ito_model.hpp"
#include "fastmc/polynomial.hpp"
#include "fastmc/rng.hpp"
#include "fastmc/sde_sim.hpp"

namespace fastmc {

/// Polynomial degrees of the model to identify. Drift component i is a full
/// polynomial of total degree drift_degree[i] in all m states; diffusion entry
/// (r, c) likewise with diffusion_degree[r * m + c]. The noise is m-dimensional.
struct BasisSpec {
  std::vector<int> drift_degree;
  std::vector<int> diffusion_degree;

  static BasisSpec uniform(std::size_t m, int drift, int diffusion) {
    return {std::vector<int>(m, drift), std::vector<int>(m * m, diffusion)};
  }

  std::size_t dim() const { return drift_degree.size(); }

  void validate(std::size_t m) const {
    if (drift_degree.size() != m) throw InputError("basis: expected " + std::to_string(m) + " drift degrees");
    if (diffusion_degree.size() != m * m) {
      throw InputError("basis: expected " + std::to_string(m * m) + " diffusion degrees");
    }
    for (int d : drift_degree) {
      if (d < 0) throw InputError("basis: degrees must be >= 0");
    }
    for (int d : diffusion_degree) {
      if (d < 0) throw InputError("basis: degrees must be >= 0");
    }
  }

  int max_degree() const {
    int d = 0;
    for (int v : drift_degree) d = std::max(d, v);
    for (int v : diffusion_degree) d = std::max(d, v);
    return d;
  }
};

/// Exponent tuples of all monomials in m variables with total degree <= d,
/// ordered by degree, then lexicographically (x_0 first). The degree <= e
/// monomials are always a prefix of the degree <= d list for e < d.
inline std::vector<std::vector<int>> graded_monomials(std::size_t m, int d) {
  std::vector<std::vector<int>> out;
  std::vector<int> e(m, 0);
  for (int total = 0; total <= d; ++total) {
    // compositions of `total` into m parts, x_0 exponent descending
    auto rec = [&](auto&& self, std::size_t pos, int remaining) -> void {
      if (pos + 1 == m) {
        e[pos] = remaining;
        out.push_back(e);
        return;
      }
      for (int k = remaining; k >= 0; --k) {
        e[pos] = k;
        self(self, pos + 1, remaining - k);
      }
    };
    rec(rec, 0, total);
  }
  return out;
}

inline std::size_t monomial_count(std::size_t m, int d) {
  // binomial(m + d, d)
  double c = 1.0;
  for (int k = 1; k <= d; ++k) c = c * static_cast<double>(m + static_cast<std::size_t>(k)) / k;
  return static_cast<std::size_t>(std::llround(c));
}

inline std::size_t parameter_count(const BasisSpec& basis) {
  const std::size_t m = basis.dim();
  std::size_t count = 0;
  for (int d : basis.drift_degree) count += monomial_count(m, d);
  for (int d : basis.diffusion_degree) count += monomial_count(m, d);
  return count;
}

/// Ito model encoded by parameter vector q (drift coefficients component by
/// component, then diffusion coefficients entry by entry in row-major order,
/// each block in graded monomial order).
inline ItoModel model_from_parameters(std::span<const double> q, const BasisSpec& basis) {
  const std::size_t m = basis.dim();
  basis.validate(m);
  if (q.size() != parameter_count(basis)) {
    throw InputError("model_from_parameters: expected " + std::to_string(parameter_count(basis)) +
                     " parameters, got " + std::to_string(q.size()));
  }
  const auto monos = graded_monomials(m, basis.max_degree());
  std::size_t pos = 0;
  auto take = [&](int degree) {
    MapEntry entry;
    const std::size_t count = monomial_count(m, degree);
    for (std::size_t b = 0; b < count; ++b) entry.monomials.push_back({monos[b], q[pos++]});
    return entry;
  };
  std::vector<MapEntry> drift, diffusion;
  for (int d : basis.drift_degree) drift.push_back(take(d));
  for (int d : basis.diffusion_degree) diffusion.push_back(take(d));
  return ItoModel(PolynomialMap(m, m, 1, std::move(drift)), PolynomialMap(m, m, m, std::move(diffusion)));
}

namespace detail {

/// Neumaier compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace detail

/// Negative log-likelihood of the increments of a dataset, with the basis
/// values precomputed once per observation.
class LikelihoodProblem {
 public:
  LikelihoodProblem(const Dataset& data, const BasisSpec& basis, double epsilon = 1e-9)
      : m_(data.dim), h_(data.interval), epsilon_(epsilon), basis_(basis) {
    data.validate();
    basis.validate(m_);
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InputError("nll: epsilon must be a finite value >= 0");
    n_incr_ = data.size() - 1;
    n_basis_ = monomial_count(m_, basis.max_degree());
    const auto monos = graded_monomials(m_, basis.max_degree());
    phi_.resize(n_incr_ * n_basis_);
    delta_.resize(n_incr_ * m_);
    for (std::size_t j = 0; j < n_incr_; ++j) {
      const auto x = data.at(j);
      const auto x1 = data.at(j + 1);
      for (std::size_t b = 0; b < n_basis_; ++b) {
        double v = 1.0;
        for (std::size_t i = 0; i < m_; ++i) v *= detail::int_pow(x[i], monos[b][i]);
        phi_[j * n_basis_ + b] = v;
      }
      for (std::size_t i = 0; i < m_; ++i) delta_[j * m_ + i] = x1[i] - x[i];
    }
    for (int d : basis.drift_degree) drift_len_.push_back(monomial_count(m_, d));
    for (int d : basis.diffusion_degree) diff_len_.push_back(monomial_count(m_, d));
    n_params_ = parameter_count(basis);
  }

  std::size_t dim() const { return m_; }
  std::size_t increments() const { return n_incr_; }
  std::size_t parameters() const { return n_params_; }
  double interval() const { return h_; }
  double epsilon() const { return epsilon_; }
  const BasisSpec& basis() const { return basis_; }

  /// L' = 1/4 sum_j r_j^T D_j^-1 r_j + 1/2 sum_j log det D_j, with
  /// r_j the increment residual and D_j = h (sigma sigma^T + eps I) / 2.
  double objective(std::span<const double> q) const {
    check_size(q);
    const std::size_t m = m_;
    std::vector<double> r(m), sigma(m * m), D(m * m), L(m * m), y(m);
    detail::CompensatedSum total;
    for (std::size_t j = 0; j < n_incr_; ++j) {
      const double* phi = &phi_[j * n_basis_];
      std::size_t pos = 0;
      for (std::size_t i = 0; i < m; ++i) {
        double mu = 0.0;
        for (std::size_t b = 0; b < drift_len_[i]; ++b) mu += q[pos + b] * phi[b];
        pos += drift_len_[i];
        r[i] = delta_[j * m + i] - h_ * mu;
      }
      for (std::size_t e = 0; e < m * m; ++e) {
        double s = 0.0;
        for (std::size_t b = 0; b < diff_len_[e]; ++b) s += q[pos + b] * phi[b];
        pos += diff_len_[e];
        sigma[e] = s;
      }
      double quad = 0.0, logdet = 0.0;
      if (m == 1) {
        const double d = 0.5 * h_ * (sigma[0] * sigma[0] + epsilon_);
        if (!(d > 0.0) || !std::isfinite(d)) throw_not_pd(j);
        quad = r[0] * r[0] / d;
        logdet = std::log(d);
      } else {
        for (std::size_t a = 0; a < m; ++a) {
          for (std::size_t b = 0; b < m; ++b) {
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k) s += sigma[a * m + k] * sigma[b * m + k];
            D[a * m + b] = 0.5 * h_ * (s + (a == b ? epsilon_ : 0.0));
          }
        }
        // Cholesky D = L L^T
        for (std::size_t a = 0; a < m; ++a) {
          for (std::size_t b = 0; b <= a; ++b) {
            double s = D[a * m + b];
            for (std::size_t k = 0; k < b; ++k) s -= L[a * m + k] * L[b * m + k];
            if (a == b) {
              if (!(s > 0.0) || !std::isfinite(s)) throw_not_pd(j);
              L[a * m + a] = std::sqrt(s);
            } else {
              L[a * m + b] = s / L[b * m + b];
            }
          }
        }
        for (std::size_t a = 0; a < m; ++a) {
          double s = r[a];
          for (std::size_t k = 0; k < a; ++k) s -= L[a * m + k] * y[k];
          y[a] = s / L[a * m + a];
          quad += y[a] * y[a];
          logdet += 2.0 * std::log(L[a * m + a]);
        }
      }
      total.add(0.25 * quad + 0.5 * logdet);
    }
    const double value = total.value();
    if (!std::isfinite(value)) throw NumericalError("nll: objective is not finite");
    return value;
  }

  /// Diagonal of sigma sigma^T averaged over the observations.
  std::vector<double> mean_diffusion_diagonal(std::span<const double> q) const {
    check_size(q);
    std::vector<double> out(m_, 0.0);
    std::size_t offset = 0;
    for (std::size_t len : drift_len_) offset += len;
    for (std::size_t j = 0; j < n_incr_; ++j) {
      const double* phi = &phi_[j * n_basis_];
      std::size_t pos = offset;
      for (std::size_t a = 0; a < m_; ++a) {
        for (std::size_t k = 0; k < m_; ++k) {
          double s = 0.0;
          for (std::size_t b = 0; b < diff_len_[a * m_ + k]; ++b) s += q[pos + b] * phi[b];
          pos += diff_len_[a * m_ + k];
          out[a] += s * s;
        }
      }
    }
    for (double& v : out) v /= static_cast<double>(n_incr_);
    return out;
  }

  /// Least-squares drift and a constant diagonal diffusion matched to the
  /// residual variance.
  std::vector<double> initial_guess() const {
    std::vector<double> q(n_params_, 0.0);
    std::size_t pos = 0;
    std::vector<double> resid_var(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t p = drift_len_[i];
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
      for (std::size_t j = 0; j < n_incr_; ++j) {
        const double* phi = &phi_[j * n_basis_];
        const double target = delta_[j * m_ + i] / h_;
        for (std::size_t a = 0; a < p; ++a) {
          rhs(static_cast<Eigen::Index>(a)) += phi[a] * target;
          for (std::size_t b = 0; b < p; ++b) {
            A(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += phi[a] * phi[b];
          }
        }
      }
      const Eigen::VectorXd coef = A.completeOrthogonalDecomposition().solve(rhs);
      for (std::size_t a = 0; a < p; ++a) q[pos + a] = coef(static_cast<Eigen::Index>(a));
      detail::CompensatedSum ss;
      for (std::size_t j = 0; j < n_incr_; ++j) {
        const double* phi = &phi_[j * n_basis_];
        double mu = 0.0;
        for (std::size_t a = 0; a < p; ++a) mu += q[pos + a] * phi[a];
        const double r = delta_[j * m_ + i] - h_ * mu;
        ss.add(r * r);
      }
      resid_var[i] = ss.value() / (static_cast<double>(n_incr_) * h_);
      pos += p;
    }
    for (std::size_t a = 0; a < m_; ++a) {
      for (std::size_t k = 0; k < m_; ++k) {
        if (a == k) q[pos] = std::sqrt(std::max(resid_var[a], 0.0));
        pos += diff_len_[a * m_ + k];
      }
    }
    for (double v : q) {
      if (!std::isfinite(v)) throw NumericalError("fit: least-squares initialization is not finite");
    }
    return q;
  }

 private:
  void check_size(std::span<const double> q) const {
    if (q.size() != n_params_) {
      throw InputError("nll: expected " + std::to_string(n_params_) + " parameters, got " + std::to_string(q.size()));
    }
  }
  [[noreturn]] static void throw_not_pd(std::size_t j) {
    throw NumericalError("nll: diffusion matrix is not positive definite at data index " + std::to_string(j));
  }

  std::size_t m_;
  double h_;
  double epsilon_;
  BasisSpec basis_;
  std::size_t n_incr_ = 0;
  std::size_t n_basis_ = 0;
  std::size_t n_params_ = 0;
  std::vector<std::size_t> drift_len_;
  std::vector<std::size_t> diff_len_;
  std::vector<double> phi_;
  std::vector<double> delta_;
};

inline double nll(std::span<const double> q, const Dataset& data, const BasisSpec& basis, double epsilon = 1e-9) {
  return LikelihoodProblem(data, basis, epsilon).objective(q);
}

struct FitOptions {
  std::size_t max_iter = 10000;
  double step_tol = 1e-12;
  double grad_tol = 1e-6;
  double epsilon = 1e-9;  // diffusion floor
};

struct FitResult {
  std::vector<double> q;
  double objective = 0.0;      // L' at q
  std::size_t iterations = 0;
  double gradient_norm = 0.0;  // of L' / (number of increments)
  bool converged = false;
  bool degenerate = false;     // diffusion collapsed onto the epsilon floor
  BasisSpec basis;
  std::size_t dim = 1;
};

namespace detail {

inline double fd_step(double q) { return 1e-6 * std::max(1.0, std::abs(q)); }

template <typename F>
Eigen::VectorXd fd_gradient(F&& f, const Eigen::VectorXd& q) {
  Eigen::VectorXd g(q.size());
  Eigen::VectorXd x = q;
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    const double step = fd_step(q(k));
    x(k) = q(k) + step;
    const double up = f(x);
    x(k) = q(k) - step;
    const double down = f(x);
    x(k) = q(k);
    g(k) = (up - down) / (2.0 * step);
  }
  return g;
}

template <typename F>
Eigen::MatrixXd fd_hessian(F&& f, const Eigen::VectorXd& q, double f0) {
  const Eigen::Index p = q.size();
  Eigen::MatrixXd H(p, p);
  Eigen::VectorXd step(p);
  Eigen::VectorXd x = q;
  auto second = [&](Eigen::Index a, double s) {
    x(a) = q(a) + s;
    const double up = f(x);
    x(a) = q(a) - s;
    const double down = f(x);
    x(a) = q(a);
    return (up - 2.0 * f0 + down) / (s * s);
  };
  for (Eigen::Index a = 0; a < p; ++a) {
    // shrink the step while the estimate still moves: curvature that varies on
    // a scale below 1e-4 (a diffusion term near the floor) is otherwise smeared
    const double scale = std::max(1.0, std::abs(q(a)));
    double s = 1e-4 * scale;
    double d2 = second(a, s);
    while (s > 2e-7 * scale) {
      const double finer = second(a, 0.1 * s);
      const bool settled = std::abs(finer - d2) <= 0.1 * std::abs(finer);
      s *= 0.1;
      d2 = finer;
      if (settled) break;
    }
    step(a) = s;
    H(a, a) = d2;
    for (Eigen::Index b = 0; b < a; ++b) {
      double v = 0.0;
      for (int sa : {1, -1}) {
        for (int sb : {1, -1}) {
          x(a) = q(a) + sa * step(a);
          x(b) = q(b) + sb * step(b);
          v += sa * sb * f(x);
        }
      }
      x(a) = q(a);
      x(b) = q(b);
      H(a, b) = H(b, a) = v / (4.0 * step(a) * step(b));
    }
  }
  return H;
}

/// Positive definite metric from a symmetric curvature estimate: eigenvalue
/// magnitudes floored relative to the largest one.
inline Eigen::MatrixXd metric_from_hessian(const Eigen::MatrixXd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
  if (eig.info() != Eigen::Success || !eig.eigenvalues().allFinite()) {
    return Eigen::MatrixXd::Identity(H.rows(), H.cols());
  }
  Eigen::VectorXd lam = eig.eigenvalues().cwiseAbs();
  const double top = std::max(lam.maxCoeff(), 1e-12);
  for (Eigen::Index k = 0; k < lam.size(); ++k) lam(k) = std::max(lam(k), 1e-10 * top);
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace detail

/// Minimizes L' by gradient descent with an Armijo backtracking line search.
/// Steps are taken along the negative gradient in a fixed metric built from a
/// finite-difference curvature estimate, refreshed periodically; gradients are
/// central differences with relative step 1e-6. Convergence is declared when
/// the gradient of L' per increment falls below grad_tol.
inline FitResult fit(const Dataset& data, const BasisSpec& basis, const FitOptions& opts = {}) {
  if (opts.max_iter < 1) throw InputError("fit: max_iter must be >= 1");
  if (!(opts.grad_tol > 0.0)) throw InputError("fit: grad_tol must be positive");
  LikelihoodProblem problem(data, basis, opts.epsilon);
  if (problem.parameters() >= problem.increments()) {
    throw InputError("fit: " + std::to_string(problem.parameters()) + " parameters need more than " +
                     std::to_string(problem.increments()) + " increments");
  }
  const double scale = 1.0 / static_cast<double>(problem.increments());
  auto f = [&](const Eigen::VectorXd& x) {
    try {
      return problem.objective(std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))) * scale;
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const auto init = problem.initial_guess();
  Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(init.data(), static_cast<Eigen::Index>(init.size()));
  double fq = f(q);
  if (!std::isfinite(fq)) throw NumericalError("fit: objective is not finite at the initial guess");

  FitResult result;
  result.basis = basis;
  result.dim = data.dim;
  Eigen::VectorXd g = detail::fd_gradient(f, q);
  Eigen::LDLT<Eigen::MatrixXd> metric(detail::metric_from_hessian(detail::fd_hessian(f, q, fq)));
  std::size_t since_refresh = 0;
  bool refreshed_now = true;
  std::size_t it = 0;
  while (it < opts.max_iter) {
    if (!(g.norm() > opts.grad_tol)) break;
    if (since_refresh >= 25 && !refreshed_now) {
      metric.compute(detail::metric_from_hessian(detail::fd_hessian(f, q, fq)));
      since_refresh = 0;
      refreshed_now = true;
    }
    const Eigen::VectorXd dir = -metric.solve(g);
    const double slope = g.dot(dir);
    double alpha = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    double ft = fq;
    if (slope < 0.0 && dir.allFinite()) {
      for (int bt = 0; bt < 60; ++bt) {
        trial = q + alpha * dir;
        ft = f(trial);
        if (std::isfinite(ft) && ft <= fq + 1e-4 * alpha * slope) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
    }
    if (!accepted) {
      if (refreshed_now) break;  // no descent even with fresh curvature
      metric.compute(detail::metric_from_hessian(detail::fd_hessian(f, q, fq)));
      since_refresh = 0;
      refreshed_now = true;
      continue;
    }
    ++it;
    ++since_refresh;
    refreshed_now = false;
    const double step_norm = (trial - q).norm();
    q = trial;
    fq = ft;
    g = detail::fd_gradient(f, q);
    if (step_norm <= opts.step_tol * (1.0 + q.norm())) break;
  }

  result.q.assign(q.data(), q.data() + q.size());
  result.iterations = it;
  result.gradient_norm = g.norm();
  result.converged = result.gradient_norm <= opts.grad_tol;
  result.objective = problem.objective(result.q);
  for (double v : problem.mean_diffusion_diagonal(result.q)) {
    if (v <= 100.0 * opts.epsilon) result.degenerate = true;
  }
  return result;
}

inline ItoModel fitted_model(const FitResult& r) { return model_from_parameters(r.q, r.basis); }

// ---------------------------------------------------------------------------
// Validation

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InputError("ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

/// Normalized sample autocorrelation rho(0..lags); rho(0) = 1. A constant
/// series has rho(k) = 0 for k >= 1.
inline std::vector<double> autocorrelation(std::span<const double> x, std::size_t lags) {
  const std::size_t n = x.size();
  if (lags >= n) throw InputError("autocorrelation: lag " + std::to_string(lags) + " needs more than " +
                                  std::to_string(n) + " samples");
  detail::CompensatedSum s;
  for (double v : x) s.add(v);
  const double mean = s.value() / static_cast<double>(n);
  std::vector<double> c(lags + 1);
  for (std::size_t k = 0; k <= lags; ++k) {
    detail::CompensatedSum acc;
    for (std::size_t t = 0; t + k < n; ++t) acc.add((x[t] - mean) * (x[t + k] - mean));
    c[k] = acc.value();
  }
  std::vector<double> rho(lags + 1, 0.0);
  rho[0] = 1.0;
  if (c[0] > 0.0) {
    for (std::size_t k = 1; k <= lags; ++k) rho[k] = c[k] / c[0];
  }
  return rho;
}

struct ValidationReport {
  double pdf_distance = 0.0;  // largest per-component KS distance
  double acf_rmse = 0.0;      // over components and lags 0..L
};

inline constexpr std::uint64_t kValidationSeed = 0x6a09e667f3bcc908ULL;

/// Compares two records of the same process: KS distance of the marginals and
/// RMSE between autocorrelation functions.
inline ValidationReport compare_records(const Dataset& data, const Dataset& reference, std::size_t lags) {
  data.validate();
  reference.validate();
  if (data.dim != reference.dim) throw InputError("validate: dimension mismatch");
  if (lags >= data.size() || lags >= reference.size()) {
    throw InputError("validate: " + std::to_string(lags) + " lags need a longer record");
  }
  ValidationReport report;
  detail::CompensatedSum sq;
  for (std::size_t i = 0; i < data.dim; ++i) {
    std::vector<double> a(data.size()), b(reference.size());
    for (std::size_t j = 0; j < a.size(); ++j) a[j] = data.samples[j * data.dim + i];
    for (std::size_t j = 0; j < b.size(); ++j) b[j] = reference.samples[j * reference.dim + i];
    const auto ra = autocorrelation(a, lags);
    const auto rb = autocorrelation(b, lags);
    for (std::size_t k = 0; k <= lags; ++k) sq.add((ra[k] - rb[k]) * (ra[k] - rb[k]));
    report.pdf_distance = std::max(report.pdf_distance, ks_distance(std::move(a), std::move(b)));
  }
  report.acf_rmse = std::sqrt(sq.value() / static_cast<double>(data.dim * (lags + 1)));
  return report;
}

/// Simulates `model` with the record's length and step from its first
/// observation (fixed internal seed) and compares the two records.
inline ValidationReport validate(const ItoModel& model, const Dataset& data, std::size_t lags,
                                 std::uint64_t seed = kValidationSeed) {
  data.validate();
  if (model.dim() != data.dim) throw InputError("validate: model and data dimensions differ");
  if (lags >= data.size()) throw InputError("validate: " + std::to_string(lags) + " lags need a longer record");
  const TimeGrid grid(0.0, data.interval * static_cast<double>(data.size() - 1), data.interval);
  const auto xi0 = data.at(0);
  auto path = simulate_em_path(model, grid, xi0, mix_seed(seed, static_cast<std::uint64_t>(StreamTag::validation)), 0);
  return compare_records(data, Dataset(data.dim, data.interval, std::move(path)), lags);
}

}  // namespace fastmc

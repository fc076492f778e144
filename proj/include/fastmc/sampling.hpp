#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "fastmc/error.hpp"
#include "fastmc/rng.hpp"

namespace fastmc {

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Standard normal quantile.
///
/// Acklam's rational approximation (relative error ~1e-9) followed by one
/// Halley correction against erfc, which brings the error to a few ulps.
inline double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("inverse_normal_cdf: p must lie in (0, 1), got " + std::to_string(p));
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley step; the upper tail is refined through the complementary CDF.
  const double e = (p > 0.5) ? (p - 1.0) + 0.5 * std::erfc(x / std::numbers::sqrt2)
                             : 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double e_signed = (p > 0.5) ? -e : e;
  const double u = e_signed * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

enum class SampleMethod { lhs, lhs_decorrelated, srs };
enum class Placement { uniform_in_stratum, midpoint };
enum class DecorrelationStatus { not_applied, applied, unchanged, fallback_random };

inline const char* method_name(SampleMethod m) {
  switch (m) {
    case SampleMethod::lhs: return "lhs";
    case SampleMethod::lhs_decorrelated: return "lhs_decorrelated";
    case SampleMethod::srs: return "srs";
  }
  return "?";
}

/// M x N matrix of standard-normal samples: rows are variables, columns are
/// sample vectors. Row-major storage.
struct SampleMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  SampleMethod method = SampleMethod::srs;
  DecorrelationStatus decorrelation = DecorrelationStatus::not_applied;

  double operator()(std::size_t i, std::size_t k) const { return values[i * cols + k]; }
  std::span<const double> row(std::size_t i) const { return std::span<const double>(values).subspan(i * cols, cols); }
  std::span<double> row(std::size_t i) { return std::span<double>(values).subspan(i * cols, cols); }
  std::vector<double> column(std::size_t k) const {
    std::vector<double> out(rows);
    for (std::size_t i = 0; i < rows; ++i) out[i] = values[i * cols + k];
    return out;
  }
};

namespace detail {

inline void shuffle_in_place(std::span<double> row, CounterStream& stream) {
  for (std::size_t i = row.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(stream.below(i));
    std::swap(row[i - 1], row[j]);
  }
}

/// 0-based ranks; ties broken by position.
inline std::vector<std::size_t> ranks_of(std::span<const double> row) {
  std::vector<std::size_t> order(row.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
  std::vector<std::size_t> rank(row.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;
  return rank;
}

}  // namespace detail

/// Latin hypercube design for M independent standard normals: row i holds one
/// draw from each of the N equiprobable strata, in random order.
inline SampleMatrix lhs_normal(std::size_t M, std::size_t N, std::uint64_t seed,
                               Placement placement = Placement::uniform_in_stratum) {
  if (M < 1 || N < 1) throw InputError("lhs_normal: M and N must be >= 1");
  SampleMatrix s{M, N, std::vector<double>(M * N), SampleMethod::lhs, DecorrelationStatus::not_applied};
  const double width = 1.0 / static_cast<double>(N);
  for (std::size_t i = 0; i < M; ++i) {
    CounterStream place(seed, StreamTag::lhs_placement, static_cast<std::uint32_t>(i));
    CounterStream shuffle(seed, StreamTag::lhs_shuffle, static_cast<std::uint32_t>(i));
    auto row = s.row(i);
    for (std::size_t k = 0; k < N; ++k) {
      const double u = placement == Placement::midpoint ? 0.5 : place.uniform();
      row[k] = inverse_normal_cdf((static_cast<double>(k) + u) * width);
    }
    detail::shuffle_in_place(row, shuffle);
  }
  return s;
}

/// i.i.d. standard normal entries.
inline SampleMatrix srs_normal(std::size_t M, std::size_t N, std::uint64_t seed) {
  if (M < 1 || N < 1) throw InputError("srs_normal: M and N must be >= 1");
  SampleMatrix s{M, N, std::vector<double>(M * N), SampleMethod::srs, DecorrelationStatus::not_applied};
  for (std::size_t i = 0; i < M; ++i) {
    CounterStream stream(seed, StreamTag::simple_random, static_cast<std::uint32_t>(i));
    for (auto& v : s.row(i)) v = stream.normal();
  }
  return s;
}

/// Pearson correlation matrix of the rows.
inline Eigen::MatrixXd row_correlation(const SampleMatrix& s) {
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
      s.values.data(), static_cast<Eigen::Index>(s.rows), static_cast<Eigen::Index>(s.cols));
  Eigen::MatrixXd centered = x.colwise() - x.rowwise().mean();
  Eigen::MatrixXd cov = centered * centered.transpose();
  Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    for (Eigen::Index j = 0; j < cov.cols(); ++j) {
      const double denom = sd(i) * sd(j);
      cov(i, j) = denom > 0.0 ? cov(i, j) / denom : (i == j ? 1.0 : 0.0);
    }
  }
  return cov;
}

inline double max_offdiag_correlation(const SampleMatrix& s) {
  if (s.rows < 2) return 0.0;
  const Eigen::MatrixXd c = row_correlation(s);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      if (i != j) worst = std::max(worst, std::abs(c(i, j)));
    }
  }
  return worst;
}

/// Iman-Conover rearrangement towards zero rank correlation between rows.
///
/// Normal scores of the current row ranks are whitened by the inverse
/// Cholesky factor of their correlation matrix; each row is then reordered so
/// its ranks follow the whitened scores. Row contents are only permuted. When
/// the score correlation is not positive definite (e.g. N <= M) rows are
/// permuted independently at random instead. The result never has a larger
/// maximum off-diagonal Pearson correlation than the input; if it would, the
/// input is returned with status `unchanged`.
inline SampleMatrix decorrelate(const SampleMatrix& input, std::uint64_t seed) {
  for (double v : input.values) {
    if (!std::isfinite(v)) throw InputError("decorrelate: sample matrix contains non-finite values");
  }
  SampleMatrix out = input;
  if (input.rows < 2) return out;

  const std::size_t M = input.rows;
  const std::size_t N = input.cols;
  SampleMatrix scores{M, N, std::vector<double>(M * N), input.method, DecorrelationStatus::not_applied};
  std::vector<std::vector<std::size_t>> ranks(M);
  for (std::size_t i = 0; i < M; ++i) {
    ranks[i] = detail::ranks_of(input.row(i));
    for (std::size_t k = 0; k < N; ++k) {
      scores.values[i * N + k] =
          inverse_normal_cdf(static_cast<double>(ranks[i][k] + 1) / static_cast<double>(N + 1));
    }
  }

  const Eigen::MatrixXd corr = row_correlation(scores);
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  bool positive_definite = llt.info() == Eigen::Success;
  if (positive_definite) {
    const Eigen::MatrixXd L = llt.matrixL();
    positive_definite = L.diagonal().minCoeff() > 1e-6;
  }

  if (positive_definite) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> S(
        scores.values.data(), static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(N));
    const Eigen::MatrixXd target = llt.matrixL().solve(Eigen::MatrixXd(S));
    for (std::size_t i = 0; i < M; ++i) {
      std::vector<double> sorted(input.row(i).begin(), input.row(i).end());
      std::sort(sorted.begin(), sorted.end());
      std::vector<double> target_row(N);
      for (std::size_t k = 0; k < N; ++k) target_row[k] = target(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      const auto target_rank = detail::ranks_of(target_row);
      auto row = out.row(i);
      for (std::size_t k = 0; k < N; ++k) row[k] = sorted[target_rank[k]];
    }
    out.decorrelation = DecorrelationStatus::applied;
  } else {
    for (std::size_t i = 0; i < M; ++i) {
      CounterStream stream(seed, StreamTag::decorrelate, static_cast<std::uint32_t>(i));
      detail::shuffle_in_place(out.row(i), stream);
    }
    out.decorrelation = DecorrelationStatus::fallback_random;
  }
  if (out.method == SampleMethod::lhs) out.method = SampleMethod::lhs_decorrelated;

  if (max_offdiag_correlation(out) > max_offdiag_correlation(input)) {
    SampleMatrix kept = input;
    kept.decorrelation = DecorrelationStatus::unchanged;
    return kept;
  }
  return out;
}

}  // namespace fastmc

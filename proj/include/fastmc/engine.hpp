#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fastmc/error.hpp"
#include "fastmc/ito_model.hpp"
#include "fastmc/parallel.hpp"
#include "fastmc/rng.hpp"
#include "fastmc/sampling.hpp"
#include "fastmc/sde_sim.hpp"
#include "fastmc/spectral.hpp"
#include "fastmc/system_sim.hpp"

namespace fastmc {

/// One-pass mean/variance (Welford). variance() uses the N-1 divisor and is 0
/// for fewer than two samples.
class RunningStats {
 public:
  void add(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
  }
  std::size_t count() const { return count_; }
  double mean() const { return mean_; }
  double variance() const { return count_ < 2 ? 0.0 : std::max(m2_, 0.0) / static_cast<double>(count_ - 1); }

 private:
  std::size_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// prefix: estimates at every size n <= N come from the first n samples of one
/// run. rerun: each requested size is an independent run seeded by
/// mix_seed(seed, n).
enum class EstimateMode { prefix, rerun };

inline const char* mode_name(EstimateMode m) { return m == EstimateMode::rerun ? "rerun" : "prefix"; }

struct RunOptions {
  std::size_t workers = 1;
  EstimateMode mode = EstimateMode::prefix;
  std::size_t rerun_from = 1;  // rerun mode evaluates sizes rerun_from..N
};

struct FastOptions {
  bool decorrelate = true;
  Placement placement = Placement::uniform_in_stratum;
  bool ito_correction = true;
  SampleMethod sampling = SampleMethod::lhs;  // lhs or srs
};

struct StatsReport {
  std::string method;  // "traditional" or "fast"
  std::uint64_t seed = 0;
  std::size_t K = 0;   // 0 for traditional
  bool decorrelated = false;
  DecorrelationStatus decorrelation = DecorrelationStatus::not_applied;
  EstimateMode mode = EstimateMode::prefix;
  std::vector<std::size_t> sizes;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> degree_mean;      // NaN where fewer than five consecutive sizes end here
  std::vector<double> degree_variance;
  double final_mean = 0.0;
  double final_variance = 0.0;
  std::vector<double> samples;          // RRF values of the size-N run, in sample order
};

/// max - min over the last five estimates.
inline double convergence_degree(std::span<const double> estimates) {
  if (estimates.size() < 5) {
    throw NumericalError("convergence degree needs at least 5 estimates, got " + std::to_string(estimates.size()));
  }
  const auto last = estimates.subspan(estimates.size() - 5);
  const auto [lo, hi] = std::minmax_element(last.begin(), last.end());
  return *hi - *lo;
}

namespace detail {

inline void fill_degrees(StatsReport& r) {
  const std::size_t n = r.sizes.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.degree_mean.assign(n, nan);
  r.degree_variance.assign(n, nan);
  for (std::size_t i = 4; i < n; ++i) {
    if (r.sizes[i] - r.sizes[i - 4] != 4) continue;
    r.degree_mean[i] = convergence_degree(std::span<const double>(r.mean).subspan(i - 4, 5));
    r.degree_variance[i] = convergence_degree(std::span<const double>(r.variance).subspan(i - 4, 5));
  }
}

/// Evaluates rrf on `count` paths produced by make_path(index), in parallel,
/// returning values in index order.
template <typename MakePath>
std::vector<double> evaluate_samples(std::size_t count, const ResponseFunction& rrf, const TimeGrid& grid,
                                     std::size_t workers, MakePath&& make_path) {
  std::vector<double> values(count);
  parallel_for(count, workers, [&](std::size_t i) {
    std::vector<double> path;
    try {
      path = make_path(i);
    } catch (const NumericalError& e) {
      throw NumericalError("sample " + std::to_string(i) + ": " + e.what());
    }
    double v;
    try {
      v = rrf(path, grid);
    } catch (const std::exception& e) {
      throw SimulatorError("sample " + std::to_string(i) + ": " + e.what());
    }
    if (!std::isfinite(v)) throw SimulatorError("sample " + std::to_string(i) + ": response is not finite");
    values[i] = v;
  });
  return values;
}

template <typename RunOnce>
StatsReport assemble(StatsReport base, std::size_t N, std::uint64_t seed, const RunOptions& opts, RunOnce&& run_once) {
  if (N < 1) throw InputError("sample size N must be >= 1");
  base.seed = seed;
  base.mode = opts.mode;
  if (opts.mode == EstimateMode::prefix) {
    base.samples = run_once(N, seed, base);
    RunningStats stats;
    for (std::size_t i = 0; i < N; ++i) {
      stats.add(base.samples[i]);
      base.sizes.push_back(i + 1);
      base.mean.push_back(stats.mean());
      base.variance.push_back(stats.variance());
    }
  } else {
    const std::size_t from = std::clamp<std::size_t>(opts.rerun_from, 1, N);
    for (std::size_t n = from; n <= N; ++n) {
      auto values = run_once(n, mix_seed(seed, n), base);
      RunningStats stats;
      for (double v : values) stats.add(v);
      base.sizes.push_back(n);
      base.mean.push_back(stats.mean());
      base.variance.push_back(stats.variance());
      if (n == N) base.samples = std::move(values);
    }
  }
  base.final_mean = base.mean.back();
  base.final_variance = base.variance.back();
  fill_degrees(base);
  return base;
}

}  // namespace detail

/// Traditional Monte Carlo: N Euler-Maruyama paths, one response each.
inline StatsReport run_traditional_mcs(const ItoModel& model, const ResponseFunction& rrf, const TimeGrid& grid,
                                       std::span<const double> xi0, std::size_t N, std::uint64_t seed,
                                       const RunOptions& opts = {}) {
  if (!rrf) throw InputError("run_traditional_mcs: no response function");
  if (xi0.size() != model.dim()) throw InputError("run_traditional_mcs: initial state dimension mismatch");
  StatsReport base;
  base.method = "traditional";
  return detail::assemble(std::move(base), N, seed, opts, [&](std::size_t n, std::uint64_t s, StatsReport&) {
    return detail::evaluate_samples(n, rrf, grid, opts.workers,
                                    [&](std::size_t i) { return simulate_em_path(model, grid, xi0, s, i); });
  });
}

/// Standard normal KLE coefficient design (n*K rows, N columns).
inline SampleMatrix fast_design(std::size_t M, std::size_t N, std::uint64_t seed, const FastOptions& fast) {
  if (fast.sampling == SampleMethod::srs) return srs_normal(M, N, seed);
  SampleMatrix s = lhs_normal(M, N, seed, fast.placement);
  if (fast.decorrelate && M > 1) s = decorrelate(s, seed);
  return s;
}

/// Spectral path for column `col` of a design.
inline std::vector<double> design_path(const ItoModel& model, const SampleMatrix& design, std::size_t col,
                                       const TimeGrid& grid, const KleConfig& cfg, std::span<const double> xi0,
                                       const FastOptions& fast) {
  const auto zeta = design.column(col);
  return spectral_path(model, zeta, grid, cfg, xi0, SpectralOptions{fast.ito_correction});
}

/// Fast Monte Carlo: a Latin hypercube over the KLE coefficients, a spectral
/// path per design column, one response per path.
inline StatsReport run_fast_mcs(const ItoModel& model, const ResponseFunction& rrf, const TimeGrid& grid,
                                std::span<const double> xi0, std::size_t N, std::size_t K, std::uint64_t seed,
                                const FastOptions& fast = {}, const RunOptions& opts = {}) {
  if (!rrf) throw InputError("run_fast_mcs: no response function");
  if (K < 1) throw InputError("run_fast_mcs: K must be >= 1");
  if (fast.sampling == SampleMethod::lhs_decorrelated) throw InputError("run_fast_mcs: sampling must be lhs or srs");
  if (xi0.size() != model.dim()) throw InputError("run_fast_mcs: initial state dimension mismatch");
  const KleConfig cfg{K, grid.duration(), model.noise_dim()};
  cfg.validate();
  StatsReport base;
  base.method = "fast";
  base.K = K;
  return detail::assemble(std::move(base), N, seed, opts, [&](std::size_t n, std::uint64_t s, StatsReport& rep) {
    const SampleMatrix design = fast_design(cfg.coefficient_count(), n, s, fast);
    rep.decorrelation = design.decorrelation;
    rep.decorrelated = design.decorrelation == DecorrelationStatus::applied ||
                       design.decorrelation == DecorrelationStatus::fallback_random;
    return detail::evaluate_samples(n, rrf, grid, opts.workers, [&](std::size_t i) {
      return design_path(model, design, i, grid, cfg, xi0, fast);
    });
  });
}

/// Spectral paths for every column of a fast-MC design.
inline PathSet simulate_spectral_paths(const ItoModel& model, const TimeGrid& grid, std::span<const double> xi0,
                                       std::size_t N, std::size_t K, std::uint64_t seed, const FastOptions& fast = {},
                                       std::size_t workers = 1) {
  if (N < 1) throw InputError("simulate_spectral_paths: N must be >= 1");
  const KleConfig cfg{K, grid.duration(), model.noise_dim()};
  cfg.validate();
  const SampleMatrix design = fast_design(cfg.coefficient_count(), N, seed, fast);
  PathSet set{grid, model.dim(), N, PathOrigin::spectral, {}};
  const std::size_t stride = grid.points() * model.dim();
  set.values.resize(N * stride);
  parallel_for(N, workers, [&](std::size_t p) {
    const auto path = design_path(model, design, p, grid, cfg, xi0, fast);
    std::copy(path.begin(), path.end(), set.values.begin() + static_cast<std::ptrdiff_t>(p * stride));
  });
  return set;
}

enum class Statistic { mean, variance };

struct Comparison {
  Statistic statistic = Statistic::mean;
  double target_degree = 0.0;
  std::size_t N_A = 0;
  std::size_t N_B = 0;  // 0 when not reached
  bool reached = false;
  double speedup = std::numeric_limits<double>::quiet_NaN();
};

/// target = A's convergence degree at its largest size; N_A / N_B are the
/// smallest sizes at which A / B attain it.
inline Comparison compare_methods(const StatsReport& a, const StatsReport& b, Statistic statistic) {
  const auto& da = statistic == Statistic::mean ? a.degree_mean : a.degree_variance;
  const auto& db = statistic == Statistic::mean ? b.degree_mean : b.degree_variance;
  if (da.empty() || std::isnan(da.back())) {
    throw NumericalError("compare: reference report has no convergence degree at its largest size "
                         "(needs five consecutive sizes)");
  }
  Comparison c;
  c.statistic = statistic;
  c.target_degree = da.back();
  for (std::size_t i = 0; i < da.size(); ++i) {
    if (!std::isnan(da[i]) && da[i] <= c.target_degree) {
      c.N_A = a.sizes[i];
      break;
    }
  }
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (!std::isnan(db[i]) && db[i] <= c.target_degree) {
      c.N_B = b.sizes[i];
      c.reached = true;
      break;
    }
  }
  if (c.reached) c.speedup = static_cast<double>(c.N_A) / static_cast<double>(c.N_B);
  return c;
}

}  // namespace fastmc

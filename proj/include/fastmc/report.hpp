#pragma once

#include <cmath>
#include <ostream>
#include <string>

#include <json.hpp>

#include "fastmc/csv.hpp"
#include "fastmc/engine.hpp"
#include "fastmc/identify.hpp"
#include "fastmc/model_file.hpp"

namespace fastmc::report {

using json = nlohmann::json;

inline const char* decorrelation_name(DecorrelationStatus s) {
  switch (s) {
    case DecorrelationStatus::applied: return "applied";
    case DecorrelationStatus::unchanged: return "unchanged";
    case DecorrelationStatus::fallback_random: return "fallback_random";
    case DecorrelationStatus::not_applied: break;
  }
  return "not_applied";
}

inline json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Summary plus the degree at the largest size; prefix sequences go to CSV.
inline json to_json(const StatsReport& r) {
  json j = {{"method", r.method},
            {"seed", r.seed},
            {"estimates", mode_name(r.mode)},
            {"N", r.sizes.empty() ? 0 : r.sizes.back()},
            {"final_mean", r.final_mean},
            {"final_variance", r.final_variance},
            {"degree_mean", nullable(r.degree_mean.empty() ? NAN : r.degree_mean.back())},
            {"degree_variance", nullable(r.degree_variance.empty() ? NAN : r.degree_variance.back())}};
  if (r.method == "fast") {
    j["K"] = r.K;
    j["decorrelation"] = decorrelation_name(r.decorrelation);
  }
  return j;
}

/// Columns N, mean, variance, degree_mean, degree_variance; "nan" where a
/// degree is undefined.
inline void write_prefix_csv(std::ostream& out, const StatsReport& r) {
  out << "N,mean,variance,degree_mean,degree_variance\n";
  for (std::size_t i = 0; i < r.sizes.size(); ++i) {
    out << r.sizes[i] << ',' << csv::format_number(r.mean[i]) << ',' << csv::format_number(r.variance[i]) << ','
        << csv::format_number(r.degree_mean[i]) << ',' << csv::format_number(r.degree_variance[i]) << '\n';
  }
}

inline json to_json(const Comparison& c) {
  return {{"statistic", c.statistic == Statistic::mean ? "mean" : "variance"},
          {"target_degree", c.target_degree},
          {"N_A", c.N_A},
          {"N_B", c.reached ? json(c.N_B) : json(nullptr)},
          {"reached", c.reached},
          {"speedup", nullable(c.speedup)}};
}

inline json to_json(const FitResult& r) {
  return {{"q", r.q},
          {"objective", r.objective},
          {"iterations", r.iterations},
          {"gradient_norm", r.gradient_norm},
          {"converged", r.converged},
          {"degenerate", r.degenerate},
          {"drift_degree", r.basis.drift_degree},
          {"diffusion_degree", r.basis.diffusion_degree}};
}

/// Model file for a fitted model, with the fit report embedded under "fit".
inline json fitted_model_json(const FitResult& r) {
  json j = model_file::to_json(fitted_model(r));
  j["fit"] = to_json(r);
  return j;
}

inline json to_json(const ValidationReport& v) {
  return {{"pdf_distance", v.pdf_distance}, {"acf_rmse", v.acf_rmse}};
}

}  // namespace fastmc::report

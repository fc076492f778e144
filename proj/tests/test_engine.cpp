#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastmc/engine.hpp"

using namespace fastmc;
using Kind = DistributionPreset::Kind;

namespace {

const ResponseFunction kConstantSeven = [](std::span<const double>, const TimeGrid&) { return 7.0; };

ItoModel unit_diffusion() {
  return ItoModel(PolynomialMap::zero(1, 1, 1), PolynomialMap(1, 1, 1, {univariate_entry({1.0})}));
}

double path_mean(std::span<const double> path, const TimeGrid&) {
  return std::accumulate(path.begin(), path.end(), 0.0) / static_cast<double>(path.size());
}

}  // namespace

TEST(RunningStats, MatchesTwoPass) {
  RunningStats s;
  const std::vector<double> x{1e9 + 1, 1e9 + 2, 1e9 + 4, 1e9 + 7};
  for (double v : x) s.add(v);
  EXPECT_DOUBLE_EQ(s.mean(), 1e9 + 3.5);
  EXPECT_NEAR(s.variance(), (6.25 + 2.25 + 0.25 + 12.25) / 3.0, 1e-6);
  RunningStats one;
  one.add(4.0);
  EXPECT_EQ(one.variance(), 0.0);
}

TEST(ConvergenceDegree, Examples) {
  EXPECT_EQ(convergence_degree(std::vector<double>(8, 2.0)), 0.0);
  EXPECT_EQ(convergence_degree(std::vector<double>{9, 9, 1, 2, 3, 4, 5}), 4.0);
  EXPECT_NEAR(convergence_degree(std::vector<double>{3, 3, 3, 3, 3.002}), 0.002, 1e-15);
  EXPECT_THROW(convergence_degree(std::vector<double>{1, 2, 3, 4}), NumericalError);
}

TEST(Traditional, ConstantResponse) {
  const auto r = run_traditional_mcs(make_preset({Kind::gaussian, 0, 1}), kConstantSeven, TimeGrid(0, 1, 0.1),
                                     std::vector<double>{0.0}, 50, 1);
  EXPECT_EQ(r.final_mean, 7.0);
  EXPECT_EQ(r.final_variance, 0.0);
  EXPECT_EQ(r.sizes.size(), 50u);
  EXPECT_TRUE(std::isnan(r.degree_mean[3]));
  EXPECT_EQ(r.degree_mean[4], 0.0);
}

TEST(Traditional, ZeroDiffusionHasZeroVariance) {
  ItoModel det(PolynomialMap(1, 1, 1, {univariate_entry({0.0, -1.0})}), PolynomialMap::zero(1, 1, 1));
  const auto r = run_traditional_mcs(det, EndpointRrf{}, TimeGrid(0, 1, 0.01), std::vector<double>{1.0}, 20, 3);
  EXPECT_EQ(r.final_variance, 0.0);
  EXPECT_NEAR(r.final_mean, std::pow(0.99, 100), 1e-14);
}

TEST(Traditional, GaussianEndpointMoments) {
  const auto r = run_traditional_mcs(make_preset({Kind::gaussian, 0.5, 2.0}), EndpointRrf{}, TimeGrid(0, 10, 0.01),
                                     std::vector<double>{0.5}, 20000, 8);
  const double var = 2.0 / (1.0 - 0.005);
  EXPECT_NEAR(r.final_mean, 0.5, 4.5 * std::sqrt(var / 20000));
  EXPECT_NEAR(r.final_variance, var, 4.5 * var * std::sqrt(2.0 / 20000));
}

TEST(Traditional, PrefixEqualsFreshRun) {
  const auto model = make_preset({Kind::gaussian, 0, 1});
  const TimeGrid g(0, 2, 0.05);
  const std::vector<double> xi0{0.0};
  const auto full = run_traditional_mcs(model, EndpointRrf{}, g, xi0, 40, 77);
  for (std::size_t n : {1u, 7u, 25u}) {
    const auto fresh = run_traditional_mcs(model, EndpointRrf{}, g, xi0, n, 77);
    EXPECT_EQ(full.mean[n - 1], fresh.final_mean);
    EXPECT_EQ(full.variance[n - 1], fresh.final_variance);
  }
}

TEST(Traditional, UnbiasedOverReplications) {
  const auto model = make_preset({Kind::gaussian, 1.5, 1.0});
  const TimeGrid g(0, 5, 0.01);
  const std::size_t reps = 200;
  double sum = 0.0, sq = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const double m = run_traditional_mcs(model, EndpointRrf{}, g, std::vector<double>{1.5}, 50, 1000 + r).final_mean;
    sum += m;
    sq += m * m;
  }
  const double grand = sum / reps;
  const double se = std::sqrt((sq / reps - grand * grand) / reps);
  EXPECT_LT(std::abs(grand - 1.5), 3.0 * se);
}

TEST(Traditional, SimulatorErrorsCarrySampleIndex) {
  int calls = 0;
  const ResponseFunction failing = [&](std::span<const double> path, const TimeGrid&) {
    if (calls++ == 3) throw std::runtime_error("solver diverged");
    return path.back();
  };
  try {
    run_traditional_mcs(make_preset({Kind::gaussian, 0, 1}), failing, TimeGrid(0, 1, 0.1), std::vector<double>{0.0}, 10, 1);
    FAIL();
  } catch (const SimulatorError& e) {
    EXPECT_NE(std::string(e.what()).find("sample 3"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("solver diverged"), std::string::npos);
  }
  const ResponseFunction nan_rrf = [](std::span<const double>, const TimeGrid&) { return NAN; };
  EXPECT_THROW(run_traditional_mcs(make_preset({Kind::gaussian, 0, 1}), nan_rrf, TimeGrid(0, 1, 0.1),
                                   std::vector<double>{0.0}, 3, 1),
               SimulatorError);
}

TEST(Traditional, RejectsZeroBudget) {
  EXPECT_THROW(run_traditional_mcs(make_preset({Kind::gaussian, 0, 1}), kConstantSeven, TimeGrid(0, 1, 0.1),
                                   std::vector<double>{0.0}, 0, 1),
               InputError);
}

TEST(Fast, ConstantResponse) {
  for (std::size_t K : {1u, 6u}) {
    const auto r = run_fast_mcs(wind_power_model(), kConstantSeven, TimeGrid(0, 10, 0.1), std::vector<double>{0.93},
                                30, K, 2);
    EXPECT_EQ(r.final_mean, 7.0);
    EXPECT_EQ(r.final_variance, 0.0);
    EXPECT_EQ(r.K, K);
  }
}

TEST(Fast, LhsBeatsSrsOnLinearResponse) {
  const TimeGrid g(0, 1, 0.01);
  const std::size_t reps = 200, N = 20;
  auto estimator_variance = [&](SampleMethod method) {
    FastOptions fo;
    fo.sampling = method;
    fo.decorrelate = false;
    double sum = 0.0, sq = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const double m = run_fast_mcs(unit_diffusion(), path_mean, g, std::vector<double>{0.0}, N, 6, 500 + r, fo).final_mean;
      sum += m;
      sq += m * m;
    }
    const double mean = sum / reps;
    return (sq - reps * mean * mean) / (reps - 1);
  };
  EXPECT_LT(estimator_variance(SampleMethod::lhs), estimator_variance(SampleMethod::srs));
}

TEST(Fast, AgreesWithTraditionalOnOrnsteinUhlenbeck) {
  const auto model = make_preset({Kind::gaussian, 0, 1});
  const TimeGrid g(0, 2, 0.01);
  const std::vector<double> xi0{1.0};
  const auto f = run_fast_mcs(model, EndpointRrf{}, g, xi0, 4000, 8, 5);
  const auto t = run_traditional_mcs(model, EndpointRrf{}, g, xi0, 4000, 5);
  const double band = 2.576 * std::sqrt(f.final_variance / 4000 + t.final_variance / 4000);
  EXPECT_LT(std::abs(f.final_mean - t.final_mean), band);
}

TEST(Engine, WorkerCountDoesNotChangeResults) {
  const auto model = wind_power_model();
  const TimeGrid g(0, 20, 0.05);
  const std::vector<double> xi0{0.93};
  FrequencyRrf rrf;
  rrf.model.schedule = 0.93;
  rrf.window_end = 20;
  for (EstimateMode mode : {EstimateMode::prefix, EstimateMode::rerun}) {
    RunOptions one{1, mode, 20}, many{8, mode, 20};
    const auto a = run_fast_mcs(model, rrf, g, xi0, 24, 6, 9, {}, one);
    const auto b = run_fast_mcs(model, rrf, g, xi0, 24, 6, 9, {}, many);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.variance, b.variance);
    const auto c = run_traditional_mcs(model, rrf, g, xi0, 24, 9, one);
    const auto d = run_traditional_mcs(model, rrf, g, xi0, 24, 9, many);
    EXPECT_EQ(c.mean, d.mean);
    EXPECT_EQ(c.samples, d.samples);
  }
}

TEST(Engine, RerunModeSizesAndSeeds) {
  const auto model = make_preset({Kind::gaussian, 0, 1});
  const TimeGrid g(0, 1, 0.1);
  const std::vector<double> xi0{0.0};
  RunOptions opts{1, EstimateMode::rerun, 6};
  const auto r = run_traditional_mcs(model, EndpointRrf{}, g, xi0, 12, 4, opts);
  EXPECT_EQ(r.sizes, (std::vector<std::size_t>{6, 7, 8, 9, 10, 11, 12}));
  EXPECT_TRUE(std::isnan(r.degree_mean[3]));
  EXPECT_FALSE(std::isnan(r.degree_mean[4]));
  const auto fresh = run_traditional_mcs(model, EndpointRrf{}, g, xi0, 9, mix_seed(4, 9));
  EXPECT_EQ(r.mean[3], fresh.final_mean);
}

TEST(Compare, IdenticalReportsGiveUnitSpeedup) {
  const auto r = run_traditional_mcs(make_preset({Kind::gaussian, 0, 1}), EndpointRrf{}, TimeGrid(0, 1, 0.1),
                                     std::vector<double>{0.0}, 60, 3);
  const auto c = compare_methods(r, r, Statistic::mean);
  EXPECT_TRUE(c.reached);
  EXPECT_EQ(c.N_A, c.N_B);
  EXPECT_EQ(c.speedup, 1.0);
}

TEST(Compare, ZeroDiffusionConvergesAtFive) {
  ItoModel det(PolynomialMap(1, 1, 1, {univariate_entry({0.0, -1.0})}), PolynomialMap::zero(1, 1, 1));
  const TimeGrid g(0, 1, 0.1);
  const auto a = run_traditional_mcs(det, EndpointRrf{}, g, std::vector<double>{1.0}, 30, 1);
  const auto b = run_fast_mcs(det, EndpointRrf{}, g, std::vector<double>{1.0}, 30, 6, 1);
  for (Statistic s : {Statistic::mean, Statistic::variance}) {
    const auto c = compare_methods(a, b, s);
    EXPECT_EQ(c.N_A, 5u);
    EXPECT_EQ(c.N_B, 5u);
    EXPECT_EQ(c.speedup, 1.0);
  }
}

TEST(Compare, NotReachedAndTooSmall) {
  StatsReport a, b;
  a.sizes = {1, 2, 3, 4, 5};
  a.degree_mean = {NAN, NAN, NAN, NAN, 0.001};
  b.sizes = {1, 2, 3, 4, 5};
  b.degree_mean = {NAN, NAN, NAN, NAN, 0.5};
  const auto c = compare_methods(a, b, Statistic::mean);
  EXPECT_FALSE(c.reached);
  EXPECT_TRUE(std::isnan(c.speedup));
  StatsReport tiny;
  tiny.sizes = {1, 2, 3};
  tiny.degree_mean = {NAN, NAN, NAN};
  EXPECT_THROW(compare_methods(tiny, b, Statistic::mean), NumericalError);
}

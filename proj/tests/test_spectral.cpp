#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fastmc/spectral.hpp"

using namespace fastmc;
using Kind = DistributionPreset::Kind;

namespace {

ItoModel unit_diffusion() {
  return ItoModel(PolynomialMap::zero(1, 1, 1), PolynomialMap(1, 1, 1, {univariate_entry({1.0})}));
}

}  // namespace

TEST(KleBasis, SpotValues) {
  EXPECT_DOUBLE_EQ(kle_basis(1, 1.7, 4.0), 0.5);
  EXPECT_DOUBLE_EQ(kle_basis(2, 0.0, 1.0), std::numbers::sqrt2);
  EXPECT_NEAR(kle_basis(2, 0.5, 1.0), 0.0, 1e-15);
}

TEST(KleBasis, RejectsBadArguments) {
  EXPECT_THROW(kle_basis(0, 0.5, 1.0), InputError);
  EXPECT_THROW(kle_basis(1, -0.1, 1.0), InputError);
  EXPECT_THROW(kle_basis(1, 1.1, 1.0), InputError);
}

TEST(KleBasis, OrthonormalUnderGaussLegendre) {
  // composite 5-point Gauss-Legendre, 200 panels
  for (double T : {1.0, 60.0, 300.0}) {
    const int panels = 200, order = 5;
    const double gx[order] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
    const double gw[order] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                              0.2369268850561891};
    for (std::size_t i = 1; i <= 12; ++i) {
      for (std::size_t j = i; j <= 12; ++j) {
        double s = 0.0;
        const double w = T / panels;
        for (int p = 0; p < panels; ++p) {
          for (int q = 0; q < order; ++q) {
            const double t = (p + 0.5) * w + 0.5 * w * gx[q];
            s += 0.5 * w * gw[q] * kle_basis(i, t, T) * kle_basis(j, t, T);
          }
        }
        EXPECT_NEAR(s, i == j ? 1.0 : 0.0, 1e-8) << "T=" << T << " i=" << i << " j=" << j;
      }
    }
  }
}

TEST(ReconstructRate, Examples) {
  const KleConfig one{1, 1.0, 1};
  EXPECT_EQ(reconstruct_wiener_rate(std::vector<double>{0.0}, 0.3, one), 0.0);
  EXPECT_DOUBLE_EQ(reconstruct_wiener_rate(std::vector<double>{1.0}, 0.3, one), 1.0);
  EXPECT_DOUBLE_EQ(reconstruct_wiener_rate(std::vector<double>{0.0, 1.0}, 0.0, KleConfig{2, 1.0, 1}), std::numbers::sqrt2);
  EXPECT_THROW(reconstruct_wiener_rate(std::vector<double>{1.0, 2.0}, 0.0, one), InputError);
}

TEST(WienerBridge, Examples) {
  const auto w = wiener_bridge_check(std::vector<double>{1.0}, KleConfig{1, 1.0, 1}, 10);
  EXPECT_EQ(w.size(), 11u);
  EXPECT_EQ(w[0], 0.0);
  EXPECT_DOUBLE_EQ(w[10], 1.0);
  EXPECT_NEAR(w[3], 0.3, 1e-15);
  const auto z = wiener_bridge_check(std::vector<double>(5, 0.0), KleConfig{5, 2.0, 1}, 7);
  for (double v : z) EXPECT_EQ(v, 0.0);
  const auto r = wiener_bridge_check(std::vector<double>{0.3, -1.2, 2.0, 0.4}, KleConfig{4, 3.0, 1}, 9);
  EXPECT_EQ(r[0], 0.0);
  EXPECT_THROW(wiener_bridge_check(std::vector<double>{1.0}, KleConfig{1, 1.0, 1}, 0), InputError);
}

TEST(SpectralPath, DriftOnlyExponentialDecay) {
  const auto m = make_preset({Kind::gaussian, 0.0, 1.0});
  const TimeGrid g(0.0, 1.0, 0.01);
  // zeta = 0 removes the noise; additive noise has no correction term
  const auto path = spectral_path(m, std::vector<double>(6, 0.0), g, KleConfig{6, 1.0, 1}, std::vector<double>{1.0});
  EXPECT_NEAR(path.back(), std::exp(-1.0), 1e-6);
}

TEST(SpectralPath, UnitDiffusionEndpointIsZetaOneRootT) {
  for (std::size_t K : {1u, 6u, 20u}) {
    const double T = 5.0;
    std::vector<double> zeta(K);
    for (std::size_t j = 0; j < K; ++j) zeta[j] = std::sin(1.0 + 3.0 * j);
    const auto path = spectral_path(unit_diffusion(), zeta, TimeGrid(0.0, T, 0.01), KleConfig{K, T, 1}, std::vector<double>{0.0});
    EXPECT_NEAR(path.back(), zeta[0] * std::sqrt(T), 1e-9) << "K=" << K;
  }
}

TEST(SpectralPath, MatchesWienerBridgeAtGridPoints) {
  const double T = 2.0;
  const std::vector<double> zeta{0.7, -1.1, 0.4, 2.0, -0.3};
  const auto path = spectral_path(unit_diffusion(), zeta, TimeGrid(0.0, T, 0.004), KleConfig{5, T, 1}, std::vector<double>{0.0});
  const auto w = wiener_bridge_check(zeta, KleConfig{5, T, 1}, 500);
  for (std::size_t k = 0; k <= 500; ++k) EXPECT_NEAR(path[k], w[k], 1e-9);
}

TEST(SpectralPath, Deterministic) {
  const auto m = wind_power_model();
  const std::vector<double> zeta{0.3, -1.0, 0.5, 1.2, -0.7, 0.1};
  const TimeGrid g(0.0, 60.0, 0.05);
  const auto a = spectral_path(m, zeta, g, KleConfig{6, 60.0, 1}, std::vector<double>{0.93});
  const auto b = spectral_path(m, zeta, g, KleConfig{6, 60.0, 1}, std::vector<double>{0.93});
  EXPECT_EQ(a, b);
}

TEST(SpectralPath, ItoCorrectionChangesOnlyMultiplicativeNoise) {
  const std::vector<double> zeta{0.3, -1.0, 0.5};
  const TimeGrid g(0.0, 10.0, 0.01);
  const KleConfig cfg{3, 10.0, 1};
  const auto gauss = make_preset({Kind::gaussian, 0.0, 1.0});
  EXPECT_EQ(spectral_path(gauss, zeta, g, cfg, std::vector<double>{0.2}, {true}),
            spectral_path(gauss, zeta, g, cfg, std::vector<double>{0.2}, {false}));
  const auto wind = wind_power_model();
  EXPECT_NE(spectral_path(wind, zeta, g, cfg, std::vector<double>{0.93}, {true}),
            spectral_path(wind, zeta, g, cfg, std::vector<double>{0.93}, {false}));
}

TEST(SpectralPath, RejectsMismatches) {
  const auto m = unit_diffusion();
  const TimeGrid g(0.0, 1.0, 0.1);
  EXPECT_THROW(spectral_path(m, std::vector<double>{1.0, 2.0}, g, KleConfig{1, 1.0, 1}, std::vector<double>{0.0}), InputError);
  EXPECT_THROW(spectral_path(m, std::vector<double>{1.0}, g, KleConfig{1, 2.0, 1}, std::vector<double>{0.0}), InputError);
  EXPECT_THROW(spectral_path(m, std::vector<double>{NAN}, g, KleConfig{1, 1.0, 1}, std::vector<double>{0.0}), InputError);
  EXPECT_THROW(KleConfig({0, 1.0, 1}).validate(), InputError);
}

TEST(SpectralPath, NonFiniteStateReportsStep) {
  ItoModel blowup(PolynomialMap(1, 1, 1, {univariate_entry({0.0, 0.0, 1.0})}), PolynomialMap::zero(1, 1, 1));
  try {
    spectral_path(blowup, std::vector<double>{0.0}, TimeGrid(0.0, 10.0, 0.5), KleConfig{1, 10.0, 1},
                  std::vector<double>{10.0});
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(SpectralPath, TwoDimensionalRowMajorCoefficients) {
  // independent unit diffusions: component i sees coefficients i*K .. i*K+K-1
  std::vector<MapEntry> s = {MapEntry{{{{0, 0}, 1.0}}, {}, false}, MapEntry{}, MapEntry{}, MapEntry{{{{0, 0}, 1.0}}, {}, false}};
  ItoModel m(PolynomialMap::zero(2, 2, 1), PolynomialMap(2, 2, 2, s));
  const std::vector<double> zeta{0.5, 0.1, -2.0, 0.3};
  const auto path = spectral_path(m, zeta, TimeGrid(0.0, 4.0, 0.01), KleConfig{2, 4.0, 2}, std::vector<double>{0.0, 0.0});
  EXPECT_NEAR(path[path.size() - 2], 0.5 * 2.0, 1e-9);
  EXPECT_NEAR(path[path.size() - 1], -2.0 * 2.0, 1e-9);
}

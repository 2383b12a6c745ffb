#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "shockstab/spectral.hpp"

using namespace shockstab;

namespace {

TorusField random_field(int n2, int n3, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  TorusField h{n2, n3, std::vector<double>(n2 * n3)};
  for (double& v : h.v) v = N(rng);
  return h;
}

std::vector<double> matvec(const std::vector<double>& M, const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) y[a] += M[a * n + b] * x[b];
  return y;
}

}  // namespace

TEST(spectral, wavenumbers_are_signed) {
  EXPECT_EQ(wavenumber(0, 8), 0);
  EXPECT_EQ(wavenumber(4, 8), 4);
  EXPECT_EQ(wavenumber(5, 8), -3);
  EXPECT_EQ(wavenumber(7, 8), -1);
}

TEST(spectral, parseval_identity) {
  for (auto [n2, n3] : {std::pair{4, 4}, std::pair{6, 5}, std::pair{8, 8}}) {
    const TorusField h = random_field(n2, n3, 17 + n2);
    const auto c = torus_dft(h);
    double s = 0.0;
    for (const auto& z : c) s += std::norm(z);
    EXPECT_NEAR(s, torus_norm2(h), 1e-12 * torus_norm2(h));
  }
}

TEST(spectral, zero_mode_is_mean) {
  const TorusField h = random_field(6, 6, 3);
  const ModeSplit m = mode_decompose(h);
  EXPECT_NEAR(m.zero, torus_dft(h)[0].real(), 1e-14);
  double s = 0.0;
  for (double v : m.nonzero.v) s += v;
  EXPECT_NEAR(s, 0.0, 1e-12);
  EXPECT_NEAR(torus_norm2(h), m.zero * m.zero + torus_norm2(m.nonzero), 1e-12);
}

TEST(spectral, poincare_inequality) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const TorusField h = random_field(8, 8, seed);
    EXPECT_LE(poincare_ratio(h), 1.0 / (2.0 * kPi) + 1e-14);
  }
  TorusField single{8, 8, std::vector<double>(64)};
  for (int j = 0; j < 8; ++j)
    for (int k = 0; k < 8; ++k) single.v[j * 8 + k] = std::cos(2.0 * kPi * j / 8.0);
  EXPECT_NEAR(poincare_ratio(single), 1.0 / (2.0 * kPi), 1e-14);
}

TEST(spectral, derivative_and_filter) {
  const int n = 12;
  const SpectralAxis ax(n);
  EXPECT_EQ(ax.k_cut, 4);
  for (int k = 1; k <= 6; ++k) {
    std::vector<double> f(n), df(n);
    for (int j = 0; j < n; ++j) {
      f[j] = std::sin(2.0 * kPi * k * j / n);
      df[j] = 2.0 * kPi * k * std::cos(2.0 * kPi * k * j / n);
    }
    const std::vector<double> d = matvec(ax.deriv, f);
    const std::vector<double> g = matvec(ax.filter, f);
    for (int j = 0; j < n; ++j) {
      if (k <= ax.k_cut) {
        EXPECT_NEAR(d[j], df[j], 1e-12);
        EXPECT_NEAR(g[j], f[j], 1e-13);
      } else {
        EXPECT_NEAR(d[j], 0.0, 1e-12);
        EXPECT_NEAR(g[j], 0.0, 1e-13);
      }
    }
  }
}

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "shockstab/kinetic.hpp"
#include "shockstab/transport.hpp"

using namespace shockstab;

namespace {

double gram_defect(const GasState& s, const VelocityGrid& g) {
  const MicroBasis b = micro_basis(s, g);
  const VelocityFunction M = maxwellian(s, g);
  double d = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) d = std::max(d, std::abs(inner_product_M(b.chi[i], b.chi[j], M, g) - (i == j)));
  return d;
}

VelocityFunction random_function(const GasState& s, const VelocityGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const VelocityFunction M = maxwellian(s, g);
  std::array<double, 6> c{};
  for (double& x : c) x = U(rng);
  VelocityFunction h(g.size());
  for (std::size_t q = 0; q < g.size(); ++q) {
    const Vec3 v = g.node(q) - s.u;
    h[q] = M[q] * (c[0] + c[1] * v[0] + c[2] * v[1] * v[2] + c[3] * norm2(v) + c[4] * v[0] * norm2(v) + c[5] * v[0] * v[0]);
  }
  return h;
}

}  // namespace

TEST(kinetic, maxwellian_moments_reproduce_state) {
  const VelocityGrid g(8.0, 32);
  for (const GasState& s : {GasState::planar(1.0, 0.0, 1.0), GasState{0.7, {0.5, -0.3, 0.2}, 1.4}, GasState::planar(2.0, -1.0, 0.5)}) {
    ASSERT_LE(std::sqrt(norm2(s.u)) + 3.0 * std::sqrt(s.theta), 0.8 * g.v_max());
    const GasState m = conserved_to_primitive(moments(maxwellian(s, g), g));
    EXPECT_NEAR(m.rho, s.rho, 1e-8);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(m.u[i], s.u[i], 1e-8);
    EXPECT_NEAR(m.theta, s.theta, 1e-8);
  }
}

TEST(kinetic, gram_defect_shrinks_under_refinement) {
  const GasState s = GasState::planar(1.0, 0.2, 1.0);
  const double coarse = gram_defect(s, VelocityGrid(8.0, 12));
  const double mid = gram_defect(s, VelocityGrid(8.0, 16));
  const double fine = gram_defect(s, VelocityGrid(8.0, 32));
  EXPECT_LT(mid, 0.5 * coarse);
  EXPECT_LT(fine, 0.5 * mid + 1e-14);
  EXPECT_LT(fine, 1e-6);
}

TEST(kinetic, projections_are_complementary) {
  const VelocityGrid g(8.0, 24);
  const GasState s{1.2, {0.3, 0.1, -0.2}, 0.9};
  const MicroBasis b = micro_basis(s, g);
  const VelocityFunction M = maxwellian(s, g);
  const VelocityFunction h = random_function(s, g, 3);
  const VelocityFunction p0 = project_P0(h, b, g), p1 = project_P1(h, b, g);
  for (std::size_t q = 0; q < g.size(); ++q) EXPECT_NEAR(p0[q] + p1[q], h[q], 1e-14);
  const double hn = inner_product_M(h, h, M, g);
  EXPECT_NEAR(inner_product_M(p0, p1, M, g) / hn, 0.0, 1e-8);
  const VelocityFunction p00 = project_P0(p0, b, g);
  VelocityFunction e(g.size());
  for (std::size_t q = 0; q < g.size(); ++q) e[q] = p00[q] - p0[q];
  EXPECT_LT(std::sqrt(inner_product_M(e, e, M, g) / hn), 1e-8);
  // The microscopic part carries no conserved moments.
  const Conserved m1 = moments(p1, g);
  EXPECT_NEAR(m1.rho, 0.0, 1e-8);
  EXPECT_NEAR(m1.E, 0.0, 1e-8);
}

TEST(kinetic, linearized_collision_conserves) {
  const GasState s = GasState::planar(0.9, -0.1, 1.1);
  // Moments of the collision term vanish up to the quadrature defect of the grid.
  for (int n : {24, 32}) {
    const VelocityGrid g(8.0, n);
    const Transport tr{};
    const VelocityFunction h = random_function(s, g, 9);
    const Conserved m = moments(bgk_linearized(h, micro_basis(s, g), g, tr), g);
    double scale = 0.0;
    for (std::size_t q = 0; q < g.size(); ++q) scale += g.weight(q) * std::abs(h[q]) * (1.0 + norm2(g.node(q)));
    const double tol = 10.0 * tr.nu(s.rho, s.theta) * scale * gram_defect(s, g) + 1e-13;
    EXPECT_NEAR(m.rho, 0.0, tol);
    for (double v : m.m) EXPECT_NEAR(v, 0.0, tol);
    EXPECT_NEAR(m.E, 0.0, tol);
  }
}

TEST(kinetic, discrete_maxwellian_matches_moments_exactly) {
  const VelocityGrid g(6.0, 12);
  const Conserved target = primitive_to_conserved(GasState{1.3, {0.4, 0.0, -0.1}, 0.8});
  VelocityFunction f(g.size());
  evaluate(match_maxwellian(target, g), g, f.data());
  const Conserved m = moments(f, g);
  EXPECT_NEAR(m.rho, target.rho, 1e-13);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(m.m[i], target.m[i], 1e-13);
  EXPECT_NEAR(m.E, target.E, 1e-13);
}

TEST(kinetic, chapman_enskog_part_reproduces_navier_stokes_fluxes) {
  const VelocityGrid g(9.0, 40);
  const GasState s = GasState::planar(1.0, 0.1, 1.0);
  const Transport tr = Transport::bgk_consistent(20.0);
  Mat3 du{};
  du[0][0] = 0.02;
  du[1][0] = -0.01;
  const Vec3 dth{0.03, 0.0, 0.0};
  const VelocityFunction G = chapman_enskog_microscopic(s, du, dth, g, tr);
  // Second and heat moments of G against the Newton and Fourier laws.
  double s11 = 0.0, s21 = 0.0, q1 = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec3 c = g.node(k) - s.u;
    const double w = g.weight(k) * G[k];
    s11 += w * c[0] * c[0];
    s21 += w * c[1] * c[0];
    q1 += w * 0.5 * norm2(c) * c[0];
  }
  const double mu = tr.mu(s.theta), kappa = tr.kappa(s.theta);
  EXPECT_NEAR(-s11, mu * (2.0 * du[0][0] - 2.0 / 3.0 * du[0][0]), 1e-6);
  EXPECT_NEAR(-s21, mu * du[1][0], 1e-6);
  EXPECT_NEAR(q1, -kappa * dth[0], 1e-6);
  const Conserved m = moments(G, g);
  EXPECT_NEAR(m.rho, 0.0, 1e-10);
}

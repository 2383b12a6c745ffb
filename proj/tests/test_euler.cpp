#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "shockstab/euler.hpp"

using namespace shockstab;

namespace {
// Textbook normal-shock density ratio for gamma = 5/3.
double density_ratio_gamma(double beta) {
  const double g = 5.0 / 3.0;
  return ((g + 1) * beta + (g - 1)) / ((g - 1) * beta + (g + 1));
}
}  // namespace

TEST(euler, hugoniot_state_satisfies_jump_conditions) {
  const GasState up = GasState::planar(1.1, 0.2, 0.8);
  for (int fam : {1, 3})
    for (double sigma : {0.01, 0.3, 2.0}) {
      const ShockJump j = hugoniot_state(up, fam, sigma);
      const Vec3 r = rankine_hugoniot_residual(up, j.state, j.speed);
      for (double v : r) EXPECT_NEAR(v, 0.0, 1e-13);
      EXPECT_NEAR(j.state.pressure() / up.pressure(), 1.0 + sigma, 1e-13);
      EXPECT_NEAR(j.state.rho / up.rho, density_ratio_gamma(1.0 + sigma), 1e-13);
    }
}

TEST(euler, zero_strength_is_identity) {
  const GasState s = GasState::planar(1.0, 0.1, 1.0);
  const ShockJump j = hugoniot_state(s, 3, 0.0);
  EXPECT_EQ(j.state.rho, s.rho);
  EXPECT_DOUBLE_EQ(j.speed, euler_eigenvalues(s)[2]);
}

TEST(euler, negative_strength_rejected) {
  try {
    hugoniot_state(GasState::planar(1, 0, 1), 1, -0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BranchViolation);
  }
}

TEST(euler, upstream_inverts_downstream) {
  const GasState d = GasState::planar(1.3, -0.2, 1.1);
  for (int fam : {1, 3}) {
    const ShockJump up = hugoniot_upstream(d, fam, 0.4);
    const ShockJump back = hugoniot_state(up.state, fam, 0.4);
    EXPECT_NEAR(back.state.rho, d.rho, 1e-13);
    EXPECT_NEAR(back.state.u[0], d.u[0], 1e-13);
    EXPECT_NEAR(back.state.theta, d.theta, 1e-13);
    EXPECT_NEAR(back.speed, up.speed, 1e-13);
  }
}

TEST(euler, manufactured_two_shock_recovered) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> R(0.5, 2.0), U(-1.0, 1.0), S(0.01, 0.5);
  for (int k = 0; k < 50; ++k) {
    const GasState left = GasState::planar(R(rng), U(rng), R(rng));
    const GasState mid = hugoniot_state(left, 1, S(rng)).state;
    const GasState right = hugoniot_upstream(mid, 3, S(rng)).state;
    const CompositeWaveSolution sol = solve_intermediate_state({left, right});
    EXPECT_NEAR(sol.intermediate.rho / mid.rho, 1.0, 1e-8);
    EXPECT_NEAR(sol.intermediate.u[0], mid.u[0], 1e-8);
    EXPECT_NEAR(sol.intermediate.theta / mid.theta, 1.0, 1e-8);
    EXPECT_LT(sol.rh_residual, 1e-10);
    for (bool b : sol.lax) EXPECT_TRUE(b);
    EXPECT_DOUBLE_EQ(sol.delta, std::min(sol.delta_s1, sol.delta_s3));
  }
}

TEST(euler, identical_states_give_zero_strength) {
  const GasState s = GasState::planar(1.0, 0.3, 1.2);
  const CompositeWaveSolution sol = solve_intermediate_state({s, s});
  EXPECT_EQ(sol.delta, 0.0);
  EXPECT_EQ(sol.intermediate.rho, s.rho);
}

TEST(euler, expanding_data_is_not_two_shock) {
  const RiemannData rd{GasState::planar(1.0, -0.5, 1.0), GasState::planar(1.0, 0.5, 1.0)};
  EXPECT_THROW(solve_intermediate_state(rd), Error);
}

TEST(euler, contact_data_is_not_two_shock) {
  // Equal pressure and velocity but different densities: a pure contact.
  const RiemannData rd{GasState::planar(1.0, 0.0, 1.0), GasState::planar(2.0, 0.0, 0.5)};
  try {
    solve_intermediate_state(rd);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotTwoShock);
  }
}

TEST(euler, strength_for_wave_strength_hits_target) {
  const GasState mid = GasState::planar(1.0, 0.0, 1.0);
  for (double d : {0.02, 0.05, 0.3}) {
    const double sigma = strength_for_wave_strength(mid, 3, d);
    EXPECT_NEAR(shock_strength(mid, hugoniot_upstream(mid, 3, sigma).state), d, 1e-13);
  }
}

TEST(euler, symmetric_data_has_symmetric_solution) {
  const GasState mid = GasState::planar(1.0, 0.0, 1.0);
  const RiemannData rd = manufacture_two_shock(mid, 0.2, 0.2);
  const CompositeWaveSolution sol = solve_intermediate_state(rd);
  EXPECT_NEAR(sol.s1, -sol.s3, 1e-12);
  EXPECT_NEAR(sol.intermediate.u[0], 0.0, 1e-12);
}

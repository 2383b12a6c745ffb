#include <gtest/gtest.h>

#include <cmath>

#include "shockstab/fluid_solver.hpp"
#include "shockstab/profile.hpp"

using namespace shockstab;

namespace {

// Largest |u1 - travelling profile| over |x1| <= window; the far field is
// excluded because the table tail is clamped to the end states.
double max_deviation_from_profile(int N, double L, const ShockProfile& p, double t_end, double window) {
  FluidSolver fs(Grid{N, L, 1, 1}, Transport{}, p.left, p.right);
  fs.set_initial([&](double x, double, double) { return to_state5(p.at(x).state); });
  fs.advance_to(t_end);
  double err = 0.0;
  for (int i = 0; i < N; ++i) {
    const double x = fs.grid().x(i);
    if (std::abs(x) > window) continue;
    const GasState g = fs.prim(&fs.state()[fs.grid().at(i, 0, 0)]);
    err = std::max(err, std::abs(g.u[0] - p.at(x - p.s * t_end).state.u[0]));
  }
  return err;
}

}  // namespace

TEST(fluid_solver, constant_state_is_steady) {
  const GasState s{1.1, {0.3, 0.0, 0.0}, 0.9};
  FluidSolver fs(Grid{64, 10.0, 4, 4}, Transport{}, s, s);
  fs.set_initial([&](double, double, double) { return to_state5(s); });
  const std::vector<double> U0 = fs.state();
  fs.advance_to(0.5);
  double d = 0.0;
  for (std::size_t q = 0; q < U0.size(); ++q) d = std::max(d, std::abs(fs.state()[q] - U0[q]));
  EXPECT_LT(d, 1e-13);
}

TEST(fluid_solver, conservation_matches_boundary_flux) {
  const GasState l = GasState::planar(1.2, 0.1, 1.0), r = GasState::planar(1.0, 0.0, 0.9);
  FluidSolver fs(Grid{200, 20.0, 1, 1}, Transport{}, l, r);
  fs.set_initial([&](double x, double, double) { return to_state5(x < 0 ? l : r); });
  const auto T0 = fs.totals();
  fs.advance_to(1.0);
  const auto T1 = fs.totals();
  for (int c = 0; c < 5; ++c) EXPECT_NEAR(T1[c] - T0[c], fs.boundary_inflow()[c], 1e-12);
}

TEST(fluid_solver, transverse_conservation) {
  const GasState s = GasState::planar(1.0, 0.0, 1.0);
  FluidSolver fs(Grid{64, 10.0, 6, 6}, Transport{}, s, s);
  fs.set_initial([&](double x, double y, double z) {
    GasState g = s;
    g.rho += 0.01 * std::exp(-x * x) * std::cos(2 * kPi * y) * std::sin(2 * kPi * z);
    g.u[1] = 0.01 * std::exp(-x * x) * std::sin(2 * kPi * z);
    return to_state5(g);
  });
  const auto T0 = fs.totals();
  const double n0 = fs.nonzero_mode_norm2();
  fs.advance_to(0.5);
  const auto T1 = fs.totals();
  for (int c = 0; c < 5; ++c) EXPECT_NEAR(T1[c] - T0[c], fs.boundary_inflow()[c], 1e-12);
  EXPECT_LT(fs.nonzero_mode_norm2(), n0);
}

TEST(fluid_solver, oversized_step_is_rejected) {
  const GasState s = GasState::planar(1.0, 0.0, 1.0);
  FluidSolver fs(Grid{64, 10.0, 1, 1}, Transport{}, s, s);
  fs.set_initial([&](double, double, double) { return to_state5(s); });
  try {
    fs.step(10.0 * fs.cfl_dt());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CFLViolation);
  }
  EXPECT_NO_THROW(fs.step(fs.cfl_dt()));
}

TEST(fluid_solver, transversely_uniform_data_matches_planar_run) {
  const GasState l = GasState::planar(1.2, 0.1, 1.0), r = GasState::planar(1.0, 0.0, 0.9);
  auto init = [&](double x, double, double) { return to_state5(x < 0 ? l : r); };
  FluidSolver a(Grid{100, 10.0, 1, 1}, Transport{}, l, r), b(Grid{100, 10.0, 3, 3}, Transport{}, l, r);
  a.set_initial(init);
  b.set_initial(init);
  for (int k = 0; k < 20; ++k) {
    const double dt = std::min(a.cfl_dt(), b.cfl_dt());
    a.step(dt);
    b.step(dt);
  }
  double d = 0.0;
  for (int i = 0; i < 100; ++i)
    for (int t = 0; t < 9; ++t)
      for (int c = 0; c < 5; ++c) d = std::max(d, std::abs(b.state()[b.grid().at(i, t, c)] - a.state()[a.grid().at(i, 0, c)]));
  EXPECT_LT(d, 1e-12);
}

TEST(fluid_solver, viscous_shock_travels_with_second_order_error) {
  const GasState mid = GasState::planar(1.0, 0.0, 1.0);
  const ShockJump up = hugoniot_upstream(mid, 3, strength_for_wave_strength(mid, 3, 0.1));
  const Transport tr{};
  const ShockProfile p = solve_profile(mid, up.state, up.speed, 3, tr);
  const double coarse = max_deviation_from_profile(200, 60.0, p, 2.0, 20.0);
  const double fine = max_deviation_from_profile(400, 60.0, p, 2.0, 20.0);
  EXPECT_LT(fine, 1e-4 * p.delta);
  EXPECT_GT(coarse / fine, 3.0);
}

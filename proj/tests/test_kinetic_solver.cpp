#include <gtest/gtest.h>

#include <cmath>

#include "shockstab/kinetic_solver.hpp"

using namespace shockstab;

namespace {

Conserved totals(const KineticSolver& ks) {
  Conserved s{0.0, {0.0, 0.0, 0.0}, 0.0};
  for (int i = 0; i < ks.cells(); ++i) {
    const Conserved c = ks.cell_moments(i);
    s.rho += ks.dx() * c.rho;
    for (int k = 0; k < 3; ++k) s.m[k] += ks.dx() * c.m[k];
    s.E += ks.dx() * c.E;
  }
  return s;
}

}  // namespace

TEST(kinetic_solver, global_equilibrium_is_steady) {
  const VelocityGrid vg(6.0, 12);
  const GasState s = GasState::planar(1.0, 0.2, 1.0);
  KineticSolver ks(32, 4.0, vg, Transport::bgk_consistent(50.0), s, s);
  ks.set_equilibrium([&](double) { return s; });
  std::vector<double> df;
  ks.rhs(ks.distribution(), df);
  double m = 0.0;
  for (double v : df) m = std::max(m, std::abs(v));
  EXPECT_LT(m, 1e-12);
}

TEST(kinetic_solver, collision_conserves_moments) {
  const VelocityGrid vg(6.0, 12);
  const GasState s = GasState::planar(1.0, 0.0, 1.0);
  KineticSolver ks(8, 4.0, vg, Transport::bgk_consistent(50.0), s, s);
  std::vector<double> f(vg.size()), out(vg.size());
  for (std::size_t q = 0; q < vg.size(); ++q) {
    const Vec3 v = vg.node(q);
    f[q] = std::exp(-0.5 * norm2(v - Vec3{0.3, 0.0, 0.0}) / 0.8) * (1.0 + 0.2 * v[0] * v[1]);
  }
  ks.collision(f.data(), out.data());
  const Conserved c = moments(out.data(), vg);
  EXPECT_NEAR(c.rho, 0.0, 1e-11);
  for (double v : c.m) EXPECT_NEAR(v, 0.0, 1e-11);
  EXPECT_NEAR(c.E, 0.0, 1e-11);
}

TEST(kinetic_solver, interior_pulse_conserves_totals) {
  const VelocityGrid vg(6.0, 12);
  const GasState s = GasState::planar(1.0, 0.0, 1.0);
  KineticSolver ks(64, 8.0, vg, Transport::bgk_consistent(50.0), s, s);
  ks.set_equilibrium([&](double x) {
    GasState g = s;
    g.rho += 0.05 * std::exp(-4.0 * x * x);
    g.u[0] = 0.05 * std::exp(-4.0 * x * x);
    return g;
  });
  const Conserved T0 = totals(ks);
  ks.advance_to(0.2);
  const Conserved T1 = totals(ks);
  // Both ghost states coincide, so boundary fluxes cancel until the pulse arrives.
  EXPECT_NEAR(T1.rho, T0.rho, 1e-12);
  EXPECT_NEAR(T1.m[0], T0.m[0], 1e-12);
  EXPECT_NEAR(T1.E, T0.E, 1e-12);
}

TEST(kinetic_solver, oversized_step_is_rejected) {
  const VelocityGrid vg(6.0, 12);
  const GasState s = GasState::planar(1.0, 0.0, 1.0);
  KineticSolver ks(16, 4.0, vg, Transport::bgk_consistent(10.0), s, s);
  ks.set_equilibrium([&](double) { return s; });
  EXPECT_LE(ks.cfl_dt(1.0), ks.dx() / vg.v_max());
  EXPECT_LE(ks.cfl_dt(1.0), 1.0 / 10.0);
  try {
    ks.step(5.0 * ks.cfl_dt());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CFLViolation);
  }
}

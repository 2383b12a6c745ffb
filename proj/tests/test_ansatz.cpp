#include <gtest/gtest.h>

#include <cmath>

#include "shockstab/ansatz.hpp"

using namespace shockstab;

namespace {

struct WaveSetup {
  RiemannData data;
  CompositeWaveSolution sol;
  ProfilePair pp;
  Transport tr;
};

WaveSetup make_setup() {
  WaveSetup s;
  const GasState mid = GasState::planar(1.0, 0.0, 1.0);
  s.data = manufacture_two_shock(mid, strength_for_wave_strength(mid, 1, 0.06), strength_for_wave_strength(mid, 3, 0.05));
  s.sol = solve_intermediate_state(s.data);
  s.pp = solve_profiles(s.data, s.sol, s.tr);
  return s;
}

template <class F>
Vec3 simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  Vec3 s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s = s + (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return (h / 3.0) * s;
}

}  // namespace

TEST(ansatz, mass_decomposition_solves_linear_system) {
  const WaveSetup s = make_setup();
  const Vec3 excess{0.01, -0.02, 0.015};
  const MassDecomposition d = decompose_initial_mass(excess, s.sol, s.data);
  const Vec3 back = d.alpha[0] * d.r1 + d.alpha[1] * d.r2 + d.alpha[2] * d.r3;
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(back[i], excess[i], 1e-14);
  EXPECT_GT(std::abs(d.det), 0.0);
}

TEST(ansatz, carries_prescribed_excess_mass) {
  const WaveSetup s = make_setup();
  const Vec3 excess{0.01, 0.02, -0.01};
  const MassDecomposition d = decompose_initial_mass(excess, s.sol, s.data);
  const CompositeAnsatz A = build_ansatz(s.sol, s.pp.p1, s.pp.p3, d, s.tr);
  const CompositeAnsatz ref(s.pp.p1, s.pp.p3, s.sol.intermediate, s.tr, 0.0, 0.0, 0.0, false);
  const double L = 400.0;
  const Vec3 m = simpson([&](double x) { return A.eval(x, 0.0).U - ref.shocks_only(x, 0.0); }, -L, L, 160000);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(m[i], excess[i], 1e-7);
}

TEST(ansatz, diffusion_wave_solves_heat_equation) {
  const DiffusionWave w{0.3, DiffusionWave::coefficient(0.25, 1.1), 0.2};
  const double h = 1e-4;
  for (double t : {0.0, 1.0, 7.5})
    for (double x : {-3.0, 0.1, 2.0, 6.0}) {
      const double th_t = (w.value(x, t + h) - w.value(x, t - h * (t > 0 ? 1 : 0))) / (t > 0 ? 2 * h : h);
      const double th_x = (w.value(x + h, t) - w.value(x - h, t)) / (2 * h);
      const double th_xx = (w.value(x + h, t) - 2 * w.value(x, t) + w.value(x - h, t)) / (h * h);
      const double scale = std::abs(w.alpha2);
      EXPECT_NEAR(th_t, -w.u_sharp * th_x + w.a * th_xx, (t > 0 ? 1e-6 : 1e-3) * scale);
      EXPECT_NEAR(w.time_derivatives(x, t)[0], -w.u_sharp * th_x + w.a * th_xx, 1e-6 * scale);
      EXPECT_NEAR(w.value(x, t, 1), th_x, 1e-7 * scale);
    }
  for (double t : {0.0, 3.0, 40.0}) {
    const Vec3 m = simpson([&](double x) { return Vec3{w.value(x, t), 0.0, 0.0}; }, -200.0, 200.0, 40000);
    EXPECT_NEAR(m[0], w.alpha2, 1e-12);
  }
}

TEST(ansatz, continuity_equation_holds_exactly) {
  const WaveSetup s = make_setup();
  const MassDecomposition d = decompose_initial_mass({0.01, 0.0, 0.0}, s.sol, s.data);
  const CompositeAnsatz A = build_ansatz(s.sol, s.pp.p1, s.pp.p3, d, s.tr);
  for (double t : {0.0, 2.0, 10.0})
    for (double x = -40.0; x <= 40.0; x += 3.7) EXPECT_NEAR(ansatz_residual(A, x, t).res_mass, 0.0, 1e-12);
}

TEST(ansatz, remainders_small_compared_with_strength) {
  const WaveSetup s = make_setup();
  const MassDecomposition d = decompose_initial_mass({0.01, 0.02, -0.01}, s.sol, s.data);
  const CompositeAnsatz A = build_ansatz(s.sol, s.pp.p1, s.pp.p3, d, s.tr);
  const double delta = s.sol.delta;
  double worst = 0.0;
  const double t = 5.0, h = 1e-3;
  for (double x = -80.0; x <= 80.0; x += 0.5) {
    const auto r = ansatz_residual(A, x, t);
    const auto qp = ansatz_remainders(A, x + h, t), qm = ansatz_remainders(A, x - h, t);
    worst = std::max({worst, std::abs(r.res_mom - (qp[0] - qm[0]) / (2 * h)), std::abs(r.res_energy - (qp[1] - qm[1]) / (2 * h))});
  }
  // The momentum and energy residuals are x-derivatives of the remainders.
  EXPECT_LT(worst, 1e-6 * delta);
}

TEST(ansatz, ablation_removes_wave) {
  const WaveSetup s = make_setup();
  const MassDecomposition d = decompose_initial_mass({0.0, 0.02, 0.0}, s.sol, s.data);
  const CompositeAnsatz A = build_ansatz(s.sol, s.pp.p1, s.pp.p3, d, s.tr, false);
  EXPECT_EQ(A.wave().alpha2, 0.0);
  EXPECT_EQ(A.eval(0.3, 1.0).Theta, 0.0);
}

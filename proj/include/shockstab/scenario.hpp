#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "shockstab/ansatz.hpp"
#include "shockstab/config.hpp"
#include "shockstab/core.hpp"
#include "shockstab/diagnostics.hpp"
#include "shockstab/euler.hpp"
#include "shockstab/fluid_solver.hpp"
#include "shockstab/gas.hpp"
#include "shockstab/kinetic.hpp"
#include "shockstab/kinetic_solver.hpp"
#include "shockstab/profile.hpp"
#include "shockstab/spectral.hpp"
#include "shockstab/transport.hpp"

namespace shockstab {

/// Named text output of a run (CSV or JSON).
struct Artifact {
  std::string name;
  std::string content;
};

struct RunOutput {
  json report;
  std::vector<Artifact> artifacts;
};

/// Command-line overrides applied on top of a scenario config.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  bool ablate_diffusion_wave = false;
  std::optional<std::string> fidelity;
  std::optional<std::pair<int, int>> transverse;
};

/// Uniform doubles from the raw mt19937_64 stream, which the standard fixes
/// bit for bit (unlike std::uniform_real_distribution).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : e_(seed) {}
  double uniform() { return static_cast<double>(e_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

 private:
  std::mt19937_64 e_;
};

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::uint64_t config_seed(const ConfigView& c, const RunOverrides& o) {
  if (o.seed) return *o.seed;
  const long s = c.integer("seed", 0);
  if (s < 0) ConfigView::fail("seed", "must be >= 0");
  return static_cast<std::uint64_t>(s);
}

inline json state_json(const GasState& s) { return {{"rho", s.rho}, {"u1", s.u[0]}, {"theta", s.theta}}; }

inline double elapsed_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// riemann

inline json composite_json(const CompositeWaveSolution& s) {
  return {{"rho_sharp", s.intermediate.rho},
          {"u_sharp", s.intermediate.u[0]},
          {"theta_sharp", s.intermediate.theta},
          {"s1", s.s1},
          {"s3", s.s3},
          {"delta_s1", s.delta_s1},
          {"delta_s3", s.delta_s3},
          {"delta", s.delta},
          {"newton_iterations", s.newton_iterations},
          {"rh_residual", s.rh_residual},
          {"lax", {s.lax[0], s.lax[1], s.lax[2], s.lax[3]}}};
}

/// mode = "solve": one composite-wave table for [states].
/// mode = "manufactured": `count` random two-shock data sets built by
/// composing Hugoniot jumps from a random left state; reports recovery errors.
inline RunOutput run_riemann(const json& cfg, const RunOverrides& o = {}) {
  const ConfigView c(cfg);
  const std::string mode = c.choice("riemann.mode", {"solve", "manufactured"}, "solve");
  RunOutput out;
  const auto t0 = std::chrono::steady_clock::now();
  if (mode == "solve") {
    const EndStates es = parse_states(c);
    const CompositeWaveSolution sol = solve_intermediate_state({es.left, es.right});
    out.report = composite_json(sol);
    out.report["left"] = state_json(es.left);
    out.report["right"] = state_json(es.right);
    if (es.intermediate) {
      const GasState& m = *es.intermediate;
      out.report["recovery_error"] = std::max({std::abs(sol.intermediate.rho - m.rho) / m.rho,
                                               std::abs(sol.intermediate.u[0] - m.u[0]) / std::max(1.0, std::abs(m.u[0])),
                                               std::abs(sol.intermediate.theta - m.theta) / m.theta});
    }
    std::ostringstream csv;
    csv << "rho_sharp,u_sharp,theta_sharp,s1,s3,delta_s1,delta_s3,delta,lax1_down,lax1_up,lax3_up,lax3_down\n";
    csv << fmt(sol.intermediate.rho) << ',' << fmt(sol.intermediate.u[0]) << ',' << fmt(sol.intermediate.theta) << ','
        << fmt(sol.s1) << ',' << fmt(sol.s3) << ',' << fmt(sol.delta_s1) << ',' << fmt(sol.delta_s3) << ','
        << fmt(sol.delta) << ',' << sol.lax[0] << ',' << sol.lax[1] << ',' << sol.lax[2] << ',' << sol.lax[3] << '\n';
    out.artifacts.push_back({"riemann.csv", csv.str()});
  } else {
    const long count = c.positive_integer("riemann.count");
    const auto rho_r = c.numbers("riemann.rho_range", {0.5, 2.0});
    const auto u_r = c.numbers("riemann.u_range", {-1.0, 1.0});
    const auto th_r = c.numbers("riemann.theta_range", {0.5, 2.0});
    const auto s_r = c.numbers("riemann.strength_range", {0.01, 0.5});
    for (const auto* r : {&rho_r, &u_r, &th_r, &s_r})
      if (r->size() != 2 || (*r)[0] > (*r)[1]) ConfigView::fail("riemann.*_range", "expected [min, max]");
    if (rho_r[0] <= 0.0 || th_r[0] <= 0.0) ConfigView::fail("riemann.rho_range", "density and temperature must be > 0");
    if (s_r[0] <= 0.0) ConfigView::fail("riemann.strength_range", "strengths must be > 0");
    Rng rng(config_seed(c, o));
    double max_err = 0.0, max_rh = 0.0;
    bool all_lax = true;
    std::ostringstream csv;
    csv << "case,rho_l,u_l,theta_l,sigma1,sigma3,rel_error,rh_residual,lax_strict,newton_iterations\n";
    for (long k = 0; k < count; ++k) {
      const GasState left = GasState::planar(rng.uniform(rho_r[0], rho_r[1]), rng.uniform(u_r[0], u_r[1]),
                                             rng.uniform(th_r[0], th_r[1]));
      const double s1 = rng.uniform(s_r[0], s_r[1]), s3 = rng.uniform(s_r[0], s_r[1]);
      const GasState mid = hugoniot_state(left, 1, s1).state;
      const GasState right = hugoniot_upstream(mid, 3, s3).state;
      const CompositeWaveSolution sol = solve_intermediate_state({left, right});
      const double err = std::max({std::abs(sol.intermediate.rho - mid.rho) / mid.rho,
                                   std::abs(sol.intermediate.u[0] - mid.u[0]) / std::max(1.0, std::abs(mid.u[0])),
                                   std::abs(sol.intermediate.theta - mid.theta) / mid.theta});
      const bool lax = sol.lax[0] && sol.lax[1] && sol.lax[2] && sol.lax[3];
      max_err = std::max(max_err, err);
      max_rh = std::max(max_rh, sol.rh_residual);
      all_lax = all_lax && lax;
      csv << k << ',' << fmt(left.rho) << ',' << fmt(left.u[0]) << ',' << fmt(left.theta) << ',' << fmt(s1) << ','
          << fmt(s3) << ',' << fmt(err) << ',' << fmt(sol.rh_residual) << ',' << lax << ',' << sol.newton_iterations
          << '\n';
    }
    out.report = {{"count", count}, {"max_rel_error", max_err}, {"max_rh_residual", max_rh}, {"all_lax_strict", all_lax}};
    out.artifacts.push_back({"riemann_manufactured.csv", csv.str()});
  }
  out.report["mode"] = mode;
  out.report["runtime_s"] = elapsed_seconds(t0);
  return out;
}

// ---------------------------------------------------------------------------
// profile

struct ProfileCheck {
  bool monotone = true;
  bool compressive = true;
  double max_du = 0.0;
  double endpoint_mismatch = 0.0;
  TailFit tail;
};

inline ProfileCheck check_profile(const ShockProfile& p, double tail_tol) {
  ProfileCheck r;
  const double sgn = p.right.u[0] > p.left.u[0] ? 1.0 : -1.0;
  const double sc = p.family == 1 ? -1.0 : 1.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    r.max_du = std::max(r.max_du, std::abs(p.du1[k]));
    if (k + 1 < p.size() && sgn * (p.u1[k + 1] - p.u1[k]) < 0.0) r.monotone = false;
    if (k > 0 && k + 1 < p.size()) {
      const double dc = std::sqrt(10.0) / (6.0 * std::sqrt(p.theta[k])) * p.dtheta[k];
      if (!(p.du1[k] + sc * dc < 0.0)) r.compressive = false;
    }
  }
  auto mismatch = [](const GasState& a, const GasState& b) {
    return std::max({std::abs(a.rho - b.rho), std::abs(a.u[0] - b.u[0]), std::abs(a.theta - b.theta)});
  };
  r.endpoint_mismatch = std::max(mismatch(p.node_state(0), p.left), mismatch(p.node_state(p.size() - 1), p.right));
  r.tail = fit_tail_decay(p, tail_tol);
  return r;
}

/// Profiles of both families for each delta in profile.deltas at
/// states.intermediate, with the monotonicity, compressibility and
/// delta^2-scaling table.
inline RunOutput run_profile(const json& cfg, const RunOverrides& = {}) {
  const ConfigView c(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const GasState mid = c.state("states.intermediate");
  const Transport tr = parse_transport(c);
  if (!(tr.mu_ref > 0.0)) ConfigView::fail("transport.mu_ref", "profiles need mu_ref > 0");
  const auto deltas = c.numbers("profile.deltas");
  for (double d : deltas)
    if (!(d > 0.0)) ConfigView::fail("profile.deltas", "every delta must be > 0");
  ProfileGridParams gp;
  gp.tail_tol = c.positive("profile.tail_tol", gp.tail_tol);
  gp.ode_tol = c.positive("profile.ode_tol", gp.ode_tol);
  gp.spacing = c.number("profile.spacing", 0.0);
  RunOutput out;
  json rows = json::array();
  std::vector<std::array<double, 2>> max_du;
  bool all_monotone = true, all_compressive = true;
  double worst_mismatch = 0.0;
  for (double d : deltas) {
    const RiemannData rd =
        manufacture_two_shock(mid, strength_for_wave_strength(mid, 1, d), strength_for_wave_strength(mid, 3, d));
    const CompositeWaveSolution sol = solve_intermediate_state(rd);
    const ProfilePair pp = solve_profiles(rd, sol, tr, gp);
    const ProfileCheck c1 = check_profile(pp.p1, gp.tail_tol), c3 = check_profile(pp.p3, gp.tail_tol);
    max_du.push_back({c1.max_du, c3.max_du});
    all_monotone = all_monotone && c1.monotone && c3.monotone;
    all_compressive = all_compressive && c1.compressive && c3.compressive;
    worst_mismatch = std::max({worst_mismatch, c1.endpoint_mismatch, c3.endpoint_mismatch});
    json row = {{"delta", d}};
    for (const auto& [name, ck, p] : {std::tuple{"s1", c1, &pp.p1}, std::tuple{"s3", c3, &pp.p3}}) {
      row[name] = {{"monotone", ck.monotone},
                   {"compressive", ck.compressive},
                   {"max_du1", ck.max_du},
                   {"endpoint_mismatch", ck.endpoint_mismatch},
                   {"tail_c", ck.tail.c_fit},
                   {"tail_C", ck.tail.C_fit},
                   {"nodes", p->size()},
                   {"first_integral_residual", p->first_integral_residual}};
      std::ostringstream csv;
      write_profile_csv(csv, *p);
      out.artifacts.push_back({"profile_" + std::string(name) + "_delta_" + fmt(d) + ".csv", csv.str()});
    }
    rows.push_back(row);
  }
  json ratios = json::array();
  // Ratio of max|u1'| at the larger delta to that at the smaller one.
  for (std::size_t k = 1; k < deltas.size(); ++k) {
    const std::size_t hi = deltas[k] > deltas[k - 1] ? k : k - 1, lo = hi == k ? k - 1 : k;
    ratios.push_back({{"delta_large", deltas[hi]},
                      {"delta_small", deltas[lo]},
                      {"s1", max_du[hi][0] / max_du[lo][0]},
                      {"s3", max_du[hi][1] / max_du[lo][1]}});
  }
  out.report = {{"profiles", rows},
                {"scaling", ratios},
                {"all_monotone", all_monotone},
                {"all_compressive", all_compressive},
                {"max_endpoint_mismatch", worst_mismatch},
                {"runtime_s", elapsed_seconds(t0)}};
  return out;
}

// ---------------------------------------------------------------------------
// stability

struct PerturbationSpec {
  double amplitude = 0.0;  // sup of the zero-mass bump sum (conserved variables)
  int count = 4;
  double width = 8.0;
  double region_min = -30.0, region_max = 30.0;
  Vec3 excess{0.0, 0.0, 0.0};  // coefficients along r1, r2, r3
  double center = 0.0;
  double mass_width = 5.0;  // Gaussian width of the r1, r3 mass bumps
  double transverse_amplitude = 0.0;
  int transverse_kmax = 2;
  double transverse_width = 10.0;
};

inline PerturbationSpec parse_perturbation(const ConfigView& c) {
  PerturbationSpec p;
  p.amplitude = c.number("perturbation.amplitude", 0.0);
  if (p.amplitude < 0.0) ConfigView::fail("perturbation.amplitude", "must be >= 0");
  p.count = static_cast<int>(c.positive_integer("perturbation.count", p.count));
  p.width = c.positive("perturbation.width", p.width);
  const auto reg = c.numbers("perturbation.region", {p.region_min, p.region_max});
  if (reg.size() != 2 || reg[0] > reg[1]) ConfigView::fail("perturbation.region", "expected [min, max]");
  p.region_min = reg[0];
  p.region_max = reg[1];
  const auto ex = c.numbers("perturbation.excess", {0.0, 0.0, 0.0});
  if (ex.size() != 3) ConfigView::fail("perturbation.excess", "expected three coefficients along r1, r2, r3");
  p.excess = {ex[0], ex[1], ex[2]};
  p.center = c.number("perturbation.center", p.center);
  p.mass_width = c.positive("perturbation.mass_width", p.mass_width);
  p.transverse_amplitude = c.number("perturbation.transverse_amplitude", 0.0);
  if (p.transverse_amplitude < 0.0) ConfigView::fail("perturbation.transverse_amplitude", "must be >= 0");
  p.transverse_kmax = static_cast<int>(c.positive_integer("perturbation.transverse_kmax", p.transverse_kmax));
  p.transverse_width = c.positive("perturbation.transverse_width", p.transverse_width);
  return p;
}

/// Compact bump (1 - r^2)^4 on |r| < 1 and its derivative in x.
inline std::array<double, 2> compact_bump(double x, double center, double width) {
  const double r = (x - center) / width;
  if (std::abs(r) >= 1.0) return {0.0, 0.0};
  const double q = 1.0 - r * r;
  return {q * q * q * q, -8.0 * r * q * q * q / width};
}

inline double gaussian_density(double x, double center, double variance) {
  return std::exp(-sqr(x - center) / (2.0 * variance)) / std::sqrt(2.0 * kPi * variance);
}

struct StabilitySetup {
  EndStates states;
  RiemannData data;
  CompositeWaveSolution sol;
  ProfilePair profiles;
  Transport transport;
  Grid grid;
  PerturbationSpec pert;
  MassDecomposition dec;
  Vec3 excess{};  // discrete (rho, m1, E) mass of U0 - U_bar
  double mass_defect = 0.0;  // |sum (U0 - U~(., 0)) dx|
  int mass_iterations = 0;
  bool with_wave = true;
  std::vector<double> U0;  // Grid layout
};

inline StabilitySetup prepare_stability(const ConfigView& c, const RunOverrides& o) {
  StabilitySetup st;
  st.states = parse_states(c);
  st.data = {st.states.left, st.states.right};
  st.transport = parse_transport(c);
  if (!(st.transport.mu_ref > 0.0)) ConfigView::fail("transport.mu_ref", "stability runs need mu_ref > 0");
  st.grid.N = static_cast<int>(c.positive_integer("grid.cells"));
  st.grid.L = c.positive("grid.half_width");
  st.grid.n2 = static_cast<int>(c.positive_integer("grid.n2", 1));
  st.grid.n3 = static_cast<int>(c.positive_integer("grid.n3", 1));
  if (o.transverse) {
    st.grid.n2 = o.transverse->first;
    st.grid.n3 = o.transverse->second;
  }
  if (st.grid.N < 16) ConfigView::fail("grid.cells", "need at least 16 cells");
  st.pert = parse_perturbation(c);
  st.with_wave = c.boolean("run.diffusion_wave", true) && !o.ablate_diffusion_wave;
  ProfileGridParams gp;
  gp.tail_tol = c.positive("profile.tail_tol", gp.tail_tol);
  st.sol = solve_intermediate_state(st.data);
  st.profiles = solve_profiles(st.data, st.sol, st.transport, gp);
  const double reach = std::max(st.profiles.p1.xi_max() - st.profiles.p1.xi_min(),
                                st.profiles.p3.xi_max() - st.profiles.p3.xi_min());
  if (st.grid.L < 0.5 * reach)
    throw Error(ErrorKind::ConfigError, "field 'grid.half_width': profile tails (" + fmt(0.5 * reach) +
                                            ") do not fit in the domain");

  // Unshifted composite U_bar plus the perturbation.
  const Grid& g = st.grid;
  const MassDecomposition dir = decompose_initial_mass({0.0, 0.0, 0.0}, st.sol, st.data);
  const CompositeAnsatz base(st.profiles.p1, st.profiles.p3, st.sol.intermediate, st.transport, 0.0, 0.0, 0.0, false);
  const double a = DiffusionWave::coefficient(st.transport.kappa(st.sol.intermediate.theta), st.sol.intermediate.rho);
  Rng rng(config_seed(c, o));
  struct Bump {
    double x0;
    Vec3 d;
  };
  std::vector<Bump> bumps;
  if (st.pert.amplitude > 0.0)
    for (int k = 0; k < st.pert.count; ++k) {
      Bump b;
      b.x0 = rng.uniform(st.pert.region_min, st.pert.region_max);
      b.d = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      bumps.push_back(b);
    }
  std::vector<Vec3> zm(g.N, Vec3{0.0, 0.0, 0.0});
  double zm_sup = 0.0;
  for (int i = 0; i < g.N; ++i) {
    for (const Bump& b : bumps) zm[i] = zm[i] + compact_bump(g.x(i), b.x0, st.pert.width)[1] * b.d;
    for (double v : zm[i]) zm_sup = std::max(zm_sup, std::abs(v));
  }
  const double zm_scale = zm_sup > 0.0 ? st.pert.amplitude / zm_sup : 0.0;
  // Transverse modes: random cos/sin coefficients per component for 0 < |k|_inf <= kmax.
  struct Mode {
    int k2, k3;
    std::array<double, 5> cs, sn;
  };
  std::vector<Mode> modes;
  if (st.pert.transverse_amplitude > 0.0 && !g.planar()) {
    const int km2 = g.n2 > 1 ? st.pert.transverse_kmax : 0, km3 = g.n3 > 1 ? st.pert.transverse_kmax : 0;
    for (int k2 = -km2; k2 <= km2; ++k2)
      for (int k3 = -km3; k3 <= km3; ++k3) {
        if (k2 == 0 && k3 == 0) continue;
        Mode m{k2, k3, {}, {}};
        for (int q = 0; q < 5; ++q) {
          m.cs[q] = rng.uniform(-1.0, 1.0);
          m.sn[q] = rng.uniform(-1.0, 1.0);
        }
        modes.push_back(m);
      }
  }
  auto transverse_raw = [&](double x2, double x3, int q) {
    double s = 0.0;
    for (const Mode& m : modes) {
      const double ph = 2.0 * kPi * (m.k2 * x2 + m.k3 * x3);
      s += m.cs[q] * std::cos(ph) + m.sn[q] * std::sin(ph);
    }
    return s;
  };
  double tr_sup = 0.0;
  for (int j = 0; j < g.n2; ++j)
    for (int k = 0; k < g.n3; ++k)
      for (int q = 0; q < 5; ++q)
        tr_sup = std::max(tr_sup, std::abs(transverse_raw(static_cast<double>(j) / g.n2, static_cast<double>(k) / g.n3, q)));
  const double tr_scale = tr_sup > 0.0 ? st.pert.transverse_amplitude / tr_sup : 0.0;

  st.U0.assign(g.size(), 0.0);
  st.excess = {0.0, 0.0, 0.0};
  for (int i = 0; i < g.N; ++i) {
    const double x = g.x(i);
    const Vec3 ub = base.shocks_only(x, 0.0);
    const Vec3 mass = gaussian_density(x, st.pert.center, sqr(st.pert.mass_width)) * (st.pert.excess[0] * dir.r1) +
                      gaussian_density(x, st.pert.center, 2.0 * a) * (st.pert.excess[1] * dir.r2) +
                      gaussian_density(x, st.pert.center, sqr(st.pert.mass_width)) * (st.pert.excess[2] * dir.r3);
    const Vec3 p = zm_scale * zm[i] + mass;
    const Vec3 u = ub + p;
    st.excess = st.excess + g.dx() * p;
    const double env = compact_bump(x, st.pert.center, st.pert.transverse_width)[0];
    for (int j = 0; j < g.n2; ++j)
      for (int k = 0; k < g.n3; ++k) {
        const int t = j * g.n3 + k;
        const State5 q0{u[0], u[1], 0.0, 0.0, u[2]};
        for (int q = 0; q < 5; ++q) {
          double v = q0[q];
          if (tr_scale > 0.0)
            v += tr_scale * env * transverse_raw(static_cast<double>(j) / g.n2, static_cast<double>(k) / g.n3, q);
          st.U0[g.at(i, t, q)] = v;
        }
      }
  }
  // Discrete zero-mass condition: iterate alpha on the residual sum (U0 - U~) dx.
  st.dec = decompose_initial_mass(st.excess, st.sol, st.data);
  const double scale = std::max(1e-300, std::sqrt(norm2(st.excess)));
  for (st.mass_iterations = 0; st.mass_iterations < 20; ++st.mass_iterations) {
    const CompositeAnsatz A = build_ansatz(st.sol, st.profiles.p1, st.profiles.p3, st.dec, st.transport, st.with_wave);
    Vec3 res{0.0, 0.0, 0.0};
    for (int i = 0; i < g.N; ++i) {
      const Vec3 u{st.U0[g.at(i, 0, 0)], st.U0[g.at(i, 0, 1)], st.U0[g.at(i, 0, 4)]};
      res = res + g.dx() * (u - A.eval(g.x(i), 0.0).U);
    }
    MassDecomposition step = decompose_initial_mass(res, st.sol, st.data);
    if (!st.with_wave) {
      // The r2 mass has no carrier without the diffusion wave; only the shifts are adjusted.
      step.alpha[1] = 0.0;
      const Vec3 r13 = res - (decompose_initial_mass(res, st.sol, st.data).alpha[1]) * step.r2;
      st.mass_defect = std::sqrt(norm2(res));
      if (std::sqrt(norm2(r13)) <= std::max(1e-12 * scale, 1e-14)) break;
    } else {
      st.mass_defect = std::sqrt(norm2(res));
      if (st.mass_defect <= std::max(1e-12 * scale, 1e-14)) break;
    }
    st.dec.alpha = st.dec.alpha + step.alpha;
  }
  return st;
}

/// Sup over the region between the two shocks of the r2-dual coefficient of U - U_shocks.
inline double r2_deviation_sup(const PlanarSnapshot& s, const CompositeAnsatz& A, const MassDecomposition& dec, double t) {
  Mat3 Rm = direction_matrix(dec.r1, dec.r2, dec.r3);
  // Second row of the inverse via cofactors.
  const double det = det3(Rm);
  const Vec3 l2{-(Rm[1][0] * Rm[2][2] - Rm[1][2] * Rm[2][0]) / det, (Rm[0][0] * Rm[2][2] - Rm[0][2] * Rm[2][0]) / det,
                -(Rm[0][0] * Rm[1][2] - Rm[0][2] * Rm[1][0]) / det};
  const double x1 = A.profile1().s * t - A.alpha1(), x3 = A.profile3().s * t - A.alpha3();
  const double gap = x3 - x1;
  const double lo = x1 + 0.25 * gap, hi = x3 - 0.25 * gap;
  double m = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.x[i] < lo || s.x[i] > hi) continue;
    const Vec3 u{s.U[i][0], s.U[i][1], s.U[i][4]};
    m = std::max(m, std::abs(dot(l2, u - A.shocks_only(s.x[i], t))));
  }
  return m;
}

/// Least-squares slope of log y against log(1 + t).
inline double fit_decay_exponent(const std::vector<double>& t, const std::vector<double>& y) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double X = std::log1p(t[k]), Y = std::log(y[k]);
    sx += X, sy += Y, sxx += X * X, sxy += X * Y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct StabilitySample {
  double t = 0.0;
  double sup = 0.0;
  Vec3 endpoint{};
  EnergyReport energy;
  double lr_defect = 0.0, lar_defect = 0.0;
  double alpha_gap_min = 0.0, alpha_gap_max = 0.0, beta_gap_min = 0.0, beta_gap_max = 0.0;
  bool weights_in_range = true;
  double eta_min = 0.0, eta_max = 0.0, n_sup = 0.0;
  double entropy = 0.0, entropy_ratio_min = 0.0, entropy_ratio_max = 0.0;
  double r2_sup = 0.0;
  double nonzero_mode = 0.0, splitting_defect = 0.0;
  double audit = 0.0;  // max |totals - totals0 - inflow|
  double micro_g = 0.0;  // kinetic runs: |G~|^2 / M_*
};

inline std::vector<double> output_times(const ConfigView& c, double t_end) {
  if (c.has("run.output_times")) {
    auto v = c.numbers("run.output_times");
    std::sort(v.begin(), v.end());
    for (double t : v)
      if (t < 0.0 || t > t_end) ConfigView::fail("run.output_times", "times must lie in [0, t_end]");
    if (v.front() != 0.0) v.insert(v.begin(), 0.0);
    return v;
  }
  const double every = c.positive("run.output_every", t_end / 10.0);
  std::vector<double> v;
  for (int k = 0;; ++k) {
    const double t = std::min(k * every, t_end);
    v.push_back(t);
    if (t >= t_end) break;
  }
  return v;
}

inline std::string snapshot_csv(const PlanarSnapshot& s, const FluidSolver* fs) {
  std::ostringstream os;
  os << "x1,rho,m1,m2,m3,E";
  const bool trans = fs && !fs->grid().planar();
  if (trans) os << ",nonzero_mode_rms";
  os << '\n';
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << fmt(s.x[i]);
    for (int c = 0; c < 5; ++c) os << ',' << fmt(s.U[i][c]);
    if (trans) {
      double acc = 0.0;
      for (int c = 0; c < 5; ++c) acc += torus_norm2(mode_decompose(torus_slice(*fs, static_cast<int>(i), c)).nonzero);
      os << ',' << fmt(std::sqrt(acc));
    }
    os << '\n';
  }
  return os.str();
}

inline std::string characteristic_csv(const PlanarSnapshot& s, const CharacteristicFrame& f) {
  std::ostringstream os;
  os << "x1,Z1,Z2,Z3,alpha,beta\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    os << fmt(s.x[i]) << ',' << fmt(f.Z[i][0]) << ',' << fmt(f.Z[i][1]) << ',' << fmt(f.Z[i][2]) << ','
       << fmt(f.alpha[i]) << ',' << fmt(f.beta[i]) << '\n';
  return os.str();
}

/// Builds the ansatz, evolves U0 = U_bar + perturbation with the NS or BGK
/// solver and evaluates the diagnostics at every output time.
inline RunOutput run_stability(const json& cfg, const RunOverrides& o = {}) {
  const ConfigView c(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  StabilitySetup st = prepare_stability(c, o);
  const std::string fidelity = o.fidelity ? *o.fidelity : c.choice("run.fidelity", {"ns", "bgk"}, "ns");
  if (fidelity != "ns" && fidelity != "bgk") throw Error(ErrorKind::ConfigError, "fidelity must be 'ns' or 'bgk'");
  if (fidelity == "bgk" && !st.grid.planar())
    throw Error(ErrorKind::ConfigError, "field 'grid.n2': the kinetic solver is planar (n2 = n3 = 1)");
  const double t_end = c.positive("run.t_end");
  const auto times = output_times(c, t_end);
  const double cfl = c.positive("run.cfl", 0.4);
  const TimeScheme scheme =
      c.choice("run.scheme", {"rk2", "rk3"}, "rk3") == "rk2" ? TimeScheme::RK2 : TimeScheme::RK3;
  const bool energy_on = c.boolean("diagnostics.energy", true);
  MicroSettings ms;
  ms.enabled = c.boolean("diagnostics.micro", true);
  ms.n_per_axis = static_cast<int>(c.positive_integer("diagnostics.micro_n_per_axis", ms.n_per_axis));
  ms.v_max = c.positive("diagnostics.micro_v_max", ms.v_max);
  const auto snap_times = c.numbers("run.snapshot_times", {});
  const bool snapshot_all = c.boolean("run.snapshot_all", false);

  const CompositeAnsatz A = build_ansatz(st.sol, st.profiles.p1, st.profiles.p3, st.dec, st.transport, st.with_wave);
  // theta_* = factor * min theta must satisfy theta/2 < theta_* < theta.
  const double theta_star_factor = c.positive("diagnostics.theta_star_factor", 0.9);
  if (!(theta_star_factor > 0.5 && theta_star_factor < 1.0))
    ConfigView::fail("diagnostics.theta_star_factor", "must lie in (0.5, 1)");
  const GasState m_star =
      global_maxwellian_state(st.data.left, st.sol.intermediate, st.data.right, theta_star_factor);
  const HeatKernel hk{A.wave().a, A.wave().u_sharp};
  const Grid& g = st.grid;

  std::unique_ptr<FluidSolver> fs;
  std::unique_ptr<KineticSolver> ks;
  std::unique_ptr<VelocityGrid> vg;
  if (fidelity == "ns") {
    fs = std::make_unique<FluidSolver>(g, st.transport, st.data.left, st.data.right);
    fs->state() = st.U0;
  } else {
    vg = std::make_unique<VelocityGrid>(c.positive("kinetic.v_max"), static_cast<int>(c.positive_integer("kinetic.n_per_axis")));
    ks = std::make_unique<KineticSolver>(g.N, g.L, *vg, st.transport, st.data.left, st.data.right);
    std::vector<GasState> init(g.N);
    for (int i = 0; i < g.N; ++i)
      init[i] = conserved_to_primitive({st.U0[g.at(i, 0, 0)], {st.U0[g.at(i, 0, 1)], 0.0, 0.0}, st.U0[g.at(i, 0, 4)]});
    const double dx = g.dx(), L = g.L;
    ks->set_equilibrium([&](double x) { return init[std::clamp(static_cast<int>((x + L) / dx), 0, g.N - 1)]; });
  }
  auto totals = [&]() {
    FluidSolver::Flux5 s{};
    if (fs) return fs->totals();
    for (int i = 0; i < ks->cells(); ++i) {
      const State5 q = pack(ks->cell_moments(i));
      for (int k = 0; k < 5; ++k) s[k] += ks->dx() * q[k];
    }
    return s;
  };
  const auto totals0 = totals();

  RunOutput out;
  std::vector<StabilitySample> samples;
  for (double t : times) {
    if (fs) fs->advance_to(t, scheme, cfl);
    else ks->advance_to(t, cfl);
    const PlanarSnapshot snap = fs ? zero_mode_snapshot(*fs) : macroscopic_snapshot(*ks);
    const AnsatzField af = sample_ansatz(A, snap.x, t);
    const Perturbation p = perturbation(snap, af);
    const AntiDerivatives ad = antiderivatives(p, snap.dx);
    const TildeVariables tv = tilde_variables(ad, af);
    const CharacteristicFrame fr = characteristic_frame(af, ad, tv, st.sol.delta, st.sol.intermediate.rho);
    const HeatKernelWeights hw = heat_kernel_weights(hk, t, snap.x);
    const RelativeEntropy re = relative_entropy(snap, af);
    StabilitySample sm;
    sm.t = t;
    sm.sup = p.sup_norm();
    sm.endpoint = ad.endpoint();
    if (energy_on) {
      MicroSettings m = ms;
      if (ks) m.enabled = false;
      sm.energy = energy_functionals(snap, af, p, ad, tv, st.sol.intermediate, m_star, st.transport, m);
      if (ks) {
        const MicroscopicNorms mn = microscopic_norms(*ks, &A, m_star, st.transport);
        sm.micro_g = mn.g_norm2;
        sm.energy.e_micro_g = mn.g_norm2;
        sm.energy.micro_is_surrogate = false;
        sm.energy.E = sm.energy.e_anti + sm.energy.e_h2 + sm.energy.e_micro_g;
      }
    }
    sm.lr_defect = fr.lr_defect;
    sm.lar_defect = fr.lar_defect;
    sm.alpha_gap_min = fr.alpha_gap_min;
    sm.alpha_gap_max = fr.alpha_gap_max;
    sm.beta_gap_min = fr.beta_gap_min;
    sm.beta_gap_max = fr.beta_gap_max;
    sm.weights_in_range = fr.weights_in_range();
    sm.eta_min = hw.eta_min;
    sm.eta_max = hw.eta_max;
    sm.n_sup = hw.n_sup;
    sm.entropy = re.integral;
    sm.entropy_ratio_min = re.ratio_min;
    sm.entropy_ratio_max = re.ratio_max;
    sm.r2_sup = r2_deviation_sup(snap, A, st.dec, t);
    if (fs && !g.planar()) {
      const ModeNorms mn = mode_norms(*fs);
      sm.nonzero_mode = std::sqrt(mn.nonzero);
      sm.splitting_defect = mn.splitting_defect;
    }
    const auto tot = totals();
    const FluidSolver::Flux5 inflow = fs ? fs->boundary_inflow() : FluidSolver::Flux5{};
    if (fs)
      for (int k = 0; k < 5; ++k) sm.audit = std::max(sm.audit, std::abs(tot[k] - totals0[k] - inflow[k]));
    samples.push_back(sm);
    const bool snap_here = snapshot_all || std::any_of(snap_times.begin(), snap_times.end(),
                                                       [&](double s) { return std::abs(s - t) < 1e-9; });
    if (snap_here) {
      out.artifacts.push_back({"snapshot_t" + fmt(t) + ".csv", snapshot_csv(snap, fs.get())});
      out.artifacts.push_back({"characteristic_t" + fmt(t) + ".csv", characteristic_csv(snap, fr)});
    }
  }

  std::ostringstream ts;
  ts << "t,sup_norm,Phi_end,Psi1_end,W_end,E,E_anti,E_h2,E_micro_g,E_micro_f,D,D_anti_grad,D_anti_weighted,D_h3,"
        "D_micro,lr_defect,lar_defect,alpha_gap_min,alpha_gap_max,beta_gap_min,beta_gap_max,eta_min,eta_max,n_sup,"
        "relative_entropy,r2_sup,nonzero_mode,audit\n";
  for (const auto& s : samples) {
    ts << fmt(s.t) << ',' << fmt(s.sup) << ',' << fmt(s.endpoint[0]) << ',' << fmt(s.endpoint[1]) << ','
       << fmt(s.endpoint[2]) << ',' << fmt(s.energy.E) << ',' << fmt(s.energy.e_anti) << ',' << fmt(s.energy.e_h2)
       << ',' << fmt(s.energy.e_micro_g) << ',' << fmt(s.energy.e_micro_f) << ',' << fmt(s.energy.D) << ','
       << fmt(s.energy.d_anti_grad) << ',' << fmt(s.energy.d_anti_weighted) << ',' << fmt(s.energy.d_h3) << ','
       << fmt(s.energy.d_micro) << ',' << fmt(s.lr_defect) << ',' << fmt(s.lar_defect) << ','
       << fmt(s.alpha_gap_min) << ',' << fmt(s.alpha_gap_max) << ',' << fmt(s.beta_gap_min) << ','
       << fmt(s.beta_gap_max) << ',' << fmt(s.eta_min) << ',' << fmt(s.eta_max) << ',' << fmt(s.n_sup) << ','
       << fmt(s.entropy) << ',' << fmt(s.r2_sup) << ',' << fmt(s.nonzero_mode) << ',' << fmt(s.audit) << '\n';
  }
  out.artifacts.insert(out.artifacts.begin(), {"timeseries.csv", ts.str()});

  json series = json::array();
  for (const auto& s : samples)
    series.push_back({{"t", s.t},
                      {"sup_norm", s.sup},
                      {"endpoint", {s.endpoint[0], s.endpoint[1], s.endpoint[2]}},
                      {"E", s.energy.E},
                      {"D", s.energy.D},
                      {"E_components",
                       {{"anti", s.energy.e_anti},
                        {"h2", s.energy.e_h2},
                        {"micro_g", s.energy.e_micro_g},
                        {"micro_f", s.energy.e_micro_f}}},
                      {"D_components",
                       {{"anti_grad", s.energy.d_anti_grad},
                        {"anti_weighted", s.energy.d_anti_weighted},
                        {"h3", s.energy.d_h3},
                        {"micro", s.energy.d_micro}}},
                      {"micro_is_surrogate", s.energy.micro_is_surrogate},
                      {"lr_defect", s.lr_defect},
                      {"lar_defect", s.lar_defect},
                      {"alpha_gap", {s.alpha_gap_min, s.alpha_gap_max}},
                      {"beta_gap", {s.beta_gap_min, s.beta_gap_max}},
                      {"weights_in_range", s.weights_in_range},
                      {"eta1_range", {s.eta_min, s.eta_max}},
                      {"n_sup", s.n_sup},
                      {"relative_entropy", s.entropy},
                      {"relative_entropy_ratio", {s.entropy_ratio_min, s.entropy_ratio_max}},
                      {"r2_sup", s.r2_sup},
                      {"nonzero_mode", s.nonzero_mode},
                      {"splitting_defect", s.splitting_defect},
                      {"audit", s.audit}});
  double chi = 0.0;
  for (const auto& s : samples) chi = std::max(chi, std::sqrt(std::max(0.0, s.energy.E)));
  out.report = {{"fidelity", fidelity},
                {"diffusion_wave", st.with_wave},
                {"composite", composite_json(st.sol)},
                {"left", state_json(st.data.left)},
                {"right", state_json(st.data.right)},
                {"alpha", {st.dec.alpha[0], st.dec.alpha[1], st.dec.alpha[2]}},
                {"excess", {st.excess[0], st.excess[1], st.excess[2]}},
                {"excess_norm", std::sqrt(norm2(st.excess))},
                {"initial_mass_defect", st.mass_defect},
                {"mass_iterations", st.mass_iterations},
                {"wave_coefficient", A.wave().a},
                {"grid", {{"cells", g.N}, {"half_width", g.L}, {"n2", g.n2}, {"n3", g.n3}}},
                {"steps", fs ? fs->steps() : ks->steps()},
                {"chi", chi},
                {"series", series},
                {"runtime_s", elapsed_seconds(t0)}};
  return out;
}

// ---------------------------------------------------------------------------
// kinetic

/// Structural checks of the velocity discretization at each state of kinetic.states.
inline json kinetic_structure(const ConfigView& c, std::uint64_t seed) {
  const VelocityGrid g(c.positive("kinetic.v_max"), static_cast<int>(c.positive_integer("kinetic.n_per_axis")));
  const Transport tr = parse_transport(c);
  const auto rhos = c.numbers("kinetic.rho", {1.0});
  const auto us = c.numbers("kinetic.u1", {0.0});
  const auto ths = c.numbers("kinetic.theta", {1.0});
  if (rhos.size() != us.size() || us.size() != ths.size())
    ConfigView::fail("kinetic.rho", "rho, u1 and theta lists must have equal length");
  Rng rng(seed);
  double gram = 0.0, idem = 0.0, orth = 0.0, drift = 0.0;
  for (std::size_t k = 0; k < rhos.size(); ++k) {
    const GasState s = GasState::planar(rhos[k], us[k], ths[k]);
    const MicroBasis b = micro_basis(s, g);
    const VelocityFunction M = maxwellian(s, g);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        gram = std::max(gram, std::abs(inner_product_M(b.chi[i], b.chi[j], M, g) - (i == j ? 1.0 : 0.0)));
    // Random M-weighted test function h = M (1 + noise polynomial).
    VelocityFunction h(g.size());
    std::array<double, 10> cf{};
    for (double& v : cf) v = rng.uniform(-1.0, 1.0);
    for (std::size_t q = 0; q < g.size(); ++q) {
      const Vec3 v = g.node(q) - s.u;
      const double sc = std::sqrt(kGasConstant * s.theta);
      const Vec3 w = (1.0 / sc) * v;
      h[q] = M[q] * (cf[0] + cf[1] * w[0] + cf[2] * w[1] + cf[3] * w[2] + cf[4] * (w[0] * w[0] - 1.0) +
                     cf[5] * w[0] * w[1] + cf[6] * w[1] * w[2] + cf[7] * w[0] * norm2(w) + cf[8] * w[0] * w[0] * w[0] +
                     cf[9] * (norm2(w) - 3.0));
    }
    const double hn = std::sqrt(inner_product_M(h, h, M, g));
    const VelocityFunction p0 = project_P0(h, b, g), p1 = project_P1(h, b, g);
    const VelocityFunction p00 = project_P0(p0, b, g), p11 = project_P1(p1, b, g);
    VelocityFunction e0(g.size()), e1(g.size());
    for (std::size_t q = 0; q < g.size(); ++q) {
      e0[q] = p00[q] - p0[q];
      e1[q] = p11[q] - p1[q];
    }
    idem = std::max({idem, std::sqrt(inner_product_M(e0, e0, M, g)) / hn, std::sqrt(inner_product_M(e1, e1, M, g)) / hn});
    orth = std::max(orth, std::abs(inner_product_M(p0, p1, M, g)) / (hn * hn));
    // Collision moment drift on a non-equilibrium f = M + small non-Maxwellian part.
    VelocityFunction f(g.size()), Q(g.size());
    for (std::size_t q = 0; q < g.size(); ++q) f[q] = M[q] + 0.1 * p1[q] / std::max(1.0, hn / s.rho);
    const Conserved mf = moments(f, g);
    const DiscreteMaxwellian dm = match_maxwellian(mf, g);
    evaluate(dm, g, Q.data());
    const double nu = tr.nu(s.rho, s.theta);
    for (std::size_t q = 0; q < g.size(); ++q) Q[q] = nu * (Q[q] - f[q]);
    const Conserved mq = moments(Q, g);
    const double scale = nu * std::max({std::abs(mf.rho), std::abs(mf.E), 1.0});
    drift = std::max({drift, std::abs(mq.rho) / scale, std::abs(mq.m[0]) / scale, std::abs(mq.m[1]) / scale,
                      std::abs(mq.m[2]) / scale, std::abs(mq.E) / scale});
  }
  return {{"n_per_axis", g.n_per_axis()},
          {"v_max", g.v_max()},
          {"gram_defect", gram},
          {"idempotence_defect", idem},
          {"orthogonality_defect", orth},
          {"collision_moment_drift", drift}};
}

/// BGK versus fluid on an acoustic Gaussian pulse for each nu_ref in
/// kinetic.nu_values. The reference is the fluid solver at the nu -> infinity
/// limit (compressible Euler); the Navier-Stokes run with the BGK-consistent
/// viscosity is reported alongside.
inline RunOutput kinetic_consistency(const ConfigView& c) {
  RunOutput out;
  const VelocityGrid g(c.positive("kinetic.v_max"), static_cast<int>(c.positive_integer("kinetic.n_per_axis")));
  const int N = static_cast<int>(c.positive_integer("kinetic.cells"));
  const double L = c.positive("kinetic.half_width");
  const int ref_factor = static_cast<int>(c.positive_integer("kinetic.reference_refinement", 4));
  const double t_end = c.positive("kinetic.t_end");
  const double amp = c.positive("kinetic.pulse_amplitude");
  const double sig = c.positive("kinetic.pulse_width");
  const auto nus = c.numbers("kinetic.nu_values");
  const GasState base = c.state("kinetic.base");
  const double theta_ref = c.positive("transport.theta_ref");
  const double cs = base.sound_speed();
  // Right-moving simple wave to first order: rho' : u' : theta' = 1 : c/rho : 2 theta / (3 rho).
  auto init = [&](double x) {
    const double gpl = amp * std::exp(-x * x / (2.0 * sig * sig));
    return GasState::planar(base.rho * (1.0 + gpl), base.u[0] + cs * gpl, base.theta * (1.0 + 2.0 / 3.0 * gpl));
  };
  auto fluid_run = [&](const Transport& tr) {
    Grid gr;
    gr.N = N * ref_factor;
    gr.L = L;
    FluidSolver fs(gr, tr, base, base);
    fs.set_initial([&](double x, double, double) { return to_state5(init(x)); });
    fs.advance_to(t_end);
    // Cell averages on the kinetic grid.
    std::vector<GasState> avg(N);
    for (int i = 0; i < N; ++i) {
      State5 q{};
      for (int j = 0; j < ref_factor; ++j)
        for (int k = 0; k < 5; ++k) q[k] += fs.state()[gr.at(i * ref_factor + j, 0, k)] / ref_factor;
      avg[i] = conserved_to_primitive(unpack(q));
    }
    return avg;
  };
  auto sup_error = [&](const KineticSolver& ks, const std::vector<GasState>& ref) {
    double e = 0.0;
    for (int i = 0; i < N; ++i) {
      const GasState s = ks.cell_state(i);
      e = std::max({e, std::abs(s.rho - ref[i].rho), std::abs(s.u[0] - ref[i].u[0]), std::abs(s.theta - ref[i].theta)});
    }
    return e;
  };
  const auto euler = fluid_run(Transport::inviscid());
  json rows = json::array();
  std::vector<double> errs;
  std::ostringstream csv;
  csv << "nu_ref,err_euler,err_ns,steps\n";
  for (double nu : nus) {
    if (!(nu > 0.0)) ConfigView::fail("kinetic.nu_values", "every nu_ref must be > 0");
    Transport tr = Transport::bgk_consistent(nu, theta_ref);
    KineticSolver ks(N, L, g, tr, base, base);
    ks.set_equilibrium(init);
    ks.advance_to(t_end);
    const double e = sup_error(ks, euler);
    const auto ns = fluid_run(tr);
    const double ens = sup_error(ks, ns);
    errs.push_back(e);
    rows.push_back({{"nu_ref", nu}, {"err_euler", e}, {"err_ns", ens}, {"steps", ks.steps()}});
    csv << fmt(nu) << ',' << fmt(e) << ',' << fmt(ens) << ',' << ks.steps() << '\n';
  }
  json ratios = json::array();
  for (std::size_t k = 1; k < errs.size(); ++k) ratios.push_back(errs[k - 1] / errs[k]);
  out.report = {{"runs", rows}, {"halving_ratios", ratios}};
  out.artifacts.push_back({"kinetic_consistency.csv", csv.str()});
  return out;
}

inline RunOutput run_kinetic(const json& cfg, const RunOverrides& o = {}) {
  const ConfigView c(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const std::string mode = c.choice("kinetic.mode", {"structure", "consistency"}, "structure");
  RunOutput out;
  if (mode == "structure") out.report = kinetic_structure(c, config_seed(c, o));
  else out = kinetic_consistency(c);
  out.report["mode"] = mode;
  out.report["runtime_s"] = elapsed_seconds(t0);
  return out;
}

// ---------------------------------------------------------------------------
// dispatch and sweep

inline RunOutput run_scenario(const std::string& kind, const json& cfg, const RunOverrides& o = {});

/// Sets a dotted path inside a JSON object, creating tables as needed.
inline void set_path(json& j, const std::string& path, const json& value) {
  json* cur = &j;
  std::size_t b = 0;
  for (;;) {
    const std::size_t e = path.find('.', b);
    const std::string key = path.substr(b, e == std::string::npos ? std::string::npos : e - b);
    if (e == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    if (!cur->contains(key) || !(*cur)[key].is_object()) (*cur)[key] = json::object();
    cur = &(*cur)[key];
    b = e + 1;
  }
}

/// Runs sweep.kind once per entry of sweep.values with sweep.parameter set to it.
inline RunOutput run_sweep(const json& cfg, const RunOverrides& o = {}) {
  const ConfigView c(cfg);
  const std::string kind = c.choice("sweep.kind", {"riemann", "profile", "stability", "kinetic"}, "stability");
  const std::string param = c.string("sweep.parameter");
  if (!cfg.contains("sweep") || !cfg["sweep"].contains("values") || !cfg["sweep"]["values"].is_array() ||
      cfg["sweep"]["values"].empty())
    ConfigView::fail("sweep.values", "expected a non-empty array");
  RunOutput out;
  json runs = json::array();
  int k = 0;
  for (const json& v : cfg["sweep"]["values"]) {
    json sub = cfg;
    sub.erase("sweep");
    set_path(sub, param, v);
    RunOutput r = run_scenario(kind, sub, o);
    runs.push_back({{"value", v}, {"report", r.report}});
    for (auto& a : r.artifacts) out.artifacts.push_back({"run" + std::to_string(k) + "_" + a.name, std::move(a.content)});
    ++k;
  }
  out.report = {{"kind", kind}, {"parameter", param}, {"runs", runs}};
  return out;
}

inline RunOutput run_scenario(const std::string& kind, const json& cfg, const RunOverrides& o) {
  if (kind == "riemann") return run_riemann(cfg, o);
  if (kind == "profile") return run_profile(cfg, o);
  if (kind == "stability") return run_stability(cfg, o);
  if (kind == "kinetic") return run_kinetic(cfg, o);
  if (kind == "sweep") return run_sweep(cfg, o);
  throw Error(ErrorKind::ConfigError, "unknown scenario kind '" + kind + "'");
}

}  // namespace shockstab

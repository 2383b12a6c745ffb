#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "shockstab/ansatz.hpp"
#include "shockstab/core.hpp"
#include "shockstab/fluid_solver.hpp"
#include "shockstab/gas.hpp"
#include "shockstab/kinetic.hpp"
#include "shockstab/kinetic_solver.hpp"
#include "shockstab/profile.hpp"
#include "shockstab/spectral.hpp"

namespace shockstab {

// ---------------------------------------------------------------------------
// Finite differences

/// Fornberg weights for the m-th derivative at z on the nodes xs.
inline std::vector<double> fd_weights(double z, const std::vector<double>& xs, int m) {
  const int n = static_cast<int>(xs.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0, c4 = xs[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][m];
  return w;
}

/// Fourth-order derivative of order 1..3 on a uniform grid: central stencils
/// in the interior, one-sided windows near the two ends.
class FdOperator {
 public:
  FdOperator(int n, double dx, int order) : n_(n), start_(n), weights_(n) {
    if (order < 1 || order > 3) throw Error(ErrorKind::ConfigError, "derivative order must be 1..3");
    const int central = order == 3 ? 7 : 5;
    const int sided = order + 4;
    if (n < std::max(central, sided)) throw Error(ErrorKind::GridTooShort, "grid too short for the derivative stencil");
    const int half = central / 2;
    std::vector<double> cw;
    {
      std::vector<double> xs(central);
      for (int j = 0; j < central; ++j) xs[j] = (j - half) * dx;
      cw = fd_weights(0.0, xs, order);
    }
    for (int i = 0; i < n; ++i) {
      if (i - half >= 0 && i + half < n) {
        start_[i] = i - half;
        weights_[i] = cw;
        continue;
      }
      const int s = i - half < 0 ? 0 : n - sided;
      std::vector<double> xs(sided);
      for (int j = 0; j < sided; ++j) xs[j] = (s + j - i) * dx;
      start_[i] = s;
      weights_[i] = fd_weights(0.0, xs, order);
    }
  }

  std::vector<double> apply(const std::vector<double>& f) const {
    std::vector<double> out(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < weights_[i].size(); ++j) s += weights_[i][j] * f[start_[i] + j];
      out[i] = s;
    }
    return out;
  }

  /// Row-wise derivative of a [n][width] array; writes row i into out.
  void apply_row(const std::vector<double>& f, std::size_t width, int i, double* out) const {
    std::fill(out, out + width, 0.0);
    for (std::size_t j = 0; j < weights_[i].size(); ++j) {
      const double w = weights_[i][j];
      const double* r = &f[(start_[i] + j) * width];
      for (std::size_t q = 0; q < width; ++q) out[q] += w * r[q];
    }
  }

 private:
  int n_;
  std::vector<int> start_;
  std::vector<std::vector<double>> weights_;
};

inline double integrate(const std::vector<double>& f, double dx) {
  double s = 0.0;
  for (double v : f) s += v;
  return s * dx;
}

// ---------------------------------------------------------------------------
// Snapshots and sampled ansatz

/// Transverse zero mode of a conserved field on the x1 grid.
struct PlanarSnapshot {
  double t = 0.0;
  double dx = 1.0;
  std::vector<double> x;
  std::vector<State5> U;

  std::size_t size() const { return x.size(); }
  GasState state(std::size_t i) const { return conserved_to_primitive(unpack(U[i])); }
};

inline PlanarSnapshot zero_mode_snapshot(const FluidSolver& fs) {
  const Grid& g = fs.grid();
  PlanarSnapshot s;
  s.t = fs.time();
  s.dx = g.dx();
  s.x.resize(g.N);
  s.U.resize(g.N);
  for (int i = 0; i < g.N; ++i) {
    s.x[i] = g.x(i);
    for (int c = 0; c < 5; ++c) s.U[i][c] = fs.zero_mode(i, c);
  }
  return s;
}

inline PlanarSnapshot macroscopic_snapshot(const KineticSolver& ks) {
  PlanarSnapshot s;
  s.t = ks.time();
  s.dx = ks.dx();
  s.x.resize(ks.cells());
  s.U.resize(ks.cells());
  for (int i = 0; i < ks.cells(); ++i) {
    s.x[i] = ks.x(i);
    s.U[i] = pack(ks.cell_moments(i));
  }
  return s;
}

/// Ansatz fields and the shock/wave ingredients needed by the functionals.
struct AnsatzField {
  double t = 0.0;
  std::vector<double> x;
  std::vector<Vec3> U;  // (rho~, m1~, E~)
  std::vector<double> rho, u, theta;
  std::vector<double> du_s1, du_s3, dtheta_wave, theta_wave;
  std::vector<double> gap1, gap3;  // (rho# - rho^{s_i}) / rho#
  std::vector<ProfilePoint> s1, s3;
};

/// (rho_sharp - rho^s(xi)) / rho_sharp including the exponential tail beyond
/// the table on the intermediate side, so the gap stays strictly positive.
inline double profile_density_gap(const ShockProfile& p, double xi, const GasState& sharp) {
  if (p.constant()) return 0.0;
  const bool sharp_right = p.family == 1;
  const double rs = sharp.rho;
  if (sharp_right && xi > p.xi_max()) {
    const double g_end = (rs - p.node_state(p.size() - 1).rho) / rs;
    return g_end * std::exp(-std::abs(p.tail_rates[1]) * (xi - p.xi_max()));
  }
  if (!sharp_right && xi < p.xi_min()) {
    const double g_end = (rs - p.node_state(0).rho) / rs;
    return g_end * std::exp(-std::abs(p.tail_rates[0]) * (p.xi_min() - xi));
  }
  return (rs - p.at(xi).state.rho) / rs;
}

inline AnsatzField sample_ansatz(const CompositeAnsatz& A, const std::vector<double>& x, double t) {
  AnsatzField f;
  f.t = t;
  f.x = x;
  const std::size_t n = x.size();
  f.U.resize(n);
  for (auto* v : {&f.rho, &f.u, &f.theta, &f.du_s1, &f.du_s3, &f.dtheta_wave, &f.theta_wave, &f.gap1, &f.gap3})
    v->resize(n);
  f.s1.resize(n);
  f.s3.resize(n);
  const GasState& mid = A.intermediate();
  for (std::size_t i = 0; i < n; ++i) {
    const AnsatzPoint p = A.eval(x[i], t);
    f.U[i] = p.U;
    f.rho[i] = p.U[0];
    f.u[i] = p.u;
    f.theta[i] = p.theta;
    f.s1[i] = A.profile1_at(x[i], t);
    f.s3[i] = A.profile3_at(x[i], t);
    f.du_s1[i] = f.s1[i].d1[1];
    f.du_s3[i] = f.s3[i].d1[1];
    const auto w = A.wave().derivatives(x[i], t);
    f.theta_wave[i] = w[0];
    f.dtheta_wave[i] = w[1];
    const ShockProfile& p1 = A.profile1();
    const ShockProfile& p3 = A.profile3();
    f.gap1[i] = profile_density_gap(p1, x[i] - p1.s * t + A.alpha1(), mid);
    f.gap3[i] = profile_density_gap(p3, x[i] - p3.s * t + A.alpha3(), mid);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Perturbations, anti-derivatives, tilde variables

struct Perturbation {
  std::vector<double> phi, psi1, psi2, psi3, omega;  // conserved differences
  std::vector<double> varphi1, varphi2, varphi3, zeta;  // u - u~, theta - theta~

  double sup_norm() const {
    double m = 0.0;
    for (const auto* v : {&phi, &psi1, &psi2, &psi3, &zeta})
      for (double a : *v) m = std::max(m, std::abs(a));
    return m;
  }
};

inline Perturbation perturbation(const PlanarSnapshot& s, const AnsatzField& a) {
  const std::size_t n = s.size();
  Perturbation p;
  for (auto* v : {&p.phi, &p.psi1, &p.psi2, &p.psi3, &p.omega, &p.varphi1, &p.varphi2, &p.varphi3, &p.zeta})
    v->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const GasState g = s.state(i);
    p.phi[i] = s.U[i][0] - a.U[i][0];
    p.psi1[i] = s.U[i][1] - a.U[i][1];
    p.psi2[i] = s.U[i][2];
    p.psi3[i] = s.U[i][3];
    p.omega[i] = s.U[i][4] - a.U[i][2];
    p.varphi1[i] = g.u[0] - a.u[i];
    p.varphi2[i] = g.u[1];
    p.varphi3[i] = g.u[2];
    p.zeta[i] = g.theta - a.theta[i];
  }
  return p;
}

struct AntiDerivatives {
  std::vector<double> Phi, Psi1, W;
  Vec3 endpoint() const { return {Phi.back(), Psi1.back(), W.back()}; }
};

/// Cumulative trapezoid in x1 starting from zero at the first node.
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& f, double dx) {
  std::vector<double> F(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i) F[i] = F[i - 1] + 0.5 * dx * (f[i - 1] + f[i]);
  return F;
}

inline AntiDerivatives antiderivatives(const std::vector<double>& phi, const std::vector<double>& psi1,
                                       const std::vector<double>& omega, double dx) {
  return {cumulative_trapezoid(phi, dx), cumulative_trapezoid(psi1, dx), cumulative_trapezoid(omega, dx)};
}

inline AntiDerivatives antiderivatives(const Perturbation& p, double dx) {
  return antiderivatives(p.phi, p.psi1, p.omega, dx);
}

struct TildeVariables {
  std::vector<double> PsiTilde1, WTilde;
};

inline TildeVariables tilde_variables(const AntiDerivatives& d, const std::vector<double>& rho,
                                      const std::vector<double>& u1, const std::vector<double>& theta) {
  const std::size_t n = d.Phi.size();
  TildeVariables t;
  t.PsiTilde1.resize(n);
  t.WTilde.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(rho[i] > 0.0)) throw Error(ErrorKind::NonPhysicalState, "tilde variables need rho~ > 0");
    t.PsiTilde1[i] = (d.Psi1[i] - u1[i] * d.Phi[i]) / rho[i];
    t.WTilde[i] = (d.W[i] - u1[i] * d.Psi1[i] - (theta[i] - 0.5 * u1[i] * u1[i]) * d.Phi[i]) / rho[i];
  }
  return t;
}

inline TildeVariables tilde_variables(const AntiDerivatives& d, const AnsatzField& a) {
  return tilde_variables(d, a.rho, a.u, a.theta);
}

// ---------------------------------------------------------------------------
// Characteristic frame

/// Flux Jacobian of the (Phi, Psi~1, W~) system frozen at (rho, u1, theta).
inline Mat3 a1_matrix(double rho, double u, double theta) {
  return {{{u, rho, 0.0}, {2.0 * theta / (3.0 * rho), u, 2.0 / 3.0}, {0.0, 2.0 * theta / 3.0, u}}};
}

/// Rows l_1, l_2, l_3.
inline Mat3 left_eigenvectors(double rho, double theta) {
  const double q = rho * std::sqrt(2.5 * theta);
  return {{{theta, -q, rho}, {theta, 0.0, -1.5 * rho}, {theta, q, rho}}};
}

/// Columns r_1, r_2, r_3.
inline Mat3 right_eigenvectors(double rho, double theta) {
  const double c13 = 3.0 / (10.0 * rho * theta), c2 = 2.0 / (5.0 * rho * theta);
  const double q = std::sqrt(10.0 * theta / 9.0);
  const Vec3 r1{c13 * rho, -c13 * q, c13 * 2.0 * theta / 3.0};
  const Vec3 r2{c2 * rho, 0.0, -c2 * theta};
  const Vec3 r3{c13 * rho, c13 * q, c13 * 2.0 * theta / 3.0};
  return {{{r1[0], r2[0], r3[0]}, {r1[1], r2[1], r3[1]}, {r1[2], r2[2], r3[2]}}};
}

inline Vec3 characteristic_speeds(double u, double theta) {
  const double c = std::sqrt(10.0 * theta / 9.0);
  return {u - c, u, u + c};
}

struct CharacteristicFrame {
  double N = 1.0;
  std::vector<Vec3> Lambda, Z, Zbar, Ztilde;
  std::vector<double> alpha, beta, alpha_gap, beta_gap;
  double lr_defect = 0.0;   // max |L R - I|
  double lar_defect = 0.0;  // max |L A1 R - Lambda|
  double gap_bound = 0.0;   // delta / rho#
  double alpha_gap_min = INFINITY, alpha_gap_max = 0.0, beta_gap_min = INFINITY, beta_gap_max = 0.0;

  bool weights_in_range() const {
    return alpha_gap_min > 0.0 && beta_gap_min > 0.0 && alpha_gap_max < gap_bound && beta_gap_max < gap_bound;
  }
};

/// Diagonalized variables Z = L V with V = (Phi, Psi~1, W~) and the weighted
/// combinations with alpha = rho^{s1}/rho#, beta = rho^{s3}/rho#, N = delta^(-1/2).
inline CharacteristicFrame characteristic_frame(const AnsatzField& a, const AntiDerivatives& d,
                                                const TildeVariables& tv, double delta, double rho_sharp) {
  CharacteristicFrame f;
  const std::size_t n = a.x.size();
  f.N = delta > 0.0 ? 1.0 / std::sqrt(delta) : 0.0;
  f.gap_bound = delta / rho_sharp;
  f.Lambda.resize(n);
  f.Z.resize(n);
  f.Zbar.resize(n);
  f.Ztilde.resize(n);
  f.alpha.resize(n);
  f.beta.resize(n);
  f.alpha_gap = a.gap1;
  f.beta_gap = a.gap3;
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = a.rho[i], th = a.theta[i], u = a.u[i];
    if (!(rho > 0.0) || !(th > 0.0)) throw Error(ErrorKind::NonPhysicalState, "frame needs rho~, theta~ > 0");
    const Mat3 L = left_eigenvectors(rho, th), R = right_eigenvectors(rho, th);
    const Mat3 LR = matmul(L, R);
    const Mat3 LAR = matmul(L, matmul(a1_matrix(rho, u, th), R));
    const Vec3 lam = characteristic_speeds(u, th);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        f.lr_defect = std::max(f.lr_defect, std::abs(LR[r][c] - (r == c ? 1.0 : 0.0)));
        f.lar_defect = std::max(f.lar_defect, std::abs(LAR[r][c] - (r == c ? lam[r] : 0.0)));
      }
    f.Lambda[i] = lam;
    const Vec3 V{d.Phi[i], tv.PsiTilde1[i], tv.WTilde[i]};
    const Vec3 Z = matvec(L, V);
    f.Z[i] = Z;
    f.alpha[i] = 1.0 - a.gap1[i];
    f.beta[i] = 1.0 - a.gap3[i];
    // alpha^N and beta^(-N) through the gaps, accurate when the gaps are tiny.
    const double aN = std::exp(f.N * std::log1p(-a.gap1[i]));
    const double bN = std::exp(-f.N * std::log1p(-a.gap3[i]));
    f.Zbar[i] = {Z[0], aN * Z[1], aN * Z[2]};
    f.Ztilde[i] = {bN * Z[0], bN * Z[1], Z[2]};
    f.alpha_gap_min = std::min(f.alpha_gap_min, a.gap1[i]);
    f.alpha_gap_max = std::max(f.alpha_gap_max, a.gap1[i]);
    f.beta_gap_min = std::min(f.beta_gap_min, a.gap3[i]);
    f.beta_gap_max = std::max(f.beta_gap_max, a.gap3[i]);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Heat-kernel weights

struct HeatKernelWeights {
  std::vector<double> h, n, eta1;
  double n_sup = 0.0;
  double eta_min = INFINITY, eta_max = 0.0;
};

/// Kernel h = (16 pi a (1+t))^(-1/2) exp(-(x - u# t)^2 / (16 a (1+t))) and
/// its x-derivatives of order 0..2 and t-derivative.
struct HeatKernel {
  double a = 1.0, u_sharp = 0.0;

  double variance(double t) const { return 8.0 * a * (1.0 + t); }
  /// Diffusion coefficient of the heat equation h solves.
  double diffusivity() const { return 4.0 * a; }

  std::array<double, 4> eval(double x, double t) const {
    const double v = variance(t), y = x - u_sharp * t;
    const double h = std::exp(-y * y / (2.0 * v)) / std::sqrt(2.0 * kPi * v);
    const double hx = -y / v * h;
    const double hxx = (y * y / (v * v) - 1.0 / v) * h;
    // d/dt at fixed x: variance grows at 8a, centre moves at u#.
    const double dv = 8.0 * a;
    const double ht = h * (-0.5 * dv / v + y * y * dv / (2.0 * v * v)) + u_sharp * y / v * h;
    return {h, hx, hxx, ht};
  }

  /// h_t + u# h_x - D h_xx with D = diffusivity().
  double pde_residual(double x, double t) const {
    const auto e = eval(x, t);
    return e[3] + u_sharp * e[1] - diffusivity() * e[2];
  }
};

inline HeatKernelWeights heat_kernel_weights(const HeatKernel& k, double t, const std::vector<double>& x) {
  HeatKernelWeights w;
  const std::size_t n = x.size();
  w.h.resize(n);
  w.n.resize(n);
  w.eta1.resize(n);
  for (std::size_t i = 0; i < n; ++i) w.h[i] = k.eval(x[i], t)[0];
  // Gaussian mass to the left of the first node, then trapezoid; clamp the
  // roundoff overshoot above 1.
  const double v = k.variance(t);
  double acc = 0.5 * std::erfc(-(x[0] - k.u_sharp * t) / std::sqrt(2.0 * v));
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) acc += 0.5 * (x[i] - x[i - 1]) * (w.h[i - 1] + w.h[i]);
    w.n[i] = std::min(acc, 1.0);
    w.eta1[i] = std::exp(w.n[i]);
    w.n_sup = std::max(w.n_sup, std::abs(w.n[i]));
    w.eta_min = std::min(w.eta_min, w.eta1[i]);
    w.eta_max = std::max(w.eta_max, w.eta1[i]);
  }
  return w;
}

inline HeatKernel heat_kernel_for(const DiffusionWave& wave) { return {wave.a, wave.u_sharp}; }

// ---------------------------------------------------------------------------
// Relative entropy

inline double gamma_fn(double s) { return s - std::log(s) - 1.0; }

struct RelativeEntropy {
  std::vector<double> density;  // pointwise E
  double integral = 0.0;        // int rho E dx
  double ratio_min = INFINITY, ratio_max = 0.0;  // rho E / (|phi|^2 + |u - u~|^2 + |zeta|^2)
};

inline RelativeEntropy relative_entropy(const PlanarSnapshot& s, const AnsatzField& a, double ratio_floor = 1e-6) {
  RelativeEntropy r;
  const std::size_t n = s.size();
  r.density.resize(n);
  std::vector<double> den(n);
  double den_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const GasState g = s.state(i);
    const double rt = a.rho[i], tt = a.theta[i];
    if (!(rt > 0.0) || !(tt > 0.0)) throw Error(ErrorKind::NonPhysicalState, "relative entropy needs rho~, theta~ > 0");
    const Vec3 du{g.u[0] - a.u[i], g.u[1], g.u[2]};
    const double e = 2.0 / 3.0 * tt * gamma_fn(rt / g.rho) + 0.5 * norm2(du) + tt * gamma_fn(g.theta / tt);
    r.density[i] = e;
    r.integral += g.rho * e * s.dx;
    den[i] = sqr(g.rho - rt) + norm2(du) + sqr(g.theta - tt);
    den_max = std::max(den_max, den[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (den_max == 0.0 || den[i] < ratio_floor * den_max) continue;
    const double q = s.state(i).rho * r.density[i] / den[i];
    r.ratio_min = std::min(r.ratio_min, q);
    r.ratio_max = std::max(r.ratio_max, q);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Energy and dissipation functionals

/// Global Maxwellian for the weighted velocity norms.
inline GasState global_maxwellian_state(const GasState& left, const GasState& mid, const GasState& right,
                                        double theta_factor = 0.9) {
  return {mid.rho, mid.u, theta_factor * std::min({left.theta, mid.theta, right.theta})};
}

struct MicroSettings {
  double v_max = 6.0;
  int n_per_axis = 12;
  bool enabled = true;
};

struct EnergyReport {
  double t = 0.0;
  // instant energy components
  double e_anti = 0.0;     // |(Phi, Psi~1, W~)|^2
  double e_h2 = 0.0;       // |(phi, psi, zeta)|_{H^2}^2
  double e_micro_g = 0.0;  // sum_{|a|<=2} |d^a G~|^2 / M_*
  double e_micro_f = 0.0;  // sum_{|a|=3} |d^a f~|^2 / M_*
  double E = 0.0;
  // dissipation components
  double d_anti_grad = 0.0;
  double d_anti_weighted = 0.0;
  double d_h3 = 0.0;
  double d_micro = 0.0;
  double D = 0.0;
  bool micro_is_surrogate = true;
};

namespace detail {

inline double sum_sq(const std::vector<double>& f, double dx) {
  double s = 0.0;
  for (double v : f) s += v * v;
  return s * dx;
}

/// sum_{k in orders} |d^k f|^2 dx with k = 0 meaning f itself.
inline double derivative_energy(const std::vector<double>& f, double dx, int k_min, int k_max,
                                const std::array<const FdOperator*, 4>& D) {
  double s = 0.0;
  for (int k = k_min; k <= k_max; ++k) s += k == 0 ? sum_sq(f, dx) : sum_sq(D[k]->apply(f), dx);
  return s;
}

/// G^s and M^s of one planar state with given x1-gradients of (u1, u2, u3, theta).
inline void ce_row(const GasState& s, const Vec3& du, double dth, const VelocityGrid& g, const Transport& tr,
                   double sign, double* G, double* F) {
  Mat3 grad{};
  for (int c = 0; c < 3; ++c) grad[c][0] = du[c];
  const VelocityFunction Gs = chapman_enskog_microscopic(s, grad, {dth, 0.0, 0.0}, g, tr);
  const VelocityFunction Ms = maxwellian(s, g);
  for (std::size_t q = 0; q < g.size(); ++q) {
    G[q] += sign * Gs[q];
    F[q] += sign * (Ms[q] + Gs[q]);
  }
}

}  // namespace detail

/// Instant energy E(t) and dissipation D(t) from one snapshot. For fluid runs
/// the microscopic parts come from the BGK Chapman-Enskog surrogate with the
/// collision frequency matched to the fluid viscosity.
inline EnergyReport energy_functionals(const PlanarSnapshot& s, const AnsatzField& a, const Perturbation& p,
                                       const AntiDerivatives& d, const TildeVariables& tv, const GasState& sharp,
                                       const GasState& m_star, const Transport& fluid_tr, const MicroSettings& ms = {}) {
  EnergyReport r;
  r.t = s.t;
  const int n = static_cast<int>(s.size());
  const double dx = s.dx;
  FdOperator D1(n, dx, 1), D2(n, dx, 2), D3(n, dx, 3);
  const std::array<const FdOperator*, 4> D{nullptr, &D1, &D2, &D3};

  r.e_anti = detail::sum_sq(d.Phi, dx) + detail::sum_sq(tv.PsiTilde1, dx) + detail::sum_sq(tv.WTilde, dx);
  for (const auto* f : {&p.phi, &p.psi1, &p.psi2, &p.psi3, &p.zeta}) r.e_h2 += detail::derivative_energy(*f, dx, 0, 2, D);

  for (const auto* f : {&d.Phi, &tv.PsiTilde1, &tv.WTilde}) r.d_anti_grad += detail::derivative_energy(*f, dx, 1, 1, D);
  for (int i = 0; i < n; ++i) {
    const double w = std::abs(a.du_s1[i]) + std::abs(a.du_s3[i]) + std::abs(a.dtheta_wave[i]);
    r.d_anti_weighted += w * (sqr(d.Phi[i]) + sqr(tv.PsiTilde1[i]) + sqr(tv.WTilde[i])) * dx;
  }
  for (const auto* f : {&p.phi, &p.psi1, &p.psi2, &p.psi3, &p.omega}) r.d_h3 += detail::derivative_energy(*f, dx, 1, 3, D);

  if (ms.enabled) {
    const VelocityGrid g(ms.v_max, ms.n_per_axis);
    const std::size_t nv = g.size();
    Transport tr = fluid_tr;
    tr.nu_ref = kGasConstant * fluid_tr.theta_ref / fluid_tr.mu_ref;
    const VelocityFunction Mstar = maxwellian(m_star, g);
    const VelocityFunction Msharp = maxwellian(sharp, g);
    std::vector<double> wq(nv);
    for (std::size_t q = 0; q < nv; ++q) wq[q] = g.weight(q) / Mstar[q];
    // Primitive fields of the solution and their x1-derivatives.
    std::vector<double> u1(n), u2(n), u3(n), th(n), rho(n);
    for (int i = 0; i < n; ++i) {
      const GasState st = s.state(i);
      rho[i] = st.rho, u1[i] = st.u[0], u2[i] = st.u[1], u3[i] = st.u[2], th[i] = st.theta;
    }
    const auto du1 = D1.apply(u1), du2 = D1.apply(u2), du3 = D1.apply(u3), dth = D1.apply(th);
    std::vector<double> G(static_cast<std::size_t>(n) * nv, 0.0), F(static_cast<std::size_t>(n) * nv, 0.0);
    for (int i = 0; i < n; ++i) {
      double* Gi = &G[static_cast<std::size_t>(i) * nv];
      double* Fi = &F[static_cast<std::size_t>(i) * nv];
      const GasState st = s.state(i);
      detail::ce_row(st, {du1[i], du2[i], du3[i]}, dth[i], g, tr, 1.0, Gi, Fi);
      for (const ProfilePoint* pp : {&a.s1[i], &a.s3[i]})
        detail::ce_row(pp->state, {pp->d1[1], 0.0, 0.0}, pp->d1[2], g, tr, -1.0, Gi, Fi);
      for (std::size_t q = 0; q < nv; ++q) Fi[q] += Msharp[q];
    }
    std::vector<double> row(nv);
    for (int i = 0; i < n; ++i) {
      const double nu = tr.nu(rho[i], th[i]);
      const double* Gi = &G[static_cast<std::size_t>(i) * nv];
      double acc = 0.0;
      for (std::size_t q = 0; q < nv; ++q) acc += wq[q] * Gi[q] * Gi[q];
      r.e_micro_g += acc * dx;
      for (int k = 1; k <= 3; ++k) {
        D[k]->apply_row(G, nv, i, row.data());
        double sk = 0.0;
        for (std::size_t q = 0; q < nv; ++q) sk += wq[q] * row[q] * row[q];
        if (k <= 2) r.e_micro_g += sk * dx;
        r.d_micro += nu * sk * dx;
      }
      D3.apply_row(F, nv, i, row.data());
      double sf = 0.0;
      for (std::size_t q = 0; q < nv; ++q) sf += wq[q] * row[q] * row[q];
      r.e_micro_f += sf * dx;
    }
  }
  r.E = r.e_anti + r.e_h2 + r.e_micro_g + r.e_micro_f;
  r.D = r.d_anti_grad + r.d_anti_weighted + r.d_h3 + r.d_micro;
  return r;
}

// ---------------------------------------------------------------------------
// Microscopic norms of a kinetic snapshot

struct MicroscopicNorms {
  double g_norm2 = 0.0;     // sum |G~|^2 / M_* dv dx
  double g_nu_norm2 = 0.0;  // with nu weight
};

/// G~ = f - M[f] - G^{s1} - G^{s3}, with M[f] the moment-matched discrete
/// Maxwellian and G^{si} the BGK Chapman-Enskog surrogate of the shifted
/// profiles (omitted when ansatz is null).
inline MicroscopicNorms microscopic_norms(const KineticSolver& ks, const CompositeAnsatz* ansatz, const GasState& m_star,
                                          const Transport& tr) {
  MicroscopicNorms r;
  const VelocityGrid& g = ks.velocity_grid();
  const std::size_t nv = g.size();
  const VelocityFunction Mstar = maxwellian(m_star, g);
  std::vector<double> M(nv), G(nv), F(nv);
  for (int i = 0; i < ks.cells(); ++i) {
    const double* f = ks.cell(i);
    const Conserved c = moments(f, g);
    const GasState s = conserved_to_primitive(c);
    evaluate(match_maxwellian(c, g), g, M.data());
    for (std::size_t q = 0; q < nv; ++q) G[q] = f[q] - M[q];
    if (ansatz) {
      std::fill(F.begin(), F.end(), 0.0);
      for (const ProfilePoint& pp : {ansatz->profile1_at(ks.x(i), ks.time()), ansatz->profile3_at(ks.x(i), ks.time())})
        detail::ce_row(pp.state, {pp.d1[1], 0.0, 0.0}, pp.d1[2], g, tr, -1.0, G.data(), F.data());
    }
    const double nu = tr.nu(s.rho, s.theta);
    double acc = 0.0;
    for (std::size_t q = 0; q < nv; ++q)
      if (Mstar[q] > 0.0) acc += g.weight(q) * G[q] * G[q] / Mstar[q];
    r.g_norm2 += acc * ks.dx();
    r.g_nu_norm2 += nu * acc * ks.dx();
  }
  return r;
}

// ---------------------------------------------------------------------------
// Transverse mode diagnostics on a fluid state

/// Transverse slab of component c at cell i as a torus field.
inline TorusField torus_slice(const FluidSolver& fs, int i, int c) {
  const Grid& g = fs.grid();
  TorusField h{g.n2, g.n3, std::vector<double>(g.nt())};
  for (int t = 0; t < g.nt(); ++t) h.v[t] = fs.state()[g.at(i, t, c)];
  return h;
}

struct ModeNorms {
  double zero = 0.0, nonzero = 0.0, total = 0.0;  // squared L2 over cells and torus
  double splitting_defect = 0.0;                  // |total - zero - nonzero| / total
};

inline ModeNorms mode_norms(const FluidSolver& fs, const std::vector<double>* reference = nullptr) {
  const Grid& g = fs.grid();
  ModeNorms m;
  for (int i = 0; i < g.N; ++i)
    for (int c = 0; c < 5; ++c) {
      TorusField h = torus_slice(fs, i, c);
      if (reference)
        for (int t = 0; t < g.nt(); ++t) h.v[t] -= (*reference)[g.at(i, t, c)];
      const ModeSplit sp = mode_decompose(h);
      m.zero += sp.zero * sp.zero * g.dx();
      m.nonzero += torus_norm2(sp.nonzero) * g.dx();
      m.total += torus_norm2(h) * g.dx();
    }
  m.splitting_defect = m.total > 0.0 ? std::abs(m.total - m.zero - m.nonzero) / m.total : 0.0;
  return m;
}

}  // namespace shockstab

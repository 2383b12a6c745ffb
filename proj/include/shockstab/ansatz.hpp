#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <vector>

#include "shockstab/core.hpp"
#include "shockstab/euler.hpp"
#include "shockstab/gas.hpp"
#include "shockstab/profile.hpp"
#include "shockstab/transport.hpp"

namespace shockstab {

/// Excess mass split along r1 (1-shock jump), r2 = (1, u#, u#^2/2) and
/// r3 (3-shock jump) in (rho, m1, E) space.
struct MassDecomposition {
  Vec3 alpha{0.0, 0.0, 0.0};
  Vec3 r1{}, r2{}, r3{};
  double det = 0.0;

  Vec3 combine(const Vec3& a) const { return a[0] * r1 + a[1] * r2 + a[2] * r3; }
};

inline Mat3 direction_matrix(const Vec3& r1, const Vec3& r2, const Vec3& r3) {
  return {{{r1[0], r2[0], r3[0]}, {r1[1], r2[1], r3[1]}, {r1[2], r2[2], r3[2]}}};
}

inline MassDecomposition decompose_initial_mass(const Vec3& excess, const CompositeWaveSolution& sol,
                                                const RiemannData& data) {
  MassDecomposition d;
  const Vec3 um = planar_triple(data.left), uh = planar_triple(sol.intermediate), up = planar_triple(data.right);
  const double u = sol.intermediate.u[0];
  d.r1 = uh - um;
  d.r2 = {1.0, u, 0.5 * u * u};
  d.r3 = up - uh;
  const Mat3 A = direction_matrix(d.r1, d.r2, d.r3);
  d.det = det3(A);
  const double scale = std::max({std::sqrt(norm2(d.r1)), std::sqrt(norm2(d.r2)), std::sqrt(norm2(d.r3))});
  if (!(std::abs(d.det) >= 1e-10 * scale * scale * scale))
    throw Error(ErrorKind::DegenerateDirections, "r1, r2, r3 are (nearly) linearly dependent");
  std::array<std::array<double, 3>, 3> a{A[0], A[1], A[2]};
  std::array<double, 3> b = excess;
  lu_solve<3>(a, b);
  d.alpha = b;
  return d;
}

/// Linear diffusion wave carrying mass alpha2 along the second field.
struct DiffusionWave {
  double alpha2 = 0.0;
  double a = 0.6;
  double u_sharp = 0.0;

  static double coefficient(double kappa_sharp, double rho_sharp) { return 3.0 * kappa_sharp / (5.0 * rho_sharp); }

  /// x-derivatives of order 0..3 at (x, t).
  std::array<double, 4> derivatives(double x, double t) const {
    const double tau = 1.0 + t, y = x - u_sharp * t;
    const double th = alpha2 / std::sqrt(4.0 * kPi * a * tau) * std::exp(-y * y / (4.0 * a * tau));
    const double q = 1.0 / (2.0 * a * tau);
    return {th, -y * q * th, (y * y * q * q - q) * th, (-y * y * y * q * q * q + 3.0 * y * q * q) * th};
  }
  double value(double x, double t, int order = 0) const { return derivatives(x, t)[order]; }
  /// Theta_t and Theta_xt from the defining equation.
  std::array<double, 2> time_derivatives(double x, double t) const {
    const auto d = derivatives(x, t);
    return {-u_sharp * d[1] + a * d[2], -u_sharp * d[2] + a * d[3]};
  }
};

/// Ansatz fields with their x and t derivatives at one point.
struct AnsatzPoint {
  Vec3 U{};     // (rho~, m1~, E~)
  Vec3 Ux{};    // d/dx
  Vec3 Ut{};    // d/dt
  double Theta = 0.0;
  double u = 0.0, theta = 0.0, p = 0.0;  // derived primitive fields
  double ux = 0.0, thetax = 0.0;
  GasState state() const { return GasState::planar(U[0], u, theta); }
};

struct ShiftResult {
  double offset1 = 0.0, offset3 = 0.0;
  /// |mass absorbed - alpha_i r_i| in the m1 and E components.
  double defect1 = 0.0, defect3 = 0.0;
};

namespace detail {

/// Conserved triple and first/second xi-derivatives of a profile point.
struct ProfileConserved {
  Vec3 U, d1, d2;
};

inline ProfileConserved profile_conserved(const ProfilePoint& q) {
  const double r = q.state.rho, u = q.state.u[0], th = q.state.theta;
  const double r1 = q.d1[0], u1 = q.d1[1], t1 = q.d1[2];
  const double r2 = q.d2[0], u2 = q.d2[1], t2 = q.d2[2];
  const double e = th + 0.5 * u * u, e1 = t1 + u * u1, e2 = t2 + u1 * u1 + u * u2;
  return {{r, r * u, r * e}, {r1, r1 * u + r * u1, r1 * e + r * e1}, {r2, r2 * u + 2 * r1 * u1 + r * u2, r2 * e + 2 * r1 * e1 + r * e2}};
}

/// Integral over xi of [F(xi + shift) - F(xi)] for the conserved triple.
inline Vec3 shift_mass(const ShockProfile& p, double shift) {
  if (p.constant() || shift == 0.0) return {0.0, 0.0, 0.0};
  const double A = p.xi_min() - std::abs(shift) - p.h, B = p.xi_max() + std::abs(shift) + p.h;
  const int n = 2 * static_cast<int>(std::ceil((B - A) / (p.h / 8.0)) / 2 + 1);
  const double dx = (B - A) / n;
  Vec3 sum{0.0, 0.0, 0.0};
  for (int i = 0; i <= n; ++i) {
    const double x = A + i * dx;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const Vec3 d = planar_triple(p.at(x + shift).state) - planar_triple(p.at(x).state);
    sum = sum + w * d;
  }
  return (dx / 3.0) * sum;
}

}  // namespace detail

/// Translation of each profile that absorbs alpha_1 r_1 (alpha_3 r_3) of mass,
/// found from the density component; the other two components are reported
/// as defects.
inline ShiftResult shift_profiles(const MassDecomposition& dec, const ShockProfile& p1, const ShockProfile& p3) {
  ShiftResult out;
  auto solve = [](const ShockProfile& p, double alpha, const Vec3& r, double& defect) {
    if (alpha == 0.0 || p.constant()) return 0.0;
    const double jump = p.right.rho - p.left.rho;
    double x = alpha;
    for (int it = 0; it < 20; ++it) {
      const double g = detail::shift_mass(p, x)[0] - alpha * jump;
      const double dx = g / jump;
      x -= dx;
      if (std::abs(dx) <= 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    const Vec3 m = detail::shift_mass(p, x);
    defect = std::max(std::abs(m[1] - alpha * r[1]), std::abs(m[2] - alpha * r[2]));
    return x;
  };
  out.offset1 = solve(p1, dec.alpha[0], dec.r1, out.defect1);
  out.offset3 = solve(p3, dec.alpha[2], dec.r3, out.defect3);
  return out;
}

/// Shifted 1- and 3-shock profiles plus the corrected diffusion wave.
class CompositeAnsatz {
 public:
  CompositeAnsatz(ShockProfile p1, ShockProfile p3, GasState intermediate, const Transport& tr, double alpha1,
                  double alpha3, double alpha2, bool with_diffusion_wave = true)
      : p1_(std::move(p1)), p3_(std::move(p3)), mid_(intermediate), tr_(tr), alpha1_(alpha1), alpha3_(alpha3),
        with_wave_(with_diffusion_wave) {
    wave_.alpha2 = with_wave_ ? alpha2 : 0.0;
    wave_.a = DiffusionWave::coefficient(tr.kappa(mid_.theta), mid_.rho);
    wave_.u_sharp = mid_.u[0];
  }

  const ShockProfile& profile1() const { return p1_; }
  const ShockProfile& profile3() const { return p3_; }
  const DiffusionWave& wave() const { return wave_; }
  const GasState& intermediate() const { return mid_; }
  const Transport& transport() const { return tr_; }
  double alpha1() const { return alpha1_; }
  double alpha3() const { return alpha3_; }
  bool with_diffusion_wave() const { return with_wave_; }
  void set_shifts(double a1, double a2, double a3) {
    alpha1_ = a1;
    alpha3_ = a3;
    if (with_wave_) wave_.alpha2 = a2;
  }

  ProfilePoint profile1_at(double x, double t) const { return evaluate_shifted_full(p1_, x, t, alpha1_); }
  ProfilePoint profile3_at(double x, double t) const { return evaluate_shifted_full(p3_, x, t, alpha3_); }

  /// Shock superposition without the diffusion wave.
  Vec3 shocks_only(double x, double t) const {
    return planar_triple(profile1_at(x, t).state) + planar_triple(profile3_at(x, t).state) - planar_triple(mid_);
  }

  AnsatzPoint eval(double x, double t) const {
    const auto c1 = detail::profile_conserved(profile1_at(x, t));
    const auto c3 = detail::profile_conserved(profile3_at(x, t));
    const Vec3 um = planar_triple(mid_);
    const auto th = wave_.derivatives(x, t);
    const auto tt = wave_.time_derivatives(x, t);
    const double us = mid_.u[0], a = wave_.a;
    AnsatzPoint r;
    r.Theta = th[0];
    const Vec3 w0{th[0], us * th[0] - a * th[1], 0.5 * us * us * th[0] - a * us * th[1]};
    const Vec3 w1{th[1], us * th[1] - a * th[2], 0.5 * us * us * th[1] - a * us * th[2]};
    const Vec3 wt{tt[0], us * tt[0] - a * tt[1], 0.5 * us * us * tt[0] - a * us * tt[1]};
    r.U = c1.U + c3.U - um + w0;
    r.Ux = c1.d1 + c3.d1 + w1;
    r.Ut = (-p1_.s) * c1.d1 + (-p3_.s) * c3.d1 + wt;
    r.u = r.U[1] / r.U[0];
    const double e = r.U[2] / r.U[0];
    r.theta = e - 0.5 * r.u * r.u;
    r.p = kGasConstant * r.U[0] * r.theta;
    r.ux = (r.Ux[1] - r.u * r.Ux[0]) / r.U[0];
    const double ex = (r.Ux[2] - e * r.Ux[0]) / r.U[0];
    r.thetax = ex - r.u * r.ux;
    return r;
  }

 private:
  ShockProfile p1_, p3_;
  GasState mid_;
  Transport tr_;
  double alpha1_, alpha3_;
  bool with_wave_;
  DiffusionWave wave_;
};

inline CompositeAnsatz build_ansatz(const CompositeWaveSolution& sol, const ShockProfile& p1, const ShockProfile& p3,
                                    const MassDecomposition& dec, const Transport& tr, bool with_diffusion_wave = true) {
  const ShiftResult sh = shift_profiles(dec, p1, p3);
  return CompositeAnsatz(p1, p3, sol.intermediate, tr, sh.offset1, sh.offset3, dec.alpha[1], with_diffusion_wave);
}

struct AnsatzResidual {
  double res_mass = 0.0, res_mom = 0.0, res_energy = 0.0;
  double Q1 = 0.0, Q2 = 0.0;
};

namespace detail {

/// Navier-Stokes momentum and energy fluxes (inviscid minus viscous) of the ansatz.
inline std::array<double, 2> ansatz_fluxes(const CompositeAnsatz& A, const AnsatzPoint& r) {
  const Transport& tr = A.transport();
  const double mu = tr.mu(r.theta), kappa = tr.kappa(r.theta);
  return {r.U[1] * r.u + r.p - 4.0 / 3.0 * mu * r.ux,
          (r.U[2] + r.p) * r.u - kappa * r.thetax - 4.0 / 3.0 * mu * r.u * r.ux};
}

}  // namespace detail

/// Remainders Q1~, Q2~ from their defining expressions at (x, t).
inline std::array<double, 2> ansatz_remainders(const CompositeAnsatz& A, double x, double t) {
  const Transport& tr = A.transport();
  const AnsatzPoint r = A.eval(x, t);
  const GasState& h = A.intermediate();
  const double us = h.u[0], a = A.wave().a;
  const auto th = A.wave().derivatives(x, t);
  const ProfilePoint q1 = A.profile1_at(x, t), q3 = A.profile3_at(x, t);
  auto parts = [&](const ProfilePoint& q) {
    const GasState& g = q.state;
    const double m = g.rho * g.u[0], E = g.rho * (g.theta + 0.5 * g.u[0] * g.u[0]), p = g.pressure();
    return std::array<double, 6>{m * m / g.rho, p, tr.mu(g.theta) * q.d1[1], m * E / g.rho, m * p / g.rho,
                                 tr.kappa(g.theta) * q.d1[2]};
  };
  const auto a1 = parts(q1), a3 = parts(q3);
  ProfilePoint qh;
  qh.state = h;
  const auto ah = parts(qh);
  const double mu = tr.mu(r.theta), kappa = tr.kappa(r.theta);
  const double mt = r.U[1];
  double Q1 = (mt * mt / r.U[0] - a1[0] - a3[0] + ah[0]) + (r.p - a1[1] - a3[1] + ah[1]) -
              4.0 / 3.0 * (mu * r.ux - a1[2] - a3[2]) + 2.0 * us * a * th[1] - us * us * th[0] - a * a * th[2];
  const double u1 = q1.state.u[0], u3 = q3.state.u[0];
  double Q2 = (mt * r.U[2] / r.U[0] - a1[3] - a3[3] + ah[3]) + (mt * r.p / r.U[0] - a1[4] - a3[4] + ah[4]) -
              (kappa * r.thetax - a1[5] - a3[5]) - 4.0 / 3.0 * (mu * r.u * r.ux - a1[2] * u1 - a3[2] * u3) +
              0.5 * us * us * a * th[1] - 0.5 * us * us * us * th[0] + (a * us * us * th[1] - a * a * us * th[2]);
  return {Q1, Q2};
}

/// Left-hand sides of the ansatz equations at Navier-Stokes closure.
/// The mass residual is analytic; the flux divergences use a fourth-order
/// central difference with step `fd_h`.
inline AnsatzResidual ansatz_residual(const CompositeAnsatz& A, double x, double t, double fd_h = 1e-3) {
  AnsatzResidual out;
  const AnsatzPoint r = A.eval(x, t);
  out.res_mass = r.Ut[0] + r.Ux[1];
  auto flux = [&](double y) { return detail::ansatz_fluxes(A, A.eval(y, t)); };
  const auto fp1 = flux(x + fd_h), fm1 = flux(x - fd_h), fp2 = flux(x + 2 * fd_h), fm2 = flux(x - 2 * fd_h);
  for (int c = 0; c < 2; ++c) {
    const double dfx = (8.0 * (fp1[c] - fm1[c]) - (fp2[c] - fm2[c])) / (12.0 * fd_h);
    (c == 0 ? out.res_mom : out.res_energy) = r.Ut[1 + c] + dfx;
  }
  const auto Q = ansatz_remainders(A, x, t);
  out.Q1 = Q[0];
  out.Q2 = Q[1];
  return out;
}

/// Remainder class envelope
/// C(d^2 + |a2| d^{3/2}) e^{-c(|x|+t)} + C |a2| (1+t)^{-3/2} e^{-mu (x - u# t)^2/(1+t)}
///   + C (d + |a2|) e^{-c(|x|+t)}.
struct QEnvelope {
  double C = 1.0, c = 1.0, mu = 1.0;
  double delta = 0.0, alpha2 = 0.0, u_sharp = 0.0;

  double operator()(double x, double t) const {
    const double a2 = std::abs(alpha2);
    const double ex = std::exp(-c * (std::abs(x) + t));
    const double y = x - u_sharp * t;
    return C * (delta * delta + a2 * std::pow(delta, 1.5)) * ex +
           C * a2 * std::pow(1.0 + t, -1.5) * std::exp(-mu * y * y / (1.0 + t)) + C * (delta + a2) * ex;
  }
};

inline double q_envelope(double x, double t, double delta, double alpha2, double C, double c, double mu,
                         double u_sharp = 0.0) {
  return QEnvelope{C, c, mu, delta, alpha2, u_sharp}(x, t);
}

struct QSample {
  double x, t, q;
};

/// Fits (C, c) with mu fixed: for each trial c, C is the smallest constant
/// that majorizes every sample; c minimizes the squared log-gap between the
/// envelope and the samples.
inline QEnvelope fit_q_envelope(const std::vector<QSample>& samples, double delta, double alpha2, double mu,
                                double u_sharp, double floor = 1e-300) {
  QEnvelope best{1.0, 1.0, mu, delta, alpha2, u_sharp};
  double best_obj = INFINITY;
  for (int i = 0; i <= 400; ++i) {
    QEnvelope e{1.0, std::pow(10.0, -5.0 + 6.0 * i / 400.0), mu, delta, alpha2, u_sharp};
    double C = 0.0;
    for (const auto& s : samples) {
      const double v = e(s.x, s.t);
      if (std::abs(s.q) > floor) C = std::max(C, v > 0.0 ? std::abs(s.q) / v : INFINITY);
    }
    if (!std::isfinite(C) || C <= 0.0) continue;
    e.C = C;
    double obj = 0.0;
    for (const auto& s : samples)
      if (std::abs(s.q) > floor) obj += sqr(std::log(e(s.x, s.t) / std::abs(s.q)));
    if (obj < best_obj) best_obj = obj, best = e;
  }
  return best;
}

inline void write_ansatz_csv(std::ostream& os, const CompositeAnsatz& A, const std::vector<double>& x, double t) {
  os.precision(17);
  os << "x1,rho,m1,E,Theta\n";
  for (double xi : x) {
    const AnsatzPoint r = A.eval(xi, t);
    os << xi << ',' << r.U[0] << ',' << r.U[1] << ',' << r.U[2] << ',' << r.Theta << '\n';
  }
}

}  // namespace shockstab

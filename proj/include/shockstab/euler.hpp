#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "shockstab/core.hpp"
#include "shockstab/gas.hpp"

namespace shockstab {

/// Planar Riemann data; transverse velocities must vanish on both sides.
struct RiemannData {
  GasState left;
  GasState right;
};

/// Result of crossing a single shock.
struct ShockJump {
  GasState state;  // the state on the other side of the shock
  double speed = 0.0;
};

struct CompositeWaveSolution {
  GasState intermediate;
  double s1 = 0.0;
  double s3 = 0.0;
  double delta_s1 = 0.0;
  double delta_s3 = 0.0;
  double delta = 0.0;
  int newton_iterations = 0;
  double rh_residual = 0.0;  // max over the six jump conditions
  /// lambda_1# < s1, s1 < lambda_1-, lambda_3+ < s3, s3 < lambda_3#
  std::array<bool, 4> lax{true, true, true, true};
};

struct NewtonOptions {
  double fd_step = 1e-7;
  double tol = 1e-12;
  int max_iter = 50;
  /// Allowed density mismatch across the (absent) contact, relative to rho#.
  double contact_tol = 1e-9;
};

namespace detail {

inline void check_family(int family) {
  if (family != 1 && family != 3) throw Error(ErrorKind::BranchViolation, "shock family must be 1 or 3");
}

inline double density_ratio(double beta) { return (4.0 * beta + 1.0) / (beta + 4.0); }

/// Squared mass flux through a shock with upstream (rho, p) and pressure
/// ratio beta; regular at beta = 1 where it reduces to gamma rho p.
inline double mass_flux_sq(double rho, double p, double beta) { return rho * p * (4.0 * beta + 1.0) / 3.0; }

/// Downstream (rho, u1, p) and speed from upstream via pressure ratio beta.
/// Evaluates the algebraic Hugoniot curve, including its non-entropic part
/// beta < 1 (used by Newton iterates only).
inline std::array<double, 4> hugoniot_curve(double rho, double u1, double p, double beta, int family) {
  const double rb = rho * density_ratio(beta);
  const double j = std::sqrt(mass_flux_sq(rho, p, beta));
  if (family == 1) {
    const double s = u1 - j / rho;
    return {rb, s + j / rb, beta * p, s};
  }
  const double s = u1 + j / rho;
  return {rb, s - j / rb, beta * p, s};
}

}  // namespace detail

/// Downstream state of a family-1 or family-3 shock from the given upstream
/// state. `strength` = p_downstream / p_upstream - 1 >= 0 selects the entropic
/// branch; zero returns the upstream state with the characteristic speed.
inline ShockJump hugoniot_state(const GasState& upstream, int family, double strength) {
  detail::check_family(family);
  if (!upstream.valid()) throw Error(ErrorKind::NonPhysicalState, "invalid upstream state");
  if (!(strength >= 0.0)) throw Error(ErrorKind::BranchViolation, "negative strength selects the non-entropic branch");
  const Vec3 lam_up = euler_eigenvalues(upstream);
  if (strength == 0.0) return {upstream, family == 1 ? lam_up[0] : lam_up[2]};
  const auto d = detail::hugoniot_curve(upstream.rho, upstream.u[0], upstream.pressure(), 1.0 + strength, family);
  GasState down = GasState::planar(d[0], d[1], d[2] / (kGasConstant * d[0]));
  down.u[1] = upstream.u[1];
  down.u[2] = upstream.u[2];
  const double s = d[3];
  const Vec3 lam_down = euler_eigenvalues(down);
  const bool lax = family == 1 ? (lam_down[0] < s && s < lam_up[0]) : (lam_up[2] < s && s < lam_down[2]);
  if (!lax) throw Error(ErrorKind::BranchViolation, "Lax inequalities fail on the requested Hugoniot point");
  return {down, s};
}

/// Inverse of hugoniot_state: the upstream state that a shock of the given
/// family and strength connects to `downstream`.
inline ShockJump hugoniot_upstream(const GasState& downstream, int family, double strength) {
  detail::check_family(family);
  if (!downstream.valid()) throw Error(ErrorKind::NonPhysicalState, "invalid downstream state");
  if (!(strength >= 0.0)) throw Error(ErrorKind::BranchViolation, "negative strength selects the non-entropic branch");
  const Vec3 lam_down = euler_eigenvalues(downstream);
  if (strength == 0.0) return {downstream, family == 1 ? lam_down[0] : lam_down[2]};
  const double beta = 1.0 + strength;
  const double pa = downstream.pressure() / beta;
  const double ra = downstream.rho / detail::density_ratio(beta);
  const double j = std::sqrt(detail::mass_flux_sq(ra, pa, beta));
  double s, ua;
  if (family == 1) {
    s = downstream.u[0] - j / downstream.rho;
    ua = s + j / ra;
  } else {
    s = downstream.u[0] + j / downstream.rho;
    ua = s - j / ra;
  }
  return {GasState::planar(ra, ua, pa / (kGasConstant * ra)), s};
}

/// delta^s = |[rho]| + |[m]| + |[E]| across one shock.
inline double shock_strength(const GasState& a, const GasState& b) {
  const Vec3 ua = planar_triple(a), ub = planar_triple(b);
  return std::abs(ua[0] - ub[0]) + std::abs(ua[1] - ub[1]) + std::abs(ua[2] - ub[2]);
}

/// (delta^{s1}, delta^{s3}, delta) for a composite solution of `data`.
inline Vec3 wave_strengths(const CompositeWaveSolution& sol, const RiemannData& data) {
  const double d1 = shock_strength(sol.intermediate, data.left);
  const double d3 = shock_strength(sol.intermediate, data.right);
  return {d1, d3, std::min(d1, d3)};
}

/// Max |residual| over both shocks' jump conditions.
inline double composite_rh_residual(const CompositeWaveSolution& sol, const RiemannData& data) {
  const Vec3 r1 = rankine_hugoniot_residual(data.left, sol.intermediate, sol.s1);
  const Vec3 r3 = rankine_hugoniot_residual(sol.intermediate, data.right, sol.s3);
  double m = 0.0;
  for (int i = 0; i < 3; ++i) m = std::max({m, std::abs(r1[i]), std::abs(r3[i])});
  return m;
}

inline std::array<bool, 4> lax_conditions(const CompositeWaveSolution& sol, const RiemannData& data) {
  const Vec3 lm = euler_eigenvalues(data.left);
  const Vec3 lh = euler_eigenvalues(sol.intermediate);
  const Vec3 lp = euler_eigenvalues(data.right);
  return {lh[0] < sol.s1, sol.s1 < lm[0], lp[2] < sol.s3, sol.s3 < lh[2]};
}

/// Intermediate state of the 1-shock + 3-shock composite wave.
///
/// Newton iteration on (p#, u1#): the 1-family Hugoniot curve from the left
/// state and the 3-family curve from the right state must meet. The density
/// reached from both sides must agree (no contact wave), and Lax inequalities
/// are verified for every shock of positive strength.
inline CompositeWaveSolution solve_intermediate_state(const RiemannData& data, const NewtonOptions& opt = {}) {
  const GasState& L = data.left;
  const GasState& R = data.right;
  if (!L.valid() || !R.valid()) throw Error(ErrorKind::NonPhysicalState, "invalid Riemann end state");
  if (L.u[1] != 0.0 || L.u[2] != 0.0 || R.u[1] != 0.0 || R.u[2] != 0.0)
    throw Error(ErrorKind::NotTwoShock, "transverse velocities must vanish in the Riemann data");

  CompositeWaveSolution sol;
  if (L.rho == R.rho && L.u[0] == R.u[0] && L.theta == R.theta) {
    sol.intermediate = L;
    const Vec3 lam = euler_eigenvalues(L);
    sol.s1 = lam[0];
    sol.s3 = lam[2];
    return sol;
  }

  const double pL = L.pressure(), pR = R.pressure();
  auto residual = [&](double p, double u) -> std::array<double, 2> {
    const auto a = detail::hugoniot_curve(L.rho, L.u[0], pL, p / pL, 1);
    const auto b = detail::hugoniot_curve(R.rho, R.u[0], pR, p / pR, 3);
    return {a[1] - u, b[1] - u};
  };

  double p = 0.5 * (pL + pR);
  double u = 0.5 * (L.u[0] + R.u[0]);
  const double pscale = std::max(pL, pR);
  const double uscale = std::max({std::abs(L.u[0]), std::abs(R.u[0]), L.sound_speed(), R.sound_speed()});
  bool converged = false;
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    const auto r = residual(p, u);
    if (std::abs(r[0]) < opt.tol * uscale && std::abs(r[1]) < opt.tol * uscale) {
      converged = true;
      break;
    }
    const double hp = opt.fd_step * pscale, hu = opt.fd_step * uscale;
    const auto rp = residual(p + hp, u);
    const auto ru = residual(p, u + hu);
    std::array<std::array<double, 2>, 2> J{{{(rp[0] - r[0]) / hp, (ru[0] - r[0]) / hu},
                                            {(rp[1] - r[1]) / hp, (ru[1] - r[1]) / hu}}};
    std::array<double, 2> dx{-r[0], -r[1]};
    if (!lu_solve<2>(J, dx)) throw Error(ErrorKind::NoConvergence, "singular Jacobian in intermediate-state Newton");
    double lambda = 1.0;
    while (p + lambda * dx[0] <= 0.0) lambda *= 0.5;
    p += lambda * dx[0];
    u += lambda * dx[1];
    if (!std::isfinite(p) || !std::isfinite(u)) break;
  }
  if (!converged) throw Error(ErrorKind::NoConvergence, "intermediate-state Newton did not converge");

  const auto a = detail::hugoniot_curve(L.rho, L.u[0], pL, p / pL, 1);
  const auto b = detail::hugoniot_curve(R.rho, R.u[0], pR, p / pR, 3);
  if (std::abs(a[0] - b[0]) > opt.contact_tol * a[0]) {
    std::ostringstream os;
    os << "densities behind the shocks differ (" << a[0] << " vs " << b[0] << "); data needs a contact wave";
    throw Error(ErrorKind::NotTwoShock, os.str());
  }
  const double rho_mid = 0.5 * (a[0] + b[0]);
  // u from the 1-curve and 3-curve agree to Newton tolerance; use their mean.
  sol.intermediate = GasState::planar(rho_mid, 0.5 * (a[1] + b[1]), p / (kGasConstant * rho_mid));
  sol.s1 = a[3];
  sol.s3 = b[3];
  sol.newton_iterations = it;
  const Vec3 ws = wave_strengths(sol, data);
  sol.delta_s1 = ws[0];
  sol.delta_s3 = ws[1];
  sol.delta = ws[2];
  sol.rh_residual = composite_rh_residual(sol, data);
  sol.lax = lax_conditions(sol, data);
  const bool ok1 = sol.delta_s1 == 0.0 || (sol.lax[0] && sol.lax[1]);
  const bool ok3 = sol.delta_s3 == 0.0 || (sol.lax[2] && sol.lax[3]);
  if (!ok1 || !ok3) throw Error(ErrorKind::NotTwoShock, "Lax entropy inequalities fail; data is not a two-shock pattern");
  return sol;
}

/// Riemann data whose exact solution is a 1-shock and 3-shock with the given
/// intermediate state and pressure-ratio strengths.
inline RiemannData manufacture_two_shock(const GasState& intermediate, double strength1, double strength3) {
  return {hugoniot_upstream(intermediate, 1, strength1).state, hugoniot_upstream(intermediate, 3, strength3).state};
}

/// Pressure-ratio strength giving wave strength `target` for the shock of
/// `family` that ends in `downstream` (bisection; strength is monotone).
inline double strength_for_wave_strength(const GasState& downstream, int family, double target) {
  if (target <= 0.0) return 0.0;
  auto ws = [&](double sigma) { return shock_strength(downstream, hugoniot_upstream(downstream, family, sigma).state); };
  double lo = 0.0, hi = 0.1;
  while (ws(hi) < target) {
    hi *= 2.0;
    if (hi > 1e3) throw Error(ErrorKind::NoConvergence, "wave strength target out of range");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ws(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace shockstab

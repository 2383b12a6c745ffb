#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <ostream>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "shockstab/core.hpp"
#include "shockstab/euler.hpp"
#include "shockstab/gas.hpp"
#include "shockstab/transport.hpp"

namespace shockstab {

struct ProfileGridParams {
  double spacing = 0.0;     // 0 selects min(0.1/delta, 0.5, width/10)
  double half_width = 0.0;  // 0 selects the tail-driven extent (>= 12/(c delta))
  double tail_tol = 1e-9;
  double ode_tol = 1e-10;
};

/// Value and xi-derivatives of a profile at one point.
struct ProfilePoint {
  GasState state;
  std::array<double, 3> d1{};  // (rho', u1', theta')
  std::array<double, 3> d2{};  // (rho'', u1'', theta'')
};

/// Tabulated viscous shock profile on a uniform xi grid, xi = x1 - s t.
/// Between nodes (u1, theta) are cubic Hermite interpolants whose nodal slopes
/// come from the ODE vector field; rho follows from the constant mass flux.
class ShockProfile {
 public:
  int family = 1;
  double s = 0.0;
  double delta = 0.0;
  double mass_flux = 0.0;  // rho (u1 - s)
  GasState left, right;
  double xi0 = 0.0, h = 1.0;
  std::vector<double> u1, theta, du1, dtheta;
  /// Slow eigenvalues of the linearization at (left, right); their moduli are
  /// the exponential tail rates.
  std::array<double, 2> tail_rates{0.0, 0.0};
  double first_integral_residual = 0.0;

  std::size_t size() const { return u1.size(); }
  double xi(std::size_t k) const { return xi0 + h * static_cast<double>(k); }
  double xi_min() const { return xi0; }
  double xi_max() const { return xi(size() - 1); }
  bool constant() const { return delta == 0.0; }

  double rho_of(double u) const { return constant() ? left.rho : mass_flux / (u - s); }

  GasState node_state(std::size_t k) const { return GasState::planar(rho_of(u1[k]), u1[k], theta[k]); }

  /// Profile at moving-frame coordinate xi; beyond the table the endpoint
  /// state is returned exactly with zero derivatives.
  ProfilePoint at(double x) const {
    ProfilePoint p;
    if (constant() || x <= xi_min()) {
      p.state = left;
      return p;
    }
    if (x >= xi_max()) {
      p.state = right;
      return p;
    }
    const double q = (x - xi0) / h;
    std::size_t k = std::min(static_cast<std::size_t>(q), size() - 2);
    const double t = q - static_cast<double>(k);
    double u, up, upp, th, thp, thpp;
    hermite(u1[k], du1[k], u1[k + 1], du1[k + 1], t, u, up, upp);
    hermite(theta[k], dtheta[k], theta[k + 1], dtheta[k + 1], t, th, thp, thpp);
    const double w = u - s;
    const double rho = mass_flux / w;
    p.state = GasState::planar(rho, u, th);
    p.d1 = {-mass_flux * up / (w * w), up, thp};
    p.d2 = {-mass_flux * upp / (w * w) + 2.0 * mass_flux * up * up / (w * w * w), upp, thpp};
    return p;
  }

 private:
  void hermite(double y0, double m0, double y1, double m1, double t, double& y, double& yp, double& ypp) const {
    const double t2 = t * t, t3 = t2 * t;
    y = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * m1;
    yp = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * h * m0 + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * h * m1) / h;
    ypp = ((12 * t - 6) * y0 + (6 * t - 4) * h * m0 + (-12 * t + 6) * y1 + (6 * t - 2) * h * m1) / (h * h);
  }
};

namespace detail {

/// Once-integrated travelling-wave system in (u1, theta) with the left end
/// state as reference.
struct ProfileOde {
  GasState ref;
  double s, m;
  Transport tr;
  double H_ref;

  ProfileOde(const GasState& left, double speed, const Transport& t)
      : ref(left), s(speed), m(left.rho * (left.u[0] - speed)), tr(t) {
    H_ref = energy_flux(left.u[0], left.theta);
  }

  double energy_flux(double u, double th) const {
    const double rho = m / (u - s);
    const double E = rho * (th + 0.5 * u * u);
    return -s * E + (E + kGasConstant * rho * th) * u;
  }
  double momentum_defect(double u, double th) const {
    const double rho = m / (u - s);
    return m * (u - ref.u[0]) + kGasConstant * rho * th - ref.pressure();
  }
  std::array<double, 2> numerators(double u, double th) const {
    const double n1 = momentum_defect(u, th);
    return {n1, energy_flux(u, th) - H_ref - u * n1};
  }
  std::array<double, 2> rhs(double u, double th) const {
    const auto n = numerators(u, th);
    return {n[0] / (4.0 / 3.0 * tr.mu(th)), n[1] / tr.kappa(th)};
  }
  std::array<std::array<double, 2>, 2> jacobian(double u, double th, double scale) const {
    const double eps = 1e-7 * scale;
    std::array<std::array<double, 2>, 2> J{};
    const auto fu1 = rhs(u + eps, th), fu0 = rhs(u - eps, th);
    const auto ft1 = rhs(u, th + eps), ft0 = rhs(u, th - eps);
    for (int i = 0; i < 2; ++i) {
      J[i][0] = (fu1[i] - fu0[i]) / (2 * eps);
      J[i][1] = (ft1[i] - ft0[i]) / (2 * eps);
    }
    return J;
  }
};

struct Eigen2 {
  double lam[2];
  std::array<double, 2> vec[2];
  bool real;
};

inline Eigen2 eigen2(const std::array<std::array<double, 2>, 2>& J) {
  Eigen2 e{};
  const double tr = J[0][0] + J[1][1], det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
  const double disc = 0.25 * tr * tr - det;
  e.real = disc >= 0.0;
  if (!e.real) return e;
  const double r = std::sqrt(disc);
  e.lam[0] = 0.5 * tr - r;
  e.lam[1] = 0.5 * tr + r;
  for (int i = 0; i < 2; ++i) {
    std::array<double, 2> v{J[0][1], e.lam[i] - J[0][0]};
    std::array<double, 2> w{e.lam[i] - J[1][1], J[1][0]};
    if (std::hypot(w[0], w[1]) > std::hypot(v[0], v[1])) v = w;
    const double n = std::hypot(v[0], v[1]);
    e.vec[i] = {v[0] / n, v[1] / n};
  }
  return e;
}

}  // namespace detail

/// Viscous profile of the family-`family` shock between `left` and `right`
/// (left is upstream for family 1, downstream for family 3).
///
/// The connecting orbit is the one-dimensional unstable (or stable) manifold
/// of whichever endpoint is a saddle of the travelling-wave ODE. The saddle is
/// detected from the endpoint linearizations; the orbit is integrated with
/// dense-output Dormand-Prince toward the node endpoint, forward in xi when
/// the saddle is on the left and backward otherwise.
inline ShockProfile solve_profile(const GasState& left, const GasState& right, double s, int family,
                                  const Transport& tr, const ProfileGridParams& gp = {}) {
  ShockProfile p;
  p.family = family;
  p.s = s;
  p.left = left;
  p.right = right;
  p.delta = shock_strength(left, right);
  p.mass_flux = left.rho * (left.u[0] - s);
  if (p.delta == 0.0) {
    p.u1 = {left.u[0], left.u[0]};
    p.theta = {left.theta, left.theta};
    p.du1 = {0.0, 0.0};
    p.dtheta = {0.0, 0.0};
    p.xi0 = -1.0;
    p.h = 2.0;
    return p;
  }
  if (family != 1 && family != 3) throw Error(ErrorKind::BranchViolation, "shock family must be 1 or 3");
  const Vec3 rh = rankine_hugoniot_residual(left, right, s);
  const double rh_scale = std::max(1.0, std::abs(p.mass_flux));
  if (std::max({std::abs(rh[0]), std::abs(rh[1]), std::abs(rh[2])}) > 1e-9 * rh_scale)
    throw Error(ErrorKind::NoConnection, "end states do not satisfy the jump conditions at speed s");

  const detail::ProfileOde ode(left, s, tr);
  const double du = right.u[0] - left.u[0];
  const double scale = std::max(std::abs(du), std::abs(right.theta - left.theta));
  const auto eL = detail::eigen2(ode.jacobian(left.u[0], left.theta, scale));
  const auto eR = detail::eigen2(ode.jacobian(right.u[0], right.theta, scale));
  if (!eL.real || !eR.real) throw Error(ErrorKind::NoConnection, "complex endpoint eigenvalues; no monotone profile");

  const bool saddle_left = eL.lam[0] < 0.0 && eL.lam[1] > 0.0;
  const bool saddle_right = eR.lam[0] < 0.0 && eR.lam[1] > 0.0;
  if (saddle_left == saddle_right) throw Error(ErrorKind::NoConnection, "expected exactly one saddle endpoint");
  // Slow rates: the eigenvalue of the connecting direction at each end.
  const double rate_left = saddle_left ? eL.lam[1] : eL.lam[0];
  const double rate_right = saddle_right ? eR.lam[0] : eR.lam[1];
  p.tail_rates = {rate_left, rate_right};
  // Forward direction sigma = +1 integrates in increasing xi.
  const double sigma = saddle_left ? 1.0 : -1.0;
  const GasState& sad = saddle_left ? left : right;
  const GasState& node = saddle_left ? right : left;
  const double lam_s = saddle_left ? eL.lam[1] : eR.lam[0];
  std::array<double, 2> ev = saddle_left ? eL.vec[1] : eR.vec[0];
  const double toward = node.u[0] - sad.u[0];
  if (ev[0] * toward < 0.0) ev = {-ev[0], -ev[1]};

  const double eps = 1e-4 * scale;
  const double tail_tol = gp.tail_tol;
  const double rate_min = std::min(std::abs(rate_left), std::abs(rate_right));
  const double width = 1.0 / rate_min;
  const double hh = gp.spacing > 0.0 ? gp.spacing : std::min({0.1 / p.delta, 0.5, 0.1 * width});
  p.h = hh;

  using State = std::array<double, 2>;
  auto sys = [&](const State& y, State& dy, double) {
    if (!(y[1] > 0.0) || !(std::abs(y[0] - s) > 0.0)) {
      dy = {0.0, 0.0};
      return;
    }
    const auto f = ode.rhs(y[0], y[1]);
    dy = {sigma * f[0], sigma * f[1]};
  };
  const double umin = std::min(left.u[0], right.u[0]) - 0.5 * std::abs(du);
  const double umax = std::max(left.u[0], right.u[0]) + 0.5 * std::abs(du);
  auto dist = [&](const State& y, const GasState& g) {
    const double r = ode.m / (y[0] - s);
    return std::max({std::abs(y[0] - g.u[0]), std::abs(y[1] - g.theta), std::abs(r - g.rho)});
  };

  // Integrate in tau >= 0 from the displaced saddle; xi = sigma * tau. The
  // callback receives each accepted step as a dense-output interval.
  namespace odeint = boost::numeric::odeint;
  const double tau_cap = 200.0 * width + 50.0 * std::abs(std::log(tail_tol)) * width;
  auto integrate = [&](double tau_end, const std::function<bool(double, double, const std::function<State(double)>&)>& cb) {
    auto stepper = odeint::make_dense_output(gp.ode_tol, gp.ode_tol, odeint::runge_kutta_dopri5<State>());
    State y0{sad.u[0] + eps * ev[0], sad.theta + eps * ev[1]};
    stepper.initialize(y0, 0.0, 0.01 * width);
    while (stepper.current_time() < tau_end) {
      stepper.do_step(sys);
      const State& y = stepper.current_state();
      if (!(y[1] > 0.0) || y[0] < umin || y[0] > umax || !std::isfinite(y[0]))
        throw Error(ErrorKind::NoConnection, "shooting left the admissible region");
      auto interp = [&](double t) {
        State z;
        stepper.calc_state(t, z);
        return z;
      };
      if (!cb(stepper.previous_time(), stepper.current_time(), interp)) return;
    }
  };

  // Pass 1: find the mid-crossing and the tau at which the node tail is below tolerance.
  const double u_mid = 0.5 * (left.u[0] + right.u[0]);
  double tau_mid = -1.0, tau_tail = -1.0;
  integrate(tau_cap, [&](double t0, double t1, const std::function<State(double)>& f) {
    const State a = f(t0), b = f(t1);
    if (tau_mid < 0.0 && (a[0] - u_mid) * (b[0] - u_mid) <= 0.0) {
      double lo = t0, hi = t1;
      for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((f(lo)[0] - u_mid) * (f(mid)[0] - u_mid) <= 0.0 ? hi : lo) = mid;
      }
      tau_mid = 0.5 * (lo + hi);
    }
    if (tau_mid >= 0.0 && dist(b, node) < 0.2 * tail_tol) {
      tau_tail = t1;
      return false;
    }
    return true;
  });
  if (tau_mid < 0.0 || tau_tail < 0.0) throw Error(ErrorKind::NoConnection, "orbit did not reach the node endpoint");

  // Extents in tau (distance from the mid-crossing along the integration).
  // Saddle side: eps |ev| exp(|lam_s| (tau)) reaches tail_tol at tau_sad < 0.
  const double tau_sad = std::log(tail_tol / (3.0 * eps)) / std::abs(lam_s);
  double back = tau_mid - tau_sad;  // distance from the crossing to the saddle tail
  double fwd = tau_tail - tau_mid;
  const double min_half = 12.0 * width;
  back = std::max(back, min_half);
  fwd = std::max(fwd, min_half);
  if (gp.half_width > 0.0) {
    if (gp.half_width < std::max(back, fwd)) throw Error(ErrorKind::GridTooShort, "profile tails exceed the requested half width");
    back = fwd = gp.half_width;
  }
  const long k_back = static_cast<long>(std::ceil(back / hh));
  const long k_fwd = static_cast<long>(std::ceil(fwd / hh));
  const std::size_t n = static_cast<std::size_t>(k_back + k_fwd + 1);
  std::vector<State> tab(n);
  // node index j corresponds to tau = tau_mid + (j - k_back) * hh
  auto tau_of = [&](long j) { return tau_mid + static_cast<double>(j - k_back) * hh; };
  long next = 0;
  for (; next < static_cast<long>(n) && tau_of(next) <= 0.0; ++next) {
    const double a = eps * std::exp(lam_s * sigma * tau_of(next));
    tab[next] = {sad.u[0] + a * ev[0], sad.theta + a * ev[1]};
  }
  const double tau_last = tau_of(static_cast<long>(n) - 1);
  integrate(tau_last + hh, [&](double t0, double t1, const std::function<State(double)>& f) {
    while (next < static_cast<long>(n) && tau_of(next) <= t1) {
      tab[next] = f(std::max(t0, tau_of(next)));
      ++next;
    }
    return next < static_cast<long>(n);
  });
  if (next < static_cast<long>(n)) throw Error(ErrorKind::NoConnection, "integration ended before filling the table");
  // Deep in the node tail the integrated orbit sits at the ODE tolerance
  // floor; continue it along the slow direction with the linearized rate.
  const double switch_dist = 1e4 * gp.ode_tol;
  const double node_rate = std::abs(saddle_left ? rate_right : rate_left);
  for (long j = k_back; j < static_cast<long>(n); ++j) {
    if (dist(tab[j], node) >= switch_dist) continue;
    const State d0{tab[j][0] - node.u[0], tab[j][1] - node.theta};
    for (long k = j + 1; k < static_cast<long>(n); ++k) {
      const double w = std::exp(-node_rate * (tau_of(k) - tau_of(j)));
      tab[k] = {node.u[0] + w * d0[0], node.theta + w * d0[1]};
    }
    break;
  }

  if (saddle_left) {
    p.xi0 = -static_cast<double>(k_back) * hh;
  } else {
    std::reverse(tab.begin(), tab.end());
    p.xi0 = -static_cast<double>(k_fwd) * hh;
  }
  p.u1.resize(n);
  p.theta.resize(n);
  p.du1.resize(n);
  p.dtheta.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    p.u1[k] = tab[k][0];
    p.theta[k] = tab[k][1];
    const auto f = ode.rhs(tab[k][0], tab[k][1]);
    p.du1[k] = f[0];
    p.dtheta[k] = f[1];
  }
  if (dist(tab.front(), left) > tail_tol || dist(tab.back(), right) > tail_tol)
    throw Error(ErrorKind::GridTooShort, "profile tails not decayed below tail_tol");

  // Interpolant defect of the first-integral system at cell midpoints.
  double res = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const ProfilePoint q = p.at(p.xi(k) + 0.5 * hh);
    const auto num = ode.numerators(q.state.u[0], q.state.theta);
    res = std::max({res, std::abs(4.0 / 3.0 * tr.mu(q.state.theta) * q.d1[1] - num[0]),
                    std::abs(tr.kappa(q.state.theta) * q.d1[2] - num[1])});
  }
  p.first_integral_residual = res;
  return p;
}

/// Family characteristic speed along the profile at the table nodes.
inline std::vector<double> profile_speed_field(const ShockProfile& p) {
  std::vector<double> lam(p.size());
  const double sign = p.family == 1 ? -1.0 : 1.0;
  for (std::size_t k = 0; k < p.size(); ++k) lam[k] = p.u1[k] + sign * std::sqrt(10.0 * p.theta[k]) / 3.0;
  return lam;
}

inline GasState evaluate_shifted(const ShockProfile& p, double x1, double t, double alpha) {
  return p.at(x1 - p.s * t + alpha).state;
}

inline ProfilePoint evaluate_shifted_full(const ShockProfile& p, double x1, double t, double alpha) {
  return p.at(x1 - p.s * t + alpha);
}

struct TailFit {
  double c_fit = 0.0;  // min tail rate / delta
  double C_fit = 0.0;  // smallest C with |state - endpoint| <= C delta exp(-c delta |xi|)
  double rate_left = 0.0, rate_right = 0.0;
};

/// Least-squares fit of log|state - endpoint| against xi on both tails.
inline TailFit fit_tail_decay(const ShockProfile& p, double tail_tol = 1e-9) {
  if (p.constant()) throw Error(ErrorKind::TailTooShort, "constant profile has no tail");
  auto dev = [&](std::size_t k, const GasState& e) {
    const GasState g = p.node_state(k);
    return std::max({std::abs(g.rho - e.rho), std::abs(g.u[0] - e.u[0]), std::abs(g.theta - e.theta)});
  };
  auto fit = [&](bool left_tail) {
    const GasState& e = left_tail ? p.left : p.right;
    double dmax = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) dmax = std::max(dmax, dev(k, e));
    const double hi = 5e-2 * dmax, lo = 20.0 * tail_tol;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    double ymin = 1e300, ymax = -1e300;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double xi = p.xi(k);
      if (left_tail ? xi > 0.0 : xi < 0.0) continue;
      const double d = dev(k, e);
      if (d > hi || d < lo) continue;
      const double y = std::log(d), x = std::abs(xi);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      ymin = std::min(ymin, y), ymax = std::max(ymax, y);
      ++cnt;
    }
    if (cnt < 5 || ymax - ymin < 5.0) throw Error(ErrorKind::TailTooShort, "tail spans fewer than 5 e-folds");
    const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    return -slope;
  };
  TailFit tf;
  tf.rate_left = fit(true);
  tf.rate_right = fit(false);
  if (!(tf.rate_left > 0.0) || !(tf.rate_right > 0.0)) throw Error(ErrorKind::TailTooShort, "non-decaying tail fit");
  const double c = std::min(tf.rate_left, tf.rate_right);
  tf.c_fit = c / p.delta;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double xi = p.xi(k);
    const double d = dev(k, xi < 0.0 ? p.left : p.right);
    tf.C_fit = std::max(tf.C_fit, d * std::exp(c * std::abs(xi)) / p.delta);
  }
  return tf;
}

/// Both profiles of a composite wave.
struct ProfilePair {
  ShockProfile p1, p3;
};

inline ProfilePair solve_profiles(const RiemannData& data, const CompositeWaveSolution& sol, const Transport& tr,
                                  const ProfileGridParams& gp = {}) {
  return {solve_profile(data.left, sol.intermediate, sol.s1, 1, tr, gp),
          solve_profile(sol.intermediate, data.right, sol.s3, 3, tr, gp)};
}

inline void write_profile_csv(std::ostream& os, const ShockProfile& p) {
  os.precision(17);
  os << "xi,rho,u1,theta\n";
  for (std::size_t k = 0; k < p.size(); ++k) {
    const GasState g = p.node_state(k);
    os << p.xi(k) << ',' << g.rho << ',' << g.u[0] << ',' << g.theta << '\n';
  }
}

}  // namespace shockstab

#pragma once

#include <array>
#include <cmath>
#include <sstream>

#include "shockstab/core.hpp"

namespace shockstab {

/// Primitive macroscopic state (rho, u, theta). Pressure p = R rho theta.
struct GasState {
  double rho = 1.0;
  Vec3 u{0.0, 0.0, 0.0};
  double theta = 1.0;

  double pressure() const { return kGasConstant * rho * theta; }
  double sound_speed() const { return std::sqrt(10.0 * theta) / 3.0; }
  bool valid() const { return rho > 0.0 && theta > 0.0 && std::isfinite(rho) && std::isfinite(theta); }

  static GasState planar(double rho, double u1, double theta) { return {rho, {u1, 0.0, 0.0}, theta}; }
};

/// Conserved triple (rho, m, E) with m = rho u and E = rho (theta + |u|^2 / 2).
struct Conserved {
  double rho = 0.0;
  Vec3 m{0.0, 0.0, 0.0};
  double E = 0.0;
};

/// The five conserved components packed as (rho, m1, m2, m3, E).
using State5 = std::array<double, 5>;

inline Conserved primitive_to_conserved(const GasState& s) {
  return {s.rho, s.rho * s.u, s.rho * (s.theta + 0.5 * norm2(s.u))};
}

inline GasState conserved_to_primitive(const Conserved& c) {
  if (!(c.rho > 0.0)) {
    std::ostringstream os;
    os << "density " << c.rho << " is not positive";
    throw Error(ErrorKind::NonPhysicalState, os.str());
  }
  const Vec3 u = (1.0 / c.rho) * c.m;
  const double theta = c.E / c.rho - 0.5 * norm2(u);
  if (!(theta > 0.0)) {
    std::ostringstream os;
    os << "temperature " << theta << " is not positive";
    throw Error(ErrorKind::NonPhysicalState, os.str());
  }
  return {c.rho, u, theta};
}

inline State5 pack(const Conserved& c) { return {c.rho, c.m[0], c.m[1], c.m[2], c.E}; }
inline Conserved unpack(const State5& q) { return {q[0], {q[1], q[2], q[3]}, q[4]}; }
inline State5 to_state5(const GasState& s) { return pack(primitive_to_conserved(s)); }

/// Planar triple (rho, m1, E), the components carrying the anti-derivative.
inline Vec3 planar_triple(const GasState& s) {
  const Conserved c = primitive_to_conserved(s);
  return {c.rho, c.m[0], c.E};
}

/// Characteristic speeds of the Euler system in the x1 direction.
inline Vec3 euler_eigenvalues(const GasState& s) {
  const double c = s.sound_speed();
  return {s.u[0] - c, s.u[0], s.u[0] + c};
}

/// Normal flux of the planar Euler system for (rho, m1, E).
inline Vec3 euler_flux(const GasState& s) {
  const Conserved c = primitive_to_conserved(s);
  const double p = s.pressure();
  return {c.m[0], c.m[0] * s.u[0] + p, (c.E + p) * s.u[0]};
}

/// Jump-condition residual -s [U] + [F(U)] between two states.
inline Vec3 rankine_hugoniot_residual(const GasState& left, const GasState& right, double s) {
  const Vec3 ul = planar_triple(left), ur = planar_triple(right);
  const Vec3 fl = euler_flux(left), fr = euler_flux(right);
  return {-s * (ur[0] - ul[0]) + (fr[0] - fl[0]), -s * (ur[1] - ul[1]) + (fr[1] - fl[1]),
          -s * (ur[2] - ul[2]) + (fr[2] - fl[2])};
}

}  // namespace shockstab

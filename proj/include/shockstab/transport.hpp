#pragma once

#include <cmath>

#include "shockstab/core.hpp"

namespace shockstab {

/// Transport law: mu(theta) = mu_ref sqrt(theta/theta_ref),
/// kappa = (5/2) R mu / Pr, BGK frequency nu_c = nu_ref rho sqrt(theta/theta_ref).
struct Transport {
  double mu_ref = 0.1;
  double theta_ref = 1.0;
  double prandtl = 2.0 / 3.0;
  double nu_ref = 100.0;

  double mu(double theta) const { return mu_ref * std::sqrt(theta / theta_ref); }
  double kappa(double theta) const { return 2.5 * kGasConstant * mu(theta) / prandtl; }
  double nu(double rho, double theta) const { return nu_ref * rho * std::sqrt(theta / theta_ref); }

  /// The Navier-Stokes limit of BGK: mu = p / nu and Pr = 1.
  static Transport bgk_consistent(double nu_ref, double theta_ref = 1.0) {
    return {kGasConstant * theta_ref / nu_ref, theta_ref, 1.0, nu_ref};
  }
  static Transport inviscid() { return {0.0, 1.0, 2.0 / 3.0, 0.0}; }
};

}  // namespace shockstab

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "shockstab/core.hpp"
#include "shockstab/fluid_solver.hpp"
#include "shockstab/gas.hpp"
#include "shockstab/kinetic.hpp"
#include "shockstab/transport.hpp"

namespace shockstab {

/// Planar discrete-velocity BGK integrator: f(x1, v) on N cells of [-L, L]
/// times a 3-D velocity lattice. Upwind transport in x1 (first or second
/// order with minmod), relaxation toward the moment-matched discrete
/// Maxwellian, SSP-RK2 in time. Far-field ghost cells hold the matched
/// Maxwellians of the end states.
class KineticSolver {
 public:
  KineticSolver(int N, double L, const VelocityGrid& vg, const Transport& tr, const GasState& left, const GasState& right,
                bool second_order = true)
      : N_(N), L_(L), vg_(vg), tr_(tr), second_order_(second_order), nv_(vg.size()) {
    if (N < 4 || !(L > 0.0)) throw Error(ErrorKind::ConfigError, "invalid kinetic grid");
    f_.assign(static_cast<std::size_t>(N) * nv_, 0.0);
    ghost_left_.resize(nv_);
    ghost_right_.resize(nv_);
    evaluate(match_maxwellian(primitive_to_conserved(left), vg_), vg_, ghost_left_.data());
    evaluate(match_maxwellian(primitive_to_conserved(right), vg_), vg_, ghost_right_.data());
  }

  int cells() const { return N_; }
  double dx() const { return 2.0 * L_ / N_; }
  double x(int i) const { return -L_ + (i + 0.5) * dx(); }
  const VelocityGrid& velocity_grid() const { return vg_; }
  double time() const { return t_; }
  long steps() const { return steps_; }
  std::vector<double>& distribution() { return f_; }
  const std::vector<double>& distribution() const { return f_; }
  const double* cell(int i) const { return &f_[static_cast<std::size_t>(i) * nv_]; }

  /// Sets f to the moment-matched discrete Maxwellian of the given macroscopic field.
  void set_equilibrium(const std::function<GasState(double)>& state) {
    for (int i = 0; i < N_; ++i)
      evaluate(match_maxwellian(primitive_to_conserved(state(x(i))), vg_), vg_, &f_[static_cast<std::size_t>(i) * nv_]);
  }

  Conserved cell_moments(int i) const { return moments(cell(i), vg_); }

  GasState cell_state(int i) const { return conserved_to_primitive(cell_moments(i)); }

  double cfl_dt(double cfl = 0.4) const {
    double nu = 0.0;
    for (int i = 0; i < N_; ++i) {
      const GasState s = cell_state(i);
      nu = std::max(nu, tr_.nu(s.rho, s.theta));
    }
    const double transport = dx() / vg_.v_max();
    return cfl * (nu > 0.0 ? std::min(transport, 1.0 / nu) : transport);
  }

  /// df/dt = -v1 d1 f + nu (M[f] - f).
  void rhs(const std::vector<double>& f, std::vector<double>& df) const {
    const std::size_t nv = nv_;
    df.resize(f.size());
    auto row = [&](int i) -> const double* {
      if (i < 0) return ghost_left_.data();
      if (i >= N_) return ghost_right_.data();
      return &f[static_cast<std::size_t>(i) * nv];
    };
    const double inv_dx = 1.0 / dx();
    fl_.resize(nv);
    fr_.resize(nv);
    M_.resize(nv);
    face_flux(row(-2), row(-1), row(0), row(1), fl_.data());
    for (int i = 0; i < N_; ++i) {
      face_flux(row(i - 1), row(i), row(i + 1), row(i + 2), fr_.data());
      const double* fi = &f[static_cast<std::size_t>(i) * nv];
      double* d = &df[static_cast<std::size_t>(i) * nv];
      const Conserved c = moments(fi, vg_);
      const GasState s = conserved_to_primitive(c);
      evaluate(match_maxwellian(c, vg_), vg_, M_.data());
      const double nu = tr_.nu(s.rho, s.theta);
      const double* Fl = fl_.data();
      const double* Fr = fr_.data();
      const double* M = M_.data();
      for (std::size_t q = 0; q < nv; ++q) d[q] = -(Fr[q] - Fl[q]) * inv_dx + nu * (M[q] - fi[q]);
      std::swap(fl_, fr_);
    }
  }

  /// Collision operator nu (M[f] - f) applied to one velocity function.
  void collision(const double* f, double* out) const {
    const Conserved c = moments(f, vg_);
    const GasState s = conserved_to_primitive(c);
    M_.resize(nv_);
    evaluate(match_maxwellian(c, vg_), vg_, M_.data());
    const double nu = tr_.nu(s.rho, s.theta);
    for (std::size_t q = 0; q < nv_; ++q) out[q] = nu * (M_[q] - f[q]);
  }

  void step(double dt, double cfl = 0.4) {
    const double lim = cfl_dt(cfl);
    advance_checked(dt, lim);
  }

  void advance_to(double t_end, double cfl = 0.4) {
    while (t_ < t_end - 1e-14 * std::max(1.0, t_end)) {
      const double lim = cfl_dt(cfl);
      advance_checked(std::min(lim, t_end - t_), lim);
    }
  }

 private:
  /// Upwind face flux v1 f at the face between cells i and i+1 given rows i-1..i+2.
  void face_flux(const double* fm, const double* f0, const double* f1, const double* f2, double* F) const {
    // v1 is constant on contiguous blocks of n^2 nodes, so the upwind side is
    // fixed per block and the inner loops are branch-free.
    const int n = vg_.n_per_axis();
    const std::size_t block = static_cast<std::size_t>(n) * n;
    const double lim = second_order_ ? 0.5 : 0.0;
    auto mm = [](double a, double b) {
      const double s = (a > 0.0) - (a < 0.0) + (b > 0.0) - (b < 0.0);
      return 0.5 * s * std::min(std::abs(a), std::abs(b));
    };
    for (int a = 0; a < n; ++a) {
      const double v = vg_.axis()[a];
      const std::size_t b0 = a * block, b1 = b0 + block;
      if (v >= 0.0) {
        for (std::size_t q = b0; q < b1; ++q) F[q] = v * (f0[q] + lim * mm(f0[q] - fm[q], f1[q] - f0[q]));
      } else {
        for (std::size_t q = b0; q < b1; ++q) F[q] = v * (f1[q] - lim * mm(f1[q] - f0[q], f2[q] - f1[q]));
      }
    }
  }

  void advance_checked(double dt, double lim) {
    if (dt > lim * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "dt = " << dt << " exceeds the stable bound " << lim;
      throw Error(ErrorKind::CFLViolation, os.str());
    }
    const std::size_t n = f_.size();
    f1_.resize(n);
    rhs(f_, k_);
    for (std::size_t q = 0; q < n; ++q) f1_[q] = f_[q] + dt * k_[q];
    rhs(f1_, k_);
    for (std::size_t q = 0; q < n; ++q) f_[q] = 0.5 * f_[q] + 0.5 * (f1_[q] + dt * k_[q]);
    t_ += dt;
    ++steps_;
  }

  int N_;
  double L_;
  VelocityGrid vg_;
  Transport tr_;
  bool second_order_;
  std::size_t nv_;
  std::vector<double> f_, ghost_left_, ghost_right_;
  double t_ = 0.0;
  long steps_ = 0;
  mutable std::vector<double> fl_, fr_, M_;
  std::vector<double> f1_, k_;
};

}  // namespace shockstab

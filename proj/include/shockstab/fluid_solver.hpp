#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "shockstab/core.hpp"
#include "shockstab/gas.hpp"
#include "shockstab/spectral.hpp"
#include "shockstab/transport.hpp"

namespace shockstab {

enum class TimeScheme { RK2, RK3 };

/// Cells on [-L, L] in x1 and an n2 x n3 transverse grid on the unit torus.
struct Grid {
  int N = 1024;
  double L = 100.0;
  int n2 = 1, n3 = 1;

  double dx() const { return 2.0 * L / N; }
  double x(int i) const { return -L + (i + 0.5) * dx(); }
  int nt() const { return n2 * n3; }
  bool planar() const { return n2 == 1 && n3 == 1; }
  std::size_t size() const { return static_cast<std::size_t>(N) * nt() * 5; }
  std::size_t at(int i, int t, int c) const { return (static_cast<std::size_t>(i) * nt() + t) * 5 + c; }
};

inline double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

/// Conservative Navier-Stokes integrator on [-L, L] x T^2 with Dirichlet
/// far-field clamps. x1: finite volume, MUSCL-minmod on primitive variables,
/// local Lax-Friedrichs convection, central viscous faces. Transverse:
/// dealiased pseudo-spectral.
class FluidSolver {
 public:
  using Flux5 = std::array<double, 5>;

  FluidSolver(const Grid& g, const Transport& tr, const GasState& left, const GasState& right)
      : g_(g), tr_(tr), left_(left), right_(right), ax2_(g.n2), ax3_(g.n3), U_(g.size(), 0.0) {
    if (g.N < 4 || !(g.L > 0.0) || g.n2 < 1 || g.n3 < 1) throw Error(ErrorKind::ConfigError, "invalid grid");
    ghost_left_ = to_state5(left);
    ghost_right_ = to_state5(right);
  }

  const Grid& grid() const { return g_; }
  const Transport& transport() const { return tr_; }
  double time() const { return t_; }
  long steps() const { return steps_; }
  std::vector<double>& state() { return U_; }
  const std::vector<double>& state() const { return U_; }
  void set_time(double t) { t_ = t; }

  /// Net boundary inflow integrated in time, per component (transverse mean).
  const Flux5& boundary_inflow() const { return inflow_; }

  /// Domain totals of the transverse means, sum U dx.
  Flux5 totals() const {
    Flux5 s{};
    const double w = g_.dx() / g_.nt();
    for (int i = 0; i < g_.N; ++i)
      for (int t = 0; t < g_.nt(); ++t)
        for (int c = 0; c < 5; ++c) s[c] += w * U_[g_.at(i, t, c)];
    return s;
  }

  void set_initial(const std::function<State5(double x1, double x2, double x3)>& f) {
    for (int i = 0; i < g_.N; ++i)
      for (int j = 0; j < g_.n2; ++j)
        for (int k = 0; k < g_.n3; ++k) {
          const State5 q = f(g_.x(i), static_cast<double>(j) / g_.n2, static_cast<double>(k) / g_.n3);
          for (int c = 0; c < 5; ++c) U_[g_.at(i, j * g_.n3 + k, c)] = q[c];
        }
    if (!g_.planar()) apply_filter(U_);
  }

  double cfl_dt(double cfl = 0.4) const { return cfl_dt(U_, cfl); }

  double cfl_dt(const std::vector<double>& U, double cfl) const {
    double lam = 0.0, nu = 0.0, rho_min = INFINITY;
    for (std::size_t q = 0; q < U.size(); q += 5) {
      const GasState s = prim(&U[q]);
      lam = std::max(lam, std::sqrt(norm2(s.u)) + s.sound_speed());
      nu = std::max(nu, std::max(4.0 / 3.0 * tr_.mu(s.theta), tr_.kappa(s.theta)));
      rho_min = std::min(rho_min, s.rho);
    }
    const double dx = g_.dx();
    const double k2 = g_.n2 > 1 ? ax2_.max_wavenumber() : 0.0, k3 = g_.n3 > 1 ? ax3_.max_wavenumber() : 0.0;
    const double conv = 1.0 / (lam * (1.0 / dx + k2 + k3));
    const double visc_rate = 2.0 * nu * (1.0 / (dx * dx) + 0.25 * (k2 * k2 + k3 * k3));
    const double visc = visc_rate > 0.0 ? rho_min / visc_rate : INFINITY;
    return cfl * std::min(conv, visc);
  }

  /// Time derivative of U; returns the x1 fluxes through the two boundary faces.
  std::array<Flux5, 2> rhs(const std::vector<double>& U, std::vector<double>& dU) const {
    const int N = g_.N, nt = g_.nt();
    const double dx = g_.dx();
    dU.assign(U.size(), 0.0);
    // Primitive (rho, u1, u2, u3, theta) with two ghost cells per side.
    W_.resize(static_cast<std::size_t>(N + 4) * nt * 5);
    auto Wat = [&](int i, int t) { return &W_[(static_cast<std::size_t>(i + 2) * nt + t) * 5]; };
    auto put = [](double* w, const GasState& s) {
      w[0] = s.rho, w[1] = s.u[0], w[2] = s.u[1], w[3] = s.u[2], w[4] = s.theta;
    };
    for (int i = -2; i < N + 2; ++i)
      for (int t = 0; t < nt; ++t) {
        if (i < 0) put(Wat(i, t), left_);
        else if (i >= N) put(Wat(i, t), right_);
        else put(Wat(i, t), prim(&U[g_.at(i, t, 0)]));
      }
    const bool trans = !g_.planar();
    // Transverse derivatives of (u1, u2, u3, theta) at cell centers, including one ghost layer.
    if (trans) {
      D2_.assign(static_cast<std::size_t>(N + 2) * nt * 4, 0.0);
      D3_.assign(static_cast<std::size_t>(N + 2) * nt * 4, 0.0);
      for (int i = 0; i < N; ++i) transverse_gradients(Wat(i, 0), &D2_[(static_cast<std::size_t>(i + 1) * nt) * 4],
                                                       &D3_[(static_cast<std::size_t>(i + 1) * nt) * 4]);
    }
    auto d2at = [&](int i, int t) { return &D2_[(static_cast<std::size_t>(i + 1) * nt + t) * 4]; };
    auto d3at = [&](int i, int t) { return &D3_[(static_cast<std::size_t>(i + 1) * nt + t) * 4]; };

    std::array<Flux5, 2> bflux{};
    F_.resize(static_cast<std::size_t>(N + 1) * 5);
    for (int t = 0; t < nt; ++t) {
      for (int f = 0; f <= N; ++f) {
        const int i = f - 1;  // face between cells i and i+1
        const double* wm = Wat(i - 1, t);
        const double* w0 = Wat(i, t);
        const double* w1 = Wat(i + 1, t);
        const double* w2 = Wat(i + 2, t);
        double wl[5], wr[5];
        for (int c = 0; c < 5; ++c) {
          wl[c] = w0[c] + 0.5 * minmod(w0[c] - wm[c], w1[c] - w0[c]);
          wr[c] = w1[c] - 0.5 * minmod(w1[c] - w0[c], w2[c] - w1[c]);
        }
        double fl[5], fr[5], ql[5], qr[5];
        euler_flux_x1(wl, fl, ql);
        euler_flux_x1(wr, fr, qr);
        const double al = std::abs(wl[1]) + std::sqrt(10.0 * wl[4]) / 3.0;
        const double ar = std::abs(wr[1]) + std::sqrt(10.0 * wr[4]) / 3.0;
        const double a = std::max(al, ar);
        double* F = &F_[static_cast<std::size_t>(f) * 5];
        for (int c = 0; c < 5; ++c) F[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * a * (qr[c] - ql[c]);
        // Viscous face flux.
        const double th = 0.5 * (w0[4] + w1[4]);
        const double mu = tr_.mu(th), kappa = tr_.kappa(th);
        if (mu != 0.0 || kappa != 0.0) {
          const double du1 = (w1[1] - w0[1]) / dx, du2 = (w1[2] - w0[2]) / dx, du3 = (w1[3] - w0[3]) / dx;
          const double dth = (w1[4] - w0[4]) / dx;
          double d2u1 = 0.0, d3u1 = 0.0, div_t = 0.0;
          if (trans) {
            const double *a2 = d2at(i, t), *b2 = d2at(i + 1, t), *a3 = d3at(i, t), *b3 = d3at(i + 1, t);
            d2u1 = 0.5 * (a2[0] + b2[0]);
            d3u1 = 0.5 * (a3[0] + b3[0]);
            div_t = 0.5 * (a2[1] + b2[1]) + 0.5 * (a3[2] + b3[2]);
          }
          const double S11 = mu * (2.0 * du1 - 2.0 / 3.0 * (du1 + div_t));
          const double S21 = mu * (du2 + d2u1);
          const double S31 = mu * (du3 + d3u1);
          const double u1 = 0.5 * (w0[1] + w1[1]), u2 = 0.5 * (w0[2] + w1[2]), u3 = 0.5 * (w0[3] + w1[3]);
          F[1] -= S11;
          F[2] -= S21;
          F[3] -= S31;
          F[4] -= kappa * dth + u1 * S11 + u2 * S21 + u3 * S31;
        }
      }
      for (int c = 0; c < 5; ++c) {
        bflux[0][c] += F_[c] / nt;
        bflux[1][c] += F_[static_cast<std::size_t>(N) * 5 + c] / nt;
      }
      for (int i = 0; i < N; ++i)
        for (int c = 0; c < 5; ++c)
          dU[g_.at(i, t, c)] = -(F_[static_cast<std::size_t>(i + 1) * 5 + c] - F_[static_cast<std::size_t>(i) * 5 + c]) / dx;
    }
    if (trans) transverse_divergence(Wat, d2at, d3at, dU);
    return bflux;
  }

  /// One SSP Runge-Kutta step; throws CFLViolation if dt exceeds the stable bound.
  void step(double dt, TimeScheme scheme = TimeScheme::RK3, double cfl = 0.4) {
    const double lim = cfl_dt(U_, cfl);
    if (dt > lim * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "dt = " << dt << " exceeds the stable bound " << lim;
      throw Error(ErrorKind::CFLViolation, os.str());
    }
    const std::size_t n = U_.size();
    Flux5 net{};
    auto accumulate = [&](const std::array<Flux5, 2>& bf, double w) {
      for (int c = 0; c < 5; ++c) net[c] += w * (bf[0][c] - bf[1][c]);
    };
    if (scheme == TimeScheme::RK2) {
      U1_.resize(n);
      accumulate(rhs(U_, K_), 0.5);
      for (std::size_t q = 0; q < n; ++q) U1_[q] = U_[q] + dt * K_[q];
      post_stage(U1_);
      accumulate(rhs(U1_, K_), 0.5);
      for (std::size_t q = 0; q < n; ++q) U_[q] = 0.5 * U_[q] + 0.5 * (U1_[q] + dt * K_[q]);
    } else {
      U1_.resize(n);
      accumulate(rhs(U_, K_), 1.0 / 6.0);
      for (std::size_t q = 0; q < n; ++q) U1_[q] = U_[q] + dt * K_[q];
      post_stage(U1_);
      accumulate(rhs(U1_, K_), 1.0 / 6.0);
      for (std::size_t q = 0; q < n; ++q) U1_[q] = 0.75 * U_[q] + 0.25 * (U1_[q] + dt * K_[q]);
      post_stage(U1_);
      accumulate(rhs(U1_, K_), 2.0 / 3.0);
      for (std::size_t q = 0; q < n; ++q) U_[q] = U_[q] / 3.0 + 2.0 / 3.0 * (U1_[q] + dt * K_[q]);
    }
    post_stage(U_);
    for (int c = 0; c < 5; ++c) inflow_[c] += dt * net[c];
    t_ += dt;
    ++steps_;
  }

  /// Advances to t_end with CFL-limited steps, landing exactly on t_end.
  void advance_to(double t_end, TimeScheme scheme = TimeScheme::RK3, double cfl = 0.4) {
    while (t_ < t_end - 1e-14 * std::max(1.0, t_end)) {
      const double dt = std::min(cfl_dt(U_, cfl), t_end - t_);
      step(dt, scheme, cfl);
    }
  }

  GasState prim(const double* q) const {
    const double rho = q[0];
    const Vec3 u{q[1] / rho, q[2] / rho, q[3] / rho};
    const double theta = q[4] / rho - 0.5 * norm2(u);
    if (!(rho > 0.0) || !(theta > 0.0) || !std::isfinite(rho) || !std::isfinite(theta)) {
      std::ostringstream os;
      os << "rho = " << rho << ", theta = " << theta;
      throw Error(ErrorKind::NonPhysicalState, os.str());
    }
    return {rho, u, theta};
  }

  /// Transverse mean of component c in cell i.
  double zero_mode(int i, int c) const {
    double s = 0.0;
    for (int t = 0; t < g_.nt(); ++t) s += U_[g_.at(i, t, c)];
    return s / g_.nt();
  }

  /// sum over cells of ||D U||^2 on the torus (all five components) times dx.
  double nonzero_mode_norm2() const {
    double s = 0.0;
    for (int i = 0; i < g_.N; ++i)
      for (int c = 0; c < 5; ++c) {
        const double m = zero_mode(i, c);
        for (int t = 0; t < g_.nt(); ++t) s += sqr(U_[g_.at(i, t, c)] - m) / g_.nt();
      }
    return s * g_.dx();
  }

 private:
  static void euler_flux_x1(const double* w, double* f, double* q) {
    const double rho = w[0], u1 = w[1], u2 = w[2], u3 = w[3], th = w[4];
    const double p = kGasConstant * rho * th;
    const double E = rho * (th + 0.5 * (u1 * u1 + u2 * u2 + u3 * u3));
    q[0] = rho, q[1] = rho * u1, q[2] = rho * u2, q[3] = rho * u3, q[4] = E;
    f[0] = rho * u1;
    f[1] = rho * u1 * u1 + p;
    f[2] = rho * u1 * u2;
    f[3] = rho * u1 * u3;
    f[4] = (E + p) * u1;
  }

  /// d/dx2 and d/dx3 of (u1, u2, u3, theta) on one x1 slab of primitives.
  void transverse_gradients(const double* w, double* d2, double* d3) const {
    const int n2 = g_.n2, n3 = g_.n3;
    for (int j = 0; j < n2; ++j)
      for (int k = 0; k < n3; ++k)
        for (int c = 0; c < 4; ++c) {
          double s2 = 0.0, s3 = 0.0;
          if (n2 > 1)
            for (int b = 0; b < n2; ++b) s2 += ax2_.deriv[j * n2 + b] * w[(b * n3 + k) * 5 + 1 + c];
          if (n3 > 1)
            for (int b = 0; b < n3; ++b) s3 += ax3_.deriv[k * n3 + b] * w[(j * n3 + b) * 5 + 1 + c];
          d2[(j * n3 + k) * 4 + c] = s2;
          d3[(j * n3 + k) * 4 + c] = s3;
        }
  }

  template <class WAt, class DAt2, class DAt3>
  void transverse_divergence(const WAt& Wat, const DAt2& d2at, const DAt3& d3at, std::vector<double>& dU) const {
    const int N = g_.N, n2 = g_.n2, n3 = g_.n3, nt = g_.nt();
    const double dx = g_.dx();
    std::vector<double> G2(static_cast<std::size_t>(nt) * 5), G3(static_cast<std::size_t>(nt) * 5);
    for (int i = 0; i < N; ++i) {
      for (int t = 0; t < nt; ++t) {
        const double* w = Wat(i, t);
        const double *wl = Wat(i - 1, t), *wr = Wat(i + 1, t);
        const double rho = w[0], th = w[4];
        const Vec3 u{w[1], w[2], w[3]};
        const double p = kGasConstant * rho * th;
        const double E = rho * (th + 0.5 * norm2(u));
        const double mu = tr_.mu(th), kappa = tr_.kappa(th);
        // grad[i][j] = d u_i / d x_j, from central x1 differences and spectral transverse derivatives.
        Mat3 gu{};
        Vec3 gth{};
        for (int c = 0; c < 3; ++c) gu[c][0] = (wr[1 + c] - wl[1 + c]) / (2.0 * dx);
        gth[0] = (wr[4] - wl[4]) / (2.0 * dx);
        const double* a2 = d2at(i, t);
        const double* a3 = d3at(i, t);
        for (int c = 0; c < 3; ++c) {
          gu[c][1] = a2[c];
          gu[c][2] = a3[c];
        }
        gth[1] = a2[3];
        gth[2] = a3[3];
        const double div = gu[0][0] + gu[1][1] + gu[2][2];
        Mat3 S{};
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) S[r][c] = mu * (gu[r][c] + gu[c][r] - (r == c ? 2.0 / 3.0 * div : 0.0));
        for (int d = 1; d <= 2; ++d) {
          double* G = d == 1 ? &G2[t * 5] : &G3[t * 5];
          G[0] = rho * u[d];
          for (int c = 0; c < 3; ++c) G[1 + c] = rho * u[d] * u[c] + (c == d ? p : 0.0) - S[c][d];
          G[4] = (E + p) * u[d] - kappa * gth[d] - (u[0] * S[0][d] + u[1] * S[1][d] + u[2] * S[2][d]);
        }
      }
      for (int j = 0; j < n2; ++j)
        for (int k = 0; k < n3; ++k)
          for (int c = 0; c < 5; ++c) {
            double s = 0.0;
            if (n2 > 1)
              for (int b = 0; b < n2; ++b) s += ax2_.deriv[j * n2 + b] * G2[(b * n3 + k) * 5 + c];
            if (n3 > 1)
              for (int b = 0; b < n3; ++b) s += ax3_.deriv[k * n3 + b] * G3[(j * n3 + b) * 5 + c];
            dU[g_.at(i, j * n3 + k, c)] -= s;
          }
    }
  }

  void apply_filter(std::vector<double>& U) const {
    const int n2 = g_.n2, n3 = g_.n3, nt = g_.nt();
    std::vector<double> tmp(static_cast<std::size_t>(nt) * 5);
    for (int i = 0; i < g_.N; ++i) {
      double* slab = &U[g_.at(i, 0, 0)];
      if (n2 > 1) {
        for (int j = 0; j < n2; ++j)
          for (int k = 0; k < n3; ++k)
            for (int c = 0; c < 5; ++c) {
              double s = 0.0;
              for (int b = 0; b < n2; ++b) s += ax2_.filter[j * n2 + b] * slab[(b * n3 + k) * 5 + c];
              tmp[(j * n3 + k) * 5 + c] = s;
            }
        std::copy(tmp.begin(), tmp.end(), slab);
      }
      if (n3 > 1) {
        for (int j = 0; j < n2; ++j)
          for (int k = 0; k < n3; ++k)
            for (int c = 0; c < 5; ++c) {
              double s = 0.0;
              for (int b = 0; b < n3; ++b) s += ax3_.filter[k * n3 + b] * slab[(j * n3 + b) * 5 + c];
              tmp[(j * n3 + k) * 5 + c] = s;
            }
        std::copy(tmp.begin(), tmp.end(), slab);
      }
    }
  }

  void post_stage(std::vector<double>& U) const {
    if (!g_.planar()) apply_filter(U);
    for (std::size_t q = 0; q < U.size(); q += 5) prim(&U[q]);
  }

  Grid g_;
  Transport tr_;
  GasState left_, right_;
  State5 ghost_left_{}, ghost_right_{};
  SpectralAxis ax2_, ax3_;
  std::vector<double> U_;
  double t_ = 0.0;
  long steps_ = 0;
  Flux5 inflow_{};
  mutable std::vector<double> W_, D2_, D3_, F_;
  std::vector<double> U1_, K_;
};

}  // namespace shockstab

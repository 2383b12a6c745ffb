#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "shockstab/core.hpp"
#include "shockstab/gas.hpp"
#include "shockstab/transport.hpp"

namespace shockstab {

enum class Quadrature { Trapezoid, GaussLegendre };

/// Tensor-product velocity lattice on [-v_max, v_max]^3. Node (i, j, k) is
/// stored at (i * n + j) * n + k; velocity component d uses axis index i, j, k.
class VelocityGrid {
 public:
  VelocityGrid(double v_max, int n_per_axis, Quadrature q = Quadrature::Trapezoid)
      : v_max_(v_max), n_(n_per_axis), quad_(q), x_(n_per_axis), w_(n_per_axis) {
    if (!(v_max > 0.0) || n_per_axis < 2) throw Error(ErrorKind::ConfigError, "velocity grid needs v_max > 0 and n >= 2");
    if (q == Quadrature::Trapezoid) {
      const double h = 2.0 * v_max / (n_ - 1);
      for (int i = 0; i < n_; ++i) {
        x_[i] = -v_max + i * h;
        w_[i] = (i == 0 || i == n_ - 1) ? 0.5 * h : h;
      }
    } else {
      gauss_legendre(n_, x_, w_);
      for (int i = 0; i < n_; ++i) {
        x_[i] *= v_max;
        w_[i] *= v_max;
      }
    }
  }

  double v_max() const { return v_max_; }
  int n_per_axis() const { return n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  Quadrature quadrature() const { return quad_; }
  const std::vector<double>& axis() const { return x_; }
  const std::vector<double>& axis_weights() const { return w_; }

  std::size_t index(int i, int j, int k) const { return (static_cast<std::size_t>(i) * n_ + j) * n_ + k; }
  Vec3 node(std::size_t idx) const {
    const int k = static_cast<int>(idx % n_), j = static_cast<int>((idx / n_) % n_), i = static_cast<int>(idx / n_ / n_);
    return {x_[i], x_[j], x_[k]};
  }
  double weight(std::size_t idx) const {
    const int k = static_cast<int>(idx % n_), j = static_cast<int>((idx / n_) % n_), i = static_cast<int>(idx / n_ / n_);
    return w_[i] * w_[j] * w_[k];
  }

 private:
  static void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[n - 1 - i] = z;
      w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }

  double v_max_;
  int n_;
  Quadrature quad_;
  std::vector<double> x_, w_;
};

using VelocityFunction = std::vector<double>;

namespace detail {

/// One-dimensional Gaussian factors g_d(v) = exp(b_d v - c v^2) times the
/// separable product, evaluated into `out` with amplitude exp(a).
inline void separable_exponential(const VelocityGrid& g, double a, const Vec3& b, double c, double* out) {
  const int n = g.n_per_axis();
  const auto& x = g.axis();
  std::array<std::vector<double>, 3> f;
  for (int d = 0; d < 3; ++d) {
    f[d].resize(n);
    for (int i = 0; i < n; ++i) f[d][i] = std::exp(b[d] * x[i] - c * x[i] * x[i]);
  }
  const double amp = std::exp(a);
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double fij = amp * f[0][i] * f[1][j];
      for (int k = 0; k < n; ++k) out[idx++] = fij * f[2][k];
    }
}

}  // namespace detail

/// Local Maxwellian sampled on the velocity grid.
inline void maxwellian(const GasState& s, const VelocityGrid& g, double* out) {
  const double rt = kGasConstant * s.theta;
  const double c = 0.5 / rt;
  const Vec3 b = (1.0 / rt) * s.u;
  const double a = std::log(s.rho) - 1.5 * std::log(2.0 * kPi * rt) - c * norm2(s.u);
  detail::separable_exponential(g, a, b, c, out);
}

inline VelocityFunction maxwellian(const GasState& s, const VelocityGrid& g) {
  VelocityFunction out(g.size());
  maxwellian(s, g, out.data());
  return out;
}

/// Quadrature of f against the collision invariants 1, v, |v|^2/2.
inline Conserved moments(const double* f, const VelocityGrid& g) {
  const int n = g.n_per_axis();
  const auto& x = g.axis();
  const auto& w = g.axis_weights();
  double r = 0.0, e = 0.0;
  Vec3 m{0.0, 0.0, 0.0};
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s0 = 0.0, s1 = 0.0, s2 = 0.0;
      for (int k = 0; k < n; ++k, ++idx) {
        const double wf = w[k] * f[idx];
        s0 += wf;
        s1 += wf * x[k];
        s2 += wf * x[k] * x[k];
      }
      const double wij = w[i] * w[j];
      r += wij * s0;
      m[0] += wij * x[i] * s0;
      m[1] += wij * x[j] * s0;
      m[2] += wij * s1;
      e += wij * (0.5 * (x[i] * x[i] + x[j] * x[j]) * s0 + 0.5 * s2);
    }
  return {r, m, e};
}

inline Conserved moments(const VelocityFunction& f, const VelocityGrid& g) { return moments(f.data(), g); }

/// The five orthonormal collision-invariant functions attached to M_[rho,u,theta].
struct MicroBasis {
  GasState state;
  std::array<VelocityFunction, 5> chi;
};

inline MicroBasis micro_basis(const GasState& s, const VelocityGrid& g) {
  MicroBasis b{s, {}};
  const VelocityFunction M = maxwellian(s, g);
  const double rt = kGasConstant * s.theta;
  for (auto& c : b.chi) c.resize(g.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const Vec3 xi = g.node(idx) - s.u;
    b.chi[0][idx] = M[idx] / std::sqrt(s.rho);
    for (int d = 0; d < 3; ++d) b.chi[1 + d][idx] = xi[d] * M[idx] / std::sqrt(rt * s.rho);
    b.chi[4][idx] = (norm2(xi) / rt - 3.0) * M[idx] / std::sqrt(6.0 * s.rho);
  }
  return b;
}

/// Discrete inner product <h, g>_M = sum w h g / M.
inline double inner_product_M(const VelocityFunction& h, const VelocityFunction& q, const VelocityFunction& M,
                              const VelocityGrid& g) {
  double s = 0.0;
  for (std::size_t idx = 0; idx < g.size(); ++idx)
    if (M[idx] > 0.0) s += g.weight(idx) * h[idx] * q[idx] / M[idx];
  return s;
}

/// Coefficients <h, chi_i>_M. Since chi_i = psi_i M, these are plain
/// quadratures of h psi_i and never divide by M.
inline std::array<double, 5> macro_coefficients(const double* h, const GasState& s, const VelocityGrid& g) {
  const double rt = kGasConstant * s.theta;
  const double c0 = 1.0 / std::sqrt(s.rho), c1 = 1.0 / std::sqrt(rt * s.rho), c4 = 1.0 / std::sqrt(6.0 * s.rho);
  std::array<double, 5> a{};
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const double wh = g.weight(idx) * h[idx];
    const Vec3 xi = g.node(idx) - s.u;
    a[0] += wh * c0;
    a[1] += wh * xi[0] * c1;
    a[2] += wh * xi[1] * c1;
    a[3] += wh * xi[2] * c1;
    a[4] += wh * (norm2(xi) / rt - 3.0) * c4;
  }
  return a;
}

inline VelocityFunction project_P0(const VelocityFunction& h, const MicroBasis& b, const VelocityGrid& g) {
  const auto a = macro_coefficients(h.data(), b.state, g);
  VelocityFunction out(g.size(), 0.0);
  for (int i = 0; i < 5; ++i)
    for (std::size_t idx = 0; idx < g.size(); ++idx) out[idx] += a[i] * b.chi[i][idx];
  return out;
}

inline VelocityFunction project_P1(const VelocityFunction& h, const MicroBasis& b, const VelocityGrid& g) {
  VelocityFunction p0 = project_P0(h, b, g);
  for (std::size_t idx = 0; idx < g.size(); ++idx) p0[idx] = h[idx] - p0[idx];
  return p0;
}

inline VelocityFunction project_P0(const VelocityFunction& h, const GasState& s, const VelocityGrid& g) {
  return project_P0(h, micro_basis(s, g), g);
}
inline VelocityFunction project_P1(const VelocityFunction& h, const GasState& s, const VelocityGrid& g) {
  return project_P1(h, micro_basis(s, g), g);
}

/// BGK linearization L h = -nu_c P1 h around M_[s].
inline VelocityFunction bgk_linearized(const VelocityFunction& h, const MicroBasis& b, const VelocityGrid& g,
                                       const Transport& tr) {
  VelocityFunction out = project_P1(h, b, g);
  const double nu = tr.nu(b.state.rho, b.state.theta);
  for (double& v : out) v *= -nu;
  return out;
}

/// Viscous stress and heat flux of the first Chapman-Enskog order.
/// grad_u[i][j] = d u_i / d x_j.
struct CEFluxes {
  Mat3 stress{};
  Vec3 heat{};
};

inline CEFluxes chapman_enskog_fluxes(const Mat3& grad_u, const Vec3& grad_theta, const GasState& s,
                                      const Transport& tr) {
  const double mu = tr.mu(s.theta), kappa = tr.kappa(s.theta);
  const double div = grad_u[0][0] + grad_u[1][1] + grad_u[2][2];
  CEFluxes out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      out.stress[i][j] = mu * (grad_u[i][j] + grad_u[j][i] - (i == j ? 2.0 / 3.0 * div : 0.0));
  out.heat = kappa * grad_theta;
  return out;
}

/// Closed form of P1(v . grad_x M) for M_[s] with the given gradients; the
/// density gradient lies in the macroscopic range and drops out.
inline VelocityFunction streaming_microscopic(const GasState& s, const Mat3& grad_u, const Vec3& grad_theta,
                                              const VelocityGrid& g) {
  VelocityFunction M = maxwellian(s, g);
  const double rt = kGasConstant * s.theta;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const Vec3 xi = g.node(idx) - s.u;
    const double xi2 = norm2(xi);
    double a = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a += (xi[i] * xi[j] - (i == j ? xi2 / 3.0 : 0.0)) * grad_u[i][j];
    const double b = (0.5 * xi2 / rt - 2.5) * dot(xi, grad_theta) / s.theta;
    M[idx] *= a / rt + b;
  }
  return M;
}

/// BGK Chapman-Enskog microscopic part G = -(1/nu_c) P1(v . grad_x M).
inline VelocityFunction chapman_enskog_microscopic(const GasState& s, const Mat3& grad_u, const Vec3& grad_theta,
                                                   const VelocityGrid& g, const Transport& tr) {
  VelocityFunction G = streaming_microscopic(s, grad_u, grad_theta, g);
  const double inv_nu = 1.0 / tr.nu(s.rho, s.theta);
  for (double& v : G) v *= -inv_nu;
  return G;
}

/// Parameters of a separable discrete Maxwellian exp(a + b.v - c |v|^2).
struct DiscreteMaxwellian {
  double a = 0.0;
  Vec3 b{0.0, 0.0, 0.0};
  double c = 0.75;
  int iterations = 0;
};

/// Finds the discrete Maxwellian whose quadrature moments equal `target`
/// exactly (to roundoff). Newton on (b, c) using per-axis cumulants; a follows
/// in closed form.
inline DiscreteMaxwellian match_maxwellian(const Conserved& target, const VelocityGrid& g, int max_iter = 30) {
  const GasState s = conserved_to_primitive(target);
  const double rt = kGasConstant * s.theta;
  DiscreteMaxwellian dm;
  dm.c = 0.5 / rt;
  dm.b = (1.0 / rt) * s.u;
  const Vec3 U = s.u;
  const double T2 = 2.0 * target.E / target.rho;
  const int n = g.n_per_axis();
  const auto& x = g.axis();
  const auto& w = g.axis_weights();
  std::array<std::array<double, 5>, 3> mom{};  // Z, m1..m4 per axis (normalized)
  auto axis_moments = [&]() {
    for (int d = 0; d < 3; ++d) {
      double z = 0.0, m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double v = x[i];
        const double e = w[i] * std::exp(dm.b[d] * v - dm.c * v * v);
        z += e;
        m1 += e * v;
        m2 += e * v * v;
        m3 += e * v * v * v;
        m4 += e * v * v * v * v;
      }
      mom[d] = {z, m1 / z, m2 / z, m3 / z, m4 / z};
    }
  };
  for (dm.iterations = 0; dm.iterations < max_iter; ++dm.iterations) {
    axis_moments();
    std::array<double, 4> F{};
    double sum_m2 = 0.0;
    for (int d = 0; d < 3; ++d) {
      F[d] = mom[d][1] - U[d];
      sum_m2 += mom[d][2];
    }
    F[3] = sum_m2 - T2;
    double fn = std::abs(F[3]) / T2;
    for (int d = 0; d < 3; ++d) fn = std::max(fn, std::abs(F[d]) / std::sqrt(T2));
    if (fn < 1e-15) break;
    std::array<std::array<double, 4>, 4> J{};
    for (int d = 0; d < 3; ++d) {
      const auto& q = mom[d];
      J[d][d] = q[2] - q[1] * q[1];
      J[d][3] = -(q[3] - q[1] * q[2]);
      J[3][d] = q[3] - q[1] * q[2];
      J[3][3] += -(q[4] - q[2] * q[2]);
    }
    std::array<double, 4> dx{-F[0], -F[1], -F[2], -F[3]};
    if (!lu_solve<4>(J, dx)) throw Error(ErrorKind::NoConvergence, "singular Jacobian in discrete Maxwellian match");
    for (int d = 0; d < 3; ++d) dm.b[d] += dx[d];
    dm.c += dx[3];
    if (!(dm.c > 0.0)) throw Error(ErrorKind::NoConvergence, "discrete Maxwellian lost positive temperature");
  }
  axis_moments();
  dm.a = std::log(target.rho) - std::log(mom[0][0] * mom[1][0] * mom[2][0]);
  return dm;
}

inline void evaluate(const DiscreteMaxwellian& dm, const VelocityGrid& g, double* out) {
  detail::separable_exponential(g, dm.a, dm.b, dm.c, out);
}

}  // namespace shockstab

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "shockstab/core.hpp"

namespace shockstab {

/// Fourier wavenumber of DFT index j on n points (Nyquist reported as +n/2).
inline int wavenumber(int j, int n) { return j <= n / 2 ? j : j - n; }

/// Real n x n matrices for one periodic direction of the unit torus:
/// the dealiased spectral derivative and the 2/3-rule filter (modes with
/// |k| > n/3 removed). Row-major, out = M * in.
struct SpectralAxis {
  int n = 1;
  std::vector<double> deriv, filter;
  int k_cut = 0;

  explicit SpectralAxis(int n_points = 1) : n(n_points), deriv(n_points * n_points, 0.0), filter(n_points * n_points, 0.0) {
    k_cut = n / 3;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double d = 0.0, f = 0.0;
        for (int j = 0; j < n; ++j) {
          const int k = wavenumber(j, n);
          if (std::abs(k) > k_cut) continue;
          const double ph = 2.0 * kPi * k * (a - b) / n;
          f += std::cos(ph);
          d += -2.0 * kPi * k * std::sin(ph);
        }
        filter[a * n + b] = f / n;
        deriv[a * n + b] = d / n;
      }
  }
  double max_wavenumber() const { return 2.0 * kPi * k_cut; }
};

/// Transverse field sampled on an n2 x n3 grid of the unit torus, index j * n3 + k.
struct TorusField {
  int n2 = 1, n3 = 1;
  std::vector<double> v;
};

/// 2-D DFT coefficients c_{k2,k3} = (1/N) sum h e^{-2 pi i (k2 x2 + k3 x3)}.
inline std::vector<std::complex<double>> torus_dft(const TorusField& h) {
  const int n2 = h.n2, n3 = h.n3;
  std::vector<std::complex<double>> c(static_cast<std::size_t>(n2) * n3);
  for (int a = 0; a < n2; ++a)
    for (int b = 0; b < n3; ++b) {
      std::complex<double> s = 0.0;
      for (int j = 0; j < n2; ++j)
        for (int k = 0; k < n3; ++k) {
          const double ph = -2.0 * kPi * (static_cast<double>(a) * j / n2 + static_cast<double>(b) * k / n3);
          s += h.v[j * n3 + k] * std::complex<double>(std::cos(ph), std::sin(ph));
        }
      c[a * n3 + b] = s / static_cast<double>(n2 * n3);
    }
  return c;
}

/// Zero mode D0 h (torus mean) and non-zero part D h = h - D0 h.
struct ModeSplit {
  double zero = 0.0;
  TorusField nonzero;
};

inline ModeSplit mode_decompose(const TorusField& h) {
  ModeSplit m;
  double s = 0.0;
  for (double x : h.v) s += x;
  m.zero = s / static_cast<double>(h.v.size());
  m.nonzero = h;
  for (double& x : m.nonzero.v) x -= m.zero;
  return m;
}

/// Squared L2 norm on the unit torus (trapezoid = exact for trigonometric polynomials).
inline double torus_norm2(const TorusField& h) {
  double s = 0.0;
  for (double x : h.v) s += x * x;
  return s / static_cast<double>(h.v.size());
}

/// ||D h|| / ||grad D h|| via Parseval with signed wavenumbers.
inline double poincare_ratio(const TorusField& h) {
  const ModeSplit m = mode_decompose(h);
  const auto c = torus_dft(m.nonzero);
  double num = 0.0, den = 0.0;
  for (int a = 0; a < h.n2; ++a)
    for (int b = 0; b < h.n3; ++b) {
      const double k2 = wavenumber(a, h.n2), k3 = wavenumber(b, h.n3);
      const double p = std::norm(c[a * h.n3 + b]);
      num += p;
      den += 4.0 * kPi * kPi * (k2 * k2 + k3 * k3) * p;
    }
  if (den == 0.0) return 0.0;
  return std::sqrt(num / den);
}

}  // namespace shockstab

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace shockstab {

/// Gas constant. With gamma = 5/3 this makes the internal energy e = theta.
inline constexpr double kGasConstant = 2.0 / 3.0;
inline constexpr double kGamma = 5.0 / 3.0;
inline constexpr double kPi = 3.14159265358979323846;

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// Failure categories. The CLI maps ConfigError to exit code 2 and every
/// numerical category to exit code 3.
enum class ErrorKind {
  NonPhysicalState,
  BranchViolation,
  NoConvergence,
  NotTwoShock,
  NoConnection,
  GridTooShort,
  TailTooShort,
  DegenerateDirections,
  CFLViolation,
  ConfigError,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::NonPhysicalState: return "NonPhysicalState";
    case ErrorKind::BranchViolation: return "BranchViolation";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotTwoShock: return "NotTwoShock";
    case ErrorKind::NoConnection: return "NoConnection";
    case ErrorKind::GridTooShort: return "GridTooShort";
    case ErrorKind::TailTooShort: return "TailTooShort";
    case ErrorKind::DegenerateDirections: return "DegenerateDirections";
    case ErrorKind::CFLViolation: return "CFLViolation";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline double sqr(double x) { return x * x; }

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline double norm2(const Vec3& a) { return dot(a, a); }

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

inline Mat3 matmul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Vec3 matvec(const Mat3& a, const Vec3& x) {
  return {dot(a[0], x), dot(a[1], x), dot(a[2], x)};
}

inline double det3(const Mat3& a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
         a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

/// Dense LU with partial pivoting for small systems; returns false when a
/// pivot falls below `pivot_tol`.
template <std::size_t N>
bool lu_solve(std::array<std::array<double, N>, N> a, std::array<double, N>& b, double pivot_tol = 0.0) {
  for (std::size_t k = 0; k < N; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < N; ++i)
      if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
    if (!(std::abs(a[p][k]) > pivot_tol)) return false;
    std::swap(a[k], a[p]);
    std::swap(b[k], b[p]);
    for (std::size_t i = k + 1; i < N; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < N; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  for (std::size_t k = N; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < N; ++j) s -= a[k][j] * b[j];
    b[k] = s / a[k][k];
  }
  return true;
}

}  // namespace shockstab

#pragma once

// Comparison-geometry constants: model-space ball volumes, the Bishop-Gromov
// covering constant C(a, r), the hyperbolic volume coefficient, and the
// eigenvalue bound formulas built from them.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>

#include "specpack/errors.hpp"

namespace specpack::geometry {

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson with Richardson correction; `rel_tol` is relative to a
/// coarse estimate of the integral.
inline double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-13) {
  if (a == b) return 0.0;
  // Coarse 64-panel estimate sets the absolute scale.
  const int panels = 64;
  const double h = (b - a) / panels;
  double coarse = 0.0;
  for (int i = 0; i < panels; ++i) {
    double x0 = a + i * h;
    coarse += h / 6.0 * (f(x0) + 4.0 * f(x0 + 0.5 * h) + f(x0 + h));
  }
  const double eps = std::max(std::abs(coarse) * rel_tol, 1e-300);
  double total = 0.0;
  for (int i = 0; i < panels; ++i) {
    double x0 = a + i * h;
    double x1 = (i + 1 == panels) ? b : x0 + h;
    double f0 = f(x0), fm = f(0.5 * (x0 + x1)), f1 = f(x1);
    double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
    total += detail::simpson_step(f, x0, x1, f0, fm, f1, whole, eps / panels, 40);
  }
  return total;
}

/// Volume of the Euclidean unit n-ball, pi^(n/2) / Gamma(n/2 + 1).
inline double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

/// Area of the unit (n-1)-sphere, 2 pi^(n/2) / Gamma(n/2).
inline double sphere_area(int n) { return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n); }

inline void check_dimension(int n) {
  if (n < 1) throw DomainError("dimension must be >= 1");
}

/// Volume v_a(r) of an r-ball in the simply connected model space of constant
/// curvature -a^2.
inline double comparison_volume(int n, double a, double r) {
  check_dimension(n);
  if (!(r >= 0.0)) throw DomainError("comparison_volume: radius must be nonnegative");
  if (!(a >= 0.0)) throw DomainError("comparison_volume: curvature parameter must be nonnegative");
  if (r == 0.0) return 0.0;
  if (a == 0.0) return unit_ball_volume(n) * std::pow(r, n);
  auto density = [n, a](double t) { return std::pow(std::sinh(a * t) / a, n - 1); };
  return sphere_area(n) * integrate(density, 0.0, r);
}

/// v_a(R) / v_a(r).
inline double comparison_ratio(int n, double a, double big_r, double small_r) {
  if (!(small_r > 0.0) || !(big_r >= small_r)) throw DomainError("comparison_ratio: need 0 < r <= R");
  if (a == 0.0) return std::pow(big_r / small_r, n);
  return comparison_volume(n, a, big_r) / comparison_volume(n, a, small_r);
}

/// v_a(4.5 t) / v_a(0.5 t), evaluated in the rescaled variable u = s/t so that
/// small t does not underflow.
inline double covering_ratio(int n, double a, double t) {
  check_dimension(n);
  if (a == 0.0 || t == 0.0) return std::pow(9.0, n);
  const double at = a * t;
  auto density = [n, at](double u) { return std::pow(std::sinh(at * u) / at, n - 1); };
  return integrate(density, 0.0, 4.5) / integrate(density, 0.0, 0.5);
}

inline constexpr int kCoveringGridSamples = 256;

/// C(a, r) = max over t in (0, r] of 1 + floor(v_a(4.5t) / v_a(0.5t)), taken over a
/// log-spaced grid of t plus the t -> 0 limit 1 + 9^n. Integer valued.
inline double covering_constant(int n, double a, double r) {
  check_dimension(n);
  if (!(r > 0.0)) throw DomainError("covering_constant: radius must be positive");
  if (!(a >= 0.0)) throw DomainError("covering_constant: curvature parameter must be nonnegative");
  double best = 1.0 + std::floor(std::pow(9.0, n));
  if (a == 0.0) return best;
  for (int i = 0; i < kCoveringGridSamples; ++i) {
    double frac = static_cast<double>(i) / (kCoveringGridSamples - 1);
    double t = (i + 1 == kCoveringGridSamples) ? r : r * std::pow(10.0, -8.0 * (1.0 - frac));
    best = std::max(best, 1.0 + std::floor(covering_ratio(n, a, t)));
  }
  return best;
}

/// Smallest w with v_1(r) <= w r^n for all r <= 1. v_1(r)/r^n increases in r,
/// so this is v_1(1).
inline double omega_prime(int n) {
  check_dimension(n);
  return comparison_volume(n, 1.0, 1.0);
}

enum class ConstantsVariant {
  Hyperbolic,  ///< C(1,1) and omega'_n from curvature -1; valid for any a >= 0
  Euclidean,   ///< C(0,1) = 1 + 9^n and omega_n; valid for a = 0 only
};

inline const char* to_string(ConstantsVariant v) {
  return v == ConstantsVariant::Hyperbolic ? "hyperbolic" : "euclidean";
}

struct GeometryConstants {
  int n = 2;
  double a = 1.0;  ///< curvature parameter of the model the constants were built from
  ConstantsVariant variant = ConstantsVariant::Hyperbolic;
  double C1 = 1.0;
  double omega_prime_n = 1.0;
  double A_n = 0.0;
  double B_n = 0.0;
};

inline double constant_A(int n, double c1) { return 4.0 * c1 * std::pow(2.0, 2.0 / n); }

inline double constant_B(int n, double c1, double omega) {
  return 4.0 * c1 * std::pow(8.0 * c1 * c1 * omega, 2.0 / n);
}

inline GeometryConstants theorem2_constants(int n, ConstantsVariant variant = ConstantsVariant::Hyperbolic) {
  check_dimension(n);
  GeometryConstants c;
  c.n = n;
  c.variant = variant;
  if (variant == ConstantsVariant::Hyperbolic) {
    c.a = 1.0;
    c.C1 = covering_constant(n, 1.0, 1.0);
    c.omega_prime_n = omega_prime(n);
  } else {
    c.a = 0.0;
    c.C1 = covering_constant(n, 0.0, 1.0);
    c.omega_prime_n = unit_ball_volume(n);
  }
  c.A_n = constant_A(n, c.C1);
  c.B_n = constant_B(n, c.C1, c.omega_prime_n);
  return c;
}

/// A_n a^2 + B_n (k/V)^(2/n).
inline double bound_theorem2(const GeometryConstants& c, double a, double volume, std::uint64_t k) {
  if (!(volume > 0.0)) throw DomainError("bound_theorem2: volume must be positive");
  if (k < 1) throw DomainError("bound_theorem2: k must be >= 1");
  if (!(a >= 0.0)) throw DomainError("bound_theorem2: curvature parameter must be nonnegative");
  return c.A_n * a * a + c.B_n * std::pow(static_cast<double>(k) / volume, 2.0 / c.n);
}

/// (n-1)^2/4 a^2 + C_n (k/V)^(2/n); C_n is supplied by the caller.
inline double bound_buser(int n, double c_n, double a, double volume, std::uint64_t k) {
  check_dimension(n);
  if (!(c_n >= 1.0)) throw DomainError("bound_buser: C_n must be >= 1");
  if (!(volume > 0.0)) throw DomainError("bound_buser: volume must be positive");
  if (k < 1) throw DomainError("bound_buser: k must be >= 1");
  return (n - 1) * (n - 1) / 4.0 * a * a + c_n * std::pow(static_cast<double>(k) / volume, 2.0 / n);
}

struct RadiusSchedule {
  double r_k = 0.0;
  std::uint64_t k_0 = 1;
};

/// r_k = (V / (k 8 C1^2 w'))^(1/n), k_0 = floor(V / (8 C1^2 w')) + 1.
inline RadiusSchedule schedule_radius(const GeometryConstants& c, double volume, std::uint64_t k) {
  if (!(volume > 0.0)) throw DomainError("schedule_radius: volume must be positive");
  if (k < 1) throw DomainError("schedule_radius: k must be >= 1");
  const double denom = 8.0 * c.C1 * c.C1 * c.omega_prime_n;
  const double q = volume / denom;
  if (!(q < 9.0e18)) throw DomainError("schedule_radius: volume too large for k_0 to fit in 64 bits");
  RadiusSchedule s;
  s.r_k = std::pow(volume / static_cast<double>(k) / denom, 1.0 / c.n);
  s.k_0 = static_cast<std::uint64_t>(std::floor(q)) + 1;
  if (k >= s.k_0 && s.r_k > 1.0) throw InvariantError("schedule_radius: r_k > 1 with k >= k_0");
  return s;
}

}  // namespace specpack::geometry

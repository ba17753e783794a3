#ifndef BPGMF_ROOTS_HPP_
#define BPGMF_ROOTS_HPP_

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bpgmf {

namespace detail {

inline void require_coeff(double v, const char* name, const char* fn) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(fn) + ": " + name + " must be finite and >= 0");
  }
}

// Bisection on a monotone function until the bracket is within rel of its
// upper end. inc tells whether f is increasing.
template <class F>
void bisect(F&& f, double& lo, double& hi, bool inc, double rel) {
  for (int i = 0; i < 200 && hi - lo > rel * std::abs(hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const bool above = f(mid) > 0.0;
    if (above == inc) hi = mid; else lo = mid;
  }
}

}  // namespace detail

/// Nonnegative root of c1*s*r^3 + c2eff*r - 1 = 0.
inline double solve_cubic_scale(double s, double c1, double c2eff) {
  detail::require_coeff(s, "s", "solve_cubic_scale");
  detail::require_coeff(c1, "c1", "solve_cubic_scale");
  detail::require_coeff(c2eff, "c2eff", "solve_cubic_scale");
  const double a = c1 * s;
  if (a == 0.0) {
    if (c2eff == 0.0) throw std::domain_error("solve_cubic_scale: c1*s and c2eff are both zero, no root");
    return 1.0 / c2eff;
  }
  auto f = [&](double r) { return (a * r * r + c2eff) * r - 1.0; };
  double lo = 0.0;
  double hi = std::cbrt(1.0 / a);
  if (c2eff > 0.0) hi = std::min(hi, 1.0 / c2eff);
  detail::bisect(f, lo, hi, true, 1e-3);

  // f is increasing and convex on r >= 0, so Newton from the right of the
  // root decreases monotonically onto it.
  double r = hi;
  for (int i = 0; i < 100; ++i) {
    const double fr = f(r);
    if (fr <= 0.0) break;
    const double next = r - fr / (3.0 * a * r * r + c2eff);
    if (!(next < r)) break;
    r = std::max(next, lo);
  }
  return r;
}

/// psi(r1) = c1*(pnorm^2/(r1+lam0)^2 + qnorm^2/r1^2) + c2 - r1, strictly decreasing on r1 > 0.
inline double quintic_psi(double r1, double c1, double c2, double lam0, double pnorm, double qnorm) {
  const double a = pnorm / (r1 + lam0);
  const double b = qnorm / r1;
  return c1 * (a * a + b * b) + c2 - r1;
}

/// Root r1 >= c2 of psi, equivalently of the fifth order polynomial
/// c1(p^2 r1^2 + q^2 (r1+lam0)^2) + c2 r1^2 (r1+lam0)^2 - r1^3 (r1+lam0)^2.
inline double solve_r1_quintic(double c1, double c2, double lam0, double pnorm, double qnorm) {
  detail::require_coeff(c1, "c1", "solve_r1_quintic");
  detail::require_coeff(c2, "c2", "solve_r1_quintic");
  detail::require_coeff(lam0, "lam0", "solve_r1_quintic");
  detail::require_coeff(pnorm, "pnorm", "solve_r1_quintic");
  detail::require_coeff(qnorm, "qnorm", "solve_r1_quintic");
  if (qnorm == 0.0) throw std::domain_error("solve_r1_quintic: qnorm must be positive");
  if (c1 == 0.0) return c2;
  auto f = [&](double r1) { return quintic_psi(r1, c1, c2, lam0, pnorm, qnorm); };
  const double mass = c1 * (pnorm * pnorm + qnorm * qnorm);
  double lo = c2;
  double hi = c2 + std::cbrt(mass);
  if (c2 > 0.0) hi = std::min(hi, c2 + mass / (c2 * c2));
  detail::bisect(f, lo, hi, false, 1e-3);

  // psi is decreasing and convex, so Newton from the left stays left.
  double r = lo;
  for (int i = 0; i < 100; ++i) {
    const double fr = f(r);
    if (fr <= 0.0) break;
    const double a = pnorm / (r + lam0);
    const double b = qnorm / r;
    const double d = -2.0 * c1 * (a * a / (r + lam0) + b * b / r) - 1.0;
    const double next = r - fr / d;
    if (!(next > r)) break;
    r = std::min(next, hi);
  }
  return r;
}

}  // namespace bpgmf

#endif  // BPGMF_ROOTS_HPP_

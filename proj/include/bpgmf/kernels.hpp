#ifndef BPGMF_KERNELS_HPP_
#define BPGMF_KERNELS_HPP_

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bpgmf/matrix.hpp"

namespace bpgmf {

/// h = c1*h1 + c2*h2 + aug_u*|U|^2/2 + aug_z*|Z|^2/2 with
/// h1 = ((|U|^2 + |Z|^2)/2)^2 and h2 = (|U|^2 + |Z|^2)/2.
struct KernelSpec {
  double c1 = 3.0;
  double c2 = 0.0;
  double aug_u = 0.0;
  double aug_z = 0.0;

  void validate() const {
    if (!(c1 >= 0.0 && c2 >= 0.0 && aug_u >= 0.0 && aug_z >= 0.0) || !std::isfinite(c1) ||
        !std::isfinite(c2) || !std::isfinite(aug_u) || !std::isfinite(aug_z)) {
      throw std::invalid_argument("KernelSpec: coefficients must be finite and nonnegative");
    }
  }

  /// Strong convexity modulus.
  double sigma() const { return c2 + std::min(aug_u, aug_z); }
};

inline double kernel_value(const KernelSpec& k, const FactorPair& x) {
  const double nu = fro_norm_sq(x.u);
  const double nz = fro_norm_sq(x.z);
  const double half = 0.5 * (nu + nz);
  return k.c1 * half * half + k.c2 * half + 0.5 * k.aug_u * nu + 0.5 * k.aug_z * nz;
}

inline FactorPair kernel_grad(const KernelSpec& k, const FactorPair& x) {
  const double rho = fro_norm_sq(x.u) + fro_norm_sq(x.z);
  const double base = k.c1 * rho + k.c2;
  return {(base + k.aug_u) * x.u, (base + k.aug_z) * x.z};
}

/// D_h(x, y) = h(x) - h(y) - <grad h(y), x - y>, expanded in d = x - y.
/// The h1 part is (<y,d> + |d|^2/2)^2 + |y|^2 |d|^2 / 2.
inline double bregman_distance(const KernelSpec& k, const FactorPair& x, const FactorPair& y) {
  require_same_shape(x, y, "bregman_distance");
  const FactorPair d = x - y;
  const double eu = fro_norm_sq(d.u);
  const double ez = fro_norm_sq(d.z);
  const double e = eu + ez;
  const double a = inner(y, d);
  const double rho_y = sq_norm(y);
  const double q = a + 0.5 * e;
  return k.c1 * (q * q + 0.5 * rho_y * e) + 0.5 * k.c2 * e + 0.5 * k.aug_u * eu + 0.5 * k.aug_z * ez;
}

}  // namespace bpgmf

#endif  // BPGMF_KERNELS_HPP_

#ifndef BPGMF_PROX_HPP_
#define BPGMF_PROX_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bpgmf/kernels.hpp"
#include "bpgmf/linalg.hpp"
#include "bpgmf/matrix.hpp"
#include "bpgmf/problems.hpp"
#include "bpgmf/roots.hpp"

namespace bpgmf {

inline DenseMatrix soft_threshold(const DenseMatrix& m, double theta) {
  if (!(theta >= 0.0)) throw std::invalid_argument("soft_threshold: theta must be >= 0");
  DenseMatrix out = m;
  for (double& v : out.values()) {
    const double a = std::abs(v) - theta;
    v = a > 0.0 ? std::copysign(a, v) : 0.0;
  }
  return out;
}

/// Keeps the s entries of largest magnitude; ties go to the earlier row-major index.
inline DenseMatrix hard_threshold(const DenseMatrix& m, std::size_t s) {
  if (s < 1) throw std::invalid_argument("hard_threshold: s must be >= 1");
  if (s >= m.size()) return m;
  auto v = m.values();
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(s), idx.end(),
                   [&](std::size_t a, std::size_t b) {
                     const double x = std::abs(v[a]), y = std::abs(v[b]);
                     return x != y ? x > y : a < b;
                   });
  DenseMatrix out = DenseMatrix::zeros(m.rows(), m.cols());
  auto o = out.values();
  for (std::size_t i = 0; i < s; ++i) o[idx[i]] = v[idx[i]];
  return out;
}

inline DenseMatrix nonneg_project(const DenseMatrix& m) {
  DenseMatrix out = m;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

/// U max(Sigma - t, 0) V^T
inline DenseMatrix svd_shrink(const DenseMatrix& m, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("svd_shrink: t must be >= 0");
  const Svd d = jacobi_svd(m);
  DenseMatrix out = DenseMatrix::zeros(m.rows(), m.cols());
  for (std::size_t r = 0; r < d.s.size(); ++r) {
    const double sr = d.s[r] - t;
    if (sr <= 0.0) continue;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const double ui = sr * d.u(i, r);
      if (ui == 0.0) continue;
      for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) += ui * d.v(j, r);
    }
  }
  return out;
}

/// Direction of the block minimiser of step*R(X) + <P, X> on a sphere |X| = t,
/// given neg_p = -P. The L2 weight only enters the radius, not the direction.
inline DenseMatrix block_direction(const DenseMatrix& neg_p, const BlockReg& r, double step) {
  if (r.sparsity) return hard_threshold(r.nonneg ? nonneg_project(neg_p) : neg_p, *r.sparsity);
  if (r.nonneg) {
    if (r.l1 > 0.0) return nonneg_project(neg_p - DenseMatrix::filled(neg_p.rows(), neg_p.cols(), step * r.l1));
    return nonneg_project(neg_p);
  }
  if (r.l1 > 0.0) return soft_threshold(neg_p, step * r.l1);
  if (r.nuclear > 0.0) return svd_shrink(neg_p, step * r.nuclear);
  return neg_p;
}

/// The Bregman proximal subproblem
///   argmin step*f(U,Z) + <P,U> + <Q,Z> + h(U,Z)
/// with f given by reg_u, reg_z.
struct ProxInput {
  DenseMatrix p_mat;
  DenseMatrix q_mat;
  KernelSpec kernel;
  double step = 1.0;
  BlockReg reg_u;
  BlockReg reg_z;

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("ProxInput: step must be > 0");
    if (p_mat.cols() != q_mat.rows()) throw ShapeError("ProxInput: P and Q are not conformable");
    kernel.validate();
    reg_u.validate("reg_u");
    reg_z.validate("reg_z");
  }

  /// Quadratic coefficients of the reduced problem in |U| and |Z|.
  double coeff_u() const { return kernel.c2 + kernel.aug_u + step * reg_u.l2; }
  double coeff_z() const { return kernel.c2 + kernel.aug_z + step * reg_z.l2; }
};

/// Scales (su, sz) minimising
///   -su*du2 - sz*dz2 + c1/4 (su^2 du2 + sz^2 dz2)^2 + a_u su^2 du2/2 + a_z sz^2 dz2/2,
/// i.e. the block radii are t1 = su*sqrt(du2) and t2 = sz*sqrt(dz2).
inline std::pair<double, double> block_scales(double c1, double a_u, double a_z, double du2, double dz2) {
  if (du2 + dz2 == 0.0) return {0.0, 0.0};
  if (c1 == 0.0 && ((du2 > 0.0 && a_u == 0.0) || (dz2 > 0.0 && a_z == 0.0)))
    throw std::domain_error("bpg_prox: degenerate kernel, c1 and the quadratic coefficient are zero");
  if (a_u == a_z) {
    const double r = solve_cubic_scale(du2 + dz2, c1, a_u);
    return {r, r};
  }
  if (a_u > a_z) {
    if (dz2 == 0.0) return {solve_cubic_scale(du2, c1, a_u), 0.0};
    const double delta = a_u - a_z;
    const double r1 = solve_r1_quintic(c1, a_z, delta, std::sqrt(du2), std::sqrt(dz2));
    return {1.0 / (r1 + delta), 1.0 / r1};
  }
  if (du2 == 0.0) return {0.0, solve_cubic_scale(dz2, c1, a_z)};
  const double delta = a_z - a_u;
  const double r1 = solve_r1_quintic(c1, a_u, delta, std::sqrt(dz2), std::sqrt(du2));
  return {1.0 / r1, 1.0 / (r1 + delta)};
}

inline FactorPair bpg_prox(const ProxInput& in) {
  in.validate();
  const DenseMatrix du = block_direction(-in.p_mat, in.reg_u, in.step);
  const DenseMatrix dz = block_direction(-in.q_mat, in.reg_z, in.step);
  const auto [su, sz] =
      block_scales(in.kernel.c1, in.coeff_u(), in.coeff_z(), fro_norm_sq(du), fro_norm_sq(dz));
  return {su * du, sz * dz};
}

}  // namespace bpgmf

#endif  // BPGMF_PROX_HPP_

#ifndef BPGMF_LINALG_HPP_
#define BPGMF_LINALG_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "bpgmf/matrix.hpp"

namespace bpgmf {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thin SVD m = u * diag(s) * v^T with r = min(rows, cols) singular triples,
/// singular values sorted in decreasing order.
struct Svd {
  DenseMatrix u;  // rows x r
  std::vector<double> s;
  DenseMatrix v;  // cols x r
};

namespace detail {

// One-sided Jacobi on the columns of a (rows >= cols).
inline Svd jacobi_svd_tall(const DenseMatrix& a, int max_sweeps, double tol) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  DenseMatrix w = a;
  DenseMatrix v = DenseMatrix::identity(n);
  bool converged = n < 2;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += w(i, p) * w(i, p);
          beta += w(i, q) * w(i, q);
          gamma += w(i, p) * w(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = w(i, p), wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    converged = !rotated;
  }
  if (!converged) throw ConvergenceError("jacobi_svd: no convergence within sweep cap");

  std::vector<double> sig(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += w(i, j) * w(i, j);
    sig[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });

  Svd out{DenseMatrix::zeros(m, n), std::vector<double>(n), DenseMatrix::zeros(n, n)};
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t j = order[r];
    out.s[r] = sig[j];
    for (std::size_t i = 0; i < n; ++i) out.v(i, r) = v(i, j);
    if (sig[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) out.u(i, r) = w(i, j) / sig[j];
    }
  }
  return out;
}

}  // namespace detail

/// One-sided Jacobi SVD, run on whichever of m or m^T has fewer columns.
/// Throws ConvergenceError when the sweep cap is hit.
inline Svd jacobi_svd(const DenseMatrix& m, int max_sweeps = 100, double tol = 1e-12) {
  if (m.rows() >= m.cols()) return detail::jacobi_svd_tall(m, max_sweeps, tol);
  Svd t = detail::jacobi_svd_tall(transpose(m), max_sweeps, tol);
  return {std::move(t.v), std::move(t.s), std::move(t.u)};
}

struct SpectralNormResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = true;
};

/// Largest singular value by power iteration on the smaller Gram matrix.
/// Stops when the eigen-residual of the Gram matrix drops below rel_tol times
/// the current eigenvalue estimate; on hitting the cap the best estimate is
/// returned with converged == false.
inline SpectralNormResult spectral_norm(const DenseMatrix& m, double rel_tol = 1e-8,
                                        int max_iter = 1000) {
  if (m.size() == 0 || fro_norm_sq(m) == 0.0) return {0.0, 0, true};
  const DenseMatrix gram = m.rows() >= m.cols() ? gemm_at_b(m, m) : gemm_a_bt(m, m);
  const std::size_t n = gram.rows();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.5 * static_cast<double>(i % 7) / 7.0;
  auto normalize = [](std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    s = std::sqrt(s);
    if (s > 0.0)
      for (double& e : v) e /= s;
    return s;
  };
  normalize(x);
  double lambda = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += gram(i, j) * x[j];
      y[i] = s;
    }
    lambda = 0.0;
    for (std::size_t i = 0; i < n; ++i) lambda += x[i] * y[i];
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res += (y[i] - lambda * x[i]) * (y[i] - lambda * x[i]);
    res = std::sqrt(res);
    if (res <= rel_tol * lambda) return {std::sqrt(std::max(lambda, 0.0)), it, true};
    if (normalize(y) == 0.0) return {0.0, it, true};
    x.swap(y);
  }
  return {std::sqrt(std::max(lambda, 0.0)), max_iter, false};
}

}  // namespace bpgmf

#endif  // BPGMF_LINALG_HPP_

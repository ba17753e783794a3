#ifndef BPGMF_ORACLE_HPP_
#define BPGMF_ORACLE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpgmf/kernels.hpp"
#include "bpgmf/linalg.hpp"
#include "bpgmf/matrix.hpp"
#include "bpgmf/optimizers.hpp"
#include "bpgmf/problems.hpp"
#include "bpgmf/prox.hpp"
#include "bpgmf/rng.hpp"

namespace bpgmf {

struct CheckReport {
  std::string name;
  std::size_t samples = 0;
  double worst_violation = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  std::string details;
};

namespace detail {

inline void note_violation(CheckReport& r, double v, std::size_t sample, const std::string& what) {
  if (r.details.empty() || v > r.worst_violation) {
    r.worst_violation = std::max(v, r.worst_violation);
    r.details = "sample " + std::to_string(sample) + ": " + what;
  }
}

inline void finish(CheckReport& r) { r.passed = r.worst_violation <= r.tolerance; }

}  // namespace detail

/// Objective of the Bregman proximal subproblem at x.
inline double subproblem_objective(const ProxInput& in, const FactorPair& x) {
  return in.step * (block_reg_value(in.reg_u, x.u) + block_reg_value(in.reg_z, x.z)) + fro_inner(in.p_mat, x.u) +
         fro_inner(in.q_mat, x.z) + kernel_value(in.kernel, x);
}

namespace detail {

// Minimiser direction of step*R(X) + <P, X> over a sphere, written out
// per case rather than through the prox-map helpers.
inline DenseMatrix oracle_direction(const DenseMatrix& p, const BlockReg& r, double step) {
  DenseMatrix d = DenseMatrix::zeros(p.rows(), p.cols());
  auto pv = p.values();
  auto dv = d.values();
  if (r.sparsity) {
    std::vector<double> cand(pv.size());
    for (std::size_t i = 0; i < pv.size(); ++i) cand[i] = r.nonneg ? std::max(-pv[i], 0.0) : -pv[i];
    std::vector<std::size_t> order(pv.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(cand[a]) > std::abs(cand[b]); });
    for (std::size_t i = 0; i < std::min(*r.sparsity, order.size()); ++i) dv[order[i]] = cand[order[i]];
    return d;
  }
  if (r.nuclear > 0.0) {
    const Svd s = jacobi_svd(-1.0 * p);
    for (std::size_t k = 0; k < s.s.size(); ++k) {
      const double w = std::max(s.s[k] - step * r.nuclear, 0.0);
      for (std::size_t i = 0; i < p.rows(); ++i)
        for (std::size_t j = 0; j < p.cols(); ++j) d(i, j) += w * s.u(i, k) * s.v(j, k);
    }
    return d;
  }
  const double th = step * r.l1;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double v = -pv[i];
    if (r.nonneg) {
      dv[i] = std::max(v - th, 0.0);
    } else {
      const double a = std::abs(v) - th;
      dv[i] = a > 0.0 ? (v > 0.0 ? a : -a) : 0.0;
    }
  }
  return d;
}

struct Reduced2d {
  double c1, au, az, du, dz;
  double value(double t1, double t2) const {
    const double rho = t1 * t1 + t2 * t2;
    return -t1 * du - t2 * dz + 0.25 * c1 * rho * rho + 0.5 * au * t1 * t1 + 0.5 * az * t2 * t2;
  }
};

inline double radius_bound(double d, double c1, double a) {
  double b = std::numeric_limits<double>::infinity();
  if (a > 0.0) b = d / a;
  if (c1 > 0.0) b = std::min(b, std::cbrt(d / c1));
  return b;
}

}  // namespace detail

/// Independent minimiser of the subproblem: fix the block directions, then
/// minimise the reduced problem in the block radii (t1, t2) by a 400x400
/// grid search followed by 50 damped Newton steps on the stationarity system.
inline FactorPair subproblem_oracle(const ProxInput& in) {
  in.validate();
  const std::size_t m = in.p_mat.rows(), k = in.p_mat.cols(), n = in.q_mat.cols();
  if (m * k + k * n > 200) throw std::invalid_argument("subproblem_oracle: instance too large");
  const DenseMatrix dU = detail::oracle_direction(in.p_mat, in.reg_u, in.step);
  const DenseMatrix dZ = detail::oracle_direction(in.q_mat, in.reg_z, in.step);
  detail::Reduced2d q{in.kernel.c1, in.coeff_u(), in.coeff_z(), fro_norm(dU), fro_norm(dZ)};
  if (q.du == 0.0 && q.dz == 0.0) return FactorPair::zeros(m, k, n);
  if (q.c1 == 0.0 && ((q.du > 0.0 && q.au == 0.0) || (q.dz > 0.0 && q.az == 0.0)))
    throw std::domain_error("subproblem_oracle: unbounded subproblem");

  double R = 0.0;
  if (q.du > 0.0) R = std::max(R, detail::radius_bound(q.du, q.c1, q.au));
  if (q.dz > 0.0) R = std::max(R, detail::radius_bound(q.dz, q.c1, q.az));
  R *= 1.01;
  const int grid = 400;
  double t1 = 0.0, t2 = 0.0, best = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double a = q.du > 0.0 ? R * i / grid : 0.0;
    for (int j = 0; j <= grid; ++j) {
      const double b = q.dz > 0.0 ? R * j / grid : 0.0;
      const double v = q.value(a, b);
      if (v < best) {
        best = v;
        t1 = a;
        t2 = b;
      }
    }
  }
  // The reduced problem is convex, so damped Newton from the grid point
  // converges to its minimiser. Blocks with zero direction stay at 0.
  const bool act1 = q.du > 0.0, act2 = q.dz > 0.0;
  for (int it = 0; it < 50; ++it) {
    const double rho = t1 * t1 + t2 * t2;
    const double g1 = act1 ? -q.du + (q.c1 * rho + q.au) * t1 : 0.0;
    const double g2 = act2 ? -q.dz + (q.c1 * rho + q.az) * t2 : 0.0;
    const double h11 = q.c1 * (rho + 2.0 * t1 * t1) + q.au;
    const double h22 = q.c1 * (rho + 2.0 * t2 * t2) + q.az;
    const double h12 = 2.0 * q.c1 * t1 * t2;
    double s1 = 0.0, s2 = 0.0;
    if (act1 && act2) {
      const double det = h11 * h22 - h12 * h12;
      if (!(det > 0.0)) break;
      s1 = -(h22 * g1 - h12 * g2) / det;
      s2 = -(h11 * g2 - h12 * g1) / det;
    } else if (act1) {
      s1 = -g1 / h11;
    } else {
      s2 = -g2 / h22;
    }
    const double f0 = q.value(t1, t2);
    double a = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, a *= 0.5) {
      const double n1 = std::max(t1 + a * s1, 0.0), n2 = std::max(t2 + a * s2, 0.0);
      if (q.value(n1, n2) <= f0) {
        moved = n1 != t1 || n2 != t2;
        t1 = n1;
        t2 = n2;
        break;
      }
    }
    if (!moved) break;
  }
  return {q.du > 0.0 ? (t1 / q.du) * dU : DenseMatrix::zeros(m, k),
          q.dz > 0.0 ? (t2 / q.dz) * dZ : DenseMatrix::zeros(k, n)};
}

/// Third method for the convex block regularizers (none, L2, L1, nonneg,
/// nonneg + L1): proximal gradient on the raw subproblem with Armijo
/// backtracking.
inline FactorPair subproblem_pgd(const ProxInput& in, int max_iters = 200000, double tol = 1e-15) {
  in.validate();
  for (const BlockReg* r : {&in.reg_u, &in.reg_z}) {
    if (r->nuclear > 0.0 || r->sparsity)
      throw std::invalid_argument("subproblem_pgd: only none, L2, L1 and nonneg blocks are supported");
  }
  auto smooth = [&](const FactorPair& x) {
    return fro_inner(in.p_mat, x.u) + fro_inner(in.q_mat, x.z) + kernel_value(in.kernel, x) +
           0.5 * in.step * (in.reg_u.l2 * fro_norm_sq(x.u) + in.reg_z.l2 * fro_norm_sq(x.z));
  };
  auto grad = [&](const FactorPair& x) {
    FactorPair g = kernel_grad(in.kernel, x);
    g.u = g.u + in.p_mat;
    g.z = g.z + in.q_mat;
    axpy(in.step * in.reg_u.l2, x.u, g.u);
    axpy(in.step * in.reg_z.l2, x.z, g.z);
    return g;
  };
  auto prox = [&](const DenseMatrix& v, const BlockReg& r, double t) {
    DenseMatrix out = v;
    const double th = t * in.step * r.l1;
    for (double& e : out.values()) {
      if (r.nonneg) {
        e = std::max(e - th, 0.0);
      } else {
        const double a = std::abs(e) - th;
        e = a > 0.0 ? std::copysign(a, e) : 0.0;
      }
    }
    return out;
  };
  auto nonsmooth = [&](const FactorPair& x) {
    return in.step * (in.reg_u.l1 * l1_norm(x.u) + in.reg_z.l1 * l1_norm(x.z));
  };
  FactorPair x = FactorPair::zeros(in.p_mat.rows(), in.p_mat.cols(), in.q_mat.cols());
  double t = 1.0;
  for (int it = 0; it < max_iters; ++it) {
    const FactorPair g = grad(x);
    const double fx = smooth(x);
    FactorPair cand;
    for (int ls = 0; ls < 100; ++ls) {
      cand = FactorPair{prox(x.u - t * g.u, in.reg_u, t), prox(x.z - t * g.z, in.reg_z, t)};
      const FactorPair d = cand - x;
      if (smooth(cand) <= fx + inner(g, d) + sq_norm(d) / (2.0 * t)) break;
      t *= 0.5;
    }
    const double change = std::sqrt(sq_norm(cand - x));
    const double before = fx + nonsmooth(x);
    x = std::move(cand);
    if (change <= tol * (1.0 + std::sqrt(sq_norm(x))) && smooth(x) + nonsmooth(x) <= before) break;
    t *= 2.0;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Derivative checks

namespace detail {

inline FactorPair random_pair(std::size_t m, std::size_t k, std::size_t n, Rng& rng, double scale) {
  DenseMatrix u = random_normal(m, k, rng, scale);
  DenseMatrix z = random_normal(k, n, rng, scale);
  return {std::move(u), std::move(z)};
}

// Second derivative at t = 0 of t -> f(x + t d) from the five point
// stencil, exact for polynomials of degree <= 5.
template <class F>
double second_directional(F&& f, const FactorPair& x, const FactorPair& d, double h) {
  const double fm2 = f(x + (-2.0 * h) * d), fm1 = f(x + (-h) * d), f0 = f(x);
  const double fp1 = f(x + h * d), fp2 = f(x + (2.0 * h) * d);
  return (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
}

inline FactorPair unit_direction(std::size_t m, std::size_t k, std::size_t n, Rng& rng) {
  FactorPair d = random_pair(m, k, n, rng, 1.0);
  const double s = std::sqrt(sq_norm(d));
  return (1.0 / s) * d;
}

}  // namespace detail

/// Central differences of smooth_value against smooth_grad at n random
/// points. Error per point: max |fd - grad| / (1 + max |grad|).
inline CheckReport grad_check(const ProblemSpec& p, std::size_t n, std::uint64_t seed, double tol = 1e-5) {
  CheckReport r{"gradients", n, 0.0, tol, true, ""};
  Rng rng(seed);
  for (std::size_t s = 0; s < n; ++s) {
    FactorPair x = detail::random_pair(p.m, p.k, p.n, rng, 1.0);
    if (p.reg_u.nonneg) x.u = nonneg_project(x.u);
    if (p.reg_z.nonneg) x.z = nonneg_project(x.z);
    const FactorPair g = smooth_grad(p, x);
    const double h = 1e-5 * (1.0 + std::sqrt(sq_norm(x)));
    double err = 0.0, gmax = 0.0;
    auto sweep = [&](DenseMatrix& blk, const DenseMatrix& gblk) {
      auto v = blk.values();
      auto gv = gblk.values();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double keep = v[i];
        v[i] = keep + h;
        const double fp = smooth_value(p, x);
        v[i] = keep - h;
        const double fm = smooth_value(p, x);
        v[i] = keep;
        err = std::max(err, std::abs((fp - fm) / (2.0 * h) - gv[i]));
        gmax = std::max(gmax, std::abs(gv[i]));
      }
    };
    sweep(x.u, g.u);
    sweep(x.z, g.z);
    const double rel = err / (1.0 + gmax);
    detail::note_violation(r, rel, s, "relative gradient error " + format_real(rel));
  }
  detail::finish(r);
  return r;
}

/// Sampled convexity of L h - g and L h + g along unit directions. The
/// violation is max(0, -curvature) / (1 + |L h''| + |g''|).
inline CheckReport lsmad_check(const ProblemSpec& p, const KernelSpec& k, double L, std::size_t n,
                               std::uint64_t seed, double tol = 1e-6) {
  CheckReport r{"lsmad", n, 0.0, tol, true, ""};
  Rng rng(seed);
  auto hf = [&](const FactorPair& y) { return kernel_value(k, y); };
  auto gf = [&](const FactorPair& y) { return smooth_value(p, y); };
  for (std::size_t s = 0; s < n; ++s) {
    const double scale = std::pow(10.0, rng.uniform(-2.0, 1.0));
    const FactorPair x = detail::random_pair(p.m, p.k, p.n, rng, scale);
    const FactorPair d = detail::unit_direction(p.m, p.k, p.n, rng);
    const double h = 0.1 * (1.0 + std::sqrt(sq_norm(x)));
    const double hh = detail::second_directional(hf, x, d, h);
    const double gg = detail::second_directional(gf, x, d, h);
    const double sc = 1.0 + std::abs(L * hh) + std::abs(gg);
    const double lo = std::min(L * hh - gg, L * hh + gg);
    const double v = std::max(0.0, -lo) / sc;
    detail::note_violation(r, v, s,
                           "L h'' - g'' = " + format_real(L * hh - gg) + ", L h'' + g'' = " + format_real(L * hh + gg));
  }
  detail::finish(r);
  return r;
}

/// <H, grad^2 g H> <= (3|Z|^2 + c2)|H1|^2 + (3|U|^2 + c2)|H2|^2 with c2 taken
/// from the matched kernel (|A| for the plain data term).
inline CheckReport hessian_bound_check(const ProblemSpec& p, std::size_t n, std::uint64_t seed, double tol = 1e-6) {
  CheckReport r{"hessian-bound", n, 0.0, tol, true, ""};
  Rng rng(seed);
  const double c2 = kernel_for_problem(p).c2;
  auto gf = [&](const FactorPair& y) { return smooth_value(p, y); };
  for (std::size_t s = 0; s < n; ++s) {
    const double scale = std::pow(10.0, rng.uniform(-2.0, 1.0));
    const FactorPair x = detail::random_pair(p.m, p.k, p.n, rng, scale);
    const FactorPair d = detail::random_pair(p.m, p.k, p.n, rng, 1.0);
    const double h = 0.1 * (1.0 + std::sqrt(sq_norm(x))) / (1.0 + std::sqrt(sq_norm(d)));
    const double lhs = detail::second_directional(gf, x, d, h);
    const double rhs = (3.0 * fro_norm_sq(x.z) + c2) * fro_norm_sq(d.u) + (3.0 * fro_norm_sq(x.u) + c2) * fro_norm_sq(d.z);
    const double v = std::max(0.0, lhs - rhs) / (1.0 + std::abs(lhs) + rhs);
    detail::note_violation(r, v, s, "lhs " + format_real(lhs) + " vs bound " + format_real(rhs));
  }
  detail::finish(r);
  return r;
}

/// Slacks of the three CoCaIn certificates for one accepted iteration; all
/// are >= 0 when the iteration is valid.
struct CocainSlacks {
  double inertia;  // (delta - eps) D_h(x_prev, x) - (1 + lunder tau_prev) D_h(x, y)
  double lower;    // D_g(x, y) + lunder D_h(x, y)
  double upper;    // lbar D_h(x_next, y) - D_g(x_next, y)
};

inline CocainSlacks cocain_slacks(const ProblemSpec& p, const KernelSpec& k, const CoCaInConfig& cfg,
                                  const CocainIterate& it) {
  const double dh_xy = bregman_distance(k, it.x, it.y);
  return {(cfg.delta - cfg.eps) * bregman_distance(k, it.x_prev, it.x) - (1.0 + it.lunder * it.tau_prev) * dh_xy,
          dg_bregman(p, it.x, it.y) + it.lunder * dh_xy,
          it.lbar * bregman_distance(k, it.x_next, it.y) - dg_bregman(p, it.x_next, it.y)};
}

}  // namespace bpgmf

#endif  // BPGMF_ORACLE_HPP_

#ifndef BPGMF_PROBLEMS_HPP_
#define BPGMF_PROBLEMS_HPP_

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "bpgmf/kernels.hpp"
#include "bpgmf/linalg.hpp"
#include "bpgmf/matrix.hpp"

namespace bpgmf {

// Data terms g. Every variant contains 1/2 |A - UZ|^2 (restricted to the
// observed entries for Masked).
struct FullData {
  DenseMatrix a;
};

struct MaskedData {
  MaskedMatrix a;
};

/// Adds mu0/2 tr(U^T L U).
struct GraphData {
  DenseMatrix a;
  DenseMatrix lap;
  double mu0 = 0.0;
};

/// Adds lam0/2 |U - Z^T|^2; needs a square A.
struct SymData {
  DenseMatrix a;
  double lam0 = 0.0;
};

using DataTerm = std::variant<FullData, MaskedData, GraphData, SymData>;

/// Per-block regularizer: l2/2 |X|^2 + l1 |X|_1 + nuclear |X|_* plus the
/// indicators of X >= 0 and |X|_0 <= sparsity.
struct BlockReg {
  double l2 = 0.0;
  double l1 = 0.0;
  double nuclear = 0.0;
  bool nonneg = false;
  std::optional<std::size_t> sparsity;

  void validate(const std::string& block) const {
    for (double w : {l2, l1, nuclear}) {
      if (!(w >= 0.0) || !std::isfinite(w))
        throw std::invalid_argument(block + ": regularization weights must be finite and >= 0");
    }
    const int nonsmooth = (l1 > 0.0) + (nuclear > 0.0) + sparsity.has_value();
    if (nonsmooth > 1)
      throw std::invalid_argument(block + ": at most one of l1, nuclear, sparsity per block");
    if (nuclear > 0.0 && nonneg)
      throw std::invalid_argument(block + ": nuclear norm cannot be combined with nonnegativity");
    if (sparsity && *sparsity < 1) throw std::invalid_argument(block + ": sparsity must be >= 1");
  }

  bool empty() const { return l2 == 0.0 && l1 == 0.0 && nuclear == 0.0 && !nonneg && !sparsity; }
};

struct ProblemSpec {
  DataTerm data;
  BlockReg reg_u;
  BlockReg reg_z;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t k = 0;
  // When set the L2 terms belong to g (and to c2 of the kernel) instead of f.
  bool l2_in_smooth = false;

  void validate() const;
};

inline std::pair<std::size_t, std::size_t> data_shape(const DataTerm& d) {
  return std::visit(
      [](const auto& t) -> std::pair<std::size_t, std::size_t> {
        return {t.a.rows(), t.a.cols()};
      },
      d);
}

inline void ProblemSpec::validate() const {
  const auto [rows, cols] = data_shape(data);
  if (rows != m || cols != n) {
    throw ShapeError("ProblemSpec: dims " + std::to_string(m) + "x" + std::to_string(n) +
                     " do not match data " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (k < 1) throw std::invalid_argument("ProblemSpec: K must be >= 1");
  if (const auto* g = std::get_if<GraphData>(&data)) {
    if (g->lap.rows() != m || g->lap.cols() != m)
      throw ShapeError("GraphData: Laplacian must be " + std::to_string(m) + "x" + std::to_string(m));
    if (!(g->mu0 > 0.0)) throw std::invalid_argument("GraphData: mu0 must be > 0");
  }
  if (const auto* s = std::get_if<SymData>(&data)) {
    if (m != n) throw ShapeError("SymData: A must be square");
    if (!(s->lam0 > 0.0)) throw std::invalid_argument("SymData: lam0 must be > 0");
  }
  reg_u.validate("reg_u");
  reg_z.validate("reg_z");
}

inline ProblemSpec make_problem(DataTerm data, std::size_t k, BlockReg reg_u = {}, BlockReg reg_z = {},
                                bool l2_in_smooth = false) {
  const auto [m, n] = data_shape(data);
  ProblemSpec p{std::move(data), reg_u, reg_z, m, n, k, l2_in_smooth};
  p.validate();
  return p;
}

inline void require_conformable(const ProblemSpec& p, const FactorPair& x, const char* what) {
  if (x.m() != p.m || x.k() != p.k || x.n() != p.n || x.z.rows() != p.k) {
    throw ShapeError(std::string(what) + ": factors do not match problem dims");
  }
}

/// Regularizers as the nonsmooth part f sees them.
inline BlockReg f_reg(const ProblemSpec& p, bool u_block) {
  BlockReg r = u_block ? p.reg_u : p.reg_z;
  if (p.l2_in_smooth) r.l2 = 0.0;
  return r;
}

namespace detail {

inline const DenseMatrix* dense_target(const DataTerm& d) {
  if (const auto* f = std::get_if<FullData>(&d)) return &f->a;
  if (const auto* g = std::get_if<GraphData>(&d)) return &g->a;
  if (const auto* s = std::get_if<SymData>(&d)) return &s->a;
  return nullptr;
}

}  // namespace detail

inline double smooth_value(const ProblemSpec& p, const FactorPair& x) {
  require_conformable(p, x, "smooth_value");
  double v = 0.0;
  if (const auto* md = std::get_if<MaskedData>(&p.data)) {
    for (const Entry& e : md->a.entries()) {
      const double r = e.value - predict(x, e.row, e.col);
      v += r * r;
    }
    v *= 0.5;
  } else {
    v = 0.5 * fro_norm_sq(*detail::dense_target(p.data) - gemm(x.u, x.z));
  }
  if (const auto* g = std::get_if<GraphData>(&p.data)) v += 0.5 * g->mu0 * fro_inner(gemm(g->lap, x.u), x.u);
  if (const auto* s = std::get_if<SymData>(&p.data)) v += 0.5 * s->lam0 * fro_norm_sq(x.u - transpose(x.z));
  if (p.l2_in_smooth) v += 0.5 * (p.reg_u.l2 * fro_norm_sq(x.u) + p.reg_z.l2 * fro_norm_sq(x.z));
  return v;
}

inline FactorPair smooth_grad(const ProblemSpec& p, const FactorPair& x) {
  require_conformable(p, x, "smooth_grad");
  FactorPair g = FactorPair::zeros(p.m, p.k, p.n);
  if (const auto* md = std::get_if<MaskedData>(&p.data)) {
    for (const Entry& e : md->a.entries()) {
      const double r = e.value - predict(x, e.row, e.col);
      for (std::size_t c = 0; c < p.k; ++c) {
        g.u(e.row, c) -= r * x.z(c, e.col);
        g.z(c, e.col) -= r * x.u(e.row, c);
      }
    }
  } else {
    const DenseMatrix r = *detail::dense_target(p.data) - gemm(x.u, x.z);
    g.u = -gemm_a_bt(r, x.z);
    g.z = -gemm_at_b(x.u, r);
  }
  if (const auto* gd = std::get_if<GraphData>(&p.data)) {
    axpy(0.5 * gd->mu0, gemm(gd->lap, x.u) + gemm_at_b(gd->lap, x.u), g.u);
  }
  if (const auto* s = std::get_if<SymData>(&p.data)) {
    const DenseMatrix diff = x.u - transpose(x.z);
    axpy(s->lam0, diff, g.u);
    axpy(-s->lam0, transpose(diff), g.z);
  }
  if (p.l2_in_smooth) {
    axpy(p.reg_u.l2, x.u, g.u);
    axpy(p.reg_z.l2, x.z, g.z);
  }
  return g;
}

inline double nuclear_norm(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : jacobi_svd(m).s) s += v;
  return s;
}

inline double block_reg_value(const BlockReg& r, const DenseMatrix& x) {
  if (r.nonneg) {
    for (double v : x.values())
      if (v < 0.0) return std::numeric_limits<double>::infinity();
  }
  if (r.sparsity && count_nonzero(x) > *r.sparsity) return std::numeric_limits<double>::infinity();
  double v = 0.0;
  if (r.l2 > 0.0) v += 0.5 * r.l2 * fro_norm_sq(x);
  if (r.l1 > 0.0) v += r.l1 * l1_norm(x);
  if (r.nuclear > 0.0) v += r.nuclear * nuclear_norm(x);
  return v;
}

inline double nonsmooth_value(const ProblemSpec& p, const FactorPair& x) {
  require_conformable(p, x, "nonsmooth_value");
  return block_reg_value(f_reg(p, true), x.u) + block_reg_value(f_reg(p, false), x.z);
}

inline double objective(const ProblemSpec& p, const FactorPair& x) {
  return smooth_value(p, x) + nonsmooth_value(p, x);
}

/// D_g(x, y) = g(x) - g(y) - <grad g(y), x - y>; may be negative. Expanded in
/// d = x - y: with R = A - Uy Zy and E = dU Zy + Uy dZ + dU dZ the data part is
/// |E|^2/2 - <R, dU dZ> (both over the observed entries for Masked).
inline double dg_bregman(const ProblemSpec& p, const FactorPair& x, const FactorPair& y) {
  require_conformable(p, x, "dg_bregman");
  require_conformable(p, y, "dg_bregman");
  const FactorPair d = x - y;
  double v = 0.0;
  if (const auto* md = std::get_if<MaskedData>(&p.data)) {
    for (const Entry& e : md->a.entries()) {
      double r = e.value;
      double dd = 0.0;
      double ee = 0.0;
      for (std::size_t c = 0; c < p.k; ++c) {
        r -= y.u(e.row, c) * y.z(c, e.col);
        const double ddc = d.u(e.row, c) * d.z(c, e.col);
        dd += ddc;
        ee += d.u(e.row, c) * y.z(c, e.col) + y.u(e.row, c) * d.z(c, e.col) + ddc;
      }
      v += 0.5 * ee * ee - r * dd;
    }
  } else {
    const DenseMatrix r = *detail::dense_target(p.data) - gemm(y.u, y.z);
    const DenseMatrix dd = gemm(d.u, d.z);
    const DenseMatrix ee = gemm(d.u, y.z) + gemm(y.u, d.z) + dd;
    v = 0.5 * fro_norm_sq(ee) - fro_inner(r, dd);
  }
  if (const auto* g = std::get_if<GraphData>(&p.data)) v += 0.5 * g->mu0 * fro_inner(gemm(g->lap, d.u), d.u);
  if (const auto* s = std::get_if<SymData>(&p.data)) v += 0.5 * s->lam0 * fro_norm_sq(d.u - transpose(d.z));
  if (p.l2_in_smooth) v += 0.5 * (p.reg_u.l2 * fro_norm_sq(d.u) + p.reg_z.l2 * fro_norm_sq(d.z));
  return v;
}

/// Semi-convexity modulus of f: 0 for the convex regularizers, none for the
/// sparsity constraint.
inline std::optional<double> semiconvexity_alpha(const ProblemSpec& p) {
  if (p.reg_u.sparsity || p.reg_z.sparsity) return std::nullopt;
  return 0.0;
}

/// Frobenius norm of the observed data (P_Omega(A) for Masked).
inline double data_norm(const DataTerm& d) {
  if (const auto* md = std::get_if<MaskedData>(&d)) return md->a.fro_norm();
  return fro_norm(*detail::dense_target(d));
}

/// c1 = 3 and c2 = |A| (+ mu0 |L|_F for the graph term, + 2 lam0 for the
/// symmetric penalty). L2 weights go to c2 when they live in g; a one-sided
/// L2 in f is matched by the same quadratic on the other block of h.
inline KernelSpec kernel_for_problem(const ProblemSpec& p) {
  KernelSpec k;
  k.c1 = 3.0;
  k.c2 = data_norm(p.data);
  if (const auto* g = std::get_if<GraphData>(&p.data)) k.c2 += g->mu0 * fro_norm(g->lap);
  if (const auto* s = std::get_if<SymData>(&p.data)) k.c2 += 2.0 * s->lam0;
  if (p.l2_in_smooth) {
    k.c2 += std::max(p.reg_u.l2, p.reg_z.l2);
  } else if (p.reg_u.l2 > 0.0 && p.reg_z.l2 == 0.0) {
    k.aug_z = p.reg_u.l2;
  } else if (p.reg_z.l2 > 0.0 && p.reg_u.l2 == 0.0) {
    k.aug_u = p.reg_z.l2;
  }
  return k;
}

}  // namespace bpgmf

#endif  // BPGMF_PROBLEMS_HPP_

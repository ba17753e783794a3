#ifndef BPGMF_SUITES_HPP_
#define BPGMF_SUITES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bpgmf/kernels.hpp"
#include "bpgmf/matrix.hpp"
#include "bpgmf/optimizers.hpp"
#include "bpgmf/oracle.hpp"
#include "bpgmf/problems.hpp"
#include "bpgmf/prox.hpp"
#include "bpgmf/rng.hpp"
#include "bpgmf/roots.hpp"

// Randomised verification suites shared by the CLI and the test binaries.
namespace bpgmf {

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"cubic", "prox-oracle", "gradients", "lsmad", "hessian-bound",
                                              "cocain-certs"};
  return names;
}

inline const std::vector<std::string>& prox_kinds() {
  static const std::vector<std::string> kinds{"none",     "l2",           "l1",        "nonneg",
                                              "nonneg-l1", "nuclear",     "sparsity",  "nonneg-sparsity",
                                              "graph-reg", "symmetric",   "mixed-l2-l1"};
  return kinds;
}

inline const std::vector<std::string>& data_variants() {
  static const std::vector<std::string> v{"full", "masked", "graph", "symmetric"};
  return v;
}

/// Symmetric graph Laplacian D - W of a random weighted graph.
inline DenseMatrix random_laplacian(std::size_t m, Rng& rng) {
  DenseMatrix w = DenseMatrix::zeros(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (rng.uniform() < 0.5) w(i, j) = w(j, i) = rng.uniform();
  DenseMatrix l = -1.0 * w;
  for (std::size_t i = 0; i < m; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < m; ++j) d += w(i, j);
    l(i, i) = d;
  }
  return l;
}

/// Small random problem with the given data term variant.
inline ProblemSpec random_problem(const std::string& variant, Rng& rng, std::size_t max_dim = 8) {
  const std::size_t m = 2 + rng.below(max_dim - 1);
  const std::size_t n = variant == "symmetric" ? m : 2 + rng.below(max_dim - 1);
  const std::size_t k = 1 + rng.below(4);
  DenseMatrix a = random_normal(m, n, rng, 1.0);
  if (variant == "full") return make_problem(FullData{a}, k);
  if (variant == "masked") {
    std::vector<Entry> e;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (rng.uniform() < 0.6) e.push_back({i, j, a(i, j)});
    if (e.empty()) e.push_back({0, 0, a(0, 0)});
    return make_problem(MaskedData{MaskedMatrix(m, n, std::move(e))}, k);
  }
  if (variant == "graph") return make_problem(GraphData{a, random_laplacian(m, rng), rng.uniform(0.1, 2.0)}, k);
  if (variant == "symmetric") return make_problem(SymData{a, rng.uniform(0.1, 2.0)}, k);
  throw std::invalid_argument("unknown data variant '" + variant + "'");
}

/// Random subproblem instance of the given regularizer kind, at most 8x6 with K <= 5.
inline ProxInput random_prox_instance(const std::string& kind, Rng& rng) {
  const std::size_t m = 1 + rng.below(8), n = 1 + rng.below(6), k = 1 + rng.below(5);
  const double scale = std::pow(10.0, rng.uniform(-1.0, 1.0));
  ProxInput in;
  in.p_mat = random_normal(m, k, rng, scale);
  in.q_mat = random_normal(k, n, rng, scale);
  in.step = rng.uniform(0.05, 1.0);
  in.kernel = KernelSpec{3.0, rng.uniform(0.0, 5.0), 0.0, 0.0};
  const double w = rng.uniform(0.0, 1.0) * scale;
  auto sp = [&](std::size_t size) { return std::optional<std::size_t>(1 + rng.below(size)); };
  if (kind == "none") {
  } else if (kind == "l2") {
    in.reg_u.l2 = rng.uniform(0.0, 1.0);
    in.reg_z.l2 = rng.uniform(0.0, 1.0);
  } else if (kind == "l1") {
    in.reg_u.l1 = in.reg_z.l1 = w;
  } else if (kind == "nonneg") {
    in.reg_u.nonneg = in.reg_z.nonneg = true;
  } else if (kind == "nonneg-l1") {
    in.reg_u.nonneg = in.reg_z.nonneg = true;
    in.reg_u.l1 = in.reg_z.l1 = w;
  } else if (kind == "nuclear") {
    in.reg_u.nuclear = in.reg_z.nuclear = w;
  } else if (kind == "sparsity") {
    in.reg_u.sparsity = sp(m * k);
    in.reg_z.sparsity = sp(k * n);
  } else if (kind == "nonneg-sparsity") {
    in.reg_u.nonneg = in.reg_z.nonneg = true;
    in.reg_u.sparsity = sp(m * k);
    in.reg_z.sparsity = sp(k * n);
  } else if (kind == "graph-reg") {
    // Graph-regularised NMF: c2 = |A| + mu0 |L|_F, nonnegative factors, L2 in f.
    const DenseMatrix lap = random_laplacian(m, rng);
    in.kernel.c2 += rng.uniform(0.1, 2.0) * fro_norm(lap);
    in.reg_u.nonneg = in.reg_z.nonneg = true;
    in.reg_u.l2 = in.reg_z.l2 = rng.uniform(0.0, 0.5);
  } else if (kind == "symmetric") {
    in.kernel.c2 += 2.0 * rng.uniform(0.1, 2.0);
    in.reg_u.nonneg = in.reg_z.nonneg = true;
  } else if (kind == "mixed-l2-l1") {
    const double lam0 = rng.uniform(0.05, 1.0);
    in.kernel.aug_z = lam0;
    in.reg_u.l2 = lam0;
    in.reg_z.l1 = w;
  } else {
    throw std::invalid_argument("unknown regularizer kind '" + kind + "'");
  }
  return in;
}

inline CheckReport prox_oracle_suite(const std::string& kind, std::size_t n, std::uint64_t seed, double tol = 1e-8) {
  CheckReport r{"prox-oracle/" + kind, n, 0.0, tol, true, ""};
  Rng rng(seed);
  for (std::size_t s = 0; s < n; ++s) {
    const ProxInput in = random_prox_instance(kind, rng);
    const double a = subproblem_objective(in, bpg_prox(in));
    const double b = subproblem_objective(in, subproblem_oracle(in));
    const double v = std::abs(a - b) / (1.0 + std::abs(b));
    detail::note_violation(r, v, s, "prox " + format_real(a) + " vs oracle " + format_real(b));
  }
  detail::finish(r);
  return r;
}

inline CheckReport cubic_suite(std::size_t n, std::uint64_t seed, double tol = 1e-12) {
  CheckReport r{"cubic-residual", n, 0.0, tol, true, ""};
  Rng rng(seed);
  for (std::size_t s = 0; s < n; ++s) {
    const double sv = rng.uniform() < 0.05 ? 0.0 : std::pow(10.0, rng.uniform(-4.0, 4.0));
    const double c1 = rng.uniform() < 0.05 ? 0.0 : rng.uniform(0.0, 5.0);
    double c2 = rng.uniform() < 0.05 ? 0.0 : std::pow(10.0, rng.uniform(-4.0, 4.0));
    if (c1 * sv == 0.0 && c2 == 0.0) c2 = 1.0;
    const double root = solve_cubic_scale(sv, c1, c2);
    const double res = std::abs(c1 * sv * root * root * root + c2 * root - 1.0) / (1.0 + c2);
    const double v = root >= 0.0 ? res : 1.0;
    detail::note_violation(r, v, s,
                           "s=" + format_real(sv) + " c1=" + format_real(c1) + " c2eff=" + format_real(c2) +
                               " residual " + format_real(res));
  }
  detail::finish(r);
  return r;
}

inline CheckReport quintic_suite(std::size_t n, std::uint64_t seed, double tol = 1e-10) {
  CheckReport r{"quintic-residual", n, 0.0, tol, true, ""};
  Rng rng(seed);
  for (std::size_t s = 0; s < n; ++s) {
    const double c1 = rng.uniform(0.0, 5.0), c2 = rng.uniform(0.0, 5.0), lam0 = rng.uniform(0.0, 3.0);
    const double p = rng.uniform(0.0, 3.0), q = rng.uniform(0.01, 3.0);
    const double r1 = solve_r1_quintic(c1, c2, lam0, p, q);
    const double res = std::abs(quintic_psi(r1, c1, c2, lam0, p, q));
    const double v = r1 >= c2 ? res : 1.0;
    detail::note_violation(r, v, s, "r1=" + format_real(r1) + " residual " + format_real(res));
  }
  detail::finish(r);
  return r;
}

/// Mixed L2-on-U / L1-on-Z subproblem with the augmented kernel at unit
/// step: the cubic closed form (U, Z) = r(-P, S(-Q)) against the same
/// update assembled from the fifth order solver, (U, Z) = (-P, S(-Q)) / r1.
inline CheckReport mixed_parity_suite(std::size_t n, std::uint64_t seed, double tol = 1e-8) {
  CheckReport r{"mixed-cubic-quintic-parity", n, 0.0, tol, true, ""};
  Rng rng(seed);
  for (std::size_t s = 0; s < n; ++s) {
    ProxInput in = random_prox_instance("mixed-l2-l1", rng);
    in.step = 1.0;
    const double lam0 = in.reg_u.l2;
    const DenseMatrix du = -1.0 * in.p_mat;
    const DenseMatrix dz = soft_threshold(-1.0 * in.q_mat, in.step * in.reg_z.l1);
    const double pn = fro_norm(du), qn = fro_norm(dz);
    const FactorPair viaprox = bpg_prox(in);
    FactorPair cubic = FactorPair::zeros(du.rows(), du.cols(), dz.cols());
    FactorPair quint = cubic;
    if (pn + qn > 0.0) {
      const double rc = solve_cubic_scale(pn * pn + qn * qn, in.kernel.c1, in.kernel.c2 + lam0);
      cubic = {rc * du, rc * dz};
      const double r1 = qn > 0.0 ? solve_r1_quintic(in.kernel.c1, in.kernel.c2 + lam0, 0.0, pn, qn)
                                 : solve_r1_quintic(in.kernel.c1, in.kernel.c2 + lam0, 0.0, qn, pn);
      quint = {(1.0 / r1) * du, (1.0 / r1) * dz};
    }
    const double scale = 1.0 + std::sqrt(sq_norm(cubic));
    const double v = std::max(std::sqrt(sq_norm(cubic - quint)), std::sqrt(sq_norm(cubic - viaprox))) / scale;
    detail::note_violation(r, v, s, "max factor difference " + format_real(v));
  }
  detail::finish(r);
  return r;
}

inline CheckReport gradient_suite(const std::string& variant, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const ProblemSpec p = random_problem(variant, rng);
  CheckReport r = grad_check(p, n, seed + 1);
  r.name = "gradients/" + variant;
  return r;
}

inline CheckReport lsmad_suite(const std::string& variant, std::size_t n, std::uint64_t seed, double L = 1.0) {
  Rng rng(seed);
  const ProblemSpec p = random_problem(variant, rng);
  CheckReport r = lsmad_check(p, kernel_for_problem(p), L, n, seed + 1);
  r.name = "lsmad/" + variant;
  return r;
}

inline CheckReport hessian_suite(const std::string& variant, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const ProblemSpec p = random_problem(variant, rng);
  CheckReport r = hessian_bound_check(p, n, seed + 1);
  r.name = "hessian-bound/" + variant;
  return r;
}

/// Re-checks every accepted CoCaIn iteration on p: the three certificates,
/// monotone tau and lbar, and the decrease of Psi(x+) + delta D_h(x, x+) / tau.
inline std::vector<CheckReport> cocain_certificates(const ProblemSpec& p, const CoCaInConfig& cfg) {
  const KernelSpec k = kernel_for_problem(p);
  CheckReport cert{"cocain-certificates", 0, 0.0, 1e-10, true, ""};
  CheckReport mono{"cocain-monotone-tau-lbar", 0, 0.0, 0.0, true, ""};
  CheckReport lyap{"cocain-lyapunov", 0, 0.0, 1e-8, true, ""};
  double prev_tau = 0.0, prev_lbar = 0.0, prev_lyap = 0.0;
  std::size_t idx = 0;
  run_cocain(p, cfg, {}, [&](const CocainIterate& it) {
    const CocainSlacks s = cocain_slacks(p, k, cfg, it);
    const double worst = std::max({-s.inertia, -s.lower, -s.upper, 0.0}) + 0.0;
    detail::note_violation(cert, worst, idx,
                           "slacks " + format_real(s.inertia) + ", " + format_real(s.lower) + ", " + format_real(s.upper));
    double mv = 0.0;
    if (idx > 0) mv = std::max({it.tau - prev_tau, prev_lbar - it.lbar, 0.0});
    detail::note_violation(mono, mv, idx, "tau " + format_real(it.tau) + ", lbar " + format_real(it.lbar));
    const double psi = objective(p, it.x_next);
    const double lv = psi + cfg.delta * bregman_distance(k, it.x, it.x_next) / it.tau;
    double dv = 0.0;
    if (idx > 0) dv = std::max(0.0, lv - prev_lyap) / (1.0 + std::abs(prev_lyap));
    detail::note_violation(lyap, dv, idx, "Lyapunov " + format_real(prev_lyap) + " -> " + format_real(lv));
    prev_tau = it.tau;
    prev_lbar = it.lbar;
    prev_lyap = lv;
    ++idx;
  });
  for (CheckReport* r : {&cert, &mono, &lyap}) {
    r->samples = idx;
    detail::finish(*r);
  }
  return {cert, mono, lyap};
}

/// All checks of one named suite with n samples each.
inline std::vector<CheckReport> run_suite(const std::string& suite, std::size_t n, std::uint64_t seed) {
  std::vector<CheckReport> out;
  if (suite == "cubic") {
    out.push_back(cubic_suite(n, seed));
    out.push_back(quintic_suite(n, seed + 1));
    out.push_back(mixed_parity_suite(n, seed + 2));
  } else if (suite == "prox-oracle") {
    std::uint64_t s = seed;
    for (const auto& kind : prox_kinds()) out.push_back(prox_oracle_suite(kind, n, s++));
  } else if (suite == "gradients") {
    std::uint64_t s = seed;
    for (const auto& v : data_variants()) out.push_back(gradient_suite(v, n, s++));
  } else if (suite == "lsmad") {
    std::uint64_t s = seed;
    for (const auto& v : data_variants()) out.push_back(lsmad_suite(v, n, s++));
  } else if (suite == "hessian-bound") {
    std::uint64_t s = seed;
    for (const auto& v : data_variants()) out.push_back(hessian_suite(v, n, s++));
  } else if (suite == "cocain-certs") {
    // Random 6x5, K = 2 problem with L2 weight 0.1, n iterations.
    Rng rng(seed);
    BlockReg l2;
    l2.l2 = 0.1;
    const ProblemSpec p = make_problem(FullData{random_normal(6, 5, rng, 1.0)}, 2, l2, l2);
    CoCaInConfig cfg;
    cfg.base.max_iters = static_cast<int>(n);
    cfg.base.seed = seed;
    out = cocain_certificates(p, cfg);
  } else {
    throw std::invalid_argument("unknown suite '" + suite + "'");
  }
  return out;
}

}  // namespace bpgmf

#endif  // BPGMF_SUITES_HPP_

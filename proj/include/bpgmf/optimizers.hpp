#ifndef BPGMF_OPTIMIZERS_HPP_
#define BPGMF_OPTIMIZERS_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpgmf/kernels.hpp"
#include "bpgmf/linalg.hpp"
#include "bpgmf/matrix.hpp"
#include "bpgmf/problems.hpp"
#include "bpgmf/prox.hpp"
#include "bpgmf/rng.hpp"

namespace bpgmf {

struct TraceRecord {
  std::size_t iter = 0;
  std::optional<double> elapsed_sec;
  double objective = 0.0;
  std::optional<double> step;
  double inertia = 0.0;
  std::optional<double> lbar;
  std::optional<double> lunder;
  std::optional<double> test_rmse;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct Trace {
  std::vector<TraceRecord> records;
  FactorPair final_x;
  std::vector<std::string> warnings;

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Optional per-run extras. Wall-clock timing is off by default so that
/// traces are reproducible value for value.
struct RunHooks {
  bool timing = false;
  std::function<double(const FactorPair&)> test_metric;
};

struct BpgConfig {
  double lam = 0.99;
  int max_iters = 1000;
  std::uint64_t seed = 1;
  double init_lo = 0.0;
  double init_hi = 0.1;
  // Stop once |x+ - x| / step falls below this; 0 runs the full budget.
  double stop_tol = 0.0;

  void validate() const {
    if (!(lam > 0.0) || !std::isfinite(lam)) throw std::invalid_argument("BpgConfig: lam must be > 0");
    if (max_iters < 1) throw std::invalid_argument("BpgConfig: max_iters must be >= 1");
    if (!(init_lo <= init_hi)) throw std::invalid_argument("BpgConfig: init range must satisfy lo <= hi");
    if (!(stop_tol >= 0.0)) throw std::invalid_argument("BpgConfig: stop_tol must be >= 0");
  }
};

struct CoCaInConfig {
  BpgConfig base;  // lam unused; iterations, seed, init range, stop_tol apply
  double delta = 0.99;
  double eps = 1e-4;
  double lbar0 = 1.0 / 128.0;
  double nu = 2.0;
  double lbar_min = 1.0 / 128.0;
  double gamma_shrink = 0.5;
  int max_backtracks = 60;

  void validate() const {
    base.validate();
    if (!(1.0 > delta && delta > eps && eps > 0.0))
      throw std::invalid_argument("CoCaInConfig: need 1 > delta > eps > 0");
    if (!(nu > 1.0)) throw std::invalid_argument("CoCaInConfig: nu must be > 1");
    if (!(lbar0 > 0.0) || !(lbar_min > 0.0))
      throw std::invalid_argument("CoCaInConfig: lbar0 and lbar_min must be > 0");
    if (!(gamma_shrink > 0.0 && gamma_shrink < 1.0))
      throw std::invalid_argument("CoCaInConfig: gamma_shrink must lie in (0, 1)");
    if (max_backtracks < 1) throw std::invalid_argument("CoCaInConfig: max_backtracks must be >= 1");
  }
};

/// Uniform initial factors; U is drawn first, then Z, from one stream.
inline FactorPair init_factors(std::size_t m, std::size_t k, std::size_t n, std::uint64_t seed, double lo,
                               double hi) {
  Rng rng(seed);
  DenseMatrix u = random_uniform(m, k, rng, lo, hi);
  DenseMatrix z = random_uniform(k, n, rng, lo, hi);
  return {std::move(u), std::move(z)};
}

namespace detail {

class Clock {
 public:
  explicit Clock(bool on) : on_(on), start_(std::chrono::steady_clock::now()) {}
  std::optional<double> elapsed() const {
    if (!on_) return std::nullopt;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool on_;
  std::chrono::steady_clock::time_point start_;
};

inline std::optional<double> metric(const RunHooks& hooks, const FactorPair& x) {
  if (!hooks.test_metric) return std::nullopt;
  return hooks.test_metric(x);
}

inline double step_norm(const FactorPair& a, const FactorPair& b) { return std::sqrt(sq_norm(a - b)); }

}  // namespace detail

/// The Bregman proximal step from an anchor y with step size lam.
inline FactorPair bregman_step(const ProblemSpec& p, const KernelSpec& k, double lam, const FactorPair& y) {
  const FactorPair g = smooth_grad(p, y);
  const FactorPair hg = kernel_grad(k, y);
  ProxInput in{lam * g.u - hg.u, lam * g.z - hg.z, k, lam, f_reg(p, true), f_reg(p, false)};
  return bpg_prox(in);
}

inline FactorPair bpg_step(const ProblemSpec& p, const KernelSpec& k, double lam, const FactorPair& x) {
  require_conformable(p, x, "bpg_step");
  return bregman_step(p, k, lam, x);
}

/// Unregularized full-data update written as a scaled gradient step:
/// t = 3(|U|^2 + |Z|^2) + |A|, P = U - lam/t (UZ - A) Z^T, Q = Z - lam/t U^T (UZ - A),
/// then (U, Z) = r t (P, Q) with 3 t^2 (|P|^2 + |Q|^2) r^3 + |A| r - 1 = 0.
inline FactorPair bpg_step_simple(const DenseMatrix& a, double lam, const FactorPair& x) {
  const double na = fro_norm(a);
  const double t = 3.0 * sq_norm(x) + na;
  const DenseMatrix r = gemm(x.u, x.z) - a;
  DenseMatrix pk = x.u;
  axpy(-lam / t, gemm_a_bt(r, x.z), pk);
  DenseMatrix qk = x.z;
  axpy(-lam / t, gemm_at_b(x.u, r), qk);
  const double s = fro_norm_sq(pk) + fro_norm_sq(qk);
  if (s == 0.0) return FactorPair::zeros(x.m(), x.k(), x.n());
  const double scale = solve_cubic_scale(s, 3.0 * t * t, na) * t;
  return {scale * pk, scale * qk};
}

inline Trace run_bpg(const ProblemSpec& p, const BpgConfig& cfg, const RunHooks& hooks = {}) {
  cfg.validate();
  p.validate();
  const KernelSpec k = kernel_for_problem(p);
  Trace tr;
  if (k.sigma() <= 0.0)
    tr.warnings.push_back("kernel is not strongly convex (sigma = 0); BPG runs without that guarantee");
  FactorPair x = init_factors(p.m, p.k, p.n, cfg.seed, cfg.init_lo, cfg.init_hi);
  const detail::Clock clock(hooks.timing);
  for (int it = 1; it <= cfg.max_iters; ++it) {
    FactorPair next = bpg_step(p, k, cfg.lam, x);
    const double move = detail::step_norm(next, x) / cfg.lam;
    x = std::move(next);
    TraceRecord rec;
    rec.iter = static_cast<std::size_t>(it);
    rec.objective = objective(p, x);
    rec.step = cfg.lam;
    rec.test_rmse = detail::metric(hooks, x);
    rec.elapsed_sec = clock.elapsed();
    tr.records.push_back(rec);
    if (cfg.stop_tol > 0.0 && move < cfg.stop_tol) break;
  }
  tr.final_x = std::move(x);
  return tr;
}

// ---------------------------------------------------------------------------
// CoCaIn BPG-MF

struct CocainState {
  FactorPair x;
  FactorPair x_prev;
  double tau_prev = 0.0;
  double lbar_prev = 0.0;
  double lunder_prev = 0.0;
};

/// Everything needed to re-check one accepted iteration.
struct CocainIterate {
  const FactorPair& x_prev;
  const FactorPair& x;
  const FactorPair& y;
  const FactorPair& x_next;
  double tau_prev;
  double tau;
  double gamma;
  double lunder;
  double lbar;
};

struct CocainStepResult {
  CocainState state;
  double gamma = 0.0;
  double tau = 0.0;
  double lunder = 0.0;
  double lbar = 0.0;
};

inline void require_cocain_ready(const ProblemSpec& p, const KernelSpec& k, const CoCaInConfig& cfg) {
  const auto alpha = semiconvexity_alpha(p);
  if (!alpha) {
    throw std::invalid_argument(
        "CoCaIn needs the semi-convexity modulus of f, which is unavailable for the sparsity constraint");
  }
  if (!(k.sigma() > 0.0)) {
    throw std::invalid_argument("CoCaIn needs a strongly convex kernel but sigma = 0 (zero data and no L2 "
                                "augmentation)");
  }
  if (!(cfg.lbar0 > -*alpha / ((1.0 - cfg.delta) * k.sigma())))
    throw std::invalid_argument("CoCaIn: lbar0 must exceed -alpha/((1-delta) sigma)");
}

/// One CoCaIn iteration. With inertial == false the extrapolation is pinned
/// to zero (BPG-MF-WB).
inline CocainStepResult cocain_step(const ProblemSpec& p, const KernelSpec& k, const CoCaInConfig& cfg,
                                    const CocainState& st, bool inertial = true,
                                    const std::function<void(const CocainIterate&)>& observer = {}) {
  // Upper backtracking on the step size from a given point.
  double lbar = std::max(st.lbar_prev, cfg.lbar_min);
  double tau = 0.0;
  FactorPair next;
  auto backtrack = [&](const FactorPair& y) {
    tau = std::min(st.tau_prev, 1.0 / lbar);
    next = bregman_step(p, k, tau, y);
    int doublings = 0;
    while (dg_bregman(p, next, y) > lbar * bregman_distance(k, next, y)) {
      if (++doublings > cfg.max_backtracks)
        throw std::runtime_error("CoCaIn: upper backtracking exceeded " + std::to_string(cfg.max_backtracks) +
                                 " scalings");
      lbar *= cfg.nu;
      tau = std::min(st.tau_prev, 1.0 / lbar);
      next = bregman_step(p, k, tau, y);
    }
  };

  // Inertia: shrink gamma from the Euclidean bound until the inertia
  // condition holds with the tightest lower constant at y. If the step then
  // shrinks, gamma must also pass the condition with tau_{k-1} / tau_k in
  // place of 1, which keeps Psi(x+) + delta D_h(x, x+) / tau decreasing.
  double gamma = 0.0;
  double lunder = 0.0;
  FactorPair y = st.x;
  bool accepted = false;
  if (inertial && !(st.x == st.x_prev)) {
    const double lhs = (cfg.delta - cfg.eps) * bregman_distance(k, st.x_prev, st.x);
    double cand = std::sqrt((cfg.delta - cfg.eps) / (1.0 + st.tau_prev * st.lunder_prev));
    for (int i = 0; i < cfg.max_backtracks && !accepted; ++i, cand *= cfg.gamma_shrink) {
      FactorPair yc = extrapolate(st.x, st.x_prev, cand);
      const double dh = bregman_distance(k, st.x, yc);
      const double lu = dh > 0.0 ? std::max(0.0, -dg_bregman(p, st.x, yc) / dh) : 0.0;
      if (!(lhs >= (1.0 + lu * st.tau_prev) * dh)) continue;
      backtrack(yc);
      if (tau < st.tau_prev && !(lhs >= (st.tau_prev / tau + lu * st.tau_prev) * dh)) continue;
      gamma = cand;
      lunder = lu;
      y = std::move(yc);
      accepted = true;
    }
  }
  if (!accepted) backtrack(y);
  if (observer) observer(CocainIterate{st.x_prev, st.x, y, next, st.tau_prev, tau, gamma, lunder, lbar});

  CocainStepResult out;
  out.gamma = gamma;
  out.tau = tau;
  out.lunder = lunder;
  out.lbar = lbar;
  out.state.x_prev = st.x;
  out.state.x = std::move(next);
  out.state.tau_prev = tau;
  out.state.lbar_prev = lbar;
  out.state.lunder_prev = lunder;
  return out;
}

namespace detail {

inline Trace run_cocain_impl(const ProblemSpec& p, const CoCaInConfig& cfg, bool inertial, const RunHooks& hooks,
                             const std::function<void(const CocainIterate&)>& observer) {
  cfg.validate();
  p.validate();
  const KernelSpec k = kernel_for_problem(p);
  require_cocain_ready(p, k, cfg);
  const BpgConfig& b = cfg.base;
  CocainState st;
  st.x = init_factors(p.m, p.k, p.n, b.seed, b.init_lo, b.init_hi);
  st.x_prev = st.x;
  st.lbar_prev = cfg.lbar0;
  st.tau_prev = 1.0 / cfg.lbar0;
  Trace tr;
  const Clock clock(hooks.timing);
  for (int it = 1; it <= b.max_iters; ++it) {
    CocainStepResult res = cocain_step(p, k, cfg, st, inertial, observer);
    const double move = step_norm(res.state.x, st.x) / res.tau;
    st = std::move(res.state);
    TraceRecord rec;
    rec.iter = static_cast<std::size_t>(it);
    rec.objective = objective(p, st.x);
    rec.step = res.tau;
    rec.inertia = res.gamma;
    rec.lbar = res.lbar;
    rec.lunder = res.lunder;
    rec.test_rmse = metric(hooks, st.x);
    rec.elapsed_sec = clock.elapsed();
    tr.records.push_back(rec);
    if (b.stop_tol > 0.0 && move < b.stop_tol) break;
  }
  tr.final_x = std::move(st.x);
  return tr;
}

}  // namespace detail

inline Trace run_cocain(const ProblemSpec& p, const CoCaInConfig& cfg, const RunHooks& hooks = {},
                        const std::function<void(const CocainIterate&)>& observer = {}) {
  return detail::run_cocain_impl(p, cfg, true, hooks, observer);
}

inline Trace run_bpg_wb(const ProblemSpec& p, const CoCaInConfig& cfg, const RunHooks& hooks = {},
                        const std::function<void(const CocainIterate&)>& observer = {}) {
  return detail::run_cocain_impl(p, cfg, false, hooks, observer);
}

// ---------------------------------------------------------------------------
// PALM / iPALM

enum class BlockOrder { UFirst, ZFirst };

struct PalmConfig {
  BpgConfig base;  // lam unused
  double beta = 0.0;
  BlockOrder order = BlockOrder::UFirst;
  double lipschitz_floor = 1e-12;

  void validate() const {
    base.validate();
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("PalmConfig: beta must lie in [0, 1)");
    if (!(lipschitz_floor > 0.0)) throw std::invalid_argument("PalmConfig: lipschitz_floor must be > 0");
  }
};

/// Block Lipschitz constants of grad g: |Z Z^T|_2 (+ graph and symmetric
/// terms) for U, |U^T U|_2 (+ symmetric term) for Z.
inline double lipschitz_u(const ProblemSpec& p, const DenseMatrix& z) {
  const double s = spectral_norm(z).value;
  double l = s * s;
  if (const auto* g = std::get_if<GraphData>(&p.data))
    l += g->mu0 * spectral_norm(0.5 * (g->lap + transpose(g->lap))).value;
  if (const auto* sd = std::get_if<SymData>(&p.data)) l += sd->lam0;
  if (p.l2_in_smooth) l += p.reg_u.l2;
  return l;
}

inline double lipschitz_z(const ProblemSpec& p, const DenseMatrix& u) {
  const double s = spectral_norm(u).value;
  double l = s * s;
  if (const auto* sd = std::get_if<SymData>(&p.data)) l += sd->lam0;
  if (p.l2_in_smooth) l += p.reg_z.l2;
  return l;
}

/// Euclidean prox of t*R at v.
inline DenseMatrix euclid_prox(const DenseMatrix& v, const BlockReg& r, double t) {
  DenseMatrix out = block_direction(v, r, t);
  if (r.l2 > 0.0) out = (1.0 / (1.0 + t * r.l2)) * out;
  return out;
}

/// One alternating sweep. Each block is extrapolated by beta from its
/// previous value, and the gradient step is taken at that point.
inline FactorPair palm_step(const ProblemSpec& p, const FactorPair& x, const FactorPair& x_prev, double beta,
                            BlockOrder order = BlockOrder::UFirst, double floor = 1e-12) {
  require_conformable(p, x, "palm_step");
  FactorPair cur = x;
  auto update_u = [&] {
    FactorPair y{extrapolate(x.u, x_prev.u, beta), cur.z};
    const double l = std::max(lipschitz_u(p, cur.z), floor);
    DenseMatrix v = y.u;
    axpy(-1.0 / l, smooth_grad(p, y).u, v);
    cur.u = euclid_prox(v, f_reg(p, true), 1.0 / l);
  };
  auto update_z = [&] {
    FactorPair y{cur.u, extrapolate(x.z, x_prev.z, beta)};
    const double l = std::max(lipschitz_z(p, cur.u), floor);
    DenseMatrix v = y.z;
    axpy(-1.0 / l, smooth_grad(p, y).z, v);
    cur.z = euclid_prox(v, f_reg(p, false), 1.0 / l);
  };
  if (order == BlockOrder::UFirst) {
    update_u();
    update_z();
  } else {
    update_z();
    update_u();
  }
  return cur;
}

inline Trace run_ipalm(const ProblemSpec& p, const PalmConfig& cfg, const RunHooks& hooks = {}) {
  cfg.validate();
  p.validate();
  const BpgConfig& b = cfg.base;
  FactorPair x = init_factors(p.m, p.k, p.n, b.seed, b.init_lo, b.init_hi);
  FactorPair x_prev = x;
  Trace tr;
  const detail::Clock clock(hooks.timing);
  for (int it = 1; it <= b.max_iters; ++it) {
    FactorPair next = palm_step(p, x, x_prev, cfg.beta, cfg.order, cfg.lipschitz_floor);
    const double move = detail::step_norm(next, x);
    x_prev = std::move(x);
    x = std::move(next);
    TraceRecord rec;
    rec.iter = static_cast<std::size_t>(it);
    rec.objective = objective(p, x);
    rec.inertia = cfg.beta;
    rec.test_rmse = detail::metric(hooks, x);
    rec.elapsed_sec = clock.elapsed();
    tr.records.push_back(rec);
    if (b.stop_tol > 0.0 && move < b.stop_tol) break;
  }
  tr.final_x = std::move(x);
  return tr;
}

inline Trace run_palm(const ProblemSpec& p, PalmConfig cfg, const RunHooks& hooks = {}) {
  cfg.beta = 0.0;
  return run_ipalm(p, cfg, hooks);
}

}  // namespace bpgmf

#endif  // BPGMF_OPTIMIZERS_HPP_

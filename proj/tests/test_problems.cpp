#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "bpgmf/oracle.hpp"
#include "bpgmf/problems.hpp"
#include "bpgmf/suites.hpp"

using namespace bpgmf;

namespace {

FactorPair random_point(const ProblemSpec& p, Rng& rng, double scale = 1.0) {
  return {random_normal(p.m, p.k, rng, scale), random_normal(p.k, p.n, rng, scale)};
}

// D_g from its definition.
double naive_dg(const ProblemSpec& p, const FactorPair& x, const FactorPair& y) {
  return smooth_value(p, x) - smooth_value(p, y) - inner(smooth_grad(p, y), x - y);
}

}  // namespace

TEST(Problems, SmoothValueExamples) {
  Rng rng(1);
  const DenseMatrix u = random_normal(4, 2, rng), z = random_normal(2, 3, rng);
  const ProblemSpec exact = make_problem(FullData{gemm(u, z)}, 2);
  EXPECT_NEAR(smooth_value(exact, {u, z}), 0.0, 1e-24);
  const DenseMatrix a = random_normal(4, 3, rng);
  const ProblemSpec p = make_problem(FullData{a}, 2);
  EXPECT_DOUBLE_EQ(smooth_value(p, {DenseMatrix::zeros(4, 2), z}), 0.5 * fro_norm_sq(a));
  EXPECT_DOUBLE_EQ(smooth_value(p, {u, DenseMatrix::zeros(2, 3)}), 0.5 * fro_norm_sq(a));
  const ProblemSpec m = make_problem(MaskedData{MaskedMatrix(1, 1, {{0, 0, 2.0}})}, 1);
  EXPECT_EQ(smooth_value(m, {DenseMatrix{{1}}, DenseMatrix{{1}}}), 0.5);
}

TEST(Problems, GradientZeroBlocks) {
  Rng rng(2);
  const ProblemSpec p = make_problem(FullData{random_normal(4, 3, rng)}, 2);
  const FactorPair g1 = smooth_grad(p, {random_normal(4, 2, rng), DenseMatrix::zeros(2, 3)});
  EXPECT_EQ(fro_norm(g1.u), 0.0);
  const FactorPair g2 = smooth_grad(p, {DenseMatrix::zeros(4, 2), random_normal(2, 3, rng)});
  EXPECT_EQ(fro_norm(g2.z), 0.0);
}

TEST(Problems, GradientsMatchFiniteDifferences) {
  std::uint64_t seed = 10;
  for (const auto& v : data_variants()) {
    const CheckReport r = gradient_suite(v, 100, seed++);
    EXPECT_TRUE(r.passed) << r.name << ": " << r.details;
  }
}

TEST(Problems, GradientWithL2InSmooth) {
  Rng rng(3);
  BlockReg ru, rz;
  ru.l2 = 0.3;
  rz.l2 = 0.7;
  const ProblemSpec p = make_problem(FullData{random_normal(5, 4, rng)}, 2, ru, rz, true);
  const CheckReport r = grad_check(p, 100, 4);
  EXPECT_TRUE(r.passed) << r.details;
  // and the L2 terms are then not part of f
  const FactorPair x = random_point(p, rng);
  EXPECT_EQ(nonsmooth_value(p, x), 0.0);
}

TEST(Problems, SymmetricGradientClosedForm) {
  // grad_Z = lam0 (Z - U^T) - U^T (A - U Z)
  Rng rng(5);
  const DenseMatrix a = random_normal(4, 4, rng);
  const ProblemSpec p = make_problem(SymData{a, 0.7}, 2);
  const FactorPair x = random_point(p, rng);
  const FactorPair g = smooth_grad(p, x);
  const DenseMatrix r = a - gemm(x.u, x.z);
  const DenseMatrix want_z = 0.7 * (x.z - transpose(x.u)) - gemm_at_b(x.u, r);
  const DenseMatrix want_u = 0.7 * (x.u - transpose(x.z)) - gemm_a_bt(r, x.z);
  EXPECT_LT(fro_norm(g.z - want_z), 1e-12);
  EXPECT_LT(fro_norm(g.u - want_u), 1e-12);
}

TEST(Problems, MaskedIgnoresUnobservedEntries) {
  Rng rng(6);
  DenseMatrix a1 = random_normal(4, 3, rng);
  DenseMatrix a2 = a1;
  std::vector<Entry> e1, e2;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if ((i + j) % 2 == 0) {
        e1.push_back({i, j, a1(i, j)});
      } else {
        a2(i, j) += 10.0;
      }
      if ((i + j) % 2 == 0) e2.push_back({i, j, a2(i, j)});
    }
  }
  const ProblemSpec p1 = make_problem(MaskedData{MaskedMatrix(4, 3, e1)}, 2);
  const ProblemSpec p2 = make_problem(MaskedData{MaskedMatrix(4, 3, e2)}, 2);
  const FactorPair x = random_point(p1, rng);
  EXPECT_EQ(smooth_value(p1, x), smooth_value(p2, x));
  EXPECT_EQ(smooth_grad(p1, x), smooth_grad(p2, x));
  // value over the mask only
  double v = 0.0;
  for (const Entry& en : e1) v += 0.5 * std::pow(en.value - predict(x, en.row, en.col), 2);
  EXPECT_NEAR(smooth_value(p1, x), v, 1e-14);
  // rows and columns with no observation get zero gradient
  const ProblemSpec q = make_problem(MaskedData{MaskedMatrix(4, 3, {{0, 0, 1.0}})}, 2);
  const FactorPair g = smooth_grad(q, x);
  for (std::size_t c = 0; c < 2; ++c) {
    EXPECT_EQ(g.u(1, c), 0.0);
    EXPECT_EQ(g.u(3, c), 0.0);
    EXPECT_EQ(g.z(c, 1), 0.0);
    EXPECT_EQ(g.z(c, 2), 0.0);
  }
}

TEST(Problems, NonsmoothExamples) {
  ProblemSpec none = make_problem(FullData{DenseMatrix::zeros(1, 1)}, 2);
  EXPECT_EQ(nonsmooth_value(none, {DenseMatrix{{1, -2}}, DenseMatrix{{0}, {0}}}), 0.0);
  BlockReg l1;
  l1.l1 = 0.1;
  const ProblemSpec p = make_problem(FullData{DenseMatrix::zeros(1, 1)}, 2, l1, l1);
  EXPECT_NEAR(nonsmooth_value(p, {DenseMatrix{{1, -2}}, DenseMatrix{{0}, {0}}}), 0.3, 1e-15);
  BlockReg nn;
  nn.nonneg = true;
  const ProblemSpec q = make_problem(FullData{DenseMatrix::zeros(1, 1)}, 2, nn, {});
  EXPECT_EQ(nonsmooth_value(q, {DenseMatrix{{1, -2}}, DenseMatrix{{0}, {0}}}),
            std::numeric_limits<double>::infinity());
  BlockReg sp;
  sp.sparsity = 1;
  const ProblemSpec s = make_problem(FullData{DenseMatrix::zeros(1, 1)}, 2, sp, {});
  EXPECT_EQ(nonsmooth_value(s, {DenseMatrix{{1, -2}}, DenseMatrix{{0}, {0}}}),
            std::numeric_limits<double>::infinity());
  EXPECT_EQ(nonsmooth_value(s, {DenseMatrix{{0, -2}}, DenseMatrix{{0}, {0}}}), 0.0);
}

TEST(Problems, ObjectiveCompositions) {
  Rng rng(7);
  const DenseMatrix a = random_normal(3, 3, rng);
  BlockReg l2;
  l2.l2 = 0.2;
  BlockReg nuc;
  nuc.nuclear = 0.5;
  const ProblemSpec p1 = make_problem(FullData{a}, 2, l2, l2);
  const FactorPair x = random_point(p1, rng);
  EXPECT_DOUBLE_EQ(objective(p1, x), smooth_value(p1, x) + 0.1 * sq_norm(x));
  const ProblemSpec p2 = make_problem(FullData{a}, 2, nuc, {});
  EXPECT_NEAR(objective(p2, x), smooth_value(p2, x) + 0.5 * nuclear_norm(x.u), 1e-14);
  const ProblemSpec p3 = make_problem(SymData{a, 1.0}, 2);
  EXPECT_NEAR(objective(p3, x), 0.5 * fro_norm_sq(a - gemm(x.u, x.z)) + 0.5 * fro_norm_sq(x.u - transpose(x.z)),
              1e-13);
}

TEST(Problems, DgExamples) {
  Rng rng(8);
  const DenseMatrix a = random_normal(5, 4, rng);
  const ProblemSpec p = make_problem(FullData{a}, 3);
  const FactorPair y = random_point(p, rng);
  EXPECT_EQ(dg_bregman(p, y, y), 0.0);
  // differs only in U: g is quadratic in U so D_g = |(Ux - Uy) Z|^2 / 2
  const FactorPair x{random_normal(5, 3, rng), y.z};
  EXPECT_NEAR(dg_bregman(p, x, y), 0.5 * fro_norm_sq(gemm(x.u - y.u, y.z)), 1e-12);
}

TEST(Problems, DgMatchesDefinitionAllVariants) {
  std::uint64_t seed = 20;
  for (const auto& v : data_variants()) {
    Rng rng(seed++);
    const ProblemSpec p = random_problem(v, rng);
    for (int t = 0; t < 50; ++t) {
      const FactorPair x = random_point(p, rng), y = random_point(p, rng);
      const double scale = 1.0 + std::abs(smooth_value(p, x)) + std::abs(smooth_value(p, y));
      EXPECT_NEAR(dg_bregman(p, x, y), naive_dg(p, x, y), 1e-11 * scale) << v;
    }
  }
}

TEST(Problems, DgQuadraticTaylorBound) {
  // |D_g(x, y)| <= C |x - y|^2 for y near x, C from the Hessian bound
  Rng rng(9);
  const ProblemSpec p = random_problem("full", rng);
  const double c2 = kernel_for_problem(p).c2;
  for (int t = 0; t < 100; ++t) {
    const FactorPair x = random_point(p, rng);
    const FactorPair d = random_point(p, rng, 1e-3);
    const FactorPair y = x + d;
    const double c = 3.0 * (sq_norm(x) + sq_norm(y)) + c2 + 1.0;
    EXPECT_LE(std::abs(dg_bregman(p, y, x)), c * sq_norm(d));
  }
}

TEST(Problems, KernelForProblemExamples) {
  DenseMatrix a = DenseMatrix::zeros(2, 2);
  a(0, 0) = 7.0;
  const KernelSpec k = kernel_for_problem(make_problem(FullData{a}, 1));
  EXPECT_EQ(k.c1, 3.0);
  EXPECT_EQ(k.c2, 7.0);
  EXPECT_EQ(k.aug_u, 0.0);
  EXPECT_EQ(k.aug_z, 0.0);
  DenseMatrix lap = DenseMatrix::zeros(2, 2);
  lap(0, 0) = 1.5;
  EXPECT_DOUBLE_EQ(kernel_for_problem(make_problem(GraphData{a, lap, 2.0}, 1)).c2, 10.0);
  const MaskedMatrix one(3, 3, {{1, 1, 4.0}});
  EXPECT_EQ(kernel_for_problem(make_problem(MaskedData{one}, 1)).c2, 4.0);
  EXPECT_DOUBLE_EQ(kernel_for_problem(make_problem(SymData{a, 0.5}, 1)).c2, 8.0);
  BlockReg l2u;
  l2u.l2 = 0.3;
  const KernelSpec mixed = kernel_for_problem(make_problem(FullData{a}, 1, l2u, {}));
  EXPECT_EQ(mixed.aug_z, 0.3);
  EXPECT_EQ(mixed.aug_u, 0.0);
  const KernelSpec both = kernel_for_problem(make_problem(FullData{a}, 1, l2u, l2u));
  EXPECT_EQ(both.aug_u + both.aug_z, 0.0);
  const KernelSpec in_g = kernel_for_problem(make_problem(FullData{a}, 1, l2u, l2u, true));
  EXPECT_DOUBLE_EQ(in_g.c2, 7.3);
}

TEST(Problems, LsmadHoldsForMatchedKernels) {
  std::uint64_t seed = 30;
  for (const auto& v : data_variants()) {
    const CheckReport r = lsmad_suite(v, 1000, seed++);
    EXPECT_TRUE(r.passed) << r.name << ": " << r.details;
  }
}

TEST(Problems, LsmadFailsWithZeroL) {
  Rng rng(31);
  const ProblemSpec p = make_problem(FullData{random_normal(4, 4, rng)}, 2);
  const CheckReport r = lsmad_check(p, kernel_for_problem(p), 0.0, 200, 32);
  EXPECT_FALSE(r.passed);
}

TEST(Problems, LsmadTrivialForZeroData) {
  const ProblemSpec p = make_problem(FullData{DenseMatrix::zeros(3, 3)}, 2);
  EXPECT_TRUE(lsmad_check(p, kernel_for_problem(p), 1.0, 200, 33).passed);
}

TEST(Problems, HessianBound) {
  std::uint64_t seed = 40;
  for (const auto& v : data_variants()) {
    const CheckReport r = hessian_suite(v, 200, seed++);
    EXPECT_TRUE(r.passed) << r.name << ": " << r.details;
  }
}

TEST(Problems, HessianAtOriginIsCrossTerm) {
  // g(tH) = |A - t^2 H1 H2|^2 / 2 has second derivative -2 <A, H1 H2> at 0.
  Rng rng(41);
  const DenseMatrix a = random_normal(3, 4, rng);
  const ProblemSpec p = make_problem(FullData{a}, 2);
  const FactorPair d = random_point(p, rng);
  const FactorPair zero = FactorPair::zeros(3, 2, 4);
  const double second = detail::second_directional([&](const FactorPair& y) { return smooth_value(p, y); }, zero, d, 0.1);
  EXPECT_NEAR(second, -2.0 * fro_inner(a, gemm(d.u, d.z)), 1e-9);
  EXPECT_LE(second, fro_norm(a) * sq_norm(d) + 1e-12);
  EXPECT_NEAR(detail::second_directional([&](const FactorPair& y) { return smooth_value(p, y); }, zero,
                                         FactorPair::zeros(3, 2, 4), 0.1),
              0.0, 1e-10);
}

TEST(Problems, AlphaMetadata) {
  const DenseMatrix a = DenseMatrix::zeros(2, 2);
  EXPECT_EQ(semiconvexity_alpha(make_problem(FullData{a}, 1)), 0.0);
  BlockReg sp;
  sp.sparsity = 1;
  EXPECT_FALSE(semiconvexity_alpha(make_problem(FullData{a}, 1, sp, {})).has_value());
}

TEST(Problems, Validation) {
  const DenseMatrix a = DenseMatrix::zeros(2, 3);
  EXPECT_THROW(make_problem(FullData{a}, 0), std::invalid_argument);
  EXPECT_THROW(make_problem(SymData{a, 1.0}, 1), std::invalid_argument);
  EXPECT_THROW(make_problem(GraphData{a, DenseMatrix::zeros(3, 3), 1.0}, 1), std::invalid_argument);
  BlockReg bad;
  bad.nuclear = 0.1;
  bad.nonneg = true;
  EXPECT_THROW(make_problem(FullData{a}, 1, bad, {}), std::invalid_argument);
  BlockReg two;
  two.l1 = 0.1;
  two.sparsity = 2;
  EXPECT_THROW(make_problem(FullData{a}, 1, {}, two), std::invalid_argument);
  BlockReg neg;
  neg.l2 = -1.0;
  EXPECT_THROW(make_problem(FullData{a}, 1, neg, {}), std::invalid_argument);
  const ProblemSpec p = make_problem(FullData{a}, 2);
  EXPECT_THROW(smooth_value(p, FactorPair::zeros(2, 1, 3)), ShapeError);
}

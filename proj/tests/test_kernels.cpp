#include <gtest/gtest.h>

#include <cmath>

#include "bpgmf/kernels.hpp"
#include "bpgmf/rng.hpp"

using namespace bpgmf;

namespace {

FactorPair random_pair(Rng& rng, double scale = 1.0) {
  const std::size_t m = 1 + rng.below(5), k = 1 + rng.below(3), n = 1 + rng.below(5);
  return {random_normal(m, k, rng, scale), random_normal(k, n, rng, scale)};
}

FactorPair random_like(const FactorPair& x, Rng& rng, double scale = 1.0) {
  return {random_normal(x.m(), x.k(), rng, scale), random_normal(x.k(), x.n(), rng, scale)};
}

KernelSpec random_kernel(Rng& rng) {
  return {rng.uniform(0.0, 4.0), rng.uniform(0.0, 4.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
}

// D_h straight from its definition.
double naive_bregman(const KernelSpec& k, const FactorPair& x, const FactorPair& y) {
  return kernel_value(k, x) - kernel_value(k, y) - inner(kernel_grad(k, y), x - y);
}

}  // namespace

TEST(Kernel, ValueExamples) {
  const FactorPair x{DenseMatrix{{1}}, DenseMatrix{{1}}};
  EXPECT_DOUBLE_EQ(kernel_value({3, 2, 0, 0}, x), 5.0);
  EXPECT_EQ(kernel_value({3, 2, 0.5, 0.5}, FactorPair::zeros(2, 2, 3)), 0.0);
  Rng rng(1);
  const FactorPair y = random_pair(rng);
  EXPECT_DOUBLE_EQ(kernel_value({0, 1, 0, 0}, y), 0.5 * sq_norm(y));
}

TEST(Kernel, GradExamples) {
  EXPECT_EQ(kernel_grad({3, 2, 1, 1}, FactorPair::zeros(2, 1, 2)), FactorPair::zeros(2, 1, 2));
  Rng rng(2);
  const FactorPair y = random_pair(rng);
  EXPECT_EQ(kernel_grad({0, 1, 0, 0}, y), y);
}

TEST(Kernel, GradMatchesFiniteDifferences) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const KernelSpec k = random_kernel(rng);
    const FactorPair x = random_pair(rng);
    const FactorPair g = kernel_grad(k, x);
    const double h = 1e-5 * (1.0 + std::sqrt(sq_norm(x)));
    double worst = 0.0, gmax = 0.0;
    for (int blk = 0; blk < 2; ++blk) {
      const DenseMatrix& gm = blk == 0 ? g.u : g.z;
      const std::size_t sz = blk == 0 ? x.u.size() : x.z.size();
      for (std::size_t i = 0; i < sz; ++i) {
        FactorPair xp = x, xm = x;
        (blk == 0 ? xp.u : xp.z).values()[i] += h;
        (blk == 0 ? xm.u : xm.z).values()[i] -= h;
        const double fd = (kernel_value(k, xp) - kernel_value(k, xm)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - gm.values()[i]));
        gmax = std::max(gmax, std::abs(gm.values()[i]));
      }
    }
    EXPECT_LE(worst / (1.0 + gmax), 1e-5);
  }
}

TEST(Kernel, BregmanExamples) {
  Rng rng(4);
  const FactorPair x = random_pair(rng), y = random_like(x, rng);
  EXPECT_EQ(bregman_distance({3, 2, 1, 1}, x, x), 0.0);
  EXPECT_NEAR(bregman_distance({0, 1, 0, 0}, x, y),
              0.5 * fro_norm_sq(x.u - y.u) + 0.5 * fro_norm_sq(x.z - y.z), 1e-12 * (1.0 + sq_norm(x - y)));
  const double h1 = 0.25 * sq_norm(x) * sq_norm(x);
  const FactorPair zero = FactorPair::zeros(x.m(), x.k(), x.n());
  EXPECT_NEAR(bregman_distance({3, 0, 0, 0}, x, zero), 3.0 * h1, 1e-12 * (1.0 + h1));
}

TEST(Kernel, StableFormMatchesDefinition) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const KernelSpec k = random_kernel(rng);
    const FactorPair x = random_pair(rng), y = random_like(x, rng);
    const double a = bregman_distance(k, x, y), b = naive_bregman(k, x, y);
    EXPECT_NEAR(a, b, 1e-10 * (1.0 + kernel_value(k, x) + kernel_value(k, y)));
  }
}

TEST(Kernel, StableFormKeepsTinyDistancesNonnegative) {
  Rng rng(6);
  const KernelSpec k{3, 1, 0, 0};
  const FactorPair x = random_pair(rng, 10.0);
  const FactorPair y = x + random_like(x, rng, 1e-9);
  const double d = bregman_distance(k, x, y);
  EXPECT_GT(d, 0.0);
  // Euclidean part alone is a lower bound.
  EXPECT_GE(d, 0.5 * sq_norm(x - y) * (1.0 - 1e-12));
}

TEST(Kernel, StrongConvexity) {
  Rng rng(7);
  for (int t = 0; t < 500; ++t) {
    const KernelSpec k = random_kernel(rng);
    const FactorPair x = random_pair(rng, 2.0), y = random_like(x, rng, 2.0);
    EXPECT_GE(bregman_distance(k, x, y), 0.5 * k.sigma() * sq_norm(x - y) - 1e-10);
  }
}

TEST(Kernel, SymmetrisedDistanceNonnegative) {
  Rng rng(8);
  for (int t = 0; t < 500; ++t) {
    const KernelSpec k = random_kernel(rng);
    const FactorPair x = random_pair(rng, 3.0), y = random_like(x, rng, 3.0);
    const double dxy = bregman_distance(k, x, y), dyx = bregman_distance(k, y, x);
    const double tol = 1e-12 * (1.0 + std::abs(kernel_value(k, x)) + std::abs(kernel_value(k, y)));
    EXPECT_GE(dxy, -tol);
    EXPECT_GE(dyx, -tol);
    EXPECT_GE(dxy + dyx, 0.0);
  }
}

TEST(Kernel, SigmaAndValidation) {
  EXPECT_EQ((KernelSpec{3, 2, 0.5, 0.1}).sigma(), 2.1);
  EXPECT_EQ((KernelSpec{3, 0, 0.5, 0.0}).sigma(), 0.0);
  EXPECT_THROW((KernelSpec{-1, 0, 0, 0}).validate(), std::invalid_argument);
  EXPECT_THROW((KernelSpec{3, std::nan(""), 0, 0}).validate(), std::invalid_argument);
  EXPECT_NO_THROW((KernelSpec{3, 1, 0, 0}).validate());
}

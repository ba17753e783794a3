#ifndef BPGMF_RNG_HPP_
#define BPGMF_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>

#include "bpgmf/matrix.hpp"

namespace bpgmf {

/// Portable random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the C++ standard; the conversions to doubles and
/// bounded integers are done here because the standard distributions are
/// implementation defined. Same seed gives the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    const double v = lo + (hi - lo) * uniform();
    return v < hi ? v : std::nextafter(hi, lo);
  }

  /// Uniform integer in [0, bound), rejection sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = 0;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  /// Standard normal via Box-Muller (both outputs are not cached, so the
  /// stream position depends only on the number of calls).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

inline DenseMatrix random_uniform(std::size_t rows, std::size_t cols, Rng& rng, double lo,
                                  double hi) {
  DenseMatrix m = DenseMatrix::zeros(rows, cols);
  for (double& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

inline DenseMatrix random_normal(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  DenseMatrix m = DenseMatrix::zeros(rows, cols);
  for (double& v : m.values()) v = scale * rng.normal();
  return m;
}

}  // namespace bpgmf

#endif  // BPGMF_RNG_HPP_

#pragma once

#include <complex>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace qdlab {

using Complex = std::complex<double>;

constexpr double kPi = 3.141592653589793238462643383279502884;

inline double sqr(double x) { return x * x; }

/// Exact sum of a list of doubles (Shewchuk expansion arithmetic), rounded
/// once at the end. Order-independent: any permutation of the inputs gives
/// the bit-identical result, which the lamination module relies on for its
/// exact cover/pairwise identities and order-stable parallel reductions.
class ExactSum {
 public:
  void add(double x) {
    std::size_t used = 0;
    for (double y : parts_) {
      double hi = x + y;
      double virt = hi - x;
      double err = (x - (hi - virt)) + (y - virt);
      if (err != 0.0) parts_[used++] = err;
      x = hi;
    }
    parts_.resize(used);
    parts_.push_back(x);
  }

  double value() const {
    double s = 0.0;
    for (double p : parts_) s += p;  // increasing magnitude, exact until last
    return s;
  }

 private:
  std::vector<double> parts_;
};

inline double exact_sum(std::span<const double> xs) {
  ExactSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

/// Deterministic uniform generator. splitmix64-seeded xorshift-style stream;
/// avoids std::uniform_real_distribution so that seeded experiment output is
/// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0,1).
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + int(next_u64() % std::uint64_t(hi - lo + 1));
  }

 private:
  std::uint64_t state_;
};

}  // namespace qdlab

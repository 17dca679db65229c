#ifndef LIESTAB_RNG_HPP
#define LIESTAB_RNG_HPP

#include <cmath>
#include <cstdint>

namespace liestab {

/// SplitMix64 generator.  Used instead of <random> engines so that streams
/// are bit-reproducible across platforms and standard library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64()
  {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate)
  {
    double u = uniform();
    if (u <= 0.0) u = 0x1.0p-53;
    return -std::log(1.0 - u) / rate;
  }

  /// Standard normal via Box-Muller.
  double normal()
  {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Deterministic child stream k of a root seed.
  static Rng child(std::uint64_t root, std::uint64_t k)
  {
    Rng mix(root ^ (0xa0761d6478bd642fULL * (k + 1)));
    return Rng(mix.next_u64());
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace liestab

#endif

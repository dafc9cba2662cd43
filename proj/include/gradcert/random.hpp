#ifndef GRADCERT_RANDOM_HPP_
#define GRADCERT_RANDOM_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace gradcert {

// Stream ids for sub-seed derivation. Every consumer of randomness gets its own
// stream so that changing one component never perturbs another.
enum class Stream : std::uint64_t {
  problem_init = 1,
  holder_pairs = 2,
  gradient_probes = 3,
};

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// sub_seed(seed, stream) = splitmix64(seed ^ splitmix64(stream)).
inline std::uint64_t sub_seed(std::uint64_t seed, Stream stream) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
}

/// Portable generator: mt19937_64 is bit-specified by the standard, the
/// distribution transforms below are spelled out so results do not depend on
/// the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, Stream stream) : engine_(sub_seed(seed, stream)) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gradcert

#endif  // GRADCERT_RANDOM_HPP_

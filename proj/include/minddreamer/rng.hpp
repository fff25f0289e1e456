#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace md {

// Counter-based random stream built on the splitmix64 finalizer.
// A stream is a key plus a counter; draw i is mix64(key + i * GOLDEN).
// Same key, same platform-independent sequence, so runs are reproducible
// bit-for-bit and independent streams are cheap to derive.
inline constexpr std::uint64_t kRngGolden = 0x9E3779B97F4A7C15ull;
inline constexpr char kRngAlgorithmId[] = "splitmix64-counter-v1";

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Key derivation for sub-streams: order matters, collisions are negligible.
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t salt) {
  return mix64(parent ^ mix64(salt + kRngGolden));
}

class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  // Independent child stream; does not disturb this stream's counter.
  [[nodiscard]] Rng stream(std::uint64_t salt) const {
    return Rng(derive_key(key_, salt));
  }

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() { return mix64(key_ + kRngGolden * ++counter_); }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the second member of each pair is cached.
  double next_gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = next_double();
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log1p(-u1));  // u1 in [0,1) keeps the log finite
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Uniform integer in [0, bound); Lemire multiply-shift with rejection, unbiased.
  std::size_t next_index(std::size_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::next_index: bound must be positive");
    const std::uint64_t range = static_cast<std::uint64_t>(bound);
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
      const std::uint64_t threshold = (0ull - range) % range;
      while (low < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * range;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::size_t>(m >> 64);
  }

  // Categorical draw by CDF walk over (not necessarily normalized) weights.
  std::size_t sample(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("Rng::sample: weights sum to zero");
    const double u = next_double() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      acc += weights[i];
      last_positive = i;
      if (u < acc) return i;
    }
    return last_positive;  // guards against rounding at the top of the CDF
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace md

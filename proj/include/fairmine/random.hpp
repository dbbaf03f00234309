#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace fairmine {

// Seeded random stream. Distributions are implemented here rather than taken
// from <random> so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream derived from a root seed and a stream name.
  static Rng stream(std::uint64_t root_seed, std::string_view name);
  static std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view name);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::string state() const;
  void restore(const std::string& state);

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::mt19937_64 engine_;
};

/// Index drawn with probability proportional to weights (all nonnegative, sum > 0).
std::size_t draw_categorical(std::span<const double> weights, Rng& rng);

}  // namespace fairmine

#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace dll {

// Deterministic random source. All distribution mappings are implemented
// here rather than with <random> distribution objects, whose output is
// implementation-defined; this keeps every seeded artifact reproducible
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform();
  double uniform(double lo, double hi);

  // Unbiased integer in [0, n), n >= 1.
  std::uint64_t below(std::uint64_t n);

  // Box-Muller; the spare draw is cached.
  double normal(double mean, double sd);

  // Independent generator derived from this generator's seed and a label.
  // Derivation depends only on (seed, name), not on consumption state, so
  // adding a consumer of one stream never perturbs another.
  Rng substream(std::string_view name) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// In-place Fisher-Yates with an explicit index mapping (std::shuffle is
// implementation-defined).
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  if (items.size() < 2) return;
  for (std::size_t i = items.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(items[i], items[j]);
  }
}

}  // namespace dll

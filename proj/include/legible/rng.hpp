#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace legible
{

/// Seedable, splittable random source used everywhere in the project.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Distribution transforms are implemented here rather than taken
/// from <random> because the standard library distributions are
/// implementation-defined. Sub-streams are derived by mixing a parent seed
/// with integer or string tags through SplitMix64.
class Rng
{
public:
  static constexpr std::string_view kAlgorithm = "mt19937_64+splitmix64";

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal variate (Box-Muller, one value per call pair cached).
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Child stream keyed by `tag`; does not advance this stream.
  Rng derive(std::uint64_t tag) const { return Rng(mix_seed(seed_, tag)); }
  Rng derive(std::string_view tag) const { return Rng(mix_seed(seed_, hash_tag(tag))); }

  template <class Container>
  void shuffle(Container & items)
  {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  static std::uint64_t splitmix64(std::uint64_t x);
  static std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);
  /// FNV-1a of the tag bytes.
  static std::uint64_t hash_tag(std::string_view tag);

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace legible

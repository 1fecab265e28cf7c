#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace capfade {

/// 64-bit FNV-1a over the bytes of `text`.
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// One SplitMix64 finalization step.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of the sub-stream identified by (role, indices) under `master`.
///
/// The derivation is
///   h = fnv1a64(role)
///   for each index i:  h = splitmix64(h ^ i)
///   seed = splitmix64(master ^ splitmix64(h))
/// so every stream is a pure function of its identity and never of the order
/// in which streams are created.
std::uint64_t derive_stream(std::uint64_t master, std::string_view role,
                            std::initializer_list<std::uint64_t> indices = {});

/// Seeded random stream. All value mappings are implemented here instead of
/// through <random> distributions so that draws are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_{seed}, seed_{seed} {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform over [lo, hi]; returns `lo` exactly when lo == hi.
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  /// `count` distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t count);

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

}  // namespace capfade

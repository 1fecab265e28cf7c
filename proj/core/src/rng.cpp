#include "capfade/rng.hpp"

#include <numeric>

#include "capfade/error.hpp"

namespace capfade {

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_stream(std::uint64_t master, std::string_view role,
                            std::initializer_list<std::uint64_t> indices) {
  std::uint64_t h = fnv1a64(role);
  for (std::uint64_t i : indices) h = splitmix64(h ^ i);
  return splitmix64(master ^ splitmix64(h));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  if (lo == hi) return lo;
  return lo + uniform() * (hi - lo);
}

__extension__ using u128 = unsigned __int128;

std::size_t Rng::index(std::size_t n) {
  if (n == 0) fail(ErrorKind::InvalidArgument, "Rng::index: empty range");
  // Lemire's multiply-shift with rejection; unbiased.
  const std::uint64_t bound = n;
  u128 m = static_cast<u128>(engine_()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<u128>(engine_()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n,
                                                         std::size_t count) {
  if (count > n) {
    fail(ErrorKind::InvalidArgument,
         "cannot draw " + std::to_string(count) + " of " + std::to_string(n));
  }
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = i + index(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace capfade

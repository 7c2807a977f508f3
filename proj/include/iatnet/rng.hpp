#pragma once

#include <cstdint>
#include <string_view>

namespace iatnet {

// Counter-based stream: output n is a pure function of (seed, tag, n), so
// weight init, label draws etc. are independent streams that do not depend
// on call order or thread scheduling.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view tag) : key_(derive_key(seed, tag)) {}

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // uniform in [0,1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // fair coin as -1/+1
  int sign() { return (next_u64() & 1u) ? 1 : -1; }

  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  }
  static std::uint64_t derive_key(std::uint64_t seed, std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
    for (unsigned char c : tag) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return mix(mix(seed) ^ h);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace iatnet

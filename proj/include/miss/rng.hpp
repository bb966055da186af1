#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace miss {

// SplitMix64 finaliser; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream seed for one (patient, segmentor) cell. Adding patients never
// changes the draws of existing ones.
inline std::uint64_t cell_seed(std::uint64_t master, std::string_view patient_id, std::string_view segmentor_id) {
  // FNV-1a over the ids, then mixed with the master seed.
  auto fnv = [](std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  };
  return mix64(mix64(master) ^ mix64(fnv(patient_id)) ^ (mix64(fnv(segmentor_id)) * 0x9e3779b97f4a7c15ULL));
}

// mt19937_64 (its output sequence is fixed by the C++ standard) with
// distribution code written out here, since std distributions differ between
// standard libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // [lo, hi); returns lo when lo == hi.
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Integer in [lo, hi] by rejection, no modulo bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return lo + static_cast<std::int64_t>(engine_());
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return lo + static_cast<std::int64_t>(r % span);
  }

  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace miss

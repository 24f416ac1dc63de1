#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace graphqa {

// Seeded generator with explicit uniform/normal transforms. std::mt19937_64
// itself produces a standard-specified sequence; the std distributions do
// not, so the transforms here are spelled out to keep runs reproducible
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n); multiply-shift bound, bias negligible for desk-scale n.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Inclusive range.
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Box-Muller; the spare is discarded so the state stays a pure engine state.
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  std::string state() const;
  void set_state(const std::string& s);

 private:
  std::mt19937_64 engine_;
};

// FNV-1a, for deriving per-name seeds from a base seed.
std::uint64_t hash64(const std::string& s, std::uint64_t basis = 1469598103934665603ull);

}  // namespace graphqa

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace promptpg {

// Deterministic RNG wrapper. mt19937_64 has a standard-specified output
// stream, and every transform below is written out by hand so results are
// bit-for-bit reproducible across compilers and standard libraries
// (std::uniform_real_distribution and friends are not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t uniform_int(std::uint64_t n);

  // Inverse-CDF draw from a categorical distribution. `probs` must be
  // nonnegative; it is treated as already normalized (the last index absorbs
  // any rounding shortfall).
  std::size_t categorical(std::span<const double> probs);

  // Fisher-Yates.
  void shuffle(std::span<std::size_t> values);

  std::vector<std::size_t> permutation(std::size_t n);

  // Textual engine state, round-trippable via restore_state.
  std::string state() const;
  void restore_state(const std::string& s);

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

// Stable derivation of per-purpose seeds from one base seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace promptpg

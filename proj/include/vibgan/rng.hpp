// Deterministic random number generation.
//
// A fixed xoshiro256** stream seeded through splitmix64. The standard
// library distributions are implementation-defined, so uniform/normal
// draws are produced here with pinned algorithms: results are
// bit-identical across platforms and the four-word state serializes
// exactly into checkpoints.
#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace vibgan {

uint64_t fnv1a64(std::string_view bytes);

class Rng {
 public:
  using State = std::array<uint64_t, 4>;

  Rng() : Rng(0) {}
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller. Two uniforms per draw, no cached
  // spare, so the state never carries hidden distribution memory.
  double normal();
  double normal(double mean, double stddev);

  // Inclusive bounds, rejection-free modulo bias removal.
  int64_t uniform_int(int64_t lo, int64_t hi);

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (int64_t i = static_cast<int64_t>(v.size()) - 1; i > 0; --i) {
      int64_t j = uniform_int(0, i);
      using std::swap;
      swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(j)]);
    }
  }

  State state() const { return s_; }
  void set_state(const State& s) { s_ = s; }

 private:
  State s_;
};

// Stable per-stage seed derivation: one root seed fans out into named
// streams so stages can be re-run in isolation.
uint64_t derive_seed(uint64_t root, std::string_view tag);

}  // namespace vibgan

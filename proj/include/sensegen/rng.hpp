#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace sensegen {

// Deterministic random stream. splitmix64 core with Box-Muller normals,
// so sequences are bit-identical across platforms and standard library
// versions. Sub-streams are derived by name so that independent consumers
// (init / sampling / shuffling) do not perturb each other.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Derived stream: same (seed, name) always yields the same stream.
  Rng fork(std::string_view name) const;

  std::uint64_t next_u64();

  // Uniform in [0, 1).
  double uniform();

  // Uniform in [lo, hi).
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller (two uniforms per draw, no caching).
  double normal();

  // Uniform integer in [0, n). n must be > 0.
  std::size_t index(std::size_t n);

  // Fisher-Yates; std::shuffle is implementation-defined, this is not.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

private:
  std::uint64_t state_;
};

}  // namespace sensegen

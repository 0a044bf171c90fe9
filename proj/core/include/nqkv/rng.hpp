#pragma once

#include <cstdint>
#include <random>

#include "nqkv/matrix.hpp"

namespace nqkv {

// Seeded generator used by every stochastic path. The engine is mt19937_64;
// normals come from Box-Muller over 53-bit uniforms so sequences are identical
// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal();
  double laplace();  // unit scale, zero location

  Matrix normal_matrix(std::size_t rows, std::size_t cols, double stddev = 1.0);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace nqkv

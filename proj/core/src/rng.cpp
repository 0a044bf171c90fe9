#include "nqkv/rng.hpp"

#include <cmath>
#include <numbers>

namespace nqkv {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Rng::laplace() {
  double u = uniform01() - 0.5;
  while (u == -0.5) u = uniform01() - 0.5;
  return u < 0.0 ? std::log1p(2.0 * u) : -std::log1p(-2.0 * u);
}

Matrix Rng::normal_matrix(std::size_t rows, std::size_t cols, double stddev) {
  Matrix m(rows, cols);
  for (float& v : m.data()) v = static_cast<float>(stddev * normal());
  return m;
}

}  // namespace nqkv

// SPDX-License-Identifier: Apache-2.0
#include "cophase/random.hpp"

namespace cophase {

namespace {

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix64(splitmix64(splitmix64(parent) ^ a) ^ (b * 0xd1342543de82ef95ULL + 1));
}

CVector complex_gaussian_vector(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CVector v(n);
  for (Index i = 0; i < n; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    v[i] = Complex(re, im);
  }
  return v;
}

CMatrix complex_gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix m(rows, cols);
  // Row-major fill keeps the draw order independent of Eigen's storage order.
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(r, c) = Complex(re, im);
    }
  }
  return m;
}

}  // namespace cophase

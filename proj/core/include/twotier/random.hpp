#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace twotier {

// Deterministic RNG with named substreams. Gaussian draws go through the
// polar transform instead of std::normal_distribution so that byte-identical
// reports do not depend on the standard library's distribution algorithm.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(mix(seed)) {}

  // independent substream, stable regardless of how many draws were taken here
  Rng derive(std::uint64_t stream) const {
    return Rng(mix(seed_ ^ (0x9e3779b97f4a7c15ULL * (stream + 1))));
  }

  std::uint64_t next_u64() { return eng_(); }

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1]; safe as a log argument
  double uniform_pos() { return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53; }

  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    return r * std::cos(kTwoPi * uniform());
  }

  // CN(0,1): E|z|^2 = 1, circularly symmetric
  std::complex<double> cnormal() {
    const double r = std::sqrt(-std::log(uniform_pos()));
    const double phi = kTwoPi * uniform();
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  // entries drawn in column-major order
  Eigen::MatrixXcd cnormal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXcd z(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) z(i, j) = cnormal();
    return z;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static constexpr double kTwoPi = 6.283185307179586476925287;

  // splitmix64 finalizer; decorrelates structured seeds
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

}  // namespace twotier

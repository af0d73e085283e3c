#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "h2ad/types.hpp"

namespace h2ad {

// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// All randomness in the library goes through this engine: mt19937_64 seeded
// from mix_seed(), Gaussian draws via std::normal_distribution.
using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0) {
  return Engine(mix_seed(seed, stream));
}

// Circular complex Gaussian with E|z|^2 = variance.
class ComplexGaussian {
 public:
  explicit ComplexGaussian(double variance) : dist_(0.0, std::sqrt(variance / 2.0)) {}

  cdouble operator()(Engine& eng) {
    const double re = dist_(eng);
    const double im = dist_(eng);
    return {re, im};
  }

 private:
  std::normal_distribution<double> dist_;
};

}  // namespace h2ad

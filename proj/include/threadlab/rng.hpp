#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace threadlab {

// Deterministic RNG. All sampling goes through hand-rolled transforms of the
// raw mt19937_64 stream because std::*_distribution output is
// implementation-defined, and the tool's contract is byte-identical output
// for a fixed seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream derived from (master_seed, index). Simulation run i,
  // bootstrap tree i, corpus thread i etc. each get their own substream so
  // results do not depend on execution order or parallelism.
  static Rng substream(std::uint64_t master_seed, std::uint64_t index);

  std::uint64_t next();

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01();

  // Uniform integer in [0, n), unbiased. n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  double exponential(double mean);

  std::uint64_t poisson(double mean);

  // Index of the first cdf entry >= u * cdf.back(). cdf must be
  // non-decreasing with positive total.
  std::size_t discrete_cdf(const std::vector<double>& cdf);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_int(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace threadlab

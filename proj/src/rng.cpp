#include "threadlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace threadlab {

Rng::Rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32)};
  engine_.seed(seq);
}

Rng Rng::substream(std::uint64_t master_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  Rng r(0);
  r.engine_.seed(seq);
  return r;
}

std::uint64_t Rng::next() { return engine_(); }

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: n must be > 0");
  // rejection sampling over the largest multiple of n
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::exponential(double mean) {
  if (mean <= 0) throw std::invalid_argument("exponential: mean must be > 0");
  double u;
  do {
    u = uniform01();
  } while (u <= 0.0);
  return -mean * std::log(u);
}

std::uint64_t Rng::poisson(double mean) {
  if (mean < 0) throw std::invalid_argument("poisson: mean must be >= 0");
  if (mean == 0) return 0;
  // Knuth's product method; split large means so exp(-mean) stays normal.
  std::uint64_t total = 0;
  while (mean > 30.0) {
    double part = mean / 2.0;
    total += poisson(part);
    mean -= part;
  }
  double limit = std::exp(-mean);
  double prod = 1.0;
  std::uint64_t k = 0;
  do {
    ++k;
    prod *= uniform01();
  } while (prod > limit);
  total += k - 1;
  return total;
}

std::size_t Rng::discrete_cdf(const std::vector<double>& cdf) {
  if (cdf.empty() || cdf.back() <= 0) {
    throw std::invalid_argument("discrete_cdf: empty or non-positive total");
  }
  double u = uniform01() * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<std::size_t>(it - cdf.begin());
}

}  // namespace threadlab

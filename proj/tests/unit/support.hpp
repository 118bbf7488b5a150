#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace halfmoll::testing {

// Seeded draws for the property tests; every suite starts from the same seed
// so failures replay exactly.
class Draw {
 public:
  explicit Draw(std::uint64_t seed = 20240611) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  std::vector<double> point(std::size_t n, double lo, double hi) {
    std::vector<double> x(n);
    for (double& v : x) v = uniform(lo, hi);
    return x;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace halfmoll::testing

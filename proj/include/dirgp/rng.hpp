#pragma once

#include <cstdint>
#include <random>

namespace dirgp {

// Deterministic random source. std::mt19937_64 has a bit-exact specification,
// and every variate transform is implemented here instead of with
// std::*_distribution (whose algorithms differ across standard libraries), so
// a seed pins the entire stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent child stream. The derivation depends only on the seed this
  // object was constructed with and on `index`, never on how many draws have
  // been made, so substreams assigned by index are stable under any
  // parallel execution order.
  Rng substream(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }

  double uniform();      // [0, 1)
  double uniform_pos();  // (0, 1)
  double normal();       // standard normal (Box-Muller, second value cached)
  double exponential();  // mean 1
  double gamma(double shape, double rate);  // Marsaglia-Tsang
  std::int64_t poisson(double mean);
  std::uint64_t uniform_int(std::uint64_t n);  // unbiased on {0,...,n-1}

  std::uint64_t raw() { return engine_(); }

 private:
  std::uint64_t seed_ = 0;
  std::mt19937_64 engine_;
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace dirgp

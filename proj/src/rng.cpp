#include "dirgp/rng.hpp"

#include <cmath>

#include "dirgp/errors.hpp"

namespace dirgp {

namespace {

// splitmix64 finaliser; used to decorrelate substream seeds.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

Rng Rng::substream(std::uint64_t index) const {
  return Rng(mix64(mix64(seed_) ^ mix64(index + 1)));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform_pos();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(t);
  have_cached_normal_ = true;
  return r * std::cos(t);
}

double Rng::exponential() { return -std::log(uniform_pos()); }

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw ContractError("gamma: shape and rate must be positive");
  }
  if (shape < 1.0) {
    // Boost the shape, then scale back (Marsaglia-Tsang section 6).
    const double g = gamma(shape + 1.0, 1.0);
    const double u = uniform_pos();
    return g * std::pow(u, 1.0 / shape) / rate;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v / rate;
    }
  }
}

std::int64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0)) throw ContractError("poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    // Multiplicative inversion (exact for small means).
    const double limit = std::exp(-mean);
    std::int64_t k = 0;
    double prod = uniform_pos();
    while (prod > limit) {
      ++k;
      prod *= uniform_pos();
    }
    return k;
  }
  // Hormann's PTRS transformed-rejection sampler (exact for mean >= 10).
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform_pos();
    const double us = 0.5 - std::fabs(u);
    const auto k =
        static_cast<std::int64_t>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
    if (us >= 0.07 && v <= vr) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * invalpha / (a / (us * us) + b)) <=
        -mean + k * loglam - std::lgamma(static_cast<double>(k) + 1.0)) {
      return k;
    }
  }
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw ContractError("uniform_int: n must be positive");
  // Rejection above the largest multiple of n keeps the draw unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n) - 1;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x <= limit) return x % n;
  }
}

}  // namespace dirgp

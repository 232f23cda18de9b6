#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace cwdabc {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Collapses (seed, id0, id1, ...) into one 64-bit substream seed.
/// Used everywhere a worker needs its own stream: the result depends only on
/// the ids, never on thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> ids) {
  std::uint64_t h = seed;
  splitmix64(h);
  for (std::uint64_t id : ids) {
    h ^= id + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    splitmix64(h);
  }
  return splitmix64(h);
}

/// One random stream with all the variate generators the simulators and the
/// sampler need. Every generator consumes a fixed, documented number of
/// engine draws (or a data-independent rejection loop), so replaying a stream
/// from the same seed reproduces results bit for bit.
///
/// Draw costs: uniform 1; normal 2 (Box-Muller, no cached spare);
/// exponential 1; discrete uniform 1; gamma/beta/poisson/binomial use
/// rejection or inversion loops driven only by this stream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  static RngStream substream(std::uint64_t seed,
                             std::initializer_list<std::uint64_t> ids) {
    return RngStream(derive_seed(seed, ids));
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on {lo, ..., hi}, inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const double span = static_cast<double>(hi - lo + 1);
    auto k = lo + static_cast<std::int64_t>(uniform() * span);
    return k > hi ? hi : k;
  }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0,1], keeps log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double exponential(double rate) {
    return -std::log1p(-uniform()) / rate;
  }

  /// Gamma in shape-rate parameterization (mean = shape/rate).
  /// Marsaglia-Tsang squeeze; shape < 1 boosted via the power trick.
  double gamma(double shape, double rate) {
    if (shape < 1.0) {
      const double u = 1.0 - uniform();  // (0,1]
      return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v / rate;
    }
  }

  double beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
  }

  std::int64_t poisson(double lambda) {
    if (!(lambda > 0.0)) return 0;
    if (lambda < 10.0) {
      // Knuth product-of-uniforms
      const double limit = std::exp(-lambda);
      double prod = uniform();
      std::int64_t k = 0;
      while (prod > limit) {
        ++k;
        prod *= uniform();
      }
      return k;
    }
    // Hormann's PTRS transformed rejection
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::fabs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
      if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(invalpha) -
              std::log(a / (us * us) + b) <=
          -lambda + kf * loglam - std::lgamma(kf + 1.0))
        return static_cast<std::int64_t>(kf);
    }
  }

  std::int64_t binomial(std::int64_t n, double p) {
    if (n <= 0) return 0;
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (p > 0.5) return n - binomial(n, 1.0 - p);
    const double nlog1mp = static_cast<double>(n) * std::log1p(-p);
    if (n >= 30 && nlog1mp > -700.0) {
      // CDF inversion by chop-down, one uniform per draw
      double u = uniform();
      double f = std::exp(nlog1mp);
      const double odds = p / (1.0 - p);
      std::int64_t x = 0;
      while (u > f) {
        u -= f;
        ++x;
        if (x > n) return n;
        f *= odds * static_cast<double>(n - x + 1) / static_cast<double>(x);
      }
      return x;
    }
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < n; ++i)
      if (uniform() < p) ++hits;
    return hits;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace cwdabc

// Copyright 2026 The psrl-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace psrl {

// SplitMix64 finalizer. Used to turn (seed, counter...) tuples into
// well-separated child seeds so that concurrent consumers can own
// independent streams without sharing generator state.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0,
                                 std::uint64_t d = 0) {
  std::uint64_t s = mix64(root);
  s = mix64(s ^ a);
  s = mix64(s ^ b);
  s = mix64(s ^ c);
  s = mix64(s ^ d);
  return s;
}

/// Deterministic random stream.
///
/// Wraps std::mt19937_64 (whose raw output is pinned by the standard) and
/// implements all variate transforms by hand, since the std:: distribution
/// classes are implementation-defined and would break reproducibility of
/// traces across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in {0, ..., n-1}, n >= 1. Rejection-free modulo bias is
  /// irrelevant at the n used here (n <= a few hundred), but we still use
  /// Lemire-style rejection to keep the stream well-defined.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be >= 1");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

  /// Standard normal via Marsaglia's polar method (one spare cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// Gamma(shape, 1). Marsaglia-Tsang squeeze for shape >= 1, with the
  /// U^{1/shape} boost transform for shape < 1.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
    if (shape < 1.0) {
      double u;
      do {
        u = uniform();
      } while (u == 0.0);
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
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
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
        return d * v;
    }
  }

  double beta(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
      throw std::invalid_argument("beta: parameters must be > 0");
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

  /// One draw from Dirichlet(alpha): independent gammas normalized by sum.
  std::vector<double> dirichlet(const std::vector<double>& alpha) {
    if (alpha.empty())
      throw std::invalid_argument("dirichlet: empty parameter vector");
    std::vector<double> out(alpha.size());
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (!(alpha[i] > 0.0))
        throw std::invalid_argument("dirichlet: parameters must be > 0");
      out[i] = gamma(alpha[i]);
      total += out[i];
    }
    if (total <= 0.0)
      throw std::runtime_error("dirichlet: degenerate gamma draws");
    for (double& x : out) x /= total;
    return out;
  }

  /// Binomial(n, p), exact. Bernoulli counting for small n, Devroye's
  /// beta-splitting recursion (median order statistic of n uniforms is
  /// Beta-distributed) for large n: O(log n) beta draws.
  std::int64_t binomial(std::int64_t n, double p) {
    if (n < 0) throw std::invalid_argument("binomial: n must be >= 0");
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::int64_t base = 0;
    while (n > 64) {
      const std::int64_t i = (n + 1) / 2;
      const double x = beta(static_cast<double>(i), static_cast<double>(n + 1 - i));
      if (x <= p) {
        base += i;
        p = (p - x) / (1.0 - x);
        n -= i;
      } else {
        p = p / x;
        n = i - 1;
      }
      if (p <= 0.0) return base;
      if (p >= 1.0) return base + n;
    }
    std::int64_t k = 0;
    for (std::int64_t j = 0; j < n; ++j)
      if (uniform() < p) ++k;
    return base + k;
  }

  /// Counts of n independent categorical trials with probabilities p
  /// (conditional-binomial decomposition).
  std::vector<std::int64_t> multinomial(std::int64_t n,
                                        const std::vector<double>& p) {
    std::vector<std::int64_t> counts(p.size(), 0);
    std::int64_t remaining = n;
    double mass = 1.0;
    for (std::size_t i = 0; i + 1 < p.size() && remaining > 0; ++i) {
      const double q = mass > 0.0 ? std::min(1.0, std::max(0.0, p[i] / mass)) : 1.0;
      counts[i] = binomial(remaining, q);
      remaining -= counts[i];
      mass -= p[i];
    }
    if (!p.empty()) counts[p.size() - 1] += remaining;
    return counts;
  }

  /// Index drawn by inverse CDF over the stored order of `p`. This is the
  /// one sampling primitive whose exact tie/rounding behaviour is part of
  /// the trace-reproducibility contract.
  std::size_t categorical(const std::vector<double>& p) {
    const double u = uniform();
    double acc = 0.0;
    std::size_t last_positive = 0;
    bool seen_positive = false;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] > 0.0) {
        last_positive = i;
        seen_positive = true;
      }
      acc += p[i];
      if (u < acc) return i;
    }
    if (!seen_positive)
      throw std::invalid_argument("categorical: no positive mass");
    return last_positive;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace psrl

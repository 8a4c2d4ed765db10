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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "psrl/mdp.hpp"
#include "psrl/rng.hpp"

namespace psrl {

/// Visit counts accumulated online: total[s][a] and by_next[s][a][i].
/// Invariant: sum_i by_next[s][a][i] == total[s][a].
struct TransitionCounts {
  int num_states = 0;
  int num_actions = 0;
  std::vector<std::vector<std::int64_t>> total;
  std::vector<std::vector<std::vector<std::int64_t>>> by_next;

  TransitionCounts() = default;
  TransitionCounts(int S, int A)
      : num_states(S),
        num_actions(A),
        total(S, std::vector<std::int64_t>(A, 0)),
        by_next(S, std::vector<std::vector<std::int64_t>>(
                       A, std::vector<std::int64_t>(S, 0))) {}

  void record(int s, int a, int next) {
    ++total[s][a];
    ++by_next[s][a][next];
  }
};

/// Agent parameters. `small_n` is the visit-count threshold below which the
/// simple optimistic sampler replaces the boosted posterior.
struct PsrlConfig {
  double rho = 0.05;          // failure probability budget, in (0, 1]
  int psi = 1;                // sampled vectors per state-action pair
  double omega = 1.0;         // prior pseudo-count, > 0
  double kappa = 1.0;         // boost divisor, >= 1
  std::int64_t small_n = 0;   // branch threshold, >= 0
  std::int64_t horizon = 1;   // T
  std::string preset = "custom";
};

inline void validate_config(const PsrlConfig& c) {
  if (!(c.rho > 0.0) || c.rho > 1.0)
    throw std::invalid_argument("PsrlConfig: rho must be in (0,1]");
  if (c.psi < 1) throw std::invalid_argument("PsrlConfig: psi must be >= 1");
  if (!(c.omega > 0.0))
    throw std::invalid_argument("PsrlConfig: omega must be > 0");
  if (!(c.kappa >= 1.0))
    throw std::invalid_argument("PsrlConfig: kappa must be >= 1");
  if (c.small_n < 0)
    throw std::invalid_argument("PsrlConfig: small_n must be >= 0");
  if (c.horizon < 1)
    throw std::invalid_argument("PsrlConfig: horizon must be >= 1");
}

/// Preset with the constants used by the analysis. These are very
/// conservative; see practical_preset for the values used in experiments.
inline PsrlConfig theory_preset(int S, int A, std::int64_t T, double rho) {
  PsrlConfig c;
  c.rho = rho;
  c.horizon = T;
  c.omega = std::max(
      1.0, std::ceil(613.0 * std::log(2.0 * static_cast<double>(T) * S * A / rho)));
  c.kappa = std::max(1.0, c.omega / 6.0);
  c.psi = std::max(1, static_cast<int>(std::ceil(4.0 * S * std::log(S * A / rho))));
  const double root = std::ceil(std::sqrt(static_cast<double>(T) * S / A));
  const double prop = std::ceil(12.0 * c.omega * S * S);
  c.small_n = static_cast<std::int64_t>(std::max(root, prop));
  c.preset = "theory";
  validate_config(c);
  return c;
}

inline PsrlConfig practical_preset(int S, int A, std::int64_t T, double rho) {
  PsrlConfig c;
  c.rho = rho;
  c.horizon = T;
  c.omega = 1.0;
  c.kappa = 1.0;
  c.psi = std::max(1, S);
  c.small_n = static_cast<std::int64_t>(
      std::ceil(std::sqrt(static_cast<double>(T) * S / A)));
  c.preset = "practical";
  validate_config(c);
  return c;
}

/// Boosted posterior parameters M_i = (N(s,a,i) + omega) / kappa, all
/// strictly positive.
inline std::vector<double> boosted_params(const TransitionCounts& counts, int s,
                                          int a, const PsrlConfig& cfg) {
  validate_config(cfg);
  const auto& row = counts.by_next[s][a];
  std::vector<double> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i)
    out[i] = (static_cast<double>(row[i]) + cfg.omega) / cfg.kappa;
  return out;
}

inline ProbVec sample_dirichlet(const std::vector<double>& alpha, Rng& rng) {
  return rng.dirichlet(alpha);
}

inline double sample_beta(double a, double b, Rng& rng) { return rng.beta(a, b); }

/// Low-count fallback sampler operating on one empirical count row of total
/// size n: shrink every empirical probability by
/// Delta_i = sqrt(3 phat_i ln(4S) / n) + 3 ln(4S) / n (clipped at zero) and
/// give the freed mass to one uniformly random coordinate corner. With
/// n == 0 the empirical vector is taken to be zero, so the output is a pure
/// random corner.
inline ProbVec simple_optimistic_sample_row(
    const std::vector<std::int64_t>& next_counts, std::int64_t n, Rng& rng) {
  const std::size_t S = next_counts.size();
  if (S == 0)
    throw std::invalid_argument("simple_optimistic_sample: empty count row");
  ProbVec out(S, 0.0);
  double shrunk_mass = 0.0;
  if (n > 0) {
    const double log4s = std::log(4.0 * static_cast<double>(S));
    const double nd = static_cast<double>(n);
    for (std::size_t i = 0; i < S; ++i) {
      const double phat = static_cast<double>(next_counts[i]) / nd;
      const double delta = std::sqrt(3.0 * phat * log4s / nd) + 3.0 * log4s / nd;
      out[i] = std::max(phat - delta, 0.0);
      shrunk_mass += out[i];
    }
  }
  const std::size_t corner = static_cast<std::size_t>(rng.uniform_below(S));
  out[corner] += 1.0 - shrunk_mass;
  return out;
}

inline ProbVec simple_optimistic_sample(const TransitionCounts& counts, int s,
                                        int a, Rng& rng) {
  return simple_optimistic_sample_row(counts.by_next[s][a], counts.total[s][a],
                                      rng);
}

/// Exact value of max_{h in [0, height]^S} (q - p)^T h for two probability
/// vectors: height times the total positive part of q - p.
inline double box_max_deviation(const ProbVec& q, const ProbVec& p,
                                double height) {
  if (q.size() != p.size())
    throw std::invalid_argument("box_max_deviation: size mismatch");
  if (height < 0.0)
    throw std::invalid_argument("box_max_deviation: height must be >= 0");
  double pos = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) pos += std::max(q[i] - p[i], 0.0);
  return height * pos;
}

/// Stick-breaking decomposition of (p, h) in the stored index order.
///   suffix[i] = p_i + ... + p_{S-1}
///   y[i]      = p_i / suffix[i]                     (y[S-1] == 1)
///   H[i]      = sum_{j >= i} h_j p_j / suffix[i]    (H[S] == 0 by convention)
///   c[i]      = h_i - H[i+1]
///   gamma[i]  = p_i * suffix[i+1] / suffix[i]       (gamma[S-1] == 0)
/// For any other distribution q on the same support, with u_i and
/// t_i = q_i + ... + q_{S-1} its own stick ratios and suffix sums,
///   (q - p)^T h  ==  sum_i (u_i - y_i) c_i t_i.
struct StickBreaking {
  std::vector<double> gamma;
  std::vector<double> c;
  std::vector<double> H;  // size S + 1
  std::vector<double> y;
  std::vector<double> suffix;
};

inline StickBreaking stick_breaking_quantities(const ProbVec& p,
                                               const std::vector<double>& h) {
  const std::size_t S = p.size();
  if (S == 0 || h.size() != S)
    throw std::invalid_argument("stick_breaking_quantities: size mismatch");
  StickBreaking out;
  out.gamma.assign(S, 0.0);
  out.c.assign(S, 0.0);
  out.H.assign(S + 1, 0.0);
  out.y.assign(S, 0.0);
  out.suffix.assign(S, 0.0);

  double tail = 0.0, weighted = 0.0;
  std::vector<double> weighted_suffix(S + 1, 0.0);
  for (std::size_t k = S; k-- > 0;) {
    if (!(p[k] > 0.0))
      throw std::invalid_argument(
          "stick_breaking_quantities: degenerate support (p must be strictly "
          "positive)");
    tail += p[k];
    weighted += h[k] * p[k];
    out.suffix[k] = tail;
    weighted_suffix[k] = weighted;
  }
  for (std::size_t i = 0; i < S; ++i) {
    out.H[i] = weighted_suffix[i] / out.suffix[i];
    out.y[i] = p[i] / out.suffix[i];
    const double next_tail = (i + 1 < S) ? out.suffix[i + 1] : 0.0;
    out.gamma[i] = p[i] * next_tail / out.suffix[i];
  }
  out.H[S] = 0.0;
  for (std::size_t i = 0; i < S; ++i) out.c[i] = h[i] - out.H[i + 1];
  return out;
}

}  // namespace psrl

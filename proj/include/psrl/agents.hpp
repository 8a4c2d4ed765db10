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
#include <functional>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "psrl/extended_mdp.hpp"
#include "psrl/mdp.hpp"
#include "psrl/rng.hpp"
#include "psrl/sampling.hpp"
#include "psrl/solvers.hpp"

namespace psrl {

/// Per-run output: realized rewards, epoch boundaries (1-based step indices,
/// first always 1), the optimal gain of the true model and the cumulative
/// regret lambda* * t - sum of rewards up to t.
struct RegretTrace {
  std::vector<double> rewards;
  std::vector<std::int64_t> epoch_starts;
  double optimal_gain = 0.0;
  std::vector<double> cumulative_regret;
};

/// cumulative[t] = lambda_star * (t + 1) - sum_{u <= t} rewards[u].
inline std::vector<double> compute_regret(const std::vector<double>& rewards,
                                          double lambda_star) {
  std::vector<double> out(rewards.size());
  double total = 0.0;
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    total += rewards[t];
    out[t] = lambda_star * static_cast<double>(t + 1) - total;
  }
  return out;
}

/// Doubling rule: the epoch ends once the just-visited pair reaches twice
/// its epoch-start count. A pair starting at zero breaks the epoch on its
/// first visit (the inequality as written).
inline bool epoch_should_break(
    const TransitionCounts& counts,
    const std::vector<std::vector<std::int64_t>>& epoch_start_total, int s,
    int a) {
  return counts.total[s][a] >= 2 * epoch_start_total[s][a];
}

/// Snapshot passed to per-epoch observers (used by the statistical
/// verifiers to inspect the sampled models the agent actually planned on).
struct EpochInfo {
  int epoch_index = 0;               // k, 1-based
  std::int64_t start_time = 0;       // tau_k, 1-based
  const TransitionCounts* counts = nullptr;   // state at tau_k
  const ExtendedMdp* extended = nullptr;
  const GainBias* solution = nullptr;
  const Policy* flat_policy = nullptr;
  const Policy* base_policy = nullptr;
};

using EpochObserver = std::function<void(const EpochInfo&)>;

namespace detail {

// Solve with one retry at a doubled iteration cap, then give up.
template <class Solve>
auto solve_with_retry(const Solve& solve) {
  try {
    return solve(kDefaultIterationCap);
  } catch (const non_convergence_error&) {
    return solve(2 * kDefaultIterationCap);
  }
}

inline void require_valid_env(const Mdp& env) {
  const auto violations = validate_mdp(env);
  if (!violations.empty())
    throw std::invalid_argument("agent: environment fails validation: " +
                                violations.front().message);
}

}  // namespace detail

/// Posterior-sampling agent with doubling epochs. At each epoch start it
/// draws psi transition vectors per pair (boosted Dirichlet posterior above
/// the small_n threshold, simple optimistic sampling below), solves the
/// extended model to tolerance 1/sqrt(tau_k) and plays the resulting policy
/// until some pair doubles its visit count. The optimal gain used for
/// regret accounting is computed from the true model by the harness; the
/// agent itself only ever reads observed transitions.
inline RegretTrace run_psrl(const Mdp& env, const PsrlConfig& cfg,
                            std::uint64_t seed,
                            const EpochObserver& observer = nullptr) {
  validate_config(cfg);
  detail::require_valid_env(env);
  const std::int64_t T = cfg.horizon;

  RegretTrace trace;
  trace.rewards.resize(T);
  trace.optimal_gain = relative_value_iteration(env, 1e-8).first.gain;

  Rng env_rng(derive_seed(seed, 0x73746570ULL));  // environment stream
  TransitionCounts counts(env.num_states, env.num_actions);
  int s = env.start_state;
  std::int64_t t = 1;
  int k = 0;
  while (t <= T) {
    ++k;
    trace.epoch_starts.push_back(t);
    const auto epoch_start_total = counts.total;

    Rng sample_rng(derive_seed(seed, 0x73616d70ULL, static_cast<std::uint64_t>(k)));
    const ExtendedMdp ext = build_extended(env, counts, cfg, sample_rng);
    const double epsilon = 1.0 / std::sqrt(static_cast<double>(t));
    auto [solution, flat_policy] = detail::solve_with_retry(
        [&](std::int64_t cap) { return solve_extended(ext, epsilon, cap); });
    const Policy policy = map_extended_policy(flat_policy, ext.psi);

    if (observer) {
      EpochInfo info;
      info.epoch_index = k;
      info.start_time = t;
      info.counts = &counts;
      info.extended = &ext;
      info.solution = &solution;
      info.flat_policy = &flat_policy;
      info.base_policy = &policy;
      observer(info);
    }

    while (t <= T) {
      const int a = policy[s];
      const StepResult res = step(env, s, a, env_rng);
      trace.rewards[t - 1] = res.reward;
      counts.record(s, a, res.next_state);
      const bool brk = epoch_should_break(counts, epoch_start_total, s, a);
      s = res.next_state;
      ++t;
      if (brk) break;
    }
  }
  trace.cumulative_regret = compute_regret(trace.rewards, trace.optimal_gain);
  return trace;
}

namespace detail {

// Largest value of p^T h over the L1 ball of radius `radius` around p_hat,
// intersected with the simplex: push mass onto the highest-h state, taking
// it away from the lowest-h states.
inline ProbVec l1_ball_inner_max(const ProbVec& p_hat, double radius,
                                 const std::vector<double>& h) {
  const std::size_t S = p_hat.size();
  std::vector<std::size_t> order(S);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (h[a] != h[b]) return h[a] > h[b];
    return a < b;
  });
  ProbVec q = p_hat;
  q[order[0]] = std::min(1.0, p_hat[order[0]] + radius / 2.0);
  double excess = std::accumulate(q.begin(), q.end(), 0.0) - 1.0;
  for (std::size_t i = S; i-- > 1 && excess > 0.0;) {
    const double take = std::min(q[order[i]], excess);
    q[order[i]] -= take;
    excess -= take;
  }
  return q;
}

struct Ucrl2PlanningView {
  const Mdp* env;
  const TransitionCounts* counts;
  double log_term;  // ln(2 A tau_k / delta)

  double radius(int s, int a) const {
    const double n = std::max<std::int64_t>(1, counts->total[s][a]);
    return std::sqrt(14.0 * env->num_states * log_term / n);
  }

  ProbVec empirical(int s, int a) const {
    const std::int64_t n = counts->total[s][a];
    ProbVec p(env->num_states, 1.0 / env->num_states);
    if (n > 0)
      for (int i = 0; i < env->num_states; ++i)
        p[i] = static_cast<double>(counts->by_next[s][a][i]) /
               static_cast<double>(n);
    return p;
  }
};

}  // namespace detail

/// Optimism-under-uncertainty baseline: plans over an L1 confidence ball
/// around the empirical transition estimates (extended value iteration with
/// the mass-shifting inner maximization), on the same doubling-epoch
/// schedule as run_psrl. Rewards are known, so no reward bonus is applied.
inline RegretTrace run_ucrl2_baseline(const Mdp& env, std::int64_t horizon,
                                      double delta, std::uint64_t seed) {
  if (horizon < 1) throw std::invalid_argument("run_ucrl2_baseline: horizon >= 1");
  if (!(delta > 0.0) || delta >= 1.0)
    throw std::invalid_argument("run_ucrl2_baseline: delta in (0,1)");
  detail::require_valid_env(env);
  const int S = env.num_states;
  const int A = env.num_actions;

  RegretTrace trace;
  trace.rewards.resize(horizon);
  trace.optimal_gain = relative_value_iteration(env, 1e-8).first.gain;

  Rng env_rng(derive_seed(seed, 0x73746570ULL));
  TransitionCounts counts(S, A);
  int s = env.start_state;
  std::int64_t t = 1;
  while (t <= horizon) {
    trace.epoch_starts.push_back(t);
    const auto epoch_start_total = counts.total;
    const double log_term =
        std::log(std::max(2.0, 2.0 * A * static_cast<double>(t) / delta));
    const double epsilon = 1.0 / std::sqrt(static_cast<double>(t));

    // Extended value iteration: per sweep, each (s, a) transitions by the
    // most favorable vector in its confidence ball for the current bias.
    Policy policy(S, 0);
    {
      constexpr double alpha = kAperiodicityDamping;
      std::vector<double> h(S, 0.0), g(S, 0.0);
      std::vector<ProbVec> p_hat(S * A);
      std::vector<double> rad(S * A);
      detail::Ucrl2PlanningView view{&env, &counts, log_term};
      for (int ss = 0; ss < S; ++ss)
        for (int a = 0; a < A; ++a) {
          p_hat[ss * A + a] = view.empirical(ss, a);
          rad[ss * A + a] = view.radius(ss, a);
        }
      const auto sweep = [&](std::int64_t cap) -> Policy {
        std::fill(h.begin(), h.end(), 0.0);
        Policy pi(S, 0);
        for (std::int64_t iter = 1; iter <= cap; ++iter) {
          for (int ss = 0; ss < S; ++ss) {
            double best = -std::numeric_limits<double>::infinity();
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
              const ProbVec q =
                  detail::l1_ball_inner_max(p_hat[ss * A + a], rad[ss * A + a], h);
              const double v = env.rewards[ss][a] + alpha * detail::dot(q, h);
              if (v > best) {
                best = v;
                best_a = a;
              }
            }
            g[ss] = best + (1.0 - alpha) * h[ss];
            pi[ss] = best_a;
          }
          double lo = std::numeric_limits<double>::infinity(), hi = -lo;
          for (int ss = 0; ss < S; ++ss) {
            const double d = g[ss] - h[ss];
            lo = std::min(lo, d);
            hi = std::max(hi, d);
          }
          const double ref = g[0];
          for (int ss = 0; ss < S; ++ss) h[ss] = g[ss] - ref;
          if (hi - lo <= epsilon) return pi;
        }
        throw non_convergence_error("ucrl2 planning hit the iteration cap");
      };
      policy = detail::solve_with_retry(sweep);
    }

    while (t <= horizon) {
      const int a = policy[s];
      const StepResult res = step(env, s, a, env_rng);
      trace.rewards[t - 1] = res.reward;
      counts.record(s, a, res.next_state);
      const bool brk = epoch_should_break(counts, epoch_start_total, s, a);
      s = res.next_state;
      ++t;
      if (brk) break;
    }
  }
  trace.cumulative_regret = compute_regret(trace.rewards, trace.optimal_gain);
  return trace;
}

/// Uniform-random rollout with the same trace contract; baseline for
/// sanity-checking learned behavior.
inline RegretTrace run_uniform_random(const Mdp& env, std::int64_t horizon,
                                      std::uint64_t seed) {
  if (horizon < 1) throw std::invalid_argument("run_uniform_random: horizon >= 1");
  detail::require_valid_env(env);
  RegretTrace trace;
  trace.rewards.resize(horizon);
  trace.epoch_starts = {1};
  trace.optimal_gain = relative_value_iteration(env, 1e-8).first.gain;
  Rng env_rng(derive_seed(seed, 0x73746570ULL));
  int s = env.start_state;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    const int a = static_cast<int>(env_rng.uniform_below(env.num_actions));
    const StepResult res = step(env, s, a, env_rng);
    trace.rewards[t - 1] = res.reward;
    s = res.next_state;
  }
  trace.cumulative_regret = compute_regret(trace.rewards, trace.optimal_gain);
  return trace;
}

/// Rollout of a fixed policy (used by tests to compare long-run averages
/// with planned gains).
inline RegretTrace run_fixed_policy(const Mdp& env, const Policy& pi,
                                    std::int64_t horizon, std::uint64_t seed) {
  detail::require_valid_env(env);
  RegretTrace trace;
  trace.rewards.resize(horizon);
  trace.epoch_starts = {1};
  trace.optimal_gain = relative_value_iteration(env, 1e-8).first.gain;
  Rng env_rng(derive_seed(seed, 0x73746570ULL));
  int s = env.start_state;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    const StepResult res = step(env, s, pi[s], env_rng);
    trace.rewards[t - 1] = res.reward;
    s = res.next_state;
  }
  trace.cumulative_regret = compute_regret(trace.rewards, trace.optimal_gain);
  return trace;
}

}  // namespace psrl

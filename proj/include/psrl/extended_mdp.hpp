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

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "psrl/mdp.hpp"
#include "psrl/rng.hpp"
#include "psrl/sampling.hpp"
#include "psrl/solvers.hpp"

namespace psrl {

/// Planning model whose action set is the original one crossed with psi
/// sampled transition vectors per pair: flat action a * psi + j transitions
/// by samples[s][a][j] and pays the base reward of (s, a).
struct ExtendedMdp {
  int num_states = 0;
  int num_actions = 0;  // base actions
  int psi = 0;          // samples per (s, a); uniform across pairs
  std::vector<std::vector<double>> base_rewards;        // [S][A]
  std::vector<std::vector<std::vector<ProbVec>>> samples;  // [S][A][psi]

  int flat_actions() const { return num_actions * psi; }
  int flat_index(int a, int j) const { return a * psi + j; }
  int base_action(int flat) const { return flat / psi; }
  int sample_index(int flat) const { return flat % psi; }
};

/// Draws the per-pair sample sets: pairs with at least cfg.small_n visits
/// use the boosted Dirichlet posterior, the rest the simple optimistic
/// sampler. Rewards are copied unchanged from the known table.
inline ExtendedMdp build_extended(const Mdp& env, const TransitionCounts& counts,
                                  const PsrlConfig& cfg, Rng& rng) {
  validate_config(cfg);
  ExtendedMdp ext;
  ext.num_states = env.num_states;
  ext.num_actions = env.num_actions;
  ext.psi = cfg.psi;
  ext.base_rewards = env.rewards;
  ext.samples.assign(
      env.num_states,
      std::vector<std::vector<ProbVec>>(env.num_actions,
                                        std::vector<ProbVec>(cfg.psi)));
  for (int s = 0; s < env.num_states; ++s) {
    for (int a = 0; a < env.num_actions; ++a) {
      if (counts.total[s][a] >= cfg.small_n) {
        const std::vector<double> alpha = boosted_params(counts, s, a, cfg);
        for (int j = 0; j < cfg.psi; ++j)
          ext.samples[s][a][j] = sample_dirichlet(alpha, rng);
      } else {
        for (int j = 0; j < cfg.psi; ++j)
          ext.samples[s][a][j] = simple_optimistic_sample(counts, s, a, rng);
      }
    }
  }
  return ext;
}

namespace detail {

struct ExtendedPlanningView {
  const ExtendedMdp* ext;
  int num_states() const { return ext->num_states; }
  int num_actions() const { return ext->flat_actions(); }
  double reward(int s, int flat) const {
    return ext->base_rewards[s][ext->base_action(flat)];
  }
  const ProbVec& transition(int s, int flat) const {
    return ext->samples[s][ext->base_action(flat)][ext->sample_index(flat)];
  }
};

}  // namespace detail

/// Relative value iteration over the flattened (action, sample) set. The
/// returned policy indexes flat actions; see map_extended_policy.
inline std::pair<GainBias, Policy> solve_extended(
    const ExtendedMdp& ext, double epsilon,
    std::int64_t max_iterations = kDefaultIterationCap) {
  if (ext.num_states <= 0 || ext.num_actions <= 0 || ext.psi <= 0)
    throw std::invalid_argument("solve_extended: empty extended model");
  return detail::relative_value_iteration_model(
      detail::ExtendedPlanningView{&ext}, epsilon, max_iterations);
}

/// Drops the sample index: flat (a, j) -> a.
inline Policy map_extended_policy(const Policy& pi_ext, int psi) {
  if (psi <= 0) throw std::invalid_argument("map_extended_policy: psi must be >= 1");
  Policy out(pi_ext.size());
  for (std::size_t s = 0; s < pi_ext.size(); ++s) out[s] = pi_ext[s] / psi;
  return out;
}

/// The extended model viewed as a plain MDP over flat actions (used to
/// measure diameters and evaluate fixed policies on the sampled model).
inline Mdp extended_as_mdp(const ExtendedMdp& ext, int start_state = 0) {
  Mdp m = make_mdp_shell(ext.num_states, ext.flat_actions(), start_state);
  for (int s = 0; s < ext.num_states; ++s) {
    for (int flat = 0; flat < ext.flat_actions(); ++flat) {
      m.rewards[s][flat] = ext.base_rewards[s][ext.base_action(flat)];
      m.transitions[s][flat] =
          ext.samples[s][ext.base_action(flat)][ext.sample_index(flat)];
    }
  }
  return m;
}

}  // namespace psrl

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
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "psrl/mdp.hpp"

namespace psrl {

class non_convergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class multichain_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class unreachable_target_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Output of average-reward planning: gain, bias vector (normalized so the
/// minimum entry is 0), its span, and the iteration count.
struct GainBias {
  double gain = 0.0;
  std::vector<double> bias;
  double span = 0.0;
  std::int64_t iterations = 0;
};

struct HittingTimes {
  int target = 0;
  std::vector<double> times;  // times[target] == 0
};

constexpr double kAperiodicityDamping = 0.99;
constexpr std::int64_t kDefaultIterationCap = 1'000'000;

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Relative value iteration over any model exposing num_states(),
// num_actions(), reward(s, a) and transition(s, a). The iteration runs on
// the damped model (1-alpha) I + alpha P, which has the same gain and the
// same greedy policy as the original; the returned bias is rescaled by
// alpha so that it satisfies the undamped optimality equations.
template <class Model>
std::pair<GainBias, Policy> relative_value_iteration_model(
    const Model& model, double epsilon, std::int64_t max_iterations) {
  const int S = model.num_states();
  const int num_actions = model.num_actions();
  if (S <= 0 || num_actions <= 0)
    throw std::invalid_argument("relative_value_iteration: empty model");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("relative_value_iteration: epsilon must be > 0");
  constexpr double alpha = kAperiodicityDamping;

  std::vector<double> h(S, 0.0), g(S, 0.0);
  Policy pi(S, 0);
  for (std::int64_t iter = 1; iter <= max_iterations; ++iter) {
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      int best_a = 0;
      for (int a = 0; a < num_actions; ++a) {
        const double v = model.reward(s, a) + alpha * dot(model.transition(s, a), h);
        if (v > best) {  // ties resolve to the lowest action index
          best = v;
          best_a = a;
        }
      }
      g[s] = best + (1.0 - alpha) * h[s];
      pi[s] = best_a;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int s = 0; s < S; ++s) {
      const double d = g[s] - h[s];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    const double ref = g[0];
    for (int s = 0; s < S; ++s) h[s] = g[s] - ref;
    if (hi - lo <= epsilon) {
      GainBias out;
      out.gain = 0.5 * (hi + lo);
      out.iterations = iter;
      const double mn = *std::min_element(h.begin(), h.end());
      out.bias.resize(S);
      for (int s = 0; s < S; ++s) out.bias[s] = alpha * (h[s] - mn);
      out.span = *std::max_element(out.bias.begin(), out.bias.end());
      return {std::move(out), std::move(pi)};
    }
  }
  throw non_convergence_error(
      "relative value iteration hit the iteration cap; the model may be "
      "non-communicating or have periodic structure");
}

struct MdpPlanningView {
  const Mdp* m;
  int num_states() const { return m->num_states; }
  int num_actions() const { return m->num_actions; }
  double reward(int s, int a) const { return m->rewards[s][a]; }
  const ProbVec& transition(int s, int a) const { return m->transitions[s][a]; }
};

}  // namespace detail

/// Solves the average-reward optimality equations by relative value
/// iteration; returns the gain/bias pair and the greedy policy. The gain is
/// within epsilon/2 of optimal at the stopping rule used (span of successive
/// increments <= epsilon).
inline std::pair<GainBias, Policy> relative_value_iteration(
    const Mdp& m, double epsilon = 1e-8,
    std::int64_t max_iterations = kDefaultIterationCap) {
  return detail::relative_value_iteration_model(detail::MdpPlanningView{&m},
                                                epsilon, max_iterations);
}

/// Gain of a Markov chain given by row-stochastic `rows` and per-state
/// rewards: solves q = q P, sum(q) = 1 and returns q . r. Throws
/// multichain_error when the stationary distribution is not unique.
inline double markov_chain_gain(const std::vector<std::vector<double>>& rows,
                                const std::vector<double>& rewards) {
  const int S = static_cast<int>(rows.size());
  if (S == 0 || static_cast<int>(rewards.size()) != S)
    throw std::invalid_argument("markov_chain_gain: size mismatch");
  Eigen::MatrixXd M(S, S);
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < S; ++j)
      M(i, j) = rows[j][i] - (i == j ? 1.0 : 0.0);
  for (int j = 0; j < S; ++j) M(S - 1, j) = 1.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(S);
  b(S - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible())
    throw multichain_error(
        "stationary distribution is not unique (multichain policy)");
  const Eigen::VectorXd q = lu.solve(b);
  if ((M * q - b).norm() > 1e-8)
    throw multichain_error("stationary-distribution solve is inconsistent");
  double gain = 0.0;
  for (int s = 0; s < S; ++s) gain += q(s) * rewards[s];
  return gain;
}

/// Gain of a fixed deterministic policy on `m` via the stationary
/// distribution of its chain.
inline double policy_gain(const Mdp& m, const Policy& pi) {
  const auto rows = policy_transition_matrix(m, pi);
  std::vector<double> r(m.num_states);
  for (int s = 0; s < m.num_states; ++s) r[s] = m.rewards[s][pi[s]];
  return markov_chain_gain(rows, r);
}

/// Exhaustive maximum of policy_gain over all A^S deterministic policies.
/// Multichain policies are skipped: a communicating MDP always admits a
/// unichain policy achieving the optimal gain, so the maximum is unaffected.
inline std::pair<double, Policy> enumerate_policies_oracle(const Mdp& m) {
  const double count = std::pow(static_cast<double>(m.num_actions),
                                static_cast<double>(m.num_states));
  if (count > 1e5)
    throw std::invalid_argument(
        "enumerate_policies_oracle: A^S exceeds the 1e5 size guard");
  Policy pi(m.num_states, 0);
  Policy best_pi;
  double best = -std::numeric_limits<double>::infinity();
  for (;;) {
    try {
      const double g = policy_gain(m, pi);
      if (g > best) {
        best = g;
        best_pi = pi;
      }
    } catch (const multichain_error&) {
    }
    int i = 0;
    while (i < m.num_states) {
      if (++pi[i] < m.num_actions) break;
      pi[i] = 0;
      ++i;
    }
    if (i == m.num_states) break;
  }
  if (best_pi.empty())
    throw multichain_error(
        "enumerate_policies_oracle: every deterministic policy is multichain");
  return {best, best_pi};
}

/// Minimum expected times to reach `target` from every state, by value
/// iteration on the first-step equations E = 1 + min_a P_{s,a}^T E with
/// E(target) pinned to 0. Runs on the damped model and rescales back.
inline HittingTimes min_hitting_times(const Mdp& m, int target) {
  const int S = m.num_states;
  const int A = m.num_actions;
  if (target < 0 || target >= S)
    throw std::invalid_argument("min_hitting_times: target out of range");
  constexpr double alpha = kAperiodicityDamping;

  // Fast structural check: every state must reach the target in the union
  // support graph, otherwise the iteration would diverge slowly.
  {
    std::vector<char> reach(S, 0);
    std::queue<int> frontier;
    reach[target] = 1;
    frontier.push(target);
    while (!frontier.empty()) {
      const int v = frontier.front();
      frontier.pop();
      for (int s = 0; s < S; ++s) {
        if (reach[s]) continue;
        bool edge = false;
        for (int a = 0; a < A && !edge; ++a)
          if (m.transitions[s][a][v] > 0.0) edge = true;
        if (edge) {
          reach[s] = 1;
          frontier.push(s);
        }
      }
    }
    for (int s = 0; s < S; ++s)
      if (!reach[s])
        throw unreachable_target_error(
            "min_hitting_times: target unreachable from state " +
            std::to_string(s));
  }

  std::vector<double> E(S, 0.0), En(S, 0.0);
  for (std::int64_t iter = 1; iter <= kDefaultIterationCap; ++iter) {
    double change = 0.0;
    double largest = 0.0;
    for (int s = 0; s < S; ++s) {
      if (s == target) {
        En[s] = 0.0;
        continue;
      }
      double best = std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a)
        best = std::min(best, detail::dot(m.transitions[s][a], E));
      En[s] = 1.0 + (1.0 - alpha) * E[s] + alpha * best;
      change = std::max(change, std::abs(En[s] - E[s]));
      largest = std::max(largest, En[s]);
    }
    E.swap(En);
    if (largest > 1e9)
      throw unreachable_target_error(
          "min_hitting_times: iteration diverged; no policy reaches the "
          "target almost surely");
    if (change <= 1e-9) {
      for (double& e : E) e *= alpha;
      return {target, std::move(E)};
    }
  }
  throw unreachable_target_error(
      "min_hitting_times: iteration cap reached without convergence; no "
      "policy reaches the target almost surely");
}

/// Diameter: max over ordered pairs s != s' of the minimal expected travel
/// time. Returns +infinity for non-communicating models; 0 for S == 1.
inline double diameter(const Mdp& m) {
  double d = 0.0;
  for (int target = 0; target < m.num_states; ++target) {
    HittingTimes ht;
    try {
      ht = min_hitting_times(m, target);
    } catch (const unreachable_target_error&) {
      return std::numeric_limits<double>::infinity();
    }
    for (int s = 0; s < m.num_states; ++s)
      if (s != target) d = std::max(d, ht.times[s]);
  }
  return d;
}

}  // namespace psrl

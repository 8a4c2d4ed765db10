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

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "psrl/rng.hpp"

namespace psrl {

/// Probability vector over next states, stored dense. Invariant (checked by
/// validate_mdp, not by the type): entries >= 0 and sum to 1 within 1e-12.
using ProbVec = std::vector<double>;

/// Deterministic stationary policy: one action index per state. Policies
/// over extended models use flattened (action, sample) indices; see
/// extended_mdp.hpp.
using Policy = std::vector<int>;

constexpr double kSimplexTol = 1e-12;

/// Tabular MDP with known deterministic rewards in [0, 1].
struct Mdp {
  int num_states = 0;
  int num_actions = 0;
  // transitions[s][a] is the distribution of the next state.
  std::vector<std::vector<ProbVec>> transitions;
  // rewards[s][a] in [0, 1].
  std::vector<std::vector<double>> rewards;
  int start_state = 0;
};

inline Mdp make_mdp_shell(int num_states, int num_actions, int start_state = 0) {
  Mdp m;
  m.num_states = num_states;
  m.num_actions = num_actions;
  m.start_state = start_state;
  m.transitions.assign(num_states,
                       std::vector<ProbVec>(num_actions, ProbVec(num_states, 0.0)));
  m.rewards.assign(num_states, std::vector<double>(num_actions, 0.0));
  return m;
}

struct MdpViolation {
  int state = 0;
  int action = 0;
  std::string message;
};

/// Collects all simplex/range violations; the model is valid iff the list
/// is empty.
inline std::vector<MdpViolation> validate_mdp(const Mdp& m) {
  std::vector<MdpViolation> out;
  if (m.num_states <= 0 || m.num_actions <= 0) {
    out.push_back({0, 0, "num_states and num_actions must be positive"});
    return out;
  }
  if (m.start_state < 0 || m.start_state >= m.num_states)
    out.push_back({m.start_state, 0, "start_state out of range"});
  if (static_cast<int>(m.transitions.size()) != m.num_states ||
      static_cast<int>(m.rewards.size()) != m.num_states) {
    out.push_back({0, 0, "table sizes do not match num_states"});
    return out;
  }
  for (int s = 0; s < m.num_states; ++s) {
    if (static_cast<int>(m.transitions[s].size()) != m.num_actions ||
        static_cast<int>(m.rewards[s].size()) != m.num_actions) {
      out.push_back({s, 0, "table sizes do not match num_actions"});
      continue;
    }
    for (int a = 0; a < m.num_actions; ++a) {
      const ProbVec& row = m.transitions[s][a];
      if (static_cast<int>(row.size()) != m.num_states) {
        out.push_back({s, a, "transition row has wrong length"});
        continue;
      }
      double sum = 0.0;
      bool negative = false;
      for (double p : row) {
        if (p < 0.0) negative = true;
        sum += p;
      }
      if (negative)
        out.push_back({s, a, "negative transition probability"});
      if (std::abs(sum - 1.0) > kSimplexTol) {
        std::ostringstream msg;
        msg << "transition row sums to " << sum;
        out.push_back({s, a, msg.str()});
      }
      const double r = m.rewards[s][a];
      if (r < 0.0 || r > 1.0) {
        std::ostringstream msg;
        msg << "reward " << r << " outside [0,1]";
        out.push_back({s, a, msg.str()});
      }
    }
  }
  return out;
}

struct StepResult {
  int next_state;
  double reward;
};

/// One environment transition. The next state is drawn by inverse CDF over
/// the stored index order, which pins the trace for a given uniform stream.
inline StepResult step(const Mdp& m, int s, int a, Rng& rng) {
  if (s < 0 || s >= m.num_states || a < 0 || a >= m.num_actions)
    throw std::invalid_argument("step: state or action index out of range");
  const int next = static_cast<int>(rng.categorical(m.transitions[s][a]));
  return {next, m.rewards[s][a]};
}

/// Row-stochastic S x S matrix of the chain induced by `pi`.
inline std::vector<std::vector<double>> policy_transition_matrix(
    const Mdp& m, const Policy& pi) {
  if (static_cast<int>(pi.size()) != m.num_states)
    throw std::invalid_argument("policy_transition_matrix: policy size mismatch");
  std::vector<std::vector<double>> rows(m.num_states);
  for (int s = 0; s < m.num_states; ++s) {
    const int a = pi[s];
    if (a < 0 || a >= m.num_actions)
      throw std::invalid_argument("policy_transition_matrix: action out of range");
    rows[s] = m.transitions[s][a];
  }
  return rows;
}

namespace detail {
inline void write_double(std::ostream& os, double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  os.write(buf, res.ptr - buf);
}
}  // namespace detail

/// Plain-text MDP format: header "S A start", then S*A lines
/// "s a r p_0 ... p_{S-1}".
inline void write_mdp(std::ostream& os, const Mdp& m) {
  os << m.num_states << ' ' << m.num_actions << ' ' << m.start_state << '\n';
  for (int s = 0; s < m.num_states; ++s) {
    for (int a = 0; a < m.num_actions; ++a) {
      os << s << ' ' << a << ' ';
      detail::write_double(os, m.rewards[s][a]);
      for (double p : m.transitions[s][a]) {
        os << ' ';
        detail::write_double(os, p);
      }
      os << '\n';
    }
  }
}

inline Mdp read_mdp(std::istream& is) {
  int S = 0, A = 0, start = 0;
  if (!(is >> S >> A >> start))
    throw std::runtime_error("read_mdp: malformed header");
  if (S <= 0 || A <= 0 || start < 0 || start >= S)
    throw std::runtime_error("read_mdp: invalid header values");
  Mdp m = make_mdp_shell(S, A, start);
  for (int line = 0; line < S * A; ++line) {
    int s = 0, a = 0;
    double r = 0.0;
    if (!(is >> s >> a >> r))
      throw std::runtime_error("read_mdp: truncated row");
    if (s < 0 || s >= S || a < 0 || a >= A)
      throw std::runtime_error("read_mdp: row indices out of range");
    m.rewards[s][a] = r;
    for (int i = 0; i < S; ++i) {
      if (!(is >> m.transitions[s][a][i]))
        throw std::runtime_error("read_mdp: truncated transition row");
    }
  }
  return m;
}

}  // namespace psrl

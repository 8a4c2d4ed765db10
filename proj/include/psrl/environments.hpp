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
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "psrl/mdp.hpp"
#include "psrl/rng.hpp"

namespace psrl {

/// Chain of n states. LEFT (action 0) moves left deterministically and pays
/// 0.005 at the left end; RIGHT (action 1) advances with probability 0.35,
/// stays with 0.6 and slips back with 0.05 (0.6 stay / 0.4 move at the two
/// ends), paying 1 at the right end. The standard hard exploration instance
/// for this setting.
inline Mdp make_riverswim(int n_states) {
  if (n_states < 2)
    throw std::invalid_argument("make_riverswim: need at least 2 states");
  constexpr int kLeft = 0;
  constexpr int kRight = 1;
  Mdp m = make_mdp_shell(n_states, 2, 0);
  for (int s = 0; s < n_states; ++s) {
    m.transitions[s][kLeft][std::max(0, s - 1)] = 1.0;
    if (s == 0) {
      m.transitions[s][kRight][0] = 0.6;
      m.transitions[s][kRight][1] = 0.4;
    } else if (s == n_states - 1) {
      m.transitions[s][kRight][s] = 0.6;
      m.transitions[s][kRight][s - 1] = 0.4;
    } else {
      m.transitions[s][kRight][s + 1] = 0.35;
      m.transitions[s][kRight][s] = 0.6;
      m.transitions[s][kRight][s - 1] = 0.05;
    }
  }
  m.rewards[0][kLeft] = 0.005;
  m.rewards[n_states - 1][kRight] = 1.0;
  return m;
}

/// Random instance: rows drawn Dirichlet(1, ..., 1) and blended with the
/// uniform distribution at weight `mixing`, so every entry is at least
/// mixing / S and the instance is communicating by construction. Rewards
/// uniform in [0, 1].
inline Mdp make_random_communicating(int S, int A, std::uint64_t seed,
                                     double mixing = 0.1) {
  if (S < 1 || A < 1)
    throw std::invalid_argument("make_random_communicating: S, A must be >= 1");
  if (!(mixing > 0.0) || mixing > 1.0)
    throw std::invalid_argument("make_random_communicating: mixing in (0,1]");
  Rng rng(derive_seed(seed, 0x656e76ULL));
  Mdp m = make_mdp_shell(S, A, 0);
  const std::vector<double> ones(S, 1.0);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      ProbVec row = rng.dirichlet(ones);
      for (int i = 0; i < S; ++i)
        row[i] = (1.0 - mixing) * row[i] + mixing / S;
      m.transitions[s][a] = std::move(row);
      m.rewards[s][a] = rng.uniform();
    }
  }
  return m;
}

/// Two states, one action, flip probabilities p and q. Analytic ground
/// truth: hitting times 1/p and 1/q, stationary distribution
/// (q, p) / (p + q).
inline Mdp make_two_state_chain(double p, double q,
                                const std::vector<double>& rewards = {1.0, 0.0}) {
  if (!(p > 0.0) || p > 1.0 || !(q > 0.0) || q > 1.0)
    throw std::invalid_argument("make_two_state_chain: p, q must be in (0,1]");
  if (rewards.size() != 2)
    throw std::invalid_argument("make_two_state_chain: need 2 rewards");
  Mdp m = make_mdp_shell(2, 1, 0);
  m.transitions[0][0] = {1.0 - p, p};
  m.transitions[1][0] = {q, 1.0 - q};
  m.rewards[0][0] = rewards[0];
  m.rewards[1][0] = rewards[1];
  return m;
}

namespace detail {

// Parses "name(arg1,arg2,...)" (or bare "name") into name + args.
inline std::pair<std::string, std::vector<std::string>> parse_call(
    const std::string& text) {
  const auto open = text.find('(');
  if (open == std::string::npos) return {text, {}};
  if (text.back() != ')')
    throw std::invalid_argument("malformed spec (missing ')'): " + text);
  std::vector<std::string> args;
  std::string inner = text.substr(open + 1, text.size() - open - 2);
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) args.push_back(item.substr(b, e - b + 1));
  }
  return {text.substr(0, open), args};
}

}  // namespace detail

/// Instantiates a generator from a textual spec, e.g. "riverswim(6)",
/// "random(4,3,7,0.2)" (S, A, seed, mixing) or
/// "two_state_chain(0.5,0.5)" with optional rewards r0, r1.
inline Mdp make_environment(const std::string& spec) {
  const auto [name, args] = detail::parse_call(spec);
  const auto num = [&](std::size_t i) { return std::stod(args.at(i)); };
  if (name == "riverswim") {
    if (args.size() != 1)
      throw std::invalid_argument("riverswim expects (n_states)");
    return make_riverswim(static_cast<int>(num(0)));
  }
  if (name == "random") {
    if (args.size() != 4)
      throw std::invalid_argument("random expects (S,A,seed,mixing)");
    return make_random_communicating(static_cast<int>(num(0)),
                                     static_cast<int>(num(1)),
                                     static_cast<std::uint64_t>(num(2)), num(3));
  }
  if (name == "two_state_chain") {
    if (args.size() == 2) return make_two_state_chain(num(0), num(1));
    if (args.size() == 4)
      return make_two_state_chain(num(0), num(1), {num(2), num(3)});
    throw std::invalid_argument("two_state_chain expects (p,q[,r0,r1])");
  }
  throw std::invalid_argument("unknown environment generator: " + name);
}

}  // namespace psrl

// Copyright 2026 The vepm Authors.
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

#ifndef VEPM_TESTS_TEST_SUPPORT_HPP_
#define VEPM_TESTS_TEST_SUPPORT_HPP_

#include <algorithm>
#include <string>
#include <vector>

#include "vepm/core_mdp.hpp"
#include "vepm/random.hpp"

namespace vepm::testing {

/// Single-feature model from explicit rows (rows[s][a]) and rewards.
inline TabularModel make_model(const std::vector<std::vector<std::vector<TransitionTable::Entry>>>& rows,
                               const std::vector<std::vector<double>>& rewards, double discount,
                               std::vector<StateIndex> terminal = {}, double r_max = -1.0) {
  const std::size_t states = rows.size();
  const std::size_t actions = rows.front().size();
  TransitionTable::Builder builder(states, actions);
  TabularModel::Parts parts;
  parts.schema = FeatureSchema({{"s", states}});
  parts.action_count = actions;
  double top = 0.0;
  for (std::size_t s = 0; s < states; ++s) {
    for (std::size_t a = 0; a < actions; ++a) {
      builder.add_row(rows[s][a]);
      parts.rewards.push_back(rewards[s][a]);
      top = std::max(top, rewards[s][a]);
    }
  }
  parts.transitions = std::move(builder).finish();
  parts.discount = discount;
  parts.terminal = std::move(terminal);
  parts.r_max = r_max >= 0.0 ? r_max : top;
  return TabularModel(std::move(parts));
}

/// Random valid model: each row has 1..max_support successors, rewards are
/// uniform on [0, 1] and about one state in eight is terminal.
inline TabularModel random_model(Rng& rng, std::size_t states, std::size_t actions, double discount,
                                 std::size_t max_support = 6) {
  std::vector<char> terminal(states, 0);
  std::vector<StateIndex> terminal_list;
  for (std::size_t s = 0; s < states; ++s) {
    if (rng.below(8) == 0) {
      terminal[s] = 1;
      terminal_list.push_back(static_cast<StateIndex>(s));
    }
  }
  TransitionTable::Builder builder(states, actions);
  TabularModel::Parts parts;
  parts.schema = FeatureSchema({{"s", states}});
  parts.action_count = actions;
  for (std::size_t s = 0; s < states; ++s) {
    for (std::size_t a = 0; a < actions; ++a) {
      if (terminal[s]) {
        builder.add_row({{static_cast<StateIndex>(s), 1.0}});
        parts.rewards.push_back(0.0);
        continue;
      }
      const std::size_t support = 1 + rng.below(max_support);
      std::vector<double> w(support);
      double total = 0.0;
      for (double& x : w) total += (x = 0.05 + rng.uniform());
      std::vector<TransitionTable::Entry> row;
      for (double x : w) row.push_back({static_cast<StateIndex>(rng.below(states)), x / total});
      builder.add_row(std::move(row));
      parts.rewards.push_back(rng.uniform());
    }
  }
  parts.transitions = std::move(builder).finish();
  parts.discount = discount;
  parts.terminal = std::move(terminal_list);
  parts.r_max = 1.0;
  return TabularModel(std::move(parts));
}

}  // namespace vepm::testing

#endif  // VEPM_TESTS_TEST_SUPPORT_HPP_

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

// Count-based model estimation, certainty-equivalence planning loss and the
// finite-sample bound calculators that go with them.

#ifndef VEPM_ESTIMATION_HPP_
#define VEPM_ESTIMATION_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "vepm/core_mdp.hpp"
#include "vepm/planners.hpp"

namespace vepm {

/// count[s][a][s'] and N[s][a]. Rows are stored sparsely, sorted by next state.
class CountTable {
 public:
  struct Cell {
    StateIndex next;
    std::uint64_t count;
    bool operator==(const Cell&) const = default;
  };

  CountTable() = default;
  CountTable(std::size_t state_count, std::size_t action_count);

  std::size_t state_count() const { return state_count_; }
  std::size_t action_count() const { return action_count_; }
  void add(StateIndex s, ActionIndex a, StateIndex next, std::uint64_t count = 1);
  std::uint64_t total(StateIndex s, ActionIndex a) const { return totals_[index(s, a)]; }
  std::uint64_t count(StateIndex s, ActionIndex a, StateIndex next) const;
  std::span<const Cell> row(StateIndex s, ActionIndex a) const { return rows_[index(s, a)]; }
  /// Number of (s,a) pairs with at least one observation.
  std::size_t visited_pairs() const;

  bool operator==(const CountTable&) const = default;

 private:
  std::size_t index(StateIndex s, ActionIndex a) const {
    return static_cast<std::size_t>(s) * action_count_ + a;
  }
  void check(StateIndex s, ActionIndex a, StateIndex next) const;

  std::size_t state_count_ = 0;
  std::size_t action_count_ = 0;
  std::vector<std::vector<Cell>> rows_;
  std::vector<std::uint64_t> totals_;
};

struct Transition {
  StateIndex state;
  ActionIndex action;
  StateIndex next_state;
};

/// n next-state draws from every non-terminal (s,a) of m. Each row's counts
/// are drawn as one multinomial(n, p(s,a,.)) sample, which has the law of n
/// i.i.d. draws; this keeps very large n cheap. Deterministic given seed.
CountTable sample_dataset(const TabularModel& m, std::uint64_t n, std::uint64_t seed);

/// p(s,a,s') = count / N for non-terminal pairs; rewards, discount, terminal
/// set and r_max copied from truth_rewards. Throws EstimationError on a
/// non-terminal pair with N = 0.
TabularModel estimate_model(const TabularModel& truth_rewards, const CountTable& counts);

/// Estimate for a learning agent: visited pairs use count ratios and the
/// mean observed reward (`reward_sums` is indexed like rewards()); unvisited
/// non-terminal pairs become self-loops paying `unvisited_reward`.
TabularModel estimate_visited_model(const TabularModel& structure, const CountTable& counts,
                                    std::span<const double> reward_sums, double unvisited_reward);

void update_counts_from_trajectory(CountTable& counts, std::span<const Transition> trajectory);

/// Largest L1 distance between matching rows of two models.
double max_row_l1_error(const TabularModel& a, const TabularModel& b);

/// ||V*_truth - V^pi_truth||_inf where pi is optimal in `estimated`.
double certainty_equivalence_loss(const TabularModel& truth, const TabularModel& estimated,
                                  const PlanningConfig& cfg = {});

/// Solved quantities of the truth model reused across many estimates.
struct TruthSolution {
  ValueTable optimal_values;
  Policy optimal_policy;
};
TruthSolution solve_truth(const TabularModel& truth, const PlanningConfig& cfg = {});

/// Planning loss together with both sides of the two perturbation
/// inequalities that bound it:
///   loss <= 2 max_{pi in {pi*, pi~}} ||V^pi_truth - V^pi_est||_inf
///   ||Q^pi_truth - Q^pi_est||_inf
///       <= 1/(1-gamma) max_{s,a} |r~ + gamma <p~, V^pi_truth> - Q^pi_truth|
struct CertaintyEquivalenceReport {
  double loss = 0.0;
  double value_gap_bound = 0.0;           // right side of the first inequality
  double q_gap[2] = {0.0, 0.0};           // left side of the second, for pi*, pi~
  double q_gap_bound[2] = {0.0, 0.0};     // right side of the second
  double numerical_slack = 0.0;           // accuracy of the computed quantities
  Policy estimated_policy;

  bool value_gap_inequality_holds() const { return loss <= value_gap_bound + numerical_slack; }
  bool q_gap_inequality_holds() const {
    return q_gap[0] <= q_gap_bound[0] + numerical_slack && q_gap[1] <= q_gap_bound[1] + numerical_slack;
  }
};

CertaintyEquivalenceReport certainty_equivalence_report(const TabularModel& truth, const TabularModel& estimated,
                                                        const PlanningConfig& cfg = {},
                                                        const TruthSolution* truth_solution = nullptr);

struct BoundParams {
  double delta = 0.05;
  double epsilon = 0.01;
  std::uint64_t n = 1;  // samples per (f,a)
  /// Natural log of the policy-class size |Pi|; sizes like 3^512 do not fit
  /// an integer, so the bound takes the log directly.
  double log_policy_class_size = 0.0;

  void validate() const;
};

/// Loose policy-class surrogate |A|^|F|, as a natural log.
double loose_log_policy_class_size(std::size_t state_count, std::size_t action_count);

/// 2 r_max / (1-gamma)^2 * sqrt( log(2 |F| |A| |Pi| / delta) / (2n) ).
double planning_loss_bound(std::size_t state_count, std::size_t action_count, const BoundParams& params,
                           double r_max, double gamma);

struct SampleBudget {
  std::uint64_t samples_per_pair = 0;  // N
  std::uint64_t epochs = 0;            // k
  /// N |F| |A|, the total number of generative-model calls.
  double total_samples = 0.0;
};

/// N = ceil(4 gamma^2 / ((1-gamma)^4 eps^2) * log(2 |F| |A| / delta)),
/// k = ceil(log(eps (1-gamma) / 2) / log gamma).
SampleBudget sample_complexity_budget(std::size_t state_count, std::size_t action_count, double epsilon,
                                      double gamma, double delta);

}  // namespace vepm

#endif  // VEPM_ESTIMATION_HPP_

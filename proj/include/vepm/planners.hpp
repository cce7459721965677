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

#ifndef VEPM_PLANNERS_HPP_
#define VEPM_PLANNERS_HPP_

#include <cstddef>
#include <cstdint>
#include <string>

#include "vepm/core_mdp.hpp"

namespace vepm {

enum class TieBreak { kLowestIndex, kHighestIndex };

std::string to_string(TieBreak rule);
TieBreak parse_tie_break(const std::string& text);

struct PlanningConfig {
  double tol = kDefaultTolerance;  // Bellman residual threshold
  std::size_t max_sweeps = 100'000;
  TieBreak tie_break = TieBreak::kLowestIndex;

  void validate() const;
};

struct SweepStats {
  double wall_time = 0.0;  // seconds, monotonic clock
  std::uint64_t multiply_add_count = 0;
  double bellman_residual = 0.0;  // ||out - in||_inf
};

struct PlanResult {
  ValueTable values;
  Policy policy;
  std::size_t sweeps = 0;
  double residual = 0.0;
};

/// Config whose residual threshold bounds the distance of the final iterate
/// from the fixed point by cfg.tol: tol * (1 - discount) / discount.
PlanningConfig value_accuracy_config(const PlanningConfig& cfg, double discount);

/// Synchronous value iteration from V = 0 until the Bellman residual drops to
/// cfg.tol. Throws ConvergenceError after cfg.max_sweeps.
PlanResult value_iteration(const TabularModel& m, const PlanningConfig& cfg = {});

/// Model-based Q-value iteration for a fixed number of epochs:
/// Q^0 = 0, V^0 = 0, Q^k(f,a) = r(f,a) + discount * <p(f,a,.), V^{k-1}>,
/// V^k(f) = max_a Q^k(f,a). Returns Q^epochs.
QTable q_value_iteration(const TabularModel& m, std::size_t epochs);

struct QIterationResult {
  QTable q;
  std::size_t epochs = 0;
};

/// The same recursion run until max |Q^k - Q^{k-1}| <= cfg.tol.
QIterationResult q_value_iteration_to_convergence(const TabularModel& m, const PlanningConfig& cfg = {});
/// Same stopping rule, starting from `initial` instead of zero.
QIterationResult q_value_iteration_to_convergence(const TabularModel& m, const PlanningConfig& cfg, QTable initial);

Policy greedy_policy(const QTable& q, TieBreak tie_break = TieBreak::kLowestIndex);
Policy greedy_policy(const TabularModel& m, std::span<const double> v, TieBreak tie_break = TieBreak::kLowestIndex);

/// One Bellman-optimality backup over every state.
std::pair<ValueTable, SweepStats> vi_single_sweep(const TabularModel& m, std::span<const double> v_in);

/// Number of multiply-adds in one full sweep: the stored entries of every row.
std::uint64_t sweep_multiply_adds(const TabularModel& m);

}  // namespace vepm

#endif  // VEPM_PLANNERS_HPP_

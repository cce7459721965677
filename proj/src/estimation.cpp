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

#include "vepm/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "vepm/abstraction.hpp"
#include "vepm/error.hpp"
#include "vepm/random.hpp"

namespace vepm {

// ---------------------------------------------------------------------------
// CountTable
// ---------------------------------------------------------------------------

CountTable::CountTable(std::size_t state_count, std::size_t action_count)
    : state_count_(state_count),
      action_count_(action_count),
      rows_(state_count * action_count),
      totals_(state_count * action_count, 0) {}

void CountTable::check(StateIndex s, ActionIndex a, StateIndex next) const {
  if (s >= state_count_ || next >= state_count_ || a >= action_count_) {
    throw ValidationError("count index (" + std::to_string(s) + ", " + std::to_string(a) + ", " +
                          std::to_string(next) + ") outside a " + std::to_string(state_count_) + "x" +
                          std::to_string(action_count_) + " table");
  }
}

void CountTable::add(StateIndex s, ActionIndex a, StateIndex next, std::uint64_t count) {
  check(s, a, next);
  if (count == 0) return;
  auto& row = rows_[index(s, a)];
  auto it = std::lower_bound(row.begin(), row.end(), next, [](const Cell& c, StateIndex n) { return c.next < n; });
  if (it != row.end() && it->next == next) {
    it->count += count;
  } else {
    row.insert(it, Cell{next, count});
  }
  totals_[index(s, a)] += count;
}

std::uint64_t CountTable::count(StateIndex s, ActionIndex a, StateIndex next) const {
  check(s, a, next);
  const auto& row = rows_[index(s, a)];
  auto it = std::lower_bound(row.begin(), row.end(), next, [](const Cell& c, StateIndex n) { return c.next < n; });
  return it != row.end() && it->next == next ? it->count : 0;
}

std::size_t CountTable::visited_pairs() const {
  return static_cast<std::size_t>(std::count_if(totals_.begin(), totals_.end(), [](auto t) { return t > 0; }));
}

void update_counts_from_trajectory(CountTable& counts, std::span<const Transition> trajectory) {
  for (const Transition& t : trajectory) counts.add(t.state, t.action, t.next_state);
}

// ---------------------------------------------------------------------------
// Sampling and estimation
// ---------------------------------------------------------------------------

CountTable sample_dataset(const TabularModel& m, std::uint64_t n, std::uint64_t seed) {
  if (n < 1) throw ValidationError("sample_dataset needs n >= 1");
  CountTable counts(m.state_count(), m.action_count());
  Rng rng(seed);
  const auto limit = static_cast<std::int64_t>(n);
  for (std::size_t s = 0; s < m.state_count(); ++s) {
    const auto st = static_cast<StateIndex>(s);
    if (m.is_terminal(st)) continue;
    for (ActionIndex a = 0; a < m.action_count(); ++a) {
      const auto row = m.row(st, a);
      // Conditional binomials: draw entry i given the draws left for i..end.
      std::int64_t remaining = limit;
      double mass_left = 1.0;
      std::size_t last = row.size();
      for (std::size_t i = row.size(); i-- > 0;) {
        if (row.prob[i] > 0.0) {
          last = i;
          break;
        }
      }
      for (std::size_t i = 0; i < row.size() && remaining > 0; ++i) {
        const double p = row.prob[i];
        if (p <= 0.0) continue;
        std::int64_t k = remaining;
        if (i != last) {
          k = rng.binomial(remaining, std::clamp(p / mass_left, 0.0, 1.0));
          mass_left -= p;
        }
        if (k > 0) counts.add(st, a, row.next[i], static_cast<std::uint64_t>(k));
        remaining -= k;
      }
    }
  }
  return counts;
}

namespace {

void require_same_shape(const TabularModel& model, const CountTable& counts) {
  if (counts.state_count() != model.state_count() || counts.action_count() != model.action_count()) {
    throw ValidationError("count table is " + std::to_string(counts.state_count()) + "x" +
                          std::to_string(counts.action_count()) + ", model is " +
                          std::to_string(model.state_count()) + "x" + std::to_string(model.action_count()));
  }
}

std::vector<TransitionTable::Entry> ratio_row(std::span<const CountTable::Cell> cells, std::uint64_t total) {
  std::vector<TransitionTable::Entry> row;
  row.reserve(cells.size());
  const double n = static_cast<double>(total);
  for (const auto& c : cells) row.push_back({c.next, static_cast<double>(c.count) / n});
  return row;
}

TabularModel with_parts(const TabularModel& structure, TransitionTable transitions, std::vector<double> rewards) {
  TabularModel::Parts parts;
  parts.schema = structure.schema();
  parts.sentinels = structure.sentinels();
  parts.action_count = structure.action_count();
  parts.transitions = std::move(transitions);
  parts.rewards = std::move(rewards);
  parts.discount = structure.discount();
  parts.terminal = structure.terminal_states();
  parts.r_max = structure.r_max();
  return TabularModel(std::move(parts));
}

}  // namespace

TabularModel estimate_model(const TabularModel& truth_rewards, const CountTable& counts) {
  require_same_shape(truth_rewards, counts);
  TransitionTable::Builder builder(truth_rewards.state_count(), truth_rewards.action_count());
  for (std::size_t s = 0; s < truth_rewards.state_count(); ++s) {
    const auto st = static_cast<StateIndex>(s);
    for (ActionIndex a = 0; a < truth_rewards.action_count(); ++a) {
      if (truth_rewards.is_terminal(st)) {
        builder.add_row({{st, 1.0}});
        continue;
      }
      const std::uint64_t total = counts.total(st, a);
      if (total == 0) {
        throw EstimationError("no samples for non-terminal pair (state " + std::to_string(s) + ", action " +
                              std::to_string(a) + ")");
      }
      builder.add_row(ratio_row(counts.row(st, a), total));
    }
  }
  return with_parts(truth_rewards, std::move(builder).finish(), truth_rewards.rewards());
}

TabularModel estimate_visited_model(const TabularModel& structure, const CountTable& counts,
                                    std::span<const double> reward_sums, double unvisited_reward) {
  require_same_shape(structure, counts);
  const std::size_t actions = structure.action_count();
  if (reward_sums.size() != structure.state_count() * actions) {
    throw ValidationError("reward sums do not match the model shape");
  }
  TransitionTable::Builder builder(structure.state_count(), actions);
  std::vector<double> rewards(structure.state_count() * actions, 0.0);
  for (std::size_t s = 0; s < structure.state_count(); ++s) {
    const auto st = static_cast<StateIndex>(s);
    for (ActionIndex a = 0; a < actions; ++a) {
      const std::size_t i = s * actions + a;
      const std::uint64_t total = counts.total(st, a);
      if (structure.is_terminal(st)) {
        builder.add_row({{st, 1.0}});
      } else if (total == 0) {
        builder.add_row({{st, 1.0}});
        rewards[i] = unvisited_reward;
      } else {
        builder.add_row(ratio_row(counts.row(st, a), total));
        rewards[i] = std::clamp(reward_sums[i] / static_cast<double>(total), 0.0, structure.r_max());
      }
    }
  }
  return with_parts(structure, std::move(builder).finish(), std::move(rewards));
}

double max_row_l1_error(const TabularModel& a, const TabularModel& b) {
  if (a.state_count() != b.state_count() || a.action_count() != b.action_count()) {
    throw ValidationError("models differ in shape");
  }
  double worst = 0.0;
  std::vector<double> scratch(a.state_count(), 0.0);
  for (std::size_t s = 0; s < a.state_count(); ++s) {
    const auto st = static_cast<StateIndex>(s);
    for (ActionIndex act = 0; act < a.action_count(); ++act) {
      const auto ra = a.row(st, act);
      const auto rb = b.row(st, act);
      for (std::size_t i = 0; i < ra.size(); ++i) scratch[ra.next[i]] += ra.prob[i];
      for (std::size_t i = 0; i < rb.size(); ++i) scratch[rb.next[i]] -= rb.prob[i];
      double l1 = 0.0;
      for (std::size_t i = 0; i < ra.size(); ++i) {
        l1 += std::abs(scratch[ra.next[i]]);
        scratch[ra.next[i]] = 0.0;
      }
      for (std::size_t i = 0; i < rb.size(); ++i) {
        l1 += std::abs(scratch[rb.next[i]]);
        scratch[rb.next[i]] = 0.0;
      }
      worst = std::max(worst, l1);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Certainty equivalence
// ---------------------------------------------------------------------------

namespace {

void require_same_space(const TabularModel& truth, const TabularModel& estimated) {
  if (!(truth.schema() == estimated.schema()) || truth.state_count() != estimated.state_count() ||
      truth.action_count() != estimated.action_count()) {
    throw ValidationError("truth and estimated models are defined over different spaces");
  }
}

double max_abs_diff(const QTable& a, const QTable& b) { return inf_norm_diff(a.values(), b.values()); }

}  // namespace

TruthSolution solve_truth(const TabularModel& truth, const PlanningConfig& cfg) {
  TruthSolution out;
  out.optimal_values = accurate_optimal_values(truth, cfg);
  out.optimal_policy = greedy_policy(truth, out.optimal_values, cfg.tie_break);
  return out;
}

double certainty_equivalence_loss(const TabularModel& truth, const TabularModel& estimated,
                                  const PlanningConfig& cfg) {
  require_same_space(truth, estimated);
  const PlanningConfig accurate = value_accuracy_config(cfg, truth.discount());
  const ValueTable optimal = value_iteration(truth, accurate).values;
  const Policy pi = value_iteration(estimated, accurate).policy;
  return inf_norm_diff(optimal, policy_evaluation(truth, pi, accurate.tol));
}

CertaintyEquivalenceReport certainty_equivalence_report(const TabularModel& truth, const TabularModel& estimated,
                                                        const PlanningConfig& cfg,
                                                        const TruthSolution* truth_solution) {
  require_same_space(truth, estimated);
  TruthSolution solved;
  if (truth_solution == nullptr) {
    solved = solve_truth(truth, cfg);
    truth_solution = &solved;
  }
  const PlanningConfig accurate = value_accuracy_config(cfg, truth.discount());
  const double gamma = truth.discount();

  CertaintyEquivalenceReport report;
  report.estimated_policy = value_iteration(estimated, accurate).policy;
  const Policy* policies[2] = {&truth_solution->optimal_policy, &report.estimated_policy};

  ValueTable truth_values[2];
  truth_values[0] = truth_solution->optimal_values;
  truth_values[1] = policy_evaluation(truth, report.estimated_policy, accurate.tol);
  report.loss = inf_norm_diff(truth_solution->optimal_values, truth_values[1]);

  double value_gap = 0.0;
  for (int i = 0; i < 2; ++i) {
    const ValueTable est_values = policy_evaluation(estimated, *policies[i], accurate.tol);
    value_gap = std::max(value_gap, inf_norm_diff(truth_values[i], est_values));

    const QTable q_truth = action_values(truth, truth_values[i]);
    const QTable q_est = action_values(estimated, est_values);
    report.q_gap[i] = max_abs_diff(q_truth, q_est);
    // One backup of V^pi_truth through the estimated model.
    const QTable one_step = action_values(estimated, truth_values[i]);
    report.q_gap_bound[i] = max_abs_diff(one_step, q_truth) / (1.0 - gamma);
  }
  report.value_gap_bound = 2.0 * value_gap;
  // Each solved value table is within cfg.tol of its fixed point.
  report.numerical_slack = 4.0 * cfg.tol / (1.0 - gamma);
  return report;
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

void BoundParams::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (n < 1) throw ValidationError("n must be at least 1");
  if (!(log_policy_class_size >= 0.0)) throw ValidationError("policy class size must be at least 1");
}

double loose_log_policy_class_size(std::size_t state_count, std::size_t action_count) {
  return static_cast<double>(state_count) * std::log(static_cast<double>(action_count));
}

double planning_loss_bound(std::size_t state_count, std::size_t action_count, const BoundParams& params,
                           double r_max, double gamma) {
  params.validate();
  const double log_term = std::log(2.0) + std::log(static_cast<double>(state_count)) +
                          std::log(static_cast<double>(action_count)) + params.log_policy_class_size -
                          std::log(params.delta);
  const double scale = 2.0 * r_max / ((1.0 - gamma) * (1.0 - gamma));
  return scale * std::sqrt(log_term / (2.0 * static_cast<double>(params.n)));
}

SampleBudget sample_complexity_budget(std::size_t state_count, std::size_t action_count, double epsilon,
                                      double gamma, double delta) {
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  const double pairs = static_cast<double>(state_count) * static_cast<double>(action_count);
  const double one_minus = 1.0 - gamma;
  const double n = 4.0 * gamma * gamma / (std::pow(one_minus, 4) * epsilon * epsilon) * std::log(2.0 * pairs / delta);
  const double k = std::log(epsilon * one_minus / 2.0) / std::log(gamma);
  SampleBudget out;
  out.samples_per_pair = static_cast<std::uint64_t>(std::ceil(n));
  out.epochs = static_cast<std::uint64_t>(std::ceil(std::max(0.0, k)));
  out.total_samples = static_cast<double>(out.samples_per_pair) * pairs;
  return out;
}

}  // namespace vepm

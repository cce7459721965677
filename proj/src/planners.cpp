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

#include "vepm/planners.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "vepm/error.hpp"

namespace vepm {

std::string to_string(TieBreak rule) {
  return rule == TieBreak::kLowestIndex ? "lowest_index" : "highest_index";
}

TieBreak parse_tie_break(const std::string& text) {
  if (text == "lowest_index") return TieBreak::kLowestIndex;
  if (text == "highest_index") return TieBreak::kHighestIndex;
  throw ConfigError("unknown tie-break rule '" + text + "'");
}

void PlanningConfig::validate() const {
  if (!(tol > 0.0)) throw ConfigError("planning tolerance must be positive");
  if (max_sweeps < 1) throw ConfigError("max_sweeps must be at least 1");
}

PlanningConfig value_accuracy_config(const PlanningConfig& cfg, double discount) {
  PlanningConfig out = cfg;
  if (discount > 0.0) out.tol = cfg.tol * (1.0 - discount) / discount;
  return out;
}

namespace {

// One optimality backup over all states. Each state's sum runs in row order,
// so the result is bit-identical for identical inputs.
double optimality_sweep(const TabularModel& m, std::span<const double> in, std::span<double> out) {
  const std::size_t n = m.state_count();
  double residual = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const auto st = static_cast<StateIndex>(s);
    double best = backup(m, st, 0, in);
    for (ActionIndex a = 1; a < m.action_count(); ++a) best = std::max(best, backup(m, st, a, in));
    out[s] = best;
    residual = std::max(residual, std::abs(best - in[s]));
  }
  return residual;
}

ActionIndex argmax(std::span<const double> row, TieBreak tie_break) {
  ActionIndex best = 0;
  for (ActionIndex a = 1; a < row.size(); ++a) {
    if (row[a] > row[best] || (tie_break == TieBreak::kHighestIndex && row[a] == row[best])) best = a;
  }
  return best;
}

}  // namespace

PlanResult value_iteration(const TabularModel& m, const PlanningConfig& cfg) {
  cfg.validate();
  require_valid(m);
  const std::size_t n = m.state_count();
  ValueTable v(n, 0.0);
  ValueTable next(n, 0.0);
  double residual = 0.0;
  for (std::size_t sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    residual = optimality_sweep(m, v, next);
    v.swap(next);
    if (residual <= cfg.tol) {
      PlanResult result;
      result.policy = greedy_policy(m, v, cfg.tie_break);
      result.values = std::move(v);
      result.sweeps = sweep;
      result.residual = residual;
      return result;
    }
  }
  throw ConvergenceError("value iteration exceeded " + std::to_string(cfg.max_sweeps) +
                             " sweeps (last residual " + std::to_string(residual) + ")",
                         residual);
}

namespace {

// Overwrites q with Q^k computed from V^{k-1}; returns max |Q^k - Q^{k-1}|.
double q_epoch(const TabularModel& m, std::span<const double> v_prev, QTable& q, ValueTable& v_out) {
  double change = 0.0;
  for (std::size_t s = 0; s < m.state_count(); ++s) {
    const auto st = static_cast<StateIndex>(s);
    double best = 0.0;
    for (ActionIndex a = 0; a < m.action_count(); ++a) {
      const double value = backup(m, st, a, v_prev);
      change = std::max(change, std::abs(value - q.at(st, a)));
      q.at(st, a) = value;
      best = a == 0 ? value : std::max(best, value);
    }
    v_out[s] = best;
  }
  return change;
}

}  // namespace

QTable q_value_iteration(const TabularModel& m, std::size_t epochs) {
  require_valid(m);
  QTable q(m.state_count(), m.action_count(), 0.0);
  ValueTable v(m.state_count(), 0.0);
  ValueTable v_next(m.state_count(), 0.0);
  for (std::size_t k = 1; k <= epochs; ++k) {
    q_epoch(m, v, q, v_next);
    v.swap(v_next);
  }
  return q;
}

QIterationResult q_value_iteration_to_convergence(const TabularModel& m, const PlanningConfig& cfg) {
  return q_value_iteration_to_convergence(m, cfg, QTable(m.state_count(), m.action_count(), 0.0));
}

QIterationResult q_value_iteration_to_convergence(const TabularModel& m, const PlanningConfig& cfg, QTable initial) {
  cfg.validate();
  require_valid(m);
  if (initial.state_count() != m.state_count() || initial.action_count() != m.action_count()) {
    throw ValidationError("initial Q table does not match the model shape");
  }
  QIterationResult result{std::move(initial), 0};
  ValueTable v = result.q.max_values();
  ValueTable v_next(m.state_count(), 0.0);
  double change = 0.0;
  for (std::size_t k = 1; k <= cfg.max_sweeps; ++k) {
    change = q_epoch(m, v, result.q, v_next);
    v.swap(v_next);
    if (change <= cfg.tol) {
      result.epochs = k;
      return result;
    }
  }
  throw ConvergenceError("Q-value iteration exceeded " + std::to_string(cfg.max_sweeps) + " epochs", change);
}

Policy greedy_policy(const QTable& q, TieBreak tie_break) {
  Policy pi;
  pi.actions.resize(q.state_count());
  for (std::size_t s = 0; s < q.state_count(); ++s) {
    pi.actions[s] = argmax(q.row(static_cast<StateIndex>(s)), tie_break);
  }
  return pi;
}

Policy greedy_policy(const TabularModel& m, std::span<const double> v, TieBreak tie_break) {
  if (v.size() != m.state_count()) throw ValidationError("value table size does not match model");
  Policy pi;
  pi.actions.resize(m.state_count());
  std::vector<double> row(m.action_count());
  for (std::size_t s = 0; s < m.state_count(); ++s) {
    for (ActionIndex a = 0; a < m.action_count(); ++a) row[a] = backup(m, static_cast<StateIndex>(s), a, v);
    pi.actions[s] = argmax(row, tie_break);
  }
  return pi;
}

std::uint64_t sweep_multiply_adds(const TabularModel& m) { return m.transitions().stored_entries(); }

std::pair<ValueTable, SweepStats> vi_single_sweep(const TabularModel& m, std::span<const double> v_in) {
  if (v_in.size() != m.state_count()) {
    throw ValidationError("sweep input has " + std::to_string(v_in.size()) + " entries, model has " +
                          std::to_string(m.state_count()) + " states");
  }
  ValueTable out(m.state_count(), 0.0);
  SweepStats stats;
  const auto start = std::chrono::steady_clock::now();
  stats.bellman_residual = optimality_sweep(m, v_in, out);
  const auto stop = std::chrono::steady_clock::now();
  stats.wall_time = std::chrono::duration<double>(stop - start).count();
  stats.multiply_add_count = sweep_multiply_adds(m);
  return {std::move(out), stats};
}

}  // namespace vepm

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

#include "vepm/core_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "vepm/error.hpp"

namespace vepm {

// ---------------------------------------------------------------------------
// FeatureSchema
// ---------------------------------------------------------------------------

FeatureSchema::FeatureSchema(std::vector<Feature> features) : features_(std::move(features)) {
  std::unordered_set<std::string> names;
  constexpr std::size_t kMaxStates = std::numeric_limits<StateIndex>::max();
  state_count_ = 1;
  for (const Feature& f : features_) {
    if (f.domain_size < 1) {
      throw ValidationError("feature '" + f.name + "' has an empty domain");
    }
    if (!names.insert(f.name).second) {
      throw ValidationError("duplicate feature name '" + f.name + "'");
    }
    if (state_count_ > kMaxStates / f.domain_size) {
      throw ValidationError("state space of schema overflows the state index type");
    }
    state_count_ *= f.domain_size;
  }
  strides_.assign(features_.size(), 1);
  for (std::size_t i = features_.size(); i-- > 1;) {
    strides_[i - 1] = strides_[i] * features_[i].domain_size;
  }
}

std::optional<std::size_t> FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> FeatureSchema::domain_sizes() const {
  std::vector<std::size_t> out;
  out.reserve(features_.size());
  for (const Feature& f : features_) out.push_back(f.domain_size);
  return out;
}

StateIndex FeatureSchema::encode(std::span<const int> values) const {
  if (values.size() != features_.size()) {
    throw ValidationError("feature vector has " + std::to_string(values.size()) +
                          " entries, schema has " + std::to_string(features_.size()));
  }
  std::size_t index = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0 || static_cast<std::size_t>(values[i]) >= features_[i].domain_size) {
      throw ValidationError("value " + std::to_string(values[i]) + " out of range for feature '" +
                            features_[i].name + "' (domain size " +
                            std::to_string(features_[i].domain_size) + ")");
    }
    index += static_cast<std::size_t>(values[i]) * strides_[i];
  }
  return static_cast<StateIndex>(index);
}

FeatureVector FeatureSchema::decode(StateIndex index) const {
  if (index >= state_count_) {
    throw ValidationError("state index " + std::to_string(index) + " outside product space of size " +
                          std::to_string(state_count_));
  }
  FeatureVector fv(features_.size());
  std::size_t rest = index;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    fv[i] = static_cast<int>(rest / strides_[i]);
    rest %= strides_[i];
  }
  return fv;
}

bool FeatureSchema::operator==(const FeatureSchema& other) const {
  if (features_.size() != other.features_.size()) return false;
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (features_[i].name != other.features_[i].name ||
        features_[i].domain_size != other.features_[i].domain_size) {
      return false;
    }
  }
  return true;
}

StateIndex encode_state(const FeatureSchema& schema, std::span<const int> fv) { return schema.encode(fv); }

FeatureVector decode_state(const FeatureSchema& schema, StateIndex index) { return schema.decode(index); }

// ---------------------------------------------------------------------------
// TransitionTable
// ---------------------------------------------------------------------------

TransitionTable::Builder::Builder(std::size_t state_count, std::size_t action_count)
    : state_count_(state_count), action_count_(action_count) {
  offsets_.reserve(state_count * action_count + 1);
  offsets_.push_back(0);
}

void TransitionTable::Builder::add_row(std::vector<Entry> entries) {
  if (offsets_.size() > state_count_ * action_count_) {
    throw ValidationError("transition builder received more rows than states * actions");
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.next < b.next; });
  std::size_t nnz = 0;
  for (std::size_t i = 0; i < entries.size();) {
    const StateIndex col = entries[i].next;
    if (col >= state_count_) {
      throw ValidationError("transition target " + std::to_string(col) + " out of range");
    }
    double p = 0.0;
    for (; i < entries.size() && entries[i].next == col; ++i) p += entries[i].prob;
    if (p != 0.0) entries[nnz++] = {col, p};
  }
  entries.resize(nnz);

  if (nnz * 10 >= state_count_) {
    const std::size_t base = next_.size();
    next_.resize(base + state_count_);
    prob_.resize(base + state_count_, 0.0);
    for (std::size_t c = 0; c < state_count_; ++c) next_[base + c] = static_cast<StateIndex>(c);
    for (const Entry& e : entries) prob_[base + e.next] = e.prob;
  } else {
    for (const Entry& e : entries) {
      next_.push_back(e.next);
      prob_.push_back(e.prob);
    }
  }
  offsets_.push_back(next_.size());
}

TransitionTable TransitionTable::Builder::finish() && {
  if (offsets_.size() != state_count_ * action_count_ + 1) {
    throw ValidationError("transition builder finished with " + std::to_string(offsets_.size() - 1) +
                          " rows, expected " + std::to_string(state_count_ * action_count_));
  }
  TransitionTable t;
  t.state_count_ = state_count_;
  t.action_count_ = action_count_;
  t.offsets_ = std::move(offsets_);
  t.next_ = std::move(next_);
  t.prob_ = std::move(prob_);
  return t;
}

bool TransitionTable::row_is_dense(StateIndex s, ActionIndex a) const {
  return row(s, a).size() == state_count_ && state_count_ > 0;
}

// ---------------------------------------------------------------------------
// TabularModel
// ---------------------------------------------------------------------------

TabularModel::TabularModel(Parts parts)
    : schema_(std::move(parts.schema)),
      sentinels_(std::move(parts.sentinels)),
      action_count_(parts.action_count),
      transitions_(std::move(parts.transitions)),
      rewards_(std::move(parts.rewards)),
      discount_(parts.discount),
      r_max_(parts.r_max) {
  const std::size_t n = state_count();
  if (n > std::numeric_limits<StateIndex>::max()) {
    throw ValidationError("model state count overflows the state index type");
  }
  if (action_count_ < 1) throw ValidationError("model needs at least one action");
  if (transitions_.state_count() != n || transitions_.action_count() != action_count_) {
    throw ValidationError("transition table is " + std::to_string(transitions_.state_count()) + "x" +
                          std::to_string(transitions_.action_count()) + ", model is " + std::to_string(n) +
                          "x" + std::to_string(action_count_));
  }
  if (rewards_.size() != n * action_count_) {
    throw ValidationError("reward table has " + std::to_string(rewards_.size()) + " entries, expected " +
                          std::to_string(n * action_count_));
  }
  terminal_.assign(n, 0);
  for (StateIndex s : parts.terminal) {
    if (s >= n) throw ValidationError("terminal state " + std::to_string(s) + " out of range");
    terminal_[s] = 1;
  }
  for (std::size_t i = schema_.state_count(); i < n; ++i) terminal_[i] = 1;
}

std::optional<StateIndex> TabularModel::sentinel_index(const std::string& name) const {
  for (std::size_t i = 0; i < sentinels_.size(); ++i) {
    if (sentinels_[i] == name) return static_cast<StateIndex>(schema_.state_count() + i);
  }
  return std::nullopt;
}

std::vector<StateIndex> TabularModel::terminal_states() const {
  std::vector<StateIndex> out;
  for (std::size_t s = 0; s < terminal_.size(); ++s) {
    if (terminal_[s]) out.push_back(static_cast<StateIndex>(s));
  }
  return out;
}

ValueTable QTable::max_values() const {
  ValueTable v(state_count_, 0.0);
  for (std::size_t s = 0; s < state_count_; ++s) {
    const double* row = values_.data() + s * action_count_;
    v[s] = *std::max_element(row, row + action_count_);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

std::size_t ValidationReport::count(ViolationKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; }));
}

std::string ValidationReport::summary(std::size_t max_items) const {
  if (ok()) return "ok";
  std::ostringstream out;
  out << violations.size() << " violation(s):";
  for (std::size_t i = 0; i < violations.size() && i < max_items; ++i) {
    const Violation& v = violations[i];
    out << " [s=" << v.state << ", a=" << v.action << "] " << v.detail << ";";
  }
  if (violations.size() > max_items) out << " ...";
  return out.str();
}

ValidationReport validate_model(const TabularModel& m) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, StateIndex s, ActionIndex a, std::string detail) {
    report.violations.push_back({kind, s, a, std::move(detail)});
  };
  if (!(m.discount() >= 0.0 && m.discount() < 1.0)) {
    add(ViolationKind::kDiscountRange, 0, 0, "discount " + std::to_string(m.discount()) + " not in [0,1)");
  }
  const auto n = static_cast<StateIndex>(m.state_count());
  for (StateIndex s = 0; s < n; ++s) {
    const bool terminal = m.is_terminal(s);
    for (ActionIndex a = 0; a < m.action_count(); ++a) {
      const auto row = m.row(s, a);
      double sum = 0.0;
      bool bad_prob = false;
      double self = 0.0;
      for (std::size_t i = 0; i < row.size(); ++i) {
        const double p = row.prob[i];
        if (!(p >= 0.0 && p <= 1.0 + kRowSumTolerance)) bad_prob = true;
        sum += p;
        if (row.next[i] == s) self += p;
      }
      if (bad_prob) add(ViolationKind::kProbabilityRange, s, a, "probability outside [0,1]");
      const double r = m.reward(s, a);
      if (terminal) {
        if (std::abs(self - 1.0) > kRowSumTolerance || std::abs(sum - 1.0) > kRowSumTolerance || r != 0.0) {
          add(ViolationKind::kTerminalAbsorption, s, a, "terminal state is not zero-reward absorbing");
        }
        continue;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        add(ViolationKind::kRowSum, s, a, "row sums to " + std::to_string(sum));
      }
      if (!(r >= 0.0 && r <= m.r_max())) {
        add(ViolationKind::kRewardRange, s, a,
            "reward " + std::to_string(r) + " outside [0, " + std::to_string(m.r_max()) + "]");
      }
    }
  }
  return report;
}

void require_valid(const TabularModel& m) {
  const ValidationReport report = validate_model(m);
  if (!report.ok()) throw ValidationError("invalid model: " + report.summary());
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

double backup(const TabularModel& m, StateIndex s, ActionIndex a, std::span<const double> v) {
  const auto row = m.row(s, a);
  double acc = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) acc += row.prob[i] * v[row.next[i]];
  return m.reward(s, a) + m.discount() * acc;
}

ValueTable policy_evaluation(const TabularModel& m, const Policy& pi, double tol) {
  if (pi.size() != m.state_count()) {
    throw ValidationError("policy covers " + std::to_string(pi.size()) + " states, model has " +
                          std::to_string(m.state_count()));
  }
  if (!(tol > 0.0)) throw ValidationError("evaluation tolerance must be positive");
  for (ActionIndex a : pi.actions) {
    if (a >= m.action_count()) throw ValidationError("policy action " + std::to_string(a) + " out of range");
  }
  const std::size_t n = m.state_count();
  ValueTable v(n, 0.0);
  ValueTable next(n, 0.0);
  constexpr std::size_t kMaxSweeps = 1'000'000;
  double residual = 0.0;
  for (std::size_t sweep = 0; sweep < kMaxSweeps; ++sweep) {
    residual = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const auto st = static_cast<StateIndex>(s);
      next[s] = backup(m, st, pi[st], v);
      residual = std::max(residual, std::abs(next[s] - v[s]));
    }
    v.swap(next);
    if (residual <= tol) return v;
  }
  throw ConvergenceError("policy evaluation did not converge", residual);
}

QTable action_values(const TabularModel& m, std::span<const double> v) {
  if (v.size() != m.state_count()) throw ValidationError("value table size does not match model");
  QTable q(m.state_count(), m.action_count());
  for (std::size_t s = 0; s < m.state_count(); ++s) {
    for (ActionIndex a = 0; a < m.action_count(); ++a) {
      q.at(static_cast<StateIndex>(s), a) = backup(m, static_cast<StateIndex>(s), a, v);
    }
  }
  return q;
}

double inf_norm_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("inf_norm_diff on tables of length " + std::to_string(a.size()) + " and " +
                          std::to_string(b.size()));
  }
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) out = std::max(out, std::abs(a[i] - b[i]));
  return out;
}

}  // namespace vepm

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

// Feature-vector state spaces and tabular MDP models over them.
//
// A model's state space is the Cartesian product of its schema's feature
// domains (indexed row-major, last feature fastest), followed by zero or more
// named sentinel states that live outside the product space. Sentinels are
// always terminal.

#ifndef VEPM_CORE_MDP_HPP_
#define VEPM_CORE_MDP_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vepm {

using StateIndex = std::uint32_t;
using ActionIndex = std::uint32_t;
using FeatureVector = std::vector<int>;
using ValueTable = std::vector<double>;

inline constexpr double kDefaultTolerance = 1e-8;

struct Feature {
  std::string name;
  std::size_t domain_size = 1;
};

class FeatureSchema {
 public:
  FeatureSchema() = default;
  /// Throws ValidationError on duplicate names, empty domains, or a product
  /// space that does not fit StateIndex.
  explicit FeatureSchema(std::vector<Feature> features);

  std::size_t feature_count() const { return features_.size(); }
  std::size_t state_count() const { return state_count_; }
  const Feature& feature(std::size_t i) const { return features_.at(i); }
  const std::vector<Feature>& features() const { return features_; }
  std::optional<std::size_t> index_of(const std::string& name) const;
  std::vector<std::size_t> domain_sizes() const;

  StateIndex encode(std::span<const int> values) const;
  FeatureVector decode(StateIndex index) const;

  bool operator==(const FeatureSchema& other) const;

 private:
  std::vector<Feature> features_;
  std::vector<std::size_t> strides_;
  std::size_t state_count_ = 1;
};

StateIndex encode_state(const FeatureSchema& schema, std::span<const int> fv);
FeatureVector decode_state(const FeatureSchema& schema, StateIndex index);

/// Row-compressed p[s][a][s'] storage. A row whose nonzero count reaches 10%
/// of the state count is stored densely (every column, zeros included);
/// sparser rows keep only their support.
class TransitionTable {
 public:
  struct Entry {
    StateIndex next;
    double prob;
  };

  struct Row {
    std::span<const StateIndex> next;
    std::span<const double> prob;
    std::size_t size() const { return next.size(); }
  };

  class Builder {
   public:
    Builder(std::size_t state_count, std::size_t action_count);
    /// Appends the row for the next (state, action) pair in row-major order.
    /// Duplicate columns are summed; explicit zeros are dropped.
    void add_row(std::vector<Entry> entries);
    TransitionTable finish() &&;

   private:
    std::size_t state_count_;
    std::size_t action_count_;
    std::vector<std::size_t> offsets_;
    std::vector<StateIndex> next_;
    std::vector<double> prob_;
  };

  TransitionTable() = default;

  std::size_t state_count() const { return state_count_; }
  std::size_t action_count() const { return action_count_; }
  Row row(StateIndex s, ActionIndex a) const {
    const std::size_t r = static_cast<std::size_t>(s) * action_count_ + a;
    const std::size_t begin = offsets_[r];
    const std::size_t len = offsets_[r + 1] - begin;
    return {{next_.data() + begin, len}, {prob_.data() + begin, len}};
  }
  /// Total stored entries; equals the multiply-add count of one full sweep.
  std::size_t stored_entries() const { return next_.size(); }
  bool row_is_dense(StateIndex s, ActionIndex a) const;

  bool operator==(const TransitionTable&) const = default;

 private:
  std::size_t state_count_ = 0;
  std::size_t action_count_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<StateIndex> next_;
  std::vector<double> prob_;
};

/// Immutable tabular MDP over a FeatureSchema plus sentinel states.
/// Construction checks only structural sizes; semantic well-formedness is
/// reported by validate_model().
class TabularModel {
 public:
  struct Parts {
    FeatureSchema schema;
    std::vector<std::string> sentinels;
    std::size_t action_count = 0;
    TransitionTable transitions;
    std::vector<double> rewards;  // [state * action_count + action]
    double discount = 0.95;
    std::vector<StateIndex> terminal;
    double r_max = 0.0;
  };

  TabularModel() = default;
  explicit TabularModel(Parts parts);

  const FeatureSchema& schema() const { return schema_; }
  const std::vector<std::string>& sentinels() const { return sentinels_; }
  std::optional<StateIndex> sentinel_index(const std::string& name) const;
  std::size_t product_state_count() const { return schema_.state_count(); }
  std::size_t state_count() const { return schema_.state_count() + sentinels_.size(); }
  std::size_t action_count() const { return action_count_; }
  const TransitionTable& transitions() const { return transitions_; }
  TransitionTable::Row row(StateIndex s, ActionIndex a) const { return transitions_.row(s, a); }
  double reward(StateIndex s, ActionIndex a) const {
    return rewards_[static_cast<std::size_t>(s) * action_count_ + a];
  }
  const std::vector<double>& rewards() const { return rewards_; }
  double discount() const { return discount_; }
  bool is_terminal(StateIndex s) const { return terminal_[s] != 0; }
  std::vector<StateIndex> terminal_states() const;
  double r_max() const { return r_max_; }
  /// Upper end of the admissible value range, r_max / (1 - discount).
  double value_bound() const { return r_max_ / (1.0 - discount_); }

  bool operator==(const TabularModel&) const = default;

 private:
  FeatureSchema schema_;
  std::vector<std::string> sentinels_;
  std::size_t action_count_ = 0;
  TransitionTable transitions_;
  std::vector<double> rewards_;
  double discount_ = 0.95;
  std::vector<char> terminal_;
  double r_max_ = 0.0;
};

struct Policy {
  std::vector<ActionIndex> actions;

  std::size_t size() const { return actions.size(); }
  ActionIndex operator[](StateIndex s) const { return actions[s]; }
  bool operator==(const Policy&) const = default;
};

/// q[state][action], stored row-major.
class QTable {
 public:
  QTable() = default;
  QTable(std::size_t state_count, std::size_t action_count, double fill = 0.0)
      : state_count_(state_count), action_count_(action_count),
        values_(state_count * action_count, fill) {}

  std::size_t state_count() const { return state_count_; }
  std::size_t action_count() const { return action_count_; }
  double& at(StateIndex s, ActionIndex a) { return values_[static_cast<std::size_t>(s) * action_count_ + a]; }
  double at(StateIndex s, ActionIndex a) const {
    return values_[static_cast<std::size_t>(s) * action_count_ + a];
  }
  std::span<const double> row(StateIndex s) const {
    return {values_.data() + static_cast<std::size_t>(s) * action_count_, action_count_};
  }
  const std::vector<double>& values() const { return values_; }
  /// max_a q[s][a] for every state.
  ValueTable max_values() const;

  bool operator==(const QTable&) const = default;

 private:
  std::size_t state_count_ = 0;
  std::size_t action_count_ = 0;
  std::vector<double> values_;
};

enum class ViolationKind { kRowSum, kProbabilityRange, kRewardRange, kTerminalAbsorption, kDiscountRange };

struct Violation {
  ViolationKind kind;
  StateIndex state = 0;
  ActionIndex action = 0;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::size_t count(ViolationKind kind) const;
  std::string summary(std::size_t max_items = 5) const;
};

inline constexpr double kRowSumTolerance = 1e-9;

ValidationReport validate_model(const TabularModel& m);
/// Throws ValidationError carrying the report summary when m is malformed.
void require_valid(const TabularModel& m);

/// r(s,a) + discount * <p(s,a,.), v>.
double backup(const TabularModel& m, StateIndex s, ActionIndex a, std::span<const double> v);

/// Iterative evaluation of a deterministic policy from V = 0. The returned V
/// satisfies ||V - T^pi V||_inf <= tol.
ValueTable policy_evaluation(const TabularModel& m, const Policy& pi, double tol = kDefaultTolerance);

/// Q^pi(s,a) = r(s,a) + discount * <p(s,a,.), v_pi>.
QTable action_values(const TabularModel& m, std::span<const double> v);

double inf_norm_diff(std::span<const double> a, std::span<const double> b);

}  // namespace vepm

#endif  // VEPM_CORE_MDP_HPP_

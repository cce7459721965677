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

// Partial models: projecting a factored model onto a subset of its features
// by deleting coordinates, lifting coarse policies back to the full space,
// and measuring the value lost by planning in the projection.

#ifndef VEPM_ABSTRACTION_HPP_
#define VEPM_ABSTRACTION_HPP_

#include <span>
#include <string>
#include <vector>

#include "vepm/core_mdp.hpp"
#include "vepm/planners.hpp"

namespace vepm {

/// Ordered list of kept feature names. The projected schema follows this order.
struct FeatureSubset {
  std::vector<std::string> kept;

  bool operator==(const FeatureSubset&) const = default;
  std::string to_string() const;
};

/// Precomputed coordinate-deletion map from a parent schema onto a subset.
/// Every parent product state splits into (kept index, omitted index).
class Projection {
 public:
  Projection(const FeatureSchema& parent, const FeatureSubset& subset);

  const FeatureSchema& parent() const { return parent_; }
  const FeatureSchema& kept_schema() const { return kept_; }
  const FeatureSchema& omitted_schema() const { return omitted_; }
  const std::vector<std::size_t>& kept_positions() const { return kept_positions_; }
  bool is_identity() const { return identity_; }

  StateIndex kept_index(StateIndex parent_state) const { return kept_of_[parent_state]; }
  StateIndex omitted_index(StateIndex parent_state) const { return omitted_of_[parent_state]; }
  StateIndex compose(StateIndex kept, StateIndex omitted) const;

 private:
  FeatureSchema parent_;
  FeatureSchema kept_;
  FeatureSchema omitted_;
  std::vector<std::size_t> kept_positions_;
  std::vector<std::size_t> omitted_positions_;
  std::vector<StateIndex> kept_of_;
  std::vector<StateIndex> omitted_of_;
  bool identity_ = false;
};

/// Keeps the subset's coordinates, in subset order.
FeatureVector project_state(const FeatureSchema& parent, std::span<const int> fv, const FeatureSubset& subset);

struct PartialModel {
  TabularModel model;
  FeatureSubset source_subset;
  /// True when the marginal dynamics and rewards of every kept state are the
  /// same for all omitted-feature assignments.
  bool exact = false;
  double max_deviation = 0.0;
};

inline constexpr double kExactnessThreshold = 1e-9;

enum class OmittedWeighting { kUniform, kStationary };

/// Marginalizes the omitted features under `omitted_dist` (indexed by the
/// omitted schema): p_P(g,a,g') = sum_h w(h) sum_h' p((g,h),a,(g',h')),
/// r_P(g,a) = sum_h w(h) r((g,h),a). Sentinels map to themselves.
PartialModel project_model(const TabularModel& full, const FeatureSubset& subset,
                           std::span<const double> omitted_dist);
PartialModel project_model(const TabularModel& full, const FeatureSubset& subset,
                           OmittedWeighting weighting = OmittedWeighting::kUniform);

/// Stationary distribution of the omitted-feature chain, obtained by
/// averaging transitions over kept assignments and actions (mass leaving the
/// product space is dropped and rows renormalized).
std::vector<double> omitted_stationary_distribution(const TabularModel& full, const FeatureSubset& subset);

/// pi(f) = pi_p(project(f)); sentinel states keep their own entries.
Policy lift_policy(const Policy& pi_p, const TabularModel& full, const FeatureSubset& subset);

struct ValueLossReport {
  double loss = 0.0;
  StateIndex witness = 0;  // state attaining the largest gap
  Policy lifted_policy;
  std::size_t projected_state_count = 0;
};

/// Plans in the uniform projection, lifts, evaluates in `full` and compares
/// against V* of `full`. Both value tables are solved to a value accuracy of
/// cfg.tol, so a zero true loss reports at most cfg.tol.
ValueLossReport value_loss_report(const TabularModel& full, const FeatureSubset& subset,
                                  const PlanningConfig& cfg = {}, const ValueTable* full_optimal = nullptr);
double value_loss(const TabularModel& full, const FeatureSubset& subset, const PlanningConfig& cfg = {});

/// V* of `model` accurate to cfg.tol in the infinity norm.
ValueTable accurate_optimal_values(const TabularModel& model, const PlanningConfig& cfg = {});

struct Certificate {
  bool value_equivalent = false;
  double loss = 0.0;
  StateIndex witness = 0;
};

/// Value-equivalent iff value_loss <= tol.
Certificate certify_value_equivalence(const TabularModel& full, const FeatureSubset& subset,
                                      double tol = 2 * kDefaultTolerance, const ValueTable* full_optimal = nullptr);

struct MinimalityReport {
  Certificate certificate;
  bool minimal = false;
  /// For each kept feature: whether dropping it still yields a VE subset.
  std::vector<std::pair<std::string, bool>> removals;
};

/// One-step downward check: VE, and every single-feature removal is not VE.
MinimalityReport check_minimal_value_equivalence(const TabularModel& full, const FeatureSubset& subset,
                                                 double tol = 2 * kDefaultTolerance);

}  // namespace vepm

#endif  // VEPM_ABSTRACTION_HPP_

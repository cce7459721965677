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

#include "vepm/abstraction.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "vepm/error.hpp"

namespace vepm {

std::string FeatureSubset::to_string() const {
  std::string out = "{";
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (i) out += ",";
    out += kept[i];
  }
  return out + "}";
}

Projection::Projection(const FeatureSchema& parent, const FeatureSubset& subset) : parent_(parent) {
  if (subset.kept.empty()) throw ValidationError("feature subset is empty");
  std::vector<bool> used(parent.feature_count(), false);
  std::vector<Feature> kept_features;
  for (const std::string& name : subset.kept) {
    const auto pos = parent.index_of(name);
    if (!pos) throw ValidationError("unknown feature '" + name + "' in subset " + subset.to_string());
    if (used[*pos]) throw ValidationError("feature '" + name + "' listed twice in subset");
    used[*pos] = true;
    kept_positions_.push_back(*pos);
    kept_features.push_back(parent.feature(*pos));
  }
  std::vector<Feature> omitted_features;
  for (std::size_t i = 0; i < parent.feature_count(); ++i) {
    if (!used[i]) {
      omitted_positions_.push_back(i);
      omitted_features.push_back(parent.feature(i));
    }
  }
  kept_ = FeatureSchema(std::move(kept_features));
  omitted_ = FeatureSchema(std::move(omitted_features));
  identity_ = omitted_positions_.empty();
  for (std::size_t i = 0; i < kept_positions_.size(); ++i) identity_ = identity_ && kept_positions_[i] == i;

  const std::size_t n = parent.state_count();
  kept_of_.resize(n);
  omitted_of_.resize(n);
  FeatureVector kept_fv(kept_positions_.size());
  FeatureVector omitted_fv(omitted_positions_.size());
  for (std::size_t s = 0; s < n; ++s) {
    const FeatureVector fv = parent.decode(static_cast<StateIndex>(s));
    for (std::size_t i = 0; i < kept_positions_.size(); ++i) kept_fv[i] = fv[kept_positions_[i]];
    for (std::size_t i = 0; i < omitted_positions_.size(); ++i) omitted_fv[i] = fv[omitted_positions_[i]];
    kept_of_[s] = kept_.encode(kept_fv);
    omitted_of_[s] = omitted_.encode(omitted_fv);
  }
}

StateIndex Projection::compose(StateIndex kept, StateIndex omitted) const {
  const FeatureVector k = kept_.decode(kept);
  const FeatureVector o = omitted_.decode(omitted);
  FeatureVector fv(parent_.feature_count());
  for (std::size_t i = 0; i < kept_positions_.size(); ++i) fv[kept_positions_[i]] = k[i];
  for (std::size_t i = 0; i < omitted_positions_.size(); ++i) fv[omitted_positions_[i]] = o[i];
  return parent_.encode(fv);
}

FeatureVector project_state(const FeatureSchema& parent, std::span<const int> fv, const FeatureSubset& subset) {
  parent.encode(fv);  // range check
  FeatureVector out;
  out.reserve(subset.kept.size());
  for (const std::string& name : subset.kept) {
    const auto pos = parent.index_of(name);
    if (!pos) throw ValidationError("unknown feature '" + name + "' in subset " + subset.to_string());
    out.push_back(fv[*pos]);
  }
  return out;
}

namespace {

using SparseRow = std::vector<TransitionTable::Entry>;

// Maps a full-model state (product or sentinel) to the projected model.
StateIndex project_index(const Projection& proj, std::size_t full_product, std::size_t kept_product, StateIndex s) {
  if (s < full_product) return proj.kept_index(s);
  return static_cast<StateIndex>(kept_product + (s - full_product));
}

SparseRow marginal_row(const TabularModel& full, const Projection& proj, StateIndex s, ActionIndex a) {
  const auto row = full.row(s, a);
  SparseRow out;
  out.reserve(row.size());
  const std::size_t full_product = full.product_state_count();
  const std::size_t kept_product = proj.kept_schema().state_count();
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row.prob[i] == 0.0) continue;
    out.push_back({project_index(proj, full_product, kept_product, row.next[i]), row.prob[i]});
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.next < y.next; });
  std::size_t w = 0;
  for (std::size_t i = 0; i < out.size();) {
    const StateIndex c = out[i].next;
    double p = 0.0;
    for (; i < out.size() && out[i].next == c; ++i) p += out[i].prob;
    out[w++] = {c, p};
  }
  out.resize(w);
  return out;
}

double row_deviation(const SparseRow& a, const SparseRow& b) {
  double dev = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].next < b[j].next)) {
      dev = std::max(dev, std::abs(a[i++].prob));
    } else if (i == a.size() || b[j].next < a[i].next) {
      dev = std::max(dev, std::abs(b[j++].prob));
    } else {
      dev = std::max(dev, std::abs(a[i++].prob - b[j++].prob));
    }
  }
  return dev;
}

PartialModel identity_partial(const TabularModel& full, const FeatureSubset& subset) {
  return PartialModel{full, subset, true, 0.0};
}

}  // namespace

PartialModel project_model(const TabularModel& full, const FeatureSubset& subset,
                           std::span<const double> omitted_dist) {
  const Projection proj(full.schema(), subset);
  const std::size_t omitted_count = proj.omitted_schema().state_count();
  if (omitted_dist.size() != omitted_count) {
    throw ValidationError("omitted-feature distribution has " + std::to_string(omitted_dist.size()) +
                          " entries, expected " + std::to_string(omitted_count));
  }
  double total = 0.0;
  for (double w : omitted_dist) {
    if (!(w >= 0.0)) throw ValidationError("omitted-feature distribution has a negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > kRowSumTolerance) {
    throw ValidationError("omitted-feature distribution sums to " + std::to_string(total));
  }
  if (proj.is_identity()) return identity_partial(full, subset);

  const std::size_t kept_product = proj.kept_schema().state_count();
  const std::size_t sentinel_count = full.sentinels().size();
  const std::size_t n = kept_product + sentinel_count;
  const std::size_t actions = full.action_count();

  // Full product states grouped by kept index.
  std::vector<std::vector<StateIndex>> members(kept_product, std::vector<StateIndex>(omitted_count));
  for (std::size_t s = 0; s < full.product_state_count(); ++s) {
    const auto st = static_cast<StateIndex>(s);
    members[proj.kept_index(st)][proj.omitted_index(st)] = st;
  }

  TransitionTable::Builder builder(n, actions);
  std::vector<double> rewards(n * actions, 0.0);
  std::vector<StateIndex> terminal;
  std::vector<double> scratch(n, 0.0);
  std::vector<StateIndex> touched;
  double max_dev = 0.0;

  for (std::size_t g = 0; g < kept_product; ++g) {
    const auto& group = members[g];
    bool all_terminal = true;
    bool any_terminal = false;
    for (StateIndex s : group) {
      all_terminal = all_terminal && full.is_terminal(s);
      any_terminal = any_terminal || full.is_terminal(s);
    }
    if (any_terminal && !all_terminal) max_dev = std::max(max_dev, 1.0);
    if (all_terminal) {
      terminal.push_back(static_cast<StateIndex>(g));
      for (std::size_t a = 0; a < actions; ++a) builder.add_row({{static_cast<StateIndex>(g), 1.0}});
      continue;
    }
    for (std::size_t a = 0; a < actions; ++a) {
      const auto act = static_cast<ActionIndex>(a);
      SparseRow reference;
      double reference_reward = 0.0;
      double reward = 0.0;
      for (std::size_t h = 0; h < omitted_count; ++h) {
        const StateIndex s = group[h];
        SparseRow row = marginal_row(full, proj, s, act);
        const double r = full.reward(s, act);
        if (h == 0) {
          reference = row;
          reference_reward = r;
        } else {
          max_dev = std::max(max_dev, row_deviation(row, reference));
          max_dev = std::max(max_dev, std::abs(r - reference_reward));
        }
        const double w = omitted_dist[h];
        if (w == 0.0) continue;
        reward += w * r;
        for (const auto& e : row) {
          if (scratch[e.next] == 0.0) touched.push_back(e.next);
          scratch[e.next] += w * e.prob;
        }
      }
      SparseRow merged;
      merged.reserve(touched.size());
      for (StateIndex c : touched) {
        merged.push_back({c, scratch[c]});
        scratch[c] = 0.0;
      }
      touched.clear();
      builder.add_row(std::move(merged));
      rewards[g * actions + a] = reward;
    }
  }
  for (std::size_t k = 0; k < sentinel_count; ++k) {
    const auto s = static_cast<StateIndex>(kept_product + k);
    for (std::size_t a = 0; a < actions; ++a) builder.add_row({{s, 1.0}});
  }

  TabularModel::Parts parts;
  parts.schema = proj.kept_schema();
  parts.sentinels = full.sentinels();
  parts.action_count = actions;
  parts.transitions = std::move(builder).finish();
  parts.rewards = std::move(rewards);
  parts.discount = full.discount();
  parts.terminal = std::move(terminal);
  parts.r_max = full.r_max();
  return PartialModel{TabularModel(std::move(parts)), subset, max_dev < kExactnessThreshold, max_dev};
}

PartialModel project_model(const TabularModel& full, const FeatureSubset& subset, OmittedWeighting weighting) {
  const Projection proj(full.schema(), subset);
  if (proj.is_identity()) return identity_partial(full, subset);
  if (weighting == OmittedWeighting::kStationary) {
    return project_model(full, subset, omitted_stationary_distribution(full, subset));
  }
  const std::size_t h = proj.omitted_schema().state_count();
  return project_model(full, subset, std::vector<double>(h, 1.0 / static_cast<double>(h)));
}

std::vector<double> omitted_stationary_distribution(const TabularModel& full, const FeatureSubset& subset) {
  const Projection proj(full.schema(), subset);
  const std::size_t h_count = proj.omitted_schema().state_count();
  const std::size_t product = full.product_state_count();
  std::vector<std::unordered_map<StateIndex, double>> chain(h_count);
  for (std::size_t s = 0; s < product; ++s) {
    const auto st = static_cast<StateIndex>(s);
    if (full.is_terminal(st)) continue;
    auto& out = chain[proj.omitted_index(st)];
    for (ActionIndex a = 0; a < full.action_count(); ++a) {
      const auto row = full.row(st, a);
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (row.next[i] < product && row.prob[i] > 0.0) out[proj.omitted_index(row.next[i])] += row.prob[i];
      }
    }
  }
  std::vector<std::vector<TransitionTable::Entry>> rows(h_count);
  for (std::size_t h = 0; h < h_count; ++h) {
    double total = 0.0;
    for (const auto& [c, p] : chain[h]) total += p;
    if (total <= 0.0) {
      rows[h].push_back({static_cast<StateIndex>(h), 1.0});
      continue;
    }
    for (const auto& [c, p] : chain[h]) rows[h].push_back({c, p / total});
    std::sort(rows[h].begin(), rows[h].end(), [](const auto& x, const auto& y) { return x.next < y.next; });
  }
  // Lazy power iteration: the 1/2 self-weight removes periodicity.
  std::vector<double> dist(h_count, 1.0 / static_cast<double>(h_count));
  std::vector<double> next(h_count);
  for (int iter = 0; iter < 1'000'000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t h = 0; h < h_count; ++h) {
      next[h] += 0.5 * dist[h];
      for (const auto& e : rows[h]) next[e.next] += 0.5 * dist[h] * e.prob;
    }
    double change = 0.0;
    for (std::size_t h = 0; h < h_count; ++h) change += std::abs(next[h] - dist[h]);
    dist.swap(next);
    if (change < 1e-13) break;
  }
  double total = 0.0;
  for (double w : dist) total += w;
  for (double& w : dist) w /= total;
  return dist;
}

Policy lift_policy(const Policy& pi_p, const TabularModel& full, const FeatureSubset& subset) {
  const Projection proj(full.schema(), subset);
  const std::size_t kept_product = proj.kept_schema().state_count();
  const std::size_t sentinel_count = full.sentinels().size();
  if (pi_p.size() != kept_product + sentinel_count) {
    throw ValidationError("partial policy covers " + std::to_string(pi_p.size()) + " states, projection has " +
                          std::to_string(kept_product + sentinel_count));
  }
  Policy out;
  out.actions.resize(full.state_count());
  const std::size_t product = full.product_state_count();
  for (std::size_t s = 0; s < out.actions.size(); ++s) {
    out.actions[s] = pi_p[project_index(proj, product, kept_product, static_cast<StateIndex>(s))];
  }
  return out;
}

ValueTable accurate_optimal_values(const TabularModel& model, const PlanningConfig& cfg) {
  return value_iteration(model, value_accuracy_config(cfg, model.discount())).values;
}

ValueLossReport value_loss_report(const TabularModel& full, const FeatureSubset& subset, const PlanningConfig& cfg,
                                  const ValueTable* full_optimal) {
  const PlanningConfig accurate = value_accuracy_config(cfg, full.discount());
  ValueTable computed_optimal;
  if (full_optimal == nullptr) {
    computed_optimal = value_iteration(full, accurate).values;
    full_optimal = &computed_optimal;
  }
  const PartialModel partial = project_model(full, subset);
  const PlanResult plan = value_iteration(partial.model, accurate);
  ValueLossReport report;
  report.projected_state_count = partial.model.state_count();
  report.lifted_policy = lift_policy(plan.policy, full, subset);
  const ValueTable lifted_values = policy_evaluation(full, report.lifted_policy, accurate.tol);
  for (std::size_t s = 0; s < lifted_values.size(); ++s) {
    const double gap = std::abs((*full_optimal)[s] - lifted_values[s]);
    if (gap > report.loss) {
      report.loss = gap;
      report.witness = static_cast<StateIndex>(s);
    }
  }
  return report;
}

double value_loss(const TabularModel& full, const FeatureSubset& subset, const PlanningConfig& cfg) {
  return value_loss_report(full, subset, cfg).loss;
}

Certificate certify_value_equivalence(const TabularModel& full, const FeatureSubset& subset, double tol,
                                      const ValueTable* full_optimal) {
  if (!(tol > 0.0)) throw ValidationError("certification tolerance must be positive");
  PlanningConfig cfg;
  cfg.tol = tol / 2;
  const ValueLossReport report = value_loss_report(full, subset, cfg, full_optimal);
  return Certificate{report.loss <= tol, report.loss, report.witness};
}

MinimalityReport check_minimal_value_equivalence(const TabularModel& full, const FeatureSubset& subset, double tol) {
  PlanningConfig cfg;
  cfg.tol = tol / 2;
  const ValueTable optimal = accurate_optimal_values(full, cfg);
  MinimalityReport out;
  out.certificate = certify_value_equivalence(full, subset, tol, &optimal);
  out.minimal = out.certificate.value_equivalent;
  if (!out.certificate.value_equivalent || subset.kept.size() < 2) return out;
  for (std::size_t i = 0; i < subset.kept.size(); ++i) {
    FeatureSubset smaller = subset;
    smaller.kept.erase(smaller.kept.begin() + static_cast<std::ptrdiff_t>(i));
    const bool ve = certify_value_equivalence(full, smaller, tol, &optimal).value_equivalent;
    out.removals.emplace_back(subset.kept[i], ve);
    if (ve) out.minimal = false;
  }
  return out;
}

}  // namespace vepm

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

#include "vepm/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "vepm/abstraction.hpp"
#include "vepm/error.hpp"
#include "vepm/estimation.hpp"
#include "vepm/random.hpp"

namespace vepm::exp {

namespace {

// Seed streams, one per experiment.
constexpr std::uint64_t kPlanningLossStream = 2;
constexpr std::uint64_t kSampleComplexityStream = 4;
constexpr std::uint64_t kEvaluationStream = 40;

void log_line(const Context& ctx, const std::string& line) {
  if (ctx.log) ctx.log(line);
}

void require_catalog_ids(const std::vector<std::string>& models) {
  if (models.empty()) throw ConfigError("model list is empty");
  for (const auto& id : models) sw::catalog_subset(id);
}

std::uint64_t model_number(const std::string& id) { return static_cast<std::uint64_t>(id.back() - '0'); }

void add_summary(Records& out, const ExperimentRecord& key, const std::string& metric, std::span<const double> values) {
  const Summary s = summarize(values);
  ExperimentRecord r = key;
  r.seed.reset();
  r.metric = metric + "_mean";
  r.value = s.mean;
  out.push_back(r);
  r.metric = metric + "_se";
  r.value = s.standard_error;
  out.push_back(r);
}

}  // namespace

std::string to_string(Variant variant) { return variant == Variant::kDet ? "det" : "stoch"; }

Variant parse_variant(const std::string& text) {
  if (text == "det") return Variant::kDet;
  if (text == "stoch") return Variant::kStoch;
  throw ConfigError("unknown variant '" + text + "' (expected det or stoch)");
}

sw::SwConfig variant_config(Variant variant) {
  return variant == Variant::kDet ? sw::SwConfig::deterministic() : sw::SwConfig::stochastic_default();
}

std::string variant_label(const sw::SwConfig& env) { return env.stochastic ? "stoch" : "det"; }

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const Records& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    for (const std::string* field : {&r.experiment, &r.model_id, &r.variant, &r.parameter, &r.metric}) {
      if (field->find_first_of(",\n") != std::string::npos) {
        throw ValidationError("record field '" + *field + "' contains a delimiter");
      }
    }
    out << r.experiment << ',' << r.model_id << ',' << r.variant << ',';
    if (r.seed) out << *r.seed;
    out << ',' << r.parameter << ',' << r.metric << ',' << format_number(r.value) << '\n';
  }
}

Records read_csv(std::istream& in) {
  Records out;
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ValidationError("missing record header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string item;
    std::istringstream ls(line);
    while (std::getline(ls, item, ',')) f.push_back(item);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 7) throw ValidationError("record line has " + std::to_string(f.size()) + " fields: " + line);
    ExperimentRecord r{f[0], f[1], f[2], std::nullopt, f[4], f[5], 0.0};
    if (!f[3].empty()) {
      std::uint64_t seed = 0;
      const auto res = std::from_chars(f[3].data(), f[3].data() + f[3].size(), seed);
      if (res.ec != std::errc() || res.ptr != f[3].data() + f[3].size()) {
        throw ValidationError("bad seed field: " + line);
      }
      r.seed = seed;
    }
    const auto res = std::from_chars(f[6].data(), f[6].data() + f[6].size(), r.value);
    if (res.ec != std::errc() || res.ptr != f[6].data() + f[6].size()) {
      throw ValidationError("bad value field: " + line);
    }
    out.push_back(std::move(r));
  }
  return out;
}

void check_records(const Records& records) {
  std::set<std::tuple<std::string, std::string, std::string, std::optional<std::uint64_t>, std::string, std::string>>
      keys;
  for (const auto& r : records) {
    if (!std::isfinite(r.value)) {
      throw ValidationError("non-finite value for " + r.model_id + " " + r.metric + " " + r.parameter);
    }
    if (!keys.emplace(r.experiment, r.model_id, r.variant, r.seed, r.parameter, r.metric).second) {
      throw ValidationError("duplicate record for " + r.experiment + " " + r.model_id + " " + r.parameter + " " +
                            r.metric);
    }
  }
}

Records select(const Records& records, const std::string& model_id, const std::string& metric,
               const std::string& parameter) {
  Records out;
  for (const auto& r : records) {
    if (!model_id.empty() && r.model_id != model_id) continue;
    if (!metric.empty() && r.metric != metric) continue;
    if (!parameter.empty() && r.parameter != parameter) continue;
    out.push_back(r);
  }
  return out;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.standard_error = std::sqrt(sq / static_cast<double>(s.count - 1)) / std::sqrt(static_cast<double>(s.count));
  }
  return s;
}

double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::uint64_t run_seed(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t run) {
  return Rng(master_seed).split({stream, run}).seed();
}

TabularModel catalog_model(const TabularModel& full, const std::string& model_id) {
  return project_model(full, sw::catalog_subset(model_id)).model;
}

// ---------------------------------------------------------------------------
// Value loss
// ---------------------------------------------------------------------------

void ValueLossConfig::validate() const { require_catalog_ids(models); }

Records exp_value_loss(const sw::SwConfig& env, const ValueLossConfig& cfg, const Context& ctx) {
  cfg.validate();
  ctx.planning.validate();
  const TabularModel full = sw::build_sw(env);
  const ValueTable optimal = accurate_optimal_values(full, ctx.planning);
  Records out;
  for (const auto& id : cfg.models) {
    const ValueLossReport report = value_loss_report(full, sw::catalog_subset(id), ctx.planning, &optimal);
    out.push_back({"value_loss", id, variant_label(env), ctx.master_seed, "tol=" + format_number(ctx.planning.tol),
                   "value_loss", report.loss});
    log_line(ctx, "value_loss " + id + " " + format_number(report.loss));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Planning loss
// ---------------------------------------------------------------------------

void PlanningLossConfig::validate() const {
  if (n_values.empty()) throw ConfigError("n_values is empty");
  for (auto n : n_values) {
    if (n < 1) throw ConfigError("every n must be at least 1");
  }
  if (runs < 1) throw ConfigError("runs must be at least 1");
  require_catalog_ids(models);
}

Records exp_planning_loss(const sw::SwConfig& env, const PlanningLossConfig& cfg, const Context& ctx) {
  cfg.validate();
  ctx.planning.validate();
  const TabularModel full = sw::build_sw(env);
  const std::string variant = variant_label(env);
  Records out;
  for (const auto& id : cfg.models) {
    const TabularModel truth = catalog_model(full, id);
    const TruthSolution solved = solve_truth(truth, ctx.planning);
    for (const auto n : cfg.n_values) {
      const std::string param = "n=" + std::to_string(n);
      std::vector<double> losses;
      for (std::size_t run = 0; run < cfg.runs; ++run) {
        const std::uint64_t seed = run_seed(ctx.master_seed, kPlanningLossStream, run);
        const std::uint64_t sample_seed = Rng(seed).split({model_number(id), n}).seed();
        const TabularModel estimated = estimate_model(truth, sample_dataset(truth, n, sample_seed));
        const CertaintyEquivalenceReport rep = certainty_equivalence_report(truth, estimated, ctx.planning, &solved);
        const ExperimentRecord key{"planning_loss", id, variant, seed, param, "", 0.0};
        auto emit = [&](const char* metric, double value) {
          ExperimentRecord r = key;
          r.metric = metric;
          r.value = value;
          out.push_back(std::move(r));
        };
        emit("planning_loss", rep.loss);
        emit("value_gap_bound", rep.value_gap_bound);
        emit("q_gap_optimal", rep.q_gap[0]);
        emit("q_gap_bound_optimal", rep.q_gap_bound[0]);
        emit("q_gap_estimated", rep.q_gap[1]);
        emit("q_gap_bound_estimated", rep.q_gap_bound[1]);
        emit("numerical_slack", rep.numerical_slack);
        emit("lemma_holds", rep.value_gap_inequality_holds() && rep.q_gap_inequality_holds() ? 1.0 : 0.0);
        losses.push_back(rep.loss);
        log_line(ctx, "planning_loss " + id + " " + param + " run=" + std::to_string(run) + " loss=" +
                          format_number(rep.loss));
      }
      add_summary(out, {"planning_loss", id, variant, std::nullopt, param, "", 0.0}, "planning_loss", losses);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Planning time
// ---------------------------------------------------------------------------

void PlanningTimeConfig::validate() const {
  if (runs < 1) throw ConfigError("runs must be at least 1");
  require_catalog_ids(models);
}

PlanningTimeResult exp_planning_time(const sw::SwConfig& env, const PlanningTimeConfig& cfg, const Context& ctx) {
  cfg.validate();
  const TabularModel full = sw::build_sw(env);
  const std::string variant = variant_label(env);
  PlanningTimeResult out;
  for (const auto& id : cfg.models) {
    const TabularModel model = catalog_model(full, id);
    const ValueTable v(model.state_count(), 0.0);
    std::vector<double> times;
    for (std::size_t run = 0; run < cfg.runs; ++run) {
      const auto [next, stats] = vi_single_sweep(model, v);
      out.records.push_back({"planning_time", id, variant, run, "v=zero", "multiply_add_count",
                             static_cast<double>(stats.multiply_add_count)});
      out.timings.push_back({"planning_time", id, variant, run, "v=zero", "wall_time", stats.wall_time});
      times.push_back(stats.wall_time);
    }
    add_summary(out.timings, {"planning_time", id, variant, std::nullopt, "v=zero", "", 0.0}, "wall_time", times);
    log_line(ctx, "planning_time " + id + " multiply_adds=" + std::to_string(sweep_multiply_adds(model)) +
                      " mean_wall_time=" + format_number(summarize(times).mean));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sample complexity
// ---------------------------------------------------------------------------

std::string to_string(UnvisitedRule rule) { return rule == UnvisitedRule::kOptimistic ? "optimistic" : "neutral"; }

UnvisitedRule parse_unvisited_rule(const std::string& text) {
  if (text == "optimistic") return UnvisitedRule::kOptimistic;
  if (text == "neutral") return UnvisitedRule::kNeutral;
  throw ConfigError("unknown unvisited rule '" + text + "' (expected optimistic or neutral)");
}

void SampleComplexityConfig::validate() const {
  if (episodes < 1) throw ConfigError("episodes must be at least 1");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
    throw ConfigError("epsilon schedule must lie in [0, 1]");
  }
  if (eval_interval < 1) throw ConfigError("eval_interval must be at least 1");
  if (eval_rollouts < 1) throw ConfigError("eval_rollouts must be at least 1");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in (0, 1]");
  if (runs < 1) throw ConfigError("runs must be at least 1");
  require_catalog_ids(models);
}

double SampleComplexityConfig::epsilon(std::size_t episode) const {
  if (decay_episodes == 0 || episode >= decay_episodes) return epsilon_end;
  const double frac = static_cast<double>(episode) / static_cast<double>(decay_episodes);
  return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

namespace {

// Maps full-model states onto an agent's projected state space.
class Observation {
 public:
  Observation(const TabularModel& full, const TabularModel& agent, const FeatureSubset& subset)
      : projection_(full.schema(), subset),
        full_products_(full.product_state_count()),
        agent_products_(agent.product_state_count()) {}

  StateIndex operator()(StateIndex s) const {
    if (s < full_products_) return projection_.kept_index(s);
    return static_cast<StateIndex>(agent_products_ + (s - full_products_));
  }

 private:
  Projection projection_;
  std::size_t full_products_;
  std::size_t agent_products_;
};

ActionIndex greedy_action(std::span<const double> row) {
  ActionIndex best = 0;
  for (ActionIndex a = 1; a < row.size(); ++a) {
    if (row[a] > row[best]) best = a;
  }
  return best;
}

double mean_return(const TabularModel& full, const sw::ActingPolicy& pi, StateIndex start, int limit,
                   std::span<const std::uint64_t> seeds, double reward) {
  double total = 0.0;
  for (auto seed : seeds) total += sw::simulate_episode(full, pi, start, limit, seed, reward).total_reward;
  return total / static_cast<double>(seeds.size());
}

}  // namespace

Records exp_sample_complexity(const sw::SwConfig& env, const SampleComplexityConfig& cfg, const Context& ctx) {
  cfg.validate();
  ctx.planning.validate();
  const TabularModel full = sw::build_sw(env);
  const std::string variant = variant_label(env);
  const StateIndex start = full.schema().encode(sw::start_state(env));
  const std::size_t actions = full.action_count();

  std::vector<std::uint64_t> eval_seeds;
  for (std::size_t i = 0; i < cfg.eval_rollouts; ++i) {
    eval_seeds.push_back(run_seed(ctx.master_seed, kEvaluationStream, i));
  }
  const Policy optimal = value_iteration(full, ctx.planning).policy;
  const double optimal_return = mean_return(
      full, [&](StateIndex s, Rng&) { return optimal[s]; }, start, env.episode_limit, eval_seeds, env.reward);
  const double target = cfg.threshold * optimal_return;
  const std::string threshold_param = "threshold=" + format_number(cfg.threshold);

  Records out;
  for (const auto& id : cfg.models) {
    const FeatureSubset subset = sw::catalog_subset(id);
    const TabularModel structure = catalog_model(full, id);
    const Observation observe(full, structure, subset);
    const double unvisited_reward =
        cfg.unvisited == UnvisitedRule::kOptimistic ? (1.0 - structure.discount()) * structure.r_max() : 0.0;

    std::map<std::size_t, std::vector<double>> curve;  // episode -> per-run returns
    std::vector<double> hits;
    for (std::size_t run = 0; run < cfg.runs; ++run) {
      const std::uint64_t seed = run_seed(ctx.master_seed, kSampleComplexityStream, run);
      const Rng episodes_rng(seed);
      CountTable counts(structure.state_count(), actions);
      std::vector<double> reward_sums(structure.state_count() * actions, 0.0);
      QTable q = q_value_iteration_to_convergence(
                     estimate_visited_model(structure, counts, reward_sums, unvisited_reward), ctx.planning)
                     .q;
      std::size_t hit = cfg.episodes + 1;
      for (std::size_t episode = 0; episode < cfg.episodes; ++episode) {
        const double eps = cfg.epsilon(episode);
        const sw::ActingPolicy explore = [&](StateIndex s, Rng& rng) -> ActionIndex {
          if (rng.uniform() < eps) return static_cast<ActionIndex>(rng.below(actions));
          return greedy_action(q.row(observe(s)));
        };
        const sw::Episode ep =
            sw::simulate_episode(full, explore, start, env.episode_limit, episodes_rng.derive(episode), env.reward);
        for (const auto& step : ep.steps) {
          const StateIndex g = observe(step.state);
          counts.add(g, step.action, observe(step.next_state));
          reward_sums[static_cast<std::size_t>(g) * actions + step.action] += step.reward;
        }
        const TabularModel estimated = estimate_visited_model(structure, counts, reward_sums, unvisited_reward);
        q = q_value_iteration_to_convergence(estimated, ctx.planning, std::move(q)).q;

        if ((episode + 1) % cfg.eval_interval != 0) continue;
        const double ret = mean_return(
            full, [&](StateIndex s, Rng&) { return greedy_action(q.row(observe(s))); }, start, env.episode_limit,
            eval_seeds, env.reward);
        out.push_back({"sample_complexity", id, variant, seed, "episode=" + std::to_string(episode + 1),
                       "eval_return", ret});
        curve[episode + 1].push_back(ret);
        if (hit > cfg.episodes && ret >= target) hit = episode + 1;
      }
      out.push_back({"sample_complexity", id, variant, seed, threshold_param, "episodes_to_threshold",
                     static_cast<double>(hit)});
      hits.push_back(static_cast<double>(hit));
      log_line(ctx, "sample_complexity " + id + " " + variant + " run=" + std::to_string(run) +
                        " episodes_to_threshold=" + std::to_string(hit));
    }
    for (const auto& [episode, returns] : curve) {
      add_summary(out, {"sample_complexity", id, variant, std::nullopt, "episode=" + std::to_string(episode), "", 0.0},
                  "eval_return", returns);
    }
    out.push_back({"sample_complexity", id, variant, std::nullopt, threshold_param, "episodes_to_threshold_median",
                   median(hits)});
    out.push_back({"sample_complexity", id, variant, std::nullopt,
                   "rollouts=" + std::to_string(cfg.eval_rollouts), "optimal_return", optimal_return});
  }
  return out;
}

}  // namespace vepm::exp

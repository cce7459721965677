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

// Seeded experiment drivers over the Squirrel's World model catalog. Every
// driver returns flat records; aggregate rows carry an empty seed.

#ifndef VEPM_EXPERIMENTS_HPP_
#define VEPM_EXPERIMENTS_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vepm/planners.hpp"
#include "vepm/squirrels_world.hpp"

namespace vepm::exp {

enum class Variant { kDet, kStoch };

std::string to_string(Variant variant);
Variant parse_variant(const std::string& text);
sw::SwConfig variant_config(Variant variant);
/// "det" or "stoch", from the config's stochastic flag.
std::string variant_label(const sw::SwConfig& env);

struct ExperimentRecord {
  std::string experiment;
  std::string model_id;
  std::string variant;
  std::optional<std::uint64_t> seed;
  std::string parameter;  // name=value
  std::string metric;
  double value = 0.0;

  bool operator==(const ExperimentRecord&) const = default;
};
using Records = std::vector<ExperimentRecord>;

inline constexpr const char* kCsvHeader = "experiment,model_id,variant,seed,parameter,metric,value";

/// Shortest text that parses back to the same double.
std::string format_number(double value);
void write_csv(std::ostream& out, const Records& records);
Records read_csv(std::istream& in);
/// Throws ValidationError on a non-finite value or a repeated
/// (experiment, model_id, variant, seed, parameter, metric) key.
void check_records(const Records& records);

/// Records matching every non-empty filter field.
Records select(const Records& records, const std::string& model_id, const std::string& metric,
               const std::string& parameter = "");

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double standard_error = 0.0;  // sample standard deviation / sqrt(count)
};
/// Sums in input order, so the result is reproducible from the per-run rows.
Summary summarize(std::span<const double> values);
double median(std::vector<double> values);

using Logger = std::function<void(const std::string&)>;

struct Context {
  std::uint64_t master_seed = 0;
  PlanningConfig planning;
  Logger log;  // optional line-per-run progress sink
};

/// Seed of run `run` of the experiment identified by `stream`.
std::uint64_t run_seed(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t run);

/// Projected (or full, for m7) model of `env` for a catalog id.
TabularModel catalog_model(const TabularModel& full, const std::string& model_id);

// --- value loss ------------------------------------------------------------

struct ValueLossConfig {
  std::vector<std::string> models{"m1", "m2", "m3", "m4"};
  void validate() const;
};

/// One value_loss record per model; a single deterministic run.
Records exp_value_loss(const sw::SwConfig& env, const ValueLossConfig& cfg, const Context& ctx);

// --- planning loss ---------------------------------------------------------

struct PlanningLossConfig {
  std::vector<std::uint64_t> n_values{3, 5, 10, 20};
  std::size_t runs = 50;
  std::vector<std::string> models{"m4", "m5", "m6", "m7"};
  void validate() const;
};

/// Per (model, n, run): certainty-equivalence planning loss on the model's
/// own projected environment, plus both sides of the two perturbation
/// inequalities (metric lemma_holds is 1 when both hold). Aggregate rows give
/// planning_loss_mean and planning_loss_se.
Records exp_planning_loss(const sw::SwConfig& env, const PlanningLossConfig& cfg, const Context& ctx);

// --- planning time ---------------------------------------------------------

struct PlanningTimeConfig {
  std::size_t runs = 50;
  std::vector<std::string> models{"m4", "m5", "m6", "m7"};
  void validate() const;
};

struct PlanningTimeResult {
  Records records;  // multiply_add_count per run; deterministic
  Records timings;  // wall_time per run plus mean / standard error; machine dependent
};

/// Single value-iteration sweeps from V = 0, repeated `runs` times per model.
PlanningTimeResult exp_planning_time(const sw::SwConfig& env, const PlanningTimeConfig& cfg, const Context& ctx);

// --- sample complexity -----------------------------------------------------

/// How the learning agent's model treats (f,a) pairs it has never tried.
enum class UnvisitedRule {
  kOptimistic,  // self-loop paying (1-gamma) r_max, so the pair is worth r_max
  kNeutral,     // self-loop paying 0
};
std::string to_string(UnvisitedRule rule);
UnvisitedRule parse_unvisited_rule(const std::string& text);

struct SampleComplexityConfig {
  std::size_t episodes = 200;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::size_t decay_episodes = 100;  // linear decay; constant epsilon_end afterwards
  std::size_t eval_interval = 1;
  std::size_t eval_rollouts = 20;
  double threshold = 0.95;  // fraction of the optimal policy's return
  UnvisitedRule unvisited = UnvisitedRule::kOptimistic;
  std::size_t runs = 50;
  std::vector<std::string> models{"m4", "m7"};

  void validate() const;
  /// Exploration rate for the 0-based episode index.
  double epsilon(std::size_t episode) const;
};

/// Learning curves of count-based agents acting epsilon-greedily through
/// their own feature subset. After each episode the agent re-estimates its
/// model from all transitions so far and runs Q-value iteration to
/// convergence. Per run: eval_return every eval_interval episodes and
/// episodes_to_threshold (episodes + 1 when never reached). Aggregates:
/// eval_return mean / standard error, episodes_to_threshold median, and the
/// optimal policy's return on the same evaluation rollouts.
Records exp_sample_complexity(const sw::SwConfig& env, const SampleComplexityConfig& cfg, const Context& ctx);

}  // namespace vepm::exp

#endif  // VEPM_EXPERIMENTS_HPP_

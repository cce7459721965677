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

// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Optional arguments select criteria by
// number, e.g. `vepm_acceptance 1 3 7`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "../test_support.hpp"
#include "vepm/abstraction.hpp"
#include "vepm/cli.hpp"
#include "vepm/estimation.hpp"
#include "vepm/experiments.hpp"
#include "vepm/planners.hpp"
#include "vepm/squirrels_world.hpp"

using namespace vepm;
namespace fs = std::filesystem;

namespace {

constexpr double kTol = 1e-8;
const std::vector<std::string> kOrderedModels = {"m4", "m5", "m6", "m7"};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

exp::Context context(std::uint64_t seed = 0) {
  exp::Context ctx;
  ctx.master_seed = seed;
  return ctx;
}

// --- 1 ---------------------------------------------------------------------

Outcome value_loss_criterion() {
  exp::ValueLossConfig cfg;
  cfg.models = {"m1", "m2", "m3", "m4", "m5", "m6"};
  std::ostringstream detail;
  bool pass = true;
  for (exp::Variant variant : {exp::Variant::kDet, exp::Variant::kStoch}) {
    const exp::Records records = exp::exp_value_loss(exp::variant_config(variant), cfg, context());
    detail << exp::to_string(variant) << ":";
    for (const auto& r : records) {
      const bool exact = r.model_id == "m4" || r.model_id == "m5" || r.model_id == "m6";
      const bool ok = exact ? r.value <= 2 * kTol : r.value >= 0.1;
      pass = pass && ok;
      detail << ' ' << r.model_id << '=' << fmt(r.value);
    }
    detail << ' ';
  }
  return {pass, detail.str()};
}

// --- 2 and 8 share one run set ---------------------------------------------

const exp::Records& planning_loss_records() {
  static const exp::Records records = [] {
    exp::Context ctx = context();
    ctx.log = [](const std::string& line) { std::cerr << "  " << line << '\n'; };
    return exp::exp_planning_loss(exp::variant_config(exp::Variant::kStoch), exp::PlanningLossConfig{}, ctx);
  }();
  return records;
}

Outcome planning_loss_ordering_criterion() {
  const exp::PlanningLossConfig cfg;
  const exp::Records& records = planning_loss_records();
  auto stat = [&](const std::string& model, std::uint64_t n, const std::string& metric) {
    const exp::Records hit = exp::select(records, model, metric, "n=" + std::to_string(n));
    if (hit.size() != 1) throw std::runtime_error("missing " + metric + " for " + model);
    return hit.front().value;
  };
  std::ostringstream detail;
  bool pass = true;
  for (std::uint64_t n : cfg.n_values) {
    detail << "n=" << n << ":";
    for (std::size_t i = 0; i < kOrderedModels.size(); ++i) {
      const double mean = stat(kOrderedModels[i], n, "planning_loss_mean");
      detail << ' ' << kOrderedModels[i] << '=' << fmt(mean);
      if (i + 1 < kOrderedModels.size()) {
        const double next = stat(kOrderedModels[i + 1], n, "planning_loss_mean");
        const double se = std::max(stat(kOrderedModels[i], n, "planning_loss_se"),
                                   stat(kOrderedModels[i + 1], n, "planning_loss_se"));
        if (mean > next + se) {
          pass = false;
          detail << "(!)";
        }
      }
    }
    detail << "; ";
  }
  const std::uint64_t n_small = cfg.n_values.front();
  const std::uint64_t n_large = cfg.n_values.back();
  for (const auto& model : kOrderedModels) {
    if (stat(model, n_large, "planning_loss_mean") > stat(model, n_small, "planning_loss_mean")) {
      pass = false;
      detail << model << " does not improve from n=" << n_small << " to n=" << n_large << "; ";
    }
  }
  return {pass, detail.str()};
}

Outcome lemma_criterion() {
  const exp::Records& records = planning_loss_records();
  std::size_t trials = 0;
  std::size_t violations = 0;
  for (const auto& r : records) {
    if (r.metric != "lemma_holds") continue;
    ++trials;
    if (r.value != 1.0) ++violations;
  }
  const std::size_t expected = exp::PlanningLossConfig{}.runs * exp::PlanningLossConfig{}.n_values.size() *
                               exp::PlanningLossConfig{}.models.size();
  return {trials == expected && violations == 0,
          std::to_string(violations) + " violations over " + std::to_string(trials) + " trials"};
}

// --- 3 ---------------------------------------------------------------------

Outcome planning_time_criterion() {
  exp::PlanningTimeConfig cfg;
  cfg.runs = 3;
  const exp::PlanningTimeResult result = exp::exp_planning_time(exp::variant_config(exp::Variant::kDet), cfg, context());
  std::vector<double> counts;
  std::ostringstream detail;
  bool pass = true;
  for (const auto& model : kOrderedModels) {
    const exp::Records hit = exp::select(result.records, model, "multiply_add_count");
    if (hit.empty()) return {false, "no counts for " + model};
    for (const auto& r : hit) pass = pass && r.value == hit.front().value;
    counts.push_back(hit.front().value);
    detail << model << '=' << fmt(counts.back()) << ' ';
  }
  for (std::size_t i = 0; i + 1 < counts.size(); ++i) pass = pass && counts[i] < counts[i + 1];
  const double ratio = counts.back() / counts.front();
  pass = pass && ratio >= 64.0;
  detail << "m7/m4=" << fmt(ratio);
  return {pass, detail.str()};
}

// --- 4 ---------------------------------------------------------------------

Outcome sample_complexity_criterion() {
  const exp::SampleComplexityConfig cfg;
  std::ostringstream detail;
  bool pass = true;
  for (exp::Variant variant : {exp::Variant::kDet, exp::Variant::kStoch}) {
    exp::Context ctx = context();
    ctx.log = [](const std::string& line) { std::cerr << "  " << line << '\n'; };
    const exp::Records records = exp::exp_sample_complexity(exp::variant_config(variant), cfg, ctx);
    const auto median_of = [&](const std::string& model) {
      const exp::Records hit = exp::select(records, model, "episodes_to_threshold_median");
      if (hit.size() != 1) throw std::runtime_error("missing median for " + model);
      return hit.front().value;
    };
    const double m4 = median_of("m4");
    const double m7 = median_of("m7");
    pass = pass && m4 < m7;
    detail << exp::to_string(variant) << ": m4=" << fmt(m4) << " m7=" << fmt(m7) << "; ";
  }
  return {pass, detail.str()};
}

// --- 5 ---------------------------------------------------------------------

sw::SwConfig reduced_sw() {
  sw::SwConfig env = sw::SwConfig::stochastic_default();
  env.columns = 8;
  env.bush_columns = {2, 3, 5};
  return env;
}

StateIndex observe(const Projection& proj, const TabularModel& full, StateIndex s) {
  const std::size_t product = full.schema().state_count();
  if (s < product) return proj.kept_index(s);
  return static_cast<StateIndex>(proj.kept_schema().state_count() + (s - product));
}

Outcome generative_budget_criterion() {
  constexpr double kEps = 0.05;
  constexpr double kDelta = 0.1;
  constexpr std::size_t kTrials = 100;
  const sw::SwConfig env = reduced_sw();
  const TabularModel full = sw::build_sw(env);
  const FeatureSubset subset = sw::catalog_subset("m4");
  const PartialModel partial = project_model(full, subset);
  const TabularModel& truth = partial.model;
  const Projection proj(full.schema(), subset);
  const SampleBudget budget =
      sample_complexity_budget(truth.state_count(), truth.action_count(), kEps, full.discount(), kDelta);

  PlanningConfig tight;
  tight.tol = 1e-12;
  const QTable q_star = action_values(full, accurate_optimal_values(full, tight));

  std::size_t within = 0;
  double worst = 0.0;
  for (std::size_t trial = 0; trial < kTrials; ++trial) {
    const CountTable counts = sample_dataset(truth, budget.samples_per_pair, exp::run_seed(0, 5, trial));
    const QTable q_k = q_value_iteration(estimate_model(truth, counts), budget.epochs);
    double err = 0.0;
    for (std::size_t s = 0; s < full.state_count(); ++s) {
      const auto st = static_cast<StateIndex>(s);
      const StateIndex f = observe(proj, full, st);
      for (ActionIndex a = 0; a < full.action_count(); ++a) err = std::max(err, std::abs(q_k.at(f, a) - q_star.at(st, a)));
    }
    worst = std::max(worst, err);
    if (err <= kEps) ++within;
  }
  std::ostringstream detail;
  detail << within << "/" << kTrials << " within eps=" << kEps << " (relevant states=" << truth.state_count()
         << ", N=" << budget.samples_per_pair << ", k=" << budget.epochs << ", worst=" << fmt(worst) << ")";
  return {within >= 90, detail.str()};
}

// --- 6 ---------------------------------------------------------------------

Outcome bound_dominance_criterion() {
  constexpr std::size_t kTrials = 200;
  constexpr std::uint64_t kN = 20;
  const TabularModel full = sw::build_sw(exp::variant_config(exp::Variant::kStoch));
  const TabularModel truth = exp::catalog_model(full, "m4");
  const TruthSolution solution = solve_truth(truth);
  BoundParams params;
  params.delta = 0.05;
  params.n = kN;
  params.log_policy_class_size = loose_log_policy_class_size(truth.state_count(), truth.action_count());
  const double bound =
      planning_loss_bound(truth.state_count(), truth.action_count(), params, truth.r_max(), truth.discount());
  std::size_t exceed = 0;
  double worst = 0.0;
  for (std::size_t trial = 0; trial < kTrials; ++trial) {
    const CountTable counts = sample_dataset(truth, kN, exp::run_seed(0, 6, trial));
    const double loss = certainty_equivalence_report(truth, estimate_model(truth, counts), {}, &solution).loss;
    worst = std::max(worst, loss);
    if (loss > bound) ++exceed;
  }
  std::ostringstream detail;
  detail << exceed << "/" << kTrials << " exceed bound=" << fmt(bound) << " (max loss " << fmt(worst) << ")";
  return {exceed * 20 <= kTrials, detail.str()};
}

// --- 7 ---------------------------------------------------------------------

Outcome q_iteration_property_criterion() {
  constexpr std::size_t kModels = 60;
  constexpr double kEps = 0.01;
  Rng rng(77);
  std::size_t failures = 0;
  std::size_t checks = 0;
  std::size_t largest = 0;
  auto expect = [&](bool ok) {
    ++checks;
    if (!ok) ++failures;
  };
  for (std::size_t i = 0; i < kModels; ++i) {
    const std::size_t states = i % 10 == 9 ? 4096 : 2 + rng.below(400);
    const std::size_t actions = 1 + rng.below(4);
    const double gamma = 0.5 + 0.45 * rng.uniform();
    Rng model_rng = rng.split(i);
    const TabularModel m = testing::random_model(model_rng, states, actions, gamma);
    largest = std::max(largest, states);

    const QTable q0 = q_value_iteration(m, 0);
    expect(std::all_of(q0.values().begin(), q0.values().end(), [](double x) { return x == 0.0; }));
    const QTable q1 = q_value_iteration(m, 1);
    bool rewards_match = true;
    for (std::size_t s = 0; s < states; ++s) {
      for (ActionIndex a = 0; a < actions; ++a) rewards_match = rewards_match && q1.at(s, a) == m.reward(s, a);
    }
    expect(rewards_match);

    // k epochs of Q-value iteration equal k value-iteration sweeps from zero,
    // and land within eps * r_max / 2 of V*.
    const std::uint64_t k = sample_complexity_budget(states, actions, kEps, gamma, 0.05).epochs;
    ValueTable v(states, 0.0);
    for (std::uint64_t sweep = 0; sweep < k; ++sweep) v = vi_single_sweep(m, v).first;
    const ValueTable qk_max = q_value_iteration(m, k).max_values();
    expect(qk_max == v);
    PlanningConfig tight;
    tight.tol = 1e-12;
    const ValueTable v_star = accurate_optimal_values(m, tight);
    expect(inf_norm_diff(qk_max, v_star) <= kEps * m.r_max() / 2.0 + 1e-9);

    // ||T u - T w|| <= gamma ||u - w|| for arbitrary value tables.
    ValueTable u(states);
    ValueTable w(states);
    for (std::size_t s = 0; s < states; ++s) {
      u[s] = 20.0 * (rng.uniform() - 0.5);
      w[s] = 20.0 * (rng.uniform() - 0.5);
    }
    const double before = inf_norm_diff(u, w);
    const double after = inf_norm_diff(vi_single_sweep(m, u).first, vi_single_sweep(m, w).first);
    expect(after <= gamma * before + 1e-12);
  }
  std::ostringstream detail;
  detail << (checks - failures) << "/" << checks << " property checks on " << kModels << " random models (up to "
         << largest << " states)";
  return {failures == 0, detail.str()};
}

// --- 9 ---------------------------------------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

Outcome reproducibility_criterion() {
  const fs::path root = fs::temp_directory_path() / ("vepm_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  struct Case {
    std::vector<std::string> args;
    std::string stem;
  };
  const std::vector<Case> cases = {
      {{"value-loss", "--variant", "stoch", "--seed", "3"}, "value_loss_stoch"},
      {{"planning-loss", "--runs", "3", "--n", "3,20", "--seed", "5"}, "planning_loss_stoch"},
      {{"planning-time", "--runs", "2"}, "planning_time_det"},
      {{"sample-complexity", "--variant", "stoch", "--runs", "2", "--episodes", "25", "--seed", "9"},
       "sample_complexity_stoch"},
      {{"certify", "m4", "--variant", "stoch"}, "certify_m4_stoch"},
      {{"bounds", "--thm", "3", "--states", "130", "--actions", "3", "--eps", "0.05", "--delta", "0.1"},
       "bounds_thm3"},
  };
  std::ostringstream detail;
  bool pass = true;
  std::size_t identical = 0;
  for (const Case& c : cases) {
    const fs::path first = root / (c.stem + "_a");
    const fs::path second = root / (c.stem + "_b");
    std::vector<std::string> args = c.args;
    args.insert(args.end(), {"--out", first.string(), "--quiet"});
    std::ostringstream sink;
    if (cli::run(args, sink, std::cerr) != 0) {
      pass = false;
      detail << c.stem << " failed; ";
      continue;
    }
    const std::vector<std::string> rerun = {c.args.front(), "--config", (first / (c.stem + ".manifest.ini")).string(),
                                            "--out", second.string(), "--quiet"};
    std::vector<std::string> rerun_args = rerun;
    if (c.args.front() == "certify") rerun_args.insert(rerun_args.begin() + 1, c.args[1]);
    if (cli::run(rerun_args, sink, std::cerr) != 0) {
      pass = false;
      detail << c.stem << " rerun failed; ";
      continue;
    }
    const std::string a = slurp(first / (c.stem + ".csv"));
    const std::string b = slurp(second / (c.stem + ".csv"));
    if (a.empty() || a != b) {
      pass = false;
      detail << c.stem << " differs; ";
    } else {
      ++identical;
    }
  }
  fs::remove_all(root);
  detail << identical << "/" << cases.size() << " record files byte-identical on manifest rerun";
  return {pass, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria = {
      {1, {"zero value loss for m4-m6, positive for m1-m3", value_loss_criterion}},
      {2, {"planning loss ordering", planning_loss_ordering_criterion}},
      {3, {"sweep cost ordering", planning_time_criterion}},
      {4, {"sample complexity ordering", sample_complexity_criterion}},
      {5, {"generative-model budget on reduced world", generative_budget_criterion}},
      {6, {"planning loss bound dominance", bound_dominance_criterion}},
      {7, {"Q-value iteration properties", q_iteration_property_criterion}},
      {8, {"perturbation inequalities on every planning-loss trial", lemma_criterion}},
      {9, {"byte-identical reruns from manifests", reproducibility_criterion}},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  bool all = true;
  for (const auto& [id, entry] : criteria) {
    if (!selected.empty() && selected.count(id) == 0) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = entry.second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all = all && outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << entry.first << " | "
              << outcome.detail << " [" << fmt(seconds) << " s]" << std::endl;
  }
  return all ? 0 : 1;
}

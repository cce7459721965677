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

#include "vepm/squirrels_world.hpp"

#include <algorithm>
#include <charconv>

#include "vepm/error.hpp"
#include "vepm/planners.hpp"

namespace vepm::sw {

namespace {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace

SwConfig SwConfig::deterministic() { return SwConfig{}; }

SwConfig SwConfig::stochastic_default() {
  SwConfig cfg;
  cfg.stochastic = true;
  return cfg;
}

void SwConfig::validate() const {
  auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (columns < 2) throw ConfigError("columns must be at least 2");
  for (int b : bush_columns) {
    if (b <= 0 || b >= columns - 1) {
      throw ConfigError("bush column " + std::to_string(b) + " must lie strictly between the start column 0 and " +
                        "the nut column " + std::to_string(columns - 1));
    }
  }
  if (hawk_speed < 1) throw ConfigError("hawk_speed must be at least 1");
  if (hawk_start_col < 0 || hawk_start_col >= columns) throw ConfigError("hawk_start_col out of range");
  if (hawk_start_dir != kHawkLeft && hawk_start_dir != kHawkRight) throw ConfigError("hawk_start_dir must be 0 or 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  if (episode_limit < 1) throw ConfigError("episode_limit must be at least 1");
  if (!prob_ok(slip_prob) || !prob_ok(hawk_reverse_prob) || !prob_ok(wind_flip_prob) ||
      !prob_ok(weather_flip_prob)) {
    throw ConfigError("probabilities must lie in [0, 1]");
  }
  if (!(reward > 0.0)) throw ConfigError("reward must be positive");
}

std::vector<std::pair<std::string, std::string>> SwConfig::describe() const {
  std::string bushes;
  for (std::size_t i = 0; i < bush_columns.size(); ++i) {
    if (i) bushes += ",";
    bushes += std::to_string(bush_columns[i]);
  }
  return {
      {"columns", std::to_string(columns)},
      {"bush_columns", bushes},
      {"hawk_speed", std::to_string(hawk_speed)},
      {"hawk_start_col", std::to_string(hawk_start_col)},
      {"hawk_start_dir", hawk_start_dir == kHawkRight ? "right" : "left"},
      {"gamma", format_double(gamma)},
      {"episode_limit", std::to_string(episode_limit)},
      {"stochastic", stochastic ? "true" : "false"},
      {"slip_prob", format_double(slip_prob)},
      {"hawk_reverse_prob", format_double(hawk_reverse_prob)},
      {"wind_flip_prob", format_double(wind_flip_prob)},
      {"weather_flip_prob", format_double(weather_flip_prob)},
      {"cloud_drift", to_string(cloud_drift)},
      {"reward", format_double(reward)},
  };
}

std::string to_string(CloudDrift drift) {
  return drift == CloudDrift::kCyclic ? "cyclic" : "lazy_random_walk";
}

CloudDrift parse_cloud_drift(const std::string& text) {
  if (text == "cyclic") return CloudDrift::kCyclic;
  if (text == "lazy_random_walk") return CloudDrift::kLazyRandomWalk;
  throw ConfigError("unknown cloud_drift rule '" + text + "'");
}

FeatureSchema sw_schema(const SwConfig& cfg) {
  const auto cols = static_cast<std::size_t>(cfg.columns);
  return FeatureSchema({{kSquirrel, cols}, {kHawkCol, cols}, {kHawkDir, 2}, {kCloud, cols}, {kWind, 4}, {kWeather, 2}});
}

FeatureSchema sw_relevant_schema(const SwConfig& cfg) {
  const auto cols = static_cast<std::size_t>(cfg.columns);
  return FeatureSchema({{kSquirrel, cols}, {kHawkCol, cols}, {kHawkDir, 2}});
}

HawkSweep sweep_hawk(int col, int dir, int speed, int columns) {
  HawkSweep out;
  out.covered.reserve(static_cast<std::size_t>(speed));
  for (int i = 0; i < speed; ++i) {
    if (dir == kHawkRight && col == columns - 1) dir = kHawkLeft;
    if (dir == kHawkLeft && col == 0) dir = kHawkRight;
    col += dir == kHawkRight ? 1 : -1;
    out.covered.push_back(col);
  }
  out.col = col;
  out.dir = dir;
  return out;
}

namespace {

struct Outcome {
  int index;  // relevant or distractor index; -1 caught, -2 nut
  double prob;
};

constexpr int kCaughtOutcome = -1;
constexpr int kNutOutcome = -2;

int relevant_index(int squirrel, int hawk_col, int hawk_dir, int columns) {
  return (squirrel * columns + hawk_col) * 2 + hawk_dir;
}

// Successor distribution of the relevant features (squirrel, hawk) for one
// action. The squirrel moves first; reaching the nut ends the step.
std::vector<Outcome> relevant_outcomes(const SwConfig& cfg, int squirrel, int hawk_col, int hawk_dir,
                                       ActionIndex action) {
  const int nut = cfg.columns - 1;
  int target = squirrel;
  if (action == kLeft) target = std::max(0, squirrel - 1);
  if (action == kRight) target = std::min(nut, squirrel + 1);

  std::vector<Outcome> squirrel_moves;
  if (cfg.stochastic && target != squirrel && cfg.slip_prob > 0.0) {
    squirrel_moves = {{target, 1.0 - cfg.slip_prob}, {squirrel, cfg.slip_prob}};
  } else {
    squirrel_moves = {{target, 1.0}};
  }
  std::vector<Outcome> hawk_dirs;
  if (cfg.stochastic && cfg.hawk_reverse_prob > 0.0) {
    hawk_dirs = {{hawk_dir, 1.0 - cfg.hawk_reverse_prob}, {1 - hawk_dir, cfg.hawk_reverse_prob}};
  } else {
    hawk_dirs = {{hawk_dir, 1.0}};
  }

  std::vector<Outcome> out;
  for (const Outcome& sq : squirrel_moves) {
    if (sq.prob == 0.0) continue;
    if (sq.index == nut) {
      out.push_back({kNutOutcome, sq.prob});
      continue;
    }
    const bool sheltered =
        std::find(cfg.bush_columns.begin(), cfg.bush_columns.end(), sq.index) != cfg.bush_columns.end();
    for (const Outcome& hd : hawk_dirs) {
      if (hd.prob == 0.0) continue;
      const HawkSweep sweep = sweep_hawk(hawk_col, hd.index, cfg.hawk_speed, cfg.columns);
      const bool hit = std::find(sweep.covered.begin(), sweep.covered.end(), sq.index) != sweep.covered.end();
      const double p = sq.prob * hd.prob;
      if (hit && !sheltered) {
        out.push_back({kCaughtOutcome, p});
      } else {
        out.push_back({relevant_index(sq.index, sweep.col, sweep.dir, cfg.columns), p});
      }
    }
  }
  return out;
}

// Successor distribution of (cloud, wind, weather); independent of the action
// and of every relevant feature.
std::vector<Outcome> distractor_outcomes(const SwConfig& cfg, int cloud, int wind, int weather) {
  std::vector<Outcome> clouds;
  if (!cfg.stochastic || cfg.cloud_drift == CloudDrift::kCyclic) {
    clouds = {{(cloud + 1) % cfg.columns, 1.0}};
  } else {
    const double third = 1.0 / 3.0;
    const int left = std::max(0, cloud - 1);
    const int right = std::min(cfg.columns - 1, cloud + 1);
    clouds = {{left, third}, {cloud, third}, {right, third}};
  }
  auto flips = [&](int value, double p) -> std::vector<Outcome> {
    if (!cfg.stochastic || p == 0.0) return {{value, 1.0}};
    if (p == 1.0) return {{1 - value, 1.0}};
    return {{value, 1.0 - p}, {1 - value, p}};
  };
  const auto row_a = flips(wind >> 1, cfg.wind_flip_prob);
  const auto row_b = flips(wind & 1, cfg.wind_flip_prob);
  const auto weathers = flips(weather, cfg.weather_flip_prob);

  std::vector<Outcome> out;
  for (const Outcome& c : clouds) {
    for (const Outcome& a : row_a) {
      for (const Outcome& b : row_b) {
        for (const Outcome& w : weathers) {
          const int index = (c.index * 4 + (a.index * 2 + b.index)) * 2 + w.index;
          out.push_back({index, c.prob * a.prob * b.prob * w.prob});
        }
      }
    }
  }
  return out;
}

TabularModel build_model(const SwConfig& cfg, bool with_distractors) {
  const FeatureSchema schema = with_distractors ? sw_schema(cfg) : sw_relevant_schema(cfg);
  const int cols = cfg.columns;
  const std::size_t relevant_count = static_cast<std::size_t>(cols) * cols * 2;
  const std::size_t distractor_count = with_distractors ? static_cast<std::size_t>(cols) * 4 * 2 : 1;
  const std::size_t product = schema.state_count();
  const auto caught = static_cast<StateIndex>(product);
  const auto nut = static_cast<StateIndex>(product + 1);
  const std::size_t n = product + 2;

  // Distractor rows do not depend on the action; compute them once.
  std::vector<std::vector<Outcome>> distractor_rows(distractor_count);
  if (with_distractors) {
    for (std::size_t d = 0; d < distractor_count; ++d) {
      const int weather = static_cast<int>(d % 2);
      const int wind = static_cast<int>((d / 2) % 4);
      const int cloud = static_cast<int>(d / 8);
      distractor_rows[d] = distractor_outcomes(cfg, cloud, wind, weather);
    }
  } else {
    distractor_rows[0] = {{0, 1.0}};
  }

  TransitionTable::Builder builder(n, kActionCount);
  std::vector<double> rewards(n * kActionCount, 0.0);
  std::vector<StateIndex> terminal;
  std::vector<TransitionTable::Entry> row;
  for (std::size_t rel = 0; rel < relevant_count; ++rel) {
    const int hawk_dir = static_cast<int>(rel % 2);
    const int hawk_col = static_cast<int>((rel / 2) % cols);
    const int squirrel = static_cast<int>(rel / (2 * cols));
    std::vector<Outcome> rel_rows[kActionCount];
    for (ActionIndex a = 0; a < kActionCount; ++a) rel_rows[a] = relevant_outcomes(cfg, squirrel, hawk_col, hawk_dir, a);
    for (std::size_t d = 0; d < distractor_count; ++d) {
      const auto s = static_cast<StateIndex>(rel * distractor_count + d);
      if (squirrel == cols - 1) {
        terminal.push_back(s);
        for (ActionIndex a = 0; a < kActionCount; ++a) builder.add_row({{s, 1.0}});
        continue;
      }
      for (ActionIndex a = 0; a < kActionCount; ++a) {
        row.clear();
        double reward = 0.0;
        for (const Outcome& r : rel_rows[a]) {
          if (r.index == kCaughtOutcome) {
            row.push_back({caught, r.prob});
          } else if (r.index == kNutOutcome) {
            row.push_back({nut, r.prob});
            reward += cfg.reward * r.prob;
          } else {
            for (const Outcome& o : distractor_rows[d]) {
              row.push_back({static_cast<StateIndex>(static_cast<std::size_t>(r.index) * distractor_count + o.index),
                             r.prob * o.prob});
            }
          }
        }
        builder.add_row(row);
        rewards[static_cast<std::size_t>(s) * kActionCount + a] = reward;
      }
    }
  }
  for (StateIndex s : {caught, nut}) {
    for (ActionIndex a = 0; a < kActionCount; ++a) builder.add_row({{s, 1.0}});
  }

  TabularModel::Parts parts;
  parts.schema = schema;
  parts.sentinels = {kCaught, kNut};
  parts.action_count = kActionCount;
  parts.transitions = std::move(builder).finish();
  parts.rewards = std::move(rewards);
  parts.discount = cfg.gamma;
  parts.terminal = std::move(terminal);
  parts.r_max = cfg.reward;
  return TabularModel(std::move(parts));
}

void require_solvable(const SwConfig& cfg, const TabularModel& relevant) {
  const PlanResult plan = value_iteration(relevant);
  const FeatureVector start{0, cfg.hawk_start_col, cfg.hawk_start_dir};
  if (!(plan.values[relevant.schema().encode(start)] > 0.0)) {
    throw ConfigError("unsolvable Squirrel's World configuration: the nut cannot be reached from the start "
                      "state; change bush_columns (or the hawk start / speed)");
  }
}

}  // namespace

TabularModel build_sw_relevant(const SwConfig& cfg) {
  cfg.validate();
  TabularModel m = build_model(cfg, false);
  require_solvable(cfg, m);
  return m;
}

TabularModel build_sw(const SwConfig& cfg) {
  cfg.validate();
  require_solvable(cfg, build_model(cfg, false));
  return build_model(cfg, true);
}

FeatureVector start_state(const SwConfig& cfg) {
  return {0, cfg.hawk_start_col, cfg.hawk_start_dir, 0, kWindLL, kSunny};
}

double start_value(const SwConfig& cfg) {
  cfg.validate();
  const TabularModel relevant = build_model(cfg, false);
  const PlanResult plan = value_iteration(relevant);
  return plan.values[relevant.schema().encode(FeatureVector{0, cfg.hawk_start_col, cfg.hawk_start_dir})];
}

Episode simulate_episode(const TabularModel& m, const ActingPolicy& pi, StateIndex start, int limit,
                         std::uint64_t seed, double reward_on_nut) {
  Rng rng(seed);
  const auto nut = m.sentinel_index(kNut);
  const auto caught = m.sentinel_index(kCaught);
  Episode episode;
  StateIndex s = start;
  for (int t = 0; t < limit && !m.is_terminal(s); ++t) {
    const ActionIndex a = pi(s, rng);
    const auto row = m.row(s, a);
    const StateIndex next = row.next[rng.categorical(row.prob)];
    double r = 0.0;
    if (nut) {
      r = next == *nut ? reward_on_nut : 0.0;
    } else {
      r = m.reward(s, a);
    }
    episode.steps.push_back({s, a, next, r});
    episode.total_reward += r;
    s = next;
  }
  episode.reached_nut = nut && s == *nut;
  episode.caught = caught && s == *caught;
  return episode;
}

Episode simulate_episode(const TabularModel& m, const Policy& pi, StateIndex start, int limit, std::uint64_t seed,
                         double reward_on_nut) {
  return simulate_episode(
      m, [&pi](StateIndex s, Rng&) { return pi[s]; }, start, limit, seed, reward_on_nut);
}

std::map<std::string, FeatureSubset> relevant_subsets() {
  return {
      {"m1", {{kSquirrel, kCloud}}},
      {"m2", {{kSquirrel, kCloud, kWind}}},
      {"m3", {{kSquirrel, kCloud, kWind, kHawkCol}}},
      {"m4", {{kSquirrel, kHawkCol, kHawkDir}}},
      {"m5", {{kSquirrel, kHawkCol, kHawkDir, kCloud}}},
      {"m6", {{kSquirrel, kHawkCol, kHawkDir, kCloud, kWind}}},
      {"m7", {{kSquirrel, kHawkCol, kHawkDir, kCloud, kWind, kWeather}}},
  };
}

FeatureSubset catalog_subset(const std::string& id) {
  const auto catalog = relevant_subsets();
  const auto it = catalog.find(id);
  if (it == catalog.end()) throw ConfigError("unknown model id '" + id + "' (expected m1..m7)");
  return it->second;
}

}  // namespace vepm::sw

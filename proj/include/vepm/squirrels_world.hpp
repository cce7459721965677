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

// Squirrel's World: a squirrel walks along a row of cells from column 0 to
// the nut in the last column while a hawk sweeps back and forth overhead.
// Bush columns shelter the squirrel. Cloud position, wind and weather are
// distractor features that never influence the squirrel, the hawk, or the
// reward.

#ifndef VEPM_SQUIRRELS_WORLD_HPP_
#define VEPM_SQUIRRELS_WORLD_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "vepm/abstraction.hpp"
#include "vepm/core_mdp.hpp"
#include "vepm/random.hpp"

namespace vepm::sw {

inline constexpr const char* kSquirrel = "squirrel_col";
inline constexpr const char* kHawkCol = "hawk_col";
inline constexpr const char* kHawkDir = "hawk_dir";
inline constexpr const char* kCloud = "cloud_col";
inline constexpr const char* kWind = "wind";
inline constexpr const char* kWeather = "weather";

inline constexpr const char* kCaught = "caught";
inline constexpr const char* kNut = "nut";

enum Action : ActionIndex { kLeft = 0, kRight = 1, kStay = 2 };
inline constexpr std::size_t kActionCount = 3;

enum HawkDir : int { kHawkLeft = 0, kHawkRight = 1 };
enum Wind : int { kWindLL = 0, kWindLR = 1, kWindRL = 2, kWindRR = 3 };
enum Weather : int { kSunny = 0, kRainy = 1 };

enum class CloudDrift { kCyclic, kLazyRandomWalk };

/// Environment parameters. With stochastic == false the probability fields are
/// inactive: the squirrel never slips, the hawk never reverses, wind and
/// weather hold, and the cloud drifts one column right per step (wrapping).
struct SwConfig {
  int columns = 16;
  std::vector<int> bush_columns{2, 3, 7, 8, 12, 13};  // 0-indexed
  int hawk_speed = 5;
  int hawk_start_col = 0;
  int hawk_start_dir = kHawkRight;
  double gamma = 0.95;
  int episode_limit = 100;
  bool stochastic = false;
  double slip_prob = 0.1;
  double hawk_reverse_prob = 0.1;
  double wind_flip_prob = 0.25;
  double weather_flip_prob = 0.1;
  CloudDrift cloud_drift = CloudDrift::kLazyRandomWalk;
  double reward = 10.0;

  static SwConfig deterministic();
  static SwConfig stochastic_default();

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
  /// Flat key=value echo of every resolved field, in a fixed order.
  std::vector<std::pair<std::string, std::string>> describe() const;
};

std::string to_string(CloudDrift drift);
CloudDrift parse_cloud_drift(const std::string& text);

FeatureSchema sw_schema(const SwConfig& cfg);
/// Schema restricted to squirrel, hawk position and hawk direction.
FeatureSchema sw_relevant_schema(const SwConfig& cfg);

/// Full six-feature model plus the caught / nut sentinels. Throws ConfigError
/// when no policy can reach the nut from the start state.
TabularModel build_sw(const SwConfig& cfg);

/// The same dynamics over the three relevant features only.
TabularModel build_sw_relevant(const SwConfig& cfg);

/// Start state in the full schema (squirrel column 0, hawk at its configured
/// start, cloud at 0, wind LL, weather sunny).
FeatureVector start_state(const SwConfig& cfg);

/// Optimal value of the start state; zero means the layout is unsolvable.
double start_value(const SwConfig& cfg);

/// Columns the hawk enters during one step and its end position/direction.
struct HawkSweep {
  std::vector<int> covered;
  int col = 0;
  int dir = kHawkRight;
};
HawkSweep sweep_hawk(int col, int dir, int speed, int columns);

struct Step {
  StateIndex state;
  ActionIndex action;
  StateIndex next_state;
  double reward;
};

struct Episode {
  std::vector<Step> steps;
  double total_reward = 0.0;
  bool reached_nut = false;
  bool caught = false;
};

/// Chooses an action for a state of the simulated model.
using ActingPolicy = std::function<ActionIndex(StateIndex, Rng&)>;

/// Samples an episode from `start`, stopping at a terminal state or after
/// `limit` steps. The realized reward is `reward_on_nut` on the transition
/// into the nut sentinel and zero otherwise.
Episode simulate_episode(const TabularModel& m, const ActingPolicy& pi, StateIndex start, int limit,
                         std::uint64_t seed, double reward_on_nut = 10.0);

/// Convenience overload acting with a fixed deterministic policy.
Episode simulate_episode(const TabularModel& m, const Policy& pi, StateIndex start, int limit,
                         std::uint64_t seed, double reward_on_nut = 10.0);

/// The m1..m7 model catalog, keyed by id.
std::map<std::string, FeatureSubset> relevant_subsets();
FeatureSubset catalog_subset(const std::string& id);

}  // namespace vepm::sw

#endif  // VEPM_SQUIRRELS_WORLD_HPP_

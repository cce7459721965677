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

#include <cmath>
#include <string>

#include "doctest.h"
#include "test_support.hpp"
#include "vepm/core_mdp.hpp"
#include "vepm/error.hpp"
#include "vepm/random.hpp"

using namespace vepm;
using vepm::testing::make_model;
using vepm::testing::random_model;

namespace {

// Position of fv in a nested-loop enumeration of [2,3] (first feature outer).
StateIndex enumeration_position(const FeatureVector& fv) {
  StateIndex pos = 0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (a == fv[0] && b == fv[1]) return pos;
      ++pos;
    }
  }
  return pos;
}

double evaluation_residual(const TabularModel& m, const Policy& pi, const ValueTable& v) {
  double worst = 0.0;
  for (std::size_t s = 0; s < m.state_count(); ++s) {
    const auto st = static_cast<StateIndex>(s);
    worst = std::max(worst, std::abs(backup(m, st, pi[st], v) - v[s]));
  }
  return worst;
}

}  // namespace

TEST_SUITE("core_mdp") {
  TEST_CASE("encode on a [2,3] schema") {
    const FeatureSchema schema({{"x", 2}, {"y", 3}});
    CHECK(encode_state(schema, FeatureVector{0, 0}) == 0);
    CHECK(encode_state(schema, FeatureVector{1, 2}) == 5);
    CHECK(encode_state(schema, FeatureVector{1, 0}) == enumeration_position({1, 0}));
    CHECK(encode_state(schema, FeatureVector{1, 0}) == 3);
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 3; ++b) {
        CHECK(encode_state(schema, FeatureVector{a, b}) == enumeration_position({a, b}));
      }
    }
  }

  TEST_CASE("encode rejects out-of-range values by feature name") {
    const FeatureSchema schema({{"x", 2}, {"y", 3}});
    CHECK_THROWS_WITH_AS(encode_state(schema, FeatureVector{0, 3}), doctest::Contains("y"), ValidationError);
    CHECK_THROWS_WITH_AS(encode_state(schema, FeatureVector{-1, 0}), doctest::Contains("x"), ValidationError);
    CHECK_THROWS_AS(encode_state(schema, FeatureVector{0}), ValidationError);
  }

  TEST_CASE("encode and decode round trip on random schemas") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Feature> features;
      std::size_t total = 1;
      const std::size_t count = 1 + rng.below(5);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t domain = 1 + rng.below(16);
        if (total * domain > (1u << 20)) break;
        total *= domain;
        features.push_back({"f" + std::to_string(i), domain});
      }
      const FeatureSchema schema(features);
      REQUIRE(schema.state_count() == total);
      for (StateIndex i = 0; i < schema.state_count(); ++i) {
        const FeatureVector fv = decode_state(schema, i);
        if (encode_state(schema, fv) != i) FAIL("round trip failed at " << i);
      }
    }
  }

  TEST_CASE("schema construction checks") {
    CHECK_THROWS_AS(FeatureSchema({{"a", 2}, {"a", 3}}), ValidationError);
    CHECK_THROWS_AS(FeatureSchema({{"a", 0}}), ValidationError);
    CHECK_THROWS_AS(FeatureSchema({{"a", 1u << 20}, {"b", 1u << 20}}), ValidationError);
    const FeatureSchema ok({{"a", 4}, {"b", 5}});
    CHECK(ok.index_of("b") == 1u);
    CHECK_FALSE(ok.index_of("c").has_value());
  }

  TEST_CASE("dense rows above ten percent of the state count") {
    TransitionTable::Builder builder(20, 1);
    builder.add_row({{0, 0.5}, {1, 0.5}});  // 2 * 10 >= 20: dense
    builder.add_row({{3, 1.0}});
    for (int s = 2; s < 20; ++s) builder.add_row({{static_cast<StateIndex>(s), 0.6}, {static_cast<StateIndex>(s), 0.4}});
    const TransitionTable table = std::move(builder).finish();
    CHECK(table.row_is_dense(0, 0));
    CHECK(table.row(0, 0).size() == 20);
    CHECK_FALSE(table.row_is_dense(1, 0));
    CHECK(table.row(1, 0).size() == 1);
    CHECK(table.row(5, 0).size() == 1);
    CHECK(table.row(5, 0).prob[0] == doctest::Approx(1.0));
  }

  TEST_CASE("validate_model reports each violation kind") {
    const auto good = make_model({{{{1, 1.0}}}, {{{1, 1.0}}}}, {{1.0}, {0.0}}, 0.9, {1});
    CHECK(validate_model(good).ok());

    const auto short_row = make_model({{{{0, 0.5}, {1, 0.4}}}, {{{1, 1.0}}}}, {{0.0}, {0.0}}, 0.9, {1});
    const ValidationReport r1 = validate_model(short_row);
    CHECK(r1.violations.size() == 1);
    CHECK(r1.count(ViolationKind::kRowSum) == 1);
    CHECK(r1.violations[0].state == 0);

    const auto big_reward = make_model({{{{1, 1.0}}}, {{{1, 1.0}}}}, {{3.0}, {0.0}}, 0.9, {1}, 2.0);
    const ValidationReport r2 = validate_model(big_reward);
    CHECK(r2.violations.size() == 1);
    CHECK(r2.count(ViolationKind::kRewardRange) == 1);

    const auto leaky_terminal = make_model({{{{1, 1.0}}}, {{{0, 1.0}}}}, {{0.0}, {0.0}}, 0.9, {1});
    CHECK(validate_model(leaky_terminal).count(ViolationKind::kTerminalAbsorption) == 1);

    CHECK_THROWS_AS(require_valid(short_row), ValidationError);
  }

  TEST_CASE("policy evaluation examples") {
    const auto zero = make_model({{{{1, 1.0}}, {{0, 1.0}}}, {{{0, 1.0}}, {{1, 1.0}}}}, {{0.0, 0.0}, {0.0, 0.0}}, 0.9);
    const ValueTable v0 = policy_evaluation(zero, Policy{{0, 1}});
    CHECK(v0[0] == 0.0);
    CHECK(v0[1] == 0.0);

    const auto single = make_model({{{{0, 1.0}}, {{0, 1.0}}}}, {{1.0, 1.0}}, 0.5);
    for (ActionIndex a = 0; a < 2; ++a) {
      const ValueTable v = policy_evaluation(single, Policy{{a}});
      CHECK(std::abs(v[0] - 2.0) <= kDefaultTolerance);
    }

    CHECK_THROWS_AS(policy_evaluation(single, Policy{{0, 0}}), ValidationError);
    CHECK_THROWS_AS(policy_evaluation(single, Policy{{2}}), ValidationError);
  }

  TEST_CASE("policy evaluation fixed point and value range on random models") {
    Rng rng(5);
    for (int trial = 0; trial < 25; ++trial) {
      const auto m = random_model(rng, 10 + rng.below(300), 1 + rng.below(4), 0.5 + 0.45 * rng.uniform());
      Policy pi;
      for (std::size_t s = 0; s < m.state_count(); ++s) pi.actions.push_back(static_cast<ActionIndex>(rng.below(m.action_count())));
      const double tol = 1e-9;
      const ValueTable v = policy_evaluation(m, pi, tol);
      CHECK(evaluation_residual(m, pi, v) <= tol);
      for (double x : v) {
        CHECK(x >= 0.0);
        CHECK(x <= m.value_bound());
      }
    }
  }

  TEST_CASE("inf_norm_diff") {
    const std::vector<double> a{1, 2};
    const std::vector<double> b{1, 5};
    CHECK(inf_norm_diff(a, a) == 0.0);
    CHECK(inf_norm_diff(a, b) == 3.0);
    CHECK(inf_norm_diff(b, a) == 3.0);
    CHECK_THROWS_AS(inf_norm_diff(a, std::vector<double>{1.0}), ValidationError);
  }

  TEST_CASE("action values and sentinels") {
    TabularModel::Parts parts;
    parts.schema = FeatureSchema({{"x", 2}});
    parts.sentinels = {"goal"};
    parts.action_count = 1;
    TransitionTable::Builder builder(3, 1);
    builder.add_row({{1, 1.0}});
    builder.add_row({{2, 1.0}});
    builder.add_row({{2, 1.0}});
    parts.transitions = std::move(builder).finish();
    parts.rewards = {0.0, 4.0, 0.0};
    parts.discount = 0.5;
    parts.r_max = 4.0;
    const TabularModel m(std::move(parts));
    CHECK(m.state_count() == 3);
    CHECK(m.sentinel_index("goal") == StateIndex{2});
    CHECK(m.is_terminal(2));
    CHECK(validate_model(m).ok());
    const ValueTable v = policy_evaluation(m, Policy{{0, 0, 0}}, 1e-12);
    CHECK(v[1] == doctest::Approx(4.0));
    CHECK(v[0] == doctest::Approx(2.0));
    const QTable q = action_values(m, v);
    CHECK(q.at(0, 0) == doctest::Approx(2.0));
    CHECK(q.at(2, 0) == 0.0);
  }
}

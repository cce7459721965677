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
#include <numeric>

#include "doctest.h"
#include "vepm/abstraction.hpp"
#include "vepm/error.hpp"
#include "vepm/squirrels_world.hpp"

using namespace vepm;

namespace {

const TabularModel& det_sw() {
  static const TabularModel m = sw::build_sw(sw::SwConfig::deterministic());
  return m;
}

}  // namespace

TEST_SUITE("abstraction") {
  TEST_CASE("project_state by coordinate deletion") {
    const FeatureSchema& schema = det_sw().schema();
    const FeatureVector fv{4, 9, sw::kHawkRight, 2, sw::kWindLL, sw::kSunny};
    CHECK(project_state(schema, fv, sw::catalog_subset("m7")) == fv);
    CHECK(project_state(schema, fv, sw::catalog_subset("m4")) == FeatureVector{4, 9, sw::kHawkRight});
    CHECK(project_state(schema, fv, FeatureSubset{{sw::kWeather, sw::kSquirrel}}) == FeatureVector{sw::kSunny, 4});
    CHECK_THROWS_AS(project_state(schema, fv, FeatureSubset{{"altitude"}}), ValidationError);
  }

  TEST_CASE("projection index table agrees with project-then-encode on every state") {
    const FeatureSchema& schema = det_sw().schema();
    for (const char* id : {"m1", "m3", "m4", "m6"}) {
      const FeatureSubset subset = sw::catalog_subset(id);
      const Projection proj(schema, subset);
      for (StateIndex s = 0; s < schema.state_count(); ++s) {
        const FeatureVector kept = project_state(schema, schema.decode(s), subset);
        if (proj.kept_schema().encode(kept) != proj.kept_index(s)) FAIL(id << " mismatch at " << s);
        if (proj.compose(proj.kept_index(s), proj.omitted_index(s)) != s) FAIL(id << " compose mismatch at " << s);
      }
    }
  }

  TEST_CASE("projection construction errors") {
    const FeatureSchema& schema = det_sw().schema();
    CHECK_THROWS_AS(Projection(schema, FeatureSubset{}), ValidationError);
    CHECK_THROWS_AS(Projection(schema, FeatureSubset{{sw::kSquirrel, sw::kSquirrel}}), ValidationError);
    CHECK(Projection(schema, sw::catalog_subset("m7")).is_identity());
  }

  TEST_CASE("identity projection returns the same tables") {
    const PartialModel p = project_model(det_sw(), sw::catalog_subset("m7"));
    CHECK(p.exact);
    CHECK(p.model == det_sw());
    const PartialModel again = project_model(p.model, sw::catalog_subset("m7"));
    CHECK(again.model == p.model);
  }

  TEST_CASE("projection is idempotent under the identity subset") {
    const PartialModel m4 = project_model(det_sw(), sw::catalog_subset("m4"));
    const PartialModel twice = project_model(m4.model, sw::catalog_subset("m4"));
    CHECK(twice.exact);
    CHECK(twice.model == m4.model);
  }

  TEST_CASE("projected state counts are products of kept domains") {
    const FeatureSchema& schema = det_sw().schema();
    for (const char* id : {"m4", "m5", "m6", "m7"}) {
      const FeatureSubset subset = sw::catalog_subset(id);
      std::size_t product = 1;
      for (const auto& name : subset.kept) product *= schema.feature(*schema.index_of(name)).domain_size;
      const PartialModel p = project_model(det_sw(), subset);
      CHECK(p.model.product_state_count() == product);
      CHECK(p.model.state_count() == product + 2);
      CHECK(validate_model(p.model).ok());
    }
    CHECK(project_model(det_sw(), sw::catalog_subset("m4")).model.product_state_count() == 512);
    CHECK(project_model(det_sw(), sw::catalog_subset("m5")).model.product_state_count() == 8192);
    CHECK(project_model(det_sw(), sw::catalog_subset("m6")).model.product_state_count() == 32768);
    CHECK(project_model(det_sw(), sw::catalog_subset("m7")).model.product_state_count() == 65536);
  }

  TEST_CASE("exactness flag") {
    CHECK(project_model(det_sw(), sw::catalog_subset("m4")).exact);
    CHECK(project_model(det_sw(), sw::catalog_subset("m5")).exact);
    CHECK(project_model(det_sw(), sw::catalog_subset("m6")).exact);
    const PartialModel m1 = project_model(det_sw(), sw::catalog_subset("m1"));
    CHECK_FALSE(m1.exact);
    CHECK(m1.max_deviation > kExactnessThreshold);
  }

  TEST_CASE("m1 is inexact because the hawk decides capture") {
    // Squirrel at column 5 staying put; the hawk at column 4 moving right
    // sweeps over it, the hawk at column 15 moving left does not reach it.
    const TabularModel& m = det_sw();
    const StateIndex caught = *m.sentinel_index(sw::kCaught);
    const auto prob_caught = [&](int hawk_col, int hawk_dir) {
      const StateIndex s = m.schema().encode(FeatureVector{5, hawk_col, hawk_dir, 0, sw::kWindLL, sw::kSunny});
      const auto row = m.row(s, sw::kStay);
      double p = 0.0;
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (row.next[i] == caught) p += row.prob[i];
      }
      return p;
    };
    CHECK(prob_caught(4, sw::kHawkRight) == 1.0);
    CHECK(prob_caught(15, sw::kHawkLeft) == 0.0);
    // Rewards never depend on the hawk.
    for (StateIndex s = 0; s < m.product_state_count(); ++s) {
      FeatureVector fv = m.schema().decode(s);
      fv[1] = 0;
      fv[2] = 0;
      const StateIndex base = m.schema().encode(fv);
      for (ActionIndex a = 0; a < m.action_count(); ++a) {
        if (m.reward(s, a) != m.reward(base, a)) FAIL("reward depends on the hawk at " << s);
      }
    }
  }

  TEST_CASE("explicit and stationary omitted weightings") {
    const FeatureSubset m4 = sw::catalog_subset("m4");
    const Projection proj(det_sw().schema(), m4);
    const std::size_t omitted = proj.omitted_schema().state_count();
    std::vector<double> point(omitted, 0.0);
    point[5] = 1.0;
    const PartialModel p = project_model(det_sw(), m4, point);
    CHECK(p.exact);
    CHECK(p.model == project_model(det_sw(), m4).model);

    const TabularModel stoch = sw::build_sw(sw::SwConfig::stochastic_default());
    const std::vector<double> stationary = omitted_stationary_distribution(stoch, m4);
    CHECK(stationary.size() == omitted);
    CHECK(std::accumulate(stationary.begin(), stationary.end(), 0.0) == doctest::Approx(1.0));
    CHECK(project_model(stoch, m4, OmittedWeighting::kStationary).exact);

    CHECK_THROWS_AS(project_model(det_sw(), m4, std::vector<double>(omitted, 0.5)), ValidationError);
    CHECK_THROWS_AS(project_model(det_sw(), m4, std::vector<double>(3, 1.0 / 3.0)), ValidationError);
  }

  TEST_CASE("lift_policy") {
    const TabularModel& m = det_sw();
    Policy full_pi;
    for (std::size_t s = 0; s < m.state_count(); ++s) full_pi.actions.push_back(static_cast<ActionIndex>(s % 3));
    CHECK(lift_policy(full_pi, m, sw::catalog_subset("m7")) == full_pi);

    const PartialModel p = project_model(m, sw::catalog_subset("m4"));
    const Policy constant{std::vector<ActionIndex>(p.model.state_count(), sw::kRight)};
    const Policy lifted = lift_policy(constant, m, sw::catalog_subset("m4"));
    CHECK(lifted.size() == m.state_count());
    for (auto a : lifted.actions) CHECK(a == sw::kRight);

    CHECK_THROWS_AS(lift_policy(Policy{{0, 1}}, m, sw::catalog_subset("m4")), ValidationError);
  }

  TEST_CASE("value loss on Det-SW") {
    const PlanningConfig cfg;
    const ValueTable optimal = accurate_optimal_values(det_sw(), cfg);
    CHECK(value_loss_report(det_sw(), sw::catalog_subset("m7"), cfg, &optimal).loss <= 2 * cfg.tol);
    for (const char* id : {"m4", "m5", "m6"}) {
      CHECK(value_loss_report(det_sw(), sw::catalog_subset(id), cfg, &optimal).loss <= 2 * cfg.tol);
    }
    const ValueLossReport m1 = value_loss_report(det_sw(), sw::catalog_subset("m1"), cfg, &optimal);
    CHECK(m1.loss > 0.0);
    // Frozen regression value; equals 10 * 0.95^2.
    CHECK(m1.loss == doctest::Approx(9.025).epsilon(1e-9));
    const ValueTable lifted_values = policy_evaluation(det_sw(), m1.lifted_policy, 1e-12);
    CHECK(optimal[m1.witness] - lifted_values[m1.witness] == doctest::Approx(m1.loss).epsilon(1e-9));
    CHECK(value_loss(det_sw(), sw::catalog_subset("m4")) <= 2 * kDefaultTolerance);
  }

  TEST_CASE("certification and minimality") {
    for (const char* id : {"m4", "m5", "m6"}) {
      const Certificate c = certify_value_equivalence(det_sw(), sw::catalog_subset(id));
      CHECK_MESSAGE(c.value_equivalent, id);
    }
    for (const char* id : {"m1", "m2", "m3"}) {
      const Certificate c = certify_value_equivalence(det_sw(), sw::catalog_subset(id));
      CHECK_FALSE_MESSAGE(c.value_equivalent, id);
      CHECK(c.loss > 0.1);
      CHECK(c.witness < det_sw().product_state_count());
    }
    const MinimalityReport m4 = check_minimal_value_equivalence(det_sw(), sw::catalog_subset("m4"));
    CHECK(m4.certificate.value_equivalent);
    CHECK(m4.minimal);
    CHECK(m4.removals.size() == 3);
    const MinimalityReport m5 = check_minimal_value_equivalence(det_sw(), sw::catalog_subset("m5"));
    CHECK(m5.certificate.value_equivalent);
    CHECK_FALSE(m5.minimal);
    CHECK_THROWS_AS(certify_value_equivalence(det_sw(), sw::catalog_subset("m4"), 0.0), ValidationError);
  }
}

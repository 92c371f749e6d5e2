// Copyright 2026 The LODR Lab Authors.
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
#include <random>
#include <sstream>

#include "doctest.h"
#include "lodr/core/error.hpp"
#include "lodr/tuner/search.hpp"
#include "lodr/tuner/tune_fusion.hpp"

using namespace lodr;
using namespace lodr::tuner;
using decoder::FusionMethod;

namespace {

void check_trace(const SearchTrace& trace) {
  double last = std::numeric_limits<double>::infinity();
  for (const auto& e : trace.entries) {
    if (!e.accepted) continue;
    CHECK(e.value <= last);
    last = e.value;
  }
  CHECK(trace.best_value == last);
  double min = std::numeric_limits<double>::infinity();
  for (const auto& e : trace.entries) min = std::min(min, e.value);
  CHECK(trace.best_value == min);
  CHECK(trace.entries.size() <= evaluation_budget(trace));
}

SearchSpec quadratic(std::vector<double> centers, std::vector<double> initial) {
  SearchSpec spec;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    spec.parameters.push_back({"p" + std::to_string(i), 0.0, 1.0, 0.1});
  }
  spec.initial = std::move(initial);
  spec.objective = [centers](const std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - centers[i]) * (p[i] - centers[i]);
    return s;
  };
  return spec;
}

decoder::Hypothesis hyp(TokenSequence tokens, double logp, double elm, double ilm = 0.0) {
  decoder::Hypothesis h;
  h.tokens = std::move(tokens);
  h.logp_rnnt = logp;
  h.cached_scores = {{"elm", elm}, {"lodr_ilm", ilm}, {"dr_ilm", ilm}, {"ilme_ilm", ilm}};
  return h;
}

}  // namespace

TEST_CASE("line search on a quadratic") {
  const auto f = [](double x) { return (x - 0.3) * (x - 0.3); };
  const auto r = line_search(f, 0.0, 1.0, 0.1, 0.0, f(0.0));
  CHECK(std::abs(r.point - 0.3) <= 0.1);
  CHECK(r.value <= f(0.0));
  CHECK(r.improved);
  CHECK(r.point == 0.3125);  // bisection points are dyadic
}

TEST_CASE("line search never deteriorates") {
  const auto constant = line_search([](double) { return 2.0; }, 0.0, 1.0, 0.1, 0.7, 2.0);
  CHECK(!constant.improved);
  CHECK(constant.point == 0.7);
  const auto f = [](double x) { return std::abs(x - 0.4); };
  const auto at = line_search(f, 0.0, 1.0, 0.1, 0.4, 0.0);
  CHECK(at.point == 0.4);
  CHECK(at.value == 0.0);
}

TEST_CASE("line search evaluation count and errors") {
  const auto r = line_search([](double x) { return x; }, 0.0, 1.0, 0.1, 0.5, 0.5);
  // Widths 1, 0.5, 0.25, 0.125: three probes then two new ones per round.
  CHECK(r.evaluations.size() == 9);
  CHECK_THROWS_AS(line_search([](double) { return 0.0; }, 1.0, 1.0, 0.1, 1.0, 0.0), InputError);
  CHECK_THROWS_AS(line_search([](double) { return 0.0; }, 0.0, 1.0, 0.0, 0.0, 0.0), InputError);
  try {
    line_search([](double) -> double { throw InputError("boom"); }, 0.0, 1.0, 0.1, 0.0, 0.0);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("0.5") != std::string::npos);
  }
}

TEST_CASE("coordinate descent on separable quadratics") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> c{u(rng), u(rng), u(rng)};
    const auto trace = coordinate_descent(quadratic(c, {0.5, 0.5, 0.5}));
    CAPTURE(c[0]);
    CAPTURE(c[1]);
    CAPTURE(c[2]);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(trace.best_point[i] - c[i]) <= 0.1);
    CHECK(!trace.truncated);
    check_trace(trace);
  }
}

TEST_CASE("range extension reaches a negative optimum") {
  const auto trace = coordinate_descent(quadratic({-0.125, 0.6, 0.3}, {0.0, 0.0, 0.0}));
  CHECK(trace.best_point[0] < 0.0);
  CHECK(std::abs(trace.best_point[0] + 0.125) <= 0.1);
  CHECK(std::abs(trace.best_point[1] - 0.6) <= 0.1);
  CHECK(std::abs(trace.best_point[2] - 0.3) <= 0.1);
  CHECK(trace.final_ranges[0].lo <= -1.0);
  check_trace(trace);
}

TEST_CASE("far optimum within the extension cap") {
  const auto trace = coordinate_descent(quadratic({3.3}, {0.5}));
  CHECK(std::abs(trace.best_point[0] - 3.3) <= 0.1);
  check_trace(trace);
}

TEST_CASE("constant objective returns the initial point after one cycle") {
  SearchSpec spec = quadratic({0, 0}, {0.5, 0.5});
  spec.objective = [](const std::vector<double>&) { return 1.0; };
  const auto trace = coordinate_descent(spec);
  CHECK(trace.best_point == std::vector<double>{0.5, 0.5});
  CHECK(trace.cycles == 1);
  check_trace(trace);
}

TEST_CASE("cycle cap truncates") {
  SearchSpec spec = quadratic({0}, {0.5});
  spec.objective = [](const std::vector<double>& p) { return -p[0]; };
  spec.max_cycles = 2;
  const auto trace = coordinate_descent(spec);
  CHECK(trace.truncated);
  CHECK(trace.cycles == 2);
  check_trace(trace);
}

TEST_CASE("invalid search specs") {
  SearchSpec spec = quadratic({0}, {0.5});
  spec.initial.clear();
  CHECK_THROWS_AS(coordinate_descent(spec), InputError);
  spec = quadratic({0}, {0.5});
  spec.parameters[0].hi = 0.0;
  CHECK_THROWS_AS(coordinate_descent(spec), InputError);
}

TEST_CASE("tuning fusion weights on constructed n-best lists") {
  SUBCASE("reference already on top") {
    const std::vector<decoder::NBestList> nb{{"a", {hyp({1, 2}, -1, -1), hyp({1}, -2, -1)}}};
    const auto r = tune_fusion(nb, {{"a", {1, 2}}}, FusionMethod::kLodr, {});
    CHECK(r.dev_error_rate == 0.0);
  }
  SUBCASE("reference wins only for lambda1 above 0.4") {
    std::vector<decoder::NBestList> nb;
    std::map<std::string, TokenSequence> refs;
    for (int i = 0; i < 5; ++i) {
      const std::string id = "u" + std::to_string(i);
      nb.push_back({id, {hyp({1, 1}, 0.0, -1.0), hyp({2, 2}, -0.4, 0.0)}});
      refs[id] = {2, 2};
    }
    const auto r = tune_fusion(nb, refs, FusionMethod::kShallow, {});
    CHECK(r.config.lambda1 > 0.4);
    CHECK(r.dev_error_rate == 0.0);
    CHECK(r.initial_error_rate == 100.0);
    CHECK(r.trace.best_point.size() == 2);

    std::ostringstream report;
    write_tuning_report(report, r);
    CHECK(report.str().find("fusion.sf.lambda1 = ") != std::string::npos);
    CHECK(report.str().find("fusion.sf.beta = ") != std::string::npos);
  }
  SUBCASE("tuned rate never exceeds the initial rate") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(-5.0, 2.0);
    std::vector<decoder::NBestList> nb;
    std::map<std::string, TokenSequence> refs;
    for (int i = 0; i < 20; ++i) {
      const std::string id = "u" + std::to_string(i);
      decoder::NBestList list{id, {}};
      for (int k = 0; k < 5; ++k) {
        TokenSequence y(1 + rng() % 4);
        for (auto& t : y) t = static_cast<TokenId>(1 + rng() % 3);
        list.hypotheses.push_back(hyp(y, n(rng), n(rng), n(rng)));
      }
      refs[id] = list.hypotheses[rng() % 5].tokens;
      nb.push_back(list);
    }
    for (auto m : {FusionMethod::kShallow, FusionMethod::kDensityRatio, FusionMethod::kIlme, FusionMethod::kLodr}) {
      const auto r = tune_fusion(nb, refs, m, {});
      CHECK(r.dev_error_rate <= r.initial_error_rate);
      check_trace(r.trace);
    }
    // Starting DR at the SF optimum with lambda0 = 0 can only match or beat SF.
    const auto sf = tune_fusion(nb, refs, FusionMethod::kShallow, {});
    TuneOptions from_sf;
    from_sf.initial = sf.config;
    from_sf.initial.lambda0 = 0.0;
    const auto dr = tune_fusion(nb, refs, FusionMethod::kDensityRatio, from_sf);
    CHECK(dr.dev_error_rate <= sf.dev_error_rate);
  }
  SUBCASE("missing columns and references") {
    decoder::Hypothesis bare;
    bare.tokens = {1};
    const std::vector<decoder::NBestList> nb{{"a", {bare}}};
    CHECK_THROWS_AS(tune_fusion(nb, {{"a", {1}}}, FusionMethod::kShallow, {}), ContractError);
    CHECK_THROWS_AS(tune_fusion(nb, {{"b", {1}}}, FusionMethod::kNone, {}), InputError);
    CHECK(tune_fusion(nb, {{"a", {1}}}, FusionMethod::kNone, {}).dev_error_rate == 0.0);
  }
}

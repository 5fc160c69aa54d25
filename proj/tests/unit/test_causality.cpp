// Copyright 2026 The ramcts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <algorithm>
#include <bit>
#include <random>

#include "doctest.h"
#include "ramcts/causality.hpp"
#include "ramcts/envs.hpp"
#include "support/oracles.hpp"
#include "support/toy_model.hpp"

using namespace ramcts;
using namespace ramcts::testing;

namespace {

CandidatePair make_pair(std::vector<std::pair<int, int>> slots, std::vector<int> counts) {
  CandidatePair p;
  for (auto [t, agent] : slots) p.interventions.add({agent, t, 1});
  p.counts = std::move(counts);
  return p;
}

// Losing toy episodes over a range of seeds.
std::vector<std::pair<Context, Trajectory>> losing_toy(const ToyModel& toy, int count) {
  std::vector<std::pair<Context, Trajectory>> out;
  for (std::uint64_t seed = 0; int(out.size()) < count; ++seed) {
    Context ctx(seed);
    Trajectory t = rollout(toy, ctx);
    if (t.outcome.agents_lose()) out.emplace_back(ctx, std::move(t));
  }
  return out;
}

}  // namespace

TEST_CASE("primitive and compound events") {
  ToyModel toy(2, 2);
  const Trajectory t = rollout(toy, Context(3));
  const ActionId a = t.steps[1].actions[0];
  CHECK(Event::action_equals(0, 1, a).holds(t));
  CHECK_FALSE(Event::action_equals(0, 1, 1 - a).holds(t));
  CHECK(Event::state_equals(Event::kTerminal, t.terminal_state).holds(t));
  CHECK(Event::state_equals(1, t.steps[1].state).holds(t));
  CHECK(Event::info_equals(1, 0, t.steps[0].info[1]).holds(t));
  CHECK(Event::observation_equals(0, 1, t.steps[1].obs[0]).holds(t));

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Trajectory u = rollout(toy, Context(seed));
    for (const Event& phi : {Event::agents_lose(), Event::action_equals(1, 0, 0),
                             Event::state_equals(Event::kTerminal, {5})}) {
      CHECK_FALSE(Event::all_of({Event::negate(phi), phi}).holds(u));
      CHECK(Event::any_of({Event::negate(phi), phi}).holds(u));
    }
  }
  CHECK_FALSE(Event::agents_lose().needs_steps());
  CHECK(Event::all_of({Event::agents_lose(), Event::action_equals(0, 0, 1)}).needs_steps());
}

TEST_CASE("event JSON round trip") {
  const Event e = Event::any_of({Event::negate(Event::agents_lose()),
                                 Event::all_of({Event::action_equals(1, 2, 3),
                                                Event::state_equals(Event::kTerminal, {4, 5})})});
  const Event back = Event::from_json(e.to_json());
  CHECK(back.to_json() == e.to_json());
  ToyModel toy(3, 2);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Trajectory t = rollout(toy, Context(seed));
    CHECK(back.holds(t) == e.holds(t));
  }
}

TEST_CASE("outcome event requires a failure") {
  ToyModel toy(2, 2, 0);  // goal 0: the agents never lose
  CHECK_THROWS_AS(outcome_event(rollout(toy, Context(0))), NotAFailure);
  ToyModel hard(2, 2, 100);
  const Trajectory t = rollout(hard, Context(0));
  CHECK(outcome_event(t).holds(t));
}

TEST_CASE("Euchre outcome event matches a direct trick count") {
  GameConfig cfg;
  cfg.hand_size = 5;
  auto model = make_model(cfg);
  int losses = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Trajectory t = rollout(*model, Context(seed));
    int trump = TrickState::decode(t.steps[0].state).trump;
    int team[2] = {0, 0};
    std::vector<std::pair<int, int>> trick;  // (seat, card)
    for (int k = 0; k < t.length(); ++k) {
      const TrickState before = TrickState::decode(t.steps[k].state);
      const TrickState after = TrickState::decode(k + 1 < t.length() ? t.steps[k + 1].state : t.terminal_state);
      const int seat = before.to_play;
      const std::uint64_t gone = before.hands[seat] & ~after.hands[seat];
      REQUIRE(std::popcount(gone) == 1);
      trick.push_back({seat, std::countr_zero(gone)});
      if (trick.size() == 4) {
        const int lead = cards::suit(trick[0].second);
        auto beats = [&](int x, int y) {
          const bool tx = cards::suit(x) == trump, ty = cards::suit(y) == trump;
          if (tx != ty) return tx;
          if (cards::suit(x) != cards::suit(y)) return cards::suit(x) == lead;
          return cards::rank(x) > cards::rank(y);
        };
        auto best = trick[0];
        for (auto p : trick) {
          if (beats(p.second, best.second)) best = p;
        }
        ++team[best.first % 2];
        trick.clear();
      }
    }
    CHECK(team[0] + team[1] == 5);
    const bool lose = team[0] < team[1];
    losses += lose;
    CHECK(Event::agents_lose().holds(t) == lose);
  }
  CHECK(losses > 0);
  CHECK(losses < 20);
}

TEST_CASE("degree vectors") {
  auto d = degree_vector(make_pair({{0, 0}, {1, 0}, {2, 1}, {3, 1}}, {1, 0}), 2);
  CHECK(d[0] == Degree{1, 4});
  CHECK(d[1] == Degree{0, 1});
  d = degree_vector(make_pair({{0, 0}, {1, 0}, {2, 1}, {3, 1}}, {2, 2}), 2);
  CHECK(d[0] == Degree{1, 2});
  CHECK(d[1] == Degree{1, 2});
  // Agent 1 only appears in the witness.
  d = degree_vector(make_pair({{0, 0}, {1, 1}}, {1, 0}), 2);
  CHECK(d[1] == Degree{0, 1});
  CHECK(Degree{2, 4} == Degree{1, 2});
  CHECK(Degree{1, 3} < Degree{1, 2});
}

TEST_CASE("classification basics") {
  ToyModel toy(2, 2);
  for (const auto& [ctx, factual] : losing_toy(toy, 30)) {
    const Event phi = outcome_event(factual);
    for (int t = 0; t < 2; ++t) {
      for (int i = 0; i < 2; ++i) {
        const InterventionSet x = {{i, t, 1 - factual.steps[t].actions[i]}};
        StepCounter counter;
        const Classification c = classify(toy, ctx, factual, x, phi, counter);
        CHECK(counter.used() == 2);
        if (phi.holds(c.counterfactual)) {
          CHECK_FALSE(c.pair.has_value());
        } else {
          REQUIRE(c.pair.has_value());
          CHECK(c.pair->cause.size() == 1);
          CHECK(c.pair->witness.empty());
          CHECK(c.pair->cause[0].factual == factual.steps[t].actions[i]);
        }
      }
    }
  }
}

TEST_CASE("classify agrees with a direct condition check on the toy model") {
  for (auto [horizon, actions] : {std::pair{2, 2}, std::pair{3, 2}, std::pair{2, 3}}) {
    ToyModel toy(horizon, actions);
    for (const auto& [ctx, factual] : losing_toy(toy, 15)) {
      const Event phi = outcome_event(factual);
      for (const OracleSet& s : enumerate_sets(toy, ctx, factual, 4)) {
        StepCounter counter;
        const auto c = classify(toy, ctx, factual, to_interventions(s.slots), phi, counter);
        REQUIRE(c.pair.has_value() == s.is_pair());
        if (!c.pair) continue;
        CHECK(c.pair->counts == s.cause_counts);
        CHECK(int(c.pair->cause.size() + c.pair->witness.size()) == int(s.slots.size()));
      }
    }
  }
}

TEST_CASE("found set superset handling") {
  FoundSet f;
  CHECK(f.insert(make_pair({{1, 0}}, {1, 0})));
  CHECK_FALSE(f.insert(make_pair({{1, 0}, {2, 1}}, {1, 0})));
  CHECK(f.num_pairs() == 1);

  FoundSet g;
  CHECK(g.insert(make_pair({{1, 0}, {2, 1}}, {1, 1})));
  CHECK(g.insert(make_pair({{1, 0}}, {1, 0})));
  REQUIRE(g.num_var_sets() == 1);
  CHECK(g.var_sets()[0] == VarSet{{1, 0}});

  // Same variable set, different actions: both stay.
  FoundSet h;
  CandidatePair a = make_pair({{1, 0}}, {1, 0});
  CandidatePair b;
  b.interventions.add({0, 1, 2});
  b.counts = {1, 0};
  CHECK(h.insert(a));
  CHECK(h.insert(b));
  CHECK(h.num_pairs() == 2);
  CHECK(h.num_var_sets() == 1);
  CHECK(h.dominated({{1, 0}, {3, 1}}));
  CHECK_FALSE(h.dominated({{1, 0}}));
  CHECK(h.contains_vars({{1, 0}}));
}

TEST_CASE("assignment from pairs") {
  CHECK(assignment(FoundSet{}, 2).degrees == std::vector<Degree>{{0, 1}, {0, 1}});
  FoundSet f;
  f.insert(make_pair({{0, 0}, {0, 1}, {1, 1}, {2, 1}}, {1, 0}));
  f.insert(make_pair({{3, 1}}, {0, 1}));
  const auto r = assignment(f, 2);
  CHECK(r.degrees[0] == Degree{1, 4});
  CHECK(r.degrees[1] == Degree{1, 1});
  REQUIRE(r.provenance[1].has_value());
  CHECK(r.provenance[1]->size() == 1);
}

TEST_CASE("found set converges to the minimal antichain in any order") {
  std::mt19937_64 shuffle(5);
  for (auto [horizon, actions] : {std::pair{2, 2}, std::pair{3, 2}, std::pair{3, 3}}) {
    ToyModel toy(horizon, actions);
    for (const auto& [ctx, factual] : losing_toy(toy, 10)) {
      const Event phi = outcome_event(factual);
      const auto sets = enumerate_sets(toy, ctx, factual, 4);
      std::vector<CandidatePair> pairs;
      for (const auto& s : sets) {
        StepCounter counter;
        auto c = classify(toy, ctx, factual, to_interventions(s.slots), phi, counter);
        if (c.pair) pairs.push_back(*c.pair);
      }
      auto minimal = minimal_var_sets(sets);
      std::sort(minimal.begin(), minimal.end());
      const auto expected = oracle_degrees(sets, 2);
      for (int round = 0; round < 5; ++round) {
        std::shuffle(pairs.begin(), pairs.end(), shuffle);
        FoundSet found;
        auto previous = assignment(found, 2).degrees;
        for (const auto& p : pairs) {
          const auto before = found.var_sets();
          found.insert(p);
          const auto now = assignment(found, 2).degrees;
          const auto after = found.var_sets();
          const bool evicted = std::any_of(before.begin(), before.end(), [&](const VarSet& v) {
            return std::find(after.begin(), after.end(), v) == after.end();
          });
          // Without eviction the assignment can only grow.
          if (!evicted) {
            for (int i = 0; i < 2; ++i) CHECK(now[i] >= previous[i]);
          }
          previous = now;
          const auto stored = found.var_sets();
          for (const auto& a : stored) {
            for (const auto& b : stored) CHECK_FALSE(strict_subset(a, b));
          }
        }
        auto stored = found.var_sets();
        std::sort(stored.begin(), stored.end());
        CHECK(stored == minimal);
        const auto degrees = assignment(found, 2).degrees;
        CHECK(degrees == expected);
        for (const Degree& d : degrees) {
          CHECK(d.num >= 0);
          CHECK(d.num <= d.den);
          CHECK(d.den <= 4);
        }
      }
    }
  }
}

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
#include <functional>
#include <set>

#include "doctest.h"
#include "ramcts/baselines.hpp"
#include "ramcts/envs.hpp"
#include "ramcts/harness.hpp"
#include "ramcts/ra_mcts.hpp"
#include "ramcts/search_tree.hpp"
#include "support/oracles.hpp"
#include "support/toy_model.hpp"

using namespace ramcts;
using namespace ramcts::testing;

namespace {

std::pair<Context, Trajectory> losing_toy(const ToyModel& toy, std::uint64_t from = 0) {
  for (std::uint64_t seed = from;; ++seed) {
    Context ctx(seed);
    Trajectory t = rollout(toy, ctx);
    if (t.outcome.agents_lose()) return {ctx, t};
  }
}

// Expands every node depth first and returns the leaves.
std::vector<int> expand_all(SearchTree& tree, StepCounter& counter) {
  std::vector<int> leaves;
  std::function<void(int)> visit = [&](int id) {
    tree.expand(id, counter);
    if (tree.node(id).kind == NodeKind::kLeaf) {
      leaves.push_back(id);
      return;
    }
    const auto children = tree.node(id).children;
    for (int c : children) visit(c);
  };
  visit(SearchTree::kRoot);
  return leaves;
}

std::vector<Slot> slots_of(const InterventionSet& x) {
  std::vector<Slot> out;
  for (const auto& i : x) out.push_back({i.t, i.agent, i.action});
  return out;
}

// An event that needs full histories but agrees with the losing event.
Event losing_with_steps() {
  return Event::all_of({Event::agents_lose(), Event::negate(Event::action_equals(0, 0, 999))});
}

}  // namespace

TEST_CASE("root children are the time-steps") {
  ToyModel toy(3, 2, 100);
  const Context ctx(0);
  const Trajectory factual = rollout(toy, ctx);
  SearchTree tree(toy, ctx, factual, outcome_event(factual));
  StepCounter counter;
  tree.expand(SearchTree::kRoot, counter);
  std::vector<int> ts;
  for (int c : tree.node(SearchTree::kRoot).children) {
    CHECK(tree.node(c).kind == NodeKind::kTimeStep);
    ts.push_back(tree.node(c).t);
  }
  CHECK(ts == std::vector<int>{0, 1, 2});
  CHECK(counter.used() == 0);
}

TEST_CASE("an agent with a single valid action has no action children") {
  GameConfig cfg;
  cfg.hand_size = 5;
  auto model = make_model(cfg);
  const auto instances = generate_losing_trajectories(*model, 1, 3);
  const Context ctx(instances[0].context_seed);
  const Trajectory& factual = instances[0].trajectory;
  SearchTree tree(*model, ctx, factual, outcome_event(factual));
  StepCounter counter;
  tree.expand(SearchTree::kRoot, counter);
  int checked = 0;
  for (int ts : tree.node(SearchTree::kRoot).children) {
    tree.expand(ts, counter);
    for (int ag : tree.node(ts).children) {
      const int agent = tree.node(ag).agent;
      const auto valid = model->valid_actions(agent, factual.steps[tree.node(ts).t].info[agent]);
      tree.expand(ag, counter);
      CHECK(tree.node(ag).children.size() == valid.size() - 1);
      if (valid.size() == 1) {
        CHECK(tree.node(ag).pruned);
        ++checked;
      }
    }
  }
  CHECK(checked >= 2);  // every agent's last card is forced
  CHECK(counter.used() == 0);
}

TEST_CASE("leaves are in bijection with intervention sets") {
  for (auto [horizon, actions, max_size] : {std::tuple{2, 2, 4}, std::tuple{3, 2, 4},
                                            std::tuple{3, 3, 2}, std::tuple{4, 2, 3}}) {
    ToyModel toy(horizon, actions, 100);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Context ctx(seed);
      const Trajectory factual = rollout(toy, ctx);
      SearchTree tree(toy, ctx, factual, outcome_event(factual), max_size);
      StepCounter counter;
      std::multiset<std::vector<Slot>> from_tree;
      for (int leaf : expand_all(tree, counter)) from_tree.insert(slots_of(tree.interventions(leaf)));
      std::multiset<std::vector<Slot>> direct;
      for (const auto& s : enumerate_sets(toy, ctx, factual, max_size)) direct.insert(s.slots);
      CHECK(from_tree == direct);
      CHECK(std::set<std::vector<Slot>>(from_tree.begin(), from_tree.end()).size() == from_tree.size());
      CHECK(counter.used() == toy_bf_st_cost(horizon, actions, max_size));
    }
  }
}

TEST_CASE("cached counterfactuals equal fresh rollouts") {
  std::vector<std::unique_ptr<DecPomdpModel>> models;
  models.push_back(std::make_unique<ToyModel>(3, 2, 100));
  GameConfig cfg;
  cfg.hand_size = 3;
  for (GameKind kind : {GameKind::kEuchre, GameKind::kSpades, GameKind::kGoofspiel}) {
    cfg.kind = kind;
    models.push_back(make_model(cfg));
  }
  for (const auto& model : models) {
    const auto instances = generate_losing_trajectories(*model, 2, 8);
    for (const auto& inst : instances) {
      const Context ctx(inst.context_seed);
      SearchTree tree(*model, ctx, inst.trajectory, losing_with_steps(), 2);
      StepCounter counter;
      for (int leaf : expand_all(tree, counter)) {
        const Trajectory fresh = rollout(*model, ctx, tree.interventions(leaf));
        const Trajectory& cached = *tree.node(leaf).counterfactual;
        CHECK(cached.steps == fresh.steps);
        CHECK(cached.terminal_state == fresh.terminal_state);
        CHECK(cached.outcome == fresh.outcome);
      }
    }
  }
}

TEST_CASE("same time-step children cost no steps") {
  ToyModel toy(4, 2, 100);
  const Context ctx(1);
  const Trajectory factual = rollout(toy, ctx);
  SearchTree tree(toy, ctx, factual, outcome_event(factual));
  StepCounter counter;
  tree.expand(SearchTree::kRoot, counter);
  const int ts = tree.node(SearchTree::kRoot).children[1];  // t = 1
  tree.expand(ts, counter);
  const int agent0 = tree.node(ts).children[0];
  tree.expand(agent0, counter);
  const int action = tree.node(agent0).children[0];
  tree.expand(action, counter);
  CHECK(counter.used() == 3);  // one rollout from t = 1
  int same_t = -1;
  for (int c : tree.node(action).children) {
    if (tree.node(c).kind == NodeKind::kTimeStep && tree.node(c).t == 1) same_t = c;
  }
  REQUIRE(same_t >= 0);
  CHECK(tree.node(same_t).min_agent == 1);
  tree.expand(same_t, counter);
  REQUIRE(tree.node(same_t).children.size() == 1);
  const int agent1 = tree.node(same_t).children[0];
  CHECK(tree.node(agent1).agent == 1);
  tree.expand(agent1, counter);
  CHECK(counter.used() == 3);
  tree.expand(tree.node(agent1).children[0], counter);
  CHECK(counter.used() == 6);
}

TEST_CASE("an action node that runs out of budget is left unexpanded") {
  ToyModel toy(4, 2, 100);
  const Context ctx(1);
  const Trajectory factual = rollout(toy, ctx);
  SearchTree tree(toy, ctx, factual, outcome_event(factual));
  StepCounter counter(2);
  tree.expand(SearchTree::kRoot, counter);
  const int ts = tree.node(SearchTree::kRoot).children[0];
  tree.expand(ts, counter);
  const int agent = tree.node(ts).children[0];
  tree.expand(agent, counter);
  const int action = tree.node(agent).children[0];
  const int before = tree.num_nodes();
  CHECK_THROWS_AS(tree.expand(action, counter), BudgetExhausted);
  CHECK_FALSE(tree.node(action).expanded);
  CHECK(tree.node(action).children.empty());
  CHECK(tree.num_nodes() == before);
}

TEST_CASE("pruning rules 1 and 4") {
  ToyModel toy(2, 2, 100);
  const Context ctx(2);
  const Trajectory factual = rollout(toy, ctx);
  SearchTree tree(toy, ctx, factual, outcome_event(factual));
  StepCounter counter;
  tree.expand(SearchTree::kRoot, counter);
  const int ts = tree.node(SearchTree::kRoot).children[1];  // t = 1: only leaves below
  tree.expand(ts, counter);
  const int agent1 = tree.node(ts).children[1];
  tree.expand(agent1, counter);
  REQUIRE(tree.node(agent1).children.size() == 1);
  const int action = tree.node(agent1).children[0];
  tree.expand(action, counter);
  REQUIRE(tree.node(action).children.size() == 1);  // the leaf only
  const int leaf = tree.node(action).children[0];
  CHECK(tree.node(leaf).kind == NodeKind::kLeaf);

  const auto pruned = tree.prune(leaf);
  // Rule 1 prunes the leaf; rule 4 carries it up through the action and the
  // agent, but the time-step still has agent 0.
  CHECK(pruned == std::vector<int>{leaf, action, agent1});
  CHECK_FALSE(tree.node(ts).pruned);
}

TEST_CASE("pruned nodes are never selected") {
  ToyModel toy(3, 3, 100);
  const Context ctx(0);
  const Trajectory factual = rollout(toy, ctx);
  SearchTree tree(toy, ctx, factual, outcome_event(factual));
  StepCounter counter;
  tree.expand(SearchTree::kRoot, counter);
  const auto& children = tree.node(SearchTree::kRoot).children;
  tree.prune(children[0]);
  tree.prune(children[2]);
  Rng rng(1);
  const std::vector<double> w = {0.5, 0.0, 0.5};
  for (int k = 0; k < 200; ++k) CHECK(select_child(tree, SearchTree::kRoot, w, 2.0, rng) == children[1]);
  CHECK(tree.live_children(SearchTree::kRoot) == std::vector<int>{children[1]});
}

TEST_CASE("leaf classification") {
  ToyModel toy(2, 2);
  const auto [ctx, factual] = losing_toy(toy);
  SearchTree tree(toy, ctx, factual, outcome_event(factual));
  StepCounter counter;
  int pairs = 0;
  for (int leaf : expand_all(tree, counter)) {
    const auto c = tree.classify_leaf(leaf);
    const Trajectory cf = rollout(toy, ctx, tree.interventions(leaf));
    if (c.pair) CHECK_FALSE(cf.outcome.agents_lose());
    CHECK(c.q_env == doctest::Approx(toy.q_env(factual, cf)));
    if (!cf.outcome.agents_lose()) CHECK(c.q_env == 1.0);
    pairs += c.pair.has_value();
  }
  CHECK(pairs > 0);
}

TEST_CASE("tree dump and release") {
  ToyModel toy(3, 2, 100);
  const Context ctx(0);
  const Trajectory factual = rollout(toy, ctx);
  SearchTree tree(toy, ctx, factual, outcome_event(factual));
  StepCounter counter;
  expand_all(tree, counter);
  const int all = tree.num_nodes();
  const auto dump = tree.dump();
  REQUIRE(dump.is_array());
  CHECK(int(dump.size()) == all);
  CHECK(dump[0]["kind"] == "root");
  const int first = tree.node(SearchTree::kRoot).children[0];
  tree.release_subtree(first);
  CHECK(tree.num_nodes() < all);
  CHECK(tree.node(first).children.empty());
}

TEST_CASE("score units are exact for degrees") {
  for (int k = 1; k <= 4; ++k) {
    for (int m = 0; m <= k; ++m) {
      const std::int64_t u = to_score_units(double(m) / k);
      CHECK(u * k == std::int64_t(m) * kScoreUnit);
    }
  }
  CHECK(from_score_units(kScoreUnit) == 1.0);
}

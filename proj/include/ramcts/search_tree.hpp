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


#ifndef RAMCTS_SEARCH_TREE_HPP_
#define RAMCTS_SEARCH_TREE_HPP_

// Intervention-enumeration tree. A path Root -> TimeStep(t) -> Agent(i) ->
// Action(a') -> ... -> Leaf encodes one intervention set; successive (t, agent)
// keys strictly increase so every set has exactly one path. TimeStep nodes
// cache the counterfactual frontier of the set encoded above them.

#include <cstdint>
#include <memory>
#include <vector>

#include "json.hpp"
#include "ramcts/causality.hpp"
#include "ramcts/scm.hpp"

namespace ramcts {

enum class NodeKind : std::uint8_t { kRoot, kTimeStep, kAgent, kAction, kLeaf };

const char* node_kind_name(NodeKind kind);

// Score totals are kept in fixed point so that adding and later subtracting
// the same contributions restores ancestors exactly. Degrees m/k with k <= 4
// are representable without rounding.
inline constexpr std::int64_t kScoreUnit = 12 * (std::int64_t{1} << 20);

std::int64_t to_score_units(double value);
double from_score_units(std::int64_t units);

struct SearchNode {
  NodeKind kind = NodeKind::kRoot;
  int parent = -1;
  int t = 0;
  int agent = 0;
  ActionId action = 0;
  // Interventions on the path through this node.
  int depth = 0;
  // TimeStep only: smallest agent index admissible at t.
  int min_agent = 0;
  bool expanded = false;
  bool pruned = false;
  bool evaluated = false;
  std::vector<int> children;
  std::int64_t visits = 0;
  std::vector<std::int64_t> score;
  // TimeStep: counterfactual frontier at t.
  std::shared_ptr<const Frontier> frontier;
  // Leaf: counterfactual trajectory (terminal part, plus steps when the event
  // needs them).
  std::shared_ptr<const Trajectory> counterfactual;
};

struct LeafClassification {
  std::optional<CandidatePair> pair;
  double q_env = 0.0;
};

class SearchTree {
 public:
  // Root frontiers come from the factual episode and are not charged.
  SearchTree(const DecPomdpModel& model, const Context& context, const Trajectory& factual,
             const Event& event, int max_size = 4);

  SearchTree(const SearchTree&) = delete;
  SearchTree& operator=(const SearchTree&) = delete;

  static constexpr int kRoot = 0;

  const SearchNode& node(int id) const { return nodes_[id]; }
  SearchNode& node(int id) { return nodes_[id]; }
  int num_nodes() const { return static_cast<int>(nodes_.size() - free_.size()); }
  int score_size() const { return num_agents_ + 1; }
  int max_size() const { return max_size_; }
  const DecPomdpModel& model() const { return model_; }
  const Context& context() const { return context_; }
  const Trajectory& factual() const { return factual_; }
  const Event& event() const { return event_; }

  // Materializes the children of `id`. Action nodes run their counterfactual
  // rollout here, charging the steps from their time-step to the horizon. On
  // BudgetExhausted the node is left unexpanded. A node left without children
  // is pruned.
  void expand(int id, StepCounter& counter);

  InterventionSet interventions(int id) const;
  // Agent node: path variables plus the node's own slot.
  VarSet agent_vars(int id) const;
  int closest_agent_ancestor(int id) const;
  // Ids from the root down to `id`.
  std::vector<int> path_to(int id) const;
  std::vector<int> live_children(int id) const;

  LeafClassification classify_leaf(int leaf) const;

  // Marks `id` pruned, then prunes ancestors that became fully expanded with
  // only pruned children. Returns the ids pruned, `id` first.
  std::vector<int> prune(int id);
  bool root_pruned() const { return nodes_[kRoot].pruned; }

  // Frees the descendants of `id` and its cached data; used by depth-first
  // traversals once a subtree is finished.
  void release_subtree(int id);

  nlohmann::json dump(int max_nodes = 100000) const;

 private:
  int add_node(SearchNode node);
  void expand_root();
  void expand_time_step(int id);
  void expand_agent(int id);
  void expand_action(int id, StepCounter& counter);
  const SearchNode& time_step_of(int id) const;
  bool any_decides(const Frontier& frontier, int min_agent) const;

  const DecPomdpModel& model_;
  const Context& context_;
  const Trajectory& factual_;
  Event event_;
  int max_size_;
  int num_agents_;
  bool keep_history_;
  std::vector<SearchNode> nodes_;
  std::vector<int> free_;
  std::vector<std::shared_ptr<const Frontier>> root_frontiers_;
};

}  // namespace ramcts

#endif  // RAMCTS_SEARCH_TREE_HPP_

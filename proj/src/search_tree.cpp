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

#include "ramcts/search_tree.hpp"

#include <algorithm>
#include <cmath>

namespace ramcts {

const char* node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::kRoot: return "root";
    case NodeKind::kTimeStep: return "time_step";
    case NodeKind::kAgent: return "agent";
    case NodeKind::kAction: return "action";
    case NodeKind::kLeaf: return "leaf";
  }
  return "?";
}

std::int64_t to_score_units(double value) {
  return std::llround(value * static_cast<double>(kScoreUnit));
}

double from_score_units(std::int64_t units) {
  return static_cast<double>(units) / static_cast<double>(kScoreUnit);
}

SearchTree::SearchTree(const DecPomdpModel& model, const Context& context,
                       const Trajectory& factual, const Event& event, int max_size)
    : model_(model),
      context_(context),
      factual_(factual),
      event_(event),
      max_size_(max_size),
      num_agents_(model.num_agents()),
      keep_history_(event.needs_steps()) {
  if (max_size < 1) throw ContractViolation("search tree: max size must be positive");
  SearchNode root;
  root.kind = NodeKind::kRoot;
  root.score.assign(score_size(), 0);
  nodes_.push_back(std::move(root));

  StepCounter unlimited;
  const InterventionSet none;
  Frontier f = initial_frontier(model_, context_);
  while (f.t < model_.horizon()) {
    root_frontiers_.push_back(std::make_shared<const Frontier>(f));
    advance(model_, context_, f, none, unlimited, nullptr, keep_history_);
  }
}

int SearchTree::add_node(SearchNode node) {
  node.score.assign(score_size(), 0);
  if (!free_.empty()) {
    const int id = free_.back();
    free_.pop_back();
    nodes_[id] = std::move(node);
    return id;
  }
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

bool SearchTree::any_decides(const Frontier& frontier, int min_agent) const {
  for (int i = min_agent; i < num_agents_; ++i) {
    if (model_.decides(i, frontier.info[i])) return true;
  }
  return false;
}

const SearchNode& SearchTree::time_step_of(int id) const {
  int cur = id;
  while (cur >= 0 && nodes_[cur].kind != NodeKind::kTimeStep) cur = nodes_[cur].parent;
  if (cur < 0) throw ContractViolation("search tree: node has no time-step ancestor");
  return nodes_[cur];
}

void SearchTree::expand(int id, StepCounter& counter) {
  if (nodes_[id].expanded) return;
  switch (nodes_[id].kind) {
    case NodeKind::kRoot: expand_root(); break;
    case NodeKind::kTimeStep: expand_time_step(id); break;
    case NodeKind::kAgent: expand_agent(id); break;
    case NodeKind::kAction: expand_action(id, counter); break;
    case NodeKind::kLeaf: break;
  }
  nodes_[id].expanded = true;
  if (nodes_[id].kind != NodeKind::kLeaf && nodes_[id].children.empty()) prune(id);
}

void SearchTree::expand_root() {
  for (int t = 0; t < static_cast<int>(root_frontiers_.size()); ++t) {
    if (!any_decides(*root_frontiers_[t], 0)) continue;
    SearchNode child;
    child.kind = NodeKind::kTimeStep;
    child.parent = kRoot;
    child.t = t;
    child.frontier = root_frontiers_[t];
    const int c = add_node(std::move(child));
    nodes_[kRoot].children.push_back(c);
  }
}

void SearchTree::expand_time_step(int id) {
  const auto frontier = nodes_[id].frontier;
  for (int i = nodes_[id].min_agent; i < num_agents_; ++i) {
    if (!model_.decides(i, frontier->info[i])) continue;
    SearchNode child;
    child.kind = NodeKind::kAgent;
    child.parent = id;
    child.t = nodes_[id].t;
    child.agent = i;
    child.depth = nodes_[id].depth;
    const int c = add_node(std::move(child));
    nodes_[id].children.push_back(c);
  }
}

void SearchTree::expand_agent(int id) {
  const auto frontier = nodes_[nodes_[id].parent].frontier;
  const int agent = nodes_[id].agent;
  for (ActionId a : counterfactual_actions(model_, context_, *frontier, agent)) {
    SearchNode child;
    child.kind = NodeKind::kAction;
    child.parent = id;
    child.t = nodes_[id].t;
    child.agent = agent;
    child.action = a;
    child.depth = nodes_[id].depth + 1;
    const int c = add_node(std::move(child));
    nodes_[id].children.push_back(c);
  }
}

void SearchTree::expand_action(int id, StepCounter& counter) {
  const InterventionSet x = interventions(id);
  const int t = nodes_[id].t;
  const int agent = nodes_[id].agent;
  const int depth = nodes_[id].depth;
  const bool room = depth < max_size_;
  const auto start = time_step_of(id).frontier;

  // Built off-tree so that running out of budget leaves the tree unchanged.
  std::vector<SearchNode> pending;
  auto add_time_step = [&](int step, int min_agent, std::shared_ptr<const Frontier> f) {
    SearchNode child;
    child.kind = NodeKind::kTimeStep;
    child.t = step;
    child.min_agent = min_agent;
    child.depth = depth;
    child.frontier = std::move(f);
    pending.push_back(std::move(child));
  };
  if (room && any_decides(*start, agent + 1)) add_time_step(t, agent + 1, start);

  Frontier f = *start;
  const int horizon = model_.horizon();
  while (f.t < horizon) {
    advance(model_, context_, f, x, counter, nullptr, keep_history_);
    if (f.t < horizon && room && any_decides(f, 0)) {
      add_time_step(f.t, 0, std::make_shared<const Frontier>(f));
    }
  }

  SearchNode leaf;
  leaf.kind = NodeKind::kLeaf;
  leaf.t = t;
  leaf.agent = agent;
  leaf.action = nodes_[id].action;
  leaf.depth = depth;
  leaf.expanded = true;
  if (keep_history_) {
    leaf.counterfactual =
        std::make_shared<const Trajectory>(trajectory_from_history(model_, f));
  } else {
    auto cf = std::make_shared<Trajectory>();
    cf->terminal_state = f.state;
    cf->outcome = model_.outcome(f.state);
    leaf.counterfactual = std::move(cf);
  }
  leaf.parent = id;
  const int leaf_id = add_node(std::move(leaf));
  nodes_[id].children.push_back(leaf_id);
  for (auto& child : pending) {
    child.parent = id;
    const int c = add_node(std::move(child));
    nodes_[id].children.push_back(c);
  }
}

InterventionSet SearchTree::interventions(int id) const {
  InterventionSet x;
  for (int cur = id; cur >= 0; cur = nodes_[cur].parent) {
    if (nodes_[cur].kind == NodeKind::kAction) {
      x.add({nodes_[cur].agent, nodes_[cur].t, nodes_[cur].action});
    }
  }
  return x;
}

VarSet SearchTree::agent_vars(int id) const {
  VarSet vars = vars_of(interventions(id));
  if (nodes_[id].kind == NodeKind::kAgent) {
    vars.push_back({nodes_[id].t, nodes_[id].agent});
  }
  return vars;
}

int SearchTree::closest_agent_ancestor(int id) const {
  for (int cur = nodes_[id].parent; cur >= 0; cur = nodes_[cur].parent) {
    if (nodes_[cur].kind == NodeKind::kAgent) return cur;
  }
  return -1;
}

std::vector<int> SearchTree::path_to(int id) const {
  std::vector<int> path;
  for (int cur = id; cur >= 0; cur = nodes_[cur].parent) path.push_back(cur);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<int> SearchTree::live_children(int id) const {
  std::vector<int> out;
  for (int c : nodes_[id].children) {
    if (!nodes_[c].pruned) out.push_back(c);
  }
  return out;
}

LeafClassification SearchTree::classify_leaf(int leaf) const {
  const SearchNode& node = nodes_[leaf];
  if (node.kind != NodeKind::kLeaf || !node.counterfactual) {
    throw ContractViolation("classify_leaf: not a materialized leaf");
  }
  std::vector<std::pair<Intervention, InfoState>> slots;
  for (int cur = node.parent; cur >= 0; cur = nodes_[cur].parent) {
    if (nodes_[cur].kind != NodeKind::kAction) continue;
    const Frontier& f = *time_step_of(cur).frontier;
    slots.push_back({{nodes_[cur].agent, nodes_[cur].t, nodes_[cur].action},
                     f.info[nodes_[cur].agent]});
  }
  std::reverse(slots.begin(), slots.end());
  InterventionSet x;
  std::vector<InfoState> infos;
  for (auto& [iv, info] : slots) {
    x.add(iv);
    infos.push_back(std::move(info));
  }
  LeafClassification out;
  out.pair = classify_counterfactual(factual_, x, infos, event_.holds(*node.counterfactual),
                                     num_agents_);
  out.q_env = model_.q_env(factual_, *node.counterfactual);
  return out;
}

std::vector<int> SearchTree::prune(int id) {
  std::vector<int> pruned;
  if (nodes_[id].pruned) return pruned;
  nodes_[id].pruned = true;
  pruned.push_back(id);
  for (int cur = nodes_[id].parent; cur >= 0; cur = nodes_[cur].parent) {
    SearchNode& p = nodes_[cur];
    if (p.pruned || !p.expanded) break;
    const bool all = std::all_of(p.children.begin(), p.children.end(),
                                 [&](int c) { return nodes_[c].pruned; });
    if (!all) break;
    p.pruned = true;
    pruned.push_back(cur);
  }
  return pruned;
}

void SearchTree::release_subtree(int id) {
  std::vector<int> stack(nodes_[id].children.begin(), nodes_[id].children.end());
  while (!stack.empty()) {
    const int c = stack.back();
    stack.pop_back();
    for (int g : nodes_[c].children) stack.push_back(g);
    nodes_[c] = SearchNode();
    nodes_[c].pruned = true;
    free_.push_back(c);
  }
  nodes_[id].children.clear();
  nodes_[id].children.shrink_to_fit();
  if (id != kRoot) nodes_[id].frontier.reset();
  nodes_[id].counterfactual.reset();
}

nlohmann::json SearchTree::dump(int max_nodes) const {
  auto out = nlohmann::json::array();
  std::vector<int> stack = {kRoot};
  while (!stack.empty() && static_cast<int>(out.size()) < max_nodes) {
    const int id = stack.back();
    stack.pop_back();
    const SearchNode& n = nodes_[id];
    std::vector<double> q;
    for (auto s : n.score) q.push_back(from_score_units(s));
    out.push_back({{"id", id},
                   {"kind", node_kind_name(n.kind)},
                   {"t", n.t},
                   {"agent", n.agent},
                   {"action", n.action},
                   {"N", n.visits},
                   {"Q", q},
                   {"pruned", n.pruned},
                   {"children", n.children}});
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

}  // namespace ramcts

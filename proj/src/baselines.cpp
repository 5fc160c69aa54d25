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

#include "ramcts/baselines.hpp"

#include <algorithm>

#include "ramcts/search_tree.hpp"

namespace ramcts {
namespace {

struct Bookkeeping {
  Bookkeeping(int num_agents, std::int64_t budget)
      : num_agents(num_agents), counter(budget), trace(num_agents) {}

  void offer(const std::optional<CandidatePair>& pair) {
    if (pair && found.insert(*pair)) {
      trace.record(counter.used(), assignment(found, num_agents).degrees);
    }
  }

  SearchResult finish(bool complete, std::int64_t iterations) {
    SearchResult out;
    out.assignment = assignment(found, num_agents);
    out.found = found;
    trace.finish(counter.used());
    out.trace = trace;
    out.steps = counter.used();
    out.iterations = iterations;
    out.complete = complete;
    return out;
  }

  int num_agents;
  StepCounter counter;
  FoundSet found;
  StepTrace trace;
};

Trajectory terminal_trajectory(const DecPomdpModel& model, const Frontier& f, bool history) {
  if (history) return trajectory_from_history(model, f);
  Trajectory cf;
  cf.terminal_state = f.state;
  cf.outcome = model.outcome(f.state);
  return cf;
}

class DecisionTreeSearch {
 public:
  DecisionTreeSearch(const DecPomdpModel& model, const Context& context,
                     const Trajectory& factual, const BaselineParams& params)
      : model_(model),
        context_(context),
        factual_(factual),
        event_(outcome_event(factual)),
        params_(params),
        book_(model.num_agents(), params.budget) {}

  SearchResult run() {
    bool complete = true;
    try {
      explore(factual_, InterventionSet(), 0, -1);
    } catch (const BudgetExhausted&) {
      complete = false;
    }
    return book_.finish(complete, sets_);
  }

 private:
  bool allowed(int t, int agent) const {
    if (!params_.allowed_slots) return true;
    return std::binary_search(params_.allowed_slots->begin(), params_.allowed_slots->end(),
                              Var{t, agent});
  }

  // `base` is the counterfactual episode of `x`; extensions use keys after
  // (last_t, last_agent).
  void explore(const Trajectory& base, const InterventionSet& x, int last_t, int last_agent) {
    const int n = model_.num_agents();
    for (int t = last_t; t < model_.horizon(); ++t) {
      for (int i = 0; i < n; ++i) {
        if (t == last_t && i <= last_agent) continue;
        const InfoState& info = base.steps[t].info[i];
        if (!model_.decides(i, info) || !allowed(t, i)) continue;
        auto alternatives = model_.valid_actions(i, info);
        std::erase(alternatives, base.steps[t].actions[i]);
        for (ActionId a : alternatives) {
          InterventionSet next = x;
          next.add({i, t, a});
          Classification c = classify(model_, context_, factual_, next, event_, book_.counter);
          ++sets_;
          book_.offer(c.pair);
          if (next.size() < params_.max_size) explore(c.counterfactual, next, t, i);
        }
      }
    }
  }

  const DecPomdpModel& model_;
  const Context& context_;
  const Trajectory& factual_;
  Event event_;
  BaselineParams params_;
  Bookkeeping book_;
  std::int64_t sets_ = 0;
};

class SearchTreeTraversal {
 public:
  SearchTreeTraversal(const DecPomdpModel& model, const Context& context,
                      const Trajectory& factual, const BaselineParams& params, bool prune)
      : tree_(model, context, factual, outcome_event(factual), params.max_size),
        prune_(prune),
        book_(model.num_agents(), params.budget) {}

  SearchResult run() {
    bool complete = true;
    try {
      visit(SearchTree::kRoot);
    } catch (const BudgetExhausted&) {
      complete = false;
    }
    return book_.finish(complete, leaves_);
  }

 private:
  void visit(int id) {
    if (tree_.node(id).pruned) return;
    const NodeKind kind = tree_.node(id).kind;
    if (prune_ && kind == NodeKind::kAgent && book_.found.dominated(tree_.agent_vars(id))) {
      tree_.prune(id);
      return;
    }
    tree_.expand(id, book_.counter);
    if (kind == NodeKind::kLeaf) {
      const LeafClassification leaf = tree_.classify_leaf(id);
      ++leaves_;
      book_.offer(leaf.pair);
      tree_.prune(id);
      if (prune_ && leaf.pair) {
        const int agent_node = tree_.closest_agent_ancestor(id);
        if (agent_node >= 0) tree_.prune(agent_node);
      }
      return;
    }
    const std::vector<int> children = tree_.node(id).children;
    for (int c : children) {
      if (prune_ && cut(id)) break;
      visit(c);
    }
    tree_.release_subtree(id);
    tree_.prune(id);
  }

  // A pruned node or ancestor means the rest of this subtree is settled.
  bool cut(int id) const {
    for (int cur = id; cur >= 0; cur = tree_.node(cur).parent) {
      if (tree_.node(cur).pruned) return true;
    }
    return false;
  }

  SearchTree tree_;
  bool prune_;
  Bookkeeping book_;
  std::int64_t leaves_ = 0;
};

}  // namespace

std::string method_name(Method method) {
  switch (method) {
    case Method::kRaMcts: return "RA-MCTS";
    case Method::kRandom: return "RANDOM";
    case Method::kBfDt: return "BF-DT";
    case Method::kBfSt: return "BF-ST";
    case Method::kBfStPrun: return "BF-ST-PRUN";
  }
  return "?";
}

std::vector<std::string> method_names() {
  return {"RA-MCTS", "RANDOM", "BF-DT", "BF-ST", "BF-ST-PRUN"};
}

std::optional<Method> parse_method(const std::string& name) {
  std::string upper;
  for (char c : name) upper += (c == '_') ? '-' : static_cast<char>(std::toupper(c));
  for (Method m : {Method::kRaMcts, Method::kRandom, Method::kBfDt, Method::kBfSt,
                   Method::kBfStPrun}) {
    if (method_name(m) == upper) return m;
  }
  return std::nullopt;
}

SearchResult random_search(const DecPomdpModel& model, const Context& context,
                           const Trajectory& factual, const BaselineParams& params) {
  const Event event = outcome_event(factual);
  const bool history = event.needs_steps();
  const int n = model.num_agents();
  const int horizon = model.horizon();

  // Decision slots are addressed by (agent, ordinal); the set of ordinals an
  // agent reaches does not depend on interventions, their time-steps may.
  std::vector<std::pair<int, int>> universe;
  std::vector<int> decisions(n, 0);
  for (const StepRecord& step : factual.steps) {
    for (int i = 0; i < n; ++i) {
      if (model.decides(i, step.info[i])) universe.push_back({i, decisions[i]++});
    }
  }

  Bookkeeping book(n, params.budget);
  Rng rng(params.seed);
  std::int64_t samples = 0;
  if (universe.empty()) return book.finish(true, 0);
  try {
    std::vector<std::vector<char>> chosen(n);
    while (!book.counter.exhausted()) {
      for (int i = 0; i < n; ++i) chosen[i].assign(decisions[i], 0);
      const int k = std::min<int>(1 + static_cast<int>(rng.uniform(params.max_size)),
                                  static_cast<int>(universe.size()));
      for (int j = 0; j < k; ++j) {
        const std::size_t pick = j + rng.uniform(universe.size() - j);
        std::swap(universe[j], universe[pick]);
        chosen[universe[j].first][universe[j].second] = 1;
      }

      Frontier f = initial_frontier(model, context);
      InterventionSet x;
      std::vector<InfoState> infos;
      while (f.t < horizon) {
        for (int i = 0; i < n; ++i) {
          if (!model.decides(i, f.info[i])) continue;
          const int ordinal = model.decision_index(i, f.info[i]);
          if (ordinal >= static_cast<int>(chosen[i].size()) || !chosen[i][ordinal]) continue;
          const auto alternatives = counterfactual_actions(model, context, f, i);
          if (alternatives.empty()) continue;
          x.add({i, f.t, alternatives[rng.uniform(alternatives.size())]});
          infos.push_back(f.info[i]);
        }
        advance(model, context, f, x, book.counter, nullptr, history);
      }
      ++samples;
      if (x.empty()) continue;
      const Trajectory cf = terminal_trajectory(model, f, history);
      book.offer(classify_counterfactual(factual, x, infos, event.holds(cf), n));
    }
  } catch (const BudgetExhausted&) {
  }
  return book.finish(false, samples);
}

SearchResult bf_dt(const DecPomdpModel& model, const Context& context,
                   const Trajectory& factual, const BaselineParams& params) {
  BaselineParams sorted = params;
  if (sorted.allowed_slots) std::sort(sorted.allowed_slots->begin(), sorted.allowed_slots->end());
  DecisionTreeSearch search(model, context, factual, sorted);
  return search.run();
}

SearchResult bf_st(const DecPomdpModel& model, const Context& context,
                   const Trajectory& factual, const BaselineParams& params, bool prune) {
  SearchTreeTraversal search(model, context, factual, params, prune);
  return search.run();
}

SearchResult run_method(Method method, const DecPomdpModel& model, const Context& context,
                        const Trajectory& factual, std::int64_t budget, std::uint64_t seed,
                        int max_size) {
  BaselineParams params;
  params.budget = budget;
  params.seed = seed;
  params.max_size = max_size;
  switch (method) {
    case Method::kRaMcts: {
      MctsParams mp;
      mp.budget = budget;
      mp.seed = seed;
      mp.max_size = max_size;
      return ra_mcts_search(model, context, factual, mp);
    }
    case Method::kRandom: return random_search(model, context, factual, params);
    case Method::kBfDt: return bf_dt(model, context, factual, params);
    case Method::kBfSt: return bf_st(model, context, factual, params, false);
    case Method::kBfStPrun: return bf_st(model, context, factual, params, true);
  }
  throw ContractViolation("unknown method");
}

}  // namespace ramcts

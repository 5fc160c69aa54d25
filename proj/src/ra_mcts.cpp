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

#include "ramcts/ra_mcts.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace ramcts {
namespace {

std::vector<std::int64_t> score_units(const std::vector<Degree>& degrees, double q_env) {
  std::vector<std::int64_t> r;
  r.reserve(degrees.size() + 1);
  for (const Degree& d : degrees) r.push_back(kScoreUnit * d.num / d.den);
  r.push_back(to_score_units(q_env));
  return r;
}

}  // namespace

StepTrace::StepTrace(int num_agents) {
  points_.push_back({0, std::vector<Degree>(num_agents, Degree{0, 1})});
}

void StepTrace::record(std::int64_t steps, const std::vector<Degree>& degrees) {
  if (!points_.empty() && points_.back().degrees == degrees) return;
  if (!points_.empty() && points_.back().steps == steps) {
    points_.back().degrees = degrees;
    return;
  }
  points_.push_back({steps, degrees});
}

std::vector<Degree> StepTrace::at(std::int64_t steps) const {
  if (points_.empty()) return {};
  const TracePoint* current = &points_.front();
  for (const auto& p : points_) {
    if (p.steps > steps) break;
    current = &p;
  }
  return current->degrees;
}

std::string StepTrace::to_csv(std::int64_t every) const {
  std::ostringstream out;
  out << "steps";
  const int n = points_.empty() ? 0 : static_cast<int>(points_.front().degrees.size());
  for (int i = 0; i < n; ++i) out << ",agent" << i << "_degree";
  out << '\n';
  auto row = [&](std::int64_t s) {
    out << s;
    for (const Degree& d : at(s)) out << ',' << d.value();
    out << '\n';
  };
  for (std::int64_t s = every; s < final_steps_; s += every) row(s);
  row(final_steps_);
  return out.str();
}

std::vector<double> weight_schedule(std::int64_t k, int num_agents, double scalarization) {
  if (k < 0 || num_agents < 1) throw ContractViolation("weight_schedule: bad arguments");
  std::vector<double> w(num_agents + 1, 0.0);
  w[num_agents] = scalarization;
  w[k % num_agents] = 1.0 - scalarization;
  return w;
}

double scalarize(std::span<const double> q, std::span<const double> weights) {
  if (q.size() != weights.size()) throw ContractViolation("scalarize: dimension mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) total += weights[j] * q[j];
  return total;
}

int select_child(const SearchTree& tree, int parent, std::span<const double> weights,
                 double exploration, Rng& rng) {
  const auto live = tree.live_children(parent);
  if (live.empty()) throw ContractViolation("select_child: every child is pruned");
  std::vector<int> unvisited;
  for (int c : live) {
    if (tree.node(c).visits == 0) unvisited.push_back(c);
  }
  if (!unvisited.empty()) return unvisited[rng.uniform(unvisited.size())];

  const double log_parent = std::log(static_cast<double>(tree.node(parent).visits));
  std::vector<int> best;
  double best_value = 0.0;
  std::vector<double> q(weights.size());
  for (int c : live) {
    const SearchNode& child = tree.node(c);
    for (std::size_t j = 0; j < q.size(); ++j) q[j] = from_score_units(child.score[j]);
    const double n = static_cast<double>(child.visits);
    const double value =
        scalarize(q, weights) / n + exploration * std::sqrt(log_parent / n);
    if (best.empty() || value > best_value) {
      best = {c};
      best_value = value;
    } else if (value == best_value) {
      best.push_back(c);
    }
  }
  return best[rng.uniform(best.size())];
}

RaMcts::RaMcts(const DecPomdpModel& model, const Context& context,
               const Trajectory& factual, const Event& event, const MctsParams& params)
    : model_(model),
      params_(params),
      tree_(model, context, factual, event, params.max_size),
      rng_(params.seed),
      trace_(model.num_agents()) {
  if (!(params.exploration > 0.0)) throw ContractViolation("exploration constant must be > 0");
  if (params.scalarization < 0.0 || params.scalarization >= 1.0) {
    throw ContractViolation("scalarization constant must lie in [0, 1)");
  }
  if (!event.holds(factual)) throw NotAFailure();
}

void RaMcts::add_to_path(const std::vector<int>& path,
                         const std::vector<std::int64_t>& score) {
  for (int id : path) {
    SearchNode& node = tree_.node(id);
    ++node.visits;
    for (std::size_t j = 0; j < score.size(); ++j) node.score[j] += score[j];
  }
}

void RaMcts::erase(int agent_node) {
  const std::int64_t visits = tree_.node(agent_node).visits;
  const std::vector<std::int64_t> score = tree_.node(agent_node).score;
  for (int cur = tree_.node(agent_node).parent; cur >= 0; cur = tree_.node(cur).parent) {
    SearchNode& node = tree_.node(cur);
    node.visits -= visits;
    for (std::size_t j = 0; j < score.size(); ++j) node.score[j] -= score[j];
  }
  if (params_.record_log) log_.push_back({LogEntry::Kind::kErase, {agent_node}, {}});
  tree_.prune(agent_node);
}

void RaMcts::refresh(std::int64_t steps) {
  trace_.record(steps, assignment(found_, model_.num_agents()).degrees);
}

bool RaMcts::iterate(StepCounter& counter) {
  if (tree_.root_pruned()) return false;
  const auto weights = weight_schedule(iteration_, model_.num_agents(), params_.scalarization);
  ++iteration_;

  std::vector<int> path = {SearchTree::kRoot};
  int cur = SearchTree::kRoot;
  while (true) {
    if (tree_.node(cur).kind == NodeKind::kAgent && found_.dominated(tree_.agent_vars(cur))) {
      erase(cur);
      return !tree_.root_pruned();
    }
    if (!tree_.node(cur).expanded) {
      tree_.expand(cur, counter);
      if (tree_.node(cur).pruned) return !tree_.root_pruned();
    }
    if (tree_.node(cur).kind == NodeKind::kLeaf) break;
    cur = select_child(tree_, cur, weights, params_.exploration, rng_);
    path.push_back(cur);
  }

  const LeafClassification leaf = tree_.classify_leaf(cur);
  const int n = model_.num_agents();
  std::vector<Degree> degrees(n, Degree{0, 1});
  if (leaf.pair) {
    degrees = degree_vector(*leaf.pair, n);
    if (found_.insert(*leaf.pair)) refresh(counter.used());
  }
  const auto r = score_units(degrees, leaf.q_env);
  last_score_.clear();
  for (auto u : r) last_score_.push_back(from_score_units(u));
  add_to_path(path, r);
  if (params_.record_log) log_.push_back({LogEntry::Kind::kVisit, path, r});

  tree_.prune(cur);
  if (leaf.pair) {
    const int agent_node = tree_.closest_agent_ancestor(cur);
    if (agent_node >= 0) tree_.prune(agent_node);
  }
  return !tree_.root_pruned();
}

SearchResult RaMcts::run() {
  StepCounter counter(params_.budget);
  try {
    while (!counter.exhausted() && iterate(counter)) {
    }
  } catch (const BudgetExhausted&) {
  }
  SearchResult out;
  out.complete = tree_.root_pruned();
  out.steps = counter.used();
  out.iterations = iteration_;
  out.found = found_;
  out.assignment = assignment(found_, model_.num_agents());
  trace_.finish(counter.used());
  out.trace = trace_;
  return out;
}

SearchResult ra_mcts_search(const DecPomdpModel& model, const Context& context,
                            const Trajectory& factual, const MctsParams& params) {
  const Event event = outcome_event(factual);
  RaMcts search(model, context, factual, event, params);
  return search.run();
}

std::vector<Degree> mean_degrees(const std::vector<std::vector<Degree>>& samples) {
  if (samples.empty()) return {};
  const std::size_t n = samples.front().size();
  std::int64_t common = 1;
  for (const auto& s : samples) {
    for (const Degree& d : s) common = std::lcm(common, static_cast<std::int64_t>(d.den));
  }
  std::vector<Degree> out(n);
  const std::int64_t den = common * static_cast<std::int64_t>(samples.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t num = 0;
    for (const auto& s : samples) num += s.at(i).num * (common / s.at(i).den);
    const std::int64_t g = std::gcd(num, den);
    out[i] = Degree{static_cast<std::int32_t>(num / g), static_cast<std::int32_t>(den / g)};
  }
  return out;
}

UncertaintyResult estimate_under_uncertainty(const DecPomdpModel& model,
                                             const Trajectory& observed, int num_samples,
                                             const MctsParams& params) {
  if (num_samples < 1) throw ContractViolation("at least one posterior sample is required");
  const Event event = outcome_event(observed);
  UncertaintyResult out;
  std::vector<std::vector<Degree>> per_sample;
  for (int m = 0; m < num_samples; ++m) {
    const Context context =
        posterior_sample_context(model, observed, derive_seed(params.seed, seed_tags::kPosterior, m));
    MctsParams sample_params = params;
    sample_params.seed = derive_seed(params.seed, seed_tags::kSampleSearch, m);
    RaMcts search(model, context, observed, event, sample_params);
    out.samples.push_back(search.run());
    per_sample.push_back(out.samples.back().assignment.degrees);
  }
  out.mean_exact = mean_degrees(per_sample);
  for (const Degree& d : out.mean_exact) out.mean.push_back(d.value());
  return out;
}

}  // namespace ramcts

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

#include "ramcts/causality.hpp"

#include <algorithm>

namespace ramcts {
namespace {

const char* kind_name(Event::Kind kind) {
  switch (kind) {
    case Event::Kind::kAgentsLose: return "agents_lose";
    case Event::Kind::kStateEquals: return "state";
    case Event::Kind::kObservationEquals: return "obs";
    case Event::Kind::kInfoEquals: return "info";
    case Event::Kind::kActionEquals: return "action";
    case Event::Kind::kAnd: return "and";
    case Event::Kind::kOr: return "or";
    case Event::Kind::kNot: return "not";
  }
  return "?";
}

const StepRecord& step_at(const Trajectory& trajectory, int t) {
  if (t < 0 || t >= trajectory.length()) {
    throw ContractViolation("event refers to time-step " + std::to_string(t) +
                            " outside the trajectory");
  }
  return trajectory.steps[t];
}

template <typename T>
const T& agent_at(const std::vector<T>& values, int agent) {
  if (agent < 0 || agent >= static_cast<int>(values.size())) {
    throw ContractViolation("event refers to agent " + std::to_string(agent) +
                            " outside the trajectory");
  }
  return values[agent];
}

bool is_subset(const VarSet& small, const VarSet& large) {
  return std::includes(large.begin(), large.end(), small.begin(), small.end());
}

}  // namespace

Event Event::agents_lose() { return Event(); }

Event Event::state_equals(int t, State value) {
  Event e;
  e.kind_ = Kind::kStateEquals;
  e.t_ = t;
  e.value_ = std::move(value);
  return e;
}

Event Event::observation_equals(int agent, int t, Observation value) {
  Event e;
  e.kind_ = Kind::kObservationEquals;
  e.agent_ = agent;
  e.t_ = t;
  e.value_ = std::move(value);
  return e;
}

Event Event::info_equals(int agent, int t, InfoState value) {
  Event e;
  e.kind_ = Kind::kInfoEquals;
  e.agent_ = agent;
  e.t_ = t;
  e.value_ = std::move(value);
  return e;
}

Event Event::action_equals(int agent, int t, ActionId value) {
  Event e;
  e.kind_ = Kind::kActionEquals;
  e.agent_ = agent;
  e.t_ = t;
  e.value_ = {value};
  return e;
}

Event Event::all_of(std::vector<Event> children) {
  Event e;
  e.kind_ = Kind::kAnd;
  e.children_ = std::move(children);
  return e;
}

Event Event::any_of(std::vector<Event> children) {
  Event e;
  e.kind_ = Kind::kOr;
  e.children_ = std::move(children);
  return e;
}

Event Event::negate(Event child) {
  Event e;
  e.kind_ = Kind::kNot;
  e.children_.push_back(std::move(child));
  return e;
}

bool Event::needs_steps() const {
  switch (kind_) {
    case Kind::kAgentsLose:
      return false;
    case Kind::kStateEquals:
      // The terminal state is kept without history.
      return t_ != kTerminal;
    case Kind::kAnd:
    case Kind::kOr:
    case Kind::kNot:
      return std::any_of(children_.begin(), children_.end(),
                         [](const Event& c) { return c.needs_steps(); });
    default:
      return true;
  }
}

bool Event::holds(const Trajectory& trajectory) const {
  switch (kind_) {
    case Kind::kAgentsLose:
      return trajectory.outcome.agents_lose();
    case Kind::kStateEquals:
      if (t_ == kTerminal) return trajectory.terminal_state == value_;
      return step_at(trajectory, t_).state == value_;
    case Kind::kObservationEquals:
      return agent_at(step_at(trajectory, t_).obs, agent_) == value_;
    case Kind::kInfoEquals:
      return agent_at(step_at(trajectory, t_).info, agent_) == value_;
    case Kind::kActionEquals:
      return agent_at(step_at(trajectory, t_).actions, agent_) == value_[0];
    case Kind::kAnd:
      return std::all_of(children_.begin(), children_.end(),
                         [&](const Event& c) { return c.holds(trajectory); });
    case Kind::kOr:
      return std::any_of(children_.begin(), children_.end(),
                         [&](const Event& c) { return c.holds(trajectory); });
    case Kind::kNot:
      return !children_.at(0).holds(trajectory);
  }
  return false;
}

nlohmann::json Event::to_json() const {
  nlohmann::json j = {{"kind", kind_name(kind_)}};
  switch (kind_) {
    case Kind::kAgentsLose:
      break;
    case Kind::kAnd:
    case Kind::kOr:
    case Kind::kNot: {
      auto children = nlohmann::json::array();
      for (const auto& c : children_) children.push_back(c.to_json());
      j["children"] = children;
      break;
    }
    default:
      j["agent"] = agent_;
      j["t"] = t_;
      j["value"] = value_;
  }
  return j;
}

Event Event::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "agents_lose") return agents_lose();
  if (kind == "and" || kind == "or" || kind == "not") {
    std::vector<Event> children;
    for (const auto& c : j.at("children")) children.push_back(from_json(c));
    if (kind == "and") return all_of(std::move(children));
    if (kind == "or") return any_of(std::move(children));
    if (children.size() != 1) throw ContractViolation("'not' takes one child");
    return negate(std::move(children[0]));
  }
  const int agent = j.value("agent", 0);
  const int t = j.at("t").get<int>();
  const Code value = j.at("value").get<Code>();
  if (kind == "state") return state_equals(t, value);
  if (kind == "obs") return observation_equals(agent, t, value);
  if (kind == "info") return info_equals(agent, t, value);
  if (kind == "action") return action_equals(agent, t, static_cast<ActionId>(value.at(0)));
  throw ContractViolation("unknown event kind '" + kind + "'");
}

Event outcome_event(const Trajectory& factual) {
  Event e = Event::agents_lose();
  if (!e.holds(factual)) throw NotAFailure();
  return e;
}

VarSet vars_of(const InterventionSet& interventions) {
  VarSet vars;
  vars.reserve(interventions.size());
  for (const auto& x : interventions) vars.push_back({x.t, x.agent});
  return vars;
}

std::string var_set_key(const VarSet& vars) {
  std::string key;
  key.reserve(vars.size() * 6);
  for (const Var& v : vars) {
    key += std::to_string(v.t);
    key += ':';
    key += std::to_string(v.agent);
    key += ';';
  }
  return key;
}

std::string Degree::str() const {
  if (num == 0) return "0";
  return std::to_string(num) + "/" + std::to_string(den);
}

std::vector<Degree> degree_vector(const CandidatePair& pair, int num_agents) {
  std::vector<Degree> out(num_agents);
  const int k = pair.size();
  for (int i = 0; i < num_agents; ++i) {
    const int m = i < static_cast<int>(pair.counts.size()) ? pair.counts[i] : 0;
    out[i] = m == 0 ? Degree{0, 1} : Degree{m, k};
  }
  return out;
}

nlohmann::json pair_to_json(const CandidatePair& pair, int num_agents) {
  auto cause = nlohmann::json::array();
  for (const auto& c : pair.cause) {
    cause.push_back({{"agent", c.agent},
                     {"t", c.t},
                     {"factual", c.factual},
                     {"counterfactual", c.counterfactual}});
  }
  auto witness = nlohmann::json::array();
  for (const auto& w : pair.witness) {
    witness.push_back({{"agent", w.agent}, {"t", w.t}, {"witness", w.witness}});
  }
  auto degrees = nlohmann::json::array();
  for (const Degree& d : degree_vector(pair, num_agents)) degrees.push_back(d.value());
  return {{"A", cause}, {"W", witness}, {"degrees", degrees}};
}

std::optional<CandidatePair> classify_counterfactual(
    const Trajectory& factual, const InterventionSet& interventions,
    const std::vector<InfoState>& counterfactual_infos, bool event_holds, int num_agents) {
  if (interventions.empty()) throw ContractViolation("classify: empty intervention set");
  if (static_cast<int>(counterfactual_infos.size()) != interventions.size()) {
    throw ContractViolation("classify: one information state per intervention expected");
  }
  if (event_holds) return std::nullopt;
  CandidatePair pair;
  pair.interventions = interventions;
  pair.counts.assign(num_agents, 0);
  for (int k = 0; k < interventions.size(); ++k) {
    const Intervention& x = interventions[k];
    const StepRecord& step = step_at(factual, x.t);
    if (agent_at(step.info, x.agent) == counterfactual_infos[k]) {
      pair.cause.push_back({x.agent, x.t, step.actions[x.agent], x.action});
      ++pair.counts.at(x.agent);
    } else {
      pair.witness.push_back({x.agent, x.t, x.action});
    }
  }
  if (pair.cause.empty()) return std::nullopt;
  return pair;
}

Classification classify(const DecPomdpModel& model, const Context& context,
                        const Trajectory& factual, const InterventionSet& interventions,
                        const Event& event, StepCounter& counter) {
  Classification out;
  out.counterfactual = rollout(model, context, interventions, counter);
  std::vector<InfoState> infos;
  infos.reserve(interventions.size());
  for (const auto& x : interventions) infos.push_back(out.counterfactual.steps[x.t].info[x.agent]);
  out.pair = classify_counterfactual(factual, interventions, infos,
                                     event.holds(out.counterfactual), model.num_agents());
  return out;
}

bool FoundSet::dominated(const VarSet& vars) const {
  const int n = static_cast<int>(vars.size());
  if (groups_.empty() || n < 2) return false;
  if (n <= 16) {
    // Look up each proper nonempty subset directly.
    const std::uint32_t full = (1u << n) - 1;
    VarSet subset;
    for (std::uint32_t mask = 1; mask < full; ++mask) {
      subset.clear();
      for (int k = 0; k < n; ++k) {
        if (mask & (1u << k)) subset.push_back(vars[k]);
      }
      if (groups_.count(var_set_key(subset)) != 0) return true;
    }
    return false;
  }
  for (const auto& [key, group] : groups_) {
    if (group.first.size() < vars.size() && is_subset(group.first, vars)) return true;
  }
  return false;
}

bool FoundSet::contains_vars(const VarSet& vars) const {
  return groups_.count(var_set_key(vars)) != 0;
}

bool FoundSet::insert(CandidatePair pair) {
  VarSet vars = pair.vars();
  if (dominated(vars)) return false;
  for (auto it = groups_.begin(); it != groups_.end();) {
    const VarSet& stored = it->second.first;
    if (stored.size() > vars.size() && is_subset(vars, stored)) {
      it = groups_.erase(it);
    } else {
      ++it;
    }
  }
  const std::string key = var_set_key(vars);
  auto& group = groups_[key];
  if (group.second.empty()) group.first = std::move(vars);
  if (std::find(group.second.begin(), group.second.end(), pair) == group.second.end()) {
    group.second.push_back(std::move(pair));
  }
  return true;
}

int FoundSet::num_pairs() const {
  int total = 0;
  for (const auto& [key, group] : groups_) total += static_cast<int>(group.second.size());
  return total;
}

std::vector<CandidatePair> FoundSet::pairs() const {
  std::vector<CandidatePair> out;
  for (const auto& [key, group] : groups_) {
    out.insert(out.end(), group.second.begin(), group.second.end());
  }
  return out;
}

std::vector<VarSet> FoundSet::var_sets() const {
  std::vector<VarSet> out;
  for (const auto& [key, group] : groups_) out.push_back(group.first);
  return out;
}

std::vector<double> ResponsibilityAssignment::values() const {
  std::vector<double> out;
  for (const Degree& d : degrees) out.push_back(d.value());
  return out;
}

nlohmann::json ResponsibilityAssignment::to_json() const {
  auto degrees_json = nlohmann::json::array();
  for (const Degree& d : degrees) degrees_json.push_back(d.str());
  auto prov = nlohmann::json::array();
  for (const auto& p : provenance) {
    prov.push_back(p ? pair_to_json(*p, static_cast<int>(degrees.size())) : nlohmann::json());
  }
  return {{"degrees", degrees_json}, {"values", values()}, {"provenance", prov}};
}

ResponsibilityAssignment assignment(const FoundSet& found, int num_agents) {
  ResponsibilityAssignment out;
  out.degrees.assign(num_agents, Degree{0, 1});
  out.provenance.assign(num_agents, std::nullopt);
  for (const auto& [key, group] : found.groups()) {
    for (const CandidatePair& pair : group.second) {
      const auto d = degree_vector(pair, num_agents);
      for (int i = 0; i < num_agents; ++i) {
        if (d[i].num > 0 && (!out.provenance[i] || d[i] > out.degrees[i])) {
          out.degrees[i] = d[i];
          out.provenance[i] = pair;
        }
      }
    }
  }
  return out;
}

}  // namespace ramcts

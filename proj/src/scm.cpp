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

#include "ramcts/scm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ramcts {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

class ContextChance final : public ChanceSource {
 public:
  ContextChance(const Context& context, std::vector<ChanceOutcome>* log)
      : context_(context), log_(log) {}

  int draw(const SlotKey& slot, std::span<const double> probabilities) override {
    const int outcome = context_.sample(slot, probabilities);
    if (log_ != nullptr) log_->push_back({slot, outcome});
    return outcome;
  }

 private:
  const Context& context_;
  std::vector<ChanceOutcome>* log_;
};

// Replays recorded draws and remembers the distribution each was drawn from.
class ForcingChance final : public ChanceSource {
 public:
  struct Forced {
    SlotKey slot;
    Probabilities probabilities;
    int outcome;
  };

  ForcingChance(std::span<const ChanceOutcome> recorded, std::vector<Forced>& forced)
      : recorded_(recorded), forced_(forced) {}

  int draw(const SlotKey& slot, std::span<const double> probabilities) override {
    if (position_ >= recorded_.size()) {
      throw InconsistentTrajectory("model made a draw the trajectory does not record");
    }
    const ChanceOutcome& expected = recorded_[position_++];
    if (!(expected.slot == slot)) {
      throw InconsistentTrajectory("draw order differs from the recorded draws");
    }
    const int k = expected.outcome;
    if (k < 0 || k >= static_cast<int>(probabilities.size()) || !(probabilities[k] > 0.0)) {
      throw InconsistentTrajectory("recorded draw has zero probability");
    }
    forced_.push_back({slot, Probabilities(probabilities.begin(), probabilities.end()), k});
    return k;
  }

  bool consumed() const { return position_ == recorded_.size(); }

 private:
  std::span<const ChanceOutcome> recorded_;
  std::vector<Forced>& forced_;
  std::size_t position_ = 0;
};

double log_add_exp(double a, double b) {
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(-std::abs(a - b)));
}

nlohmann::json chance_to_json(const std::vector<ChanceOutcome>& chance) {
  auto out = nlohmann::json::array();
  for (const auto& c : chance) {
    out.push_back({static_cast<int>(c.slot.kind), c.slot.t, c.slot.index, c.outcome});
  }
  return out;
}

std::vector<ChanceOutcome> chance_from_json(const nlohmann::json& j) {
  std::vector<ChanceOutcome> out;
  for (const auto& c : j) {
    out.push_back({{static_cast<SlotKind>(c.at(0).get<int>()), c.at(1).get<int>(),
                    c.at(2).get<int>()},
                   c.at(3).get<int>()});
  }
  return out;
}

}  // namespace

bool DecPomdpModel::decides(int, const InfoState&) const { return true; }

int DecPomdpModel::decision_index(int, const InfoState&) const {
  throw ContractViolation(name() + " does not expose decision ordinals");
}

double DecPomdpModel::q_env(const Trajectory& factual,
                            const Trajectory& counterfactual) const {
  return q_env_margin(factual.outcome, counterfactual.outcome);
}

nlohmann::json DecPomdpModel::describe_state(const State& state) const {
  return nlohmann::json(state);
}

double q_env_margin(const Outcome& factual, const Outcome& counterfactual) {
  if (!counterfactual.agents_lose()) return 1.0;
  const double before = factual.deficit();
  if (!(before > 0.0)) return 0.0;
  return std::max(0.0, (before - counterfactual.deficit()) / before);
}

int gumbel_argmax(std::span<const double> probabilities, std::span<const double> noise) {
  if (probabilities.size() != noise.size()) {
    throw ContractViolation("gumbel_argmax: probabilities and noise differ in length");
  }
  int best = -1;
  double best_value = kNegInf;
  for (std::size_t j = 0; j < probabilities.size(); ++j) {
    if (!(probabilities[j] > 0.0)) continue;
    const double value = std::log(probabilities[j]) + noise[j];
    if (best < 0 || value > best_value) {
      best = static_cast<int>(j);
      best_value = value;
    }
  }
  if (best < 0) throw ContractViolation("gumbel_argmax: distribution has no mass");
  return best;
}

double Context::gumbel(const SlotKey& slot, int category) const {
  if (!overrides_.empty()) {
    auto it = overrides_.find(slot.packed());
    if (it != overrides_.end()) {
      if (category < 0 || category >= static_cast<int>(it->second.size())) {
        throw ContractViolation("context: category outside the slot domain");
      }
      return it->second[category];
    }
  }
  return bits_to_gumbel(
      hash_words({seed_, slot.packed(), static_cast<std::uint64_t>(category)}));
}

std::vector<double> Context::gumbel_vector(const SlotKey& slot, int domain) const {
  std::vector<double> out(domain);
  for (int j = 0; j < domain; ++j) out[j] = gumbel(slot, j);
  return out;
}

int Context::sample(const SlotKey& slot, std::span<const double> probabilities) const {
  int support = 0;
  int only = -1;
  for (std::size_t j = 0; j < probabilities.size(); ++j) {
    if (probabilities[j] > 0.0) {
      ++support;
      only = static_cast<int>(j);
    }
  }
  if (support == 0) throw ContractViolation("draw from a distribution with no mass");
  // A point mass wins whatever the noise; skip generating it.
  if (support == 1) return only;
  int best = -1;
  double best_value = kNegInf;
  for (std::size_t j = 0; j < probabilities.size(); ++j) {
    if (!(probabilities[j] > 0.0)) continue;
    const double value = std::log(probabilities[j]) + gumbel(slot, static_cast<int>(j));
    if (best < 0 || value > best_value) {
      best = static_cast<int>(j);
      best_value = value;
    }
  }
  return best;
}

nlohmann::json Context::to_json() const {
  return {{"seed", seed_},
          {"algorithm_version", kAlgorithmVersion},
          {"posterior", posterior_}};
}

Context Context::from_json(const nlohmann::json& j) {
  if (j.at("algorithm_version").get<int>() != kAlgorithmVersion) {
    throw ContractViolation("context was produced by a different noise algorithm");
  }
  if (j.value("posterior", false)) {
    throw ContractViolation(
        "posterior contexts are regenerated from their observed trajectory");
  }
  return Context(j.at("seed").get<std::uint64_t>());
}

Context sample_context(const DecPomdpModel&, std::uint64_t seed) { return Context(seed); }

std::vector<std::pair<SlotSpec, std::vector<double>>> materialize_context(
    const DecPomdpModel& model, const Context& context) {
  std::vector<std::pair<SlotSpec, std::vector<double>>> table;
  for (const SlotSpec& spec : model.slot_inventory()) {
    table.emplace_back(spec, context.gumbel_vector(spec.slot, spec.domain));
  }
  return table;
}

InterventionSet::InterventionSet(std::initializer_list<Intervention> items) {
  for (const auto& x : items) add(x);
}

void InterventionSet::add(const Intervention& x) {
  auto it = std::lower_bound(items_.begin(), items_.end(), x, [](const auto& a, const auto& b) {
    return std::pair(a.t, a.agent) < std::pair(b.t, b.agent);
  });
  if (it != items_.end() && it->t == x.t && it->agent == x.agent) {
    throw ContractViolation("intervention set already contains this (agent, t)");
  }
  items_.insert(it, x);
}

std::optional<ActionId> InterventionSet::find(int agent, int t) const {
  for (const auto& x : items_) {
    if (x.t == t && x.agent == agent) return x.action;
    if (x.t > t) break;
  }
  return std::nullopt;
}

Frontier initial_frontier(const DecPomdpModel& model, const Context& context,
                          std::vector<ChanceOutcome>* chance_log) {
  ContextChance chance(context, chance_log);
  Frontier f;
  f.t = 0;
  f.state = model.initial_state(chance);
  f.obs = model.observe(f.state, 0, chance);
  const int n = model.num_agents();
  f.info.reserve(n);
  for (int i = 0; i < n; ++i) f.info.push_back(model.initial_info(i, f.obs[i]));
  return f;
}

void advance(const DecPomdpModel& model, const Context& context, Frontier& frontier,
             const InterventionSet& interventions, StepCounter& counter,
             StepRecord* record, bool keep_history) {
  const int t = frontier.t;
  const int n = model.num_agents();
  counter.charge();

  JointAction actions(n);
  for (int i = 0; i < n; ++i) {
    if (auto forced = interventions.find(i, t)) {
      const auto valid = model.valid_actions(i, frontier.info[i]);
      if (std::find(valid.begin(), valid.end(), *forced) == valid.end()) {
        throw InvalidIntervention(i, t, *forced);
      }
      actions[i] = *forced;
    } else {
      const auto probs = model.policy(i, frontier.info[i]);
      actions[i] = context.sample({SlotKind::kAction, t, i}, probs);
    }
  }

  StepRecord local;
  StepRecord* out = record != nullptr ? record : (keep_history ? &local : nullptr);
  ContextChance chance(context, out != nullptr ? &out->chance : nullptr);

  State next = model.transition(frontier.state, actions, t, chance);
  std::vector<Observation> next_obs;
  std::vector<InfoState> next_info;
  if (t + 1 < model.horizon()) {
    next_obs = model.observe(next, t + 1, chance);
    next_info.reserve(n);
    for (int i = 0; i < n; ++i) {
      next_info.push_back(model.info_update(i, frontier.info[i], actions[i], next_obs[i]));
    }
  }

  if (out != nullptr) {
    out->t = t;
    out->state = std::move(frontier.state);
    out->obs = std::move(frontier.obs);
    out->info = std::move(frontier.info);
    out->actions = std::move(actions);
    if (keep_history) {
      auto link = std::make_shared<HistoryLink>();
      link->record = (out == &local) ? std::move(local) : *out;
      link->previous = std::move(frontier.history);
      frontier.history = std::move(link);
    }
  }
  frontier.t = t + 1;
  frontier.state = std::move(next);
  frontier.obs = std::move(next_obs);
  frontier.info = std::move(next_info);
}

Frontier extend(const DecPomdpModel& model, const Context& context, Frontier from,
                const InterventionSet& interventions, int to_t, StepCounter& counter,
                bool keep_history) {
  if (to_t < from.t || to_t > model.horizon()) {
    throw ContractViolation("extend: target time-step precedes the cached prefix");
  }
  while (from.t < to_t) {
    advance(model, context, from, interventions, counter, nullptr, keep_history);
  }
  return from;
}

Trajectory trajectory_from_history(const DecPomdpModel& model, const Frontier& terminal,
                                   std::vector<ChanceOutcome> initial_chance) {
  Trajectory traj;
  traj.initial_chance = std::move(initial_chance);
  for (const HistoryLink* link = terminal.history.get(); link != nullptr;
       link = link->previous.get()) {
    traj.steps.push_back(link->record);
  }
  std::reverse(traj.steps.begin(), traj.steps.end());
  traj.terminal_state = terminal.state;
  traj.outcome = model.outcome(terminal.state);
  return traj;
}

Trajectory rollout(const DecPomdpModel& model, const Context& context,
                   const InterventionSet& interventions, StepCounter& counter) {
  Trajectory traj;
  Frontier f = initial_frontier(model, context, &traj.initial_chance);
  const int horizon = model.horizon();
  traj.steps.resize(horizon);
  for (int t = 0; t < horizon; ++t) {
    advance(model, context, f, interventions, counter, &traj.steps[t]);
  }
  traj.terminal_state = f.state;
  traj.outcome = model.outcome(f.state);
  return traj;
}

Trajectory rollout(const DecPomdpModel& model, const Context& context,
                   const InterventionSet& interventions) {
  StepCounter counter;
  return rollout(model, context, interventions, counter);
}

std::vector<Frontier> factual_frontiers(const DecPomdpModel& model, const Context& context) {
  StepCounter counter;
  std::vector<Frontier> out;
  Frontier f = initial_frontier(model, context);
  out.push_back(f);
  const InterventionSet none;
  while (f.t < model.horizon()) {
    advance(model, context, f, none, counter);
    out.push_back(f);
  }
  return out;
}

ActionId default_action_at(const DecPomdpModel& model, const Context& context,
                           const Frontier& frontier, int agent) {
  const auto probs = model.policy(agent, frontier.info[agent]);
  return context.sample({SlotKind::kAction, frontier.t, agent}, probs);
}

ActionId default_action(const DecPomdpModel& model, const Context& context,
                        const InterventionSet& interventions, int agent, int t,
                        StepCounter& counter) {
  if (t < 0 || t >= model.horizon()) throw ContractViolation("default_action: t out of range");
  Frontier f = extend(model, context, initial_frontier(model, context), interventions, t,
                      counter);
  return default_action_at(model, context, f, agent);
}

std::vector<ActionId> counterfactual_actions(const DecPomdpModel& model,
                                             const Context& context,
                                             const Frontier& frontier, int agent) {
  if (!model.decides(agent, frontier.info[agent])) return {};
  auto valid = model.valid_actions(agent, frontier.info[agent]);
  const ActionId fallback = default_action_at(model, context, frontier, agent);
  std::erase(valid, fallback);
  return valid;
}

std::vector<double> conditional_gumbels(std::span<const double> probabilities,
                                        int observed, Rng& rng) {
  const int n = static_cast<int>(probabilities.size());
  if (observed < 0 || observed >= n || !(probabilities[observed] > 0.0)) {
    throw InconsistentTrajectory("observed category has zero probability");
  }
  double total = 0.0;
  for (double p : probabilities) total += std::max(p, 0.0);
  // The maximum of log p_j + g_j is Gumbel(log total); the observed category
  // attains it and every other perturbed logit is truncated below it.
  const double top = std::log(total) + rng.gumbel();
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j) {
    if (j == observed) {
      out[j] = top - std::log(probabilities[j]);
    } else if (probabilities[j] > 0.0) {
      const double logit = std::log(probabilities[j]);
      const double free = logit + rng.gumbel();
      const double truncated = -log_add_exp(-top, -free);
      out[j] = truncated - logit;
    } else {
      out[j] = rng.gumbel();
    }
  }
  return out;
}

Context posterior_sample_context(const DecPomdpModel& model, const Trajectory& observed,
                                 std::uint64_t seed) {
  const int n = model.num_agents();
  const int horizon = model.horizon();
  if (observed.length() != horizon) {
    throw InconsistentTrajectory("trajectory length differs from the model horizon");
  }
  std::vector<ForcingChance::Forced> forced;

  ForcingChance start(observed.initial_chance, forced);
  State state = model.initial_state(start);
  std::vector<Observation> obs = model.observe(state, 0, start);
  if (!start.consumed()) throw InconsistentTrajectory("unused initial draws");
  if (state != observed.steps[0].state) {
    throw InconsistentTrajectory("initial state does not match its recorded draws");
  }
  std::vector<InfoState> info;
  for (int i = 0; i < n; ++i) info.push_back(model.initial_info(i, obs[i]));

  for (int t = 0; t < horizon; ++t) {
    const StepRecord& step = observed.steps[t];
    if (static_cast<int>(step.actions.size()) != n) {
      throw InconsistentTrajectory("joint action has the wrong arity");
    }
    for (int i = 0; i < n; ++i) {
      const auto probs = model.policy(i, info[i]);
      const int a = step.actions[i];
      if (a < 0 || a >= static_cast<int>(probs.size()) || !(probs[a] > 0.0)) {
        throw InconsistentTrajectory("recorded action has zero probability at t=" +
                                     std::to_string(t));
      }
      forced.push_back({{SlotKind::kAction, t, i}, probs, a});
    }
    ForcingChance chance(step.chance, forced);
    State next = model.transition(state, step.actions, t, chance);
    if (t + 1 < horizon) {
      obs = model.observe(next, t + 1, chance);
      if (next != observed.steps[t + 1].state) {
        throw InconsistentTrajectory("state at t=" + std::to_string(t + 1) +
                                     " does not match its recorded draws");
      }
      for (int i = 0; i < n; ++i) {
        info[i] = model.info_update(i, info[i], step.actions[i], obs[i]);
      }
    } else if (next != observed.terminal_state) {
      throw InconsistentTrajectory("terminal state does not match its recorded draws");
    }
    if (!chance.consumed()) throw InconsistentTrajectory("unused transition draws");
    state = std::move(next);
  }

  std::unordered_map<std::uint64_t, std::vector<double>> overrides;
  for (const auto& f : forced) {
    Rng rng(hash_words({seed, f.slot.packed(), 0x706f73746572ULL}));
    overrides.emplace(f.slot.packed(), conditional_gumbels(f.probabilities, f.outcome, rng));
  }
  return Context(seed, std::move(overrides));
}

nlohmann::json step_to_json(const DecPomdpModel* model, const StepRecord& step) {
  nlohmann::json j = {{"t", step.t},         {"state", step.state},
                      {"obs", step.obs},     {"info", step.info},
                      {"actions", step.actions}, {"chance", chance_to_json(step.chance)}};
  if (model != nullptr) j["view"] = model->describe_state(step.state);
  return j;
}

std::string trajectory_to_jsonl(const Trajectory& trajectory, const DecPomdpModel* model) {
  std::ostringstream out;
  for (const auto& step : trajectory.steps) {
    nlohmann::json j = step_to_json(model, step);
    if (step.t == 0) j["initial_chance"] = chance_to_json(trajectory.initial_chance);
    out << j.dump() << '\n';
  }
  nlohmann::json tail = {{"outcome",
                          {{"agent_score", trajectory.outcome.agent_score},
                           {"opponent_score", trajectory.outcome.opponent_score},
                           {"agents_lose", trajectory.outcome.agents_lose()}}},
                         {"terminal_state", trajectory.terminal_state}};
  out << tail.dump() << '\n';
  return out.str();
}

Trajectory trajectory_from_jsonl(const std::string& text) {
  Trajectory traj;
  std::istringstream in(text);
  std::string line;
  bool saw_outcome = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    if (j.contains("outcome")) {
      traj.outcome.agent_score = j["outcome"].at("agent_score").get<double>();
      traj.outcome.opponent_score = j["outcome"].at("opponent_score").get<double>();
      traj.terminal_state = j.at("terminal_state").get<State>();
      saw_outcome = true;
      continue;
    }
    StepRecord step;
    step.t = j.at("t").get<int>();
    step.state = j.at("state").get<State>();
    step.obs = j.at("obs").get<std::vector<Observation>>();
    step.info = j.at("info").get<std::vector<InfoState>>();
    step.actions = j.at("actions").get<JointAction>();
    step.chance = chance_from_json(j.at("chance"));
    if (j.contains("initial_chance")) traj.initial_chance = chance_from_json(j["initial_chance"]);
    if (step.t != traj.length()) throw ContractViolation("trajectory steps out of order");
    traj.steps.push_back(std::move(step));
  }
  if (!saw_outcome) throw ContractViolation("trajectory has no trailing outcome object");
  return traj;
}

}  // namespace ramcts

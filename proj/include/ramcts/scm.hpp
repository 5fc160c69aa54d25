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

#ifndef RAMCTS_SCM_HPP_
#define RAMCTS_SCM_HPP_

// Finite Dec-POMDPs viewed as Gumbel-Max structural causal models: the model
// contract, exogenous contexts, (counterfactual) rollouts under interventions on
// action variables, and posterior sampling of contexts.

#include <compare>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "ramcts/errors.hpp"
#include "ramcts/rng.hpp"

namespace ramcts {

using ActionId = std::int32_t;
// Compact integer encodings for states, observations and information states.
// Models define the layout; the engine only copies and compares them.
using Code = std::vector<std::int64_t>;
using State = Code;
using Observation = Code;
using InfoState = Code;
using JointAction = std::vector<ActionId>;
using Probabilities = std::vector<double>;

enum class SlotKind : std::uint8_t {
  kInitial = 0,      // draws producing the initial state
  kTransition = 1,   // draws of the transition out of time-step t
  kObservation = 2,  // draws of the observation at time-step t
  kAction = 3,       // an agent's action draw at time-step t
};

// Identifies one stochastic structural-equation instance. `index` is the
// agent for action slots and the sub-draw number otherwise.
struct SlotKey {
  SlotKind kind = SlotKind::kInitial;
  std::int32_t t = 0;
  std::int32_t index = 0;

  std::uint64_t packed() const {
    return (static_cast<std::uint64_t>(kind) << 56) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(t)) << 24) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(index) &
                                      0xffffffu);
  }
  auto operator<=>(const SlotKey&) const = default;
};

// One realized chance draw, as recorded in a trajectory.
struct ChanceOutcome {
  SlotKey slot;
  std::int32_t outcome = 0;
  bool operator==(const ChanceOutcome&) const = default;
};

// Declared stochastic slot with its domain size.
struct SlotSpec {
  SlotKey slot;
  int domain = 0;
};

// Source of categorical draws handed to model functions.
class ChanceSource {
 public:
  virtual ~ChanceSource() = default;
  virtual int draw(const SlotKey& slot, std::span<const double> probabilities) = 0;
};

// Terminal summary from the agents' team point of view.
struct Outcome {
  double agent_score = 0.0;
  double opponent_score = 0.0;

  bool agents_lose() const { return agent_score < opponent_score; }
  bool agents_win() const { return agent_score > opponent_score; }
  double deficit() const { return opponent_score - agent_score; }
  bool operator==(const Outcome&) const = default;
};

struct StepRecord {
  int t = 0;
  State state;
  std::vector<Observation> obs;
  std::vector<InfoState> info;
  JointAction actions;
  // Transition and observation draws made while leaving time-step t.
  std::vector<ChanceOutcome> chance;
  bool operator==(const StepRecord&) const = default;
};

struct Trajectory {
  std::vector<ChanceOutcome> initial_chance;
  std::vector<StepRecord> steps;
  State terminal_state;
  Outcome outcome;

  int length() const { return static_cast<int>(steps.size()); }
  bool operator==(const Trajectory&) const = default;
};

// The model contract. Implementations must be immutable after construction;
// all randomness flows through the ChanceSource argument.
class DecPomdpModel {
 public:
  virtual ~DecPomdpModel() = default;

  virtual std::string name() const = 0;
  virtual int num_agents() const = 0;
  virtual int horizon() const = 0;
  // Size of the enumerated action domain of `agent`.
  virtual int action_domain(int agent) const = 0;

  virtual State initial_state(ChanceSource& chance) const = 0;
  // Next state after the joint action at time-step t.
  virtual State transition(const State& state, const JointAction& actions, int t,
                           ChanceSource& chance) const = 0;
  // Joint observation of `state` at time-step t.
  virtual std::vector<Observation> observe(const State& state, int t,
                                           ChanceSource& chance) const = 0;
  virtual InfoState initial_info(int agent, const Observation& obs) const = 0;
  virtual InfoState info_update(int agent, const InfoState& info, ActionId own_action,
                                const Observation& obs) const = 0;
  // Dense distribution over the agent's action domain.
  virtual Probabilities policy(int agent, const InfoState& info) const = 0;
  virtual std::vector<ActionId> valid_actions(int agent, const InfoState& info) const = 0;
  // Whether the agent takes a real decision at this information state.
  virtual bool decides(int agent, const InfoState& info) const;
  // Ordinal of the agent's current decision within the episode.
  virtual int decision_index(int agent, const InfoState& info) const;
  virtual Outcome outcome(const State& terminal) const = 0;
  // Progress signal in [0, 1]; defaults to q_env_margin.
  virtual double q_env(const Trajectory& factual, const Trajectory& counterfactual) const;
  // Every slot the model may draw from, with its domain size.
  virtual std::vector<SlotSpec> slot_inventory() const = 0;
  // Human-readable rendering used in trajectory dumps.
  virtual nlohmann::json describe_state(const State& state) const;
};

// 1 when the counterfactual outcome is not a loss, otherwise the relative
// reduction of the losing margin floored at 0.
double q_env_margin(const Outcome& factual, const Outcome& counterfactual);

// argmax_j (log p_j + g_j); zero-probability categories never win.
int gumbel_argmax(std::span<const double> probabilities, std::span<const double> noise);

// Exogenous noise of one episode. Gumbel values are generated lazily from a
// keyed counter-based generator; posterior contexts additionally carry
// explicit per-slot vectors that take precedence.
class Context {
 public:
  static constexpr int kAlgorithmVersion = 1;

  explicit Context(std::uint64_t seed = 0) : seed_(seed) {}
  Context(std::uint64_t seed,
          std::unordered_map<std::uint64_t, std::vector<double>> overrides)
      : seed_(seed), overrides_(std::move(overrides)), posterior_(true) {}

  std::uint64_t seed() const { return seed_; }
  bool is_posterior() const { return posterior_; }

  double gumbel(const SlotKey& slot, int category) const;
  std::vector<double> gumbel_vector(const SlotKey& slot, int domain) const;
  // Gumbel-max draw for `slot` restricted to the support of `probabilities`.
  int sample(const SlotKey& slot, std::span<const double> probabilities) const;

  nlohmann::json to_json() const;
  static Context from_json(const nlohmann::json& j);

  bool operator==(const Context&) const = default;

 private:
  std::uint64_t seed_;
  std::unordered_map<std::uint64_t, std::vector<double>> overrides_;
  bool posterior_ = false;
};

Context sample_context(const DecPomdpModel& model, std::uint64_t seed);

// Materialized table of one context over a model's slot inventory.
std::vector<std::pair<SlotSpec, std::vector<double>>> materialize_context(
    const DecPomdpModel& model, const Context& context);

struct Intervention {
  int agent = 0;
  int t = 0;
  ActionId action = 0;
  bool operator==(const Intervention&) const = default;
};

// Interventions kept sorted by (t, agent); keys are unique.
class InterventionSet {
 public:
  InterventionSet() = default;
  InterventionSet(std::initializer_list<Intervention> items);

  void add(const Intervention& x);
  std::optional<ActionId> find(int agent, int t) const;
  bool empty() const { return items_.empty(); }
  int size() const { return static_cast<int>(items_.size()); }
  const Intervention& operator[](int k) const { return items_[k]; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  bool operator==(const InterventionSet&) const = default;

 private:
  std::vector<Intervention> items_;
};

// Counts environment steps against a budget.
class StepCounter {
 public:
  explicit StepCounter(std::int64_t limit = std::numeric_limits<std::int64_t>::max())
      : limit_(limit) {}

  void charge() {
    if (used_ >= limit_) throw BudgetExhausted();
    ++used_;
  }
  std::int64_t used() const { return used_; }
  std::int64_t limit() const { return limit_; }
  bool exhausted() const { return used_ >= limit_; }

 private:
  std::int64_t used_ = 0;
  std::int64_t limit_;
};

struct HistoryLink {
  StepRecord record;
  std::shared_ptr<const HistoryLink> previous;
};

// A partial rollout positioned at time-step t: state, observations and
// information states at t are known, no action at t has been taken yet.
struct Frontier {
  int t = 0;
  State state;
  std::vector<Observation> obs;
  std::vector<InfoState> info;
  // Records of steps before t; only kept when history recording is on.
  std::shared_ptr<const HistoryLink> history;
};

// Frontier at t = 0 (not charged). Initial draws are appended to `chance_log`.
Frontier initial_frontier(const DecPomdpModel& model, const Context& context,
                          std::vector<ChanceOutcome>* chance_log = nullptr);

// Completes time-step frontier.t and moves the frontier to t + 1. Charges one
// step. Fills `record` when given; extends frontier.history when
// `keep_history` is set.
void advance(const DecPomdpModel& model, const Context& context, Frontier& frontier,
             const InterventionSet& interventions, StepCounter& counter,
             StepRecord* record = nullptr, bool keep_history = false);

// Extends a cached prefix to time-step `to_t`, charging only new steps.
Frontier extend(const DecPomdpModel& model, const Context& context, Frontier from,
                const InterventionSet& interventions, int to_t, StepCounter& counter,
                bool keep_history = false);

// Rebuilds a full trajectory from a terminal frontier with recorded history.
Trajectory trajectory_from_history(const DecPomdpModel& model, const Frontier& terminal,
                                   std::vector<ChanceOutcome> initial_chance = {});

Trajectory rollout(const DecPomdpModel& model, const Context& context,
                   const InterventionSet& interventions, StepCounter& counter);
Trajectory rollout(const DecPomdpModel& model, const Context& context,
                   const InterventionSet& interventions = {});

// Frontiers at t = 0..T of the factual episode (not charged).
std::vector<Frontier> factual_frontiers(const DecPomdpModel& model, const Context& context);

// The action `agent` takes at t in the intervened model; interventions at or
// after t have no effect on it.
ActionId default_action(const DecPomdpModel& model, const Context& context,
                        const InterventionSet& interventions, int agent, int t,
                        StepCounter& counter);
ActionId default_action_at(const DecPomdpModel& model, const Context& context,
                           const Frontier& frontier, int agent);

// Alternatives for (agent, t) at a frontier: valid actions minus the default.
std::vector<ActionId> counterfactual_actions(const DecPomdpModel& model,
                                             const Context& context,
                                             const Frontier& frontier, int agent);

// Draws a context from the Gumbel posterior given the observed trajectory.
Context posterior_sample_context(const DecPomdpModel& model, const Trajectory& observed,
                                 std::uint64_t seed);

// Conditional Gumbel vector given that `observed` is the argmax category.
std::vector<double> conditional_gumbels(std::span<const double> probabilities,
                                        int observed, Rng& rng);

nlohmann::json step_to_json(const DecPomdpModel* model, const StepRecord& step);
// JSON Lines: one object per step, then a trailing outcome object.
std::string trajectory_to_jsonl(const Trajectory& trajectory,
                                const DecPomdpModel* model = nullptr);
Trajectory trajectory_from_jsonl(const std::string& text);

}  // namespace ramcts

#endif  // RAMCTS_SCM_HPP_

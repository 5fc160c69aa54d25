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


#ifndef RAMCTS_CAUSALITY_HPP_
#define RAMCTS_CAUSALITY_HPP_

// Events over trajectories, classification of intervention sets as candidate
// cause/witness pairs, CH responsibility degrees, and the minimal collection
// of pairs found so far.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ramcts/scm.hpp"

namespace ramcts {

class Event {
 public:
  enum class Kind {
    kAgentsLose,
    kStateEquals,
    kObservationEquals,
    kInfoEquals,
    kActionEquals,
    kAnd,
    kOr,
    kNot,
  };

  // Time index addressing the terminal state.
  static constexpr int kTerminal = -1;

  static Event agents_lose();
  static Event state_equals(int t, State value);
  static Event observation_equals(int agent, int t, Observation value);
  static Event info_equals(int agent, int t, InfoState value);
  static Event action_equals(int agent, int t, ActionId value);
  static Event all_of(std::vector<Event> children);
  static Event any_of(std::vector<Event> children);
  static Event negate(Event child);

  Kind kind() const { return kind_; }
  // False when evaluation only needs the terminal state and outcome, which
  // lets searchers skip recording counterfactual histories.
  bool needs_steps() const;
  bool holds(const Trajectory& trajectory) const;

  nlohmann::json to_json() const;
  static Event from_json(const nlohmann::json& j);

 private:
  Kind kind_ = Kind::kAgentsLose;
  int agent_ = 0;
  int t_ = 0;
  Code value_;
  std::vector<Event> children_;
};

// The failure event of a losing trajectory. Throws NotAFailure otherwise.
Event outcome_event(const Trajectory& factual);

struct Var {
  int t = 0;
  int agent = 0;
  auto operator<=>(const Var&) const = default;
};
// Sorted by (t, agent), no duplicates.
using VarSet = std::vector<Var>;

VarSet vars_of(const InterventionSet& interventions);
std::string var_set_key(const VarSet& vars);

// Exact rational m / k.
struct Degree {
  std::int32_t num = 0;
  std::int32_t den = 1;

  double value() const { return static_cast<double>(num) / den; }
  std::string str() const;
  friend bool operator==(const Degree& a, const Degree& b) {
    return static_cast<std::int64_t>(a.num) * b.den ==
           static_cast<std::int64_t>(b.num) * a.den;
  }
  friend std::strong_ordering operator<=>(const Degree& a, const Degree& b) {
    return static_cast<std::int64_t>(a.num) * b.den <=>
           static_cast<std::int64_t>(b.num) * a.den;
  }
};

struct CauseEntry {
  int agent = 0;
  int t = 0;
  ActionId factual = 0;
  ActionId counterfactual = 0;
  bool operator==(const CauseEntry&) const = default;
};

struct WitnessEntry {
  int agent = 0;
  int t = 0;
  ActionId witness = 0;
  bool operator==(const WitnessEntry&) const = default;
};

struct CandidatePair {
  InterventionSet interventions;
  std::vector<CauseEntry> cause;
  std::vector<WitnessEntry> witness;
  // Cause variables per agent.
  std::vector<int> counts;

  int size() const { return interventions.size(); }
  VarSet vars() const { return vars_of(interventions); }
  bool operator==(const CandidatePair&) const = default;
};

std::vector<Degree> degree_vector(const CandidatePair& pair, int num_agents);
nlohmann::json pair_to_json(const CandidatePair& pair, int num_agents);

// Partitions X given the counterfactual information states at its slots
// (aligned with X's order). Slots whose information state is unchanged form
// the cause; the rest are witnesses. Returns nothing when the event still
// holds or the cause would be empty.
std::optional<CandidatePair> classify_counterfactual(
    const Trajectory& factual, const InterventionSet& interventions,
    const std::vector<InfoState>& counterfactual_infos, bool event_holds, int num_agents);

struct Classification {
  std::optional<CandidatePair> pair;
  Trajectory counterfactual;
};

// Full counterfactual rollout followed by classify_counterfactual.
Classification classify(const DecPomdpModel& model, const Context& context,
                        const Trajectory& factual, const InterventionSet& interventions,
                        const Event& event, StepCounter& counter);

// Pairs found so far, kept minimal under strict-superset removal of their
// variable sets. Pairs sharing a variable set coexist.
class FoundSet {
 public:
  // False when the pair is rejected as a strict superset of a stored set.
  bool insert(CandidatePair pair);
  // Whether `vars` strictly contains the variable set of a stored pair.
  bool dominated(const VarSet& vars) const;
  bool contains_vars(const VarSet& vars) const;

  int num_pairs() const;
  int num_var_sets() const { return static_cast<int>(groups_.size()); }
  bool empty() const { return groups_.empty(); }
  std::vector<CandidatePair> pairs() const;
  std::vector<VarSet> var_sets() const;

  using Groups = std::map<std::string, std::pair<VarSet, std::vector<CandidatePair>>>;
  const Groups& groups() const { return groups_; }

 private:
  Groups groups_;
};

struct ResponsibilityAssignment {
  std::vector<Degree> degrees;
  // Pair attaining each agent's maximum, if any pair names the agent.
  std::vector<std::optional<CandidatePair>> provenance;

  std::vector<double> values() const;
  bool same_degrees(const ResponsibilityAssignment& other) const {
    return degrees == other.degrees;
  }
  nlohmann::json to_json() const;
};

ResponsibilityAssignment assignment(const FoundSet& found, int num_agents);

}  // namespace ramcts

#endif  // RAMCTS_CAUSALITY_HPP_

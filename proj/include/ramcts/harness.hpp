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


#ifndef RAMCTS_HARNESS_HPP_
#define RAMCTS_HARNESS_HPP_

// Experiment orchestration: losing-trajectory generation, poisoned
// lower-bound instances, references, error metrics, performance profiles and
// their CSV/SVG renderings.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ramcts/baselines.hpp"
#include "ramcts/causality.hpp"
#include "ramcts/envs.hpp"
#include "ramcts/ra_mcts.hpp"
#include "ramcts/scm.hpp"

namespace ramcts {

enum class Mode { kKnownContext, kUnknownContext, kLowerBound };

std::string mode_name(Mode mode);
std::optional<Mode> parse_mode(const std::string& text);

namespace seed_tags {
inline constexpr std::uint64_t kTrajectory = 0x7472616a;
inline constexpr std::uint64_t kPoison = 0x706f6973;
inline constexpr std::uint64_t kRun = 0x72756e73;
}  // namespace seed_tags

struct ExperimentConfig {
  GameConfig game;
  int trajectories = 50;
  int runs = 10;
  std::vector<Method> methods = {Method::kRaMcts, Method::kRandom};
  std::int64_t budget = 100000;
  std::vector<double> thresholds = {0.0, 0.1, 0.2};
  int samples = 10;
  Mode mode = Mode::kKnownContext;
  std::string out = "out";
  std::uint64_t seed = 0;
  int max_size = 4;
  int jobs = 1;

  nlohmann::json to_json() const;
  // Fields missing from `j` keep their current values.
  void update_from_json(const nlohmann::json& j);
  void check() const;
};

// A factual episode to explain plus what is needed to rebuild its setting.
struct Instance {
  int id = 0;
  Trajectory trajectory;
  std::uint64_t context_seed = 0;
  // Lower-bound instances: poisoned (agent, decision ordinal) pairs and the
  // (t, agent) slots they occupy in the trajectory.
  std::vector<std::pair<int, int>> poisoned_ordinals;
  VarSet poisoned_slots;
};

std::vector<Instance> generate_losing_trajectories(const DecPomdpModel& model, int count,
                                                   std::uint64_t master_seed,
                                                   std::int64_t max_attempts = 1000000);

// Agents' policies with chosen decisions poisoned: the original choice gets
// probability 0 and the other valid actions share the mass uniformly.
class PoisonedModel : public DecPomdpModel {
 public:
  PoisonedModel(std::shared_ptr<const DecPomdpModel> base,
                std::vector<std::pair<int, int>> poisoned_ordinals);

  std::string name() const override { return base_->name() + "+poisoned"; }
  int num_agents() const override { return base_->num_agents(); }
  int horizon() const override { return base_->horizon(); }
  int action_domain(int agent) const override { return base_->action_domain(agent); }
  State initial_state(ChanceSource& chance) const override {
    return base_->initial_state(chance);
  }
  State transition(const State& state, const JointAction& actions, int t,
                   ChanceSource& chance) const override {
    return base_->transition(state, actions, t, chance);
  }
  std::vector<Observation> observe(const State& state, int t,
                                   ChanceSource& chance) const override {
    return base_->observe(state, t, chance);
  }
  InfoState initial_info(int agent, const Observation& obs) const override {
    return base_->initial_info(agent, obs);
  }
  InfoState info_update(int agent, const InfoState& info, ActionId own_action,
                        const Observation& obs) const override {
    return base_->info_update(agent, info, own_action, obs);
  }
  Probabilities policy(int agent, const InfoState& info) const override;
  std::vector<ActionId> valid_actions(int agent, const InfoState& info) const override {
    return base_->valid_actions(agent, info);
  }
  bool decides(int agent, const InfoState& info) const override {
    return base_->decides(agent, info);
  }
  int decision_index(int agent, const InfoState& info) const override {
    return base_->decision_index(agent, info);
  }
  Outcome outcome(const State& terminal) const override { return base_->outcome(terminal); }
  double q_env(const Trajectory& factual, const Trajectory& counterfactual) const override {
    return base_->q_env(factual, counterfactual);
  }
  std::vector<SlotSpec> slot_inventory() const override { return base_->slot_inventory(); }
  nlohmann::json describe_state(const State& state) const override {
    return base_->describe_state(state);
  }

  const DecPomdpModel& base() const { return *base_; }
  bool poisoned(int agent, int ordinal) const;
  const std::vector<std::pair<int, int>>& poisoned_ordinals() const { return ordinals_; }

 private:
  std::shared_ptr<const DecPomdpModel> base_;
  std::vector<std::pair<int, int>> ordinals_;
  std::set<std::pair<int, int>> lookup_;
};

struct PoisonedInstance {
  Instance instance;
  std::shared_ptr<PoisonedModel> model;
  // The same context under the original policies.
  Trajectory clean_replay;
  std::int64_t attempts = 0;
};

// Picks `per_agent` poisonable decisions per agent, then searches contexts
// whose clean episode is a strict win and whose poisoned replay is a loss.
PoisonedInstance poison_and_generate(std::shared_ptr<const DecPomdpModel> base,
                                     std::uint64_t master_seed, int per_agent = 5,
                                     std::int64_t max_attempts = 100000);

// Exhaustive brute force (all sets up to max_size), or restricted to the
// poisoned slots in lower-bound mode.
ResponsibilityAssignment exact_reference(const DecPomdpModel& model, const Context& context,
                                         const Trajectory& factual, Mode mode,
                                         const VarSet& poisoned_slots = {}, int max_size = 4);

// max_i |found_i - ref_i| in exact modes, max_i max(0, ref_i - found_i) in
// lower-bound mode. Snapped to a 1e-12 grid to drop rounding residue.
double epsilon_metric(const std::vector<double>& found, const std::vector<double>& reference,
                      Mode mode);

std::vector<std::int64_t> step_grid(std::int64_t budget, std::int64_t start = 1000,
                                    double factor = 1.3);

// One method run on one instance. In unknown-context mode it holds one trace
// per posterior sample and its value is their average.
struct RunRecord {
  int trajectory_id = 0;
  Method method = Method::kRaMcts;
  std::uint64_t seed = 0;
  std::vector<StepTrace> traces;
  std::vector<double> reference;
  std::int64_t steps = 0;

  std::vector<double> degrees_at(std::int64_t steps) const;
  double epsilon_at(std::int64_t steps, Mode mode) const;
};

// Runs every configured method on one instance (all runs), sharing the
// reference. `model` must be the model that produced the instance.
std::vector<RunRecord> run_instance(const DecPomdpModel& model, const Instance& instance,
                                    const ExperimentConfig& config,
                                    const std::vector<double>& reference);

struct ProfilePoint {
  std::string method;
  double threshold = 0.0;
  std::int64_t steps = 0;
  double fraction = 0.0;
  double stddev = 0.0;
  // First grid point at which every run of the method is within the threshold.
  bool converged_here = false;
};

std::vector<ProfilePoint> performance_profile(const std::vector<RunRecord>& records,
                                              const std::vector<double>& thresholds,
                                              const std::vector<std::int64_t>& grid,
                                              Mode mode);

// Profile from the rows of a runs CSV (the form the CLI works from).
struct RunRow {
  int trajectory_id = 0;
  std::string method;
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  double eps = 0.0;
  std::vector<double> degrees;
};

std::string runs_csv(const std::vector<RunRecord>& records,
                     const std::vector<std::int64_t>& grid, Mode mode, int num_agents);
std::vector<RunRow> parse_runs_csv(const std::string& text);
std::vector<ProfilePoint> profile_from_rows(const std::vector<RunRow>& rows,
                                            const std::vector<double>& thresholds);
std::string profile_csv(const std::vector<ProfilePoint>& profile);
std::vector<ProfilePoint> parse_profile_csv(const std::string& text);
// One chart for one threshold: a line per method with a +-1 s.d. band and a
// marker where the method first converges.
std::string profile_svg(const std::vector<ProfilePoint>& profile, double threshold,
                        const std::string& title);

// Runs `jobs(i)` for i in [0, count) on up to `workers` threads.
void parallel_for(int count, int workers, const std::function<void(int)>& job);

}  // namespace ramcts

#endif  // RAMCTS_HARNESS_HPP_

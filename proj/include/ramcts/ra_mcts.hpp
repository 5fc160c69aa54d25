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


#ifndef RAMCTS_RA_MCTS_HPP_
#define RAMCTS_RA_MCTS_HPP_

// Responsibility-attribution MCTS over the intervention tree: scalarized UCB1
// selection with a rotating weight schedule, whole-path expansion, vector
// valued leaf scores, and erasure of subtrees found to be non-minimal.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ramcts/causality.hpp"
#include "ramcts/rng.hpp"
#include "ramcts/scm.hpp"
#include "ramcts/search_tree.hpp"

namespace ramcts {

// Tags for derive_seed; each kind of job gets its own stream.
namespace seed_tags {
inline constexpr std::uint64_t kPosterior = 0x706f7374;
inline constexpr std::uint64_t kSampleSearch = 0x73726368;
}  // namespace seed_tags

struct TracePoint {
  std::int64_t steps = 0;
  std::vector<Degree> degrees;
};

// Assignment as a step function of environment steps used. A point (s, d)
// means the assignment is d from s steps on.
class StepTrace {
 public:
  StepTrace() = default;
  explicit StepTrace(int num_agents);

  // Appends a point when the degrees differ from the last one.
  void record(std::int64_t steps, const std::vector<Degree>& degrees);
  void finish(std::int64_t steps) { final_steps_ = steps; }

  std::vector<Degree> at(std::int64_t steps) const;
  const std::vector<TracePoint>& points() const { return points_; }
  std::int64_t final_steps() const { return final_steps_; }
  // steps,agent0_degree,... at every multiple of `every` plus the final count.
  std::string to_csv(std::int64_t every = 1000) const;

 private:
  std::vector<TracePoint> points_;
  std::int64_t final_steps_ = 0;
};

struct SearchResult {
  ResponsibilityAssignment assignment;
  FoundSet found;
  StepTrace trace;
  std::int64_t steps = 0;
  std::int64_t iterations = 0;
  // Every intervention set was accounted for, so the assignment is exact.
  bool complete = false;
};

struct MctsParams {
  double exploration = 2.0;
  double scalarization = 0.5;
  int max_size = 4;
  std::int64_t budget = 100000;
  std::uint64_t seed = 0;
  // Keep a per-iteration log (paths and scores) for inspection.
  bool record_log = false;
};

// b_{n} = B for the environment signal, b_{k mod n} = 1 - B, zeros elsewhere.
std::vector<double> weight_schedule(std::int64_t k, int num_agents, double scalarization);
double scalarize(std::span<const double> q, std::span<const double> weights);

// Unvisited live children first (uniformly); otherwise the UCB maximizer with
// uniform tie-breaking.
int select_child(const SearchTree& tree, int parent, std::span<const double> weights,
                 double exploration, Rng& rng);

struct LogEntry {
  enum class Kind { kVisit, kErase };
  Kind kind = Kind::kVisit;
  // kVisit: root-to-leaf path; kErase: the erased Agent node.
  std::vector<int> path;
  std::vector<std::int64_t> score;
};

class RaMcts {
 public:
  RaMcts(const DecPomdpModel& model, const Context& context, const Trajectory& factual,
         const Event& event, const MctsParams& params);

  // One selection/expansion/evaluation/backpropagation cycle. Returns false
  // once the root is pruned. BudgetExhausted propagates with the tree intact.
  bool iterate(StepCounter& counter);
  SearchResult run();

  const SearchTree& tree() const { return tree_; }
  const FoundSet& found() const { return found_; }
  const std::vector<LogEntry>& log() const { return log_; }
  std::int64_t iterations() const { return iteration_; }
  // Scores in [0, 1] of the most recently evaluated leaf.
  const std::vector<double>& last_score() const { return last_score_; }

 private:
  void add_to_path(const std::vector<int>& path, const std::vector<std::int64_t>& score);
  void erase(int agent_node);
  void refresh(std::int64_t steps);

  const DecPomdpModel& model_;
  MctsParams params_;
  SearchTree tree_;
  FoundSet found_;
  Rng rng_;
  std::int64_t iteration_ = 0;
  StepTrace trace_;
  std::vector<LogEntry> log_;
  std::vector<double> last_score_;
};

// Known-context search of a losing trajectory.
SearchResult ra_mcts_search(const DecPomdpModel& model, const Context& context,
                            const Trajectory& factual, const MctsParams& params);

struct UncertaintyResult {
  std::vector<double> mean;
  // Exact rational means.
  std::vector<Degree> mean_exact;
  std::vector<SearchResult> samples;
};

// Averages per-sample searches over contexts drawn from the posterior given
// the observed trajectory. Each sample gets the full budget.
UncertaintyResult estimate_under_uncertainty(const DecPomdpModel& model,
                                             const Trajectory& observed, int num_samples,
                                             const MctsParams& params);

// Mean of per-sample assignments as exact rationals.
std::vector<Degree> mean_degrees(const std::vector<std::vector<Degree>>& samples);

}  // namespace ramcts

#endif  // RAMCTS_RA_MCTS_HPP_

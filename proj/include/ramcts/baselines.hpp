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


#ifndef RAMCTS_BASELINES_HPP_
#define RAMCTS_BASELINES_HPP_

// Reference searchers sharing the classification and found-set machinery:
// random sampling of intervention sets, brute force over the decision tree
// (full re-simulation per set), and brute force over the search tree with
// cached prefixes, optionally with pruning.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ramcts/causality.hpp"
#include "ramcts/ra_mcts.hpp"
#include "ramcts/scm.hpp"

namespace ramcts {

enum class Method { kRaMcts, kRandom, kBfDt, kBfSt, kBfStPrun };

std::string method_name(Method method);
std::optional<Method> parse_method(const std::string& name);
std::vector<std::string> method_names();

struct BaselineParams {
  int max_size = 4;
  std::int64_t budget = 100000;
  std::uint64_t seed = 0;
  // Brute force over the decision tree only: restricts every intervention to
  // these slots.
  std::optional<VarSet> allowed_slots;
};

// Samples a size k uniformly in 1..max_size and k distinct (agent, decision
// ordinal) slots, then replaces each reached slot by a uniform alternative
// to its default in the partially intervened episode. One full rollout each.
SearchResult random_search(const DecPomdpModel& model, const Context& context,
                           const Trajectory& factual, const BaselineParams& params);

// Depth-first enumeration in lexicographic (t, agent, action) order with a
// full rollout from t = 0 for every set.
SearchResult bf_dt(const DecPomdpModel& model, const Context& context,
                   const Trajectory& factual, const BaselineParams& params);

// Depth-first traversal of the search tree; `prune` enables the pruning rules.
SearchResult bf_st(const DecPomdpModel& model, const Context& context,
                   const Trajectory& factual, const BaselineParams& params, bool prune);

// Uniform entry point; RA-MCTS uses the default exploration and scalarization.
SearchResult run_method(Method method, const DecPomdpModel& model, const Context& context,
                        const Trajectory& factual, std::int64_t budget, std::uint64_t seed,
                        int max_size = 4);

}  // namespace ramcts

#endif  // RAMCTS_BASELINES_HPP_

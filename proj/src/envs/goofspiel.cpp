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

#include <bit>

#include "ramcts/envs.hpp"

namespace ramcts {
namespace {

// Scores are kept in half points so split prizes stay integral.
int lowest_value(std::uint64_t hand) { return std::countr_zero(hand) + 1; }
int highest_value(std::uint64_t hand) { return 64 - std::countl_zero(hand); }

bool holds(std::uint64_t hand, int value) { return (hand >> (value - 1)) & 1u; }

}  // namespace

Code GoofspielInfo::encode() const {
  return {static_cast<std::int64_t>(hand), prize, agent_score, opponent_score};
}

GoofspielInfo GoofspielInfo::decode(const Code& code) {
  if (code.size() != 4) throw ContractViolation("goofspiel info state has 4 fields");
  GoofspielInfo v;
  v.hand = static_cast<std::uint64_t>(code[0]);
  v.prize = static_cast<int>(code[1]);
  v.agent_score = static_cast<int>(code[2]);
  v.opponent_score = static_cast<int>(code[3]);
  return v;
}

GoofspielModel::GoofspielModel(const GameConfig& config)
    : config_(config), hand_size_(config.hand_size) {
  validate(config);
  if (config.kind != GameKind::kGoofspiel) throw ContractViolation("not a goofspiel config");
}

std::string GoofspielModel::name() const {
  return "TeamGoofspiel(" + std::to_string(hand_size_) + ")";
}

State GoofspielModel::initial_state(ChanceSource& chance) const {
  const std::uint64_t full = (std::uint64_t{1} << hand_size_) - 1;
  State s(kPrizes + hand_size_, 0);
  for (int seat = 0; seat < 4; ++seat) s[kHands + seat] = static_cast<std::int64_t>(full);
  std::uint64_t remaining = full;
  Probabilities p(hand_size_);
  for (int j = 0; j < hand_size_; ++j) {
    const double share = 1.0 / std::popcount(remaining);
    for (int v = 0; v < hand_size_; ++v) p[v] = ((remaining >> v) & 1u) ? share : 0.0;
    const int pick = chance.draw({SlotKind::kInitial, 0, j}, p);
    remaining &= ~(std::uint64_t{1} << pick);
    s[kPrizes + j] = pick + 1;
  }
  return s;
}

int GoofspielModel::agent_card(int agent, const GoofspielInfo& view) const {
  if (view.hand == 0) throw ContractViolation("goofspiel: empty hand");
  if (agent == 0) {
    if (holds(view.hand, view.prize)) return view.prize;
    return view.agent_score >= view.opponent_score ? lowest_value(view.hand)
                                                   : highest_value(view.hand);
  }
  int sum = 0;
  int count = 0;
  for (int v = 1; v <= hand_size_; ++v) {
    if (holds(view.hand, v)) {
      sum += v;
      ++count;
    }
  }
  // prize >= mean, compared without division.
  return view.prize * count >= sum ? highest_value(view.hand) : lowest_value(view.hand);
}

int GoofspielModel::opponent_preferred_card(std::uint64_t hand, bool team_leading) const {
  return team_leading ? lowest_value(hand) : highest_value(hand);
}

Probabilities GoofspielModel::opponent_distribution(std::uint64_t hand,
                                                    bool team_leading) const {
  Probabilities p(hand_size_, 0.0);
  const int chosen = opponent_preferred_card(hand, team_leading);
  if (config_.deterministic_opponents) {
    p[chosen - 1] = 1.0;
    return p;
  }
  const double spread = 0.2 / std::popcount(hand);
  for (int v = 1; v <= hand_size_; ++v) {
    if (holds(hand, v)) p[v - 1] = spread + (v == chosen ? 0.8 : 0.0);
  }
  return p;
}

State GoofspielModel::transition(const State& state, const JointAction& actions, int t,
                                 ChanceSource& chance) const {
  if (t < 0 || t >= hand_size_) throw ContractViolation("goofspiel: time-step out of range");
  State s = state;
  const bool opponents_lead = s[kOpponentScore] > s[kAgentScore];
  std::array<int, 4> played{};
  for (int agent = 0; agent < 2; ++agent) {
    const int value = actions.at(agent) + 1;
    const auto hand = static_cast<std::uint64_t>(s[kHands + 2 * agent]);
    if (value < 1 || value > hand_size_ || !holds(hand, value)) {
      throw ContractViolation("goofspiel: agent plays a card it does not hold");
    }
    played[2 * agent] = value;
  }
  for (int k = 0; k < 2; ++k) {
    const int seat = 2 * k + 1;
    const auto hand = static_cast<std::uint64_t>(s[kHands + seat]);
    played[seat] =
        chance.draw({SlotKind::kTransition, t, k}, opponent_distribution(hand, opponents_lead)) +
        1;
  }
  for (int seat = 0; seat < 4; ++seat) {
    s[kHands + seat] &= ~(std::int64_t{1} << (played[seat] - 1));
  }
  const std::int64_t prize = s[kPrizes + t];
  const int ours = played[0] + played[2];
  const int theirs = played[1] + played[3];
  if (ours > theirs) {
    s[kAgentScore] += 2 * prize;
  } else if (theirs > ours) {
    s[kOpponentScore] += 2 * prize;
  } else if (!config_.discard_tied_prizes) {
    s[kAgentScore] += prize;
    s[kOpponentScore] += prize;
  }
  return s;
}

std::vector<Observation> GoofspielModel::observe(const State& state, int t,
                                                 ChanceSource&) const {
  std::vector<Observation> obs;
  for (int agent = 0; agent < 2; ++agent) {
    GoofspielInfo v;
    v.hand = static_cast<std::uint64_t>(state[kHands + 2 * agent]);
    v.prize = t < hand_size_ ? static_cast<int>(state[kPrizes + t]) : 0;
    v.agent_score = static_cast<int>(state[kAgentScore]);
    v.opponent_score = static_cast<int>(state[kOpponentScore]);
    obs.push_back(v.encode());
  }
  return obs;
}

InfoState GoofspielModel::initial_info(int, const Observation& obs) const { return obs; }

InfoState GoofspielModel::info_update(int, const InfoState&, ActionId,
                                      const Observation& obs) const {
  return obs;
}

Probabilities GoofspielModel::policy(int agent, const InfoState& info) const {
  Probabilities p(hand_size_, 0.0);
  p[agent_card(agent, GoofspielInfo::decode(info)) - 1] = 1.0;
  return p;
}

std::vector<ActionId> GoofspielModel::valid_actions(int, const InfoState& info) const {
  std::vector<ActionId> out;
  const auto hand = GoofspielInfo::decode(info).hand;
  for (int v = 1; v <= hand_size_; ++v) {
    if (holds(hand, v)) out.push_back(v - 1);
  }
  return out;
}

int GoofspielModel::decision_index(int, const InfoState& info) const {
  return hand_size_ - std::popcount(GoofspielInfo::decode(info).hand);
}

Outcome GoofspielModel::outcome(const State& terminal) const {
  return {terminal[kAgentScore] / 2.0, terminal[kOpponentScore] / 2.0};
}

std::vector<SlotSpec> GoofspielModel::slot_inventory() const {
  std::vector<SlotSpec> out;
  for (int j = 0; j < hand_size_; ++j) out.push_back({{SlotKind::kInitial, 0, j}, hand_size_});
  for (int t = 0; t < hand_size_; ++t) {
    for (int k = 0; k < 2; ++k) out.push_back({{SlotKind::kTransition, t, k}, hand_size_});
    for (int i = 0; i < 2; ++i) out.push_back({{SlotKind::kAction, t, i}, hand_size_});
  }
  return out;
}

nlohmann::json GoofspielModel::describe_state(const State& state) const {
  auto hands = nlohmann::json::array();
  for (int seat = 0; seat < 4; ++seat) {
    std::vector<int> values;
    const auto hand = static_cast<std::uint64_t>(state[kHands + seat]);
    for (int v = 1; v <= hand_size_; ++v) {
      if (holds(hand, v)) values.push_back(v);
    }
    hands.push_back(values);
  }
  std::vector<std::int64_t> prizes(state.begin() + kPrizes, state.end());
  return {{"agent_score", state[kAgentScore] / 2.0},
          {"opponent_score", state[kOpponentScore] / 2.0},
          {"hands", hands},
          {"prizes", prizes}};
}

}  // namespace ramcts

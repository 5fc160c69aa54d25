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

#include <algorithm>
#include <bit>

#include "ramcts/envs.hpp"

namespace ramcts {
namespace {

// Encoded information-state positions read on hot paths.
constexpr int kInfoToPlay = 6;
constexpr int kInfoHand = 7;
constexpr int kInfoSeat = 8;

constexpr const char* kSuitLetters = "CDHS";

int played_count(const std::array<int, 4>& trick) {
  return static_cast<int>(std::count_if(trick.begin(), trick.end(), [](int c) { return c >= 0; }));
}

}  // namespace

Code TrickInfo::encode() const {
  return {trump,   lead,
          trick[0], trick[1], trick[2], trick[3],
          to_play, static_cast<std::int64_t>(hand), seat,
          agent_tricks, opponent_tricks,
          bids[0], bids[1], bids[2], bids[3],
          spades_broken ? 1 : 0};
}

TrickInfo TrickInfo::decode(const Code& code) {
  if (code.size() != 16) throw ContractViolation("trick-game info state has 16 fields");
  TrickInfo v;
  v.trump = static_cast<int>(code[0]);
  v.lead = static_cast<int>(code[1]);
  for (int s = 0; s < 4; ++s) v.trick[s] = static_cast<int>(code[2 + s]);
  v.to_play = static_cast<int>(code[kInfoToPlay]);
  v.hand = static_cast<std::uint64_t>(code[kInfoHand]);
  v.seat = static_cast<int>(code[kInfoSeat]);
  v.agent_tricks = static_cast<int>(code[9]);
  v.opponent_tricks = static_cast<int>(code[10]);
  for (int s = 0; s < 4; ++s) v.bids[s] = static_cast<int>(code[11 + s]);
  v.spades_broken = code[15] != 0;
  return v;
}

Code TrickState::encode() const {
  return {trump,    leader,   to_play,  lead,
          trick[0], trick[1], trick[2], trick[3],
          static_cast<std::int64_t>(hands[0]), static_cast<std::int64_t>(hands[1]),
          static_cast<std::int64_t>(hands[2]), static_cast<std::int64_t>(hands[3]),
          agent_tricks, opponent_tricks,
          bids[0], bids[1], bids[2], bids[3],
          spades_broken ? 1 : 0};
}

TrickState TrickState::decode(const Code& code) {
  if (code.size() != 19) throw ContractViolation("trick-game state has 19 fields");
  TrickState s;
  s.trump = static_cast<int>(code[0]);
  s.leader = static_cast<int>(code[1]);
  s.to_play = static_cast<int>(code[2]);
  s.lead = static_cast<int>(code[3]);
  for (int k = 0; k < 4; ++k) {
    s.trick[k] = static_cast<int>(code[4 + k]);
    s.hands[k] = static_cast<std::uint64_t>(code[8 + k]);
    s.bids[k] = static_cast<int>(code[14 + k]);
  }
  s.agent_tricks = static_cast<int>(code[12]);
  s.opponent_tricks = static_cast<int>(code[13]);
  s.spades_broken = code[18] != 0;
  return s;
}

TrickGameModel::TrickGameModel(const GameConfig& config)
    : config_(config), hand_size_(config.hand_size) {
  validate(config);
  if (config.kind == GameKind::kGoofspiel) throw ContractViolation("not a trick-game config");
}

std::string TrickGameModel::name() const {
  return std::string(is_spades() ? "Spades(" : "Euchre(") + std::to_string(hand_size_) + ")";
}

int TrickGameModel::effective_suit(int card, int trump) const {
  const int suit = cards::suit(card);
  if (config_.bowers && trump >= 0 && cards::rank(card) == cards::kJack && suit == 3 - trump) {
    return trump;
  }
  return suit;
}

int TrickGameModel::strength(int card, int trump, int lead) const {
  int r = cards::rank(card);
  if (config_.bowers && r == cards::kJack) {
    if (cards::suit(card) == trump) r = 14;
    else if (cards::suit(card) == 3 - trump) r = 13;
  }
  const int suit = effective_suit(card, trump);
  const int category = suit == trump ? 2 : (suit == lead ? 1 : 0);
  return category * 20 + r;
}

int TrickGameModel::order_key(int card, int trump, int lead) const {
  return strength(card, trump, lead) * 4 + cards::suit(card);
}

int TrickGameModel::lowest(const std::vector<int>& list, int trump, int lead) const {
  return *std::min_element(list.begin(), list.end(), [&](int a, int b) {
    return order_key(a, trump, lead) < order_key(b, trump, lead);
  });
}

int TrickGameModel::highest(const std::vector<int>& list, int trump, int lead) const {
  return *std::max_element(list.begin(), list.end(), [&](int a, int b) {
    return order_key(a, trump, lead) < order_key(b, trump, lead);
  });
}

std::vector<int> TrickGameModel::legal_cards(std::uint64_t hand, int lead, int trump,
                                             bool spades_broken) const {
  std::vector<int> all = cards::cards_of(hand);
  std::vector<int> subset;
  if (lead >= 0) {
    for (int c : all) {
      if (effective_suit(c, trump) == lead) subset.push_back(c);
    }
  } else if (is_spades() && !spades_broken) {
    for (int c : all) {
      if (cards::suit(c) != cards::kSpades) subset.push_back(c);
    }
  }
  return subset.empty() ? all : subset;
}

int TrickGameModel::trick_winner(const std::array<int, 4>& trick, int trump, int lead) const {
  int winner = -1;
  int best = -1;
  for (int seat = 0; seat < 4; ++seat) {
    if (trick[seat] < 0) continue;
    const int s = strength(trick[seat], trump, lead);
    if (s > best) {
      best = s;
      winner = seat;
    }
  }
  return winner;
}

std::vector<int> TrickGameModel::winning_cards(const TrickInfo& view,
                                               const std::vector<int>& legal) const {
  const int winner = trick_winner(view.trick, view.trump, view.lead);
  const int best = winner < 0 ? -1 : strength(view.trick[winner], view.trump, view.lead);
  std::vector<int> out;
  for (int c : legal) {
    if (strength(c, view.trump, view.lead) > best) out.push_back(c);
  }
  return out;
}

int TrickGameModel::agent_card(int agent, const TrickInfo& view) const {
  const auto legal = legal_cards(view.hand, view.lead, view.trump, view.spades_broken);
  if (legal.empty()) throw ContractViolation("trick game: empty hand");
  const int position = played_count(view.trick);
  if (position == 0) {
    if (agent == 0) return lowest(legal, view.trump, -1);
    std::vector<int> plain;
    for (int c : legal) {
      if (effective_suit(c, view.trump) != view.trump) plain.push_back(c);
    }
    return highest(plain.empty() ? legal : plain, view.trump, -1);
  }
  const auto winning = winning_cards(view, legal);
  if (position == 3) {
    return winning.empty() ? lowest(legal, view.trump, view.lead)
                           : lowest(winning, view.trump, view.lead);
  }
  const int teammate = (view.seat + 2) % 4;
  if (winning.empty() || trick_winner(view.trick, view.trump, view.lead) == teammate) {
    return lowest(legal, view.trump, view.lead);
  }
  return agent == 0 ? lowest(winning, view.trump, view.lead)
                    : highest(winning, view.trump, view.lead);
}

int TrickGameModel::opponent_preferred_card(const TrickInfo& view) const {
  const auto legal = legal_cards(view.hand, view.lead, view.trump, view.spades_broken);
  if (legal.empty()) throw ContractViolation("trick game: empty hand");
  const int position = played_count(view.trick);
  if (position == 0) return lowest(legal, view.trump, -1);
  const int teammate = (view.seat + 2) % 4;
  if (position == 3 && trick_winner(view.trick, view.trump, view.lead) == teammate) {
    return lowest(legal, view.trump, view.lead);
  }
  const auto winning = winning_cards(view, legal);
  return winning.empty() ? lowest(legal, view.trump, view.lead)
                         : lowest(winning, view.trump, view.lead);
}

Probabilities TrickGameModel::opponent_distribution(const TrickInfo& view) const {
  Probabilities p(cards::kDeckSize, 0.0);
  const auto legal = legal_cards(view.hand, view.lead, view.trump, view.spades_broken);
  const bool leading = played_count(view.trick) == 0;
  if (leading && !config_.deterministic_opponents) {
    for (int c : legal) p[c] = 1.0 / static_cast<double>(legal.size());
    return p;
  }
  const int chosen = opponent_preferred_card(view);
  if (legal.size() == 1 || config_.deterministic_opponents) {
    p[chosen] = 1.0;
    return p;
  }
  const double rest = 0.2 / static_cast<double>(legal.size() - 1);
  for (int c : legal) p[c] = c == chosen ? 0.8 : rest;
  return p;
}

int TrickGameModel::spades_bid(std::uint64_t hand, int hand_size) {
  int whole = 0;
  int low_spades = 0;
  for (int c : cards::cards_of(hand)) {
    const int r = cards::rank(c);
    if (r == cards::kKing || r == cards::kAce) ++whole;
    if (cards::suit(c) == cards::kSpades) {
      if (r == cards::kJack || r == cards::kQueen) ++whole;
      if (r < cards::kJack) ++low_spades;
    }
  }
  // whole + low / (H / 3), rounded half up in integer arithmetic.
  const int numerator = whole * hand_size + 3 * low_spades;
  const int bid = (2 * numerator + hand_size) / (2 * hand_size);
  return std::clamp(bid, 0, hand_size);
}

int TrickGameModel::spades_score(int tricks, int bid) {
  if (tricks < bid) return -10 * bid;
  const int bags = tricks - bid;
  return 10 * bid + bags - (bags >= 10 ? 100 : 0);
}

State TrickGameModel::initial_state(ChanceSource& chance) const {
  TrickState s;
  const int dealt = 4 * hand_size_;
  std::uint64_t undealt = (std::uint64_t{1} << cards::kDeckSize) - 1;
  Probabilities p(cards::kDeckSize);
  for (int j = 0; j < dealt; ++j) {
    const double share = 1.0 / std::popcount(undealt);
    for (int c = 0; c < cards::kDeckSize; ++c) p[c] = ((undealt >> c) & 1u) ? share : 0.0;
    const int card = chance.draw({SlotKind::kInitial, 0, j}, p);
    undealt &= ~(std::uint64_t{1} << card);
    s.hands[j % 4] |= std::uint64_t{1} << card;
  }
  const Probabilities quarter(4, 0.25);
  s.trump = is_spades() ? cards::kSpades : chance.draw({SlotKind::kInitial, 0, dealt}, quarter);
  s.leader = chance.draw({SlotKind::kInitial, 0, dealt + 1}, quarter);
  s.to_play = s.leader;
  if (is_spades()) {
    for (int seat = 0; seat < 4; ++seat) s.bids[seat] = spades_bid(s.hands[seat], hand_size_);
  }
  return s.encode();
}

TrickInfo TrickGameModel::view_of(const TrickState& s, int seat) const {
  TrickInfo v;
  v.trump = s.trump;
  v.lead = s.lead;
  v.trick = s.trick;
  v.to_play = s.to_play;
  v.hand = s.hands[seat];
  v.seat = seat;
  v.agent_tricks = s.agent_tricks;
  v.opponent_tricks = s.opponent_tricks;
  v.bids = s.bids;
  v.spades_broken = s.spades_broken;
  return v;
}

State TrickGameModel::transition(const State& state, const JointAction& actions, int t,
                                 ChanceSource& chance) const {
  TrickState s = TrickState::decode(state);
  const int seat = s.to_play;
  int card;
  if (seat % 2 == 0) {
    card = actions.at(seat / 2);
    const auto legal = legal_cards(s.hands[seat], s.lead, s.trump, s.spades_broken);
    if (std::find(legal.begin(), legal.end(), card) == legal.end()) {
      throw ContractViolation("trick game: seat " + std::to_string(seat) +
                              " plays an illegal card");
    }
  } else {
    card = chance.draw({SlotKind::kTransition, t, 0}, opponent_distribution(view_of(s, seat)));
  }
  s.hands[seat] &= ~(std::uint64_t{1} << card);
  if (played_count(s.trick) == 0) s.lead = effective_suit(card, s.trump);
  s.trick[seat] = card;
  if (cards::suit(card) == cards::kSpades) s.spades_broken = true;
  s.to_play = (seat + 1) % 4;
  if (played_count(s.trick) == 4) {
    const int winner = trick_winner(s.trick, s.trump, s.lead);
    if (winner % 2 == 0) ++s.agent_tricks;
    else ++s.opponent_tricks;
    s.trick = {-1, -1, -1, -1};
    s.lead = -1;
    s.leader = winner;
    s.to_play = winner;
  }
  return s.encode();
}

std::vector<Observation> TrickGameModel::observe(const State& state, int, ChanceSource&) const {
  const TrickState s = TrickState::decode(state);
  return {view_of(s, 0).encode(), view_of(s, 2).encode()};
}

InfoState TrickGameModel::initial_info(int, const Observation& obs) const { return obs; }

InfoState TrickGameModel::info_update(int, const InfoState&, ActionId,
                                      const Observation& obs) const {
  return obs;
}

bool TrickGameModel::decides(int, const InfoState& info) const {
  return info.at(kInfoToPlay) == info.at(kInfoSeat);
}

int TrickGameModel::decision_index(int, const InfoState& info) const {
  return hand_size_ - std::popcount(static_cast<std::uint64_t>(info.at(kInfoHand)));
}

std::vector<ActionId> TrickGameModel::valid_actions(int agent, const InfoState& info) const {
  if (!decides(agent, info)) return {kNoop};
  const TrickInfo v = TrickInfo::decode(info);
  const auto legal = legal_cards(v.hand, v.lead, v.trump, v.spades_broken);
  return {legal.begin(), legal.end()};
}

Probabilities TrickGameModel::policy(int agent, const InfoState& info) const {
  Probabilities p(cards::kDeckSize + 1, 0.0);
  if (!decides(agent, info)) {
    p[kNoop] = 1.0;
  } else {
    p[agent_card(agent, TrickInfo::decode(info))] = 1.0;
  }
  return p;
}

Outcome TrickGameModel::outcome(const State& terminal) const {
  const TrickState s = TrickState::decode(terminal);
  if (!is_spades()) return {static_cast<double>(s.agent_tricks), static_cast<double>(s.opponent_tricks)};
  return {static_cast<double>(spades_score(s.agent_tricks, s.bids[0] + s.bids[2])),
          static_cast<double>(spades_score(s.opponent_tricks, s.bids[1] + s.bids[3]))};
}

std::vector<SlotSpec> TrickGameModel::slot_inventory() const {
  std::vector<SlotSpec> out;
  const int dealt = 4 * hand_size_;
  for (int j = 0; j < dealt; ++j) out.push_back({{SlotKind::kInitial, 0, j}, cards::kDeckSize});
  if (!is_spades()) out.push_back({{SlotKind::kInitial, 0, dealt}, 4});
  out.push_back({{SlotKind::kInitial, 0, dealt + 1}, 4});
  for (int t = 0; t < horizon(); ++t) {
    out.push_back({{SlotKind::kTransition, t, 0}, cards::kDeckSize});
    for (int i = 0; i < 2; ++i) out.push_back({{SlotKind::kAction, t, i}, cards::kDeckSize + 1});
  }
  return out;
}

nlohmann::json TrickGameModel::describe_state(const State& state) const {
  const TrickState s = TrickState::decode(state);
  auto trick = nlohmann::json::array();
  for (int c : s.trick) trick.push_back(c < 0 ? nlohmann::json() : nlohmann::json(cards::name(c)));
  auto hands = nlohmann::json::array();
  for (auto h : s.hands) hands.push_back(cards::names(h));
  nlohmann::json j = {{"trump", std::string(1, kSuitLetters[s.trump])},
                      {"leader", s.leader},
                      {"to_play", s.to_play},
                      {"trick", trick},
                      {"hands", hands},
                      {"tricks", {s.agent_tricks, s.opponent_tricks}}};
  if (is_spades()) j["bids"] = s.bids;
  return j;
}

}  // namespace ramcts

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


#ifndef RAMCTS_ENVS_HPP_
#define RAMCTS_ENVS_HPP_

// Team card games behind the DecPomdpModel contract. Seats 0..3 sit in turn
// order; agents 0 and 1 are seats 0 and 2, the opponents (seats 1 and 3) are
// part of the environment and their choices are chance draws.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ramcts/scm.hpp"

namespace ramcts {

namespace cards {

inline constexpr int kDeckSize = 52;
inline constexpr int kClubs = 0;
inline constexpr int kDiamonds = 1;
inline constexpr int kHearts = 2;
inline constexpr int kSpades = 3;
// Rank indices 0..12 stand for 2..10, J, Q, K, A.
inline constexpr int kJack = 9;
inline constexpr int kQueen = 10;
inline constexpr int kKing = 11;
inline constexpr int kAce = 12;

inline constexpr int make(int suit, int rank) { return suit * 13 + rank; }
inline constexpr int suit(int card) { return card / 13; }
inline constexpr int rank(int card) { return card % 13; }

// "SA", "H10", "C2", ...
std::string name(int card);
int parse(const std::string& text);
std::uint64_t mask_of(const std::vector<int>& cards);
std::vector<int> cards_of(std::uint64_t mask);
std::string names(std::uint64_t mask);

}  // namespace cards

enum class GameKind { kGoofspiel, kEuchre, kSpades };

std::string game_name(GameKind kind);
std::optional<GameKind> parse_game(const std::string& name);

struct GameConfig {
  GameKind kind = GameKind::kEuchre;
  int hand_size = 5;
  // Opponents play their preferred card with probability 1 (and lead their
  // lowest card in the trick games).
  bool deterministic_opponents = false;
  // Euchre only: right and left bowers rank above the trump ace.
  bool bowers = false;
  // Goofspiel only: prizes of tied rounds are discarded; otherwise they are split.
  bool discard_tied_prizes = true;
};

void validate(const GameConfig& config);
std::unique_ptr<DecPomdpModel> make_model(const GameConfig& config);

// Per-agent view in the trick games; also the encoded information state.
struct TrickInfo {
  int trump = cards::kSpades;
  int lead = -1;  // effective suit of the current trick's first card
  std::array<int, 4> trick = {-1, -1, -1, -1};  // card by seat, -1 if none
  int to_play = 0;
  std::uint64_t hand = 0;
  int seat = 0;
  int agent_tricks = 0;
  int opponent_tricks = 0;
  std::array<int, 4> bids = {0, 0, 0, 0};
  bool spades_broken = false;

  Code encode() const;
  static TrickInfo decode(const Code& code);
};

// Full trick-game state.
struct TrickState {
  int trump = cards::kSpades;
  int leader = 0;
  int to_play = 0;
  int lead = -1;
  std::array<int, 4> trick = {-1, -1, -1, -1};
  std::array<std::uint64_t, 4> hands = {0, 0, 0, 0};
  int agent_tricks = 0;
  int opponent_tricks = 0;
  std::array<int, 4> bids = {0, 0, 0, 0};
  bool spades_broken = false;

  Code encode() const;
  static TrickState decode(const Code& code);
};

class TrickGameModel : public DecPomdpModel {
 public:
  static constexpr ActionId kNoop = cards::kDeckSize;

  explicit TrickGameModel(const GameConfig& config);

  std::string name() const override;
  int num_agents() const override { return 2; }
  int horizon() const override { return 4 * hand_size_; }
  int action_domain(int) const override { return cards::kDeckSize + 1; }
  State initial_state(ChanceSource& chance) const override;
  State transition(const State& state, const JointAction& actions, int t,
                   ChanceSource& chance) const override;
  std::vector<Observation> observe(const State& state, int t,
                                   ChanceSource& chance) const override;
  InfoState initial_info(int agent, const Observation& obs) const override;
  InfoState info_update(int agent, const InfoState& info, ActionId own_action,
                        const Observation& obs) const override;
  Probabilities policy(int agent, const InfoState& info) const override;
  std::vector<ActionId> valid_actions(int agent, const InfoState& info) const override;
  bool decides(int agent, const InfoState& info) const override;
  int decision_index(int agent, const InfoState& info) const override;
  Outcome outcome(const State& terminal) const override;
  std::vector<SlotSpec> slot_inventory() const override;
  nlohmann::json describe_state(const State& state) const override;

  const GameConfig& config() const { return config_; }
  bool is_spades() const { return config_.kind == GameKind::kSpades; }

  // Rules, exposed for tests and tools.
  int effective_suit(int card, int trump) const;
  // Larger beats smaller within one trick.
  int strength(int card, int trump, int lead) const;
  std::vector<int> legal_cards(std::uint64_t hand, int lead, int trump, bool spades_broken) const;
  // Seat currently winning the trick, or -1 when it is empty.
  int trick_winner(const std::array<int, 4>& trick, int trump, int lead) const;
  // Card the seat's policy plays (agents) or prefers (opponents).
  int agent_card(int agent, const TrickInfo& view) const;
  int opponent_preferred_card(const TrickInfo& view) const;
  Probabilities opponent_distribution(const TrickInfo& view) const;
  static int spades_bid(std::uint64_t hand, int hand_size);
  // Team score of a finished Spades episode.
  static int spades_score(int tricks, int bid);

 private:
  TrickInfo view_of(const TrickState& s, int seat) const;
  // Ordering used for "lowest" and "highest" choices.
  int order_key(int card, int trump, int lead) const;
  int lowest(const std::vector<int>& cards, int trump, int lead) const;
  int highest(const std::vector<int>& cards, int trump, int lead) const;
  std::vector<int> winning_cards(const TrickInfo& view, const std::vector<int>& legal) const;

  GameConfig config_;
  int hand_size_;
};

// Goofspiel information state: own hand, current prize, both team totals.
struct GoofspielInfo {
  std::uint64_t hand = 0;  // bit v-1 set when card v is held
  int prize = 0;
  int agent_score = 0;
  int opponent_score = 0;

  Code encode() const;
  static GoofspielInfo decode(const Code& code);
};

class GoofspielModel : public DecPomdpModel {
 public:
  explicit GoofspielModel(const GameConfig& config);

  std::string name() const override;
  int num_agents() const override { return 2; }
  int horizon() const override { return hand_size_; }
  int action_domain(int) const override { return hand_size_; }
  State initial_state(ChanceSource& chance) const override;
  State transition(const State& state, const JointAction& actions, int t,
                   ChanceSource& chance) const override;
  std::vector<Observation> observe(const State& state, int t,
                                   ChanceSource& chance) const override;
  InfoState initial_info(int agent, const Observation& obs) const override;
  InfoState info_update(int agent, const InfoState& info, ActionId own_action,
                        const Observation& obs) const override;
  Probabilities policy(int agent, const InfoState& info) const override;
  std::vector<ActionId> valid_actions(int agent, const InfoState& info) const override;
  int decision_index(int agent, const InfoState& info) const override;
  Outcome outcome(const State& terminal) const override;
  std::vector<SlotSpec> slot_inventory() const override;
  nlohmann::json describe_state(const State& state) const override;

  // Card values (1..H) chosen by the fixed policies.
  int agent_card(int agent, const GoofspielInfo& view) const;
  int opponent_preferred_card(std::uint64_t hand, bool team_leading) const;
  Probabilities opponent_distribution(std::uint64_t hand, bool team_leading) const;

  // State layout: agent total, opponent total, four hand masks, prize order.
  static constexpr int kAgentScore = 0;
  static constexpr int kOpponentScore = 1;
  static constexpr int kHands = 2;
  static constexpr int kPrizes = 6;

 private:
  GameConfig config_;
  int hand_size_;
};

}  // namespace ramcts

#endif  // RAMCTS_ENVS_HPP_

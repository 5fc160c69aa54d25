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
#include <cctype>
#include <cstring>

#include "ramcts/envs.hpp"

namespace ramcts {
namespace cards {
namespace {

constexpr const char* kSuitLetters = "CDHS";
constexpr const char* kRankTokens[13] = {"2", "3", "4",  "5", "6", "7", "8",
                                         "9", "10", "J", "Q", "K", "A"};

}  // namespace

std::string name(int card) {
  if (card < 0 || card >= kDeckSize) throw ContractViolation("card id out of range");
  return std::string(1, kSuitLetters[suit(card)]) + kRankTokens[rank(card)];
}

int parse(const std::string& text) {
  if (text.size() < 2) throw ContractViolation("bad card '" + text + "'");
  const char* s = std::strchr(kSuitLetters, std::toupper(static_cast<unsigned char>(text[0])));
  if (s == nullptr || *s == '\0') throw ContractViolation("bad suit in '" + text + "'");
  std::string token = text.substr(1);
  for (char& c : token) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (token == "T") token = "10";
  for (int r = 0; r < 13; ++r) {
    if (token == kRankTokens[r]) return make(static_cast<int>(s - kSuitLetters), r);
  }
  throw ContractViolation("bad rank in '" + text + "'");
}

std::uint64_t mask_of(const std::vector<int>& list) {
  std::uint64_t mask = 0;
  for (int c : list) {
    const std::uint64_t bit = std::uint64_t{1} << c;
    if (mask & bit) throw ContractViolation("duplicate card " + name(c));
    mask |= bit;
  }
  return mask;
}

std::vector<int> cards_of(std::uint64_t mask) {
  std::vector<int> out;
  out.reserve(std::popcount(mask));
  while (mask != 0) {
    out.push_back(std::countr_zero(mask));
    mask &= mask - 1;
  }
  return out;
}

std::string names(std::uint64_t mask) {
  std::string out;
  for (int c : cards_of(mask)) {
    if (!out.empty()) out += ' ';
    out += name(c);
  }
  return out;
}

}  // namespace cards

std::string game_name(GameKind kind) {
  switch (kind) {
    case GameKind::kGoofspiel: return "goofspiel";
    case GameKind::kEuchre: return "euchre";
    case GameKind::kSpades: return "spades";
  }
  return "?";
}

std::optional<GameKind> parse_game(const std::string& text) {
  std::string lower;
  for (char c : text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "goofspiel" || lower == "teamgoofspiel") return GameKind::kGoofspiel;
  if (lower == "euchre") return GameKind::kEuchre;
  if (lower == "spades") return GameKind::kSpades;
  return std::nullopt;
}

void validate(const GameConfig& config) {
  if (config.kind == GameKind::kGoofspiel) {
    if (config.hand_size < 2 || config.hand_size > 60) {
      throw ContractViolation("goofspiel hand size must lie in [2, 60]");
    }
    return;
  }
  if (config.hand_size < 1 || 4 * config.hand_size > cards::kDeckSize) {
    throw ContractViolation("trick games need 1 <= H and 4H <= 52");
  }
}

std::unique_ptr<DecPomdpModel> make_model(const GameConfig& config) {
  validate(config);
  if (config.kind == GameKind::kGoofspiel) return std::make_unique<GoofspielModel>(config);
  return std::make_unique<TrickGameModel>(config);
}

}  // namespace ramcts

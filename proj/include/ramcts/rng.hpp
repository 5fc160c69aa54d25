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

#ifndef RAMCTS_RNG_HPP_
#define RAMCTS_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <utility>

namespace ramcts {

// splitmix64 finalizer. All keyed randomness in the library goes through it so
// results do not depend on the standard library's distribution implementations.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Hashes a sequence of words into one key; order-sensitive.
inline std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t w : words) h = mix64(h ^ mix64(w));
  return h;
}

// Child seed derivation: derive_seed(master, tag, i) for the i-th job of a
// given kind. Stable across runs and platforms.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                 std::uint64_t index) {
  return hash_words({master, tag, index});
}

// Maps 64 random bits to the open interval (0, 1).
inline double bits_to_open_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

// Standard Gumbel(0, 1) variate from 64 random bits.
inline double bits_to_gumbel(std::uint64_t bits) {
  return -std::log(-std::log(bits_to_open_unit(bits)));
}

// Small portable generator (splitmix64 stream) used for search-time choices.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform(std::uint64_t n) {
    // Rejection removes modulo bias.
    const std::uint64_t limit = ~0ULL - (~0ULL % n);
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  double uniform01() { return bits_to_open_unit(next()); }
  double gumbel() { return bits_to_gumbel(next()); }

 private:
  std::uint64_t state_;
};

}  // namespace ramcts

#endif  // RAMCTS_RNG_HPP_

#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "mvi/errors.hpp"

namespace mvi {

inline constexpr int kMaxPlayers = 64;

// A subset of the players {0, ..., n-1}, stored as one machine word.
// All set algebra stays inside the declared player count n.
class PlayerSet {
 public:
  PlayerSet() = default;

  static PlayerSet empty_set(int n) { return PlayerSet(n, 0); }

  static PlayerSet full_set(int n) {
    check_n(n);
    return PlayerSet(n, n == 64 ? ~0ULL : ((1ULL << n) - 1));
  }

  static PlayerSet from_mask(int n, std::uint64_t mask) {
    check_n(n);
    if (n < 64 && (mask >> n) != 0)
      throw DomainError("PlayerSet mask has bits at index >= n");
    return PlayerSet(n, mask);
  }

  static PlayerSet of(int n, std::initializer_list<int> players) {
    check_n(n);
    std::uint64_t m = 0;
    for (int p : players) {
      if (p < 0 || p >= n) throw DomainError("player index out of range");
      m |= 1ULL << p;
    }
    return PlayerSet(n, m);
  }

  static PlayerSet single(int n, int player) { return of(n, {player}); }

  // Inclusive span [lo, hi].
  static PlayerSet span(int n, int lo, int hi) {
    check_n(n);
    if (lo < 0 || hi >= n || lo > hi) throw DomainError("bad span bounds");
    std::uint64_t run = (hi - lo == 63) ? ~0ULL : ((1ULL << (hi - lo + 1)) - 1);
    return PlayerSet(n, run << lo);
  }

  int n() const { return n_; }
  std::uint64_t mask() const { return bits_; }
  int count() const { return std::popcount(bits_); }
  bool empty() const { return bits_ == 0; }
  bool contains(int player) const {
    return player >= 0 && player < n_ && (bits_ >> player) & 1;
  }

  int lowest() const {
    assert(bits_ != 0);
    return std::countr_zero(bits_);
  }
  int highest() const {
    assert(bits_ != 0);
    return 63 - std::countl_zero(bits_);
  }

  PlayerSet with(int player) const {
    if (player < 0 || player >= n_) throw DomainError("player index out of range");
    return PlayerSet(n_, bits_ | (1ULL << player));
  }
  PlayerSet without(int player) const {
    if (player < 0 || player >= n_) throw DomainError("player index out of range");
    return PlayerSet(n_, bits_ & ~(1ULL << player));
  }

  PlayerSet operator|(PlayerSet o) const { return combine(o, bits_ | o.bits_); }
  PlayerSet operator&(PlayerSet o) const { return combine(o, bits_ & o.bits_); }
  PlayerSet operator-(PlayerSet o) const { return combine(o, bits_ & ~o.bits_); }
  PlayerSet complement() const { return PlayerSet(n_, full_set(n_).bits_ & ~bits_); }

  bool operator==(const PlayerSet& o) const = default;
  bool subset_of(PlayerSet o) const {
    assert(n_ == o.n_);
    return (bits_ & ~o.bits_) == 0;
  }
  bool disjoint_with(PlayerSet o) const {
    assert(n_ == o.n_);
    return (bits_ & o.bits_) == 0;
  }

  // True when the members form one run of consecutive indices.
  bool is_run() const {
    if (bits_ == 0) return true;
    std::uint64_t shifted = bits_ >> lowest();
    return (shifted & (shifted + 1)) == 0;
  }

  std::vector<int> members() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(count()));
    for (std::uint64_t b = bits_; b != 0; b &= b - 1)
      out.push_back(std::countr_zero(b));
    return out;
  }

  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (int p : members()) {
      if (!first) s += ",";
      s += std::to_string(p);
      first = false;
    }
    return s + "}";
  }

 private:
  PlayerSet(int n, std::uint64_t bits) : bits_(bits), n_(n) {}

  static void check_n(int n) {
    if (n < 0 || n > kMaxPlayers)
      throw DomainError("player count must be in [0, 64]");
  }

  PlayerSet combine([[maybe_unused]] PlayerSet o, std::uint64_t bits) const {
    assert(n_ == o.n_);
    return PlayerSet(n_, bits);
  }

  std::uint64_t bits_ = 0;
  int n_ = 0;
};

// Rank of `player` among the set bits of `mask` (its index after a restrict).
inline int rank_in_mask(std::uint64_t mask, int player) {
  return std::popcount(mask & ((1ULL << player) - 1));
}

}  // namespace mvi

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvi/playerset.hpp"

namespace mvi {

// Division of a target set A into disjoint non-empty coalitions.
// `contiguous` means every block is an interval of A's ordered members
// (equivalently: expressible as merge bits between adjacent members).
struct Partition {
  std::vector<PlayerSet> blocks;  // sorted by lowest member
  bool contiguous = false;

  int block_count() const { return static_cast<int>(blocks.size()); }
  std::string to_string() const;
};

// Merge-bit encoding over A's sorted members a_0..a_{m-1}: bit b set means
// a_b and a_{b+1} share a block. m-1 bits describe every contiguous
// partition of A.
Partition partition_from_bits(PlayerSet a, std::uint64_t merge_bits);

// Inverse of partition_from_bits; requires a contiguous partition of A.
std::uint64_t bits_from_partition(PlayerSet a, const Partition& omega);

bool is_partition_of(PlayerSet a, const Partition& omega);

// Index of the block containing `player`, or -1.
int block_of(const Partition& omega, int player);

Partition singleton_partition(PlayerSet a);
Partition grand_partition(PlayerSet a);

// All 2^(m-1) contiguous partitions, in merge-bit binary counting order.
std::vector<Partition> enumerate_contiguous(PlayerSet a);

// All Bell(m) partitions, in restricted-growth-string order.
std::vector<Partition> enumerate_all(PlayerSet a);

// Per-member mixture weight for the partition encoded by merge_bits:
// member rank r gets 1/|block containing a_r|. Length m.
std::vector<double> lambda_weights(int m, std::uint64_t merge_bits);

int block_count_from_bits(int m, std::uint64_t merge_bits);

// Lexicographic order on boundary vectors (g_1..g_{m-1}), bit b = boundary b.
bool boundary_lex_less(std::uint64_t lhs, std::uint64_t rhs, int num_bits);

}  // namespace mvi

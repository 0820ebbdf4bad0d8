#include "mvi/partition.hpp"

#include <algorithm>
#include <bit>

#include "mvi/errors.hpp"

namespace mvi {

std::string Partition::to_string() const {
  std::string s = "[";
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (k) s += " ";
    s += blocks[k].to_string();
  }
  return s + "]";
}

Partition partition_from_bits(PlayerSet a, std::uint64_t merge_bits) {
  if (a.empty()) throw DomainError("cannot partition the empty set");
  int m = a.count();
  if ((m == 1 && merge_bits != 0) || (m > 1 && m < 64 && (merge_bits >> (m - 1)) != 0))
    throw DomainError("merge bits beyond boundary count");
  std::vector<int> members = a.members();
  Partition omega;
  omega.contiguous = true;
  PlayerSet block = PlayerSet::single(a.n(), members[0]);
  for (int r = 1; r < m; ++r) {
    if ((merge_bits >> (r - 1)) & 1) {
      block = block.with(members[static_cast<std::size_t>(r)]);
    } else {
      omega.blocks.push_back(block);
      block = PlayerSet::single(a.n(), members[static_cast<std::size_t>(r)]);
    }
  }
  omega.blocks.push_back(block);
  return omega;
}

bool is_partition_of(PlayerSet a, const Partition& omega) {
  std::uint64_t seen = 0;
  for (const PlayerSet& b : omega.blocks) {
    if (b.n() != a.n() || b.empty()) return false;
    if ((seen & b.mask()) != 0) return false;
    seen |= b.mask();
  }
  return seen == a.mask() && !omega.blocks.empty();
}

int block_of(const Partition& omega, int player) {
  for (std::size_t k = 0; k < omega.blocks.size(); ++k)
    if (omega.blocks[k].contains(player)) return static_cast<int>(k);
  return -1;
}

std::uint64_t bits_from_partition(PlayerSet a, const Partition& omega) {
  if (!is_partition_of(a, omega)) throw DomainError("not a partition of A");
  std::vector<int> members = a.members();
  std::uint64_t bits = 0;
  for (std::size_t r = 1; r < members.size(); ++r)
    if (block_of(omega, members[r - 1]) == block_of(omega, members[r]))
      bits |= std::uint64_t{1} << (r - 1);
  // Round-trip check rejects partitions whose blocks are not intervals of A.
  Partition back = partition_from_bits(a, bits);
  if (back.blocks.size() != omega.blocks.size())
    throw DomainError("partition is not contiguous in A's member order");
  for (std::size_t k = 0; k < back.blocks.size(); ++k) {
    auto match = std::find_if(omega.blocks.begin(), omega.blocks.end(),
                              [&](PlayerSet b) { return b == back.blocks[k]; });
    if (match == omega.blocks.end())
      throw DomainError("partition is not contiguous in A's member order");
  }
  return bits;
}

Partition singleton_partition(PlayerSet a) { return partition_from_bits(a, 0); }

Partition grand_partition(PlayerSet a) {
  int m = a.count();
  if (m == 0) throw DomainError("cannot partition the empty set");
  std::uint64_t all = (m == 1) ? 0 : ((std::uint64_t{1} << (m - 1)) - 1);
  return partition_from_bits(a, all);
}

std::vector<Partition> enumerate_contiguous(PlayerSet a) {
  int m = a.count();
  if (m == 0) throw DomainError("cannot partition the empty set");
  std::vector<Partition> out;
  out.reserve(std::size_t{1} << (m - 1));
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << (m - 1)); ++bits)
    out.push_back(partition_from_bits(a, bits));
  return out;
}

std::vector<Partition> enumerate_all(PlayerSet a) {
  int m = a.count();
  if (m == 0) throw DomainError("cannot partition the empty set");
  std::vector<int> members = a.members();
  std::vector<Partition> out;
  std::vector<int> rgs(static_cast<std::size_t>(m), 0);
  while (true) {
    int num_blocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
    Partition omega;
    std::vector<std::uint64_t> masks(static_cast<std::size_t>(num_blocks), 0);
    for (int r = 0; r < m; ++r)
      masks[static_cast<std::size_t>(rgs[static_cast<std::size_t>(r)])] |=
          std::uint64_t{1} << members[static_cast<std::size_t>(r)];
    for (std::uint64_t mask : masks)
      omega.blocks.push_back(PlayerSet::from_mask(a.n(), mask));
    std::sort(omega.blocks.begin(), omega.blocks.end(),
              [](PlayerSet x, PlayerSet y) { return x.lowest() < y.lowest(); });
    omega.contiguous = true;
    for (int r = 1; r < m; ++r) {
      int b0 = block_of(omega, members[static_cast<std::size_t>(r - 1)]);
      int b1 = block_of(omega, members[static_cast<std::size_t>(r)]);
      if (b1 != b0 && b1 != b0 + 1) omega.contiguous = false;
    }
    out.push_back(std::move(omega));
    // Next restricted growth string: rgs[r] may rise to max(prefix)+1.
    int r = m - 1;
    for (; r > 0; --r) {
      int cap = 0;
      for (int q = 0; q < r; ++q) cap = std::max(cap, rgs[static_cast<std::size_t>(q)]);
      if (rgs[static_cast<std::size_t>(r)] <= cap) break;
    }
    if (r == 0) break;
    ++rgs[static_cast<std::size_t>(r)];
    for (int q = r + 1; q < m; ++q) rgs[static_cast<std::size_t>(q)] = 0;
  }
  return out;
}

std::vector<double> lambda_weights(int m, std::uint64_t merge_bits) {
  if (m <= 0) throw DomainError("need at least one member");
  std::vector<double> lambda(static_cast<std::size_t>(m));
  int start = 0;
  for (int r = 1; r <= m; ++r) {
    bool boundary = (r == m) || (((merge_bits >> (r - 1)) & 1) == 0);
    if (boundary) {
      double inv = 1.0 / (r - start);
      for (int q = start; q < r; ++q) lambda[static_cast<std::size_t>(q)] = inv;
      start = r;
    }
  }
  return lambda;
}

int block_count_from_bits(int m, std::uint64_t merge_bits) {
  if (m <= 0) throw DomainError("need at least one member");
  if (m == 1) return 1;
  std::uint64_t window = (std::uint64_t{1} << (m - 1)) - 1;
  return m - std::popcount(merge_bits & window);
}

bool boundary_lex_less(std::uint64_t lhs, std::uint64_t rhs, int num_bits) {
  for (int b = 0; b < num_bits; ++b) {
    bool lb = (lhs >> b) & 1, rb = (rhs >> b) & 1;
    if (lb != rb) return rb;  // 0 before 1 at the first differing boundary
  }
  return false;
}

}  // namespace mvi

#include <cstdint>
#include <vector>

#include "doctest.h"
#include "mvi/errors.hpp"
#include "mvi/partition.hpp"
#include "mvi/playerset.hpp"

using namespace mvi;

namespace {
const PlayerSet kA = PlayerSet::of(6, {1, 2, 4});  // non-contiguous member set is fine
}

TEST_CASE("partition_from_bits merges adjacent members") {
  Partition p = partition_from_bits(kA, 0b01);  // merge a_0=1 and a_1=2
  REQUIRE(p.block_count() == 2);
  CHECK(p.blocks[0].members() == std::vector<int>{1, 2});
  CHECK(p.blocks[1].members() == std::vector<int>{4});
  CHECK(p.contiguous);

  Partition grand = partition_from_bits(kA, 0b11);
  CHECK(grand.block_count() == 1);
  CHECK(grand.blocks[0].members() == std::vector<int>{1, 2, 4});

  Partition singles = partition_from_bits(kA, 0);
  CHECK(singles.block_count() == 3);
}

TEST_CASE("partition_from_bits rejects out-of-range bits") {
  CHECK_THROWS_AS(partition_from_bits(kA, 0b100), DomainError);
  CHECK_THROWS_AS(partition_from_bits(PlayerSet::single(3, 1), 1), DomainError);
  CHECK_THROWS_AS(partition_from_bits(PlayerSet::empty_set(3), 0), DomainError);
}

TEST_CASE("bits_from_partition inverts the encoding") {
  for (std::uint64_t bits = 0; bits < 4; ++bits)
    CHECK(bits_from_partition(kA, partition_from_bits(kA, bits)) == bits);

  Partition crossed;  // {1,4},{2}: not contiguous in member order
  crossed.blocks = {PlayerSet::of(6, {1, 4}), PlayerSet::of(6, {2})};
  CHECK_THROWS_AS(bits_from_partition(kA, crossed), DomainError);

  Partition wrong_set;
  wrong_set.blocks = {PlayerSet::of(6, {1, 2})};
  CHECK_THROWS_AS(bits_from_partition(kA, wrong_set), DomainError);
}

TEST_CASE("is_partition_of and block_of") {
  Partition p = partition_from_bits(kA, 0b01);
  CHECK(is_partition_of(kA, p));
  CHECK_FALSE(is_partition_of(PlayerSet::of(6, {1, 2}), p));
  CHECK(block_of(p, 2) == 0);
  CHECK(block_of(p, 4) == 1);
  CHECK(block_of(p, 0) == -1);
}

TEST_CASE("singleton and grand partitions") {
  CHECK(singleton_partition(kA).block_count() == 3);
  CHECK(grand_partition(kA).block_count() == 1);
  CHECK(singleton_partition(kA).contiguous);
  CHECK(grand_partition(kA).contiguous);
}

TEST_CASE("enumerate_contiguous covers all merge-bit patterns") {
  PlayerSet a = PlayerSet::span(6, 1, 4);  // 4 members
  auto parts = enumerate_contiguous(a);
  REQUIRE(parts.size() == 8);
  for (std::uint64_t bits = 0; bits < 8; ++bits)
    CHECK(bits_from_partition(a, parts[bits]) == bits);
  CHECK(enumerate_contiguous(PlayerSet::single(4, 2)).size() == 1);
}

TEST_CASE("enumerate_all yields Bell(m) partitions") {
  CHECK(enumerate_all(PlayerSet::single(3, 0)).size() == 1);
  CHECK(enumerate_all(PlayerSet::of(3, {0, 1})).size() == 2);
  CHECK(enumerate_all(PlayerSet::of(4, {0, 1, 2})).size() == 5);
  auto parts = enumerate_all(PlayerSet::span(4, 0, 3));
  CHECK(parts.size() == 15);
  int contiguous = 0;
  for (const auto& p : parts) {
    CHECK(is_partition_of(PlayerSet::span(4, 0, 3), p));
    if (p.contiguous) ++contiguous;
  }
  CHECK(contiguous == 8);
}

TEST_CASE("lambda weights are one over block size") {
  auto w = lambda_weights(6, 0b10011);  // {a0 a1 a2} {a3} {a4 a5}
  REQUIRE(w.size() == 6);
  CHECK(w[0] == doctest::Approx(1.0 / 3));
  CHECK(w[1] == doctest::Approx(1.0 / 3));
  CHECK(w[2] == doctest::Approx(1.0 / 3));
  CHECK(w[3] == doctest::Approx(1.0));
  CHECK(w[4] == doctest::Approx(0.5));
  CHECK(w[5] == doctest::Approx(0.5));
  CHECK(block_count_from_bits(6, 0b10011) == 3);
  CHECK(block_count_from_bits(4, 0) == 4);
  CHECK(block_count_from_bits(4, 0b111) == 1);
}

TEST_CASE("boundary order reads bit zero first") {
  CHECK(boundary_lex_less(0b00, 0b01, 2));
  CHECK(boundary_lex_less(0b10, 0b01, 2));  // bit 0 decides: 0 < 1
  CHECK_FALSE(boundary_lex_less(0b01, 0b10, 2));
  CHECK_FALSE(boundary_lex_less(0b11, 0b11, 2));
  CHECK(boundary_lex_less(0b01, 0b11, 2));  // bit 0 ties, bit 1 decides
}

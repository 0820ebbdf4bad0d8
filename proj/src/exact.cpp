#include "mvi/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>

#include "mvi/errors.hpp"
#include "mvi/rng.hpp"

namespace mvi {

const char* semantics_name(Semantics s) {
  return s == Semantics::kExclusive ? "exclusive" : "unit";
}

Semantics semantics_from_name(const std::string& name) {
  if (name == "exclusive") return Semantics::kExclusive;
  if (name == "unit") return Semantics::kUnit;
  throw FormatError("unknown semantics: " + name);
}

namespace {

constexpr std::int64_t kChunk = 4096;  // fixed split => worker-count-independent sums

std::vector<double> shapley_weights(int n) {
  // w(s) = s!(n-1-s)!/n!
  std::vector<double> w(static_cast<std::size_t>(n));
  w[0] = 1.0 / n;
  for (int s = 1; s < n; ++s) w[static_cast<std::size_t>(s)] = w[static_cast<std::size_t>(s - 1)] * s / (n - s);
  return w;
}

}  // namespace

std::vector<double> value_table(const Game& g, const Caps& caps) {
  int n = g.n();
  if (n > caps.shapley_n) throw CapacityError("player count exceeds enumeration cap");
  std::int64_t size = std::int64_t{1} << n;
  std::vector<double> table(static_cast<std::size_t>(size));
#pragma omp parallel for schedule(static)
  for (std::int64_t mask = 0; mask < size; ++mask)
    table[static_cast<std::size_t>(mask)] = g.eval_mask(static_cast<std::uint64_t>(mask));
  return table;
}

std::vector<double> shapley(const Game& g, const Caps& caps) {
  int n = g.n();
  if (n > caps.shapley_n) throw CapacityError("player count exceeds enumeration cap");
  if (n == 0) return {};
  std::vector<double> table = value_table(g, caps);
  std::vector<double> w = shapley_weights(n);
  std::uint64_t full = PlayerSet::full_set(n).mask();
  std::int64_t size = std::int64_t{1} << n;
  std::int64_t num_chunks = (size + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> partial(static_cast<std::size_t>(num_chunks));
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < num_chunks; ++c) {
    std::vector<double> local(static_cast<std::size_t>(n), 0.0);
    std::int64_t hi = std::min(size, (c + 1) * kChunk);
    for (std::int64_t mask = c * kChunk; mask < hi; ++mask) {
      auto s = static_cast<std::size_t>(std::popcount(static_cast<std::uint64_t>(mask)));
      double base = table[static_cast<std::size_t>(mask)];
      for (std::uint64_t rest = full & ~static_cast<std::uint64_t>(mask); rest != 0;
           rest &= rest - 1) {
        int i = std::countr_zero(rest);
        local[static_cast<std::size_t>(i)] +=
            w[s] * (table[static_cast<std::size_t>(mask | (std::int64_t{1} << i))] - base);
      }
    }
    partial[static_cast<std::size_t>(c)] = std::move(local);
  }
  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  for (std::int64_t c = 0; c < num_chunks; ++c)
    for (int i = 0; i < n; ++i)
      phi[static_cast<std::size_t>(i)] += partial[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
  return phi;
}

std::vector<double> shapley_serial(const Game& g, const Caps& caps) {
  int n = g.n();
  if (n > caps.shapley_n) throw CapacityError("player count exceeds enumeration cap");
  if (n == 0) return {};
  std::uint64_t size = std::uint64_t{1} << n;
  std::vector<double> table(size);
  for (std::uint64_t mask = 0; mask < size; ++mask) table[mask] = g.eval_mask(mask);
  std::vector<double> w = shapley_weights(n);
  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    std::uint64_t bit = std::uint64_t{1} << i;
    for (std::uint64_t mask = 0; mask < size; ++mask) {
      if (mask & bit) continue;
      phi[static_cast<std::size_t>(i)] +=
          w[static_cast<std::size_t>(std::popcount(mask))] * (table[mask | bit] - table[mask]);
    }
  }
  return phi;
}

namespace {

// phi(C | N\A ∪ {[C]}): outside players stay, sibling members of A are absent.
double phi_exclusive(const Game& g, PlayerSet outside, PlayerSet c, const Caps& caps) {
  std::vector<PlayerSet> units;
  units.reserve(static_cast<std::size_t>(outside.count()) + 1);
  units.push_back(c);
  for (int i : outside.members()) units.push_back(PlayerSet::single(g.n(), i));
  Game u = with_units(g, std::move(units), Cache::kOff);
  int idx = rank_in_mask(outside.mask(), c.lowest());
  return shapley(u, caps)[static_cast<std::size_t>(idx)];
}

// Σ over blocks of phi(C_k | N\A ∪ all blocks as units).
double value_unit(const Game& g, PlayerSet outside, const std::vector<PlayerSet>& blocks,
                  const Caps& caps) {
  std::vector<PlayerSet> units;
  units.reserve(static_cast<std::size_t>(outside.count()) + blocks.size());
  for (int i : outside.members()) units.push_back(PlayerSet::single(g.n(), i));
  for (PlayerSet b : blocks) units.push_back(b);
  Game u = with_units(g, std::move(units), Cache::kOff);
  std::vector<double> phi = shapley(u, caps);
  double sum = 0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    int idx = rank_in_mask(outside.mask(), blocks[k].lowest()) + static_cast<int>(k);
    sum += phi[static_cast<std::size_t>(idx)];
  }
  return sum;
}

}  // namespace

double pairwise_interaction(const Game& g, int i, int j, const Caps& caps) {
  if (i == j) throw DomainError("pair needs two distinct players");
  PlayerSet pair = PlayerSet::of(g.n(), {i, j});
  Game merged = contract(g, pair, Cache::kOff);
  double phi_pair = shapley(merged, caps)[static_cast<std::size_t>(contract_index(pair))];
  PlayerSet full = PlayerSet::full_set(g.n());
  Game without_j = restrict_to(g, full.without(j), Cache::kOff);
  Game without_i = restrict_to(g, full.without(i), Cache::kOff);
  double phi_i =
      shapley(without_j, caps)[static_cast<std::size_t>(rank_in_mask(full.without(j).mask(), i))];
  double phi_j =
      shapley(without_i, caps)[static_cast<std::size_t>(rank_in_mask(full.without(i).mask(), j))];
  return phi_pair - phi_i - phi_j;
}

double coalition_interaction(const Game& g, PlayerSet a, const Caps& caps) {
  if (a.n() != g.n()) throw DomainError("player set is for a different game size");
  if (a.count() < 2) throw DomainError("coalition needs at least two players");
  PlayerSet outside = a.complement();
  double phi_a = phi_exclusive(g, outside, a, caps);
  double singles = 0;
  for (int i : a.members())
    singles += phi_exclusive(g, outside, PlayerSet::single(g.n(), i), caps);
  return phi_a - singles;
}

std::map<std::uint64_t, double> elementary_components(const Game& g, PlayerSet a,
                                                      const Caps& caps) {
  if (a.n() != g.n()) throw DomainError("player set is for a different game size");
  int m = a.count();
  if (m > caps.components_m) throw CapacityError("target set exceeds component cap");
  std::vector<int> members = a.members();
  std::size_t size = std::size_t{1} << m;
  std::vector<double> val(size, 0.0);
  for (std::size_t rel = 0; rel < size; ++rel) {
    if (std::popcount(rel) < 2) continue;  // singleton and empty B are 0
    std::uint64_t abs_mask = 0;
    for (std::uint64_t b = rel; b != 0; b &= b - 1)
      abs_mask |= std::uint64_t{1} << members[static_cast<std::size_t>(std::countr_zero(b))];
    val[rel] = coalition_interaction(g, PlayerSet::from_mask(g.n(), abs_mask), caps);
  }
  // In-place Möbius inversion over the subset lattice of A.
  for (int b = 0; b < m; ++b)
    for (std::size_t rel = 0; rel < size; ++rel)
      if (rel & (std::size_t{1} << b)) val[rel] -= val[rel ^ (std::size_t{1} << b)];
  std::map<std::uint64_t, double> out;
  for (std::size_t rel = 0; rel < size; ++rel) {
    if (std::popcount(rel) < 2) continue;
    std::uint64_t abs_mask = 0;
    for (std::uint64_t b = rel; b != 0; b &= b - 1)
      abs_mask |= std::uint64_t{1} << members[static_cast<std::size_t>(std::countr_zero(b))];
    out.emplace(abs_mask, val[rel]);
  }
  return out;
}

double partition_value(const Game& g, PlayerSet a, const Partition& omega,
                       Semantics semantics, const Caps& caps) {
  if (a.n() != g.n()) throw DomainError("player set is for a different game size");
  if (!is_partition_of(a, omega)) throw DomainError("not a partition of A");
  PlayerSet outside = a.complement();
  if (semantics == Semantics::kUnit) return value_unit(g, outside, omega.blocks, caps);
  double sum = 0;
  for (PlayerSet c : omega.blocks) sum += phi_exclusive(g, outside, c, caps);
  return sum;
}

namespace {

struct Candidate {
  double value = 0;
  Partition part;
  int num_blocks = 0;
  std::uint64_t bits = 0;
  bool has_bits = false;
  bool valid = false;
};

// Strictly better wins; among equal values fewer blocks win, then the
// lexicographically smaller boundary vector when both sides have one.
bool prefer(const Candidate& cand, const Candidate& best, bool maximize, int num_boundaries) {
  if (!best.valid) return true;
  if (cand.value != best.value) return maximize ? cand.value > best.value : cand.value < best.value;
  if (cand.num_blocks != best.num_blocks) return cand.num_blocks < best.num_blocks;
  if (cand.has_bits && best.has_bits) return boundary_lex_less(cand.bits, best.bits, num_boundaries);
  return false;
}

}  // namespace

ExactReport exact_t(const Game& g, PlayerSet a, Semantics semantics, bool contiguous_only,
                    const Caps& caps, bool with_components) {
  if (a.n() != g.n()) throw DomainError("player set is for a different game size");
  int m = a.count();
  if (m < 2) throw DomainError("target set needs at least two players");
  if (contiguous_only) {
    if (m > caps.contiguous_m) throw CapacityError("target set exceeds contiguous partition cap");
  } else if (m > caps.general_m) {
    throw CapacityError("target set exceeds general partition cap");
  }
  PlayerSet outside = a.complement();

  // Exclusive contexts depend only on the block, so block values are shared
  // across every partition that contains the block.
  std::unordered_map<std::uint64_t, double> block_memo;
  auto block_value = [&](PlayerSet c) {
    auto it = block_memo.find(c.mask());
    if (it != block_memo.end()) return it->second;
    double v = phi_exclusive(g, outside, c, caps);
    block_memo.emplace(c.mask(), v);
    return v;
  };
  auto eval_partition = [&](const Partition& omega) {
    if (semantics == Semantics::kUnit) return value_unit(g, outside, omega.blocks, caps);
    double sum = 0;
    for (PlayerSet c : omega.blocks) sum += block_value(c);
    return sum;
  };

  double base = eval_partition(singleton_partition(a));
  double grand = eval_partition(grand_partition(a));

  Candidate best_max, best_min;
  auto consider = [&](Partition omega, double value, std::uint64_t bits, bool has_bits) {
    Candidate cand;
    cand.value = value;
    cand.num_blocks = omega.block_count();
    cand.bits = bits;
    cand.has_bits = has_bits;
    cand.valid = true;
    cand.part = std::move(omega);
    if (prefer(cand, best_max, true, m - 1)) best_max = cand;
    if (prefer(cand, best_min, false, m - 1)) best_min = std::move(cand);
  };

  if (contiguous_only) {
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << (m - 1)); ++bits) {
      Partition omega = partition_from_bits(a, bits);
      double value = eval_partition(omega);
      consider(std::move(omega), value, bits, true);
    }
  } else {
    for (Partition& omega : enumerate_all(a)) {
      double value = eval_partition(omega);
      std::uint64_t bits = 0;
      bool has_bits = omega.contiguous;
      if (has_bits) bits = bits_from_partition(a, omega);
      consider(std::move(omega), value, bits, has_bits);
    }
  }

  ExactReport r;
  r.a_mask = a.mask();
  r.n = g.n();
  r.semantics = semantics;
  r.contiguous_only = contiguous_only;
  r.base = base;
  r.b = grand - base;
  r.b_max = best_max.value - base;
  r.b_min = best_min.value - base;
  r.t = r.b_max - r.b_min;
  r.omega_max = best_max.part;
  r.omega_min = best_min.part;
  if (with_components) r.components = elementary_components(g, a, caps);
  return r;
}

SalienceMap context_salience(const Game& g, int i, int j, std::uint64_t budget,
                             std::uint64_t seed, const Caps& caps) {
  if (i == j) throw DomainError("pair needs two distinct players");
  if (budget < 1) throw DomainError("budget must be at least 1");
  PlayerSet pair = PlayerSet::of(g.n(), {i, j});  // validates indices
  SalienceMap out;
  out.weight.assign(static_cast<std::size_t>(g.n()), 0.0);
  out.pair_b = pairwise_interaction(g, i, j, caps);
  if (out.pair_b == 0) {
    out.empty = true;
    return out;
  }
  std::uint64_t rest = pair.complement().mask();
  int r = g.n() - 2;
  double sign = out.pair_b > 0 ? 1.0 : -1.0;
  std::uint64_t ibit = std::uint64_t{1} << i, jbit = std::uint64_t{1} << j;
  auto absorb = [&](std::uint64_t s) {
    double dv = g.eval_mask(s | ibit | jbit) - g.eval_mask(s | ibit) - g.eval_mask(s | jbit) +
                g.eval_mask(s);
    if (sign * dv <= 0) return;
    double w = std::abs(dv);
    for (std::uint64_t b = s; b != 0; b &= b - 1)
      out.weight[static_cast<std::size_t>(std::countr_zero(b))] += w;
  };
  if (r <= 62 && (std::uint64_t{1} << r) <= budget) {
    // Enumerate contexts in submask order.
    std::uint64_t s = 0;
    while (true) {
      absorb(s);
      if (s == rest) break;
      s = (s - rest) & rest;
    }
  } else {
    Rng rng(derive_seed(seed, 0x5a11e9ce));
    for (std::uint64_t k = 0; k < budget; ++k) absorb(rng.next_u64() & rest);
  }
  return out;
}

nlohmann::json report_to_json(const ExactReport& r) {
  auto omega_json = [&](const Partition& omega) -> nlohmann::json {
    PlayerSet a = PlayerSet::from_mask(r.n, r.a_mask);
    nlohmann::json blocks = nlohmann::json::array();
    for (PlayerSet b : omega.blocks) blocks.push_back(b.mask());
    nlohmann::json bits;
    try {
      bits = bits_from_partition(a, omega);
    } catch (const DomainError&) {
      bits = nullptr;  // not expressible as boundary bits
    }
    return nlohmann::json{{"bits", bits}, {"blocks", std::move(blocks)}};
  };
  nlohmann::json j{{"A", r.a_mask},
                   {"n", r.n},
                   {"semantics", semantics_name(r.semantics)},
                   {"contiguous_only", r.contiguous_only},
                   {"B", r.b},
                   {"B_max", r.b_max},
                   {"B_min", r.b_min},
                   {"T", r.t},
                   {"base", r.base},
                   {"omega_max", omega_json(r.omega_max)},
                   {"omega_min", omega_json(r.omega_min)}};
  if (r.components) {
    nlohmann::json comp = nlohmann::json::object();
    for (const auto& [mask, value] : *r.components) comp[std::to_string(mask)] = value;
    j["components"] = std::move(comp);
  }
  return j;
}

}  // namespace mvi

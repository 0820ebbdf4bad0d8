#include "mvi/estimator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <ostream>

#include "mvi/errors.hpp"

namespace mvi {

namespace {

constexpr std::int64_t kPermChunk = 64;  // permutations per reduction chunk

void walk_permutation(const Game& g, const std::vector<int>& order, std::vector<double>& sum,
                      std::vector<double>& sum_sq) {
  std::uint64_t cur = 0;
  double prev = 0;  // v(empty) == 0 by construction
  for (int i : order) {
    cur |= std::uint64_t{1} << i;
    double v = g.eval_mask(cur);
    double marginal = v - prev;
    sum[static_cast<std::size_t>(i)] += marginal;
    sum_sq[static_cast<std::size_t>(i)] += marginal * marginal;
    prev = v;
  }
}

void fill_order(std::vector<int>& order, Rng& rng) {
  std::iota(order.begin(), order.end(), 0);
  for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
    auto j = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(i + 1)));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
}

SampledShapley finish_sampled(std::vector<double> sum, const std::vector<double>& sum_sq,
                              std::uint64_t k) {
  SampledShapley out;
  out.permutations = k;
  std::size_t n = sum.size();
  out.phi.resize(n);
  out.stderr_.resize(n);
  auto kd = static_cast<double>(k);
  for (std::size_t i = 0; i < n; ++i) {
    out.phi[i] = sum[i] / kd;
    double var = 0;
    if (k > 1) var = std::max(0.0, (sum_sq[i] - kd * out.phi[i] * out.phi[i]) / (kd - 1));
    out.stderr_[i] = std::sqrt(var / kd);
  }
  return out;
}

}  // namespace

namespace {

// Shared by the parallel and serial entry points so both reduce the same
// chunk partials in the same order: the serial run is then a bit-exact
// reference for any worker count.
SampledShapley sampled_impl(const Game& g, std::uint64_t permutations, std::uint64_t seed,
                            bool parallel) {
  if (permutations < 1) throw DomainError("need at least one permutation");
  auto n = static_cast<std::size_t>(g.n());
  auto total = static_cast<std::int64_t>(permutations);
  std::int64_t num_chunks = (total + kPermChunk - 1) / kPermChunk;
  std::vector<std::vector<double>> part_sum(static_cast<std::size_t>(num_chunks)),
      part_sq(static_cast<std::size_t>(num_chunks));
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t c = 0; c < num_chunks; ++c) {
    std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
    std::vector<int> order(n);
    std::int64_t hi = std::min(total, (c + 1) * kPermChunk);
    for (std::int64_t k = c * kPermChunk; k < hi; ++k) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
      fill_order(order, rng);
      walk_permutation(g, order, sum, sum_sq);
    }
    part_sum[static_cast<std::size_t>(c)] = std::move(sum);
    part_sq[static_cast<std::size_t>(c)] = std::move(sum_sq);
  }
  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  for (std::int64_t c = 0; c < num_chunks; ++c)
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] += part_sum[static_cast<std::size_t>(c)][i];
      sum_sq[i] += part_sq[static_cast<std::size_t>(c)][i];
    }
  return finish_sampled(std::move(sum), sum_sq, permutations);
}

}  // namespace

SampledShapley shapley_sampled(const Game& g, std::uint64_t permutations, std::uint64_t seed) {
  return sampled_impl(g, permutations, seed, true);
}

SampledShapley shapley_sampled_serial(const Game& g, std::uint64_t permutations,
                                      std::uint64_t seed) {
  return sampled_impl(g, permutations, seed, false);
}

std::uint64_t sample_partition(const std::vector<double>& p, Rng& rng) {
  std::uint64_t bits = 0;
  for (std::size_t b = 0; b < p.size(); ++b)
    if (rng.bernoulli(p[b])) bits |= std::uint64_t{1} << b;
  return bits;
}

namespace {

// Per-player permutation key; shared keys across clamped partition pairs
// give common random numbers (a merged unit inherits its lowest member's
// key, so every other unit keeps its position).
std::uint64_t player_key(std::uint64_t sweep_seed, int player) {
  return derive_seed(sweep_seed, static_cast<std::uint64_t>(player) + 0x10);
}

struct SweepCtx {
  const Game* game = nullptr;
  Semantics semantics = Semantics::kUnit;
  std::vector<int> a_members;
  std::vector<int> outside;
  // scratch reused across sweeps to keep the inner loop allocation-free
  std::vector<std::uint64_t> unit_mask;
  std::vector<char> unit_is_block;
  std::vector<std::uint64_t> unit_key;
  std::vector<int> order;

  SweepCtx(const Game& g, PlayerSet a, Semantics sem) {
    if (a.n() != g.n()) throw DomainError("player set is for a different game size");
    if (a.empty()) throw DomainError("target set must be non-empty");
    game = &g;
    semantics = sem;
    a_members = a.members();
    outside = a.complement().members();
  }

  // One context sweep for the partition encoded by merge_bits; returns the
  // summed block marginals (an unbiased draw of the partition value).
  double sweep(std::uint64_t merge_bits, std::uint64_t sweep_seed, std::uint64_t& evals) {
    return semantics == Semantics::kUnit ? sweep_unit(merge_bits, sweep_seed, evals)
                                         : sweep_exclusive(merge_bits, sweep_seed, evals);
  }

 private:
  void build_units(std::uint64_t merge_bits) {
    unit_mask.clear();
    unit_is_block.clear();
    for (int j : outside) {
      unit_mask.push_back(std::uint64_t{1} << j);
      unit_is_block.push_back(0);
    }
    std::uint64_t block = std::uint64_t{1} << a_members[0];
    for (std::size_t r = 1; r < a_members.size(); ++r) {
      if ((merge_bits >> (r - 1)) & 1) {
        block |= std::uint64_t{1} << a_members[r];
      } else {
        unit_mask.push_back(block);
        unit_is_block.push_back(1);
        block = std::uint64_t{1} << a_members[r];
      }
    }
    unit_mask.push_back(block);
    unit_is_block.push_back(1);
  }

  // Uniform permutation of all units; prefix differences are the marginals,
  // and a unit's prefix size is uniform over 0..#units-1 by symmetry.
  double sweep_unit(std::uint64_t merge_bits, std::uint64_t sweep_seed, std::uint64_t& evals) {
    build_units(merge_bits);
    std::size_t u = unit_mask.size();
    unit_key.resize(u);
    order.resize(u);
    for (std::size_t k = 0; k < u; ++k) {
      unit_key[k] = player_key(sweep_seed, std::countr_zero(unit_mask[k]));
      order[k] = static_cast<int>(k);
    }
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      auto kx = unit_key[static_cast<std::size_t>(x)], ky = unit_key[static_cast<std::size_t>(y)];
      return kx != ky ? kx < ky : x < y;
    });
    std::uint64_t cur = 0;
    double prev = 0, sum = 0;
    for (int idx : order) {
      cur |= unit_mask[static_cast<std::size_t>(idx)];
      double v = game->eval_mask(cur);
      ++evals;
      if (unit_is_block[static_cast<std::size_t>(idx)]) sum += v - prev;
      prev = v;
    }
    return sum;
  }

  // Shared context S drawn from N\A (uniform size, then uniform subset via
  // smallest keys); every block is rated against the same S.
  double sweep_exclusive(std::uint64_t merge_bits, std::uint64_t sweep_seed,
                         std::uint64_t& evals) {
    auto o = static_cast<std::uint32_t>(outside.size());
    Rng size_rng(derive_seed(sweep_seed, 0x5));
    std::uint32_t r = size_rng.next_below(o + 1);
    std::uint64_t s_mask = 0;
    if (r > 0) {
      unit_key.resize(o);
      order.resize(o);
      for (std::uint32_t k = 0; k < o; ++k) {
        unit_key[k] = player_key(sweep_seed, outside[k]);
        order[k] = static_cast<int>(k);
      }
      std::sort(order.begin(), order.end(), [&](int x, int y) {
        auto kx = unit_key[static_cast<std::size_t>(x)], ky = unit_key[static_cast<std::size_t>(y)];
        return kx != ky ? kx < ky : x < y;
      });
      for (std::uint32_t k = 0; k < r; ++k)
        s_mask |= std::uint64_t{1} << outside[static_cast<std::size_t>(order[k])];
    }
    double base = 0;
    if (s_mask != 0) {
      base = game->eval_mask(s_mask);
      ++evals;
    }
    double sum = 0;
    std::uint64_t block = std::uint64_t{1} << a_members[0];
    auto flush = [&](std::uint64_t bmask) {
      double v = game->eval_mask(s_mask | bmask);
      ++evals;
      sum += v - base;
    };
    for (std::size_t q = 1; q < a_members.size(); ++q) {
      if ((merge_bits >> (q - 1)) & 1) {
        block |= std::uint64_t{1} << a_members[q];
      } else {
        flush(block);
        block = std::uint64_t{1} << a_members[q];
      }
    }
    flush(block);
    return sum;
  }
};

void check_config(const EstimatorConfig& cfg) {
  if (cfg.epochs < 1 || cfg.partition_samples < 1 || cfg.subset_samples < 1)
    throw DomainError("K1, K2, K3 must all be at least 1");
  if (!(cfg.learning_rate > 0)) throw DomainError("learning rate must be positive");
  if (!(cfg.clamp_eps > 0) || !(cfg.clamp_eps < 0.5))
    throw DomainError("clamp epsilon must lie in (0, 0.5)");
}

double clamp_p(double p, double eps) { return std::min(1.0 - eps, std::max(eps, p)); }

bool exact_fallback_applies(const Game& g, PlayerSet a, const EstimatorConfig& cfg) {
  return a.count() <= cfg.exact_fallback_m && g.n() <= Caps{}.shapley_n &&
         a.count() <= Caps{}.contiguous_m;
}

}  // namespace

double estimate_l(const Game& g, PlayerSet a, std::uint64_t merge_bits, int k3,
                  Semantics semantics, std::uint64_t seed) {
  if (k3 < 1) throw DomainError("need at least one sweep");
  SweepCtx ctx(g, a, semantics);
  std::uint64_t evals = 0;
  double sum = 0;
  for (int k = 0; k < k3; ++k)
    sum += ctx.sweep(merge_bits, derive_seed(seed, static_cast<std::uint64_t>(k)), evals);
  return sum / k3;
}

std::vector<double> grad_p(const Game& g, PlayerSet a, const std::vector<double>& p, int k2,
                           int k3, Semantics semantics, std::uint64_t seed) {
  if (k2 < 1 || k3 < 1) throw DomainError("need at least one sample");
  if (p.size() + 1 != static_cast<std::size_t>(a.count()))
    throw DomainError("p must have one entry per boundary of A");
  SweepCtx ctx(g, a, semantics);
  std::uint64_t evals = 0;
  std::vector<double> grad(p.size(), 0.0);
  for (std::size_t b = 0; b < p.size(); ++b) {
    std::uint64_t b_seed = derive_seed(seed, 0x100 + b);
    double acc = 0;
    for (int k = 0; k < k2; ++k) {
      std::uint64_t pair_seed = derive_seed(b_seed, static_cast<std::uint64_t>(k));
      Rng prng(derive_seed(pair_seed, 0x1));
      std::uint64_t bits = sample_partition(p, prng);
      std::uint64_t on = bits | (std::uint64_t{1} << b);
      std::uint64_t off = bits & ~(std::uint64_t{1} << b);
      double l_on = 0, l_off = 0;
      for (int s = 0; s < k3; ++s) {
        std::uint64_t sweep_seed = derive_seed(pair_seed, 0x2000 + static_cast<std::uint64_t>(s));
        l_on += ctx.sweep(on, sweep_seed, evals);
        l_off += ctx.sweep(off, sweep_seed, evals);
      }
      acc += (l_on - l_off) / k3;
    }
    grad[b] = acc / k2;
  }
  return grad;
}

double soft_value(const Game& g, PlayerSet a, const std::vector<double>& p, int num_samples,
                  Semantics semantics, std::uint64_t seed, std::uint64_t* eval_count) {
  if (num_samples < 1) throw DomainError("need at least one sample");
  SweepCtx ctx(g, a, semantics);
  std::uint64_t evals = 0;
  double sum = 0;
  for (int s = 0; s < num_samples; ++s) {
    std::uint64_t s_seed = derive_seed(seed, static_cast<std::uint64_t>(s));
    Rng prng(derive_seed(s_seed, 0x1));
    std::uint64_t bits = sample_partition(p, prng);
    sum += ctx.sweep(bits, derive_seed(s_seed, 0x2), evals);
  }
  if (eval_count) *eval_count += evals;
  return sum / num_samples;
}

namespace {

OptimizeResult optimize_exact(const Game& g, PlayerSet a, Direction dir,
                              const EstimatorConfig& cfg) {
  OptimizeResult res;
  std::uint64_t before = g.queries();
  int m = a.count();
  if (m == 1) {
    res.value = partition_value(g, a, singleton_partition(a), cfg.semantics);
  } else {
    ExactReport r = exact_t(g, a, cfg.semantics, /*contiguous_only=*/true);
    bool max = dir == Direction::kMax;
    res.value = r.base + (max ? r.b_max : r.b_min);
    std::uint64_t bits = bits_from_partition(a, max ? r.omega_max : r.omega_min);
    res.p.resize(static_cast<std::size_t>(m - 1));
    for (int b = 0; b < m - 1; ++b)
      res.p[static_cast<std::size_t>(b)] =
          ((bits >> b) & 1) ? 1.0 - cfg.clamp_eps : cfg.clamp_eps;
  }
  res.trace.exact_path = true;
  res.trace.final_value = res.value;
  res.trace.l_per_epoch.push_back(res.value);
  res.trace.p_per_epoch.push_back(res.p);
  res.trace.eval_count = g.queries() - before;
  return res;
}

}  // namespace

OptimizeResult optimize(const Game& g, PlayerSet a, Direction dir, const EstimatorConfig& cfg) {
  check_config(cfg);
  if (a.n() != g.n()) throw DomainError("player set is for a different game size");
  if (a.empty()) throw DomainError("target set must be non-empty");
  if (exact_fallback_applies(g, a, cfg)) return optimize_exact(g, a, dir, cfg);

  int m = a.count();
  int nb = m - 1;
  std::uint64_t dir_seed = derive_seed(cfg.seed, dir == Direction::kMax ? 1 : 2);
  SweepCtx ctx(g, a, cfg.semantics);
  OptimizeResult res;
  res.p.assign(static_cast<std::size_t>(nb), 0.5);
  res.trace.p_per_epoch.push_back(res.p);
  std::uint64_t evals = 0;
  double sign = dir == Direction::kMax ? 1.0 : -1.0;

  std::vector<double> grad_acc(static_cast<std::size_t>(nb));
  std::vector<int> grad_cnt(static_cast<std::size_t>(nb));
  for (int e = 0; e < cfg.epochs && nb > 0; ++e) {
    std::fill(grad_acc.begin(), grad_acc.end(), 0.0);
    std::fill(grad_cnt.begin(), grad_cnt.end(), 0);
    std::uint64_t e_seed = derive_seed(dir_seed, 0x4000 + static_cast<std::uint64_t>(e));
    double l_sum = 0;
    for (int k2 = 0; k2 < cfg.partition_samples; ++k2) {
      // Round-robin clamp budget: each pair of clamped runs targets one
      // boundary, cycling so every boundary is updated every epoch when
      // K2 >= m-1.
      auto b = static_cast<std::size_t>(
          (static_cast<long long>(e) * cfg.partition_samples + k2) % nb);
      std::uint64_t pair_seed = derive_seed(e_seed, static_cast<std::uint64_t>(k2));
      Rng prng(derive_seed(pair_seed, 0x1));
      std::uint64_t bits = sample_partition(res.p, prng);
      std::uint64_t on = bits | (std::uint64_t{1} << b);
      std::uint64_t off = bits & ~(std::uint64_t{1} << b);
      double l_on = 0, l_off = 0;
      for (int s = 0; s < cfg.subset_samples; ++s) {
        std::uint64_t sweep_seed = derive_seed(pair_seed, 0x2000 + static_cast<std::uint64_t>(s));
        l_on += ctx.sweep(on, sweep_seed, evals);
        l_off += ctx.sweep(off, sweep_seed, evals);
      }
      l_on /= cfg.subset_samples;
      l_off /= cfg.subset_samples;
      grad_acc[b] += l_on - l_off;
      ++grad_cnt[b];
      l_sum += 0.5 * (l_on + l_off);
    }
    for (std::size_t b = 0; b < static_cast<std::size_t>(nb); ++b)
      if (grad_cnt[b] > 0)
        res.p[b] = clamp_p(res.p[b] + sign * cfg.learning_rate * grad_acc[b] / grad_cnt[b],
                           cfg.clamp_eps);
    res.trace.l_per_epoch.push_back(l_sum / cfg.partition_samples);
    res.trace.p_per_epoch.push_back(res.p);
  }

  // Fresh-sample value at the final p, so the reported extremum is not the
  // maximum of the optimization noise.
  res.value = soft_value(g, a, res.p, cfg.partition_samples * cfg.subset_samples, cfg.semantics,
                         derive_seed(dir_seed, 0x7001), &evals);
  res.trace.final_value = res.value;
  res.trace.eval_count = evals;
  return res;
}

InteractionEstimate estimate_t(const Game& g, PlayerSet a, const EstimatorConfig& cfg) {
  check_config(cfg);
  if (a.n() != g.n()) throw DomainError("player set is for a different game size");
  if (a.empty()) throw DomainError("target set must be non-empty");
  InteractionEstimate est;
  est.a_mask = a.mask();
  est.n = g.n();
  est.semantics = cfg.semantics;
  int m = a.count();

  if (exact_fallback_applies(g, a, cfg) && m >= 2) {
    std::uint64_t before = g.queries();
    ExactReport r = exact_t(g, a, cfg.semantics, /*contiguous_only=*/true);
    est.t = r.t;
    est.l_max = r.base + r.b_max;
    est.l_min = r.base + r.b_min;
    est.omega_max = r.omega_max;
    est.omega_min = r.omega_min;
    est.exact_path = true;
    auto p_of = [&](const Partition& omega) {
      std::uint64_t bits = bits_from_partition(a, omega);
      std::vector<double> p(static_cast<std::size_t>(m - 1));
      for (int b = 0; b < m - 1; ++b)
        p[static_cast<std::size_t>(b)] =
            ((bits >> b) & 1) ? 1.0 - cfg.clamp_eps : cfg.clamp_eps;
      return p;
    };
    est.p_max = p_of(r.omega_max);
    est.p_min = p_of(r.omega_min);
    est.trace_max.exact_path = est.trace_min.exact_path = true;
    est.trace_max.final_value = est.l_max;
    est.trace_min.final_value = est.l_min;
    est.trace_max.l_per_epoch.push_back(est.l_max);
    est.trace_min.l_per_epoch.push_back(est.l_min);
    est.trace_max.p_per_epoch.push_back(est.p_max);
    est.trace_min.p_per_epoch.push_back(est.p_min);
    est.trace_max.eval_count = g.queries() - before;
    return est;
  }
  if (m == 1) {
    OptimizeResult one = optimize(g, a, Direction::kMax, cfg);
    est.t = 0;
    est.l_max = est.l_min = one.value;
    est.omega_max = est.omega_min = singleton_partition(a);
    est.exact_path = one.trace.exact_path;
    est.trace_max = one.trace;
    est.trace_min = one.trace;
    return est;
  }

  OptimizeResult up = optimize(g, a, Direction::kMax, cfg);
  OptimizeResult down = optimize(g, a, Direction::kMin, cfg);
  est.l_max = up.value;
  est.l_min = down.value;
  est.t = up.value - down.value;
  est.p_max = up.p;
  est.p_min = down.p;
  auto harden = [&](const std::vector<double>& p) {
    std::uint64_t bits = 0;
    for (std::size_t b = 0; b < p.size(); ++b)
      if (p[b] > 0.5) bits |= std::uint64_t{1} << b;
    return partition_from_bits(a, bits);
  };
  est.omega_max = harden(up.p);
  est.omega_min = harden(down.p);
  est.trace_max = std::move(up.trace);
  est.trace_min = std::move(down.trace);
  return est;
}

double instability(const Game& g, PlayerSet a, const EstimatorConfig& cfg, int repeats) {
  if (repeats < 2) throw DomainError("instability needs at least two repeats");
  std::vector<double> t(static_cast<std::size_t>(repeats));
  for (int rep = 0; rep < repeats; ++rep) {
    EstimatorConfig c = cfg;
    c.seed = derive_seed(cfg.seed, 0xB000 + static_cast<std::uint64_t>(rep));
    t[static_cast<std::size_t>(rep)] = estimate_t(g, a, c).t;
  }
  double disagreement = 0, magnitude = 0;
  int pairs = 0;
  for (int u = 0; u < repeats; ++u) {
    magnitude += std::abs(t[static_cast<std::size_t>(u)]);
    for (int v = u + 1; v < repeats; ++v) {
      disagreement += std::abs(t[static_cast<std::size_t>(u)] - t[static_cast<std::size_t>(v)]);
      ++pairs;
    }
  }
  magnitude /= repeats;
  if (magnitude == 0) throw DegenerateError("all T estimates are zero");
  return (disagreement / pairs) / magnitude;
}

double instability_many(const std::vector<std::pair<Game, PlayerSet>>& inputs,
                        const EstimatorConfig& cfg, int repeats) {
  if (inputs.empty()) throw DomainError("need at least one game");
  double sum = 0;
  for (std::size_t idx = 0; idx < inputs.size(); ++idx) {
    EstimatorConfig c = cfg;
    c.seed = derive_seed(cfg.seed, 0xC000 + idx);
    sum += instability(inputs[idx].first, inputs[idx].second, c, repeats);
  }
  return sum / static_cast<double>(inputs.size());
}

nlohmann::json estimator_config_to_json(const EstimatorConfig& cfg) {
  return nlohmann::json{{"epochs", cfg.epochs},
                        {"partition_samples", cfg.partition_samples},
                        {"subset_samples", cfg.subset_samples},
                        {"learning_rate", cfg.learning_rate},
                        {"seed", cfg.seed},
                        {"semantics", semantics_name(cfg.semantics)},
                        {"clamp_eps", cfg.clamp_eps},
                        {"exact_fallback_m", cfg.exact_fallback_m}};
}

nlohmann::json estimate_to_json(const InteractionEstimate& e) {
  auto omega_json = [&](const Partition& omega, const std::vector<double>& p) {
    PlayerSet a = PlayerSet::from_mask(e.n, e.a_mask);
    nlohmann::json blocks = nlohmann::json::array();
    for (PlayerSet b : omega.blocks) blocks.push_back(b.mask());
    return nlohmann::json{
        {"bits", omega.blocks.empty() ? nlohmann::json(nullptr)
                                      : nlohmann::json(bits_from_partition(a, omega))},
        {"blocks", std::move(blocks)},
        {"p", p}};
  };
  return nlohmann::json{{"A", e.a_mask},
                        {"n", e.n},
                        {"semantics", semantics_name(e.semantics)},
                        {"T", e.t},
                        {"L_max", e.l_max},
                        {"L_min", e.l_min},
                        {"exact_path", e.exact_path},
                        {"omega_max", omega_json(e.omega_max, e.p_max)},
                        {"omega_min", omega_json(e.omega_min, e.p_min)},
                        {"evaluations",
                         {{"max", e.trace_max.eval_count}, {"min", e.trace_min.eval_count}}}};
}

void trace_to_csv(std::ostream& out, const EstimateTrace& trace) {
  std::size_t nb = trace.p_per_epoch.empty() ? 0 : trace.p_per_epoch.front().size();
  out << "epoch,L";
  for (std::size_t b = 1; b <= nb; ++b) out << ",p_" << b;
  out << "\n";
  for (std::size_t e = 0; e < trace.l_per_epoch.size(); ++e) {
    out << (e + 1) << "," << trace.l_per_epoch[e];
    std::size_t pi = std::min(e + 1, trace.p_per_epoch.size() - 1);
    for (double p : trace.p_per_epoch[pi]) out << "," << p;
    out << "\n";
  }
}

}  // namespace mvi

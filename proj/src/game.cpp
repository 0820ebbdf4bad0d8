#include "mvi/game.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <utility>

#include "mvi/errors.hpp"
#include "mvi/rng.hpp"

namespace mvi {

namespace {

bool resolve_cache(Cache cache, int n) {
  switch (cache) {
    case Cache::kOn: return true;
    case Cache::kOff: return false;
    case Cache::kAuto: return n <= 24;
  }
  return false;
}

}  // namespace

Game::Game(int n, EvalFn raw, Cache cache) {
  if (n < 0 || n > kMaxPlayers) throw DomainError("player count must be in [0, 64]");
  if (!raw) throw DomainError("null evaluation function");
  s_ = std::make_shared<State>();
  s_->n = n;
  s_->fn = std::move(raw);
  s_->cache_on = resolve_cache(cache, n);
  s_->offset = s_->fn(0);
}

double Game::eval(PlayerSet set) const {
  if (set.n() != s_->n) throw DomainError("player set is for a different game size");
  return eval_mask(set.mask());
}

double Game::eval_mask(std::uint64_t member_mask) const {
  if (s_->n < 64 && (member_mask >> s_->n) != 0)
    throw DomainError("player index out of range");
  s_->queries.fetch_add(1, std::memory_order_relaxed);
  if (!s_->cache_on) {
    s_->raw.fetch_add(1, std::memory_order_relaxed);
    return s_->fn(member_mask) - s_->offset;
  }
  Shard& shard = s_->shards[Rng::mix(member_mask) % kShards];
  {
    std::lock_guard<std::mutex> lock(shard.mu);
    auto it = shard.map.find(member_mask);
    if (it != shard.map.end()) return it->second;
  }
  s_->raw.fetch_add(1, std::memory_order_relaxed);
  double value = s_->fn(member_mask) - s_->offset;
  std::lock_guard<std::mutex> lock(shard.mu);
  shard.map.emplace(member_mask, value);
  return value;
}

void Game::reset_counters() const {
  s_->queries.store(0, std::memory_order_relaxed);
  s_->raw.store(0, std::memory_order_relaxed);
}

Game make_table_game(std::vector<double> values, Cache cache) {
  if (values.empty() || !std::has_single_bit(values.size()))
    throw FormatError("table length must be a power of two");
  int n = std::countr_zero(values.size());
  auto table = std::make_shared<std::vector<double>>(std::move(values));
  return Game(n, [table](std::uint64_t mask) { return (*table)[mask]; }, cache);
}

Game make_expression_game(ExpressionModel model, Cache cache) {
  if (!model.ast) throw DomainError("expression model has no ast");
  if (model.presence.size() != static_cast<std::size_t>(model.n) ||
      model.baseline.size() != static_cast<std::size_t>(model.n))
    throw FormatError("presence/baseline length must equal n");
  int n = model.n;
  auto body = std::make_shared<ExpressionModel>(std::move(model));
  return Game(n, [body](std::uint64_t mask) { return body->eval_subset(mask); }, cache);
}

Game project_vector(const VectorGame& vg, Cache cache) {
  if (vg.n < 0 || vg.n > kMaxPlayers) throw DomainError("player count must be in [0, 64]");
  if (!vg.eval_vec) throw DomainError("null vector evaluation function");
  std::uint64_t full = PlayerSet::full_set(vg.n).mask();
  auto f_n = std::make_shared<std::vector<double>>(vg.eval_vec(full));
  double norm_sq = 0;
  for (double x : *f_n) norm_sq += x * x;
  double norm = std::sqrt(norm_sq);
  if (!(norm > 0)) throw DegenerateError("full-set feature has zero norm");
  auto fn = vg.eval_vec;
  return Game(
      vg.n,
      [f_n, fn, norm](std::uint64_t mask) {
        std::vector<double> f_s = fn(mask);
        if (f_s.size() != f_n->size())
          throw FormatError("vector game output dimension changed across subsets");
        double dot = 0;
        for (std::size_t i = 0; i < f_s.size(); ++i) dot += (*f_n)[i] * f_s[i];
        return dot / norm;
      },
      cache);
}

std::vector<PlayerSet> normalize_units(int n, std::vector<PlayerSet> units) {
  if (units.empty()) throw DomainError("need at least one unit");
  std::uint64_t seen = 0;
  for (const PlayerSet& u : units) {
    if (u.n() != n) throw DomainError("unit is for a different game size");
    if (u.empty()) throw DomainError("empty unit");
    if ((seen & u.mask()) != 0) throw DomainError("units must be pairwise disjoint");
    seen |= u.mask();
  }
  std::sort(units.begin(), units.end(),
            [](PlayerSet a, PlayerSet b) { return a.lowest() < b.lowest(); });
  return units;
}

Game with_units(const Game& g, std::vector<PlayerSet> units, Cache cache) {
  auto sorted = std::make_shared<std::vector<PlayerSet>>(normalize_units(g.n(), std::move(units)));
  if (sorted->size() > static_cast<std::size_t>(kMaxPlayers))
    throw DomainError("too many units");
  int m = static_cast<int>(sorted->size());
  Game parent = g;
  return Game(
      m,
      [parent, sorted](std::uint64_t mask) {
        std::uint64_t expanded = 0;
        for (std::uint64_t b = mask; b != 0; b &= b - 1)
          expanded |= (*sorted)[static_cast<std::size_t>(std::countr_zero(b))].mask();
        return parent.eval_mask(expanded);
      },
      cache);
}

Game contract(const Game& g, PlayerSet c, Cache cache) {
  if (c.empty()) throw DomainError("cannot contract the empty coalition");
  if (c.n() != g.n()) throw DomainError("coalition is for a different game size");
  std::vector<PlayerSet> units;
  units.reserve(static_cast<std::size_t>(g.n() - c.count() + 1));
  units.push_back(c);
  for (int i = 0; i < g.n(); ++i)
    if (!c.contains(i)) units.push_back(PlayerSet::single(g.n(), i));
  return with_units(g, std::move(units), cache);
}

int contract_index(PlayerSet c) {
  if (c.empty()) throw DomainError("cannot contract the empty coalition");
  return c.lowest();
}

Game restrict_to(const Game& g, PlayerSet alive, Cache cache) {
  if (alive.empty()) throw DomainError("cannot restrict to no players");
  if (alive.n() != g.n()) throw DomainError("player set is for a different game size");
  std::vector<PlayerSet> units;
  units.reserve(static_cast<std::size_t>(alive.count()));
  for (int i : alive.members()) units.push_back(PlayerSet::single(g.n(), i));
  return with_units(g, std::move(units), cache);
}

Game sum_game(const Game& a, const Game& b, Cache cache) {
  if (a.n() != b.n()) throw DomainError("cannot add games of different sizes");
  Game ga = a, gb = b;
  return Game(
      a.n(), [ga, gb](std::uint64_t mask) { return ga.eval_mask(mask) + gb.eval_mask(mask); },
      cache);
}

Game scaled_game(double factor, const Game& g, Cache cache) {
  Game gg = g;
  return Game(
      g.n(), [gg, factor](std::uint64_t mask) { return factor * gg.eval_mask(mask); }, cache);
}

namespace {

std::vector<double> reals_field(const nlohmann::json& j, const char* key, int n,
                                double fallback) {
  if (!j.contains(key)) return std::vector<double>(static_cast<std::size_t>(n), fallback);
  const auto& arr = j.at(key);
  if (!arr.is_array() || arr.size() != static_cast<std::size_t>(n))
    throw FormatError(std::string("\"") + key + "\" must be an array of n reals");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& x : arr) {
    if (!x.is_number()) throw FormatError(std::string("\"") + key + "\" must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

int n_field(const nlohmann::json& j) {
  if (!j.contains("n") || !j.at("n").is_number_integer())
    throw FormatError("model needs an integer \"n\"");
  int n = j.at("n").get<int>();
  if (n <= 0 || n > kMaxPlayers) throw FormatError("\"n\" must be in [1, 64]");
  return n;
}

}  // namespace

ExpressionModel expression_model_from_json(const nlohmann::json& j) {
  int n = n_field(j);
  if (!j.contains("ast")) throw FormatError("expression model needs an \"ast\"");
  ExpressionModel m = ExpressionModel::make(n, expr_from_json(j.at("ast"), n));
  m.presence = reals_field(j, "presence", n, 1.0);
  m.baseline = reals_field(j, "baseline", n, 0.0);
  return m;
}

Game game_from_model_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("model must be a JSON object");
  std::string type = j.value("type", std::string("expression"));
  if (type == "expression") return make_expression_game(expression_model_from_json(j));
  int n = n_field(j);
  if (!j.contains("values") || !j.at("values").is_array())
    throw FormatError("table model needs a \"values\" array");
  const auto& values = j.at("values");
  if (values.size() != (std::uint64_t{1} << n))
    throw FormatError("\"values\" length must be 2^n");
  if (type == "table") {
    std::vector<double> table;
    table.reserve(values.size());
    for (const auto& x : values) {
      if (!x.is_number()) throw FormatError("table \"values\" must hold numbers");
      table.push_back(x.get<double>());
    }
    return make_table_game(std::move(table));
  }
  if (type == "vector_table") {
    auto rows = std::make_shared<std::vector<std::vector<double>>>();
    rows->reserve(values.size());
    std::size_t dim = 0;
    for (const auto& row : values) {
      if (!row.is_array() || row.empty())
        throw FormatError("vector_table rows must be non-empty arrays");
      if (rows->empty()) dim = row.size();
      if (row.size() != dim) throw FormatError("vector_table rows must share one dimension");
      std::vector<double> r;
      r.reserve(row.size());
      for (const auto& x : row) {
        if (!x.is_number()) throw FormatError("vector_table rows must hold numbers");
        r.push_back(x.get<double>());
      }
      rows->push_back(std::move(r));
    }
    VectorGame vg;
    vg.n = n;
    vg.eval_vec = [rows](std::uint64_t mask) { return (*rows)[mask]; };
    return project_vector(vg);
  }
  throw FormatError("unknown model type: " + type);
}

nlohmann::json model_to_json(const ExpressionModel& m) {
  if (!m.ast) throw DomainError("expression model has no ast");
  return nlohmann::json{{"n", m.n},
                        {"type", "expression"},
                        {"ast", expr_to_json(*m.ast)},
                        {"presence", m.presence},
                        {"baseline", m.baseline}};
}

}  // namespace mvi

#include "mvi/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <utility>

#include "mvi/errors.hpp"
#include "mvi/exact.hpp"
#include "mvi/rng.hpp"

namespace mvi {

const char* method_name(Method m) {
  switch (m) {
    case Method::kOurs: return "ours";
    case Method::kBaseline1: return "baseline1";
    case Method::kBaseline2: return "baseline2";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "ours") return Method::kOurs;
  if (name == "baseline1" || name == "random") return Method::kBaseline1;
  if (name == "baseline2" || name == "pairwise") return Method::kBaseline2;
  throw DomainError("unknown method: " + name);
}

namespace {

// Positive-interaction threshold for baseline2; junction pairs come out as
// an exact algebraic zero plus rounding noise, which must not merge them.
constexpr double kPairTol = 1e-9;

void config_comment(std::ostream& out, const EstimatorConfig& cfg) {
  out << "# config " << estimator_config_to_json(cfg).dump() << "\n";
}

}  // namespace

Partition method_partition(const SyntheticModel& model, Method method, const Game& g,
                           const EstimatorConfig& config) {
  PlayerSet a = model.a;
  int m = a.count();
  if (m == 1) return singleton_partition(a);
  std::uint64_t bits = 0;
  switch (method) {
    case Method::kOurs: {
      OptimizeResult up = optimize(g, a, Direction::kMax, config);
      for (int b = 0; b < m - 1; ++b)
        if (up.p[static_cast<std::size_t>(b)] > 0.5) bits |= std::uint64_t{1} << b;
      break;
    }
    case Method::kBaseline1: {
      Rng rng(derive_seed(config.seed, 0xBA5E1));
      for (int b = 0; b < m - 1; ++b)
        if (rng.bernoulli(0.5)) bits |= std::uint64_t{1} << b;
      break;
    }
    case Method::kBaseline2: {
      std::vector<int> members = a.members();
      for (int b = 0; b < m - 1; ++b)
        if (pairwise_interaction(g, members[static_cast<std::size_t>(b)],
                                 members[static_cast<std::size_t>(b) + 1]) > kPairTol)
          bits |= std::uint64_t{1} << b;
      break;
    }
  }
  return partition_from_bits(a, bits);
}

AccuracyReport eval_method_accuracy(const std::vector<SyntheticModel>& dataset, Method method,
                                    const EstimatorConfig& config) {
  if (dataset.empty()) throw DomainError("accuracy protocol needs a non-empty dataset");
  AccuracyReport report;
  report.method = method_name(method);
  report.dataset = family_name(dataset.front().family);
  report.models = static_cast<int>(dataset.size());
  report.seed = config.seed;
  report.config = config;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const SyntheticModel& model = dataset[i];
    Game g = model_table_game(model);
    EstimatorConfig cfg = config;
    cfg.seed = derive_seed(config.seed, 0xAC00 + i);
    Partition omega = method_partition(model, method, g, cfg);
    for (const OpResult& r : ground_truth_check(model, omega)) {
      if (!r.scored) continue;
      ++report.scored;
      if (r.correct) ++report.correct;
    }
  }
  if (report.scored == 0) throw DegenerateError("dataset has no scored operations");
  report.rate = static_cast<double>(report.correct) / static_cast<double>(report.scored);
  return report;
}

ErrorCurve error_vs_exact(const std::vector<SyntheticModel>& games, const EstimatorConfig& config,
                          const std::vector<int>& checkpoints) {
  if (games.empty()) throw DomainError("error protocol needs games");
  if (checkpoints.empty()) throw DomainError("error protocol needs checkpoints");
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    if (checkpoints[k] < 0 || checkpoints[k] > config.epochs)
      throw DomainError("checkpoint outside the training range");
    if (k > 0 && checkpoints[k] <= checkpoints[k - 1])
      throw DomainError("checkpoints must increase strictly");
  }

  ErrorCurve curve;
  curve.epochs = checkpoints;
  curve.config = config;
  int soft_samples = config.partition_samples * config.subset_samples;
  for (std::size_t i = 0; i < games.size(); ++i) {
    const SyntheticModel& model = games[i];
    if (model.a.count() < 2) throw DomainError("error protocol needs |A| >= 2");
    Game g = model_table_game(model);
    double truth = exact_t(g, model.a, config.semantics, /*contiguous_only=*/true).t;
    EstimatorConfig cfg = config;
    cfg.seed = derive_seed(config.seed, 0xE500 + i);
    InteractionEstimate est = estimate_t(g, model.a, cfg);
    const auto& snaps_max = est.trace_max.p_per_epoch;
    const auto& snaps_min = est.trace_min.p_per_epoch;
    for (int epoch : checkpoints) {
      auto e = static_cast<std::size_t>(epoch);
      const auto& p_max = snaps_max[std::min(e, snaps_max.size() - 1)];
      const auto& p_min = snaps_min[std::min(e, snaps_min.size() - 1)];
      double t_hat = soft_value(g, model.a, p_max, soft_samples, config.semantics,
                                derive_seed(cfg.seed, 0x9000 + e)) -
                     soft_value(g, model.a, p_min, soft_samples, config.semantics,
                                derive_seed(cfg.seed, 0x9100 + e));
      ErrorPoint pt;
      pt.game = static_cast<int>(i);
      pt.epoch = epoch;
      pt.t_truth = truth;
      pt.t_hat = t_hat;
      pt.abs_err = std::abs(truth - t_hat);
      pt.rel_err = pt.abs_err / std::max(std::abs(truth), 1.0);
      curve.points.push_back(pt);
    }
  }
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    std::vector<double> abs_errs, rel_errs;
    for (const ErrorPoint& pt : curve.points)
      if (pt.epoch == checkpoints[k]) {
        abs_errs.push_back(pt.abs_err);
        rel_errs.push_back(pt.rel_err);
      }
    curve.median_abs.push_back(median(std::move(abs_errs)));
    curve.median_rel.push_back(median(std::move(rel_errs)));
  }
  return curve;
}

InstabilitySweep instability_sweep(const std::vector<SyntheticModel>& games,
                                   const std::vector<int>& budgets, int repeats,
                                   const EstimatorConfig& config) {
  if (games.empty()) throw DomainError("instability protocol needs games");
  if (budgets.size() < 2) throw DomainError("instability protocol needs at least two budgets");
  InstabilitySweep sweep;
  sweep.repeats = repeats;
  sweep.config = config;
  for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
    if (budgets[bi] < 1) throw DomainError("budgets must be positive");
    InstabilityPoint point;
    point.budget = budgets[bi];
    EstimatorConfig cfg = config;
    cfg.subset_samples = std::max(1, budgets[bi] / config.partition_samples);
    std::uint64_t budget_seed = derive_seed(config.seed, 0xB0D0 + bi);
    for (std::size_t gi = 0; gi < games.size(); ++gi) {
      Game g = model_table_game(games[gi]);
      cfg.seed = derive_seed(budget_seed, gi);
      try {
        point.per_game.push_back(instability(g, games[gi].a, cfg, repeats));
      } catch (const DegenerateError&) {
        ++point.degenerate;
      }
    }
    if (point.per_game.empty())
      throw DegenerateError("every game degenerated at budget " + std::to_string(budgets[bi]));
    point.median = median(point.per_game);
    sweep.points.push_back(std::move(point));
  }
  return sweep;
}

ConvergenceTrace convergence_trace(const SyntheticModel& model, const EstimatorConfig& config) {
  ConvergenceTrace trace;
  trace.config = config;
  Game g = model_table_game(model);
  trace.estimate = estimate_t(g, model.a, config);
  auto flag = [](const std::vector<double>& p, std::vector<int>& out) {
    for (std::size_t b = 0; b < p.size(); ++b)
      if (p[b] > 0.25 && p[b] < 0.75) out.push_back(static_cast<int>(b));
  };
  flag(trace.estimate.p_max, trace.flagged_max);
  flag(trace.estimate.p_min, trace.flagged_min);
  return trace;
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw DomainError("median of an empty sample");
  std::sort(xs.begin(), xs.end());
  std::size_t h = xs.size() / 2;
  return xs.size() % 2 ? xs[h] : 0.5 * (xs[h - 1] + xs[h]);
}

void write_accuracy_csv(std::ostream& out, const std::vector<AccuracyReport>& cells) {
  if (cells.empty()) throw DomainError("no accuracy cells to write");
  config_comment(out, cells.front().config);
  out << "# models_per_cell";
  for (const AccuracyReport& c : cells) out << " " << c.dataset << "=" << c.models;
  out << "\n";
  std::vector<std::string> methods, datasets;
  for (const AccuracyReport& c : cells) {
    if (std::find(methods.begin(), methods.end(), c.method) == methods.end())
      methods.push_back(c.method);
    if (std::find(datasets.begin(), datasets.end(), c.dataset) == datasets.end())
      datasets.push_back(c.dataset);
  }
  out << "method";
  for (const std::string& d : datasets) out << "," << d;
  out << "\n";
  for (const std::string& m : methods) {
    out << m;
    for (const std::string& d : datasets) {
      out << ",";
      for (const AccuracyReport& c : cells)
        if (c.method == m && c.dataset == d) out << c.rate;
    }
    out << "\n";
  }
}

nlohmann::json accuracy_to_json(const std::vector<AccuracyReport>& cells) {
  nlohmann::json rows = nlohmann::json::array();
  for (const AccuracyReport& c : cells)
    rows.push_back({{"method", c.method},
                    {"dataset", c.dataset},
                    {"rate", c.rate},
                    {"models", c.models},
                    {"scored", c.scored},
                    {"correct", c.correct},
                    {"seed", c.seed}});
  nlohmann::json j{{"cells", std::move(rows)}};
  if (!cells.empty()) j["config"] = estimator_config_to_json(cells.front().config);
  return j;
}

void write_error_csv(std::ostream& out, const ErrorCurve& curve) {
  config_comment(out, curve.config);
  out << "game_id,epoch,t_truth,t_hat,abs_err,rel_err\n";
  for (const ErrorPoint& pt : curve.points)
    out << pt.game << "," << pt.epoch << "," << pt.t_truth << "," << pt.t_hat << ","
        << pt.abs_err << "," << pt.rel_err << "\n";
}

nlohmann::json error_to_json(const ErrorCurve& curve) {
  nlohmann::json pts = nlohmann::json::array();
  for (const ErrorPoint& pt : curve.points)
    pts.push_back({{"game", pt.game},
                   {"epoch", pt.epoch},
                   {"t_truth", pt.t_truth},
                   {"t_hat", pt.t_hat},
                   {"abs_err", pt.abs_err},
                   {"rel_err", pt.rel_err}});
  return nlohmann::json{{"config", estimator_config_to_json(curve.config)},
                        {"epochs", curve.epochs},
                        {"median_abs", curve.median_abs},
                        {"median_rel", curve.median_rel},
                        {"points", std::move(pts)}};
}

void write_instability_csv(std::ostream& out, const InstabilitySweep& sweep) {
  config_comment(out, sweep.config);
  out << "# repeats " << sweep.repeats << "\n";
  out << "budget,median_instability,games,degenerate\n";
  for (const InstabilityPoint& pt : sweep.points)
    out << pt.budget << "," << pt.median << "," << pt.per_game.size() << "," << pt.degenerate
        << "\n";
}

nlohmann::json instability_to_json(const InstabilitySweep& sweep) {
  nlohmann::json pts = nlohmann::json::array();
  for (const InstabilityPoint& pt : sweep.points)
    pts.push_back({{"budget", pt.budget},
                   {"median", pt.median},
                   {"degenerate", pt.degenerate},
                   {"per_game", pt.per_game}});
  return nlohmann::json{{"config", estimator_config_to_json(sweep.config)},
                        {"repeats", sweep.repeats},
                        {"points", std::move(pts)}};
}

void write_convergence_csv(std::ostream& out, const ConvergenceTrace& trace) {
  config_comment(out, trace.config);
  out << "direction,epoch,L";
  std::size_t nb = trace.estimate.p_max.size();
  for (std::size_t b = 1; b <= nb; ++b) out << ",p_" << b;
  out << "\n";
  auto rows = [&](const char* dir, const EstimateTrace& t) {
    for (std::size_t e = 0; e < t.l_per_epoch.size(); ++e) {
      out << dir << "," << (e + 1) << "," << t.l_per_epoch[e];
      std::size_t pi = std::min(e + 1, t.p_per_epoch.size() - 1);
      for (double p : t.p_per_epoch[pi]) out << "," << p;
      out << "\n";
    }
  };
  rows("max", trace.estimate.trace_max);
  rows("min", trace.estimate.trace_min);
}

nlohmann::json convergence_to_json(const ConvergenceTrace& trace) {
  auto snaps = [](const EstimateTrace& t) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& p : t.p_per_epoch) j.push_back(p);
    return j;
  };
  return nlohmann::json{{"config", estimator_config_to_json(trace.config)},
                        {"estimate", estimate_to_json(trace.estimate)},
                        {"p_max_per_epoch", snaps(trace.estimate.trace_max)},
                        {"p_min_per_epoch", snaps(trace.estimate.trace_min)},
                        {"l_max_per_epoch", trace.estimate.trace_max.l_per_epoch},
                        {"l_min_per_epoch", trace.estimate.trace_min.l_per_epoch},
                        {"flagged_max", trace.flagged_max},
                        {"flagged_min", trace.flagged_min}};
}

}  // namespace mvi

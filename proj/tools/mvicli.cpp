#include <omp.h>

#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mvi/errors.hpp"
#include "mvi/estimator.hpp"
#include "mvi/evaluation.hpp"
#include "mvi/exact.hpp"
#include "mvi/game.hpp"
#include "mvi/synthetic.hpp"

namespace {

using nlohmann::json;

struct CliOptions {
  std::uint64_t seed = 0;
  int epochs = 100;
  int partition_samples = 8;
  int subset_samples = 256;
  double lr = 0.1;
  std::string semantics = "unit";
  bool contiguous = true;
  bool components = false;
  std::string out;
  int workers = 0;
  bool ordered_reduce = false;  // reductions are always ordered; kept for interface stability
};

mvi::EstimatorConfig estimator_config(const CliOptions& opt) {
  mvi::EstimatorConfig cfg;
  cfg.epochs = opt.epochs;
  cfg.partition_samples = opt.partition_samples;
  cfg.subset_samples = opt.subset_samples;
  cfg.learning_rate = opt.lr;
  cfg.seed = opt.seed;
  cfg.semantics = mvi::semantics_from_name(opt.semantics);
  return cfg;
}

json run_config_json(const std::string& command, const CliOptions& opt) {
  return json{{"command", command},
              {"seed", opt.seed},
              {"epochs", opt.epochs},
              {"partition_samples", opt.partition_samples},
              {"subset_samples", opt.subset_samples},
              {"learning_rate", opt.lr},
              {"semantics", opt.semantics},
              {"contiguous", opt.contiguous},
              {"components", opt.components},
              {"workers", opt.workers},
              {"ordered_reduce", opt.ordered_reduce}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mvi::FormatError("cannot open " + path);
  json j;
  in >> j;
  return j;
}

std::vector<mvi::SyntheticModel> read_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mvi::FormatError("cannot open " + path);
  return mvi::read_manifest(in);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw mvi::FormatError("cannot write " + path);
  return out;
}

void write_json_file(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

mvi::PlayerSet players_from_list(int n, const std::vector<int>& members) {
  std::uint64_t mask = 0;
  for (int p : members) {
    if (p < 0 || p >= n) throw mvi::DomainError("player index out of range: " + std::to_string(p));
    mask |= std::uint64_t{1} << p;
  }
  return mvi::PlayerSet::from_mask(n, mask);
}

// Shared "pick the analyzed game" inputs: either an explicit model file plus
// --a, or a manifest row whose target span is the default A.
struct GameInputs {
  std::string model_path;
  std::string manifest_path;
  int index = 0;
  std::vector<int> a_members;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--model", model_path, "JSON model file (expression/table/vector_table)");
    cmd->add_option("--manifest", manifest_path, "JSON-lines manifest of generated models");
    cmd->add_option("--index", index, "row of --manifest to analyze")->capture_default_str();
    cmd->add_option("--a", a_members, "members of the analyzed set A")->delimiter(',');
  }

  std::pair<mvi::Game, mvi::PlayerSet> resolve() const {
    if (model_path.empty() == manifest_path.empty())
      throw mvi::FormatError("give exactly one of --model or --manifest");
    if (!model_path.empty()) {
      mvi::Game g = mvi::game_from_model_json(read_json_file(model_path));
      if (a_members.empty()) throw mvi::FormatError("--a is required with --model");
      return {g, players_from_list(g.n(), a_members)};
    }
    auto models = read_manifest_file(manifest_path);
    if (index < 0 || static_cast<std::size_t>(index) >= models.size())
      throw mvi::FormatError("--index outside the manifest");
    const mvi::SyntheticModel& model = models[static_cast<std::size_t>(index)];
    mvi::Game g = model.n <= 20 ? mvi::model_table_game(model) : mvi::model_game(model);
    mvi::PlayerSet a =
        a_members.empty() ? model.a : players_from_list(model.n, a_members);
    return {g, a};
  }
};

int run(int argc, char** argv) {
  CLI::App app{"multivariate interaction significance toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may come after the subcommand name
  CliOptions opt;
  app.add_option("--seed", opt.seed, "root seed for all randomness")->capture_default_str();
  app.add_option("--epochs", opt.epochs, "K1: training epochs")->capture_default_str();
  app.add_option("--partition-samples", opt.partition_samples, "K2: clamp pairs per epoch")
      ->capture_default_str();
  app.add_option("--subset-samples", opt.subset_samples, "K3: context sweeps per partition")
      ->capture_default_str();
  app.add_option("--lr", opt.lr, "learning rate for boundary probabilities")
      ->capture_default_str();
  app.add_option("--semantics", opt.semantics, "coalition context: exclusive or unit")
      ->check(CLI::IsMember({"exclusive", "unit"}))
      ->capture_default_str();
  app.add_flag("--contiguous,!--general", opt.contiguous,
               "restrict partitions to contiguous spans of A (--general lifts it)");
  app.add_flag("--components", opt.components, "include elementary interaction components");
  app.add_option("--out", opt.out, "output file");
  app.add_option("--workers", opt.workers, "worker threads (0 = library default)");
  app.add_flag("--ordered-reduce", opt.ordered_reduce,
               "force deterministic reductions (always on; accepted for compatibility)");

  auto* gen = app.add_subcommand("generate", "write a synthetic model manifest");
  std::string family = "addmul";
  int count = 0;
  gen->add_option("--family", family, "addmul, andor, or exponential")->required();
  gen->add_option("--count", count, "number of models")->required();

  auto* exact_cmd = app.add_subcommand("exact", "exact interaction report for one model");
  GameInputs exact_in;
  exact_in.add_to(exact_cmd);

  auto* est_cmd = app.add_subcommand("estimate", "sampled interaction estimate for one model");
  GameInputs est_in;
  est_in.add_to(est_cmd);
  std::string trace_path;
  est_cmd->add_option("--trace", trace_path, "CSV file for the per-epoch training trace");

  auto* eval_cmd = app.add_subcommand("eval", "run an evaluation protocol over a dataset");
  std::string protocol = "accuracy";
  std::vector<std::string> datasets;
  std::vector<std::string> methods;
  std::vector<int> checkpoints = {0, 1, 2, 5, 10, 20, 50, 100};
  std::vector<int> budgets = {100, 500, 1000, 2000, 5000};
  int repeats = 6;
  int eval_index = 0;
  std::string json_path;
  eval_cmd->add_option("--protocol", protocol, "accuracy, error, instability, or convergence")
      ->check(CLI::IsMember({"accuracy", "error", "instability", "convergence"}))
      ->capture_default_str();
  eval_cmd->add_option("--dataset", datasets, "manifest file(s)")->required();
  eval_cmd->add_option("--method", methods, "ours, baseline1, baseline2 (accuracy protocol)");
  eval_cmd->add_option("--checkpoints", checkpoints, "epoch checkpoints (error protocol)")
      ->delimiter(',');
  eval_cmd->add_option("--budgets", budgets, "per-epoch sample budgets (instability protocol)")
      ->delimiter(',');
  eval_cmd->add_option("--repeats", repeats, "re-estimates per game (instability protocol)")
      ->capture_default_str();
  eval_cmd->add_option("--game-index", eval_index, "manifest row (convergence protocol)")
      ->capture_default_str();
  eval_cmd->add_option("--json", json_path, "also write the full JSON artifact here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints message or help text
    return code == 0 ? 0 : 2;
  }
  if (opt.workers > 0) omp_set_num_threads(opt.workers);

  if (gen->parsed()) {
    json cfg = run_config_json("generate", opt);
    cfg["family"] = family;
    cfg["count"] = count;
    auto models = mvi::generate_dataset(mvi::family_from_name(family), count, opt.seed);
    if (opt.out.empty()) {
      mvi::write_manifest(std::cout, models);
    } else {
      auto out = open_out(opt.out);
      mvi::write_manifest(out, models);
      write_json_file(opt.out + ".run.json", cfg);
      std::cout << cfg.dump(2) << "\n";
    }
    return 0;
  }

  if (exact_cmd->parsed()) {
    auto [g, a] = exact_in.resolve();
    mvi::ExactReport r = mvi::exact_t(g, a, mvi::semantics_from_name(opt.semantics),
                                      opt.contiguous, {}, opt.components);
    json j = mvi::report_to_json(r);
    j["run_config"] = run_config_json("exact", opt);
    if (r.components) {
      double sum = 0;
      for (const auto& [mask, val] : *r.components) sum += val;
      double b_excl = mvi::coalition_interaction(g, a);
      j["components_sum"] = sum;
      j["components_sum_matches_b"] = std::abs(sum - b_excl) <= 1e-9;
    }
    std::cout << j.dump(2) << "\n";
    if (!opt.out.empty()) write_json_file(opt.out, j);
    return 0;
  }

  if (est_cmd->parsed()) {
    auto [g, a] = est_in.resolve();
    mvi::InteractionEstimate est = mvi::estimate_t(g, a, estimator_config(opt));
    json j = mvi::estimate_to_json(est);
    j["run_config"] = run_config_json("estimate", opt);
    std::cout << j.dump(2) << "\n";
    if (!opt.out.empty()) write_json_file(opt.out, j);
    if (!trace_path.empty()) {
      mvi::ConvergenceTrace trace;
      trace.estimate = est;
      trace.config = estimator_config(opt);
      auto out = open_out(trace_path);
      mvi::write_convergence_csv(out, trace);
    }
    return 0;
  }

  // eval
  json cfg = run_config_json("eval", opt);
  cfg["protocol"] = protocol;
  cfg["datasets"] = datasets;
  mvi::EstimatorConfig ecfg = estimator_config(opt);
  if (protocol == "accuracy") {
    if (methods.empty()) methods = {"ours", "baseline1", "baseline2"};
    cfg["methods"] = methods;
    std::vector<mvi::AccuracyReport> cells;
    for (const std::string& path : datasets) {
      auto models = read_manifest_file(path);
      for (const std::string& name : methods)
        cells.push_back(
            mvi::eval_method_accuracy(models, mvi::method_from_name(name), ecfg));
    }
    json j = mvi::accuracy_to_json(cells);
    j["run_config"] = cfg;
    if (!opt.out.empty()) {
      auto out = open_out(opt.out);
      mvi::write_accuracy_csv(out, cells);
    }
    if (!json_path.empty()) write_json_file(json_path, j);
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  if (datasets.size() != 1)
    throw mvi::FormatError("this protocol takes exactly one --dataset");
  auto models = read_manifest_file(datasets.front());
  if (protocol == "error") {
    cfg["checkpoints"] = checkpoints;
    mvi::ErrorCurve curve = mvi::error_vs_exact(models, ecfg, checkpoints);
    json j = mvi::error_to_json(curve);
    j["run_config"] = cfg;
    if (!opt.out.empty()) {
      auto out = open_out(opt.out);
      mvi::write_error_csv(out, curve);
    }
    if (!json_path.empty()) write_json_file(json_path, j);
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  if (protocol == "instability") {
    cfg["budgets"] = budgets;
    cfg["repeats"] = repeats;
    mvi::InstabilitySweep sweep = mvi::instability_sweep(models, budgets, repeats, ecfg);
    json j = mvi::instability_to_json(sweep);
    j["run_config"] = cfg;
    if (!opt.out.empty()) {
      auto out = open_out(opt.out);
      mvi::write_instability_csv(out, sweep);
    }
    if (!json_path.empty()) write_json_file(json_path, j);
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  // convergence
  cfg["game_index"] = eval_index;
  if (eval_index < 0 || static_cast<std::size_t>(eval_index) >= models.size())
    throw mvi::FormatError("--game-index outside the manifest");
  mvi::ConvergenceTrace trace =
      mvi::convergence_trace(models[static_cast<std::size_t>(eval_index)], ecfg);
  json j = mvi::convergence_to_json(trace);
  j["run_config"] = cfg;
  if (!opt.out.empty()) {
    auto out = open_out(opt.out);
    mvi::write_convergence_csv(out, trace);
  }
  if (!json_path.empty()) write_json_file(json_path, j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mvi::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return 3;
  } catch (const mvi::DegenerateError& e) {
    std::cerr << "degenerate result: " << e.what() << "\n";
    return 4;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {  // DomainError, FormatError
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

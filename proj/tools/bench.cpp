#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <vector>

#include "CLI11.hpp"
#include "mvi/exact.hpp"
#include "mvi/expression.hpp"
#include "mvi/game.hpp"
#include "mvi/estimator.hpp"
#include "mvi/rng.hpp"

namespace {

template <class F>
double timed(F&& fn) {
  auto t0 = std::chrono::steady_clock::now();
  fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parallel vs serial kernel benchmark"};
  int exact_n = 18;
  int sampled_n = 24;
  std::uint64_t permutations = 20000;
  std::uint64_t seed = 42;
  int workers = 0;
  app.add_option("--exact-n", exact_n, "players for the exact Shapley run")
      ->capture_default_str();
  app.add_option("--sampled-n", sampled_n, "players for the sampled Shapley run")
      ->capture_default_str();
  app.add_option("--permutations", permutations, "permutations for the sampled run")
      ->capture_default_str();
  app.add_option("--seed", seed, "rng seed")->capture_default_str();
  app.add_option("--workers", workers, "thread count (0 = OpenMP default)");
  CLI11_PARSE(app, argc, argv);
  if (workers > 0) omp_set_num_threads(workers);

  std::printf("threads: %d\n", omp_get_max_threads());

  // Exact Shapley over a random dense table.
  {
    mvi::Rng rng(seed);
    std::vector<double> values(std::size_t{1} << exact_n);
    for (double& v : values) v = rng.next_double();
    mvi::Game g = mvi::make_table_game(std::move(values));
    mvi::Caps caps;
    caps.shapley_n = std::max(caps.shapley_n, exact_n);
    std::vector<double> par, ser;
    double tp = timed([&] { par = mvi::shapley(g, caps); });
    double ts = timed([&] { ser = mvi::shapley_serial(g, caps); });
    double diff = max_abs_diff(par, ser);
    std::printf("exact   n=%-2d                 parallel %7.3f s   serial %7.3f s   speedup %.2fx   max|diff| %.2e\n",
                exact_n, tp, ts, ts / tp, diff);
    if (diff > 1e-9) {
      std::printf("FAIL: parallel and serial exact Shapley disagree\n");
      return 1;
    }
  }

  // Sampled Shapley over a wide expression game (too wide to tabulate).
  {
    std::vector<mvi::ExprPtr> terms;
    for (int i = 0; i + 1 < sampled_n; i += 2) {
      std::vector<mvi::ExprPtr> pair;
      pair.push_back(mvi::make_var(i));
      pair.push_back(mvi::make_var(i + 1));
      terms.push_back(mvi::make_op(mvi::ExprNode::Op::kMul, std::move(pair)));
    }
    mvi::Game g = mvi::make_expression_game(
        mvi::ExpressionModel::make(sampled_n,
                                   mvi::make_op(mvi::ExprNode::Op::kAdd, std::move(terms))),
        mvi::Cache::kOff);
    mvi::SampledShapley par, ser;
    double tp = timed([&] { par = mvi::shapley_sampled(g, permutations, seed); });
    double ts = timed([&] { ser = mvi::shapley_sampled_serial(g, permutations, seed); });
    double diff = max_abs_diff(par.phi, ser.phi);
    std::printf("sampled n=%-2d perms=%-8llu parallel %7.3f s   serial %7.3f s   speedup %.2fx   max|diff| %.2e\n",
                sampled_n, static_cast<unsigned long long>(permutations), tp, ts, ts / tp, diff);
    if (diff != 0) {
      std::printf("FAIL: sampled Shapley is not bit-identical across schedules\n");
      return 1;
    }
  }

  std::printf("agreement checks passed\n");
  return 0;
}

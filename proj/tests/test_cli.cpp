#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "mvi/game.hpp"
#include "mvi/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_bin() { return std::getenv("MVICLI_BIN"); }

fs::path temp_dir() {
  fs::path dir = fs::temp_directory_path() / "mvicli_tests";
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(cli_bin()) + " " + args + " >/dev/null 2>/dev/null";
  int status = std::system(cmd.c_str());
  return status < 0 ? -1 : WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char ch : text)
    if (ch == '\n') ++lines;
  return lines;
}

}  // namespace

#define REQUIRE_CLI()                                        \
  if (!cli_bin()) {                                          \
    MESSAGE("MVICLI_BIN not set; skipping CLI end-to-end"); \
    return;                                                  \
  }

TEST_CASE("generate writes reproducible manifests") {
  REQUIRE_CLI();
  fs::path dir = temp_dir();
  fs::path m1 = dir / "g1.jsonl", m2 = dir / "g2.jsonl";
  CHECK(run_cli("--seed 7 generate --family addmul --count 5 --out " + m1.string()) == 0);
  CHECK(run_cli("--seed 7 generate --family addmul --count 5 --out " + m2.string()) == 0);
  std::string text = slurp(m1);
  CHECK(count_lines(text) == 5);
  CHECK(text == slurp(m2));
  CHECK(fs::exists(m1.string() + ".run.json"));

  fs::path empty = dir / "empty.jsonl";
  CHECK(run_cli("generate --family andor --count 0 --out " + empty.string()) == 0);
  CHECK(slurp(empty).empty());

  CHECK(run_cli("generate --family nope --count 1 --out " + (dir / "x.jsonl").string()) == 2);
}

TEST_CASE("exact reports T for a model file") {
  REQUIRE_CLI();
  fs::path dir = temp_dir();
  fs::path model = dir / "prods.json";
  {
    std::ofstream out(model);
    out << mvi::model_to_json(mvi::ExpressionModel::make(
               4, th::add({th::mul({th::V(0), th::V(1)}), th::mul({th::V(2), th::V(3)})})))
               .dump();
  }
  fs::path report = dir / "report.json";
  CHECK(run_cli("--semantics exclusive --components exact --model " + model.string() +
                " --a 0,1,2,3 --out " + report.string()) == 0);
  nlohmann::json j = nlohmann::json::parse(slurp(report));
  CHECK(j.at("T").get<double>() == doctest::Approx(2.0));
  CHECK(j.at("run_config").at("command") == "exact");
  CHECK(j.at("components_sum_matches_b") == true);

  CHECK(run_cli("exact --model " + model.string()) == 2);  // --a missing
  CHECK(run_cli("exact --model " + (dir / "missing.json").string() + " --a 0,1") == 2);
}

TEST_CASE("exact reports capacity problems with exit 3") {
  REQUIRE_CLI();
  fs::path dir = temp_dir();
  fs::path model = dir / "wide.json";
  {
    std::vector<mvi::ExprPtr> vars;
    for (int i = 0; i < 25; ++i) vars.push_back(th::V(i));
    std::ofstream out(model);
    out << mvi::model_to_json(mvi::ExpressionModel::make(25, th::mul(std::move(vars)))).dump();
  }
  std::string players = "0";
  for (int i = 1; i < 25; ++i) players += "," + std::to_string(i);
  CHECK(run_cli("exact --model " + model.string() + " --a " + players) == 3);
}

TEST_CASE("estimate is deterministic given a seed") {
  REQUIRE_CLI();
  fs::path dir = temp_dir();
  fs::path manifest = dir / "andor.jsonl";
  REQUIRE(run_cli("--seed 3 generate --family andor --count 3 --out " + manifest.string()) == 0);
  fs::path e1 = dir / "est1.json", e2 = dir / "est2.json";
  std::string args = "--seed 11 --epochs 10 estimate --manifest " + manifest.string() +
                     " --index 0 --out ";
  CHECK(run_cli(args + e1.string()) == 0);
  CHECK(run_cli(args + e2.string()) == 0);
  std::string text = slurp(e1);
  CHECK(text == slurp(e2));
  CHECK_FALSE(text.empty());
  nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j.contains("T"));
  CHECK(j.at("run_config").at("epochs") == 10);

  CHECK(run_cli("estimate --manifest " + manifest.string() + " --index 99") == 2);
}

TEST_CASE("eval accuracy emits the method-by-dataset table") {
  REQUIRE_CLI();
  fs::path dir = temp_dir();
  fs::path manifest = dir / "addmul.jsonl";
  REQUIRE(run_cli("--seed 5 generate --family addmul --count 8 --out " + manifest.string()) == 0);
  fs::path csv = dir / "table.csv", js = dir / "table.json";
  CHECK(run_cli("--seed 1 eval --protocol accuracy --dataset " + manifest.string() +
                " --method baseline2 --method baseline1 --out " + csv.string() + " --json " +
                js.string()) == 0);
  std::string text = slurp(csv);
  CHECK(text.rfind("# config {", 0) == 0);
  CHECK(text.find("method,addmul") != std::string::npos);
  nlohmann::json j = nlohmann::json::parse(slurp(js));
  for (const auto& cell : j.at("cells"))
    if (cell.at("method") == "baseline2") CHECK(cell.at("rate").get<double>() == 1.0);

  // identical rerun, byte for byte
  fs::path csv2 = dir / "table2.csv";
  CHECK(run_cli("--seed 1 eval --protocol accuracy --dataset " + manifest.string() +
                " --method baseline2 --method baseline1 --out " + csv2.string()) == 0);
  CHECK(slurp(csv2) == text);
}

TEST_CASE("eval instability reports degeneracy with exit 4") {
  REQUIRE_CLI();
  fs::path dir = temp_dir();
  fs::path manifest = dir / "degenerate.jsonl";
  {
    mvi::SyntheticModel m;
    m.family = mvi::Family::kAddMul;
    m.n = 3;
    m.expression = mvi::ExpressionModel::make(3, th::add({th::V(0), th::V(1), th::V(2)}));
    m.ops = {{mvi::OpKind::kAdd, {0, 1}}, {mvi::OpKind::kAdd, {1, 2}}};
    m.a = mvi::PlayerSet::of(3, {0, 1});
    std::ofstream out(manifest);
    mvi::write_manifest(out, {m});
  }
  CHECK(run_cli("--semantics exclusive --epochs 3 eval --protocol instability --dataset " +
                manifest.string() + " --budgets 32,64 --repeats 3") == 4);
}

TEST_CASE("usage errors exit with 2") {
  REQUIRE_CLI();
  CHECK(run_cli("eval --protocol accuracy") == 2);          // --dataset required
  CHECK(run_cli("frobnicate") == 2);                        // unknown subcommand
  CHECK(run_cli("generate --family addmul") == 2);          // --count required
  CHECK(run_cli("--help") == 0);
}

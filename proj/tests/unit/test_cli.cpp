#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "youden_napg/pipeline.hpp"
#include "youden_napg/serialize.hpp"
#include "youden_napg/simgen.hpp"

namespace fs = std::filesystem;
using namespace youden;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "youden_napg_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + YOUDEN_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_data_row(const fs::path& csv) {
  std::ifstream in(csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  return row;
}

fs::path scenario_csv(const fs::path& dir, ScenarioId id, Index n, std::uint64_t seed, Index p = 500) {
  const fs::path path = dir / "data.csv";
  write_dataset(generate(id, n, seed, p).data, path.string());
  return path;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 2") {
    const fs::path dir = scratch("usage");
    CHECK(run("simulate --scenario s9 --n 400", dir / "log") == 2);
    CHECK(run("simulate --scenario s1", dir / "log") == 2);
    CHECK(run("", dir / "log") == 2);
    CHECK(run("fit --data x.csv --pi 1.5", dir / "log") == 2);
    CHECK(run("fit --data x.csv --solver newton", dir / "log") == 2);
    CHECK(run("bench --tau1 0.95", dir / "log") == 2);
  }

  TEST_CASE("data errors exit with 1 and name the cell") {
    const fs::path dir = scratch("data");
    {
      std::ofstream out(dir / "bad.csv");
      out << "a,b,label\n1,2,1\n3,oops,0\n";
    }
    CHECK(run("fit --data \"" + (dir / "bad.csv").string() + "\" --lambda 0.1", dir / "log") == 1);
    const std::string log = slurp(dir / "log");
    CHECK(log.find("line 3") != std::string::npos);
    CHECK(log.find("'b'") != std::string::npos);
    CHECK(run("fit --data \"" + (dir / "missing.csv").string() + "\" --lambda 0.1", dir / "log") == 1);
  }

  TEST_CASE("simulate is byte-identical across runs") {
    const fs::path a = scratch("sim_a"), b = scratch("sim_b");
    const std::string args = "simulate --scenario s1 --n 400 --reps 1 --seed 7 --lambda 0.1 --out-dir ";
    REQUIRE(run(args + "\"" + a.string() + "\"", a / "log") == 0);
    REQUIRE(run(args + "\"" + b.string() + "\"", b / "log") == 0);
    for (const char* f : {"summary.csv", "scenario.json", "datasets/s1_n400_rep000.csv"}) {
      CAPTURE(f);
      REQUIRE(fs::exists(a / f));
      CHECK(slurp(a / f) == slurp(b / f));
    }
    const std::string summary = slurp(a / "summary.csv");
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 2);
    CHECK(load_dataset((a / "datasets/s1_n400_rep000.csv").string(), "label", "1").n_features() == 10);
  }

  TEST_CASE("fit writes a normalized rule and a trace") {
    const fs::path dir = scratch("fit");
    const fs::path data = scenario_csv(dir, ScenarioId::s1, 400, 3);
    REQUIRE(run("fit --data \"" + data.string() + "\" --pi 0.5 --lambda 0.1 --out-dir \"" + dir.string() + "\"",
                dir / "log") == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "fit_result.json"));
    double norm = 0.0;
    for (double w : j.at("omega")) norm += w * w;
    CHECK(std::abs(std::sqrt(norm) - 1.0) <= 1e-12);
    CHECK(j.at("method") == "napg_scad");
    CHECK(j.at("lambda") == 0.1);
    CHECK(j.at("degenerate") == false);
    CHECK(j.at("cv_table").empty());
    CHECK(fs::exists(dir / "trace.csv"));

    // eval reads the rule back and reproduces the training metrics.
    REQUIRE(run("eval --data \"" + data.string() + "\" --rule \"" + (dir / "fit_result.json").string() +
                    "\" --out-dir \"" + dir.string() + "\"",
                dir / "log") == 0);
    const auto e = nlohmann::json::parse(slurp(dir / "eval.json"));
    CHECK(e.at("weighted_youden").get<double>() == j.at("metrics").at("weighted_youden").get<double>());
  }

  TEST_CASE("fit without --lambda-grid cross-validates over the default grid") {
    const fs::path dir = scratch("fit_cv");
    const fs::path data = scenario_csv(dir, ScenarioId::s1, 200, 4);
    REQUIRE(run("fit --data \"" + data.string() + "\" --max-iter 300 --out-dir \"" + dir.string() + "\"",
                dir / "log") == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "fit_result.json"));
    std::vector<double> grid;
    for (const auto& row : j.at("cv_table")) grid.push_back(row.at("lambda").get<double>());
    CHECK(grid == default_lambda_grid());
  }

  TEST_CASE("lasso-logistic goes through the same schema") {
    const fs::path dir = scratch("fit_lasso");
    const fs::path data = scenario_csv(dir, ScenarioId::s1, 300, 5);
    REQUIRE(run("fit --data \"" + data.string() + "\" --method lasso-logistic --lambda 0.01 --out-dir \"" +
                    dir.string() + "\"",
                dir / "log") == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "fit_result.json"));
    CHECK(j.at("method") == "lasso_logistic");
    CHECK(j.at("h").is_null());
    CHECK(j.contains("metrics"));
  }

  TEST_CASE("bench writes three traces sharing row 0 plus the long table") {
    const fs::path dir = scratch("bench");
    REQUIRE(run("bench --scenario s1 --n 400 --seed 7 --max-iter 400 --tol 1e-4 --out-dir \"" + dir.string() + "\"",
                dir / "log") == 0);
    const std::string row0 = first_data_row(dir / "trace_napg_poly.csv");
    CHECK(!row0.empty());
    CHECK(first_data_row(dir / "trace_napg_backtracking.csv") == row0);
    CHECK(first_data_row(dir / "trace_papg.csv") == row0);
    const std::string combined = slurp(dir / "bench_long.csv");
    CHECK(combined.rfind("solver,iter,f_value,residual,cum_grad_evals\n", 0) == 0);
    for (const char* name : {"napg_poly,", "napg_backtracking,", "papg,"}) {
      CHECK(combined.find(std::string("\n") + name) != std::string::npos);
    }
  }
}

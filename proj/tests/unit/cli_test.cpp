#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "../support/oracles.hpp"
#include "spca/spectra.hpp"
#include "spca_cli/commands.hpp"

namespace fs = std::filesystem;
using namespace spca;
using namespace spca::cli;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("spca_cli_test_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

void write(const std::string& p, const std::string& text) { std::ofstream(p) << text; }

int run_args(std::vector<std::string> args) {
  args.insert(args.begin(), "spca_cert");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("generate writes the header and is reproducible") {
    TempDir dir("generate");
    GenerateArgs g;
    g.n = 200;
    g.seed = 7;
    g.out_path = dir / "a.txt";
    REQUIRE(cmd_generate(g) == kOk);
    g.out_path = dir / "b.txt";
    REQUIRE(cmd_generate(g) == kOk);
    CHECK(lines_of(dir / "a.txt").front() == "200");
    CHECK(slurp(dir / "a.txt") == slurp(dir / "b.txt"));
    CHECK(fs::exists(dir / "a.manifest.json"));
    CHECK(load_matrix(dir / "a.txt").n() == 200);
  }

  TEST_CASE("synthetic manifest records the block constants") {
    TempDir dir("synthetic");
    GenerateArgs g;
    g.family = "synthetic";
    g.n = 300;
    g.out_path = dir / "s.txt";
    REQUIRE(cmd_generate(g) == kOk);
    auto j = json::parse(slurp(dir / "s.manifest.json"));
    CHECK(j["params"]["block11"] == 290.0);
    CHECK(j["params"]["block22"] == 300.0);
    CHECK(j["params"]["block33"] == 582.7875);
  }

  TEST_CASE("full cardinality solve has zero gap") {
    TempDir dir("fullk");
    CovarianceMatrix a(testing::random_psd(6, 3));
    write_matrix_file(dir / "a.txt", a);
    SolveArgs s;
    s.matrix_path = dir / "a.txt";
    s.k = 6;
    s.out_path = dir / "a.json";
    REQUIRE(cmd_solve(s) == kOk);
    auto j = json::parse(slurp(dir / "a.json"));
    CHECK(j["gap"] == 0.0);
    CHECK(j["ub"].get<double>() == doctest::Approx(testing::max_eig(a.entries())).epsilon(1e-12));
  }

  TEST_CASE("printed gap matches the JSON bounds") {
    TempDir dir("gap");
    GenerateArgs g;
    g.n = 24;
    g.seed = 7;
    g.out_path = dir / "spiked.txt";
    REQUIRE(cmd_generate(g) == kOk);
    SolveArgs s;
    s.matrix_path = g.out_path;
    s.k = 10;
    s.max_nodes = 200;
    s.deterministic = true;
    s.out_path = dir / "spiked.json";
    REQUIRE(cmd_solve(s) == kOk);
    auto j = json::parse(slurp(s.out_path));
    const double lb = j["lb"], ub = j["ub"], gap = j["gap"];
    CHECK(std::abs(gap - (ub - lb) / lb) <= 1e-12);
    auto rows = lines_of(dir / "spiked.csv");
    REQUIRE(rows.size() == 2);
    std::vector<std::string> cols;
    std::stringstream ss(rows[1]);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    REQUIRE(cols.size() >= 8);
    CHECK(std::abs(std::stod(cols[7]) - (ub - lb) / lb) <= 1e-12);
  }

  TEST_CASE("pitprops builtin with the convex method") {
    TempDir dir("pitprops");
    SolveArgs s;
    s.matrix_path = "builtin:pitprops";
    s.k = 5;
    s.method = "convex-ip";
    s.max_nodes = 300;
    s.deterministic = true;
    s.out_path = dir / "pp.json";
    REQUIRE(cmd_solve(s) == kOk);
    auto j = json::parse(slurp(s.out_path));
    CHECK(j["lb"].get<double>() == doctest::Approx(3.406).epsilon(1e-3));
    CHECK(j["ub"].get<double>() >= j["lb"].get<double>());
  }

  TEST_CASE("solve rows are append-only per key") {
    TempDir dir("append");
    write_matrix_file(dir / "m.txt", CovarianceMatrix(testing::random_psd(7, 8)));
    SolveArgs s;
    s.matrix_path = dir / "m.txt";
    s.k = 2;
    s.max_nodes = 100;
    s.deterministic = true;
    s.out_path = dir / "m.json";
    REQUIRE(cmd_solve(s) == kOk);
    const auto first = slurp(dir / "m.csv");
    REQUIRE(cmd_solve(s) == kOk);
    CHECK(slurp(dir / "m.csv") == first);
    s.seed = 1;
    REQUIRE(cmd_solve(s) == kOk);
    auto rows = lines_of(dir / "m.csv");
    CHECK(rows.size() == 3);
    CHECK(slurp(dir / "m.csv").rfind(first, 0) == 0);
  }

  TEST_CASE("bench on an empty manifest") {
    TempDir dir("empty");
    write(dir / "suite.json", R"({"instances": []})");
    BenchArgs b;
    b.manifest_path = dir / "suite.json";
    b.out_dir = dir / "out";
    REQUIRE(cmd_bench(b) == kOk);
    auto rows = lines_of(dir / "out/results.csv");
    CHECK(rows.size() == 1);
    CHECK(json::parse(slurp(dir / "out/summary.json"))["rows"] == 0);
  }

  TEST_CASE("oracle suite rows bracket the exact value and reruns keep rows") {
    TempDir dir("oracle");
    for (int i = 0; i < 3; ++i)
      write_matrix_file(dir / ("m" + std::to_string(i) + ".txt"),
                        CovarianceMatrix(testing::random_psd(8 + i, 50 + static_cast<std::uint64_t>(i))));
    write(dir / "suite.json", R"({"instances": [
      {"name": "m0", "matrix": "m0.txt", "k": [1, 2], "methods": ["convex-ip", "pert-convex-ip"], "presets": ["A"], "oracle": true, "max_nodes": 300},
      {"name": "m1", "matrix": "m1.txt", "k": 3, "oracle": true, "max_nodes": 300},
      {"name": "m2", "matrix": "m2.txt", "k": 2, "oracle": true, "max_nodes": 300},
      {"name": "bad", "matrix": "missing.txt", "k": 2}
    ]})");
    BenchArgs b;
    b.manifest_path = dir / "suite.json";
    b.out_dir = dir / "out";
    b.deterministic = true;
    REQUIRE(cmd_bench(b) == kOk);
    auto summary = json::parse(slurp(dir / "out/summary.json"));
    CHECK(summary["oracle_checked"] == 6);
    CHECK(summary["oracle_violations"] == 0);
    CHECK(summary["errors"] == 1);
    auto rows = lines_of(dir / "out/results.csv");
    CHECK(rows.size() == 8);
    CHECK(rows.back().find("error") != std::string::npos);

    const auto before = slurp(dir / "out/results.csv");
    REQUIRE(cmd_bench(b) == kOk);
    CHECK(slurp(dir / "out/results.csv") == before);
  }

  TEST_CASE("argument errors map to the usage exit code") {
    CHECK(run_args({"solve"}) == kUsageError);
    CHECK(run_args({"solve", "x.txt", "--k", "2", "--preset", "Z"}) == kUsageError);
    CHECK(run_args({"frobnicate"}) == kUsageError);
    CHECK(run_args({"solve", "/nonexistent/m.txt", "--k", "2"}) == kRuntimeError);
  }
}

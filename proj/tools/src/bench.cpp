// Suite runner: one CSV row per (instance, k, method, preset, seed) plus a summary.
//
// Manifest layout:
//   { "instances": [ {
//       "name": "pp",                       case label (defaults to "inst<i>")
//       "matrix": "file.txt" | "builtin:pitprops",
//       "generate": {"family": "spiked", "n": 200, "m": 50, "seed": 7},   instead of "matrix"
//       "k": 2 | [1, 2],
//       "deflation": [5, 2, 2, 1, 1, 1],    components solved in turn, overrides "k"
//       "methods": ["convex-ip"], "presets": ["B"],
//       "seed": 0, "budget_s": 600, "max_nodes": -1,
//       "oracle": false } ] }
// Relative matrix paths resolve against the manifest directory.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "spca/data.hpp"
#include "spca/errors.hpp"
#include "spca/methods.hpp"
#include "spca/oracle.hpp"
#include "spca/primal.hpp"
#include "spca_cli/commands.hpp"
#include "table.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace spca::cli {

namespace {

constexpr int kOracleMaxN = 16;

std::string bench_header() { return csv_header() + ",oracle,error"; }

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Instance {
  std::string name;
  std::function<CovarianceMatrix()> load;
  std::vector<int> ks;
  bool deflation = false;
  std::vector<std::string> methods;
  std::vector<std::string> presets;
  std::uint64_t seed = 0;
  double budget_s = 600.0;
  std::int64_t max_nodes = -1;
  bool oracle = false;
};

struct Row {
  RowKey key;
  std::string line;
  Vector x;  // incumbent, used for deflation
  double lb = -std::numeric_limits<double>::infinity();
};

template <class T>
T value_or(const json& j, const char* name, T fallback) {
  return j.contains(name) ? j.at(name).get<T>() : fallback;
}

std::vector<Instance> parse_manifest(const fs::path& path, const BenchArgs& args) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("manifest " + path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  std::vector<Instance> out;
  if (!doc.contains("instances")) return out;
  int idx = 0;
  for (const auto& j : doc.at("instances")) {
    Instance inst;
    inst.name = value_or<std::string>(j, "name", "inst" + std::to_string(idx++));
    if (j.contains("generate")) {
      const auto& g = j.at("generate");
      GeneratorSpec spec;
      spec.family = family_from_string(g.at("family").get<std::string>());
      spec.n = value_or(g, "n", spec.n);
      spec.m = value_or(g, "m", spec.m);
      spec.seed = value_or<std::uint64_t>(g, "seed", 0);
      inst.load = [spec] { return generate(spec); };
    } else {
      std::string m = j.at("matrix").get<std::string>();
      if (m.rfind("builtin:", 0) != 0 && fs::path(m).is_relative()) m = (base / m).string();
      inst.load = [m] { return load_matrix(m); };
    }
    if (j.contains("deflation")) {
      inst.ks = j.at("deflation").get<std::vector<int>>();
      inst.deflation = true;
    } else if (j.at("k").is_array()) {
      inst.ks = j.at("k").get<std::vector<int>>();
    } else {
      inst.ks = {j.at("k").get<int>()};
    }
    inst.methods = value_or<std::vector<std::string>>(j, "methods", {"pert-convex-ip"});
    inst.presets = value_or<std::vector<std::string>>(j, "presets", {"B"});
    inst.seed = value_or<std::uint64_t>(j, "seed", args.seed);
    inst.budget_s = value_or(j, "budget_s", args.budget_s);
    inst.max_nodes = value_or<std::int64_t>(j, "max_nodes", -1);
    inst.oracle = value_or(j, "oracle", false);
    for (const auto& p : inst.presets)
      if (p.size() != 1) throw ValidationError("preset must be a single letter, got '" + p + "'");
    out.push_back(std::move(inst));
  }
  return out;
}

std::string case_label(const Instance& inst, std::size_t component) {
  return inst.deflation ? inst.name + "/c" + std::to_string(component + 1) : inst.name;
}

std::string error_line(const RowKey& key, const std::string& what) {
  return key.case_name + "," + key.method + "," + key.preset + "," + std::to_string(key.k) + "," +
         std::to_string(key.seed) + ",,,,,error,," + sanitize_field(what);
}

Row run_row(const Instance& inst, const CovarianceMatrix& a, const RowKey& key, bool deterministic) {
  Row row{key, {}, {}, -std::numeric_limits<double>::infinity()};
  try {
    SolveOptions opts;
    opts.method = method_from_string(key.method);
    opts.apply(preset(key.preset.front()));
    opts.k = key.k;
    opts.seed = key.seed;
    opts.budget_s = inst.budget_s;
    opts.max_nodes = inst.max_nodes;
    opts.deterministic = deterministic;
    const SolveResult r = solve(a, opts);
    std::string oracle;
    if (inst.oracle && a.n() <= kOracleMaxN) oracle = fmt17(exact_spca(a, key.k).value);
    row.line = csv_row(key.case_name, key.preset, key.k, key.seed, r, !deterministic) + "," + oracle + ",";
    row.x = r.incumbent.x;
    row.lb = r.primal_lb;
  } catch (const std::exception& e) {
    spdlog::error("{} {} {}: {}", key.case_name, key.method, key.preset, e.what());
    row.line = error_line(key, e.what());
  }
  return row;
}

/// Rows of one instance in manifest order. Rows already in `done` are skipped
/// unless a later deflation component needs their incumbent.
std::vector<Row> run_instance(const Instance& inst, const ResultTable& done, bool deterministic) {
  std::vector<RowKey> keys;
  for (std::size_t c = 0; c < inst.ks.size(); ++c)
    for (const auto& m : inst.methods)
      for (const auto& p : inst.presets) keys.push_back({case_label(inst, c), m, p, inst.ks[c], inst.seed});

  std::vector<Row> rows;
  const bool any_missing = std::any_of(keys.begin(), keys.end(), [&](const RowKey& k) { return !done.contains(k); });
  if (!any_missing) return rows;

  std::optional<CovarianceMatrix> a;
  try {
    a = inst.load();
  } catch (const std::exception& e) {
    spdlog::error("{}: {}", inst.name, e.what());
    for (const auto& k : keys)
      if (!done.contains(k)) rows.push_back({k, error_line(k, e.what()), {}, 0.0});
    return rows;
  }

  std::size_t next = 0;
  for (std::size_t c = 0; c < inst.ks.size(); ++c) {
    const bool last = c + 1 == inst.ks.size();
    std::optional<Row> best;
    for (std::size_t j = 0; j < inst.methods.size() * inst.presets.size(); ++j, ++next) {
      const RowKey& key = keys[next];
      const bool needed = !done.contains(key) || (inst.deflation && !last);
      if (!needed) continue;
      Row row = run_row(inst, *a, key, deterministic);
      if (row.x.size() == a->n() && (!best || row.lb > best->lb)) best = row;
      if (!done.contains(key)) rows.push_back(std::move(row));
    }
    if (inst.deflation && !last) {
      if (!best) {
        for (std::size_t r = next; r < keys.size(); ++r)
          if (!done.contains(keys[r])) rows.push_back({keys[r], error_line(keys[r], "no component to deflate"), {}, 0.0});
        break;
      }
      a = deflate(*a, best->x);
    }
  }
  return rows;
}

json summarize(const ResultTable& table) {
  struct Acc {
    int rows = 0, optimal = 0;
    double gap_sum = 0.0, gap_max = 0.0, lb_sum = 0.0;
  };
  std::map<std::string, Acc> by_method;
  std::map<std::string, Acc> by_group;  // instance|method|preset
  int errors = 0, oracle_checked = 0, oracle_violations = 0;
  for (const auto& line : table.lines()) {
    const auto f = split_csv_line(line);
    if (f.size() < 12 || f[9] == "error") {
      ++errors;
      continue;
    }
    const double lb = std::stod(f[5]), ub = std::stod(f[6]);
    const double gap = f[7] == "inf" ? std::numeric_limits<double>::infinity() : std::stod(f[7]);
    for (Acc* acc : {&by_method[f[1]], &by_group[f[0].substr(0, f[0].find('/')) + "|" + f[1] + "|" + f[2]]}) {
      ++acc->rows;
      acc->optimal += f[9] == "optimal" || f[9] == "trivial";
      acc->gap_sum += gap;
      acc->gap_max = std::max(acc->gap_max, gap);
      acc->lb_sum += lb;
    }
    if (!f[10].empty()) {
      const double ex = std::stod(f[10]);
      ++oracle_checked;
      if (lb > ex * (1 + 1e-9) + 1e-12 || ex > ub * (1 + 1e-7) + 1e-12) ++oracle_violations;
    }
  }
  auto dump = [](const Acc& a) {
    return json{{"rows", a.rows},
                {"optimal", a.optimal},
                {"mean_gap", a.rows ? a.gap_sum / a.rows : 0.0},
                {"max_gap", a.gap_max},
                {"lb_sum", a.lb_sum}};
  };
  json s;
  s["rows"] = table.lines().size();
  s["errors"] = errors;
  s["oracle_checked"] = oracle_checked;
  s["oracle_violations"] = oracle_violations;
  s["methods"] = json::object();
  for (const auto& [m, acc] : by_method) s["methods"][m] = dump(acc);
  s["groups"] = json::array();
  for (const auto& [g, acc] : by_group) {
    json e = dump(acc);
    e["group"] = g;
    s["groups"].push_back(e);
  }
  return s;
}

}  // namespace

int cmd_bench(const BenchArgs& args) {
  const auto instances = parse_manifest(args.manifest_path, args);
  const fs::path dir(args.out_dir);
  fs::create_directories(dir);
  const fs::path csv = dir / "results.csv";

  ResultTable table(bench_header());
  table.load(csv);

  std::vector<std::vector<Row>> results(instances.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (std::size_t i; (i = cursor++) < instances.size();) results[i] = run_instance(instances[i], table, args.deterministic);
  };
  const int workers = std::clamp<int>(args.threads, 1, std::max<int>(1, static_cast<int>(instances.size())));
  std::vector<std::jthread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();

  int fresh = 0;
  for (auto& rows : results)
    for (auto& r : rows) fresh += table.append(r.key, std::move(r.line));
  table.save(csv);

  const fs::path summary = dir / "summary.json";
  std::ofstream(summary, std::ios::binary | std::ios::trunc) << summarize(table).dump(2) << '\n';
  spdlog::info("bench: {} new rows, {} total", fresh, table.lines().size());
  return kOk;
}

}  // namespace spca::cli

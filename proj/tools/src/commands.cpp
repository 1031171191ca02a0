#include "spca_cli/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "spca/data.hpp"
#include "spca/errors.hpp"
#include "spca/methods.hpp"
#include "table.hpp"

namespace fs = std::filesystem;

namespace spca::cli {

namespace {

constexpr const char* kBuiltinPitprops = "builtin:pitprops";

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

fs::path manifest_path_for(const fs::path& matrix_path) {
  fs::path p = matrix_path;
  return p.replace_extension(".manifest.json");
}

}  // namespace

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("spca_cert");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("SPCA_CERT_LOG");
  const std::string name = env && *env ? env : "warn";
  const auto level = spdlog::level::from_str(name);
  // from_str maps unknown names to "off"; only accept that when asked for.
  spdlog::set_level(level == spdlog::level::off && name != "off" ? spdlog::level::warn : level);
}

CovarianceMatrix load_matrix(const std::string& path) {
  if (path == kBuiltinPitprops) return pitprops();
  return read_matrix_file(path);
}

int cmd_solve(const SolveArgs& args) {
  const CovarianceMatrix a = load_matrix(args.matrix_path);
  SolveOptions opts;
  opts.method = method_from_string(args.method);
  opts.apply(preset(args.preset));
  opts.k = args.k;
  opts.budget_s = args.budget_s;
  opts.max_nodes = args.max_nodes;
  opts.gap_tolerance = args.gap_tolerance;
  opts.seed = args.seed;
  opts.threads = args.threads;
  opts.deterministic = args.deterministic;

  const SolveResult r = solve(a, opts);
  const bool with_time = !args.deterministic;
  const std::string case_name =
      args.case_name.empty() ? fs::path(args.matrix_path).stem().string() : args.case_name;
  const std::string preset_name(1, args.preset);
  const std::string row = csv_row(case_name, preset_name, args.k, args.seed, r, with_time);

  std::cout << csv_header() << '\n' << row << '\n';
  if (!args.out_path.empty()) {
    const fs::path out(args.out_path);
    write_text(out, r.to_json(with_time).dump(2) + "\n");
    fs::path csv = out;
    csv.replace_extension(".csv");
    ResultTable table(csv_header());
    table.load(csv);
    if (table.append(key_of(split_csv_line(row)), row))
      table.save(csv);
    else
      spdlog::info("{}: row for this key already present, left unchanged", csv.string());
  }
  return kOk;
}

int cmd_generate(const GenerateArgs& args) {
  if (args.out_path.empty()) throw ValidationError("generate: --out is required");
  const fs::path out(args.out_path);
  if (args.family == "pitprops") {
    write_text(out, format_matrix_text(pitprops()));
    nlohmann::json j = {{"family", "pitprops"}, {"n", 13}, {"source", "Jeffers (1967), 180 observations"}};
    write_text(manifest_path_for(out), j.dump(2) + "\n");
    return kOk;
  }
  GeneratorSpec spec;
  spec.family = family_from_string(args.family);
  spec.n = args.n;
  spec.m = args.m;
  spec.seed = args.seed;
  spec.validate();
  write_text(out, format_matrix_text(generate(spec)));
  write_text(manifest_path_for(out), manifest(spec).dump(2) + "\n");
  return kOk;
}

}  // namespace spca::cli

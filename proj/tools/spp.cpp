#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "apd/errors.hpp"
#include "apd/harness.hpp"

using nlohmann::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw apd::ConfigError("cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw apd::ConfigError(path + ": " + e.what());
  }
}

apd::ExperimentConfig load_config(const std::string& path) {
  apd::ExperimentConfig c = apd::ExperimentConfig::from_json(read_json(path));
  apd::apply_seed_override(c);
  return c;
}

std::string cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return apd::format_double(v.get<double>());
  return v.dump();
}

int cmd_solve(const std::string& config, const std::string& out_dir) {
  apd::ExperimentConfig c = load_config(config);
  if (!out_dir.empty()) c.output_dir = out_dir;
  const apd::ExperimentOutcome o = apd::run_experiment(c);
  if (o.summary.contains("error")) std::cerr << "spp: " << o.summary["error"].get<std::string>() << "\n";
  if (o.summary.contains("checks"))
    for (const auto& ch : o.summary["checks"])
      std::cout << (ch["pass"].get<bool>() ? "PASS " : "FAIL ") << ch["name"].get<std::string>() << ": "
                << cell(ch["value"]) << " vs " << cell(ch["bound"]) << "\n";
  std::cout << (o.exit_code == 0 ? "pass" : "fail") << " (exit " << o.exit_code << ")\n";
  return o.exit_code;
}

int cmd_validate(const std::string& config) {
  const apd::ExperimentConfig c = load_config(config);
  const auto p = apd::build_problem(c);
  const apd::PreparedSchedule s = apd::prepare_schedule(c, *p);
  json j = s.report.to_json();
  j["schedule"] = s.schedule.to_json();
  std::cout << j.dump(2) << "\n";
  return s.report.pass ? 0 : 1;
}

int cmd_bench(const std::string& suite, bool quick, const std::string& out_dir) {
  const auto results = apd::run_bench(suite, quick);
  bool ok = true;
  json j = json::array();
  for (const auto& r : results) {
    std::cout << "criterion " << r.id << " [" << r.name << "]: " << (r.pass ? "PASS" : "FAIL") << " - " << r.detail
              << "\n";
    ok = ok && r.pass;
    j.push_back({{"criterion", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"data", r.data}});
  }
  if (!out_dir.empty())
    apd::write_file_atomic((std::filesystem::path(out_dir) / ("bench_" + suite + ".json")).string(), j.dump(2) + "\n");
  return ok ? 0 : 1;
}

int cmd_report(const std::string& dir, const std::string& format) {
  const json s = read_json((std::filesystem::path(dir) / "summary.json").string());
  if (format == "json") {
    std::cout << s.dump(2) << "\n";
  } else {
    std::cout << "replication,seed,failed,final_gap,final_delta,final_v_norm\n";
    for (const auto& r : s.at("replications"))
      std::cout << r["replication"] << ',' << r["seed"] << ',' << (r["failed"].get<bool>() ? 1 : 0) << ','
                << cell(r["final_gap"]) << ',' << cell(r["final_delta"]) << ',' << cell(r["final_v_norm"]) << "\n";
  }
  return s.value("pass", false) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Saddle-point solver toolkit"};
  app.require_subcommand(1);

  std::string config, out_dir, suite, in_dir, format = "json";
  bool quick = false;

  auto* solve = app.add_subcommand("solve", "run an experiment config");
  solve->add_option("--config", config, "experiment config (JSON)")->required();
  solve->add_option("--out", out_dir, "output directory");

  auto* validate = app.add_subcommand("validate-schedule", "check a config's schedule conditions");
  validate->add_option("--config", config, "experiment config (JSON)")->required();

  auto* bench = app.add_subcommand("bench", "run a benchmark suite");
  bench->add_option("--suite", suite, "suite name")->required()->check(CLI::IsMember(apd::bench_suites()));
  bench->add_flag("--quick", quick, "shorter horizons");
  bench->add_option("--out", out_dir, "write suite results here");

  auto* report = app.add_subcommand("report", "print a run summary");
  report->add_option("--in", in_dir, "output directory of a solve run")->required();
  report->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*solve) return cmd_solve(config, out_dir);
    if (*validate) return cmd_validate(config);
    if (*bench) return cmd_bench(suite, quick, out_dir);
    if (*report) return cmd_report(in_dir, format);
  } catch (const apd::ConfigError& e) {
    std::cerr << "spp: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "spp: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

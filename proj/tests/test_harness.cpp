#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/SVD>

#include "apd/certification.hpp"
#include "apd/errors.hpp"
#include "apd/harness.hpp"
#include "apd/problem_io.hpp"

using namespace apd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("spp_test_" + name);
  fs::remove_all(d);
  return d;
}

json game_config(int n) {
  return {{"generator", "matrix_game"}, {"generator_params", {{"m", 4}, {"n", 3}}}, {"problem_seed", 11},
          {"variant", "bounded_det"},   {"N", n},                                   {"threads", 1}};
}

}  // namespace

TEST_CASE("generator examples") {
  const auto g = generate_problem("matrix_game", {{"m", 2}, {"n", 2}}, 7);
  CHECK(g.dim_x() == 2);
  CHECK(g.dim_y() == 2);
  CHECK(g.set_x.kind() == SetKind::simplex);
  const Mat k = g.coupling.to_dense();
  CHECK(k.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(g.L_K == doctest::Approx(Eigen::JacobiSVD<Mat>(k).singularValues()(0)).epsilon(1e-12));

  const auto q = generate_problem("quad_bilinear", {{"n", 10}, {"m", 10}, {"L_G", 1e4}, {"L_K", 1.0}}, 42);
  const double est = estimate_operator_norm(q.coupling, 2000, 3).value;
  CHECK(std::abs(est - 1.0) <= 1e-6);
  REQUIRE(q.known_saddle);
  CHECK(q.known_saddle->x.norm() == doctest::Approx(0.5));
  CHECK(q.known_saddle->y.norm() == doctest::Approx(0.5));

  const auto u = generate_problem("unbounded_quad", {{"n", 20}, {"m", 20}, {"L_G", 10.0}, {"L_K", 1.0}}, 42);
  REQUIRE(u.known_saddle);
  const Vec& xs = u.known_saddle->x;
  const Vec& ys = u.known_saddle->y;
  CHECK((u.smooth.gradient(xs) + u.coupling.apply_adjoint(ys)).norm() <= 1e-8);
  CHECK((u.coupling.apply(xs) - u.simple.coefficient()).norm() <= 1e-8);
  CHECK(u.set_x.kind() == SetKind::free);

  CHECK_THROWS_AS(generate_problem("nope", json::object(), 1), InvalidArgument);
}

TEST_CASE("generators are deterministic in the seed") {
  const auto a = generate_problem("quad_bilinear", {{"n", 5}, {"m", 4}}, 3);
  const auto b = generate_problem("quad_bilinear", {{"n", 5}, {"m", 4}}, 3);
  const auto c = generate_problem("quad_bilinear", {{"n", 5}, {"m", 4}}, 4);
  CHECK(problem_digest(a) == problem_digest(b));
  CHECK(problem_digest(a) != problem_digest(c));
}

TEST_CASE("problem constants come from the sets") {
  const auto g = generate_problem("matrix_game", {{"m", 3}, {"n", 3}}, 1);
  const auto c = problem_constants(g);
  CHECK(c.D_X == doctest::Approx(std::sqrt(2.0)));
  CHECK(c.L_G == 0.0);
  const auto q = generate_problem("quad_bilinear", {{"n", 3}, {"m", 3}, {"L_G", 2.0}, {"L_K", 1.0}}, 1);
  CHECK(problem_constants(q).D_Y == doctest::Approx(2.0));
  CHECK(problem_constants(q).L_G == doctest::Approx(2.0));
}

TEST_CASE("replicate_stats examples") {
  const auto s = replicate_stats({1.0, 2.0, 3.0, 4.0}, 2.0, 0.25, {4.0});
  CHECK(s.mean == doctest::Approx(2.5));
  REQUIRE(s.standard_error);
  CHECK(*s.standard_error == doctest::Approx(std::sqrt(5.0 / 3) / 2));
  CHECK(s.thresholds[0] == doctest::Approx(3.0));
  CHECK(s.frequencies[0] == doctest::Approx(0.25));
  CHECK(s.ceilings[0] == doctest::Approx(tail_probability_ceiling(4.0)));
  const double p0 = s.ceilings[0];
  CHECK(s.margins[0] == doctest::Approx(1.96 * std::sqrt(p0 * (1 - p0) / 4)));

  const auto one = replicate_stats({0.5}, 1.0, 1.0, {1.0, 2.0});
  CHECK(!one.standard_error);
  CHECK(one.to_json().at("standard_error") == "unavailable");
  CHECK(one.frequencies.size() == 2);
}

TEST_CASE("config parsing") {
  const auto c = ExperimentConfig::from_json(game_config(50));
  CHECK(c.N == 50);
  CHECK(c.lambdas == std::vector<double>{4.0});
  CHECK(ExperimentConfig::from_json(c.to_json()).to_json() == c.to_json());

  json bad = game_config(50);
  bad["colour"] = "red";
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
  bad = game_config(1);
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
  bad = game_config(10);
  bad["variant"] = "fastest";
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
  bad = game_config(10);
  bad["N"] = "ten";
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(json{{"N", 10}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(json::array()), ConfigError);
}

TEST_CASE("SPP_SEED overrides the base seed") {
  auto c = ExperimentConfig::from_json(game_config(10));
  ::setenv("SPP_SEED", "1234", 1);
  apply_seed_override(c);
  ::unsetenv("SPP_SEED");
  CHECK(c.seed == 1234);
  auto d = ExperimentConfig::from_json(game_config(10));
  apply_seed_override(d);
  CHECK(d.seed == 0);
}

TEST_CASE("problem documents round-trip") {
  for (const char* gen : {"matrix_game", "quad_bilinear", "unbounded_quad"}) {
    CAPTURE(gen);
    const auto p = generate_problem(gen, {{"n", 4}, {"m", 3}}, 9);
    const auto back = problem_from_json(json::parse(problem_to_json(p).dump()));
    CHECK(problem_digest(back) == problem_digest(p));
    CHECK(back.L_K == p.L_K);
    CHECK(back.known_saddle.has_value() == p.known_saddle.has_value());
  }
  ProblemDocument doc{generate_problem("matrix_game", {{"m", 2}, {"n", 2}}, 1),
                      NoiseSpec::from_totals(NoiseModel::gaussian, 0.3, 0.2), 77, true};
  const auto back = document_from_json(document_to_json(doc));
  CHECK(back.seed == 77);
  CHECK(back.disclose);
  CHECK(back.noise.sigma_y == doctest::Approx(0.2));
  CHECK_THROWS_AS(problem_from_json(json{{"dims", {2}}}), ConfigError);
}

TEST_CASE("inline problems run like generated ones") {
  const auto p = generate_problem("matrix_game", {{"m", 4}, {"n", 3}}, 11);
  json cfg = game_config(30);
  cfg.erase("generator");
  cfg.erase("generator_params");
  cfg["inline_problem"] = problem_to_json(p);
  const auto a = run_experiment(ExperimentConfig::from_json(cfg));
  const auto b = run_experiment(ExperimentConfig::from_json(game_config(30)));
  CHECK(a.exit_code == 0);
  CHECK(a.csv == b.csv);
}

TEST_CASE("run_experiment layout and reproducibility") {
  const fs::path dir = scratch("layout");
  json cfg = game_config(100);
  cfg["output_dir"] = dir.string();
  const auto out = run_experiment(ExperimentConfig::from_json(cfg));
  CHECK(out.exit_code == 0);
  CHECK(out.summary.at("pass").get<bool>());
  REQUIRE(out.csv.size() == 1);
  const std::string csv = slurp(dir / "trajectory_r000.csv");
  CHECK(csv == out.csv[0]);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 100);  // header + 99 rows
  CHECK(fs::exists(dir / "summary.json"));
  CHECK(fs::exists(dir / "schedule_report.json"));
  const std::string s1 = slurp(dir / "summary.json");

  const auto again = run_experiment(ExperimentConfig::from_json(cfg));
  CHECK(slurp(dir / "trajectory_r000.csv") == csv);
  CHECK(slurp(dir / "summary.json") == s1);
  CHECK(again.summary == out.summary);
  fs::remove_all(dir);
}

TEST_CASE("replications are independent of the thread count") {
  json cfg = game_config(60);
  cfg["noise_model"] = "gaussian";
  cfg["sigma_x"] = 0.2;
  cfg["sigma_y"] = 0.2;
  cfg["algorithm"] = "stochastic_apd";
  cfg["variant"] = "bounded_stoch";
  cfg["replications"] = 6;
  cfg["seed"] = 5;
  const auto one = run_experiment(ExperimentConfig::from_json(cfg));
  cfg["threads"] = 4;
  const auto four = run_experiment(ExperimentConfig::from_json(cfg));
  CHECK(one.csv == four.csv);
  CHECK(one.summary.at("replications") == four.summary.at("replications"));
  CHECK(one.summary.at("replications")[3].at("seed") == 8);
  CHECK(one.csv[0] != one.csv[1]);
}

TEST_CASE("bound column matches an independent recomputation") {
  const auto out = run_experiment(ExperimentConfig::from_json(game_config(200)));
  const auto p = generate_problem("matrix_game", {{"m", 4}, {"n", 3}}, 11);
  const auto c = problem_constants(p);
  std::istringstream in(out.csv[0]);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,gap,bound,delta,v_norm,dist_to_saddle,wall_ms");
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string t, gap, bound;
    std::getline(ls, t, ',');
    std::getline(ls, gap, ',');
    std::getline(ls, bound, ',');
    const double expect = theoretical_bound(ScheduleVariant::bounded_det, c, std::stoi(t)).value;
    CHECK(std::abs(std::stod(bound) - expect) <= 1e-12 * std::max(1.0, expect));
    CHECK(std::stod(gap) <= std::stod(bound) + 1e-9);
    ++rows;
  }
  CHECK(rows == 199);
}

TEST_CASE("a failing custom schedule exits with code 2") {
  const fs::path dir = scratch("badsched");
  json cfg = game_config(10);
  cfg["variant"] = "custom";
  cfg["custom_schedule"] = {{"beta", 1.0}, {"theta", 1.0}, {"eta", 50.0}, {"tau", 50.0}};
  cfg["output_dir"] = dir.string();
  const auto out = run_experiment(ExperimentConfig::from_json(cfg));
  CHECK(out.exit_code == 2);
  CHECK(out.csv.empty());
  CHECK(fs::exists(dir / "schedule_report.json"));
  CHECK(!json::parse(slurp(dir / "schedule_report.json")).at("pass").get<bool>());
  fs::remove_all(dir);
}

TEST_CASE("unbounded runs report certificates and the weighted distance") {
  json cfg = {{"generator", "unbounded_quad"},
              {"generator_params", {{"n", 6}, {"m", 6}, {"L_G", 5.0}, {"L_K", 1.0}}},
              {"problem_seed", 2},
              {"variant", "unbounded_det"},
              {"N", 80}};
  const auto out = run_experiment(ExperimentConfig::from_json(cfg));
  CHECK(out.exit_code == 0);
  CHECK(out.summary.contains("D_hat"));
  CHECK(out.summary.at("D").get<double>() >= 0.0);
  const auto& row = out.summary.at("replications")[0];
  CHECK(row.at("final_gap").is_null());
  CHECK(row.at("final_delta").get<double>() >= 0.0);
}

TEST_CASE("write_file_atomic replaces content") {
  const fs::path dir = scratch("atomic");
  fs::create_directories(dir);
  write_file_atomic((dir / "a.txt").string(), "one");
  write_file_atomic((dir / "a.txt").string(), "two");
  CHECK(slurp(dir / "a.txt") == "two");
  CHECK(!fs::exists(dir / "a.txt.tmp"));
  fs::remove_all(dir);
}

TEST_CASE("bench suite names") {
  CHECK(bench_suites().size() == 5);
  CHECK_THROWS(run_bench("nope", true));
}

TEST_CASE("frozen regression values") {
  const auto g = generate_problem("matrix_game", {{"m", 2}, {"n", 2}}, 7);
  const Mat k = g.coupling.to_dense();
  CHECK(k(0, 0) == doctest::Approx(-0.38730492805136563).epsilon(1e-15));
  CHECK(k(0, 1) == doctest::Approx(0.28147760928799248).epsilon(1e-15));
  CHECK(k(1, 0) == doctest::Approx(0.22760192763796772).epsilon(1e-15));
  CHECK(k(1, 1) == doctest::Approx(-0.33558892081568681).epsilon(1e-15));
  CHECK(problem_digest(g) == "309385f44289e5da");

  const auto s = ParamSchedule::make(ScheduleVariant::bounded_det, problem_constants(g));
  const auto tr = run(Algorithm::apd, g, nullptr, s, 50);
  CHECK(tr.final_state.x_ag(0) == doctest::Approx(0.50091234583111077).epsilon(1e-12));
  CHECK(tr.final_state.y_ag(0) == doctest::Approx(0.45710353170063428).epsilon(1e-12));
  CHECK(exact_gap(g, {tr.final_state.x_ag, tr.final_state.y_ag}) == doctest::Approx(4.5958844886145878e-05).epsilon(1e-8));

  const auto q = generate_problem("quad_bilinear", {{"n", 3}, {"m", 3}}, 42);
  CHECK(problem_digest(q) == "1affba266f752b8d");
  CHECK(q.known_saddle->x(0) == doctest::Approx(0.050322339919736274).epsilon(1e-14));
}

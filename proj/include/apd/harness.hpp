#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "apd/certification.hpp"
#include "apd/oracle.hpp"
#include "apd/problem.hpp"
#include "apd/schedules.hpp"
#include "apd/solvers.hpp"

namespace apd {

/// Seeded instances:
///   matrix_game    {m, n}: dim_x = m, dim_y = n, G = J = 0, simplices, K_ij ~ U[-1, 1]
///   quad_bilinear  {n, m, L_G, L_K}: G = (L_G/2)|Ax|^2 + c'x, A diagonal with max entry 1,
///                  K = L_K U diag(s) V' (max s = 1), J = <b, y>, unit balls, interior saddle of norm 1/2
///   unbounded_quad same family on free sets, saddle of norm 1
SaddlePointProblem generate_problem(const std::string& name, const nlohmann::json& params, std::uint64_t seed);

/// Constants of a problem as a schedule sees them; D_X, D_Y from the set diameters (0 if free).
ScheduleConstants problem_constants(const SaddlePointProblem& problem);

struct ReplicationStats {
  std::vector<double> values;
  double mean = 0.0;
  std::optional<double> standard_error;  // unavailable for a single replication
  std::vector<double> lambdas;
  std::vector<double> thresholds;   // C_0 + lambda C_1
  std::vector<double> frequencies;  // share of values above the threshold
  std::vector<double> ceilings;     // 3 exp(-l^2/3) + 3 exp(-l)
  std::vector<double> margins;      // 1.96 sqrt(p0 (1 - p0)/R)
  nlohmann::json to_json() const;
};

ReplicationStats replicate_stats(const std::vector<double>& values, double c0, double c1,
                                 const std::vector<double>& lambdas);

struct ExperimentConfig {
  // problem: either a generator or an inline problem document
  std::string generator;
  nlohmann::json generator_params = nlohmann::json::object();
  std::uint64_t problem_seed = 0;
  std::optional<nlohmann::json> inline_problem;

  Algorithm algorithm = Algorithm::apd;
  bool linearized = true;

  ScheduleVariant variant = ScheduleVariant::bounded_det;
  nlohmann::json schedule_constants = nlohmann::json::object();  // overrides of problem-derived values
  std::optional<nlohmann::json> custom_schedule;                   // {beta, theta, eta, tau, p?, q?}
  std::optional<ValidationMode> mode;

  NoiseModel noise_model = NoiseModel::none;
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  bool disclose = false;

  int N = 2;
  int replications = 1;
  int capture_cadence = 1;
  std::uint64_t seed = 0;  // base seed; replication r uses seed + r
  std::vector<double> lambdas{4.0};
  std::string output_dir;
  int threads = 0;  // 0: hardware concurrency

  /// Throws ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Reads SPP_SEED and, when set, replaces the base seed.
void apply_seed_override(ExperimentConfig& config);

std::shared_ptr<const SaddlePointProblem> build_problem(const ExperimentConfig& config);

struct PreparedSchedule {
  ParamSchedule schedule;
  ScheduleReport report;
};

/// Builds and validates the schedule; certifies custom schedules that pass. Throws ConfigError.
PreparedSchedule prepare_schedule(const ExperimentConfig& config, const SaddlePointProblem& problem);

struct ExperimentOutcome {
  int exit_code = 0;  // 0 pass, 1 bound check failed, 2 configuration error
  nlohmann::json summary;
  std::vector<std::string> csv;  // one per replication
};

/// Runs all replications (in parallel), checks the bounds of the configured variant and, when
/// output_dir is set, writes trajectory_rNNN.csv, summary.json and schedule_report.json.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

/// Writes through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& content);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  nlohmann::json data;
};

/// Named benchmark suites: det-bounded, det-unbounded, stoch-bounded, stoch-unbounded,
/// baseline-compare. quick shortens horizons and replication counts.
std::vector<CriterionResult> run_bench(const std::string& suite, bool quick);
const std::vector<std::string>& bench_suites();

}  // namespace apd

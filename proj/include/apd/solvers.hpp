#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "apd/oracle.hpp"
#include "apd/problem.hpp"
#include "apd/schedules.hpp"

namespace apd {

enum class Algorithm { apd, stochastic_apd, pd_baseline };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

/// Auxiliary sequence z^v (started at z_1) and the running noise sum U_t, kept only when the
/// oracle discloses its noise.
struct AuxiliaryState {
  Vec x_v;
  Vec y_v;
  std::optional<double> u_accum;  // needs (p, q) from the schedule
  std::optional<double> p, q;     // slack values U_t was accumulated with
};

/// Realized noise at step t in the sign convention of the analysis:
/// delta_xG = G^ - grad G, delta_xK = K^_y - K'y, delta_y = Kx - K^_x.
struct NoiseRecord {
  int t = 0;
  Vec delta_xG;
  Vec delta_xK;
  Vec delta_y;
};

/// Iterates at the start of step t. x_prev is x_{t-1} (x_0 := x_1). For pd_baseline, x_ag and
/// y_ag hold the uniform averages of x_1..x_t and y_1..y_t.
struct SolverState {
  int t = 1;
  Vec x, x_prev, y;
  Vec x_bar, x_md;
  Vec x_ag, y_ag;
  Vec x_start, y_start;
  // sum_i gamma_i z_{i+1} and sum_i gamma_i, for the convex-combination cross-check.
  Vec weighted_x, weighted_y;
  double weight_total = 0.0;
  std::optional<AuxiliaryState> aux;
  bool log_noise = false;
  std::vector<NoiseRecord> noise_log;
};

/// x_1 = start.x or the center of X, y_1 likewise; all derived points start there.
SolverState initial_state(const SaddlePointProblem& problem, const std::optional<PointPair>& start = std::nullopt);

SolverState apd_step(const SolverState& state, const SaddlePointProblem& problem, const ParamSchedule& schedule);

/// One step with one fresh oracle sample.
SolverState stochastic_apd_step(const SolverState& state, const SaddlePointProblem& problem,
                                StochasticOracle& oracle, const ParamSchedule& schedule);

/// One step with the given additive noise (G^ = grad G + grad_noise, and so on).
/// When `disclose` is set the auxiliary sequence and U_t are advanced.
SolverState apd_step_with_noise(const SolverState& state, const SaddlePointProblem& problem,
                                const ParamSchedule& schedule, const NoiseRealization& noise, bool disclose);

/// Classic primal-dual step: y by prox at -K xbar_t, then x by prox at grad G(x_t) + K'y_{t+1}
/// (linearized) or by the exact quadratic subproblem (quadratic G, Euclidean X); extrapolation
/// uses theta_t. eta_t is the primal step and tau_t the dual step.
SolverState pd_baseline_step(const SolverState& state, const SaddlePointProblem& problem,
                             const ParamSchedule& schedule, bool linearized);

/// max over i of |x_ag - weighted_x / (beta_t gamma_t)| and the y counterpart, plus
/// |weight_total/(beta_t gamma_t) - 1|; state after at least one apd step.
double aggregate_identity_residual(const SolverState& state, const ParamSchedule& schedule);

struct CaptureOptions {
  int cadence = 1;          // certify steps 1, 1+k, 1+2k, ...; 0 disables
  bool iterates = false;    // keep z_{t+1} and z^ag_{t+1} in every record
  bool wall_time = false;   // fill wall_ms (non-reproducible)
  bool noise_log = false;
  bool linearized = true;   // pd_baseline variant
};

/// Record of step s; t = s + 1 is the index of the iterates it produced.
struct IterationRecord {
  int t = 0;
  bool captured = false;
  std::optional<double> gap, bound, delta, v_norm, dist_to_saddle, wall_ms;
  std::optional<PointPair> z, z_ag;
};

struct RunMetadata {
  std::string algorithm;
  std::string schedule_variant;
  std::uint64_t seed = 0;
  std::string problem_digest;
  int N = 0;
};

struct Trajectory {
  RunMetadata meta;
  PointPair start;
  std::vector<IterationRecord> records;
  SolverState final_state;
  bool failed = false;
  std::string failure;

  /// Captured records only; columns t,gap,bound,delta,v_norm,dist_to_saddle,wall_ms.
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// Runs N-1 steps. oracle is required for stochastic_apd and ignored otherwise. Step errors
/// end the run early with failed set and the partial records kept.
Trajectory run(Algorithm algorithm, const SaddlePointProblem& problem, StochasticOracle* oracle,
               const ParamSchedule& schedule, int N, const CaptureOptions& capture = {},
               const std::optional<PointPair>& start = std::nullopt);

/// Shortest round-trip decimal text of a double.
std::string format_double(double v);

}  // namespace apd

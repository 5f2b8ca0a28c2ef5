#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "apd/problem.hpp"
#include "apd/schedules.hpp"
#include "apd/solvers.hpp"

namespace apd {

struct GapValue {
  double value = 0.0;
  bool exact = true;  // false: maximum over a finite candidate set, so a lower bound
  std::string caveat;
};

/// g(z~) = max_{z in Z} Q(z~, z) on bounded sets. The Y part is a support function; the X part
/// minimizes G(x) + <K'y~, x> exactly for quadratic G and over a candidate set otherwise.
GapValue exact_gap_detail(const SaddlePointProblem& problem, const PointPair& z_tilde);
double exact_gap(const SaddlePointProblem& problem, const PointPair& z_tilde);

/// Q(z~, z) - <v, z~ - z> at one point z.
double perturbed_gap_at(const SaddlePointProblem& problem, const PointPair& z_tilde, const PointPair& v,
                        const PointPair& z);

/// sup_z Q(z~, z) - <v, z~ - z>, with quadratic G. On a free set the linear part must vanish
/// (relative tolerance rel_tol) or the value is +infinity.
double perturbed_gap(const SaddlePointProblem& problem, const PointPair& z_tilde, const PointPair& v,
                     double rel_tol = 1e-9);

struct PerturbationCertificate {
  int t = 0;  // step index; certifies z^ag_{t+1}
  Vec v_x;
  Vec v_y;
  double delta = 0.0;

  double v_norm() const { return std::sqrt(v_x.squaredNorm() + v_y.squaredNorm()); }
  PointPair v() const { return {v_x, v_y}; }
};

/// (v, delta) for a deterministic run on a schedule meeting the equality step condition:
///   v = ((x_1 - x_{t+1})/(b_t e_t), (y_1 - y_{t+1})/(b_t s_t) - K(x_{t+1} - x_t)/b_t)
///   delta = |x^ag - x_1|^2/(2 b_t e_t) + |y^ag - y_1|^2/(2 b_t s_t)
/// (b = beta, e = eta, s = tau). Requires Euclidean geometry with alpha = 1 on both sides.
PerturbationCertificate perturbation_certificate_det(const SolverState& state, const SaddlePointProblem& problem,
                                                     const ParamSchedule& schedule);

/// Stochastic counterpart, anchored at 2z_1 - z_{t+1} - z^v_{t+1}, with
///   delta = |x^ag - x_1|^2/(b_t e_t) + |y^ag - y_1|^2/(b_t s_t) + U_t/(b_t g_t).
/// Throws UnavailableCertificate when the oracle did not disclose its noise.
PerturbationCertificate perturbation_certificate_stoch(const SolverState& state, const SaddlePointProblem& problem,
                                                       const ParamSchedule& schedule);

/// Distances of the start from a saddle point: |x^ - x_1| and |y^ - y_1|.
struct SaddleOffsets {
  double x = 0.0;
  double y = 0.0;
};

SaddleOffsets saddle_offsets(const SaddlePointProblem& problem, const PointPair& start);

struct BoundValue {
  double value = 0.0;               // gap, epsilon, or C_0
  std::optional<double> secondary;  // |v| bound, or C_1
};

// Closed forms at a horizon or aggregate index.
double rate_bounded_det(const ScheduleConstants& c, int t);   // aggregate z^ag_t, t >= 2
double rate_bounded_stoch_c0(const ScheduleConstants& c, int N);
double rate_bounded_stoch_c1(const ScheduleConstants& c, int N);
BoundValue rate_unbounded_det(const ScheduleConstants& c, int N, double D_hat);
BoundValue rate_unbounded_stoch(const ScheduleConstants& c, int N, double D);

/// Closed-form bound of a built-in variant at t (bounded_det) or N = t (the others).
/// D is D^ for unbounded_det and the start-to-saddle distance with the eta_1/tau_1 weight for
/// unbounded_stoch.
BoundValue theoretical_bound(ScheduleVariant variant, const ScheduleConstants& constants, int t,
                             std::optional<double> D = std::nullopt);

// Step-level forms at step t, bounding the aggregate z^ag_{t+1}.
double step_bound_bounded(const ParamSchedule& s, int t, double omega_x_sq, double omega_y_sq);
double q0_bound(const ParamSchedule& s, int t, double omega_x_sq, double omega_y_sq, double sigma_x, double sigma_y);
double q1_bound(const ParamSchedule& s, int t, double omega_x_sq, double omega_y_sq, double sigma_x, double sigma_y);
/// D of the unbounded analysis: sqrt(|x^ - x_1|^2 + (eta_1/tau_1)|y^ - y_1|^2).
double weighted_start_distance(const ParamSchedule& s, const SaddleOffsets& o);
BoundValue step_bound_unbounded_det(const ParamSchedule& s, int t, const SaddleOffsets& o);
/// C of the stochastic unbounded analysis, summed over steps 1..t.
double noise_constant(const ParamSchedule& s, int t, double sigma_x, double sigma_y);
BoundValue step_bound_unbounded_stoch(const ParamSchedule& s, int t, const SaddleOffsets& o, double sigma_x,
                                         double sigma_y);

/// 3 exp(-l^2/3) + 3 exp(-l).
double tail_probability_ceiling(double lambda);

/// min over captured steps t of
///   |x^ - x_1|^2 + (e_t/s_t)|y^ - y_1|^2 - |x^ - x_{t+1}|^2 - (e_t(1-p)/s_t)|y^ - y_{t+1}|^2,
/// the distance-to-saddle contraction that holds under the equality step condition.
/// Needs iterates in every record and a known saddle.
double saddle_distance_slack(const Trajectory& trajectory, const SaddlePointProblem& problem,
                             const ParamSchedule& schedule);

struct AuditReport {
  double min_residual = 0.0;
  int t_at_min = 0;
  int probe_at_min = -1;
  std::vector<double> min_residual_per_t;  // index t-1
  double max_aggregate_error = 0.0;        // convex-combination identity for z^ag
  bool pass = false;
  nlohmann::json to_json() const;
};

/// Evaluates RHS - LHS of the one-step recursion
///   b_t g_t Q(z^ag_{t+1}, z) <= B_t(z) + g_t<K(x_{t+1}-x_t), y - y_{t+1}>
///                               - g_t(a_X/(2e_t) - L_G/(2b_t))|x_{t+1} - x_t|^2,
///   B_t(z) = sum_i (g_i/e_i)[V_X(x,x_i) - V_X(x,x_{i+1})] + (g_i/s_i)[V_Y(y,y_i) - V_Y(y,y_{i+1})]
/// for every step and probe, plus the identity z^ag_{t+1} = sum_i g_i z_{i+1}/(b_t g_t).
/// Needs a deterministic trajectory captured with iterates. Passes when every residual is >= -tol
/// and the identity holds to 1e-10.
AuditReport recursion_audit(const Trajectory& trajectory, const SaddlePointProblem& problem,
                            const ParamSchedule& schedule, const std::vector<PointPair>& probes, double tol = 1e-8);

}  // namespace apd

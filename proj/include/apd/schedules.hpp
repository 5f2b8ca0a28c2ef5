#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace apd {

enum class ScheduleVariant { bounded_det, unbounded_det, bounded_stoch, unbounded_stoch, custom };

std::string to_string(ScheduleVariant v);
ScheduleVariant schedule_variant_from_string(const std::string& name);

enum class ValidationMode { bounded, unbounded, stochastic_bounded, stochastic_unbounded, baseline };

std::string to_string(ValidationMode m);
ValidationMode validation_mode_from_string(const std::string& name);

struct ScheduleReport;

/// Constants a schedule is built from. Unused fields are ignored by a variant.
struct ScheduleConstants {
  double L_G = 0.0;
  double L_K = 0.0;
  double alpha_x = 1.0;
  double alpha_y = 1.0;
  double D_X = 0.0;  // 0 means unknown
  double D_Y = 0.0;
  double sigma_x = 0.0;
  double sigma_y = 0.0;
  double D_tilde = 1.0;
  std::optional<int> N;
};

/// Step-size schedule (beta_t, theta_t, eta_t, tau_t) with gamma_t, indexed from t = 1.
/// Built-in variants all use beta_t = (t+1)/2 and theta_t = (t-1)/t:
///   bounded_det      eta_t = a_X t/(2L_G + t L_K D_Y/D_X),         tau_t = a_Y D_Y/(L_K D_X)
///   unbounded_det    eta_t = t/(2(L_G + N L_K)),                   tau_t = t/(2 N L_K)
///   bounded_stoch    eta_t = 2a_X D_X t/(6L_G D_X + 3L_K D_Y(N-1) + 3s_x N sqrt(N-1)),
///                    tau_t = 2a_Y D_Y t/(3L_K D_X(N-1) + 3s_y N sqrt(N-1))
///   unbounded_stoch  eta_t = 3t/(4e), tau_t = t/e,
///                    e = 2L_G + 2L_K(N-1) + N sqrt(N-1) s/D~,  s = sqrt(9s_x^2/4 + s_y^2)
/// unbounded_det uses t rather than t+1 so that theta_t = eta_{t-1}/eta_t holds exactly.
class ParamSchedule {
 public:
  static ParamSchedule make(ScheduleVariant variant, const ScheduleConstants& constants);
  /// User sequences, entry k holding the value at t = k+1. Must pass validate_schedule and be
  /// accepted through certify() before a solver will use it.
  static ParamSchedule custom(std::vector<double> beta, std::vector<double> theta, std::vector<double> eta,
                              std::vector<double> tau, std::optional<double> p = std::nullopt,
                              std::optional<double> q = std::nullopt);

  double beta(int t) const;
  double theta(int t) const;
  double eta(int t) const;
  double tau(int t) const;
  /// gamma_1 = 1, gamma_t = gamma_{t-1}/theta_t.
  double gamma(int t) const;

  ScheduleVariant variant() const noexcept { return variant_; }
  const ScheduleConstants& constants() const noexcept { return constants_; }
  std::optional<int> horizon() const noexcept { return horizon_; }
  /// Largest t for which a solver step is defined (needs theta_{t+1}).
  int max_step() const noexcept;
  std::optional<double> p() const noexcept { return p_; }
  std::optional<double> q() const noexcept { return q_; }
  /// True when D_Y/D_X was unknown and replaced by 1.
  bool ratio_substituted() const noexcept { return ratio_substituted_; }
  /// Combined noise level and step denominator of unbounded_stoch; 0 otherwise.
  double sigma() const noexcept { return sigma_; }
  double eta_bar() const noexcept { return eta_bar_; }

  /// Built-in schedules are usable as constructed; custom ones only after certify().
  bool usable() const noexcept { return usable_; }
  /// Copy marked usable, carrying the report's slack values. Throws DegenerateSchedule if the
  /// report did not pass.
  ParamSchedule certify(const ScheduleReport& report) const;
  std::optional<ValidationMode> validated_mode() const noexcept { return validated_mode_; }

  nlohmann::json to_json() const;

 private:
  ParamSchedule() = default;
  void require_t(int t) const;

  ScheduleVariant variant_ = ScheduleVariant::custom;
  ScheduleConstants constants_;
  std::optional<int> horizon_;
  std::optional<double> p_, q_;
  bool ratio_substituted_ = false;
  bool usable_ = false;
  double sigma_ = 0.0;
  double eta_bar_ = 0.0;
  double ratio_ = 1.0;  // D_Y/D_X for bounded_det
  std::optional<ValidationMode> validated_mode_;
  // Custom sequences; gamma_ is precomputed, NaN past the first nonpositive theta.
  std::vector<double> beta_, theta_, eta_, tau_, gamma_;
};

ParamSchedule make_schedule(ScheduleVariant variant, const ScheduleConstants& constants);
double gamma_of(const ParamSchedule& schedule, int t);

/// Per-t residuals (index t-1; NaN where a condition does not apply at that t).
///   beta:   beta_1 = 1 and beta_t - 1 = beta_{t-1} theta_t
///   step:   theta_t <= min ratio (bounded modes), theta_t = both ratios (unbounded modes),
///           theta_t = both ratios <= 1 (baseline); ratios are eta_{t-1}/eta_t, tau_{t-1}/tau_t
///   margin: q a_X/eta_t - L_G/beta_t - L_K^2 tau_t/(p a_Y), with p = q = 1 in bounded mode,
///           q = 1 in unbounded mode; baseline uses 1 - L_G eta_t - L_K^2 eta_t tau_t
/// A residual passes when >= -1e-10 * max(1, scale of its terms).
struct ScheduleReport {
  ValidationMode mode = ValidationMode::bounded;
  int t_max = 0;
  int t_checked = 0;
  std::optional<double> p, q;
  std::vector<double> beta, step, margin;
  bool pass = false;
  double min_margin = 0.0;
  std::optional<int> first_violation_t;
  std::string first_violation;
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
};

/// Checks the schedule for t = 1..min(t_max, max_step()) against the given problem constants
/// (L_G, L_K, alpha_x, alpha_y). p and q default to the schedule's own slack values.
ScheduleReport validate_schedule(const ParamSchedule& schedule, const ScheduleConstants& problem, int t_max,
                                 ValidationMode mode, std::optional<double> p = std::nullopt,
                                 std::optional<double> q = std::nullopt);

/// Mode a built-in variant is meant to satisfy.
ValidationMode default_mode(ScheduleVariant variant);

}  // namespace apd

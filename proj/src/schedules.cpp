#include "apd/schedules.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>

#include "apd/errors.hpp"

namespace apd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_nonneg(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw InvalidConstants(std::string(name) + " must be finite and nonnegative");
}

void require_pos(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidConstants(std::string(name) + " must be positive");
}

int require_horizon(const ScheduleConstants& c, ScheduleVariant v) {
  if (!c.N) throw InvalidConstants(to_string(v) + " schedule needs a horizon N");
  if (*c.N < 2) throw InvalidConstants(to_string(v) + " schedule needs N >= 2");
  return *c.N;
}

void require_lk(double l_k, ScheduleVariant v) {
  if (!(l_k > 0.0))
    throw InvalidConstants(to_string(v) +
                           " schedule divides by L_K; for K = 0 pass a small positive surrogate such as 1e-8");
}

}  // namespace

std::string to_string(ScheduleVariant v) {
  switch (v) {
    case ScheduleVariant::bounded_det: return "bounded_det";
    case ScheduleVariant::unbounded_det: return "unbounded_det";
    case ScheduleVariant::bounded_stoch: return "bounded_stoch";
    case ScheduleVariant::unbounded_stoch: return "unbounded_stoch";
    case ScheduleVariant::custom: return "custom";
  }
  return "unknown";
}

ScheduleVariant schedule_variant_from_string(const std::string& name) {
  for (auto v : {ScheduleVariant::bounded_det, ScheduleVariant::unbounded_det, ScheduleVariant::bounded_stoch,
                 ScheduleVariant::unbounded_stoch, ScheduleVariant::custom})
    if (to_string(v) == name) return v;
  throw InvalidArgument("unknown schedule variant '" + name + "'");
}

std::string to_string(ValidationMode m) {
  switch (m) {
    case ValidationMode::bounded: return "bounded";
    case ValidationMode::unbounded: return "unbounded";
    case ValidationMode::stochastic_bounded: return "stochastic_bounded";
    case ValidationMode::stochastic_unbounded: return "stochastic_unbounded";
    case ValidationMode::baseline: return "baseline";
  }
  return "unknown";
}

ValidationMode validation_mode_from_string(const std::string& name) {
  for (auto m : {ValidationMode::bounded, ValidationMode::unbounded, ValidationMode::stochastic_bounded,
                 ValidationMode::stochastic_unbounded, ValidationMode::baseline})
    if (to_string(m) == name) return m;
  throw InvalidArgument("unknown validation mode '" + name + "'");
}

ValidationMode default_mode(ScheduleVariant variant) {
  switch (variant) {
    case ScheduleVariant::bounded_det: return ValidationMode::bounded;
    case ScheduleVariant::unbounded_det: return ValidationMode::unbounded;
    case ScheduleVariant::bounded_stoch: return ValidationMode::stochastic_bounded;
    case ScheduleVariant::unbounded_stoch: return ValidationMode::stochastic_unbounded;
    case ScheduleVariant::custom: return ValidationMode::bounded;
  }
  return ValidationMode::bounded;
}

ParamSchedule ParamSchedule::make(ScheduleVariant variant, const ScheduleConstants& c) {
  ParamSchedule s;
  s.variant_ = variant;
  s.constants_ = c;
  s.usable_ = true;
  require_nonneg(c.L_G, "L_G");
  require_nonneg(c.L_K, "L_K");
  require_pos(c.alpha_x, "alpha_x");
  require_pos(c.alpha_y, "alpha_y");
  switch (variant) {
    case ScheduleVariant::bounded_det: {
      require_lk(c.L_K, variant);
      const bool dx = c.D_X > 0.0, dy = c.D_Y > 0.0;
      if (dx && dy) {
        s.ratio_ = c.D_Y / c.D_X;
      } else if (!dx && !dy) {
        s.ratio_ = 1.0;
        s.ratio_substituted_ = true;
      } else {
        throw InvalidConstants("bounded_det: give both D_X and D_Y, or neither");
      }
      s.horizon_ = c.N;
      break;
    }
    case ScheduleVariant::unbounded_det: {
      require_horizon(c, variant);
      require_lk(c.L_K, variant);
      s.horizon_ = c.N;
      s.p_ = 0.25;
      break;
    }
    case ScheduleVariant::bounded_stoch: {
      const int n = require_horizon(c, variant);
      require_pos(c.D_X, "D_X");
      require_pos(c.D_Y, "D_Y");
      require_nonneg(c.sigma_x, "sigma_x");
      require_nonneg(c.sigma_y, "sigma_y");
      const double root = n * std::sqrt(n - 1.0);
      const double den_x = 6 * c.L_G * c.D_X + 3 * c.L_K * c.D_Y * (n - 1) + 3 * c.sigma_x * root;
      const double den_y = 3 * c.L_K * c.D_X * (n - 1) + 3 * c.sigma_y * root;
      if (!(den_x > 0.0) || !(den_y > 0.0))
        throw InvalidConstants("bounded_stoch: step denominators vanish; need L_K > 0 or positive noise levels");
      s.horizon_ = c.N;
      s.p_ = 2.0 / 3.0;
      s.q_ = 2.0 / 3.0;
      break;
    }
    case ScheduleVariant::unbounded_stoch: {
      const int n = require_horizon(c, variant);
      require_pos(c.D_tilde, "D_tilde");
      require_nonneg(c.sigma_x, "sigma_x");
      require_nonneg(c.sigma_y, "sigma_y");
      s.sigma_ = std::sqrt(2.25 * c.sigma_x * c.sigma_x + c.sigma_y * c.sigma_y);
      s.eta_bar_ = 2 * c.L_G + 2 * c.L_K * (n - 1) + n * std::sqrt(n - 1.0) * s.sigma_ / c.D_tilde;
      if (!(s.eta_bar_ > 0.0)) throw InvalidConstants("unbounded_stoch: all constants are zero");
      s.horizon_ = c.N;
      s.p_ = 0.25;
      s.q_ = 0.75;
      break;
    }
    case ScheduleVariant::custom:
      throw InvalidArgument("use ParamSchedule::custom for user sequences");
  }
  return s;
}

ParamSchedule ParamSchedule::custom(std::vector<double> beta, std::vector<double> theta, std::vector<double> eta,
                                    std::vector<double> tau, std::optional<double> p, std::optional<double> q) {
  const std::size_t n = beta.size();
  if (n < 2 || theta.size() != n || eta.size() != n || tau.size() != n)
    throw InvalidArgument("custom schedule: four sequences of equal length >= 2 required");
  for (const auto* seq : {&beta, &theta, &eta, &tau})
    for (double v : *seq)
      if (!std::isfinite(v)) throw InvalidArgument("custom schedule: non-finite entry");
  for (auto slack : {p, q})
    if (slack && !(*slack > 0.0 && *slack < 1.0)) throw InvalidArgument("custom schedule: p, q must lie in (0,1)");
  ParamSchedule s;
  s.variant_ = ScheduleVariant::custom;
  s.horizon_ = static_cast<int>(n);
  s.constants_.N = static_cast<int>(n);
  s.p_ = p;
  s.q_ = q;
  s.gamma_.assign(n, kNaN);
  s.gamma_[0] = 1.0;
  for (std::size_t i = 1; i < n && theta[i] > 0.0; ++i) s.gamma_[i] = s.gamma_[i - 1] / theta[i];
  s.beta_ = std::move(beta);
  s.theta_ = std::move(theta);
  s.eta_ = std::move(eta);
  s.tau_ = std::move(tau);
  return s;
}

void ParamSchedule::require_t(int t) const {
  if (t < 1) throw InvalidArgument("schedule index must be >= 1, got " + std::to_string(t));
  if (variant_ == ScheduleVariant::custom && t > static_cast<int>(beta_.size()))
    throw HorizonError("custom schedule has " + std::to_string(beta_.size()) + " entries; asked for t=" +
                       std::to_string(t));
}

int ParamSchedule::max_step() const noexcept {
  return horizon_ ? *horizon_ - 1 : INT_MAX;
}

double ParamSchedule::beta(int t) const {
  require_t(t);
  if (variant_ == ScheduleVariant::custom) return beta_[t - 1];
  return (t + 1) / 2.0;
}

double ParamSchedule::theta(int t) const {
  require_t(t);
  if (variant_ == ScheduleVariant::custom) return theta_[t - 1];
  return (t - 1.0) / t;
}

double ParamSchedule::eta(int t) const {
  require_t(t);
  const auto& c = constants_;
  switch (variant_) {
    case ScheduleVariant::bounded_det: return c.alpha_x * t / (2 * c.L_G + t * c.L_K * ratio_);
    case ScheduleVariant::unbounded_det: return t / (2 * (c.L_G + *c.N * c.L_K));
    case ScheduleVariant::bounded_stoch: {
      const int n = *c.N;
      return 2 * c.alpha_x * c.D_X * t /
             (6 * c.L_G * c.D_X + 3 * c.L_K * c.D_Y * (n - 1) + 3 * c.sigma_x * n * std::sqrt(n - 1.0));
    }
    case ScheduleVariant::unbounded_stoch: return 3.0 * t / (4 * eta_bar_);
    case ScheduleVariant::custom: return eta_[t - 1];
  }
  return kNaN;
}

double ParamSchedule::tau(int t) const {
  require_t(t);
  const auto& c = constants_;
  switch (variant_) {
    case ScheduleVariant::bounded_det: return c.alpha_y * ratio_ / c.L_K;
    case ScheduleVariant::unbounded_det: return t / (2.0 * *c.N * c.L_K);
    case ScheduleVariant::bounded_stoch: {
      const int n = *c.N;
      return 2 * c.alpha_y * c.D_Y * t / (3 * c.L_K * c.D_X * (n - 1) + 3 * c.sigma_y * n * std::sqrt(n - 1.0));
    }
    case ScheduleVariant::unbounded_stoch: return t / eta_bar_;
    case ScheduleVariant::custom: return tau_[t - 1];
  }
  return kNaN;
}

double ParamSchedule::gamma(int t) const {
  require_t(t);
  if (variant_ != ScheduleVariant::custom) return static_cast<double>(t);  // theta_t = (t-1)/t
  const double g = gamma_[t - 1];
  if (std::isnan(g)) {
    int bad = 2;
    while (theta_[bad - 1] > 0.0) ++bad;
    throw DegenerateSchedule("gamma_t undefined: theta_" + std::to_string(bad) + " = " +
                             std::to_string(theta_[bad - 1]) + " is not positive");
  }
  return g;
}

ParamSchedule ParamSchedule::certify(const ScheduleReport& report) const {
  if (!report.pass) {
    throw DegenerateSchedule("schedule failed " + to_string(report.mode) + " validation" +
                             (report.first_violation_t ? " at t=" + std::to_string(*report.first_violation_t) : "") +
                             " (" + report.first_violation + ")");
  }
  ParamSchedule s = *this;
  s.usable_ = true;
  s.validated_mode_ = report.mode;
  if (report.p) s.p_ = report.p;
  if (report.q) s.q_ = report.q;
  return s;
}

nlohmann::json ParamSchedule::to_json() const {
  nlohmann::json j;
  j["variant"] = to_string(variant_);
  const auto& c = constants_;
  j["constants"] = {{"L_G", c.L_G},         {"L_K", c.L_K},         {"alpha_x", c.alpha_x},
                    {"alpha_y", c.alpha_y}, {"D_X", c.D_X},         {"D_Y", c.D_Y},
                    {"sigma_x", c.sigma_x}, {"sigma_y", c.sigma_y}, {"D_tilde", c.D_tilde}};
  j["N"] = horizon_ ? nlohmann::json(*horizon_) : nlohmann::json(nullptr);
  j["p"] = p_ ? nlohmann::json(*p_) : nlohmann::json(nullptr);
  j["q"] = q_ ? nlohmann::json(*q_) : nlohmann::json(nullptr);
  j["ratio_substituted"] = ratio_substituted_;
  if (variant_ == ScheduleVariant::unbounded_stoch) {
    j["sigma"] = sigma_;
    j["eta_bar"] = eta_bar_;
  }
  if (variant_ == ScheduleVariant::custom) {
    j["beta"] = beta_;
    j["theta"] = theta_;
    j["eta"] = eta_;
    j["tau"] = tau_;
  }
  return j;
}

ParamSchedule make_schedule(ScheduleVariant variant, const ScheduleConstants& constants) {
  return ParamSchedule::make(variant, constants);
}

double gamma_of(const ParamSchedule& schedule, int t) { return schedule.gamma(t); }

namespace {

bool fails(double residual, double scale) {
  return std::isnan(residual) ? false : residual < -1e-10 * std::max(1.0, scale);
}

nlohmann::json nullable_array(const std::vector<double>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : v) a.push_back(std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x));
  return a;
}

}  // namespace

ScheduleReport validate_schedule(const ParamSchedule& s, const ScheduleConstants& pc, int t_max, ValidationMode mode,
                                 std::optional<double> p, std::optional<double> q) {
  if (t_max < 2) throw InvalidArgument("validate_schedule: t_max must be >= 2");
  ScheduleReport r;
  r.mode = mode;
  r.t_max = t_max;
  r.t_checked = std::min(t_max, s.max_step());
  if (r.t_checked < t_max) {
    r.notes.push_back("checked up to the last step the horizon allows, t=" + std::to_string(r.t_checked));
  }
  if (s.ratio_substituted()) r.notes.push_back("D_Y/D_X unknown; ratio set to 1");

  const bool needs_p = mode == ValidationMode::unbounded || mode == ValidationMode::stochastic_bounded ||
                       mode == ValidationMode::stochastic_unbounded;
  const bool needs_q = mode == ValidationMode::stochastic_bounded || mode == ValidationMode::stochastic_unbounded;
  if (needs_p) r.p = p ? p : s.p();
  if (needs_q) r.q = q ? q : s.q();
  if (needs_p && !r.p) throw InvalidArgument("validate_schedule: mode " + to_string(mode) + " needs p");
  if (needs_q && !r.q) throw InvalidArgument("validate_schedule: mode " + to_string(mode) + " needs q");
  for (auto slack : {r.p, r.q})
    if (slack && !(*slack > 0.0 && *slack < 1.0)) throw InvalidArgument("validate_schedule: p, q must lie in (0,1)");
  const double pv = r.p.value_or(1.0), qv = r.q.value_or(1.0);
  const bool equality = mode == ValidationMode::unbounded || mode == ValidationMode::stochastic_unbounded;

  const int n = r.t_checked;
  r.beta.assign(n, kNaN);
  r.step.assign(n, kNaN);
  r.margin.assign(n, kNaN);
  r.pass = true;
  r.min_margin = std::numeric_limits<double>::infinity();
  auto flag = [&](int t, double residual, double scale, const char* what) {
    if (fails(residual, scale) && r.pass) {
      r.pass = false;
      r.first_violation_t = t;
      r.first_violation = what;
    }
  };

  double eta_prev = 0.0, tau_prev = 0.0, beta_prev = 0.0;
  for (int t = 1; t <= n; ++t) {
    const double b = s.beta(t), th = s.theta(t), e = s.eta(t), ta = s.tau(t);
    if (!(e > 0.0) || !(ta > 0.0)) {
      r.margin[t - 1] = -1.0;
      flag(t, -1.0, 1.0, "step sizes must be positive");
      break;
    }

    if (mode == ValidationMode::baseline) {
      r.beta[t - 1] = -std::abs(b - 1.0);
      flag(t, r.beta[t - 1], 1.0, "beta_t = 1");
    } else if (t == 1) {
      r.beta[0] = -std::abs(b - 1.0);
      flag(t, r.beta[0], 1.0, "beta_1 = 1");
    } else {
      r.beta[t - 1] = -std::abs(b - 1.0 - beta_prev * th);
      flag(t, r.beta[t - 1], std::abs(b), "beta_t - 1 = beta_{t-1} theta_t");
    }

    if (t >= 2) {
      const double re = eta_prev / e, rt = tau_prev / ta;
      double res;
      if (!(th > 0.0)) {
        res = th - 1.0;  // nonpositive theta reported below -1
      } else if (mode == ValidationMode::baseline) {
        res = std::min({-std::abs(th - re), -std::abs(th - rt), 1.0 - th});
      } else if (equality) {
        res = -std::max(std::abs(th - re), std::abs(th - rt));
      } else {
        res = std::min(re, rt) - th;
      }
      r.step[t - 1] = res;
      flag(t, res, std::max({1.0, th, re, rt}),
           mode == ValidationMode::baseline ? "0 < theta_t = step ratios <= 1"
           : equality                       ? "theta_t = eta_{t-1}/eta_t = tau_{t-1}/tau_t"
                                            : "0 < theta_t <= min(eta_{t-1}/eta_t, tau_{t-1}/tau_t)");
    }

    double m, scale;
    if (mode == ValidationMode::baseline) {
      const double a = pc.L_G * e, c = pc.L_K * pc.L_K * e * ta;
      m = 1.0 - a - c;
      scale = 1.0 + a + c;
    } else {
      const double a = qv * pc.alpha_x / e, g = pc.L_G / b, c = pc.L_K * pc.L_K * ta / (pv * pc.alpha_y);
      m = a - g - c;
      scale = a + g + c;
    }
    r.margin[t - 1] = m;
    r.min_margin = std::min(r.min_margin, m);
    flag(t, m, scale, "step-size margin");

    eta_prev = e;
    tau_prev = ta;
    beta_prev = b;
  }
  return r;
}

nlohmann::json ScheduleReport::to_json() const {
  nlohmann::json j;
  j["mode"] = to_string(mode);
  j["t_max"] = t_max;
  j["t_checked"] = t_checked;
  j["p"] = p ? nlohmann::json(*p) : nlohmann::json(nullptr);
  j["q"] = q ? nlohmann::json(*q) : nlohmann::json(nullptr);
  j["pass"] = pass;
  j["min_margin"] = std::isfinite(min_margin) ? nlohmann::json(min_margin) : nlohmann::json(nullptr);
  j["first_violation_t"] = first_violation_t ? nlohmann::json(*first_violation_t) : nlohmann::json(nullptr);
  j["first_violation"] = first_violation;
  j["notes"] = notes;
  j["residuals"] = {{"beta", nullable_array(beta)}, {"step", nullable_array(step)}, {"margin", nullable_array(margin)}};
  return j;
}

}  // namespace apd

#include "apd/solvers.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "apd/errors.hpp"

namespace apd {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::apd: return "apd";
    case Algorithm::stochastic_apd: return "stochastic_apd";
    case Algorithm::pd_baseline: return "pd_baseline";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "apd") return Algorithm::apd;
  if (name == "stochastic_apd") return Algorithm::stochastic_apd;
  if (name == "pd_baseline" || name == "pd_linearized") return Algorithm::pd_baseline;
  throw InvalidArgument("unknown algorithm '" + name + "'");
}

SolverState initial_state(const SaddlePointProblem& problem, const std::optional<PointPair>& start) {
  SolverState s;
  s.x = start ? start->x : problem.set_x.center_point();
  s.y = start ? start->y : problem.set_y.center_point();
  require_dim(s.x, problem.dim_x(), "start x");
  require_dim(s.y, problem.dim_y(), "start y");
  require_feasible(problem.set_x, s.x, "X");
  require_feasible(problem.set_y, s.y, "Y");
  s.x_prev = s.x;
  s.x_bar = s.x;
  s.x_md = s.x;
  s.x_ag = s.x;
  s.y_ag = s.y;
  s.x_start = s.x;
  s.y_start = s.y;
  s.weighted_x = Vec::Zero(s.x.size());
  s.weighted_y = Vec::Zero(s.y.size());
  return s;
}

namespace {

void check_step(const SolverState& s, const ParamSchedule& schedule) {
  if (!schedule.usable())
    throw InvalidArgument("custom schedule must pass validate_schedule and be certified before use");
  if (s.t < 1) throw InvalidArgument("solver state: t must be >= 1");
  if (s.t > schedule.max_step())
    throw HorizonError("step t=" + std::to_string(s.t) + " exceeds the schedule horizon (last step " +
                       std::to_string(schedule.max_step()) + ")");
}

struct NoiseTerms {
  const Vec* grad = nullptr;
  const Vec* kx = nullptr;
  const Vec* kty = nullptr;
};

SolverState apd_core(const SolverState& s, const SaddlePointProblem& p, const ParamSchedule& sch,
                     const NoiseTerms& noise) {
  check_step(s, sch);
  const int t = s.t;
  const double b = sch.beta(t), eta = sch.eta(t), tau = sch.tau(t), theta_next = sch.theta(t + 1);
  const double w = 1.0 / b;

  SolverState n = s;
  n.x_md = (1.0 - w) * s.x_ag + w * s.x;

  Vec kxbar = p.coupling.apply(s.x_bar);
  if (noise.kx) kxbar += *noise.kx;
  n.y = prox_map(p.geometry_y, p.set_y, -kxbar, &p.simple, s.y, tau);

  Vec grad = p.smooth.gradient(n.x_md);
  if (noise.grad) grad += *noise.grad;
  Vec kty = p.coupling.apply_adjoint(n.y);
  if (noise.kty) kty += *noise.kty;
  n.x = prox_map(p.geometry_x, p.set_x, grad + kty, nullptr, s.x, eta);

  n.x_prev = s.x;
  n.x_ag = (1.0 - w) * s.x_ag + w * n.x;
  n.y_ag = (1.0 - w) * s.y_ag + w * n.y;
  n.x_bar = theta_next * (n.x - s.x) + n.x;

  const double g = sch.gamma(t);
  n.weighted_x += g * n.x;
  n.weighted_y += g * n.y;
  n.weight_total += g;
  n.t = t + 1;
  return n;
}

}  // namespace

SolverState apd_step(const SolverState& state, const SaddlePointProblem& problem, const ParamSchedule& schedule) {
  return apd_core(state, problem, schedule, NoiseTerms{});
}

SolverState apd_step_with_noise(const SolverState& s, const SaddlePointProblem& p, const ParamSchedule& sch,
                                const NoiseRealization& noise, bool disclose) {
  require_dim(noise.grad_noise, p.dim_x(), "gradient noise");
  require_dim(noise.kx_noise, p.dim_y(), "K x noise");
  require_dim(noise.kty_noise, p.dim_x(), "K'y noise");
  SolverState n = apd_core(s, p, sch, NoiseTerms{&noise.grad_noise, &noise.kx_noise, &noise.kty_noise});

  const int t = s.t;
  const Vec delta_x = noise.grad_noise + noise.kty_noise;
  const Vec delta_y = -noise.kx_noise;
  if (n.log_noise) n.noise_log.push_back(NoiseRecord{t, noise.grad_noise, noise.kty_noise, delta_y});
  if (!disclose) return n;

  if (!n.aux) {
    if (t != 1) return n;  // z^v must start at z_1
    n.aux = AuxiliaryState{s.x_start, s.y_start, std::nullopt, sch.p(), sch.q()};
    if (sch.p() && sch.q()) n.aux->u_accum = 0.0;
  }
  AuxiliaryState& aux = *n.aux;
  const double eta = sch.eta(t), tau = sch.tau(t), g = sch.gamma(t);
  if (aux.u_accum) {
    const double pv = *aux.p, qv = *aux.q;
    const double dx = p.geometry_x.dual_norm(delta_x), dy = p.geometry_y.dual_norm(delta_y);
    const double cross = delta_x.dot(aux.x_v - s.x) + delta_y.dot(aux.y_v - s.y);
    *aux.u_accum += (2.0 - qv) * eta * g / (2.0 * (1.0 - qv) * p.geometry_x.alpha) * dx * dx +
                    (2.0 - pv) * tau * g / (2.0 * (1.0 - pv) * p.geometry_y.alpha) * dy * dy + g * cross;
  }
  aux.x_v = prox_map(p.geometry_x, p.set_x, -delta_x, nullptr, aux.x_v, eta);
  aux.y_v = prox_map(p.geometry_y, p.set_y, -delta_y, nullptr, aux.y_v, tau);
  return n;
}

SolverState stochastic_apd_step(const SolverState& state, const SaddlePointProblem& problem,
                                StochasticOracle& oracle, const ParamSchedule& schedule) {
  if (oracle.problem().dim_x() != problem.dim_x() || oracle.problem().dim_y() != problem.dim_y())
    throw InvalidArgument("oracle problem dimensions differ from the solver problem");
  check_step(state, schedule);
  NoiseRealization noise;
  noise.grad_noise = oracle.draw_grad_noise();
  noise.kx_noise = oracle.draw_primal_op_noise();
  noise.kty_noise = oracle.draw_adjoint_noise();
  return apd_step_with_noise(state, problem, schedule, noise, oracle.disclose_noise());
}

SolverState pd_baseline_step(const SolverState& s, const SaddlePointProblem& p, const ParamSchedule& sch,
                             bool linearized) {
  check_step(s, sch);
  const int t = s.t;
  const double eta = sch.eta(t), tau = sch.tau(t), theta = sch.theta(t);

  SolverState n = s;
  n.y = prox_map(p.geometry_y, p.set_y, -p.coupling.apply(s.x_bar), &p.simple, s.y, tau);
  const Vec kty = p.coupling.apply_adjoint(n.y);
  if (linearized) {
    n.x_md = s.x;
    n.x = prox_map(p.geometry_x, p.set_x, p.smooth.gradient(s.x) + kty, nullptr, s.x, eta);
  } else {
    if (!p.smooth.is_quadratic())
      throw UnsupportedEvaluation("pd_baseline with linearized=false needs a quadratic G");
    if (p.geometry_x.kind != GeometryKind::euclidean)
      throw UnsupportedEvaluation("pd_baseline with linearized=false needs Euclidean geometry on X");
    const double a = p.geometry_x.alpha / eta;
    const Mat m = p.smooth.hessian() + a * Mat::Identity(p.dim_x(), p.dim_x());
    n.x = minimize_quadratic(p.set_x, m, p.smooth.linear() + kty - a * s.x);
  }
  n.x_prev = s.x;
  n.x_bar = theta * (n.x - s.x) + n.x;
  const double count = t + 1.0;
  n.x_ag = s.x_ag + (n.x - s.x_ag) / count;
  n.y_ag = s.y_ag + (n.y - s.y_ag) / count;
  n.t = t + 1;
  return n;
}

double aggregate_identity_residual(const SolverState& s, const ParamSchedule& sch) {
  if (s.t < 2) throw InvalidArgument("aggregate identity needs at least one step");
  const int t = s.t - 1;
  const double bg = sch.beta(t) * sch.gamma(t);
  const double rx = (s.x_ag - s.weighted_x / bg).cwiseAbs().maxCoeff();
  const double ry = (s.y_ag - s.weighted_y / bg).cwiseAbs().maxCoeff();
  return std::max({rx, ry, std::abs(s.weight_total / bg - 1.0)});
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace apd

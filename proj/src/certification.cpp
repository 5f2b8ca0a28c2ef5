#include "apd/certification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "apd/errors.hpp"

namespace apd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// min over X of G(x) + <c, x>, exactly when G is quadratic and the set allows it.
struct InnerMin {
  double value;
  bool exact;
};

InnerMin min_smooth_plus_linear(const SaddlePointProblem& p, const Vec& c) {
  const SetDescriptor& set = p.set_x;
  if (p.smooth.is_quadratic()) {
    try {
      const Vec x = minimize_quadratic(set, p.smooth.hessian(), p.smooth.linear() + c);
      return {p.smooth.value(x) + c.dot(x), true};
    } catch (const UnsupportedEvaluation&) {
      if (!set.bounded()) throw;
    }
  }
  if (!set.bounded()) throw UnsupportedEvaluation("inner minimum over a free X needs a quadratic G");
  // Candidate set: center, coordinate extreme points, and the minimizer of the linearization at the center.
  const int n = set.dim();
  std::vector<Vec> cand{set.center_point()};
  for (int i = 0; i < n; ++i) {
    cand.push_back(set.support_point(Vec::Unit(n, i)));
    cand.push_back(set.support_point(-Vec::Unit(n, i)));
  }
  cand.push_back(set.support_point(-(c + p.smooth.gradient(set.center_point()))));
  double best = kInf;
  for (const Vec& x : cand) best = std::min(best, p.smooth.value(x) + c.dot(x));
  return {best, false};
}

void require_euclidean_unit(const SaddlePointProblem& p) {
  for (const auto* g : {&p.geometry_x, &p.geometry_y})
    if (g->kind != GeometryKind::euclidean || g->alpha != 1.0)
      throw UnsupportedEvaluation("perturbation certificates need Euclidean geometry with alpha = 1");
}

void require_equality_mode(const ParamSchedule& s) {
  const ValidationMode m = s.validated_mode().value_or(default_mode(s.variant()));
  if (m != ValidationMode::unbounded && m != ValidationMode::stochastic_unbounded)
    throw InvalidArgument("perturbation certificate needs a schedule validated in an unbounded mode");
}

int steps_taken(const SolverState& s) {
  if (s.t < 2) throw InvalidArgument("certificate needs at least one completed step");
  return s.t - 1;
}

}  // namespace

GapValue exact_gap_detail(const SaddlePointProblem& p, const PointPair& zt) {
  if (!p.set_x.bounded() || !p.set_y.bounded())
    throw UnsupportedEvaluation("exact gap needs bounded X and Y; use a perturbation certificate instead");
  require_dim(zt.x, p.dim_x(), "gap point x");
  require_dim(zt.y, p.dim_y(), "gap point y");
  const Vec& b = p.simple.coefficient();
  const double y_part = p.set_y.support(p.coupling.apply(zt.x) - b);
  const InnerMin x_part = min_smooth_plus_linear(p, p.coupling.apply_adjoint(zt.y));
  GapValue g;
  g.value = p.smooth.value(zt.x) + b.dot(zt.y) + y_part - x_part.value;
  g.exact = x_part.exact;
  if (!g.exact) g.caveat = "X part maximized over a finite candidate set; value is a lower bound";
  return g;
}

double exact_gap(const SaddlePointProblem& problem, const PointPair& z_tilde) {
  return exact_gap_detail(problem, z_tilde).value;
}

double perturbed_gap_at(const SaddlePointProblem& p, const PointPair& zt, const PointPair& v, const PointPair& z) {
  return eval_Q_unchecked(p, zt, z) - v.x.dot(zt.x - z.x) - v.y.dot(zt.y - z.y);
}

double perturbed_gap(const SaddlePointProblem& p, const PointPair& zt, const PointPair& v, double rel_tol) {
  const Vec& b = p.simple.coefficient();
  const Vec kx = p.coupling.apply(zt.x);
  const Vec cy = kx - b + v.y;
  double y_part;
  if (p.set_y.bounded()) {
    y_part = p.set_y.support(cy);
  } else {
    const double scale = std::max({1.0, kx.norm(), b.norm(), v.y.norm()});
    if (cy.norm() > rel_tol * scale) return kInf;
    y_part = 0.0;
  }
  const Vec cx = p.coupling.apply_adjoint(zt.y) - v.x;
  double x_part;
  try {
    x_part = -min_smooth_plus_linear(p, cx).value;
  } catch (const UnsupportedEvaluation&) {
    if (p.set_x.bounded() || !p.smooth.is_quadratic()) throw;
    return kInf;  // G + <cx, .> unbounded below on a free X
  }
  return p.smooth.value(zt.x) + b.dot(zt.y) - v.x.dot(zt.x) - v.y.dot(zt.y) + y_part + x_part;
}

PerturbationCertificate perturbation_certificate_det(const SolverState& s, const SaddlePointProblem& p,
                                                     const ParamSchedule& sch) {
  require_euclidean_unit(p);
  require_equality_mode(sch);
  const int t = steps_taken(s);
  const double b = sch.beta(t), e = sch.eta(t), ta = sch.tau(t);
  PerturbationCertificate c;
  c.t = t;
  c.v_x = (s.x_start - s.x) / (b * e);
  c.v_y = (s.y_start - s.y) / (b * ta) - p.coupling.apply(s.x - s.x_prev) / b;
  c.delta = (s.x_ag - s.x_start).squaredNorm() / (2 * b * e) + (s.y_ag - s.y_start).squaredNorm() / (2 * b * ta);
  return c;
}

PerturbationCertificate perturbation_certificate_stoch(const SolverState& s, const SaddlePointProblem& p,
                                                       const ParamSchedule& sch) {
  require_euclidean_unit(p);
  require_equality_mode(sch);
  if (!s.aux || !s.aux->u_accum)
    throw UnavailableCertificate("stochastic certificate needs disclosed oracle noise and slack values (p, q)");
  if (s.aux->p != sch.p() || s.aux->q != sch.q())
    throw InvalidArgument("U_t was accumulated with (p, q) different from the schedule's validated values");
  const int t = steps_taken(s);
  const double b = sch.beta(t), e = sch.eta(t), ta = sch.tau(t), g = sch.gamma(t);
  PerturbationCertificate c;
  c.t = t;
  c.v_x = (2 * s.x_start - s.x - s.aux->x_v) / (b * e);
  c.v_y = (2 * s.y_start - s.y - s.aux->y_v) / (b * ta) - p.coupling.apply(s.x - s.x_prev) / b;
  c.delta = (s.x_ag - s.x_start).squaredNorm() / (b * e) + (s.y_ag - s.y_start).squaredNorm() / (b * ta) +
            *s.aux->u_accum / (b * g);
  return c;
}

SaddleOffsets saddle_offsets(const SaddlePointProblem& p, const PointPair& start) {
  if (!p.known_saddle) throw UnavailableCertificate("bound needs a known saddle point");
  return {(p.known_saddle->x - start.x).norm(), (p.known_saddle->y - start.y).norm()};
}

double rate_bounded_det(const ScheduleConstants& c, int t) {
  if (t < 2) throw DomainError("bounded rate needs t >= 2");
  if (!(c.D_X > 0.0) || !(c.D_Y > 0.0)) throw InvalidConstants("bounded rate needs D_X, D_Y > 0");
  return 2 * c.L_G * c.D_X * c.D_X / (t * (t - 1.0)) + 2 * c.L_K * c.D_X * c.D_Y / t;
}

double rate_bounded_stoch_c0(const ScheduleConstants& c, int N) {
  if (N < 2) throw DomainError("C_0 needs N >= 2");
  return 6 * c.L_G * c.D_X * c.D_X / (N * (N - 1.0)) + 6 * c.L_K * c.D_X * c.D_Y / N +
         4 * (c.sigma_x * c.D_X + c.sigma_y * c.D_Y) / std::sqrt(N - 1.0);
}

double rate_bounded_stoch_c1(const ScheduleConstants& c, int N) {
  if (N < 2) throw DomainError("C_1 needs N >= 2");
  return 3 * (c.sigma_x * c.D_X + c.sigma_y * c.D_Y) / std::sqrt(N - 1.0);
}

BoundValue rate_unbounded_det(const ScheduleConstants& c, int N, double d_hat) {
  if (N < 1) throw DomainError("N must be positive");
  const double n = N;
  return {10 * c.L_G * d_hat * d_hat / (n * n) + 10 * c.L_K * d_hat * d_hat / n,
          15 * c.L_G * d_hat / (n * n) + 16 * c.L_K * d_hat / n};
}

BoundValue rate_unbounded_stoch(const ScheduleConstants& c, int N, double d) {
  if (N < 2) throw DomainError("unbounded stochastic rate needs N >= 2");
  if (!(c.D_tilde > 0.0)) throw InvalidConstants("D_tilde must be positive");
  const double n = N, root = std::sqrt(n - 1.0), dt = c.D_tilde;
  const double sigma = std::sqrt(2.25 * c.sigma_x * c.sigma_x + c.sigma_y * c.sigma_y);
  const double eps = 36 * c.L_G * d * d / (n * (n - 1)) + 36 * c.L_K * d * d / n +
                     sigma * (18 * d * d / dt + 3 * dt) / root;
  const double v = 50 * c.L_G * d / (n * (n - 1)) + c.L_K * (55 * d + 3 * dt) / n + sigma * (6 + 25 * d / dt) / root;
  return {eps, v};
}

BoundValue theoretical_bound(ScheduleVariant variant, const ScheduleConstants& c, int t, std::optional<double> d) {
  switch (variant) {
    case ScheduleVariant::bounded_det: return {rate_bounded_det(c, t), std::nullopt};
    case ScheduleVariant::bounded_stoch: return {rate_bounded_stoch_c0(c, t), rate_bounded_stoch_c1(c, t)};
    case ScheduleVariant::unbounded_det:
      if (!d) throw UnavailableCertificate("unbounded bound needs the start-to-saddle distance");
      return rate_unbounded_det(c, t, *d);
    case ScheduleVariant::unbounded_stoch:
      if (!d) throw UnavailableCertificate("unbounded bound needs the start-to-saddle distance");
      return rate_unbounded_stoch(c, t, *d);
    case ScheduleVariant::custom: break;
  }
  throw InvalidArgument("custom schedules have no closed-form bound");
}

double step_bound_bounded(const ParamSchedule& s, int t, double ox, double oy) {
  const double b = s.beta(t);
  return ox / (b * s.eta(t)) + oy / (b * s.tau(t));
}

namespace {

double variance_sum(const ParamSchedule& s, int t, double sx, double sy) {
  const double p = s.p().value_or(NAN), q = s.q().value_or(NAN);
  if (std::isnan(p) || std::isnan(q)) throw InvalidArgument("stochastic bound needs slack values p and q");
  const auto& c = s.constants();
  double sum = 0.0;
  for (int i = 1; i <= t; ++i) {
    const double g = s.gamma(i);
    sum += (2 - q) * s.eta(i) * g / ((1 - q) * c.alpha_x) * sx * sx +
           (2 - p) * s.tau(i) * g / ((1 - p) * c.alpha_y) * sy * sy;
  }
  return sum;
}

}  // namespace

double q0_bound(const ParamSchedule& s, int t, double ox, double oy, double sx, double sy) {
  const double bg = s.beta(t) * s.gamma(t), g = s.gamma(t);
  return (2 * g / s.eta(t) * ox + 2 * g / s.tau(t) * oy) / bg + variance_sum(s, t, sx, sy) / (2 * bg);
}

double q1_bound(const ParamSchedule& s, int t, double ox, double oy, double sx, double sy) {
  const auto& c = s.constants();
  const double bg = s.beta(t) * s.gamma(t);
  double g2 = 0.0;
  for (int i = 1; i <= t; ++i) g2 += s.gamma(i) * s.gamma(i);
  const double lead = (std::sqrt(2.0) * sx * std::sqrt(ox) / std::sqrt(c.alpha_x) + sy * std::sqrt(oy) / std::sqrt(c.alpha_y)) *
                      std::sqrt(2 * g2) / bg;
  return lead + variance_sum(s, t, sx, sy) / (2 * bg);
}

double weighted_start_distance(const ParamSchedule& s, const SaddleOffsets& o) {
  return std::sqrt(o.x * o.x + s.eta(1) / s.tau(1) * o.y * o.y);
}

BoundValue step_bound_unbounded_det(const ParamSchedule& s, int t, const SaddleOffsets& o) {
  const double p = s.p().value_or(NAN);
  if (std::isnan(p)) throw InvalidArgument("unbounded bound needs slack value p");
  const double b = s.beta(t), e = s.eta(t), ta = s.tau(t), d = weighted_start_distance(s, o);
  const double eps = (2 - p) * d * d / (b * e * (1 - p));
  const double v = o.x / (b * e) + o.y / (b * ta) +
                   ((1 + std::sqrt(s.eta(1) / (s.tau(1) * (1 - p)))) / (b * e) + 2 * s.constants().L_K / b) * d;
  return {eps, v};
}

double noise_constant(const ParamSchedule& s, int t, double sx, double sy) {
  const double p = s.p().value_or(NAN), q = s.q().value_or(NAN);
  if (std::isnan(p) || std::isnan(q)) throw InvalidArgument("noise constant needs slack values p and q");
  double sum = 0.0;
  for (int i = 1; i <= t; ++i) {
    const double e = s.eta(i);
    sum += e * e * sx * sx / (1 - q) + e * s.tau(i) * sy * sy / (1 - p);
  }
  return std::sqrt(sum);
}

BoundValue step_bound_unbounded_stoch(const ParamSchedule& s, int t, const SaddleOffsets& o, double sx,
                                         double sy) {
  const double p = s.p().value_or(NAN);
  if (std::isnan(p)) throw InvalidArgument("unbounded bound needs slack value p");
  const double b = s.beta(t), e = s.eta(t), ta = s.tau(t);
  const double d = weighted_start_distance(s, o), c = noise_constant(s, t, sx, sy);
  const double eps = ((6 - 4 * p) / (1 - p) * d * d + (5 - 3 * p) / (2 - 2 * p) * c * c) / (b * e);
  const double v = 2 * o.x / (b * e) + 2 * o.y / (b * ta) +
                   std::sqrt(2 * d * d + c * c) *
                       (2 / (b * e) + std::sqrt(s.tau(1) / s.eta(1)) * (std::sqrt(1 / (1 - p)) + 1) / (b * ta) +
                        2 * s.constants().L_K / b);
  return {eps, v};
}

double tail_probability_ceiling(double lambda) {
  return 3 * std::exp(-lambda * lambda / 3) + 3 * std::exp(-lambda);
}

double saddle_distance_slack(const Trajectory& tr, const SaddlePointProblem& p, const ParamSchedule& s) {
  if (!p.known_saddle) throw UnavailableCertificate("distance check needs a known saddle point");
  const double pv = s.p().value_or(NAN);
  if (std::isnan(pv)) throw InvalidArgument("distance check needs slack value p");
  const PointPair& zh = *p.known_saddle;
  const double x0 = (zh.x - tr.start.x).squaredNorm(), y0 = (zh.y - tr.start.y).squaredNorm();
  double worst = kInf;
  for (std::size_t k = 0; k < tr.records.size(); ++k) {
    if (!tr.records[k].z) throw InsufficientCapture("distance check needs iterates captured at every step");
    const PointPair& z = *tr.records[k].z;
    const int t = static_cast<int>(k) + 1;
    const double r = s.eta(t) / s.tau(t);
    const double lhs = (zh.x - z.x).squaredNorm() + r * (1 - pv) * (zh.y - z.y).squaredNorm();
    worst = std::min(worst, x0 + r * y0 - lhs);
  }
  return worst;
}

AuditReport recursion_audit(const Trajectory& tr, const SaddlePointProblem& p, const ParamSchedule& s,
                            const std::vector<PointPair>& probes, double tol) {
  if (tr.records.empty()) throw InsufficientCapture("recursion audit: trajectory has no steps");
  for (const auto& r : tr.records)
    if (!r.z || !r.z_ag) throw InsufficientCapture("recursion audit needs iterates captured at every step");
  for (const auto& z : probes) {
    require_dim(z.x, p.dim_x(), "probe x");
    require_dim(z.y, p.dim_y(), "probe y");
  }

  const std::size_t np = probes.size();
  const double ax = p.geometry_x.alpha;
  std::vector<double> bsum(np, 0.0);
  Vec wx = Vec::Zero(p.dim_x()), wy = Vec::Zero(p.dim_y());
  double wsum = 0.0;

  AuditReport rep;
  rep.min_residual = kInf;
  rep.min_residual_per_t.assign(tr.records.size(), kInf);
  Vec x_t = tr.start.x, y_t = tr.start.y;
  for (std::size_t k = 0; k < tr.records.size(); ++k) {
    const int t = static_cast<int>(k) + 1;
    const PointPair& z1 = *tr.records[k].z;
    const PointPair& zag = *tr.records[k].z_ag;
    const double b = s.beta(t), g = s.gamma(t), e = s.eta(t), ta = s.tau(t);
    const Vec dx = z1.x - x_t;
    const Vec kdx = p.coupling.apply(dx);
    const double nx = p.geometry_x.norm(dx);
    const double penalty = g * (ax / (2 * e) - p.L_G / (2 * b)) * nx * nx;

    for (std::size_t j = 0; j < np; ++j) {
      const PointPair& z = probes[j];
      bsum[j] += g / e * (bregman_div(p.geometry_x, z.x, x_t) - bregman_div(p.geometry_x, z.x, z1.x)) +
                 g / ta * (bregman_div(p.geometry_y, z.y, y_t) - bregman_div(p.geometry_y, z.y, z1.y));
      const double lhs = b * g * eval_Q_unchecked(p, zag, z);
      const double rhs = bsum[j] + g * kdx.dot(z.y - z1.y) - penalty;
      const double res = rhs - lhs;
      rep.min_residual_per_t[k] = std::min(rep.min_residual_per_t[k], res);
      if (res < rep.min_residual) {
        rep.min_residual = res;
        rep.t_at_min = t;
        rep.probe_at_min = static_cast<int>(j);
      }
    }

    wx += g * z1.x;
    wy += g * z1.y;
    wsum += g;
    const double bg = b * g;
    const double err = std::max({(zag.x - wx / bg).cwiseAbs().maxCoeff(), (zag.y - wy / bg).cwiseAbs().maxCoeff(),
                                 std::abs(wsum / bg - 1.0)});
    rep.max_aggregate_error = std::max(rep.max_aggregate_error, err);
    x_t = z1.x;
    y_t = z1.y;
  }
  if (np == 0) rep.min_residual = 0.0;
  rep.pass = rep.min_residual >= -tol && rep.max_aggregate_error <= 1e-10;
  return rep;
}

nlohmann::json AuditReport::to_json() const {
  return {{"min_residual", min_residual},   {"t_at_min", t_at_min},
          {"probe_at_min", probe_at_min},   {"max_aggregate_error", max_aggregate_error},
          {"pass", pass},                   {"steps", min_residual_per_t.size()}};
}

}  // namespace apd

#include "apd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "apd/errors.hpp"

namespace apd {

std::string to_string(GeometryKind kind) {
  return kind == GeometryKind::euclidean ? "euclidean" : "entropy";
}

GeometryKind geometry_kind_from_string(const std::string& name) {
  if (name == "euclidean") return GeometryKind::euclidean;
  if (name == "entropy") return GeometryKind::entropy;
  throw InvalidArgument("unknown geometry '" + name + "'");
}

namespace {

void require_positive_alpha(const BregmanGeometry& geo) {
  if (!(geo.alpha > 0.0)) throw InvalidArgument("geometry: alpha must be positive");
}

void require_entropy_point(const Vec& x, const char* what, bool strict) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (strict ? !(x[i] > 0.0) : !(x[i] >= 0.0))
      throw DomainError(std::string("entropy geometry: ") + what + " has coordinate " +
                        std::to_string(x[i]) + " at index " + std::to_string(i));
  }
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

double BregmanGeometry::distance_generating(const Vec& x) const {
  require_positive_alpha(*this);
  if (kind == GeometryKind::euclidean) return 0.5 * alpha * x.squaredNorm();
  require_entropy_point(x, "argument", false);
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += xlogx(x[i]);
  return alpha * s;
}

Vec BregmanGeometry::distance_gradient(const Vec& x) const {
  require_positive_alpha(*this);
  if (kind == GeometryKind::euclidean) return alpha * x;
  require_entropy_point(x, "argument", true);
  return alpha * (x.array().log() + 1.0).matrix();
}

double BregmanGeometry::norm(const Vec& x) const {
  return kind == GeometryKind::euclidean ? x.norm() : x.lpNorm<1>();
}

double BregmanGeometry::dual_norm(const Vec& g) const {
  return kind == GeometryKind::euclidean ? g.norm() : g.lpNorm<Eigen::Infinity>();
}

double bregman_div(const BregmanGeometry& geometry, const Vec& x, const Vec& u) {
  require_positive_alpha(geometry);
  if (x.size() != u.size()) throw InvalidArgument("bregman_div: dimension mismatch");
  if (geometry.kind == GeometryKind::euclidean) return 0.5 * geometry.alpha * (x - u).squaredNorm();
  require_entropy_point(u, "second argument", true);
  require_entropy_point(x, "first argument", false);
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    s += (x[i] > 0.0 ? x[i] * std::log(x[i] / u[i]) : 0.0) - x[i] + u[i];
  }
  return geometry.alpha * std::max(0.0, s);
}

Vec prox_map(const BregmanGeometry& geometry, const SetDescriptor& set, const Vec& linear_term,
             const SimpleTerm* simple, const Vec& center, double step) {
  require_positive_alpha(geometry);
  if (!(step > 0.0)) throw InvalidArgument("prox_map: step must be positive");
  require_dim(linear_term, set.dim(), "prox_map linear term");
  require_dim(center, set.dim(), "prox_map center");
  Vec g = linear_term;
  if (simple != nullptr) {
    require_dim(simple->coefficient(), set.dim(), "prox_map simple term");
    if (simple->kind() == SimpleKind::linear) g += simple->coefficient();
  }

  if (geometry.kind == GeometryKind::euclidean) {
    return set.project(center - (step / geometry.alpha) * g);
  }

  if (set.kind() != SetKind::simplex) {
    throw UnsupportedEvaluation(
        "prox_map: entropy geometry requires a simplex; supported closed forms are "
        "euclidean+{free, box, euclidean_ball, simplex} and entropy+simplex, with J zero or linear");
  }
  require_entropy_point(center, "prox center", true);
  Vec logits = center.array().log().matrix() - (step / geometry.alpha) * g;
  logits.array() -= logits.maxCoeff();
  Vec w = logits.array().exp().matrix();
  w /= w.sum();
  w = w.cwiseMax(kSimplexFloor);
  return w / w.sum();
}

RadiusBound set_radius(const BregmanGeometry& geometry, const SetDescriptor& set) {
  RadiusBound r;
  if (!set.bounded()) {
    r.unbounded = true;
    return r;
  }
  const double a = geometry.alpha;
  if (geometry.kind == GeometryKind::entropy) {
    if (set.kind() != SetKind::simplex) {
      r.unbounded = true;
      r.caveat = "entropy geometry is only defined on the simplex";
      return r;
    }
    const double n = set.dim();
    r.omega_sq = n > 1 ? a * (std::log(1.0 / kSimplexFloor) + std::log(n)) : 0.0;
    r.clipped = true;
    r.caveat = "KL is unbounded on the closed simplex; value holds for iterates clipped at 1e-12";
    return r;
  }
  switch (set.kind()) {
    case SetKind::euclidean_ball: r.omega_sq = 2.0 * a * set.radius() * set.radius(); break;
    case SetKind::box: r.omega_sq = 0.5 * a * (set.upper() - set.lower()).squaredNorm(); break;
    case SetKind::simplex: r.omega_sq = set.dim() > 1 ? a : 0.0; break;
    case SetKind::free: r.unbounded = true; break;
  }
  return r;
}

double diameter_constant(const BregmanGeometry& geometry, const SetDescriptor& set) {
  const RadiusBound r = set_radius(geometry, set);
  if (r.unbounded) throw UnsupportedEvaluation("diameter of an unbounded set");
  return std::sqrt(r.omega_sq * 2.0 / geometry.alpha);
}

namespace {

bool is_diagonal(const Mat& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

Vec minimize_free_diag(const Vec& m, const Vec& g) {
  Vec w(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (m[i] > 0.0) {
      w[i] = -g[i] / m[i];
    } else if (g[i] == 0.0) {
      w[i] = 0.0;
    } else {
      throw UnsupportedEvaluation("minimize_quadratic: objective unbounded below on a free set");
    }
  }
  return w;
}

Vec minimize_box_diag(const Vec& lo, const Vec& hi, const Vec& m, const Vec& g) {
  Vec w(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    double v;
    if (m[i] > 0.0) v = -g[i] / m[i];
    else v = g[i] > 0.0 ? lo[i] : (g[i] < 0.0 ? hi[i] : 0.0);
    w[i] = std::clamp(v, lo[i], hi[i]);
  }
  return w;
}

// Minimize over |s| <= r of 0.5 s'diag(m)s + <h, s>, m >= 0.
Vec minimize_ball_diag(const Vec& m, const Vec& h, double r) {
  if (h.isZero(0.0)) return Vec::Zero(m.size());
  auto s_of = [&](double lambda) {
    Vec s(m.size());
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double d = m[i] + lambda;
      s[i] = d > 0.0 ? -h[i] / d : (h[i] == 0.0 ? 0.0 : -h[i] * HUGE_VAL);
    }
    return s;
  };
  const Vec s0 = s_of(0.0);
  if (s0.allFinite() && s0.norm() <= r) return s0;
  double lo = 0.0;
  double hi = h.norm() / r;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const Vec s = s_of(mid);
    if (s.allFinite() && s.norm() <= r) hi = mid;
    else lo = mid;
  }
  Vec s = s_of(hi);
  const double n = s.norm();
  if (n > r) s *= r / n;
  return s;
}

// Minimize over the simplex of 0.5 sum m_i w_i^2 + <g, w>, m >= 0, via the exact
// KKT multiplier nu: w_i = max(0, -(g_i + nu)/m_i) on m_i > 0 coordinates.
Vec minimize_simplex_diag(const Vec& m, const Vec& g) {
  const Eigen::Index n = m.size();
  std::vector<Eigen::Index> pos, zero;
  for (Eigen::Index i = 0; i < n; ++i) (m[i] > 0.0 ? pos : zero).push_back(i);
  Vec w = Vec::Zero(n);

  auto best_zero = [&]() {
    Eigen::Index j = zero.front();
    for (Eigen::Index k : zero)
      if (g[k] < g[j]) j = k;
    return j;
  };
  if (pos.empty()) {
    w[best_zero()] = 1.0;
    return w;
  }

  // Breakpoints -g_i in decreasing order; activate coordinates one at a time.
  std::vector<Eigen::Index> order = pos;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return -g[a] > -g[b]; });
  double sum_inv = 0.0, sum_gm = 0.0, nu = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Eigen::Index i = order[k];
    sum_inv += 1.0 / m[i];
    sum_gm += g[i] / m[i];
    nu = -(1.0 + sum_gm) / sum_inv;
    const bool next_inactive = k + 1 == order.size() || -g[order[k + 1]] <= nu;
    if (-g[i] > nu && next_inactive) break;
  }
  auto fill = [&](double v) {
    double s = 0.0;
    for (Eigen::Index i : pos) {
      w[i] = std::max(0.0, -(g[i] + v) / m[i]);
      s += w[i];
    }
    return s;
  };
  if (!zero.empty()) {
    const Eigen::Index j = best_zero();
    if (g[j] + nu < 0.0) {
      // The linear coordinate undercuts the multiplier; it absorbs the remaining mass.
      const double s = fill(-g[j]);
      w[j] = std::max(0.0, 1.0 - s);
      return w;
    }
  }
  fill(nu);
  return w;
}

}  // namespace

Vec minimize_quadratic(const SetDescriptor& set, const Mat& m, const Vec& g) {
  const int n = set.dim();
  if (m.rows() != n || m.cols() != n) throw InvalidArgument("minimize_quadratic: M dimension mismatch");
  require_dim(g, n, "minimize_quadratic linear term");

  if (is_diagonal(m)) {
    const Vec d = m.diagonal();
    if (d.minCoeff() < 0.0) throw InvalidArgument("minimize_quadratic: M must be PSD");
    switch (set.kind()) {
      case SetKind::free: return minimize_free_diag(d, g);
      case SetKind::box: return minimize_box_diag(set.lower(), set.upper(), d, g);
      case SetKind::simplex: return minimize_simplex_diag(d, g);
      case SetKind::euclidean_ball: {
        const Vec h = d.cwiseProduct(set.center()) + g;
        return set.center() + minimize_ball_diag(d, h, set.radius());
      }
    }
  }

  if (set.kind() != SetKind::free && set.kind() != SetKind::euclidean_ball) {
    throw UnsupportedEvaluation("minimize_quadratic: non-diagonal M is supported on ball and free sets only");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(m);
  const Mat& v = eig.eigenvectors();
  Vec lam = eig.eigenvalues();
  const double tol = 1e-13 * std::max(1.0, lam.cwiseAbs().maxCoeff());
  if (lam.minCoeff() < -tol) throw InvalidArgument("minimize_quadratic: M must be PSD");
  lam = lam.cwiseMax(0.0);
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam[i] <= tol) lam[i] = 0.0;
  if (set.kind() == SetKind::free) {
    Vec h = v.transpose() * g;
    for (Eigen::Index i = 0; i < h.size(); ++i)
      if (lam[i] == 0.0 && std::abs(h[i]) <= 1e-13 * std::max(1.0, g.norm())) h[i] = 0.0;
    return v * minimize_free_diag(lam, h);
  }
  const Vec h = v.transpose() * (m * set.center() + g);
  return set.center() + v * minimize_ball_diag(lam, h, set.radius());
}

}  // namespace apd

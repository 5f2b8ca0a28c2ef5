#include "apd/sets.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <vector>

#include "apd/errors.hpp"

namespace apd {

std::string to_string(SetKind kind) {
  switch (kind) {
    case SetKind::box: return "box";
    case SetKind::euclidean_ball: return "euclidean_ball";
    case SetKind::simplex: return "simplex";
    case SetKind::free: return "free";
  }
  return "unknown";
}

SetKind set_kind_from_string(const std::string& name) {
  if (name == "box") return SetKind::box;
  if (name == "euclidean_ball" || name == "ball") return SetKind::euclidean_ball;
  if (name == "simplex") return SetKind::simplex;
  if (name == "free") return SetKind::free;
  throw InvalidArgument("unknown set variant '" + name + "'");
}

SetDescriptor SetDescriptor::box(Vec lower, Vec upper) {
  if (lower.size() == 0 || lower.size() != upper.size())
    throw InvalidArgument("box: lower and upper must be non-empty and of equal length");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= upper[i]))
      throw InvalidArgument("box: lower > upper at coordinate " + std::to_string(i));
  }
  SetDescriptor s(SetKind::box, static_cast<int>(lower.size()));
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

SetDescriptor SetDescriptor::ball(Vec center, double radius) {
  if (center.size() == 0) throw InvalidArgument("ball: empty center");
  if (!(radius > 0.0)) throw InvalidArgument("ball: radius must be positive");
  SetDescriptor s(SetKind::euclidean_ball, static_cast<int>(center.size()));
  s.center_ = std::move(center);
  s.radius_ = radius;
  return s;
}

SetDescriptor SetDescriptor::simplex(int dim) {
  if (dim < 1) throw InvalidArgument("simplex: dimension must be >= 1");
  return SetDescriptor(SetKind::simplex, dim);
}

SetDescriptor SetDescriptor::free(int dim) {
  if (dim < 1) throw InvalidArgument("free set: dimension must be >= 1");
  return SetDescriptor(SetKind::free, dim);
}

Vec SetDescriptor::center_point() const {
  switch (kind_) {
    case SetKind::box: return 0.5 * (lower_ + upper_);
    case SetKind::euclidean_ball: return center_;
    case SetKind::simplex: return Vec::Constant(dim_, 1.0 / dim_);
    case SetKind::free: return Vec::Zero(dim_);
  }
  return Vec::Zero(dim_);
}

double SetDescriptor::violation(const Vec& x) const {
  require_dim(x, dim_, "set membership");
  switch (kind_) {
    case SetKind::box: {
      const double below = (lower_ - x).maxCoeff();
      const double above = (x - upper_).maxCoeff();
      return std::max({0.0, below, above});
    }
    case SetKind::euclidean_ball:
      return std::max(0.0, (x - center_).norm() - radius_);
    case SetKind::simplex:
      return std::max({0.0, -x.minCoeff(), std::abs(x.sum() - 1.0)});
    case SetKind::free:
      return 0.0;
  }
  return 0.0;
}

Vec project_simplex(const Vec& x) {
  const Eigen::Index n = x.size();
  std::vector<double> sorted(x.data(), x.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) threshold = candidate;
  }
  return (x.array() - threshold).max(0.0).matrix();
}

Vec SetDescriptor::project(const Vec& x) const {
  require_dim(x, dim_, "projection");
  switch (kind_) {
    case SetKind::box: return x.cwiseMax(lower_).cwiseMin(upper_);
    case SetKind::euclidean_ball: {
      const Vec d = x - center_;
      const double r = d.norm();
      if (r <= radius_) return x;
      return center_ + (radius_ / r) * d;
    }
    case SetKind::simplex: return project_simplex(x);
    case SetKind::free: return x;
  }
  return x;
}

double SetDescriptor::support(const Vec& c) const {
  require_dim(c, dim_, "support function");
  switch (kind_) {
    case SetKind::box: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) s += std::max(c[i] * lower_[i], c[i] * upper_[i]);
      return s;
    }
    case SetKind::euclidean_ball: return c.dot(center_) + radius_ * c.norm();
    case SetKind::simplex: return c.maxCoeff();
    case SetKind::free:
      if (c.isZero(0.0)) return 0.0;
      throw UnsupportedEvaluation("support function of a free set is unbounded");
  }
  return 0.0;
}

Vec SetDescriptor::support_point(const Vec& c) const {
  require_dim(c, dim_, "support point");
  switch (kind_) {
    case SetKind::box: {
      Vec w(dim_);
      for (int i = 0; i < dim_; ++i) w[i] = c[i] >= 0.0 ? upper_[i] : lower_[i];
      return w;
    }
    case SetKind::euclidean_ball: {
      const double n = c.norm();
      return n > 0.0 ? Vec(center_ + (radius_ / n) * c) : center_;
    }
    case SetKind::simplex: {
      Eigen::Index j = 0;
      c.maxCoeff(&j);
      Vec w = Vec::Zero(dim_);
      w[j] = 1.0;
      return w;
    }
    case SetKind::free:
      if (c.isZero(0.0)) return Vec::Zero(dim_);
      throw UnsupportedEvaluation("support point of a free set is unbounded");
  }
  return Vec::Zero(dim_);
}

std::string SetDescriptor::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(dim=" << dim_;
  if (kind_ == SetKind::euclidean_ball) os << ", radius=" << radius_;
  os << ")";
  return os.str();
}

void require_dim(const Vec& x, int dim, const char* what) {
  if (x.size() != dim) {
    throw InvalidArgument(std::string(what) + ": expected dimension " + std::to_string(dim) +
                          ", got " + std::to_string(x.size()));
  }
}

void require_feasible(const SetDescriptor& set, const Vec& x, const std::string& set_name,
                      double tol) {
  const double v = set.violation(x);
  if (v > tol) {
    std::ostringstream os;
    os << "point infeasible for set " << set_name << " " << set.describe() << ": violation " << v;
    throw InfeasibleError(set_name, os.str());
  }
}

}  // namespace apd

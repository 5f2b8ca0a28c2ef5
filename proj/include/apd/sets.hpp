#pragma once

#include <string>

#include <Eigen/Dense>

namespace apd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class SetKind { box, euclidean_ball, simplex, free };

std::string to_string(SetKind kind);
SetKind set_kind_from_string(const std::string& name);

/// Closed convex set with a closed-form Euclidean projection and support function.
class SetDescriptor {
 public:
  static SetDescriptor box(Vec lower, Vec upper);
  static SetDescriptor ball(Vec center, double radius);
  static SetDescriptor simplex(int dim);
  static SetDescriptor free(int dim);

  SetKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  bool bounded() const noexcept { return kind_ != SetKind::free; }

  // Box bounds; empty for other kinds.
  const Vec& lower() const noexcept { return lower_; }
  const Vec& upper() const noexcept { return upper_; }
  // Ball center; empty for other kinds.
  const Vec& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }

  /// Box midpoint, ball center, uniform simplex point, origin for free.
  Vec center_point() const;

  /// Nonnegative infeasibility measure; zero iff x is in the set.
  double violation(const Vec& x) const;
  bool contains(const Vec& x, double tol = 1e-9) const { return violation(x) <= tol; }

  Vec project(const Vec& x) const;

  /// max_{w in set} <c, w>. Throws UnsupportedEvaluation on the free set unless c == 0.
  double support(const Vec& c) const;
  /// A maximizer of <c, w> over the set.
  Vec support_point(const Vec& c) const;

  std::string describe() const;

 private:
  SetDescriptor(SetKind kind, int dim) : kind_(kind), dim_(dim) {}

  SetKind kind_;
  int dim_;
  Vec lower_, upper_, center_;
  double radius_ = 0.0;
};

/// Euclidean projection onto the probability simplex (sort-and-threshold).
Vec project_simplex(const Vec& x);

/// Throws InvalidArgument unless x has the expected dimension.
void require_dim(const Vec& x, int dim, const char* what);

/// Throws InfeasibleError naming `set_name` when x violates the set by more than tol.
void require_feasible(const SetDescriptor& set, const Vec& x, const std::string& set_name,
                      double tol = 1e-9);

}  // namespace apd
